#ifndef CFSHIFT_PLOT_HPP
#define CFSHIFT_PLOT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cfshift/matrix.hpp"
#include "cfshift/pca.hpp"

namespace cfshift {

enum class PlotKind { cf_plane, pca_scatter };

struct PlotSpec {
    PlotKind kind = PlotKind::cf_plane;
    std::size_t directions = 3;   // random unit rays per sweep
    std::size_t steps = 40;       // points per ray, starting at t = 0
    double sweep_scale = 3.0;     // largest frequency magnitude swept
};

/// The ECF values of one domain along one sweep ray; t runs from 0 so
/// every trace starts at (1, 0).
struct CfTrace {
    std::string domain_id;
    std::size_t direction = 0;
    std::vector<double> t;
    std::vector<double> re;
    std::vector<double> im;
};

/// Evaluates each domain's ECF along `directions` seeded random rays.
/// Traces come out grouped by domain, then by direction.
std::vector<CfTrace> cf_plane_traces(const std::vector<FeatureMatrix>& domains,
                                     const PlotSpec& spec, std::uint64_t seed);

std::string render_cf_plane(const std::vector<CfTrace>& traces,
                            const std::vector<std::string>& domain_ids);

/// Companion CSV: domain,direction,t,re,im.
std::string cf_plane_csv(const std::vector<CfTrace>& traces);

struct PcaScatter {
    PcaModel model;                    // fitted on all domains pooled
    std::vector<std::string> domain_ids;
    std::vector<Matrix> projections;   // one n x 2 block per domain
};

PcaScatter pca_scatter_points(const std::vector<FeatureMatrix>& domains);

std::string render_pca_scatter(const PcaScatter& scatter);

/// Companion CSV: domain,pc1,pc2.
std::string pca_scatter_csv(const PcaScatter& scatter);

/// Deterministic palette assignment by domain order.
const char* domain_color(std::size_t index);

/// Mean over domain pairs of the mean pointwise ECF-trace distance;
/// the tightness measure for before/after comparisons.
double mean_pairwise_trace_distance(const std::vector<CfTrace>& traces);

}  // namespace cfshift

#endif
