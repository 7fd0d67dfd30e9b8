#ifndef CFSHIFT_DATA_HPP
#define CFSHIFT_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfshift/matrix.hpp"

namespace cfshift {

/// One domain's worth of labeled samples.
struct DomainData {
    std::string domain_id;
    Matrix features;          // n x d
    std::vector<int> labels;  // n, each in [0, num_classes)
};

/// Multi-domain labeled collection. Domains named in source_ids carry the
/// supervision signal; target_ids contribute features only; anything else
/// is held out entirely (used for reports and evaluation).
struct LabeledDataset {
    std::vector<DomainData> domains;
    std::vector<std::string> source_ids;
    std::vector<std::string> target_ids;
    int num_classes = 0;

    std::size_t dim() const { return domains.empty() ? 0 : domains.front().features.cols(); }
    const DomainData* find(const std::string& domain_id) const;
    std::vector<FeatureMatrix> feature_matrices() const;
};

struct DomainTransform {
    double rotation_deg = 0.0;          // applied in the first two dimensions
    std::vector<double> translation;    // length d (empty = zero)
};

/// Recipe for a synthetic multi-domain classification dataset. Class c has
/// a Gaussian cluster centered on a regular polygon of radius
/// class_separation in dimensions (0, 1) (for 3 classes, the 2-simplex),
/// offset by class_axis_offset * (c - (C-1)/2) along dimension 2 when
/// d >= 3. Domain t then rotates the first two dimensions and translates.
struct SyntheticSpec {
    std::size_t n_domains = 3;
    std::size_t classes = 3;
    std::size_t dim = 16;
    std::size_t samples_per_class_per_domain = 200;
    std::vector<DomainTransform> transforms;  // one per domain
    double noise_std = 0.4;
    double class_separation = 4.0;
    double class_axis_offset = 1.6;
    std::uint64_t seed = 0;
};

/// Deterministic synthetic dataset; domains are named "A", "B", ... in
/// order. Two calls with the same spec produce bit-identical data.
LabeledDataset generate(const SyntheticSpec& spec);

/// The fixed 3-domain / 3-class / 16-dim / 200-per-cell workbench dataset:
/// domain t translated by 1.75 * t along dimension 2. Source "A",
/// target "C", with "B" held out in between.
SyntheticSpec benchmark_spec(std::uint64_t seed);

enum class DataFormat { csv };

/// Reads the CSV data contract: header "domain,label,f0,..,f{d-1}", one
/// sample per row. Parse failures name the offending line.
LabeledDataset load_embeddings(const std::filesystem::path& path,
                               DataFormat format = DataFormat::csv);

/// Writes the same CSV, full double precision, domains in dataset order.
void save_embeddings(const LabeledDataset& dataset, const std::filesystem::path& path,
                     DataFormat format = DataFormat::csv);

}  // namespace cfshift

#endif
