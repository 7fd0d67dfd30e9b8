#include "cfshift/plot.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cfshift/ecf.hpp"
#include "cfshift/svg.hpp"

namespace cfshift {

namespace {

constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

std::string fullnum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const char* domain_color(std::size_t index) {
    return kPalette[index % (sizeof kPalette / sizeof kPalette[0])];
}

std::vector<CfTrace> cf_plane_traces(const std::vector<FeatureMatrix>& domains,
                                     const PlotSpec& spec, std::uint64_t seed) {
    if (domains.empty()) throw std::invalid_argument("cf_plane_traces: no domains");
    if (spec.directions < 1) throw std::invalid_argument("cf_plane_traces: directions must be >= 1");
    if (spec.steps < 2) throw std::invalid_argument("cf_plane_traces: steps must be >= 2");

    const std::size_t d = domains.front().cols();
    const FrequencyBank bank =
        sample_frequency_bank(d, spec.directions * spec.steps, spec.sweep_scale, seed,
                              BankScheme::radial_sweep, spec.directions);

    std::vector<CfTrace> traces;
    traces.reserve(domains.size() * spec.directions);
    for (const auto& domain : domains) {
        const EcfVector phi = ecf_eval(domain, bank);
        for (std::size_t m = 0; m < spec.directions; ++m) {
            CfTrace trace;
            trace.domain_id = domain.domain_id;
            trace.direction = m;
            trace.t.reserve(spec.steps);
            trace.re.reserve(spec.steps);
            trace.im.reserve(spec.steps);
            for (std::size_t i = 0; i < spec.steps; ++i) {
                const std::size_t k = m * spec.steps + i;
                trace.t.push_back(spec.sweep_scale * static_cast<double>(i) /
                                  static_cast<double>(spec.steps));
                trace.re.push_back(phi.re[k]);
                trace.im.push_back(phi.im[k]);
            }
            traces.push_back(std::move(trace));
        }
    }
    return traces;
}

std::string render_cf_plane(const std::vector<CfTrace>& traces,
                            const std::vector<std::string>& domain_ids) {
    const double size = 640.0;
    const double limit = 1.1;  // Re/Im axes span [-1.1, 1.1]
    auto px = [&](double re) { return (re + limit) / (2.0 * limit) * size; };
    auto py = [&](double im) { return (limit - im) / (2.0 * limit) * size; };

    SvgWriter svg(size, size);
    svg.rect(0, 0, size, size, "#ffffff");
    svg.line(px(-limit), py(0), px(limit), py(0), "#cccccc");
    svg.line(px(0), py(-limit), px(0), py(limit), "#cccccc");
    // unit disk boundary: every ECF value lies inside it
    {
        std::vector<std::pair<double, double>> ring;
        for (int i = 0; i <= 128; ++i) {
            const double a = 2.0 * 3.14159265358979323846 * i / 128.0;
            ring.emplace_back(px(std::cos(a)), py(std::sin(a)));
        }
        svg.polyline(ring, "#999999", 1.0, 0.8);
    }
    svg.text(px(limit) - 30, py(0) - 6, "Re", 12, "#555555");
    svg.text(px(0) + 6, py(limit) + 14, "Im", 12, "#555555");

    for (const auto& trace : traces) {
        std::size_t color_idx = 0;
        for (std::size_t i = 0; i < domain_ids.size(); ++i)
            if (domain_ids[i] == trace.domain_id) color_idx = i;
        std::vector<std::pair<double, double>> pts;
        pts.reserve(trace.t.size());
        for (std::size_t i = 0; i < trace.t.size(); ++i)
            pts.emplace_back(px(trace.re[i]), py(trace.im[i]));
        svg.polyline(pts, domain_color(color_idx), 1.5, 0.85);
    }

    for (std::size_t i = 0; i < domain_ids.size(); ++i) {
        const double y = 18.0 + 18.0 * static_cast<double>(i);
        svg.rect(12, y - 9, 14, 4, domain_color(i));
        svg.text(32, y, domain_ids[i], 12);
    }
    return svg.str();
}

std::string cf_plane_csv(const std::vector<CfTrace>& traces) {
    std::string out = "domain,direction,t,re,im\n";
    for (const auto& trace : traces)
        for (std::size_t i = 0; i < trace.t.size(); ++i) {
            out += trace.domain_id;
            out += ',';
            out += std::to_string(trace.direction);
            out += ',';
            out += fullnum(trace.t[i]);
            out += ',';
            out += fullnum(trace.re[i]);
            out += ',';
            out += fullnum(trace.im[i]);
            out += '\n';
        }
    return out;
}

PcaScatter pca_scatter_points(const std::vector<FeatureMatrix>& domains) {
    if (domains.empty()) throw std::invalid_argument("pca_scatter_points: no domains");
    const std::size_t d = domains.front().cols();
    std::size_t total = 0;
    for (const auto& domain : domains) {
        if (domain.cols() != d)
            throw std::invalid_argument("pca_scatter_points: domain dimensions disagree");
        total += domain.rows();
    }

    FeatureMatrix pooled;
    pooled.domain_id = "pooled";
    pooled.values = Matrix(total, d);
    std::size_t row = 0;
    for (const auto& domain : domains)
        for (std::size_t i = 0; i < domain.rows(); ++i, ++row)
            std::copy(domain.values.row(i).begin(), domain.values.row(i).end(),
                      pooled.values.row(row).begin());

    PcaScatter scatter;
    scatter.model = pca_fit(pooled, 2);
    for (const auto& domain : domains) {
        scatter.domain_ids.push_back(domain.domain_id);
        scatter.projections.push_back(pca_project(scatter.model, domain));
    }
    return scatter;
}

std::string render_pca_scatter(const PcaScatter& scatter) {
    const double size = 640.0;
    const double margin = 40.0;

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& proj : scatter.projections)
        for (std::size_t i = 0; i < proj.rows(); ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const double v = proj(i, j);
                if (first) { lo = hi = v; first = false; }
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (first) { lo = -1.0; hi = 1.0; }
    const double pad = (hi - lo) * 0.05 + 1e-12;
    lo -= pad;
    hi += pad;
    const double span = hi - lo;
    auto px = [&](double x) { return margin + (x - lo) / span * (size - 2 * margin); };
    auto py = [&](double y) { return size - margin - (y - lo) / span * (size - 2 * margin); };

    SvgWriter svg(size, size);
    svg.rect(0, 0, size, size, "#ffffff");
    svg.rect(margin, margin, size - 2 * margin, size - 2 * margin, "none", "#aaaaaa");
    svg.text(size / 2 - 12, size - 10, "PC1", 12, "#555555");
    svg.text(8, size / 2, "PC2", 12, "#555555");

    for (std::size_t di = 0; di < scatter.projections.size(); ++di) {
        const Matrix& proj = scatter.projections[di];
        for (std::size_t i = 0; i < proj.rows(); ++i)
            svg.circle(px(proj(i, 0)), py(proj(i, 1)), 2.5, domain_color(di), "none", 0.7);
    }
    for (std::size_t i = 0; i < scatter.domain_ids.size(); ++i) {
        const double y = 18.0 + 18.0 * static_cast<double>(i);
        svg.rect(12, y - 9, 14, 4, domain_color(i));
        svg.text(32, y, scatter.domain_ids[i], 12);
    }
    return svg.str();
}

std::string pca_scatter_csv(const PcaScatter& scatter) {
    std::string out = "domain,pc1,pc2\n";
    for (std::size_t di = 0; di < scatter.projections.size(); ++di) {
        const Matrix& proj = scatter.projections[di];
        for (std::size_t i = 0; i < proj.rows(); ++i) {
            out += scatter.domain_ids[di];
            out += ',';
            out += fullnum(proj(i, 0));
            out += ',';
            out += fullnum(proj(i, 1));
            out += '\n';
        }
    }
    return out;
}

double mean_pairwise_trace_distance(const std::vector<CfTrace>& traces) {
    // group traces by domain in first-appearance order
    std::vector<std::string> domains;
    for (const auto& trace : traces) {
        bool seen = false;
        for (const auto& d : domains) seen = seen || d == trace.domain_id;
        if (!seen) domains.push_back(trace.domain_id);
    }
    if (domains.size() < 2)
        throw std::invalid_argument("mean_pairwise_trace_distance: need >= 2 domains");

    auto domain_points = [&](const std::string& id) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& trace : traces)
            if (trace.domain_id == id)
                for (std::size_t i = 0; i < trace.re.size(); ++i)
                    pts.emplace_back(trace.re[i], trace.im[i]);
        return pts;
    };

    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < domains.size(); ++a) {
        const auto pa = domain_points(domains[a]);
        for (std::size_t b = a + 1; b < domains.size(); ++b) {
            const auto pb = domain_points(domains[b]);
            if (pa.size() != pb.size())
                throw std::invalid_argument("mean_pairwise_trace_distance: trace lengths differ");
            double acc = 0.0;
            for (std::size_t i = 0; i < pa.size(); ++i)
                acc += std::hypot(pa[i].first - pb[i].first, pa[i].second - pb[i].second);
            sum += acc / static_cast<double>(pa.size());
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

}  // namespace cfshift
