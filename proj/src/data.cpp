#include "cfshift/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cfshift/rng.hpp"

namespace cfshift {

namespace {

std::string domain_name(std::size_t index) {
    if (index < 26) return std::string(1, static_cast<char>('A' + index));
    return "D" + std::to_string(index);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line_no,
                    const std::string& column) {
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        parse_fail(path, line_no, "cannot parse '" + std::string(s) + "' as a number in column " + column);
    if (!std::isfinite(v))
        parse_fail(path, line_no, "non-finite value in column " + column);
    return v;
}

}  // namespace

const DomainData* LabeledDataset::find(const std::string& domain_id) const {
    for (const auto& d : domains)
        if (d.domain_id == domain_id) return &d;
    return nullptr;
}

std::vector<FeatureMatrix> LabeledDataset::feature_matrices() const {
    std::vector<FeatureMatrix> out;
    out.reserve(domains.size());
    for (const auto& d : domains) out.push_back({d.features, d.domain_id});
    return out;
}

LabeledDataset generate(const SyntheticSpec& spec) {
    if (spec.n_domains < 1 || spec.classes < 1 || spec.samples_per_class_per_domain < 1)
        throw std::invalid_argument("generate: counts must be >= 1");
    if (spec.dim < 2) throw std::invalid_argument("generate: dim must be >= 2");
    if (!(spec.noise_std > 0.0)) throw std::invalid_argument("generate: noise_std must be > 0");
    if (!spec.transforms.empty() && spec.transforms.size() != spec.n_domains)
        throw std::invalid_argument("generate: need one transform per domain");
    for (const auto& t : spec.transforms)
        if (!t.translation.empty() && t.translation.size() != spec.dim)
            throw std::invalid_argument("generate: translation length must equal dim");

    const std::size_t n_cell = spec.samples_per_class_per_domain;
    const std::size_t d = spec.dim;
    rng::NormalSampler noise(spec.seed);

    LabeledDataset dataset;
    dataset.num_classes = static_cast<int>(spec.classes);
    for (std::size_t t = 0; t < spec.n_domains; ++t) {
        DomainTransform tf;
        if (!spec.transforms.empty()) tf = spec.transforms[t];
        const double theta = tf.rotation_deg * std::numbers::pi / 180.0;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);

        DomainData domain;
        domain.domain_id = domain_name(t);
        domain.features = Matrix(spec.classes * n_cell, d);
        domain.labels.reserve(spec.classes * n_cell);
        std::size_t row = 0;
        for (std::size_t c = 0; c < spec.classes; ++c) {
            const double ang = 2.0 * std::numbers::pi * static_cast<double>(c) /
                               static_cast<double>(spec.classes);
            std::vector<double> center(d, 0.0);
            center[0] = spec.class_separation * std::cos(ang);
            center[1] = spec.class_separation * std::sin(ang);
            if (d >= 3)
                center[2] = spec.class_axis_offset *
                            (static_cast<double>(c) - (static_cast<double>(spec.classes) - 1.0) / 2.0);
            for (std::size_t s = 0; s < n_cell; ++s, ++row) {
                auto x = domain.features.row(row);
                for (std::size_t j = 0; j < d; ++j) x[j] = center[j] + spec.noise_std * noise.next();
                const double x0 = x[0];
                const double x1 = x[1];
                x[0] = ct * x0 - st * x1;
                x[1] = st * x0 + ct * x1;
                if (!tf.translation.empty())
                    for (std::size_t j = 0; j < d; ++j) x[j] += tf.translation[j];
                domain.labels.push_back(static_cast<int>(c));
            }
        }
        dataset.domains.push_back(std::move(domain));
    }
    return dataset;
}

SyntheticSpec benchmark_spec(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.transforms.resize(spec.n_domains);
    for (std::size_t t = 0; t < spec.n_domains; ++t) {
        spec.transforms[t].translation.assign(spec.dim, 0.0);
        spec.transforms[t].translation[2] = 1.75 * static_cast<double>(t);
    }
    return spec;
}

LabeledDataset load_embeddings(const std::filesystem::path& path, DataFormat) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file (header required)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "domain" || header[1] != "label")
        parse_fail(path, 1, "header must start with 'domain,label'");
    const std::size_t d = header.size() - 2;
    if (d == 0) parse_fail(path, 1, "no feature columns (d == 0)");
    for (std::size_t j = 0; j < d; ++j)
        if (header[j + 2] != "f" + std::to_string(j))
            parse_fail(path, 1, "feature column " + std::to_string(j + 2) + " must be named f" +
                                    std::to_string(j));

    // collect rows per domain in first-appearance order
    std::vector<std::string> order;
    std::vector<std::vector<double>> rows_by_domain;
    std::vector<std::vector<int>> labels_by_domain;
    std::size_t line_no = 1;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            parse_fail(path, line_no,
                       "expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(fields.size()));
        const std::string& domain = fields[0];
        if (domain.empty()) parse_fail(path, line_no, "empty domain tag");

        int label = 0;
        {
            const auto& s = fields[1];
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), label);
            if (ec != std::errc{} || ptr != s.data() + s.size())
                parse_fail(path, line_no, "cannot parse '" + s + "' as an integer label");
            if (label < 0) parse_fail(path, line_no, "negative label");
        }
        max_label = std::max(max_label, label);

        std::size_t idx = 0;
        for (; idx < order.size(); ++idx)
            if (order[idx] == domain) break;
        if (idx == order.size()) {
            order.push_back(domain);
            rows_by_domain.emplace_back();
            labels_by_domain.emplace_back();
        }
        for (std::size_t j = 0; j < d; ++j)
            rows_by_domain[idx].push_back(
                parse_double(fields[j + 2], path, line_no, "f" + std::to_string(j)));
        labels_by_domain[idx].push_back(label);
    }

    LabeledDataset dataset;
    dataset.num_classes = max_label + 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        DomainData domain;
        domain.domain_id = order[i];
        domain.labels = std::move(labels_by_domain[i]);
        domain.features = Matrix(domain.labels.size(), d);
        std::copy(rows_by_domain[i].begin(), rows_by_domain[i].end(), domain.features.data());
        dataset.domains.push_back(std::move(domain));
    }
    return dataset;
}

void save_embeddings(const LabeledDataset& dataset, const std::filesystem::path& path,
                     DataFormat) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

    const std::size_t d = dataset.dim();
    out << "domain,label";
    for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
    out << "\n";

    char buf[32];
    for (const auto& domain : dataset.domains) {
        for (std::size_t i = 0; i < domain.features.rows(); ++i) {
            out << domain.domain_id << ',' << domain.labels[i];
            for (std::size_t j = 0; j < d; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", domain.features(i, j));
                out << ',' << buf;
            }
            out << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace cfshift
