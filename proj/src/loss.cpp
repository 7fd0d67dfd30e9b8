#include "cfshift/loss.hpp"

#include <stdexcept>

#include "json.hpp"

namespace cfshift {

double cfl_distance(const EcfVector& a, const EcfVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cfl_distance: ECF lengths differ (banks do not match)");
    if (a.size() == 0) throw std::invalid_argument("cfl_distance: empty ECF");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double dr = a.re[k] - b.re[k];
        const double di = a.im[k] - b.im[k];
        sum += dr * dr + di * di;
    }
    return sum / static_cast<double>(a.size());
}

double cfl_between(const FeatureMatrix& a, const FeatureMatrix& b, const FrequencyBank& bank) {
    return cfl_distance(ecf_eval(a, bank), ecf_eval(b, bank));
}

ShiftReport distance_matrix(const std::vector<FeatureMatrix>& datasets,
                            const FrequencyBank& bank) {
    if (datasets.size() < 2)
        throw std::invalid_argument("distance_matrix: need at least 2 datasets");

    ShiftReport report;
    report.bank = bank_meta(bank);
    report.matrix = Matrix(datasets.size(), datasets.size());

    std::vector<EcfVector> ecfs;
    ecfs.reserve(datasets.size());
    for (const auto& ds : datasets) {
        report.domain_ids.push_back(ds.domain_id);
        ecfs.push_back(ecf_eval(ds, bank));
    }
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        for (std::size_t j = i + 1; j < datasets.size(); ++j) {
            const double d = cfl_distance(ecfs[i], ecfs[j]);
            report.matrix(i, j) = d;
            report.matrix(j, i) = d;
        }
    }
    return report;
}

std::string to_json(const ShiftReport& report) {
    nlohmann::ordered_json doc;
    doc["domains"] = report.domain_ids;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.matrix.rows(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < report.matrix.cols(); ++j) row.push_back(report.matrix(i, j));
        rows.push_back(std::move(row));
    }
    doc["matrix"] = std::move(rows);
    doc["bank"] = {{"seed", report.bank.seed},
                   {"scale", report.bank.scale},
                   {"scheme", bank_scheme_name(report.bank.scheme)},
                   {"K", report.bank.k}};
    return doc.dump();
}

}  // namespace cfshift
