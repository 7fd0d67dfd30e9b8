#ifndef CFSHIFT_LOSS_HPP
#define CFSHIFT_LOSS_HPP

#include <string>
#include <vector>

#include "cfshift/ecf.hpp"
#include "cfshift/matrix.hpp"

namespace cfshift {

/// The bank parameters carried in a ShiftReport so the report regenerates.
struct BankMeta {
    std::uint64_t seed = 0;
    double scale = 1.0;
    BankScheme scheme = BankScheme::gaussian;
    std::size_t k = 0;
};

inline BankMeta bank_meta(const FrequencyBank& bank) {
    return {bank.seed, bank.scale, bank.scheme, bank.size()};
}

/// Symmetric matrix of pairwise characteristic-function distances between
/// domains, with zero diagonal.
struct ShiftReport {
    std::vector<std::string> domain_ids;
    Matrix matrix;
    BankMeta bank;
};

/// Mean squared modulus of the complex ECF difference over the bank:
/// (1/K) sum_k [(re_a - re_b)^2 + (im_a - im_b)^2]. Both arguments must
/// come from the same bank (checked by length only).
double cfl_distance(const EcfVector& a, const EcfVector& b);

/// cfl_distance of the two feature sets' ECFs on a shared bank.
double cfl_between(const FeatureMatrix& a, const FeatureMatrix& b, const FrequencyBank& bank);

/// Pairwise cfl_between over >= 2 feature sets; each ECF is evaluated once.
ShiftReport distance_matrix(const std::vector<FeatureMatrix>& datasets,
                            const FrequencyBank& bank);

/// JSON document {"domains": [...], "matrix": [[...]], "bank": {...}} with
/// full double precision.
std::string to_json(const ShiftReport& report);

}  // namespace cfshift

#endif
