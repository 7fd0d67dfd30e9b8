#ifndef CFSHIFT_ECF_HPP
#define CFSHIFT_ECF_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfshift/matrix.hpp"

namespace cfshift {

enum class BankScheme { gaussian, radial_sweep };

std::string bank_scheme_name(BankScheme scheme);
BankScheme parse_bank_scheme(const std::string& name);

/// A set of K frequency vectors at which empirical characteristic
/// functions are evaluated, together with the sampling metadata that
/// regenerates it bit-for-bit.
struct FrequencyBank {
    Matrix freqs;  // K x d
    std::uint64_t seed = 0;
    double scale = 1.0;
    BankScheme scheme = BankScheme::gaussian;
    std::size_t directions = 1;  // radial sweep only: number of rays

    std::size_t size() const { return freqs.rows(); }
    std::size_t cols() const { return freqs.cols(); }
};

/// ECF values at each bank frequency, stored as explicit (re, im) pairs.
struct EcfVector {
    std::vector<double> re;
    std::vector<double> im;
    std::size_t n_samples = 0;

    std::size_t size() const { return re.size(); }
};

/// Per-column mean/stddev. Zero-variance columns record stddev 1 so that
/// applying the stats never divides by zero.
struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Draws a K x d frequency bank.
///
/// gaussian: every entry i.i.d. normal with mean 0 and deviation `scale`
/// (mt19937_64 + Box-Muller, row-major fill order).
///
/// radial_sweep: `directions` random unit rays u, each carrying
/// K/directions points t_i * u with t_i = scale * i / steps, i starting
/// at 0; K must be a multiple of `directions`.
FrequencyBank sample_frequency_bank(std::size_t dim, std::size_t count, double scale,
                                    std::uint64_t seed, BankScheme scheme,
                                    std::size_t directions = 1);

/// Empirical characteristic function of the feature rows at every bank
/// frequency: re[k] = mean_i cos(w_k . x_i), im[k] = mean_i sin(w_k . x_i).
/// Summation runs in row order so results are reproducible bit-for-bit.
EcfVector ecf_eval(const FeatureMatrix& features, const FrequencyBank& bank);

/// Z-scores each column, using the supplied stats when given (e.g. to carry
/// source-domain statistics onto target features) or stats computed from
/// this matrix otherwise. Population convention (divisor n). Constant
/// columns map to exact zeros.
std::pair<FeatureMatrix, ColumnStats> standardize(
    const FeatureMatrix& features, const std::optional<ColumnStats>& stats = std::nullopt);

}  // namespace cfshift

#endif
