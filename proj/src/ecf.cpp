#include "cfshift/ecf.hpp"

#include <cmath>
#include <stdexcept>

#include "cfshift/rng.hpp"

namespace cfshift {

std::string bank_scheme_name(BankScheme scheme) {
    return scheme == BankScheme::gaussian ? "gaussian" : "radial-sweep";
}

BankScheme parse_bank_scheme(const std::string& name) {
    if (name == "gaussian") return BankScheme::gaussian;
    if (name == "radial-sweep") return BankScheme::radial_sweep;
    throw std::invalid_argument("unknown bank scheme: " + name);
}

FrequencyBank sample_frequency_bank(std::size_t dim, std::size_t count, double scale,
                                    std::uint64_t seed, BankScheme scheme,
                                    std::size_t directions) {
    if (dim < 1) throw std::invalid_argument("sample_frequency_bank: dim must be >= 1");
    if (count < 1) throw std::invalid_argument("sample_frequency_bank: count must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("sample_frequency_bank: scale must be > 0");

    FrequencyBank bank;
    bank.seed = seed;
    bank.scale = scale;
    bank.scheme = scheme;
    bank.directions = scheme == BankScheme::radial_sweep ? directions : 1;
    bank.freqs = Matrix(count, dim);

    rng::NormalSampler normal(seed);
    if (scheme == BankScheme::gaussian) {
        for (std::size_t k = 0; k < count; ++k)
            for (std::size_t j = 0; j < dim; ++j) bank.freqs(k, j) = scale * normal.next();
        return bank;
    }

    if (directions < 1)
        throw std::invalid_argument("sample_frequency_bank: directions must be >= 1");
    if (count % directions != 0)
        throw std::invalid_argument("sample_frequency_bank: count must be a multiple of directions");
    const std::size_t steps = count / directions;
    for (std::size_t m = 0; m < directions; ++m) {
        std::vector<double> u(dim);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                u[j] = normal.next();
                norm += u[j] * u[j];
            }
            norm = std::sqrt(norm);
        } while (norm == 0.0);
        for (std::size_t i = 0; i < steps; ++i) {
            const double t = scale * static_cast<double>(i) / static_cast<double>(steps);
            for (std::size_t j = 0; j < dim; ++j) bank.freqs(m * steps + i, j) = t * u[j] / norm;
        }
    }
    return bank;
}

EcfVector ecf_eval(const FeatureMatrix& features, const FrequencyBank& bank) {
    if (features.rows() < 1) throw std::invalid_argument("ecf_eval: empty feature matrix");
    if (features.cols() != bank.cols())
        throw std::invalid_argument("ecf_eval: feature dimension does not match bank dimension");

    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    const std::size_t count = bank.size();

    EcfVector out;
    out.re.resize(count);
    out.im.resize(count);
    out.n_samples = n;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < count; ++k) {
        const auto w = bank.freqs.row(k);
        double sum_cos = 0.0;
        double sum_sin = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = features.values.row(i);
            double theta = 0.0;
            for (std::size_t j = 0; j < d; ++j) theta += w[j] * x[j];
            sum_cos += std::cos(theta);
            sum_sin += std::sin(theta);
        }
        out.re[k] = sum_cos * inv_n;
        out.im[k] = sum_sin * inv_n;
    }
    return out;
}

std::pair<FeatureMatrix, ColumnStats> standardize(const FeatureMatrix& features,
                                                  const std::optional<ColumnStats>& stats) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (n < 1) throw std::invalid_argument("standardize: empty feature matrix");

    ColumnStats use;
    if (stats.has_value()) {
        if (stats->mean.size() != d || stats->stddev.size() != d)
            throw std::invalid_argument("standardize: stats dimension does not match features");
        for (double s : stats->stddev)
            if (!(s > 0.0)) throw std::invalid_argument("standardize: supplied stddev must be > 0");
        use = *stats;
    } else {
        use.mean.resize(d);
        use.stddev.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            double lo = features.values(0, j);
            double hi = lo;
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = features.values(i, j);
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo == hi) {
                // constant column: recording the exact value and unit scale
                // makes the standardized column exactly zero
                use.mean[j] = lo;
                use.stddev[j] = 1.0;
                continue;
            }
            const double mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dev = features.values(i, j) - mean;
                ss += dev * dev;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n));
            use.mean[j] = mean;
            use.stddev[j] = sd > 0.0 ? sd : 1.0;
        }
    }

    FeatureMatrix out;
    out.domain_id = features.domain_id;
    out.values = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            out.values(i, j) = (features.values(i, j) - use.mean[j]) / use.stddev[j];
    return {std::move(out), std::move(use)};
}

}  // namespace cfshift
