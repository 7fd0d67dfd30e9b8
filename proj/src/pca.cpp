#include "cfshift/pca.hpp"

#include <cmath>
#include <stdexcept>

#include "cfshift/rng.hpp"

namespace cfshift {

namespace {

constexpr double kTolerance = 1e-10;
constexpr int kMaxIterations = 10000;

void matvec(const Matrix& m, const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

PcaModel pca_fit(const FeatureMatrix& features, std::size_t k) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");
    if (k < 1 || k > std::min(n, d))
        throw std::invalid_argument("pca_fit: k must be in [1, min(n, d)]");

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += features.values(i, j);
    for (std::size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(n);

    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            const double da = features.values(i, a) - model.mean[a];
            for (std::size_t b = a; b < d; ++b)
                cov(a, b) += da * (features.values(i, b) - model.mean[b]);
        }
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= static_cast<double>(n);
            cov(b, a) = cov(a, b);
        }

    model.components = Matrix(k, d);
    model.explained_variance.assign(k, 0.0);

    std::mt19937_64 gen(0x5ca1ab1eULL);  // fixed start, independent of input order
    std::vector<double> v(d), next(d);
    std::vector<std::vector<double>> found;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) v[j] = rng::uniform(gen, -1.0, 1.0);
        // keep the iterate orthogonal to already-extracted components
        for (const auto& u : found) {
            const double p = dot(v, u);
            for (std::size_t j = 0; j < d; ++j) v[j] -= p * u[j];
        }
        double nv = norm(v);
        if (nv == 0.0) { v[c % d] = 1.0; nv = 1.0; }
        for (std::size_t j = 0; j < d; ++j) v[j] /= nv;

        for (int iter = 0; iter < kMaxIterations; ++iter) {
            matvec(cov, v, next);
            for (const auto& u : found) {
                const double p = dot(next, u);
                for (std::size_t j = 0; j < d; ++j) next[j] -= p * u[j];
            }
            const double nn = norm(next);
            if (nn == 0.0) break;  // covariance annihilates the complement
            for (std::size_t j = 0; j < d; ++j) next[j] /= nn;
            // sign-aligned change between successive iterates
            double change = 0.0;
            const double s = dot(next, v) >= 0.0 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < d; ++j)
                change = std::max(change, std::abs(s * next[j] - v[j]));
            v = next;
            if (change < kTolerance) break;
        }

        matvec(cov, v, next);
        model.explained_variance[c] = std::max(0.0, dot(v, next));
        found.push_back(v);
    }

    // nonincreasing eigenvalue order (degenerate spectra can come out swapped)
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            if (model.explained_variance[b] > model.explained_variance[a]) {
                std::swap(model.explained_variance[a], model.explained_variance[b]);
                std::swap(found[a], found[b]);
            }

    for (std::size_t c = 0; c < k; ++c) {
        // largest-magnitude entry positive, for reproducible plots
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(found[c][j]) > std::abs(found[c][arg])) arg = j;
        const double s = found[c][arg] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components(c, j) = s * found[c][j];
    }
    return model;
}

Matrix pca_project(const PcaModel& model, const FeatureMatrix& features) {
    const std::size_t d = model.mean.size();
    if (features.cols() != d)
        throw std::invalid_argument("pca_project: feature dimension does not match model");
    const std::size_t k = model.components.rows();
    Matrix out(features.rows(), k);
    for (std::size_t i = 0; i < features.rows(); ++i)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                s += (features.values(i, j) - model.mean[j]) * model.components(c, j);
            out(i, c) = s;
        }
    return out;
}

}  // namespace cfshift
