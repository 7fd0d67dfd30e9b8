#ifndef CFSHIFT_PCA_HPP
#define CFSHIFT_PCA_HPP

#include <vector>

#include "cfshift/matrix.hpp"

namespace cfshift {

/// Top-k principal directions of a feature set (population covariance,
/// divisor n). Component rows are unit norm and mutually orthogonal;
/// each row's largest-magnitude entry is positive.
struct PcaModel {
    std::vector<double> mean;
    Matrix components;  // k x d
    std::vector<double> explained_variance;  // nonincreasing
};

/// Power iteration with deflation on the sample covariance. Deterministic:
/// fixed pseudo-random start vector, convergence tolerance 1e-10 on the
/// eigenvector change, at most 10000 iterations per component.
PcaModel pca_fit(const FeatureMatrix& features, std::size_t k = 2);

/// Projects rows onto the principal directions: (x - mean) . components^T.
Matrix pca_project(const PcaModel& model, const FeatureMatrix& features);

}  // namespace cfshift

#endif
