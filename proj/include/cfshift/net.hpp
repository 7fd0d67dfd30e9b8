#ifndef CFSHIFT_NET_HPP
#define CFSHIFT_NET_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cfshift/matrix.hpp"

namespace cfshift {

struct DenseLayer {
    Matrix weight;             // out x in
    std::vector<double> bias;  // out
};

/// Feature adapter plus classification head. Every adapter layer applies
/// tanh, so embeddings live in (-1, 1)^e; with no adapter layers the
/// embedding is the input itself. The head is linear.
struct AdapterModel {
    std::vector<DenseLayer> layers;
    DenseLayer head;  // C x e
    std::size_t input_dim = 0;

    std::size_t embedding_dim() const {
        return layers.empty() ? input_dim : layers.back().weight.rows();
    }
    std::size_t num_classes() const { return head.weight.rows(); }
};

/// Gradient holder with the same shapes as the model it was built from.
struct ModelGrad {
    std::vector<DenseLayer> layers;
    DenseLayer head;
};

/// Builds the chain input_dim -> hidden... -> embed_dim plus an
/// embed_dim -> classes head. Weights uniform in +-sqrt(3/fan_in)
/// (unit-variance scaling), biases zero. Deterministic in seed.
AdapterModel init_adapter(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                          std::size_t embed_dim, std::size_t classes, std::uint64_t seed);

struct ForwardResult {
    FeatureMatrix embeddings;  // n x e, tagged with the batch's domain
    Matrix logits;             // n x C
};

/// Pure forward pass.
ForwardResult forward(const AdapterModel& model, const FeatureMatrix& batch);

/// Forward pass keeping every activation for backpropagation.
/// activations[0] is the input; activations[i] the output of layer i.
struct ForwardCache {
    std::vector<Matrix> activations;
    Matrix logits;
};

ForwardCache forward_cached(const AdapterModel& model, const Matrix& batch);

ModelGrad zero_grad(const AdapterModel& model);

/// Accumulates into `grad` the gradient of a scalar loss given its
/// gradients w.r.t. the batch logits and/or embeddings (either may be
/// empty to mean zero).
void backprop(const AdapterModel& model, const ForwardCache& cache, const Matrix& d_logits,
              const Matrix& d_embeddings, ModelGrad& grad);

void sgd_step(AdapterModel& model, const ModelGrad& grad, double lr);

/// Pointers to every parameter in canonical (save) order; the matching
/// flattening of a ModelGrad. Used by the finite-difference checks.
std::vector<double*> parameter_view(AdapterModel& model);
std::vector<double> flatten_grad(const ModelGrad& grad);

/// Binary checkpoint: magic "CFSHIFT1", little-endian u32 dim chain and
/// class count, then raw doubles in parameter order.
void save_checkpoint(const AdapterModel& model, const std::filesystem::path& path);
AdapterModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cfshift

#endif
