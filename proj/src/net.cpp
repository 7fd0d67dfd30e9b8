#include "cfshift/net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cfshift/rng.hpp"

namespace cfshift {

namespace {

DenseLayer random_layer(std::size_t out, std::size_t in, std::mt19937_64& gen) {
    DenseLayer layer;
    layer.weight = Matrix(out, in);
    const double a = std::sqrt(3.0 / static_cast<double>(in));
    for (std::size_t i = 0; i < out; ++i)
        for (std::size_t j = 0; j < in; ++j) layer.weight(i, j) = rng::uniform(gen, -a, a);
    layer.bias.assign(out, 0.0);
    return layer;
}

// out = x * W^T + b, rows of x are samples
Matrix affine(const Matrix& x, const DenseLayer& layer) {
    const std::size_t n = x.rows();
    const std::size_t in = layer.weight.cols();
    const std::size_t out = layer.weight.rows();
    Matrix y(n, out);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < out; ++o) {
            double s = layer.bias[o];
            for (std::size_t j = 0; j < in; ++j) s += x(i, j) * layer.weight(o, j);
            y(i, o) = s;
        }
    return y;
}

void check_batch(const AdapterModel& model, std::size_t cols) {
    if (cols != model.input_dim)
        throw std::invalid_argument("forward: batch dimension does not match model input");
}

}  // namespace

AdapterModel init_adapter(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                          std::size_t embed_dim, std::size_t classes, std::uint64_t seed) {
    if (input_dim < 1 || embed_dim < 1 || classes < 1)
        throw std::invalid_argument("init_adapter: dimensions must be >= 1");
    for (std::size_t h : hidden)
        if (h < 1) throw std::invalid_argument("init_adapter: hidden sizes must be >= 1");

    AdapterModel model;
    model.input_dim = input_dim;
    std::mt19937_64 gen(seed);
    std::size_t prev = input_dim;
    for (std::size_t h : hidden) {
        model.layers.push_back(random_layer(h, prev, gen));
        prev = h;
    }
    model.layers.push_back(random_layer(embed_dim, prev, gen));
    model.head = random_layer(classes, embed_dim, gen);
    return model;
}

ForwardCache forward_cached(const AdapterModel& model, const Matrix& batch) {
    check_batch(model, batch.cols());
    ForwardCache cache;
    cache.activations.reserve(model.layers.size() + 1);
    cache.activations.push_back(batch);
    for (const auto& layer : model.layers) {
        Matrix a = affine(cache.activations.back(), layer);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = std::tanh(a(i, j));
        cache.activations.push_back(std::move(a));
    }
    cache.logits = affine(cache.activations.back(), model.head);
    return cache;
}

ForwardResult forward(const AdapterModel& model, const FeatureMatrix& batch) {
    ForwardCache cache = forward_cached(model, batch.values);
    ForwardResult result;
    result.embeddings = {std::move(cache.activations.back()), batch.domain_id};
    result.logits = std::move(cache.logits);
    return result;
}

ModelGrad zero_grad(const AdapterModel& model) {
    ModelGrad grad;
    for (const auto& layer : model.layers)
        grad.layers.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                               std::vector<double>(layer.bias.size(), 0.0)});
    grad.head = {Matrix(model.head.weight.rows(), model.head.weight.cols()),
                 std::vector<double>(model.head.bias.size(), 0.0)};
    return grad;
}

void backprop(const AdapterModel& model, const ForwardCache& cache, const Matrix& d_logits,
              const Matrix& d_embeddings, ModelGrad& grad) {
    const Matrix& emb = cache.activations.back();
    const std::size_t n = emb.rows();

    Matrix d_act = d_embeddings.empty() ? Matrix(n, emb.cols()) : d_embeddings;
    if (!d_logits.empty()) {
        // head: dW += G^T emb, db += colsum G, then chain into the embedding
        const std::size_t C = model.head.weight.rows();
        const std::size_t e = model.head.weight.cols();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < C; ++c) {
                const double g = d_logits(i, c);
                grad.head.bias[c] += g;
                for (std::size_t j = 0; j < e; ++j) {
                    grad.head.weight(c, j) += g * emb(i, j);
                    d_act(i, j) += g * model.head.weight(c, j);
                }
            }
    }

    for (std::size_t li = model.layers.size(); li-- > 0;) {
        const Matrix& out = cache.activations[li + 1];
        const Matrix& in = cache.activations[li];
        const DenseLayer& layer = model.layers[li];
        const std::size_t rows = out.rows();
        const std::size_t o_dim = out.cols();
        const std::size_t i_dim = in.cols();
        Matrix d_prev(rows, i_dim);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t o = 0; o < o_dim; ++o) {
                const double g = d_act(i, o) * (1.0 - out(i, o) * out(i, o));
                grad.layers[li].bias[o] += g;
                for (std::size_t j = 0; j < i_dim; ++j) {
                    grad.layers[li].weight(o, j) += g * in(i, j);
                    d_prev(i, j) += g * layer.weight(o, j);
                }
            }
        d_act = std::move(d_prev);
    }
}

void sgd_step(AdapterModel& model, const ModelGrad& grad, double lr) {
    auto apply = [lr](DenseLayer& p, const DenseLayer& g) {
        for (std::size_t i = 0; i < p.weight.rows(); ++i)
            for (std::size_t j = 0; j < p.weight.cols(); ++j) p.weight(i, j) -= lr * g.weight(i, j);
        for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= lr * g.bias[i];
    };
    for (std::size_t li = 0; li < model.layers.size(); ++li) apply(model.layers[li], grad.layers[li]);
    apply(model.head, grad.head);
}

std::vector<double*> parameter_view(AdapterModel& model) {
    std::vector<double*> view;
    auto add = [&view](DenseLayer& layer) {
        for (std::size_t i = 0; i < layer.weight.rows() * layer.weight.cols(); ++i)
            view.push_back(layer.weight.data() + i);
        for (double& b : layer.bias) view.push_back(&b);
    };
    for (auto& layer : model.layers) add(layer);
    add(model.head);
    return view;
}

std::vector<double> flatten_grad(const ModelGrad& grad) {
    std::vector<double> flat;
    auto add = [&flat](const DenseLayer& layer) {
        flat.insert(flat.end(), layer.weight.data(),
                    layer.weight.data() + layer.weight.rows() * layer.weight.cols());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    };
    for (const auto& layer : grad.layers) add(layer);
    add(grad.head);
    return flat;
}

namespace {

constexpr char kMagic[8] = {'C', 'F', 'S', 'H', 'I', 'F', 'T', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

double read_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

void write_layer(std::ostream& out, const DenseLayer& layer) {
    for (std::size_t i = 0; i < layer.weight.rows() * layer.weight.cols(); ++i)
        write_f64(out, layer.weight.data()[i]);
    for (double b : layer.bias) write_f64(out, b);
}

void read_layer(std::istream& in, DenseLayer& layer) {
    for (std::size_t i = 0; i < layer.weight.rows() * layer.weight.cols(); ++i)
        layer.weight.data()[i] = read_f64(in);
    for (double& b : layer.bias) b = read_f64(in);
}

}  // namespace

void save_checkpoint(const AdapterModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kMagic, 8);
    write_u32(out, static_cast<std::uint32_t>(model.layers.size() + 1));
    write_u32(out, static_cast<std::uint32_t>(model.input_dim));
    for (const auto& layer : model.layers)
        write_u32(out, static_cast<std::uint32_t>(layer.weight.rows()));
    write_u32(out, static_cast<std::uint32_t>(model.num_classes()));
    for (const auto& layer : model.layers) write_layer(out, layer);
    write_layer(out, model.head);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

AdapterModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path.string() + ": not a CFSHIFT1 checkpoint");

    const std::uint32_t n_dims = read_u32(in);
    if (!in || n_dims < 1 || n_dims > 1024)
        throw std::runtime_error(path.string() + ": corrupt dimension chain");
    std::vector<std::uint32_t> dims(n_dims);
    for (auto& v : dims) v = read_u32(in);
    const std::uint32_t classes = read_u32(in);
    if (!in || classes < 1) throw std::runtime_error(path.string() + ": corrupt class count");
    for (auto v : dims)
        if (v < 1) throw std::runtime_error(path.string() + ": corrupt dimension chain");

    AdapterModel model;
    model.input_dim = dims[0];
    for (std::size_t i = 1; i < dims.size(); ++i) {
        DenseLayer layer;
        layer.weight = Matrix(dims[i], dims[i - 1]);
        layer.bias.assign(dims[i], 0.0);
        read_layer(in, layer);
        model.layers.push_back(std::move(layer));
    }
    model.head.weight = Matrix(classes, dims.back());
    model.head.bias.assign(classes, 0.0);
    read_layer(in, model.head);
    if (!in) throw std::runtime_error(path.string() + ": truncated checkpoint");
    for (double* p : parameter_view(model))
        if (!std::isfinite(*p))
            throw std::runtime_error(path.string() + ": non-finite parameter");
    return model;
}

}  // namespace cfshift
