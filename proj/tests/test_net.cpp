#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfshift/net.hpp"
#include "cfshift/rng.hpp"

using namespace cfshift;
namespace fs = std::filesystem;

namespace {

FeatureMatrix random_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
    rng::NormalSampler normal(seed);
    FeatureMatrix f;
    f.domain_id = "batch";
    f.values = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) f.values(i, j) = normal.next();
    return f;
}

fs::path temp_file(const std::string& name) {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("cfshift_net_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir / name;
}

}  // namespace

TEST_CASE("zero model yields zero logits") {
    AdapterModel model;
    model.input_dim = 3;
    model.layers.push_back({Matrix(4, 3), std::vector<double>(4, 0.0)});
    model.head = {Matrix(5, 4), std::vector<double>(5, 0.0)};
    const auto out = forward(model, random_batch(6, 3, 1));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t c = 0; c < 5; ++c) CHECK(out.logits(i, c) == 0.0);
    CHECK(out.embeddings.rows() == 6);
    CHECK(out.embeddings.cols() == 4);
    CHECK(out.embeddings.domain_id == "batch");
}

TEST_CASE("identity adapter layer applies tanh; no layers pass the input through") {
    const FeatureMatrix batch = random_batch(5, 3, 2);

    AdapterModel with_layer;
    with_layer.input_dim = 3;
    DenseLayer identity;
    identity.weight = Matrix(3, 3);
    for (std::size_t j = 0; j < 3; ++j) identity.weight(j, j) = 1.0;
    identity.bias.assign(3, 0.0);
    with_layer.layers.push_back(identity);
    with_layer.head = {Matrix(2, 3), std::vector<double>(2, 0.0)};
    const auto a = forward(with_layer, batch);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(a.embeddings.values(i, j) == doctest::Approx(std::tanh(batch.values(i, j))));

    AdapterModel no_layers;
    no_layers.input_dim = 3;
    no_layers.head = {Matrix(2, 3), std::vector<double>(2, 0.0)};
    CHECK(no_layers.embedding_dim() == 3);
    const auto b = forward(no_layers, batch);
    CHECK(b.embeddings.values == batch.values);
}

TEST_CASE("forward is pure: repeat calls are bit-identical") {
    const AdapterModel model = init_adapter(4, {6}, 3, 2, 11);
    const FeatureMatrix batch = random_batch(5, 4, 3);
    const auto a = forward(model, batch);
    const auto b = forward(model, batch);
    CHECK(a.embeddings.values == b.embeddings.values);
    CHECK(a.logits == b.logits);
}

TEST_CASE("init_adapter is deterministic and shape-consistent") {
    const AdapterModel a = init_adapter(7, {5, 4}, 3, 2, 42);
    const AdapterModel b = init_adapter(7, {5, 4}, 3, 2, 42);
    REQUIRE(a.layers.size() == 3);
    CHECK(a.layers[0].weight.rows() == 5);
    CHECK(a.layers[0].weight.cols() == 7);
    CHECK(a.layers[1].weight.rows() == 4);
    CHECK(a.layers[2].weight.rows() == 3);
    CHECK(a.head.weight.rows() == 2);
    CHECK(a.head.weight.cols() == 3);
    CHECK(a.embedding_dim() == 3);
    for (std::size_t li = 0; li < 3; ++li) CHECK(a.layers[li].weight == b.layers[li].weight);
    const AdapterModel c = init_adapter(7, {5, 4}, 3, 2, 43);
    CHECK(a.layers[0].weight != c.layers[0].weight);
}

TEST_CASE("shape mismatch is rejected") {
    const AdapterModel model = init_adapter(4, {6}, 3, 2, 0);
    CHECK_THROWS_AS(forward(model, random_batch(5, 3, 0)), std::invalid_argument);
    CHECK_THROWS_AS(init_adapter(0, {}, 3, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(init_adapter(3, {0}, 3, 2, 0), std::invalid_argument);
}

TEST_CASE("checkpoint round trip preserves every parameter bit") {
    const AdapterModel model = init_adapter(6, {8, 5}, 4, 3, 77);
    const fs::path path = temp_file("model.ckpt");
    save_checkpoint(model, path);
    const AdapterModel loaded = load_checkpoint(path);
    CHECK(loaded.input_dim == 6);
    REQUIRE(loaded.layers.size() == model.layers.size());
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        CHECK(loaded.layers[li].weight == model.layers[li].weight);
        CHECK(loaded.layers[li].bias == model.layers[li].bias);
    }
    CHECK(loaded.head.weight == model.head.weight);
    CHECK(loaded.head.bias == model.head.bias);
}

TEST_CASE("checkpoint rejects junk") {
    const fs::path path = temp_file("junk.ckpt");
    std::ofstream(path) << "definitely not a checkpoint";
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    CHECK_THROWS_AS(load_checkpoint(temp_file("missing.ckpt")), std::runtime_error);

    // truncated: valid magic, nothing else
    const fs::path trunc = temp_file("trunc.ckpt");
    std::ofstream(trunc, std::ios::binary).write("CFSHIFT1", 8);
    CHECK_THROWS_AS(load_checkpoint(trunc), std::runtime_error);
}

TEST_CASE("parameter_view and flatten_grad align") {
    AdapterModel model = init_adapter(3, {4}, 2, 2, 5);
    const auto view = parameter_view(model);
    const ModelGrad grad = zero_grad(model);
    const auto flat = flatten_grad(grad);
    CHECK(view.size() == flat.size());
    CHECK(view.size() == 3 * 4 + 4 + 4 * 2 + 2 + 2 * 2 + 2);
}
