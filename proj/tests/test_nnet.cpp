#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "nnet_oracles.hpp"
#include "sylvinit/dataio.hpp"
#include "sylvinit/errors.hpp"
#include "sylvinit/nnet.hpp"
#include "test_helpers.hpp"

using namespace sylvinit;
using namespace sylvinit::testing;

namespace {

NetworkSpec toy_conv_spec() {
    NetworkSpec spec;
    spec.input = {5, 5, 2};
    spec.layers = {LayerSpec::conv("c1", 3, 3, 1, 1), LayerSpec::relu(), LayerSpec::conv("c2", 4, 3, 2, 1),
                   LayerSpec::relu(), LayerSpec::flatten(), LayerSpec::dense("out", 3)};
    spec.num_classes = 3;
    return spec;
}

NetworkSpec dense_spec(std::size_t d_i, std::size_t d_o) {
    NetworkSpec spec;
    spec.input = {1, 1, d_i};
    spec.layers = {LayerSpec::dense("fc", d_o)};
    spec.num_classes = d_o;
    return spec;
}

double sample_variance(std::span<const double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("NetworkSpec: validation names layers and checks the chain") {
    NetworkSpec spec = small_cnn({8, 8, 1}, 3);
    Network net(spec);
    CHECK(net.params.size() == 4);
    CHECK(net.spec.find_layer("conv1").has_value());
    CHECK(net.spec.find_layer("final_dense").has_value());
    CHECK(net.layer_dims(*net.spec.find_layer("conv2")) == std::pair<std::size_t, std::size_t>{144, 32});
    CHECK(net.layer_dims(*net.spec.find_layer("final_dense")) == std::pair<std::size_t, std::size_t>{64, 3});

    NetworkSpec wrong = dense_spec(4, 3);
    wrong.num_classes = 5;
    CHECK_THROWS(wrong.validate());
}

TEST_CASE("forward: zero parameters give zero logits") {
    std::mt19937_64 rng(41);
    const Network net(small_cnn({8, 8, 1}, 3));
    const ForwardResult fr = forward(net, random_tensor({4, 8, 8, 1}, rng));
    CHECK(fr.logits.rows() == 3);
    CHECK(fr.logits.cols() == 4);
    CHECK(frobenius_norm(fr.logits) == 0.0);
}

TEST_CASE("forward: identity 1x1 convolution passes the input through") {
    NetworkSpec spec;
    spec.input = {4, 4, 3};
    spec.layers = {LayerSpec::conv("id", 3, 1, 1, 0), LayerSpec::flatten(), LayerSpec::dense("out", 2)};
    spec.num_classes = 2;
    Network net(spec);
    net.params[0].weight = Matrix::identity(3);
    std::mt19937_64 rng(42);
    const Tensor4 x = random_tensor({2, 4, 4, 3}, rng);
    CHECK(apply_layer(net, 0, x) == x);
}

TEST_CASE("forward: matches the naive reference on random nets") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 3; ++trial) {
        Network net(small_cnn({8, 8, 2}, 4));
        oracle::randomize(net, rng);
        const Tensor4 x = random_tensor({3, 8, 8, 2}, rng);
        CHECK(max_abs_diff(forward(net, x).logits, oracle::naive_forward(net, x)) <= 1e-10);

        Network toy(toy_conv_spec());
        oracle::randomize(toy, rng);
        const Tensor4 y = random_tensor({3, 5, 5, 2}, rng);
        CHECK(max_abs_diff(forward(toy, y).logits, oracle::naive_forward(toy, y)) <= 1e-10);
    }
}

TEST_CASE("forward: pure and repeatable") {
    std::mt19937_64 rng(44);
    Network net(small_cnn({8, 8, 1}, 3));
    oracle::randomize(net, rng);
    const Network before = net;
    const Tensor4 x = random_tensor({2, 8, 8, 1}, rng);
    const Matrix a = forward(net, x).logits, b = forward(net, x).logits;
    CHECK(a == b);
    for (std::size_t t = 0; t < net.params.size(); ++t) CHECK(net.params[t].weight == before.params[t].weight);
    CHECK_THROWS_AS(forward(net, Tensor4({1, 7, 8, 1})), ShapeError);
}

TEST_CASE("softmax_cross_entropy: uniform logits give ln(classes)") {
    CHECK(softmax_cross_entropy(Matrix(10, 4), {0, 3, 7, 9}) == doctest::Approx(std::log(10.0)).epsilon(1e-15));
    CHECK(std::abs(softmax_cross_entropy(Matrix(10, 1), {2}) - 2.302585) <= 1e-6);
    CHECK_THROWS_AS(softmax_cross_entropy(Matrix(3, 1), {3}), LabelError);
}

TEST_CASE("backward: gradients match central differences") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 3; ++trial) {
        Network toy(toy_conv_spec());
        oracle::randomize(toy, rng);
        const Tensor4 x = random_tensor({3, 5, 5, 2}, rng);
        const Labels y{0, 2, 1};
        const BackwardResult br = backward(toy, x, y);
        CHECK(br.loss == doctest::Approx(oracle::naive_loss(oracle::naive_forward(toy, x), y)).epsilon(1e-12));
        const oracle::ParameterCheck pc = oracle::check_gradients(toy, x, y, br.grads);
        CHECK(pc.worst_tensor_error <= 1e-4);
        CHECK(pc.worst_entry_error <= 1e-4);

        Network cnn(oracle::narrow_small_cnn({6, 6, 2}, 3));
        oracle::randomize(cnn, rng);
        const Tensor4 z = random_tensor({2, 6, 6, 2}, rng);
        const BackwardResult bz = backward(cnn, z, {1, 0});
        CHECK(oracle::check_gradients(cnn, z, {1, 0}, bz.grads).worst_tensor_error <= 1e-4);
    }
}

TEST_CASE("backward: duplicated sample gives the single-sample gradient") {
    std::mt19937_64 rng(46);
    Network toy(toy_conv_spec());
    oracle::randomize(toy, rng);
    const Tensor4 one = random_tensor({1, 5, 5, 2}, rng);
    Tensor4 two({2, 5, 5, 2});
    for (std::size_t i = 0; i < one.size(); ++i) two.data()[i] = two.data()[i + one.size()] = one.data()[i];
    const BackwardResult a = backward(toy, one, {1});
    const BackwardResult b = backward(toy, two, {1, 1});
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-14));
    for (std::size_t t = 0; t < a.grads.weight.size(); ++t) CHECK(max_abs_diff(a.grads.weight[t], b.grads.weight[t]) <= 1e-14);
    CHECK_THROWS_AS(backward(toy, one, {3}), LabelError);
}

TEST_CASE("sgd_step: plain, momentum and decayed steps") {
    Network net(dense_spec(1, 2));
    Gradients g;
    g.weight = {Matrix(2, 1, 1.0)};
    g.bias = {{1.0, 1.0}};

    TrainConfig plain;
    plain.momentum = 0.0;
    sgd_step(net, g, plain, 0);
    CHECK(net.params[0].weight(0, 0) == doctest::Approx(-0.1).epsilon(1e-15));

    Network mom(dense_spec(1, 2));
    TrainConfig cfg;  // lr 0.1, momentum 0.9
    sgd_step(mom, g, cfg, 0);
    const double p1 = mom.params[0].weight(0, 0);
    sgd_step(mom, g, cfg, 0);
    CHECK(p1 - mom.params[0].weight(0, 0) == doctest::Approx(0.19).epsilon(1e-14));

    TrainConfig decayed;
    decayed.decay_epochs = {2, 5};
    CHECK(decayed.lr_at(0) == 0.1);
    CHECK(decayed.lr_at(1) == 0.1);
    CHECK(decayed.lr_at(2) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(decayed.lr_at(4) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(decayed.lr_at(5) == doctest::Approx(0.001).epsilon(1e-15));

    TrainConfig bad;
    bad.momentum = 1.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.decay_factor = 1.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.lr = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("evaluate: chance, separable and hand-scored cases") {
    // Zero network: every prediction is class 0, so a balanced 10-class set scores 0.1.
    Network zero(dense_spec(4, 10));
    std::mt19937_64 rng(47);
    LabeledDataset data{random_tensor({50, 1, 1, 4}, rng), {}, 10, "balanced"};
    for (std::size_t i = 0; i < 50; ++i) data.labels.push_back(static_cast<ClassId>(i % 10));
    CHECK(evaluate(zero, data) == doctest::Approx(0.1));

    Network aligned(dense_spec(3, 3));
    aligned.params[0].weight = Matrix::identity(3);
    LabeledDataset sep{Tensor4({6, 1, 1, 3}), {0, 1, 2, 2, 1, 0}, 3, "sep"};
    for (std::size_t i = 0; i < 6; ++i) sep.images(i, 0, 0, sep.labels[i]) = 1.0;
    CHECK(evaluate(aligned, sep) == 1.0);

    Network net(small_cnn({6, 6, 1}, 4));
    oracle::randomize(net, rng);
    LabeledDataset twenty{random_tensor({20, 6, 6, 1}, rng, 0.0, 1.0), {}, 4, "twenty"};
    for (std::size_t i = 0; i < 20; ++i) twenty.labels.push_back(static_cast<ClassId>(rng() % 4));
    const Matrix logits = oracle::naive_forward(net, twenty.images);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < 4; ++c)
            if (logits(c, i) > logits(best, i)) best = c;
        correct += best == twenty.labels[i];
    }
    CHECK(evaluate(net, twenty, 7) == static_cast<double>(correct) / 20.0);

    CHECK_THROWS_AS(evaluate(net, LabeledDataset{Tensor4({0, 6, 6, 1}), {}, 4, "empty"}), ParameterError);
}

TEST_CASE("predict: ties go to the lowest class") {
    CHECK(predict(Matrix{{1, 0}, {1, 2}, {0, 2}}) == std::vector<ClassId>{0, 1});
}

TEST_CASE("random_init: bounds, variances, determinism") {
    const Network he = random_init(Network(dense_spec(6, 50)), InitScheme::HeUniform, 1);
    double top = 0.0;
    for (double v : he.params[0].weight.data()) top = std::max(top, std::abs(v));
    CHECK(top <= 1.0);
    CHECK(top > 0.95);

    const Network hn = random_init(Network(dense_spec(100, 10000)), InitScheme::HeNormal, 2);
    CHECK(sample_variance(hn.params[0].weight.data()) == doctest::Approx(0.02).epsilon(0.05));

    // Conv fan-in and fan-out include the receptive field.
    NetworkSpec conv;
    conv.input = {8, 8, 4};
    conv.layers = {LayerSpec::conv("c", 8, 3, 1, 1), LayerSpec::global_avg_pool(), LayerSpec::dense("out", 2)};
    conv.num_classes = 2;
    const Network xn = random_init(Network(conv), InitScheme::XavierNormal, 3);
    const double target = 2.0 / (4 * 9 + 8 * 9);
    CHECK(sample_variance(xn.params[0].weight.data()) == doctest::Approx(target).epsilon(0.3));
    for (double b : xn.params[0].bias) CHECK(b == 0.0);

    const Network a = random_init(Network(conv), InitScheme::XavierUniform, 9);
    const Network b = random_init(Network(conv), InitScheme::XavierUniform, 9);
    const Network c = random_init(Network(conv), InitScheme::XavierUniform, 10);
    CHECK(a.params[0].weight == b.params[0].weight);
    CHECK(a.params[0].weight != c.params[0].weight);

    CHECK(parse_init_scheme("he-normal") == InitScheme::HeNormal);
    CHECK_FALSE(parse_init_scheme("lecun").has_value());
}

TEST_CASE("train: separable two-class blobs from every baseline init") {
    NetworkSpec spec;
    spec.input = {8, 8, 1};
    spec.layers = {LayerSpec::conv("c1", 4, 3, 2, 1), LayerSpec::relu(), LayerSpec::flatten(), LayerSpec::dense("out", 2)};
    spec.num_classes = 2;
    for (InitScheme scheme : {InitScheme::HeUniform, InitScheme::HeNormal, InitScheme::XavierUniform, InitScheme::XavierNormal}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const LabeledDataset data = synth_blobs(2, 8, 1, 16, 0.1, 100 + seed);
            Network net = random_init(Network(spec), scheme, seed);
            TrainConfig cfg;
            cfg.lr = 0.01;
            cfg.batch_size = 8;
            cfg.epochs = 50;  // 4 steps per epoch: 200 steps
            cfg.seed = seed;
            std::size_t epochs_seen = 0;
            train(net, data, cfg, [&](const EpochStats& s) { epochs_seen = s.epoch; });
            CHECK(epochs_seen == 50);
            CHECK(evaluate(net, data) >= 0.95);
        }
    }
}

TEST_CASE("train: deterministic for a fixed seed") {
    const LabeledDataset data = synth_blobs(3, 6, 1, 10, 0.2, 5);
    Network a = random_init(Network(small_cnn({6, 6, 1}, 3)), InitScheme::HeUniform, 1);
    Network b = a;
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 7;  // last partial batch kept
    cfg.seed = 4;
    train(a, data, cfg);
    train(b, data, cfg);
    for (std::size_t t = 0; t < a.params.size(); ++t) CHECK(a.params[t].weight == b.params[t].weight);
}
