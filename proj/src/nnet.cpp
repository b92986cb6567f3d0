#include "sylvinit/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "sylvinit/errors.hpp"

namespace sylvinit {

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Conv2D: return "conv2d";
        case LayerKind::Dense: return "dense";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::GlobalAvgPool: return "global_avg_pool";
    }
    return "unknown";
}

LayerSpec LayerSpec::conv(std::string name, std::size_t c_o, std::size_t f, std::size_t stride, std::size_t pad) {
    return {LayerKind::Conv2D, std::move(name), c_o, f, f, stride, pad};
}
LayerSpec LayerSpec::dense(std::string name, std::size_t d_o) { return {LayerKind::Dense, std::move(name), d_o}; }
LayerSpec LayerSpec::relu(std::string name) { return {LayerKind::ReLU, std::move(name)}; }
LayerSpec LayerSpec::flatten(std::string name) { return {LayerKind::Flatten, std::move(name)}; }
LayerSpec LayerSpec::global_avg_pool(std::string name) { return {LayerKind::GlobalAvgPool, std::move(name)}; }

namespace {

Shape3 output_shape(const LayerSpec& layer, const Shape3& in) {
    switch (layer.kind) {
        case LayerKind::Conv2D: {
            const ConvGeometry g{in.h, in.w, in.c, layer.f_h, layer.f_w, layer.stride, layer.pad};
            try {
                g.validate();
            } catch (const ShapeError& e) {
                throw ShapeError("layer '" + layer.name + "': " + e.what());
            }
            return {g.out_h(), g.out_w(), layer.units};
        }
        case LayerKind::Dense: return {1, 1, layer.units};
        case LayerKind::ReLU: return in;
        case LayerKind::Flatten: return {1, 1, in.flat()};
        case LayerKind::GlobalAvgPool: return {1, 1, in.c};
    }
    return in;
}

}  // namespace

void NetworkSpec::validate() {
    if (input.flat() == 0) throw ShapeError("network spec: input dims must be positive");
    if (num_classes == 0) throw ShapeError("network spec: num_classes must be positive");
    std::set<std::string> names;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& layer = layers[i];
        if (layer.name.empty()) layer.name = std::string(to_string(layer.kind)) + std::to_string(i);
        if (!names.insert(layer.name).second) throw ShapeError("network spec: duplicate layer name '" + layer.name + "'");
        if (layer.trainable() && layer.units == 0) throw ShapeError("layer '" + layer.name + "': zero output units");
    }
    shapes();
    const auto trainable = trainable_layers();
    if (trainable.empty()) throw ShapeError("network spec: no trainable layer");
    const auto& last = layers[trainable.back()];
    if (last.units != num_classes) {
        throw ShapeError("network spec: final trainable layer '" + last.name + "' has " + std::to_string(last.units) +
                         " outputs, expected num_classes = " + std::to_string(num_classes));
    }
    if (shapes().back().flat() != num_classes) {
        throw ShapeError("network spec: network output size " + std::to_string(shapes().back().flat()) +
                         " differs from num_classes");
    }
}

std::vector<Shape3> NetworkSpec::shapes() const {
    std::vector<Shape3> out{input};
    for (const auto& layer : layers) out.push_back(output_shape(layer, out.back()));
    return out;
}

std::optional<std::size_t> NetworkSpec::find_layer(std::string_view name) const {
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].name == name) return i;
    return std::nullopt;
}

std::vector<std::size_t> NetworkSpec::trainable_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].trainable()) out.push_back(i);
    return out;
}

NetworkSpec small_cnn(Shape3 input, std::size_t num_classes) {
    NetworkSpec spec;
    spec.input = input;
    spec.num_classes = num_classes;
    spec.layers = {
        LayerSpec::conv("conv1", 16, 3, 1, 1), LayerSpec::relu("relu1"),
        LayerSpec::conv("conv2", 32, 3, 2, 1), LayerSpec::relu("relu2"),
        LayerSpec::conv("conv3", 64, 3, 2, 1), LayerSpec::relu("relu3"),
        LayerSpec::global_avg_pool("pool"),    LayerSpec::dense("final_dense", num_classes),
    };
    spec.validate();
    return spec;
}

Network::Network(NetworkSpec s) : spec(std::move(s)) {
    spec.validate();
    for (std::size_t layer : spec.trainable_layers()) {
        LayerParams p;
        p.layer = layer;
        const auto [d_i, d_o] = layer_dims(layer);
        p.weight = Matrix(d_o, d_i);
        p.weight_velocity = Matrix(d_o, d_i);
        p.bias.assign(d_o, 0.0);
        p.bias_velocity.assign(d_o, 0.0);
        params.push_back(std::move(p));
    }
}

LayerParams* Network::params_for(std::size_t layer) {
    for (auto& p : params)
        if (p.layer == layer) return &p;
    return nullptr;
}

const LayerParams* Network::params_for(std::size_t layer) const {
    for (const auto& p : params)
        if (p.layer == layer) return &p;
    return nullptr;
}

std::pair<std::size_t, std::size_t> Network::layer_dims(std::size_t layer) const {
    const auto& ls = spec.layers.at(layer);
    const Shape3 in = spec.shapes()[layer];
    if (ls.kind == LayerKind::Conv2D) return {ls.f_h * ls.f_w * in.c, ls.units};
    if (ls.kind == LayerKind::Dense) return {in.flat(), ls.units};
    throw ConfigError("layer '" + ls.name + "' has no parameters");
}

ConvGeometry Network::conv_geometry(std::size_t layer) const {
    const auto& ls = spec.layers.at(layer);
    const Shape3 in = spec.shapes()[layer];
    return {in.h, in.w, in.c, ls.f_h, ls.f_w, ls.stride, ls.pad};
}

namespace {

// (n, ...) tensor viewed as an n x flat matrix (a copy; same memory order).
Matrix as_rows(const Tensor4& t) {
    return Matrix(t.dim(0), t.stride0(), std::vector<double>(t.data().begin(), t.data().end()));
}

Tensor4 from_rows(const Matrix& m, Tensor4::Dims dims) {
    return Tensor4(dims, std::vector<double>(m.data().begin(), m.data().end()));
}

void add_bias_rows(Matrix& out, const std::vector<double>& bias) {
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
    }
}

}  // namespace

Tensor4 apply_layer(const Network& net, std::size_t layer, const Tensor4& input, Matrix* patches) {
    const auto& ls = net.spec.layers.at(layer);
    const Shape3 in = net.spec.shapes()[layer];
    const std::size_t n = input.dim(0);
    if (input.dim(1) != in.h || input.dim(2) != in.w || input.dim(3) != in.c) {
        throw ShapeError("layer '" + ls.name + "': input " + input.shape_string() + " does not match expected (n," +
                         std::to_string(in.h) + "," + std::to_string(in.w) + "," + std::to_string(in.c) + ")");
    }
    switch (ls.kind) {
        case LayerKind::Conv2D: {
            const LayerParams& p = *net.params_for(layer);
            const ConvGeometry g = net.conv_geometry(layer);
            Matrix cols = im2col(input, g);
            // (patch count x c_o) is already (n, oh, ow, c_o) in memory.
            Matrix out = matmul_tn(cols, p.weight.transpose());
            add_bias_rows(out, p.bias);
            if (patches) *patches = std::move(cols);
            return from_rows(out, {n, g.out_h(), g.out_w(), ls.units});
        }
        case LayerKind::Dense: {
            const LayerParams& p = *net.params_for(layer);
            Matrix out = matmul_nt(as_rows(input), p.weight);
            add_bias_rows(out, p.bias);
            return from_rows(out, {n, 1, 1, ls.units});
        }
        case LayerKind::ReLU: {
            Tensor4 out = input;
            for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
            return out;
        }
        case LayerKind::Flatten:
            return Tensor4({n, 1, 1, in.flat()}, std::vector<double>(input.data().begin(), input.data().end()));
        case LayerKind::GlobalAvgPool: {
            Tensor4 out({n, 1, 1, in.c});
            const double inv = 1.0 / static_cast<double>(in.h * in.w);
            for (std::size_t img = 0; img < n; ++img)
                for (std::size_t y = 0; y < in.h; ++y)
                    for (std::size_t x = 0; x < in.w; ++x)
                        for (std::size_t c = 0; c < in.c; ++c) out(img, 0, 0, c) += input(img, y, x, c) * inv;
            return out;
        }
    }
    throw ConfigError("apply_layer: unhandled layer kind");
}

ForwardResult forward(const Network& net, const Tensor4& batch) {
    ForwardResult result;
    result.cache.resize(net.spec.layers.size());
    Tensor4 act = batch;
    for (std::size_t i = 0; i < net.spec.layers.size(); ++i) {
        Tensor4 next = apply_layer(net, i, act, &result.cache[i].patches);
        result.cache[i].input = std::move(act);
        act = std::move(next);
    }
    // (n, 1, 1, classes) -> classes x n
    result.logits = as_rows(act).transpose();
    return result;
}

double softmax_cross_entropy(const Matrix& logits, const Labels& labels) {
    if (labels.size() != logits.cols()) throw LabelError("softmax_cross_entropy: label count mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        if (labels[j] >= logits.rows()) throw LabelError("label " + std::to_string(labels[j]) + " out of range");
        double mx = logits(0, j);
        for (std::size_t k = 1; k < logits.rows(); ++k) mx = std::max(mx, logits(k, j));
        double z = 0.0;
        for (std::size_t k = 0; k < logits.rows(); ++k) z += std::exp(logits(k, j) - mx);
        total += std::log(z) + mx - logits(labels[j], j);
    }
    return total / static_cast<double>(logits.cols());
}

BackwardResult backward(const Network& net, const Tensor4& batch, const Labels& labels) {
    const std::size_t n = batch.dim(0);
    if (labels.size() != n) throw LabelError("backward: " + std::to_string(labels.size()) + " labels for batch of " + std::to_string(n));
    for (ClassId l : labels)
        if (l >= net.spec.num_classes) throw LabelError("backward: label " + std::to_string(l) + " out of range");

    ForwardResult fwd = forward(net, batch);
    BackwardResult result;
    result.loss = softmax_cross_entropy(fwd.logits, labels);

    // d loss / d logits, laid out as (n, 1, 1, classes).
    const std::size_t k = net.spec.num_classes;
    Tensor4 grad({n, 1, 1, k});
    for (std::size_t j = 0; j < n; ++j) {
        double mx = fwd.logits(0, j);
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, fwd.logits(c, j));
        double z = 0.0;
        for (std::size_t c = 0; c < k; ++c) z += std::exp(fwd.logits(c, j) - mx);
        for (std::size_t c = 0; c < k; ++c) {
            const double p = std::exp(fwd.logits(c, j) - mx) / z;
            grad(j, 0, 0, c) = (p - (labels[j] == c ? 1.0 : 0.0)) / static_cast<double>(n);
        }
    }

    result.grads.weight.resize(net.params.size());
    result.grads.bias.resize(net.params.size());
    const auto shapes = net.spec.shapes();

    for (std::size_t li = net.spec.layers.size(); li-- > 0;) {
        const auto& ls = net.spec.layers[li];
        const LayerCache& cache = fwd.cache[li];
        const Shape3 in = shapes[li];
        switch (ls.kind) {
            case LayerKind::Conv2D:
            case LayerKind::Dense: {
                const std::size_t pi = static_cast<std::size_t>(
                    std::find_if(net.params.begin(), net.params.end(), [&](const LayerParams& p) { return p.layer == li; }) -
                    net.params.begin());
                const LayerParams& p = net.params[pi];
                // One row per output position (conv) or sample (dense).
                const Matrix dout(grad.size() / ls.units, ls.units,
                                  std::vector<double>(grad.data().begin(), grad.data().end()));
                const Matrix inputs = ls.kind == LayerKind::Conv2D ? cache.patches.transpose() : as_rows(cache.input);
                result.grads.weight[pi] = matmul_tn(dout, inputs);
                auto& db = result.grads.bias[pi];
                db.assign(ls.units, 0.0);
                for (std::size_t r = 0; r < dout.rows(); ++r)
                    for (std::size_t c = 0; c < ls.units; ++c) db[c] += dout(r, c);
                const Matrix dinput = matmul(dout, p.weight);  // rows x d_i
                if (ls.kind == LayerKind::Conv2D) {
                    grad = col2im(dinput.transpose(), net.conv_geometry(li), n);
                } else {
                    grad = from_rows(dinput, {n, in.h, in.w, in.c});
                }
                break;
            }
            case LayerKind::ReLU: {
                auto g = grad.data();
                auto x = cache.input.data();
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (!(x[i] > 0.0)) g[i] = 0.0;
                break;
            }
            case LayerKind::Flatten:
                grad = Tensor4({n, in.h, in.w, in.c}, std::vector<double>(grad.data().begin(), grad.data().end()));
                break;
            case LayerKind::GlobalAvgPool: {
                Tensor4 dx({n, in.h, in.w, in.c});
                const double inv = 1.0 / static_cast<double>(in.h * in.w);
                for (std::size_t img = 0; img < n; ++img)
                    for (std::size_t y = 0; y < in.h; ++y)
                        for (std::size_t x = 0; x < in.w; ++x)
                            for (std::size_t c = 0; c < in.c; ++c) dx(img, y, x, c) = grad(img, 0, 0, c) * inv;
                grad = std::move(dx);
                break;
            }
        }
    }
    return result;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ParameterError("train config: lr must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("train config: momentum must be in [0, 1)");
    if (!(decay_factor > 1.0)) throw ParameterError("train config: decay_factor must exceed 1");
    if (batch_size == 0) throw ParameterError("train config: batch_size must be positive");
}

double TrainConfig::lr_at(std::size_t epoch) const {
    const auto drops = std::count_if(decay_epochs.begin(), decay_epochs.end(), [&](std::size_t e) { return e <= epoch; });
    return lr / std::pow(decay_factor, static_cast<double>(drops));
}

void sgd_step(Network& net, const Gradients& grads, const TrainConfig& config, std::size_t epoch) {
    if (grads.weight.size() != net.params.size() || grads.bias.size() != net.params.size()) {
        throw ShapeError("sgd_step: gradient count does not match parameter count");
    }
    const double lr = config.lr_at(epoch);
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        LayerParams& p = net.params[i];
        detail::require_same_shape(p.weight, grads.weight[i], "sgd_step");
        if (grads.bias[i].size() != p.bias.size()) throw ShapeError("sgd_step: bias gradient size mismatch");
        auto w = p.weight.data();
        auto v = p.weight_velocity.data();
        auto g = grads.weight[i].data();
        for (std::size_t k = 0; k < w.size(); ++k) {
            v[k] = config.momentum * v[k] + g[k];
            w[k] -= lr * v[k];
        }
        for (std::size_t k = 0; k < p.bias.size(); ++k) {
            p.bias_velocity[k] = config.momentum * p.bias_velocity[k] + grads.bias[i][k];
            p.bias[k] -= lr * p.bias_velocity[k];
        }
    }
}

void train(Network& net, const LabeledDataset& data, const TrainConfig& config,
           const std::function<void(const EpochStats&)>& on_epoch) {
    config.validate();
    if (data.empty()) throw ParameterError("train: empty dataset");
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, order.size());
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            Labels labels(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j) labels[j] = data.labels[idx[j]];
            const BackwardResult br = backward(net, gather_images(data.images, idx), labels);
            sgd_step(net, br.grads, config, epoch);
            loss_sum += br.loss * static_cast<double>(idx.size());
            seen += idx.size();
        }
        if (on_epoch) on_epoch({epoch + 1, loss_sum / static_cast<double>(seen)});
    }
}

std::vector<ClassId> predict(const Matrix& logits) {
    std::vector<ClassId> out(logits.cols(), 0);
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.rows(); ++c)
            if (logits(c, j) > logits(best, j)) best = c;
        out[j] = static_cast<ClassId>(best);
    }
    return out;
}

double evaluate(const Network& net, const LabeledDataset& data, std::size_t batch_size) {
    if (data.empty()) throw ParameterError("evaluate: empty dataset");
    if (batch_size == 0) throw ParameterError("evaluate: batch_size must be positive");
    std::size_t correct = 0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const std::size_t stop = std::min(start + batch_size, data.size());
        idx.resize(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        const auto pred = predict(forward(net, gather_images(data.images, idx)).logits);
        for (std::size_t j = 0; j < pred.size(); ++j) correct += pred[j] == data.labels[start + j] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string_view to_string(InitScheme scheme) {
    switch (scheme) {
        case InitScheme::HeUniform: return "he-uniform";
        case InitScheme::HeNormal: return "he-normal";
        case InitScheme::XavierUniform: return "xavier-uniform";
        case InitScheme::XavierNormal: return "xavier-normal";
    }
    return "unknown";
}

std::optional<InitScheme> parse_init_scheme(std::string_view text) {
    for (InitScheme s : {InitScheme::HeUniform, InitScheme::HeNormal, InitScheme::XavierUniform, InitScheme::XavierNormal})
        if (to_string(s) == text) return s;
    return std::nullopt;
}

Network random_init(Network net, InitScheme scheme, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& p : net.params) {
        const auto& ls = net.spec.layers[p.layer];
        const double receptive = ls.kind == LayerKind::Conv2D ? static_cast<double>(ls.f_h * ls.f_w) : 1.0;
        const double fan_in = static_cast<double>(p.weight.cols());
        const double fan_out = static_cast<double>(p.weight.rows()) * receptive;
        auto w = p.weight.data();
        switch (scheme) {
            case InitScheme::HeUniform: {
                const double bound = std::sqrt(6.0 / fan_in);
                std::uniform_real_distribution<double> dist(-bound, bound);
                for (double& v : w) v = dist(rng);
                break;
            }
            case InitScheme::HeNormal: {
                std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
                for (double& v : w) v = dist(rng);
                break;
            }
            case InitScheme::XavierUniform: {
                const double bound = std::sqrt(6.0 / (fan_in + fan_out));
                std::uniform_real_distribution<double> dist(-bound, bound);
                for (double& v : w) v = dist(rng);
                break;
            }
            case InitScheme::XavierNormal: {
                std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (fan_in + fan_out)));
                for (double& v : w) v = dist(rng);
                break;
            }
        }
        std::fill(p.bias.begin(), p.bias.end(), 0.0);
        p.weight_velocity = Matrix(p.weight.rows(), p.weight.cols());
        std::fill(p.bias_velocity.begin(), p.bias_velocity.end(), 0.0);
    }
    return net;
}

}  // namespace sylvinit
