#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sylvinit/dataset.hpp"
#include "sylvinit/labels.hpp"
#include "sylvinit/matrix.hpp"
#include "sylvinit/patches.hpp"
#include "sylvinit/tensor.hpp"

namespace sylvinit {

enum class LayerKind { Conv2D, Dense, ReLU, Flatten, GlobalAvgPool };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    std::string name;
    std::size_t units = 0;  // c_o for Conv2D, d_o for Dense
    std::size_t f_h = 1;
    std::size_t f_w = 1;
    std::size_t stride = 1;
    std::size_t pad = 0;

    bool trainable() const noexcept { return kind == LayerKind::Conv2D || kind == LayerKind::Dense; }

    static LayerSpec conv(std::string name, std::size_t c_o, std::size_t f, std::size_t stride, std::size_t pad);
    static LayerSpec dense(std::string name, std::size_t d_o);
    static LayerSpec relu(std::string name = {});
    static LayerSpec flatten(std::string name = {});
    static LayerSpec global_avg_pool(std::string name = {});
};

/// (h, w, c) of one sample's activations.
struct Shape3 {
    std::size_t h = 0;
    std::size_t w = 0;
    std::size_t c = 0;

    std::size_t flat() const noexcept { return h * w * c; }
    friend bool operator==(const Shape3&, const Shape3&) = default;
};

struct NetworkSpec {
    Shape3 input;
    std::vector<LayerSpec> layers;
    std::size_t num_classes = 0;

    /// Fills in empty layer names, then checks the shape chain, name uniqueness
    /// and that the last trainable layer emits num_classes outputs.
    void validate();

    /// Input shape of every layer followed by the network output shape.
    std::vector<Shape3> shapes() const;

    std::optional<std::size_t> find_layer(std::string_view name) const;
    std::vector<std::size_t> trainable_layers() const;
};

/// Conv(16,3x3,s1,p1)-ReLU-Conv(32,3x3,s2,p1)-ReLU-Conv(64,3x3,s2,p1)-ReLU-GlobalAvgPool-Dense(classes).
/// Trainable layers are named conv1, conv2, conv3, final_dense.
NetworkSpec small_cnn(Shape3 input, std::size_t num_classes);

/// Parameters of one trainable layer. Conv weights are stored flattened,
/// c_o x (f_h*f_w*c_i) with (row, col, channel) column order.
struct LayerParams {
    std::size_t layer = 0;  // index into NetworkSpec::layers
    Matrix weight;
    std::vector<double> bias;
    Matrix weight_velocity;
    std::vector<double> bias_velocity;
};

struct Network {
    NetworkSpec spec;
    std::vector<LayerParams> params;  // one entry per trainable layer, network order

    /// All-zero parameters with shapes derived from `spec` (validated first).
    explicit Network(NetworkSpec spec);
    Network() = default;

    LayerParams* params_for(std::size_t layer);
    const LayerParams* params_for(std::size_t layer) const;
    /// Input dimension d_i and output dimension d_o of a trainable layer.
    std::pair<std::size_t, std::size_t> layer_dims(std::size_t layer) const;
    ConvGeometry conv_geometry(std::size_t layer) const;
};

struct LayerCache {
    Tensor4 input;
    Matrix patches;  // conv layers only
};

struct ForwardResult {
    Matrix logits;                  // num_classes x batch
    std::vector<LayerCache> cache;  // one per layer
};

/// Runs one layer. For conv layers the im2col matrix is written to `patches` when given.
Tensor4 apply_layer(const Network& net, std::size_t layer, const Tensor4& input, Matrix* patches = nullptr);

ForwardResult forward(const Network& net, const Tensor4& batch);

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
};

struct BackwardResult {
    double loss = 0.0;
    Gradients grads;
};

/// Mean softmax cross-entropy over the batch and its parameter gradients.
BackwardResult backward(const Network& net, const Tensor4& batch, const Labels& labels);

/// Mean softmax cross-entropy of logits (classes x batch).
double softmax_cross_entropy(const Matrix& logits, const Labels& labels);

struct TrainConfig {
    double lr = 0.1;
    double momentum = 0.9;
    std::vector<std::size_t> decay_epochs;
    double decay_factor = 10.0;
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
    /// lr / decay_factor^(number of decay epochs <= epoch).
    double lr_at(std::size_t epoch) const;
};

/// v ← momentum·v + g; p ← p − lr(epoch)·v.
void sgd_step(Network& net, const Gradients& grads, const TrainConfig& config, std::size_t epoch);

struct EpochStats {
    std::size_t epoch = 0;  // 1-based count of completed epochs
    double mean_loss = 0.0;
};

/// Per-epoch seeded shuffle, mini-batches in order with the last partial batch kept.
void train(Network& net, const LabeledDataset& data, const TrainConfig& config,
           const std::function<void(const EpochStats&)>& on_epoch = {});

/// argmax per column, ties to the lowest class index.
std::vector<ClassId> predict(const Matrix& logits);

/// Fraction of correctly classified samples; throws ParameterError on empty data.
double evaluate(const Network& net, const LabeledDataset& data, std::size_t batch_size = 256);

enum class InitScheme { HeUniform, HeNormal, XavierUniform, XavierNormal };

std::string_view to_string(InitScheme scheme);
/// Accepts he-uniform, he-normal, xavier-uniform, xavier-normal.
std::optional<InitScheme> parse_init_scheme(std::string_view text);

/// fan_in = d_i; fan_out = d_o (times f_h*f_w for conv). Biases are zeroed,
/// momentum buffers cleared.
Network random_init(Network net, InitScheme scheme, std::uint64_t seed);

}  // namespace sylvinit
