#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sylvinit/dataset.hpp"
#include "sylvinit/latent.hpp"
#include "sylvinit/nnet.hpp"
#include "sylvinit/sylvester.hpp"

namespace sylvinit {

inline constexpr std::size_t kDefaultPatchesPerImage = 16;

struct InitConfig {
    double lambda = kDefaultLambda;
    std::size_t per_class_samples = 100;
    std::size_t patch_samples_per_image = kDefaultPatchesPerImage;
    /// Per-layer code overrides by layer name. Layers not listed use PCA, except
    /// the last trainable layer which uses one-hot.
    std::map<std::string, CodeKind> codes;
    /// Code used for non-final layers without an override.
    CodeKind hidden_code = CodeKind::PCA;
    std::optional<double> eps;
    std::uint64_t seed = 0;
    /// When set, only these layers are initialized; the rest keep their parameters.
    std::optional<std::set<std::string>> layer_filter;

    void validate(const NetworkSpec& spec) const;
    /// Resolved code spec (kind and seed) for a trainable layer.
    LatentCodeSpec code_for(const NetworkSpec& spec, std::size_t layer) const;
};

struct LayerInitRecord {
    std::string layer;
    std::size_t d_i = 0;
    std::size_t d_o = 0;
    std::size_t n_used = 0;
    CodeKind code = CodeKind::PCA;
    double residual = 0.0;
    double objective = 0.0;
    std::size_t clipped = 0;
    double seconds = 0.0;
    double output_std = 0.0;  // std of the layer's post-nonlinearity output on the init subset
};

struct InitReport {
    std::vector<LayerInitRecord> layers;
    double total_seconds = 0.0;
};

struct InitResult {
    Network network;
    InitReport report;
};

/// Sequential layer-wise initialization: each selected trainable layer is fitted
/// to its input activations on `data`, then `data` is propagated through it.
InitResult initialize(Network net, const LabeledDataset& data, const InitConfig& cfg);

/// min(per_class, available) samples per class, drawn without replacement and
/// returned grouped by class in ascending index order.
LabeledDataset stratified_subset(const LabeledDataset& data, std::size_t per_class, std::uint64_t seed);

inline constexpr const char* kInitReportHeader = "layer,d_i,d_o,n_used,code,residual,objective,clipped,seconds";
void write_init_report_csv(std::ostream& out, const InitReport& report, bool header = true);

}  // namespace sylvinit
