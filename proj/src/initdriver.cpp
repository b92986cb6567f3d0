#include "sylvinit/initdriver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iterator>
#include <random>

#include "sylvinit/errors.hpp"
#include "sylvinit/patches.hpp"

namespace sylvinit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(layer * 0x100 + salt));
}

double tensor_std(const Tensor4& t) {
    const auto d = t.data();
    if (d.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double acc = 0.0;
    for (double v : d) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(d.size() - 1));
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void InitConfig::validate(const NetworkSpec& spec) const {
    if (!(lambda > 0.0)) throw ConfigError("init config: lambda must be positive");
    if (per_class_samples == 0) throw ConfigError("init config: per_class_samples must be >= 1");
    if (patch_samples_per_image == 0) throw ConfigError("init config: patch_samples_per_image must be >= 1");
    if (eps && !(*eps > 0.0)) throw ConfigError("init config: eps must be positive");
    auto require_trainable = [&](const std::string& name, const char* what) {
        const auto idx = spec.find_layer(name);
        if (!idx) throw ConfigError(std::string(what) + ": no layer named '" + name + "'");
        if (!spec.layers[*idx].trainable()) throw ConfigError(std::string(what) + ": layer '" + name + "' has no weights");
    };
    for (const auto& [name, kind] : codes) require_trainable(name, "code override");
    if (layer_filter)
        for (const auto& name : *layer_filter) require_trainable(name, "layer filter");
}

LatentCodeSpec InitConfig::code_for(const NetworkSpec& spec, std::size_t layer) const {
    LatentCodeSpec code;
    const auto& name = spec.layers.at(layer).name;
    const auto trainable = spec.trainable_layers();
    if (auto it = codes.find(name); it != codes.end()) {
        code.kind = it->second;
    } else {
        code.kind = (!trainable.empty() && trainable.back() == layer) ? CodeKind::OneHot : hidden_code;
    }
    code.seed = layer_seed(seed, layer, 1);
    return code;
}

InitResult initialize(Network net, const LabeledDataset& data, const InitConfig& cfg) {
    cfg.validate(net.spec);
    if (data.empty()) throw ParameterError("initialize: empty initialization set");
    data.validate();
    const auto start = Clock::now();

    InitResult result;
    Tensor4 act = data.images;
    std::optional<std::size_t> open_record;

    for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
        const LayerSpec& ls = net.spec.layers[li];
        const bool selected = ls.trainable() && (!cfg.layer_filter || cfg.layer_filter->contains(ls.name));
        if (selected) {
            const auto layer_start = Clock::now();
            Matrix x;
            Labels labels;
            if (ls.kind == LayerKind::Conv2D) {
                PatchMatrix pm = extract_patches(act, ls.f_h, ls.f_w, ls.stride, ls.pad, data.labels);
                pm = sample_patches(pm, cfg.patch_samples_per_image, layer_seed(cfg.seed, li, 2));
                x = std::move(pm.x);
                labels = std::move(pm.labels);
            } else {
                x = Matrix(act.dim(0), act.stride0(), std::vector<double>(act.data().begin(), act.data().end()))
                        .transpose();
                labels = data.labels;
            }
            if (frobenius_norm(x) == 0.0) {
                throw DegenerateActivationError("layer '" + ls.name + "': all input activations are zero");
            }

            const auto [d_i, d_o] = net.layer_dims(li);
            const LatentCodeSpec code = cfg.code_for(net.spec, li);
            const Matrix s = latent_code(x, labels, d_o, net.spec.num_classes, code);
            const SylvesterOperands ops = build_operands(x, s, cfg.lambda);
            SolveResult solved = solve(ops, cfg.eps);

            LayerParams& p = *net.params_for(li);
            LayerInitRecord rec;
            rec.layer = ls.name;
            rec.d_i = d_i;
            rec.d_o = d_o;
            rec.n_used = x.cols();
            rec.code = code.kind;
            rec.residual = solved.diagnostics.residual;
            rec.objective = objective(solved.w, x, s, cfg.lambda);
            rec.clipped = solved.diagnostics.clipped_denominators;

            p.weight = std::move(solved.w);
            p.weight_velocity = Matrix(d_o, d_i);
            std::fill(p.bias.begin(), p.bias.end(), 0.0);
            std::fill(p.bias_velocity.begin(), p.bias_velocity.end(), 0.0);
            rec.seconds = seconds_since(layer_start);
            result.report.layers.push_back(std::move(rec));
            open_record = result.report.layers.size() - 1;
        } else if (ls.trainable()) {
            open_record.reset();
        }

        act = apply_layer(net, li, act);
        if (open_record && (selected || ls.kind == LayerKind::ReLU)) {
            result.report.layers[*open_record].output_std = tensor_std(act);
        } else {
            open_record.reset();
        }
    }

    result.report.total_seconds = seconds_since(start);
    result.network = std::move(net);
    return result;
}

LabeledDataset stratified_subset(const LabeledDataset& data, std::size_t per_class, std::uint64_t seed) {
    if (data.empty()) throw ParameterError("stratified_subset: empty dataset");
    if (per_class == 0) throw ParameterError("stratified_subset: per_class must be >= 1");
    std::vector<std::vector<std::size_t>> by_class(data.num_classes);
    for (std::size_t i = 0; i < data.size(); ++i) by_class.at(data.labels[i]).push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep;
    for (const auto& members : by_class) {
        if (members.size() <= per_class) {
            keep.insert(keep.end(), members.begin(), members.end());
        } else {
            std::sample(members.begin(), members.end(), std::back_inserter(keep), per_class, rng);
        }
    }
    return data.subset(keep);
}

void write_init_report_csv(std::ostream& out, const InitReport& report, bool header) {
    if (header) out << kInitReportHeader << '\n';
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(10);
    for (const auto& r : report.layers) {
        out << r.layer << ',' << r.d_i << ',' << r.d_o << ',' << r.n_used << ',' << to_string(r.code) << ','
            << r.residual << ',' << r.objective << ',' << r.clipped << ',' << r.seconds << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace sylvinit
