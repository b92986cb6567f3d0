#include "sylvinit/experiments.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>

#include "sylvinit/dataio.hpp"
#include "sylvinit/errors.hpp"
#include "sylvinit/network_io.hpp"

namespace sylvinit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Independent streams derived from the experiment seed.
enum class Stream : std::uint64_t { Subset = 1, Shot = 2, Random = 3, Init = 4, Shuffle = 5, Base = 6 };

std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
    std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(stream);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::filesystem::path cifar_dir(const DataOptions& opts) {
    if (opts.data_dir) return *opts.data_dir;
    if (const char* env = std::getenv("SYLVINIT_DATA_DIR"); env && *env) return env;
    throw ConfigError("dataset '" + opts.dataset + "' needs --data-dir or SYLVINIT_DATA_DIR");
}

}  // namespace

DataSplits load_data(const DataOptions& opts) {
    if (opts.dataset == "blobs") {
        const auto make = [&](std::size_t per_class, std::uint64_t sample_seed) {
            return synth_blobs(opts.blob_classes, opts.blob_side, opts.blob_channels, per_class, opts.blob_spread,
                               opts.data_seed, sample_seed);
        };
        return {make(opts.blob_train_per_class, opts.data_seed + 1), make(opts.blob_test_per_class, opts.data_seed + 2)};
    }
    if (opts.dataset == "cifar10") {
        const auto dir = cifar_dir(opts);
        return {load_cifar10(dir, CifarSplit::Train), load_cifar10(dir, CifarSplit::Test)};
    }
    if (opts.dataset == "cifar100") {
        const auto dir = cifar_dir(opts);
        return {load_cifar100(dir, CifarSplit::Train), load_cifar100(dir, CifarSplit::Test)};
    }
    throw ConfigError("unknown dataset '" + opts.dataset + "' (expected cifar10|cifar100|blobs)");
}

void validate_scheme(const std::string& scheme) {
    if (scheme != "sylvester" && !parse_init_scheme(scheme)) {
        throw ConfigError("unknown scheme '" + scheme +
                          "' (expected sylvester|he-uniform|he-normal|xavier-uniform|xavier-normal)");
    }
}

NetworkSpec resolve_arch(const ExperimentOptions& opts, const LabeledDataset& data) {
    NetworkSpec spec = opts.arch ? load_network_spec(*opts.arch)
                                 : small_cnn({data.images.dim(1), data.images.dim(2), data.images.dim(3)}, data.num_classes);
    if (spec.input != Shape3{data.images.dim(1), data.images.dim(2), data.images.dim(3)}) {
        throw ConfigError("architecture input dims do not match dataset images " + data.images.shape_string());
    }
    if (spec.num_classes != data.num_classes) throw ConfigError("architecture num_classes does not match dataset");
    return spec;
}

InitOutcome run_init(const ExperimentOptions& opts, const LabeledDataset& train) {
    validate_scheme(opts.scheme);
    const NetworkSpec spec = resolve_arch(opts, train);
    const auto start = Clock::now();
    InitOutcome out;

    if (const auto scheme = parse_init_scheme(opts.scheme)) {
        out.network = random_init(Network(spec), *scheme, derive_seed(opts.seed, Stream::Random));
        out.seconds = seconds_since(start);
        return out;
    }

    Network base;
    if (opts.params_in) {
        base = load_parameters(*opts.params_in, spec);
    } else if (opts.init.layer_filter) {
        const auto scheme = parse_init_scheme(opts.base_scheme);
        if (!scheme) throw ConfigError("unknown base scheme '" + opts.base_scheme + "'");
        base = random_init(Network(spec), *scheme, derive_seed(opts.seed, Stream::Base));
    } else {
        base = Network(spec);
    }
    InitConfig cfg = opts.init;
    cfg.seed = derive_seed(opts.seed, Stream::Init);
    const LabeledDataset subset = stratified_subset(train, cfg.per_class_samples, derive_seed(opts.seed, Stream::Subset));
    InitResult r = initialize(std::move(base), subset, cfg);
    out.network = std::move(r.network);
    out.report = std::move(r.report);
    out.seconds = seconds_since(start);
    return out;
}

TrainOutcome run_train(const ExperimentOptions& opts, const DataSplits& data) {
    const LabeledDataset train_set =
        opts.shot ? stratified_subset(data.train, *opts.shot, derive_seed(opts.seed, Stream::Shot)) : data.train;

    TrainOutcome out;
    InitOutcome init = run_init(opts, train_set);
    out.network = std::move(init.network);
    out.record.method = opts.scheme;
    out.record.dataset = opts.data.dataset;
    out.record.shot = opts.shot;
    out.record.seed = opts.seed;
    out.record.init_seconds = init.seconds;
    out.record.initial_accuracy = evaluate(out.network, data.test);
    out.curve.push_back({0, 0.0, out.record.initial_accuracy});

    TrainConfig cfg = opts.train;
    cfg.seed = derive_seed(opts.seed, Stream::Shuffle);
    const auto start = Clock::now();
    double eval_seconds = 0.0;
    train(out.network, train_set, cfg, [&](const EpochStats& stats) {
        const auto eval_start = Clock::now();
        const double acc = evaluate(out.network, data.test);
        eval_seconds += seconds_since(eval_start);
        out.curve.push_back({stats.epoch, init.seconds + seconds_since(start) - eval_seconds, acc});
    });
    out.record.train_seconds = seconds_since(start) - eval_seconds;
    out.record.final_accuracy = out.curve.back().test_accuracy;
    return out;
}

std::vector<BenchRow> run_bench(const ExperimentOptions& opts, const DataSplits& data,
                                const std::vector<std::size_t>& counts) {
    std::vector<BenchRow> rows;
    for (std::size_t count : counts) {
        ExperimentOptions o = opts;
        o.init.per_class_samples = count;
        const InitOutcome init = run_init(o, data.train);
        rows.push_back({count, init.seconds, evaluate(init.network, data.test)});
    }
    return rows;
}

std::vector<LambdaRow> run_sweep_lambda(const ExperimentOptions& opts, const DataSplits& data,
                                        const std::vector<double>& lambdas) {
    std::vector<LambdaRow> rows;
    for (double lambda : lambdas) {
        ExperimentOptions o = opts;
        o.scheme = "sylvester";
        o.init.lambda = lambda;
        const TrainOutcome t = run_train(o, data);
        rows.push_back({lambda, t.record.initial_accuracy, t.record.final_accuracy});
    }
    return rows;
}

void write_csv_row(std::ostream& out, const ExperimentRecord& r) {
    out << std::setprecision(10) << r.method << ',' << r.dataset << ','
        << (r.shot ? std::to_string(*r.shot) : std::string("full")) << ',' << r.seed << ',' << r.initial_accuracy << ','
        << r.final_accuracy << ',' << r.init_seconds << ',' << r.train_seconds << '\n';
}

void write_csv_row(std::ostream& out, const CurvePoint& p) {
    out << std::setprecision(10) << p.epoch << ',' << p.wall_seconds << ',' << p.test_accuracy << '\n';
}

void write_csv_row(std::ostream& out, const BenchRow& r) {
    out << std::setprecision(10) << r.per_class << ',' << r.init_seconds << ',' << r.initial_accuracy << '\n';
}

void write_csv_row(std::ostream& out, const LambdaRow& r) {
    out << std::setprecision(10) << r.lambda << ',' << r.initial_accuracy << ',' << r.final_accuracy << '\n';
}

std::ofstream open_csv(const std::filesystem::path& path, const char* header, bool overwrite) {
    const bool fresh = overwrite || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, overwrite ? std::ios::trunc : std::ios::app);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (fresh) out << header << '\n';
    return out;
}

}  // namespace sylvinit
