// sylvinit: command-line front end for Sylvester initialization experiments.
//
//   sylvinit init          initialize a network and save its parameters
//   sylvinit train         initialize, train, and record initial/final accuracy
//   sylvinit bench         init time and initial accuracy over sample counts
//   sylvinit sweep-lambda  initial/final accuracy over lambda values
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sylvinit/errors.hpp"
#include "sylvinit/experiments.hpp"
#include "sylvinit/network_io.hpp"

namespace {

using namespace sylvinit;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Flags {
    ExperimentOptions opts;
    std::string arch;
    std::string params_in;
    std::vector<std::string> codes;
    std::vector<std::string> layers;
    std::size_t shot = 0;
    std::vector<std::size_t> decay_epochs;
    std::string out;
    bool overwrite = false;
    bool verbose = false;
    // command-specific
    std::string report;
    std::string curve;
    std::string params_out;
    std::size_t runs = 1;
    std::vector<std::size_t> counts{5, 20, 100};
    std::vector<double> lambdas = kDefaultLambdas;
};

void add_data_flags(CLI::App& cmd, Flags& f) {
    auto& d = f.opts.data;
    cmd.add_option("--dataset", d.dataset, "cifar10 | cifar100 | blobs")->capture_default_str();
    cmd.add_option("--data-dir", d.data_dir, "CIFAR directory (default: $SYLVINIT_DATA_DIR)");
    cmd.add_option("--blob-classes", d.blob_classes, "blobs: number of classes")->capture_default_str();
    cmd.add_option("--blob-side", d.blob_side, "blobs: image side")->capture_default_str();
    cmd.add_option("--blob-channels", d.blob_channels, "blobs: channels")->capture_default_str();
    cmd.add_option("--blob-train", d.blob_train_per_class, "blobs: training images per class")->capture_default_str();
    cmd.add_option("--blob-test", d.blob_test_per_class, "blobs: test images per class")->capture_default_str();
    cmd.add_option("--blob-spread", d.blob_spread, "blobs: noise standard deviation")->capture_default_str();
    cmd.add_option("--data-seed", d.data_seed, "blobs: generator seed")->capture_default_str();
}

void add_init_flags(CLI::App& cmd, Flags& f) {
    auto& o = f.opts;
    cmd.add_option("--arch", f.arch, "JSON network spec (default: SmallCNN)");
    cmd.add_option("--scheme", o.scheme, "sylvester | he-uniform | he-normal | xavier-uniform | xavier-normal")
        ->capture_default_str();
    cmd.add_option("--base-scheme", o.base_scheme, "random scheme for layers outside --layers")->capture_default_str();
    cmd.add_option("--params-in", f.params_in, "start from saved parameters instead of a random base");
    cmd.add_option("--lambda", o.init.lambda, "decoding/encoding balance")->capture_default_str();
    cmd.add_option("--per-class", o.init.per_class_samples, "initialization samples per class")->capture_default_str();
    cmd.add_option("--patches-per-image", o.init.patch_samples_per_image, "sampled patches per image for conv layers")
        ->capture_default_str();
    cmd.add_option("--code", f.codes, "latent code pca|onehot|kmeans|lda, or layer=code overrides")->delimiter(',');
    cmd.add_option("--eps", o.init.eps, "solver denominator floor (default: relative to the spectra)");
    cmd.add_option("--layers", f.layers, "only initialize these layers (comma separated)")->delimiter(',');
    cmd.add_option("--seed", o.seed, "experiment seed")->capture_default_str();
    cmd.add_flag("--verbose", f.verbose, "print per-layer diagnostics to stderr");
}

void add_train_flags(CLI::App& cmd, Flags& f) {
    auto& t = f.opts.train;
    t.epochs = 30;
    cmd.add_option("--shot", f.shot, "training samples per class (default: all)");
    cmd.add_option("--epochs", t.epochs, "training epochs")->capture_default_str();
    cmd.add_option("--lr", t.lr, "initial learning rate")->capture_default_str();
    cmd.add_option("--momentum", t.momentum, "SGD momentum")->capture_default_str();
    cmd.add_option("--decay-epochs", f.decay_epochs, "epochs at which lr drops by --decay-factor (default: 50% and 75%)")
        ->delimiter(',');
    cmd.add_option("--decay-factor", t.decay_factor, "lr decay factor")->capture_default_str();
    cmd.add_option("--batch-size", t.batch_size, "mini-batch size")->capture_default_str();
}

void add_output_flags(CLI::App& cmd, Flags& f, const std::string& what) {
    cmd.add_option("--out", f.out, what);
    cmd.add_flag("--overwrite", f.overwrite, "truncate CSV outputs instead of appending");
}

// Applies the flags that need post-processing to f.opts.
void finalize(Flags& f, const CLI::App& cmd) {
    validate_scheme(f.opts.scheme);
    if (!f.arch.empty()) f.opts.arch = f.arch;
    if (!f.params_in.empty()) f.opts.params_in = f.params_in;
    for (const std::string& c : f.codes) {
        const auto eq = c.find('=');
        if (eq == std::string::npos) {
            f.opts.init.hidden_code = parse_code_kind(c);
        } else {
            f.opts.init.codes[c.substr(0, eq)] = parse_code_kind(c.substr(eq + 1));
        }
    }
    if (!f.layers.empty()) f.opts.init.layer_filter = std::set<std::string>(f.layers.begin(), f.layers.end());
    const auto given = [&cmd](const char* name) {
        const CLI::Option* opt = cmd.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--shot")) {
        if (f.shot == 0) throw ConfigError("--shot must be at least 1");
        f.opts.shot = f.shot;
    }
    if (given("--decay-epochs")) {
        f.opts.train.decay_epochs = f.decay_epochs;
    } else {
        const std::size_t e = f.opts.train.epochs;
        f.opts.train.decay_epochs = {e / 2, (3 * e) / 4};
    }
    f.opts.train.validate();
}

void print_layer_diagnostics(const InitReport& report) {
    for (const LayerInitRecord& r : report.layers) {
        std::fprintf(stderr, "%-12s d_i=%-5zu d_o=%-4zu n=%-6zu code=%-6s residual=%.3g clipped=%zu output_std=%.4g (%.3fs)\n",
                     r.layer.c_str(), r.d_i, r.d_o, r.n_used, std::string(to_string(r.code)).c_str(), r.residual,
                     r.clipped, r.output_std, r.seconds);
    }
}

// CSV sink: a file opened for appending, or stdout when no path is given.
class CsvSink {
public:
    CsvSink(const std::string& path, const char* header, bool overwrite) {
        if (path.empty()) {
            std::cout << header << '\n';
        } else {
            file_ = open_csv(path, header, overwrite);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

int cmd_init(Flags& f) {
    const DataSplits data = load_data(f.opts.data);
    const InitOutcome init = run_init(f.opts, data.train);
    if (f.verbose) print_layer_diagnostics(init.report);
    if (!f.out.empty()) save_parameters(f.out, init.network);
    if (!f.params_out.empty()) save_network_spec(f.params_out, init.network.spec);

    if (f.report.empty()) {
        write_init_report_csv(std::cout, init.report);
    } else {
        std::ofstream out(f.report, std::ios::trunc);
        if (!out) throw IoError("cannot write '" + f.report + "'");
        write_init_report_csv(out, init.report);
    }
    std::fprintf(stderr, "initialized with %s in %.3fs, initial test accuracy %.4f\n", f.opts.scheme.c_str(), init.seconds,
                 evaluate(init.network, data.test));
    return kExitOk;
}

int cmd_train(Flags& f) {
    const DataSplits data = load_data(f.opts.data);
    CsvSink records(f.out, kExperimentHeader, f.overwrite);
    std::optional<CsvSink> curve;
    if (!f.curve.empty()) curve.emplace(f.curve, kCurveHeader, f.overwrite);

    for (std::size_t run = 0; run < f.runs; ++run) {
        ExperimentOptions o = f.opts;
        o.seed = f.opts.seed + run;
        const TrainOutcome t = run_train(o, data);
        write_csv_row(records.stream(), t.record);
        if (curve)
            for (const CurvePoint& p : t.curve) write_csv_row(curve->stream(), p);
        if (!f.params_out.empty() && run + 1 == f.runs) save_parameters(f.params_out, t.network);
        std::fprintf(stderr, "seed %llu: initial %.4f -> final %.4f\n", static_cast<unsigned long long>(o.seed),
                     t.record.initial_accuracy, t.record.final_accuracy);
    }
    return kExitOk;
}

int cmd_bench(Flags& f) {
    const DataSplits data = load_data(f.opts.data);
    const std::vector<BenchRow> rows = run_bench(f.opts, data, f.counts);
    CsvSink out(f.out, kBenchHeader, f.overwrite);
    for (const BenchRow& r : rows) write_csv_row(out.stream(), r);
    return kExitOk;
}

int cmd_sweep_lambda(Flags& f) {
    const DataSplits data = load_data(f.opts.data);
    const std::vector<LambdaRow> rows = run_sweep_lambda(f.opts, data, f.lambdas);
    CsvSink out(f.out, kLambdaHeader, f.overwrite);
    for (const LambdaRow& r : rows) write_csv_row(out.stream(), r);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-free Sylvester-equation weight initialization"};
    app.require_subcommand(1);

    Flags init_flags, train_flags, bench_flags, sweep_flags;

    CLI::App* init = app.add_subcommand("init", "initialize a network and save its parameters");
    add_data_flags(*init, init_flags);
    add_init_flags(*init, init_flags);
    init->add_option("--out", init_flags.out, "parameter file to write");
    init->add_option("--report", init_flags.report, "init report CSV (default: stdout)");
    init->add_option("--spec-out", init_flags.params_out, "write the resolved network spec as JSON");

    CLI::App* train = app.add_subcommand("train", "initialize, train and record accuracies");
    add_data_flags(*train, train_flags);
    add_init_flags(*train, train_flags);
    add_train_flags(*train, train_flags);
    add_output_flags(*train, train_flags, "experiment CSV (appended; default: stdout)");
    train->add_option("--curve", train_flags.curve, "per-epoch epoch,wall_seconds,test_accuracy CSV");
    train->add_option("--params-out", train_flags.params_out, "save the trained parameters");
    train->add_option("--runs", train_flags.runs, "number of consecutive seeds starting at --seed")->capture_default_str();

    CLI::App* bench = app.add_subcommand("bench", "init time and initial accuracy over per-class sample counts");
    add_data_flags(*bench, bench_flags);
    add_init_flags(*bench, bench_flags);
    add_output_flags(*bench, bench_flags, "bench CSV (appended; default: stdout)");
    bench->add_option("--counts", bench_flags.counts, "per-class sample counts")->delimiter(',')->capture_default_str();

    CLI::App* sweep = app.add_subcommand("sweep-lambda", "initial and final accuracy over lambda values");
    add_data_flags(*sweep, sweep_flags);
    add_init_flags(*sweep, sweep_flags);
    add_train_flags(*sweep, sweep_flags);
    sweep_flags.opts.train.epochs = 0;
    add_output_flags(*sweep, sweep_flags, "lambda CSV (appended; default: stdout)");
    sweep->add_option("--lambdas", sweep_flags.lambdas, "lambda values")->delimiter(',')->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*init) {
            finalize(init_flags, *init);
            return cmd_init(init_flags);
        }
        if (*train) {
            finalize(train_flags, *train);
            return cmd_train(train_flags);
        }
        if (*bench) {
            finalize(bench_flags, *bench);
            return cmd_bench(bench_flags);
        }
        finalize(sweep_flags, *sweep);
        return cmd_sweep_lambda(sweep_flags);
    } catch (const ConfigError& e) {
        std::cerr << "sylvinit: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParameterError& e) {
        std::cerr << "sylvinit: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "sylvinit: " << e.what() << '\n';
        return kExitRuntime;
    }
}
