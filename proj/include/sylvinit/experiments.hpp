#pragma once

// Desk-scale experiment protocols behind the command-line tool: initialize,
// train-and-compare, sample-count benchmark and lambda sweep.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sylvinit/dataset.hpp"
#include "sylvinit/initdriver.hpp"
#include "sylvinit/nnet.hpp"

namespace sylvinit {

struct DataOptions {
    std::string dataset = "blobs";  // cifar10 | cifar100 | blobs
    std::optional<std::filesystem::path> data_dir;
    std::size_t blob_classes = 3;
    std::size_t blob_side = 8;
    std::size_t blob_channels = 1;
    std::size_t blob_train_per_class = 100;
    std::size_t blob_test_per_class = 100;
    double blob_spread = 0.1;
    std::uint64_t data_seed = 7;
};

struct DataSplits {
    LabeledDataset train;
    LabeledDataset test;
};

/// CIFAR directories come from data_dir, falling back to $SYLVINIT_DATA_DIR.
DataSplits load_data(const DataOptions& opts);

struct ExperimentOptions {
    DataOptions data;
    std::optional<std::filesystem::path> arch;   // JSON network spec; SmallCNN when absent
    std::string scheme = "sylvester";            // sylvester | he-uniform | he-normal | xavier-uniform | xavier-normal
    std::string base_scheme = "he-uniform";      // fills layers left out of a layer filter
    std::optional<std::filesystem::path> params_in;
    InitConfig init;
    std::optional<std::size_t> shot;             // training samples per class
    TrainConfig train;
    std::uint64_t seed = 0;
};

/// Throws ConfigError for an unknown scheme name.
void validate_scheme(const std::string& scheme);

NetworkSpec resolve_arch(const ExperimentOptions& opts, const LabeledDataset& data);

struct InitOutcome {
    Network network;
    InitReport report;  // empty for random schemes
    double seconds = 0.0;
};

/// Initializes a network on `train` per opts.scheme. Sylvester draws its
/// initialization subset with stratified_subset(train, per_class_samples).
InitOutcome run_init(const ExperimentOptions& opts, const LabeledDataset& train);

struct ExperimentRecord {
    std::string method;
    std::string dataset;
    std::optional<std::size_t> shot;
    std::uint64_t seed = 0;
    double initial_accuracy = 0.0;
    double final_accuracy = 0.0;
    double init_seconds = 0.0;
    double train_seconds = 0.0;
};

struct CurvePoint {
    std::size_t epoch = 0;
    double wall_seconds = 0.0;
    double test_accuracy = 0.0;
};

struct TrainOutcome {
    ExperimentRecord record;
    std::vector<CurvePoint> curve;  // epoch 0 is the initial accuracy
    Network network;
};

/// Restricts training data to opts.shot per class (when set), initializes,
/// evaluates, trains and evaluates again.
TrainOutcome run_train(const ExperimentOptions& opts, const DataSplits& data);

struct BenchRow {
    std::size_t per_class = 0;
    double init_seconds = 0.0;
    double initial_accuracy = 0.0;
};

std::vector<BenchRow> run_bench(const ExperimentOptions& opts, const DataSplits& data,
                                const std::vector<std::size_t>& counts);

struct LambdaRow {
    double lambda = 0.0;
    double initial_accuracy = 0.0;
    double final_accuracy = 0.0;
};

inline const std::vector<double> kDefaultLambdas = {0.01, 0.1, 1.0, 10.0, 100.0};

std::vector<LambdaRow> run_sweep_lambda(const ExperimentOptions& opts, const DataSplits& data,
                                        const std::vector<double>& lambdas);

inline constexpr const char* kExperimentHeader =
    "method,dataset,shot,seed,initial_accuracy,final_accuracy,init_seconds,train_seconds";
inline constexpr const char* kCurveHeader = "epoch,wall_seconds,test_accuracy";
inline constexpr const char* kBenchHeader = "per_class_samples,init_seconds,initial_accuracy";
inline constexpr const char* kLambdaHeader = "lambda,initial_accuracy,final_accuracy";

void write_csv_row(std::ostream& out, const ExperimentRecord& r);
void write_csv_row(std::ostream& out, const CurvePoint& p);
void write_csv_row(std::ostream& out, const BenchRow& r);
void write_csv_row(std::ostream& out, const LambdaRow& r);

/// Opens `path` for appending and writes `header` if the file is new or empty.
/// With `overwrite`, truncates first.
std::ofstream open_csv(const std::filesystem::path& path, const char* header, bool overwrite);

}  // namespace sylvinit
