#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sylvinit/errors.hpp"
#include "sylvinit/experiments.hpp"

using namespace sylvinit;
namespace fs = std::filesystem;

namespace {

ExperimentOptions small_options() {
    ExperimentOptions o;
    o.data.blob_train_per_class = 20;
    o.data.blob_test_per_class = 20;
    o.init.per_class_samples = 10;
    o.init.patch_samples_per_image = 8;
    o.train.epochs = 3;
    o.train.batch_size = 16;
    o.train.decay_epochs = {2};
    return o;
}

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("load_data: blobs splits and CIFAR directory resolution") {
    DataOptions d;
    d.blob_train_per_class = 7;
    d.blob_test_per_class = 5;
    const DataSplits s = load_data(d);
    CHECK(s.train.size() == 21);
    CHECK(s.test.size() == 15);
    CHECK(s.train.images.slice(0)[0] != s.test.images.slice(0)[0]);

    DataOptions c;
    c.dataset = "cifar10";
    const char* saved = std::getenv("SYLVINIT_DATA_DIR");
    const std::string saved_value = saved ? saved : "";
    unsetenv("SYLVINIT_DATA_DIR");
    CHECK_THROWS_AS(load_data(c), ConfigError);
    setenv("SYLVINIT_DATA_DIR", "/nonexistent/cifar", 1);
    CHECK_THROWS_AS(load_data(c), IoError);
    if (saved) setenv("SYLVINIT_DATA_DIR", saved_value.c_str(), 1); else unsetenv("SYLVINIT_DATA_DIR");

    DataOptions bad;
    bad.dataset = "mnist";
    CHECK_THROWS_AS(load_data(bad), ConfigError);
}

TEST_CASE("run_train: zero epochs leaves final equal to initial") {
    ExperimentOptions o = small_options();
    o.train.epochs = 0;
    o.train.decay_epochs = {};
    const DataSplits data = load_data(o.data);
    for (const char* scheme : {"sylvester", "he-normal"}) {
        o.scheme = scheme;
        const TrainOutcome t = run_train(o, data);
        CHECK(t.record.final_accuracy == t.record.initial_accuracy);
        CHECK(t.curve.size() == 1);
        CHECK(t.record.method == scheme);
    }
}

TEST_CASE("run_train: shot subset, curve and determinism") {
    ExperimentOptions o = small_options();
    o.shot = 5;
    o.seed = 4;
    const DataSplits data = load_data(o.data);
    const TrainOutcome a = run_train(o, data);
    const TrainOutcome b = run_train(o, data);
    CHECK(a.curve.size() == 4);
    for (std::size_t e = 0; e < a.curve.size(); ++e) {
        CHECK(a.curve[e].epoch == e);
        CHECK(a.curve[e].test_accuracy == b.curve[e].test_accuracy);
    }
    CHECK(a.record.final_accuracy == a.curve.back().test_accuracy);

    std::ostringstream row;
    write_csv_row(row, a.record);
    CHECK(row.str().rfind("sylvester,blobs,5,4,", 0) == 0);
    o.shot.reset();
    std::ostringstream full;
    write_csv_row(full, run_train(o, data).record);
    CHECK(full.str().rfind("sylvester,blobs,full,4,", 0) == 0);
}

TEST_CASE("run_sweep_lambda: defaults give five rows and lambda 10 matches a standalone run") {
    ExperimentOptions o = small_options();
    o.train.epochs = 1;
    o.train.decay_epochs = {};
    o.scheme = "he-uniform";  // the sweep always uses sylvester
    const DataSplits data = load_data(o.data);
    const std::vector<LambdaRow> rows = run_sweep_lambda(o, data, kDefaultLambdas);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].lambda == kDefaultLambdas[i]);

    ExperimentOptions single = o;
    single.scheme = "sylvester";
    single.init.lambda = 10.0;
    const TrainOutcome t = run_train(single, data);
    CHECK(rows[3].initial_accuracy == t.record.initial_accuracy);
    CHECK(rows[3].final_accuracy == t.record.final_accuracy);
}

TEST_CASE("run_sweep_lambda: moderate lambda is no worse than a tiny one") {
    ExperimentOptions o = small_options();
    o.data.blob_spread = 0.5;
    o.train.epochs = 0;
    o.train.decay_epochs = {};
    const DataSplits data = load_data(o.data);
    std::vector<double> tiny, moderate;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        o.seed = seed;
        const auto rows = run_sweep_lambda(o, data, {0.01, 1.0});
        tiny.push_back(rows[0].initial_accuracy);
        moderate.push_back(rows[1].initial_accuracy);
    }
    CHECK(median(moderate) >= median(tiny));
}

TEST_CASE("run_bench: one row per count") {
    ExperimentOptions o = small_options();
    const DataSplits data = load_data(o.data);
    const std::vector<BenchRow> one = run_bench(o, data, {4});
    REQUIRE(one.size() == 1);
    CHECK(one[0].per_class == 4);
    CHECK(one[0].init_seconds > 0.0);
    const std::vector<BenchRow> three = run_bench(o, data, {2, 4, 8});
    CHECK(three.size() == 3);
    CHECK(three[1].initial_accuracy == one[0].initial_accuracy);
}

TEST_CASE("open_csv: appends with a single header, overwrite truncates") {
    const fs::path dir = fs::temp_directory_path() / "sylvinit_test_experiments";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path file = dir / "runs.csv";
    ExperimentRecord r{"sylvester", "blobs", std::nullopt, 1, 0.5, 0.75, 0.1, 0.2};
    for (int i = 0; i < 2; ++i) {
        std::ofstream out = open_csv(file, kExperimentHeader, false);
        write_csv_row(out, r);
    }
    auto lines = read_lines(file);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == kExperimentHeader);
    CHECK(lines[1] == lines[2]);
    {
        std::ofstream out = open_csv(file, kExperimentHeader, true);
        write_csv_row(out, r);
    }
    CHECK(read_lines(file).size() == 2);
    CHECK_THROWS_AS(open_csv(dir / "missing" / "x.csv", kExperimentHeader, false), IoError);
    fs::remove_all(dir);
}

TEST_CASE("run_init: unknown schemes and random schemes") {
    ExperimentOptions o = small_options();
    const DataSplits data = load_data(o.data);
    o.scheme = "orthogonal";
    CHECK_THROWS_AS(run_init(o, data.train), ConfigError);
    o.scheme = "xavier-normal";
    const InitOutcome r = run_init(o, data.train);
    CHECK(r.report.layers.empty());
    o.scheme = "sylvester";
    CHECK(run_init(o, data.train).report.layers.size() == 4);
}
