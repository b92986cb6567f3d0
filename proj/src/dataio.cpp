#include "sylvinit/dataio.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>

#include "sylvinit/errors.hpp"

namespace sylvinit {

void LabeledDataset::validate() const {
    if (images.dim(0) != labels.size()) {
        throw ShapeError("dataset '" + name + "': " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(images.dim(0)) + " images");
    }
    for (ClassId l : labels) {
        if (l >= num_classes) {
            throw LabelError("dataset '" + name + "': label " + std::to_string(l) + " >= num_classes " +
                             std::to_string(num_classes));
        }
    }
}

Tensor4 gather_images(const Tensor4& images, std::span<const std::size_t> indices) {
    const auto& d = images.dims();
    Tensor4 out({indices.size(), d[1], d[2], d[3]});
    for (std::size_t j = 0; j < indices.size(); ++j) {
        if (indices[j] >= d[0]) throw ShapeError("gather_images: index out of range");
        const auto src = images.slice(indices[j]);
        std::copy(src.begin(), src.end(), out.slice(j).begin());
    }
    return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.images = gather_images(images, indices);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(labels[i]);
    out.num_classes = num_classes;
    out.name = name;
    return out;
}

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open '" + file.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LabeledDataset parse_records(const std::filesystem::path& file, std::size_t record, std::size_t label_offset,
                             std::size_t num_classes, const std::string& name) {
    const auto bytes = read_file(file);
    if (bytes.size() % record != 0) {
        throw FormatError("'" + file.string() + "': size " + std::to_string(bytes.size()) +
                          " is not a multiple of the " + std::to_string(record) + "-byte record");
    }
    const std::size_t n = bytes.size() / record;
    const std::size_t plane = kCifarSide * kCifarSide;
    LabeledDataset ds;
    ds.name = name;
    ds.num_classes = num_classes;
    ds.images = Tensor4({n, kCifarSide, kCifarSide, 3});
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec = bytes.data() + i * record;
        ds.labels[i] = rec[label_offset];
        const unsigned char* pixels = rec + (record - kCifarPixels);
        for (std::size_t ch = 0; ch < 3; ++ch)
            for (std::size_t y = 0; y < kCifarSide; ++y)
                for (std::size_t x = 0; x < kCifarSide; ++x)
                    ds.images(i, y, x, ch) = pixels[ch * plane + y * kCifarSide + x] / 255.0;
    }
    ds.validate();
    return ds;
}

}  // namespace

LabeledDataset parse_cifar10_file(const std::filesystem::path& file) {
    return parse_records(file, kCifar10Record, 0, 10, "cifar10");
}

LabeledDataset parse_cifar100_file(const std::filesystem::path& file) {
    return parse_records(file, kCifar100Record, 1, 100, "cifar100");
}

LabeledDataset concatenate(const std::vector<LabeledDataset>& parts, std::string name) {
    if (parts.empty()) throw ParameterError("concatenate: no parts");
    const auto& d = parts.front().images.dims();
    std::vector<double> data;
    LabeledDataset out;
    out.name = std::move(name);
    out.num_classes = parts.front().num_classes;
    for (const auto& p : parts) {
        const auto& pd = p.images.dims();
        if (pd[1] != d[1] || pd[2] != d[2] || pd[3] != d[3] || p.num_classes != out.num_classes) {
            throw ShapeError("concatenate: incompatible parts");
        }
        data.insert(data.end(), p.images.data().begin(), p.images.data().end());
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    }
    out.images = Tensor4({out.labels.size(), d[1], d[2], d[3]}, std::move(data));
    return out;
}

LabeledDataset load_cifar10(const std::filesystem::path& dir, CifarSplit split) {
    if (split == CifarSplit::Test) return parse_cifar10_file(dir / "test_batch.bin");
    std::vector<LabeledDataset> parts;
    for (int k = 1; k <= 5; ++k) {
        const auto file = dir / ("data_batch_" + std::to_string(k) + ".bin");
        if (std::filesystem::exists(file)) parts.push_back(parse_cifar10_file(file));
    }
    if (parts.empty()) throw IoError("no CIFAR-10 training batches in '" + dir.string() + "'");
    return concatenate(parts, "cifar10");
}

LabeledDataset load_cifar100(const std::filesystem::path& dir, CifarSplit split) {
    return parse_cifar100_file(dir / (split == CifarSplit::Train ? "train.bin" : "test.bin"));
}

std::vector<std::vector<double>> blob_prototypes(std::size_t classes, std::size_t side, std::size_t channels,
                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> protos(classes, std::vector<double>(side * side * channels));
    for (auto& p : protos)
        for (double& v : p) v = unit(rng);
    return protos;
}

LabeledDataset synth_blobs(std::size_t classes, std::size_t side, std::size_t channels, std::size_t per_class,
                           double spread, std::uint64_t seed, std::optional<std::uint64_t> sample_seed) {
    if (classes < 2) throw ParameterError("synth_blobs: need at least 2 classes");
    if (spread < 0.0) throw ParameterError("synth_blobs: spread must be non-negative");
    const auto protos = blob_prototypes(classes, side, channels, seed);
    std::mt19937_64 rng(sample_seed.value_or(seed) ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> noise(0.0, 1.0);

    LabeledDataset ds;
    ds.name = "blobs";
    ds.num_classes = classes;
    ds.images = Tensor4({classes * per_class, side, side, channels});
    ds.labels.resize(classes * per_class);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t k = 0; k < per_class; ++k) {
            const std::size_t i = c * per_class + k;
            ds.labels[i] = static_cast<ClassId>(c);
            auto img = ds.images.slice(i);
            for (std::size_t p = 0; p < img.size(); ++p) {
                img[p] = std::clamp(protos[c][p] + spread * noise(rng), 0.0, 1.0);
            }
        }
    }
    return ds;
}

}  // namespace sylvinit
