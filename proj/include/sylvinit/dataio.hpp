#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sylvinit/dataset.hpp"

namespace sylvinit {

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = 3 * kCifarSide * kCifarSide;
inline constexpr std::size_t kCifar10Record = 1 + kCifarPixels;
inline constexpr std::size_t kCifar100Record = 2 + kCifarPixels;

enum class CifarSplit { Train, Test };

/// Parses CIFAR-10 binary records (1 label byte + 1024 R + 1024 G + 1024 B).
/// Throws FormatError when the size is not a whole number of records.
LabeledDataset parse_cifar10_file(const std::filesystem::path& file);
/// Parses CIFAR-100 binary records (coarse byte, fine byte, pixels); keeps the fine label.
LabeledDataset parse_cifar100_file(const std::filesystem::path& file);

/// Loads data_batch_1..5.bin (train) or test_batch.bin (test) from `dir`. For the
/// train split, any present data_batch_k.bin files are concatenated; IoError if none exist.
LabeledDataset load_cifar10(const std::filesystem::path& dir, CifarSplit split = CifarSplit::Train);
/// Loads train.bin or test.bin from `dir`.
LabeledDataset load_cifar100(const std::filesystem::path& dir, CifarSplit split = CifarSplit::Train);

/// Class-prototype images plus Gaussian noise, clamped to [0, 1]. Prototypes are
/// drawn from `seed`; the noise from `sample_seed` (defaults to `seed`), so the
/// same prototypes can yield independent train and test draws.
LabeledDataset synth_blobs(std::size_t classes, std::size_t side, std::size_t channels, std::size_t per_class,
                           double spread, std::uint64_t seed, std::optional<std::uint64_t> sample_seed = std::nullopt);

/// Per-class mean images of a blob dataset generated with spread 0.
std::vector<std::vector<double>> blob_prototypes(std::size_t classes, std::size_t side, std::size_t channels,
                                                 std::uint64_t seed);

/// Concatenates datasets with equal image shapes and class counts.
LabeledDataset concatenate(const std::vector<LabeledDataset>& parts, std::string name);

}  // namespace sylvinit
