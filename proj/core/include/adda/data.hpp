#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adda/augment.hpp"
#include "adda/numerics.hpp"

namespace adda {

struct Dataset {
  std::vector<Image> images;
  std::vector<std::uint32_t> labels;
  std::uint32_t num_classes = 0;

  std::size_t size() const noexcept { return images.size(); }
  std::size_t channels() const noexcept { return images.empty() ? 0 : images.front().channels; }
  std::size_t height() const noexcept { return images.empty() ? 0 : images.front().height; }
  std::size_t width() const noexcept { return images.empty() ? 0 : images.front().width; }
  std::size_t sample_dim() const noexcept { return channels() * height() * width(); }

  // Throws ParameterError if empty, shapes differ, or a label is out of range.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SyntheticParams {
  std::size_t num_classes = 4;
  std::size_t per_class = 500;
  std::size_t height = 16;
  std::size_t width = 16;
};

/// Class-conditional striped images. Each class owns a stripe orientation,
/// spatial frequency and two-color palette; each sample draws its own phase,
/// small orientation/contrast perturbations and pixel noise. Labels cycle
/// 0, 1, ..., num_classes-1 over the sample index.
Dataset generate_synthetic(const SyntheticParams& params, std::uint64_t seed);

struct Scenario {
  Dataset dataset;
  std::vector<Composition> compositions;
};

/// Three compositions over a synthetic dataset. Composition 0 applies no
/// operators and crops the full frame, so its two views are identical;
/// compositions 1 and 2 use standard-strength augmentation.
Scenario easy_scenario(const SyntheticParams& params, std::uint64_t seed);
std::vector<Composition> easy_compositions(std::size_t height, std::size_t width);

// Binary "ADDS" v1 format, little-endian:
//   magic "ADDS", u32 version, u32 count, u32 C, u32 H, u32 W,
//   u32 num_classes, then count x ([u32 label][C*H*W f32]).
inline constexpr std::uint32_t kDatasetVersion = 1;

std::vector<char> encode_dataset(const Dataset& ds);
// Throws FormatError (with byte offset) on bad magic, version, truncation,
// trailing bytes, or out-of-range content.
Dataset decode_dataset(const std::vector<char>& bytes);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Encoder inputs are pixels mapped from [0, 1] to (p - 0.5) / 0.25.
inline constexpr float kPixelMean = 0.5f;
inline constexpr float kPixelStd = 0.25f;

// Writes the normalized, flattened image into `row` (length C*H*W).
void write_encoder_input(const Image& img, std::span<float> row);

// One normalized, flattened image per row, in the order of `indices`.
Matrix images_to_matrix(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace adda
