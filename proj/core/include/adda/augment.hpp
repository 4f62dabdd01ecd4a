#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "adda/rng.hpp"

namespace adda {

/// CHW image with pixel values in [0, 1].
struct Image {
  std::size_t channels = 3;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0f)
      : channels(c), height(h), width(w), pixels(c * h * w, fill) {}

  float& at(std::size_t c, std::size_t y, std::size_t x) noexcept {
    return pixels[(c * height + y) * width + x];
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return pixels[(c * height + y) * width + x];
  }
  std::size_t plane() const noexcept { return height * width; }

  friend bool operator==(const Image&, const Image&) = default;
};

enum class AugKind { kColorJitter, kGrayscale, kGaussianBlur, kHorizontalFlip };

const char* aug_kind_name(AugKind kind) noexcept;

struct JitterStrength {
  float brightness = 0.4f;
  float contrast = 0.4f;
  float saturation = 0.4f;
};

struct AugOpSpec {
  AugKind kind = AugKind::kColorJitter;
  float frequency = 0.0f;
  JitterStrength jitter{};
  float sigma_min = 0.1f;
  float sigma_max = 1.0f;
};

struct CropSpec {
  float scale_min = 0.2f;
  float scale_max = 1.0f;
  std::size_t out_height = 16;
  std::size_t out_width = 16;
};

/// One augmentation composition: a crop (always applied) followed by
/// frequency-gated operators in fixed order.
struct Composition {
  std::size_t id = 0;
  CropSpec crop{};
  std::vector<AugOpSpec> ops;

  // Throws ParameterError on out-of-range frequencies, crop, or sigma.
  void validate() const;
};

// Jitter -> grayscale -> blur -> flip with the given frequencies and
// default operator parameters.
Composition make_composition(std::size_t id, CropSpec crop, float jitter_freq, float gray_freq,
                             float blur_freq, float flip_freq);

Image random_crop_resize(const Image& img, std::size_t out_h, std::size_t out_w,
                         std::pair<float, float> scale_range, RngStream& rng);

// Bilinear resize with half-pixel centers and edge clamping.
Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w);

struct JitterFactors {
  float brightness = 1.0f;
  float contrast = 1.0f;
  float saturation = 1.0f;
};

// Deterministic core of color_jitter: brightness, then contrast about the
// mean luminance, then saturation toward per-pixel luminance. Clamps after
// each step.
Image apply_jitter(const Image& img, const JitterFactors& factors);
Image color_jitter(const Image& img, const JitterStrength& strength, RngStream& rng);

// Luminance 0.299 R + 0.587 G + 0.114 B broadcast to all channels.
Image grayscale(const Image& img);
Image gaussian_blur(const Image& img, float sigma);
Image hflip(const Image& img);

Image apply_composition(const Image& img, const Composition& comp, RngStream& rng);

// Two independent views drawn from the same composition. The first view uses
// rng.child(0), the second rng.child(1).
std::pair<Image, Image> two_views(const Image& img, const Composition& comp,
                                  const RngStream& rng);

}  // namespace adda
