#include "adda/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adda/errors.hpp"

namespace adda {

namespace {

constexpr float kLumR = 0.299f;
constexpr float kLumG = 0.587f;
constexpr float kLumB = 0.114f;

float clamp01(float v) noexcept { return std::clamp(v, 0.0f, 1.0f); }

float luminance(const Image& img, std::size_t y, std::size_t x) noexcept {
  return kLumR * img.at(0, y, x) + kLumG * img.at(1, y, x) + kLumB * img.at(2, y, x);
}

void require_rgb(const Image& img, const char* op) {
  if (img.channels != 3) throw ShapeError(std::string(op) + ": expected 3 channels");
}

std::vector<float> gaussian_kernel(float sigma) {
  const int radius = static_cast<int>(std::ceil(3.0f * sigma));
  std::vector<float> k(2 * radius + 1);
  float total = 0.0f;
  for (int i = -radius; i <= radius; ++i) {
    const float v = std::exp(-0.5f * static_cast<float>(i * i) / (sigma * sigma));
    k[i + radius] = v;
    total += v;
  }
  for (float& v : k) v /= total;
  return k;
}

}  // namespace

const char* aug_kind_name(AugKind kind) noexcept {
  switch (kind) {
    case AugKind::kColorJitter: return "jitter";
    case AugKind::kGrayscale: return "gray";
    case AugKind::kGaussianBlur: return "blur";
    case AugKind::kHorizontalFlip: return "flip";
  }
  return "unknown";
}

void Composition::validate() const {
  if (!(crop.scale_min > 0.0f && crop.scale_min <= crop.scale_max && crop.scale_max <= 1.0f)) {
    throw ParameterError("composition " + std::to_string(id) + ": crop scale range must lie in (0,1]");
  }
  if (crop.out_height < 2 || crop.out_width < 2) {
    throw ParameterError("composition " + std::to_string(id) + ": crop output must be >= 2x2");
  }
  for (const auto& op : ops) {
    if (!(op.frequency >= 0.0f && op.frequency <= 1.0f)) {
      throw ParameterError("composition " + std::to_string(id) + ": " + aug_kind_name(op.kind) +
                           " frequency outside [0,1]");
    }
    if (op.kind == AugKind::kGaussianBlur &&
        !(op.sigma_min > 0.0f && op.sigma_min <= op.sigma_max)) {
      throw ParameterError("composition " + std::to_string(id) + ": invalid blur sigma range");
    }
    if (op.kind == AugKind::kColorJitter &&
        (op.jitter.brightness < 0 || op.jitter.contrast < 0 || op.jitter.saturation < 0)) {
      throw ParameterError("composition " + std::to_string(id) + ": negative jitter strength");
    }
  }
}

Composition make_composition(std::size_t id, CropSpec crop, float jitter_freq, float gray_freq,
                             float blur_freq, float flip_freq) {
  Composition comp;
  comp.id = id;
  comp.crop = crop;
  comp.ops = {
      AugOpSpec{.kind = AugKind::kColorJitter, .frequency = jitter_freq},
      AugOpSpec{.kind = AugKind::kGrayscale, .frequency = gray_freq},
      AugOpSpec{.kind = AugKind::kGaussianBlur, .frequency = blur_freq},
      AugOpSpec{.kind = AugKind::kHorizontalFlip, .frequency = flip_freq},
  };
  return comp;
}

Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w) {
  Image out(img.channels, out_h, out_w);
  const float sy = static_cast<float>(img.height) / static_cast<float>(out_h);
  const float sx = static_cast<float>(img.width) / static_cast<float>(out_w);
  const float max_y = static_cast<float>(img.height - 1);
  const float max_x = static_cast<float>(img.width - 1);
  for (std::size_t y = 0; y < out_h; ++y) {
    const float fy = std::clamp((static_cast<float>(y) + 0.5f) * sy - 0.5f, 0.0f, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const float wy = fy - static_cast<float>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      const float fx = std::clamp((static_cast<float>(x) + 0.5f) * sx - 0.5f, 0.0f, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const float wx = fx - static_cast<float>(x0);
      for (std::size_t c = 0; c < img.channels; ++c) {
        const float top = img.at(c, y0, x0) + wx * (img.at(c, y0, x1) - img.at(c, y0, x0));
        const float bot = img.at(c, y1, x0) + wx * (img.at(c, y1, x1) - img.at(c, y1, x0));
        out.at(c, y, x) = clamp01(top + wy * (bot - top));
      }
    }
  }
  return out;
}

Image random_crop_resize(const Image& img, std::size_t out_h, std::size_t out_w,
                         std::pair<float, float> scale_range, RngStream& rng) {
  const auto [lo, hi] = scale_range;
  if (!(lo > 0.0f && lo <= hi && hi <= 1.0f)) {
    throw ParameterError("random_crop_resize: scale range must lie in (0,1]");
  }
  if (out_h < 2 || out_w < 2) throw ParameterError("random_crop_resize: output must be >= 2x2");

  const double area = rng.uniform(lo, hi);
  const double side = std::sqrt(area);
  const auto crop_h = static_cast<std::size_t>(std::lround(side * static_cast<double>(img.height)));
  const auto crop_w = static_cast<std::size_t>(std::lround(side * static_cast<double>(img.width)));
  if (crop_h < 1 || crop_w < 1) {
    throw ParameterError("random_crop_resize: crop window smaller than one pixel");
  }
  const std::size_t top = rng.below(img.height - crop_h + 1);
  const std::size_t left = rng.below(img.width - crop_w + 1);

  Image crop(img.channels, crop_h, crop_w);
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t y = 0; y < crop_h; ++y) {
      for (std::size_t x = 0; x < crop_w; ++x) crop.at(c, y, x) = img.at(c, top + y, left + x);
    }
  }
  if (crop_h == out_h && crop_w == out_w) return crop;
  return resize_bilinear(crop, out_h, out_w);
}

Image apply_jitter(const Image& img, const JitterFactors& factors) {
  require_rgb(img, "color_jitter");
  Image out = img;
  // A factor of exactly 1 is skipped so zero strength is a bitwise identity.
  if (factors.brightness != 1.0f) {
    for (float& v : out.pixels) v = clamp01(v * factors.brightness);
  }

  if (factors.contrast != 1.0f) {
    double lum_sum = 0.0;
    for (std::size_t y = 0; y < out.height; ++y) {
      for (std::size_t x = 0; x < out.width; ++x) lum_sum += luminance(out, y, x);
    }
    const auto mean = static_cast<float>(lum_sum / static_cast<double>(out.plane()));
    for (float& v : out.pixels) v = clamp01(mean + factors.contrast * (v - mean));
  }

  if (factors.saturation != 1.0f) {
    for (std::size_t y = 0; y < out.height; ++y) {
      for (std::size_t x = 0; x < out.width; ++x) {
        const float lum = luminance(out, y, x);
        for (std::size_t c = 0; c < 3; ++c) {
          out.at(c, y, x) = clamp01(lum + factors.saturation * (out.at(c, y, x) - lum));
        }
      }
    }
  }
  return out;
}

Image color_jitter(const Image& img, const JitterStrength& strength, RngStream& rng) {
  JitterFactors f;
  f.brightness = static_cast<float>(rng.uniform(1.0 - strength.brightness, 1.0 + strength.brightness));
  f.contrast = static_cast<float>(rng.uniform(1.0 - strength.contrast, 1.0 + strength.contrast));
  f.saturation = static_cast<float>(rng.uniform(1.0 - strength.saturation, 1.0 + strength.saturation));
  f.brightness = std::max(f.brightness, 0.0f);
  f.contrast = std::max(f.contrast, 0.0f);
  f.saturation = std::max(f.saturation, 0.0f);
  return apply_jitter(img, f);
}

Image grayscale(const Image& img) {
  require_rgb(img, "grayscale");
  Image out = img;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      // Gray pixels pass through unchanged, keeping the op idempotent.
      if (img.at(0, y, x) == img.at(1, y, x) && img.at(1, y, x) == img.at(2, y, x)) continue;
      const float lum = clamp01(luminance(img, y, x));
      for (std::size_t c = 0; c < 3; ++c) out.at(c, y, x) = lum;
    }
  }
  return out;
}

Image gaussian_blur(const Image& img, float sigma) {
  if (!(sigma > 0.0f)) throw ParameterError("gaussian_blur: sigma must be positive");
  const std::vector<float> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int h = static_cast<int>(img.height);
  const int w = static_cast<int>(img.width);

  Image tmp(img.channels, img.height, img.width);
  Image out(img.channels, img.height, img.width);
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          const int xs = std::clamp(x + k, 0, w - 1);
          acc += kernel[k + radius] * img.at(c, y, xs);
        }
        tmp.at(c, y, x) = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) {
          const int ys = std::clamp(y + k, 0, h - 1);
          acc += kernel[k + radius] * tmp.at(c, ys, x);
        }
        out.at(c, y, x) = clamp01(acc);
      }
    }
  }
  return out;
}

Image hflip(const Image& img) {
  Image out = img;
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) {
        out.at(c, y, x) = img.at(c, y, img.width - 1 - x);
      }
    }
  }
  return out;
}

Image apply_composition(const Image& img, const Composition& comp, RngStream& rng) {
  Image out = random_crop_resize(img, comp.crop.out_height, comp.crop.out_width,
                                 {comp.crop.scale_min, comp.crop.scale_max}, rng);
  for (const auto& op : comp.ops) {
    // The gate draw is consumed even for f = 0 or 1 so that the stream
    // layout does not depend on frequencies.
    if (!(rng.uniform() < op.frequency)) continue;
    switch (op.kind) {
      case AugKind::kColorJitter:
        out = color_jitter(out, op.jitter, rng);
        break;
      case AugKind::kGrayscale:
        out = grayscale(out);
        break;
      case AugKind::kGaussianBlur:
        out = gaussian_blur(out, static_cast<float>(rng.uniform(op.sigma_min, op.sigma_max)));
        break;
      case AugKind::kHorizontalFlip:
        out = hflip(out);
        break;
    }
  }
  return out;
}

std::pair<Image, Image> two_views(const Image& img, const Composition& comp,
                                  const RngStream& rng) {
  RngStream first = rng.child(0);
  RngStream second = rng.child(1);
  Image a = apply_composition(img, comp, first);
  Image b = apply_composition(img, comp, second);
  return {std::move(a), std::move(b)};
}

}  // namespace adda
