#include "adda/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "adda/errors.hpp"
#include "adda/rng.hpp"
#include "binary_io.hpp"

namespace adda {

namespace {

struct ClassStyle {
  double angle;
  double frequency;  // cycles across the image diagonal scale
  float color_a[3];
  float color_b[3];
};

ClassStyle class_style(std::size_t c, std::size_t num_classes, std::uint64_t seed) {
  RngStream rng(seed, stream_id(StreamPurpose::kData, 1, c));
  ClassStyle s{};
  s.angle = std::numbers::pi * static_cast<double>(c) / static_cast<double>(num_classes) +
            rng.uniform(-0.1, 0.1);
  s.frequency = 1.5 + static_cast<double>(c % 3) + rng.uniform(0.0, 0.5);
  for (int k = 0; k < 3; ++k) {
    s.color_a[k] = static_cast<float>(rng.uniform(0.05, 0.95));
    s.color_b[k] = static_cast<float>(rng.uniform(0.05, 0.95));
  }
  return s;
}

}  // namespace

void Dataset::validate() const {
  if (images.empty()) throw ParameterError("dataset: no images");
  if (labels.size() != images.size()) throw ParameterError("dataset: label count != image count");
  if (num_classes == 0) throw ParameterError("dataset: num_classes must be positive");
  const Image& first = images.front();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& im = images[i];
    if (im.channels != first.channels || im.height != first.height || im.width != first.width ||
        im.pixels.size() != im.channels * im.height * im.width) {
      throw ParameterError("dataset: image " + std::to_string(i) + " has a different shape");
    }
    if (labels[i] >= num_classes) {
      throw ParameterError("dataset: label of image " + std::to_string(i) + " out of range");
    }
  }
}

Dataset generate_synthetic(const SyntheticParams& params, std::uint64_t seed) {
  if (params.num_classes < 2) throw ParameterError("generate_synthetic: need at least 2 classes");
  if (params.per_class == 0) throw ParameterError("generate_synthetic: per_class must be positive");
  if (params.height < 2 || params.width < 2) {
    throw ParameterError("generate_synthetic: images must be at least 2x2");
  }
  std::vector<ClassStyle> styles;
  for (std::size_t c = 0; c < params.num_classes; ++c) {
    styles.push_back(class_style(c, params.num_classes, seed));
  }

  Dataset ds;
  ds.num_classes = static_cast<std::uint32_t>(params.num_classes);
  const std::size_t total = params.num_classes * params.per_class;
  ds.images.resize(total);
  ds.labels.resize(total);
  const double h = static_cast<double>(params.height);
  const double w = static_cast<double>(params.width);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t label = i % params.num_classes;
    const ClassStyle& style = styles[label];
    RngStream rng(seed, stream_id(StreamPurpose::kData, 2, i));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double angle = style.angle + rng.uniform(-0.15, 0.15);
    const double amplitude = rng.uniform(0.7, 1.0);
    const double cx = std::cos(angle);
    const double cy = std::sin(angle);

    Image img(3, params.height, params.width);
    for (std::size_t y = 0; y < params.height; ++y) {
      for (std::size_t x = 0; x < params.width; ++x) {
        const double u = (static_cast<double>(x) + 0.5) / w - 0.5;
        const double v = (static_cast<double>(y) + 0.5) / h - 0.5;
        const double wave = std::sin(2.0 * std::numbers::pi * style.frequency * (u * cx + v * cy) + phase);
        const double t = 0.5 + 0.5 * amplitude * wave;
        for (std::size_t c = 0; c < 3; ++c) {
          const double base = (1.0 - t) * style.color_a[c] + t * style.color_b[c];
          img.at(c, y, x) = static_cast<float>(std::clamp(base + 0.05 * rng.normal(), 0.0, 1.0));
        }
      }
    }
    ds.images[i] = std::move(img);
    ds.labels[i] = static_cast<std::uint32_t>(label);
  }
  return ds;
}

std::vector<Composition> easy_compositions(std::size_t height, std::size_t width) {
  const CropSpec full{.scale_min = 1.0f, .scale_max = 1.0f, .out_height = height, .out_width = width};
  const CropSpec standard{.scale_min = 0.2f, .scale_max = 1.0f, .out_height = height, .out_width = width};
  return {
      make_composition(0, full, 0.0f, 0.0f, 0.0f, 0.0f),
      make_composition(1, standard, 0.8f, 0.2f, 0.5f, 0.5f),
      make_composition(2, standard, 1.0f, 0.2f, 0.5f, 0.5f),
  };
}

Scenario easy_scenario(const SyntheticParams& params, std::uint64_t seed) {
  return {generate_synthetic(params, seed), easy_compositions(params.height, params.width)};
}

std::vector<char> encode_dataset(const Dataset& ds) {
  ds.validate();
  detail::ByteWriter w;
  w.bytes("ADDS");
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.u32(static_cast<std::uint32_t>(ds.channels()));
  w.u32(static_cast<std::uint32_t>(ds.height()));
  w.u32(static_cast<std::uint32_t>(ds.width()));
  w.u32(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.u32(ds.labels[i]);
    for (float v : ds.images[i].pixels) w.f32(v);
  }
  return w.data();
}

Dataset decode_dataset(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes, "dataset");
  if (r.remaining() < 4 || r.bytes(4) != "ADDS") {
    throw FormatError("dataset: bad magic (expected \"ADDS\")", 0);
  }
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) r.fail_at(version_at, "unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  const std::uint32_t c = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  const std::uint32_t num_classes = r.u32();
  if (count == 0) r.fail("empty dataset");
  if (c == 0 || h == 0 || w == 0) r.fail("zero image dimension");
  if (num_classes == 0) r.fail("zero classes");
  const std::uint64_t record = 4 + 4ull * c * h * w;
  if (r.remaining() < record * count) r.fail("truncated input: records missing");

  Dataset ds;
  ds.num_classes = num_classes;
  ds.images.reserve(count);
  ds.labels.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t label_at = r.offset();
    const std::uint32_t label = r.u32();
    if (label >= num_classes) r.fail_at(label_at, "label out of range in record " + std::to_string(i));
    Image img(c, h, w);
    for (float& v : img.pixels) {
      const std::uint64_t pixel_at = r.offset();
      v = r.f32();
      if (!(v >= 0.0f && v <= 1.0f)) r.fail_at(pixel_at, "pixel outside [0,1] in record " + std::to_string(i));
    }
    ds.labels.push_back(label);
    ds.images.push_back(std::move(img));
  }
  if (!r.at_end()) r.fail("trailing bytes after last record");
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  detail::write_file(path, encode_dataset(ds));
}

Dataset load_dataset(const std::string& path) {
  return decode_dataset(detail::read_file(path));
}

void write_encoder_input(const Image& img, std::span<float> row) {
  if (row.size() != img.pixels.size()) {
    throw ShapeError("encoder input: image has " + std::to_string(img.pixels.size()) +
                     " values, row has " + std::to_string(row.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = (img.pixels[i] - kPixelMean) / kPixelStd;
}

Matrix images_to_matrix(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Matrix m(indices.size(), ds.sample_dim());
  for (std::size_t r = 0; r < indices.size(); ++r) write_encoder_input(ds.images.at(indices[r]), m.row(r));
  return m;
}

}  // namespace adda
