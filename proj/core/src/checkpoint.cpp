#include "adda/checkpoint.hpp"

#include <cmath>
#include <string>

#include "adda/errors.hpp"
#include "binary_io.hpp"

namespace adda {

namespace {

void put_tensor(detail::ByteWriter& w, const std::string& name, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.bytes(name);
  w.u32(2);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (float v : m.values()) w.f32(v);
}

std::pair<std::string, Matrix> get_tensor(detail::ByteReader& r) {
  const std::uint32_t name_len = r.u32();
  if (name_len == 0 || name_len > 256) r.fail("implausible tensor name length");
  std::string name = r.bytes(name_len);
  const std::uint32_t ndims = r.u32();
  if (ndims != 2) r.fail("tensor '" + name + "' has " + std::to_string(ndims) + " dims, expected 2");
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  if (r.remaining() < count * 4) r.fail("truncated payload for tensor '" + name + "'");
  std::vector<float> data(count);
  for (float& v : data) {
    v = r.f32();
    if (!std::isfinite(v)) r.fail("non-finite value in tensor '" + name + "'");
  }
  return {std::move(name), Matrix(rows, cols, std::move(data))};
}

}  // namespace

std::vector<char> encode_checkpoint(const TrainState& state) {
  detail::ByteWriter w;
  w.bytes("ADCK");
  w.u32(kCheckpointVersion);
  w.u32(2 * 6 + 1);
  const auto q = state.pair.query.tensors();
  const auto k = state.pair.key.tensors();
  for (std::size_t i = 0; i < q.size(); ++i) {
    put_tensor(w, "query." + std::string(EncoderParams::kNames[i]), *q[i]);
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    put_tensor(w, "key." + std::string(EncoderParams::kNames[i]), *k[i]);
  }
  put_tensor(w, "queue", state.queue.storage());

  const SamplerState& s = state.sampler;
  w.u32(static_cast<std::uint32_t>(s.arms()));
  w.f64(s.updating_rate);
  w.u64(s.epoch);
  for (double v : s.scores) w.f64(v);
  for (std::size_t i = 0; i < s.arms(); ++i) {
    const auto& a = i < s.last_acc.size() ? s.last_acc[i] : std::optional<double>{};
    w.u8(a ? 1 : 0);
    w.f64(a ? *a : 0.0);
  }

  w.u64(state.seed);
  w.u64(state.epochs_done);
  w.f32(state.pair.momentum);
  w.u32(static_cast<std::uint32_t>(state.queue.head()));
  w.u32(static_cast<std::uint32_t>(state.queue.filled()));
  return w.data();
}

TrainState decode_checkpoint(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.remaining() < 4 || r.bytes(4) != "ADCK") {
    throw FormatError("checkpoint: bad magic (expected \"ADCK\")", 0);
  }
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail_at(version_at, "unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  if (count != 13) r.fail("expected 13 tensors, found " + std::to_string(count));

  TrainState state;
  auto q = state.pair.query.tensors();
  auto k = state.pair.key.tensors();
  Matrix queue_storage;
  for (std::uint32_t t = 0; t < count; ++t) {
    auto [name, m] = get_tensor(r);
    bool placed = false;
    for (std::size_t i = 0; i < q.size() && !placed; ++i) {
      if (name == "query." + std::string(EncoderParams::kNames[i])) {
        *q[i] = std::move(m);
        placed = true;
      } else if (name == "key." + std::string(EncoderParams::kNames[i])) {
        *k[i] = std::move(m);
        placed = true;
      }
    }
    if (!placed) {
      if (name != "queue") r.fail("unknown tensor '" + name + "'");
      queue_storage = std::move(m);
    }
  }
  if (!state.pair.query.same_shape(state.pair.key)) r.fail("query and key shapes differ");
  const auto& qp = state.pair.query;
  if (qp.b1.cols() != qp.hidden_dim() || qp.w2.rows() != qp.hidden_dim() ||
      qp.w2.cols() != qp.hidden_dim() || qp.wp.rows() != qp.hidden_dim() ||
      qp.bp.cols() != qp.embed_dim() || qp.b1.rows() != 1 || qp.b2.rows() != 1 ||
      qp.bp.rows() != 1 || queue_storage.cols() != qp.embed_dim() || queue_storage.rows() == 0) {
    r.fail("inconsistent tensor shapes");
  }

  const std::uint32_t arms = r.u32();
  if (arms == 0) r.fail("sampler has no compositions");
  SamplerState& s = state.sampler;
  s.updating_rate = r.f64();
  s.epoch = r.u64();
  s.scores.resize(arms);
  for (double& v : s.scores) v = r.f64();
  s.last_acc.resize(arms);
  for (auto& a : s.last_acc) {
    const std::uint8_t has = r.u8();
    const double v = r.f64();
    if (has > 1) r.fail("bad accuracy flag");
    if (has) a = v;
  }

  state.seed = r.u64();
  state.epochs_done = r.u64();
  state.pair.momentum = r.f32();
  const std::uint32_t head = r.u32();
  const std::uint32_t filled = r.u32();
  if (head >= queue_storage.rows() || filled > queue_storage.rows()) r.fail("queue indices out of range");
  if (!r.at_end()) r.fail("trailing bytes");
  state.queue = Queue::restore(std::move(queue_storage), head, filled);
  return state;
}

void save_checkpoint(const TrainState& state, const std::string& path) {
  detail::write_file(path, encode_checkpoint(state));
}

TrainState load_checkpoint(const std::string& path) {
  return decode_checkpoint(detail::read_file(path));
}

}  // namespace adda
