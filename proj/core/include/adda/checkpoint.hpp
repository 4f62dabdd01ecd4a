#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adda/trainer.hpp"

namespace adda {

// Binary "ADCK" v1 checkpoint, little-endian throughout:
//   magic "ADCK", u32 version, u32 tensor_count,
//   tensor_count x ([u32 name_len][name][u32 ndims][u32 dim]...[f32 payload]),
//     tensors: query.{w1,b1,w2,b2,wp,bp}, key.{...}, queue
//   sampler: u32 N, f64 ur, u64 epoch, N x f64 score, N x ([u8 has][f64 acc])
//   run:     u64 seed, u64 epochs_done, f32 momentum, u32 queue_head, u32 queue_filled
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<char> encode_checkpoint(const TrainState& state);
TrainState decode_checkpoint(const std::vector<char>& bytes);

void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

}  // namespace adda
