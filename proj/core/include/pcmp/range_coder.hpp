#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcmp/errors.hpp"

namespace pcmp {

// 32-bit range coder with byte-wise renormalization and carry propagation
// through a cache/pending-0xFF scheme. Integer arithmetic only, so output is
// byte-identical across platforms. Frequencies are cumulative counts with
// total <= 2^16, which keeps range/total above the renormalization floor.
class RangeEncoder {
 public:
  void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total);
  // Flushes the coder and returns the payload. The encoder is spent.
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> payload);

  // Returns a value in [0,total); caller maps it to a symbol interval and
  // confirms with decode_update(cum, freq, total).
  std::uint32_t decode_freq(std::uint32_t total);
  void decode_update(std::uint32_t cum, std::uint32_t freq);

  std::size_t bytes_consumed() const { return pos_; }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t slot_ = 0;  // range/total from the last decode_freq
};

}  // namespace pcmp
