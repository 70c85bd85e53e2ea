#include "pcmp/range_coder.hpp"

namespace pcmp {

namespace {
constexpr std::uint32_t kTopValue = 1u << 24;
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    std::uint8_t carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t byte = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(byte + carry));
      byte = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq,
                          std::uint32_t total) {
  const std::uint32_t r = range_ / total;
  low_ += static_cast<std::uint64_t>(r) * cum;
  range_ = r * freq;
  while (range_ < kTopValue) {
    shift_low();
    range_ <<= 8;
  }
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload)
    : in_(payload) {
  next_byte();  // leading cache byte (always zero)
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= in_.size())
    throw CorruptStream("range-coded payload exhausted early");
  return in_[pos_++];
}

std::uint32_t RangeDecoder::decode_freq(std::uint32_t total) {
  slot_ = range_ / total;
  const std::uint32_t v = code_ / slot_;
  return v < total ? v : total - 1;
}

void RangeDecoder::decode_update(std::uint32_t cum, std::uint32_t freq) {
  code_ -= slot_ * cum;
  range_ = slot_ * freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

}  // namespace pcmp
