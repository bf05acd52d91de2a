#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdb/rng.hpp"

namespace gdb {

/// Fixed-length string of bits, one bit per element (0 or 1).
class BitString {
public:
  BitString() = default;
  explicit BitString(std::vector<std::uint8_t> bits);

  static BitString random(std::size_t len, Rng &rng);
  static BitString zeros(std::size_t len) { return BitString(std::vector<std::uint8_t>(len, 0)); }
  /// Parses "1011"-style text.
  static BitString parse(const std::string &text);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t> &bits() const { return bits_; }

  BitString flipped(std::size_t i) const;
  std::string str() const;

  friend bool operator==(const BitString &, const BitString &) = default;

private:
  std::vector<std::uint8_t> bits_;
};

/// Bitwise XOR; throws LengthMismatch on unequal lengths.
BitString response_bits(const BitString &challenge, const BitString &responder_nonce);

/// Concatenation, used to commit to a sequence of nonces at once.
BitString concat(const std::vector<BitString> &parts);

/// Splits `all` into consecutive strings of `len` bits.
std::vector<BitString> split(const BitString &all, std::size_t len);

} // namespace gdb
