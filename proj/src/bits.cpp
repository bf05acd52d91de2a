#include "gdb/bits.hpp"

#include "gdb/errors.hpp"

namespace gdb {

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto &b : bits_) b &= 1u;
}

BitString BitString::random(std::size_t len, Rng &rng) {
  std::vector<std::uint8_t> v(len);
  for (auto &b : v) b = rng.bit();
  return BitString(std::move(v));
}

BitString BitString::parse(const std::string &text) {
  std::vector<std::uint8_t> v;
  v.reserve(text.size());
  for (char ch : text) {
    if (ch != '0' && ch != '1') throw Error(ErrorCode::ParseError, "bit string contains '" + std::string(1, ch) + "'");
    v.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return BitString(std::move(v));
}

BitString BitString::flipped(std::size_t i) const {
  auto v = bits_;
  v.at(i) ^= 1u;
  return BitString(std::move(v));
}

std::string BitString::str() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

BitString response_bits(const BitString &challenge, const BitString &responder_nonce) {
  if (challenge.size() != responder_nonce.size()) {
    throw Error(ErrorCode::LengthMismatch, "challenge has " + std::to_string(challenge.size()) +
                                               " bits, nonce has " + std::to_string(responder_nonce.size()));
  }
  std::vector<std::uint8_t> out(challenge.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = challenge[i] ^ responder_nonce[i];
  return BitString(std::move(out));
}

BitString concat(const std::vector<BitString> &parts) {
  std::vector<std::uint8_t> out;
  for (const auto &p : parts) out.insert(out.end(), p.bits().begin(), p.bits().end());
  return BitString(std::move(out));
}

std::vector<BitString> split(const BitString &all, std::size_t len) {
  if (len == 0 || all.size() % len != 0) {
    throw Error(ErrorCode::LengthMismatch, "cannot split " + std::to_string(all.size()) + " bits into strings of " +
                                               std::to_string(len));
  }
  std::vector<BitString> out;
  for (std::size_t i = 0; i < all.size(); i += len) {
    out.emplace_back(std::vector<std::uint8_t>(all.bits().begin() + static_cast<std::ptrdiff_t>(i),
                                               all.bits().begin() + static_cast<std::ptrdiff_t>(i + len)));
  }
  return out;
}

} // namespace gdb
