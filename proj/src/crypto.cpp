#include "gdb/crypto.hpp"

#include <bit>
#include <cstring>

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include "gdb/errors.hpp"

namespace gdb::crypto {

Digest hash(std::span<const std::uint8_t> bytes) {
  Digest d{};
  SHA256(bytes.data(), bytes.size(), d.data());
  return d;
}

Digest hash(std::string_view text) {
  return hash(std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Hasher &Hasher::add(std::span<const std::uint8_t> bytes) {
  add(static_cast<std::uint64_t>(bytes.size()));
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  return *this;
}

Hasher &Hasher::add(std::string_view text) {
  return add(std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

Hasher &Hasher::add(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Hasher &Hasher::add(double v) { return add(std::bit_cast<std::uint64_t>(v)); }

Hasher &Hasher::add(const BitString &bits) { return add(std::span(bits.bits())); }

Digest Hasher::finish() const { return hash(buf_); }

namespace {

Digest commitment_digest(const BitString &bits, const std::array<std::uint8_t, 16> &blinding) {
  return Hasher().add("gdb.commit").add(bits).add(std::span(blinding)).finish();
}

} // namespace

std::pair<Commitment, Opening> commit(const BitString &bits, Rng &rng) {
  if (bits.empty()) throw Error(ErrorCode::LengthMismatch, "cannot commit to an empty bit string");
  Opening o{bits, {}};
  auto blind = rng.bytes(o.blinding.size());
  std::copy(blind.begin(), blind.end(), o.blinding.begin());
  return {Commitment{commitment_digest(bits, o.blinding)}, std::move(o)};
}

bool opens(const Commitment &c, const Opening &o) { return commitment_digest(o.bits, o.blinding) == c.digest; }

BitString open(const Commitment &c, const Opening &o) {
  if (!opens(c, o)) throw Error(ErrorCode::OpeningMismatch, "opening does not match commitment " + to_hex(c.digest).substr(0, 16));
  return o.bits;
}

KeyPair KeyRegistry::issue(NodeId owner, Rng &rng, bool certify) {
  KeyPair kp;
  auto secret = rng.bytes(kp.secret.size());
  std::copy(secret.begin(), secret.end(), kp.secret.begin());
  kp.pub = Hasher().add("gdb.pub").add(std::span(kp.secret)).add(static_cast<std::uint64_t>(owner.value)).finish();
  if (certify) certified_[kp.pub] = Entry{owner, kp.secret};
  return kp;
}

std::optional<NodeId> KeyRegistry::owner_of(const PublicKey &pk) const {
  auto it = certified_.find(pk);
  if (it == certified_.end()) return std::nullopt;
  return it->second.owner;
}

bool KeyRegistry::has_certificate(NodeId id) const {
  for (const auto &[_, e] : certified_) {
    if (e.owner == id) return true;
  }
  return false;
}

namespace {

Signature mac(const std::array<std::uint8_t, 32> &key, std::span<const std::uint8_t> message) {
  Signature out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(), out.data(), &len);
  return out;
}

} // namespace

Signature KeyRegistry::sign(const KeyPair &key, std::span<const std::uint8_t> message) const {
  return mac(key.secret, message);
}

bool KeyRegistry::verify(const PublicKey &pk, std::span<const std::uint8_t> message, const Signature &sig) const {
  auto it = certified_.find(pk);
  if (it == certified_.end()) throw Error(ErrorCode::UnknownKey, "no certificate for key " + to_hex(pk).substr(0, 16));
  return mac(it->second.secret, message) == sig;
}

} // namespace gdb::crypto
