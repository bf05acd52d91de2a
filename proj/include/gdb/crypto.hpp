#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gdb/bits.hpp"
#include "gdb/core_types.hpp"
#include "gdb/rng.hpp"

namespace gdb::crypto {

using Digest = std::array<std::uint8_t, 32>;

Digest hash(std::span<const std::uint8_t> bytes);
Digest hash(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Incremental hashing of structured records (length-prefixed fields).
class Hasher {
public:
  Hasher &add(std::span<const std::uint8_t> bytes);
  Hasher &add(std::string_view text);
  Hasher &add(std::uint64_t v);
  Hasher &add(double v);
  Hasher &add(const BitString &bits);
  Digest finish() const;

private:
  std::vector<std::uint8_t> buf_;
};

struct Commitment {
  Digest digest{};
  friend bool operator==(const Commitment &, const Commitment &) = default;
};

struct Opening {
  BitString bits;
  std::array<std::uint8_t, 16> blinding{};
};

/// Hash commitment over (bits || blinding); blinding drawn from `rng`.
std::pair<Commitment, Opening> commit(const BitString &bits, Rng &rng);

/// Returns the committed bits; throws OpeningMismatch if `o` does not open `c`.
BitString open(const Commitment &c, const Opening &o);

bool opens(const Commitment &c, const Opening &o);

using PublicKey = Digest;
using Signature = Digest;

struct KeyPair {
  std::array<std::uint8_t, 32> secret{};
  PublicKey pub{};
};

/// Signature backend interface; the registry-backed MAC below is the default.
class SignatureScheme {
public:
  virtual ~SignatureScheme() = default;
  virtual Signature sign(const KeyPair &key, std::span<const std::uint8_t> message) const = 0;
  /// Throws UnknownKey for a public key without a certificate.
  virtual bool verify(const PublicKey &pk, std::span<const std::uint8_t> message, const Signature &sig) const = 0;
};

/// Trusted key directory standing in for a PKI: certificates bind a public
/// identifier to a NodeId, and verification recomputes a keyed hash with the
/// registered secret.
class KeyRegistry : public SignatureScheme {
public:
  /// Creates a key pair from `rng`. With `certify` the key is entered into the
  /// directory; otherwise it exists but verifies nowhere.
  KeyPair issue(NodeId owner, Rng &rng, bool certify = true);

  std::optional<NodeId> owner_of(const PublicKey &pk) const;
  bool has_certificate(NodeId id) const;

  Signature sign(const KeyPair &key, std::span<const std::uint8_t> message) const override;
  bool verify(const PublicKey &pk, std::span<const std::uint8_t> message, const Signature &sig) const override;

private:
  struct Entry {
    NodeId owner;
    std::array<std::uint8_t, 32> secret;
  };
  std::map<PublicKey, Entry> certified_;
};

} // namespace gdb::crypto
