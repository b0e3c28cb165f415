#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include <openssl/evp.h>

namespace antipower {

using Sha256 = std::array<unsigned char, 32>;

inline Sha256 sha256(std::string_view data) {
  Sha256 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  return out;
}

inline std::string to_hex(const Sha256& d) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(d.size() * 2);
  for (unsigned char b : d) {
    s += digits[b >> 4];
    s += digits[b & 0xF];
  }
  return s;
}

// Re-hashes the digest `rounds` times; the busy work behind several handlers.
inline Sha256 sha256_chain(std::string_view seed, std::size_t rounds) {
  Sha256 d = sha256(seed);
  for (std::size_t i = 1; i < rounds; ++i)
    d = sha256(std::string_view(reinterpret_cast<const char*>(d.data()), d.size()));
  return d;
}

}  // namespace antipower
