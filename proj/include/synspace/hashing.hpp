#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace synspace {

std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 used for input provenance hashes.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  /// Length-prefixed update so that ("ab","c") and ("a","bc") differ.
  void update_field(std::string_view data);
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synspace
