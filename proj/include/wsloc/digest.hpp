// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace wsloc {

// Incremental SHA-256. finish() returns "sha256:<64 hex digits>".
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  // Length-prefixed, so that ("ab", "c") and ("a", "bc") hash differently.
  Sha256& update_field(std::string_view bytes);
  std::string finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_digest(std::string_view bytes);

}  // namespace wsloc
