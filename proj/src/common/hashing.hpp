/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace cle {

/// Incremental 64-bit FNV-1a. Used for provenance and content-addressed
/// directory names; not a cryptographic digest.
class Fnv1a {
 public:
  Fnv1a& update(std::span<const std::uint8_t> bytes) noexcept;
  Fnv1a& update(std::string_view text) noexcept;
  Fnv1a& update_u64(std::uint64_t value) noexcept;
  // Fields are length-prefixed so ("ab","c") and ("a","bc") differ.
  Fnv1a& field(std::string_view text) noexcept;

  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_file(const std::filesystem::path& path);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Child seed for a named sub-task of a seeded parent task.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

std::string to_hex(std::uint64_t value);

}  // namespace cle
