// Copyright 2026 The MILD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mild {

/// Argument outside an operation's domain (bad lengths, indices, parameters).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Call sequence violates an object's protocol, e.g. out-of-order inserts.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `kind` distinguishes the failure so callers (and
/// tests) do not need to match on message text.
class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    BadMagic,
    VersionMismatch,
    DescriptorSize,
    Truncated,
    TrailingData,
    BadToken,
    OutOfRange,
    SelfPair,
  };

  ParseError(Kind kind, std::uint64_t location, const std::string& what)
      : std::runtime_error(what), kind_(kind), location_(location) {}

  Kind kind() const noexcept { return kind_; }
  /// Byte offset for binary formats, 1-based line number for text formats.
  std::uint64_t location() const noexcept { return location_; }

 private:
  Kind kind_;
  std::uint64_t location_;
};

}  // namespace mild
