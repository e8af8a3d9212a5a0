// Copyright 2026 The owrlab authors.
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
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace owrlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/extent mismatches between tensors or images.
struct DimensionError : Error {
  using Error::Error;
};

// A caller violated an operation precondition.
struct ContractError : Error {
  using Error::Error;
};

// Invalid configuration values (rejected before any work starts).
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite values or other numeric breakdowns.
struct NumericError : Error {
  using Error::Error;
};

// Malformed files.
struct ParseError : Error {
  using Error::Error;
};

// Documented degenerate cases report here instead of throwing. Each distinct
// message prints once per process.
inline void warn(const std::string& msg) {
  static std::mutex mu;
  static std::set<std::string> seen;
  std::lock_guard<std::mutex> lock(mu);
  if (seen.insert(msg).second)
    std::cerr << "[owrlab] warning: " << msg << "\n";
}

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace owrlab
