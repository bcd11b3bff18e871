// Copyright 2026 The MemAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace memaudit {

// Base class for every error raised by the library. Callers that only care
// about "bad input" versus "bug" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files, out-of-range scores, unknown labels.
class InputError : public Error {
 public:
  using Error::Error;
};

// Bad arguments to an algorithm (alpha outside (0,1), n > N, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or other numerical failure during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace memaudit
