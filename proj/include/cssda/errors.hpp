// Copyright 2026 The CSSDA Authors
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

#include <stdexcept>
#include <string>

namespace cssda {

// Base of every error raised by the library. The CLI maps each subclass onto
// a stable process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed a value outside an operation's domain (bad shape, bad range).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf appeared where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A binary or text file does not follow its declared layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input whose content violates a data invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

// Inconsistent or unusable training/evaluation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cssda
