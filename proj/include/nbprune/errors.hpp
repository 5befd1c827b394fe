// Copyright 2026 The nbprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NBPRUNE_ERRORS_HPP_
#define NBPRUNE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace nbprune {

// Base for every error raised by the library. `code()` is the stable prefix
// the command-line tool prints (E_ARG, E_FORMAT, E_GUARD).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept = 0;
};

// A caller-supplied value violates an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_ARG"; }
};

// An input file is malformed or carries invalid numbers.
class FormatError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_FORMAT"; }
};

// A resource guard (edge cap, enumeration cap) refused to proceed.
class GuardError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_GUARD"; }
};

}  // namespace nbprune

#endif  // NBPRUNE_ERRORS_HPP_
