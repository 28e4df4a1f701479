// Copyright 2026 The robustood Authors
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

#ifndef ROBUSTOOD_ERROR_HPP_
#define ROBUSTOOD_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace robustood {

// Base class for every error raised by the library. The CLI maps
// InvalidInputError and its subclasses to exit code 1 and NumericalError and
// its subclasses to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Operation is not defined for the given loss family or weight structure.
class UnsupportedError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Instance exceeds a documented size limit (e.g. brute-force enumeration).
class TooLargeError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// A stated precondition of a bound (parameter range) is violated.
class PreconditionError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace robustood

#endif  // ROBUSTOOD_ERROR_HPP_
