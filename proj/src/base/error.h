// base/error.h

// Copyright 2026  cpcx authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPCX_BASE_ERROR_H_
#define CPCX_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace cpcx {

// Base class for everything thrown by this project.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape / dimension disagreements.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Bad command-line usage or invalid flag combinations. Exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, manifests, labels). Exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, failed gradient checks and the like. Exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A CTC instance whose label sequence cannot fit in the given number of
// output frames.
class CtcInfeasibleError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace cpcx

#endif  // CPCX_BASE_ERROR_H_
