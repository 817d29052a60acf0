// Copyright 2026 The Unravel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNRAVEL_ERRORS_HPP_
#define UNRAVEL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace unravel {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define UNRAVEL_DEFINE_ERROR(NAME)                                 \
  class NAME : public Error {                                      \
   public:                                                         \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

UNRAVEL_DEFINE_ERROR(DimensionMismatch);
UNRAVEL_DEFINE_ERROR(NonHermitianInput);
UNRAVEL_DEFINE_ERROR(NonHermitianHamiltonian);
UNRAVEL_DEFINE_ERROR(TraceViolation);
UNRAVEL_DEFINE_ERROR(NotPositive);
UNRAVEL_DEFINE_ERROR(NotHermitian);
UNRAVEL_DEFINE_ERROR(ConvergenceFailure);
UNRAVEL_DEFINE_ERROR(StepRejected);
UNRAVEL_DEFINE_ERROR(DtTooLarge);
UNRAVEL_DEFINE_ERROR(DegenerateBlock);
UNRAVEL_DEFINE_ERROR(BudgetExceeded);
UNRAVEL_DEFINE_ERROR(NotAProjector);
UNRAVEL_DEFINE_ERROR(WeightNormalization);
UNRAVEL_DEFINE_ERROR(ParseError);
UNRAVEL_DEFINE_ERROR(ValidationError);
UNRAVEL_DEFINE_ERROR(UnknownObservable);

#undef UNRAVEL_DEFINE_ERROR

}  // namespace unravel

#endif  // UNRAVEL_ERRORS_HPP_
