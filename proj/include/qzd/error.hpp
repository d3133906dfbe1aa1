// Copyright 2026 The QZD Authors
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

#ifndef QZD_ERROR_HPP
#define QZD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qzd {

class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Index or dimension out of range, or mismatched dimensions.
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// The truncated Fock space is too small for the requested amplitude, or
/// population leaked into the guard levels.
class TruncationError : public Error {
   public:
    using Error::Error;
};

/// Coherent components or exclusion circles that should be disjoint overlap.
class OverlapError : public Error {
   public:
    using Error::Error;
};

/// A tweezer trajectory moves faster than the adiabatic cap allows.
class AdiabaticityError : public Error {
   public:
    using Error::Error;
};

/// Density matrix left the physical set (integrator step too large).
class PositivityError : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

}  // namespace qzd

#endif  // QZD_ERROR_HPP
