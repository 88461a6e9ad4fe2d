// Copyright 2026 The hybridsim Authors
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

namespace hybridsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
   public:
    using Error::Error;
};

class SymmetryError : public Error {
   public:
    using Error::Error;
};

/// Invalid user-supplied numeric parameter (tau <= 0, empty lists, N = 0, ...).
class ParameterError : public Error {
   public:
    using Error::Error;
};

class CalibrationRangeError : public Error {
   public:
    using Error::Error;
};

class AssemblyError : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

}  // namespace hybridsim
