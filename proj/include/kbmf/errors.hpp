/*
 * Copyright 2026 The kbmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace kbmf {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or vector dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its admissible range (width <= 0, folds < 2, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a content requirement (non-finite values, labels
/// outside {-1,+1}, malformed files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A factorization failed or a quantity became non-finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Configuration is incomplete or inconsistent, or a referenced path is missing.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for its input (e.g. AUC with a single class).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbmf
