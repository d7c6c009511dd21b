/*******************************************************************************
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
 *******************************************************************************/
#pragma once

#include <stdexcept>
#include <string>

namespace isoclust {

/// Base class for all pipeline errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (carries file and 1-based line number).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Bad or inconsistent configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Iterative solver failed to converge; carries iteration diagnostics.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double grad_norm)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", max|gradient|=" + std::to_string(grad_norm) + ")"),
        iterations_(iterations),
        grad_norm_(grad_norm) {}
  int iterations() const { return iterations_; }
  double grad_norm() const { return grad_norm_; }

 private:
  int iterations_;
  double grad_norm_;
};

}  // namespace isoclust
