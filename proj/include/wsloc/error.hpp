// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wsloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data, flags or configuration. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Stale, corrupted or inconsistent on-disk pipeline state (exit code 3).
class PipelineStateError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public PipelineStateError {
 public:
  using PipelineStateError::PipelineStateError;
};

// A manifest whose recorded values violate their invariants.
class ManifestInvariantError : public PipelineStateError {
 public:
  using PipelineStateError::PipelineStateError;
};

class StalenessError : public PipelineStateError {
 public:
  using PipelineStateError::PipelineStateError;
};

// Missing or unreadable/unwritable files.
class InputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RegistryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ExportError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EvalError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A parse failure in a line-oriented input file.
class FormatError : public ValidationError {
 public:
  FormatError(std::string path, std::int64_t line, std::string field,
              const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + field +
                        ": " + what),
        path_(std::move(path)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& path() const { return path_; }
  std::int64_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string path_;
  std::int64_t line_;
  std::string field_;
};

}  // namespace wsloc
