// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace jcif {

// Base class for all library errors. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not fit the requested primitive.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or arguments (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures; the message carries the offending path (exit code 1).
class IoError : public Error {
 public:
  using Error::Error;
};

// A requested entity (image id, checkpoint tensor) does not exist (exit code 3).
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Malformed or incompatible file contents (exit code 4).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace jcif
