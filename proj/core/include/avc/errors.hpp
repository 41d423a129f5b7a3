#pragma once

#include <stdexcept>
#include <string>

namespace avc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed container / truncated payload while decoding audio.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that this toolkit does not handle (codec, bit
// depth, channel count).
class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Manifest parse/validation failure; message lists every offending row.
class ManifestError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class SubsampleError : public Error {
 public:
  using Error::Error;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace avc
