#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairstyle {

enum class ErrorKind {
  address,           // channel outside the generator layout
  config,            // invalid configuration or spec
  degenerate,        // zero-variance channel statistics
  fingerprint,       // persisted artifact built for another generator
  adapter,           // generator/classifier/backend failure
  io,                // file system or parse failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string field = {})
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Name of the offending config field, when there is one.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

struct AddressError : Error {
  explicit AddressError(const std::string& what) : Error(ErrorKind::address, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(ErrorKind::config, what, std::move(field)) {}
};

struct DegenerateChannelError : Error {
  explicit DegenerateChannelError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

struct FingerprintMismatch : Error {
  explicit FingerprintMismatch(const std::string& what) : Error(ErrorKind::fingerprint, what) {}
};

struct AdapterError : Error {
  explicit AdapterError(const std::string& what) : Error(ErrorKind::adapter, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace fairstyle
