#pragma once

#include <stdexcept>
#include <string>

namespace pcmp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  using Error::Error;
};

struct EmptyCloud : Error {
  using Error::Error;
};

struct NotNormalized : Error {
  using Error::Error;
};

struct CorruptStream : Error {
  using Error::Error;
};

struct DepthOutOfRange : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct InvalidDataset : Error {
  using Error::Error;
};

struct TableMismatch : Error {
  using Error::Error;
};

struct CacheCorrupt : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pcmp
