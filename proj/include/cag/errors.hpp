#pragma once

#include <stdexcept>
#include <string>

namespace cag {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Wire-level failures shared by the chat gateway and the external scorer
// client.

/// Endpoint unreachable, timed out, or kept failing after retries.
class Transport : public Error {
public:
  using Error::Error;
};

/// The endpoint answered, but not in the agreed shape.
class ProtocolViolation : public Error {
public:
  using Error::Error;
};

/// The endpoint signalled its token limit.
class ContextOverflow : public Error {
public:
  using Error::Error;
};

}  // namespace cag
