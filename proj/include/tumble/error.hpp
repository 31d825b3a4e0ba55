#ifndef TUMBLE_ERROR_HPP
#define TUMBLE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tumble {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Schema,
  EmptyInput,
  UnsupportedFormat,
  Io,
  Config,
  Degenerate,
  NoPlane,
  Aliasing,
  NoPeriodicity,
  Numerical,
};

inline std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::UnsupportedFormat: return "unsupported-format";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NoPlane: return "no-plane";
    case ErrorKind::Aliasing: return "aliasing";
    case ErrorKind::NoPeriodicity: return "no-periodicity";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

/// Every failure the library reports is an Error carrying a machine-readable
/// kind. Parsers never let any other exception type escape.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind), message_(message)
  {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

private:
  ErrorKind kind_;
  std::string message_;
};

/// An Error re-raised by a pipeline stage; the message leads with the stage name.
class StageError : public Error
{
public:
  StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), "stage '" + stage + "': " + cause.message()), stage_(std::move(stage))
  {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
  if (!condition) throw Error(kind, message);
}

}  // namespace tumble

#endif  // TUMBLE_ERROR_HPP
