#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace eptctr {

/**
 * Categories of contract violations raised by the library.
 */
enum class ErrorKind {
  /// Vector or matrix sizes do not agree with the problem dimensions.
  DimensionMismatch,
  /// The constraint matrix does not have full row rank.
  RankDeficient,
  /// A benchmark dimension violates the problem's block structure.
  BadDimension,
  /// A solver configuration violates its ordering constraints.
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorKind::RankDeficient:
      return "RankDeficient";
    case ErrorKind::BadDimension:
      return "BadDimension";
    case ErrorKind::InvalidConfig:
      return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error{std::string{to_string(kind)} + ": " + what},
        kind_{kind} {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require_size(Eigen::Index actual, Eigen::Index expected,
                         const char* what) {
  if (actual != expected) {
    throw Error{ErrorKind::DimensionMismatch,
                std::string{what} + " has length " + std::to_string(actual) +
                    ", expected " + std::to_string(expected)};
  }
}

}  // namespace detail

}  // namespace eptctr
