#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace t2sim {

/// Value-or-error return for recoverable protocol outcomes.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : data_(std::move(value)) {}
  Result(E error) : data_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(data_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(data_); }
  T& value() & { return std::get<T>(data_); }
  T&& value() && { return std::get<T>(std::move(data_)); }
  const E& error() const { return std::get<E>(data_); }

 private:
  std::variant<T, E> data_;
};

/// Raised for filesystem/socket failures (distinct from validation failures).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Locale-independent fixed-point formatting; all CSV/trace output goes
/// through here so byte-identity across runs is a formatting invariant.
inline std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace t2sim
