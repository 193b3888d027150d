#pragma once

#include <optional>
#include <string>
#include <utility>

namespace ajwt {

// Success-or-code outcome for fallible operations whose failures are part of
// the protocol surface (machine-readable `error` codes, optional detail).
template <typename T>
struct Result {
  std::optional<T> value;
  std::string error;   // empty on success
  std::string detail;  // human-readable context, never required for dispatch

  bool ok() const { return value.has_value(); }

  static Result success(T v) { return Result{std::move(v), {}, {}}; }
  static Result failure(std::string code, std::string why = {}) {
    return Result{std::nullopt, std::move(code), std::move(why)};
  }
};

}  // namespace ajwt
