#pragma once

#include "dqwalk/error.hpp"

#include <catch_amalgamated.hpp>

#include <optional>

namespace testing {

/// Kind of the dqwalk::Error raised by f, or nullopt if f returns normally.
template <typename F>
std::optional<dqwalk::ErrorKind> error_kind_of(F&& f) {
  try {
    f();
  } catch (const dqwalk::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace testing

#define CHECK_ERROR_KIND(expr, kind) CHECK(::testing::error_kind_of([&] { (void)(expr); }) == (kind))
