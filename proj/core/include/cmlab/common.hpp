#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmlab {

using Complex = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr Complex iu{0.0, 1.0};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define CMLAB_REQUIRE(cond, msg)                                        \
  do {                                                                  \
    if (!(cond)) throw ::cmlab::PreconditionError(std::string(msg));    \
  } while (0)

}  // namespace cmlab
