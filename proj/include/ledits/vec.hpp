#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ledits/error.hpp"

namespace ledits {

using Vec = std::vector<double>;

inline void require_same_size(std::size_t a, std::size_t b, std::string_view what) {
  if (a != b) {
    throw ParameterError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

// out = a*x + b*y
inline Vec axpby(double a, std::span<const double> x, double b, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "axpby");
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b);
double mean_squared_error(std::span<const double> a, std::span<const double> b);

}  // namespace ledits
