#include "zmeso/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace zmeso {
namespace {

using cd = std::complex<double>;

constexpr double kShift = 8.0;

// B_{2k} for k = 1..10.
constexpr std::array<double, 10> kB2k = {
    1.0 / 6.0,    -1.0 / 30.0,          1.0 / 42.0, -1.0 / 30.0,        5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0, -174611.0 / 330.0};

}  // namespace

cd log_gamma(cd z) {
  cd shift = 0.0;
  while (std::abs(z) < kShift) {
    shift += std::log(z);
    z += 1.0;
  }
  const cd inv = 1.0 / z;
  const cd inv2 = inv * inv;
  cd series = 0.0;
  cd p = inv;
  for (std::size_t k = 1; k <= kB2k.size(); ++k) {
    const double d = 2.0 * k * (2.0 * k - 1.0);
    const cd term = kB2k[k - 1] / d * p;
    series += term;
    if (std::abs(term) < 1e-17 * std::abs(series)) break;
    p *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series - shift;
}

cd digamma(cd z) {
  cd shift = 0.0;
  while (std::abs(z) < kShift) {
    shift += 1.0 / z;
    z += 1.0;
  }
  const cd inv = 1.0 / z;
  const cd inv2 = inv * inv;
  cd series = 0.0;
  cd p = inv2;
  for (std::size_t k = 1; k <= kB2k.size(); ++k) {
    const cd term = kB2k[k - 1] / (2.0 * k) * p;
    series += term;
    if (std::abs(term) < 1e-17 * std::abs(series)) break;
    p *= inv2;
  }
  return std::log(z) - 0.5 * inv - series - shift;
}

double sinc(double x) {
  const double px = std::numbers::pi * x;
  if (std::abs(px) < 1e-4) return 1.0 - px * px / 6.0;
  return std::sin(px) / px;
}

}  // namespace zmeso
