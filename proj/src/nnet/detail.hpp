#pragma once

#include "cadoc/nnet.hpp"

namespace cadoc::nnet::detail {

void glorot_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng);
void orthogonal(Matrix& m, Rng& rng);

inline Vector logistic(const Vector& a) {
  return a.unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

}  // namespace cadoc::nnet::detail
