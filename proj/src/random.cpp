#include "cadoc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cadoc {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

DiscreteSampler::DiscreteSampler(std::span<const double> masses) {
  if (masses.empty()) throw std::invalid_argument("discrete sampler: no outcomes");
  double total = 0.0;
  for (double m : masses) {
    if (!std::isfinite(m) || m < 0.0) {
      throw std::invalid_argument("discrete sampler: masses must be finite and non-negative");
    }
    total += m;
  }
  if (!(total > 0.0)) throw std::invalid_argument("discrete sampler: zero total mass");

  probabilities_.reserve(masses.size());
  cumulative_.reserve(masses.size());
  double running = 0.0;
  for (double m : masses) {
    const double p = m / total;
    probabilities_.push_back(p);
    running += p;
    cumulative_.push_back(running);
  }
  cumulative_.back() = 1.0;
}

std::size_t DiscreteSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto index = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(index, cumulative_.size() - 1);
}

}  // namespace cadoc
