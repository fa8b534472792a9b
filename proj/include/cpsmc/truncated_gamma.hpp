// Copyright 2026 The cpsmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPSMC_TRUNCATED_GAMMA_HPP
#define CPSMC_TRUNCATED_GAMMA_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include <cpsmc/configuration.hpp>
#include <cpsmc/errors.hpp>
#include <cpsmc/random.hpp>

namespace cpsmc {

/// Density proportional to x^(shape-1) exp(-rate x) restricted to the open interval (lower, upper).
///
/// Sampling uses inverse-CDF through the regularised incomplete gamma function for
/// shape <= kInverseCdfMaxShape and rejection otherwise; the rejection path also serves as
/// a fallback when the interval sits so far in a tail that the CDF difference underflows.
struct TruncatedGamma {
  static constexpr double kInverseCdfMaxShape = 50.0;

  double shape = 1.0;
  double rate = 1.0;
  double lower = 0.0;
  double upper = kInf;

  [[nodiscard]] bool empty() const noexcept { return !(upper > lower); }

  [[nodiscard]] double log_kernel(double x) const noexcept {
    return (shape == 1.0 ? 0.0 : (shape - 1.0) * std::log(x)) - rate * x;
  }

  /// log of the integral of x^(shape-1) exp(-rate x) over (lower, upper).
  [[nodiscard]] double log_mass() const {
    if (empty()) return kNegInf;
    const double base = std::lgamma(shape) - shape * std::log(rate);
    const double a = rate * lower;
    const double b = rate * upper;
    double mass = 0.0;
    if (a > shape) {
      const double qa = boost::math::gamma_q(shape, a);
      const double qb = std::isinf(b) ? 0.0 : boost::math::gamma_q(shape, b);
      mass = qa - qb;
    } else {
      const double pa = a > 0.0 ? boost::math::gamma_p(shape, a) : 0.0;
      const double pb = std::isinf(b) ? 1.0 : boost::math::gamma_p(shape, b);
      mass = pb - pa;
    }
    if (mass > 0.0 && std::isfinite(mass)) {
      return base + std::log(mass);
    }
    return log_mass_tail_approximation();
  }

  [[nodiscard]] double log_pdf(double x) const {
    if (!(x > lower && x < upper)) return kNegInf;
    return log_kernel(x) - log_mass();
  }

  [[nodiscard]] double mode() const noexcept { return shape > 1.0 ? (shape - 1.0) / rate : 0.0; }

  double sample(Rng& rng) const {
    if (empty()) throw InvalidConfigurationError("empty truncation interval");
    if (shape <= kInverseCdfMaxShape) {
      const double x = sample_inverse_cdf(rng);
      if (x > lower && x < upper) return x;
    }
    return sample_rejection(rng);
  }

  /// Inverse-CDF draw; returns NaN when the CDF difference is not representable.
  double sample_inverse_cdf(Rng& rng) const {
    const double a = rate * lower;
    const double b = rate * upper;
    const double u = uniform01(rng);
    try {
      if (a > shape) {
        const double qa = boost::math::gamma_q(shape, a);
        const double qb = std::isinf(b) ? 0.0 : boost::math::gamma_q(shape, b);
        if (!(qa > qb)) return kNaN;
        const double q = qa - u * (qa - qb);
        if (!(q > 0.0)) return kNaN;
        return boost::math::gamma_q_inv(shape, q) / rate;
      }
      const double pa = a > 0.0 ? boost::math::gamma_p(shape, a) : 0.0;
      const double pb = std::isinf(b) ? 1.0 : boost::math::gamma_p(shape, b);
      if (!(pb > pa)) return kNaN;
      const double p = pa + u * (pb - pa);
      if (!(p < 1.0)) return kNaN;
      return boost::math::gamma_p_inv(shape, p) / rate;
    } catch (const std::exception&) {
      return kNaN;
    }
  }

  /// Rejection sampler for shape >= 1 (log-concave kernel).
  ///
  /// Mode below the interval: exponential envelope tangent at `lower`. Mode above: reflected
  /// exponential envelope tangent at `upper`. Mode inside: uniform envelope for narrow
  /// intervals, otherwise proposals from the untruncated gamma.
  double sample_rejection(Rng& rng) const {
    if (empty()) throw InvalidConfigurationError("empty truncation interval");
    if (shape < 1.0) {
      const double x = sample_inverse_cdf(rng);
      if (x > lower && x < upper) return x;
      throw std::domain_error("truncated gamma with shape < 1 could not be sampled");
    }
    const double m = mode();
    const double sd = std::sqrt(shape) / rate;
    for (;;) {
      double x = 0.0;
      double log_accept = 0.0;
      if (m <= lower && lower > 0.0 && rate - (shape - 1.0) / lower > 1e-12 * rate) {
        const double rho = rate - (shape - 1.0) / lower;
        const double span = upper - lower;
        const double tail = std::isinf(span) ? 1.0 : -std::expm1(-rho * span);
        x = lower - std::log1p(-uniform01(rng) * tail) / rho;
        if (!(x > lower && x < upper)) continue;
        log_accept = log_kernel(x) - (log_kernel(lower) - rho * (x - lower));
      } else if (std::isfinite(upper) && m >= upper && (shape - 1.0) / upper - rate > 1e-12 * rate) {
        const double sigma = (shape - 1.0) / upper - rate;
        const double span = upper - lower;
        x = upper + std::log1p(-uniform01(rng) * -std::expm1(-sigma * span)) / sigma;
        if (!(x > lower && x < upper)) continue;
        log_accept = log_kernel(x) - (log_kernel(upper) - sigma * (upper - x));
      } else if (std::isfinite(upper) && upper - lower <= 2.0 * sd) {
        x = uniform(rng, lower, upper);
        if (!(x > lower && x < upper)) continue;
        const double peak = std::clamp(m, lower, upper);
        log_accept = log_kernel(x) - log_kernel(peak);
      } else {
        x = sample_gamma(rng, shape, rate);
        if (x > lower && x < upper) return x;
        continue;
      }
      if (std::log(uniform01(rng)) < log_accept) return x;
    }
  }

 private:
  // Only reached when the interval lies beyond double-precision tail probabilities.
  [[nodiscard]] double log_mass_tail_approximation() const {
    const double m = mode();
    if (lower >= m && lower > 0.0) {
      const double rho = rate - (shape - 1.0) / lower;
      if (rho > 0.0) {
        const double span = upper - lower;
        const double tail = std::isinf(span) ? 1.0 : -std::expm1(-rho * span);
        return log_kernel(lower) - std::log(rho) + std::log(tail);
      }
    }
    if (std::isfinite(upper) && upper <= m) {
      const double sigma = (shape - 1.0) / upper - rate;
      if (sigma > 0.0) {
        return log_kernel(upper) - std::log(sigma) + std::log(-std::expm1(-sigma * (upper - lower)));
      }
    }
    return kNegInf;
  }
};

}  // namespace cpsmc

#endif
