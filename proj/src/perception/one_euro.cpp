#include "groundbot/perception/one_euro.hpp"

#include <cmath>
#include <numbers>

#include "groundbot/core/errors.hpp"

namespace groundbot::perception {

double smoothing_alpha(double cutoff, double te) {
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff);
  return 1.0 / (1.0 + tau / te);
}

OneEuroFilter::OneEuroFilter(OneEuroParams params) : params_(params) {
  if (params_.min_cutoff <= 0.0 || params_.d_cutoff <= 0.0 || params_.beta < 0.0) {
    throw ConfigError("1-euro cutoffs must be positive and beta non-negative");
  }
}

std::optional<double> OneEuroFilter::filter(double x, double t) {
  if (!primed_) {
    primed_ = true;
    t_prev_ = t;
    x_prev_ = x;
    x_hat_ = x;
    dx_hat_ = 0.0;
    return x;
  }
  if (!(t > t_prev_)) return std::nullopt;
  const double te = t - t_prev_;
  const double dx = (x - x_prev_) / te;
  const double ad = smoothing_alpha(params_.d_cutoff, te);
  dx_hat_ += ad * (dx - dx_hat_);
  const double cutoff = params_.min_cutoff + params_.beta * std::abs(dx_hat_);
  const double a = smoothing_alpha(cutoff, te);
  // Incremental form keeps a constant input an exact fixed point.
  x_hat_ += a * (x - x_hat_);
  x_prev_ = x;
  t_prev_ = t;
  return x_hat_;
}

void OneEuroFilter::reset() { *this = OneEuroFilter(params_); }

}  // namespace groundbot::perception
