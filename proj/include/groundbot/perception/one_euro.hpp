#pragma once

#include <optional>

namespace groundbot::perception {

struct OneEuroParams {
  double min_cutoff = 1.0;  // Hz
  double beta = 0.007;
  double d_cutoff = 1.0;    // Hz, for the derivative
};

// alpha = 1 / (1 + tau / te), tau = 1 / (2 pi cutoff)
double smoothing_alpha(double cutoff, double te);

// Velocity-adaptive low-pass filter for one scalar signal.
class OneEuroFilter {
 public:
  explicit OneEuroFilter(OneEuroParams params = {});

  // Returns nullopt (state unchanged) when t does not increase.
  std::optional<double> filter(double x, double t);
  void reset();

  bool primed() const { return primed_; }
  double derivative() const { return dx_hat_; }
  const OneEuroParams& params() const { return params_; }

 private:
  OneEuroParams params_;
  bool primed_ = false;
  double t_prev_ = 0.0;
  double x_prev_ = 0.0;  // previous raw sample
  double x_hat_ = 0.0;
  double dx_hat_ = 0.0;
};

}  // namespace groundbot::perception
