// rk4.hpp - classical fixed-step fourth-order Runge-Kutta stepper
//
// The state is any random-access container of values supporting +, * by a
// double (double, std::complex<double>). The right-hand side is called as
// rhs(state, slot, derivative_out) with slot in {0, 1, 2} giving the
// position within the step (start, midpoint, end) so callers can
// interpolate time-dependent coefficients without the stepper knowing how.

#pragma once

#include <cstddef>

namespace ramanflow {

enum class StepPoint { begin = 0, middle = 1, end = 2 };

template <class State>
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t n = 0) { resize(n); }

  void resize(std::size_t n) {
    if constexpr (requires(State s) { s.resize(n); }) {
      k1_.resize(n);
      k2_.resize(n);
      k3_.resize(n);
      k4_.resize(n);
      tmp_.resize(n);
    }
  }

  template <class Rhs>
  void step(State& y, double h, Rhs&& rhs) {
    const std::size_t n = y.size();
    if (k1_.size() != n) resize(n);
    rhs(y, StepPoint::begin, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * h) * k1_[i];
    rhs(tmp_, StepPoint::middle, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * h) * k2_[i];
    rhs(tmp_, StepPoint::middle, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    rhs(tmp_, StepPoint::end, k4_);
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) y[i] += w * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
  }

 private:
  State k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace ramanflow
