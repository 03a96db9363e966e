#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "dynres/dop853.hpp"
#include "dynres/errors.hpp"

namespace dynres::detail {

/// Uniform sample times begin, begin + dt, ..., end (inclusive).
class SampleGrid {
 public:
  SampleGrid(double t_end, double window_begin, double window_end, double sample_dt,
             std::size_t sample_count) {
    begin_ = std::max(0.0, window_begin);
    end_ = std::min(t_end, window_end);
    if (!(end_ >= begin_)) {
      count_ = 0;
      return;
    }
    if (sample_dt > 0.0) {
      dt_ = sample_dt;
      count_ = static_cast<std::size_t>(std::floor((end_ - begin_) / dt_ * (1.0 + 1e-12))) + 1;
    } else {
      if (sample_count == 0) throw ConfigError("sampling: sample_count must be > 0");
      count_ = end_ > begin_ ? std::max<std::size_t>(sample_count, 2) : 1;
      dt_ = count_ > 1 ? (end_ - begin_) / static_cast<double>(count_ - 1) : 0.0;
    }
  }

  std::size_t size() const { return count_; }
  double time(std::size_t k) const {
    const double t = begin_ + static_cast<double>(k) * dt_;
    return k + 1 == count_ && dt_ > 0.0 ? std::min(t, end_) : t;
  }

 private:
  double begin_ = 0.0;
  double end_ = 0.0;
  double dt_ = 0.0;
  std::size_t count_ = 0;
};

/// Runs DOP853 forward from t = 0, calling emit(t, y) at every grid time and
/// on_accept(t, y) after every accepted step (in time order).
template <std::size_t N, class Rhs, class Emit, class OnAccept>
ode::Result<N> run_sampled(Rhs&& rhs, const ode::Vec<N>& y0, double t_end,
                           const ode::Tolerances<N>& tol, const ode::StepOptions& opts,
                           const SampleGrid& grid, Emit&& emit, OnAccept&& on_accept) {
  std::size_t next = 0;
  while (next < grid.size() && grid.time(next) <= 0.0) {
    emit(grid.time(next), y0);
    ++next;
  }
  auto on_step = [&](auto& step) {
    while (next < grid.size() && grid.time(next) <= step.t_new()) {
      emit(grid.time(next), step.at(grid.time(next)));
      ++next;
    }
    on_accept(step.t_new(), step.y_new());
  };
  return ode::integrate<N>(rhs, 0.0, y0, t_end, tol, opts, on_step);
}

inline const char* describe(ode::Status s) {
  switch (s) {
    case ode::Status::success: return "success";
    case ode::Status::step_underflow: return "step size underflow";
    case ode::Status::too_many_steps: return "step budget exhausted";
    case ode::Status::non_finite: return "non-finite state";
  }
  return "unknown";
}

}  // namespace dynres::detail
