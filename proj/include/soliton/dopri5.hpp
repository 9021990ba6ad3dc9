#pragma once

// Dormand-Prince 5(4) with the 4th-order continuous extension and the
// PI step-size controller of Hairer, Norsett & Wanner (DOPRI5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace soliton::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

// Dense output of one accepted step on [x0, x0 + h] (h may be negative).
template <std::size_t N>
struct DenseStep {
  double x0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> rc{};

  double x1() const { return x0 + h; }

  Vec<N> value(double x) const {
    const double th = (x - x0) / h;
    const double th1 = 1.0 - th;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
    return out;
  }

  // d/dx of value(x)
  Vec<N> derivative(double x) const {
    const double th = (x - x0) / h;
    const double th1 = 1.0 - th;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      const double s = rc[3][i] + th1 * rc[4][i];
      const double ds = -rc[4][i];
      const double r = rc[2][i] + th * s;
      const double dr = s + th * ds;
      const double q = rc[1][i] + th1 * r;
      const double dq = -r + th1 * dr;
      out[i] = (q + th * dq) / h;
    }
    return out;
  }
};

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  double min_step = 1e-14;
  double safety = 0.9;
  double beta = 0.04;
  double fac_min = 0.2;   // h_new >= fac_min * h
  double fac_max = 10.0;  // h_new <= fac_max * h
};

enum class StepStatus { Accepted, Collapsed };

// Stepper state for one integration run. `F` is callable as
// Vec<N> f(double x, const Vec<N>& y); `Valid` is callable as
// bool valid(const Vec<N>& y) and rejects steps that leave the chart.
template <std::size_t N, class F, class Valid>
class Dopri5 {
 public:
  Dopri5(F f, Valid valid, StepControl ctl) : f_(f), valid_(valid), ctl_(ctl) {}

  double x() const { return x_; }
  const Vec<N>& y() const { return y_; }
  const Vec<N>& dy() const { return k1_; }
  const DenseStep<N>& last_dense() const { return dense_; }
  double last_step() const { return dense_.h; }
  std::size_t rejected() const { return rejected_; }

  void reset(double x, const Vec<N>& y, double x_end) {
    x_ = x;
    y_ = y;
    k1_ = f_(x_, y_);
    err_old_ = 1e-4;
    h_ = initial_step(x_end);
  }

  // Advance by one accepted step toward x_end (never overshooting it).
  StepStatus step(double x_end) {
    const double dir = x_end >= x_ ? 1.0 : -1.0;
    for (;;) {
      const double remaining = std::abs(x_end - x_);
      double h = std::min({std::abs(h_), ctl_.max_step, remaining});
      const double floor = ctl_.min_step * std::max(1.0, std::abs(x_));
      if (h < floor && h < remaining) return StepStatus::Collapsed;
      h *= dir;

      Vec<N> y1, k7;
      const double err = attempt(h, y1, k7);
      if (err <= 1.0) {
        const double fac11 = std::pow(err, 0.2 - ctl_.beta * 0.75);
        double fac = fac11 / std::pow(err_old_, ctl_.beta);
        fac = std::clamp(fac / ctl_.safety, 1.0 / ctl_.fac_max, 1.0 / ctl_.fac_min);
        err_old_ = std::max(err, 1e-4);
        build_dense(h, y1, k7);
        x_ = (std::abs(x_end - (x_ + h)) <= 1e-15 * std::max(1.0, std::abs(x_end))) ? x_end : x_ + h;
        y_ = y1;
        k1_ = k7;
        h_ = std::abs(h) / fac;
        return StepStatus::Accepted;
      }
      ++rejected_;
      if (std::isfinite(err)) {
        const double fac11 = std::pow(err, 0.2 - ctl_.beta * 0.75);
        h_ = std::abs(h) / std::min(1.0 / ctl_.fac_min, fac11 / ctl_.safety);
      } else {
        h_ = std::abs(h) * 0.25;
      }
    }
  }

 private:
  double initial_step(double x_end) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = ctl_.abs_tol + ctl_.rel_tol * std::abs(y_[i]);
      d0 += (y_[i] / sk) * (y_[i] / sk);
      d1 += (k1_[i] / sk) * (k1_[i] / sk);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, ctl_.max_step, std::abs(x_end - x_)});
    // Scale for the 5th-order local error.
    return std::max(h * std::pow(ctl_.rel_tol / 1e-6, 0.2) * 0.1,
                    ctl_.min_step * std::max(1.0, std::abs(x_)) * 10.0);
  }

  static bool finite(const Vec<N>& v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
  }

  double attempt(double h, Vec<N>& y1, Vec<N>& k7) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double inf = std::numeric_limits<double>::infinity();

    Vec<N> t;
    auto stage = [&](double cx, auto&& combine) -> Vec<N> {
      for (std::size_t i = 0; i < N; ++i) t[i] = y_[i] + h * combine(i);
      if (!finite(t) || !valid_(t)) return Vec<N>{inf};
      return f_(x_ + cx * h, t);
    };
    const Vec<N>& k1 = k1_;
    k2_ = stage(c2, [&](std::size_t i) { return a21 * k1[i]; });
    if (!finite(k2_)) return inf;
    k3_ = stage(c3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2_[i]; });
    if (!finite(k3_)) return inf;
    k4_ = stage(c4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2_[i] + a43 * k3_[i]; });
    if (!finite(k4_)) return inf;
    k5_ = stage(c5, [&](std::size_t i) {
      return a51 * k1[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
    });
    if (!finite(k5_)) return inf;
    k6_ = stage(1.0, [&](std::size_t i) {
      return a61 * k1[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
    });
    if (!finite(k6_)) return inf;
    for (std::size_t i = 0; i < N; ++i)
      y1[i] = y_[i] + h * (a71 * k1[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
    if (!finite(y1) || !valid_(y1)) return inf;
    k7 = f_(x_ + h, y1);
    if (!finite(k7)) return inf;

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                            e7 * k7[i]);
      const double sk = ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
      err += (e / sk) * (e / sk);
    }
    return std::sqrt(err / N);
  }

  void build_dense(double h, const Vec<N>& y1, const Vec<N>& k7) {
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    dense_.x0 = x_;
    dense_.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y1[i] - y_[i];
      const double bspl = h * k1_[i] - ydiff;
      dense_.rc[0][i] = y_[i];
      dense_.rc[1][i] = ydiff;
      dense_.rc[2][i] = bspl;
      dense_.rc[3][i] = ydiff - h * k7[i] - bspl;
      dense_.rc[4][i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                             d7 * k7[i]);
    }
  }

  F f_;
  Valid valid_;
  StepControl ctl_;
  double x_ = 0.0;
  double h_ = 0.0;
  double err_old_ = 1e-4;
  std::size_t rejected_ = 0;
  Vec<N> y_{}, k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{};
  DenseStep<N> dense_{};
};

template <std::size_t N, class F, class Valid>
Dopri5<N, F, Valid> make_dopri5(F f, Valid valid, StepControl ctl) {
  return Dopri5<N, F, Valid>(f, valid, ctl);
}

}  // namespace soliton::ode
