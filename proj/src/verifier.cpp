#include "soliton/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "soliton/errors.hpp"

namespace soliton {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(1, n / 4096)));
  if (t <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + t - 1) / t;
  for (unsigned k = 0; k < t; ++k) {
    const std::size_t a = k * chunk, b = std::min(n, a + chunk);
    if (a < b) pool.emplace_back([&, a, b] { fn(a, b); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

GridAxis GridAxis::span(double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi > lo)) throw ConfigError("grid: need lo < hi and h > 0");
  const double a = lo / h, b = hi / h;
  const double ra = std::round(a), rb = std::round(b);
  if (std::abs(a - ra) > 1e-9 * std::max(1.0, std::abs(a)) ||
      std::abs(b - rb) > 1e-9 * std::max(1.0, std::abs(b)))
    throw ConfigError("grid: bounds must be multiples of the spacing");
  GridAxis ax;
  ax.first = static_cast<long>(ra);
  ax.h = h;
  ax.count = static_cast<std::size_t>(rb - ra) + 1;
  return ax;
}

GridField::GridField(std::vector<GridAxis> axes, std::vector<int> signature, int eps_prime)
    : axes_(std::move(axes)), signature_(std::move(signature)), eps_prime_(eps_prime) {
  if (axes_.empty()) throw ConfigError("grid: at least one axis required");
  if (signature_.size() != axes_.size()) throw ConfigError("grid: signature length mismatch");
  for (int e : signature_)
    if (e != 1 && e != -1) throw ConfigError("grid: signature entries must be +-1");
  if (eps_prime_ != 1 && eps_prime_ != -1) throw ConfigError("grid: eps' must be +-1");
  strides_.assign(axes_.size(), 1);
  std::size_t total = 1;
  for (std::size_t i = axes_.size(); i-- > 0;) {
    if (axes_[i].count < 1 || !(axes_[i].h > 0.0)) throw ConfigError("grid: empty axis");
    strides_[i] = total;
    total *= axes_[i].count;
  }
  values_.assign(total, 0.0);
  mask_.assign(total, 0);
}

GridField GridField::sample(std::vector<GridAxis> axes, std::vector<int> signature, int eps_prime,
                            const std::function<double(std::span<const double>)>& u) {
  GridField g(std::move(axes), std::move(signature), eps_prime);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.coords(k);
    g.values_[k] = u(x);
    if (!std::isfinite(g.values_[k])) g.mask_[k] = 1;
  }
  return g;
}

std::vector<std::size_t> GridField::index(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    idx[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return idx;
}

std::size_t GridField::flat(std::span<const std::size_t> idx) const {
  std::size_t k = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) k += idx[i] * strides_[i];
  return k;
}

std::vector<double> GridField::coords(std::size_t flat) const {
  const auto idx = index(flat);
  std::vector<double> x(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) x[i] = axes_[i].at(idx[i]);
  return x;
}

void GridField::mask_where(const std::function<bool(std::span<const double>)>& pred) {
  for (std::size_t k = 0; k < size(); ++k)
    if (pred(coords(k))) mask_[k] = 1;
}

ResidualReport residual_fund_eq(const GridField& field, const ResidualOptions& opt) {
  const std::size_t n = field.size(), d = field.dim();
  const auto& u = field.values();
  const auto& sig = field.signature();
  const double ep = field.eps_prime();

  // Centered gradient -> Q = ep + sum eps_i (d_i u)^2 at every node that has
  // finite neighbours along all axes.
  std::vector<double> Q(n, kNaN);
  std::vector<double> G(n * d, kNaN);
  parallel_for(n, opt.threads, [&](std::size_t a, std::size_t b) {
    for (std::size_t k = a; k < b; ++k) {
      const auto idx = field.index(k);
      double q = ep;
      bool ok = std::isfinite(u[k]);
      for (std::size_t i = 0; i < d && ok; ++i) {
        if (idx[i] == 0 || idx[i] + 1 >= field.axes()[i].count) {
          ok = false;
          break;
        }
        const double up = u[k + field.stride(i)], um = u[k - field.stride(i)];
        if (!std::isfinite(up) || !std::isfinite(um)) {
          ok = false;
          break;
        }
        const double g = (up - um) / (2.0 * field.axes()[i].h);
        G[k * d + i] = g;
        q += sig[i] * g * g;
      }
      if (ok) Q[k] = q;
    }
  });

  // Residual nodes: unmasked, with gradient-capable neighbours on every axis.
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < n; ++k) {
    if (field.mask()[k] || !std::isfinite(Q[k])) continue;
    const auto idx = field.index(k);
    bool ok = true;
    for (std::size_t i = 0; i < d && ok; ++i)
      ok = idx[i] >= 2 && idx[i] + 2 < field.axes()[i].count &&
           std::isfinite(Q[k + field.stride(i)]) && std::isfinite(Q[k - field.stride(i)]);
    if (ok) nodes.push_back(k);
  }
  ResidualReport rep;
  rep.residual.assign(n, kNaN);
  if (nodes.empty()) return rep;

  std::vector<double> qs;
  qs.reserve(nodes.size());
  for (auto k : nodes) qs.push_back(Q[k]);
  std::nth_element(qs.begin(), qs.begin() + qs.size() / 2, qs.end());
  const double med = qs[qs.size() / 2];
  if (med == 0.0) throw DegeneracyError("W^2 median is zero: field is lightlike");
  const int eps = med > 0 ? 1 : -1;
  rep.eps = eps;
  auto check = [&](std::size_t k) {
    const double w2 = eps * Q[k];
    if (!(w2 >= opt.w2_threshold)) {
      const auto x = field.coords(k);
      std::string at;
      for (double v : x) at += (at.empty() ? "" : ", ") + std::to_string(v);
      throw DegeneracyError("W^2 = " + std::to_string(w2) + " changes sign or degenerates at (" +
                            at + ")");
    }
  };
  for (auto k : nodes) {
    check(k);
    for (std::size_t i = 0; i < d; ++i) {
      check(k + field.stride(i));
      check(k - field.stride(i));
    }
  }

  auto V = [&](std::size_t k, std::size_t i) { return sig[i] * G[k * d + i] / std::sqrt(eps * Q[k]); };
  parallel_for(nodes.size(), opt.threads, [&](std::size_t a, std::size_t b) {
    for (std::size_t m = a; m < b; ++m) {
      const std::size_t k = nodes[m];
      double div = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        div += (V(k + field.stride(i), i) - V(k - field.stride(i), i)) / (2.0 * field.axes()[i].h);
      rep.residual[k] = div - 1.0 / std::sqrt(eps * Q[k]);
    }
  });
  double sum = 0.0;
  for (auto k : nodes) {
    const double r = std::abs(rep.residual[k]);
    rep.max_abs = std::max(rep.max_abs, r);
    sum += r;
  }
  rep.evaluated = nodes.size();
  rep.mean_abs = sum / static_cast<double>(nodes.size());
  return rep;
}

double residual_keyODE(const ProfileCurve& profile, double apex_exclusion) {
  const auto& p = profile.params;
  double worst = 0.0;
  for (const auto& smp : profile.samples) {
    if (profile.apex) {
      const double ds = smp.x - (*profile.apex)[0], df = smp.v - (*profile.apex)[1];
      if (std::hypot(ds, df) < apex_exclusion) continue;
    }
    double r;
    if (profile.kind == Parametrization::GraphOverS) {
      if (!(smp.x > 0.0)) continue;
      r = smp.d2v - rhs(p, smp.x, smp.dv);
    } else {
      if (!(smp.v > 0.0)) continue;
      r = smp.d2v - rhs_wing(p, smp.v, smp.dv);
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

OrderReport convergence_order(double r_h, double r_h2, double r_h4) {
  OrderReport rep;
  for (double r : {r_h, r_h2, r_h4})
    if (!std::isfinite(r) || r <= 0.0) {
      rep.note = "residual vanished or is not finite";
      return rep;
    }
  const double slack = 1.0 + 1e-9;
  if (r_h2 > r_h * slack || r_h4 > r_h2 * slack) {
    rep.note = "non-monotone residuals; order undefined";
    return rep;
  }
  rep.defined = true;
  rep.p = std::log2(r_h / r_h2);
  rep.p_check = std::log2(r_h2 / r_h4);
  rep.note = std::abs(rep.p - rep.p_check) <= 0.5 ? "consistent" : "pairs disagree";
  return rep;
}

// Fornberg's recursion for finite-difference weights on the nodes 0..N-1.
std::vector<double> one_sided_weights(int m, int points) {
  if (m < 0 || points < m + 1) throw ParameterError("one-sided stencil too short");
  std::vector<std::vector<double>> c(points, std::vector<double>(m + 1, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < points; ++i) {
    double c2 = 1.0;
    const int mn = std::min(i, m);
    for (int j = 0; j < i; ++j) {
      const double c3 = static_cast<double>(i - j);
      c2 *= c3;
      if (j == i - 1)
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - static_cast<double>(i - 1) * c[i - 1][k]) / c2;
      if (j == i - 1) c[i][0] = -c1 * static_cast<double>(i - 1) * c[i - 1][0] / c2;
      for (int k = mn; k >= 1; --k) c[j][k] = (static_cast<double>(i) * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = static_cast<double>(i) * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(points);
  for (int i = 0; i < points; ++i) w[i] = c[i][m];
  return w;
}

SmoothnessReport smoothness_scan(const GridField& field, int max_order, int accuracy,
                                 double exclude_origin) {
  if (field.dim() != 2) throw ParameterError("smoothness scan needs a two-dimensional field");
  const auto& ax = field.axes();
  if (ax[0].first != ax[1].first || ax[0].count != ax[1].count || ax[0].h != ax[1].h)
    throw ParameterError("smoothness scan needs identical axes");
  if (max_order < 0 || accuracy < 1) throw ParameterError("smoothness scan: bad orders");
  SmoothnessReport rep;
  rep.requested_order = max_order;
  const long N = static_cast<long>(ax[0].count);
  const double step = std::sqrt(2.0) * ax[0].h;
  const auto& u = field.values();
  double umax = 0.0;
  for (double v : u)
    if (std::isfinite(v)) umax = std::max(umax, std::abs(v));

  int used = max_order;
  for (int m = 1; m <= max_order; ++m) {
    const auto w = one_sided_weights(m, m + accuracy);
    double wsum = 0.0;
    for (double v : w) wsum += std::abs(v);
    const double noise = 2.2e-16 * std::max(umax, 1.0) * wsum / std::pow(step, m);
    if (m + accuracy > N / 2 || noise > 1e-3) {
      used = m - 1;
      rep.warnings.push_back("order " + std::to_string(m) +
                             " exceeds the grid resolving power; capped at " + std::to_string(used));
      break;
    }
  }
  rep.used_order = used;

  auto value = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= N || j >= N) return kNaN;
    const std::size_t idx[2] = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
    return u[field.flat(idx)];
  };
  const long f = ax[0].first;
  for (int m = 0; m <= used; ++m) {
    JumpReport jr;
    jr.order = m;
    const int pts = m == 0 ? 1 : m + accuracy;
    const auto w = m == 0 ? std::vector<double>{1.0} : one_sided_weights(m, pts);
    const double scale = std::pow(step, m);
    // Line x = y: nodes (i, i), normal (1, -1). Line x = -y: (i, -2f - i), normal (1, 1).
    for (int line = 0; line < 2; ++line)
      for (long i = 0; i < N; ++i) {
        const long j = line == 0 ? i : -2 * f - i;
        if (j < 0 || j >= N) continue;
        const double x = ax[0].at(static_cast<std::size_t>(i));
        if (std::hypot(x, x) < exclude_origin || (exclude_origin > 0 && x == 0.0)) continue;
        const long dj = line == 0 ? -1 : 1;
        double da = 0.0, db = 0.0;
        bool ok = true;
        for (int k = 0; k < pts && ok; ++k) {
          const double a = value(i + k, j + dj * k), b = value(i - k, j - dj * k);
          ok = std::isfinite(a) && std::isfinite(b);
          da += w[k] * a;
          db += w[k] * b;
        }
        if (!ok) continue;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        jr.max_jump = std::max(jr.max_jump, std::abs(da - sign * db) / scale);
        ++jr.points;
      }
    rep.jumps.push_back(jr);
  }
  return rep;
}

GridField sample_radial(const GraphFunction& f, int dim, double L, double h, std::vector<int> signature,
                        int eps_prime, int axis_tube_cells) {
  if (dim < 1) throw ConfigError("radial field: dimension must be positive");
  // Two extra layers carry the stencil so residuals cover exactly [-L, L]^dim.
  const GridAxis ax = GridAxis::span(-L - 2 * h, L + 2 * h, h);
  GridField g = GridField::sample(std::vector<GridAxis>(dim, ax), std::move(signature), eps_prime,
                                  [&](std::span<const double> x) {
                                    double r2 = 0.0;
                                    for (double v : x) r2 += v * v;
                                    return f.f(std::sqrt(r2));
                                  });
  const double tube = axis_tube_cells * h;
  g.mask_where([&](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::sqrt(r2) < tube * (1.0 - 1e-12);
  });
  return g;
}

}  // namespace soliton
