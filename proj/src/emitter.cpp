#include "soliton/emitter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <optional>
#include <thread>

#include "soliton/errors.hpp"
#include "soliton/verifier.hpp"

namespace soliton::emit {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

Action parse_action(const std::string& s) {
  if (s == "so_n") return Action::SoN;
  if (s == "boost") return Action::Boost;
  throw ConfigError("unknown action '" + s + "' (so_n, boost)");
}

RegionSel parse_region(const std::string& s) {
  if (s == "strip") return RegionSel::Strip;
  if (s == "gamma_plus") return RegionSel::GammaPlus;
  if (s == "gamma_minus") return RegionSel::GammaMinus;
  if (s == "spacelike_S") return RegionSel::SpacelikeS;
  if (s == "timelike_T") return RegionSel::TimelikeT;
  throw ConfigError("unknown region '" + s +
                    "' (strip, gamma_plus, gamma_minus, spacelike_S, timelike_T)");
}

std::string to_string(Action a) { return a == Action::SoN ? "so_n" : "boost"; }

std::string to_string(RegionSel r) {
  switch (r) {
    case RegionSel::Strip: return "strip";
    case RegionSel::GammaPlus: return "gamma_plus";
    case RegionSel::GammaMinus: return "gamma_minus";
    case RegionSel::SpacelikeS: return "spacelike_S";
    case RegionSel::TimelikeT: return "timelike_T";
  }
  return "?";
}

void RunConfig::validate() const {
  if (n < 2) throw ConfigError("n must be >= 2");
  const bool boost_region = region == RegionSel::SpacelikeS || region == RegionSel::TimelikeT;
  if ((action == Action::Boost) != boost_region)
    throw ConfigError("region " + to_string(region) + " does not belong to action " +
                      to_string(action));
  integrator.validate();
}

FlowParams RunConfig::params() const {
  if (action == Action::SoN) return FlowParams::rotational_minkowski(n);
  return FlowParams::boost(n, region == RegionSel::SpacelikeS ? +1 : -1, strict_fiber_coeff);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<double> log_samples(double a, double b, int count) {
  std::vector<double> s;
  if (count <= 0 || !(b > a)) return s;
  if (count == 1) return {a};
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < count; ++i) {
    double v = std::exp(la + (lb - la) * i / (count - 1));
    s.push_back(std::clamp(v, a, b));
  }
  s.front() = a;
  s.back() = b;
  return s;
}

std::vector<double> lin(double a, double b, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(count == 1 ? a : a + (b - a) * i / (count - 1));
  if (count > 1) v.back() = b;
  return v;
}

bool in_region(RegionSel r, double w) {
  switch (r) {
    case RegionSel::Strip:
    case RegionSel::TimelikeT: return std::abs(w) < 1.0;
    case RegionSel::GammaPlus: return w > 1.0;
    case RegionSel::GammaMinus: return w < -1.0;
    case RegionSel::SpacelikeS: return true;
  }
  return false;
}

std::string trajectory_rows(const std::string& id, double s0, double w0, const std::string& cls,
                            const Trajectory& t, double sign, int samples,
                            const std::string& status) {
  std::string out;
  const double a = t.segments.empty() ? t.s_lo() : t.dense_lo();
  const double b = t.segments.empty() ? t.s_hi() : t.dense_hi();
  for (double s : log_samples(a, b, samples)) {
    const double w = t.segments.empty() ? t.samples.front().w : t.w_at(s);
    out += fmt::format("{},{},{},{},{},{},{}\n", id, num(s0), num(w0), cls, num(s), num(sign * w),
                       status);
  }
  return out;
}

}  // namespace

std::string portrait_csv(const RunConfig& cfg, const PortraitRequest& req) {
  cfg.validate();
  if (req.ns < 0 || req.nw < 0 || req.samples < 1) throw ConfigError("portrait: bad grid sizes");
  if (!(req.s_lo > 0.0) || req.s_hi < req.s_lo) throw ConfigError("portrait: need 0 < s_lo <= s_hi");
  if (req.w_hi < req.w_lo) throw ConfigError("portrait: need w_lo <= w_hi");
  const FlowParams p = cfg.params();
  const std::size_t count = static_cast<std::size_t>(req.ns) * static_cast<std::size_t>(req.nw);
  std::string out = "trajectory_id,s0,w0,class,s,w,status\n";
  if (count == 0) return out;

  std::optional<Classifier> classifier;
  if (p.has_barriers()) classifier.emplace(p, cfg.integrator);
  const double sign = p.eps_tilde == -1 ? -1.0 : 1.0;  // trajectories come in the et = +1 picture
  const auto ss = lin(req.s_lo, req.s_hi, req.ns);
  const auto ws = lin(req.w_lo, req.w_hi, req.nw);

  std::vector<std::string> rows(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      const double s0 = ss[k / req.nw], w0 = ws[k % req.nw];
      const std::string id = std::to_string(k);
      try {
        if (!in_region(cfg.region, w0))
          throw DomainError("initial condition outside region " + to_string(cfg.region));
        if (classifier) {
          const auto c = classifier->classify(s0, w0);
          rows[k] = trajectory_rows(id, s0, w0, std::string(to_string(c.tag)), c.trajectory, sign,
                                    req.samples, "ok");
        } else {
          const auto t = integrate_both(p, {s0, w0}, cfg.integrator);
          rows[k] = trajectory_rows(id, s0, w0, "unclassified", t, 1.0, req.samples, "ok");
        }
      } catch (const std::exception& e) {
        rows[k] = fmt::format("{},{},{},error,,,{}\n", id, num(s0), num(w0),
                              csv_field(std::string("error: ") + e.what()));
      }
    }
  };
  unsigned nt = req.threads ? req.threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, count));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nt; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& r : rows) out += r;

  if (classifier && (cfg.region == RegionSel::Strip || cfg.region == RegionSel::TimelikeT)) {
    const auto& b = classifier->bowl();
    out += trajectory_rows("bowl", 0.0, 0.0, "Bowl", b.trajectory, sign, req.samples, "bowl");
  } else if (classifier && cfg.region == RegionSel::GammaPlus) {
    const auto& sp = classifier->separatrix();
    out += trajectory_rows("separatrix", sp.anchor, sp.value, "Separatrix", sp.trajectory, sign,
                           req.samples, "separatrix");
  }
  return out;
}

std::string profile_csv(const ProfileCurve& c) {
  std::string out = c.kind == Parametrization::GraphOverS ? "s,f,fprime,fsecond\n"
                                                          : "y,alpha,alpha_prime,alpha_second\n";
  for (const auto& smp : c.samples)
    out += fmt::format("{},{},{},{}\n", num(smp.x), num(smp.v), num(smp.dv), num(smp.d2v));
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

// ------------------------------------------------------------------ OBJ

void MeshOutput::add_triangle(std::size_t a, std::size_t b, std::size_t c) {
  const auto& A = vertices[a];
  const auto& B = vertices[b];
  const auto& C = vertices[c];
  const double u[3] = {B[0] - A[0], B[1] - A[1], B[2] - A[2]};
  const double v[3] = {C[0] - A[0], C[1] - A[1], C[2] - A[2]};
  const double x = u[1] * v[2] - u[2] * v[1], y = u[2] * v[0] - u[0] * v[2],
               z = u[0] * v[1] - u[1] * v[0];
  const double cross = std::sqrt(x * x + y * y + z * z);
  const double scale = std::max({u[0] * u[0] + u[1] * u[1] + u[2] * u[2],
                                 v[0] * v[0] + v[1] * v[1] + v[2] * v[2]});
  if (!(cross > 1e-14 * scale)) {
    ++skipped_degenerate;
    return;
  }
  faces.push_back({a, b, c});
}

std::string MeshOutput::to_obj() const {
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + ": " + v + "\n";
  out += fmt::format("# vertices: {}\n# faces: {}\n", vertices.size(), faces.size());
  for (const auto& p : vertices) out += fmt::format("v {} {} {}\n", num(p[0]), num(p[1]), num(p[2]));
  for (const auto& f : faces) out += fmt::format("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
  for (const auto& l : polylines) {
    out += "l";
    for (auto i : l) out += fmt::format(" {}", i + 1);
    out += "\n";
  }
  return out;
}

namespace {

void check_counts(int angular, int profile_samples) {
  if (angular < 3 || profile_samples < 2) throw ConfigError("mesh needs >= 3 angular and >= 2 profile samples");
}

}  // namespace

MeshOutput mesh_rotational(const Profile& f, double s_lo, double s_hi, int angular,
                           int profile_samples) {
  check_counts(angular, profile_samples);
  if (!(s_lo >= 0.0 && s_hi > s_lo)) throw ConfigError("mesh: need 0 <= s_lo < s_hi");
  MeshOutput m;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (double s : lin(s_lo, s_hi, profile_samples)) {
    const double z = f(s);
    for (int j = 0; j < angular; ++j) {
      const double t = two_pi * j / angular;
      m.vertices.push_back({s * std::cos(t), s * std::sin(t), z});
    }
  }
  const std::size_t A = angular;
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(profile_samples); ++i)
    for (std::size_t j = 0; j < A; ++j) {
      const std::size_t a = i * A + j, b = i * A + (j + 1) % A, c = (i + 1) * A + (j + 1) % A,
                        d = (i + 1) * A + j;
      m.add_triangle(a, b, c);
      m.add_triangle(a, c, d);
    }
  m.metadata.push_back({"surface", "rotational (s cos t, s sin t, f(s))"});
  m.metadata.push_back({"grid", fmt::format("{} angular x {} profile", angular, profile_samples)});
  return m;
}

MeshOutput mesh_boost(const Profile& f, double s_lo, double s_hi, int quadrant, double theta_max,
                      int angular, int profile_samples) {
  check_counts(angular, profile_samples);
  if (quadrant < 1 || quadrant > 4) throw ConfigError("mesh: quadrant must be 1..4");
  if (!(theta_max > 0.0)) throw ConfigError("mesh: theta_max must be positive");
  if (!(s_lo >= 0.0 && s_hi > s_lo)) throw ConfigError("mesh: need 0 <= s_lo < s_hi");
  MeshOutput m;
  const auto ts = lin(-theta_max, theta_max, angular);
  for (double s : lin(s_lo, s_hi, profile_samples)) {
    const double z = f(s);
    for (double t : ts) {
      const double c = s * std::cosh(t), h = s * std::sinh(t);
      std::array<double, 3> v{c, h, z};
      if (quadrant == 2) v = {h, c, z};
      if (quadrant == 3) v = {-c, -h, z};
      if (quadrant == 4) v = {-h, -c, z};
      m.vertices.push_back(v);
    }
  }
  const std::size_t A = angular;
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(profile_samples); ++i)
    for (std::size_t j = 0; j + 1 < A; ++j) {
      const std::size_t a = i * A + j, b = i * A + j + 1, c = (i + 1) * A + j + 1, d = (i + 1) * A + j;
      m.add_triangle(a, b, c);
      m.add_triangle(a, c, d);
    }
  m.metadata.push_back({"surface", fmt::format("boost orbits in quadrant {}", quadrant)});
  m.metadata.push_back({"grid", fmt::format("{} angular x {} profile", angular, profile_samples)});
  return m;
}

MeshOutput mesh_spindle(const SpindleResult& sp, int angular, int profile_samples) {
  check_counts(angular, profile_samples);
  const auto& w = sp.wing;
  MeshOutput m;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (double y : lin(w.y_lo, w.y_hi, profile_samples)) {
    const double a = w.alpha.alpha(y);
    for (int j = 0; j < angular; ++j) {
      const double t = two_pi * j / angular;
      m.vertices.push_back({a * std::cos(t), a * std::sin(t), y});
    }
  }
  const std::size_t A = angular, P = profile_samples;
  for (std::size_t i = 0; i + 1 < P; ++i)
    for (std::size_t j = 0; j < A; ++j) {
      const std::size_t a = i * A + j, b = i * A + (j + 1) % A, c = (i + 1) * A + (j + 1) % A,
                        d = (i + 1) * A + j;
      m.add_triangle(a, b, c);
      m.add_triangle(a, c, d);
    }
  if (sp.closed) {
    const std::size_t lo = m.vertices.size();
    m.vertices.push_back({0.0, 0.0, sp.y_axis_lo});
    const std::size_t hi = m.vertices.size();
    m.vertices.push_back({0.0, 0.0, sp.y_axis_hi});
    for (std::size_t j = 0; j < A; ++j) {
      m.add_triangle(lo, (j + 1) % A, j);
      m.add_triangle(hi, (P - 1) * A + j, (P - 1) * A + (j + 1) % A);
    }
  }
  m.metadata.push_back({"surface", "spindle (alpha(y) cos t, alpha(y) sin t, y)"});
  m.metadata.push_back({"grid", fmt::format("{} angular x {} profile", angular, profile_samples)});
  m.metadata.push_back({"axis_contacts", num(sp.y_axis_lo) + " " + num(sp.y_axis_hi)});
  m.metadata.push_back({"closed", sp.closed ? "true" : "false"});
  return m;
}

MeshOutput mesh_hybrid(const HybridField& field, double lo, double hi, int count) {
  if (count < 2) throw ConfigError("mesh: hybrid grid needs >= 2 nodes per side");
  const GridAxis ax = GridAxis::span(lo, hi, (hi - lo) / (count - 1));
  if (ax.count != static_cast<std::size_t>(count)) throw ConfigError("mesh: inconsistent hybrid grid");
  MeshOutput m;
  const std::size_t N = ax.count, none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> id(N * N, none);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      const double x = ax.at(i), y = ax.at(j), u = field.u(x, y);
      if (!std::isfinite(u)) continue;
      id[i * N + j] = m.vertices.size();
      m.vertices.push_back({x, y, u});
    }
  for (std::size_t i = 0; i + 1 < N; ++i)
    for (std::size_t j = 0; j + 1 < N; ++j) {
      const std::size_t a = id[i * N + j], b = id[(i + 1) * N + j], c = id[(i + 1) * N + j + 1],
                        d = id[i * N + j + 1];
      if (a == none || b == none || c == none || d == none) continue;
      m.add_triangle(a, b, c);
      m.add_triangle(a, c, d);
    }
  // Cone lines x = y and x = -y through grid nodes (exact for symmetric grids).
  for (int line = 0; line < 2; ++line) {
    std::vector<std::size_t> run;
    for (std::size_t i = 0; i < N; ++i) {
      const long jj = line == 0 ? static_cast<long>(i) : -2 * ax.first - static_cast<long>(i);
      const std::size_t v = (jj >= 0 && jj < static_cast<long>(N)) ? id[i * N + jj] : none;
      if (v != none) {
        run.push_back(v);
      } else {
        if (run.size() > 1) m.polylines.push_back(run);
        run.clear();
      }
    }
    if (run.size() > 1) m.polylines.push_back(run);
  }
  m.metadata.push_back({"surface", "hybrid height field (x, y, u)"});
  m.metadata.push_back({"quadrants", field.config().mask.to_string()});
  m.metadata.push_back({"cone", "x = y and x = -y emitted as polylines (l elements)"});
  return m;
}

}  // namespace soliton::emit
