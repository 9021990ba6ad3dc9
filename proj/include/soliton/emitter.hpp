#pragma once

// File emission for the command-line tool: run configuration, phase
// portraits (CSV), profile curves (CSV) and meshes (OBJ).
//
// Floats are written with 17 significant digits and rows in a fixed order,
// so identical inputs give byte-identical files.

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "soliton/classifier.hpp"
#include "soliton/geometry.hpp"

namespace soliton::emit {

std::string num(double v);  // %.17g, "nan"/"inf" spelled out

enum class Action { SoN, Boost };
enum class RegionSel { Strip, GammaPlus, GammaMinus, SpacelikeS, TimelikeT };

Action parse_action(const std::string& s);
RegionSel parse_region(const std::string& s);
std::string to_string(Action a);
std::string to_string(RegionSel r);

struct RunConfig {
  Action action = Action::SoN;
  RegionSel region = RegionSel::Strip;
  int n = 3;
  bool strict_fiber_coeff = false;
  IntegratorConfig integrator;

  // Throws ConfigError when the region does not belong to the action.
  void validate() const;
  // SO(n): rotational Minkowski form. Boost: eps~ from the region.
  FlowParams params() const;
};

struct PortraitRequest {
  double s_lo = 0.1, s_hi = 5.0;
  double w_lo = -0.95, w_hi = 0.95;
  int ns = 10, nw = 10;     // grid of initial conditions (0 allowed: header only)
  int samples = 200;        // log-spaced output samples per trajectory
  unsigned threads = 0;     // 0 = hardware concurrency
};

// Columns: trajectory_id,s0,w0,class,s,w,status. The bowl (strip) or the
// separatrix (gamma_plus) is appended as an extra flagged trajectory.
std::string portrait_csv(const RunConfig& cfg, const PortraitRequest& req);

// graph: s,f,fprime,fsecond   wing: y,alpha,alpha_prime,alpha_second
std::string profile_csv(const ProfileCurve& c);

void write_file(const std::string& path, const std::string& text);

struct MeshOutput {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<std::size_t, 3>> faces;          // 0-based
  std::vector<std::vector<std::size_t>> polylines;        // OBJ "l" elements
  std::vector<std::pair<std::string, std::string>> metadata;
  std::size_t skipped_degenerate = 0;

  // Adds the triangle unless it has (numerically) zero area.
  void add_triangle(std::size_t a, std::size_t b, std::size_t c);
  std::string to_obj() const;
};

using Profile = std::function<double(double)>;

// (s cos t, s sin t, f(s)), `angular` samples around, `profile_samples`
// uniform in s on [s_lo, s_hi]; the angular direction wraps.
MeshOutput mesh_rotational(const Profile& f, double s_lo, double s_hi, int angular,
                           int profile_samples);

// Boost orbits (s cosh t, s sinh t) in quadrant 1, mapped to quadrant q of L^2,
// t in [-theta_max, theta_max].
MeshOutput mesh_boost(const Profile& f, double s_lo, double s_hi, int quadrant, double theta_max,
                      int angular, int profile_samples);

// (alpha(y) cos t, alpha(y) sin t, y) closed by the two extrapolated axis points.
MeshOutput mesh_spindle(const SpindleResult& sp, int angular, int profile_samples);

// Height field (x, y, u) over the sampled pieces; cone lines as polylines.
MeshOutput mesh_hybrid(const HybridField& field, double lo, double hi, int count);

}  // namespace soliton::emit
