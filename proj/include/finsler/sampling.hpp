#pragma once

// Deterministic seeded sampling of slit points, with rejection.  Uniform
// doubles come from explicit mt19937_64 bit manipulation so identical
// seeds give identical samples on every platform.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/fields.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"

namespace finsler {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed), seed_(seed) {}

  double uniform(double lo, double hi) {
    double u = (eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Independent deterministic substream.
  Rng split(std::uint64_t stream) const {
    return Rng(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  std::mt19937_64 eng_;
  std::uint64_t seed_;
};

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

struct Box {
  std::vector<std::pair<double, double>> x;  // per-coordinate intervals
  std::vector<std::pair<double, double>> y;

  static Box cube(int n, double xlo, double xhi, double ylo, double yhi) {
    Box b;
    b.x.assign(n, {xlo, xhi});
    b.y.assign(n, {ylo, yhi});
    return b;
  }
};

struct SamplePlan {
  std::uint64_t seed = 1;
  int num_base_points = 20;
  int fibre_points_per_base = 4;  // >= 3, needed for fibrewise-constancy tests
  Box box;

  void validate() const {
    if (num_base_points < 1) throw std::invalid_argument("plan: num_base_points must be >= 1");
    if (fibre_points_per_base < 3)
      throw std::invalid_argument("plan: fibre_points_per_base must be >= 3");
    for (const auto& [lo, hi] : box.x)
      if (!(lo < hi)) throw std::invalid_argument("plan: empty x interval");
    for (const auto& [lo, hi] : box.y)
      if (!(lo < hi)) throw std::invalid_argument("plan: empty y interval");
  }
};

struct BaseSample {
  std::vector<double> x;
  std::vector<std::vector<double>> ys;
};

struct SampleSet {
  std::vector<BaseSample> bases;

  int total() const {
    int t = 0;
    for (const auto& b : bases) t += static_cast<int>(b.ys.size());
    return t;
  }

  std::vector<SlitPoint> flatten() const {
    std::vector<SlitPoint> out;
    out.reserve(total());
    for (const auto& b : bases)
      for (const auto& y : b.ys) out.push_back({b.x, y});
    return out;
  }
};

// Draws the plan's samples, rejecting points off the slit bundle, outside
// the model's safe domain, or with |det g| below threshold.  Failed
// homogeneity CE = 2E is a structural defect and raises DegenerateError;
// exhaustion of the rejection budget raises SamplingError.
inline SampleSet draw_samples(const FinslerStructure& fs, const SamplePlan& plan,
                              const std::function<bool(const SlitPoint&)>& in_domain = {}) {
  plan.validate();
  if (static_cast<int>(plan.box.x.size()) != fs.dim ||
      static_cast<int>(plan.box.y.size()) != fs.dim)
    throw std::invalid_argument("plan: box dimension does not match the structure");
  Rng rng = make_rng(plan.seed);
  SampleSet set;
  const int max_base_attempts = 40;
  const int max_fibre_attempts = 80;
  for (int b = 0; b < plan.num_base_points; ++b) {
    bool base_ok = false;
    for (int attempt = 0; attempt < max_base_attempts && !base_ok; ++attempt) {
      BaseSample bs;
      bs.x.resize(fs.dim);
      for (int i = 0; i < fs.dim; ++i)
        bs.x[i] = rng.uniform(plan.box.x[i].first, plan.box.x[i].second);
      int tries = 0;
      while (static_cast<int>(bs.ys.size()) < plan.fibre_points_per_base &&
             tries < max_fibre_attempts) {
        ++tries;
        std::vector<double> y(fs.dim);
        double ymax = 0.0;
        for (int i = 0; i < fs.dim; ++i) {
          y[i] = rng.uniform(plan.box.y[i].first, plan.box.y[i].second);
          ymax = std::max(ymax, std::abs(y[i]));
        }
        if (ymax < 0.05) continue;  // slit floor
        SlitPoint p{bs.x, y};
        if (in_domain && !in_domain(p)) continue;
        try {
          if (homogeneity_defect(fs, p) > 1e-9)
            throw DegenerateError(
                "sampling: energy is not positively 2-homogeneous (CE != 2E) at a sample; "
                "the input is not a Finsler function");
          metric(fs, p);  // nondegeneracy gate
        } catch (const JetError&) {
          continue;  // singular locus, resample
        } catch (const DegenerateError& e) {
          if (std::string(e.what()).find("sampling:") == 0) throw;
          continue;  // degenerate metric here, resample
        }
        bs.ys.push_back(std::move(y));
      }
      if (static_cast<int>(bs.ys.size()) == plan.fibre_points_per_base) {
        set.bases.push_back(std::move(bs));
        base_ok = true;
      }
    }
    if (!base_ok)
      throw SamplingError("sampling: rejection budget exhausted; fewer than " +
                          std::to_string(plan.fibre_points_per_base) +
                          " valid fibre samples per base point");
  }
  return set;
}

// --- random object generators (deterministic given the Rng state) -------

// Base vector field with polynomial components of degree <= 2.
inline BaseVectorField random_polynomial_base_field(Rng& rng, int n, const std::string& name) {
  struct Poly {
    double c0;
    std::vector<double> c1;
    std::vector<double> c2;  // upper-triangular pairs, row-major
  };
  std::vector<Poly> comps(n);
  for (auto& poly : comps) {
    poly.c0 = rng.uniform(-1.0, 1.0);
    poly.c1.resize(n);
    for (auto& c : poly.c1) c = rng.uniform(-1.0, 1.0);
    poly.c2.resize(n * (n + 1) / 2);
    for (auto& c : poly.c2) c = rng.uniform(-0.5, 0.5);
  }
  BaseVectorField f;
  f.dim = n;
  f.name = name;
  f.components = [comps, n](const JetPoint& p, int order) {
    std::vector<Jet> vars = p.coordinate_jets(order);
    std::vector<Jet> out;
    out.reserve(comps.size());
    for (const auto& poly : comps) {
      Jet s = Jet::constant(poly.c0, p.dim(), order);
      for (int j = 0; j < n; ++j) s += poly.c1[j] * vars[j];
      int q = 0;
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) s += poly.c2[q++] * vars[j] * vars[k];
      out.push_back(s);
    }
    return out;
  };
  return f;
}

// Section with polynomial principal part of degree <= 2 in (x, y).
inline Section random_polynomial_section(Rng& rng, int n, const std::string& name) {
  int m = 2 * n;
  struct Poly {
    double c0;
    std::vector<double> c1;
  };
  std::vector<Poly> comps(n);
  for (auto& poly : comps) {
    poly.c0 = rng.uniform(-1.0, 1.0);
    poly.c1.resize(m + m * (m + 1) / 2);
    for (auto& c : poly.c1) c = rng.uniform(-0.5, 0.5);
  }
  Section s;
  s.dim = n;
  s.name = name;
  s.principal = [comps, m](const JetPoint& p, int order) {
    std::vector<Jet> vars = p.coordinate_jets(order);
    std::vector<Jet> out;
    out.reserve(comps.size());
    for (const auto& poly : comps) {
      Jet v = Jet::constant(poly.c0, p.dim(), order);
      int q = 0;
      for (int a = 0; a < m; ++a) v += poly.c1[q++] * vars[a];
      for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) v += poly.c1[q++] * vars[a] * vars[b];
      out.push_back(v);
    }
    return out;
  };
  return s;
}

// General TM vector field (not projectable in general).
inline TMVectorField random_tm_field(Rng& rng, int n, const std::string& name) {
  Section sa = random_polynomial_section(rng, n, name + ".a");
  Section sb = random_polynomial_section(rng, n, name + ".b");
  TMVectorField f;
  f.base_dim = n;
  f.name = name;
  f.components = [sa, sb](const JetPoint& p, int order) {
    std::vector<Jet> a = sa.principal(p, order);
    std::vector<Jet> b = sb.principal(p, order);
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return f;
}

// Projectable field: a complete lift plus a vertical field with arbitrary
// (x, y)-dependent principal part.
inline TMVectorField random_projectable_field(Rng& rng, int n, const std::string& name) {
  BaseVectorField x = random_polynomial_base_field(rng, n, name + ".base");
  Section s = random_polynomial_section(rng, n, name + ".vert");
  TMVectorField f = add_fields(complete_lift(x), i_map(s));
  f.name = name;
  f.projectable = true;
  f.base = std::make_shared<BaseVectorField>(x);
  return f;
}

}  // namespace finsler
