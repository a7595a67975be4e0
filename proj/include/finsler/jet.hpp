#pragma once

// Dense truncated multivariate Taylor arithmetic ("jets") up to order 4.
//
// A Jet stores the Taylor coefficients f_a = (d^|a| f / dz^a) / a! of a
// scalar quantity at an expansion point, for every multi-index a with
// |a| <= order.  Coefficients are enumerated by total degree, and within a
// degree lexicographically ascending on the exponent tuple (a_1,...,a_m).
// This enumeration is frozen; reports and serialized data depend on it.
//
//   m = 2, order = 2:  (0,0) | (0,1) (1,0) | (0,2) (1,1) (2,0)
//
// Elementary functions are computed by composing the univariate Taylor
// series of f around the constant term with the zero-constant part of the
// argument, which is exact at the stored order.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace finsler {

inline constexpr int kMaxJetOrder = 4;
inline constexpr int kMaxJetVars = 21;  // key packing uses 3 bits per variable

// Domain error during jet evaluation (sqrt/log of a nonpositive value,
// division by a jet whose value part vanishes, ...).  Signals that an
// evaluation hit a singular locus such as y = 0 for F = |y|.
class JetError : public std::runtime_error {
 public:
  JetError(std::string op, double value, const std::string& what)
      : std::runtime_error(what), op_(std::move(op)), value_(value) {}
  const std::string& op() const { return op_; }
  double offending_value() const { return value_; }

 private:
  std::string op_;
  double value_;
};

namespace detail {

struct JetLayout {
  int num_vars = 0;
  int order = 0;
  int size = 0;
  // exps[i*num_vars + v] = exponent of variable v in multi-index i
  std::vector<std::uint8_t> exps;
  std::vector<std::uint8_t> deg;
  std::vector<double> factorial;  // multi-index factorial a!
  std::unordered_map<std::uint64_t, int> index_of;
  struct ProdEntry {
    std::int32_t i, j, k;  // coeff[k] += a[i] * b[j]
  };
  std::vector<ProdEntry> prod;

  std::uint64_t key(const std::uint8_t* e) const {
    std::uint64_t k = 0;
    for (int v = 0; v < num_vars; ++v) k |= std::uint64_t(e[v]) << (3 * v);
    return k;
  }
  const std::uint8_t* exp(int i) const { return exps.data() + std::size_t(i) * num_vars; }
};

inline void enumerate_degree(int num_vars, int degree, std::vector<std::uint8_t>& tuple,
                             int pos, int remaining, std::vector<std::uint8_t>& out) {
  if (pos == num_vars - 1) {
    tuple[pos] = static_cast<std::uint8_t>(remaining);
    out.insert(out.end(), tuple.begin(), tuple.end());
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    tuple[pos] = static_cast<std::uint8_t>(v);
    enumerate_degree(num_vars, degree, tuple, pos + 1, remaining - v, out);
  }
}

inline std::unique_ptr<JetLayout> build_layout(int num_vars, int order) {
  auto lay = std::make_unique<JetLayout>();
  lay->num_vars = num_vars;
  lay->order = order;
  std::vector<std::uint8_t> tuple(num_vars);
  for (int d = 0; d <= order; ++d)
    enumerate_degree(num_vars, d, tuple, 0, d, lay->exps);
  lay->size = static_cast<int>(lay->exps.size() / num_vars);
  lay->deg.resize(lay->size);
  lay->factorial.resize(lay->size);
  lay->index_of.reserve(lay->size * 2);
  for (int i = 0; i < lay->size; ++i) {
    const std::uint8_t* e = lay->exp(i);
    int d = 0;
    double f = 1.0;
    for (int v = 0; v < num_vars; ++v) {
      d += e[v];
      for (int q = 2; q <= e[v]; ++q) f *= q;
    }
    lay->deg[i] = static_cast<std::uint8_t>(d);
    lay->factorial[i] = f;
    lay->index_of.emplace(lay->key(e), i);
  }
  std::vector<std::uint8_t> sum(num_vars);
  for (int i = 0; i < lay->size; ++i) {
    for (int j = 0; j < lay->size; ++j) {
      if (lay->deg[i] + lay->deg[j] > order) continue;
      const std::uint8_t *ei = lay->exp(i), *ej = lay->exp(j);
      for (int v = 0; v < num_vars; ++v) sum[v] = static_cast<std::uint8_t>(ei[v] + ej[v]);
      int k = lay->index_of.at(lay->key(sum.data()));
      lay->prod.push_back({i, j, k});
    }
  }
  return lay;
}

inline const JetLayout& layout(int num_vars, int order) {
  if (num_vars < 1 || num_vars > kMaxJetVars)
    throw std::invalid_argument("jet: num_vars must be in [1, " + std::to_string(kMaxJetVars) + "]");
  if (order < 0 || order > kMaxJetOrder)
    throw std::invalid_argument("jet: order must be in [0, " + std::to_string(kMaxJetOrder) + "]");
  static std::mutex mu;
  static std::unordered_map<int, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  int key = num_vars * (kMaxJetOrder + 1) + order;
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_layout(num_vars, order)).first;
  return *it->second;
}

}  // namespace detail

class Jet {
 public:
  Jet() : Jet(constant(0.0, 1, 0)) {}

  static Jet constant(double value, int num_vars, int order) {
    Jet j(&detail::layout(num_vars, order));
    j.c_[0] = value;
    return j;
  }

  // The jet of the coordinate function z^index expanded at `value`.
  static Jet variable(int index, double value, int num_vars, int order) {
    if (index < 0 || index >= num_vars)
      throw std::invalid_argument("jet: variable index out of range");
    Jet j = constant(value, num_vars, order);
    if (order >= 1) {
      std::array<std::uint8_t, kMaxJetVars> e{};
      e[index] = 1;
      j.c_[j.lay_->index_of.at(j.lay_->key(e.data()))] = 1.0;
    }
    return j;
  }

  int num_vars() const { return lay_->num_vars; }
  int order() const { return lay_->order; }
  int size() const { return lay_->size; }
  double value() const { return c_[0]; }
  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }

  int index_of(std::span<const int> multi_index) const {
    if (static_cast<int>(multi_index.size()) != num_vars())
      throw std::invalid_argument("jet: multi-index arity mismatch");
    std::array<std::uint8_t, kMaxJetVars> e{};
    int d = 0;
    for (int v = 0; v < num_vars(); ++v) {
      if (multi_index[v] < 0) throw std::invalid_argument("jet: negative multi-index entry");
      e[v] = static_cast<std::uint8_t>(multi_index[v]);
      d += multi_index[v];
    }
    if (d > order()) throw std::invalid_argument("jet: multi-index degree exceeds jet order");
    return lay_->index_of.at(lay_->key(e.data()));
  }

  // Taylor coefficient at a multi-index.
  double coeff(std::span<const int> multi_index) const { return c_[index_of(multi_index)]; }

  // True mixed partial: multi_index! * coefficient.
  double partial(std::span<const int> multi_index) const {
    int i = index_of(multi_index);
    return c_[i] * lay_->factorial[i];
  }

  // Jet of d/dz_var, one order lower.
  Jet derivative(int var) const {
    if (var < 0 || var >= num_vars()) throw std::invalid_argument("jet: derivative var out of range");
    if (order() < 1) throw std::invalid_argument("jet: derivative of an order-0 jet");
    const detail::JetLayout& out_lay = detail::layout(num_vars(), order() - 1);
    Jet out(&out_lay);
    std::array<std::uint8_t, kMaxJetVars> e{};
    for (int i = 0; i < out_lay.size; ++i) {
      const std::uint8_t* a = out_lay.exp(i);
      for (int v = 0; v < num_vars(); ++v) e[v] = a[v];
      e[var] = static_cast<std::uint8_t>(e[var] + 1);
      out.c_[i] = (a[var] + 1) * c_[lay_->index_of.at(lay_->key(e.data()))];
    }
    return out;
  }

  // Embed into a larger variable space: source variable v becomes target
  // variable var_map[v]; all other target variables get exponent zero.
  Jet remapped(int new_num_vars, std::span<const int> var_map) const {
    if (static_cast<int>(var_map.size()) != num_vars())
      throw std::invalid_argument("jet: var_map arity mismatch");
    const detail::JetLayout& out_lay = detail::layout(new_num_vars, order());
    Jet out(&out_lay);
    std::array<std::uint8_t, kMaxJetVars> e{};
    for (int i = 0; i < lay_->size; ++i) {
      const std::uint8_t* a = lay_->exp(i);
      e.fill(0);
      for (int v = 0; v < num_vars(); ++v) {
        int t = var_map[v];
        if (t < 0 || t >= new_num_vars) throw std::invalid_argument("jet: var_map target out of range");
        e[t] = a[v];
      }
      out.c_[out_lay.index_of.at(out_lay.key(e.data()))] = c_[i];
    }
    return out;
  }

  // Truncate to a lower order (coefficients beyond it are dropped).
  Jet truncated(int new_order) const {
    if (new_order > order()) throw std::invalid_argument("jet: cannot truncate upward");
    if (new_order == order()) return *this;
    const detail::JetLayout& out_lay = detail::layout(num_vars(), new_order);
    Jet out(&out_lay);
    for (int i = 0; i < out_lay.size; ++i) out.c_[i] = c_[i];  // shared prefix enumeration
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (double& v : out.c_) v = -v;
    return out;
  }

  Jet& operator+=(const Jet& o) {
    check_same(o);
    for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_same(o);
    for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Jet& operator/=(double s) {
    for (double& v : c_) v /= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a);

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_same(b);
    Jet out(a.lay_);
    for (const auto& p : a.lay_->prod) out.c_[p.k] += a.c_[p.i] * b.c_[p.j];
    return out;
  }
  friend Jet operator/(const Jet& a, const Jet& b);

  // f(g) where c[k] = f^(k)(g.value())/k!, k = 0..order.  Exact at the
  // stored order because (g - g0)^k has no terms below degree k.
  friend Jet compose_series(const Jet& g, std::span<const double> c) {
    if (static_cast<int>(c.size()) != g.order() + 1)
      throw std::invalid_argument("jet: compose_series needs order+1 coefficients");
    Jet h = g;
    h.c_[0] = 0.0;
    Jet out = Jet::constant(c[g.order()], g.num_vars(), g.order());
    for (int k = g.order() - 1; k >= 0; --k) {
      out = out * h;
      out.c_[0] += c[k];
    }
    return out;
  }

 private:
  explicit Jet(const detail::JetLayout* lay) : lay_(lay), c_(lay->size, 0.0) {}
  void check_same(const Jet& o) const {
    if (lay_ != o.lay_) throw std::invalid_argument("jet: operand order/num_vars mismatch");
  }

  const detail::JetLayout* lay_;
  std::vector<double> c_;
};

inline Jet reciprocal(const Jet& b) {
  double u0 = b.value();
  if (u0 == 0.0) throw JetError("div", 0.0, "jet division by zero constant term");
  std::vector<double> c(b.order() + 1);
  c[0] = 1.0 / u0;
  for (int k = 1; k <= b.order(); ++k) c[k] = -c[k - 1] / u0;
  return compose_series(b, c);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

inline Jet sqrt(const Jet& g) {
  double u0 = g.value();
  if (u0 <= 0.0) throw JetError("sqrt", u0, "jet sqrt of a nonpositive value");
  std::vector<double> c(g.order() + 1);
  c[0] = std::sqrt(u0);
  for (int k = 1; k <= g.order(); ++k) c[k] = c[k - 1] * (0.5 - (k - 1)) / (k * u0);
  return compose_series(g, c);
}

inline Jet exp(const Jet& g) {
  std::vector<double> c(g.order() + 1);
  c[0] = std::exp(g.value());
  for (int k = 1; k <= g.order(); ++k) c[k] = c[k - 1] / k;
  return compose_series(g, c);
}

inline Jet log(const Jet& g) {
  double u0 = g.value();
  if (u0 <= 0.0) throw JetError("log", u0, "jet log of a nonpositive value");
  std::vector<double> c(g.order() + 1);
  c[0] = std::log(u0);
  double p = 1.0;  // (-1)^(k-1) / u0^k
  for (int k = 1; k <= g.order(); ++k) {
    p /= u0;
    c[k] = ((k % 2) ? p : -p) / k;
  }
  return compose_series(g, c);
}

inline Jet sin(const Jet& g) {
  double u0 = g.value();
  const double cyc[4] = {std::sin(u0), std::cos(u0), -std::sin(u0), -std::cos(u0)};
  std::vector<double> c(g.order() + 1);
  double fact = 1.0;
  for (int k = 0; k <= g.order(); ++k) {
    if (k > 0) fact *= k;
    c[k] = cyc[k % 4] / fact;
  }
  return compose_series(g, c);
}

inline Jet cos(const Jet& g) {
  double u0 = g.value();
  const double cyc[4] = {std::cos(u0), -std::sin(u0), -std::cos(u0), std::sin(u0)};
  std::vector<double> c(g.order() + 1);
  double fact = 1.0;
  for (int k = 0; k <= g.order(); ++k) {
    if (k > 0) fact *= k;
    c[k] = cyc[k % 4] / fact;
  }
  return compose_series(g, c);
}

// Integer power by repeated multiplication; negative exponents go through
// the reciprocal and require a nonzero constant term.
inline Jet pow_int(const Jet& g, int exponent) {
  if (exponent < 0) return reciprocal(pow_int(g, -exponent));
  Jet acc = Jet::constant(1.0, g.num_vars(), g.order());
  Jet base = g;
  int e = exponent;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return acc;
}

// A point of M or TM: the leading base_dim values are base coordinates x,
// the remaining ones fibre coordinates y.
struct JetPoint {
  std::vector<double> values;
  int base_dim = 0;

  static JetPoint base(std::vector<double> x) {
    JetPoint p;
    p.base_dim = static_cast<int>(x.size());
    p.values = std::move(x);
    return p;
  }
  static JetPoint tangent(std::vector<double> x, std::vector<double> y) {
    JetPoint p;
    p.base_dim = static_cast<int>(x.size());
    p.values = std::move(x);
    p.values.insert(p.values.end(), y.begin(), y.end());
    return p;
  }

  int dim() const { return static_cast<int>(values.size()); }
  int fibre_dim() const { return dim() - base_dim; }

  std::vector<Jet> coordinate_jets(int order) const {
    std::vector<Jet> out;
    out.reserve(values.size());
    for (int i = 0; i < dim(); ++i) out.push_back(Jet::variable(i, values[i], dim(), order));
    return out;
  }
};

}  // namespace finsler
