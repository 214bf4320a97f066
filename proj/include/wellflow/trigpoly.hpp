#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace wellflow {

using Vec = Eigen::VectorXd;
using Freq = std::vector<int>;  // integer frequency vector in Z^n

// Trigonometric polynomial in n torus variables,
//
//   f(y) = sum_k  c_k cos(2 pi k.y) + s_k sin(2 pi k.y),
//
// with frequencies stored on the canonical half-lattice: the first nonzero
// entry of k is positive (cos is even, sin is odd, so this loses nothing).
// The coefficient ring C is double for numerics and mpq_class for the exact
// paths (LP constraint assembly, metric duality).
template <class C>
class TrigPolyT {
 public:
  struct CS {
    C c{};
    C s{};
  };
  using TermMap = std::map<Freq, CS>;

  explicit TrigPolyT(int dim = 1) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("TrigPoly: dim must be >= 1");
  }

  static TrigPolyT constant(int dim, const C& v) {
    TrigPolyT f(dim);
    f.add_term(Freq(dim, 0), v, C{});
    return f;
  }

  // f += c cos(2 pi k.y) + s sin(2 pi k.y); k need not be canonical.
  void add_term(Freq k, C c, C s) {
    if (static_cast<int>(k.size()) != dim_)
      throw std::invalid_argument("TrigPoly: frequency dimension mismatch");
    int lead = 0;
    for (int v : k) {
      if (v != 0) {
        lead = v;
        break;
      }
    }
    if (lead == 0) {
      // sin(0) = 0
      auto& t = terms_[std::move(k)];
      t.c += c;
      return;
    }
    if (lead < 0) {
      for (int& v : k) v = -v;
      s = -s;
    }
    auto& t = terms_[std::move(k)];
    t.c += c;
    t.s += s;
  }

  int dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // max |k|_inf over stored frequencies
  int degree() const {
    int d = 0;
    for (const auto& [k, cs] : terms_)
      for (int v : k) d = std::max(d, std::abs(v));
    return d;
  }

  TrigPolyT& operator+=(const TrigPolyT& o) {
    check_dim(o);
    for (const auto& [k, cs] : o.terms_) {
      auto& t = terms_[k];
      t.c += cs.c;
      t.s += cs.s;
    }
    return *this;
  }
  TrigPolyT& operator-=(const TrigPolyT& o) {
    check_dim(o);
    for (const auto& [k, cs] : o.terms_) {
      auto& t = terms_[k];
      t.c -= cs.c;
      t.s -= cs.s;
    }
    return *this;
  }
  friend TrigPolyT operator+(TrigPolyT a, const TrigPolyT& b) { return a += b; }
  friend TrigPolyT operator-(TrigPolyT a, const TrigPolyT& b) { return a -= b; }

  TrigPolyT scaled(const C& a) const {
    TrigPolyT r(dim_);
    for (const auto& [k, cs] : terms_) r.add_term(k, a * cs.c, a * cs.s);
    return r;
  }

  // Product via product-to-sum identities; output degree <= deg(a)+deg(b).
  friend TrigPolyT operator*(const TrigPolyT& a, const TrigPolyT& b) {
    a.check_dim(b);
    TrigPolyT r(a.dim_);
    const C half = C(1) / C(2);
    Freq sum(a.dim_), dif(a.dim_);
    for (const auto& [k, u] : a.terms_) {
      for (const auto& [l, v] : b.terms_) {
        for (int i = 0; i < a.dim_; ++i) {
          sum[i] = k[i] + l[i];
          dif[i] = k[i] - l[i];
        }
        // cosA cosB, cosA sinB, sinA cosB, sinA sinB expansions
        r.add_term(sum, half * (u.c * v.c - u.s * v.s),
                   half * (u.c * v.s + u.s * v.c));
        r.add_term(dif, half * (u.c * v.c + u.s * v.s),
                   half * (u.s * v.c - u.c * v.s));
      }
    }
    return r;
  }

  // d/dy_i with the 2*pi factor tracked separately: returns g with
  // df/dy_i = 2*pi * g.  Keeps the exact paths pi-free.
  TrigPolyT deriv_over_two_pi(int i) const {
    TrigPolyT r(dim_);
    for (const auto& [k, cs] : terms_) {
      if (k[i] == 0) continue;
      const C f = C(k[i]);
      // d[c cos + s sin] = 2 pi k_i (s cos - c sin)
      r.add_term(k, f * cs.s, -(f * cs.c));
    }
    return r;
  }

  // Numeric conveniences (double coefficients only).
  double eval(const Vec& y) const
    requires std::is_same_v<C, double>
  {
    if (y.size() != dim_) throw std::invalid_argument("TrigPoly::eval: dim");
    double acc = 0.0;
    for (const auto& [k, cs] : terms_) {
      double ph = 0.0;
      for (int i = 0; i < dim_; ++i) ph += k[i] * y[i];
      ph *= 2.0 * std::numbers::pi;
      acc += cs.c * std::cos(ph) + cs.s * std::sin(ph);
    }
    return acc;
  }

  TrigPolyT deriv(int i) const
    requires std::is_same_v<C, double>
  {
    return deriv_over_two_pi(i).scaled(2.0 * std::numbers::pi);
  }

  // sum_k |c_k| + |s_k|
  double coeff_l1() const
    requires std::is_same_v<C, double>
  {
    double a = 0.0;
    for (const auto& [k, cs] : terms_) a += std::abs(cs.c) + std::abs(cs.s);
    return a;
  }

  double max_abs_coeff() const
    requires std::is_same_v<C, double>
  {
    double a = 0.0;
    for (const auto& [k, cs] : terms_)
      a = std::max(a, std::max(std::abs(cs.c), std::abs(cs.s)));
    return a;
  }

  // sup |df/dy_i|  <=  2 pi sum_k |k_i| (|c_k| + |s_k|)
  double grad_bound(int i) const
    requires std::is_same_v<C, double>
  {
    double a = 0.0;
    for (const auto& [k, cs] : terms_)
      a += std::abs(k[i]) * (std::abs(cs.c) + std::abs(cs.s));
    return 2.0 * std::numbers::pi * a;
  }

  TrigPolyT pruned(double tol = 0.0) const
    requires std::is_same_v<C, double>
  {
    TrigPolyT r(dim_);
    for (const auto& [k, cs] : terms_)
      if (std::abs(cs.c) > tol || std::abs(cs.s) > tol)
        r.terms_[k] = cs;
    return r;
  }

  // Composition with the affine torus map y -> A y + b, A integer-valued.
  // cos(2 pi k.(Ay+b)) = cos(ph) cos(2 pi (A^T k).y) - sin(ph) sin(...),
  // ph = 2 pi k.b, so the result is again a trig polynomial.
  TrigPolyT compose_affine(const Eigen::MatrixXi& A, const Vec& b) const
    requires std::is_same_v<C, double>
  {
    if (A.rows() != dim_ || b.size() != dim_)
      throw std::invalid_argument("TrigPoly::compose_affine: shape mismatch");
    const int nsrc = static_cast<int>(A.cols());
    TrigPolyT r(nsrc);
    for (const auto& [k, cs] : terms_) {
      Freq kk(nsrc, 0);
      double ph = 0.0;
      for (int i = 0; i < dim_; ++i) {
        ph += k[i] * b[i];
        for (int j = 0; j < nsrc; ++j) kk[j] += A(i, j) * k[i];
      }
      ph *= 2.0 * std::numbers::pi;
      const double cp = std::cos(ph), sp = std::sin(ph);
      r.add_term(kk, cs.c * cp + cs.s * sp, cs.s * cp - cs.c * sp);
    }
    return r;
  }

  // coefficient pair at the given frequency (any sign convention)
  CS coeff(Freq k) const {
    int lead = 0;
    for (int v : k)
      if (v != 0) {
        lead = v;
        break;
      }
    const bool flip = lead < 0;
    if (flip)
      for (int& v : k) v = -v;
    auto it = terms_.find(k);
    if (it == terms_.end()) return CS{};
    CS r = it->second;
    if (flip) r.s = -r.s;
    return r;
  }

 private:
  void check_dim(const TrigPolyT& o) const {
    if (o.dim_ != dim_)
      throw std::invalid_argument("TrigPoly: dimension mismatch");
  }

  int dim_;
  TermMap terms_;
};

using TrigPoly = TrigPolyT<double>;

}  // namespace wellflow
