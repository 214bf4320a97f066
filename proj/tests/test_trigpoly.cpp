#include <doctest.h>
#include <gmpxx.h>

#include <numbers>
#include <random>

#include "wellflow/trigpoly.hpp"

using namespace wellflow;

TEST_SUITE_BEGIN("trigpoly");

TEST_CASE("product-to-sum keeps evaluation exact") {
  TrigPoly f(2), g(2);
  f.add_term({1, 0}, 0.7, -0.2);
  f.add_term({0, 2}, 0.0, 1.3);
  g.add_term({1, -1}, 0.5, 0.5);
  g.add_term({0, 0}, -1.0, 0.0);
  const TrigPoly h = f * g;

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Vec y(2);
    y << u(rng), u(rng);
    CHECK(h.eval(y) == doctest::Approx(f.eval(y) * g.eval(y)).epsilon(1e-12));
  }
}

TEST_CASE("canonical half-lattice identifies mirrored frequencies") {
  TrigPoly f(2);
  f.add_term({-1, 2}, 1.0, 0.5);   // stored as (1,-2) with sin negated
  f.add_term({1, -2}, 1.0, -0.5);  // same canonical term
  REQUIRE(f.terms().size() == 1);
  const auto& cs = f.terms().begin()->second;
  CHECK(cs.c == 2.0);
  CHECK(cs.s == -1.0);
}

TEST_CASE("deriv_over_two_pi is the exact derivative / 2 pi") {
  TrigPoly f(2);
  f.add_term({2, 1}, 0.25, -0.75);
  const TrigPoly d0 = f.deriv_over_two_pi(0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    Vec y(2);
    y << u(rng), u(rng);
    Vec yp = y, ym = y;
    yp[0] += h;
    ym[0] -= h;
    const double fd = (f.eval(yp) - f.eval(ym)) / (2.0 * h);
    CHECK(2.0 * std::numbers::pi * d0.eval(y) ==
          doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("rational coefficients: derivative stays pi-free and exact") {
  TrigPolyT<mpq_class> f(1);
  f.add_term({3}, mpq_class(1, 2), mpq_class(-2, 7));
  const auto d = f.deriv_over_two_pi(0);
  // (1/2 cos + (-2/7) sin)' / 2pi = 3(1/2 (-sin) + (-2/7) cos)
  const auto& cs = d.terms().at(Freq{3});
  CHECK(cs.c == mpq_class(-6, 7));
  CHECK(cs.s == mpq_class(-3, 2));
}

TEST_CASE("degree tracks the max infinity norm of frequencies") {
  TrigPoly f(3);
  CHECK(f.degree() == 0);
  f.add_term({1, -2, 0}, 1.0, 0.0);
  CHECK(f.degree() == 2);
}

TEST_SUITE_END();
