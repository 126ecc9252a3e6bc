// Copyright 2026 rsjam contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oracles.hpp"
#include "rsjam/conic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rsjam;

namespace {

CMat diag(std::initializer_list<double> v) {
  CMat D = CMat::Zero(v.size(), v.size());
  int i = 0;
  for (double x : v) D(i, i) = x, ++i;
  return D;
}

}  // namespace

TEST_SUITE("conic") {
  TEST_CASE("eig of a diagonal matrix") {
    auto r = hermitian_eig(diag({3, 1, 2}));
    CHECK(r.values(0) == 3.0);
    CHECK(r.values(1) == 2.0);
    CHECK(r.values(2) == 1.0);
    CHECK(std::abs(r.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(r.vectors(2, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(r.vectors(1, 2)) == doctest::Approx(1.0));
  }

  TEST_CASE("eig of identity uses the canonical basis") {
    auto r = hermitian_eig(CMat::Identity(3, 3));
    CHECK((r.values - RVec::Ones(3)).norm() == 0.0);
    CHECK((r.vectors - CMat::Identity(3, 3)).norm() < 1e-15);
  }

  TEST_CASE("eig of random matrices") {
    RandomStream rng(31);
    for (int t = 0; t < 50; ++t) {
      CMat A = oracle::random_hermitian(rng, 4);
      auto r = hermitian_eig(A);
      CMat rec = r.vectors * r.values.asDiagonal() * r.vectors.adjoint();
      CHECK((rec - A).norm() <= 1e-9 * A.norm());
      CHECK((r.vectors.adjoint() * r.vectors - CMat::Identity(4, 4)).norm() <= 1e-10);
      for (int i = 1; i < 4; ++i) CHECK(r.values(i) <= r.values(i - 1));
      CHECK((r.values - oracle::eigenvalues_general(A)).norm() < 1e-10);

      CMat B = oracle::random_hermitian(rng, 2);
      auto e = oracle::eig2x2(B(0, 0).real(), B(0, 1), B(1, 1).real());
      auto rb = hermitian_eig(B);
      CHECK(rb.values(0) == doctest::Approx(e[0]).epsilon(1e-12));
      CHECK(rb.values(1) == doctest::Approx(e[1]).epsilon(1e-12));
    }
    CHECK_THROWS(hermitian_eig(CMat::Random(3, 3)));
  }

  TEST_CASE("numerical rank") {
    RVec v(4);
    v << 5.0, 1.0, 1e-12, 0.0;
    CHECK(numerical_rank(v) == 2);
    CHECK(numerical_rank(RVec::Zero(3)) == 0);
  }

  TEST_CASE("sdp: smallest eigenvalue program") {
    SdpProblem p;
    p.C = diag({2, 5});
    p.constraints.push_back({CMat::Identity(2, 2), Sense::eq, 1.0});
    auto s = sdp_solve(p);
    REQUIRE(s.status == SdpStatus::optimal);
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-7));
    CHECK((s.S - diag({1, 0})).norm() < 1e-6);
  }

  TEST_CASE("sdp: infeasible trace bounds") {
    SdpProblem p;
    p.C = CMat::Zero(2, 2);
    p.constraints.push_back({CMat::Identity(2, 2), Sense::le, 1.0});
    p.constraints.push_back({diag({1, 0}), Sense::ge, 2.0});
    auto s = sdp_solve(p);
    CHECK(s.status == SdpStatus::infeasible);
  }

  TEST_CASE("sdp: random 3x3 with one trace equality") {
    RandomStream rng(32);
    for (int t = 0; t < 10; ++t) {
      CMat C = oracle::random_hermitian(rng, 3);
      CMat A = CMat::Identity(3, 3) + oracle::random_psd(rng, 3, 2);
      SdpProblem p;
      p.C = C;
      p.constraints.push_back({A, Sense::eq, 1.0});
      auto s = sdp_solve(p);
      REQUIRE(s.status == SdpStatus::optimal);
      // The optimum is attained at rank one: min over x of x^H C x subject to x^H A x = 1.
      double exact = oracle::eigenvalues_general(A.inverse() * C).minCoeff();
      CHECK(std::abs(s.objective - exact) < 1e-5);
      // Brute force over random rank-one points and their convex combinations.
      double brute = 1e300;
      std::vector<CMat> pts;
      for (int i = 0; i < 20000; ++i) {
        CVec x = rng.cnormal_vector(3);
        x /= std::sqrt(x.dot(A * x).real());
        brute = std::min(brute, x.dot(C * x).real());
      }
      CHECK(s.objective <= brute + 1e-9);
      CHECK(brute - s.objective < 0.1);
    }
  }

  TEST_CASE("sdp: blocks with a coupling constraint") {
    BlockSdp bp;
    bp.dims = {2, 1};
    bp.C = {diag({3, 4}), diag({1.5})};
    BlockConstraint c;
    HermTerm t0;
    t0.block = 0;
    t0.sparse = {{0, 0, 1.0}, {1, 1, 1.0}};
    HermTerm t1;
    t1.block = 1;
    t1.dense = diag({1});
    c.terms = {t0, t1};
    c.sense = Sense::eq;
    c.b = 2.0;
    bp.constraints.push_back(c);
    auto s = sdp_solve_blocks(bp);
    REQUIRE(s.status == SdpStatus::optimal);
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(s.X[1](0, 0).real() == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(constraint_value(c, s.X) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(term_dot(t0, s.X[0]) == doctest::Approx(s.X[0].trace().real()));
  }

  TEST_CASE("sdp: sparse and dense terms agree") {
    RandomStream rng(33);
    CMat A = oracle::random_hermitian(rng, 3);
    HermTerm d;
    d.dense = A;
    HermTerm s;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) s.sparse.emplace_back(i, j, A(i, j));
    CMat X = oracle::random_psd(rng, 3, 3);
    CHECK(term_dot(s, X) == doctest::Approx(term_dot(d, X)).epsilon(1e-12));
    CHECK(term_dot(d, X) == doctest::Approx((A * X).trace().real()).epsilon(1e-12));
  }

  TEST_CASE("rank one extraction of an exact rank one matrix") {
    RandomStream rng(34);
    CVec f = rng.cnormal_vector(4);
    CMat S = f * f.adjoint();
    RankOneContext ctx;
    auto r = rank_one_extract(S, ctx, 0, rng);
    CHECK(r.candidate == 0);
    CHECK((r.x * r.x.adjoint() - S).norm() <= 1e-8);
    CHECK(r.quality == doctest::Approx(0.25));
    RandomStream a(1), b(2);
    CHECK(rank_one_extract(S, ctx, 0, a).x == rank_one_extract(S, ctx, 0, b).x);
  }

  TEST_CASE("randomized extraction against a grid search") {
    CMat S = 0.5 * CMat::Identity(2, 2);
    SdpProblem p;
    p.C = CMat::Zero(2, 2);
    p.constraints.push_back({diag({1.0, 0.2}), Sense::ge, 0.9});
    RankOneContext ctx;
    ctx.problem = &p;
    ctx.power_cap = 1.0;
    RandomStream rng(35);
    auto r = rank_one_extract(S, ctx, 100, rng);
    // Grid over unit vectors (cos t, e^{i phi} sin t) in 1 degree steps.
    double best = 1e300;
    const double deg = std::numbers::pi / 180.0;
    for (int ti = 0; ti <= 90; ++ti)
      for (int pi = 0; pi < 360; ++pi) {
        CVec x(2);
        x << std::cos(ti * deg), std::polar(std::sin(ti * deg), pi * deg);
        best = std::min(best, quadratic_violation(p, x));
      }
    CHECK(r.violation <= best + 1e-12);
    CHECK(r.x.squaredNorm() <= 1.0 + 1e-12);
  }

  TEST_CASE("prox solve") {
    CVec a(3);
    a << 1.0, cd(0, 2), -3.0;
    CHECK((prox_quadratic_solve(CMat::Zero(3, 3), CVec::Zero(3), a, 2.0) - a).norm() < 1e-15);
    RMat H(1, 1);
    H << 2.0;
    RVec q = RVec::Zero(1), ar(1);
    ar << 2.0;
    CHECK(prox_quadratic_solve(H, q, ar, 1.0)(0) == doctest::Approx(2.0 / 3.0));

    RandomStream rng(36);
    CMat Hc = oracle::random_psd(rng, 8, 5);
    CVec qc = rng.cnormal_vector(8), ac = rng.cnormal_vector(8);
    const double zeta = 0.7;
    CVec x = prox_quadratic_solve(Hc, qc, ac, zeta);
    CMat lhs = Hc + zeta * CMat::Identity(8, 8);
    CVec rhs = zeta * ac - qc;
    CHECK((lhs * x - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    auto obj = [&](const CVec& z) {
      return 0.5 * z.dot(Hc * z).real() + qc.dot(z).real() + 0.5 * zeta * (z - ac).squaredNorm();
    };
    const double f0 = obj(x);
    int worse = 0;
    for (int i = 0; i < 10000; ++i) {
      CVec d = rng.cnormal_vector(8);
      d *= 1e-3 / d.norm();
      worse += obj(x + d) >= f0;
    }
    CHECK(worse == 10000);
  }
}
