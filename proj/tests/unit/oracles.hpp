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

// Reference computations for the tests. Nothing here calls into the library
// except the random stream and the plain data types.

#pragma once

#include "rsjam/metrics.hpp"
#include "rsjam/rng.hpp"
#include "rsjam/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using rsjam::cd;
using rsjam::CMat;
using rsjam::CVec;
using rsjam::RVec;

// Eigenvalues through the general complex Schur form, sorted descending.
inline RVec eigenvalues_general(const CMat& A) {
  Eigen::ComplexEigenSolver<CMat> es(A, false);
  RVec v = es.eigenvalues().real();
  std::sort(v.data(), v.data() + v.size(), [](double a, double b) { return a > b; });
  return v;
}

inline double lambda_max(const CMat& A) { return eigenvalues_general(A)(0); }

// Roots of the characteristic polynomial of [[a, b], [conj b, c]], descending.
inline std::array<double, 2> eig2x2(double a, cd b, double c) {
  double m = 0.5 * (a + c);
  double r = std::sqrt(0.25 * (a - c) * (a - c) + std::norm(b));
  return {m + r, m - r};
}

// Unit eigenvector of [[a, b], [conj b, c]] for eigenvalue lam.
inline CVec eigvec2x2(double a, cd b, double c, double lam) {
  CVec v(2);
  if (std::abs(b) > 1e-300) {
    v << b, lam - a;
  } else {
    v << (std::abs(a - lam) <= std::abs(c - lam) ? 1.0 : 0.0), (std::abs(a - lam) <= std::abs(c - lam) ? 0.0 : 1.0);
  }
  return v / v.norm();
}

inline CMat random_psd(rsjam::RandomStream& rng, int d, int rank) {
  CMat G = rng.cnormal_matrix(d, rank);
  CMat A = G * G.adjoint();
  return 0.5 * (A + A.adjoint());
}

inline CMat random_hermitian(rsjam::RandomStream& rng, int d) {
  CMat G = rng.cnormal_matrix(d, d);
  return 0.5 * (G + G.adjoint());
}

inline rsjam::PrecoderSlice random_slice(rsjam::RandomStream& rng, int Nt, int K, int L, double scale = 1.0) {
  rsjam::PrecoderSlice s;
  s.p_c = scale * rng.cnormal_vector(Nt);
  for (int k = 0; k < K; ++k) s.p.push_back(scale * rng.cnormal_vector(Nt));
  for (int l = 0; l < L; ++l) s.f.push_back(scale * rng.cnormal_vector(Nt));
  return s;
}

// Inner product h^H x written out elementwise.
inline cd inner(const CVec& h, const CVec& x) {
  cd acc = 0.0;
  for (int i = 0; i < h.size(); ++i) acc += std::conj(h(i)) * x(i);
  return acc;
}

// SINR of the common stream (common = true) or private stream k, term by term.
inline double sinr(const CVec& h, const rsjam::PrecoderSlice& s, bool common, int k, double N0) {
  double num = common ? std::norm(inner(h, s.p_c)) : std::norm(inner(h, s.p[k]));
  double den = N0;
  for (std::size_t j = 0; j < s.p.size(); ++j)
    if (common || static_cast<int>(j) != k) den += std::norm(inner(h, s.p[j]));
  for (const auto& f : s.f) den += std::norm(inner(h, f));
  return num / den;
}

// Sum of x^H A x over every stream of the slice.
inline double quad_sum(const CMat& A, const rsjam::PrecoderSlice& s) {
  auto q = [&](const CVec& x) {
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i)
      for (int j = 0; j < x.size(); ++j) acc += (std::conj(x(i)) * A(i, j) * x(j)).real();
    return acc;
  };
  double t = q(s.p_c);
  for (const auto& x : s.p) t += q(x);
  for (const auto& x : s.f) t += q(x);
  return t;
}

inline double qpsk_ber(double snr) { return 0.5 * std::erfc(std::sqrt(snr / 2.0)); }

}  // namespace oracle
