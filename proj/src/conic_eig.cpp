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

#include "rsjam/conic.hpp"

#include <cmath>

namespace rsjam {

EigResult hermitian_eig(const CMat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("hermitian_eig: matrix not square");
  const int d = static_cast<int>(A.rows());
  EigResult out;
  if (d == 0) return out;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("hermitian_eig: matrix not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (A + A.adjoint()));
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: no convergence");
  // Eigen returns ascending order.
  RVec ev = es.eigenvalues().reverse();
  CMat V = es.eigenvectors().rowwise().reverse();

  const double lam_scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  const double cluster_tol = 1e-9 * lam_scale;
  out.values = ev;
  out.vectors.resize(d, d);

  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d && ev(start) - ev(end) <= cluster_tol) ++end;
    // Projector onto the cluster eigenspace.
    CMat B = V.middleCols(start, end - start);
    CMat P = B * B.adjoint();
    for (int col = start; col < end; ++col) {
      int pick = -1;
      double best = 0.0;
      for (int j = 0; j < d; ++j) {
        double nrm = P.col(j).norm();
        if (nrm > 1e-6) {
          pick = j;
          best = nrm;
          break;
        }
      }
      if (pick < 0) {
        // Only reachable through roundoff; fall back to the solver's vector.
        out.vectors.col(col) = V.col(col);
        continue;
      }
      CVec v = P.col(pick) / best;
      // Entry `pick` of P e_pick / ||P e_pick|| equals ||P e_pick|| > 0 by construction.
      out.vectors.col(col) = v;
      P -= v * v.adjoint();
    }
    // Re-orthonormalize the cluster against roundoff.
    for (int col = start; col < end; ++col) {
      CVec v = out.vectors.col(col);
      for (int prev = start; prev < col; ++prev) v -= out.vectors.col(prev) * out.vectors.col(prev).dot(v);
      out.vectors.col(col) = v / v.norm();
    }
    start = end;
  }
  return out;
}

int numerical_rank(const RVec& values, double rel) {
  if (values.size() == 0) return 0;
  double vmax = values.maxCoeff();
  if (vmax <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < values.size(); ++i)
    if (values(i) > rel * vmax) ++r;
  return r;
}

CVec prox_quadratic_solve(const CMat& H, const CVec& q, const CVec& a, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("prox_quadratic_solve: zeta must be positive");
  const auto n = a.size();
  if (H.rows() != n || H.cols() != n || q.size() != n)
    throw std::invalid_argument("prox_quadratic_solve: dimension mismatch");
  CMat lhs = H;
  lhs.diagonal().array() += zeta;
  CVec rhs = zeta * a - q;
  Eigen::LLT<CMat> llt(lhs);
  if (llt.info() != Eigen::Success) return lhs.partialPivLu().solve(rhs);
  return llt.solve(rhs);
}

RVec prox_quadratic_solve(const RMat& H, const RVec& q, const RVec& a, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("prox_quadratic_solve: zeta must be positive");
  const auto n = a.size();
  if (H.rows() != n || H.cols() != n || q.size() != n)
    throw std::invalid_argument("prox_quadratic_solve: dimension mismatch");
  RMat lhs = H;
  lhs.diagonal().array() += zeta;
  RVec rhs = zeta * a - q;
  Eigen::LLT<RMat> llt(lhs);
  if (llt.info() != Eigen::Success) return lhs.partialPivLu().solve(rhs);
  return llt.solve(rhs);
}

}  // namespace rsjam
