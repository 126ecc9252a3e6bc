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
#include <limits>

namespace rsjam {

double quadratic_violation(const SdpProblem& p, const CVec& x) {
  double viol = 0.0;
  for (const auto& c : p.constraints) {
    double v = x.dot(c.A * x).real();
    switch (c.sense) {
      case Sense::le: viol += std::max(0.0, v - c.b); break;
      case Sense::ge: viol += std::max(0.0, c.b - v); break;
      case Sense::eq: viol += std::abs(v - c.b); break;
    }
  }
  return viol;
}

RankOneResult rank_one_extract(const CMat& S, const RankOneContext& ctx, int randomization_count,
                               RandomStream& rng) {
  const int d = static_cast<int>(S.rows());
  if (S.cols() != d) throw std::invalid_argument("rank_one_extract: matrix not square");
  CMat Sh = 0.5 * (S + S.adjoint());
  EigResult eig = hermitian_eig(Sh);
  const double lmax = std::max(eig.values.size() ? eig.values(0) : 0.0, 0.0);
  const double trace = Sh.trace().real();

  RankOneResult best;
  best.quality = (lmax > 0.0) ? trace / (lmax * d) : 0.0;

  auto score = [&](const CVec& x, double& viol, double& obj) {
    viol = ctx.problem ? quadratic_violation(*ctx.problem, x) : 0.0;
    if (ctx.power_cap >= 0.0) viol += std::max(0.0, x.squaredNorm() - ctx.power_cap);
    obj = ctx.problem ? x.dot(ctx.problem->C * x).real() : 0.0;
  };

  auto cap = [&](CVec x) {
    if (ctx.power_cap >= 0.0) {
      double e = x.squaredNorm();
      if (e > ctx.power_cap && e > 0.0) x *= std::sqrt(ctx.power_cap / e);
    }
    return x;
  };

  CVec x0 = (d > 0) ? CVec(std::sqrt(lmax) * eig.vectors.col(0)) : CVec();
  x0 = cap(x0);
  best.x = x0;
  best.candidate = 0;
  score(x0, best.violation, best.objective);

  if (randomization_count > 0 && d > 0) {
    RVec sq = eig.values.cwiseMax(0.0).cwiseSqrt();
    CMat F = eig.vectors * sq.asDiagonal();
    for (int r = 1; r <= randomization_count; ++r) {
      CVec xi = F * rng.cnormal_vector(d);
      double e = xi.squaredNorm();
      if (!(e > 0.0)) continue;
      if (ctx.power_cap >= 0.0)
        xi *= std::sqrt(ctx.power_cap / e);
      else
        xi *= std::sqrt(trace / e);
      double viol, obj;
      score(xi, viol, obj);
      bool better = viol < best.violation - 1e-12 ||
                    (std::abs(viol - best.violation) <= 1e-12 && obj < best.objective - 1e-12);
      if (better) {
        best.x = xi;
        best.violation = viol;
        best.objective = obj;
        best.candidate = r;
      }
    }
  }
  return best;
}

}  // namespace rsjam
