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

// Infeasible primal-dual path-following for complex Hermitian SDPs in block
// form. HKM search direction with a Mehrotra predictor-corrector. Inequalities
// are converted to equalities with nonnegative LP slacks.

#include "rsjam/conic.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace rsjam {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::max_iterations: return "max-iterations";
  }
  return "unknown";
}

double term_dot(const HermTerm& t, const CMat& G) {
  if (t.is_dense()) return (t.dense.cwiseProduct(G.transpose())).sum().real();
  double acc = 0.0;
  for (const auto& [r, c, v] : t.sparse) {
    if (r == c)
      acc += (v * G(r, r)).real();
    else
      acc += (v * G(c, r) + std::conj(v) * G(r, c)).real();
  }
  return acc;
}

double constraint_value(const BlockConstraint& c, const std::vector<CMat>& X) {
  double acc = 0.0;
  for (const auto& t : c.terms) acc += term_dot(t, X.at(t.block));
  return acc;
}

namespace {

// One row after preprocessing: at most one term per block, scaled.
struct Row {
  std::vector<HermTerm> terms;
  int slack = -1;        // LP slack index or -1
  double slack_coef = 0.0;
  double b = 0.0;
  double scale = 1.0;    // original row = scaled row / scale
};

void add_term_to(CMat& D, const HermTerm& t, double w) {
  if (t.is_dense()) {
    D += w * t.dense;
    return;
  }
  for (const auto& [r, c, v] : t.sparse) {
    D(r, c) += w * v;
    if (r != c) D(c, r) += w * std::conj(v);
  }
}

double term_fro2(const HermTerm& t) {
  if (t.is_dense()) return t.dense.squaredNorm();
  double acc = 0.0;
  for (const auto& [r, c, v] : t.sparse) acc += (r == c ? 1.0 : 2.0) * std::norm(v);
  return acc;
}

HermTerm scaled(const HermTerm& t, double s) {
  HermTerm o;
  o.block = t.block;
  if (t.is_dense()) {
    o.dense = s * t.dense;
  } else {
    o.sparse.reserve(t.sparse.size());
    for (const auto& [r, c, v] : t.sparse) o.sparse.emplace_back(r, c, s * v);
  }
  return o;
}

struct Workspace {
  std::vector<int> dims;
  int nb = 0;
  int m = 0;
  int nlp = 0;
  std::vector<Row> rows;
  std::vector<CMat> C;
  RVec b;
  RVec c_lp;
  // per block: list of (row index, term index)
  std::vector<std::vector<std::pair<int, int>>> by_block;
};

RVec apply_A(const Workspace& w, const std::vector<CMat>& G, const RVec& x) {
  RVec out(w.m);
  for (int i = 0; i < w.m; ++i) {
    const Row& r = w.rows[i];
    double acc = 0.0;
    for (const auto& t : r.terms) acc += term_dot(t, G[t.block]);
    if (r.slack >= 0) acc += r.slack_coef * x(r.slack);
    out(i) = acc;
  }
  return out;
}

void apply_AT(const Workspace& w, const RVec& y, std::vector<CMat>& S, RVec& s) {
  S.resize(w.nb);
  for (int b = 0; b < w.nb; ++b) S[b].setZero(w.dims[b], w.dims[b]);
  s.setZero(w.nlp);
  for (int i = 0; i < w.m; ++i) {
    const Row& r = w.rows[i];
    if (y(i) == 0.0) continue;
    for (const auto& t : r.terms) add_term_to(S[t.block], t, y(i));
    if (r.slack >= 0) s(r.slack) += r.slack_coef * y(i);
  }
}

double inner_re(const CMat& A, const CMat& B) { return (A.cwiseProduct(B.conjugate())).sum().real(); }

// Largest alpha with X + alpha dX >= 0, given Li = L^-1 with X = L L^H.
double max_step_psd(const CMat& Li, const CMat& dX) {
  const int d = static_cast<int>(Li.rows());
  if (d == 0) return std::numeric_limits<double>::infinity();
  CMat T1 = Li.lazyProduct(dX);
  CMat T = T1.lazyProduct(Li.adjoint());
  T = 0.5 * (T + T.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(T, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double max_step_lp(const RVec& x, const RVec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i)
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  return a;
}

bool chol(const CMat& A, CMat& L) {
  Eigen::LLT<CMat> llt(A);
  if (llt.info() != Eigen::Success) return false;
  L = llt.matrixL();
  for (int i = 0; i < L.rows(); ++i)
    if (!(std::real(L(i, i)) > 0.0) || !std::isfinite(std::real(L(i, i)))) return false;
  return true;
}

Workspace prepare(const BlockSdp& p) {
  Workspace w;
  w.dims = p.dims;
  w.nb = static_cast<int>(p.dims.size());
  if (static_cast<int>(p.C.size()) != w.nb) throw std::invalid_argument("sdp: objective block count mismatch");
  for (int b = 0; b < w.nb; ++b) {
    if (p.C[b].rows() != p.dims[b] || p.C[b].cols() != p.dims[b])
      throw std::invalid_argument("sdp: objective block dimension mismatch");
    double sc = std::max(1.0, p.C[b].cwiseAbs().maxCoeff());
    if ((p.C[b] - p.C[b].adjoint()).cwiseAbs().maxCoeff() > 1e-12 * sc)
      throw std::invalid_argument("sdp: objective not Hermitian");
  }
  w.m = static_cast<int>(p.constraints.size());
  w.rows.resize(w.m);
  int nlp = 0;
  for (int i = 0; i < w.m; ++i) {
    const auto& c = p.constraints[i];
    Row& r = w.rows[i];
    // merge terms that share a block
    std::vector<int> seen(w.nb, -1);
    for (const auto& t : c.terms) {
      if (t.block < 0 || t.block >= w.nb) throw std::invalid_argument("sdp: term block out of range");
      const int d = p.dims[t.block];
      if (t.is_dense()) {
        if (t.dense.rows() != d || t.dense.cols() != d) throw std::invalid_argument("sdp: term dimension mismatch");
        double sc = std::max(1.0, t.dense.cwiseAbs().maxCoeff());
        if ((t.dense - t.dense.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * sc)
          throw std::invalid_argument("sdp: constraint matrix not Hermitian");
      } else {
        for (const auto& [rr, cc, v] : t.sparse)
          if (rr < 0 || cc < 0 || rr >= d || cc >= d || rr > cc)
            throw std::invalid_argument("sdp: sparse entry out of range");
      }
      if (seen[t.block] < 0) {
        seen[t.block] = static_cast<int>(r.terms.size());
        r.terms.push_back(t);
      } else {
        HermTerm& prev = r.terms[seen[t.block]];
        CMat D = CMat::Zero(d, d);
        add_term_to(D, prev, 1.0);
        add_term_to(D, t, 1.0);
        prev.sparse.clear();
        prev.dense = D;
      }
    }
    if (c.sense != Sense::eq) {
      r.slack = nlp++;
      r.slack_coef = (c.sense == Sense::le) ? 1.0 : -1.0;
    }
    double nrm2 = (r.slack >= 0) ? 1.0 : 0.0;
    for (const auto& t : r.terms) nrm2 += term_fro2(t);
    double nrm = std::sqrt(nrm2);
    r.scale = (nrm > 0.0) ? 1.0 / nrm : 1.0;
    for (auto& t : r.terms) t = scaled(t, r.scale);
    r.slack_coef *= r.scale;
    r.b = c.b * r.scale;
  }
  w.nlp = nlp;
  w.b.resize(w.m);
  for (int i = 0; i < w.m; ++i) w.b(i) = w.rows[i].b;
  w.c_lp = RVec::Zero(nlp);
  w.C = p.C;
  w.by_block.assign(w.nb, {});
  for (int i = 0; i < w.m; ++i)
    for (int t = 0; t < static_cast<int>(w.rows[i].terms.size()); ++t)
      w.by_block[w.rows[i].terms[t].block].emplace_back(i, t);
  return w;
}

// Schur complement M_ij = sum_b Re tr(A_i X A_j Z^-1) + LP part, via
// B_j = Lx^H A_j Lzi with Z^-1 = Lzi Lzi^H.
RMat schur(const Workspace& w, const std::vector<CMat>& Lx, const std::vector<CMat>& Lzi, const RVec& x,
           const RVec& z) {
  RMat M = RMat::Zero(w.m, w.m);
  for (int b = 0; b < w.nb; ++b) {
    const auto& list = w.by_block[b];
    if (list.empty()) continue;
    const int d = w.dims[b];
    const int cnt = static_cast<int>(list.size());
    CMat W(d * d, cnt);
    CMat LxH = Lx[b].adjoint();
    CMat T;
    for (int q = 0; q < cnt; ++q) {
      const HermTerm& t = w.rows[list[q].first].terms[list[q].second];
      Eigen::Map<CMat> B(W.col(q).data(), d, d);
      if (t.is_dense()) {
        CMat tmp = t.dense * Lzi[b];
        B.noalias() = LxH * tmp;
      } else if (t.sparse.size() <= 2) {
        B.setZero();
        for (const auto& [r, c, v] : t.sparse) {
          B.noalias() += v * LxH.col(r) * Lzi[b].row(c);
          if (r != c) B.noalias() += std::conj(v) * LxH.col(c) * Lzi[b].row(r);
        }
      } else {
        T.setZero(d, d);
        for (const auto& [r, c, v] : t.sparse) {
          T.row(r) += v * Lzi[b].row(c);
          if (r != c) T.row(c) += std::conj(v) * Lzi[b].row(r);
        }
        B.noalias() = LxH.lazyProduct(T);
      }
    }
    RMat G = (W.adjoint() * W).real();
    for (int q1 = 0; q1 < cnt; ++q1)
      for (int q2 = 0; q2 < cnt; ++q2) M(list[q1].first, list[q2].first) += G(q1, q2);
  }
  for (int i = 0; i < w.m; ++i) {
    const Row& r = w.rows[i];
    if (r.slack >= 0) M(i, i) += r.slack_coef * r.slack_coef * x(r.slack) / z(r.slack);
  }
  return M;
}

}  // namespace

BlockSdpSolution sdp_solve_blocks(const BlockSdp& problem, const SdpOptions& opt) {
  Workspace w = prepare(problem);
  const int nb = w.nb;
  const int m = w.m;
  const int nlp = w.nlp;

  double c_scale = 1.0;
  for (const auto& Cb : w.C) c_scale = std::max(c_scale, std::sqrt(Cb.squaredNorm()));
  for (auto& Cb : w.C) Cb /= c_scale;

  int ntot = nlp;
  for (int d : w.dims) ntot += d;

  // Starting point scaled to the data.
  double max_a = 0.0, max_ratio = 0.0;
  for (int i = 0; i < m; ++i) {
    double a2 = 0.0;
    for (const auto& t : w.rows[i].terms) a2 += term_fro2(t);
    max_a = std::max(max_a, std::sqrt(a2));
    max_ratio = std::max(max_ratio, (1.0 + std::abs(w.b(i))) / (1.0 + std::sqrt(a2)));
  }
  double cnorm = 0.0;
  for (const auto& Cb : w.C) cnorm = std::max(cnorm, std::sqrt(Cb.squaredNorm()));
  int dmax = 1;
  for (int d : w.dims) dmax = std::max(dmax, d);
  const double xi = std::max({10.0, std::sqrt(double(dmax)), dmax * max_ratio});
  const double eta = std::max({10.0, std::sqrt(double(dmax)), max_a, cnorm});

  std::vector<CMat> X(nb), Z(nb);
  for (int b = 0; b < nb; ++b) {
    X[b] = xi * CMat::Identity(w.dims[b], w.dims[b]);
    Z[b] = eta * CMat::Identity(w.dims[b], w.dims[b]);
  }
  RVec x = RVec::Constant(nlp, xi), z = RVec::Constant(nlp, eta);
  RVec y = RVec::Zero(m);

  std::unique_ptr<fmt::ostream> dump;
  if (!opt.dump_csv.empty()) {
    dump = std::make_unique<fmt::ostream>(fmt::output_file(opt.dump_csv));
    dump->print("iteration,primal_objective,dual_objective,gap,primal_residual,dual_residual,mu,step_primal,step_dual\n");
  }

  const double bnorm = w.b.norm();
  double cfro = 0.0;
  for (const auto& Cb : w.C) cfro += Cb.squaredNorm();
  cfro = std::sqrt(cfro);

  BlockSdpSolution sol;
  sol.status = SdpStatus::max_iterations;
  int diverge = 0;
  double prev_norm_dobj = -std::numeric_limits<double>::infinity();
  double relp = 0, reld = 0, relgap = 0, pobj = 0, dobj = 0;
  double step_p = 0.0, step_d = 0.0;

  std::vector<CMat> ATy, Rd(nb), Lx(nb), Lz(nb), Lzi(nb), Zinv(nb), Lxi(nb), LziH(nb);
  RVec aty_lp, rd;

  int it = 0;
  for (;; ++it) {
    RVec rp = w.b - apply_A(w, X, x);
    apply_AT(w, y, ATy, aty_lp);
    double rd2 = 0.0;
    for (int b = 0; b < nb; ++b) {
      Rd[b] = w.C[b] - ATy[b] - Z[b];
      rd2 += Rd[b].squaredNorm();
    }
    rd = w.c_lp - aty_lp - z;
    rd2 += rd.squaredNorm();
    pobj = 0.0;
    for (int b = 0; b < nb; ++b) pobj += inner_re(w.C[b], X[b]);
    pobj += w.c_lp.dot(x);
    dobj = w.b.dot(y);
    relp = rp.norm() / (1.0 + bnorm);
    reld = std::sqrt(rd2) / (1.0 + cfro);
    relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    double mu = x.dot(z);
    for (int b = 0; b < nb; ++b) mu += inner_re(X[b], Z[b]);
    mu /= std::max(ntot, 1);

    if (dump)
      dump->print("{},{:.17g},{:.17g},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n", it, pobj * c_scale, dobj * c_scale,
                  relgap, relp, reld, mu, step_p, step_d);

    if (relp <= opt.tol && reld <= opt.tol && relgap <= opt.tol) {
      sol.status = SdpStatus::optimal;
      break;
    }
    if (it >= opt.max_iter) break;

    // Farkas ray: b^T y > 0 with A^T y <= 0 certifies primal infeasibility.
    if (relp > opt.tol && dobj > 0.0) {
      RVec yh = y / dobj;
      double worst = -std::numeric_limits<double>::infinity();
      std::vector<CMat> Ay;
      RVec Ay_lp;
      apply_AT(w, yh, Ay, Ay_lp);
      for (int b = 0; b < nb; ++b) {
        if (Ay[b].size() == 0) continue;
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (Ay[b] + Ay[b].adjoint()), Eigen::EigenvaluesOnly);
        worst = std::max(worst, es.eigenvalues()(es.eigenvalues().size() - 1));
      }
      for (int i = 0; i < nlp; ++i) worst = std::max(worst, Ay_lp(i));
      if (worst <= 1e-8 * (1.0 + yh.norm())) {
        sol.status = SdpStatus::infeasible;
        break;
      }
    }
    double norm_dobj = dobj / (1.0 + std::abs(pobj));
    if (relp > opt.tol && norm_dobj > prev_norm_dobj * (1.0 + 1e-3) && norm_dobj > 0.0)
      ++diverge;
    else
      diverge = 0;
    prev_norm_dobj = norm_dobj;
    if (diverge >= opt.divergence_window) {
      sol.status = SdpStatus::infeasible;
      break;
    }

    bool ok = true;
    for (int b = 0; b < nb && ok; ++b) {
      ok = chol(X[b], Lx[b]) && chol(Z[b], Lz[b]);
      if (!ok) break;
      const int d = w.dims[b];
      Lzi[b] = Lz[b].adjoint().triangularView<Eigen::Upper>().solve(CMat::Identity(d, d));
      Zinv[b] = Lzi[b] * Lzi[b].adjoint();
      Lxi[b] = Lx[b].triangularView<Eigen::Lower>().solve(CMat::Identity(d, d));
      LziH[b] = Lzi[b].adjoint();
    }
    if (!ok) break;

    RMat M = schur(w, Lx, Lzi, x, z);
    Eigen::LLT<RMat> llt(M);
    if (llt.info() != Eigen::Success) {
      double reg = 1e-12 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      M.diagonal().array() += reg;
      llt.compute(M);
      if (llt.info() != Eigen::Success) break;
    }

    // Base right-hand side: rp + A(X Rd Z^-1) (LP: x rd / z).
    std::vector<CMat> G(nb);
    for (int b = 0; b < nb; ++b) G[b] = X[b] * Rd[b] * Zinv[b];
    RVec g_lp = x.cwiseProduct(rd).cwiseQuotient(z);
    RVec base = rp + apply_A(w, G, g_lp);

    auto direction = [&](const std::vector<CMat>& Rc, const RVec& rc_lp, std::vector<CMat>& dX, RVec& dx,
                         std::vector<CMat>& dZ, RVec& dz, RVec& dy) {
      RVec rhs = base - apply_A(w, Rc, rc_lp);
      dy = llt.solve(rhs);
      std::vector<CMat> ATdy;
      RVec atdy_lp;
      apply_AT(w, dy, ATdy, atdy_lp);
      dZ.resize(nb);
      dX.resize(nb);
      for (int b = 0; b < nb; ++b) {
        dZ[b] = Rd[b] - ATdy[b];
        CMat T = Rc[b] - X[b] * dZ[b] * Zinv[b];
        dX[b] = 0.5 * (T + T.adjoint());
      }
      dz = rd - atdy_lp;
      dx = rc_lp - x.cwiseProduct(dz).cwiseQuotient(z);
    };

    auto steps = [&](const std::vector<CMat>& dX, const RVec& dx, const std::vector<CMat>& dZ, const RVec& dz,
                     double& ap, double& ad) {
      ap = max_step_lp(x, dx);
      ad = max_step_lp(z, dz);
      for (int b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step_psd(Lxi[b], dX[b]));
        ad = std::min(ad, max_step_psd(LziH[b], dZ[b]));
      }
    };

    // Predictor.
    std::vector<CMat> Rc(nb);
    for (int b = 0; b < nb; ++b) Rc[b] = -X[b];
    RVec rc_lp = -x;
    std::vector<CMat> dXp, dZp;
    RVec dxp, dzp, dyp;
    direction(Rc, rc_lp, dXp, dxp, dZp, dzp, dyp);
    double ap, ad;
    steps(dXp, dxp, dZp, dzp, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = (x + ap * dxp).dot(z + ad * dzp);
    for (int b = 0; b < nb; ++b) mu_aff += inner_re(X[b] + ap * dXp[b], Z[b] + ad * dZp[b]);
    mu_aff /= std::max(ntot, 1);
    double sigma = (mu > 0.0) ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    // Corrector.
    for (int b = 0; b < nb; ++b) Rc[b] = sigma * mu * Zinv[b] - X[b] - dXp[b] * dZp[b] * Zinv[b];
    rc_lp = (sigma * mu * z.cwiseInverse()) - x - dxp.cwiseProduct(dzp).cwiseQuotient(z);
    std::vector<CMat> dX, dZ;
    RVec dx, dz, dy;
    direction(Rc, rc_lp, dX, dx, dZ, dz, dy);
    steps(dX, dx, dZ, dz, ap, ad);
    const double tau = 0.98;
    step_p = std::min(1.0, tau * ap);
    step_d = std::min(1.0, tau * ad);
    for (int b = 0; b < nb; ++b) {
      X[b] += step_p * dX[b];
      Z[b] += step_d * dZ[b];
      X[b] = 0.5 * (X[b] + X[b].adjoint());
      Z[b] = 0.5 * (Z[b] + Z[b].adjoint());
    }
    x += step_p * dx;
    z += step_d * dz;
    y += step_d * dy;
  }

  sol.iterations = it;
  sol.X = X;
  sol.objective = pobj * c_scale;
  sol.gap = relgap;
  sol.dual_residual = reld;
  // y in the original scaling: y_orig_i = c_scale * y_i * row_scale_i.
  sol.y.resize(m);
  for (int i = 0; i < m; ++i) sol.y(i) = c_scale * y(i) * w.rows[i].scale;
  // primal residual on the original data
  double pr = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    double v = constraint_value(c, X);
    double viol = 0.0;
    if (c.sense == Sense::eq) viol = std::abs(v - c.b);
    if (c.sense == Sense::le) viol = std::max(0.0, v - c.b);
    if (c.sense == Sense::ge) viol = std::max(0.0, c.b - v);
    pr = std::max(pr, viol / (1.0 + std::abs(c.b)));
  }
  sol.primal_residual = pr;
  return sol;
}

SdpSolution sdp_solve(const SdpProblem& problem, double tol, int max_iter, const std::string& dump_csv) {
  const int d = problem.dim();
  if (d < 1) throw std::invalid_argument("sdp_solve: dimension must be >= 1");
  BlockSdp bp;
  bp.dims = {d};
  bp.C = {problem.C};
  for (const auto& c : problem.constraints) {
    if (c.A.rows() != d || c.A.cols() != d) throw std::invalid_argument("sdp_solve: constraint dimension mismatch");
    BlockConstraint bc;
    HermTerm t;
    t.block = 0;
    t.dense = c.A;
    bc.terms.push_back(std::move(t));
    bc.sense = c.sense;
    bc.b = c.b;
    bp.constraints.push_back(std::move(bc));
  }
  SdpOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.dump_csv = dump_csv;
  auto bs = sdp_solve_blocks(bp, opt);
  SdpSolution s;
  s.S = bs.X[0];
  s.status = bs.status;
  s.primal_residual = bs.primal_residual;
  s.dual_residual = bs.dual_residual;
  s.gap = bs.gap;
  s.objective = bs.objective;
  s.iterations = bs.iterations;
  s.y = bs.y;
  return s;
}

}  // namespace rsjam
