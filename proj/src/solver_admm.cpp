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

#include "rsjam/solver.hpp"


#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace rsjam {

namespace {

constexpr double kFeasTol = 1e-9;

double stack_dist2(const Stack& a, const Stack& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) d += (a[n] - b[n]).squaredNorm();
  return d;
}

void clean(const SolverProblem& prob, Stack& u) {
  const auto mask = prob.layout.mask();
  for (auto& b : u) {
    for (int k = 0; k < prob.layout.K; ++k) b(prob.layout.x(k)) = b(prob.layout.x(k)).real();
    for (int i = 0; i < prob.layout.size(); ++i)
      if (!mask[i]) b(i) = 0.0;
  }
}

// Offsets of the streams other than jamming, and of the jamming streams.
std::vector<int> data_streams(const SlotLayout& lay) {
  std::vector<int> s;
  if (lay.common_active) s.push_back(lay.pc());
  for (int k = 0; k < lay.K; ++k)
    if (lay.p_active[k]) s.push_back(lay.p(k));
  return s;
}

std::vector<int> jam_streams(const SlotLayout& lay) {
  std::vector<int> s;
  for (int l = 0; l < lay.L; ++l) s.push_back(lay.f(l));
  return s;
}

double quad(const SlotLayout& lay, const std::vector<int>& streams, const CMat& A, const CVec& b) {
  double acc = 0.0;
  for (int off : streams) {
    auto x = b.segment(off, lay.Nt);
    acc += x.dot(A * x).real();
  }
  return acc;
}

void scale_streams(const SlotLayout& lay, const std::vector<int>& streams, double s, CVec& b) {
  for (int off : streams) b.segment(off, lay.Nt) *= s;
}

// Repairs the families that a scaling can fix: share signs, jamming (scale the
// jamming precoders up), interference and power (scale the data precoders down).
void repair_physical(const SolverProblem& prob, Stack& u) {
  const auto& lay = prob.layout;
  const auto& thr = prob.thr;
  const auto& cfg = prob.cfg;
  const auto ds = data_streams(lay);
  const auto js = jam_streams(lay);
  clean(prob, u);
  for (int n = 0; n < cfg.N; ++n) {
    CVec& b = u[n];
    for (int k = 0; k < lay.K; ++k) b(lay.x(k)) = std::min(0.0, b(lay.x(k)).real());
    if (thr.jamming_active) {
      for (int l = 0; l < lay.L; ++l) {
        if (!thr.is_pilot(l, n)) continue;
        const CMat& R = prob.R[l][n];
        double A = quad(lay, ds, R, b), B = quad(lay, js, R, b);
        double J = thr.J_thr[l][n];
        if (A + B >= J) continue;
        if (B > 1e-300) {
          scale_streams(lay, js, std::sqrt((J - A) / B) * (1.0 + 1e-12), b);
        } else {
          // no jamming energy to scale: put the principal direction in place
          EigResult e = hermitian_eig(R);
          double lam = std::max(e.values(0), 1e-300);
          b.segment(lay.f(l), lay.Nt) = std::sqrt(std::max(0.0, J - A) / lam * (1.0 + 1e-12)) * e.vectors.col(0);
        }
      }
    }
    if (thr.interference_active) {
      for (int m = 0; m < cfg.M; ++m) {
        const CMat& Phi = prob.Phi[m][n];
        double Pd = quad(lay, ds, Phi, b), Pj = quad(lay, js, Phi, b);
        double I = thr.I_thr[m][n];
        if (Pd + Pj <= I || Pd <= 0.0) continue;
        scale_streams(lay, ds, std::sqrt(std::max(0.0, I - Pj) / Pd) * (1.0 - 1e-12), b);
      }
    }
  }
  double pd = 0.0, pj = 0.0;
  for (const auto& b : u) {
    for (int off : ds) pd += b.segment(off, lay.Nt).squaredNorm();
    for (int off : js) pj += b.segment(off, lay.Nt).squaredNorm();
  }
  if (pd + pj > cfg.Pt_bar) {
    if (pj <= cfg.Pt_bar && pd > 0.0) {
      double s = std::sqrt((cfg.Pt_bar - pj) / pd) * (1.0 - 1e-12);
      for (auto& b : u) scale_streams(lay, ds, s, b);
    } else {
      double s = std::sqrt(cfg.Pt_bar / (pd + pj)) * (1.0 - 1e-12);
      for (auto& b : u) {
        scale_streams(lay, ds, s, b);
        scale_streams(lay, js, s, b);
      }
    }
  }
}

// Moves the rate shares toward zero until the common stream is decodable.
void repair_common(const SolverProblem& prob, const WeightSet& W, Stack& u) {
  const auto& lay = prob.layout;
  if (!lay.common_active) return;
  for (int n = 0; n < prob.cfg.N; ++n) {
    CVec& b = u[n];
    double need = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < lay.K; ++k) need = std::max(need, xi_common(prob, W, k, n, b) - 1.0);
    double sx = 0.0;
    for (int k = 0; k < lay.K; ++k) sx += b(lay.x(k)).real();
    if (sx >= need) continue;
    double s = need >= 0.0 ? 0.0 : need / sx;
    for (int k = 0; k < lay.K; ++k) b(lay.x(k)) = b(lay.x(k)).real() * s;
  }
}

struct Scored {
  Stack u;
  double violation = 0.0;
  double objective = 0.0;
  DomainCheck check;
};

Scored score(const SolverProblem& prob, const WeightSet& W, Stack u, const Stack& anchor) {
  repair_physical(prob, u);
  repair_common(prob, W, u);
  Scored s;
  s.check = domain_check(prob, W, u);
  s.violation = s.check.total();
  s.objective = stack_dist2(u, anchor);
  s.u = std::move(u);
  return s;
}

bool better(const Scored& a, const Scored& b) {
  bool fa = a.violation <= kFeasTol, fb = b.violation <= kFeasTol;
  if (fa != fb) return fa;
  if (!fa && std::abs(a.violation - b.violation) > 1e-12) return a.violation < b.violation;
  return a.objective < b.objective;
}

class BlockBuilder {
 public:
  explicit BlockBuilder(const SolverProblem& prob) : lay_(prob.layout) {
    const auto mask = lay_.mask();
    pos_.assign(lay_.size(), -1);
    for (int i = 0; i < lay_.size(); ++i)
      if (mask[i]) {
        pos_[i] = static_cast<int>(slots_.size());
        slots_.push_back(i);
      }
    t_ = static_cast<int>(slots_.size());
  }
  int dim() const { return t_ + 1; }
  int t() const { return t_; }
  const std::vector<int>& slots() const { return slots_; }
  int pos(int slot) const { return pos_[slot]; }

  void quad(HermTerm& term, const CMat& A, int off) const {
    if (pos_[off] < 0) return;
    for (int i = 0; i < lay_.Nt; ++i)
      for (int j = i; j < lay_.Nt; ++j) {
        cd v = A(i, j);
        if (i == j) v = v.real();
        if (v != cd(0.0)) term.sparse.emplace_back(pos_[off + i], pos_[off + j], v);
      }
  }
  void quad_streams(HermTerm& term, const CMat& A, bool with_common) const {
    if (with_common) quad(term, A, lay_.pc());
    for (int k = 0; k < lay_.K; ++k) quad(term, A, lay_.p(k));
    for (int l = 0; l < lay_.L; ++l) quad(term, A, lay_.f(l));
  }
  // Adds 2 Re(x^H b) for the stream at off.
  void linear(HermTerm& term, const CVec& bvec, int off) const {
    if (pos_[off] < 0) return;
    for (int i = 0; i < lay_.Nt; ++i)
      if (bvec(i) != cd(0.0)) term.sparse.emplace_back(pos_[off + i], t_, bvec(i));
  }
  // Adds coef * Re X_k.
  void share(HermTerm& term, int k, double coef) const {
    if (pos_[lay_.x(k)] < 0) return;
    term.sparse.emplace_back(pos_[lay_.x(k)], t_, cd(0.5 * coef));
  }
  void power(HermTerm& term) const {
    for (int i = lay_.pc(); i < lay_.size(); ++i)
      if (pos_[i] >= 0) term.sparse.emplace_back(pos_[i], pos_[i], cd(1.0));
  }

 private:
  const SlotLayout& lay_;
  std::vector<int> pos_;
  std::vector<int> slots_;
  int t_ = 0;
};

// Lagrangian dual of the projection QCQP. Every quadratic form is a sum over
// streams of x_s^H M x_s, so the Lagrangian minimizer splits into Nt x Nt
// solves per (subcarrier, stream).
class DualProjection {
 public:
  DualProjection(const SolverProblem& prob, const WeightSet& W, const Stack& anchor) : prob_(prob), a_(anchor) {
    const auto& lay = prob.layout;
    const auto& cfg = prob.cfg;
    const auto& thr = prob.thr;
    const int N = cfg.N;
    if (lay.common_active) all_.push_back(lay.pc());
    for (int k = 0; k < lay.K; ++k)
      if (lay.p_active[k]) {
        all_.push_back(lay.p(k));
      }
    for (int l = 0; l < lay.L; ++l) all_.push_back(lay.f(l));
    for (int k = 0; k < lay.K; ++k)
      if (lay.x_active[k]) xs_.push_back(k);
    at_.assign(N, {});
    const CMat I = CMat::Identity(lay.Nt, lay.Nt);
    auto add = [&](int con, int n, const CMat& M, bool with_common, int lin_off, const CVec& c,
                   std::vector<std::pair<int, double>> e) {
      Part p;
      p.con = con;
      p.M = M;
      p.with_common = with_common;
      p.lin_off = lin_off;
      p.c = c;
      p.e = std::move(e);
      at_[n].push_back(std::move(p));
    };
    for (int n = 0; n < N; ++n) {
      if (lay.common_active)
        for (int k = 0; k < lay.K; ++k) {
          std::vector<std::pair<int, double>> e;
          for (int j : xs_) e.emplace_back(j, -1.0);
          int i = new_con(1.0 - W.kc[k][n]);
          add(i, n, W.Qc[k][n], true, lay.pc(), W.cc[k][n], e);
        }
      if (thr.jamming_active)
        for (int l = 0; l < lay.L; ++l)
          if (thr.is_pilot(l, n)) add(new_con(-thr.J_thr[l][n]), n, -prob.R[l][n], true, -1, {}, {});
      if (thr.interference_active)
        for (int m = 0; m < cfg.M; ++m) add(new_con(thr.I_thr[m][n]), n, prob.Phi[m][n], true, -1, {}, {});
      for (int k : xs_) add(new_con(0.0), n, CMat(), true, -1, {}, {{k, 1.0}});
    }
    const int ip = new_con(cfg.Pt_bar);
    for (int n = 0; n < N; ++n) add(ip, n, I, true, -1, {}, {});
    if (cfg.Rth > 0.0)
      for (int k = 0; k < lay.K; ++k) {
        double rhs = N * (1.0 - cfg.Rth);
        for (int n = 0; n < N; ++n) rhs -= W.kp[k][n];
        const int iq = new_con(rhs);
        for (int n = 0; n < N; ++n) {
          std::vector<std::pair<int, double>> e;
          if (lay.x_active[k]) e.emplace_back(k, 1.0);
          add(iq, n, W.Qp[k][n], false, lay.p_active[k] ? lay.p(k) : -1, W.cp[k][n], e);
        }
      }
  }

  int size() const { return static_cast<int>(h_.size()); }

  // Projected Newton ascent from the given multipliers. Whenever the
  // projected gradient is small, accept(x, d) is asked whether the Lagrangian
  // minimizer x together with the dual bound d certifies the projection.
  bool solve(std::vector<double>& lambda, const std::function<bool(const Stack&, double)>& accept,
             int& iterations) {
    const int m = size();
    RVec lam = RVec::Zero(m);
    if (static_cast<int>(lambda.size()) == m)
      for (int i = 0; i < m; ++i) lam(i) = std::max(0.0, lambda[i]);
    Eval cur;
    if (!evaluate(lam, cur, true)) {
      lam.setZero();
      if (!evaluate(lam, cur, true)) return false;
    }
    RVec scale(m);
    for (int i = 0; i < m; ++i) scale(i) = 1.0 + std::abs(h_[i]);
    iterations = 0;
    double damping = 1e-10;  // relative Levenberg-Marquardt term for nearly dependent constraints
    double best_pg = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int it = 0; it < 60; ++it) {
      double pg = 0.0;
      std::vector<int> free;
      for (int i = 0; i < m; ++i) {
        const double g = cur.grad(i);
        if (lam(i) <= 0.0 && g <= 0.0) continue;
        pg = std::max(pg, std::abs(g) / scale(i));
        free.push_back(i);
      }
      if (pg <= 1e-8 && accept(cur.x, cur.value)) {
        lambda.assign(lam.data(), lam.data() + m);
        return true;
      }
      if (pg < 0.5 * best_pg) {
        best_pg = pg;
        since_best = 0;
      } else if (++since_best >= 8) {
        return false;
      }
      ++iterations;
      const int nf = static_cast<int>(free.size());
      if (nf == 0) return false;
      RMat Hf(nf, nf);
      RVec gf(nf);
      for (int p = 0; p < nf; ++p) {
        gf(p) = cur.grad(free[p]);
        for (int q = 0; q < nf; ++q) Hf(p, q) = -cur.hess(free[p], free[q]);
      }
      Hf.diagonal().array() += damping * std::max(1.0, Hf.diagonal().maxCoeff());
      Eigen::LDLT<RMat> ldlt(Hf);
      if (ldlt.info() != Eigen::Success) return false;
      RVec df = ldlt.solve(gf);
      RVec dir = RVec::Zero(m);
      for (int p = 0; p < nf; ++p) dir(free[p]) = df(p);
      bool moved = false;
      for (double alpha = 1.0; alpha >= 1e-10; alpha *= 0.5) {
        RVec trial = (lam + alpha * dir).cwiseMax(0.0);
        Eval next;
        if (!evaluate(trial, next, false)) continue;
        const double pred = cur.grad.dot(trial - lam);
        if (next.value >= cur.value + 1e-4 * pred - 1e-15 * (1.0 + std::abs(cur.value))) {
          lam = trial;
          if (!evaluate(lam, cur, true)) return false;
          moved = true;
          damping = alpha == 1.0 ? std::max(1e-10, damping * 0.1)
                                 : std::min(1e-2, damping * (alpha < 0.1 ? 100.0 : 10.0));
          break;
        }
      }
      if (!moved) return false;
    }
    return false;
  }

 private:
  struct Part {
    int con = 0;
    CMat M;  // empty when the constraint has no quadratic part
    bool with_common = true;
    int lin_off = -1;
    CVec c;
    std::vector<std::pair<int, double>> e;  // (share k, coefficient)
  };
  struct Eval {
    Stack x;
    double value = 0.0, dist2 = 0.0;
    RVec grad;
    RMat hess;
  };

  int new_con(double h) {
    h_.push_back(h);
    return static_cast<int>(h_.size()) - 1;
  }

  bool in_part(const Part& p, int off) const {
    return p.M.size() > 0 && (p.with_common || off != prob_.layout.pc());
  }

  bool evaluate(const RVec& lam, Eval& ev, bool with_hessian) const {
    const auto& lay = prob_.layout;
    const int N = prob_.cfg.N, Nt = lay.Nt, m = size();
    ev.x.assign(N, CVec::Zero(lay.size()));
    RVec g = -Eigen::Map<const RVec>(h_.data(), m);
    if (with_hessian) ev.hess.setZero(m, m);
    ev.dist2 = 0.0;
    for (int n = 0; n < N; ++n) {
      const auto& parts = at_[n];
      CVec& x = ev.x[n];
      for (int off : all_) {
        CMat H = CMat::Identity(Nt, Nt);
        CVec rhs = a_[n].segment(off, Nt);
        for (const auto& p : parts) {
          const double l = lam(p.con);
          if (in_part(p, off) && l != 0.0) H += l * p.M;
          if (p.lin_off == off && l != 0.0) rhs += l * p.c;
        }
        Eigen::LLT<CMat> llt(H);
        if (llt.info() != Eigen::Success) return false;
        for (int i = 0; i < Nt; ++i)
          if (!(std::real(CMat(llt.matrixL())(i, i)) > 1e-9)) return false;
        CVec xs = llt.solve(rhs);
        x.segment(off, Nt) = xs;
        // constraint values and gradients gamma_i = M x - c (lin stream only)
        std::vector<int> idx;
        std::vector<CVec> gam;
        for (const auto& p : parts) {
          const bool q = in_part(p, off), lin = p.lin_off == off;
          if (!q && !lin) continue;
          CVec gi = CVec::Zero(Nt);
          if (q) {
            gi = p.M * xs;
            g(p.con) += xs.dot(gi).real();
          }
          if (lin) {
            g(p.con) -= 2.0 * p.c.dot(xs).real();
            gi -= p.c;
          }
          idx.push_back(p.con);
          gam.push_back(std::move(gi));
        }
        if (with_hessian && !idx.empty()) {
          const int c = static_cast<int>(idx.size());
          CMat G(Nt, c);
          for (int j = 0; j < c; ++j) G.col(j) = gam[j];
          CMat Y = llt.solve(G);
          RMat B = (G.adjoint() * Y).real();
          for (int p = 0; p < c; ++p)
            for (int q = 0; q < c; ++q) ev.hess(idx[p], idx[q]) -= 2.0 * B(p, q);
        }
        ev.dist2 += (xs - a_[n].segment(off, Nt)).squaredNorm();
      }
      for (int k : xs_) {
        double ek = 0.0;
        std::vector<std::pair<int, double>> coef;
        for (const auto& p : parts)
          for (const auto& [kk, cf] : p.e)
            if (kk == k) {
              ek += lam(p.con) * cf;
              coef.emplace_back(p.con, cf);
            }
        const double ax = a_[n](lay.x(k)).real();
        const double xv = ax - 0.5 * ek;
        x(lay.x(k)) = xv;
        ev.dist2 += (xv - ax) * (xv - ax);
        for (const auto& [i, cf] : coef) g(i) += cf * xv;
        if (with_hessian)
          for (const auto& [i, ci] : coef)
            for (const auto& [j, cj] : coef) ev.hess(i, j) -= 0.5 * ci * cj;
      }
    }
    ev.grad = g;
    ev.value = ev.dist2 + lam.dot(g);
    return std::isfinite(ev.value);
  }

  const SolverProblem& prob_;
  const Stack& a_;
  std::vector<int> all_, xs_;
  std::vector<std::vector<Part>> at_;
  std::vector<double> h_;
};

}  // namespace

Stack u_update(const SolverProblem& prob, const WeightSet& W, const Stack& anchor_in, const Stack& prev,
               RandomStream& rng, UUpdateInfo* info, std::vector<double>* multipliers) {
  const auto& lay = prob.layout;
  const auto& cfg = prob.cfg;
  const auto& thr = prob.thr;
  const int N = cfg.N;
  UUpdateInfo local;
  UUpdateInfo& inf = info ? *info : local;
  inf = UUpdateInfo{};

  Stack anchor = anchor_in;
  clean(prob, anchor);
  {
    DomainCheck d = domain_check(prob, W, anchor);
    if (d.total() <= kFeasTol) {
      inf.shortcut = true;
      return anchor;
    }
  }
  if (prob.scfg.dual_projection) {
    DualProjection dual(prob, W, anchor);
    std::vector<double> lam = multipliers ? *multipliers : std::vector<double>{};
    Scored found;
    // weak duality: dual_value <= optimum <= objective of any feasible point
    auto accept = [&](const Stack& x, double dual_value) {
      Stack y = x;
      clean(prob, y);
      Scored c = score(prob, W, std::move(y), anchor);
      if (c.violation > kFeasTol || c.objective - dual_value > 1e-9 * (1.0 + c.objective)) return false;
      found = std::move(c);
      return true;
    };
    if (dual.solve(lam, accept, inf.dual_iterations)) {
      inf.certified = true;
      inf.violation = found.violation;
      if (multipliers) *multipliers = std::move(lam);
      return std::move(found.u);
    }
  }

  BlockBuilder bb(prob);
  const int d = bb.dim(), t = bb.t();
  BlockSdp sdp;
  sdp.dims.assign(N, d);
  for (int n = 0; n < N; ++n) {
    CMat C = CMat::Zero(d, d);
    for (int i = 0; i < t; ++i) {
      C(i, i) = 1.0;
      cd a = anchor[n](bb.slots()[i]);
      C(i, t) = -a;
      C(t, i) = -std::conj(a);
    }
    C(t, t) = anchor[n].squaredNorm();
    sdp.C.push_back(C);
  }
  auto single = [&](int n) {
    BlockConstraint c;
    c.terms.push_back(HermTerm{n, {}, {}});
    return c;
  };
  for (int n = 0; n < N; ++n) {
    BlockConstraint c = single(n);
    c.terms[0].sparse.emplace_back(t, t, cd(1.0));
    c.sense = Sense::eq;
    c.b = 1.0;
    sdp.constraints.push_back(std::move(c));
    if (lay.common_active) {
      for (int k = 0; k < lay.K; ++k) {
        BlockConstraint cc = single(n);
        bb.quad_streams(cc.terms[0], W.Qc[k][n], true);
        bb.linear(cc.terms[0], -W.cc[k][n], lay.pc());
        for (int j = 0; j < lay.K; ++j) bb.share(cc.terms[0], j, -1.0);
        cc.sense = Sense::le;
        cc.b = 1.0 - W.kc[k][n];
        sdp.constraints.push_back(std::move(cc));
      }
    }
    if (thr.jamming_active)
      for (int l = 0; l < lay.L; ++l) {
        if (!thr.is_pilot(l, n)) continue;
        BlockConstraint cj = single(n);
        bb.quad_streams(cj.terms[0], prob.R[l][n], true);
        cj.sense = Sense::ge;
        cj.b = thr.J_thr[l][n];
        sdp.constraints.push_back(std::move(cj));
      }
    if (thr.interference_active)
      for (int m = 0; m < cfg.M; ++m) {
        BlockConstraint ci = single(n);
        bb.quad_streams(ci.terms[0], prob.Phi[m][n], true);
        ci.sense = Sense::le;
        ci.b = thr.I_thr[m][n];
        sdp.constraints.push_back(std::move(ci));
      }
    for (int k = 0; k < lay.K; ++k) {
      if (!lay.x_active[k]) continue;
      BlockConstraint cx = single(n);
      bb.share(cx.terms[0], k, 1.0);
      cx.sense = Sense::le;
      cx.b = 0.0;
      sdp.constraints.push_back(std::move(cx));
    }
  }
  {
    BlockConstraint cp;
    for (int n = 0; n < N; ++n) {
      HermTerm term{n, {}, {}};
      bb.power(term);
      cp.terms.push_back(std::move(term));
    }
    cp.sense = Sense::le;
    cp.b = cfg.Pt_bar;
    sdp.constraints.push_back(std::move(cp));
  }
  if (cfg.Rth > 0.0) {
    for (int k = 0; k < lay.K; ++k) {
      BlockConstraint cq;
      double rhs = N * (1.0 - cfg.Rth);
      for (int n = 0; n < N; ++n) {
        HermTerm term{n, {}, {}};
        bb.quad_streams(term, W.Qp[k][n], false);
        bb.linear(term, -W.cp[k][n], lay.p(k));
        bb.share(term, k, 1.0);
        rhs -= W.kp[k][n];
        cq.terms.push_back(std::move(term));
      }
      cq.sense = Sense::le;
      cq.b = rhs;
      sdp.constraints.push_back(std::move(cq));
    }
  }

  SdpOptions opt;
  opt.tol = prob.scfg.sdp_tol;
  opt.max_iter = prob.scfg.sdp_max_iter;
  opt.dump_csv = prob.scfg.sdp_dump_csv;
  BlockSdpSolution sol = sdp_solve_blocks(sdp, opt);
  inf.sdp_status = sol.status;
  inf.sdp_iterations = sol.iterations;

  // Per block: t-column mean s, residual covariance factor F, principal candidate.
  std::vector<CVec> mean(N), principal(N);
  std::vector<CMat> factor(N);
  double quality = 0.0;
  for (int n = 0; n < N; ++n) {
    CMat Z = 0.5 * (sol.X[n] + sol.X[n].adjoint());
    double ztt = std::max(Z(t, t).real(), 1e-12);
    CVec s = Z.col(t).head(t) / ztt;
    mean[n] = s;
    CMat cov = Z.topLeftCorner(t, t) / ztt - s * s.adjoint();
    EigResult ce = hermitian_eig(0.5 * (cov + cov.adjoint()));
    factor[n] = ce.vectors * ce.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    EigResult ze = hermitian_eig(Z);
    CVec z = ze.vectors.col(0);
    principal[n] = std::abs(z(t)) > 1e-8 ? CVec(z.head(t) / z(t)) : s;
    double lmax = std::max(ze.values(0), 1e-300);
    quality += Z.trace().real() / (lmax * d) / N;
  }
  inf.rank_quality = quality;

  auto scatter = [&](const std::vector<CVec>& xs) {
    Stack u(N, CVec::Zero(lay.size()));
    for (int n = 0; n < N; ++n)
      for (int i = 0; i < t; ++i) u[n](bb.slots()[i]) = xs[n](i);
    return u;
  };

  Scored best = score(prob, W, scatter(mean), anchor);
  auto consider = [&](Scored c) {
    if (better(c, best)) best = std::move(c);
  };
  consider(score(prob, W, scatter(principal), anchor));
  for (int r = 0; r < prob.scfg.randomization_count; ++r) {
    std::vector<CVec> xs(N);
    for (int n = 0; n < N; ++n) xs[n] = mean[n] + factor[n] * rng.cnormal_vector(t);
    consider(score(prob, W, scatter(xs), anchor));
  }

  if (best.violation > kFeasTol && !prev.empty()) {
    Stack start = prev;
    clean(prob, start);
    Scored fallback;
    fallback.u = start;
    fallback.check = domain_check(prob, W, start);
    fallback.violation = fallback.check.total();
    fallback.objective = stack_dist2(start, anchor);
    Stack target = best.u;
    for (double theta = 0.5; theta >= 1.0 / 256; theta *= 0.5) {
      Stack mix(N);
      for (int n = 0; n < N; ++n) mix[n] = start[n] + theta * (target[n] - start[n]);
      Scored c = score(prob, W, std::move(mix), anchor);
      if (c.violation <= kFeasTol) {
        if (better(c, fallback)) fallback = std::move(c);
        break;
      }
    }
    inf.fallback = true;
    best = std::move(fallback);
  }
  inf.violation = best.violation;
  if (best.violation > kFeasTol)
    throw DomainInfeasible("no feasible point found; worst constraint family: " + best.check.worst());
  return best.u;
}

Stack initial_point(const SolverProblem& prob, const ChannelSet& cs) {
  const auto& lay = prob.layout;
  const auto& cfg = prob.cfg;
  const int N = cfg.N, Nt = lay.Nt;
  Stack u(N, CVec::Zero(lay.size()));
  double pj = 0.0;
  for (int n = 0; n < N; ++n) {
    auto f = joint_witness(cfg, cs, prob.thr, n);
    for (int l = 0; l < lay.L; ++l) {
      u[n].segment(lay.f(l), Nt) = f[l];
      pj += f[l].squaredNorm();
    }
  }
  const auto ds = data_streams(lay);
  if (!ds.empty()) {
    const double share = std::max(0.0, cfg.Pt_bar - pj) / (N * static_cast<double>(ds.size()));
    for (int n = 0; n < N; ++n) {
      CVec sum = CVec::Zero(Nt);
      for (int k = 0; k < lay.K; ++k) {
        CVec h = prob.h_hat[k][n];
        double hn = h.norm();
        CVec dir = hn > 0.0 ? CVec(h / hn) : CVec(CVec::Unit(Nt, 0));
        sum += dir;
        if (lay.p_active[k]) u[n].segment(lay.p(k), Nt) = std::sqrt(share) * dir;
      }
      if (lay.common_active) {
        double sn = sum.norm();
        CVec dir = sn > 0.0 ? CVec(sum / sn) : CVec(CVec::Unit(Nt, 0));
        u[n].segment(lay.pc(), Nt) = std::sqrt(share) * dir;
      }
    }
  }
  repair_physical(prob, u);
  return u;
}

namespace {

// Scale the common-rate shares of each subcarrier down to the decodable
// common rate. The WMSE surrogate of the common rate is not a lower bound at
// omega = 1/eps, so the shares can overshoot slightly.
PrecoderSet decode_fitted(const SolverProblem& prob, const Stack& u) {
  PrecoderSet P = decode(prob, u);
  const int K = prob.cfg.K;
  for (int n = 0; n < prob.cfg.N; ++n) {
    double share = 0.0;
    for (int k = 0; k < K; ++k) share += P.c_bar[k][n];
    if (share <= 0.0) continue;
    PrecoderSlice sl = P.slice(n);
    double imin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k)
      imin = std::min(imin, saa_rate_estimates(prob.samples[k][n], sl, k, prob.cfg.N0).I_common);
    if (share > imin)
      for (int k = 0; k < K; ++k) P.c_bar[k][n] *= std::max(0.0, imin) / share;
  }
  return P;
}

double evaluate_sum_rate(const SolverProblem& prob, const ChannelSet& cs, const Stack& u, RateReport* out) {
  RateReport r = rate_report(prob.cfg, cs, decode_fitted(prob, u), prob.scfg.saa_samples);
  if (out) *out = r;
  return r.R_sum;
}

}  // namespace

SolveResult ao_admm_solve(const SolverProblem& prob, const ChannelSet& cs, const Stack& start, int start_id) {
  const auto& cfg = prob.cfg;
  const auto& scfg = prob.scfg;
  const int N = cfg.N;
  SolveResult res;
  res.scheme = prob.scheme;
  res.noma_common_user = prob.noma_common_user;
  res.start = start_id;

  if (cfg.Pt_bar == 0.0) {
    res.P = PrecoderSet::zeros(cfg.Nt, cfg.K, cfg.L, N);
    res.report = rate_report(cfg, cs, res.P, scfg.saa_samples);
    res.outer_converged = true;
    res.trace.push_back({0, 0, res.report.R_sum, 0.0, 0.0});
    return res;
  }

  RandomStream rng = RandomStream(cfg.seed).sub(
      "randomization", {static_cast<std::uint64_t>(prob.scheme), static_cast<std::uint64_t>(prob.noma_common_user + 1),
                        static_cast<std::uint64_t>(start_id)});

  Stack u = start.empty() ? initial_point(prob, cs) : start;
  clean(prob, u);
  WeightSet W = update_weights_and_filters(prob, u);
  if (domain_check(prob, W, u).total() > kFeasTol) {
    u = u_update(prob, W, u, {}, rng);
    W = update_weights_and_filters(prob, u);
  }

  AdmmState s;
  s.zeta = scfg.zeta;
  s.u = u;
  s.w.assign(N, CVec::Zero(prob.layout.size()));
  double sr = evaluate_sum_rate(prob, cs, s.u, &res.report);
  double best_sr = sr;
  Stack best_u = s.u;
  res.trace.push_back({0, 0, sr, 0.0, 0.0});

  for (int outer = 1; outer <= scfg.max_outer; ++outer) {
    s.outer_iter = outer;
    if (outer > 1) {
      W = update_weights_and_filters(prob, s.u);
      // new weights can make the carried shares undecodable
      repair_common(prob, W, s.u);
    }
    bool inner_ok = false;
    double rn = 0.0, qn = 0.0;
    for (int inner = 1; inner <= scfg.max_inner; ++inner) {
      s.inner_iter = inner;
      s.v = v_update(prob, W, s);
      Stack anchor(N);
      for (int n = 0; n < N; ++n) anchor[n] = s.v[n] + s.w[n];
      Stack u_old = s.u;
      UUpdateInfo info;
      s.u = u_update(prob, W, anchor, u_old, rng, &info, &s.multipliers);
      if (info.shortcut)
        ++res.projections_shortcut;
      else if (info.certified)
        ++res.projections_certified;
      else
        ++res.projections_sdp;
      dual_update_and_residuals(s, u_old);
      rn = s.r_norm.back();
      qn = s.q_norm.back();
      res.trace.push_back({outer, inner, sr, rn, qn});
      if (rn <= scfg.eps_a && qn <= scfg.eps_a) {
        inner_ok = true;
        break;
      }
    }
    if (!inner_ok) res.inner_max_hit = true;
    res.final_inner_converged = inner_ok;
    res.final_r = rn;
    res.final_q = qn;
    res.outer_iterations = outer;
    RateReport rep;
    double sr_new = evaluate_sum_rate(prob, cs, s.u, &rep);
    res.trace.back().sum_rate = sr_new;
    if (sr_new > best_sr) {
      best_sr = sr_new;
      best_u = s.u;
    }
    const double change = std::abs(sr_new - sr);
    sr = sr_new;
    if (change <= scfg.eps_r) {
      res.outer_converged = true;
      break;
    }
  }
  res.P = decode_fitted(prob, best_u);
  res.report = rate_report(cfg, cs, res.P, scfg.saa_samples);
  return res;
}

SolveResult solve_scheme(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                         const SolverConfig& scfg, const std::vector<PrecoderSet>& warm_starts) {
  if (scfg.scheme == Scheme::NOMA) {
    SolverProblem first = build_problem(cfg, cs, thr, scfg);
    SolverProblem second = build_problem(cfg, cs, thr, scfg, 1 - first.noma_common_user);
    SolveResult a = ao_admm_solve(first, cs);
    SolveResult b = ao_admm_solve(second, cs);
    return b.sum_rate() > a.sum_rate() ? b : a;
  }
  SolverProblem prob = build_problem(cfg, cs, thr, scfg);
  std::optional<SolveResult> best;
  std::string last_error;
  auto attempt = [&](const Stack& start, int id) {
    try {
      SolveResult r = ao_admm_solve(prob, cs, start, id);
      if (!best || r.sum_rate() > best->sum_rate()) best = std::move(r);
    } catch (const DomainInfeasible& e) {
      last_error = e.what();
    }
  };
  attempt({}, 0);
  if (scfg.scheme == Scheme::RSMA && scfg.multi_start)
    for (std::size_t i = 0; i < warm_starts.size(); ++i) attempt(encode(prob, warm_starts[i]), static_cast<int>(i) + 1);
  if (!best) throw DomainInfeasible(last_error);
  return *best;
}

}  // namespace rsjam
