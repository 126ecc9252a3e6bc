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

#pragma once

#include "rsjam/rng.hpp"
#include "rsjam/types.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace rsjam {

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

struct EigResult {
  RVec values;   // descending
  CMat vectors;  // orthonormal columns, deterministic phase and basis choice
};

// Throws std::invalid_argument when A is not Hermitian within 1e-10 (relative).
// Degenerate eigenspaces are resolved deterministically: repeatedly take the
// first canonical direction with a non-negligible projection onto the
// remaining eigenspace; that entry of the chosen vector is real-positive.
EigResult hermitian_eig(const CMat& A);

// Count of eigenvalues above rel * max(values).
int numerical_rank(const RVec& descending_values, double rel = 1e-9);

// ---------------------------------------------------------------------------
// Semidefinite programming

enum class Sense { le, ge, eq };
enum class SdpStatus { optimal, infeasible, max_iterations };

std::string to_string(SdpStatus s);

struct SdpConstraint {
  CMat A;
  Sense sense = Sense::eq;
  double b = 0.0;
};

// minimize tr(C S) s.t. tr(A_i S) (sense) b_i, S >= 0.
struct SdpProblem {
  CMat C;
  std::vector<SdpConstraint> constraints;
  int dim() const { return static_cast<int>(C.rows()); }
};

struct SdpSolution {
  CMat S;
  SdpStatus status = SdpStatus::max_iterations;
  double primal_residual = 0.0;  // max constraint violation / (1 + |b_i|)
  double dual_residual = 0.0;    // relative Frobenius norm of C - A^T y - Z
  double gap = 0.0;              // relative duality gap
  double objective = 0.0;
  int iterations = 0;
  RVec y;
};

struct SdpOptions {
  double tol = 1e-9;
  int max_iter = 200;
  int divergence_window = 50;  // consecutive growing-gap iterations before declaring infeasible
  std::string dump_csv;        // iterate log, empty disables
};

SdpSolution sdp_solve(const SdpProblem& problem, double tol = 1e-9, int max_iter = 200,
                      const std::string& dump_csv = {});

// Multi-block form: every constraint is a sum of per-block Hermitian terms.
// A term is dense, or sparse with upper-triangle entries (r <= c); the lower
// entry (c, r) = conj(v) is implied.
struct HermTerm {
  int block = 0;
  CMat dense;
  std::vector<std::tuple<int, int, cd>> sparse;
  bool is_dense() const { return dense.size() > 0; }
};

struct BlockConstraint {
  std::vector<HermTerm> terms;
  Sense sense = Sense::eq;
  double b = 0.0;
};

struct BlockSdp {
  std::vector<int> dims;
  std::vector<CMat> C;  // one per block
  std::vector<BlockConstraint> constraints;
};

struct BlockSdpSolution {
  std::vector<CMat> X;
  SdpStatus status = SdpStatus::max_iterations;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double objective = 0.0;
  int iterations = 0;
  RVec y;
};

BlockSdpSolution sdp_solve_blocks(const BlockSdp& problem, const SdpOptions& opt = {});

// Re tr(A X) for one term, and for a whole constraint across blocks.
double term_dot(const HermTerm& t, const CMat& X);
double constraint_value(const BlockConstraint& c, const std::vector<CMat>& X);

// ---------------------------------------------------------------------------
// Rank-one extraction

struct RankOneContext {
  const SdpProblem* problem = nullptr;  // constraints read as x^H A_i x (sense) b_i
  double power_cap = -1.0;              // ||x||^2 <= power_cap when >= 0
};

struct RankOneResult {
  CVec x;
  double violation = 0.0;
  double objective = 0.0;
  double quality = 0.0;  // tr(S) / (lambda_max(S) * d); equals 1/d for rank one
  int candidate = 0;     // 0 = principal eigenvector, > 0 = randomization index
};

double quadratic_violation(const SdpProblem& p, const CVec& x);

RankOneResult rank_one_extract(const CMat& S, const RankOneContext& ctx, int randomization_count,
                               RandomStream& rng);

// ---------------------------------------------------------------------------
// Proximal quadratic step: argmin 0.5 x^H H x + Re(q^H x) + zeta/2 ||x - a||^2.

CVec prox_quadratic_solve(const CMat& H, const CVec& q, const CVec& a, double zeta);
RVec prox_quadratic_solve(const RMat& H, const RVec& q, const RVec& a, double zeta);

}  // namespace rsjam
