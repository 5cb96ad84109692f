// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "istn/common.hpp"

namespace istn {

// Convex QCQP over a real decision vector partitioned into blocks:
//   minimize  g0(x)   s.t.  gi(x) <= 0,
//   g(x) = sum_b x_b' P_b x_b + r' x + c,   all P_b PSD.
// Complex beamforming columns enter through the real lifting helpers below;
// every quadratic stays block diagonal, which the Newton solver exploits
// (per-block Cholesky plus a Woodbury correction for the constraint dyads).

struct QuadForm {
  std::vector<Eigen::MatrixXd> P;  // one (possibly 0x0) matrix per block
  Eigen::VectorXd r;
  double c = 0.0;
};

struct QcqpProblem {
  std::vector<int> block_sizes;
  QuadForm objective;
  std::vector<QuadForm> constraints;
  // hard constraints stay exact during the phase-1 violation minimization
  // (the power budgets); soft ones are relaxed by the slack variable
  std::vector<uint8_t> hard;

  int dim() const {
    int n = 0;
    for (int b : block_sizes) n += b;
    return n;
  }
  const std::vector<int>& offsets() const {
    if (offsets_.size() != block_sizes.size()) {
      offsets_.resize(block_sizes.size());
      int a = 0;
      for (size_t b = 0; b < block_sizes.size(); ++b) {
        offsets_[b] = a;
        a += block_sizes[b];
      }
    }
    return offsets_;
  }
  QuadForm make_form() const {
    QuadForm f;
    f.P.resize(block_sizes.size());
    f.r = Eigen::VectorXd::Zero(dim());
    return f;
  }

 private:
  mutable std::vector<int> offsets_;
};

struct QcqpOptions {
  double tol = 1e-6;          // KKT residual target
  int max_newton = 600;       // total Newton iteration budget
  bool validate_psd = true;
  const Eigen::VectorXd* warm_start = nullptr;
  double phase1_target = 1e-5;  // interior margin sought before phase 2 (normalized units)
};

struct QcqpResult {
  bool feasible = false;
  bool boundary = false;   // feasible set has (numerically) empty interior
  bool certified = false;  // all three KKT residuals within tol
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  double objective = 0.0;
  double phase1_violation = 0.0;  // max constraint violation at the phase-1 optimum
  double r_stationarity = 0.0, r_primal = 0.0, r_compslack = 0.0;
  int newton_iters = 0;
  std::string error;
};

QcqpResult solve_qcqp(const QcqpProblem& prob, const QcqpOptions& opts = {});

// ---- real-lifting helpers ----

/// adds weight * |u * f_block - gamma|^2 for a complex row vector u acting on
/// the complex column stored as [Re; Im] in `block`
void add_abs2_affine(QuadForm& form, const QcqpProblem& layout, int block,
                     const Eigen::RowVectorXcd& u, cplx gamma, double weight = 1.0);

/// adds coef * |x_block|^2
void add_scaled_identity(QuadForm& form, const QcqpProblem& layout, int block, double coef);

/// adds p*x^2 + r*x + c on a scalar (size-1) block
void add_scalar_quad(QuadForm& form, const QcqpProblem& layout, int block, double p, double r,
                     double c);

/// view of a complex column stored in a real block
Eigen::VectorXcd complex_block(const Eigen::VectorXd& x, const QcqpProblem& layout, int block);
void set_complex_block(Eigen::VectorXd& x, const QcqpProblem& layout, int block,
                       const Eigen::VectorXcd& v);

double eval_form(const QuadForm& f, const QcqpProblem& layout, const Eigen::VectorXd& x);
Eigen::VectorXd grad_form(const QuadForm& f, const QcqpProblem& layout, const Eigen::VectorXd& x);

}  // namespace istn
