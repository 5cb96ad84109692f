// SPDX-License-Identifier: Apache-2.0
#include "istn/qcqp.hpp"

#include <cstdio>

#include <algorithm>
#include <cmath>
#include <limits>

namespace istn {

namespace {

/// d' P d for the pure quadratic part
double quad_along(const QuadForm& f, const QcqpProblem& layout, const std::vector<int>& off,
                  const Eigen::VectorXd& d) {
  double v = 0.0;
  for (size_t b = 0; b < f.P.size(); ++b) {
    if (f.P[b].size() == 0) continue;
    const auto db = d.segment(off[b], layout.block_sizes[b]);
    v += db.dot(f.P[b] * db);
  }
  return v;
}

/// per-block SPD factor of the barrier Hessian's block-diagonal part
class BlockChol {
 public:
  explicit BlockChol(const QcqpProblem& layout) : layout_(layout), off_(layout.offsets()) {
    blocks_.resize(layout.block_sizes.size());
    llt_.resize(layout.block_sizes.size());
    for (size_t b = 0; b < blocks_.size(); ++b)
      blocks_[b].resize(layout.block_sizes[b], layout.block_sizes[b]);
  }

  void reset() {
    for (auto& m : blocks_) m.setZero();
  }

  void add_form(const QuadForm& f, double coef) {
    for (size_t b = 0; b < blocks_.size(); ++b)
      if (f.P[b].size() != 0) blocks_[b] += coef * f.P[b];
  }

  bool factorize(double ridge_rel = 1e-12) {
    double tr = 0.0;
    int n = 0;
    for (const auto& m : blocks_) {
      tr += m.trace();
      n += static_cast<int>(m.rows());
    }
    const double ridge = ridge_rel * (1.0 + std::abs(tr) / std::max(1, n));
    for (size_t b = 0; b < blocks_.size(); ++b) {
      Eigen::MatrixXd m = blocks_[b];
      m.diagonal().array() += ridge;
      llt_[b].compute(m);
      if (llt_[b].info() != Eigen::Success) {
        // escalate the ridge until the factorization goes through
        double boost = std::max(1e-8, 1e-6 * std::abs(m.trace()) / std::max<int>(1, m.rows()));
        for (int tries = 0; tries < 8 && llt_[b].info() != Eigen::Success; ++tries, boost *= 100) {
          m.diagonal().array() += boost;
          llt_[b].compute(m);
        }
        if (llt_[b].info() != Eigen::Success) return false;
      }
    }
    return true;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd out(rhs.size());
    for (size_t b = 0; b < blocks_.size(); ++b)
      out.segment(off_[b], layout_.block_sizes[b]) =
          llt_[b].solve(rhs.segment(off_[b], layout_.block_sizes[b]));
    return out;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    for (size_t b = 0; b < blocks_.size(); ++b)
      out.segment(off_[b], layout_.block_sizes[b]) =
          blocks_[b] * v.segment(off_[b], layout_.block_sizes[b]);
    return out;
  }

 private:
  const QcqpProblem& layout_;
  std::vector<int> off_;
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt_;
};

/// solve (B + U U') d = rhs with one iterative-refinement pass
Eigen::VectorXd woodbury_solve(const BlockChol& B, const Eigen::MatrixXd& U,
                               const Eigen::VectorXd& rhs) {
  const int m = static_cast<int>(U.cols());
  if (m == 0) return B.solve(rhs);
  Eigen::MatrixXd Z(U.rows(), m);
  for (int i = 0; i < m; ++i) Z.col(i) = B.solve(U.col(i));
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(m, m) + U.transpose() * Z;
  Eigen::LDLT<Eigen::MatrixXd> S_fact(S);
  auto solve_once = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd base = B.solve(b);
    Eigen::VectorXd y = S_fact.solve(U.transpose() * base);
    return Eigen::VectorXd(base - Z * y);
  };
  Eigen::VectorXd d = solve_once(rhs);
  const Eigen::VectorXd resid = rhs - (B.apply(d) + U * (U.transpose() * d));
  d += solve_once(resid);
  return d;
}

/// largest step keeping a*t^2 + b*t + c < 0 (c < 0 on entry)
double max_step_quadratic(double a, double b, double c) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a <= 1e-300) {
    if (b <= 0.0) return kInf;
    return -c / b;
  }
  const double disc = b * b - 4.0 * a * c;
  return (-b + std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
}

void validate_psd(const QcqpProblem& prob) {
  auto check = [&](const QuadForm& f, const char* what) {
    for (const auto& pb : f.P) {
      if (pb.size() == 0) continue;
      Eigen::MatrixXd sym = 0.5 * (pb + pb.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = std::max(1.0, std::abs(es.eigenvalues().maxCoeff()));
      if (lo < -1e-9 * hi) throw istn_error(std::string("solve_qcqp: non-PSD ") + what);
    }
  };
  check(prob.objective, "objective");
  for (const auto& g : prob.constraints) check(g, "constraint");
}

struct Engine {
  const QcqpProblem& prob;
  std::vector<int> off;
  int n;
  int iters = 0;

  explicit Engine(const QcqpProblem& p) : prob(p), off(p.offsets()), n(p.dim()) {}

  double g(int i, const Eigen::VectorXd& x) const {
    return eval_form(prob.constraints[i], prob, x);
  }

  // ---- phase 2: barrier path following on the original variables ----
  // returns false on a line-search stall (caller may re-run phase 1)
  bool phase2(Eigen::VectorXd& x, double tol, int max_newton, double& t_out, bool warm) {
    const int m = static_cast<int>(prob.constraints.size());
    BlockChol B(prob);
    Eigen::MatrixXd U(n, m);
    std::vector<double> gval(m);

    double f0 = eval_form(prob.objective, prob, x);
    // a warm start sits near the optimum; skip part of the early path
    const double gap0 = warm ? 0.01 : 0.1;
    double t = std::max(1.0, m / (gap0 * (1.0 + std::abs(f0))));
    // moderate path depth; the active-set polish finishes the job
    const double t_end = std::min(2.0 / tol, 1e5);

    while (true) {
      bool done_t = t >= t_end;
      double best_gnorm = std::numeric_limits<double>::infinity();
      int stall = 0;
      for (int it = 0; it < 40; ++it) {
        if (iters >= max_newton) return true;  // budget exhausted; report honest residuals
        ++iters;
        for (int i = 0; i < m; ++i) {
          gval[i] = g(i, x);
          if (!(gval[i] < 0.0)) return false;  // lost the interior (should not happen)
        }
        Eigen::VectorXd grad = t * grad_form(prob.objective, prob, x);
        B.reset();
        B.add_form(prob.objective, 2.0 * t);
        for (int i = 0; i < m; ++i) {
          const double inv = 1.0 / (-gval[i]);
          Eigen::VectorXd gi = grad_form(prob.constraints[i], prob, x);
          grad += inv * gi;
          U.col(i) = inv * gi;
          B.add_form(prob.constraints[i], 2.0 * inv);
        }
        if (!B.factorize()) return false;
        Eigen::VectorXd d = woodbury_solve(B, U, -grad);
        const double dec2 = -grad.dot(d) >= 0 ? grad.dot(-d) : 0.0;

        // stage exit: loose centering mid-path, tight gradient at the end
        const double gnorm = grad.lpNorm<Eigen::Infinity>() / t;
        const double gref =
            1.0 + grad_form(prob.objective, prob, x).lpNorm<Eigen::Infinity>();
        if (done_t && gnorm <= 0.5 * tol * gref) break;
        if (!done_t && dec2 <= 1e-9 * (1.0 + std::abs(t * f0))) break;
        if (gnorm < 0.9 * best_gnorm) {
          best_gnorm = gnorm;
          stall = 0;
        } else if (++stall >= 12) {
          break;  // numerically stuck at this t
        }

        // fraction-to-boundary: consume at most 95% of any margin per step
        double amax = 1.0;
        for (int i = 0; i < m; ++i) {
          const double a = quad_along(prob.constraints[i], prob, off, d);
          const double b = grad_form(prob.constraints[i], prob, x).dot(d);
          amax = std::min(amax, max_step_quadratic(a, b, 0.95 * gval[i]));
        }
        if (!(amax > 1e-14)) return done_t;  // pinned to the boundary

        auto phi = [&](const Eigen::VectorXd& xx) {
          double v = t * eval_form(prob.objective, prob, xx);
          for (int i = 0; i < m; ++i) {
            const double gi = g(i, xx);
            if (!(gi < 0.0)) return std::numeric_limits<double>::infinity();
            v -= std::log(-gi);
          }
          return v;
        };
        const double phi0 = phi(x);
        const double slope = grad.dot(d);
        double alpha = std::min(1.0, amax);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
          if (phi(x + alpha * d) <= phi0 + 0.25 * alpha * slope) {
            x += alpha * d;
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!moved) break;  // flat to machine precision at this t
        f0 = eval_form(prob.objective, prob, x);
      }
      if (done_t || iters >= max_newton) break;
      t = std::min(t * 20.0, t_end);
    }
    t_out = t;
    return true;
  }

  // ---- active-set polish ----
  // Newton on the KKT system of the active constraints; the barrier only
  // needs a moderate path depth, the polish delivers machine-precision
  // stationarity and exact complementary slackness.
  bool polish(Eigen::VectorXd& x, Eigen::VectorXd& lambda, double tol) {
    const int m = static_cast<int>(prob.constraints.size());
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
      if (g(i, x) > -1e-3 || lambda(i) > 1e-3) active.push_back(i);

    BlockChol H(prob);
    for (int pass = 0; pass < 8; ++pass) {
      const int k = static_cast<int>(active.size());
      Eigen::VectorXd lam = Eigen::VectorXd::Zero(k);
      for (int a = 0; a < k; ++a) lam(a) = std::max(lambda(active[a]), 0.0);
      Eigen::VectorXd xw = x;

      bool converged = false;
      for (int it = 0; it < 30 && !converged; ++it) {
        ++iters;
        Eigen::VectorXd r_d = grad_form(prob.objective, prob, xw);
        Eigen::MatrixXd G(k, n);
        Eigen::VectorXd r_p(k);
        for (int a = 0; a < k; ++a) {
          const Eigen::VectorXd gi = grad_form(prob.constraints[active[a]], prob, xw);
          r_d += lam(a) * gi;
          G.row(a) = gi;
          r_p(a) = g(active[a], xw);
        }
        const double res = std::max(r_d.lpNorm<Eigen::Infinity>(),
                                    k ? r_p.lpNorm<Eigen::Infinity>() : 0.0);
        if (res < 1e-11 * (1.0 + grad_form(prob.objective, prob, xw).lpNorm<Eigen::Infinity>())) {
          converged = true;
          break;
        }
        H.reset();
        H.add_form(prob.objective, 2.0);
        for (int a = 0; a < k; ++a)
          if (lam(a) != 0.0) H.add_form(prob.constraints[active[a]], 2.0 * lam(a));
        // the optimum can be non-unique along directions invisible to the
        // objective and the active set; a visible ridge keeps dx bounded
        if (!H.factorize(1e-8)) return false;
        Eigen::VectorXd dx;
        Eigen::VectorXd dlam;
        if (k > 0) {
          Eigen::MatrixXd HinvGt(n, k);
          for (int a = 0; a < k; ++a) HinvGt.col(a) = H.solve(G.row(a).transpose());
          Eigen::MatrixXd S = G * HinvGt;
          S.diagonal().array() += 1e-14 * (1.0 + S.trace() / std::max(1, k));
          dlam = S.ldlt().solve(r_p - G * H.solve(r_d));
          dx = -H.solve(r_d + G.transpose() * dlam);
        } else {
          dx = -H.solve(r_d);
          dlam = Eigen::VectorXd();
        }
        // damped update on the KKT residual
        double alpha = 1.0;
        auto residual_at = [&](double a_step) {
          Eigen::VectorXd xx = xw + a_step * dx;
          Eigen::VectorXd ll = lam + a_step * dlam;
          Eigen::VectorXd rd = grad_form(prob.objective, prob, xx);
          double rp = 0.0;
          for (int a = 0; a < k; ++a) {
            rd += ll(a) * grad_form(prob.constraints[active[a]], prob, xx);
            rp = std::max(rp, std::abs(g(active[a], xx)));
          }
          return std::max(rd.lpNorm<Eigen::Infinity>(), rp);
        };
        const double r0 = res;
        for (int bt = 0; bt < 30; ++bt) {
          if (residual_at(alpha) <= (1.0 - 0.25 * alpha) * r0) break;
          alpha *= 0.5;
        }
        xw += alpha * dx;
        lam += alpha * dlam;
        if (alpha < 1e-6) {
#ifdef ISTN_QCQP_DEBUG
          std::fprintf(stderr, "polish: step collapse res=%.2e it=%d\n", residual_at(0.0), it);
#endif
          break;
        }
      }
      if (!converged) {
        // ambiguous weakly-active constraint: retry without the slackest one
        if (k > 1) {
          int slackest = 0;
          for (int a = 1; a < k; ++a)
            if (g(active[a], x) < g(active[slackest], x)) slackest = a;
          active.erase(active.begin() + slackest);
          continue;
        }
        return false;
      }

      // active set validation: duals nonnegative, inactive constraints inside
      int worst = -1;
      for (int a = 0; a < k; ++a)
        if (lam(a) < -1e-9 && (worst < 0 || lam(a) < lam(worst))) worst = a;
      if (worst >= 0) {
        active.erase(active.begin() + worst);
        continue;
      }
      bool ok = true;
      for (int i = 0; i < m; ++i) {
        if (std::find(active.begin(), active.end(), i) != active.end()) continue;
        if (g(i, xw) > tol) {
          active.push_back(i);
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      x = xw;
      lambda.setZero();
      for (int a = 0; a < k; ++a) lambda(active[a]) = std::max(lam(a), 0.0);
      return true;
    }
    return false;
  }

  // ---- phase 1: minimize the max soft-constraint violation ----
  // hard constraints are kept exact; returns the achieved violation s
  double phase1(Eigen::VectorXd& x, double target_margin, int max_newton) {
    const int m = static_cast<int>(prob.constraints.size());
    std::vector<int> soft, hardset;
    for (int i = 0; i < m; ++i)
      (i < static_cast<int>(prob.hard.size()) && prob.hard[i] ? hardset : soft).push_back(i);
    if (soft.empty()) {
      double worst = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) worst = std::max(worst, g(i, x));
      return worst;
    }

    // fall back to an all-soft split when the start violates a hard constraint
    for (int j : hardset)
      if (!(g(j, x) < 0.0)) {
        soft.resize(m);
        for (int i = 0; i < m; ++i) soft[i] = i;
        hardset.clear();
        break;
      }

    double s_hi = -std::numeric_limits<double>::infinity();
    for (int i : soft) s_hi = std::max(s_hi, g(i, x));
    double s = s_hi + 1.0 + 0.1 * std::abs(s_hi);

    BlockChol B(prob);
    Eigen::MatrixXd U(n + 1, m);
    double t = 1.0;
    const double t_end = 1e9;

    auto soft_margin = [&](const Eigen::VectorXd& xx) {
      double worst = -std::numeric_limits<double>::infinity();
      for (int i : soft) worst = std::max(worst, g(i, xx));
      return worst;
    };

    while (true) {
      for (int it = 0; it < 50; ++it) {
        if (iters >= max_newton) return soft_margin(x);
        ++iters;
        if (soft_margin(x) <= -target_margin) return soft_margin(x);

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(n + 1);
        grad(n) = t;
        B.reset();
        int col = 0;
        bool ok = true;
        for (int i : soft) {
          const double hi = g(i, x) - s;
          if (!(hi < 0.0)) {
            ok = false;
            break;
          }
          const double inv = 1.0 / (-hi);
          Eigen::VectorXd gi(n + 1);
          gi.head(n) = grad_form(prob.constraints[i], prob, x);
          gi(n) = -1.0;
          grad += inv * gi;
          U.col(col++) = inv * gi;
          B.add_form(prob.constraints[i], 2.0 * inv);
        }
        for (int j : hardset) {
          const double gj = g(j, x);
          if (!(gj < 0.0)) {
            ok = false;
            break;
          }
          const double inv = 1.0 / (-gj);
          Eigen::VectorXd gi(n + 1);
          gi.head(n) = grad_form(prob.constraints[j], prob, x);
          gi(n) = 0.0;
          grad += inv * gi;
          U.col(col++) = inv * gi;
          B.add_form(prob.constraints[j], 2.0 * inv);
        }
        if (!ok) return soft_margin(x);

        // the slack direction has no curvature of its own
        struct SolveAug {
          const BlockChol& B;
          double sridge;
          Eigen::VectorXd operator()(const Eigen::VectorXd& rhs) const {
            Eigen::VectorXd out(rhs.size());
            const int nn = static_cast<int>(rhs.size()) - 1;
            out.head(nn) = B.solve(rhs.head(nn));
            out(nn) = rhs(nn) / sridge;
            return out;
          }
        };
        if (!B.factorize()) return soft_margin(x);
        SolveAug Baug{B, 1e-8 * (1.0 + std::abs(t))};
        const Eigen::MatrixXd Uact = U.leftCols(col);
        Eigen::VectorXd base = Baug(-grad);
        Eigen::MatrixXd Z(n + 1, col);
        for (int i = 0; i < col; ++i) Z.col(i) = Baug(Uact.col(i));
        Eigen::MatrixXd S = Eigen::MatrixXd::Identity(col, col) + Uact.transpose() * Z;
        Eigen::VectorXd y = S.ldlt().solve(Uact.transpose() * base);
        Eigen::VectorXd d = base - Z * y;

        double amax = 1.0;
        for (int i : soft) {
          const double a = quad_along(prob.constraints[i], prob, off, d.head(n));
          const double b = grad_form(prob.constraints[i], prob, x).dot(d.head(n)) - d(n);
          amax = std::min(amax, max_step_quadratic(a, b, 0.95 * (g(i, x) - s)));
        }
        for (int j : hardset) {
          const double a = quad_along(prob.constraints[j], prob, off, d.head(n));
          const double b = grad_form(prob.constraints[j], prob, x).dot(d.head(n));
          amax = std::min(amax, max_step_quadratic(a, b, 0.95 * g(j, x)));
        }
        if (!(amax > 1e-14)) break;

        auto phi = [&](const Eigen::VectorXd& xx, double ss) {
          double v = t * ss;
          for (int i : soft) {
            const double hi = g(i, xx) - ss;
            if (!(hi < 0.0)) return std::numeric_limits<double>::infinity();
            v -= std::log(-hi);
          }
          for (int j : hardset) {
            const double gj = g(j, xx);
            if (!(gj < 0.0)) return std::numeric_limits<double>::infinity();
            v -= std::log(-gj);
          }
          return v;
        };
        const double phi0 = phi(x, s);
        const double slope = grad.dot(d);
        const double dec2 = -slope;
        if (dec2 <= 1e-12 * (1.0 + std::abs(t * s))) break;
        double alpha = std::min(1.0, amax);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
          if (phi(x + alpha * d.head(n), s + alpha * d(n)) <= phi0 + 0.25 * alpha * slope) {
            x += alpha * d.head(n);
            s += alpha * d(n);
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!moved) break;
      }
      if (soft_margin(x) <= -target_margin) return soft_margin(x);
      if (t >= t_end || iters >= max_newton) return soft_margin(x);
      t = std::min(t * 20.0, t_end);
    }
  }
};

}  // namespace

double eval_form(const QuadForm& f, const QcqpProblem& layout, const Eigen::VectorXd& x) {
  const auto& off = layout.offsets();
  double v = f.c + f.r.dot(x);
  for (size_t b = 0; b < f.P.size(); ++b) {
    if (f.P[b].size() == 0) continue;
    const auto xb = x.segment(off[b], layout.block_sizes[b]);
    v += xb.dot(f.P[b] * xb);
  }
  return v;
}

Eigen::VectorXd grad_form(const QuadForm& f, const QcqpProblem& layout, const Eigen::VectorXd& x) {
  const auto& off = layout.offsets();
  Eigen::VectorXd grad = f.r;
  for (size_t b = 0; b < f.P.size(); ++b) {
    if (f.P[b].size() == 0) continue;
    grad.segment(off[b], layout.block_sizes[b]) +=
        2.0 * (f.P[b] * x.segment(off[b], layout.block_sizes[b]));
  }
  return grad;
}

QcqpResult solve_qcqp(const QcqpProblem& prob_in, const QcqpOptions& opts) {
  QcqpResult res;
  const int n = prob_in.dim();
  const int m = static_cast<int>(prob_in.constraints.size());
  if (prob_in.objective.r.size() != n) {
    res.error = "objective linear term has wrong dimension";
    return res;
  }
  if (opts.validate_psd) validate_psd(prob_in);

  // normalize each constraint to unit scale; mixed magnitudes (MSE bounds
  // near 2^-R against power budgets in watts) otherwise degrade the Newton
  // correction. Residuals and duals are reported for the scaled forms.
  QcqpProblem prob = prob_in;
  for (auto& g : prob.constraints) {
    double scale = std::abs(g.c);
    scale = std::max(scale, g.r.lpNorm<Eigen::Infinity>());
    for (const auto& pb : g.P)
      if (pb.size() != 0) scale = std::max(scale, pb.cwiseAbs().maxCoeff());
    if (scale <= 0.0 || !std::isfinite(scale)) scale = 1.0;
    const double inv = 1.0 / scale;
    for (auto& pb : g.P)
      if (pb.size() != 0) pb *= inv;
    g.r *= inv;
    g.c *= inv;
  }

  Engine eng(prob);
  Eigen::VectorXd x = opts.warm_start && opts.warm_start->size() == n
                          ? *opts.warm_start
                          : Eigen::VectorXd::Zero(n);

  if (m == 0) {
    // pure quadratic: one ridged Newton solve is exact
    BlockChol B(prob);
    B.reset();
    B.add_form(prob.objective, 2.0);
    if (!B.factorize()) {
      res.error = "singular unconstrained system";
      return res;
    }
    x = B.solve(-prob.objective.r);
    res.feasible = res.certified = true;
    res.x = x;
    res.objective = eval_form(prob.objective, prob, x);
    res.lambda = Eigen::VectorXd();
    return res;
  }

  auto finalize = [&](double t_for_duals) {
    res.x = x;
    res.objective = eval_form(prob.objective, prob, x);
    res.newton_iters = eng.iters;
    Eigen::VectorXd stat = grad_form(prob.objective, prob, x);
    const double gref = 1.0 + stat.lpNorm<Eigen::Infinity>();
    res.r_primal = 0.0;
    res.r_compslack = 0.0;
    for (int i = 0; i < m; ++i) {
      const double gi = eng.g(i, x);
      res.r_primal = std::max(res.r_primal, gi);
      stat += res.lambda(i) * grad_form(prob.constraints[i], prob, x);
      res.r_compslack = std::max(res.r_compslack, std::abs(res.lambda(i) * gi));
    }
    res.r_primal = std::max(0.0, res.r_primal);
    res.r_stationarity = stat.lpNorm<Eigen::Infinity>() / gref;
    res.certified = res.r_stationarity <= opts.tol && res.r_primal <= opts.tol &&
                    res.r_compslack <= opts.tol;
    (void)t_for_duals;
  };

  double margin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) margin = std::max(margin, eng.g(i, x));

  if (margin > -opts.phase1_target) {
    Eigen::VectorXd x1 = x;
    const double viol = eng.phase1(x1, opts.phase1_target, opts.max_newton);
    res.phase1_violation = viol;  // signed: negative means interior with that margin
    if (viol > opts.tol) {
      res.feasible = false;
      res.x = x1;
      res.objective = eval_form(prob.objective, prob, x1);
      res.lambda = Eigen::VectorXd::Zero(m);
      res.newton_iters = eng.iters;
      return res;
    }
    x = x1;
    if (viol > -opts.phase1_target) {
      // numerically empty interior: the phase-1 point is as good as it gets
      res.feasible = true;
      res.boundary = true;
      res.x = x;
      res.objective = eval_form(prob.objective, prob, x);
      res.lambda = Eigen::VectorXd::Zero(m);
      res.r_primal = std::max(0.0, viol);
      res.newton_iters = eng.iters;
      return res;
    }
  }

  double t_final = 1.0;
  const bool warm = opts.warm_start && opts.warm_start->size() == n;
  eng.phase2(x, opts.tol, opts.max_newton, t_final, warm);

  res.feasible = true;
  res.lambda.resize(m);
  for (int i = 0; i < m; ++i) {
    const double gi = eng.g(i, x);
    res.lambda(i) = gi < 0.0 ? 1.0 / (t_final * (-gi)) : 0.0;
  }
  eng.polish(x, res.lambda, opts.tol);
  finalize(t_final);
#ifdef ISTN_QCQP_DEBUG
  if (!res.certified) {
    std::fprintf(stderr, "qcqp: stat=%.2e primal=%.2e comp=%.2e t=%.2e iters=%d\n",
                 res.r_stationarity, res.r_primal, res.r_compslack, t_final, res.newton_iters);
    for (int i = 0; i < m; ++i)
      std::fprintf(stderr, "   g[%d] = %.3e  lambda = %.3e  |grad_g| = %.3e\n", i, eng.g(i, x),
                   res.lambda(i), grad_form(prob.constraints[i], prob, x).lpNorm<Eigen::Infinity>());
    std::fprintf(stderr, "   |grad_f0| = %.3e\n",
                 grad_form(prob.objective, prob, x).lpNorm<Eigen::Infinity>());
  }
#endif
  return res;
}

// ---- lifting helpers ----

void add_abs2_affine(QuadForm& form, const QcqpProblem& layout, int block,
                     const Eigen::RowVectorXcd& u, cplx gamma, double weight) {
  const auto& off = layout.offsets();
  const int d = static_cast<int>(u.size());
  if (layout.block_sizes[block] != 2 * d) throw istn_error("add_abs2_affine: block size mismatch");
  Eigen::VectorXd a1(2 * d), a2(2 * d);
  a1 << u.real().transpose(), -u.imag().transpose();
  a2 << u.imag().transpose(), u.real().transpose();
  auto& P = form.P[block];
  if (P.size() == 0) P = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  P += weight * (a1 * a1.transpose() + a2 * a2.transpose());
  form.r.segment(off[block], 2 * d) -=
      2.0 * weight * (gamma.real() * a1 + gamma.imag() * a2);
  form.c += weight * std::norm(gamma);
}

void add_scaled_identity(QuadForm& form, const QcqpProblem& layout, int block, double coef) {
  const int sz = layout.block_sizes[block];
  auto& P = form.P[block];
  if (P.size() == 0) P = Eigen::MatrixXd::Zero(sz, sz);
  P.diagonal().array() += coef;
}

void add_scalar_quad(QuadForm& form, const QcqpProblem& layout, int block, double p, double r,
                     double c) {
  const auto& off = layout.offsets();
  if (layout.block_sizes[block] != 1) throw istn_error("add_scalar_quad: block is not scalar");
  auto& P = form.P[block];
  if (P.size() == 0) P = Eigen::MatrixXd::Zero(1, 1);
  P(0, 0) += p;
  form.r(off[block]) += r;
  form.c += c;
}

Eigen::VectorXcd complex_block(const Eigen::VectorXd& x, const QcqpProblem& layout, int block) {
  const auto& off = layout.offsets();
  const int d = layout.block_sizes[block] / 2;
  Eigen::VectorXcd v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx{x(off[block] + i), x(off[block] + d + i)};
  return v;
}

void set_complex_block(Eigen::VectorXd& x, const QcqpProblem& layout, int block,
                       const Eigen::VectorXcd& v) {
  const auto& off = layout.offsets();
  const int d = layout.block_sizes[block] / 2;
  for (int i = 0; i < d; ++i) {
    x(off[block] + i) = v(i).real();
    x(off[block] + d + i) = v(i).imag();
  }
}

}  // namespace istn
