#pragma once

#include <Eigen/Dense>

namespace quadswarm {

/// Dense convex QP:
///   min 0.5 z'Hz + g'z   s.t.  Ae z + be = 0,  Ai z + bi >= 0.
/// H must be positive definite (callers add their own diagonal
/// regularization; solve_qp adds options.diag_regularization on top).
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd Ae;  // may be 0 x n
  Eigen::VectorXd be;
  Eigen::MatrixXd Ai;  // may be 0 x n
  Eigen::VectorXd bi;

  int num_vars() const { return static_cast<int>(H.rows()); }
};

enum class QpStatus {
  optimal,
  infeasible,       // a constraint provably cannot be satisfied (dual unbounded)
  max_iterations,
};

struct QpOptions {
  double diag_regularization = 0.0;
  int max_iterations = 0;  // 0 => 10 (n + m) + 100
  double tol = 1e-10;      // constraint violation tolerance inside the active-set loop
};

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd lambda_eq;   // multipliers of Ae rows (sign-free)
  Eigen::VectorXd lambda_in;   // multipliers of Ai rows (>= 0)
  QpStatus status = QpStatus::max_iterations;
  int iterations = 0;
  // Scaled KKT residuals at the returned point.
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
};

/// Goldfarb-Idnani dual active-set method. Equalities are installed first and
/// never leave the active set; infeasibility is declared only when a violated
/// constraint admits no primal progress and an unbounded dual ray exists.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace quadswarm
