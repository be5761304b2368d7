#include "quadswarm/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace quadswarm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-14;

struct Workspace {
  Eigen::MatrixXd J;        // n x n, rotated inverse Cholesky factor
  Eigen::MatrixXd R;        // n x n, upper-triangular factor of the active set
  Eigen::VectorXd d;        // n
  Eigen::VectorXd z;        // n, primal step direction
  Eigen::VectorXd r;        // dual step direction for active constraints
  Eigen::VectorXd u;        // multipliers, slot iq is the incoming constraint
  std::vector<int> active;  // constraint ids; first num_eq entries are equalities
  int iq = 0;               // active count
  double r_norm = 1.0;
};

// Zero d[iq+1..n-1] with Givens rotations carried into J; the surviving head
// of d becomes the new column of R. Returns false on linear dependence.
bool add_constraint(Workspace& ws, int n) {
  Eigen::VectorXd& d = ws.d;
  for (int j = n - 1; j >= ws.iq + 1; --j) {
    double cc = d(j - 1);
    double ss = d(j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d(j - 1) = -h;
    } else {
      d(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = ws.J(k, j - 1);
      const double t2 = ws.J(k, j);
      ws.J(k, j - 1) = t1 * cc + t2 * ss;
      ws.J(k, j) = xny * (t1 + ws.J(k, j - 1)) - t2;
    }
  }
  ws.iq++;
  ws.R.col(ws.iq - 1).head(ws.iq) = d.head(ws.iq);
  if (std::abs(d(ws.iq - 1)) <= kEps * ws.r_norm) return false;
  ws.r_norm = std::max(ws.r_norm, std::abs(d(ws.iq - 1)));
  return true;
}

// Remove active constraint with id `id` (never an equality) and restore the
// triangular structure of R.
void delete_constraint(Workspace& ws, int n, int num_eq, int id) {
  int qq = -1;
  for (int i = num_eq; i < ws.iq; ++i) {
    if (ws.active[i] == id) {
      qq = i;
      break;
    }
  }
  if (qq < 0) throw std::logic_error("qp: tried to drop an inactive constraint");

  for (int i = qq; i < ws.iq - 1; ++i) {
    ws.active[i] = ws.active[i + 1];
    ws.u(i) = ws.u(i + 1);
    ws.R.col(i) = ws.R.col(i + 1);
  }
  ws.active[ws.iq - 1] = ws.active[ws.iq];
  ws.u(ws.iq - 1) = ws.u(ws.iq);
  ws.active[ws.iq] = 0;
  ws.u(ws.iq) = 0.0;
  for (int j = 0; j < ws.iq; ++j) ws.R(j, ws.iq - 1) = 0.0;
  ws.iq--;

  if (ws.iq == 0) return;
  for (int j = qq; j < ws.iq; ++j) {
    double cc = ws.R(j, j);
    double ss = ws.R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    ws.R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      ws.R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      ws.R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < ws.iq; ++k) {
      const double t1 = ws.R(j, k);
      const double t2 = ws.R(j + 1, k);
      ws.R(j, k) = t1 * cc + t2 * ss;
      ws.R(j + 1, k) = xny * (t1 + ws.R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = ws.J(k, j);
      const double t2 = ws.J(k, j + 1);
      ws.J(k, j) = t1 * cc + t2 * ss;
      ws.J(k, j + 1) = xny * (ws.J(k, j) + t1) - t2;
    }
  }
}

void compute_step_directions(Workspace& ws, const Eigen::VectorXd& np, int n) {
  ws.d.noalias() = ws.J.transpose() * np;
  ws.z.noalias() = ws.J.rightCols(n - ws.iq) * ws.d.tail(n - ws.iq);
  if (ws.iq > 0) {
    ws.r.head(ws.iq) = ws.R.topLeftCorner(ws.iq, ws.iq)
                           .triangularView<Eigen::Upper>()
                           .solve(ws.d.head(ws.iq));
  }
}

void finalize_kkt(const QpProblem& p, QpSolution& sol) {
  const int me = static_cast<int>(p.Ae.rows());
  const int mi = static_cast<int>(p.Ai.rows());
  Eigen::VectorXd grad = p.H * sol.z + p.g;
  if (me > 0) grad.noalias() -= p.Ae.transpose() * sol.lambda_eq;
  if (mi > 0) grad.noalias() -= p.Ai.transpose() * sol.lambda_in;
  const double scale =
      std::max({1.0, p.g.lpNorm<Eigen::Infinity>(),
                (p.H * sol.z).lpNorm<Eigen::Infinity>()});
  sol.stationarity = grad.lpNorm<Eigen::Infinity>() / scale;

  double primal = 0.0;
  if (me > 0) primal = (p.Ae * sol.z + p.be).lpNorm<Eigen::Infinity>();
  double compl_max = 0.0;
  if (mi > 0) {
    const Eigen::VectorXd s = p.Ai * sol.z + p.bi;
    primal = std::max(primal, std::max(0.0, -s.minCoeff()));
    compl_max = (sol.lambda_in.array() * s.array()).abs().maxCoeff();
  }
  const double pscale = std::max(1.0, sol.z.lpNorm<Eigen::Infinity>());
  sol.primal_feasibility = primal / pscale;
  sol.complementarity = compl_max / std::max(1.0, scale * pscale);
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  const int n = problem.num_vars();
  const int me = static_cast<int>(problem.Ae.rows());
  const int mi = static_cast<int>(problem.Ai.rows());
  if (problem.H.cols() != n || problem.g.size() != n)
    throw std::invalid_argument("qp: H/g dimension mismatch");
  if ((me > 0 && problem.Ae.cols() != n) || problem.be.size() != me)
    throw std::invalid_argument("qp: equality dimension mismatch");
  if ((mi > 0 && problem.Ai.cols() != n) || problem.bi.size() != mi)
    throw std::invalid_argument("qp: inequality dimension mismatch");

  QpSolution sol;
  sol.lambda_eq = Eigen::VectorXd::Zero(me);
  sol.lambda_in = Eigen::VectorXd::Zero(mi);

  Eigen::MatrixXd h_reg = problem.H;
  if (options.diag_regularization > 0.0)
    h_reg.diagonal().array() += options.diag_regularization;

  Eigen::LLT<Eigen::MatrixXd> llt(h_reg);
  double bump = 1e-12;
  while (llt.info() != Eigen::Success && bump < 1e-4) {
    h_reg.diagonal().array() += bump;
    bump *= 100.0;
    llt.compute(h_reg);
  }
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("qp: Hessian is not positive definite");

  Workspace ws;
  ws.J = Eigen::MatrixXd(llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n)))
             .transpose();
  ws.R = Eigen::MatrixXd::Zero(n, n);
  ws.d = Eigen::VectorXd::Zero(n);
  ws.z = Eigen::VectorXd::Zero(n);
  ws.r = Eigen::VectorXd::Zero(n + 1);
  ws.u = Eigen::VectorXd::Zero(n + 1);
  ws.active.assign(n + 1, 0);

  Eigen::VectorXd x = -llt.solve(problem.g);

  const double feas_tol = options.tol;
  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : 10 * (n + me + mi) + 100;

  // Install equalities; they never leave the active set.
  int num_eq_active = 0;
  for (int i = 0; i < me; ++i) {
    const Eigen::VectorXd np = problem.Ae.row(i).transpose();
    compute_step_directions(ws, np, n);
    const double resid = np.dot(x) + problem.be(i);
    double t2 = 0.0;
    const double z_np = ws.z.dot(np);
    if (ws.z.lpNorm<Eigen::Infinity>() > kEps && std::abs(z_np) > kEps) {
      t2 = -resid / z_np;
    } else {
      // Dependent equality: consistent -> skip, inconsistent -> infeasible.
      if (std::abs(resid) > 1e-8 * std::max(1.0, problem.be.lpNorm<Eigen::Infinity>())) {
        sol.z = x;
        sol.status = QpStatus::infeasible;
        finalize_kkt(problem, sol);
        return sol;
      }
      continue;
    }
    x += t2 * ws.z;
    ws.u.head(ws.iq) -= t2 * ws.r.head(ws.iq);
    ws.u(ws.iq) = t2;
    ws.active[ws.iq] = -(i + 1);  // negative ids mark equalities
    if (!add_constraint(ws, n))
      throw std::invalid_argument("qp: linearly dependent equality constraints");
    num_eq_active++;
  }

  // Dual active-set loop over inequalities.
  int iter = 0;
  while (true) {
    if (++iter > max_iter) {
      sol.status = QpStatus::max_iterations;
      break;
    }

    // Most violated inactive inequality.
    int ip = -1;
    double worst = -feas_tol;
    Eigen::VectorXd s(mi);
    for (int i = 0; i < mi; ++i) {
      s(i) = problem.Ai.row(i).dot(x) + problem.bi(i);
      bool is_active = false;
      for (int k = num_eq_active; k < ws.iq; ++k)
        if (ws.active[k] == i) {
          is_active = true;
          break;
        }
      if (!is_active && s(i) < worst) {
        worst = s(i);
        ip = i;
      }
    }
    if (ip < 0) {
      sol.status = QpStatus::optimal;
      break;
    }

    const Eigen::VectorXd np = problem.Ai.row(ip).transpose();
    ws.u(ws.iq) = 0.0;
    ws.active[ws.iq] = ip;
    double s_ip = s(ip);

    bool resolved = false;
    while (!resolved) {
      if (++iter > max_iter) break;
      compute_step_directions(ws, np, n);

      // Longest dual step the active inequalities allow.
      double t1 = kInf;
      int drop_id = -1;
      for (int k = num_eq_active; k < ws.iq; ++k) {
        if (ws.r(k) > kEps && ws.u(k) / ws.r(k) < t1) {
          t1 = ws.u(k) / ws.r(k);
          drop_id = ws.active[k];
        }
      }
      // Step to the constraint surface.
      const double z_np = ws.z.dot(np);
      const double t2 = (ws.z.lpNorm<Eigen::Infinity>() > kEps && z_np > kEps)
                            ? -s_ip / z_np
                            : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        // No primal progress possible and the dual ray is unbounded: the
        // violated constraint is inconsistent with the active set.
        sol.status = QpStatus::infeasible;
        sol.z = x;
        sol.lambda_eq.setZero();
        sol.lambda_in.setZero();
        finalize_kkt(problem, sol);
        return sol;
      }

      if (t2 >= kInf) {
        // Dual-only step, then drop the blocking constraint.
        ws.u.head(ws.iq) -= t * ws.r.head(ws.iq);
        ws.u(ws.iq) += t;
        delete_constraint(ws, n, num_eq_active, drop_id);
        continue;
      }

      x += t * ws.z;
      ws.u.head(ws.iq) -= t * ws.r.head(ws.iq);
      ws.u(ws.iq) += t;

      if (std::abs(t - t2) <= kEps * std::max(1.0, std::abs(t2))) {
        ws.active[ws.iq] = ip;
        if (!add_constraint(ws, n))
          throw std::logic_error("qp: failed to add independent constraint");
        resolved = true;
      } else {
        delete_constraint(ws, n, num_eq_active, drop_id);
        s_ip = np.dot(x) + problem.bi(ip);
      }
    }
    if (!resolved && iter > max_iter) {
      sol.status = QpStatus::max_iterations;
      break;
    }
  }

  sol.z = x;
  sol.iterations = iter;
  for (int k = 0; k < ws.iq; ++k) {
    if (ws.active[k] < 0)
      sol.lambda_eq(-ws.active[k] - 1) = ws.u(k);
    else
      sol.lambda_in(ws.active[k]) = ws.u(k);
  }
  finalize_kkt(problem, sol);
  return sol;
}

}  // namespace quadswarm
