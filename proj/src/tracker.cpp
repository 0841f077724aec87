#include "rgrasp/tracker.hpp"

namespace rgrasp {

void TrackerParams::validate() const {
  if (horizon <= 0.0) throw ConfigError("tracker horizon must be > 0");
  if (eps_gamma <= 0.0 || eps_target <= 0.0 || eps_obstacle <= 0.0)
    throw ConfigError("tracker margins must be > 0");
  if (lambda_reg < 0.0) throw ConfigError("lambda_reg must be >= 0");
  if (prune_distance <= 0.0) throw ConfigError("prune_distance must be > 0");
}

QpProblem build_qp(const RobotModel& model, const VecX& q,
                   const std::vector<FingertipJacobian>& jacobians,
                   const VelocityTargets& targets, const GammaResult& gam,
                   const ObjectDistanceStack& distances,
                   const TrackerParams& params) {
  const int n = model.dof();
  const int m = static_cast<int>(jacobians.size());
  if (static_cast<int>(targets.xdot_des.size()) != m ||
      static_cast<int>(targets.omega_des.size()) != m)
    throw ConfigError("tracker: one velocity target per fingertip required");

  QpProblem qp;
  qp.P = 2.0 * params.lambda_reg * MatX::Identity(n, n);
  qp.c = VecX::Zero(n);
  for (int i = 0; i < m; ++i) {
    const MatX& jx = jacobians[i].linear;
    qp.P += 2.0 * jx.transpose() * jx;
    qp.c -= 2.0 * jx.transpose() * targets.xdot_des[i];
    if (targets.alpha > 0.0) {
      const MatX& jr = jacobians[i].angular;
      qp.P += 2.0 * targets.alpha * jr.transpose() * jr;
      qp.c -= 2.0 * targets.alpha * jr.transpose() * targets.omega_des[i];
    }
  }
  if (targets.beta > 0.0) {
    const MatX s = model.selection_matrix();
    if (targets.qdot_gr_des.size() != s.rows())
      throw ConfigError("tracker: gripper target has wrong length");
    qp.P += 2.0 * targets.beta * s.transpose() * s;
    qp.c -= 2.0 * targets.beta * s.transpose() * targets.qdot_gr_des;
  }

  // Constraint rows: pruned Gamma, pruned object distances, then the
  // position-limit and velocity-limit boxes.
  const double h = params.horizon;
  std::vector<int> g_rows, d_rows;
  for (int i = 0; i < gam.values.size(); ++i)
    if (gam.values[i] <= params.prune_distance) g_rows.push_back(i);
  for (int i = 0; i < distances.values.size(); ++i)
    if (distances.values[i] <= params.prune_distance) d_rows.push_back(i);

  const int r = static_cast<int>(g_rows.size() + d_rows.size()) + 2 * n;
  qp.A = MatX::Zero(r, n);
  qp.lower.resize(r);
  qp.upper.resize(r);
  int row = 0;
  for (int i : g_rows) {
    qp.A.row(row) = gam.jacobian.row(i);
    qp.lower[row] = (params.eps_gamma - gam.values[i]) / h;
    qp.upper[row] = kInf;
    ++row;
  }
  for (int i : d_rows) {
    const double eps = distances.row_roles[i] == SdfRole::obstacle
                           ? params.eps_obstacle
                           : params.eps_target;
    qp.A.row(row) = distances.jacobian.row(i);
    qp.lower[row] = (eps - distances.values[i]) / h;
    qp.upper[row] = kInf;
    ++row;
  }
  for (int i = 0; i < n; ++i) {
    qp.A(row, i) = 1.0;
    qp.lower[row] = (model.q_min[i] - q[i]) / h;
    qp.upper[row] = (model.q_max[i] - q[i]) / h;
    ++row;
  }
  for (int i = 0; i < n; ++i) {
    qp.A(row, i) = 1.0;
    qp.lower[row] = model.qd_min[i];
    qp.upper[row] = model.qd_max[i];
    ++row;
  }
  return qp;
}

namespace {

bool finite(const QpProblem& qp) {
  return qp.P.allFinite() && qp.c.allFinite() && qp.A.allFinite() &&
         ((qp.lower.array() == -kInf) || qp.lower.array().isFinite()).all() &&
         ((qp.upper.array() == kInf) || qp.upper.array().isFinite()).all();
}

bool rows_hold(const QpProblem& qp, const VecX& z, double tol) {
  const VecX az = qp.A * z;
  for (int i = 0; i < az.size(); ++i)
    if (az[i] < qp.lower[i] - tol || az[i] > qp.upper[i] + tol) return false;
  return true;
}

}  // namespace

TrackerOutput Tracker::track(const RobotModel& model, const VecX& q,
                             const VelocityTargets& targets,
                             const CollisionPairSet& pairs,
                             const std::vector<SdfObject>& environment,
                             const std::vector<SdfObject>& objects) {
  const int n = model.dof();
  if (prev_qdot_.size() != n) prev_qdot_ = VecX::Zero(n);

  TrackerOutput out;
  out.qdot_des = VecX::Zero(n);

  const KinematicState state = forward_kinematics(model, q);
  const std::vector<FingertipJacobian> jac = fingertip_jacobians(model, state);
  const GammaResult gam = gamma(model, state, pairs, environment);
  const ObjectDistanceStack dist = object_distance_stack(model, state, objects);
  const QpProblem qp = build_qp(model, q, jac, targets, gam, dist, params_);

  bool targets_finite = true;
  for (const Vec3& v : targets.xdot_des) targets_finite &= v.allFinite();
  for (const Vec3& v : targets.omega_des) targets_finite &= v.allFinite();
  if (!targets_finite || !finite(qp)) {
    out.aborted = true;
    out.qdot_des = prev_qdot_;
    return out;
  }

  const QpSolution sol = solver_.solve(qp, warm_);
  out.qp_status = sol.status;
  out.iterations = sol.iterations;

  if (sol.status == QpStatus::primal_infeasible) {
    out.infeasible = true;
    warm_.reset();
    prev_qdot_ = out.qdot_des;
    return out;
  }

  VecX qdot = sol.z;
  if (sol.status == QpStatus::max_iters) {
    // Back off the unconverged iterate until the linearized rows hold.
    for (int tries = 0; tries < 5 && !rows_hold(qp, qdot, 1e-6); ++tries)
      qdot *= 0.5;
    warm_.reset();
  } else {
    warm_ = sol;
  }

  out.qdot_des = qdot;
  prev_qdot_ = qdot;

  const VecX az = qp.A * qdot;
  for (int i = 0; i < az.size(); ++i) {
    if ((std::isfinite(qp.lower[i]) && az[i] - qp.lower[i] < 1e-6) ||
        (std::isfinite(qp.upper[i]) && qp.upper[i] - az[i] < 1e-6))
      ++out.active_rows;
    out.max_row_violation = std::max(
        {out.max_row_violation, qp.lower[i] - az[i], az[i] - qp.upper[i]});
  }

  for (size_t i = 0; i < jac.size(); ++i) {
    out.cost_position += (targets.xdot_des[i] - jac[i].linear * qdot).squaredNorm();
    out.cost_orientation +=
        targets.alpha * (targets.omega_des[i] - jac[i].angular * qdot).squaredNorm();
  }
  if (targets.beta > 0.0 && targets.qdot_gr_des.size())
    out.cost_gripper =
        targets.beta *
        (targets.qdot_gr_des - model.selection_matrix() * qdot).squaredNorm();
  return out;
}

void Tracker::reset() {
  warm_.reset();
  prev_qdot_.resize(0);
}

}  // namespace rgrasp
