#ifndef RGRASP_TRACKER_HPP_
#define RGRASP_TRACKER_HPP_

#include "rgrasp/collision.hpp"
#include "rgrasp/fields.hpp"
#include "rgrasp/qp.hpp"

namespace rgrasp {

struct TrackerParams {
  double horizon = 0.15;        // H, seconds
  double eps_gamma = 0.005;     // m, self/environment clearance
  double eps_target = 0.01;     // m, gripper-vs-target margin
  double eps_obstacle = 0.05;   // m, gripper-vs-obstacle margin
  double lambda_reg = 1e-4;     // Tikhonov weight on ||qdot||^2
  double prune_distance = 0.15; // m, rows farther than this are dropped
  QpSettings qp;

  TrackerParams() {
    qp.tol_abs = qp.tol_rel = 1e-6;
    qp.max_iters = 2000;
  }
  void validate() const;
};

struct TrackerOutput {
  VecX qdot_des;
  QpStatus qp_status = QpStatus::max_iters;
  bool infeasible = false;  // safe stop: qdot = 0
  bool aborted = false;     // non-finite inputs: previous qdot reused
  int active_rows = 0;      // constraint rows tight at the solution
  int iterations = 0;
  double max_row_violation = 0.0;  // worst linearized-constraint residual
  double cost_position = 0.0, cost_orientation = 0.0, cost_gripper = 0.0;
};

/// Tracking QP from the weighted field targets and the linearized clearance,
/// joint-limit, and velocity-limit rows. Gamma and the distance stack must be
/// evaluated at q.
QpProblem build_qp(const RobotModel& model, const VecX& q,
                   const std::vector<FingertipJacobian>& jacobians,
                   const VelocityTargets& targets, const GammaResult& gam,
                   const ObjectDistanceStack& distances,
                   const TrackerParams& params);

/// Stateful per-tick tracker: warm starts from the previous tick, backs off
/// unconverged iterates, and stops safely on infeasibility.
class Tracker {
public:
  explicit Tracker(TrackerParams params = {}) : params_(params), solver_(params.qp) {
    params_.validate();
  }

  TrackerOutput track(const RobotModel& model, const VecX& q,
                      const VelocityTargets& targets, const CollisionPairSet& pairs,
                      const std::vector<SdfObject>& environment,
                      const std::vector<SdfObject>& objects);

  void reset();
  const TrackerParams& params() const { return params_; }

private:
  TrackerParams params_;
  QpSolver solver_;
  std::optional<QpSolution> warm_;
  VecX prev_qdot_;
};

}  // namespace rgrasp

#endif  // RGRASP_TRACKER_HPP_
