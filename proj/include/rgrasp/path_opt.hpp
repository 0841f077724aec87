#ifndef RGRASP_PATH_OPT_HPP_
#define RGRASP_PATH_OPT_HPP_

#include <optional>

#include "rgrasp/qp.hpp"
#include "rgrasp/sdf.hpp"

namespace rgrasp {

/// One clearance constraint for the path: d(c(s), object) >= margin.
struct PathConstraint {
  SdfObject object;
  double margin = 0.01;
};

struct PathProblem {
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
  std::vector<PathConstraint> constraints;
  int grid_size = 100;   // N_s waypoints including endpoints
  int sqp_iters = 3;
  double via_radius = 0.10;   // via-point sphere around the goal
  int via_candidates = 256;
  double trust_region = 0.05;  // per-waypoint step box, meters

  void validate() const;
};

struct PathSolution {
  MatX waypoints;  // 3 x N_s, endpoints pinned
  Vec3 initial_direction = Vec3::Zero();  // unit, or zero when degenerate
  double max_violation = 0.0;             // max over waypoints of (margin - d)+
  bool converged = false;
  bool degenerate_direction = false;
};

/// Sum over waypoints of positive margin violation.
double path_violation_sum(const PathProblem& problem, const MatX& waypoints);
/// Max over waypoints of positive margin violation.
double path_violation_max(const PathProblem& problem, const MatX& waypoints);
double path_length(const MatX& waypoints);

/// Two-segment initial guess through the best via point on a sphere around
/// the goal; straight line when it is already violation-free.
MatX init_via_point(const PathProblem& problem);

/// Few-iteration SQP around `init` using linearized clearance constraints
/// and a trust-region box, each step solved by the QP module.
PathSolution optimize_path(const PathProblem& problem, const MatX& init,
                           const QpSolver& solver);

/// Per-fingertip planner with tick-to-tick warm starting.
class PathOptimizer {
public:
  explicit PathOptimizer(QpSettings qp = in_loop_qp_settings()) : solver_(qp) {}

  PathSolution plan(const PathProblem& problem);
  void reset() { previous_.reset(); }

  static QpSettings in_loop_qp_settings() {
    QpSettings s;
    s.tol_abs = s.tol_rel = 1e-4;  // relaxed inside the planning loop
    s.max_iters = 400;
    return s;
  }

private:
  QpSolver solver_;
  std::optional<MatX> previous_;
};

}  // namespace rgrasp

#endif  // RGRASP_PATH_OPT_HPP_
