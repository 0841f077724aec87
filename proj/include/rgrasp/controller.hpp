#ifndef RGRASP_CONTROLLER_HPP_
#define RGRASP_CONTROLLER_HPP_

#include "rgrasp/path_opt.hpp"
#include "rgrasp/scene.hpp"
#include "rgrasp/tracker.hpp"

namespace rgrasp {

enum class PlannerKind { ours, linear };

/// Per-tick diagnostics published alongside the commanded velocity.
struct ControllerDiag {
  int selected_target = -1;
  std::vector<Vec3> x_star;  // world-frame fingertip targets
  double g = 0.0;            // stability score, rad
  double alpha = 0.0, beta = 0.0;
  double max_error = 0.0;    // max fingertip-center error, m
  std::vector<PathSolution> paths;  // ours planner only
  TrackerOutput tracker;
};

/// One planning tick: select_target -> path optimization -> velocity fields
/// -> tracking QP. Holds warm-start state across ticks; one instance per
/// episode (and per thread).
class Controller {
public:
  Controller(RobotModel model, PlannerKind kind, FieldParams field_params,
             TrackerParams tracker_params, std::vector<SdfObject> environment);

  /// Objects carry current poses; grasps are per-candidate fingertip points
  /// in the target object's frame.
  VecX tick(const VecX& q, const std::vector<SdfObject>& objects,
            const std::vector<std::vector<Vec3>>& grasps_object_frame,
            ControllerDiag* diag = nullptr);

  void reset();
  const RobotModel& model() const { return model_; }

private:
  RobotModel model_;
  PlannerKind kind_;
  FieldParams fields_;
  TrackerParams tracker_params_;
  std::vector<SdfObject> environment_;
  CollisionPairSet pairs_;
  std::vector<PathOptimizer> planners_;  // one per fingertip
  Tracker tracker_;
  MatX baseline_gain_;
};

}  // namespace rgrasp

#endif  // RGRASP_CONTROLLER_HPP_
