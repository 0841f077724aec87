#include "rgrasp/controller.hpp"

namespace rgrasp {

Controller::Controller(RobotModel model, PlannerKind kind, FieldParams field_params,
                       TrackerParams tracker_params, std::vector<SdfObject> environment)
    : model_(std::move(model)),
      kind_(kind),
      fields_(std::move(field_params)),
      tracker_params_(tracker_params),
      environment_(std::move(environment)),
      pairs_(make_collision_pairs(model_, environment_)),
      tracker_(tracker_params) {
  fields_.validate();
  const int m = static_cast<int>(model_.fingertip_frames.size());
  for (int i = 0; i < m; ++i) planners_.emplace_back();
  if (fields_.gain.size()) {
    baseline_gain_ = fields_.gain;
  } else {
    baseline_gain_ = 2.5 * MatX::Identity(3 * m, 3 * m);
  }
}

VecX Controller::tick(const VecX& q, const std::vector<SdfObject>& objects,
                      const std::vector<std::vector<Vec3>>& grasps_object_frame,
                      ControllerDiag* diag) {
  const int m = static_cast<int>(model_.fingertip_frames.size());
  const KinematicState state = forward_kinematics(model_, q);

  int target_idx = -1;
  for (int i = 0; i < static_cast<int>(objects.size()); ++i)
    if (objects[i].role == SdfRole::target) target_idx = i;
  if (target_idx < 0) throw ConfigError("controller: no target object");
  const Iso3& target_pose = objects[target_idx].pose;

  // Candidate sets in world frame; for two fingertips both assignment orders
  // compete, since the selection metric is order-sensitive.
  VecX x(3 * m);
  for (int i = 0; i < m; ++i) x.segment<3>(3 * i) = state.fingertips[i].position;
  std::vector<VecX> candidates;
  for (const auto& g : grasps_object_frame) {
    VecX c(3 * m);
    for (int i = 0; i < m; ++i) c.segment<3>(3 * i) = target_pose * g[i];
    candidates.push_back(c);
    if (m == 2) {
      VecX swapped(6);
      swapped << c.tail<3>(), c.head<3>();
      candidates.push_back(swapped);
    }
  }
  const int selected = select_target(x, candidates, fields_.w);
  const VecX& xs = candidates[selected];

  VelocityTargets targets;
  targets.selected_target = selected;
  for (int i = 0; i < m; ++i) targets.x_star.push_back(xs.segment<3>(3 * i));

  std::vector<PathSolution> paths;
  if (kind_ == PlannerKind::ours) {
    // Shared clearance set: every scene object plus the environment planes.
    std::vector<PathConstraint> constraints;
    for (const auto& obj : objects)
      constraints.push_back({obj, obj.role == SdfRole::obstacle
                                      ? tracker_params_.eps_obstacle
                                      : tracker_params_.eps_target});
    for (const auto& env : environment_)
      constraints.push_back({env, tracker_params_.eps_target});
    for (int i = 0; i < m; ++i) {
      PathProblem prob;
      prob.start = state.fingertips[i].position;
      prob.goal = targets.x_star[i];
      prob.constraints = constraints;
      paths.push_back(planners_[i].plan(prob));
      targets.xdot_des.push_back(
          fingertip_field(paths.back(), prob.start, prob.goal, fields_));
    }
  } else {
    const VecX xdot = linear_baseline(x, xs, baseline_gain_);
    for (int i = 0; i < m; ++i) targets.xdot_des.push_back(xdot.segment<3>(3 * i));
  }

  double g_score = 0.0;
  targets.omega_des.assign(m, Vec3::Zero());
  if (m == 2) {
    const StabilityResult stab =
        stability_score(state.fingertips[0].position, state.fingertips[0].rotation,
                        state.fingertips[1].position, state.fingertips[1].rotation);
    if (!stab.degenerate) {
      g_score = stab.g;
      targets.omega_des[0] =
          orientation_field(stab.dg_dR1, state.fingertips[0].rotation);
      targets.omega_des[1] =
          orientation_field(stab.dg_dR2, state.fingertips[1].rotation);
      targets.alpha = weight_alpha(stab.g, fields_.eta_g, fields_.temp_g);
    }
  }

  const double h = (x - xs).norm();
  targets.beta = weight_beta(h, fields_.eta_h, fields_.temp_h);
  const MatX s = model_.selection_matrix();
  VecX q_gr_nominal = fields_.q_gr_nominal;
  if (q_gr_nominal.size() != s.rows()) q_gr_nominal = VecX::Zero(s.rows());
  targets.qdot_gr_des =
      gripper_field(s * q, q_gr_nominal, fields_.delta_gr, fields_.v_const_gr);

  const TrackerOutput out =
      tracker_.track(model_, q, targets, pairs_, environment_, objects);

  if (diag) {
    diag->selected_target = selected;
    diag->x_star = targets.x_star;
    diag->g = g_score;
    diag->alpha = targets.alpha;
    diag->beta = targets.beta;
    double err = 0.0;
    for (int i = 0; i < m; ++i)
      err = std::max(err,
                     (state.fingertips[i].position - targets.x_star[i]).norm());
    diag->max_error = err;
    diag->paths = std::move(paths);
    diag->tracker = out;
  }
  return out.qdot_des;
}

void Controller::reset() {
  for (auto& p : planners_) p.reset();
  tracker_.reset();
}

}  // namespace rgrasp
