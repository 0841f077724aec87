#include "rgrasp/sim.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <random>
#include <thread>

namespace rgrasp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Mat3 exp_rot(const Vec3& w) {
  const double n = w.norm();
  if (n < 1e-14) return Mat3::Identity();
  return Eigen::AngleAxisd(n, w / n).toRotationMatrix();
}

// Scripted world state shared by both loop modes.
struct World {
  std::vector<SdfObject> objects;
  std::vector<bool> teleport_done;
  std::vector<bool> push_logged;

  explicit World(const Scene& scene)
      : objects(scene.objects),
        teleport_done(scene.disturbances.size(), false),
        push_logged(scene.disturbances.size(), false) {}

  // Applies teleports due at time t and integrates object velocities over dt.
  void advance(const Scene& scene, double t, double dt, Trace& trace) {
    for (size_t i = 0; i < scene.disturbances.size(); ++i) {
      const DisturbanceEvent& ev = scene.disturbances[i];
      if (ev.kind == DisturbanceKind::object_teleport && !teleport_done[i] &&
          t >= ev.time) {
        objects[ev.object].pose = ev.new_pose;
        teleport_done[i] = true;
        trace.events.push_back({t, "disturbance", "teleport " + objects[ev.object].name});
      }
      if (ev.kind == DisturbanceKind::robot_push && !push_logged[i] &&
          t >= ev.time) {
        push_logged[i] = true;
        trace.events.push_back({t, "disturbance", "robot push"});
      }
      if (ev.kind == DisturbanceKind::object_velocity && t >= ev.time &&
          t < ev.time + ev.duration) {
        Iso3& pose = objects[ev.object].pose;
        pose.translation() += dt * ev.linear_velocity;
        pose.linear() = exp_rot(dt * ev.angular_velocity) * pose.linear();
      }
    }
  }

  VecX push_offset(const Scene& scene, double t, int dof) const {
    VecX off = VecX::Zero(dof);
    for (const DisturbanceEvent& ev : scene.disturbances)
      if (ev.kind == DisturbanceKind::robot_push && t >= ev.time &&
          t < ev.time + ev.duration)
        off += ev.qdot_offset;
    return off;
  }
};

VecX initial_q(const Scene& scene) {
  VecX q = scene.q0;
  if (scene.seed != 0) {
    // Seeded arm-pose jitter gives independent repetitions of one scenario.
    std::mt19937 rng(scene.seed);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    for (int i = 0; i < std::min<int>(7, q.size()); ++i) q[i] += u(rng);
  }
  return q;
}

struct AuditResult {
  double min_gamma = kInf;
  double min_dist = kInf;
  std::vector<Vec3> fingertips;
};

AuditResult audit(const RobotModel& model, const CollisionPairSet& pairs,
                  const std::vector<SdfObject>& environment,
                  const std::vector<SdfObject>& objects, const VecX& q) {
  AuditResult a;
  const KinematicState state = forward_kinematics(model, q);
  const VecX g = gamma_values(model, state, pairs, environment);
  if (g.size()) a.min_gamma = g.minCoeff();
  const VecX d = object_distance_values(model, state, objects);
  if (d.size()) a.min_dist = d.minCoeff();
  for (const auto& f : state.fingertips) a.fingertips.push_back(f.position);
  return a;
}

// Planner worker used by the threaded mode: single request and result slots,
// last value wins, never blocks the integrator.
struct PlannerThread {
  std::mutex mu;
  std::condition_variable cv;
  bool stop = false;
  bool busy = false;
  bool has_request = false;
  double t_request = 0.0;
  VecX q_request;
  std::vector<SdfObject> objects_request;

  bool has_result = false;
  double t_result = 0.0;
  VecX qdot_result;
  ControllerDiag diag_result;
  double wall_ms = 0.0;

  void run(Controller& controller, const std::vector<std::vector<Vec3>>& grasps) {
    for (;;) {
      VecX q;
      std::vector<SdfObject> objects;
      double t;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return stop || has_request; });
        if (stop) return;
        q = q_request;
        objects = objects_request;
        t = t_request;
        has_request = false;
        busy = true;
      }
      ControllerDiag diag;
      const auto t0 = Clock::now();
      VecX qdot;
      try {
        qdot = controller.tick(q, objects, grasps, &diag);
      } catch (const std::exception&) {
        qdot = VecX::Zero(q.size());
      }
      const double ms = ms_since(t0);
      {
        std::unique_lock<std::mutex> lock(mu);
        qdot_result = qdot;
        diag_result = diag;
        wall_ms = ms;
        t_result = t;
        has_result = true;
        busy = false;
      }
    }
  }
};

}  // namespace

Trace run_episode(const Scene& scene, const SimOptions& options) {
  scene.validate();
  const RobotModel& model = scene.robot;
  const int n = model.dof();
  const double dt = 1.0 / scene.control_rate;
  const int steps_per_tick =
      std::max(1, static_cast<int>(std::lround(scene.control_rate / scene.planning_rate)));
  const int max_steps = static_cast<int>(std::lround(scene.duration_limit / dt));
  const int hold_steps = std::max(1, static_cast<int>(std::lround(options.hold_time / dt)));
  // Success may only be declared once every scheduled disturbance has played
  // out; otherwise an early grasp would cut the perturbation schedule short.
  double success_gate = 0.0;
  for (const DisturbanceEvent& ev : scene.disturbances)
    success_gate = std::max(success_gate, ev.time + ev.duration);

  Trace trace;
  World world(scene);
  VecX q = initial_q(scene);
  Controller controller(model, options.planner, scene.field_params,
                        scene.tracker_params, scene.environment);
  const CollisionPairSet pairs = make_collision_pairs(model, scene.environment);

  VecX qdot_cmd = VecX::Zero(n);
  std::vector<Vec3> x_star;
  double alpha = 0.0, beta = 0.0;
  bool was_infeasible = false;
  int in_band = 0;

  PlannerThread worker;
  std::thread worker_thread;
  if (!options.deterministic)
    worker_thread = std::thread([&] { worker.run(controller, scene.grasps_object_frame); });

  auto stop_worker = [&] {
    if (worker_thread.joinable()) {
      {
        std::unique_lock<std::mutex> lock(worker.mu);
        worker.stop = true;
      }
      worker.cv.notify_all();
      worker_thread.join();
    }
  };

  auto note_tick = [&](double t, const ControllerDiag& diag, double wall) {
    TickRecord rec;
    rec.t = t;
    rec.wall_ms = wall;
    rec.qp_iterations = diag.tracker.iterations;
    rec.qp_status = diag.tracker.qp_status;
    rec.max_qp_residual = diag.tracker.max_row_violation;
    trace.ticks.push_back(rec);
    x_star = diag.x_star;
    alpha = diag.alpha;
    beta = diag.beta;
    if (diag.tracker.infeasible && !was_infeasible)
      trace.events.push_back({t, "stall", "tracking QP infeasible"});
    was_infeasible = diag.tracker.infeasible;
  };

  // Threaded mode runs against the wall clock so planner latency shows up as
  // genuinely stale commands rather than an unbounded backlog.
  const auto wall_start = Clock::now();
  for (int step = 0; step <= max_steps; ++step) {
    const double t = step * dt;
    if (!options.deterministic)
      std::this_thread::sleep_until(
          wall_start + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(t)));
    trace.duration = t;
    world.advance(scene, t, dt, trace);

    if (step % steps_per_tick == 0) {
      if (options.deterministic) {
        ControllerDiag diag;
        const auto t0 = Clock::now();
        qdot_cmd = controller.tick(q, world.objects, scene.grasps_object_frame, &diag);
        note_tick(t, diag, ms_since(t0));
      } else {
        std::unique_lock<std::mutex> lock(worker.mu);
        if (worker.busy || worker.has_request) {
          ++trace.overruns;
          TickRecord rec;
          rec.t = t;
          rec.skipped = true;
          trace.ticks.push_back(rec);
        } else {
          worker.q_request = q;
          worker.objects_request = world.objects;
          worker.t_request = t;
          worker.has_request = true;
          lock.unlock();
          worker.cv.notify_all();
        }
      }
    }
    if (!options.deterministic) {
      std::unique_lock<std::mutex> lock(worker.mu);
      if (worker.has_result) {
        qdot_cmd = worker.qdot_result;
        note_tick(worker.t_result, worker.diag_result, worker.wall_ms);
        worker.has_result = false;
      }
    }

    const VecX qdot = qdot_cmd + world.push_offset(scene, t, n);
    q += dt * qdot;

    const AuditResult a = audit(model, pairs, scene.environment, world.objects, q);
    double err = kInf;
    if (!x_star.empty()) {
      err = 0.0;
      for (size_t i = 0; i < a.fingertips.size(); ++i)
        err = std::max(err, (a.fingertips[i] - x_star[i]).norm());
    }
    trace.terminal_error = err;

    if (options.record_steps) {
      StepRecord rec;
      rec.t = t;
      rec.q = q;
      rec.fingertips = a.fingertips;
      rec.x_star = x_star;
      rec.max_error = err;
      rec.min_gamma = a.min_gamma;
      rec.min_dist = a.min_dist;
      rec.alpha = alpha;
      rec.beta = beta;
      trace.steps.push_back(rec);
    }

    if (a.min_gamma < 0.0 || a.min_dist < 0.0) {
      trace.collision = true;
      trace.events.push_back({t, "collision",
                              a.min_gamma < 0.0 ? "gamma row negative"
                                                : "object distance negative"});
      break;
    }
    if (err < options.success_threshold && t >= success_gate) {
      if (++in_band >= hold_steps) {
        trace.success = true;
        trace.events.push_back({t, "success", "error band held"});
        break;
      }
    } else {
      in_band = 0;
    }
  }

  stop_worker();
  if (!trace.success && !trace.collision) {
    trace.timeout = true;
    trace.events.push_back({trace.duration, "timeout", "duration limit reached"});
  }
  return trace;
}

TraceSummary evaluate_trace(const Trace& trace) {
  TraceSummary s;
  s.success = trace.success;
  s.collision = trace.collision;
  s.terminal_error = trace.terminal_error;
  s.overruns = trace.overruns;
  for (const StepRecord& rec : trace.steps) {
    s.min_gamma = std::min(s.min_gamma, rec.min_gamma);
    s.min_dist = std::min(s.min_dist, rec.min_dist);
  }
  for (const TraceEvent& ev : trace.events)
    if (ev.kind == "success") s.time_to_success = ev.t;
  std::vector<double> times;
  for (const TickRecord& rec : trace.ticks) {
    if (rec.skipped) continue;
    times.push_back(rec.wall_ms);
    s.max_qp_residual = std::max(s.max_qp_residual, rec.max_qp_residual);
  }
  s.ticks = static_cast<int>(times.size());
  if (!times.empty()) {
    s.mean_tick_ms =
        std::accumulate(times.begin(), times.end(), 0.0) / times.size();
    std::sort(times.begin(), times.end());
    const size_t idx =
        std::min(times.size() - 1,
                 static_cast<size_t>(std::ceil(0.95 * times.size())) - 1);
    s.p95_tick_ms = times[idx];
    s.max_tick_ms = times.back();
  }
  return s;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace CSV: " + path);
  out << "t";
  if (!trace.steps.empty()) {
    const StepRecord& first = trace.steps.front();
    for (int i = 0; i < first.q.size(); ++i) out << ",q" << i;
    for (size_t i = 0; i < first.fingertips.size(); ++i)
      out << ",f" << i << "x,f" << i << "y,f" << i << "z";
    for (size_t i = 0; i < first.fingertips.size(); ++i)
      out << ",xs" << i << "x,xs" << i << "y,xs" << i << "z";
  }
  out << ",max_error,min_gamma,min_dist,alpha,beta\n";
  out.precision(9);
  for (const StepRecord& rec : trace.steps) {
    out << rec.t;
    for (int i = 0; i < rec.q.size(); ++i) out << ',' << rec.q[i];
    for (const Vec3& f : rec.fingertips)
      out << ',' << f.x() << ',' << f.y() << ',' << f.z();
    for (size_t i = 0; i < rec.fingertips.size(); ++i) {
      const Vec3 xs = i < rec.x_star.size() ? rec.x_star[i] : Vec3::Zero();
      out << ',' << xs.x() << ',' << xs.y() << ',' << xs.z();
    }
    out << ',' << rec.max_error << ',' << rec.min_gamma << ',' << rec.min_dist
        << ',' << rec.alpha << ',' << rec.beta << '\n';
  }
}

void write_events_json(const Trace& trace, const TraceSummary& summary,
                       const std::string& path) {
  nlohmann::json j;
  j["success"] = summary.success;
  j["collision"] = summary.collision;
  j["terminal_error"] = summary.terminal_error;
  j["time_to_success"] =
      std::isfinite(summary.time_to_success) ? summary.time_to_success : -1.0;
  j["min_gamma"] = summary.min_gamma;
  j["min_dist"] = summary.min_dist;
  j["max_qp_residual"] = summary.max_qp_residual;
  j["mean_tick_ms"] = summary.mean_tick_ms;
  j["p95_tick_ms"] = summary.p95_tick_ms;
  j["max_tick_ms"] = summary.max_tick_ms;
  j["ticks"] = summary.ticks;
  j["overruns"] = summary.overruns;
  j["events"] = nlohmann::json::array();
  for (const TraceEvent& ev : trace.events)
    j["events"].push_back({{"t", ev.t}, {"kind", ev.kind}, {"detail", ev.detail}});
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write events JSON: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace rgrasp
