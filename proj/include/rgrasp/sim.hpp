#ifndef RGRASP_SIM_HPP_
#define RGRASP_SIM_HPP_

#include "rgrasp/controller.hpp"

namespace rgrasp {

struct StepRecord {
  double t = 0.0;
  VecX q;
  std::vector<Vec3> fingertips;
  std::vector<Vec3> x_star;
  double max_error = kInf;  // max fingertip-center error, m
  double min_gamma = kInf;
  double min_dist = kInf;   // min target/obstacle distance
  double alpha = 0.0, beta = 0.0;
};

struct TickRecord {
  double t = 0.0;
  double wall_ms = 0.0;
  int qp_iterations = 0;
  QpStatus qp_status = QpStatus::max_iters;
  double max_qp_residual = 0.0;
  bool skipped = false;  // planner overrun (threaded mode)
};

struct TraceEvent {
  double t = 0.0;
  std::string kind;  // success | collision | timeout | stall | disturbance
  std::string detail;
};

struct Trace {
  std::vector<StepRecord> steps;
  std::vector<TickRecord> ticks;
  std::vector<TraceEvent> events;
  bool success = false;
  bool collision = false;
  bool timeout = false;
  double terminal_error = kInf;
  double duration = 0.0;  // simulated seconds elapsed
  int overruns = 0;
};

struct TraceSummary {
  bool success = false;
  bool collision = false;
  double terminal_error = kInf;
  double time_to_success = kInf;
  double min_gamma = kInf;
  double min_dist = kInf;
  double max_qp_residual = 0.0;
  double mean_tick_ms = 0.0;
  double p95_tick_ms = 0.0;
  double max_tick_ms = 0.0;
  int ticks = 0;
  int overruns = 0;
};

struct SimOptions {
  PlannerKind planner = PlannerKind::ours;
  bool deterministic = true;  // false: threaded two-rate real-time mode
  bool record_steps = true;
  double success_threshold = 0.01;  // m
  double hold_time = 0.1;           // s the error band must be held
};

/// Closed-loop episode: integrate at control rate, plan at planning rate,
/// apply the disturbance schedule, stop on success/collision/timeout.
Trace run_episode(const Scene& scene, const SimOptions& options = {});

TraceSummary evaluate_trace(const Trace& trace);

void write_trace_csv(const Trace& trace, const std::string& path);
void write_events_json(const Trace& trace, const TraceSummary& summary,
                       const std::string& path);

}  // namespace rgrasp

#endif  // RGRASP_SIM_HPP_
