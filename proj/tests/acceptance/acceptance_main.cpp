// End-to-end acceptance harness. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails.
#include <algorithm>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <vector>

#include "rgrasp/sim.hpp"

using namespace rgrasp;

namespace {

std::string g_dir = "scenarios";

struct Episode {
  std::string shape, pose, planner;
  TraceSummary summary;
};

Scene scene_for(const std::string& shape, const std::string& pose) {
  Scene scene = load_scene(g_dir + "/" + shape + ".json");
  scene.q0 = scene.robot.named_configs.at(pose);
  return scene;
}

Episode run_one(const std::string& shape, const std::string& pose,
                const std::string& planner) {
  SimOptions opt;
  opt.planner = planner == "ours" ? PlannerKind::ours : PlannerKind::linear;
  const Trace tr = run_episode(scene_for(shape, pose), opt);
  return {shape, pose, planner, evaluate_trace(tr)};
}

bool report(int num, const char* what, bool pass, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", num, what,
              detail.c_str());
  std::fflush(stdout);
  return pass;
}

// --- criteria 1 + 2: the 5-shape x 3-pose suite, both planners -------------

std::vector<Episode> run_suite() {
  const std::vector<std::string> shapes = {"box", "bowl", "dish", "mug",
                                           "wineglass"};
  const std::vector<std::string> poses = {"center_up", "left_bottom",
                                          "right_bottom"};
  std::vector<std::future<Episode>> futures;
  for (const auto& planner : {"ours", "linear"})
    for (const auto& shape : shapes)
      for (const auto& pose : poses)
        futures.push_back(
            std::async(std::launch::async, run_one, shape, pose, planner));
  std::vector<Episode> eps;
  for (auto& f : futures) eps.push_back(f.get());
  return eps;
}

bool criterion1(const std::vector<Episode>& eps) {
  int ours_succ = 0, ours_total = 0, concave_fail = 0, concave_total = 0;
  for (const Episode& e : eps) {
    if (e.planner == "ours") {
      ++ours_total;
      ours_succ += e.summary.success ? 1 : 0;
    } else if (e.shape == "bowl" || e.shape == "mug" || e.shape == "wineglass") {
      ++concave_total;
      if (!e.summary.success && e.summary.terminal_error > 0.02) ++concave_fail;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "ours %d/%d succeeded, linear failed %d/%d concave episodes "
                "with error > 2 cm",
                ours_succ, ours_total, concave_fail, concave_total);
  const bool pass =
      ours_total == 15 && ours_succ >= 14 && concave_fail * 3 >= concave_total;
  return report(1, "local-minima avoidance", pass, buf);
}

bool criterion2(const std::vector<Episode>& eps) {
  double worst_gamma = kInf, worst_dist = kInf, worst_resid = 0.0;
  int passing = 0;
  for (const Episode& e : eps) {
    if (!e.summary.success) continue;
    ++passing;
    worst_gamma = std::min(worst_gamma, e.summary.min_gamma);
    worst_dist = std::min(worst_dist, e.summary.min_dist);
    worst_resid = std::max(worst_resid, e.summary.max_qp_residual);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d passing episodes: min gamma %.4f, min distance %.4f, max "
                "QP residual %.2e",
                passing, worst_gamma, worst_dist, worst_resid);
  const bool pass = passing > 0 && worst_gamma >= 0.0 && worst_dist >= 0.0 &&
                    worst_resid <= 1e-5;
  return report(2, "collision safety", pass, buf);
}

// --- criterion 3: perturbation recovery ------------------------------------

bool criterion3() {
  Scene scene = load_scene(g_dir + "/disturbance.json");
  const Trace tr = run_episode(scene, {});
  bool ok = tr.success;
  double worst = 0.0;
  for (const DisturbanceEvent& ev : scene.disturbances) {
    const double t0 = ev.time + ev.duration;
    double recovered = kInf;
    for (const StepRecord& s : tr.steps)
      if (s.t >= t0 && s.max_error < 0.01) {
        recovered = s.t - t0;
        break;
      }
    worst = std::max(worst, recovered);
    if (!(recovered <= 8.0)) ok = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "episode %s, slowest re-entry into the 1 cm band %.2f s after "
                "an event",
                tr.success ? "succeeded" : "failed", worst);
  return report(3, "perturbation recovery", ok, buf);
}

// --- criterion 4: moving obstacles over 5 seeds -----------------------------

bool criterion4() {
  auto one = [](unsigned seed) {
    Scene scene = load_scene(g_dir + "/moving_boxes.json");
    scene.seed = seed;
    return evaluate_trace(run_episode(scene, {}));
  };
  std::vector<std::future<TraceSummary>> futures;
  for (unsigned s = 1; s <= 5; ++s)
    futures.push_back(std::async(std::launch::async, one, s));
  int succ = 0;
  double worst_dist = kInf;
  for (auto& f : futures) {
    const TraceSummary s = f.get();
    succ += s.success ? 1 : 0;
    worst_dist = std::min(worst_dist, s.min_dist);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d/5 seeds succeeded, min clearance %.4f m",
                succ, worst_dist);
  return report(4, "moving obstacles", succ == 5 && worst_dist >= 0.0, buf);
}

// --- criterion 5: planning rate ---------------------------------------------

bool criterion5() {
  std::vector<double> wall;
  unsigned seed = 1;
  while (wall.size() < 1000) {
    Scene scene = load_scene(g_dir + "/bowl_bench.json");
    scene.seed = seed++;
    SimOptions opt;
    opt.record_steps = false;
    const Trace tr = run_episode(scene, opt);
    for (const TickRecord& t : tr.ticks)
      if (!t.skipped) wall.push_back(t.wall_ms);
    if (seed > 40) break;
  }
  std::sort(wall.begin(), wall.end());
  const int n = static_cast<int>(wall.size());
  const double p95 = wall[std::max(0, static_cast<int>(std::ceil(0.95 * n)) - 1)];
  char buf[160];
  std::snprintf(buf, sizeof buf, "p95 tick %.2f ms over %d ticks (budget 20 ms)",
                p95, n);
  return report(5, "planning rate", n >= 1000 && p95 < 20.0, buf);
}

// --- criterion 6: numerical oracles -----------------------------------------

double enumeration_objective(const QpProblem& p) {
  const int n = p.num_vars(), r = p.num_constraints();
  double best = kInf;
  std::vector<int> state(r, 0);
  const long total = static_cast<long>(std::pow(3.0, r));
  for (long code = 0; code < total; ++code) {
    long cc = code;
    bool valid = true;
    int na = 0;
    for (int i = 0; i < r; ++i) {
      state[i] = static_cast<int>(cc % 3);
      cc /= 3;
      if (state[i] == 1 && std::isinf(p.lower[i])) valid = false;
      if (state[i] == 2 && std::isinf(p.upper[i])) valid = false;
      if (state[i] != 0) ++na;
    }
    if (!valid || na > n) continue;
    MatX kkt = MatX::Zero(n + na, n + na);
    VecX rhs = VecX::Zero(n + na);
    kkt.topLeftCorner(n, n) = p.P;
    rhs.head(n) = -p.c;
    int row = 0;
    for (int i = 0; i < r; ++i) {
      if (state[i] == 0) continue;
      kkt.block(n + row, 0, 1, n) = p.A.row(i);
      kkt.block(0, n + row, n, 1) = p.A.row(i).transpose();
      rhs[n + row] = (state[i] == 1) ? p.lower[i] : p.upper[i];
      ++row;
    }
    Eigen::FullPivLU<MatX> lu(kkt);
    if (!lu.isInvertible()) continue;
    const VecX z = lu.solve(rhs).head(n);
    bool feasible = true;
    for (int i = 0; i < r && feasible; ++i) {
      const double az = p.A.row(i).dot(z);
      if (az < p.lower[i] - 1e-9 || az > p.upper[i] + 1e-9) feasible = false;
    }
    if (feasible) best = std::min(best, 0.5 * z.dot(p.P * z) + p.c.dot(z));
  }
  return best;
}

bool oracle_qp(std::string& msg) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_int_distribution<int> nd(2, 5), rd(1, 8), kind(0, 2);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = nd(rng), r = rd(rng);
    QpProblem p;
    MatX b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = g(rng);
    p.P = b.transpose() * b + 0.1 * MatX::Identity(n, n);
    p.c = VecX::NullaryExpr(n, [&](int) { return g(rng); });
    p.A = MatX::NullaryExpr(r, n, [&](int, int) { return g(rng); });
    VecX z0 = VecX::NullaryExpr(n, [&](int) { return 0.3 * g(rng); });
    p.lower.resize(r);
    p.upper.resize(r);
    for (int i = 0; i < r; ++i) {
      const double az = p.A.row(i).dot(z0);
      p.lower[i] = az - u(rng);
      p.upper[i] = az + u(rng);
      switch (kind(rng)) {
        case 1: p.lower[i] = -kInf; break;
        case 2: p.upper[i] = kInf; break;
        default: break;
      }
    }
    QpSettings tight;
    tight.tol_abs = tight.tol_rel = 1e-10;
    tight.max_iters = 200000;
    const QpSolution sol = QpSolver(tight).solve(p);
    if (sol.status != QpStatus::solved) return false;
    const double got = 0.5 * sol.z.dot(p.P * sol.z) + p.c.dot(sol.z);
    const double oracle = enumeration_objective(p);
    worst = std::max(worst, std::abs(got - oracle) / std::max(1.0, std::abs(oracle)));
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "qp obj err %.2e; ", worst);
  msg += buf;
  return worst < 1e-6;
}

bool oracle_derivatives(std::string& msg) {
  const RobotModel model = make_default_arm_hand();
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-6;
  double worst_jac = 0.0;
  for (int t = 0; t < 1000; ++t) {
    VecX q(model.dof());
    for (int i = 0; i < q.size(); ++i)
      q[i] = model.q_min[i] + (model.q_max[i] - model.q_min[i]) *
                                  (0.5 + 0.4 * u(rng));
    const KinematicState st = forward_kinematics(model, q);
    const auto jacs = fingertip_jacobians(model, st);
    const int joint = t % model.dof();
    for (size_t f = 0; f < jacs.size(); ++f) {
      VecX qp = q, qm = q;
      qp[joint] += h;
      qm[joint] -= h;
      const Vec3 fd = (forward_kinematics(model, qp).fingertips[f].position -
                       forward_kinematics(model, qm).fingertips[f].position) /
                      (2.0 * h);
      const Vec3 an = jacs[f].linear.col(joint);
      worst_jac = std::max(
          worst_jac, (an - fd).norm() / std::max(1.0, fd.norm()));
    }
  }

  double worst_sdf = 0.0;
  for (int t = 0; t < 1000; ++t) {
    SdfObject obj;
    obj.kind = SdfKind::superellipsoid;
    obj.semi_axes = Vec3(0.03 + 0.1 * std::abs(u(rng)),
                         0.03 + 0.1 * std::abs(u(rng)),
                         0.03 + 0.1 * std::abs(u(rng)));
    obj.e1 = 0.2 + 0.7 * std::abs(u(rng));
    obj.e2 = 0.2 + 0.7 * std::abs(u(rng));
    // Generic exterior query point, away from axis switch loci.
    Vec3 x(0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng));
    if (std::min({std::abs(x.x()), std::abs(x.y()), std::abs(x.z())}) < 0.02 ||
        sdf_eval(obj, x).value < 0.02) {
      --t;
      continue;
    }
    const Vec3 an = sdf_eval(obj, x).gradient;
    Vec3 fd;
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      fd[a] = (sdf_eval(obj, xp).value - sdf_eval(obj, xm).value) / (2.0 * h);
    }
    worst_sdf =
        std::max(worst_sdf, (an - fd).norm() / std::max(1e-3, fd.norm()));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "jac err %.2e, sdf grad err %.2e; ", worst_jac,
                worst_sdf);
  msg += buf;
  return worst_jac < 1e-4 && worst_sdf < 1e-4;
}

bool oracle_path_and_fields(std::string& msg) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    PathProblem prob;
    prob.start = Vec3(0.3 + u(rng), u(rng), 0.3 + u(rng));
    prob.goal = Vec3(0.3 + u(rng), u(rng), 0.3 + u(rng));
    if ((prob.goal - prob.start).norm() < 1e-3) continue;
    PathOptimizer opt;
    const PathSolution sol = opt.plan(prob);
    for (int i = 0; i < prob.grid_size; ++i) {
      const double s = static_cast<double>(i) / (prob.grid_size - 1);
      const Vec3 ref = (1.0 - s) * prob.start + s * prob.goal;
      worst = std::max(worst, (sol.waypoints.col(i) - ref).norm());
    }
  }
  const FieldParams f;
  const bool exact =
      weight_alpha(f.eta_g, f.eta_g, f.temp_g) == 0.5 &&
      weight_beta(f.eta_h, f.eta_h, f.temp_h) == 0.5 &&
      speed_profile(f.delta_x / 2.0, f.v_const, f.delta_x) == 0.75 * f.v_const;
  char buf[80];
  std::snprintf(buf, sizeof buf, "free-space path err %.2e, %s", worst,
                exact ? "exact sigmoid/profile identities" : "identity FAILED");
  msg += buf;
  return worst < 1e-9 && exact;
}

bool criterion6() {
  std::string msg;
  const bool a = oracle_qp(msg);
  const bool b = oracle_derivatives(msg);
  const bool c = oracle_path_and_fields(msg);
  return report(6, "numerical oracles", a && b && c, msg);
}

// --- criterion 7: orientation field descent ---------------------------------

Mat3 exp_so3(const Vec3& w) {
  const double th = w.norm();
  if (th < 1e-12) return Mat3::Identity();
  return Eigen::AngleAxisd(th, w / th).toRotationMatrix();
}

bool criterion7() {
  std::mt19937 rng(19);
  std::normal_distribution<double> g(0.0, 1.0);
  const double h = 1e-5;
  double worst = -kInf;
  int tested = 0;
  while (tested < 1000) {
    const Vec3 x1(g(rng), g(rng), g(rng));
    const Vec3 x2 = x1 + 0.1 * Vec3(g(rng), g(rng), g(rng));
    if ((x2 - x1).norm() < 1e-3) continue;
    const Mat3 r1 = exp_so3(Vec3(g(rng), g(rng), g(rng)));
    const Mat3 r2 = exp_so3(Vec3(g(rng), g(rng), g(rng)));
    const StabilityResult s = stability_score(x1, r1, x2, r2);
    if (s.degenerate) continue;
    const Vec3 w1 = orientation_field(s.dg_dR1, r1);
    const Vec3 w2 = orientation_field(s.dg_dR2, r2);
    const StabilityResult s2 =
        stability_score(x1, exp_so3(h * w1) * r1, x2, exp_so3(h * w2) * r2);
    worst = std::max(worst, s2.g - s.g);
    ++tested;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max change of g along the descent step %.2e over 1000 poses",
                worst);
  return report(7, "orientation field descent", worst <= 1e-8, buf);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--scenario-dir") g_dir = argv[i + 1];

  const std::vector<Episode> suite = run_suite();
  bool ok = true;
  ok &= criterion1(suite);
  ok &= criterion2(suite);
  ok &= criterion3();
  ok &= criterion4();
  ok &= criterion5();
  ok &= criterion6();
  ok &= criterion7();
  return ok ? 0 : 1;
}
