#include "rgrasp/path_opt.hpp"

namespace rgrasp {

void PathProblem::validate() const {
  if (grid_size < 3) throw ConfigError("path grid_size must be >= 3");
  if (sqp_iters < 1) throw ConfigError("sqp_iters must be >= 1");
  if (trust_region <= 0.0 || via_radius <= 0.0 || via_candidates < 1)
    throw ConfigError("path parameters must be positive");
  for (const auto& c : constraints) {
    if (c.margin <= 0.0) throw ConfigError("path margin must be > 0");
    c.object.validate();
  }
}

namespace {

MatX linear_interp(const Vec3& a, const Vec3& b, int n) {
  MatX w(3, n);
  for (int j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / (n - 1);
    w.col(j) = (1.0 - t) * a + t * b;
  }
  return w;
}

// Uniform arc-length resampling of a polyline to n points.
MatX resample(const std::vector<Vec3>& poly, int n) {
  std::vector<double> cum{0.0};
  for (size_t i = 1; i < poly.size(); ++i)
    cum.push_back(cum.back() + (poly[i] - poly[i - 1]).norm());
  const double total = cum.back();
  MatX out(3, n);
  if (total < 1e-15) {
    for (int j = 0; j < n; ++j) out.col(j) = poly.front();
    return out;
  }
  size_t seg = 0;
  for (int j = 0; j < n; ++j) {
    const double target = total * j / (n - 1);
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] < target) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len < 1e-15 ? 0.0 : (target - cum[seg]) / seg_len;
    out.col(j) = (1.0 - t) * poly[seg] + t * poly[seg + 1];
  }
  out.col(0) = poly.front();
  out.col(n - 1) = poly.back();
  return out;
}

double violation_at(const PathProblem& p, const Vec3& x) {
  double v = 0.0;
  for (const auto& c : p.constraints)
    v = std::max(v, c.margin - sdf_eval(c.object, x).value);
  return std::max(v, 0.0);
}

Vec3 fibonacci_direction(int i, int count) {
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - 2.0 * (i + 0.5) / count;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double th = golden * i;
  return Vec3(r * std::cos(th), r * std::sin(th), z);
}

PathSolution make_solution(const PathProblem& p, MatX waypoints, bool converged) {
  PathSolution s;
  s.max_violation = path_violation_max(p, waypoints);
  s.waypoints = std::move(waypoints);
  s.converged = converged;
  const Vec3 step = s.waypoints.col(1) - s.waypoints.col(0);
  if (step.norm() > 1e-12) {
    s.initial_direction = step.normalized();
  } else {
    s.degenerate_direction = true;
  }
  return s;
}

}  // namespace

double path_violation_sum(const PathProblem& p, const MatX& w) {
  double v = 0.0;
  for (int j = 0; j < w.cols(); ++j) v += violation_at(p, w.col(j));
  return v;
}

double path_violation_max(const PathProblem& p, const MatX& w) {
  double v = 0.0;
  for (int j = 0; j < w.cols(); ++j) v = std::max(v, violation_at(p, w.col(j)));
  return v;
}

double path_length(const MatX& w) {
  double len = 0.0;
  for (int j = 1; j < w.cols(); ++j) len += (w.col(j) - w.col(j - 1)).norm();
  return len;
}

MatX init_via_point(const PathProblem& p) {
  p.validate();
  const int n = p.grid_size;
  const MatX straight = linear_interp(p.start, p.goal, n);
  const double straight_score = path_violation_sum(p, straight);
  if (straight_score <= 0.0) return straight;

  MatX best = straight;
  double best_score = straight_score;
  for (int i = 0; i < p.via_candidates; ++i) {
    const Vec3 via = p.goal + p.via_radius * fibonacci_direction(i, p.via_candidates);
    const MatX cand = resample({p.start, via, p.goal}, n);
    const double score = path_violation_sum(p, cand);
    if (score < best_score) {
      best_score = score;
      best = cand;
    }
  }
  return best;
}

PathSolution optimize_path(const PathProblem& p, const MatX& init, const QpSolver& solver) {
  p.validate();
  const int n = p.grid_size;
  if (init.rows() != 3 || init.cols() != n)
    throw ConfigError("path init has wrong shape");
  if ((init.col(0) - p.start).norm() > 1e-9 || (init.col(n - 1) - p.goal).norm() > 1e-9)
    throw ConfigError("path init endpoints must match the problem");

  // A violation-free straight line is the global optimum of the discretized
  // problem: minimal length and feasible.
  {
    MatX straight = linear_interp(p.start, p.goal, n);
    if (path_violation_max(p, straight) <= 0.0)
      return make_solution(p, std::move(straight), true);
  }

  const int nv = 3 * (n - 2);  // interior waypoint displacements
  MatX w = init;
  double trust = p.trust_region;

  MatX best = w;
  double best_viol = path_violation_sum(p, w);
  double best_len = path_length(w);
  bool all_solved = true;

  for (int iter = 0; iter < p.sqp_iters; ++iter) {
    QpProblem qp;
    qp.P = MatX::Zero(nv, nv);
    qp.c.resize(nv);
    for (int j = 1; j <= n - 2; ++j) {
      const int b = 3 * (j - 1);
      qp.P.block<3, 3>(b, b) = 4.0 * Mat3::Identity();
      if (j < n - 2) qp.P.block<3, 3>(b, b + 3) = -2.0 * Mat3::Identity();
      if (j > 1) qp.P.block<3, 3>(b, b - 3) = -2.0 * Mat3::Identity();
      const Vec3 d_prev = w.col(j) - w.col(j - 1);
      const Vec3 d_next = w.col(j + 1) - w.col(j);
      qp.c.segment<3>(b) = 2.0 * (d_prev - d_next);
    }

    // Linearized clearance rows for near-surface waypoints plus the
    // trust-region box.
    struct Row {
      int waypoint;
      Vec3 grad;
      double lo;
    };
    std::vector<Row> rows;
    for (int j = 1; j <= n - 2; ++j) {
      for (const auto& c : p.constraints) {
        const DistanceResult d = sdf_eval(c.object, w.col(j));
        if (d.value > c.margin + 0.05) continue;
        rows.push_back({j, d.gradient, c.margin - d.value});
      }
    }
    const int ns = static_cast<int>(rows.size());
    qp.A = MatX::Zero(ns + nv, nv);
    for (int i = 0; i < ns; ++i)
      qp.A.block<1, 3>(i, 3 * (rows[i].waypoint - 1)) = rows[i].grad.transpose();
    for (int i = 0; i < nv; ++i) qp.A(ns + i, i) = 1.0;
    qp.lower.resize(ns + nv);
    qp.upper.resize(ns + nv);
    for (int i = 0; i < ns; ++i) {
      qp.lower[i] = rows[i].lo;
      qp.upper[i] = kInf;
    }
    qp.lower.tail(nv).setConstant(-trust);
    qp.upper.tail(nv).setConstant(trust);

    const QpSolution qs = solver.solve(qp);
    if (qs.status != QpStatus::solved) {
      all_solved = false;
      break;
    }

    MatX cand = w;
    for (int j = 1; j <= n - 2; ++j) cand.col(j) += qs.z.segment<3>(3 * (j - 1));
    const double cand_viol = path_violation_sum(p, cand);
    const double cand_len = path_length(cand);
    const double cur_viol = path_violation_sum(p, w);
    const double cur_len = path_length(w);
    const bool accept = cand_viol < cur_viol - 1e-12 ||
                        (cand_viol <= cur_viol + 1e-12 && cand_len <= cur_len + 1e-12);
    if (accept) {
      w = std::move(cand);
      if (cand_viol < best_viol - 1e-12 ||
          (cand_viol <= best_viol + 1e-12 && cand_len < best_len)) {
        best = w;
        best_viol = cand_viol;
        best_len = cand_len;
      }
    } else {
      trust *= 0.5;
    }
  }
  return make_solution(p, std::move(best), all_solved);
}

PathSolution PathOptimizer::plan(const PathProblem& problem) {
  MatX init;
  bool have_warm = false;
  if (previous_ && previous_->cols() == problem.grid_size) {
    // Shift last tick's path onto the new endpoints.
    MatX shifted = *previous_;
    const Vec3 ds = problem.start - shifted.col(0);
    const Vec3 dg = problem.goal - shifted.col(shifted.cols() - 1);
    for (int j = 0; j < shifted.cols(); ++j) {
      const double t = static_cast<double>(j) / (shifted.cols() - 1);
      shifted.col(j) += (1.0 - t) * ds + t * dg;
    }
    shifted.col(0) = problem.start;  // bit-exact re-pinning
    shifted.col(shifted.cols() - 1) = problem.goal;
    if (path_violation_max(problem, shifted) <= 0.02) {
      init = std::move(shifted);
      have_warm = true;
    }
  }
  if (!have_warm) init = init_via_point(problem);
  PathSolution sol = optimize_path(problem, init, solver_);
  previous_ = sol.waypoints;
  return sol;
}

}  // namespace rgrasp
