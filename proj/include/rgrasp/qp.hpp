#ifndef RGRASP_QP_HPP_
#define RGRASP_QP_HPP_

#include <optional>
#include <string>

#include "rgrasp/types.hpp"

namespace rgrasp {

/// min 0.5 z'Pz + c'z  s.t.  lower <= Az <= upper
/// One-sided rows use +-inf sentinels in the bounds.
struct QpProblem {
  MatX P;
  VecX c;
  MatX A;
  VecX lower, upper;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_constraints() const { return static_cast<int>(lower.size()); }
  void validate() const;

  std::string dump() const;
  static QpProblem parse(const std::string& text);
};

enum class QpStatus { solved, max_iters, primal_infeasible };

struct QpSolution {
  VecX z;  // primal
  VecX y;  // dual, one per constraint row
  QpStatus status = QpStatus::max_iters;
  double primal_residual = kInf;
  double dual_residual = kInf;
  int iterations = 0;
};

struct QpSettings {
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  int max_iters = 4000;
  double rho0 = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;          // over-relaxation
  int rho_update_interval = 25;  // residual balancing period
};

/// Dense operator-splitting QP solver. One instance per thread; instances
/// own their factorization workspace and are movable.
class QpSolver {
public:
  explicit QpSolver(QpSettings settings = {}) : settings_(settings) {}

  QpSolution solve(const QpProblem& problem,
                   const std::optional<QpSolution>& warm_start = std::nullopt) const;

  QpSettings& settings() { return settings_; }
  const QpSettings& settings() const { return settings_; }

private:
  QpSettings settings_;
};

}  // namespace rgrasp

#endif  // RGRASP_QP_HPP_
