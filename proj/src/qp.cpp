#include "rgrasp/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <sstream>

namespace rgrasp {

void QpProblem::validate() const {
  const int n = num_vars(), r = num_constraints();
  if (P.rows() != n || P.cols() != n) throw ConfigError("QP: P must be n x n");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("QP: P must be symmetric");
  if (A.rows() != r || (r > 0 && A.cols() != n)) throw ConfigError("QP: A must be r x n");
  if (upper.size() != r || lower.size() != r) throw ConfigError("QP: bound length mismatch");
  for (int i = 0; i < r; ++i)
    if (lower[i] > upper[i]) throw ConfigError("QP: lower > upper at row " + std::to_string(i));
}

namespace {

double inf_norm(const VecX& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Cholesky restricted to a lower bandwidth; path-optimization KKT matrices
// are block-tridiagonal, which makes this O(n * bw^2) instead of O(n^3).
class BandedLLT {
public:
  bool compute(const MatX& k, int bw) {
    n_ = static_cast<int>(k.rows());
    bw_ = bw;
    l_ = k;
    for (int j = 0; j < n_; ++j) {
      double d = l_(j, j);
      for (int t = std::max(0, j - bw_); t < j; ++t) d -= l_(j, t) * l_(j, t);
      if (d <= 0.0) return false;
      const double lj = std::sqrt(d);
      l_(j, j) = lj;
      for (int i = j + 1; i <= std::min(n_ - 1, j + bw_); ++i) {
        double v = l_(i, j);
        for (int t = std::max(0, i - bw_); t < j; ++t) v -= l_(i, t) * l_(j, t);
        l_(i, j) = v / lj;
      }
    }
    return true;
  }

  VecX solve(VecX b) const {
    for (int i = 0; i < n_; ++i) {
      double v = b[i];
      for (int t = std::max(0, i - bw_); t < i; ++t) v -= l_(i, t) * b[t];
      b[i] = v / l_(i, i);
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double v = b[i];
      for (int t = i + 1; t <= std::min(n_ - 1, i + bw_); ++t) v -= l_(t, i) * b[t];
      b[i] = v / l_(i, i);
    }
    return b;
  }

private:
  int n_ = 0, bw_ = 0;
  MatX l_;
};

// Linear-system backend selected per problem structure.
struct KktSolver {
  bool banded = false;
  BandedLLT band;
  Eigen::LLT<MatX> dense;

  bool factor(const MatX& k, int bw) {
    if (bw >= 0 && bw < static_cast<int>(k.rows()) / 4 && bw <= 24) {
      if (band.compute(k, bw)) {
        banded = true;
        return true;
      }
    }
    banded = false;
    dense.compute(k);
    return dense.info() == Eigen::Success;
  }

  VecX solve(const VecX& rhs) const { return banded ? band.solve(rhs) : dense.solve(rhs); }
};

}  // namespace

QpSolution QpSolver::solve(const QpProblem& prob,
                           const std::optional<QpSolution>& warm) const {
  prob.validate();
  const int n = prob.num_vars();
  const int r = prob.num_constraints();
  const QpSettings& s = settings_;

  // Sparse view of A speeds up both K assembly and the per-iteration
  // products; constraint matrices here are mostly one block per row.
  long nnz = 0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) nnz += prob.A(i, j) != 0.0;
  const bool sparse_a = r > 0 && nnz * 4 < static_cast<long>(r) * n;
  Eigen::SparseMatrix<double, Eigen::RowMajor> as;
  if (sparse_a) as = prob.A.sparseView();

  auto mul_a = [&](const VecX& v) -> VecX {
    if (!r) return VecX();
    return sparse_a ? VecX(as * v) : VecX(prob.A * v);
  };
  auto mul_at = [&](const VecX& v) -> VecX {
    if (!r) return VecX::Zero(n);
    return sparse_a ? VecX(as.transpose() * v) : VecX(prob.A.transpose() * v);
  };

  // Bandwidth bound of P + rho A'A from the sparsity patterns.
  int bw = 0;
  for (int i = 0; i < n && bw <= 24; ++i)
    for (int j = 0; j < i; ++j)
      if (prob.P(i, j) != 0.0) bw = std::max(bw, i - j);
  if (sparse_a) {
    for (int row = 0; row < r && bw <= 24; ++row) {
      int lo = n, hi = -1;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(as, row); it;
           ++it) {
        lo = std::min(lo, static_cast<int>(it.col()));
        hi = std::max(hi, static_cast<int>(it.col()));
      }
      if (hi >= 0) bw = std::max(bw, hi - lo);
    }
  } else if (r > 0) {
    bw = n;  // no structure assumed
  }

  auto form_k = [&](double rho) {
    MatX k = prob.P + s.sigma * MatX::Identity(n, n);
    if (!r) return k;
    if (sparse_a) {
      for (int row = 0; row < r; ++row)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator i1(as, row); i1;
             ++i1)
          for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator i2(as, row); i2;
               ++i2)
            k(i1.col(), i2.col()) += rho * i1.value() * i2.value();
    } else {
      k.selfadjointView<Eigen::Lower>().rankUpdate(prob.A.transpose(), rho);
      k.triangularView<Eigen::StrictlyUpper>() =
          k.triangularView<Eigen::StrictlyLower>().transpose();
    }
    return k;
  };

  double rho = s.rho0;
  KktSolver kkt;
  if (!kkt.factor(form_k(rho), bw))
    throw ConfigError("QP: P + sigma*I + rho*A'A is not positive definite");

  VecX x = VecX::Zero(n), y = VecX::Zero(r);
  if (warm && warm->z.size() == n && warm->y.size() == r) {
    x = warm->z;
    y = warm->y;
  }
  VecX w = mul_a(x);
  for (int i = 0; i < r; ++i) w[i] = std::clamp(w[i], prob.lower[i], prob.upper[i]);

  QpSolution sol;
  const int check_every = std::max(1, std::min(s.rho_update_interval, 5));

  double rp = kInf, rd = kInf, ep = 0.0, ed = 0.0;
  auto residuals = [&]() {
    const VecX ax = mul_a(x);
    const VecX px = prob.P * x;
    const VecX aty = mul_at(y);
    rp = r ? inf_norm(ax - w) : 0.0;
    rd = inf_norm(px + prob.c + aty);
    ep = s.tol_abs + s.tol_rel * std::max(inf_norm(ax), inf_norm(w));
    ed = s.tol_abs + s.tol_rel * std::max({inf_norm(px), inf_norm(prob.c), inf_norm(aty)});
  };

  int it = 0;
  for (; it <= s.max_iters; ++it) {
    if (it % check_every == 0 || it == s.max_iters) {
      residuals();
      sol.primal_residual = rp;
      sol.dual_residual = rd;
      if (rp <= ep && rd <= ed) {
        sol.status = QpStatus::solved;
        break;
      }
      if (it == s.max_iters) {
        sol.status = QpStatus::max_iters;
        break;
      }
      // Periodic residual balancing.
      if (it > 0 && s.rho_update_interval > 0 && it % s.rho_update_interval == 0 && r > 0) {
        const double num = rp / std::max(ep, 1e-12);
        const double den = rd / std::max(ed, 1e-12);
        const double factor = std::sqrt(std::max(num, 1e-12) / std::max(den, 1e-12));
        if (factor > 1.25 || factor < 0.8) {
          rho = std::clamp(rho * factor, 1e-6, 1e6);
          if (!kkt.factor(form_k(rho), bw))
            throw ConfigError("QP: refactorization failed");
        }
      }
    }

    VecX rhs = s.sigma * x - prob.c;
    if (r) rhs += mul_at(rho * w - y);
    const VecX x_tilde = kkt.solve(rhs);
    const VecX zeta = mul_a(x_tilde);
    x = s.alpha * x_tilde + (1.0 - s.alpha) * x;

    if (r) {
      const VecX w_prev = w;
      const VecX v = s.alpha * zeta + (1.0 - s.alpha) * w_prev + y / rho;
      for (int i = 0; i < r; ++i) w[i] = std::clamp(v[i], prob.lower[i], prob.upper[i]);
      const VecX y_new = rho * (v - w);

      // Primal infeasibility certificate from the dual increment.
      const VecX delta = y_new - y;
      const double dn = inf_norm(delta);
      if (dn > 1e-10) {
        const double eps_inf = 1e-8 * dn;
        if (inf_norm(mul_at(delta)) <= eps_inf) {
          double support = 0.0;
          bool bounded = true;
          for (int i = 0; i < r; ++i) {
            if (delta[i] > eps_inf) {
              if (std::isinf(prob.upper[i])) { bounded = false; break; }
              support += prob.upper[i] * delta[i];
            } else if (delta[i] < -eps_inf) {
              if (std::isinf(prob.lower[i])) { bounded = false; break; }
              support += prob.lower[i] * delta[i];
            }
          }
          if (bounded && support < -eps_inf) {
            sol.status = QpStatus::primal_infeasible;
            sol.z = x;
            sol.y = y_new;
            sol.iterations = it + 1;
            return sol;
          }
        }
      }
      y = y_new;
    }
  }

  sol.z = x;
  sol.y = y;
  sol.iterations = it;
  return sol;
}

std::string QpProblem::dump() const {
  std::ostringstream os;
  os.precision(17);
  os << "qp " << num_vars() << ' ' << num_constraints() << '\n';
  auto emit = [&os](const auto& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) os << m(i, j) << (j + 1 == m.cols() ? '\n' : ' ');
  };
  emit(P);
  emit(c.transpose());
  emit(A);
  emit(lower.transpose());
  emit(upper.transpose());
  return os.str();
}

QpProblem QpProblem::parse(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int n = 0, r = 0;
  is >> tag >> n >> r;
  if (tag != "qp" || n <= 0 || r < 0) throw ConfigError("bad QP dump header");
  QpProblem p;
  p.P.resize(n, n);
  p.c.resize(n);
  p.A.resize(r, n);
  p.lower.resize(r);
  p.upper.resize(r);
  auto read = [&is](auto& m) {
    std::string tok;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) {
        if (!(is >> tok)) throw ConfigError("truncated QP dump");
        m(i, j) = std::stod(tok);  // stod accepts "inf" / "-inf"
      }
  };
  read(p.P);
  read(p.c);
  read(p.A);
  read(p.lower);
  read(p.upper);
  p.validate();
  return p;
}

}  // namespace rgrasp
