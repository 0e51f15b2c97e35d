#include "sdpclik/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "sdpclik/errors.hpp"

namespace sdpclik {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

double min_eigenvalue(const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

CertificateReport check_certificate(const SdpProblem& problem,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, double feas_tol) {
  if (x.size() != problem.n_vars()) {
    throw Error(ErrorKind::DimensionMismatch, "certificate point has the wrong size");
  }
  CertificateReport r;
  r.min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
    const double e = min_eigenvalue(problem.blocks[j].evaluate(x));
    r.block_names.push_back(problem.blocks[j].name);
    r.block_min_eigs.push_back(e);
    if (e < r.min_eig) {
      r.min_eig = e;
      r.worst_block = static_cast<int>(j);
    }
  }
  r.objective = problem.objective(x);
  r.feasible = r.min_eig >= -feas_tol;
  return r;
}

namespace {

/// Dense copy of one block: coefficient 0 is the constant term.
struct DenseBlock {
  int size = 0;
  std::vector<Eigen::MatrixXd> coeff;  // n_vars + 1 entries
  std::vector<bool> used;
};

std::vector<DenseBlock> densify(const SdpProblem& problem) {
  const int m = problem.n_vars();
  std::vector<DenseBlock> out;
  for (const auto& b : problem.blocks) {
    DenseBlock d;
    d.size = b.size;
    d.coeff.assign(m + 1, Eigen::MatrixXd::Zero(b.size, b.size));
    d.used.assign(m + 1, false);
    for (const auto& t : b.terms) {
      d.coeff[t.index] += t.coeff;
      d.used[t.index] = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Largest step alpha in (0, inf] keeping X + alpha dX positive definite.
double max_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dX) {
  const auto& L = chol.matrixL();
  Eigen::MatrixXd W = L.solve(dX);
  W = L.solve(W.transpose()).transpose();
  const double e = min_eigenvalue(W);
  return e < 0.0 ? -1.0 / e : std::numeric_limits<double>::infinity();
}

double trace_product(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  // tr(A B) for square A, B.
  return A.cwiseProduct(B.transpose()).sum();
}

struct Direction {
  Eigen::VectorXd dx;
  std::vector<Eigen::MatrixXd> dZ;
  std::vector<Eigen::MatrixXd> dY;
};

}  // namespace

GainSolution SdpSolver::solve(const SdpProblem& problem) const {
  const auto t_start = std::chrono::steady_clock::now();
  const int m = problem.n_vars();
  const auto blocks = densify(problem);
  const auto nb = blocks.size();

  GainSolution sol;
  auto finish = [&](SolveStatus status, const Eigen::VectorXd& x, std::string msg) {
    sol.x = x;
    sol.lambda = x.head(problem.layout.n);
    sol.beta = x[problem.layout.beta() - 1];
    sol.gamma = x[problem.layout.gamma() - 1];
    sol.objective = problem.objective(x);
    sol.status = status;
    sol.message = std::move(msg);
    if (x.allFinite()) {
      // Residuals from the solver's own dense copy of the data.
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& b : blocks) {
        Eigen::MatrixXd F = b.coeff[0];
        for (int i = 1; i <= m; ++i) {
          if (b.used[i]) F += x[i - 1] * b.coeff[i];
        }
        worst = std::min(worst, min_eigenvalue(F));
      }
      sol.min_block_eig = worst;
      if (status == SolveStatus::Optimal && worst < -opts_.feas_tol) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = "converged point violates the feasibility tolerance";
      }
    } else {
      sol.min_block_eig = std::numeric_limits<double>::quiet_NaN();
      sol.status = SolveStatus::NumericalFailure;
    }
    sol.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
  };

  if (problem.c.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "cost vector does not match the variable count");
  }

  int total_rows = 0;
  double data_scale = 1.0;
  for (const auto& b : blocks) {
    total_rows += b.size;
    for (int i = 0; i <= m; ++i) data_scale = std::max(data_scale, b.coeff[i].cwiseAbs().maxCoeff());
  }
  const double c_scale = 1.0 + problem.c.cwiseAbs().maxCoeff();

  // Starting point x = 0 with Z, Y multiples of the identity scaled per block
  // to the data, as in SDPT3.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::MatrixXd> Z(nb), Y(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const auto& b = blocks[j];
    const double s = b.size;
    double y_scale = std::max(10.0, std::sqrt(s));
    double z_scale = std::max(10.0, std::sqrt(s));
    double coeff_norm = b.coeff[0].norm();
    for (int i = 1; i <= m; ++i) {
      if (!b.used[i]) continue;
      const double fn = b.coeff[i].norm();
      coeff_norm = std::max(coeff_norm, fn);
      y_scale = std::max(y_scale, s * (1.0 + std::abs(problem.c[i - 1])) / (1.0 + fn));
    }
    z_scale = std::max(z_scale, 1.0 + coeff_norm);
    Z[j] = z_scale * Eigen::MatrixXd::Identity(b.size, b.size);
    Y[j] = y_scale * Eigen::MatrixXd::Identity(b.size, b.size);
  }

  constexpr double kStepFraction = 0.98;
  const double gap_tol = std::min(1e-9, 1e-3 * opts_.obj_tol);
  const double primal_tol = std::min(1e-9, 1e-2 * opts_.feas_tol);
  const double dual_tol = 1e-9;

  // Last iterate meeting the user tolerances; returned if the tighter
  // internal targets cannot be reached.
  std::optional<Eigen::VectorXd> acceptable;
  auto give_up = [&](SolveStatus status, std::string msg) {
    if (acceptable) return finish(SolveStatus::Optimal, *acceptable, "converged to reduced accuracy");
    return finish(status, x, std::move(msg));
  };

  std::vector<Eigen::MatrixXd> Rd(nb), Zinv(nb);
  std::vector<Eigen::LLT<Eigen::MatrixXd>> cholZ(nb), cholY(nb);
  Eigen::VectorXd rp(m);

  for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
    sol.iterations = iter;

    // Residuals and complementarity.
    double primal_inf = 0.0;
    double gap = 0.0;
    double dual_obj = 0.0;
    rp = problem.c;
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& b = blocks[j];
      Eigen::MatrixXd F = b.coeff[0];
      for (int i = 1; i <= m; ++i) {
        if (b.used[i]) {
          F += x[i - 1] * b.coeff[i];
          rp[i - 1] -= trace_product(b.coeff[i], Y[j]);
        }
      }
      Rd[j] = F - Z[j];
      primal_inf = std::max(primal_inf, Rd[j].cwiseAbs().maxCoeff());
      gap += trace_product(Z[j], Y[j]);
      dual_obj -= trace_product(b.coeff[0], Y[j]);
    }
    const double dual_inf = rp.cwiseAbs().maxCoeff();
    const double primal_obj = problem.objective(x);
    sol.duality_gap = gap;

    if (!x.allFinite() || !std::isfinite(gap)) {
      return give_up(SolveStatus::NumericalFailure, "iterates became non-finite");
    }

    if (primal_inf <= primal_tol * data_scale && dual_inf <= dual_tol * c_scale &&
        gap <= gap_tol * (1.0 + std::abs(primal_obj))) {
      return finish(SolveStatus::Optimal, x, "converged");
    }
    if (primal_inf <= 0.1 * opts_.feas_tol && dual_inf <= 1e-7 * c_scale &&
        gap <= 0.1 * opts_.obj_tol * (1.0 + std::abs(primal_obj))) {
      acceptable = x;
    }

    // A dual ray (Y with tr(F_l Y) ~ 0, tr(F_0 Y) < 0) certifies that no x
    // satisfies every block.
    if (dual_obj > 0.0) {
      double ray = 0.0;
      for (int i = 0; i < m; ++i) ray = std::max(ray, std::abs(problem.c[i] - rp[i]));
      if (ray <= 1e-8 * dual_obj && dual_obj > 1e6 * (1.0 + std::abs(primal_obj))) {
        return finish(SolveStatus::Infeasible, x,
                      "dual ray found: the blocks admit no common feasible point");
      }
    }

    if (iter == opts_.max_iterations) break;

    const double mu = gap / total_rows;
    for (std::size_t j = 0; j < nb; ++j) {
      cholZ[j].compute(Z[j]);
      cholY[j].compute(Y[j]);
      if (cholZ[j].info() != Eigen::Success || cholY[j].info() != Eigen::Success) {
        return give_up(SolveStatus::NumericalFailure, "lost positive definiteness");
      }
      Zinv[j] = cholZ[j].solve(Eigen::MatrixXd::Identity(blocks[j].size, blocks[j].size));
      Zinv[j] = 0.5 * (Zinv[j] + Zinv[j].transpose());
    }

    // Schur complement M_ik = sum_j tr(F_ji Z^-1 F_jk Y).
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    std::vector<std::vector<Eigen::MatrixXd>> ZFY(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& b = blocks[j];
      ZFY[j].resize(m + 1);
      for (int k = 1; k <= m; ++k) {
        if (b.used[k]) ZFY[j][k] = Zinv[j] * b.coeff[k] * Y[j];
      }
      for (int i = 1; i <= m; ++i) {
        if (!b.used[i]) continue;
        for (int k = i; k <= m; ++k) {
          if (!b.used[k]) continue;
          const double v = trace_product(b.coeff[i], ZFY[j][k]);
          M(i - 1, k - 1) += v;
          if (k != i) M(k - 1, i - 1) += v;
        }
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> schur(M);
    if (schur.info() != Eigen::Success || !schur.isPositive()) {
      return give_up(SolveStatus::NumericalFailure, "Schur complement is not positive definite");
    }

    // Direction for a given complementarity target Rc (Z dY + dZ Y = Rc).
    auto direction = [&](const std::vector<Eigen::MatrixXd>& Rc) {
      Direction d;
      Eigen::VectorXd rhs = -rp;
      std::vector<Eigen::MatrixXd> T(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        // tr(F_i Z^-1 Rc) - tr(F_i Z^-1 Rd Y)
        T[j] = Zinv[j] * (Rc[j] - Rd[j] * Y[j]);
        for (int i = 1; i <= m; ++i) {
          if (blocks[j].used[i]) rhs[i - 1] += trace_product(blocks[j].coeff[i], T[j]);
        }
      }
      d.dx = schur.solve(rhs);
      d.dZ.resize(nb);
      d.dY.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        Eigen::MatrixXd dZ = Rd[j];
        for (int i = 1; i <= m; ++i) {
          if (blocks[j].used[i]) dZ += d.dx[i - 1] * blocks[j].coeff[i];
        }
        Eigen::MatrixXd dY = Zinv[j] * (Rc[j] - dZ * Y[j]);
        d.dZ[j] = 0.5 * (dZ + dZ.transpose());
        d.dY[j] = 0.5 * (dY + dY.transpose());
      }
      return d;
    };

    auto step_lengths = [&](const Direction& d) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(cholZ[j], d.dZ[j]));
        ad = std::min(ad, max_step(cholY[j], d.dY[j]));
      }
      return std::pair{std::min(1.0, kStepFraction * ap), std::min(1.0, kStepFraction * ad)};
    };

    // Predictor (affine scaling).
    std::vector<Eigen::MatrixXd> Rc(nb);
    for (std::size_t j = 0; j < nb; ++j) Rc[j] = -Z[j] * Y[j];
    const Direction aff = direction(Rc);
    const auto [ap_aff, ad_aff] = step_lengths(aff);
    double gap_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      gap_aff += trace_product(Z[j] + ap_aff * aff.dZ[j], Y[j] + ad_aff * aff.dY[j]);
    }
    const double sigma = std::clamp(std::pow(gap_aff / gap, 3.0), 0.0, 1.0);

    // Corrector.
    for (std::size_t j = 0; j < nb; ++j) {
      Rc[j] = sigma * mu * Eigen::MatrixXd::Identity(blocks[j].size, blocks[j].size) -
              Z[j] * Y[j] - aff.dZ[j] * aff.dY[j];
    }
    const Direction dir = direction(Rc);
    const auto [ap, ad] = step_lengths(dir);

    x += ap * dir.dx;
    for (std::size_t j = 0; j < nb; ++j) {
      Z[j] += ap * dir.dZ[j];
      Y[j] += ad * dir.dY[j];
      Z[j] = 0.5 * (Z[j] + Z[j].transpose());
      Y[j] = 0.5 * (Y[j] + Y[j].transpose());
    }
  }

  return give_up(SolveStatus::MaxIterations, "iteration limit reached");
}

}  // namespace sdpclik
