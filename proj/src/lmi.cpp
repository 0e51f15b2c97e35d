#include "sdpclik/lmi.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "sdpclik/errors.hpp"

namespace sdpclik {

void LmiBlock::add(int index, const Eigen::MatrixXd& c) {
  for (auto& t : terms) {
    if (t.index == index) {
      t.coeff += c;
      return;
    }
  }
  terms.push_back({index, c});
}

Eigen::MatrixXd LmiBlock::coeff(int index) const {
  for (const auto& t : terms) {
    if (t.index == index) return t.coeff;
  }
  return Eigen::MatrixXd::Zero(size, size);
}

Eigen::MatrixXd LmiBlock::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(size, size);
  for (const auto& t : terms) {
    if (t.index == 0) {
      F += t.coeff;
    } else {
      if (t.index > x.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "block " + name + " references a variable beyond x");
      }
      F += x[t.index - 1] * t.coeff;
    }
  }
  return F;
}

void LmiBlock::validate(int n_vars) const {
  if (size < 1) throw Error(ErrorKind::DimensionMismatch, "block " + name + " is empty");
  for (const auto& t : terms) {
    if (t.index < 0 || t.index > n_vars) {
      throw Error(ErrorKind::DimensionMismatch, "block " + name + " has a bad variable index");
    }
    if (t.coeff.rows() != size || t.coeff.cols() != size) {
      throw Error(ErrorKind::DimensionMismatch, "block " + name + " has a mis-sized coefficient");
    }
    if (!t.coeff.allFinite()) {
      throw Error(ErrorKind::InvalidParameter, "block " + name + " has non-finite coefficients");
    }
    const double asym = (t.coeff - t.coeff.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, t.coeff.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::InvalidParameter, "block " + name + " has a non-symmetric coefficient");
    }
  }
}

LmiBlock build_F1(const ErrorDynamics& dyn) {
  dyn.validate();
  const int n = dyn.n();
  const VariableLayout layout{n};
  const double sqdt = std::sqrt(dyn.dt);

  LmiBlock F;
  F.name = "F1_stability";
  F.size = 2 * n;

  Eigen::MatrixXd F0 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  F0.bottomRightCorner(n, n).setIdentity();
  F.add(0, F0);

  // A(lambda) = sum_l lambda_l * a_l e_l^T with a_l the l-th gain-free column.
  for (int l = 0; l < n; ++l) {
    Eigen::MatrixXd Al = Eigen::MatrixXd::Zero(n, n);
    Al.col(l) = dyn.gain_free.col(l);
    Eigen::MatrixXd Fl(2 * n, 2 * n);
    Fl << -(Al + Al.transpose()), Al.transpose() * sqdt,
          Al * sqdt, Eigen::MatrixXd::Zero(n, n);
    F.add(layout.lambda(l), Fl);
  }

  Eigen::MatrixXd Fb = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Fb.topLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  F.add(layout.beta(), Fb);
  return F;
}

Eigen::MatrixXd build_S(const HierarchyState& state) {
  Eigen::MatrixXd S(state.dof(), state.n());
  for (int i = 0; i < state.h(); ++i) {
    S.middleCols(state.offsets[i], state.dims[i]) =
        state.projectors[i] * state.pinvs[i] * state.errors[i].asDiagonal();
  }
  return S;
}

std::pair<LmiBlock, LmiBlock> build_F2(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                       const Eigen::Ref<const Eigen::VectorXd>& qd_upper,
                                       const Eigen::Ref<const Eigen::VectorXd>& qd_lower) {
  const auto nu = S.rows();
  if (qd_upper.size() != nu || qd_lower.size() != nu) {
    throw Error(ErrorKind::DimensionMismatch, "velocity bounds do not match S");
  }
  const VariableLayout layout{static_cast<int>(S.cols())};

  LmiBlock upper;
  upper.name = "F2_velocity_upper";
  upper.size = static_cast<int>(nu);
  upper.add(0, qd_upper.asDiagonal().toDenseMatrix());

  LmiBlock lower;
  lower.name = "F2_velocity_lower";
  lower.size = static_cast<int>(nu);
  lower.add(0, (-qd_lower).asDiagonal().toDenseMatrix());

  for (int l = 0; l < layout.n; ++l) {
    const Eigen::MatrixXd Dl = S.col(l).asDiagonal().toDenseMatrix();
    upper.add(layout.lambda(l), -Dl);
    lower.add(layout.lambda(l), Dl);
  }
  return {std::move(upper), std::move(lower)};
}

LmiBlock build_F3(double beta_tilde, double delta, int n) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidParameter, "delta must be positive");
  }
  if (!std::isfinite(beta_tilde)) {
    throw Error(ErrorKind::InvalidParameter, "beta_tilde must be finite");
  }
  const VariableLayout layout{n};
  const int s = n + 2;
  const int beta_row = n + 1;

  LmiBlock F;
  F.name = "F3_beta_soft";
  F.size = s;

  Eigen::MatrixXd F0 = Eigen::MatrixXd::Zero(s, s);
  F0.block(1, 1, n, n) = Eigen::MatrixXd::Identity(n, n) / delta;
  F0(beta_row, beta_row) = 1.0;
  F0(0, beta_row) = F0(beta_row, 0) = -beta_tilde;
  F.add(0, F0);

  for (int l = 0; l < n; ++l) {
    Eigen::MatrixXd Fl = Eigen::MatrixXd::Zero(s, s);
    Fl(0, 1 + l) = Fl(1 + l, 0) = 1.0;
    F.add(layout.lambda(l), Fl);
  }

  Eigen::MatrixXd Fb = Eigen::MatrixXd::Zero(s, s);
  Fb(0, beta_row) = Fb(beta_row, 0) = 1.0;
  F.add(layout.beta(), Fb);

  Eigen::MatrixXd Fg = Eigen::MatrixXd::Zero(s, s);
  Fg(0, 0) = 1.0;
  F.add(layout.gamma(), Fg);
  return F;
}

LmiBlock build_F4_beta_positive(double eps_beta, int n) {
  if (!(eps_beta >= 0.0)) throw Error(ErrorKind::InvalidParameter, "eps_beta must be >= 0");
  const VariableLayout layout{n};
  LmiBlock F;
  F.name = "F4_beta_positive";
  F.size = 1;
  F.add(0, Eigen::MatrixXd::Constant(1, 1, -eps_beta));
  F.add(layout.beta(), Eigen::MatrixXd::Ones(1, 1));
  return F;
}

LmiBlock build_gain_nonnegativity(int n) {
  const VariableLayout layout{n};
  LmiBlock F;
  F.name = "F5_gain_nonnegative";
  F.size = n;
  F.add(0, Eigen::MatrixXd::Zero(n, n));
  for (int l = 0; l < n; ++l) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    E(l, l) = 1.0;
    F.add(layout.lambda(l), E);
  }
  return F;
}

SdpProblem assemble_problem(std::vector<LmiBlock> blocks, int n) {
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "problem needs at least one gain");
  SdpProblem p;
  p.layout = VariableLayout{n};
  p.c = Eigen::VectorXd::Zero(p.n_vars());
  p.c[p.layout.gamma() - 1] = 1.0;
  for (const auto& b : blocks) b.validate(p.n_vars());
  p.blocks = std::move(blocks);
  return p;
}

SdpProblem build_gain_problem(const HierarchyState& state, const ManipulatorModel& model,
                              double dt, const GainProblemParams& params) {
  const int n = state.n();
  const auto dyn = ErrorDynamics::from_state(state, dt);
  auto [upper, lower] = build_F2(build_S(state), model.qd_upper, model.qd_lower);

  std::vector<LmiBlock> blocks;
  blocks.push_back(build_F1(dyn));
  blocks.push_back(std::move(upper));
  blocks.push_back(std::move(lower));
  blocks.push_back(build_F3(params.beta_tilde, params.delta, n));
  blocks.push_back(build_F4_beta_positive(params.eps_beta, n));
  blocks.push_back(build_gain_nonnegativity(n));
  return assemble_problem(std::move(blocks), n);
}

void write_sdpa(std::ostream& os, const SdpProblem& problem) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);

  os << "\"sdpclik gain problem: n=" << problem.layout.n
     << ", x = [lambda_1..lambda_n, beta, gamma]\n";
  os << problem.n_vars() << '\n' << problem.blocks.size() << '\n';
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    os << (b ? " " : "") << problem.blocks[b].size;
  }
  os << '\n';
  for (int i = 0; i < problem.n_vars(); ++i) os << (i ? " " : "") << problem.c[i];
  os << '\n';

  for (int index = 0; index <= problem.n_vars(); ++index) {
    const double sign = index == 0 ? -1.0 : 1.0;
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
      const Eigen::MatrixXd M = problem.blocks[b].coeff(index);
      for (int r = 0; r < M.rows(); ++r) {
        for (int c = r; c < M.cols(); ++c) {
          if (M(r, c) != 0.0) {
            os << index << ' ' << b + 1 << ' ' << r + 1 << ' ' << c + 1 << ' ' << sign * M(r, c)
               << '\n';
          }
        }
      }
    }
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace sdpclik
