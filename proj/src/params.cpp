#include "irtmpt/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "irtmpt/errors.hpp"

namespace irtmpt {

namespace {

void require_open_unit(double v, const std::string& what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw DomainError(what + " = " + std::to_string(v) + " is outside (0,1)");
  }
}

void require_open_unit(const Eigen::MatrixXd& m, const std::string& what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      require_open_unit(m(r, c), what + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
}

void require_open_unit(const Eigen::VectorXd& v, const std::string& what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    require_open_unit(v(i), what + "[" + std::to_string(i) + "]");
  }
}

void require_shape(Eigen::Index rows, Eigen::Index cols, Eigen::Index want_rows,
                   Eigen::Index want_cols, const std::string& what) {
  if (rows != want_rows || cols != want_cols) {
    throw DomainError(what + " has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected " + std::to_string(want_rows) + "x" + std::to_string(want_cols));
  }
}

}  // namespace

std::size_t linked_column(int s) {
  for (std::size_t j = 0; j < kLinkedProcesses.size(); ++j) {
    if (kLinkedProcesses[j] == s) return j;
  }
  throw DomainError("process " + std::to_string(s) + " has no logit link");
}

void ModelDims::validate() const {
  if (T < 2 || K < 2) {
    throw DomainError("dimensions T=" + std::to_string(T) + ", K=" + std::to_string(K) +
                      " must both be at least 2");
  }
}

int param_count(const ModelDims& dims) {
  dims.validate();
  return 6 * dims.T + 6 * dims.K - 4;
}

IrtParams IrtParams::zeros(const ModelDims& dims) {
  IrtParams p;
  p.dims = dims;
  p.theta = Eigen::MatrixXd::Zero(dims.T, 5);
  p.delta = Eigen::MatrixXd::Zero(dims.K, 5);
  p.psi2 = Eigen::VectorXd::Constant(dims.T, 0.5);
  p.psi7 = Eigen::VectorXd::Constant(dims.K, 0.5);
  p.psi8 = 0.5;
  return p;
}

void IrtParams::validate() const {
  dims.validate();
  require_shape(theta.rows(), theta.cols(), dims.T, 5, "theta");
  require_shape(delta.rows(), delta.cols(), dims.K, 5, "delta");
  require_shape(psi2.size(), 1, dims.T, 1, "psi2");
  require_shape(psi7.size(), 1, dims.K, 1, "psi7");
  if (!theta.allFinite() || !delta.allFinite() || !beta.allFinite()) {
    throw DomainError("theta, delta and beta must be finite");
  }
  require_open_unit(psi2, "psi2");
  require_open_unit(psi7, "psi7");
  require_open_unit(psi8, "psi8");
}

PsiTable PsiTable::constant(const ModelDims& dims, double value) {
  PsiTable t;
  t.dims = dims;
  for (int s : kLinkedProcesses) t.linked(s) = Eigen::MatrixXd::Constant(dims.T, dims.K, value);
  t.psi2 = Eigen::VectorXd::Constant(dims.T, value);
  t.psi7 = Eigen::VectorXd::Constant(dims.K, value);
  t.psi8 = value;
  return t;
}

PsiCell PsiTable::cell(int t, int k) const {
  PsiCell c;
  c(1) = psi1(t, k);
  c(2) = psi2(t);
  c(3) = psi3(t, k);
  c(4) = psi4(t, k);
  c(5) = psi5(t, k);
  c(6) = psi6(t, k);
  c(7) = psi7(k);
  c(8) = psi8;
  return c;
}

const Eigen::MatrixXd& PsiTable::linked(int s) const {
  switch (s) {
    case 1: return psi1;
    case 3: return psi3;
    case 4: return psi4;
    case 5: return psi5;
    case 6: return psi6;
    default: throw DomainError("psi" + std::to_string(s) + " is not a T x K table");
  }
}

Eigen::MatrixXd& PsiTable::linked(int s) {
  return const_cast<Eigen::MatrixXd&>(std::as_const(*this).linked(s));
}

void PsiTable::validate() const {
  dims.validate();
  for (int s : kLinkedProcesses) {
    const auto& m = linked(s);
    const std::string name = "psi" + std::to_string(s);
    require_shape(m.rows(), m.cols(), dims.T, dims.K, name);
    require_open_unit(m, name);
  }
  require_shape(psi2.size(), 1, dims.T, 1, "psi2");
  require_shape(psi7.size(), 1, dims.K, 1, "psi7");
  require_open_unit(psi2, "psi2");
  require_open_unit(psi7, "psi7");
  require_open_unit(psi8, "psi8");
}

double max_abs_diff(const PsiTable& a, const PsiTable& b) {
  if (!(a.dims == b.dims)) throw DomainError("tables have different dimensions");
  double m = 0;
  for (int s : kLinkedProcesses) m = std::max(m, (a.linked(s) - b.linked(s)).cwiseAbs().maxCoeff());
  m = std::max(m, (a.psi2 - b.psi2).cwiseAbs().maxCoeff());
  m = std::max(m, (a.psi7 - b.psi7).cwiseAbs().maxCoeff());
  return std::max(m, std::abs(a.psi8 - b.psi8));
}

double logistic(double x) {
  double p;
  if (x >= 0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    p = e / (1.0 + e);
  }
  if (p >= 1.0) return std::nextafter(1.0, 0.0);
  if (p <= 0.0) return std::numeric_limits<double>::denorm_min();
  return p;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double link(double theta_ts, double delta_ks, double beta_s) {
  return logistic(theta_ts - delta_ks + beta_s);
}

PsiTable build_psi_table(const IrtParams& params) {
  params.validate();
  const auto [T, K] = params.dims;
  PsiTable table;
  table.dims = params.dims;
  for (std::size_t j = 0; j < kLinkedProcesses.size(); ++j) {
    Eigen::MatrixXd m(T, K);
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < K; ++k) {
        m(t, k) = link(params.theta(t, j), params.delta(k, j), params.beta(j));
      }
    }
    table.linked(kLinkedProcesses[j]) = std::move(m);
  }
  table.psi2 = params.psi2;
  table.psi7 = params.psi7;
  table.psi8 = params.psi8;
  return table;
}

IrtParams gauge_shift(const IrtParams& params, const GaugeShift& shift) {
  IrtParams out = params;
  for (Eigen::Index j = 0; j < 5; ++j) {
    out.theta.col(j).array() += shift.u(j);
    out.delta.col(j).array() += shift.v(j);
    out.beta(j) += shift.v(j) - shift.u(j);
  }
  return out;
}

IrtParams canonicalize(const IrtParams& params) {
  params.validate();
  GaugeShift shift;
  for (Eigen::Index j = 0; j < 5; ++j) {
    shift.u(j) = -params.theta.col(j).mean();
    shift.v(j) = -params.delta.col(j).mean();
  }
  return gauge_shift(params, shift);
}

bool is_canonical(const IrtParams& params, double tol) {
  for (Eigen::Index j = 0; j < 5; ++j) {
    if (std::abs(params.theta.col(j).sum()) > tol) return false;
    if (std::abs(params.delta.col(j).sum()) > tol) return false;
  }
  return true;
}

Eigen::VectorXd to_canonical_coords(const IrtParams& params) {
  params.validate();
  if (!is_canonical(params)) throw DomainError("parameters are not canonical (zero-sum theta/delta)");
  const auto [T, K] = params.dims;
  Eigen::VectorXd x(param_count(params.dims));
  Eigen::Index i = 0;
  for (Eigen::Index j = 0; j < 5; ++j) {
    for (int t = 0; t < T - 1; ++t) x(i++) = params.theta(t, j);
    for (int k = 0; k < K - 1; ++k) x(i++) = params.delta(k, j);
    x(i++) = params.beta(j);
  }
  for (int t = 0; t < T; ++t) x(i++) = logit(params.psi2(t));
  for (int k = 0; k < K; ++k) x(i++) = logit(params.psi7(k));
  x(i++) = logit(params.psi8);
  return x;
}

IrtParams from_canonical_coords(const Eigen::VectorXd& coords, const ModelDims& dims) {
  const int n = param_count(dims);
  if (coords.size() != n) {
    throw DomainError("canonical coordinate vector has length " + std::to_string(coords.size()) +
                      ", expected " + std::to_string(n));
  }
  if (!coords.allFinite()) throw DomainError("canonical coordinates must be finite");
  const auto [T, K] = dims;
  IrtParams p = IrtParams::zeros(dims);
  Eigen::Index i = 0;
  for (Eigen::Index j = 0; j < 5; ++j) {
    double sum = 0;
    for (int t = 0; t < T - 1; ++t) sum += p.theta(t, j) = coords(i++);
    p.theta(T - 1, j) = -sum;
    sum = 0;
    for (int k = 0; k < K - 1; ++k) sum += p.delta(k, j) = coords(i++);
    p.delta(K - 1, j) = -sum;
    p.beta(j) = coords(i++);
  }
  for (int t = 0; t < T; ++t) p.psi2(t) = logistic(coords(i++));
  for (int k = 0; k < K; ++k) p.psi7(k) = logistic(coords(i++));
  p.psi8 = logistic(coords(i++));
  return p;
}

std::variant<AdditiveFit, AdditiveFitFailure> additive_decompose(const Eigen::MatrixXd& L,
                                                                 double tol) {
  if (L.size() == 0 || !L.allFinite()) return AdditiveFitFailure{std::numeric_limits<double>::infinity()};
  const double grand = L.mean();
  const Eigen::VectorXd row = L.rowwise().mean();
  const Eigen::RowVectorXd col = L.colwise().mean();

  AdditiveFit fit;
  fit.beta = grand;
  fit.theta = row.array() - grand;
  fit.delta = -(col.transpose().array() - grand);
  double residual = 0;
  for (Eigen::Index t = 0; t < L.rows(); ++t) {
    for (Eigen::Index k = 0; k < L.cols(); ++k) {
      residual = std::max(residual, std::abs(L(t, k) - row(t) - col(k) + grand));
    }
  }
  fit.residual = residual;
  if (residual > tol) return AdditiveFitFailure{residual};
  return fit;
}

std::variant<IrtParams, LiftFailure> lift_to_params(const PsiTable& table, double tol) {
  table.validate();
  IrtParams p = IrtParams::zeros(table.dims);
  for (std::size_t j = 0; j < kLinkedProcesses.size(); ++j) {
    const int s = kLinkedProcesses[j];
    const Eigen::MatrixXd logits = table.linked(s).unaryExpr([](double v) { return logit(v); });
    auto fit = additive_decompose(logits, tol);
    if (auto* failure = std::get_if<AdditiveFitFailure>(&fit)) return LiftFailure{s, failure->residual};
    const auto& ok = std::get<AdditiveFit>(fit);
    p.theta.col(static_cast<Eigen::Index>(j)) = ok.theta;
    p.delta.col(static_cast<Eigen::Index>(j)) = ok.delta;
    p.beta(static_cast<Eigen::Index>(j)) = ok.beta;
  }
  p.psi2 = table.psi2;
  p.psi7 = table.psi7;
  p.psi8 = table.psi8;
  return p;
}

}  // namespace irtmpt
