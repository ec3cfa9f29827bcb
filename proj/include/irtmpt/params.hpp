#pragma once

#include <array>
#include <cstddef>
#include <variant>

#include <Eigen/Dense>

#include "irtmpt/psi_cell.hpp"

namespace irtmpt {

/// Processes whose success probability follows the logit link; column j of
/// theta/delta and entry j of beta belong to process kLinkedProcesses[j].
inline constexpr std::array<int, 5> kLinkedProcesses{1, 3, 4, 5, 6};

/// Column index of process s in theta/delta/beta. Throws for s in {2,7,8}.
std::size_t linked_column(int s);

struct ModelDims {
  int T = 0;  // respondents
  int K = 0;  // items

  /// Throws DomainError unless T >= 2 and K >= 2.
  void validate() const;
  bool operator==(const ModelDims&) const = default;
};

/// Number of free coordinates after gauge fixing: 6T + 6K - 4.
int param_count(const ModelDims& dims);

struct IrtParams {
  ModelDims dims;
  Eigen::MatrixXd theta;       // T x 5
  Eigen::MatrixXd delta;       // K x 5
  Eigen::Matrix<double, 5, 1> beta = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::VectorXd psi2;        // T, respondent-only
  Eigen::VectorXd psi7;        // K, item-only
  double psi8 = 0.5;

  /// All-zero abilities/difficulties/intercepts and 0.5 free probabilities.
  static IrtParams zeros(const ModelDims& dims);
  /// Throws DomainError on shape mismatch, non-finite entries, or free
  /// probabilities outside (0,1).
  void validate() const;
};

/// Additive translation per linked process: theta += u, delta += v,
/// beta += v - u.
struct GaugeShift {
  Eigen::Matrix<double, 5, 1> u = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 1> v = Eigen::Matrix<double, 5, 1>::Zero();
};

struct PsiTable {
  ModelDims dims;
  Eigen::MatrixXd psi1, psi3, psi4, psi5, psi6;  // T x K
  Eigen::VectorXd psi2;                          // T
  Eigen::VectorXd psi7;                          // K
  double psi8 = 0.5;

  /// Table with every entry equal to `value`.
  static PsiTable constant(const ModelDims& dims, double value);

  PsiCell cell(int t, int k) const;
  const Eigen::MatrixXd& linked(int s) const;
  Eigen::MatrixXd& linked(int s);
  /// Throws DomainError unless shapes match and every entry is in (0,1).
  void validate() const;
};

/// Largest absolute difference over all entries of two same-shaped tables.
double max_abs_diff(const PsiTable& a, const PsiTable& b);

double logistic(double x);
double logit(double p);

/// psi = logistic(theta - delta + beta), kept strictly inside (0,1).
double link(double theta_ts, double delta_ks, double beta_s);

PsiTable build_psi_table(const IrtParams& params);
IrtParams gauge_shift(const IrtParams& params, const GaugeShift& shift);
/// Zero-sum theta and delta columns for each linked process.
IrtParams canonicalize(const IrtParams& params);
bool is_canonical(const IrtParams& params, double tol = 1e-9);

/// Layout, for each s in {1,3,4,5,6}: theta[0..T-2], delta[0..K-2], beta;
/// then logit(psi2[0..T-1]), logit(psi7[0..K-1]), logit(psi8).
Eigen::VectorXd to_canonical_coords(const IrtParams& params);
IrtParams from_canonical_coords(const Eigen::VectorXd& coords, const ModelDims& dims);

struct AdditiveFit {
  Eigen::VectorXd theta;  // sums to zero
  Eigen::VectorXd delta;  // sums to zero
  double beta = 0;
  double residual = 0;    // max |L - (theta_t - delta_k + beta)|
};

struct AdditiveFitFailure {
  double residual;
};

inline constexpr double kDefaultAdditiveTol = 1e-9;

/// Decides whether L[t][k] = theta_t - delta_k + beta, using the row,
/// column and grand means.
std::variant<AdditiveFit, AdditiveFitFailure> additive_decompose(const Eigen::MatrixXd& L,
                                                                 double tol = kDefaultAdditiveTol);

struct LiftFailure {
  int process;
  double residual;
};

/// Recovers canonical IRT parameters from a table when every linked
/// process has additive logits; reports the first process that fails.
std::variant<IrtParams, LiftFailure> lift_to_params(const PsiTable& table,
                                                    double tol = kDefaultAdditiveTol);

}  // namespace irtmpt
