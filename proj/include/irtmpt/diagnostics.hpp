#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irtmpt/category.hpp"
#include "irtmpt/equivalence.hpp"
#include "irtmpt/params.hpp"

namespace irtmpt {

/// Per-cell probabilities stacked t-major then k, categories in canonical
/// order. With `all_categories` false the NA entry of each cell is dropped
/// (7 rows per cell), otherwise all 8 are kept.
Eigen::VectorXd stacked_probabilities(const IrtParams& params, bool all_categories = false);

struct JacobianMatrix {
  Eigen::MatrixXd values;  // rows: T*K*rows_per_cell, cols: param_count
  int rows_per_cell = 7;
  double step = 0;
  Eigen::VectorXd at;      // canonical coordinates of the evaluation point
};

inline constexpr double kDefaultJacobianStep = 1e-5;

/// Central differences of stacked_probabilities in canonical coordinates.
/// Requires canonical params and step in [1e-8, 1e-3].
JacobianMatrix jacobian(const IrtParams& params, double step = kDefaultJacobianStep,
                        bool all_categories = false, unsigned threads = 1);

struct RankReport {
  Eigen::VectorXd singular_values;  // descending
  int rank = 0;
  double rel_cutoff = 0;
  double cutoff = 0;                // rel_cutoff * sigma_max
  ModelDims dims;
  int param_count = 0;
  int deficiency = 0;
};

inline constexpr double kDefaultRelCutoff = 1e-7;

RankReport numerical_rank(const Eigen::MatrixXd& m, double rel_cutoff = kDefaultRelCutoff);
RankReport numerical_rank(const JacobianMatrix& j, const ModelDims& dims,
                          double rel_cutoff = kDefaultRelCutoff);

/// Sum over cells of J_c^T diag(1/p_c) J_c over all eight categories.
/// Throws DomainError naming the cell and category when p < 1e-12.
Eigen::MatrixXd fisher_information(const IrtParams& params, double step = kDefaultJacobianStep,
                                   unsigned threads = 1);

/// Rank of a Fisher information matrix under the same relative cutoff as the
/// Jacobian: the cutoff is applied to the square roots of its eigenvalues,
/// which are the singular values of the information-weighted Jacobian.
RankReport fisher_rank(const Eigen::MatrixXd& info, const ModelDims& dims,
                       double rel_cutoff = kDefaultRelCutoff);

struct ResponseCounts {
  ModelDims dims;
  std::int64_t n_per_cell = 0;
  std::vector<std::array<std::int64_t, kNumCategories>> counts;  // t-major

  const std::array<std::int64_t, kNumCategories>& cell(int t, int k) const {
    return counts.at(static_cast<std::size_t>(t * dims.K + k));
  }
  std::array<std::int64_t, kNumCategories>& cell(int t, int k) {
    return counts.at(static_cast<std::size_t>(t * dims.K + k));
  }
};

/// Multinomial draws, one counter-based substream per cell, so the result
/// does not depend on `threads`.
ResponseCounts simulate(const PsiTable& table, std::int64_t n_per_cell, std::uint64_t seed,
                        unsigned threads = 1);
ResponseCounts simulate(const IrtParams& params, std::int64_t n_per_cell, std::uint64_t seed,
                        unsigned threads = 1);

/// Multinomial log-likelihood without the combinatorial constant. Throws
/// DomainError when a category with positive count has probability below
/// 1e-300.
double log_likelihood(const PsiTable& table, const ResponseCounts& data);

struct ReportOptions {
  double case_tol = kDefaultCaseTol;
  double eta_margin = 0.05;
  double step = kDefaultJacobianStep;
  double rel_cutoff = kDefaultRelCutoff;
  double pair_tol = 1e-12;
  int grid_points = 10;
  unsigned threads = 1;
};

struct PartnerReport {
  EtaXiTransform transform;
  PsiTable table;
  std::optional<IrtParams> params;
  PairVerification verification;
  EqualityReport equalities;
};

struct IdentifiabilityReport {
  CaseLabel case_label = CaseLabel::Neither;
  Interval eta;               // raw range from the table
  bool eta_admissible = false;  // non-empty after removing the margin band
  std::optional<Interval> xi;   // for the chosen eta when a partner exists
  int representable_grid_count = 0;
  RankReport rank;
  std::optional<PartnerReport> partner;
  std::vector<std::string> notes;
};

IdentifiabilityReport identifiability_report(const IrtParams& params,
                                             const ReportOptions& options = {});

/// Human-readable multi-line summary.
std::string summarize(const IdentifiabilityReport& report);

}  // namespace irtmpt
