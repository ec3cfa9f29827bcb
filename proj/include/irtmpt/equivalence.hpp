#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irtmpt/forward_model.hpp"
#include "irtmpt/params.hpp"

namespace irtmpt {

/// Which of theta_{.6} / delta_{.6} vanish after canonicalization.
enum class CaseLabel { ThetaSixZero, DeltaSixZero, BothZero, Neither };

/// "theta6-zero", "delta6-zero", "both-zero", "neither".
std::string_view to_string(CaseLabel c);
std::optional<CaseLabel> parse_case_label(std::string_view label);

/// Open interval (lo, hi); empty when lo >= hi.
struct Interval {
  double lo = 0;
  double hi = 0;

  bool empty() const { return !(lo < hi); }
  bool contains(double x) const { return lo < x && x < hi; }
};

/// eta = (1 - psi8) / (1 - psi8'); xi = psi2_t / psi2_t'. A single xi entry
/// applies to every respondent; otherwise xi holds one value per respondent.
struct EtaXiTransform {
  double eta = 1.0;
  std::vector<double> xi{1.0};

  double xi_for(int t) const { return xi.size() == 1 ? xi[0] : xi.at(static_cast<std::size_t>(t)); }
  bool per_respondent() const { return xi.size() != 1; }
};

/// Cells with psi6 above this are excluded from the eta upper bound (their
/// bound diverges).
inline constexpr double kPsi6Degenerate = 1.0 - 1e-9;

/// lo = max{1 - psi8, max_k (1 - psi7_k)};
/// hi = min_{t,k} [1 - psi6 max{psi4, psi2 (1 - psi3) / (1 - psi2 psi3)}] / (1 - psi6).
/// Always returned, even when empty.
Interval eta_range(const PsiTable& table);

/// Same lower bound; upper bound with the psi2 term replaced by psi2_t
/// (the conservative bound used before psi3 is known). psi4 and psi6 must
/// each depend on k only or on t only, otherwise DomainError.
Interval generator_eta_range(const PsiTable& table);

/// eta < 1: (1, min (1 - eta + eta psi6) / psi6); eta > 1: (max (...), 1),
/// extrema over all cells. Throws DomainError for eta == 1.
Interval xi_range(double eta, const PsiTable& table);

struct XiViolation {
  int t = 0;
  int k = 0;
  double discrepancy = 0;  // |xi_t psi3_tk - psi3'_tk|
};

struct TransformResult {
  PsiTable table;
  /// Cells where xi_t psi3 disagrees with the per-cell psi3' by more than
  /// kXiConsistencyTol; the table is then not an equivalent partner.
  std::vector<XiViolation> xi_violations;
  double max_xi_discrepancy = 0;

  bool consistent() const { return xi_violations.empty(); }
};

inline constexpr double kXiConsistencyTol = 1e-12;

/// Maps psi8, psi7, psi6, psi4, psi3 through eta and psi2 through xi;
/// psi1 and psi5 are unchanged. Throws RangeViolation when any transformed
/// entry (including the per-cell psi2_t psi3 / psi3' implied value) leaves
/// (0,1). eta == 1 with all xi == 1 returns the input unchanged.
TransformResult apply_transform(const PsiTable& table, const EtaXiTransform& tr);

/// xi_t = psi3'_{t,0} / psi3_{t,0} for every respondent.
std::vector<double> implied_xi(const PsiTable& table, double eta);

inline constexpr double kDefaultCaseTol = 1e-9;

/// Requires canonical params (DomainError otherwise).
CaseLabel classify_case(const IrtParams& params, double tol = kDefaultCaseTol);

struct PairVerification {
  double max_dist_distribution = 0;  // max over cells of L-inf distance
  double max_dist_params = 0;        // L-inf distance between psi tables
  int worst_t = 0;
  int worst_k = 0;
  double tol = 0;
  bool pass = false;
};

PairVerification verify_pair(const PsiTable& a, const PsiTable& b, double tol);

struct GeneratorOptions {
  double eta_margin = 0.05;
  bool eta_above_one = false;  // draw from the mirrored eta > 1 branch
  int max_retries = 1000;
  double base_lo = 0.15;
  double base_hi = 0.85;
  double tol = 1e-12;
  unsigned threads = 1;  // oracle verification only; never changes the draws
};

struct EquivalentPair {
  CaseLabel case_label = CaseLabel::Neither;
  std::uint64_t seed = 0;
  IrtParams omega;
  PsiTable omega_table;
  PsiTable omega_prime_table;
  std::optional<IrtParams> omega_prime;
  EtaXiTransform transform;
  PairVerification verification;
  EqualityReport equalities;
  double oracle_max_dist = 0;
  int attempts = 0;
};

/// Draws base probabilities with the dependence structure of `case_label`,
/// an eta away from 1 by at least eta_margin and a compatible xi, builds
/// omega and its transformed partner, and verifies the pair. Throws
/// DomainError for Neither, GenerationFailure when retries run out and
/// InternalInvariantError if a constructed pair fails verification.
EquivalentPair generate_nonidentifiable(const ModelDims& dims, CaseLabel case_label,
                                        std::uint64_t seed, const GeneratorOptions& options = {});

struct TransformSearch {
  std::optional<EtaXiTransform> transform;
  std::string note;
};

/// Looks for a non-trivial transform of a given table. ThetaSixZero solves
/// for the single eta that makes xi item-independent; DeltaSixZero and
/// BothZero pick an eta inside eta_range outside the margin band.
TransformSearch find_transform(const PsiTable& table, CaseLabel case_label, double eta_margin);

/// Interior eta grid points (excluding eta == 1) at which the implied-xi
/// transform is consistent and lifts back to IRT parameters.
int count_representable_on_grid(const PsiTable& table, int grid_points = 10);

}  // namespace irtmpt
