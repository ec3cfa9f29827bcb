#pragma once

#include <array>
#include <string_view>

#include "irtmpt/category.hpp"
#include "irtmpt/params.hpp"
#include "irtmpt/psi_cell.hpp"

namespace irtmpt {

/// Closed-form category probabilities of one cell. Entries must lie in [0,1].
CategoryDistribution category_distribution(const PsiCell& psi);

/// Conditional probabilities p1..p7 of the response process:
///   p1 = P(R != NA)
///   p2 = P(R not in {AN,U,S} | R != NA)
///   p3 = P(R = S  | R in {AN,U,S})
///   p4 = P(R = AN | R in {AN,U,S})
///   p5 = P(R = C  | R not in {NA,AN,U,S})
///   p6 = P(R = M  | R not in {NA,AN,U,S})
///   p7 = P(R = N  | R not in {NA,AN,U,S})
struct ConditionalProbs {
  std::array<double, 7> p{};

  double operator()(int i) const { return p[static_cast<std::size_t>(i - 1)]; }
  double& operator()(int i) { return p[static_cast<std::size_t>(i - 1)]; }
};

/// Probabilities below this are treated as zero when conditioning.
inline constexpr double kZeroProbability = 1e-300;

/// Definitional ratios of the distribution. Throws DomainError naming the
/// conditioning event when it has zero probability.
ConditionalProbs conditional_probs_from_distribution(const CategoryDistribution& d);

/// The same conditionals written directly in terms of psi.
ConditionalProbs conditional_probs_from_psi(const PsiCell& psi);

/// r_a = p5/p6, r_b = p5 + p6, r_c = (1-p2) p3 / p2, r_d = p7/p4.
struct RatioSet {
  double r_a = 0;
  double r_b = 0;
  double r_c = 0;
  double r_d = 0;
};

RatioSet derived_ratios(const ConditionalProbs& p);

/// The seven relations any two observationally equivalent tables share.
enum class Relation {
  Attempt,        // psi1
  SelectionOdds,  // psi5 / (1 - psi5)
  PhonTarget,     // psi4 psi6
  Lexical,        // psi2 psi3
  SemanticRatio,  // (1 - psi3) psi6 / psi3
  Abstruse,       // (1 - psi6)(1 - psi8)
  NeologismRatio, // (1 - psi7) / (1 - psi8)
};
inline constexpr std::size_t kNumRelations = 7;
std::string_view relation_label(Relation r);  // the relation's formula, e.g. "psi4*psi6"

struct EqualityReport {
  std::array<double, kNumRelations> max_discrepancy{};
  double tol = 0;
  bool pass = false;

  double operator[](Relation r) const { return max_discrepancy[static_cast<std::size_t>(r)]; }
};

/// Per-relation maximum absolute discrepancy over all cells.
EqualityReport check_necessary_equalities(const PsiTable& a, const PsiTable& b, double tol);

}  // namespace irtmpt
