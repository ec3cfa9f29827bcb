#include "irtmpt/forward_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "irtmpt/errors.hpp"

namespace irtmpt {

CategoryDistribution category_distribution(const PsiCell& psi) {
  require_unit_interval(psi);
  const double p1 = psi(1), p2 = psi(2), p3 = psi(3), p4 = psi(4);
  const double p5 = psi(5), p6 = psi(6), p7 = psi(7), p8 = psi(8);

  const double lex = p1 * p2 * p3;  // reached LexPhon
  const double no_lex = p1 * (1.0 - p2 * p3);

  CategoryDistribution d;
  d[Category::NA] = 1.0 - p1;
  d[Category::C] = lex * p4 * p5 * p6;
  d[Category::M] = lex * p4 * (1.0 - p5) * p6;
  d[Category::S] = p1 * p2 * (1.0 - p3) * p6;
  d[Category::F] = lex * ((1.0 - p4) * p6 + (1.0 - p6) * p7);
  d[Category::N] = lex * (1.0 - p6) * (1.0 - p7);
  d[Category::U] = p1 * (1.0 - p2) * p6 + no_lex * (1.0 - p6) * p8;
  d[Category::AN] = no_lex * (1.0 - p6) * (1.0 - p8);
  return d;
}

ConditionalProbs conditional_probs_from_distribution(const CategoryDistribution& d) {
  const double attempted = 1.0 - d[Category::NA];
  if (!(attempted > kZeroProbability)) {
    throw DomainError("conditioning event R != NA has probability 0");
  }
  const double early = d[Category::AN] + d[Category::U] + d[Category::S];
  const double late = d[Category::C] + d[Category::F] + d[Category::M] + d[Category::N];
  if (!(early > kZeroProbability) && !(late > kZeroProbability)) {
    throw DomainError("conditioning events R in {AN,U,S} and R not in {NA,AN,U,S} both have probability 0");
  }
  constexpr double undefined = std::numeric_limits<double>::quiet_NaN();

  ConditionalProbs p;
  p(1) = attempted;
  p(2) = late / attempted;
  // A zero-probability sub-event leaves its conditionals undefined (NaN).
  p(3) = early > kZeroProbability ? d[Category::S] / early : undefined;
  p(4) = early > kZeroProbability ? d[Category::AN] / early : undefined;
  p(5) = late > kZeroProbability ? d[Category::C] / late : undefined;
  p(6) = late > kZeroProbability ? d[Category::M] / late : undefined;
  p(7) = late > kZeroProbability ? d[Category::N] / late : undefined;
  return p;
}

ConditionalProbs conditional_probs_from_psi(const PsiCell& psi) {
  require_unit_interval(psi);
  ConditionalProbs p;
  p(1) = psi(1);
  p(2) = psi(2) * psi(3);
  p(3) = psi(2) * (1.0 - psi(3)) * psi(6) / (1.0 - p(2));
  p(4) = (1.0 - psi(6)) * (1.0 - psi(8));
  p(5) = psi(4) * psi(5) * psi(6);
  p(6) = psi(4) * (1.0 - psi(5)) * psi(6);
  p(7) = (1.0 - psi(6)) * (1.0 - psi(7));
  return p;
}

namespace {

double safe_ratio(double num, double den, const char* what) {
  if (!(std::abs(den) > kZeroProbability)) {
    throw DomainError(std::string("zero denominator in ") + what);
  }
  return num / den;
}

}  // namespace

RatioSet derived_ratios(const ConditionalProbs& p) {
  RatioSet r;
  r.r_a = safe_ratio(p(5), p(6), "p5/p6");
  r.r_b = p(5) + p(6);
  r.r_c = safe_ratio((1.0 - p(2)) * p(3), p(2), "(1-p2)p3/p2");
  r.r_d = safe_ratio(p(7), p(4), "p7/p4");
  return r;
}

std::string_view relation_label(Relation r) {
  static constexpr std::string_view labels[] = {"psi1",      "psi5/(1-psi5)",     "psi4*psi6",        "psi2*psi3",
                                                 "(1-psi3)*psi6/psi3", "(1-psi6)*(1-psi8)", "(1-psi7)/(1-psi8)"};
  return labels[static_cast<std::size_t>(r)];
}

namespace {

std::array<double, kNumRelations> relation_values(const PsiCell& c) {
  return {
      c(1),
      c(5) / (1.0 - c(5)),
      c(4) * c(6),
      c(2) * c(3),
      (1.0 - c(3)) * c(6) / c(3),
      (1.0 - c(6)) * (1.0 - c(8)),
      (1.0 - c(7)) / (1.0 - c(8)),
  };
}

}  // namespace

EqualityReport check_necessary_equalities(const PsiTable& a, const PsiTable& b, double tol) {
  if (!(a.dims == b.dims)) throw DomainError("tables have different dimensions");
  a.validate();
  b.validate();
  EqualityReport report;
  report.tol = tol;
  for (int t = 0; t < a.dims.T; ++t) {
    for (int k = 0; k < a.dims.K; ++k) {
      const auto va = relation_values(a.cell(t, k));
      const auto vb = relation_values(b.cell(t, k));
      for (std::size_t i = 0; i < kNumRelations; ++i) {
        report.max_discrepancy[i] = std::max(report.max_discrepancy[i], std::abs(va[i] - vb[i]));
      }
    }
  }
  report.pass = true;
  for (double d : report.max_discrepancy) report.pass = report.pass && d <= tol;
  return report;
}

}  // namespace irtmpt
