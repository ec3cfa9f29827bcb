#pragma once

#include <array>

namespace irtmpt {

/// Success probabilities of the eight processes for one (respondent, item)
/// cell. Process s lives in psi[s - 1].
struct PsiCell {
  std::array<double, 8> psi{};

  double operator()(int s) const { return psi[static_cast<std::size_t>(s - 1)]; }
  double& operator()(int s) { return psi[static_cast<std::size_t>(s - 1)]; }

  static PsiCell filled(double value) {
    PsiCell c;
    c.psi.fill(value);
    return c;
  }
};

/// Throws DomainError unless every entry lies in the closed unit interval.
void require_unit_interval(const PsiCell& cell);

}  // namespace irtmpt
