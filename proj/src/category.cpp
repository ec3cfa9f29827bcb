#include "irtmpt/category.hpp"

#include <cmath>
#include <string>

#include "irtmpt/errors.hpp"
#include "irtmpt/psi_cell.hpp"

namespace irtmpt {

namespace {
constexpr std::array<std::string_view, kNumCategories> kLabels{"C", "S", "F", "M",
                                                               "U", "N", "AN", "NA"};
}

std::string_view to_string(Category c) { return kLabels[index_of(c)]; }

std::optional<Category> parse_category(std::string_view label) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (kLabels[i] == label) return kAllCategories[i];
  }
  return std::nullopt;
}

double CategoryDistribution::sum() const {
  // Kahan: the normalization checks run at 1e-14.
  double s = 0, comp = 0;
  for (double x : p) {
    const double y = x - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

double max_abs_diff(const CategoryDistribution& a, const CategoryDistribution& b) {
  double m = 0;
  for (std::size_t i = 0; i < kNumCategories; ++i) m = std::max(m, std::abs(a.p[i] - b.p[i]));
  return m;
}

void require_unit_interval(const PsiCell& cell) {
  for (int s = 1; s <= 8; ++s) {
    const double v = cell(s);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("psi" + std::to_string(s) + " = " + std::to_string(v) +
                        " is outside [0,1]");
    }
  }
}

}  // namespace irtmpt
