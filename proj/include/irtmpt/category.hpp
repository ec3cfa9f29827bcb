#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace irtmpt {

/// Observable response categories of a picture-naming trial.
/// Enumerator order is the canonical serialization order.
enum class Category : std::uint8_t { C, S, F, M, U, N, AN, NA };

inline constexpr std::size_t kNumCategories = 8;

inline constexpr std::array<Category, kNumCategories> kAllCategories{
    Category::C, Category::S,  Category::F,  Category::M,
    Category::U, Category::N, Category::AN, Category::NA};

constexpr std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view label);

/// Probability over the eight categories of one (respondent, item) cell.
struct CategoryDistribution {
  std::array<double, kNumCategories> p{};

  double& operator[](Category c) { return p[index_of(c)]; }
  double operator[](Category c) const { return p[index_of(c)]; }
  double sum() const;
};

/// Largest componentwise absolute difference.
double max_abs_diff(const CategoryDistribution& a, const CategoryDistribution& b);

}  // namespace irtmpt
