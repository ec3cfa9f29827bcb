#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "irtmpt/diagnostics.hpp"
#include "irtmpt/equivalence.hpp"
#include "irtmpt/params.hpp"

namespace irtmpt::io {

using Json = nlohmann::ordered_json;

/// Shortest representation is not used: every double is written with 17
/// significant digits ("%.17g").
std::string format_double(double x);

/// Serializes JSON with 2-space indentation and format_double numbers.
std::string dump_json(const Json& j);

Json params_to_json(const IrtParams& p);
/// `context` prefixes error messages (usually the file path).
IrtParams params_from_json(const Json& j, const std::string& context);

Json table_to_json(const PsiTable& t);
PsiTable table_from_json(const Json& j, const std::string& context);

Json pair_to_json(const EquivalentPair& pair);
Json rank_to_json(const RankReport& r);
Json report_to_json(const IdentifiabilityReport& r);

/// j[key], or FormatError naming the missing field.
const Json& require_field(const Json& j, const std::string& key, const std::string& context);

/// Parses JSON text; syntax errors become FormatError with line and column.
Json parse_json(std::string_view text, const std::string& context);
Json read_json_file(const std::filesystem::path& path);

/// "t,k,C,S,F,M,U,N,AN,NA", 1-based t and k, t-major.
struct DistributionRow {
  int t = 0;  // 1-based
  int k = 0;  // 1-based
  CategoryDistribution d;
};

std::vector<DistributionRow> distribution_rows(const PsiTable& table);
std::string distribution_csv(const std::vector<DistributionRow>& rows);
std::vector<DistributionRow> parse_distribution_csv(std::string_view text,
                                                    const std::string& context);

std::string counts_csv(const ResponseCounts& counts);
ResponseCounts parse_counts_csv(std::string_view text, const std::string& context);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace irtmpt::io
