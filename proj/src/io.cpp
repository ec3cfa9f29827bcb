#include "irtmpt/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "irtmpt/errors.hpp"

namespace irtmpt::io {

namespace {

constexpr std::array<int, 5> kLinked = kLinkedProcesses;

std::string process_key(int s) { return "s" + std::to_string(s); }

[[noreturn]] void fail(const std::string& context, const std::string& field, const std::string& what) {
  throw FormatError(context + ": field '" + field + "': " + what);
}

const Json& require(const Json& j, const std::string& key, const std::string& context,
                    const std::string& path = "") {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!j.is_object()) fail(context, path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(context, field, "missing");
  return *it;
}

double number(const Json& j, const std::string& context, const std::string& field) {
  if (!j.is_number()) fail(context, field, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(context, field, "not finite");
  return v;
}

int integer(const Json& j, const std::string& context, const std::string& field) {
  if (!j.is_number_integer()) fail(context, field, "expected an integer");
  return j.get<int>();
}

Eigen::VectorXd vector_of(const Json& j, Eigen::Index n, const std::string& context,
                          const std::string& field) {
  if (!j.is_array()) fail(context, field, "expected an array");
  if (static_cast<Eigen::Index>(j.size()) != n) {
    fail(context, field, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = number(j[static_cast<std::size_t>(i)], context, field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Eigen::MatrixXd matrix_of(const Json& j, int rows, int cols, const std::string& context,
                          const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    fail(context, field, "expected an array of " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    m.row(r) = vector_of(j[static_cast<std::size_t>(r)], cols, context,
                         field + "[" + std::to_string(r) + "]")
                   .transpose();
  }
  return m;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

ModelDims dims_from(const Json& j, const std::string& context) {
  ModelDims dims{integer(require(j, "T", context), context, "T"),
                 integer(require(j, "K", context), context, "K")};
  if (dims.T < 2 || dims.K < 2) fail(context, "T/K", "dimensions must both be at least 2");
  return dims;
}

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(),
                                     [](const Json& e) { return e.is_structured(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += inner;
        dump(e, out, indent + 1);
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

std::string line_context(const std::string& context, std::size_t line) {
  return context + ":" + std::to_string(line);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

template <typename T>
T parse_number_field(const std::string& s, const std::string& context, const std::string& field) {
  T value{};
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* stop = nullptr;
    const std::string copy(s);
    value = std::strtod(copy.c_str(), &stop);
    if (copy.empty() || stop != copy.c_str() + copy.size() || !std::isfinite(value)) {
      throw FormatError(context + ": field '" + field + "': not a finite number: '" + s + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      throw FormatError(context + ": field '" + field + "': not an integer: '" + s + "'");
    }
  }
  return value;
}

std::string csv_header() {
  std::string h = "t,k";
  for (Category c : kAllCategories) h += "," + std::string(to_string(c));
  return h;
}

void check_header(const std::vector<std::string_view>& lines, const std::string& context) {
  if (lines.empty()) throw FormatError(context + ": empty file");
  if (lines[0] != csv_header()) {
    throw FormatError(context + ":1: header must be '" + csv_header() + "'");
  }
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) x = 0.0;  // drop the sign of zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep the value recognisably floating point in JSON.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

Json params_to_json(const IrtParams& p) {
  Json j;
  j["T"] = p.dims.T;
  j["K"] = p.dims.K;
  Json theta, delta, beta;
  for (std::size_t c = 0; c < kLinked.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    theta[process_key(kLinked[c])] = vector_json(p.theta.col(col));
    delta[process_key(kLinked[c])] = vector_json(p.delta.col(col));
    beta[process_key(kLinked[c])] = p.beta(col);
  }
  j["theta"] = theta;
  j["delta"] = delta;
  j["beta"] = beta;
  j["psi2"] = vector_json(p.psi2);
  j["psi7"] = vector_json(p.psi7);
  j["psi8"] = p.psi8;
  return j;
}

IrtParams params_from_json(const Json& j, const std::string& context) {
  const ModelDims dims = dims_from(j, context);
  IrtParams p = IrtParams::zeros(dims);
  const Json& theta = require(j, "theta", context);
  const Json& delta = require(j, "delta", context);
  const Json& beta = require(j, "beta", context);
  for (std::size_t c = 0; c < kLinked.size(); ++c) {
    const std::string key = process_key(kLinked[c]);
    const auto col = static_cast<Eigen::Index>(c);
    p.theta.col(col) = vector_of(require(theta, key, context, "theta"), dims.T, context, "theta." + key);
    p.delta.col(col) = vector_of(require(delta, key, context, "delta"), dims.K, context, "delta." + key);
    p.beta(col) = number(require(beta, key, context, "beta"), context, "beta." + key);
  }
  p.psi2 = vector_of(require(j, "psi2", context), dims.T, context, "psi2");
  p.psi7 = vector_of(require(j, "psi7", context), dims.K, context, "psi7");
  p.psi8 = number(require(j, "psi8", context), context, "psi8");
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw FormatError(context + ": " + e.what());
  }
  return p;
}

Json table_to_json(const PsiTable& t) {
  Json j;
  j["T"] = t.dims.T;
  j["K"] = t.dims.K;
  j["psi1"] = matrix_json(t.psi1);
  j["psi2"] = vector_json(t.psi2);
  j["psi3"] = matrix_json(t.psi3);
  j["psi4"] = matrix_json(t.psi4);
  j["psi5"] = matrix_json(t.psi5);
  j["psi6"] = matrix_json(t.psi6);
  j["psi7"] = vector_json(t.psi7);
  j["psi8"] = t.psi8;
  return j;
}

PsiTable table_from_json(const Json& j, const std::string& context) {
  PsiTable t;
  t.dims = dims_from(j, context);
  for (int s : kLinked) {
    const std::string key = "psi" + std::to_string(s);
    t.linked(s) = matrix_of(require(j, key, context), t.dims.T, t.dims.K, context, key);
  }
  t.psi2 = vector_of(require(j, "psi2", context), t.dims.T, context, "psi2");
  t.psi7 = vector_of(require(j, "psi7", context), t.dims.K, context, "psi7");
  t.psi8 = number(require(j, "psi8", context), context, "psi8");
  try {
    t.validate();
  } catch (const DomainError& e) {
    throw FormatError(context + ": " + e.what());
  }
  return t;
}

Json pair_to_json(const EquivalentPair& pair) {
  Json j;
  j["case"] = std::string(to_string(pair.case_label));
  j["seed"] = pair.seed;
  j["eta"] = pair.transform.eta;
  if (pair.transform.per_respondent()) {
    Json xs = Json::array();
    for (double x : pair.transform.xi) xs.push_back(x);
    j["xi_per_t"] = xs;
  } else {
    j["xi"] = pair.transform.xi.front();
  }
  j["omega"] = params_to_json(pair.omega);
  if (pair.omega_prime) j["omega_prime"] = params_to_json(*pair.omega_prime);
  j["omega_prime_table"] = table_to_json(pair.omega_prime_table);
  Json v;
  v["max_dist_distribution"] = pair.verification.max_dist_distribution;
  v["max_dist_params"] = pair.verification.max_dist_params;
  v["max_dist_oracle"] = pair.oracle_max_dist;
  v["tol"] = pair.verification.tol;
  Json eq;
  for (std::size_t i = 0; i < kNumRelations; ++i) {
    eq[std::string(relation_label(static_cast<Relation>(i)))] = pair.equalities.max_discrepancy[i];
  }
  v["necessary_equalities"] = eq;
  j["verification"] = v;
  return j;
}

Json rank_to_json(const RankReport& r) {
  Json j;
  j["T"] = r.dims.T;
  j["K"] = r.dims.K;
  j["param_count"] = r.param_count;
  j["rank"] = r.rank;
  j["deficiency"] = r.deficiency;
  j["rel_cutoff"] = r.rel_cutoff;
  j["cutoff"] = r.cutoff;
  const Eigen::Index n = r.singular_values.size();
  const Eigen::Index head = std::min<Eigen::Index>(5, n);
  j["spectrum_head"] = vector_json(r.singular_values.head(head));
  j["spectrum_tail"] = vector_json(r.singular_values.tail(head));
  j["singular_values"] = vector_json(r.singular_values);
  return j;
}

Json report_to_json(const IdentifiabilityReport& r) {
  Json j;
  j["case"] = std::string(to_string(r.case_label));
  j["eta_range"] = {{"lo", r.eta.lo}, {"hi", r.eta.hi}, {"admissible", r.eta_admissible}};
  if (r.xi) j["xi_range"] = {{"lo", r.xi->lo}, {"hi", r.xi->hi}};
  j["representable_grid_count"] = r.representable_grid_count;
  j["rank"] = rank_to_json(r.rank);
  if (r.partner) {
    Json p;
    p["eta"] = r.partner->transform.eta;
    if (r.partner->transform.per_respondent()) {
      Json xs = Json::array();
      for (double x : r.partner->transform.xi) xs.push_back(x);
      p["xi_per_t"] = xs;
    } else {
      p["xi"] = r.partner->transform.xi.front();
    }
    p["table"] = table_to_json(r.partner->table);
    if (r.partner->params) p["params"] = params_to_json(*r.partner->params);
    p["verification"] = {{"max_dist_distribution", r.partner->verification.max_dist_distribution},
                         {"max_dist_params", r.partner->verification.max_dist_params},
                         {"pass", r.partner->verification.pass}};
    j["partner"] = p;
  } else {
    j["partner"] = nullptr;
  }
  Json notes = Json::array();
  for (const auto& n : r.notes) notes.push_back(n);
  j["notes"] = notes;
  return j;
}

const Json& require_field(const Json& j, const std::string& key, const std::string& context) {
  return require(j, key, context);
}

Json parse_json(std::string_view text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw FormatError(context + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": malformed JSON: " + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

std::vector<DistributionRow> distribution_rows(const PsiTable& table) {
  table.validate();
  std::vector<DistributionRow> rows;
  for (int t = 0; t < table.dims.T; ++t) {
    for (int k = 0; k < table.dims.K; ++k) {
      rows.push_back({t + 1, k + 1, category_distribution(table.cell(t, k))});
    }
  }
  return rows;
}

std::string distribution_csv(const std::vector<DistributionRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t) + "," + std::to_string(r.k);
    for (double p : r.d.p) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<DistributionRow> parse_distribution_csv(std::string_view text, const std::string& context) {
  const auto lines = split_lines(text);
  check_header(lines, context);
  std::vector<DistributionRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = line_context(context, i + 1);
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 2 + kNumCategories) {
      throw FormatError(where + ": expected 10 fields, got " + std::to_string(fields.size()));
    }
    DistributionRow row;
    row.t = parse_number_field<int>(fields[0], where, "t");
    row.k = parse_number_field<int>(fields[1], where, "k");
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      row.d.p[c] = parse_number_field<double>(fields[2 + c], where, std::string(to_string(kAllCategories[c])));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string counts_csv(const ResponseCounts& counts) {
  std::string out = csv_header() + "\n";
  for (int t = 0; t < counts.dims.T; ++t) {
    for (int k = 0; k < counts.dims.K; ++k) {
      out += std::to_string(t + 1) + "," + std::to_string(k + 1);
      for (auto n : counts.cell(t, k)) out += "," + std::to_string(n);
      out += "\n";
    }
  }
  return out;
}

ResponseCounts parse_counts_csv(std::string_view text, const std::string& context) {
  const auto lines = split_lines(text);
  check_header(lines, context);
  struct Row {
    int t, k;
    std::array<std::int64_t, kNumCategories> n;
    std::string where;
  };
  std::vector<Row> rows;
  int T = 0, K = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = line_context(context, i + 1);
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 2 + kNumCategories) {
      throw FormatError(where + ": expected 10 fields, got " + std::to_string(fields.size()));
    }
    Row row{parse_number_field<int>(fields[0], where, "t"), parse_number_field<int>(fields[1], where, "k"),
            {}, where};
    if (row.t < 1 || row.k < 1) throw FormatError(where + ": t and k are 1-based");
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      const std::string name(to_string(kAllCategories[c]));
      row.n[c] = parse_number_field<std::int64_t>(fields[2 + c], where, name);
      if (row.n[c] < 0) throw FormatError(where + ": field '" + name + "': negative count");
    }
    T = std::max(T, row.t);
    K = std::max(K, row.k);
    rows.push_back(row);
  }
  if (T < 2 || K < 2) throw FormatError(context + ": counts need at least 2 respondents and 2 items");

  ResponseCounts out;
  out.dims = {T, K};
  out.counts.assign(static_cast<std::size_t>(T * K), {});
  std::vector<bool> seen(static_cast<std::size_t>(T * K), false);
  for (const Row& row : rows) {
    const std::size_t idx = static_cast<std::size_t>((row.t - 1) * K + (row.k - 1));
    if (seen[idx]) throw FormatError(row.where + ": duplicate cell");
    seen[idx] = true;
    out.counts[idx] = row.n;
    std::int64_t total = 0;
    for (auto n : row.n) total += n;
    if (out.n_per_cell == 0) out.n_per_cell = total;
    if (total != out.n_per_cell) {
      throw FormatError(row.where + ": cell total " + std::to_string(total) + " differs from " +
                        std::to_string(out.n_per_cell));
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw FormatError(context + ": missing cell t=" + std::to_string(i / K + 1) +
                        ", k=" + std::to_string(i % K + 1));
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace irtmpt::io
