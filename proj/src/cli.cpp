#include "irtmpt/cli.hpp"

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "irtmpt/diagnostics.hpp"
#include "irtmpt/equivalence.hpp"
#include "irtmpt/errors.hpp"
#include "irtmpt/io.hpp"

namespace irtmpt::cli {

namespace {

using io::Json;

struct Model {
  std::optional<IrtParams> params;
  PsiTable table;
};

/// Accepts a parameter file, a psi table file, or a pair bundle (member
/// "omega" or "omega-prime").
Model load_model(const std::string& path, const std::string& member) {
  const Json j = io::read_json_file(path);
  Model m;
  if (j.is_object() && j.contains("omega")) {
    if (member == "omega") {
      m.params = io::params_from_json(j["omega"], path + " (omega)");
    } else if (j.contains("omega_prime")) {
      m.params = io::params_from_json(j["omega_prime"], path + " (omega_prime)");
    } else {
      m.table = io::table_from_json(io::require_field(j, "omega_prime_table", path), path + " (omega_prime_table)");
      return m;
    }
  } else if (j.is_object() && j.contains("psi1")) {
    m.table = io::table_from_json(j, path);
    return m;
  } else {
    m.params = io::params_from_json(j, path);
  }
  m.table = build_psi_table(*m.params);
  return m;
}

IrtParams require_params(const Model& m, const std::string& path) {
  if (!m.params) throw FormatError(path + ": IRT parameters required, got a bare psi table");
  return *m.params;
}

void emit(const std::string& output, const std::string& contents, std::ostream& out) {
  if (output.empty() || output == "-") {
    out << contents;
  } else {
    io::write_file_atomic(output, contents);
  }
}

std::string fixed12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identifiability toolkit for the IRT multinomial processing tree naming model",
               "irtmpt-cli"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  const std::vector<std::string> members{"omega", "omega-prime"};

  // generate
  int T = 0, K = 0;
  std::string case_name, output;
  std::uint64_t seed = 0;
  double eta_margin = 0.05, tol = 1e-12;
  bool eta_above_one = false;
  unsigned threads = 1;
  auto* generate = app.add_subcommand("generate", "Construct an observationally equivalent pair");
  generate->add_option("--T", T, "Respondents")->required()->check(CLI::Range(2, 100000));
  generate->add_option("--K", K, "Items")->required()->check(CLI::Range(2, 100000));
  generate->add_option("--case", case_name, "theta6-zero | delta6-zero | both-zero")
      ->required()
      ->check(CLI::IsMember({"theta6-zero", "delta6-zero", "both-zero"}));
  generate->add_option("--seed", seed, "Random seed")->required();
  generate->add_option("-o,--output", output, "Pair bundle path")->required();
  generate->add_option("--eta-margin", eta_margin, "Minimum |eta - 1|")->check(CLI::Range(0.0, 0.99));
  generate->add_flag("--eta-above-one", eta_above_one, "Draw eta from the eta > 1 branch");
  generate->add_option("--tol", tol, "Verification tolerance");
  generate->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

  // distribution
  std::string params_path, member = "omega";
  auto* distribution = app.add_subcommand("distribution", "Category distribution table as CSV");
  distribution->add_option("params", params_path, "Parameter, table or bundle file")->required();
  distribution->add_option("-o,--output", output, "CSV path (stdout if omitted)");
  distribution->add_option("--member", member, "Bundle member")->check(CLI::IsMember(members));

  // verify
  std::string pair_path;
  auto* verify = app.add_subcommand("verify", "Check a pair bundle for observational equivalence");
  verify->add_option("pair", pair_path, "Pair bundle")->required();
  verify->add_option("--tol", tol, "Tolerance")->check(CLI::NonNegativeNumber);

  // rank
  double step = kDefaultJacobianStep, cutoff = kDefaultRelCutoff;
  auto* rank = app.add_subcommand("rank", "Jacobian rank in canonical coordinates");
  rank->add_option("params", params_path, "Parameter or bundle file")->required();
  rank->add_option("--step", step, "Finite-difference step")->check(CLI::Range(1e-8, 1e-3));
  rank->add_option("--cutoff", cutoff, "Relative singular value cutoff")->check(CLI::NonNegativeNumber);
  rank->add_option("--member", member, "Bundle member")->check(CLI::IsMember(members));
  rank->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
  rank->add_option("-o,--output", output, "JSON path (stdout if omitted)");

  // simulate
  std::int64_t n_per_cell = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate multinomial counts as CSV");
  simulate_cmd->add_option("params", params_path, "Parameter, table or bundle file")->required();
  simulate_cmd->add_option("-n,--n", n_per_cell, "Responses per cell")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", seed, "Random seed")->required();
  simulate_cmd->add_option("-o,--output", output, "CSV path (stdout if omitted)");
  simulate_cmd->add_option("--member", member, "Bundle member")->check(CLI::IsMember(members));
  simulate_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

  // loglik
  std::string counts_path;
  auto* loglik = app.add_subcommand("loglik", "Multinomial log-likelihood of counts");
  loglik->add_option("params", params_path, "Parameter, table or bundle file")->required();
  loglik->add_option("counts", counts_path, "Counts CSV")->required();
  loglik->add_option("--member", member, "Bundle member")->check(CLI::IsMember(members));

  // classify
  std::string format = "text";
  double case_tol = kDefaultCaseTol;
  auto* classify = app.add_subcommand("classify", "Case label, eta/xi ranges, rank and partner");
  classify->add_option("params", params_path, "Parameter or bundle file")->required();
  classify->add_option("--member", member, "Bundle member")->check(CLI::IsMember(members));
  classify->add_option("--format", format, "text | json")->check(CLI::IsMember({"text", "json"}));
  classify->add_option("--tol", case_tol, "Tolerance for theta6/delta6 = 0");
  classify->add_option("--eta-margin", eta_margin, "Minimum |eta - 1| for a partner");
  classify->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
  classify->add_option("-o,--output", output, "Report path (stdout if omitted)");

  std::vector<const char*> argv{"irtmpt-cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (generate->parsed()) {
      GeneratorOptions options;
      options.eta_margin = eta_margin;
      options.eta_above_one = eta_above_one;
      options.tol = tol;
      options.threads = threads;
      EquivalentPair pair;
      try {
        pair = generate_nonidentifiable({T, K}, *parse_case_label(case_name), seed, options);
      } catch (const GenerationFailure& e) {
        err << "generation failed: " << e.what() << "\n";
        return kGenerationFailed;
      }
      io::write_file_atomic(output, io::dump_json(io::pair_to_json(pair)));
      out << "case " << case_name << "\n";
      out << "eta " << io::format_double(pair.transform.eta) << "\n";
      out << (pair.transform.per_respondent() ? "xi_per_t" : "xi");
      for (double x : pair.transform.xi) out << " " << io::format_double(x);
      out << "\n";
      out << "max_dist_distribution " << io::format_double(pair.verification.max_dist_distribution) << "\n";
      out << "max_dist_params " << io::format_double(pair.verification.max_dist_params) << "\n";
      return kOk;
    }

    if (distribution->parsed()) {
      const Model m = load_model(params_path, member);
      emit(output, io::distribution_csv(io::distribution_rows(m.table)), out);
      return kOk;
    }

    if (verify->parsed()) {
      const Json j = io::read_json_file(pair_path);
      const IrtParams omega = io::params_from_json(io::require_field(j, "omega", pair_path), pair_path + " (omega)");
      const PsiTable a = build_psi_table(omega);
      const PsiTable b = io::table_from_json(io::require_field(j, "omega_prime_table", pair_path),
                                             pair_path + " (omega_prime_table)");
      if (!(a.dims == b.dims)) throw FormatError(pair_path + ": omega and omega_prime_table dimensions differ");
      const PairVerification v = verify_pair(a, b, tol);
      const EqualityReport eq = check_necessary_equalities(a, b, tol);
      out << "max_dist_distribution " << io::format_double(v.max_dist_distribution)
          << (v.pass ? " ok" : " FAIL") << "\n";
      out << "max_dist_params " << io::format_double(v.max_dist_params) << "\n";
      out << "relation             max_discrepancy          status\n";
      for (std::size_t i = 0; i < kNumRelations; ++i) {
        const double d = eq.max_discrepancy[i];
        char line[96];
        std::snprintf(line, sizeof line, "%-20s %-24s %s\n",
                      std::string(relation_label(static_cast<Relation>(i))).c_str(),
                      io::format_double(d).c_str(), d <= tol ? "ok" : "FAIL");
        out << line;
      }
      const bool pass = v.pass && eq.pass;
      out << (pass ? "equivalent" : "not equivalent") << " at tol " << io::format_double(tol) << "\n";
      return pass ? kOk : kVerificationFailed;
    }

    if (rank->parsed()) {
      const Model m = load_model(params_path, member);
      const IrtParams p = canonicalize(require_params(m, params_path));
      const RankReport r = numerical_rank(jacobian(p, step, false, threads), p.dims, cutoff);
      emit(output, io::dump_json(io::rank_to_json(r)), out);
      return kOk;
    }

    if (simulate_cmd->parsed()) {
      const Model m = load_model(params_path, member);
      emit(output, io::counts_csv(simulate(m.table, n_per_cell, seed, threads)), out);
      return kOk;
    }

    if (loglik->parsed()) {
      const Model m = load_model(params_path, member);
      const ResponseCounts counts = io::parse_counts_csv(io::read_text_file(counts_path), counts_path);
      if (!(counts.dims == m.table.dims)) {
        throw FormatError(counts_path + ": counts have T=" + std::to_string(counts.dims.T) +
                          ", K=" + std::to_string(counts.dims.K) + " but " + params_path + " has T=" +
                          std::to_string(m.table.dims.T) + ", K=" + std::to_string(m.table.dims.K));
      }
      out << fixed12(log_likelihood(m.table, counts)) << "\n";
      return kOk;
    }

    if (classify->parsed()) {
      const Model m = load_model(params_path, member);
      ReportOptions options;
      options.case_tol = case_tol;
      options.eta_margin = eta_margin;
      options.threads = threads;
      const IdentifiabilityReport r = identifiability_report(require_params(m, params_path), options);
      emit(output, format == "json" ? io::dump_json(io::report_to_json(r)) : summarize(r), out);
      return kOk;
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kDataFormat;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDataFormat;
  } catch (const InternalInvariantError& e) {
    err << "internal invariant violated: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}

}  // namespace irtmpt::cli
