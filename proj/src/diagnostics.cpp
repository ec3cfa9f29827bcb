#include "irtmpt/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "irtmpt/errors.hpp"
#include "irtmpt/forward_model.hpp"
#include "irtmpt/parallel.hpp"
#include "irtmpt/rng.hpp"

namespace irtmpt {

Eigen::VectorXd stacked_probabilities(const IrtParams& params, bool all_categories) {
  const PsiTable table = build_psi_table(params);
  const int per_cell = all_categories ? 8 : 7;
  Eigen::VectorXd out(params.dims.T * params.dims.K * per_cell);
  Eigen::Index row = 0;
  for (int t = 0; t < params.dims.T; ++t) {
    for (int k = 0; k < params.dims.K; ++k) {
      const CategoryDistribution d = category_distribution(table.cell(t, k));
      for (int i = 0; i < per_cell; ++i) out(row++) = d.p[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

JacobianMatrix jacobian(const IrtParams& params, double step, bool all_categories,
                        unsigned threads) {
  if (!(step >= 1e-8 && step <= 1e-3)) throw DomainError("jacobian step must lie in [1e-8, 1e-3]");
  JacobianMatrix j;
  j.at = to_canonical_coords(params);
  j.step = step;
  j.rows_per_cell = all_categories ? 8 : 7;
  const ModelDims dims = params.dims;
  const Eigen::Index rows = dims.T * dims.K * j.rows_per_cell;
  j.values.resize(rows, j.at.size());

  parallel_for(static_cast<std::size_t>(j.at.size()), threads, [&](std::size_t c) {
    Eigen::VectorXd plus = j.at, minus = j.at;
    plus(static_cast<Eigen::Index>(c)) += step;
    minus(static_cast<Eigen::Index>(c)) -= step;
    const Eigen::VectorXd fp = stacked_probabilities(from_canonical_coords(plus, dims), all_categories);
    const Eigen::VectorXd fm = stacked_probabilities(from_canonical_coords(minus, dims), all_categories);
    j.values.col(static_cast<Eigen::Index>(c)) = (fp - fm) / (2.0 * step);
  });
  return j;
}

RankReport numerical_rank(const Eigen::MatrixXd& m, double rel_cutoff) {
  if (!m.allFinite()) throw DomainError("numerical_rank needs a finite matrix");
  RankReport r;
  r.rel_cutoff = rel_cutoff;
  r.param_count = static_cast<int>(m.cols());
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  r.singular_values = svd.singularValues();
  const double sigma_max = r.singular_values.size() ? r.singular_values(0) : 0.0;
  r.cutoff = rel_cutoff * sigma_max;
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
    const double s = r.singular_values(i);
    if (s > 0.0 && s >= r.cutoff) ++r.rank;
  }
  r.deficiency = r.param_count - r.rank;
  return r;
}

RankReport numerical_rank(const JacobianMatrix& j, const ModelDims& dims, double rel_cutoff) {
  RankReport r = numerical_rank(j.values, rel_cutoff);
  r.dims = dims;
  r.param_count = param_count(dims);
  r.deficiency = r.param_count - r.rank;
  return r;
}

Eigen::MatrixXd fisher_information(const IrtParams& params, double step, unsigned threads) {
  const JacobianMatrix j7 = jacobian(params, step, false, threads);
  const Eigen::VectorXd p = stacked_probabilities(params, true);
  const auto [T, K] = params.dims;
  const Eigen::Index cols = j7.values.cols();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(cols, cols);
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      const Eigen::Index cell = t * K + k;
      Eigen::MatrixXd jc(8, cols);
      jc.topRows(7) = j7.values.middleRows(cell * 7, 7);
      jc.row(7) = -jc.topRows(7).colwise().sum();
      Eigen::VectorXd inv(8);
      for (int i = 0; i < 8; ++i) {
        const double prob = p(cell * 8 + i);
        if (!(prob >= 1e-12)) {
          std::ostringstream msg;
          msg << "probability underflow at cell (t=" << t << ", k=" << k << ") category "
              << to_string(kAllCategories[static_cast<std::size_t>(i)]) << ": " << prob;
          throw DomainError(msg.str());
        }
        inv(i) = 1.0 / prob;
      }
      info.noalias() += jc.transpose() * inv.asDiagonal() * jc;
    }
  }
  return 0.5 * (info + info.transpose());
}

RankReport fisher_rank(const Eigen::MatrixXd& info, const ModelDims& dims, double rel_cutoff) {
  if (!info.allFinite()) throw DomainError("fisher_rank needs a finite matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
  // ascending eigenvalues; rounding can push null ones slightly negative
  Eigen::VectorXd root = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
  RankReport r;
  r.singular_values = root;
  r.rel_cutoff = rel_cutoff;
  r.cutoff = root.size() ? rel_cutoff * root(0) : 0.0;
  for (Eigen::Index i = 0; i < root.size(); ++i)
    if (root(i) > 0.0 && root(i) >= r.cutoff) ++r.rank;
  r.dims = dims;
  r.param_count = param_count(dims);
  r.deficiency = r.param_count - r.rank;
  return r;
}

ResponseCounts simulate(const PsiTable& table, std::int64_t n_per_cell, std::uint64_t seed,
                        unsigned threads) {
  table.validate();
  if (n_per_cell < 1) throw DomainError("n_per_cell must be at least 1");
  const auto [T, K] = table.dims;
  ResponseCounts out;
  out.dims = table.dims;
  out.n_per_cell = n_per_cell;
  out.counts.assign(static_cast<std::size_t>(T * K), {});

  parallel_for(out.counts.size(), threads, [&](std::size_t cell) {
    const int t = static_cast<int>(cell) / K, k = static_cast<int>(cell) % K;
    const CategoryDistribution d = category_distribution(table.cell(t, k));
    std::array<double, kNumCategories - 1> cumulative{};
    double acc = 0;
    for (std::size_t i = 0; i + 1 < kNumCategories; ++i) cumulative[i] = acc += d.p[i];
    const CounterRng rng(seed, cell);
    auto& counts = out.counts[cell];
    for (std::int64_t draw = 0; draw < n_per_cell; ++draw) {
      const double u = rng.uniform(static_cast<std::uint64_t>(draw));
      std::size_t i = 0;
      while (i < cumulative.size() && !(u < cumulative[i])) ++i;
      ++counts[i];
    }
  });
  return out;
}

ResponseCounts simulate(const IrtParams& params, std::int64_t n_per_cell, std::uint64_t seed,
                        unsigned threads) {
  return simulate(build_psi_table(params), n_per_cell, seed, threads);
}

double log_likelihood(const PsiTable& table, const ResponseCounts& data) {
  table.validate();
  if (!(table.dims == data.dims)) {
    throw DomainError("count data dimensions do not match the parameter table");
  }
  double ll = 0;
  for (int t = 0; t < table.dims.T; ++t) {
    for (int k = 0; k < table.dims.K; ++k) {
      const CategoryDistribution d = category_distribution(table.cell(t, k));
      const auto& counts = data.cell(t, k);
      for (std::size_t i = 0; i < kNumCategories; ++i) {
        if (counts[i] == 0) continue;
        if (!(d.p[i] >= kZeroProbability)) {
          std::ostringstream msg;
          msg << "category " << to_string(kAllCategories[i]) << " at cell (t=" << t << ", k=" << k
              << ") has probability " << d.p[i] << " but count " << counts[i];
          throw DomainError(msg.str());
        }
        ll += static_cast<double>(counts[i]) * std::log(d.p[i]);
      }
    }
  }
  return ll;
}

IdentifiabilityReport identifiability_report(const IrtParams& params, const ReportOptions& options) {
  const IrtParams canonical = canonicalize(params);
  const PsiTable table = build_psi_table(canonical);

  IdentifiabilityReport report;
  report.case_label = classify_case(canonical, options.case_tol);
  report.eta = eta_range(table);
  report.eta_admissible = report.eta.lo < 1.0 - options.eta_margin ||
                          1.0 + options.eta_margin < report.eta.hi;
  report.representable_grid_count = count_representable_on_grid(table, options.grid_points);
  report.rank = numerical_rank(jacobian(canonical, options.step, false, options.threads),
                               canonical.dims, options.rel_cutoff);

  const std::string rank_text =
      report.rank.deficiency == 0
          ? "rank = param_count"
          : "rank = " + std::to_string(report.rank.rank) + " < param_count = " +
                std::to_string(report.rank.param_count);

  if (report.case_label == CaseLabel::Neither) {
    report.notes.push_back("no eta-transform admissible; " + rank_text);
    return report;
  }
  if (!report.eta_admissible) {
    report.notes.push_back("eta range empty after excluding |eta - 1| < " +
                           std::to_string(options.eta_margin) + "; no partner constructed");
    report.notes.push_back(rank_text);
    return report;
  }

  const TransformSearch search = find_transform(table, report.case_label, options.eta_margin);
  if (!search.transform) {
    report.notes.push_back("no partner constructed: " + search.note);
    report.notes.push_back(rank_text);
    return report;
  }

  PartnerReport partner;
  partner.transform = *search.transform;
  partner.table = apply_transform(table, partner.transform).table;
  if (auto lifted = lift_to_params(partner.table); std::holds_alternative<IrtParams>(lifted)) {
    partner.params = std::get<IrtParams>(lifted);
  } else {
    const auto& f = std::get<LiftFailure>(lifted);
    report.notes.push_back("partner table does not lift to IRT parameters (psi" +
                           std::to_string(f.process) + " residual " + std::to_string(f.residual) + ")");
  }
  partner.verification = verify_pair(table, partner.table, options.pair_tol);
  partner.equalities = check_necessary_equalities(table, partner.table, options.pair_tol);
  // The shared-xi interval only describes transforms with one xi for all respondents.
  if (!partner.transform.per_respondent()) report.xi = xi_range(partner.transform.eta, table);
  report.partner = std::move(partner);
  report.notes.push_back("equivalent partner constructed; " + rank_text);
  return report;
}

std::string summarize(const IdentifiabilityReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "case: " << to_string(r.case_label) << "\n";
  out << "eta range: (" << r.eta.lo << ", " << r.eta.hi << ")"
      << (r.eta_admissible ? "" : " [empty outside margin band]") << "\n";
  if (r.xi) out << "xi range: (" << r.xi->lo << ", " << r.xi->hi << ")\n";
  out << "representable grid points: " << r.representable_grid_count << "\n";
  out << "jacobian rank: " << r.rank.rank << " / " << r.rank.param_count
      << " (deficiency " << r.rank.deficiency << ", cutoff " << r.rank.cutoff << ")\n";
  if (r.partner) {
    out << "partner: eta = " << r.partner->transform.eta << ", max distribution distance = "
        << r.partner->verification.max_dist_distribution
        << ", max parameter distance = " << r.partner->verification.max_dist_params << "\n";
  }
  for (const auto& note : r.notes) out << "note: " << note << "\n";
  return out.str();
}

}  // namespace irtmpt
