#include "irtmpt/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "irtmpt/errors.hpp"
#include "irtmpt/mpt_graph.hpp"
#include "irtmpt/parallel.hpp"
#include "irtmpt/rng.hpp"

namespace irtmpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStructureTol = 1e-12;

std::string cell_name(const char* what, int t, int k) {
  return std::string(what) + "[" + std::to_string(t) + "][" + std::to_string(k) + "]";
}

bool item_only(const Eigen::MatrixXd& m, double tol = kStructureTol) {
  for (Eigen::Index t = 1; t < m.rows(); ++t) {
    if ((m.row(t) - m.row(0)).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool respondent_only(const Eigen::MatrixXd& m, double tol = kStructureTol) {
  for (Eigen::Index k = 1; k < m.cols(); ++k) {
    if ((m.col(k) - m.col(0)).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

double lower_eta_bound(const PsiTable& table) {
  double lo = 1.0 - table.psi8;
  for (Eigen::Index k = 0; k < table.psi7.size(); ++k) lo = std::max(lo, 1.0 - table.psi7(k));
  return lo;
}

// psi6' = 1 - eta + eta psi6
double psi6_prime(double eta, double psi6) { return (1.0 - eta) + eta * psi6; }

// Per-cell psi3' from equating (1 - psi3) psi6 / psi3 before and after.
double psi3_prime(double eta, double psi3, double psi6) {
  return psi3 * psi6_prime(eta, psi6) / (psi3 * (1.0 - eta) * (1.0 - psi6) + psi6);
}

void require_open(double value, const std::string& entry, const std::string& bound) {
  if (!(value > 0.0 && value < 1.0)) throw RangeViolation(entry, value, bound);
}

const PathSet& default_paths() {
  static const PathSet paths = enumerate_paths(build_default_graph());
  return paths;
}

}  // namespace

std::string_view to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::ThetaSixZero: return "theta6-zero";
    case CaseLabel::DeltaSixZero: return "delta6-zero";
    case CaseLabel::BothZero: return "both-zero";
    case CaseLabel::Neither: return "neither";
  }
  return "neither";
}

std::optional<CaseLabel> parse_case_label(std::string_view label) {
  for (CaseLabel c : {CaseLabel::ThetaSixZero, CaseLabel::DeltaSixZero, CaseLabel::BothZero,
                      CaseLabel::Neither}) {
    if (to_string(c) == label) return c;
  }
  return std::nullopt;
}

Interval eta_range(const PsiTable& table) {
  table.validate();
  Interval r{lower_eta_bound(table), kInf};
  for (int t = 0; t < table.dims.T; ++t) {
    const double psi2 = table.psi2(t);
    for (int k = 0; k < table.dims.K; ++k) {
      const double psi6 = table.psi6(t, k);
      if (psi6 > kPsi6Degenerate) continue;
      const double psi3 = table.psi3(t, k);
      const double lex_fail = psi2 * (1.0 - psi3) / (1.0 - psi2 * psi3);
      const double bound = (1.0 - psi6 * std::max(table.psi4(t, k), lex_fail)) / (1.0 - psi6);
      r.hi = std::min(r.hi, bound);
    }
  }
  return r;
}

Interval generator_eta_range(const PsiTable& table) {
  table.validate();
  const bool by_item = item_only(table.psi4) && item_only(table.psi6);
  const bool by_respondent = respondent_only(table.psi4) && respondent_only(table.psi6);
  if (!by_item && !by_respondent) {
    throw DomainError("generator_eta_range needs psi4 and psi6 depending on k only or on t only");
  }
  Interval r{lower_eta_bound(table), kInf};
  for (int t = 0; t < table.dims.T; ++t) {
    for (int k = 0; k < table.dims.K; ++k) {
      const double psi6 = table.psi6(t, k);
      if (psi6 > kPsi6Degenerate) continue;
      const double bound = (1.0 - psi6 * std::max(table.psi4(t, k), table.psi2(t))) / (1.0 - psi6);
      r.hi = std::min(r.hi, bound);
    }
  }
  return r;
}

Interval xi_range(double eta, const PsiTable& table) {
  if (eta == 1.0) throw DomainError("xi_range is undefined for eta = 1 (trivial transform)");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive and finite");
  table.validate();
  double lowest = kInf, highest = -kInf;
  for (Eigen::Index i = 0; i < table.psi6.size(); ++i) {
    const double psi6 = table.psi6.data()[i];
    const double g = psi6_prime(eta, psi6) / psi6;
    lowest = std::min(lowest, g);
    highest = std::max(highest, g);
  }
  if (eta < 1.0) return {1.0, lowest};
  return {highest, 1.0};
}

std::vector<double> implied_xi(const PsiTable& table, double eta) {
  table.validate();
  std::vector<double> xi(static_cast<std::size_t>(table.dims.T));
  for (int t = 0; t < table.dims.T; ++t) {
    const double psi3 = table.psi3(t, 0), psi6 = table.psi6(t, 0);
    xi[static_cast<std::size_t>(t)] =
        psi6_prime(eta, psi6) / (psi3 * (1.0 - eta) * (1.0 - psi6) + psi6);
  }
  return xi;
}

TransformResult apply_transform(const PsiTable& table, const EtaXiTransform& tr) {
  table.validate();
  const auto [T, K] = table.dims;
  if (!(tr.eta > 0.0) || !std::isfinite(tr.eta)) throw DomainError("eta must be positive and finite");
  if (tr.xi.size() != 1 && tr.xi.size() != static_cast<std::size_t>(T)) {
    throw DomainError("xi must have 1 or T entries");
  }
  for (double xi : tr.xi) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("xi must be positive and finite");
  }

  TransformResult out{table, {}, 0.0};
  const bool eta_identity = tr.eta == 1.0;
  const bool xi_identity = std::all_of(tr.xi.begin(), tr.xi.end(), [](double x) { return x == 1.0; });
  if (eta_identity && xi_identity) return out;

  PsiTable& next = out.table;
  const double eta = tr.eta;
  if (!eta_identity) {
    next.psi8 = ((eta - 1.0) + table.psi8) / eta;
    require_open(next.psi8, "psi8'", "eta > 1 - psi8");
    for (int k = 0; k < K; ++k) {
      next.psi7(k) = ((eta - 1.0) + table.psi7(k)) / eta;
      require_open(next.psi7(k), "psi7'[" + std::to_string(k) + "]", "eta > 1 - psi7");
    }
  }

  for (int t = 0; t < T; ++t) {
    const double xi = tr.xi_for(t);
    next.psi2(t) = table.psi2(t) / xi;
    require_open(next.psi2(t), "psi2'[" + std::to_string(t) + "]", "xi > psi2");
    for (int k = 0; k < K; ++k) {
      const double psi2 = table.psi2(t), psi3 = table.psi3(t, k);
      const double psi4 = table.psi4(t, k), psi6 = table.psi6(t, k);
      if (!eta_identity) {
        const double p6 = psi6_prime(eta, psi6);
        require_open(p6, cell_name("psi6'", t, k), "0 < eta < 1/(1 - psi6)");
        const double p4 = psi4 * psi6 / p6;
        require_open(p4, cell_name("psi4'", t, k), "eta < (1 - psi4 psi6)/(1 - psi6)");
        const double p3 = psi3_prime(eta, psi3, psi6);
        require_open(p3, cell_name("psi3'", t, k), "0 < psi3' < 1");
        require_open(psi2 * psi3 / p3, cell_name("psi2 psi3/psi3'", t, k),
                     "eta < [1 - psi2(psi3 + (1 - psi3)psi6)] / [(1 - psi2 psi3)(1 - psi6)]");
        next.psi6(t, k) = p6;
        next.psi4(t, k) = p4;
        next.psi3(t, k) = p3;
      }
      const double discrepancy = std::abs(xi * psi3 - next.psi3(t, k));
      out.max_xi_discrepancy = std::max(out.max_xi_discrepancy, discrepancy);
      if (discrepancy > kXiConsistencyTol) out.xi_violations.push_back({t, k, discrepancy});
    }
  }
  return out;
}

CaseLabel classify_case(const IrtParams& params, double tol) {
  params.validate();
  if (!is_canonical(params)) throw DomainError("classify_case requires canonical parameters");
  const Eigen::Index col = static_cast<Eigen::Index>(linked_column(6));
  const bool theta_zero = params.theta.col(col).cwiseAbs().maxCoeff() <= tol;
  const bool delta_zero = params.delta.col(col).cwiseAbs().maxCoeff() <= tol;
  if (theta_zero && delta_zero) return CaseLabel::BothZero;
  if (theta_zero) return CaseLabel::ThetaSixZero;
  if (delta_zero) return CaseLabel::DeltaSixZero;
  return CaseLabel::Neither;
}

PairVerification verify_pair(const PsiTable& a, const PsiTable& b, double tol) {
  if (!(a.dims == b.dims)) throw DomainError("tables have different dimensions");
  PairVerification v;
  v.tol = tol;
  for (int t = 0; t < a.dims.T; ++t) {
    for (int k = 0; k < a.dims.K; ++k) {
      const double d = max_abs_diff(category_distribution(a.cell(t, k)),
                                    category_distribution(b.cell(t, k)));
      if (d > v.max_dist_distribution) {
        v.max_dist_distribution = d;
        v.worst_t = t;
        v.worst_k = k;
      }
    }
  }
  v.max_dist_params = max_abs_diff(a, b);
  v.pass = v.max_dist_distribution <= tol;
  return v;
}

namespace {

double oracle_distance(const PsiTable& a, const PsiTable& b, unsigned threads) {
  std::vector<double> row(static_cast<std::size_t>(a.dims.T), 0.0);
  parallel_for(row.size(), threads, [&](std::size_t t) {
    for (int k = 0; k < a.dims.K; ++k) {
      const int ti = static_cast<int>(t);
      row[t] = std::max(row[t], max_abs_diff(oracle_distribution(default_paths(), a.cell(ti, k)),
                                             oracle_distribution(default_paths(), b.cell(ti, k))));
    }
  });
  return *std::max_element(row.begin(), row.end());
}

constexpr double kMinParamDistance = 1e-3;

}  // namespace

EquivalentPair generate_nonidentifiable(const ModelDims& dims, CaseLabel case_label,
                                        std::uint64_t seed, const GeneratorOptions& options) {
  dims.validate();
  if (case_label == CaseLabel::Neither) {
    throw DomainError("no equivalent partner exists in case neither");
  }
  if (!(options.eta_margin >= 0.0 && options.eta_margin < 1.0)) {
    throw DomainError("eta_margin must lie in [0,1)");
  }
  const auto [T, K] = dims;
  DrawSequence draws{CounterRng(seed)};
  auto base_draw = [&] { return draws.uniform(options.base_lo, options.base_hi); };

  Interval last_band{};
  for (int attempt = 1; attempt <= options.max_retries; ++attempt) {
    PsiTable base = PsiTable::constant(dims, 0.5);
    base.psi8 = base_draw();
    for (int k = 0; k < K; ++k) base.psi7(k) = base_draw();
    for (int t = 0; t < T; ++t) base.psi2(t) = base_draw();

    switch (case_label) {
      case CaseLabel::ThetaSixZero:
        for (int k = 0; k < K; ++k) {
          base.psi6.col(k).setConstant(base_draw());
          base.psi4.col(k).setConstant(base_draw());
        }
        break;
      case CaseLabel::DeltaSixZero:
        for (int t = 0; t < T; ++t) {
          base.psi6.row(t).setConstant(base_draw());
          base.psi4.row(t).setConstant(base_draw());
          base.psi3.row(t).setConstant(base_draw());
        }
        break;
      case CaseLabel::BothZero:
        base.psi6.setConstant(base_draw());
        base.psi4.setConstant(base_draw());
        break;
      case CaseLabel::Neither: break;
    }

    // psi1 and psi5 vary over both respondents and items.
    for (int s : {1, 5}) {
      Eigen::VectorXd theta(T), delta(K);
      for (int t = 0; t < T; ++t) theta(t) = draws.uniform(-1.0, 1.0);
      for (int k = 0; k < K; ++k) delta(k) = draws.uniform(-1.0, 1.0);
      const double beta = draws.uniform(-1.0, 1.0);
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k < K; ++k) base.linked(s)(t, k) = link(theta(t), delta(k), beta);
      }
    }

    const Interval range = case_label == CaseLabel::DeltaSixZero ? eta_range(base)
                                                                  : generator_eta_range(base);
    Interval band = options.eta_above_one
                        ? Interval{std::max(range.lo, 1.0 + options.eta_margin), range.hi}
                        : Interval{range.lo, std::min(range.hi, 1.0 - options.eta_margin)};
    last_band = band;
    if (band.empty() || !std::isfinite(band.hi)) continue;
    const double eta = draws.uniform(band.lo, band.hi);
    if (!band.contains(eta)) continue;

    EtaXiTransform tr;
    tr.eta = eta;
    if (case_label == CaseLabel::DeltaSixZero) {
      tr.xi = implied_xi(base, eta);
    } else {
      const Interval xr = xi_range(eta, base);
      if (xr.empty()) continue;
      const double xi = draws.uniform(xr.lo, xr.hi);
      if (!xr.contains(xi)) continue;
      tr.xi = {xi};
      bool inside = true;
      for (int k = 0; k < K; ++k) {
        const double psi6 = base.psi6(0, k);
        const double psi3 = (psi6_prime(eta, psi6) / xi - psi6) / ((1.0 - eta) * (1.0 - psi6));
        inside = inside && psi3 > 0.0 && psi3 < 1.0;
        base.psi3.col(k).setConstant(psi3);
      }
      if (!inside) {
        throw InternalInvariantError("constructed psi3 left (0,1) for xi inside its range");
      }
    }

    auto lifted = lift_to_params(base);
    if (auto* f = std::get_if<LiftFailure>(&lifted)) {
      throw InternalInvariantError("generated table is not representable: psi" +
                                   std::to_string(f->process) + " residual " +
                                   std::to_string(f->residual));
    }

    EquivalentPair pair;
    pair.case_label = case_label;
    pair.seed = seed;
    pair.attempts = attempt;
    pair.omega = canonicalize(std::get<IrtParams>(lifted));
    pair.omega_table = build_psi_table(pair.omega);
    pair.transform = tr;

    TransformResult moved;
    try {
      moved = apply_transform(pair.omega_table, tr);
    } catch (const RangeViolation& e) {
      throw InternalInvariantError(std::string("interior eta/xi produced a range violation: ") +
                                   e.what());
    }
    if (!moved.consistent()) {
      std::ostringstream msg;
      msg << "xi-constancy violated at " << moved.xi_violations.size()
          << " cells (max discrepancy " << moved.max_xi_discrepancy << ")";
      throw InternalInvariantError(msg.str());
    }
    pair.omega_prime_table = std::move(moved.table);
    auto lifted_prime = lift_to_params(pair.omega_prime_table);
    if (auto* f = std::get_if<LiftFailure>(&lifted_prime)) {
      throw InternalInvariantError("transformed table is not representable: psi" +
                                   std::to_string(f->process) + " residual " +
                                   std::to_string(f->residual));
    }
    pair.omega_prime = std::get<IrtParams>(lifted_prime);

    pair.verification = verify_pair(pair.omega_table, pair.omega_prime_table, options.tol);
    pair.equalities = check_necessary_equalities(pair.omega_table, pair.omega_prime_table, options.tol);
    pair.oracle_max_dist = oracle_distance(pair.omega_table, pair.omega_prime_table, options.threads);

    std::ostringstream problems;
    if (!pair.verification.pass) {
      problems << " distribution distance " << pair.verification.max_dist_distribution;
    }
    if (pair.oracle_max_dist > options.tol) problems << " oracle distance " << pair.oracle_max_dist;
    if (!pair.equalities.pass) problems << " necessary equalities fail";
    if (pair.verification.max_dist_params < kMinParamDistance) {
      problems << " parameter distance " << pair.verification.max_dist_params;
    }
    if (std::abs(eta - 1.0) < options.eta_margin) problems << " eta " << eta << " inside margin";
    if (!problems.str().empty()) {
      throw InternalInvariantError("generated pair failed verification:" + problems.str());
    }
    return pair;
  }

  std::ostringstream msg;
  msg << "no admissible eta after " << options.max_retries << " attempts (last band "
      << last_band.lo << ", " << last_band.hi << ", margin " << options.eta_margin << ")";
  throw GenerationFailure(msg.str());
}

TransformSearch find_transform(const PsiTable& table, CaseLabel case_label, double eta_margin) {
  table.validate();
  TransformSearch out;
  if (case_label == CaseLabel::Neither) {
    out.note = "no eta-transform admissible: theta6 and delta6 both vary";
    return out;
  }
  const Interval range = eta_range(table);
  EtaXiTransform tr;

  if (case_label == CaseLabel::ThetaSixZero) {
    if (!item_only(table.psi3, 1e-9) || !item_only(table.psi6, 1e-9)) {
      out.note = "psi3 or psi6 varies over respondents; xi cannot be constant";
      return out;
    }
    // xi(eta) must agree for every item; pairing item 0 with the item whose
    // psi3 differs most leaves a single non-trivial root in u = 1 - eta.
    const double a = table.psi6(0, 0), c = table.psi3(0, 0);
    int k2 = 0;
    for (int k = 1; k < table.dims.K; ++k) {
      if (std::abs(table.psi3(0, k) - c) > std::abs(table.psi3(0, k2) - c)) k2 = k;
    }
    const double b = table.psi6(0, k2), d = table.psi3(0, k2);
    if (std::abs(d - c) < 1e-12) {
      out.note = "psi3 is constant over items; no non-trivial eta makes xi item-independent";
      return out;
    }
    const double u = (a * (1 - b) * (1 - d) - b * (1 - a) * (1 - c)) / ((1 - a) * (1 - b) * (d - c));
    tr.eta = 1.0 - u;
    if (!range.contains(tr.eta)) {
      std::ostringstream msg;
      msg << "candidate eta " << tr.eta << " lies outside (" << range.lo << ", " << range.hi << ")";
      out.note = msg.str();
      return out;
    }
    if (std::abs(tr.eta - 1.0) < eta_margin) {
      std::ostringstream msg;
      msg << "candidate eta " << tr.eta << " lies within the margin band around 1";
      out.note = msg.str();
      return out;
    }
    tr.xi = {implied_xi(table, tr.eta).front()};
  } else {
    if (range.lo < 1.0 - eta_margin) {
      tr.eta = 0.5 * (range.lo + (1.0 - eta_margin));
    } else if (1.0 + eta_margin < range.hi) {
      tr.eta = 0.5 * ((1.0 + eta_margin) + std::min(range.hi, 2.0 + eta_margin));
    } else {
      out.note = "eta range is empty after excluding the margin band around 1";
      return out;
    }
    tr.xi = implied_xi(table, tr.eta);
  }

  try {
    const TransformResult moved = apply_transform(table, tr);
    if (!moved.consistent()) {
      std::ostringstream msg;
      msg << "xi is not constant over items (max discrepancy " << moved.max_xi_discrepancy << ")";
      out.note = msg.str();
      return out;
    }
  } catch (const RangeViolation& e) {
    out.note = e.what();
    return out;
  }
  out.transform = tr;
  return out;
}

int count_representable_on_grid(const PsiTable& table, int grid_points) {
  const Interval range = eta_range(table);
  const double hi = std::isfinite(range.hi) ? range.hi : range.lo + 10.0;
  int count = 0;
  for (int i = 0; i < grid_points; ++i) {
    const double eta = range.lo + (hi - range.lo) * (i + 0.5) / grid_points;
    if (std::abs(eta - 1.0) < 1e-9) continue;
    try {
      const TransformResult moved = apply_transform(table, {eta, implied_xi(table, eta)});
      if (moved.consistent() && std::holds_alternative<IrtParams>(lift_to_params(moved.table))) {
        ++count;
      }
    } catch (const RangeViolation&) {
    }
  }
  return count;
}

}  // namespace irtmpt
