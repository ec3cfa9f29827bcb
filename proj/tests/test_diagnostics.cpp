#include <doctest.h>

#include <cmath>

#include "irtmpt/diagnostics.hpp"
#include "irtmpt/errors.hpp"
#include "irtmpt/forward_model.hpp"
#include "irtmpt/mpt_graph.hpp"
#include "test_support.hpp"

using namespace irtmpt;

namespace {

// Column of theta_{t,s} (t < T-1) in the canonical layout.
Eigen::Index theta_coord(const ModelDims& d, int s, int t) {
  return static_cast<Eigen::Index>(linked_column(s)) * (d.T + d.K - 1) + t;
}

Eigen::Index delta_coord(const ModelDims& d, int s, int k) {
  return static_cast<Eigen::Index>(linked_column(s)) * (d.T + d.K - 1) + (d.T - 1) + k;
}

IrtParams generic(const ModelDims& d, std::uint64_t seed) {
  return canonicalize(testing::random_params(d, seed));
}

}  // namespace

TEST_CASE("jacobian shape and step bounds") {
  const ModelDims d{3, 4};
  const JacobianMatrix j = jacobian(generic(d, 1));
  CHECK(j.values.rows() == 3 * 4 * 7);
  CHECK(j.values.cols() == param_count(d));
  CHECK_THROWS_AS(jacobian(generic(d, 1), 1e-2), DomainError);
  CHECK_THROWS_AS(jacobian(generic(d, 1), 1e-9), DomainError);
  CHECK_THROWS_AS(jacobian(testing::random_params(d, 1)), DomainError);
}

TEST_CASE("psi8 enters only U and AN") {
  const ModelDims d{2, 3};
  const JacobianMatrix j = jacobian(generic(d, 2));
  const Eigen::VectorXd col = j.values.col(j.values.cols() - 1);
  for (Eigen::Index cell = 0; cell < 6; ++cell) {
    for (Category c : {Category::C, Category::S, Category::F, Category::M, Category::N})
      CHECK(col(cell * 7 + static_cast<Eigen::Index>(index_of(c))) == 0.0);
    CHECK(col(cell * 7 + static_cast<Eigen::Index>(index_of(Category::U))) != 0.0);
  }
}

TEST_CASE("respondent and item coordinates stay local") {
  const ModelDims d{3, 4};
  const JacobianMatrix j = jacobian(generic(d, 3));
  // theta_{t,s} for t < T-1 also moves the eliminated last respondent.
  for (int s : kLinkedProcesses) {
    for (int t = 0; t < d.T - 1; ++t) {
      const Eigen::VectorXd col = j.values.col(theta_coord(d, s, t));
      for (int r = 0; r < d.T; ++r)
        for (int k = 0; k < d.K; ++k) {
          const double m = col.segment((r * d.K + k) * 7, 7).cwiseAbs().maxCoeff();
          if (r == t || r == d.T - 1)
            CHECK(m > 0.0);
          else
            CHECK(m == 0.0);
        }
    }
    for (int k = 0; k < d.K - 1; ++k) {
      const Eigen::VectorXd col = j.values.col(delta_coord(d, s, k));
      for (int t = 0; t < d.T; ++t)
        for (int q = 0; q < d.K; ++q)
          if (q != k && q != d.K - 1) CHECK(col.segment((t * d.K + q) * 7, 7).isZero(0.0));
    }
  }
}

TEST_CASE("jacobian is stable under a smaller step") {
  const IrtParams p = generic({3, 3}, 4);
  const JacobianMatrix a = jacobian(p, 1e-4);
  const JacobianMatrix b = jacobian(p, 1e-5);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("category derivatives sum to zero in every cell") {
  const ModelDims d{2, 3};
  const JacobianMatrix j = jacobian(generic(d, 5), kDefaultJacobianStep, true);
  CHECK(j.rows_per_cell == 8);
  for (Eigen::Index c = 0; c < j.values.cols(); ++c)
    for (Eigen::Index cell = 0; cell < 6; ++cell)
      CHECK(std::abs(j.values.col(c).segment(cell * 8, 8).sum()) <= 1e-10);
}

TEST_CASE("threads do not change the jacobian") {
  const IrtParams p = generic({3, 4}, 6);
  CHECK(jacobian(p, 1e-5, false, 1).values == jacobian(p, 1e-5, false, 4).values);
}

TEST_CASE("numerical rank") {
  const RankReport zero = numerical_rank(Eigen::MatrixXd::Zero(5, 3));
  CHECK(zero.rank == 0);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RankReport r = numerical_rank(jacobian(generic({3, 4}, seed)), {3, 4});
    CHECK(r.param_count == 38);
    CHECK(r.rank == 38);
    CHECK(r.deficiency == 0);
  }

  const EquivalentPair both = generate_nonidentifiable({3, 4}, CaseLabel::BothZero, 1);
  CHECK(numerical_rank(jacobian(both.omega), {3, 4}).deficiency >= 1);

  const RankReport coarse = numerical_rank(jacobian(generic({3, 4}, 1)), {3, 4}, 0.5);
  CHECK(coarse.rank < 38 / 2);
}

TEST_CASE("gauge coordinates add a column but no rank") {
  const ModelDims d{3, 4};
  const IrtParams p = generic(d, 8);
  const JacobianMatrix j = jacobian(p);
  const int base = numerical_rank(j, d).rank;
  const double h = kDefaultJacobianStep;
  for (int s : kLinkedProcesses) {
    IrtParams up = p, down = p;
    up.theta.col(linked_column(s)).array() += h;
    down.theta.col(linked_column(s)).array() -= h;
    Eigen::MatrixXd aug(j.values.rows(), j.values.cols() + 1);
    aug << j.values, (stacked_probabilities(up) - stacked_probabilities(down)) / (2 * h);
    const RankReport r = numerical_rank(aug);
    CHECK(r.param_count == param_count(d) + 1);
    CHECK(r.rank == base);
  }
}

TEST_CASE("fisher information") {
  const ModelDims d{3, 4};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const IrtParams p = generic(d, seed);
    const Eigen::MatrixXd info = fisher_information(p);
    CHECK((info - info.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * info.trace());
    CHECK(fisher_rank(info, d).rank == numerical_rank(jacobian(p), d).rank);
  }
  const EquivalentPair both = generate_nonidentifiable(d, CaseLabel::BothZero, 2);
  CHECK(fisher_rank(fisher_information(both.omega), d).rank ==
        numerical_rank(jacobian(both.omega), d).rank);

  IrtParams extreme = generic(d, 9);
  extreme.beta(linked_column(1)) = -40.0;
  CHECK_THROWS_AS(fisher_information(extreme), DomainError);
}

TEST_CASE("simulation") {
  const PsiTable half = PsiTable::constant({2, 3}, 0.5);
  const ResponseCounts one = simulate(half, 1, 3);
  for (const auto& c : one.counts) {
    int nonzero = 0;
    for (auto v : c) nonzero += v != 0;
    CHECK(nonzero == 1);
  }

  IrtParams silent = IrtParams::zeros({2, 2});
  silent.beta(linked_column(1)) = -1000.0;
  for (const auto& c : simulate(silent, 50, 1).counts) CHECK(c[index_of(Category::NA)] == 50);

  const std::int64_t n = 100000;
  const ResponseCounts big = simulate(half, n, 11, 4);
  const CategoryDistribution oracle = oracle_distribution(enumerate_paths(build_default_graph()), PsiCell::filled(0.5));
  for (const auto& c : big.counts)
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(static_cast<double>(c[i]) / n - oracle.p[i]) <= 0.005);

  const ResponseCounts serial = simulate(half, 1000, 5, 1);
  const ResponseCounts parallel = simulate(half, 1000, 5, 4);
  CHECK(serial.counts == parallel.counts);
  CHECK(simulate(half, 1000, 6).counts != serial.counts);
}

TEST_CASE("log likelihood") {
  IrtParams silent = IrtParams::zeros({2, 2});
  silent.beta(linked_column(1)) = -40.0;
  const PsiTable quiet = build_psi_table(silent);
  const ResponseCounts na = simulate(quiet, 10, 1);
  CHECK(std::abs(log_likelihood(quiet, na)) <= 1e-12);

  const PsiTable t = build_psi_table(testing::random_params({2, 3}, 4));
  ResponseCounts data = simulate(t, 200, 2);
  const double ll = log_likelihood(t, data);
  for (auto& c : data.counts)
    for (auto& v : c) v *= 2;
  data.n_per_cell *= 2;
  CHECK(log_likelihood(t, data) == 2.0 * ll);

  ResponseCounts impossible = simulate(t, 10, 2);
  impossible.counts[0] = {0, 0, 0, 0, 0, 0, 0, 10};
  PsiTable sure = t;
  sure.psi1.setConstant(std::nextafter(1.0, 0.0));
  CHECK(std::isfinite(log_likelihood(sure, impossible)));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EquivalentPair p = generate_nonidentifiable({3, 4}, CaseLabel::ThetaSixZero, seed);
    const ResponseCounts counts = simulate(p.omega_table, 1000, seed);
    CHECK(std::abs(log_likelihood(p.omega_table, counts) - log_likelihood(p.omega_prime_table, counts)) <= 1e-9);
  }
}

TEST_CASE("identifiability report") {
  const IdentifiabilityReport neither = identifiability_report(generic({3, 4}, 12));
  CHECK(neither.case_label == CaseLabel::Neither);
  REQUIRE_FALSE(neither.notes.empty());
  CHECK(neither.notes.front() == "no eta-transform admissible; rank = param_count");
  CHECK_FALSE(neither.partner.has_value());

  const EquivalentPair a = generate_nonidentifiable({3, 4}, CaseLabel::ThetaSixZero, 4);
  const IdentifiabilityReport ra = identifiability_report(a.omega);
  CHECK(ra.case_label == CaseLabel::ThetaSixZero);
  REQUIRE(ra.partner.has_value());
  CHECK(ra.partner->verification.max_dist_distribution <= 1e-12);

  // psi8 = 0.01 pushes lo to 0.99; psi4 = 0.9, psi6 = 0.3 pull hi to about 1.043.
  IrtParams tight = IrtParams::zeros({2, 3});
  tight.beta(linked_column(4)) = logit(0.9);
  tight.beta(linked_column(6)) = logit(0.3);
  tight.psi8 = 0.01;
  const IdentifiabilityReport rt = identifiability_report(tight);
  CHECK(rt.eta.lo == doctest::Approx(0.99));
  CHECK(rt.eta.hi < 1.05);
  CHECK_FALSE(rt.eta_admissible);
  CHECK_FALSE(rt.partner.has_value());
  REQUIRE_FALSE(rt.notes.empty());
  CHECK(rt.notes.front().find("eta range empty") != std::string::npos);
}
