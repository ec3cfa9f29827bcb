#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "irtmpt/cli.hpp"
#include "irtmpt/forward_model.hpp"
#include "irtmpt/io.hpp"
#include "test_support.hpp"

using namespace irtmpt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("irtmpt_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"generate", "--help"}).code == 0);
  CHECK(run({}).code == 64);
  CHECK(run({"frobnicate"}).code == 64);
  CHECK(run({"generate", "--case", "neither"}).code == 64);
  CHECK(run({"generate", "--T", "2", "--K", "3", "--case", "neither", "--seed", "1", "-o", "x.json"}).code == 64);
  CHECK(run({"generate", "--T", "1", "--K", "3", "--case", "both-zero", "--seed", "1", "-o", "x.json"}).code == 64);
}

TEST_CASE("generate and verify") {
  TempDir dir("generate");
  const Run g = run({"generate", "--T", "2", "--K", "3", "--case", "theta6-zero", "--seed", "1", "-o", dir / "pair.json"});
  REQUIRE(g.code == 0);
  CHECK(g.out.find("eta ") != std::string::npos);
  const io::Json bundle = io::read_json_file(dir / "pair.json");
  CHECK(bundle["verification"]["max_dist_distribution"].get<double>() <= 1e-12);
  CHECK(bundle["case"] == "theta6-zero");

  CHECK(run({"verify", dir / "pair.json"}).code == 0);

  io::Json bad = bundle;
  bad["omega_prime_table"]["psi5"][0][0] = bad["omega_prime_table"]["psi5"][0][0].get<double>() + 0.01;
  io::write_file_atomic(dir / "bad.json", io::dump_json(bad));
  const Run v = run({"verify", dir / "bad.json"});
  CHECK(v.code == 1);
  const auto line = v.out.find("psi5/(1-psi5)");
  REQUIRE(line != std::string::npos);
  CHECK(v.out.substr(line, v.out.find('\n', line) - line).find("FAIL") != std::string::npos);
  CHECK(v.out.find("psi1 ") != std::string::npos);

  // tol 0 fails exactly when the pair carries any rounding noise
  const PsiTable a = build_psi_table(io::params_from_json(bundle["omega"], "b"));
  const PsiTable b = io::table_from_json(bundle["omega_prime_table"], "b");
  const bool noisy = verify_pair(a, b, 0.0).max_dist_distribution > 0.0 ||
                     !check_necessary_equalities(a, b, 0.0).pass;
  CHECK(run({"verify", dir / "pair.json", "--tol", "0"}).code == (noisy ? 1 : 0));
}

TEST_CASE("generate is byte-deterministic") {
  TempDir dir("determinism");
  for (const char* c : {"theta6-zero", "delta6-zero", "both-zero"}) {
    REQUIRE(run({"generate", "--T", "3", "--K", "4", "--case", c, "--seed", "17", "-o", dir / "a.json"}).code == 0);
    REQUIRE(run({"generate", "--T", "3", "--K", "4", "--case", c, "--seed", "17", "-o", dir / "b.json"}).code == 0);
    CHECK(io::read_text_file(dir / "a.json") == io::read_text_file(dir / "b.json"));
  }
}

TEST_CASE("generation failure leaves no file") {
  TempDir dir("failure");
  const Run r = run({"generate", "--T", "2", "--K", "3", "--case", "theta6-zero", "--seed", "1", "--eta-margin", "0.95",
                     "-o", dir / "pair.json"});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir / "pair.json"));
}

TEST_CASE("distribution") {
  TempDir dir("distribution");
  io::write_file_atomic(dir / "zero.json", io::dump_json(io::params_to_json(IrtParams::zeros({2, 3}))));
  REQUIRE(run({"distribution", dir / "zero.json", "-o", dir / "d.csv"}).code == 0);
  const std::string csv = io::read_text_file(dir / "d.csv");
  const auto rows = io::parse_distribution_csv(csv, "d.csv");
  CHECK(rows.size() == 6);
  const std::array<double, 8> half{0.015625, 0.0625, 0.0625, 0.015625, 0.21875, 0.03125, 0.09375, 0.5};
  for (const auto& r : rows) {
    CHECK(r.d.p == half);
    CHECK(std::abs(r.d.sum() - 1.0) <= 1e-14);
  }
  CHECK(io::distribution_csv(rows) == csv);

  const Run stdout_run = run({"distribution", dir / "zero.json"});
  CHECK(stdout_run.out == csv);

  io::write_file_atomic(dir / "broken.json", "{\n  \"T\": 2,\n  \"K\": 3,\n  \"theta\": [1, 2\n");
  const Run broken = run({"distribution", dir / "broken.json"});
  CHECK(broken.code == 65);
  CHECK(broken.err.find("broken.json") != std::string::npos);
  CHECK(broken.err.find("line") != std::string::npos);

  io::Json missing = io::params_to_json(IrtParams::zeros({2, 3}));
  missing["delta"].erase("s5");
  io::write_file_atomic(dir / "missing.json", io::dump_json(missing));
  const Run m = run({"distribution", dir / "missing.json"});
  CHECK(m.code == 65);
  CHECK(m.err.find("s5") != std::string::npos);
}

TEST_CASE("rank") {
  TempDir dir("rank");
  io::write_file_atomic(dir / "p.json", io::dump_json(io::params_to_json(testing::random_params({3, 4}, 5))));
  const Run r = run({"rank", dir / "p.json"});
  REQUIRE(r.code == 0);
  const io::Json j = io::parse_json(r.out, "rank");
  CHECK(j["deficiency"] == 0);
  CHECK(j["rank"] == 38);

  const Run coarse = run({"rank", dir / "p.json", "--cutoff", "0.5"});
  CHECK(io::parse_json(coarse.out, "rank")["rank"].get<int>() < 38 / 2);

  REQUIRE(run({"generate", "--T", "3", "--K", "4", "--case", "both-zero", "--seed", "2", "-o", dir / "pair.json"}).code == 0);
  CHECK(io::parse_json(run({"rank", dir / "pair.json"}).out, "rank")["deficiency"].get<int>() >= 1);
}

TEST_CASE("simulate and loglik") {
  TempDir dir("simulate");
  REQUIRE(run({"generate", "--T", "3", "--K", "4", "--case", "theta6-zero", "--seed", "3", "-o", dir / "pair.json"}).code == 0);
  REQUIRE(run({"simulate", dir / "pair.json", "--n", "1000", "--seed", "9", "-o", dir / "c1.csv"}).code == 0);
  REQUIRE(run({"simulate", dir / "pair.json", "--n", "1000", "--seed", "9", "--threads", "4", "-o", dir / "c4.csv"}).code == 0);
  CHECK(io::read_text_file(dir / "c1.csv") == io::read_text_file(dir / "c4.csv"));

  const Run a = run({"loglik", dir / "pair.json", dir / "c1.csv"});
  const Run b = run({"loglik", dir / "pair.json", dir / "c1.csv", "--member", "omega-prime"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find('.') != std::string::npos);
  CHECK(a.out.size() - a.out.find('.') - 2 == 12);
  CHECK(std::abs(std::stod(a.out) - std::stod(b.out)) <= 1e-9);

  const Run one = run({"simulate", dir / "pair.json", "--n", "1", "--seed", "1"});
  const auto counts = io::parse_counts_csv(one.out, "one");
  for (const auto& c : counts.counts) CHECK(std::count(c.begin(), c.end(), 1) == 1);

  io::write_file_atomic(dir / "small.json", io::dump_json(io::params_to_json(IrtParams::zeros({2, 2}))));
  CHECK(run({"loglik", dir / "small.json", dir / "c1.csv"}).code == 65);
  CHECK(run({"simulate", dir / "pair.json", "--n", "5"}).code == 64);
}

TEST_CASE("classify") {
  TempDir dir("classify");
  io::write_file_atomic(dir / "p.json", io::dump_json(io::params_to_json(testing::random_params({3, 4}, 5))));
  const Run text = run({"classify", dir / "p.json"});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("case: neither") != std::string::npos);
  CHECK(text.out.find("no eta-transform admissible; rank = param_count") != std::string::npos);

  REQUIRE(run({"generate", "--T", "3", "--K", "4", "--case", "delta6-zero", "--seed", "2", "-o", dir / "pair.json"}).code == 0);
  const Run json = run({"classify", dir / "pair.json", "--format", "json"});
  REQUIRE(json.code == 0);
  const io::Json j = io::parse_json(json.out, "classify");
  CHECK(j["case"] == "delta6-zero");
  CHECK(j["partner"]["verification"]["max_dist_distribution"].get<double>() <= 1e-12);
  CHECK_FALSE(j.contains("xi_range"));
}
