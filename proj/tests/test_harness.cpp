#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpblocks/harness/experiment.hpp"
#include "lpblocks/lpblocks.hpp"

using namespace lpblocks;
using namespace lpblocks::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.model = AR1ModelSpec(0.8, NoiseSpec::student(1.3));
  c.n_grid = {1000, 3000};
  c.b_grid = {10, 40, 600};
  c.reps = 6;
  c.estimators = {"theta_alpha", "inv_c1_l1", "serial:1", "theta_inf"};
  c.master_seed = 11;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lpblocks_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(SeriesIo, RoundTripIsExact) {
  const auto s = simulate(AR1ModelSpec(0.8, NoiseSpec::student(1.3)), 500, SeedSpec{1, 0});
  std::stringstream ss;
  write_series(ss, s, "ar1 test");
  EXPECT_EQ(ss.str().rfind("# ar1 test\n", 0), 0u);
  EXPECT_EQ(read_series(ss), s);
}

TEST(SeriesIo, CommentsBlankAndTrailingComma) {
  std::stringstream ss("# header\n\n1.5,\n  -2\n# mid\n3e2\n");
  EXPECT_EQ(read_series(ss), (Series{1.5, -2.0, 300.0}));
}

TEST(SeriesIo, ParseErrorReportsLine) {
  std::stringstream ss("1\n2\nabc\n4\n");
  try {
    read_series(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::stringstream nan_in("1\nnan\n");
  EXPECT_THROW(read_series(nan_in), ParseError);
  std::stringstream empty("# nothing\n");
  EXPECT_THROW(read_series(empty), ParseError);
}

TEST(Config, AlphaModeParse) {
  EXPECT_EQ(AlphaMode::parse("oracle").kind, AlphaMode::Kind::oracle);
  const auto f = AlphaMode::parse("1.3");
  EXPECT_EQ(f.kind, AlphaMode::Kind::fixed);
  EXPECT_EQ(f.value, 1.3);
  const auto h = AlphaMode::parse("hill:400");
  EXPECT_EQ(h.kind, AlphaMode::Kind::hill);
  EXPECT_EQ(h.k_tail, 400u);
  EXPECT_FALSE(h.reduce_bias);
  EXPECT_TRUE(AlphaMode::parse("hill-rb").reduce_bias);
  EXPECT_THROW(AlphaMode::parse("hill:1"), DomainError);
  EXPECT_THROW(AlphaMode::parse("banana"), DomainError);
  EXPECT_THROW(AlphaMode::parse("-1"), DomainError);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  const auto c = small_config();
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  auto j = config_to_json(c);
  j["bogus"] = 1;
  EXPECT_THROW(config_from_json(j), ParseError);
  j = config_to_json(c);
  j["model"]["colour"] = "red";
  EXPECT_THROW(config_from_json(j), ParseError);
  j = config_to_json(c);
  j.erase("b_grid");
  EXPECT_THROW(config_from_json(j), ParseError);
  j = config_to_json(c);
  j["model"] = {{"type", "iid"}, {"noise", {{"law", "pareto"}, {"alpha", 0.8}}}};
  EXPECT_EQ(tail_index(config_from_json(j).model), 0.8);
}

TEST(Experiment, SmokeOneRep) {
  auto c = small_config();
  c.reps = 1;
  const auto res = run_experiment(c);
  ASSERT_EQ(res.rows.size(), c.n_grid.size() * c.b_grid.size() * c.estimators.size());
  ASSERT_EQ(res.summary.size(), res.rows.size());
  for (const auto& r : res.rows) {
    // b=600 leaves one block at n=1000
    if (r.n == 1000 && r.b == 600) {
      EXPECT_EQ(r.status, RowStatus::skipped);
      EXPECT_TRUE(std::isnan(r.value));
    } else {
      EXPECT_EQ(r.k, default_k(r.n, r.b, 1.0));
      EXPECT_TRUE(std::isfinite(r.value));
    }
  }
}

TEST(Experiment, SameSeriesAcrossEstimators) {
  auto c = small_config();
  c.reps = 2;
  const auto res = run_experiment(c);
  for (const auto& r : res.rows) EXPECT_EQ(r.seed, stream_seed(replication_seed(c.master_seed, r.rep, r.n)));
  // direct recomputation of one cell
  const auto s = simulate(c.model, 3000, replication_seed(c.master_seed, 1, 3000));
  const auto f = partition(s, 40);
  const auto direct = extremal_index_alpha_blocks(f, 1.3, default_k(3000, 40, 1.0));
  bool found = false;
  for (const auto& r : res.rows) {
    if (r.estimator_id == "theta_alpha" && r.n == 3000 && r.b == 40 && r.rep == 1) {
      EXPECT_EQ(r.value, direct.value);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Experiment, ThreadCountDoesNotChangeOutput) {
  const auto c = small_config();
  const auto d1 = scratch("t1"), d3 = scratch("t3");
  write_experiment(d1.string(), c, run_experiment(c, 1));
  write_experiment(d3.string(), c, run_experiment(c, 3));
  for (const char* f : {"results.csv", "summary.csv", "summary.json"}) {
    const auto a = slurp(d1 / f);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(d3 / f)) << f;
  }
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d3);
}

TEST(Experiment, SummaryRecomputesFromResultsCsv) {
  const auto c = small_config();
  const auto res = run_experiment(c);
  std::stringstream rs, s1, s2;
  write_results_csv(rs, res.rows);
  const auto rows = read_results_csv(rs);
  ASSERT_EQ(rows.size(), res.rows.size());
  write_summary_csv(s1, res.summary);
  write_summary_csv(s2, summarize(rows));
  EXPECT_EQ(s1.str(), s2.str());
}

TEST(Experiment, RejectsUnknownEstimator) {
  auto c = small_config();
  c.estimators = {"theta_alpha", "nope"};
  c.reps = 1;
  EXPECT_THROW(run_experiment(c), DomainError);
  EXPECT_THROW(split_lag("serial:x", 1), DomainError);
}

TEST(Estimate, FileMatchesInProcess) {
  const auto s = simulate(AR1ModelSpec(0.8, NoiseSpec::student(1.3)), 4000, SeedSpec{2, 0});
  const auto dir = scratch("est");
  std::filesystem::create_directories(dir);
  const auto path = (dir / "x.txt").string();
  write_series_file(path, s, "test");

  FileEstimateOptions opt;
  opt.b = 20;
  opt.alpha_mode = AlphaMode::parse("1.3");
  for (const char* id : {"theta_alpha", "theta_inf", "inv_c1_l1", "serial:2", "supwalk", "stable_beta"}) {
    opt.estimator_id = id;
    const auto a = estimate_from_file(path, opt);
    const auto b = estimate_series(s, opt);
    EXPECT_EQ(a.value, b.value) << id;
    EXPECT_EQ(a.estimator_id, id);
  }
  opt.estimator_id = "theta_alpha";
  const auto direct = extremal_index_alpha_blocks(partition(s, 20), 1.3, default_k(4000, 20, 1.0));
  EXPECT_EQ(estimate_from_file(path, opt).value, direct.value);

  opt.b = 2001;
  EXPECT_THROW(estimate_from_file(path, opt), TooFewBlocksError);
  EXPECT_THROW(estimate_from_file((dir / "missing.txt").string(), opt), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(Estimate, HillAlphaByDefault) {
  const auto s = simulate(LinearModelSpec({1.0}, NoiseSpec::pareto(1.3)), 8000, SeedSpec{3, 0});
  FileEstimateOptions opt;
  opt.b = 40;
  const auto r = estimate_series(s, opt);
  EXPECT_NEAR(r.alpha_used, 1.3, 0.15);
  const auto j = report_to_json(r);
  EXPECT_EQ(j.at("estimator_id"), "theta_alpha");
  EXPECT_EQ(j.at("b"), 40);
  EXPECT_EQ(j.at("k"), 5);
  opt.alpha_mode = AlphaMode::parse("oracle");
  EXPECT_THROW(estimate_series(s, opt), DomainError);
}

TEST(Oracle, ReportValues) {
  const std::vector<PExponent> ps{PExponent::finite(1), PExponent::finite(2), PExponent::infinity()};
  const auto r = oracle_report(LinearModelSpec(ar1_truncated_coeffs(0.8), NoiseSpec::student(1.3)), 1.3, ps);
  EXPECT_NEAR(r.theta, 0.251802, 1e-6);
  EXPECT_NEAR(r.constants[0].closed_form, 2.040417, 1e-6);
  EXPECT_NEAR(r.constants[1].closed_form, 0.489172, 1e-6);
  for (const auto& c : r.constants) EXPECT_NEAR(c.telescoping, c.closed_form, 1e-10);
  ASSERT_TRUE(r.supwalk.has_value());
  EXPECT_NEAR(*r.supwalk, 2.040417 / 2, 1e-6);

  const auto r6 = oracle_report(LinearModelSpec(ar1_truncated_coeffs(0.6), NoiseSpec::student(1.3)), 1.3, ps);
  EXPECT_NEAR(r6.theta, 0.485250, 1e-6);
  EXPECT_NEAR(r6.constants[0].closed_form, 1.596935, 1e-6);

  const auto one = oracle_report(LinearModelSpec({1.0}, NoiseSpec::pareto(0.8)), 0.8, ps);
  for (const auto& c : one.constants) EXPECT_DOUBLE_EQ(c.closed_form, 1.0);
  EXPECT_FALSE(one.supwalk.has_value());

  std::stringstream ss;
  print_oracle_report(ss, r);
  EXPECT_NE(ss.str().find("theta = c(inf) = 0.2518012417"), std::string::npos);
  EXPECT_EQ(oracle_to_json(one).at("supwalk"), nullptr);
}
