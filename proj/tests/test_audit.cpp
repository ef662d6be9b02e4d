#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "pscode/audit.hpp"
#include "pscode/rng.hpp"

using namespace pscode;

TEST_CASE("mask map is a bijection exactly when x is nonzero") {
  PrimeField f5(5);
  // x = 3, scalar mask: R -> A_0 + 3R permutes {0..4}
  CheckResult ok = check_masking_bijection(f5, 3);
  CHECK(ok.passed);
  CHECK(ok.statistic == 5.0);

  CheckResult zero = check_masking_bijection(f5, 0);
  CHECK_FALSE(zero.passed);
  CHECK(zero.detail.find("A_0 exposed") != std::string::npos);

  // 1x2 mask over GF(7): all 49 masks hit all 49 shares, for both inputs
  CheckResult wide = check_masking_bijection(PrimeField(7), 4, 1, 2);
  CHECK(wide.passed);
  CHECK(wide.statistic == 49.0);
  CHECK(wide.threshold == 49.0);

  for (std::uint64_t q : {5ull, 7ull})
    for (std::uint64_t x = 1; x < q; ++x)
      for (std::size_t m : {1ull, 2ull})
        CHECK(check_masking_bijection(PrimeField(q), x, m, 1).passed);
}

TEST_CASE("share distribution is uniform and input-independent") {
  PrimeField f5(5);
  FieldMatrix a = FieldMatrix::from_entries(f5, 1, 1, {2});
  FieldMatrix a2 = FieldMatrix::from_entries(f5, 1, 1, {4});

  CheckResult exhaustive = check_share_uniformity(f5, a, a2, 3, 0, 1);
  CHECK(exhaustive.passed);
  CHECK(exhaustive.config.at("mode") == "exhaustive");

  // identical inputs are trivially indistinguishable
  CHECK(check_share_uniformity(f5, a, a, 3, 0, 1).passed);

  PrimeField f61(61);
  CheckResult sampled = check_share_uniformity(
      f61, FieldMatrix::from_entries(f61, 1, 1, {7}),
      FieldMatrix::from_entries(f61, 1, 1, {42}), 7, 100000, 99);
  CHECK(sampled.passed);
  CHECK(sampled.config.at("mode") == "sampled");
  CHECK(sampled.statistic > 0.01);
}

TEST_CASE("chi-square helpers behave at the edges") {
  // perfectly balanced counts: p = 1 up to rounding
  CHECK(chi_square_uniform_pvalue({100, 100, 100, 100}) > 0.99);
  // wildly unbalanced: p below any sane level
  CHECK(chi_square_uniform_pvalue({400, 0, 0, 0}) < 1e-10);
  CHECK(chi_square_homogeneity_pvalue({{100, 0}, {0, 100}}) < 1e-10);
  CHECK(chi_square_homogeneity_pvalue({{50, 50}, {50, 50}}) > 0.99);
}

TEST_CASE("query generation is D-oblivious, structurally and statistically") {
  CodeParams p{PrimeField(17), 1, 2, 2, 2, 1, 1, 1, 1};
  CheckResult res = check_query_symmetry(p, 4000, 7);
  CHECK(res.passed);
  CHECK(res.statistic > 0.01);

  CodeParams single = p;
  single.M = 1;
  CheckResult vac = check_query_symmetry(single, 10, 7);
  CHECK(vac.passed);
  CHECK(vac.detail.find("vacuous") != std::string::npos);
}

TEST_CASE("sub-results recompute from the worker view; tampering is caught") {
  CodeParams params{PrimeField(97), 2, 3, 2, 12, 1, 2, 2, 2};
  std::mt19937_64 rng(11);
  FieldMatrix a = FieldMatrix::random(params.field, params.r, params.s, rng);
  std::vector<FieldMatrix> library{
      FieldMatrix::random(params.field, params.s, params.t, rng),
      FieldMatrix::random(params.field, params.s, params.t, rng)};
  JobTranscript t = run_job(params, a, library, {.seed = 21});

  std::vector<ViewSample> views = views_from_transcript(t, library);
  REQUIRE(views.size() == 12);
  CHECK(check_result_determinism(views, library).passed);

  std::vector<ViewSample> tampered = views;
  tampered[3].result.set(0, 0, tampered[3].result(0, 0) ^ 1);
  CheckResult bad = check_result_determinism(tampered, library);
  CHECK_FALSE(bad.passed);
  CHECK(bad.detail.find("worker 4") != std::string::npos);

  std::vector<ViewSample> wrong_lib = views;
  wrong_lib[0].library_fingerprint ^= 1;
  CHECK_FALSE(check_result_determinism(wrong_lib, library).passed);

  CHECK(check_result_determinism({}, library).passed);  // vacuous
}

TEST_CASE("default audit: all green, deterministic, serializable") {
  AuditOptions opts;
  opts.uniformity_samples = 20000;
  opts.symmetry_samples = 2000;
  AuditReport report = run_default_audit(opts);
  CHECK(report.all_passed());
  CHECK(report.warnings.empty());

  AuditReport again = run_default_audit(opts);
  CHECK(report.to_string() == again.to_string());

  const nlohmann::json j = report.to_json();
  CHECK(j.at("schema") == "pscode.audit.v1");
  for (const auto& c : j.at("checks")) {
    CHECK(c.contains("name"));
    CHECK(c.contains("config"));
    CHECK(c.contains("statistic"));
    CHECK(c.contains("threshold"));
    CHECK(c.contains("passed"));
  }
}

TEST_CASE("injected zero-point violation turns the report red") {
  AuditOptions opts;
  opts.uniformity_samples = 5000;
  opts.symmetry_samples = 1000;
  opts.allow_zero_point = true;
  AuditReport report = run_default_audit(opts);
  CHECK_FALSE(report.all_passed());
  bool found = false;
  for (const CheckResult& c : report.checks)
    if (c.name == "masking_bijection_zero_point_injected") {
      found = true;
      CHECK_FALSE(c.passed);
    }
  CHECK(found);
}

TEST_CASE("underpowered sampling produces a warning") {
  AuditOptions opts;
  opts.uniformity_samples = 100;
  opts.symmetry_samples = 100;
  AuditReport report = run_default_audit(opts);
  CHECK_FALSE(report.warnings.empty());
  bool mentions_power = false;
  for (const std::string& w : report.warnings)
    if (w.find("power insufficient") != std::string::npos)
      mentions_power = true;
  CHECK(mentions_power);
}
