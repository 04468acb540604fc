#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "hemi/cli.hpp"

using namespace hemi;

namespace {

RunConfig config(const std::string& suite, const std::string& model = "") {
  RunConfig c;
  c.suite = suite;
  if (!model.empty()) c.model = model;
  return c;
}

/// Drops the fields that legitimately differ between runs.
std::string strip_clock(const std::string& json) {
  static const std::regex seconds(R"("seconds": [^\n,}]+)");
  static const std::regex started(R"("started_at": "[^"]*")");
  return std::regex_replace(std::regex_replace(json, seconds, "\"seconds\": 0"), started, "\"started_at\": \"\"");
}

}  // namespace

TEST(Config, ValidationAndDimension) {
  EXPECT_EQ(validate_config(config("cgb4")), 4);
  EXPECT_EQ(validate_config(config("cgb6")), 6);
  auto c = config("cgb6");
  c.dim = 4;
  EXPECT_THROW(validate_config(c), PreconditionError);
  EXPECT_THROW(validate_config(config("nonsense")), PreconditionError);
  c = config("f2");
  c.dim = 6;
  EXPECT_THROW(validate_config(c), PreconditionError);
  c = config("cgb4");
  c.resolution.refine = 0;
  EXPECT_THROW(validate_config(c), PreconditionError);
  c = config("cgb4");
  c.format = "xml";
  EXPECT_THROW(validate_config(c), PreconditionError);
  c = config("spectrum");
  c.resolution.mesh = 8;
  EXPECT_THROW(validate_config(c), PreconditionError);
}

TEST(Run, ExitStatuses) {
  std::ostringstream err;
  auto c = config("cgb4", "hemisphere");
  c.out = testing::TempDir() + "cli_cgb4.json";
  EXPECT_EQ(run(c, err), 0);
  c = config("cgb6", "flat");
  EXPECT_EQ(run(c, err), 2);
  EXPECT_NE(err.str().find("not totally geodesic"), std::string::npos);
  c = config("cgb4", "cap(2)");
  EXPECT_EQ(run(c, err), 2);
}

TEST(Run, ReportVerbGivesStatusOneOnFailingCheck) {
  const std::string path = testing::TempDir() + "cli_report.json";
  auto c = config("cgb4", "hemisphere");
  c.out = path;
  std::ostringstream err;
  ASSERT_EQ(run(c, err), 0);
  RunConfig rc;
  rc.verb = "report";
  rc.input = path;
  EXPECT_EQ(run(rc, err), 0);

  auto doc = nlohmann::json::parse(std::ifstream(path));
  doc["checks"][0]["computed"] = 1.5;
  doc["checks"][0]["pass"] = false;
  std::ofstream(path) << doc.dump(2);
  std::ostringstream log;
  EXPECT_EQ(run(rc, log), 1);
  EXPECT_NE(log.str().find("FAIL cgb4/hemisphere"), std::string::npos);

  rc.input = testing::TempDir() + "does_not_exist.json";
  EXPECT_EQ(run(rc, err), 2);
}

TEST(Report, JsonRoundTripIsLossless) {
  auto c = config("cgb4", "cap(0.6)");
  c.resolution.refine = 2;
  const Report r = run_checks(c);
  const auto doc = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(doc["meta"]["version"], version);
  EXPECT_EQ(doc["meta"]["config"]["seed"], "1");
  ASSERT_EQ(doc["checks"].size(), r.checks.size());
  const auto& j = doc["checks"][0];
  EXPECT_EQ(j["id"], r.checks[0].id);
  EXPECT_EQ(j["computed"].get<double>(), r.checks[0].computed);
  EXPECT_EQ(j["target"].get<double>(), r.checks[0].target);
  EXPECT_EQ(j["abs_tol"].get<double>(), r.checks[0].abs_tol);
  EXPECT_EQ(j["pass"].get<bool>(), r.checks[0].pass);
  EXPECT_EQ(j["order_estimate"].get<double>(), *r.checks[0].order_estimate);
  EXPECT_EQ(j["convergence"].size(), 2u);
}

TEST(Report, CsvHasOneRowPerCheck) {
  const Report r = run_checks(config("f2", "hemisphere"));
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.rfind("id,model,dim,computed,target,abs_tol,rel_tol,relation,pass,order_estimate,min_order,seconds\n", 0),
            0u);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, r.checks.size() + 1);
}

TEST(Report, ChecksSortedById) {
  const Report r = run_checks(config("spectrum"));
  for (std::size_t k = 1; k < r.checks.size(); ++k) EXPECT_LE(r.checks[k - 1].id, r.checks[k].id);
}

TEST(Report, RecheckAgreesAndCatchesTampering) {
  const Report r = run_checks(config("cgb4", "hemisphere"));
  std::ostringstream log;
  EXPECT_TRUE(recheck_report(to_json(r), log).empty());
  auto doc = nlohmann::json::parse(to_json(r));
  doc["checks"][0]["computed"] = 1.5;
  EXPECT_EQ(recheck_report(doc.dump(), log).size(), 1u);
  EXPECT_THROW(recheck_report("{\"meta\": {}}", log), PreconditionError);
  EXPECT_THROW(recheck_report("not json", log), nlohmann::json::exception);
}

TEST(Report, IdenticalConfigGivesIdenticalReport) {
  auto c = config("cgb4");
  c.resolution.refine = 2;
  EXPECT_EQ(strip_clock(to_json(run_checks(c))), strip_clock(to_json(run_checks(c))));
  auto p = config("probe");
  p.probe_iterations = 12;
  p.seed = 3;
  EXPECT_EQ(strip_clock(to_json(run_checks(p))), strip_clock(to_json(run_checks(p))));
}
