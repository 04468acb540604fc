// Acceptance run: one PASS/FAIL line per criterion at default resolution.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "hemi/cli.hpp"

using namespace hemi;

namespace {

struct Criterion {
  int number;
  std::string name;
  std::function<std::vector<CheckReport>()> checks;
};

std::vector<CheckReport> suite(const std::string& name, int dim, int refine = 1, std::uint64_t seed = 1) {
  RunConfig c;
  c.suite = name;
  c.dim = dim;
  c.resolution.refine = refine;
  c.seed = seed;
  return run_checks(c).checks;
}

std::vector<CheckReport> with_prefix(const std::vector<CheckReport>& all, const std::vector<std::string>& prefixes) {
  std::vector<CheckReport> out;
  for (const auto& r : all)
    for (const auto& p : prefixes)
      if (r.id.rfind(p, 0) == 0) {
        out.push_back(r);
        break;
      }
  return out;
}

/// Values only: the clock fields are allowed to differ.
bool same_values(const std::vector<CheckReport>& a, const std::vector<CheckReport>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].id != b[k].id || a[k].pass != b[k].pass) return false;
    if (std::memcmp(&a[k].computed, &b[k].computed, sizeof(double)) != 0) return false;
    if (a[k].convergence.size() != b[k].convergence.size()) return false;
    for (std::size_t j = 0; j < a[k].convergence.size(); ++j)
      if (std::memcmp(&a[k].convergence[j].value, &b[k].convergence[j].value, sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

int main() {
  const auto cgb4 = [] { return suite("cgb4", 4, 2); };
  const std::vector<Criterion> criteria{
      {1, "cgb4", [&] { return with_prefix(cgb4(), {"cgb4/"}); }},
      {2, "flat boundary pin", [] { return with_prefix(suite("cgb4", 4), {"boundary/flat/"}); }},
      {3, "f2 invariant", [] { return suite("f2", 4, 2); }},
      {4, "yamabe spectrum", [] { return with_prefix(suite("spectrum", 4, 2), {"spectrum/"}); }},
      {5, "inequality gap", [] { return with_prefix(suite("spectrum", 4), {"gap/"}); }},
      {6, "chain", [] { return with_prefix(suite("chain", 4), {"chain/"}); }},
      {7, "dimension 6", [] { return suite("cgb6", 6, 2); }},
      {8, "tensor identities",
       [] {
         auto out = suite("identities", 4, 2);
         for (auto& r : suite("identities", 6, 2)) out.push_back(std::move(r));
         return out;
       }},
      {9, "rigidity probe",
       [] {
         std::vector<CheckReport> out;
         for (std::uint64_t seed : {1, 2, 3})
           for (auto& r : suite("probe", 4, 1, seed)) out.push_back(std::move(r));
         return out;
       }},
      {10, "determinism",
       [&] {
         CheckReport r;
         r.id = "determinism/repeat";
         r.relation = Relation::eq;
         r.target = 1.0;
         r.abs_tol = 0.0;
         bool same = same_values(cgb4(), cgb4()) && same_values(suite("cgb6", 6), suite("cgb6", 6)) &&
                     same_values(suite("probe", 4, 1, 2), suite("probe", 4, 1, 2));
         r.computed = same ? 1.0 : 0.0;
         r.finalize();
         return std::vector<CheckReport>{r};
       }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckReport> checks;
    std::string error;
    try {
      checks = c.checks();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<std::string> bad;
    for (const auto& r : checks)
      if (!r.pass) bad.push_back(r.id);
    const bool pass = error.empty() && !checks.empty() && bad.empty();
    failed += !pass;
    std::printf("%s criterion %d (%s): %zu checks, %.1f s", pass ? "PASS" : "FAIL", c.number, c.name.c_str(),
                checks.size(), secs);
    if (!error.empty()) std::printf("  error: %s", error.c_str());
    if (checks.empty() && error.empty()) std::printf("  no checks ran");
    for (const auto& id : bad) std::printf("  failing: %s", id.c_str());
    std::printf("\n");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
