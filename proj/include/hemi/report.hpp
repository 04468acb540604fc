#pragma once

// JSON and CSV serialization of check reports. Numbers are written with 17
// significant digits; non-finite values become null (JSON) or empty (CSV).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <string>
#include <utility>
#include <vector>

#include "hemi/verify.hpp"

namespace hemi {

inline constexpr const char* version = "1.0.0";

struct Report {
  std::vector<std::pair<std::string, std::string>> config;  // flag, value
  std::string started_at;
  std::vector<CheckReport> checks;

  void sort_checks() {
    std::stable_sort(checks.begin(), checks.end(),
                     [](const CheckReport& a, const CheckReport& b) { return a.id < b.id; });
  }
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckReport& c) { return c.pass; });
  }
};

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

inline std::string optional_number(const std::optional<double>& v) {
  return v ? number(*v) : "null";
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace detail

inline std::string check_json(const CheckReport& c, const std::string& indent) {
  using detail::number;
  using detail::quoted;
  std::string s = indent + "{\n";
  const std::string in = indent + "  ";
  auto field = [&](const std::string& key, const std::string& value, bool last = false) {
    s += in + quoted(key) + ": " + value + (last ? "\n" : ",\n");
  };
  field("id", quoted(c.id));
  field("model", quoted(c.model));
  field("dim", std::to_string(c.dim));
  field("computed", number(c.computed));
  field("target", number(c.target));
  field("abs_tol", number(c.abs_tol));
  field("rel_tol", number(c.rel_tol));
  field("relation", quoted(relation_name(c.relation)));
  field("pass", c.pass ? "true" : "false");
  field("order_estimate", detail::optional_number(c.order_estimate));
  field("min_order", detail::optional_number(c.min_order));
  std::string rows = "[";
  for (std::size_t k = 0; k < c.convergence.size(); ++k) {
    const auto& r = c.convergence[k];
    rows += std::string(k ? ", " : "") + "{\"fd_step\": " + number(r.fd_step) +
            ", \"mesh\": " + std::to_string(r.mesh) + ", \"value\": " + number(r.value) +
            ", \"error\": " + number(r.error) + "}";
  }
  field("convergence", rows + "]");
  field("grid", "{\"radial\": " + std::to_string(c.resolution.radial) +
                    ", \"angular\": " + std::to_string(c.resolution.angular) +
                    ", \"fd_step\": " + number(c.resolution.fd_step) +
                    ", \"mesh\": " + std::to_string(c.resolution.mesh) +
                    ", \"refine\": " + std::to_string(c.resolution.refine) +
                    ", \"radial_only\": " + (c.radial_only ? "true" : "false") + "}");
  field("detail", quoted(c.detail));
  field("seconds", number(c.seconds), true);
  return s + indent + "}";
}

/// { "meta": {version, config, started_at}, "checks": [...] }
inline std::string to_json(const Report& r) {
  using detail::quoted;
  std::string s = "{\n  \"meta\": {\n    \"version\": " + quoted(version) + ",\n    \"config\": {";
  for (std::size_t k = 0; k < r.config.size(); ++k)
    s += std::string(k ? ", " : "") + quoted(r.config[k].first) + ": " + quoted(r.config[k].second);
  s += "},\n    \"started_at\": " + quoted(r.started_at) + "\n  },\n  \"checks\": [";
  for (std::size_t k = 0; k < r.checks.size(); ++k)
    s += std::string(k ? ",\n" : "\n") + check_json(r.checks[k], "    ");
  s += r.checks.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return s;
}

inline std::string to_csv(const Report& r) {
  using detail::csv_field;
  auto num = [](double v) { return std::isfinite(v) ? detail::number(v) : std::string(); };
  std::string s =
      "id,model,dim,computed,target,abs_tol,rel_tol,relation,pass,order_estimate,min_order,seconds\n";
  for (const auto& c : r.checks) {
    s += csv_field(c.id) + "," + csv_field(c.model) + "," + std::to_string(c.dim) + "," +
         num(c.computed) + "," + num(c.target) + "," + num(c.abs_tol) + "," + num(c.rel_tol) +
         "," + relation_name(c.relation) + "," + (c.pass ? "true" : "false") + "," +
         (c.order_estimate ? num(*c.order_estimate) : "") + "," +
         (c.min_order ? num(*c.min_order) : "") + "," + num(c.seconds) + "\n";
  }
  return s;
}

}  // namespace hemi
