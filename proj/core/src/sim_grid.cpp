#include "impact/csv.hpp"
#include "impact/error.hpp"
#include "impact/power_sim.hpp"
#include "impact/random.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace impact::sim {
namespace {

const std::vector<std::string>& grid_keys() {
  static const std::vector<std::string> keys = {"n_a",      "n_b",        "family", "delta",  "noise_sd",
                                                "tie_step", "alpha",      "alternative", "continuity",
                                                "method",   "exact_cap",  "reps",   "seed"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw Error(errc::kMalformedRow, "grid line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::size_t line, const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad(line, "invalid value '" + v + "' for " + key);
  return out;
}

void apply(SimConfig& c, const std::string& key, const std::string& v, std::size_t line) {
  if (key == "n_a") c.n_a = parse_number<std::size_t>(line, key, v);
  else if (key == "n_b") c.n_b = parse_number<std::size_t>(line, key, v);
  else if (key == "family") {
    auto f = parse_family(v);
    if (!f) bad(line, "family must be normal or logistic");
    c.family = *f;
  } else if (key == "delta") c.delta = parse_number<double>(line, key, v);
  else if (key == "noise_sd") c.panel_noise_sd = parse_number<double>(line, key, v);
  else if (key == "tie_step") {
    const double step = parse_number<double>(line, key, v);
    c.tie_policy = step == 0.0 ? TiePolicy::none() : TiePolicy::round_to_grid(step);
  } else if (key == "alpha") c.alpha = parse_number<double>(line, key, v);
  else if (key == "alternative") {
    auto a = stats::parse_alternative(v);
    if (!a) bad(line, "alternative must be two-sided, a-greater or b-greater");
    c.alternative = *a;
  } else if (key == "continuity") {
    if (v != "true" && v != "false") bad(line, "continuity must be true or false");
    c.continuity = v == "true";
  } else if (key == "method") {
    auto m = stats::parse_method_choice(v);
    if (!m) bad(line, "method must be auto, exact or normal");
    c.method = *m;
  } else if (key == "exact_cap") c.exact_cap = parse_number<std::size_t>(line, key, v);
  else if (key == "reps") c.reps = parse_number<std::size_t>(line, key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(line, key, v);
}

// Shortest text that round-trips to the same double.
std::string number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<SimConfig> parse_grid(std::istream& in) {
  std::map<std::string, std::pair<std::size_t, std::vector<std::string>>> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad(line_no, "expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto& keys = grid_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) bad(line_no, "unknown key '" + key + "'");
    if (values.count(key)) bad(line_no, "key '" + key + "' given twice");
    std::vector<std::string> list;
    std::stringstream ss(line.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto v = trim(item);
      if (v.empty()) bad(line_no, "empty value for '" + key + "'");
      list.push_back(v);
    }
    if (list.empty()) bad(line_no, "no value for '" + key + "'");
    values[key] = {line_no, std::move(list)};
  }

  std::uint64_t master_seed = 0;
  if (auto it = values.find("seed"); it != values.end()) {
    if (it->second.second.size() != 1) bad(it->second.first, "seed takes a single value");
    master_seed = parse_number<std::uint64_t>(it->second.first, "seed", it->second.second.front());
  }

  std::vector<SimConfig> grid{SimConfig{}};
  for (const auto& key : grid_keys()) {
    auto it = values.find(key);
    if (it == values.end() || key == "seed") continue;
    std::vector<SimConfig> expanded;
    for (const auto& base : grid) {
      for (const auto& v : it->second.second) {
        SimConfig c = base;
        apply(c, key, v, it->second.first);
        expanded.push_back(c);
      }
    }
    grid = std::move(expanded);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i].seed = derive_seed(master_seed, i);
    validate(grid[i]);
  }
  return grid;
}

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols = {
      "cell",       "n_a",       "n_b",         "family",     "delta",          "noise_sd",
      "tie_step",   "alpha",     "alternative", "continuity", "method",         "exact_cap",
      "reps",       "seed",      "rejection_rate", "mc_stderr", "mean_relative_effect",
      "relative_effect_stderr", "reps_used", "degenerate_reps"};
  return cols;
}

void write_results_csv(std::span<const SimResult> results, std::ostream& out) {
  csv::write_row(out, results_columns());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto& c = r.config;
    csv::write_row(out, {std::to_string(i),
                         std::to_string(c.n_a),
                         std::to_string(c.n_b),
                         std::string(to_string(c.family)),
                         number(c.delta),
                         number(c.panel_noise_sd),
                         number(c.tie_policy.kind == TiePolicy::Kind::RoundToGrid ? c.tie_policy.step : 0.0),
                         number(c.alpha),
                         std::string(stats::to_string(c.alternative)),
                         c.continuity ? "true" : "false",
                         std::string(stats::to_string(c.method)),
                         std::to_string(c.exact_cap),
                         std::to_string(c.reps),
                         std::to_string(c.seed),
                         number(r.rejection_rate),
                         number(r.mc_stderr),
                         number(r.mean_relative_effect),
                         number(r.relative_effect_stderr),
                         std::to_string(r.reps_used),
                         std::to_string(r.degenerate_reps)});
  }
}

}  // namespace impact::sim
