#pragma once

// Experiment runner: INI configs, replica orchestration, CSV/JSON artifacts,
// aggregation across replicas, and the bundled construction demos.
//
// Config layout (one file per experiment; ';' starts a comment line):
//
//   [experiment]  horizon, replicas, seed, arms, output, checkpoints,
//                 write_trace, delta
//   [process]     kind + kind-specific keys
//   [reward]      kind, tier, cell_exponent, means, a1, a2, zeroing_scale
//   [learner]     kind, arm, policies, schedule
//   [policies]    name = const:A | threshold:CUT:BELOW:ABOVE | cells:M:A,B,...
//
// Every key is typed and checked; unknown keys and sections are errors that
// carry the file name and line number.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "ncb/bandit_core.hpp"
#include "ncb/core.hpp"
#include "ncb/diagnostics.hpp"
#include "ncb/harness.hpp"
#include "ncb/learners.hpp"
#include "ncb/processes.hpp"
#include "ncb/rewards.hpp"
#include "ncb/timescales.hpp"

namespace ncb {

inline constexpr std::string_view kSoftwareVersion = "0.1.0";
inline constexpr std::string_view kOutputRootEnv = "NCB_OUTPUT_ROOT";

// Artifacts that exist but cannot be aggregated (missing files, mixed hashes).
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  auto res = std::to_chars(buf, buf + sizeof buf - 1, v, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T v{};
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || s.empty()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config document with line tracking.

class ConfigDocument {
 public:
  static ConfigDocument from_string(const std::string& text, std::string name = "<config>") {
    ConfigDocument doc;
    doc.name_ = std::move(name);
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(doc.name_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    doc.scan_lines(text);
    for (const auto& [key, node] : tree) {
      if (node.empty() && !node.data().empty()) {
        throw ConfigError(doc.where("", key) + "key outside any section");
      }
      Section sec;
      sec.name = key;
      for (const auto& [k, v] : node) sec.entries.emplace_back(k, v.data());
      doc.sections_.push_back(std::move(sec));
    }
    return doc;
  }

  static ConfigDocument from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path.string());
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  [[nodiscard]] bool has_section(std::string_view section) const { return find_section(section) != nullptr; }

  [[nodiscard]] std::optional<std::string> get(std::string_view section, std::string_view key) const {
    used_.insert(std::string(section) + "." + std::string(key));
    const Section* sec = find_section(section);
    if (!sec) return std::nullopt;
    for (const auto& [k, v] : sec->entries) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  // Keys of a section in file order; marks them all as used.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries(std::string_view section) const {
    const Section* sec = find_section(section);
    if (!sec) return {};
    for (const auto& [k, v] : sec->entries) used_.insert(std::string(section) + "." + k);
    return sec->entries;
  }

  // "file:line: [section] key: " prefix for diagnostics.
  [[nodiscard]] std::string where(std::string_view section, std::string_view key) const {
    std::string loc = name_;
    const auto it = lines_.find(std::string(section) + "." + std::string(key));
    if (it != lines_.end()) {
      loc += ":" + std::to_string(it->second);
    } else if (auto s = section_lines_.find(std::string(section)); s != section_lines_.end()) {
      loc += ":" + std::to_string(s->second);
    }
    return loc + ": [" + std::string(section) + "] " + std::string(key) + ": ";
  }

  [[noreturn]] void fail(std::string_view section, std::string_view key, const std::string& msg) const {
    throw ConfigError(where(section, key) + msg);
  }

  // Rejects sections and keys that no reader asked for.
  void reject_unknown(const std::set<std::string>& known_sections) const {
    for (const auto& sec : sections_) {
      if (!known_sections.count(sec.name)) {
        const auto it = section_lines_.find(sec.name);
        throw ConfigError(name_ + ":" + (it == section_lines_.end() ? std::string("?") : std::to_string(it->second)) +
                          ": unknown section [" + sec.name + "]");
      }
      for (const auto& [k, v] : sec.entries) {
        if (!used_.count(sec.name + "." + k)) fail(sec.name, k, "unknown key");
      }
    }
  }

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };

  [[nodiscard]] const Section* find_section(std::string_view section) const {
    for (const auto& s : sections_) {
      if (s.name == section) return &s;
    }
    return nullptr;
  }

  void scan_lines(const std::string& text) {
    std::string section;
    std::size_t lineno = 0;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto line = detail::trim(raw);
      if (line.empty() || line.front() == ';') continue;
      if (line.front() == '[') {
        section = std::string(detail::trim(line.substr(1, line.find(']') - 1)));
        section_lines_.emplace(section, lineno);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      lines_.emplace(section + "." + std::string(detail::trim(line.substr(0, eq))), lineno);
    }
  }

  std::string name_;
  std::vector<Section> sections_;
  std::map<std::string, std::size_t> lines_;
  std::map<std::string, std::size_t> section_lines_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Typed experiment description.

struct ProcessSpec {
  std::string kind = "iid_uniform";
  std::vector<double> points;
  std::vector<double> weights;
  std::string schedule = "sqrt";  // deterministic_c2: sqrt | capped:N
  unsigned eps_exponent = 3;
  std::uint64_t base_time = 1000;
  unsigned periods = 1;
};

struct RewardSpec {
  std::string kind = "stationary_bernoulli";
  RewardTier tier = RewardTier::kStationary;
  unsigned cell_exponent = 0;
  std::vector<double> means;
  ActionIndex a1 = 0;
  ActionIndex a2 = 1;
  std::optional<unsigned> zeroing_scale;
};

struct PolicySpec {
  std::string name;
  std::string text;  // normalized definition
  Policy policy{"", {}};
};

struct LearnerSpec {
  std::string kind = "exp3ix";
  ActionIndex arm = 0;
  std::vector<std::string> policies;
  std::string schedule = "linear:2";
};

struct ExperimentConfig {
  std::string source = "<config>";
  Time horizon = 1;
  std::uint64_t replicas = 1;
  std::uint64_t seed = 0;
  std::size_t arms = 2;
  std::string output = "ncb_out";
  std::vector<Time> checkpoints;  // resolved; powers of two plus the horizon by default
  bool write_trace = true;
  double delta = 0.05;  // confidence of the reported EXP3.IX certificate
  ProcessSpec process;
  RewardSpec reward;
  LearnerSpec learner;
  std::vector<PolicySpec> policies;

  // Every trajectory-relevant field, one "key=value" line each.
  [[nodiscard]] std::string canonical() const {
    std::ostringstream o;
    auto list = [](const auto& v) {
      std::string s;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) s += ',';
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[j])>>) {
          s += format_double(v[j]);
        } else {
          s += std::string(v[j]);
        }
      }
      return s;
    };
    std::vector<std::string> cps;
    for (Time c : checkpoints) cps.push_back(std::to_string(c));
    o << "version=" << kSoftwareVersion << '\n'
      << "experiment.horizon=" << horizon << '\n'
      << "experiment.replicas=" << replicas << '\n'
      << "experiment.seed=" << seed << '\n'
      << "experiment.arms=" << arms << '\n'
      << "experiment.checkpoints=" << list(cps) << '\n'
      << "experiment.delta=" << format_double(delta) << '\n'
      << "process.kind=" << process.kind << '\n'
      << "process.points=" << list(process.points) << '\n'
      << "process.weights=" << list(process.weights) << '\n'
      << "process.schedule=" << process.schedule << '\n'
      << "process.eps_exponent=" << process.eps_exponent << '\n'
      << "process.base_time=" << process.base_time << '\n'
      << "process.periods=" << process.periods << '\n'
      << "reward.kind=" << reward.kind << '\n'
      << "reward.tier=" << to_string(reward.tier) << '\n'
      << "reward.cell_exponent=" << reward.cell_exponent << '\n'
      << "reward.means=" << list(reward.means) << '\n'
      << "reward.a1=" << reward.a1 << '\n'
      << "reward.a2=" << reward.a2 << '\n'
      << "reward.zeroing_scale=" << (reward.zeroing_scale ? std::to_string(*reward.zeroing_scale) : "") << '\n'
      << "learner.kind=" << learner.kind << '\n'
      << "learner.arm=" << learner.arm << '\n'
      << "learner.policies=" << list(learner.policies) << '\n'
      << "learner.schedule=" << learner.schedule << '\n';
    for (const auto& p : policies) o << "policies." << p.name << '=' << p.text << '\n';
    return o.str();
  }

  [[nodiscard]] std::uint64_t hash() const { return ncb::detail::fnv1a(canonical()); }
};

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

template <class T>
T read_number(const ConfigDocument& doc, std::string_view sec, std::string_view key, std::optional<T> fallback) {
  const auto raw = doc.get(sec, key);
  if (!raw) {
    if (fallback) return *fallback;
    doc.fail(sec, key, "required key is missing");
  }
  const auto v = parse_number<T>(*raw);
  if (!v) {
    doc.fail(sec, key, std::string("expected ") + (std::is_floating_point_v<T> ? "a number" : "a non-negative integer") +
                           ", got '" + *raw + "'");
  }
  return *v;
}

template <class T>
std::vector<T> read_list(const ConfigDocument& doc, std::string_view sec, std::string_view key, std::string_view text) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (auto item : split(text, ',')) {
    const auto v = parse_number<T>(item);
    if (!v) doc.fail(sec, key, "bad list entry '" + std::string(item) + "'");
    out.push_back(*v);
  }
  return out;
}

inline std::string read_string(const ConfigDocument& doc, std::string_view sec, std::string_view key,
                               std::optional<std::string> fallback) {
  const auto raw = doc.get(sec, key);
  if (raw) return std::string(trim(*raw));
  if (fallback) return *fallback;
  doc.fail(sec, key, "required key is missing");
}

inline bool read_bool(const ConfigDocument& doc, std::string_view sec, std::string_view key, bool fallback) {
  const auto raw = doc.get(sec, key);
  if (!raw) return fallback;
  const auto v = trim(*raw);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  doc.fail(sec, key, "expected true or false, got '" + *raw + "'");
}

inline std::optional<RewardTier> parse_tier(std::string_view s) {
  for (auto t : {RewardTier::kStationary, RewardTier::kOblivious, RewardTier::kOnline, RewardTier::kPrescient,
                 RewardTier::kAdversarial}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

inline Policy parse_policy(const ConfigDocument& doc, const std::string& name, const std::string& text,
                           std::size_t arms) {
  const auto parts = split(text, ':');
  auto arm_of = [&](std::string_view s) {
    const auto a = parse_number<std::size_t>(s);
    if (!a || *a >= arms) doc.fail("policies", name, "arm '" + std::string(s) + "' not in 0.." + std::to_string(arms - 1));
    return *a;
  };
  if (parts[0] == "const" && parts.size() == 2) {
    const ActionIndex a = arm_of(parts[1]);
    return Policy(name, [a](const ContextPoint&) { return a; });
  }
  if (parts[0] == "threshold" && parts.size() == 4) {
    const auto cut = parse_number<double>(parts[1]);
    if (!cut || *cut < 0.0 || *cut > 1.0) doc.fail("policies", name, "threshold cut must lie in [0, 1]");
    const ActionIndex lo = arm_of(parts[2]);
    const ActionIndex hi = arm_of(parts[3]);
    const double c = *cut;
    return Policy(name, [c, lo, hi](const ContextPoint& x) { return x.coord < c ? lo : hi; });
  }
  if (parts[0] == "cells" && parts.size() == 3) {
    const auto m = parse_number<unsigned>(parts[1]);
    if (!m || *m > 20) doc.fail("policies", name, "cell exponent must be in 0..20");
    std::vector<ActionIndex> table;
    for (auto item : split(parts[2], ',')) table.push_back(arm_of(item));
    if (table.size() != (std::size_t{1} << *m)) {
      doc.fail("policies", name, "cells:" + std::to_string(*m) + " needs " + std::to_string(1u << *m) + " arms");
    }
    return dyadic_policy(*m, std::move(table), name);
  }
  doc.fail("policies", name, "expected const:A, threshold:CUT:BELOW:ABOVE or cells:M:A,B,...");
}

inline RewardTier natural_tier(const RewardSpec& r) {
  if (r.zeroing_scale) return RewardTier::kOnline;
  if (r.kind == "partition_bernoulli") return RewardTier::kOblivious;
  if (r.kind == "tit_for_tat") return RewardTier::kAdversarial;
  return RewardTier::kStationary;
}

// linear:STEP[:MAX] | explicit:U0,U1,... | paper:MAX
inline std::optional<PhaseSchedule> parse_schedule(std::string_view text, std::string* error) {
  const auto parts = split(text, ':');
  try {
    if (parts[0] == "linear" && (parts.size() == 2 || parts.size() == 3)) {
      const auto step = parse_number<std::uint64_t>(parts[1]);
      const auto cap = parts.size() == 3 ? parse_number<std::uint64_t>(parts[2]) : std::optional<std::uint64_t>(63);
      if (step && cap && *step > 0) return PhaseSchedule::linear(*step, *cap);
    } else if (parts[0] == "explicit" && parts.size() == 2) {
      std::vector<std::uint64_t> u;
      for (auto item : split(parts[1], ',')) {
        const auto v = parse_number<std::uint64_t>(item);
        if (!v) {
          *error = "bad exponent '" + std::string(item) + "'";
          return std::nullopt;
        }
        u.push_back(*v);
      }
      return PhaseSchedule::explicit_exponents(std::move(u));
    } else if (parts[0] == "paper" && parts.size() == 2) {
      const auto n = parse_number<unsigned>(parts[1]);
      if (n && *n <= 6) return PhaseSchedule::paper(*n);
    }
  } catch (const ContractError& e) {
    *error = e.what();
    return std::nullopt;
  }
  *error = "expected linear:STEP[:MAX], explicit:U0,U1,... or paper:N (N <= 6)";
  return std::nullopt;
}

}  // namespace detail

inline const std::set<std::string>& process_kinds() {
  static const std::set<std::string> k{"iid_uniform", "finite_support_iid", "deterministic_c2", "dup_block",
                                       "c2_not_c4",   "c4_not_c6",      "condition8_witness", "c5_scheduled"};
  return k;
}
inline const std::set<std::string>& reward_kinds() {
  static const std::set<std::string> k{"zero", "stationary_bernoulli", "partition_bernoulli", "tit_for_tat"};
  return k;
}
inline const std::set<std::string>& learner_kinds() {
  static const std::set<std::string> k{"fixed_arm", "uniform", "exp3ix", "per_instance_exp3ix",
                                       "expinf",    "per_instance_expinf", "c5"};
  return k;
}

inline ExperimentConfig parse_config(const ConfigDocument& doc) {
  using namespace detail;
  ExperimentConfig c;
  c.source = doc.name();

  // [experiment]
  const char* ex = "experiment";
  if (!doc.has_section(ex)) throw ConfigError(doc.name() + ": missing [experiment] section");
  c.horizon = read_number<Time>(doc, ex, "horizon", std::nullopt);
  if (c.horizon == 0) doc.fail(ex, "horizon", "horizon must be at least 1");
  if (c.horizon > (Time{1} << 40)) doc.fail(ex, "horizon", "horizon above 2^40 is not supported");
  c.replicas = read_number<std::uint64_t>(doc, ex, "replicas", 1);
  if (c.replicas == 0) doc.fail(ex, "replicas", "replicas must be at least 1");
  c.seed = read_number<std::uint64_t>(doc, ex, "seed", 0);
  c.arms = read_number<std::size_t>(doc, ex, "arms", 2);
  if (c.arms < 2 || c.arms > 1024) doc.fail(ex, "arms", "arms must be in 2..1024");
  c.output = read_string(doc, ex, "output", "ncb_out");
  if (c.output.empty()) doc.fail(ex, "output", "output directory must not be empty");
  c.write_trace = read_bool(doc, ex, "write_trace", true);
  c.delta = read_number<double>(doc, ex, "delta", 0.05);
  if (!(c.delta > 0.0 && c.delta < 1.0)) doc.fail(ex, "delta", "delta must lie in (0, 1)");
  const std::string cps = read_string(doc, ex, "checkpoints", "pow2");
  if (cps == "pow2") {
    c.checkpoints = pow2_checkpoints(c.horizon);
  } else {
    c.checkpoints = read_list<Time>(doc, ex, "checkpoints", cps);
    if (c.checkpoints.empty()) doc.fail(ex, "checkpoints", "empty checkpoint list");
    for (std::size_t j = 0; j < c.checkpoints.size(); ++j) {
      if (c.checkpoints[j] == 0 || c.checkpoints[j] > c.horizon) doc.fail(ex, "checkpoints", "checkpoint outside 1..horizon");
      if (j && c.checkpoints[j] <= c.checkpoints[j - 1]) doc.fail(ex, "checkpoints", "checkpoints must increase");
    }
  }

  // [process]
  const char* pr = "process";
  c.process.kind = read_string(doc, pr, "kind", "iid_uniform");
  if (!process_kinds().count(c.process.kind)) doc.fail(pr, "kind", "unknown process kind '" + c.process.kind + "'");
  if (c.process.kind == "finite_support_iid") {
    c.process.points = read_list<double>(doc, pr, "points", read_string(doc, pr, "points", std::nullopt));
    const auto w = doc.get(pr, "weights");
    c.process.weights = w ? read_list<double>(doc, pr, "weights", *w) : std::vector<double>(c.process.points.size(), 1.0);
    if (c.process.points.empty()) doc.fail(pr, "points", "finite support needs at least one point");
    if (c.process.weights.size() != c.process.points.size()) doc.fail(pr, "weights", "one weight per point");
    double z = 0.0;
    for (std::size_t j = 0; j < c.process.points.size(); ++j) {
      if (c.process.points[j] < 0.0 || c.process.points[j] > 1.0) doc.fail(pr, "points", "points must lie in [0, 1]");
      if (c.process.weights[j] < 0.0) doc.fail(pr, "weights", "weights must be non-negative");
      z += c.process.weights[j];
    }
    if (!(z > 0.0)) doc.fail(pr, "weights", "weights sum to zero");
  } else if (c.process.kind == "deterministic_c2") {
    c.process.schedule = read_string(doc, pr, "schedule", "sqrt");
    const auto parts = split(c.process.schedule, ':');
    const bool ok = (parts.size() == 1 && parts[0] == "sqrt") ||
                    (parts.size() == 2 && parts[0] == "capped" && parse_number<std::uint64_t>(parts[1]).value_or(0) > 0);
    if (!ok) doc.fail(pr, "schedule", "expected sqrt or capped:N with N >= 1");
  } else if (c.process.kind == "dup_block") {
    c.process.eps_exponent = read_number<unsigned>(doc, pr, "eps_exponent", 3u);
    if (c.process.eps_exponent == 0 || c.process.eps_exponent > 20) doc.fail(pr, "eps_exponent", "must be in 1..20");
    c.process.base_time = read_number<std::uint64_t>(doc, pr, "base_time", std::uint64_t{1000});
    if (c.process.base_time == 0) doc.fail(pr, "base_time", "must be at least 1");
    c.process.periods = read_number<unsigned>(doc, pr, "periods", 1u);
    if (c.process.periods == 0 || c.process.periods > 10) doc.fail(pr, "periods", "must be in 1..10");
  }

  // [policies]
  std::set<std::string> names;
  for (const auto& [name, text] : doc.entries("policies")) {
    if (!names.insert(name).second) doc.fail("policies", name, "duplicate policy name");
    PolicySpec ps;
    ps.name = name;
    ps.text = std::string(trim(text));
    ps.policy = parse_policy(doc, name, ps.text, c.arms);
    c.policies.push_back(std::move(ps));
  }

  // [reward]
  const char* rw = "reward";
  c.reward.kind = read_string(doc, rw, "kind", "stationary_bernoulli");
  if (!reward_kinds().count(c.reward.kind)) doc.fail(rw, "kind", "unknown reward kind '" + c.reward.kind + "'");
  c.reward.cell_exponent = read_number<unsigned>(doc, rw, "cell_exponent", c.reward.kind == "partition_bernoulli" ? 30u : 0u);
  if (c.reward.kind == "stationary_bernoulli") {
    if (c.reward.cell_exponent > 16) doc.fail(rw, "cell_exponent", "stationary tables support at most 2^16 cells");
    c.reward.means = read_list<double>(doc, rw, "means", read_string(doc, rw, "means", std::nullopt));
    const std::size_t want = (std::size_t{1} << c.reward.cell_exponent) * c.arms;
    if (c.reward.means.size() != want) {
      doc.fail(rw, "means", "expected " + std::to_string(want) + " means (2^cell_exponent cells x arms), got " +
                                std::to_string(c.reward.means.size()));
    }
    for (double m : c.reward.means) {
      if (m < 0.0 || m > 1.0) doc.fail(rw, "means", "means must lie in [0, 1]");
    }
  } else if (c.reward.kind == "partition_bernoulli") {
    if (c.reward.cell_exponent > 52) doc.fail(rw, "cell_exponent", "must be at most 52");
    c.reward.a1 = read_number<std::size_t>(doc, rw, "a1", std::size_t{0});
    c.reward.a2 = read_number<std::size_t>(doc, rw, "a2", std::size_t{1});
    if (c.reward.a1 >= c.arms || c.reward.a2 >= c.arms || c.reward.a1 == c.reward.a2) {
      doc.fail(rw, "a2", "a1 and a2 must be distinct arms within K");
    }
  }
  if (doc.get(rw, "zeroing_scale")) {
    c.reward.zeroing_scale = read_number<unsigned>(doc, rw, "zeroing_scale", std::nullopt);
    if (*c.reward.zeroing_scale > kMaxScale) doc.fail(rw, "zeroing_scale", "scale too large");
    if (c.reward.kind == "tit_for_tat") doc.fail(rw, "zeroing_scale", "cannot wrap an adversarial mechanism");
  }
  c.reward.tier = natural_tier(c.reward);
  if (const auto t = doc.get(rw, "tier")) {
    const auto declared = parse_tier(trim(*t));
    if (!declared) doc.fail(rw, "tier", "unknown tier '" + *t + "'");
    if (*declared != c.reward.tier) {
      doc.fail(rw, "tier", "declared " + to_string(*declared) + " but this mechanism is " + to_string(c.reward.tier));
    }
  }

  // [learner]
  const char* ln = "learner";
  c.learner.kind = read_string(doc, ln, "kind", "exp3ix");
  if (!learner_kinds().count(c.learner.kind)) doc.fail(ln, "kind", "unknown learner kind '" + c.learner.kind + "'");
  if (c.learner.kind == "fixed_arm") {
    c.learner.arm = read_number<std::size_t>(doc, ln, "arm", std::nullopt);
    if (c.learner.arm >= c.arms) doc.fail(ln, "arm", "arm out of range");
  }
  const bool needs_policies = c.learner.kind == "expinf" || c.learner.kind == "per_instance_expinf" || c.learner.kind == "c5";
  if (needs_policies) {
    const auto listed = doc.get(ln, "policies");
    if (listed) {
      for (auto item : split(*listed, ',')) {
        if (!names.count(std::string(item))) doc.fail(ln, "policies", "unknown policy '" + std::string(item) + "'");
        c.learner.policies.emplace_back(item);
      }
    } else {
      for (const auto& p : c.policies) c.learner.policies.push_back(p.name);
    }
    if (c.learner.policies.empty()) doc.fail(ln, "policies", "this learner needs a non-empty policy list");
  }
  if (c.learner.kind == "c5") {
    c.learner.schedule = read_string(doc, ln, "schedule", "linear:2");
    std::string err;
    if (!parse_schedule(c.learner.schedule, &err)) doc.fail(ln, "schedule", err);
  }

  doc.reject_unknown({"experiment", "process", "reward", "learner", "policies"});
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(ConfigDocument::from_file(path));
}

// ---------------------------------------------------------------------------
// Factories.

inline std::unique_ptr<ContextProcess> make_process(const ProcessSpec& spec, const RngStream& rng) {
  if (spec.kind == "iid_uniform") return std::make_unique<IidUniformProcess>(rng);
  if (spec.kind == "finite_support_iid") return std::make_unique<FiniteSupportProcess>(spec.points, spec.weights, rng);
  if (spec.kind == "deterministic_c2") {
    DistinctSchedule s = sqrt_schedule();
    if (spec.schedule.rfind("capped:", 0) == 0) s = capped_schedule(*detail::parse_number<std::uint64_t>(spec.schedule.substr(7)));
    return std::make_unique<DeterministicC2Process>(std::move(s), rng);
  }
  if (spec.kind == "dup_block") {
    DupBlockProcess::Params p;
    p.eps_exponent = spec.eps_exponent;
    p.base_time = spec.base_time;
    p.periods = spec.periods;
    return std::make_unique<DupBlockProcess>(p, rng);
  }
  if (spec.kind == "c2_not_c4") return std::make_unique<C2NotC4Process>(rng);
  if (spec.kind == "c4_not_c6") return std::make_unique<C4NotC6Process>(rng);
  if (spec.kind == "condition8_witness") return std::make_unique<Condition8WitnessProcess>(rng);
  if (spec.kind == "c5_scheduled") return std::make_unique<C5ScheduledProcess>(rng);
  throw ConfigError("unknown process kind " + spec.kind);
}

// The reward stream's "bits" child keys partition-Bernoulli cell bits.
inline std::unique_ptr<RewardMechanism> make_mechanism(const RewardSpec& spec, std::size_t arms,
                                                       const RngStream& reward_stream) {
  std::unique_ptr<RewardMechanism> base;
  if (spec.kind == "zero") {
    base = std::make_unique<ZeroReward>(arms);
  } else if (spec.kind == "stationary_bernoulli") {
    base = std::make_unique<StationaryBernoulli>(spec.cell_exponent, arms, spec.means);
  } else if (spec.kind == "partition_bernoulli") {
    PartitionBernoulli::Params p;
    p.m = spec.cell_exponent;
    p.arms = arms;
    p.a1 = spec.a1;
    p.a2 = spec.a2;
    base = std::make_unique<PartitionBernoulli>(p, reward_stream.derive("bits"));
  } else if (spec.kind == "tit_for_tat") {
    base = std::make_unique<TitForTat>(arms);
  } else {
    throw ConfigError("unknown reward kind " + spec.kind);
  }
  if (spec.zeroing_scale) return std::make_unique<OnlineDuplicateZeroing>(std::move(base), *spec.zeroing_scale);
  return base;
}

inline PolicyList resolve_policies(const ExperimentConfig& c, const std::vector<std::string>& names) {
  PolicyList out;
  for (const auto& n : names) {
    const auto it = std::find_if(c.policies.begin(), c.policies.end(), [&](const PolicySpec& p) { return p.name == n; });
    if (it == c.policies.end()) throw ConfigError("unknown policy " + n);
    out.push_back(it->policy);
  }
  return out;
}

inline std::unique_ptr<Learner> make_learner(const ExperimentConfig& c) {
  const auto& s = c.learner;
  if (s.kind == "fixed_arm") return std::make_unique<FixedArmLearner>(c.arms, s.arm);
  if (s.kind == "uniform") return std::make_unique<UniformRandomLearner>(c.arms);
  if (s.kind == "exp3ix") return std::make_unique<Exp3IxLearner>(c.arms);
  if (s.kind == "per_instance_exp3ix") return std::make_unique<PerInstanceExp3Ix>(c.arms);
  if (s.kind == "expinf") return std::make_unique<ExpInfOverPolicies>(resolve_policies(c, s.policies), c.arms);
  if (s.kind == "per_instance_expinf") return std::make_unique<PerInstanceExpInf>(resolve_policies(c, s.policies), c.arms);
  if (s.kind == "c5") {
    std::string err;
    auto sched = detail::parse_schedule(s.schedule, &err);
    if (!sched) throw ConfigError("bad schedule: " + err);
    return std::make_unique<C5Learner>(std::move(*sched), resolve_policies(c, s.policies), c.arms);
  }
  throw ConfigError("unknown learner kind " + s.kind);
}

// ---------------------------------------------------------------------------
// Artifacts.

inline const char* kTraceHeader =
    "replica,t,context_uid,context_coord,category,phase,stage,period,chosen_arm,reward,strategy_chosen_or_blank\n";

inline std::string trace_csv(std::uint64_t replica, const Trace& tr) {
  std::string out = kTraceHeader;
  out.reserve(out.size() + tr.horizon() * 48);
  auto field = [&out](std::int64_t v) {
    if (v != LearnerInternals::kNone) out += std::to_string(v);
    out += ',';
  };
  const std::string rep = std::to_string(replica) + ',';
  for (Time t = 1; t <= tr.horizon(); ++t) {
    const LearnerInternals in = tr.internals.empty() ? LearnerInternals{} : tr.internals[t - 1];
    out += rep;
    out += std::to_string(t);
    out += ',';
    out += std::to_string(tr.contexts[t - 1].uid);
    out += ',';
    out += format_double(tr.contexts[t - 1].coord);
    out += ',';
    field(in.category);
    field(in.phase);
    field(in.stage);
    field(in.period);
    out += std::to_string(tr.actions[t - 1]);
    out += ',';
    out += format_double(tr.rewards[t - 1]);
    out += ',';
    if (in.strategy != LearnerInternals::kNone) out += std::to_string(in.strategy);
    out += '\n';
  }
  return out;
}

inline std::string summary_csv(std::uint64_t replica, const std::vector<RegretReport>& reports,
                               const std::vector<Time>& checkpoints, const Trace& tr) {
  std::string out = "replica,checkpoint_T,cum_reward";
  for (const auto& r : reports) out += ",cum_regret_" + r.policy;
  out += '\n';
  std::vector<double> cum_reward;
  {
    long double s = 0.0L;
    std::size_t c = 0;
    for (Time t = 1; t <= tr.horizon() && c < checkpoints.size(); ++t) {
      s += tr.rewards[t - 1];
      while (c < checkpoints.size() && checkpoints[c] == t) {
        cum_reward.push_back(static_cast<double>(s));
        ++c;
      }
    }
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    out += std::to_string(replica) + ',' + std::to_string(checkpoints[c]) + ',' + format_double(cum_reward[c]);
    for (const auto& r : reports) out += ',' + format_double(r.cum_regret[c]);
    out += '\n';
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string replica_stem(std::uint64_t replica) {
  std::string s = std::to_string(replica);
  return "replica_" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

struct RunOptionsCli {
  unsigned jobs = 1;
  bool force_same_stream = false;  // every replica uses replica 0's streams (tests only)
};

struct RunResult {
  std::filesystem::path dir;
  std::uint64_t config_hash = 0;
  std::vector<std::string> files;
};

// Output root: NCB_OUTPUT_ROOT if set, else the given fallback.
inline std::filesystem::path output_root(const std::filesystem::path& fallback = ".") {
  if (const char* env = std::getenv(std::string(kOutputRootEnv).c_str()); env && *env) return env;
  return fallback;
}

inline nlohmann::ordered_json run_replica(const ExperimentConfig& c, std::uint64_t replica,
                                          const std::filesystem::path& dir, bool force_same_stream) {
  const ReplicaStreams s = ReplicaStreams::make(c.seed, force_same_stream ? 0 : replica);
  auto process = make_process(c.process, s.process);
  auto mech = make_mechanism(c.reward, c.arms, s.reward);
  auto learner = make_learner(c);
  const Trace tr = run_episode(*process, c.horizon, *mech, *learner, s, {.record_internals = true});

  std::vector<RegretReport> reports;
  for (const auto& p : c.policies) reports.push_back(regret_vs_policy(tr, p.policy, c.checkpoints));

  const std::string stem = replica_stem(replica);
  nlohmann::ordered_json j;
  j["replica"] = replica;
  j["config_hash"] = hex64(c.hash());
  j["stream_keys"] = {{"process", hex64(s.process.key())},
                      {"reward", hex64(s.reward.key())},
                      {"learner", hex64(s.learner.key())}};
  if (c.write_trace) {
    write_file(dir / (stem + "_trace.csv"), trace_csv(replica, tr));
    j["trace"] = stem + "_trace.csv";
  }
  write_file(dir / (stem + "_summary.csv"), summary_csv(replica, reports, c.checkpoints, tr));
  j["summary"] = stem + "_summary.csv";
  j["learner_state_hash"] = hex64(learner->state_hash());
  const auto cert = exp3ix_highprob_check(tr.reward_matrix, tr.actions, tr.arms, c.delta);
  j["arm_certificate"] = {{"regret", cert.regret}, {"bound", cert.bound}, {"holds", cert.holds}};
  nlohmann::ordered_json avg = nlohmann::ordered_json::object();
  for (const auto& r : reports) avg[r.policy] = r.average_regret();
  j["average_regret"] = avg;
  write_file(dir / (stem + ".json"), j.dump(2) + "\n");
  return j;
}

inline RunResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& root,
                                RunOptionsCli options = {}) {
  RunResult res;
  res.dir = root / c.output;
  res.config_hash = c.hash();
  std::error_code ec;
  std::filesystem::create_directories(res.dir, ec);
  if (ec || !std::filesystem::is_directory(res.dir)) {
    throw std::runtime_error("cannot create output directory " + res.dir.string() + ": " + ec.message());
  }

  std::vector<nlohmann::ordered_json> replicas(c.replicas);
  std::vector<std::exception_ptr> errors(c.replicas);
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(c.replicas)));
  auto worker = [&](unsigned w) {
    for (std::uint64_t r = w; r < c.replicas; r += jobs) {
      try {
        replicas[r] = run_replica(c, r, res.dir, options.force_same_stream);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  nlohmann::ordered_json m;
  m["software_version"] = std::string(kSoftwareVersion);
  m["config_source"] = std::filesystem::path(c.source).filename().string();
  m["config_hash"] = hex64(res.config_hash);
  m["config_canonical"] = c.canonical();
  m["seed"] = c.seed;
  m["seed_derivation"] = "root(seed).derive(component).derive(replica), component in {process, reward, learner}";
  m["horizon"] = c.horizon;
  m["replicas"] = c.replicas;
  m["checkpoints"] = c.checkpoints;
  m["policies"] = nlohmann::ordered_json::array();
  for (const auto& p : c.policies) m["policies"].push_back(p.name);
  m["replica_records"] = replicas;
  write_file(res.dir / "manifest.json", m.dump(2) + "\n");

  res.files.push_back("manifest.json");
  for (const auto& r : replicas) {
    if (r.contains("trace")) res.files.push_back(r["trace"]);
    res.files.push_back(r["summary"]);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Aggregation.

struct SeriesStat {
  std::string policy;
  std::vector<double> mean;   // mean over replicas of cum_regret / T
  std::vector<double> stdev;  // sample standard deviation; 0 with one replica
};

struct MergedReport {
  std::string config_hash;
  std::size_t replicas = 0;
  std::vector<Time> checkpoints;
  std::vector<SeriesStat> series;
  std::size_t certificates_holding = 0;

  [[nodiscard]] double certificate_fraction() const {
    return replicas == 0 ? 0.0 : static_cast<double>(certificates_holding) / static_cast<double>(replicas);
  }
};

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MergedReport summarize(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ArtifactError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> records;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("replica_", 0) == 0 && e.path().extension() == ".json") records.push_back(e.path());
  }
  std::sort(records.begin(), records.end());
  if (records.empty()) throw ArtifactError("no replica records in " + dir.string());

  MergedReport rep;
  std::vector<std::vector<std::vector<double>>> avg;  // [policy][checkpoint][replica]
  std::vector<std::string> header;
  for (const auto& path : records) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw ArtifactError(path.string() + ": " + e.what());
    }
    const std::string hash = j.value("config_hash", "");
    if (rep.replicas == 0) {
      rep.config_hash = hash;
    } else if (hash != rep.config_hash) {
      throw ArtifactError("mixed config hashes in " + dir.string() + ": " + rep.config_hash + " and " + hash);
    }
    if (j.contains("arm_certificate") && j["arm_certificate"].value("holds", false)) ++rep.certificates_holding;

    std::istringstream in(read_text(dir / j.value("summary", "")));
    std::string line;
    std::getline(in, line);
    std::vector<std::string> cols;
    for (auto c : detail::split(line, ',')) cols.emplace_back(c);
    if (cols.size() < 3 || cols[0] != "replica" || cols[1] != "checkpoint_T" || cols[2] != "cum_reward") {
      throw ArtifactError(path.string() + ": malformed summary header");
    }
    if (rep.replicas == 0) {
      header = cols;
      for (std::size_t k = 3; k < cols.size(); ++k) rep.series.push_back({cols[k].substr(std::string("cum_regret_").size()), {}, {}});
      avg.resize(rep.series.size());
    } else if (cols != header) {
      throw ArtifactError(path.string() + ": summary columns differ between replicas");
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = detail::split(line, ',');
      if (f.size() != cols.size()) throw ArtifactError(path.string() + ": ragged summary row");
      const auto t = detail::parse_number<Time>(f[1]);
      if (!t || *t == 0) throw ArtifactError(path.string() + ": bad checkpoint");
      if (rep.replicas == 0) {
        rep.checkpoints.push_back(*t);
      } else if (row >= rep.checkpoints.size() || rep.checkpoints[row] != *t) {
        throw ArtifactError(path.string() + ": checkpoints differ between replicas");
      }
      for (std::size_t k = 3; k < f.size(); ++k) {
        const auto v = detail::parse_number<double>(f[k]);
        if (!v) throw ArtifactError(path.string() + ": bad regret value");
        auto& cell = avg[k - 3];
        if (cell.size() <= row) cell.resize(row + 1);
        cell[row].push_back(*v / static_cast<double>(*t));
      }
      ++row;
    }
    if (row != rep.checkpoints.size()) throw ArtifactError(path.string() + ": checkpoints differ between replicas");
    ++rep.replicas;
  }

  for (std::size_t k = 0; k < rep.series.size(); ++k) {
    for (const auto& xs : avg[k]) {
      long double s = 0.0L;
      for (double x : xs) s += x;
      const long double mean = s / static_cast<long double>(xs.size());
      long double ss = 0.0L;
      for (double x : xs) ss += (x - mean) * (x - mean);
      rep.series[k].mean.push_back(static_cast<double>(mean));
      rep.series[k].stdev.push_back(xs.size() < 2 ? 0.0 : static_cast<double>(std::sqrt(ss / static_cast<long double>(xs.size() - 1))));
    }
  }
  return rep;
}

inline std::string merged_csv(const MergedReport& r) {
  std::string out = "checkpoint_T,replicas";
  for (const auto& s : r.series) out += ",mean_avg_regret_" + s.policy + ",stdev_avg_regret_" + s.policy;
  out += '\n';
  for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
    out += std::to_string(r.checkpoints[c]) + ',' + std::to_string(r.replicas);
    for (const auto& s : r.series) out += ',' + format_double(s.mean[c]) + ',' + format_double(s.stdev[c]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundled construction demos.

struct OccupancyRow {
  std::int64_t phase = 0;  // k for c2_not_c4, l for c4_not_c6
  unsigned cls = 0;        // class i (c2_not_c4) or p (c4_not_c6)
  unsigned scale = 0;      // first-appearance scale used by the statistic
  Time t = 0;              // annotated phase end
  double measure = 0.0;    // Lebesgue measure of the set
  double construction = 0.0;
  double iid = 0.0;
};

namespace detail {

// Statistic at each phase end, on the construction and on an i.i.d. uniform
// stream of the same length.
template <class SetFn>
std::vector<OccupancyRow> occupancy_rows(ContextProcess& proc, Time horizon, const RngStream& iid_stream,
                                         std::vector<OccupancyRow> rows, SetFn&& set_for) {
  const auto ctx = take(proc, horizon);
  IidUniformProcess iid(iid_stream);
  const auto base = take(iid, horizon);
  std::map<unsigned, std::pair<std::vector<char>, std::vector<char>>> selectors;
  for (auto& r : rows) {
    auto [it, inserted] = selectors.try_emplace(r.scale);
    if (inserted) {
      it->second.first = first_appearance_selector(ctx, r.scale);
      it->second.second = first_appearance_selector(base, r.scale);
    }
    const MeasurableSet set = set_for(r);
    r.measure = set.measure;
    r.construction = empirical_submeasure(ctx, it->second.first, set, {r.t, r.t});
    r.iid = empirical_submeasure(base, it->second.second, set, {r.t, r.t});
  }
  return rows;
}

}  // namespace detail

// Phases k = 1 .. max_k of the C2-but-not-C4 process; the set is the carrier
// A_i of k's class and the scale is floor(log2 i).
inline std::vector<OccupancyRow> c2_not_c4_occupancy(const ReplicaStreams& s, unsigned max_k = 7) {
  if (max_k == 0 || max_k > 16) throw ContractError("max_k must be in 1..16");
  std::vector<OccupancyRow> rows;
  for (unsigned k = 1; k <= max_k; ++k) {
    OccupancyRow r;
    r.phase = k;
    r.cls = residue_class(k);
    r.scale = static_cast<unsigned>(std::bit_width(r.cls)) - 1;
    r.t = 2 * factorial_grid(k) - 1;
    rows.push_back(r);
  }
  C2NotC4Process proc(s.process);
  return detail::occupancy_rows(proc, 2 * factorial_grid(max_k), s.process.derive("iid"), std::move(rows),
                                [](const OccupancyRow& r) { return carrier_set(r.cls); });
}

// Phases l = 1 .. max_l of the C4-but-not-C6 process; the set is the comb
// A_p(l) of l's class p and the scale is p.
inline std::vector<OccupancyRow> c4_not_c6_occupancy(const ReplicaStreams& s, unsigned max_l = 20) {
  if (max_l == 0 || max_l > 30) throw ContractError("max_l must be in 1..30");
  std::vector<OccupancyRow> rows;
  for (unsigned l = 1; l <= max_l; ++l) {
    OccupancyRow r;
    r.phase = l;
    r.cls = residue_class(l);
    r.scale = r.cls;
    r.t = (Time{1} << (l + 1)) - 1;
    rows.push_back(r);
  }
  C4NotC6Process proc(s.process);
  return detail::occupancy_rows(proc, Time{1} << (max_l + 1), s.process.derive("iid"), std::move(rows),
                                [](const OccupancyRow& r) { return comb_set(r.cls, static_cast<unsigned>(r.phase)); });
}

// Four dyadic cells with the optimal arm pattern {0, 1, 1, 0}; the policy list
// is [const0, const1, threshold(1/2), optimal, anti-optimal].
struct C5DemoReport {
  double average_regret = 0.0;  // vs. the optimal policy
  std::size_t optimal_strategy = 4;
  unsigned final_stage = 0;
  unsigned final_phase = 0;
  std::vector<double> final_probs;  // last logged P_0(l, k; .)
  [[nodiscard]] double optimal_mass() const {
    return optimal_strategy < final_probs.size() ? final_probs[optimal_strategy] : 0.0;
  }
};

inline PhaseSchedule c5_demo_schedule() { return PhaseSchedule::explicit_exponents({0, 2, 4, 6, 8, 10, 12, 14}); }

inline C5DemoReport c5_alg1_demo(const ReplicaStreams& s, Time horizon = 100000) {
  StationaryBernoulli mech(2, 2, {0.75, 0.25, 0.25, 0.75, 0.25, 0.75, 0.75, 0.25});
  PolicyList pl{constant_policy(0), constant_policy(1), threshold_policy(0.5, 0, 1),
                dyadic_policy(2, {0, 1, 1, 0}, "optimal"), dyadic_policy(2, {1, 0, 0, 1}, "anti")};
  C5Learner learner(c5_demo_schedule(), pl, 2);
  IidUniformProcess proc(s.process);
  const Trace tr = run_episode(proc, horizon, mech, learner, s);
  C5DemoReport rep;
  rep.average_regret = regret_vs_policy(tr, mech.optimal_policy()).average_regret();
  if (!learner.hedge_log().empty()) {
    const auto& last = learner.hedge_log().back();
    rep.final_stage = last.stage;
    rep.final_phase = last.phase;
    rep.final_probs = last.probs;
  }
  return rep;
}

inline TensionReport dup_block_demo(const ReplicaStreams& s, TensionConfig cfg = {}) {
  return tension_demo(
      cfg, [] { return std::make_unique<ExpInfOverPolicies>(PolicyList{constant_policy(0), constant_policy(1)}, 2); }, s);
}

}  // namespace ncb
