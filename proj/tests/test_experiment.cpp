#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ncb/experiment.hpp"

using namespace ncb;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"([experiment]
horizon = 300
replicas = 2
seed = 5
arms = 2
output = out

[process]
kind = deterministic_c2
schedule = sqrt

[reward]
kind = stationary_bernoulli
cell_exponent = 1
means = 0.2,0.8, 0.8,0.2

[learner]
kind = per_instance_exp3ix

[policies]
best = cells:1:1,0
zero = const:0
)";

ExperimentConfig parse(const std::string& text) { return parse_config(ConfigDocument::from_string(text, "t.ini")); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ncb_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(NCB_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("base config parses") {
  const auto c = parse(kBase);
  CHECK(c.horizon == 300);
  CHECK(c.replicas == 2);
  CHECK(c.policies.size() == 2);
  CHECK(c.checkpoints == pow2_checkpoints(300));
  CHECK(c.reward.tier == RewardTier::kStationary);
}

TEST_CASE("config errors carry file and line") {
  CHECK(config_error(replace(kBase, "horizon = 300", "horizon = 0")) == "t.ini:2: [experiment] horizon: horizon must be at least 1");
  CHECK(config_error(replace(kBase, "replicas = 2", "replicas = two")).rfind("t.ini:3: [experiment] replicas:", 0) == 0);
  CHECK(config_error(replace(kBase, "kind = per_instance_exp3ix", "kind = oracle")).find("t.ini:18:") == 0);
  CHECK(config_error(replace(kBase, "zero = const:0", "zero = const:2")).find("t.ini:22:") == 0);
  CHECK(config_error(replace(kBase, "arms = 2", "arms = 2\nbogus = 1")).find("t.ini:6: [experiment] bogus: unknown key") == 0);
  CHECK(config_error(replace(kBase, "seed = 5", "seed = 5\nseed = 6")).find("t.ini:5:") == 0);
  CHECK(config_error(std::string(kBase) + "[extra]\nx = 1\n").find("unknown section [extra]") != std::string::npos);
  CHECK(config_error(replace(kBase, "means = 0.2,0.8, 0.8,0.2", "means = 0.2,0.8")).find("expected 4 means") != std::string::npos);
}

TEST_CASE("cross references and tiers are checked") {
  auto c5 = replace(kBase, "kind = per_instance_exp3ix", "kind = c5\npolicies = best, missing");
  CHECK(config_error(c5).find("unknown policy 'missing'") != std::string::npos);
  auto tier = replace(kBase, "kind = stationary_bernoulli", "kind = stationary_bernoulli\ntier = oblivious");
  CHECK(config_error(tier).find("declared oblivious but this mechanism is stationary") != std::string::npos);
  auto sched = replace(kBase, "kind = per_instance_exp3ix", "kind = c5\nschedule = linear:0");
  CHECK_FALSE(config_error(sched).empty());
  auto zeroing = replace(kBase, "means = 0.2,0.8, 0.8,0.2", "means = 0.2,0.8, 0.8,0.2\nzeroing_scale = 2");
  CHECK(parse(zeroing).reward.tier == RewardTier::kOnline);
}

TEST_CASE("hash covers trajectory fields only") {
  const auto h = parse(kBase).hash();
  CHECK(parse(replace(kBase, "output = out", "output = elsewhere")).hash() == h);
  CHECK(parse(replace(kBase, "seed = 5", "seed = 6")).hash() != h);
  CHECK(parse(replace(kBase, "means = 0.2,0.8", "means = 0.25,0.8")).hash() != h);
  CHECK(parse(replace(kBase, "zero = const:0", "zero = const:1")).hash() != h);
  // same values, different spelling
  CHECK(parse(replace(kBase, "horizon = 300", "horizon=300")).hash() == h);
}

TEST_CASE("factories build every bundled kind") {
  for (const auto& kind : process_kinds()) {
    ProcessSpec p;
    p.kind = kind;
    p.points = {0.5};
    p.weights = {1.0};
    p.base_time = 4;
    auto proc = make_process(p, RngStream::root(1));
    CHECK(proc->kind() == kind);
    take(*proc, 100);
  }
  const auto c = parse(kBase);
  for (const auto& kind : learner_kinds()) {
    auto cc = c;
    cc.learner.kind = kind;
    cc.learner.policies = {"best", "zero"};
    CHECK(make_learner(cc)->arms() == 2);
  }
}

TEST_CASE("run writes the artifact set and reruns byte for byte") {
  const auto c = parse(kBase);
  const auto root_a = scratch("run_a");
  const auto root_b = scratch("run_b");
  const auto a = run_experiment(c, root_a);
  const auto b = run_experiment(c, root_b);
  REQUIRE(a.files.size() == 5);
  for (const auto& f : a.files) REQUIRE(slurp(a.dir / f) == slurp(b.dir / f));

  const auto trace = slurp(a.dir / "replica_0000_trace.csv");
  CHECK(trace.rfind(kTraceHeader, 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 301);
  const auto summary = slurp(a.dir / "replica_0001_summary.csv");
  CHECK(summary.rfind("replica,checkpoint_T,cum_reward,cum_regret_best,cum_regret_zero\n", 0) == 0);

  // replicas share the seed but get distinct stream keys
  const auto r0 = nlohmann::json::parse(slurp(a.dir / "replica_0000.json"));
  const auto r1 = nlohmann::json::parse(slurp(a.dir / "replica_0001.json"));
  CHECK(r0["stream_keys"]["learner"] != r1["stream_keys"]["learner"]);
  CHECK(slurp(a.dir / "replica_0000_trace.csv") != slurp(a.dir / "replica_0001_trace.csv").replace(0, 0, ""));

  const auto manifest = nlohmann::json::parse(slurp(a.dir / "manifest.json"));
  CHECK(manifest["config_hash"] == hex64(c.hash()));
  CHECK(manifest["software_version"] == std::string(kSoftwareVersion));
}

TEST_CASE("parallel replicas produce the same bytes") {
  auto c = parse(replace(kBase, "replicas = 2", "replicas = 5"));
  const auto seq = run_experiment(c, scratch("seq"));
  const auto par = run_experiment(c, scratch("par"), {.jobs = 3});
  for (const auto& f : seq.files) REQUIRE(slurp(seq.dir / f) == slurp(par.dir / f));
}

TEST_CASE("shortest round-trip float formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 0.75, 123456.789}) {
    const auto s = format_double(v);
    REQUIRE(detail::parse_number<double>(s).value() == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.75) == "0.75");
  CHECK(hex64(255) == "00000000000000ff");
}

TEST_CASE("summarize a single replica reproduces its own series") {
  const auto c = parse(replace(kBase, "replicas = 2", "replicas = 1"));
  const auto res = run_experiment(c, scratch("single"));
  const auto rep = summarize(res.dir);
  CHECK(rep.replicas == 1);
  std::istringstream in(slurp(res.dir / "replica_0000_summary.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto f = detail::split(line, ',');
    const double t = *detail::parse_number<double>(f[1]);
    REQUIRE(rep.series[0].mean[row] == *detail::parse_number<double>(f[3]) / t);
    REQUIRE(rep.series[0].stdev[row] == 0.0);
    ++row;
  }
  CHECK(row == rep.checkpoints.size());
}

TEST_CASE("forced identical replica streams give zero spread") {
  const auto c = parse(replace(kBase, "replicas = 2", "replicas = 4"));
  const auto res = run_experiment(c, scratch("same"), {.force_same_stream = true});
  const auto rep = summarize(res.dir);
  CHECK(rep.replicas == 4);
  for (const auto& s : rep.series) {
    for (double sd : s.stdev) REQUIRE(sd == 0.0);
  }
}

TEST_CASE("summarize rejects mixed config hashes") {
  const auto root = scratch("mixed");
  const auto a = run_experiment(parse(kBase), root);
  const auto other = parse(replace(kBase, "seed = 5", "seed = 9"));
  const auto b = run_experiment(other, scratch("mixed_other"));
  fs::copy_file(b.dir / "replica_0000.json", a.dir / "replica_0002.json");
  fs::copy_file(b.dir / "replica_0000_summary.csv", a.dir / "replica_0002_summary.csv");
  CHECK_THROWS_AS(summarize(a.dir), ArtifactError);
}

TEST_CASE("CLI verbs and exit codes") {
  const auto dir = scratch("cli");
  const auto cfg = dir / "c.ini";
  {
    std::ofstream(cfg) << kBase;
  }
  const auto bad = dir / "bad.ini";
  {
    std::ofstream(bad) << replace(kBase, "horizon = 300", "horizon = 0");
  }
  CHECK(run_cli("validate " + cfg.string()) == 0);
  CHECK(run_cli("validate " + bad.string()) == 2);
  CHECK(run_cli("run " + bad.string()) == 2);
  CHECK(run_cli("validate " + (dir / "missing.ini").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("demo nope") == 2);
  CHECK(run_cli("run " + cfg.string() + " --output-root " + (dir / "root").string()) == 0);
  CHECK(fs::exists(dir / "root" / "out" / "manifest.json"));
  CHECK(run_cli("summarize " + (dir / "root" / "out").string()) == 0);
  CHECK(fs::exists(dir / "root" / "out" / "summary_merged.csv"));
  CHECK(run_cli("summarize " + (dir / "nothing").string()) == 3);
  // an output root that is a regular file cannot hold the run
  {
    std::ofstream(dir / "blocker") << "x";
  }
  CHECK(run_cli("run " + cfg.string() + " --output-root " + (dir / "blocker").string()) == 3);
}

TEST_CASE("output root environment variable overrides the flag") {
  const auto dir = scratch("env");
  const auto cfg = dir / "c.ini";
  {
    std::ofstream(cfg) << kBase;
  }
  const std::string cmd = "env NCB_OUTPUT_ROOT=" + (dir / "from_env").string() + " " + NCB_CLI_PATH + " run " +
                          cfg.string() + " --output-root " + (dir / "from_flag").string() + " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "from_env" / "out" / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / "from_flag"));
}

TEST_CASE("bundled configs validate") {
  for (const auto* name : {"quickstart.ini", "exp3ix_certificate.ini"}) {
    CHECK_NOTHROW(load_config(fs::path(NCB_SOURCE_DIR) / "configs" / name));
  }
}

TEST_CASE("demo helpers on small instances") {
  const auto s = ReplicaStreams::make(1, 0);
  const auto rows = c2_not_c4_occupancy(s, 4);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].cls == 1);
  CHECK(rows[1].cls == 2);
  CHECK(rows[3].scale == 1);
  const auto comb = c4_not_c6_occupancy(s, 8);
  REQUIRE(comb.size() == 8);
  for (const auto& r : comb) CHECK(r.measure == std::ldexp(1.0, -static_cast<int>(r.cls)));
}
