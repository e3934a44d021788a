// ncb: run, validate and summarize experiments; run the bundled demos.
//
// Exit codes: 0 ok, 2 config or usage error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ncb/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_occupancy(const std::vector<ncb::OccupancyRow>& rows, const char* phase_name) {
  std::printf("%6s %5s %5s %12s %10s %12s %10s\n", phase_name, "class", "scale", "phase_end", "measure", "construction",
              "iid");
  for (const auto& r : rows) {
    std::printf("%6lld %5u %5u %12llu %10.6f %12.6f %10.6f\n", static_cast<long long>(r.phase), r.cls, r.scale,
                static_cast<unsigned long long>(r.t), r.measure, r.construction, r.iid);
  }
}

int run_demo(const std::string& name, std::uint64_t seed, std::uint64_t replica) {
  const auto streams = ncb::ReplicaStreams::make(seed, replica);
  if (name == "dup-block") {
    const auto r = ncb::dup_block_demo(streams);
    std::printf("block size %llu, repetitions %llu, cell exponent %u, freeze at t=%llu\n",
                static_cast<unsigned long long>(r.block_size), static_cast<unsigned long long>(r.subphases),
                r.cell_exponent, static_cast<unsigned long long>(r.freeze_time));
    std::printf("hindsight mean on block cells   %.6f\n", r.hindsight_fresh_mean);
    std::printf("best fixed arm forfeit          %.6f\n", r.best_fixed_arm_forfeit);
    std::printf("EXPINF frozen replay regret     %.6f\n", r.learner_replay_regret);
    std::printf("per-instance frozen replay      %.6f (first pass %.6f)\n", r.per_instance_replay_regret,
                r.per_instance_first_pass_regret);
    std::printf("fresh a1 explorations per sub-phase (EXPINF):");
    for (auto a : r.learner_counts.fresh) std::printf(" %llu", static_cast<unsigned long long>(a));
    std::printf("\nexploration identity: %s / %s\n", r.learner_counts.identity_holds() ? "holds" : "FAILS",
                r.per_instance_counts.identity_holds() ? "holds" : "FAILS");
    return 0;
  }
  if (name == "c2-not-c4") {
    print_occupancy(ncb::c2_not_c4_occupancy(streams), "k");
    return 0;
  }
  if (name == "c4-not-c6") {
    print_occupancy(ncb::c4_not_c6_occupancy(streams), "l");
    return 0;
  }
  if (name == "c5-alg1") {
    const auto r = ncb::c5_alg1_demo(streams);
    std::printf("average regret vs optimal policy %.6f\n", r.average_regret);
    std::printf("final stage %u, phase %u, Hedge weights:", r.final_stage, r.final_phase);
    for (double p : r.final_probs) std::printf(" %.4f", p);
    std::printf("\nmass on the optimal strategy %.4f\n", r.optimal_mass());
    return 0;
  }
  std::cerr << "unknown demo '" << name << "' (dup-block, c2-not-c4, c4-not-c6, c5-alg1)\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation harness for non-stationary contextual bandits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string root;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Run every replica of an experiment config");
  run->add_option("config", config_path, "INI config file")->required();
  run->add_option("--output-root", root, "Output root (overridden by NCB_OUTPUT_ROOT)");
  run->add_option("--jobs", jobs, "Replicas run in parallel")->check(CLI::Range(1u, 256u));

  std::string dir;
  auto* summarize = app.add_subcommand("summarize", "Merge per-replica summaries of one run");
  summarize->add_option("dir", dir, "Run output directory")->required();

  auto* validate = app.add_subcommand("validate", "Check a config and print its hash");
  validate->add_option("config", config_path, "INI config file")->required();

  std::string demo_name;
  std::uint64_t seed = 1;
  std::uint64_t replica = 0;
  auto* demo = app.add_subcommand("demo", "Bundled constructions: dup-block, c2-not-c4, c4-not-c6, c5-alg1");
  demo->add_option("name", demo_name, "Demo name")->required();
  demo->add_option("--seed", seed, "Root seed");
  demo->add_option("--replica", replica, "Replica index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const auto cfg = ncb::load_config(config_path);
      const auto res = ncb::run_experiment(cfg, ncb::output_root(root.empty() ? "." : root), {.jobs = jobs});
      std::cout << "config hash " << ncb::hex64(res.config_hash) << '\n'
                << "wrote " << res.files.size() << " files to " << res.dir.string() << '\n';
    } else if (*summarize) {
      const auto rep = ncb::summarize(dir);
      const auto csv = ncb::merged_csv(rep);
      ncb::write_file(std::filesystem::path(dir) / "summary_merged.csv", csv);
      std::cout << "config hash " << rep.config_hash << ", " << rep.replicas << " replicas\n"
                << "arm certificate holds in " << rep.certificates_holding << " of " << rep.replicas << " replicas\n"
                << csv;
    } else if (*validate) {
      const auto cfg = ncb::load_config(config_path);
      std::cout << "ok " << ncb::hex64(cfg.hash()) << '\n';
    } else if (*demo) {
      return run_demo(demo_name, seed, replica);
    }
  } catch (const ncb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
