#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "experiments.hpp"

namespace {

const char* kKinds =
    "capacity, dp-solve, info-gain, hmm, pm-sim, inverse-queue, inverse-trapdoor, "
    "inverse-gauss";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cclab: causal coding/decoding experiments"};
  std::string kind, config_path, out_dir = ".", base;
  std::int64_t seed = -1, trials = -1;
  app.add_option("kind", kind, std::string("experiment kind: ") + kKinds)->required();
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--seed", seed, "override the RNG seed");
  app.add_option("--trials", trials, "override the Monte Carlo trial count");
  app.add_option("--out", out_dir, "output directory for report.json and trajectories.csv");
  app.add_option("--base", base, "reporting log base: bits or nats");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cclab: cannot open config " << config_path << "\n";
      return 1;
    }
    cclab::Json config = cclab::Json::parse(in);
    // CLI flags override config fields
    if (seed >= 0) config["seed"] = static_cast<std::uint64_t>(seed);
    if (trials >= 0) config["trials"] = trials;
    if (!base.empty()) config["base"] = base;
    config = cclab::effective_config(kind, std::move(config));

    const cclab::ExperimentOutput out = cclab::run_experiment(kind, config);

    std::filesystem::create_directories(out_dir);
    {
      std::ofstream rep(std::filesystem::path(out_dir) / "report.json");
      rep << out.report.dump(2) << "\n";
    }
    if (!out.trajectories_csv.empty()) {
      std::ofstream csv(std::filesystem::path(out_dir) / "trajectories.csv");
      csv << out.trajectories_csv;
    }

    for (const auto& check : out.report.at("checks")) {
      std::cout << (check.at("pass").get<bool>() ? "[PASS] " : "[FAIL] ")
                << check.at("name").get<std::string>() << "\n";
    }
    std::cout << (out.pass ? "OK" : "CHECK FAILURE") << ": report written to "
              << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
    return out.pass ? 0 : 2;
  } catch (const cclab::Error& e) {
    std::cerr << "cclab: " << e.what() << "\n";
    return 1;
  } catch (const cclab::Json::exception& e) {
    std::cerr << "cclab: config error: " << e.what() << "\n";
    return 1;
  }
}
