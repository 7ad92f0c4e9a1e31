// End-to-end checks of the cclab binary: exit codes, report schema, and
// byte-identical reruns for identical configurations.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
  if (!ok) ++failures;
}

int run(const std::string& args) {
  const std::string cmd = std::string(CCLAB_BIN) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_config(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "cclab_cli_tests";
  fs::remove_all(work);
  fs::create_directories(work);

  // capacity: closed-form value lands in the report
  {
    const fs::path cfg = work / "cap.json";
    write_config(cfg, R"({"channel": "bsc", "epsilon": 0.1})");
    const int rc = run("capacity --config " + cfg.string() + " --out " + (work / "cap").string());
    expect(rc == 0, "capacity exits 0");
    const auto report = nlohmann::json::parse(slurp(work / "cap" / "report.json"));
    expect(std::abs(report["results"]["capacity_bits"].get<double>() - 0.531004406410) < 1e-9,
           "capacity_bits matches 1 - H2(0.1)");
    expect(report["schema_version"].get<int>() == 1, "schema version present");
    expect(report.contains("config") && report.contains("tolerances"),
           "report embeds config and tolerances");
  }

  // determinism: identical config (including seed) gives byte-identical output
  {
    const fs::path cfg = work / "pm.json";
    write_config(cfg, R"({"epsilon": 0.11, "horizon": 10, "trials": 20000, "seed": 99,
                          "achievability_runs": 200, "csv_runs": 50})");
    const int rc1 = run("pm-sim --config " + cfg.string() + " --out " + (work / "a").string());
    const int rc2 = run("pm-sim --config " + cfg.string() + " --out " + (work / "b").string());
    expect(rc1 == 0 && rc2 == 0, "pm-sim exits 0 twice");
    expect(slurp(work / "a" / "report.json") == slurp(work / "b" / "report.json"),
           "reports are byte-identical");
    expect(slurp(work / "a" / "trajectories.csv") == slurp(work / "b" / "trajectories.csv"),
           "trajectories are byte-identical");
    expect(!slurp(work / "a" / "trajectories.csv").empty(), "trajectories were written");

    // a different seed changes the report
    const int rc3 =
        run("pm-sim --config " + cfg.string() + " --seed 100 --out " + (work / "c").string());
    expect(rc3 == 0, "seed override accepted");
    expect(slurp(work / "a" / "report.json") != slurp(work / "c" / "report.json"),
           "different seed changes the report");
  }

  // exit 1 on configuration errors
  {
    const fs::path cfg = work / "noseed.json";
    write_config(cfg, R"({"epsilon": 0.11, "horizon": 10, "trials": 20000})");
    expect(run("pm-sim --config " + cfg.string()) == 1, "missing seed exits 1");

    const fs::path bad = work / "bad.json";
    write_config(bad, R"({"lambda": 2.0, "mu": 1.0, "delta": 0.01})");
    expect(run("inverse-queue --config " + bad.string()) == 1,
           "infeasible model exits 1");
    expect(run("capacity --config " + (work / "missing.json").string()) == 1,
           "missing config exits 1");
  }

  // exit 2 on check failure: a coarse grid cannot meet the oracle gap
  {
    const fs::path cfg = work / "coarse.json";
    write_config(cfg, R"({"epsilon": 0.2, "horizon": 2, "resolution": 1})");
    expect(run("dp-solve --config " + cfg.string() + " --out " + (work / "coarse").string()) == 2,
           "failed check exits 2");
  }

  if (failures == 0) std::printf("all cli checks passed\n");
  return failures == 0 ? 0 : 1;
}
