#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robinlab/scenario.hpp"

namespace {

void print_report(const robinlab::ScenarioReport& report) {
  if (!report.config_ok) {
    std::printf("%-28s ERROR  %s\n", report.name.c_str(), report.error.c_str());
    return;
  }
  std::printf("%-28s %s  seed %llu  %.2fs\n", report.name.c_str(),
              report.all_passed() ? "pass" : "FAIL",
              static_cast<unsigned long long>(report.seed), report.runtime_seconds);
  for (const robinlab::CheckResult& c : report.checks)
    std::printf("  %-26s %s  measured %.6g  tolerance %.6g  %s\n", c.name.c_str(),
                c.passed ? "pass" : "FAIL", c.measured, c.tolerance, c.detail.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner for the Robin parabolic laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  robinlab::RunOptions opt;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--out", opt.out_dir, "Directory for CSV outputs")
      ->capture_default_str();
  app.add_option("--seed", seed, "Override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads", opt.threads, "Suite worker count")
      ->capture_default_str();

  std::string config_path, suite_dir;
  CLI::App* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", config_path, "Scenario config file")->required();
  CLI::App* suite = app.add_subcommand("suite", "Run every *.toml in a directory");
  suite->add_option("dir", suite_dir, "Directory of scenario configs")->required();
  CLI::App* list = app.add_subcommand("list-checks", "List registered checks");

  CLI11_PARSE(app, argc, argv);
  if (seed_set) opt.seed = seed;

  if (list->parsed()) {
    for (const std::string& name : robinlab::list_checks())
      std::printf("%s\n", name.c_str());
    return 0;
  }
  if (run->parsed()) {
    robinlab::ScenarioReport report = robinlab::run_scenario_file(config_path, opt);
    print_report(report);
    return report.all_passed() ? 0 : 1;
  }
  std::vector<robinlab::ScenarioReport> reports = robinlab::run_suite(suite_dir, opt);
  bool ok = true;
  int passed = 0;
  for (const robinlab::ScenarioReport& r : reports) {
    print_report(r);
    ok = ok && r.all_passed();
    passed += r.all_passed() ? 1 : 0;
  }
  std::printf("%d/%zu scenarios passed\n", passed, reports.size());
  return ok ? 0 : 1;
}
