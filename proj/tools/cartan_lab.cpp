#include "cartan/suites.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace cartan;

int main(int argc, char** argv) {
  CLI::App app{"cartan-lab: verification suites for parabolic automorphism dynamics and sprawls"};
  std::string config, out, csv;
  std::string suite;
  std::uint64_t seed = 0;
  int mesh = 0;
  bool exact = false;

  std::string names;
  for (auto& n : suite_names()) names += n + " | ";
  names += "all";

  app.add_option("--config", config, "scenario config (JSON); without it every parameter takes its default");
  app.add_option("--suite", suite, "suite to run: " + names + " (default: the config's suite, else all)");
  app.add_option("--out", out, "write the JSON report here (default: stdout)");
  auto* seed_opt = app.add_option("--seed", seed, "sampling seed (default: the config's seed, else 1)");
  app.add_flag("--exact", exact, "use exact rational arithmetic where a float path exists (holonomy lattice loops)");
  auto* mesh_opt = app.add_option("--mesh", mesh, "override the sprawl atlas and witness mesh size (1..1024)");
  app.add_option("--csv", csv, "also write the numeric series (orbit distances, arclengths, ...) as CSV");
  app.footer("CARTAN_LAB_THREADS caps worker threads. Exit status: 0 all verdicts pass, 1 some verdict fails, 2 invalid config, 3 other error.");
  CLI11_PARSE(app, argc, argv);

  RunOptions opt;
  if (!suite.empty()) opt.suite = suite;
  if (*seed_opt) opt.seed = seed;
  if (*mesh_opt) opt.mesh = mesh;
  opt.exact = exact;

  Json report;
  try {
    Json cfg = config.empty() ? Json::object() : load_config_file(config);
    report = run_suite(cfg, opt);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code == "ConfigInvalid" ? 2 : 3;
  }

  std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << out << "\n";
      return 3;
    }
    f << text;
  }
  if (!csv.empty()) {
    std::ofstream f(csv, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << csv << "\n";
      return 3;
    }
    f << report_csv(report);
  }
  for (auto& s : report["results"]) {
    auto& sm = s["summary"];
    std::cerr << s["suite"].get<std::string>() << ": " << sm["pass"] << " pass, " << sm["fail"] << " fail\n";
    for (auto& r : s["records"])
      if (r["verdict"] == "FAIL") std::cerr << "  FAIL " << r["id"].get<std::string>() << "\n";
  }
  return report_ok(report) ? 0 : 1;
}
