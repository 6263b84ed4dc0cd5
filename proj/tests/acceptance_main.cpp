// Runs the twelve acceptance criteria on the default model and prints one
// line per criterion. Exit status is nonzero if any criterion fails.
//
//   acceptance [--workers N] [--reps R] [--only ID ...] [--json PATH]

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gwpi/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  gwpi::AcceptanceOptions opt;
  std::string json_path;
  app.add_option("--workers", opt.workers)->check(CLI::Range(1, 1024));
  app.add_option("--reps", opt.reps);
  app.add_option("--seed", opt.seed);
  app.add_option("--only", opt.only);
  app.add_option("--json", json_path);
  CLI11_PARSE(app, argc, argv);

  const auto results = gwpi::run_acceptance(opt);
  std::size_t failed = 0;
  for (const auto& r : results) {
    fmt::print("{}\n", gwpi::format_result(r));
    if (!r.pass) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", results.size() - failed, results.size());
  if (!json_path.empty()) std::ofstream(json_path) << gwpi::to_json(results).dump(2) << "\n";
  return failed == 0 ? 0 : 1;
}
