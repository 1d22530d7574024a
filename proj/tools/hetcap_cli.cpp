// hetcap command-line front end. Talks to the library through the C API only.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hetcap/hetcap.h"

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous capacity and perforated-domain experiments"};
  app.set_version_flag("--version", hc_version());

  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  long long seed = -1;
  int threads = 0;
  bool quiet = false;

  app.add_option("command", command, "capacity | phi | fhom | chom | claw | mu | perforate | verify")
      ->check(CLI::IsMember({"capacity", "phi", "fhom", "chom", "claw", "mu", "perforate", "verify"}));
  app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory for the CSV and JSON files");
  app.add_option("--seed", seed, "random seed (overrides the file)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads (overrides the file)")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "extra key=value setting, may repeat");
  app.add_flag("-q,--quiet", quiet, "no summary on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read " << config_path << '\n';
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  std::vector<std::string> overrides;
  if (!command.empty()) overrides.push_back("command=" + command);
  if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
  if (threads > 0) overrides.push_back("threads=" + std::to_string(threads));
  overrides.insert(overrides.end(), sets.begin(), sets.end());
  std::vector<const char*> ptrs;
  for (const auto& o : overrides) ptrs.push_back(o.c_str());

  hc_config* cfg = nullptr;
  if (hc_config_parse(text.c_str(), ptrs.data(), ptrs.size(), &cfg) != HC_OK) {
    std::cerr << "configuration rejected:\n" << hc_last_error() << '\n';
    return 2;
  }
  int exit_code = 0;
  const hc_status s = hc_run(cfg, out_dir.c_str(), quiet ? 0 : 1, &exit_code);
  hc_config_free(cfg);
  if (s != HC_OK) {
    std::cerr << hc_status_name(s) << ": " << hc_last_error() << '\n';
    return 1;
  }
  return exit_code;
}
