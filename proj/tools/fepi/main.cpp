#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fepi/error.hpp"
#include "runner.hpp"

namespace {

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t c = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&c, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_all(std::istream& in) {
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fepi::cli;
  CLI::App app{"Free entropy power and restricted Minkowski sum experiments"};
  app.set_version_flag("--version", std::string(FEPI_VERSION));

  std::string config_path;
  std::string output_path;
  std::string format;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool list = false;
  app.add_option("-c,--config", config_path, "JSON config file ('-' reads stdin)");
  auto* seed_opt = app.add_option("-s,--seed", seed, "Seed for stochastic commands (overrides the config)");
  app.add_option("-o,--output", output_path, "Output file (stdout when omitted)");
  app.add_option("-f,--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("-t,--threads", threads, "Worker threads; results do not depend on this")
      ->check(CLI::PositiveNumber);
  app.add_flag("--list-commands", list, "Print the available commands");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& name : command_names()) std::cout << name << '\n';
    return kSuccess;
  }
  if (config_path.empty()) {
    std::cerr << "error: --config is required\n" << app.help();
    return kError;
  }

  std::string text;
  if (config_path == "-") {
    text = read_all(std::cin);
  } else {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read " << config_path << '\n';
      return kError;
    }
    text = read_all(in);
  }

  Overrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (!format.empty()) overrides.format = format;
  if (threads > 0) overrides.threads = threads;

  const auto start = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = run_text(text, overrides);
  } catch (const SchemaError& e) {
    std::cerr << config_path;
    if (e.line() > 0) std::cerr << ':' << e.line();
    std::cerr << ": schema error";
    if (!e.pointer().empty()) std::cerr << " at " << e.pointer();
    std::cerr << ": " << e.what() << '\n';
    return kError;
  } catch (const fepi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // The config's own "output" applies when no --output was given.
  if (output_path.empty()) {
    const json config = json::parse(text);
    if (config.contains("output") && config.at("output").is_string()) output_path = config.at("output").get<std::string>();
  }

  if (output_path.empty()) {
    std::cout << outcome.body;
  } else {
    std::ofstream out(output_path, std::ios::binary);
    out << outcome.body;
    if (!out) {
      std::cerr << "error: cannot write " << output_path << '\n';
      return kError;
    }
    // Run metadata that must not influence the result file.
    json meta;
    meta["version"] = FEPI_VERSION;
    meta["config"] = config_path;
    meta["threads"] = overrides.threads.value_or(1);
    meta["started"] = iso_time(start);
    meta["finished"] = iso_time(std::chrono::system_clock::now());
    meta["wall_seconds"] = wall;
    meta["exit_code"] = outcome.exit_code;
    std::ofstream(output_path + ".meta.json") << fepi::io::dump(meta) << '\n';
  }
  return outcome.exit_code;
}
