// dynres: command-line front end for the three-mode transfer simulator.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "dynres/errors.hpp"
#include "dynres/experiment.hpp"

namespace fs = std::filesystem;
using namespace dynres;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kNumeric = 3;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  unsigned workers = 0;
};

struct Resolved {
  std::string name;
  RunConfig cfg;
  std::optional<Preset> preset;
  fs::path out;
  unsigned workers = 1;
};

Resolved resolve(const std::string& command, const Options& o) {
  Resolved r;
  if (!o.config.empty() && !o.preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
  if (!o.config.empty()) {
    r.cfg = load_config(o.config);
    r.name = r.cfg.prefix;
  }
  if (!o.preset.empty()) {
    Preset p = make_preset(o.preset);
    if (p.command != command)
      throw ConfigError("preset " + o.preset + " belongs to the '" + p.command + "' subcommand");
    r.name = p.name;
    r.preset = std::move(p);
  }
  if (r.name.empty()) r.name = r.cfg.prefix;
  if (!o.out.empty()) r.out = o.out;
  else if (!r.cfg.out_dir.empty()) r.out = r.cfg.out_dir;
  else r.out = "out";
  r.workers = o.workers > 0 ? o.workers : std::max(1u, std::thread::hardware_concurrency());
  return r;
}

std::vector<Job> jobs_of(const Resolved& r) {
  if (r.preset) return r.preset->jobs;
  if (!r.cfg.job) throw ConfigError("this command needs --preset or a config with a 'params' block");
  return {*r.cfg.job};
}

int run(const std::string& command, const Options& o) {
  const Resolved r = resolve(command, o);
  if (command == "simulate") {
    const auto jobs = jobs_of(r);
    const Outputs out = cmd_simulate(jobs, r.out);
    write_manifest(r.out, r.name, command, jobs, out);
  } else if (command == "fidelity") {
    const auto jobs = jobs_of(r);
    const Outputs out = cmd_fidelity(jobs, r.out, r.preset && r.preset->name == "fig6");
    write_manifest(r.out, r.name, command, jobs, out);
  } else if (command == "sweep") {
    const auto jobs = jobs_of(r);
    const auto spec = r.preset ? r.preset->sweep : r.cfg.sweep;
    if (!spec) throw ConfigError("sweep needs a 'sweep' block");
    const Outputs out = cmd_sweep(jobs.front(), *spec, r.out, r.name, r.workers);
    std::string extra = "{\"axis\":\"" + spec->axis + "\",\"axis2\":\"" + spec->axis2 + "\"}";
    write_manifest(r.out, r.name, command, jobs, out, extra);
  } else if (command == "hal-map") {
    HalMapSpec spec;
    if (r.preset && r.preset->hal_map) spec = *r.preset->hal_map;
    else if (r.cfg.hal_map) spec = *r.cfg.hal_map;
    const Outputs out = cmd_hal_map(spec, r.out, r.name);
    write_manifest(r.out, r.name, command, {}, out);
  } else if (command == "oracle") {
    const OracleSpec spec = r.cfg.oracle ? *r.cfg.oracle : OracleSpec{};
    const Outputs out = cmd_oracle(spec, r.out, r.name, r.workers);
    write_manifest(r.out, r.name, command, {}, out);
  } else if (command == "check") {
    const auto jobs = jobs_of(r);
    for (const auto& job : jobs) std::cout << cmd_check(job) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonon-induced dynamic resonance transfer simulator"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1, 1);

  Options opt;
  const char* commands[][2] = {
      {"simulate", "Integrate the semiclassical equations and write trajectory CSVs"},
      {"fidelity", "Write fixed/moving-target fidelity traces"},
      {"sweep", "Peak fidelity over a parameter grid"},
      {"hal-map", "High-amplitude metric over (|alpha|, r)"},
      {"oracle", "Compare the semiclassical model with exact truncated evolution"},
      {"check", "Print the regime report for a configuration"},
  };
  for (auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--preset", opt.preset, "Named preset")
        ->check(CLI::IsMember({"fig3", "fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8"}));
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--workers", opt.workers, "Worker threads (0 = hardware concurrency)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const ConfigError& e) {
    std::cerr << "dynres: configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericError& e) {
    std::cerr << "dynres: numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "dynres: " << e.what() << "\n";
    return kNumeric;
  }
}
