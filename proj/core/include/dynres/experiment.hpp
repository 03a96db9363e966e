#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynres/fidelity.hpp"
#include "dynres/fock_oracle.hpp"
#include "dynres/input_state.hpp"
#include "dynres/params.hpp"
#include "dynres/semiclassical.hpp"

namespace dynres {

/// Library version string baked in at build time.
const char* version();

/// Time axis and integrator settings. Times are in units of 2 pi / g.
struct RunSettings {
  double t_end = 0.0;            ///< > 0 overrides t_end_periods
  double t_end_periods = 1.2;    ///< in mechanical periods 2 pi / omega_m
  std::size_t samples = 2001;
  double sample_dt = 0.0;        ///< > 0 overrides samples
  double peak_dt = 0.0005;       ///< resolution of peak searches
  double rtol = 1e-14;
  double atol = 1e-16;
  std::string model = "semiclassical";  ///< or "adiabatic"

  /// t_end in the rate unit's time (1/g).
  double t_end_natural(const SystemParams& p) const;
  IntegratorControls controls(const SystemParams& p) const;
};

/// One parameter point with its input state.
struct Job {
  std::string name;
  SystemParams params;
  Thresholds thresholds;
  InputState state = Fock{1};
  RunSettings run;
};

/// One- or two-axis sweep. Axes: n_ratio, n, alpha (|alpha|), r.
struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  std::string axis2;             ///< empty for a single axis
  std::vector<double> values2;
};

struct HalMapSpec {
  double alpha_max = 20.0;
  std::size_t alpha_steps = 80;
  double r_max = 2.0;
  std::size_t r_steps = 40;
};

struct OracleSpec {
  std::vector<int> photons{4, 6, 8};
  double ratio_g_over_dw = 0.1;
  double ratio_wm_over_g = 0.05;
  double n_ratio = 3.0;
  double t_end = 10.0;           ///< 2 pi / g units
  std::size_t samples = 401;
  OracleControls controls;
};

/// Parsed configuration file. Unknown keys anywhere are rejected.
struct RunConfig {
  std::optional<Job> job;        ///< params + state + run
  std::optional<SweepSpec> sweep;
  std::optional<HalMapSpec> hal_map;
  std::optional<OracleSpec> oracle;
  std::string out_dir;
  std::string prefix = "run";
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

InputState state_from_json_text(const std::string& json_text);

/// Named presets: fig3, fig4, fig5a, fig5b, fig6, fig7, fig8.
struct Preset {
  std::string name;
  std::string command;           ///< subcommand the preset belongs to
  std::vector<Job> jobs;
  std::optional<SweepSpec> sweep;
  std::optional<HalMapSpec> hal_map;
};
Preset make_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Streaming maximum with three-point parabolic refinement.
class PeakTracker {
 public:
  void add(double t, double f);
  double value() const { return best_f_; }
  double time() const { return best_t_; }
  bool empty() const { return count_ == 0; }

 private:
  double t0_ = 0.0, f0_ = 0.0, t1_ = 0.0, f1_ = 0.0;
  std::size_t count_ = 0;
  double best_t_ = 0.0;
  double best_f_ = -1.0;
};

struct PeakFidelity {
  double f_fix = 0.0;
  double t_fix = 0.0;            ///< 1/g units
  double f_mov = 0.0;
  double t_mov = 0.0;
};

/// Peak fixed/moving fidelities of several states along one trajectory,
/// sampled every run.peak_dt.
std::vector<PeakFidelity> peak_fidelities(const SystemParams& p, const std::vector<InputState>& states,
                                          const RunSettings& run);

struct SweepRow {
  double value = 0.0;
  double value2 = 0.0;
  PeakFidelity peak;
  bool monotone_in_n = true;     ///< fig5b column: strictly decreasing in n at this n_ratio
};

/// Runs the sweep around `base`, one trajectory per distinct parameter point,
/// fanned out over `workers` and joined in input order.
std::vector<SweepRow> run_sweep(const Job& base, const SweepSpec& spec, unsigned workers);

struct HalCell {
  double dphi = 0.0;
  double abs_alpha = 0.0;
  double r = 0.0;
  double log10_hal = 0.0;
};
std::vector<HalCell> hal_map(const HalMapSpec& spec);

/// Files written by a command (relative to the output directory).
struct Outputs {
  std::vector<std::string> files;
};

Outputs cmd_simulate(const std::vector<Job>& jobs, const std::filesystem::path& out);
Outputs cmd_fidelity(const std::vector<Job>& jobs, const std::filesystem::path& out,
                     bool zoom_fixed = false);
Outputs cmd_sweep(const Job& base, const SweepSpec& spec, const std::filesystem::path& out,
                  const std::string& name, unsigned workers);
Outputs cmd_hal_map(const HalMapSpec& spec, const std::filesystem::path& out, const std::string& name);
Outputs cmd_oracle(const OracleSpec& spec, const std::filesystem::path& out, const std::string& name,
                   unsigned workers);
/// RegimeReport as JSON text.
std::string cmd_check(const Job& job);

/// Writes <out>/<name>_manifest.json recording the resolved jobs and outputs.
void write_manifest(const std::filesystem::path& out, const std::string& name,
                    const std::string& command, const std::vector<Job>& jobs,
                    const Outputs& outputs, const std::string& extra_json = "{}");

}  // namespace dynres
