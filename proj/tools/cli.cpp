#include "cli.hpp"

#include "bangdrift/decoupling.hpp"
#include "bangdrift/dressed.hpp"
#include "bangdrift/io.hpp"
#include "bangdrift/pmp.hpp"
#include "bangdrift/synthesis.hpp"
#include "bangdrift/tomography.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace bangdrift::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 20140101;

struct Setting {
  std::string key;
  Json value;
  std::string help;
};

struct Command {
  std::string name;
  std::string description;
  std::vector<Setting> settings;
  bool has_mode = false;
};

std::vector<Command> commands() {
  const Json seed = kDefaultSeed;
  return {
      {"synth",
       "Synthesize the time-optimal sequence for one rotation",
       {{"axis_deg", 0.0, "azimuth of an in-plane rotation axis in degrees"},
        {"axis", "", "rotation axis as x,y,z (overrides axis_deg)"},
        {"angle", "pi", "rotation angle, e.g. pi, pi/2, 1.2"},
        {"kappa", 4.0, "Omega_max / omega_1"},
        {"tol", 1e-9, "target infidelity"},
        {"max_segments", 3, "largest number of segments searched"},
        {"seeds_per_dim", 5, "multi-start grid points per duration"},
        {"seed", seed, "random seed"},
        {"output", "", "output path (stdout if empty)"}}},
      {"map",
       "Minimal durations for rotations about every in-plane axis",
       {{"angle", "pi", "rotation angle"},
        {"kappa", 4.0, "Omega_max / omega_1"},
        {"grid", 360, "number of axis angles (at least 8)"},
        {"tol", 1e-9, "target infidelity"},
        {"max_segments", 3, "largest number of segments searched"},
        {"seed", seed, "random seed"},
        {"shortest_output", "", "also write the shortest sequence as JSON"},
        {"output", "", "output path (stdout if empty)"}}},
      {"certify",
       "Search for a costate certificate of a bang/drift sequence",
       {{"sequence", "", "sequence JSON file"},
        {"chart", "auto", "auto, zyz or zxz"},
        {"seed", seed, "random seed for the sign search"},
        {"output", "", "output path (stdout if empty)"}}},
      {"simulate",
       "Bloch trajectories: harmonic | labframe | sequence",
       {{"kappa_drive", 1.5, "harmonic drive amplitude Omega_max / omega_1"},
        {"cycles", 3, "harmonic drive periods"},
        {"samples", 400, "samples per harmonic period"},
        {"sequence", "", "sequence JSON file (labframe, sequence)"},
        {"omega0", 500.0, "dressing frequency omega_0 / omega_1 (labframe)"},
        {"dressing", true, "dressing field on (labframe)"},
        {"dt", 0.0, "integration step (0 picks a default)"},
        {"stride", 1, "write every stride-th sample"},
        {"output", "", "output path (stdout if empty)"}},
       true},
      {"tomo",
       "Process tomography of a sequence, or a fidelity sweep over axes",
       {{"sequence", "", "sequence JSON file"},
        {"eps", 0.0, "fractional amplitude error"},
        {"detuning", 0.0, "precession detuning"},
        {"depol", 0.0, "depolarizing probability after the gate"},
        {"shots", 0, "shots per setting (0 for exact expectation values)"},
        {"seed", seed, "random seed"},
        {"sweep", false, "sweep in-plane axes instead of reading a sequence"},
        {"angle", "pi/2", "sweep rotation angle"},
        {"kappa", 4.0, "sweep Omega_max / omega_1"},
        {"grid", 36, "sweep axis count"},
        {"output", "", "output path (stdout if empty)"}}},
      {"dd",
       "Coherence under CPMG / XY4 / XY8 decoupling",
       {{"kind", "XY8", "CPMG, XY4 or XY8"},
        {"N", Json::array({1, 2, 4}), "comma-separated repetition counts"},
        {"tau", "4pi", "slot length"},
        {"kappa", 4.0, "Omega_max / omega_1"},
        {"eps", 0.0, "fractional amplitude error"},
        {"detuning", 0.0, "mean precession detuning"},
        {"sigma", 0.0, "standard deviation of the detuning per realization"},
        {"depol", 0.0, "depolarizing probability per pulse"},
        {"realizations", 100, "noise realizations per point"},
        {"seed", seed, "random seed"},
        {"output", "", "output path (stdout if empty)"}}},
  };
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view text) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

long long parse_integer(std::string_view text) {
  const std::string s = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not an integer: '" + s + "'");
  return v;
}

bool parse_bool(std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw UsageError("not a boolean: '" + s + "'");
}

// Converts a value to the JSON type of the default.
Json coerce(const Setting& setting, const Json& v) {
  const Json& d = setting.value;
  auto fail = [&] { return UsageError("bad value for " + setting.key + ": " + v.dump()); };
  if (d.is_boolean()) {
    if (v.is_boolean()) return v;
    if (v.is_string()) return parse_bool(v.get<std::string>());
    throw fail();
  }
  if (d.is_number_integer() || d.is_number_unsigned()) {
    if (v.is_number_integer() || v.is_number_unsigned()) return v;
    if (v.is_string()) return parse_integer(v.get<std::string>());
    throw fail();
  }
  if (d.is_number_float()) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_real(v.get<std::string>());
    throw fail();
  }
  if (d.is_array()) {
    if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_number_integer()) throw fail();
      }
      return v;
    }
    if (v.is_string()) {
      Json arr = Json::array();
      std::stringstream ss(v.get<std::string>());
      std::string item;
      while (std::getline(ss, item, ',')) arr.push_back(parse_integer(item));
      if (arr.empty()) throw fail();
      return arr;
    }
    throw fail();
  }
  if (v.is_string()) return v;
  if (v.is_number()) return format_number(v.get<double>());
  throw fail();
}

// Accepts a JSON object of settings, a JSON output with an embedded
// "config" object, or a CSV output with a "# config: {...}" line.
Json load_config(const std::string& path) {
  const std::string text = read_file(path);
  const std::string marker = "# config: ";
  if (auto pos = text.find(marker); pos != std::string::npos && text.find('{') != 0) {
    const auto end = text.find('\n', pos);
    try {
      return Json::parse(text.substr(pos + marker.size(), end - pos - marker.size()));
    } catch (const Json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": config must be a JSON object");
  if (j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

class Resolved {
 public:
  explicit Resolved(Json values) : values_(std::move(values)) {}
  const Json& json() const { return values_; }
  double real(const std::string& k) const { return values_.at(k).get<double>(); }
  long long integer(const std::string& k) const { return values_.at(k).get<long long>(); }
  bool flag(const std::string& k) const { return values_.at(k).get<bool>(); }
  std::string str(const std::string& k) const { return values_.at(k).get<std::string>(); }
  double angle(const std::string& k) const { return parse_angle(str(k)); }
  std::uint64_t seed() const { return values_.at("seed").get<std::uint64_t>(); }

 private:
  Json values_;
};

void emit(const Resolved& cfg, const std::string& content, std::ostream& out) {
  const std::string path = cfg.str("output");
  if (path.empty()) {
    out << content;
    return;
  }
  try {
    write_file_atomic(path, content);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

std::string json_text(Json j, const Resolved& cfg) {
  j["config"] = cfg.json();
  return j.dump(2) + "\n";
}

void add_config_comments(CsvTable& table, const Resolved& cfg) {
  table.add_comment("command: " + cfg.json().at("command").get<std::string>());
  table.add_comment("config: " + cfg.json().dump());
}

PulseSequence load_sequence(const Resolved& cfg) {
  const std::string path = cfg.str("sequence");
  if (path.empty()) throw UsageError("--sequence is required");
  return sequence_from_json(read_json_file(path));
}

Json axis_json(const RotationAxisAngle& r) {
  return {{"axis", {r.axis.x(), r.axis.y(), r.axis.z()}}, {"angle", r.angle}};
}

SynthesisOptions synthesis_options(const Resolved& cfg) {
  SynthesisOptions o;
  o.tol = cfg.real("tol");
  o.seed = cfg.seed();
  if (cfg.json().contains("seeds_per_dim")) o.grid_points_per_dim = static_cast<int>(cfg.integer("seeds_per_dim"));
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  return o;
}

int cmd_synth(const Resolved& cfg, std::ostream& out) {
  const double angle = cfg.angle("angle");
  RotationAxisAngle target;
  if (const std::string axis = cfg.str("axis"); !axis.empty()) {
    std::vector<double> c;
    std::stringstream ss(axis);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(parse_real(item));
    if (c.size() != 3) throw UsageError("--axis needs three comma-separated components");
    target = RotationAxisAngle(Vec3(c[0], c[1], c[2]), angle);
  } else {
    target = RotationAxisAngle::in_plane(cfg.real("axis_deg") * kPi / 180.0, angle);
  }
  const double kappa = cfg.real("kappa");
  if (!(kappa > 0.0)) throw UsageError("--kappa must be positive");
  const auto max_n = cfg.integer("max_segments");
  if (max_n < 0) throw UsageError("--max-segments must be non-negative");
  const auto result = synthesize(target, kappa, static_cast<int>(max_n), synthesis_options(cfg));
  Json j = synthesis_to_json(result);
  j["target"] = axis_json(target);
  emit(cfg, json_text(j, cfg), out);
  return kExitOk;
}

std::string joined_durations(const PulseSequence& seq) {
  std::string s;
  for (const auto& seg : seq.segments()) s += (s.empty() ? "" : ";") + format_number(seg.duration);
  return s;
}

std::string csv_pattern(const Pattern& p) {
  std::string s = p.to_string();
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

int cmd_map(const Resolved& cfg, std::ostream& out) {
  const auto grid = cfg.integer("grid");
  if (grid < 8) throw UsageError("--grid must be at least 8");
  const double kappa = cfg.real("kappa");
  if (!(kappa > 0.0)) throw UsageError("--kappa must be positive");
  PulseMapOptions options;
  options.synthesis = synthesis_options(cfg);
  options.max_n = static_cast<int>(cfg.integer("max_segments"));
  const auto map = pulse_map(cfg.angle("angle"), kappa, static_cast<int>(grid), cfg.real("tol"), options);

  CsvTable table({"axis_angle_rad", "axis_angle_deg", "total_duration", "infidelity", "n_segments", "pattern",
                  "durations", "source"});
  add_config_comments(table, cfg);
  auto add = [&](const PulseMapEntry& e, const char* source) {
    table.add_row({format_number(e.axis_angle), format_number(e.axis_angle * 180.0 / kPi),
                   format_number(e.result.total_duration), format_number(e.result.infidelity),
                   std::to_string(e.result.sequence.size()), csv_pattern(e.result.pattern),
                   joined_durations(e.result.sequence), source});
  };
  for (const auto& e : map.entries) add(e, "grid");
  for (const auto& e : map.refined_minima) add(e, "refined");
  if (const std::string path = cfg.str("shortest_output"); !path.empty()) {
    try {
      write_file_atomic(path, json_text(synthesis_to_json(map.shortest().result), cfg));
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }
  emit(cfg, table.str(), out);
  return kExitOk;
}

int cmd_certify(const Resolved& cfg, std::ostream& out, std::ostream& err) {
  const PulseSequence seq = load_sequence(cfg);
  const std::string chart = cfg.str("chart");
  std::vector<EulerChart> charts;
  if (chart == "auto") {
    charts = {EulerChart::ZYZ, EulerChart::ZXZ};
  } else if (chart == "zyz" || chart == "ZYZ") {
    charts = {EulerChart::ZYZ};
  } else if (chart == "zxz" || chart == "ZXZ") {
    charts = {EulerChart::ZXZ};
  } else {
    throw UsageError("--chart must be auto, zyz or zxz");
  }
  std::string last_error = "no costate satisfies the necessary conditions";
  for (auto c : charts) {
    CertificateOptions options;
    options.chart = c;
    options.seed = cfg.seed();
    try {
      if (auto cert = find_certificate(seq, options)) {
        Json j = certificate_to_json(*cert);
        j["sequence"] = sequence_to_json(seq);
        emit(cfg, json_text(j, cfg), out);
        return kExitOk;
      }
    } catch (const ChartSingularity& e) {
      last_error = e.what();
    }
  }
  err << "certify: " << last_error << "\n";
  return kExitNumerical;
}

void add_sample(CsvTable& table, const BlochSample& s, const char* frame) {
  table.add_row({format_number(s.t), format_number(s.v.x), format_number(s.v.y), format_number(s.v.z), frame});
}

int cmd_simulate(const Resolved& cfg, const std::string& mode, std::ostream& out, std::ostream& err) {
  const auto stride = cfg.integer("stride");
  if (stride < 1) throw UsageError("--stride must be at least 1");
  if (mode == "harmonic") {
    const double kd = cfg.real("kappa_drive");
    const auto traj = harmonic_drive_trajectory(kd, static_cast<int>(cfg.integer("cycles")),
                                                static_cast<int>(cfg.integer("samples")));
    CsvTable table({"t", "x", "y", "z", "frame", "rwa_z"});
    add_config_comments(table, cfg);
    for (std::size_t i = 0; i < traj.samples.size(); i += static_cast<std::size_t>(stride)) {
      const auto& s = traj.samples[i];
      table.add_row({format_number(s.t), format_number(s.v.x), format_number(s.v.y), format_number(s.v.z), "dressed",
                     format_number(rwa_reference(kd, s.t))});
    }
    emit(cfg, table.str(), out);
    return kExitOk;
  }
  if (mode == "sequence") {
    const PulseSequence seq = load_sequence(cfg);
    const Waveform control = Waveform::piecewise(seq);
    const double dt = cfg.real("dt") > 0.0 ? cfg.real("dt") : std::min(1e-3, max_dressed_step(control));
    const auto traj = dressed_frame_evolve(control, seq.total_duration(), dt, BlochVector(0.0, 0.0, 1.0));
    CsvTable table({"t", "x", "y", "z", "frame"});
    add_config_comments(table, cfg);
    for (std::size_t i = 0; i < traj.samples.size(); i += static_cast<std::size_t>(stride)) {
      add_sample(table, traj.samples[i], "dressed");
    }
    emit(cfg, table.str(), out);
    return kExitOk;
  }
  if (mode == "labframe") {
    const PulseSequence seq = load_sequence(cfg);
    LabFrameParams params;
    params.omega0_ratio = cfg.real("omega0");
    if (!(params.omega0_ratio > 0.0)) throw UsageError("--omega0 must be positive");
    params.kappa = seq.kappa();
    params.envelope = lab_envelope(seq);
    params.dressing_on = cfg.flag("dressing");
    if (rwa_warning(params)) {
      err << "warning: omega0 / omega_1 = " << params.omega0_ratio << " is below " << kRwaWarningRatio
          << " or kappa is comparable to omega0; the dressed reduction is not accurate\n";
    }
    const double dt = cfg.real("dt") > 0.0 ? cfg.real("dt") : 2.0 * kPi / (200.0 * params.omega0_ratio);
    const auto lab = lab_frame_evolve(params, seq.total_duration(), dt);
    const auto dressed = lab_to_dressed(lab, params.omega0_ratio);
    CsvTable table({"t", "x", "y", "z", "frame"});
    add_config_comments(table, cfg);
    for (std::size_t i = 0; i < lab.samples.size(); i += static_cast<std::size_t>(stride)) {
      add_sample(table, lab.samples[i], "lab");
      add_sample(table, dressed.samples[i], "dressed");
    }
    emit(cfg, table.str(), out);
    return kExitOk;
  }
  throw UsageError("simulate mode must be harmonic, labframe or sequence");
}

NoiseModel noise_from(const Resolved& cfg) {
  NoiseModel n;
  n.amplitude_error = cfg.real("eps");
  n.detuning = cfg.real("detuning");
  n.depolarizing_p = cfg.real("depol");
  if (cfg.json().contains("sigma")) n.detuning_sigma = cfg.real("sigma");
  try {
    n.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return n;
}

int cmd_tomo(const Resolved& cfg, std::ostream& out) {
  const NoiseModel noise = noise_from(cfg);
  QptOptions options;
  options.seed = cfg.seed();
  const auto shots = cfg.integer("shots");
  if (shots < 0) throw UsageError("--shots must be non-negative");
  if (shots > 0) {
    if (shots < 100) throw UsageError("--shots must be 0 (exact) or at least 100");
    options.shots = static_cast<std::uint64_t>(shots);
  }
  if (cfg.flag("sweep")) {
    const auto grid = cfg.integer("grid");
    if (grid < 1) throw UsageError("--grid must be positive");
    std::vector<double> axes;
    for (long long i = 0; i < grid; ++i) axes.push_back(2.0 * kPi * static_cast<double>(i) / static_cast<double>(grid));
    const auto points = fidelity_sweep(cfg.angle("angle"), cfg.real("kappa"), axes, noise, options);
    CsvTable table({"axis_angle_deg", "F_chi", "F_g"});
    add_config_comments(table, cfg);
    for (const auto& p : points) {
      table.add_row(std::vector<double>{p.axis_angle * 180.0 / kPi, p.process_fidelity, p.gate_fidelity});
    }
    emit(cfg, table.str(), out);
    return kExitOk;
  }
  const PulseSequence seq = load_sequence(cfg);
  const auto target = axis_angle_of(sequence_propagator(seq));
  const auto qpt = simulate_qpt(seq, noise, options);
  const double f = process_fidelity(qpt.chi, chi_ideal(target));
  Json j;
  j["chi"] = chi_to_json(qpt.chi);
  j["projected"] = qpt.projected;
  j["min_eigenvalue_before"] = qpt.min_eigenvalue_before;
  j["target"] = axis_json(target);
  j["F_chi"] = f;
  j["F_g"] = average_gate_fidelity(f);
  emit(cfg, json_text(j, cfg), out);
  return kExitOk;
}

int cmd_dd(const Resolved& cfg, std::ostream& out) {
  DDKind kind;
  try {
    kind = dd_kind_from_string(cfg.str("kind"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<int> reps;
  for (const auto& n : cfg.json().at("N")) reps.push_back(n.get<int>());
  for (int n : reps) {
    if (n < 0) throw UsageError("--N values must be non-negative");
  }
  for (std::size_t i = 1; i < reps.size(); ++i) {
    if (reps[i] <= reps[i - 1]) throw UsageError("--N values must be strictly increasing");
  }
  const auto realizations = cfg.integer("realizations");
  if (realizations < 1) throw UsageError("--realizations must be at least 1");
  const double kappa = cfg.real("kappa");
  if (!(kappa > 0.0)) throw UsageError("--kappa must be positive");
  const NoiseModel noise = noise_from(cfg);
  const double tau = cfg.angle("tau");

  const DDPulses pulses = DDPulses::synthesize(kappa);
  const double longest = std::max(pulses.pi_x.total_duration(), pulses.pi_y.total_duration());
  if (tau < longest) throw UsageError("--tau is shorter than the pi pulse (" + format_number(longest) + ")");
  const auto curve = simulate_coherence(kind, reps, tau, pulses, noise, static_cast<int>(realizations), cfg.seed());

  CsvTable table({"kind", "N_total", "coherence_mean", "coherence_stderr", "coherence_median", "repetitions"});
  add_config_comments(table, cfg);
  try {
    table.add_comment("fitted_N0: " + format_number(fit_decay(curve)));
  } catch (const FitError& e) {
    table.add_comment(std::string("fitted_N0: none (") + e.what() + ")");
  }
  for (const auto& p : curve.points) {
    table.add_row({std::string(to_string(kind)), std::to_string(p.n_pulses), format_number(p.mean),
                   format_number(p.standard_error), format_number(p.median), std::to_string(p.repetitions)});
  }
  emit(cfg, table.str(), out);
  return kExitOk;
}

}  // namespace

double parse_angle(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s += c;
  }
  if (s.empty()) throw UsageError("empty angle");
  const auto pi = s.find("pi");
  if (pi == std::string::npos) return parse_real(s);
  std::string coef = s.substr(0, pi);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double value = kPi;
  if (coef == "-") {
    value = -kPi;
  } else if (!coef.empty() && coef != "+") {
    value = parse_real(coef) * kPi;
  }
  const std::string rest = s.substr(pi + 2);
  if (rest.empty()) return value;
  if (rest[0] != '/' || rest.size() < 2) throw UsageError("cannot parse angle '" + std::string(text) + "'");
  const double den = parse_real(rest.substr(1));
  if (den == 0.0) throw UsageError("division by zero in angle '" + std::string(text) + "'");
  return value / den;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-optimal bang/drift control of a dressed qubit"};
  app.require_subcommand(1);
  const auto cmds = commands();
  std::map<std::string, std::map<std::string, std::optional<std::string>>> raw;
  std::map<std::string, bool> flags;
  std::map<std::string, std::string> config_path;
  std::string mode;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.description);
    if (c.has_mode) sub->add_option("mode", mode, "harmonic, labframe or sequence")->required();
    sub->add_option("--config", config_path[c.name], "JSON config (or a previous output) overriding defaults");
    for (const auto& s : c.settings) {
      const std::string name = (s.key == "output" ? "-o,--" : "--") + dashed(s.key);
      const std::string id = c.name + "." + s.key;
      if (s.value.is_boolean() && !s.value.get<bool>()) {
        sub->add_flag(name, flags[id], s.help);
      } else {
        sub->add_option(name, raw[c.name][s.key], s.help);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  const Command* cmd = nullptr;
  for (const auto& c : cmds) {
    if (app.got_subcommand(c.name)) cmd = &c;
  }

  try {
    Json values = Json::object();
    values["command"] = cmd->name;
    if (cmd->has_mode) values["mode"] = mode;
    for (const auto& s : cmd->settings) values[s.key] = s.value;
    auto find = [&](const std::string& key) -> const Setting* {
      for (const auto& s : cmd->settings) {
        if (s.key == key) return &s;
      }
      return nullptr;
    };

    if (const auto& path = config_path[cmd->name]; !path.empty()) {
      const Json cfg = load_config(path);
      for (const auto& [key, v] : cfg.items()) {
        if (key == "command") {
          if (v != cmd->name) throw UsageError("config was written for '" + v.dump() + "'");
          continue;
        }
        if (key == "mode" && cmd->has_mode) continue;
        const Setting* s = find(key);
        if (!s) throw UsageError("unknown config key '" + key + "'");
        values[key] = coerce(*s, v);
      }
    }
    if (const char* env = std::getenv("PULSE_SEED"); env && find("seed")) {
      values["seed"] = coerce(*find("seed"), Json(std::string(env)));
    }
    for (const auto& s : cmd->settings) {
      const std::string id = cmd->name + "." + s.key;
      if (s.value.is_boolean() && !s.value.get<bool>()) {
        if (flags[id]) values[s.key] = true;
        continue;
      }
      if (const auto& r = raw[cmd->name][s.key]) values[s.key] = coerce(s, Json(*r));
    }
    for (const auto& s : cmd->settings) {
      if (s.key == "angle" || s.key == "tau") parse_angle(values[s.key].get<std::string>());
    }

    const Resolved cfg(values);
    if (cmd->name == "synth") return cmd_synth(cfg, out);
    if (cmd->name == "map") return cmd_map(cfg, out);
    if (cmd->name == "certify") return cmd_certify(cfg, out, err);
    if (cmd->name == "simulate") return cmd_simulate(cfg, mode, out, err);
    if (cmd->name == "tomo") return cmd_tomo(cfg, out);
    if (cmd->name == "dd") return cmd_dd(cfg, out);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SynthesisFailure& e) {
    err << "synthesis failed: " << e.what() << " (best infidelity " << e.best_infidelity() << ")\n";
    return kExitNumerical;
  } catch (const PulseMapFailure& e) {
    err << "pulse map failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const StructuralRejection& e) {
    err << "certify: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace bangdrift::cli
