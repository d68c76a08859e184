#include "rellandau/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "rellandau/errors.hpp"
#include "rellandau/gronwall.hpp"
#include "rellandau/parallel.hpp"
#include "rellandau/transport.hpp"
#include "rellandau/verify.hpp"

namespace rellandau::cli {

using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void read_count(const json& obj, const char* key, const std::string& where, std::size_t& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  target = v.get<std::size_t>();
}

void read_seed(const json& obj, const char* key, const std::string& where, std::uint64_t& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(where + "." + key + " must be an unsigned integer");
  target = v.get<std::uint64_t>();
}

sde::CouplingMode parse_coupling_mode(const json& v) {
  sde::CouplingMode mode;
  if (v.is_string() && v.get<std::string>() == "index") return mode;
  if (v.is_object()) {
    reject_unknown(v, "couple.coupling_mode", {"optimal_every_k"});
    const json& k = v.at("optimal_every_k");
    if (!k.is_number_integer() || k.get<long long>() < 1)
      throw ConfigError("couple.coupling_mode.optimal_every_k must be an integer >= 1");
    mode.kind = sde::CouplingMode::Kind::OptimalEveryK;
    mode.k = k.get<std::size_t>();
    return mode;
  }
  throw ConfigError("couple.coupling_mode must be \"index\" or {\"optimal_every_k\": k}");
}

}  // namespace

Config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config c;
  reject_unknown(doc, "config", {"kernel", "survey", "sim", "couple", "output"});

  bool sim_eps_given = false;
  if (doc.contains("kernel")) {
    const json& k = doc["kernel"];
    reject_unknown(k, "kernel", {"eps_reg"});
    read(k, "eps_reg", "kernel", c.eps_reg);
    if (!(c.eps_reg >= 0.0)) throw ConfigError("kernel.eps_reg must be >= 0");
  }
  if (doc.contains("survey")) {
    const json& s = doc["survey"];
    reject_unknown(s, "survey", {"bound_id", "density", "n", "seed"});
    read(s, "bound_id", "survey", c.bound_id);
    read(s, "density", "survey", c.density);
    read_count(s, "n", "survey", c.survey_n);
    read_seed(s, "seed", "survey", c.survey_seed);
    if (c.bound_id != "all") {
      bool known = false;
      for (auto id : estimates::all_bound_ids()) known |= estimates::name(id) == c.bound_id;
      for (auto id : estimates::all_integral_ids()) known |= estimates::name(id) == c.bound_id;
      if (!known) throw ConfigError("survey.bound_id '" + c.bound_id + "' is not known");
    }
    estimates::parse_density_id(c.density);
  }
  if (doc.contains("sim")) {
    const json& s = doc["sim"];
    reject_unknown(s, "sim",
                   {"n_particles", "dt", "t_final", "eps_reg", "scheme", "seed", "record_every",
                    "w2_subsample", "w2_to_reference", "initial"});
    read_count(s, "n_particles", "sim", c.sim.n_particles);
    read(s, "dt", "sim", c.sim.dt);
    read(s, "t_final", "sim", c.sim.t_final);
    if (s.contains("eps_reg")) {
      read(s, "eps_reg", "sim", c.sim.eps_reg);
      sim_eps_given = true;
    }
    read_seed(s, "seed", "sim", c.sim.seed);
    read_count(s, "record_every", "sim", c.sim.record_every);
    read_count(s, "w2_subsample", "sim", c.sim.w2_subsample);
    read(s, "w2_to_reference", "sim", c.sim.w2_to_reference);
    if (s.contains("scheme")) {
      std::string scheme;
      read(s, "scheme", "sim", scheme);
      if (scheme == "mean_field")
        c.sim.scheme = sde::Scheme::MeanField;
      else if (scheme == "pairwise")
        c.sim.scheme = sde::Scheme::Pairwise;
      else
        throw ConfigError("sim.scheme must be \"mean_field\" or \"pairwise\"");
    }
    if (s.contains("initial")) {
      std::string init;
      read(s, "initial", "sim", init);
      if (init == "juttner")
        c.initial = InitialData::Juttner;
      else if (init == "anisotropic")
        c.initial = InitialData::Anisotropic;
      else
        throw ConfigError("sim.initial must be \"juttner\" or \"anisotropic\"");
    }
  }
  if (!sim_eps_given && doc.contains("kernel") && doc["kernel"].contains("eps_reg"))
    c.sim.eps_reg = c.eps_reg;
  // Keep the default subsample valid for small runs.
  if (!(doc.contains("sim") && doc["sim"].contains("w2_subsample")))
    c.sim.w2_subsample = std::min<std::size_t>(c.sim.w2_subsample, c.sim.n_particles);
  if (doc.contains("couple")) {
    const json& s = doc["couple"];
    reject_unknown(s, "couple", {"delta", "coupling_mode"});
    read(s, "delta", "couple", c.delta);
    if (!std::isfinite(c.delta)) throw ConfigError("couple.delta must be finite");
    if (s.contains("coupling_mode")) c.sim.coupling_mode = parse_coupling_mode(s["coupling_mode"]);
  }
  if (doc.contains("output")) {
    const json& s = doc["output"];
    reject_unknown(s, "output", {"dir", "format"});
    std::string dir = c.out_dir.string();
    read(s, "dir", "output", dir);
    c.out_dir = dir;
    if (s.contains("format")) {
      std::string f;
      read(s, "format", "output", f);
      if (f == "csv")
        c.format = EnsembleFormat::Csv;
      else if (f == "binary")
        c.format = EnsembleFormat::Binary;
      else
        throw ConfigError("output.format must be \"csv\" or \"binary\"");
    }
  }
  c.sim.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

transport::Ensemble initial_ensemble(InitialData kind, std::size_t n, std::uint64_t seed) {
  transport::Ensemble e = transport::sample_juttner(n, seed);
  if (kind == InitialData::Juttner) return e;
  std::vector<Momentum> out;
  out.reserve(n);
  for (const auto& p : e) out.emplace_back(p[0] >= 0 ? norm(p.vec()) : -norm(p.vec()), 0.0, 0.0);
  return transport::Ensemble(std::move(out));
}

// ---------------------------------------------------------------- commands

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool json = false;
};

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name,
                          bool binary = false) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

int cmd_verify(const Config& c, const Globals& g, std::size_t pairs, std::size_t near,
               std::ostream& out) {
  const auto results = verify::run_kernel_checks(pairs, near, g.seed.value_or(c.survey_seed));
  bool ok = true;
  for (const auto& r : results) ok &= r.pass;
  if (g.json) {
    json arr = json::array();
    for (const auto& r : results)
      arr.push_back({{"check", r.name},
                     {"n", r.n},
                     {"max_residual", r.max_residual},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass}});
    out << arr.dump(2) << '\n';
  } else {
    out << std::left << std::setw(28) << "check" << std::setw(8) << "n" << std::setw(14)
        << "max_residual" << std::setw(12) << "tolerance" << "result\n";
    for (const auto& r : results)
      out << std::left << std::setw(28) << r.name << std::setw(8) << r.n << std::setw(14)
          << std::setprecision(4) << r.max_residual << std::setw(12) << r.tolerance
          << (r.pass ? "pass" : "FAIL") << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_bounds(const Config& c, const Globals& g, std::ostream& out) {
  const std::uint64_t seed = g.seed.value_or(c.survey_seed);
  std::vector<estimates::BoundReport> reports;
  const auto density = estimates::parse_density_id(c.density);
  if (c.bound_id == "all") {
    for (auto id : estimates::all_bound_ids())
      reports.push_back(estimates::bound_survey(id, c.survey_n, seed));
  } else {
    bool pointwise = false;
    for (auto id : estimates::all_bound_ids()) {
      if (estimates::name(id) == c.bound_id) {
        reports.push_back(estimates::bound_survey(id, c.survey_n, seed));
        pointwise = true;
      }
    }
    if (!pointwise)
      reports.push_back(estimates::integral_survey(estimates::parse_integral_id(c.bound_id),
                                                   density, c.survey_n, seed));
  }
  auto f = open_output(c.out_dir, "bounds.csv");
  f << estimates::csv_header() << '\n';
  for (const auto& r : reports) estimates::write_csv_row(f, r);

  if (g.json) {
    json arr = json::array();
    for (const auto& r : reports)
      arr.push_back({{"bound_id", r.bound_id}, {"n_samples", r.n_samples},
                     {"max_ratio", r.max_ratio}, {"n_noisy", r.n_noisy}});
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& r : reports)
      out << r.bound_id << ": n=" << r.n_samples << " max_ratio=" << r.max_ratio << '\n';
  }
  return kExitOk;
}

void write_ensemble(const Config& c, const std::string& stem, const transport::Ensemble& e) {
  if (c.format == EnsembleFormat::Csv) {
    auto f = open_output(c.out_dir, stem + ".csv");
    transport::write_csv(f, e);
  } else {
    auto f = open_output(c.out_dir, stem + ".bin", true);
    transport::write_binary(f, e);
  }
}

int cmd_simulate(Config c, const Globals& g, std::ostream& out) {
  if (g.seed) c.sim.seed = *g.seed;
  const auto init = initial_ensemble(c.initial, c.sim.n_particles, c.sim.seed);
  const auto rec = sde::run(c.sim, init);
  auto f = open_output(c.out_dir, "trajectory.csv");
  sde::write_csv(f, rec);
  write_ensemble(c, "final", transport::Ensemble(rec.final_state));
  const auto& last = rec.entries.back();
  if (g.json) {
    out << json{{"records", rec.entries.size()},
                {"t_final", last.t},
                {"mean_energy", last.moments.mean_energy},
                {"max_drift_imbalance", rec.max_drift_imbalance}}
               .dump()
        << '\n';
  } else {
    out << "simulate: " << rec.entries.size() << " records, t=" << last.t
        << " mean_energy=" << last.moments.mean_energy
        << " max_drift_imbalance=" << rec.max_drift_imbalance << '\n';
  }
  return kExitOk;
}

int cmd_couple(Config c, const Globals& g, std::ostream& out) {
  if (g.seed) c.sim.seed = *g.seed;
  const auto first = initial_ensemble(c.initial, c.sim.n_particles, c.sim.seed);
  const auto second = first.translated({c.delta, 0.0, 0.0});
  const auto rec = sde::run_coupled(c.sim, first, second);
  auto f = open_output(c.out_dir, "coupling.csv");
  sde::write_csv(f, rec);
  double sup = 0.0;
  for (const auto& e : rec.entries) sup = std::max(sup, e.w2_sq);
  if (g.json) {
    out << json{{"records", rec.entries.size()},
                {"gamma_fitted", rec.gamma_fitted},
                {"sup_w2_sq", sup},
                {"subsample", rec.subsample_size}}
               .dump()
        << '\n';
  } else {
    out << "couple: " << rec.entries.size() << " records, sup w2_sq=" << sup
        << " gamma_fitted=" << rec.gamma_fitted << " (subsample " << rec.subsample_size << ")\n";
  }
  return kExitOk;
}

int cmd_gronwall(const Config& c, const Globals& g, double rho0, double gamma, double horizon,
                 double dt, std::ostream& out) {
  gronwall::Problem pb{rho0, {gamma}, horizon, dt};
  const auto traj = gronwall::integrate(pb);
  const double bound = gronwall::invert_bound(rho0, gamma * horizon);
  auto f = open_output(c.out_dir, "gronwall.csv");
  gronwall::write_csv(f, traj);
  if (g.json) {
    out << json{{"final_rho", traj.back().rho}, {"invert_bound", bound}}.dump() << '\n';
  } else {
    out << "gronwall: final rho=" << std::setprecision(17) << traj.back().rho
        << " invert_bound=" << bound << '\n';
  }
  return kExitOk;
}

int cmd_sample(const Config& c, const Globals& g, std::size_t n, std::ostream& out) {
  if (n == 0) throw ConfigError("sample: --n must be positive");
  transport::SamplerStats stats;
  const auto e = transport::sample_juttner(n, g.seed.value_or(c.sim.seed), &stats);
  write_ensemble(c, "sample", e);
  const double ks[] = {1.0};
  const auto m = transport::moments(e, ks);
  if (g.json) {
    out << json{{"n", n}, {"acceptance", stats.acceptance()}, {"mean_energy", m.mean_energy}}.dump()
        << '\n';
  } else {
    out << "sample: n=" << n << " acceptance=" << stats.acceptance()
        << " mean_energy=" << m.mean_energy << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relativistic Landau kernel, estimate and particle-simulation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--seed", g.seed, "Seed overriding the configuration");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_flag("--json", g.json, "Machine-readable output");

  std::size_t pairs = 10000, near = 1000;
  auto* verify_cmd = app.add_subcommand("verify", "Check kernel identities on seeded pairs");
  verify_cmd->add_option("--pairs", pairs, "Independent pairs");
  verify_cmd->add_option("--near-pairs", near, "Near-coincident pairs");

  std::string bound_id, density;
  std::optional<std::size_t> survey_n;
  auto* bounds_cmd = app.add_subcommand("bounds", "Empirical constants of the pointwise and integral bounds");
  bounds_cmd->add_option("--bound-id", bound_id, "Bound or integral survey id, or 'all'");
  bounds_cmd->add_option("--density", density, "juttner or truncated_gaussian");
  bounds_cmd->add_option("--n", survey_n, "Samples");

  auto* simulate_cmd = app.add_subcommand("simulate", "Run the particle system");
  std::optional<double> delta;
  auto* couple_cmd = app.add_subcommand("couple", "Run two ensembles with shared noise");
  couple_cmd->add_option("--delta", delta, "Shift of the second ensemble along e1");

  double rho0 = 0.0, gamma = 1.0, horizon = 1.0, dt = 1e-3;
  auto* gronwall_cmd = app.add_subcommand("gronwall", "Integrate rho' = gamma Psi(rho)");
  gronwall_cmd->add_option("--rho0", rho0, "Initial value")->required();
  gronwall_cmd->add_option("--gamma-const", gamma, "Constant gamma")->required();
  gronwall_cmd->add_option("--T", horizon, "Horizon")->required();
  gronwall_cmd->add_option("--dt", dt, "Step");

  std::size_t sample_n = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Draw Juttner samples");
  sample_cmd->add_option("--n", sample_n, "Number of samples")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Config c = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (!g.out_dir.empty()) c.out_dir = g.out_dir;
    if (!bound_id.empty()) c.bound_id = bound_id;
    if (!density.empty()) c.density = density;
    if (survey_n) c.survey_n = *survey_n;
    if (delta) c.delta = *delta;

    if (*verify_cmd) return cmd_verify(c, g, pairs, near, out);
    if (*bounds_cmd) return cmd_bounds(c, g, out);
    if (*simulate_cmd) return cmd_simulate(c, g, out);
    if (*couple_cmd) return cmd_couple(c, g, out);
    if (*gronwall_cmd) return cmd_gronwall(c, g, rho0, gamma, horizon, dt, out);
    if (*sample_cmd) return cmd_sample(c, g, sample_n, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rellandau::cli
