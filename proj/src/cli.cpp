#include "sparseobs/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sparseobs/analysis.hpp"
#include "sparseobs/csv.hpp"
#include "sparseobs/model_io.hpp"

namespace sparseobs {

namespace {

int worse(int a, int b) {
  // Infeasibility outranks numerical trouble; I/O errors outrank both.
  auto rank = [](int c) {
    switch (c) {
      case kExitOk: return 0;
      case kExitNumerical: return 1;
      case kExitInfeasible: return 2;
      case kExitUsage: return 3;
      default: return 4;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

int exit_for(DesignStatus s) {
  switch (s) {
    case DesignStatus::Optimal: return kExitOk;
    case DesignStatus::Infeasible:
    case DesignStatus::PolishInfeasible: return kExitInfeasible;
    default: return kExitNumerical;
  }
}

std::optional<LtiPlant> load(const RunConfig& cfg, CommandResult& out) {
  try {
    return read_model_file(cfg.model).normalized();
  } catch (const ModelFormatError& e) {
    out.exit_code = kExitIo;
    out.messages.push_back(e.what());
  } catch (const std::exception& e) {
    out.exit_code = kExitUsage;
    out.messages.push_back(std::string("invalid model: ") + e.what());
  }
  return std::nullopt;
}

DesignSpec make_spec(const RunConfig& cfg, const LtiPlant& p, double gamma) {
  DesignSpec s = DesignSpec::fixed(cfg.norm, gamma);
  s.rho = cfg.rho;
  s.kappa_sq_max = cfg.kappa_sq_max;
  s.validate(p.ny());
  return s;
}

std::string tag(const RunConfig& cfg, double g) { return to_string(cfg.norm) + "_" + gamma_label(g); }

std::string sensor_list(const LtiPlant& p, const std::vector<int>& idx) {
  std::string s;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k) s += ';';
    s += p.sensor_name(idx[k]);
  }
  return s;
}

std::string design_csv(const LtiPlant& p, const DesignResult& r) {
  CsvTable t({"sensor", "kappa_sq", "in_support"});
  for (int i = 0; i < p.ny(); ++i) {
    const bool in = std::find(r.support.begin(), r.support.end(), i) != r.support.end();
    t.add_row({p.sensor_name(i), format_number(r.kappa_sq.kappa_sq(i)), in ? "1" : "0"});
  }
  return t.str();
}

std::string gain_csv(const LtiPlant& p, const Matrix& l) {
  std::vector<std::string> header{"state"};
  for (int i = 0; i < p.ny(); ++i) header.push_back(p.sensor_name(i));
  CsvTable t(std::move(header));
  for (Eigen::Index r = 0; r < l.rows(); ++r) {
    std::vector<std::string> row{"e_" + std::to_string(r + 1)};
    for (Eigen::Index c = 0; c < l.cols(); ++c) row.push_back(format_number(l(r, c)));
    t.add_row(std::move(row));
  }
  return t.str();
}

std::string trace_csv(const LtiPlant& p, const std::vector<IterationRecord>& trace) {
  std::vector<std::string> header{"iteration", "unit_objective", "weighted_objective", "support_size"};
  for (int i = 0; i < p.ny(); ++i) header.push_back("beta_" + p.sensor_name(i));
  for (int i = 0; i < p.ny(); ++i) header.push_back("rho_" + p.sensor_name(i));
  CsvTable t(std::move(header));
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const IterationRecord& it = trace[k];
    std::vector<std::string> row{std::to_string(k + 1), format_number(it.unit_objective),
                                 format_number(it.weighted_objective), std::to_string(it.support.size())};
    for (int i = 0; i < p.ny(); ++i) row.push_back(format_number(it.beta(i)));
    for (int i = 0; i < p.ny(); ++i) row.push_back(format_number(it.rho(i)));
    t.add_row(std::move(row));
  }
  return t.str();
}

struct Certified {
  NormCertificate cert;
  std::optional<ErrorSystem> sys;
  int code = kExitOk;
};

// Certificate for an Optimal design; NaN row otherwise.
Certified certify_design(const LtiPlant& p, const DesignResult& r, NormType norm, double target) {
  Certified c;
  c.cert.norm = norm;
  c.cert.gamma_target = target;
  c.cert.value = std::nan("");
  c.cert.accuracy = std::nan("");
  c.code = exit_for(r.status);
  if (r.status != DesignStatus::Optimal) return c;
  try {
    c.sys = build_error_system(p, r.L, r.kappa_sq);
    c.cert = certify(*c.sys, norm, target);
    if (!c.cert.satisfied) c.code = kExitNumerical;
  } catch (const std::exception&) {
    c.sys.reset();
    c.code = kExitNumerical;
  }
  return c;
}

std::string certificate_csv(const NormCertificate& c, DesignStatus s) {
  CsvTable t({"norm", "target", "achieved", "satisfied", "rel_tol", "accuracy", "status"});
  t.add_row({to_string(c.norm), format_number(c.gamma_target), format_number(c.value), c.satisfied ? "1" : "0",
             format_number(c.rel_tol), format_number(c.accuracy), to_string(s)});
  return t.str();
}

std::string freq_csv(const ErrorSystem& sys, int points) {
  CsvTable t({"omega", "sigma_max"});
  const double lo = -3.0, hi = 4.0;
  for (int k = 0; k < points; ++k) {
    const double w = std::pow(10.0, points == 1 ? lo : lo + (hi - lo) * k / (points - 1));
    t.add_row({format_number(w), format_number(sigma_max(sys, w))});
  }
  return t.str();
}

std::vector<int> all_sensors(int ny) {
  std::vector<int> s(ny);
  for (int i = 0; i < ny; ++i) s[i] = i;
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s, const char* what) {
  std::vector<double> v;
  for (const std::string& item : split(s, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw CLI::ValidationError(what, "not a number: '" + item + "'");
    v.push_back(x);
  }
  return v;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string gamma_label(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

CommandResult cmd_design(const RunConfig& cfg) {
  CommandResult out;
  const auto p = load(cfg, out);
  if (!p) return out;
  for (double g : cfg.gammas) {
    const DesignSpec spec = make_spec(cfg, *p, g);
    const DesignResult r = sparse_design(*p, spec, cfg.reweight);
    const Certified c = certify_design(*p, r, cfg.norm, g);
    const std::string t = tag(cfg, g);
    if (r.status == DesignStatus::Optimal) {
      out.files.push_back({"design_" + t + ".csv", design_csv(*p, r)});
      out.files.push_back({"gain_" + t + ".csv", gain_csv(*p, r.L)});
      if (cfg.freq_points > 0 && c.sys) out.files.push_back({"freq_" + t + ".csv", freq_csv(*c.sys, cfg.freq_points)});
    }
    out.files.push_back({"certificate_" + t + ".csv", certificate_csv(c.cert, r.status)});
    out.files.push_back({"trace_" + t + ".csv", trace_csv(*p, r.iterations)});
    out.messages.push_back(t + ": " + to_string(r.status) + ", support {" + sensor_list(*p, r.support) +
                           "}, achieved " + format_number(c.cert.value));
    out.exit_code = worse(out.exit_code, c.code);
  }
  return out;
}

CommandResult cmd_exhaustive(const RunConfig& cfg) {
  CommandResult out;
  const auto p = load(cfg, out);
  if (!p) return out;
  ExhaustiveOptions eo;
  eo.threads = cfg.threads;
  for (double g : cfg.gammas) {
    DesignSpec spec = make_spec(cfg, *p, g);
    spec.rho = Vector();
    const ExhaustiveResult ex = exhaustive_search(*p, spec, eo);
    const std::string t = tag(cfg, g);

    CsvTable table({"mask", "r", "status", "l1_of_kappa_sq", "sensors"});
    for (const SubsetRecord& rec : ex.table) {
      std::vector<int> idx;
      for (int i = 0; i < p->ny(); ++i) {
        if (rec.mask & (std::uint32_t{1} << i)) idx.push_back(i);
      }
      table.add_row({std::to_string(rec.mask), std::to_string(rec.r), to_string(rec.status),
                     format_number(rec.l1_of_kappa_sq), sensor_list(*p, idx)});
    }
    out.files.push_back({"exhaustive_" + t + ".csv", table.str()});

    const Certified c = certify_design(*p, ex.best, cfg.norm, g);
    if (ex.best.status == DesignStatus::Optimal) {
      out.files.push_back({"exhaustive_design_" + t + ".csv", design_csv(*p, ex.best)});
    }
    out.files.push_back({"exhaustive_certificate_" + t + ".csv", certificate_csv(c.cert, ex.best.status)});
    out.messages.push_back(t + ": winner {" + sensor_list(*p, ex.best.support) + "}, l1 " +
                           format_number(ex.best.kappa_sq.l1()));
    out.exit_code = worse(out.exit_code, c.code);
  }
  return out;
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  CommandResult out;
  const auto p = load(cfg, out);
  if (!p) return out;
  SimulationOptions so;
  so.step = cfg.step;
  so.horizon = cfg.horizon;
  so.seed = cfg.seed;
  so.noise.kind = cfg.zero_noise ? NoiseModel::Kind::None : NoiseModel::Kind::BandLimited;
  so.noise.bandwidth = cfg.bandwidth;
  const double t_start = cfg.rms_start >= 0.0 ? cfg.rms_start : cfg.horizon / 2.0;

  for (double g : cfg.gammas) {
    const DesignSpec spec = make_spec(cfg, *p, g);
    const std::string t = tag(cfg, g);
    const DesignResult sparse =
        cfg.support ? polish(*p, spec, *cfg.support) : sparse_design(*p, spec, cfg.reweight);
    const DesignResult full = polish(*p, spec, all_sensors(p->ny()));

    CsvTable summary({"config", "sensors", "achieved", "rms", "decay_alpha", "decay_constant", "decay_max_ratio",
                      "decay_ok"});
    const std::pair<const char*, const DesignResult*> configs[] = {{"sparse", &sparse}, {"full", &full}};
    for (const auto& [name, r] : configs) {
      const Certified c = certify_design(*p, *r, cfg.norm, g);
      out.exit_code = worse(out.exit_code, c.code);
      if (!c.sys) {
        summary.add_row({name, sensor_list(*p, r->support), "nan", "nan", "nan", "nan", "nan", "0"});
        continue;
      }
      const SimulationRun run = simulate(*c.sys, so);
      out.files.push_back({std::string("sim_") + name + "_" + t + ".csv", simulation_table(run).str()});
      std::vector<std::string> row{name, sensor_list(*p, r->support), format_number(c.cert.value),
                                   format_number(stationary_rms(run, t_start))};
      if (cfg.zero_noise) {
        const DecayCheck d = check_decay(*c.sys, run);
        for (double v : {d.alpha, d.constant, d.max_ratio}) row.push_back(format_number(v));
        row.push_back(d.ok ? "1" : "0");
        if (!d.ok) out.exit_code = worse(out.exit_code, kExitNumerical);
      } else {
        row.insert(row.end(), {"nan", "nan", "nan", ""});
      }
      summary.add_row(std::move(row));
    }
    out.files.push_back({"sim_summary_" + t + ".csv", summary.str()});
    out.messages.push_back(t + ": sparse {" + sensor_list(*p, sparse.support) + "} vs full");
  }
  return out;
}

CommandResult cmd_sweep(const RunConfig& cfg) {
  CommandResult out;
  const auto p = load(cfg, out);
  if (!p) return out;
  std::vector<std::string> header{"c", "status", "gamma_star", "gamma_bound", "l1_of_kappa_sq"};
  for (int i = 0; i < p->ny(); ++i) header.push_back("kappa_sq_" + p->sensor_name(i));
  CsvTable table(std::move(header));
  for (double c : cfg.penalties) {
    DesignSpec spec = DesignSpec::penalized(cfg.norm, c);
    spec.rho = cfg.rho;
    spec.kappa_sq_max = cfg.kappa_sq_max;
    spec.validate(p->ny());
    const DesignResult r = solve_design(*p, spec);
    std::vector<std::string> row{format_number(c), to_string(r.status)};
    int code = exit_for(r.status);
    if (r.status == DesignStatus::Optimal) {
      double achieved = std::nan("");
      try {
        const ErrorSystem sys = build_error_system(*p, r.L, r.kappa_sq);
        achieved = certify(sys, cfg.norm, r.gamma).value;
      } catch (const std::exception&) {
        code = kExitNumerical;
      }
      row.insert(row.end(), {format_number(achieved), format_number(r.gamma), format_number(r.kappa_sq.l1())});
      for (int i = 0; i < p->ny(); ++i) row.push_back(format_number(r.kappa_sq.kappa_sq(i)));
    } else {
      row.insert(row.end(), static_cast<std::size_t>(3 + p->ny()), "nan");
    }
    table.add_row(std::move(row));
    out.exit_code = worse(out.exit_code, code);
    out.messages.push_back("c = " + format_number(c) + ": " + to_string(r.status));
  }
  out.files.push_back({"sweep_" + to_string(cfg.norm) + ".csv", table.str()});
  return out;
}

void commit(const CommandResult& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());
  std::vector<std::filesystem::path> done;
  try {
    for (const OutputFile& f : r.files) {
      const auto path = out_dir / f.name;
      write_text_file(path, f.content);
      done.push_back(path);
    }
  } catch (...) {
    for (const auto& path : done) std::filesystem::remove(path, ec);
    throw;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Sparse sensor precision and observer gain design"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string norm = "h2", gammas, rho = "1", kappa_max = "none", penalties, support;
  std::uint64_t seed = 42;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "Model file (JSON)")->required();
    sub->add_option("--norm", norm, "h2 or hinf")->check(CLI::IsMember({"h2", "hinf"}));
    sub->add_option("--rho", rho, "Initial weights: comma list, or 1 for unit weights");
    sub->add_option("--kappa-max", kappa_max, "Precision bounds: comma list (inf allowed), or none");
    sub->add_option("--out", cfg.out_dir, "Output directory");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--reweight-iters", cfg.reweight.max_iters, "Maximum reweighting iterations");
    sub->add_option("--reweight-epsilon", cfg.reweight.epsilon, "Reweighting epsilon");
  };

  CLI::App* design = app.add_subcommand("design", "Sparse design for each gamma");
  common(design);
  design->add_option("--gamma", gammas, "Comma list of gamma values")->required();
  design->add_option("--freq", cfg.freq_points, "Write a frequency sweep with this many points");

  CLI::App* exhaustive = app.add_subcommand("exhaustive", "Enumerate every sensor subset");
  common(exhaustive);
  exhaustive->add_option("--gamma", gammas, "Comma list of gamma values")->required();
  exhaustive->add_option("--threads", cfg.threads, "Worker threads (0: hardware concurrency)");

  CLI::App* sim = app.add_subcommand("simulate", "Simulate sparse and full designs");
  common(sim);
  sim->add_option("--gamma", gammas, "Comma list of gamma values")->required();
  sim->add_option("--support", support, "Sparse configuration as comma list of sensor names or indices");
  sim->add_flag("--zero-noise", cfg.zero_noise, "Noise-free run with decay check");
  sim->add_option("--horizon", cfg.horizon, "Simulation horizon [s]");
  sim->add_option("--step", cfg.step, "Sample time [s]");
  sim->add_option("--bandwidth", cfg.bandwidth, "Noise low-pass pole [rad/s]");
  sim->add_option("--rms-start", cfg.rms_start, "Start of the RMS window [s] (default horizon/2)");

  CLI::App* sweep = app.add_subcommand("sweep", "Penalised-gamma sweep over c");
  common(sweep);
  sweep->add_option("--penalty", penalties, "Comma list of penalty weights c")->required();

  try {
    app.parse(argc, argv);
    cfg.norm = parse_norm(norm);
    cfg.seed = seed;
    if (!gammas.empty()) {
      cfg.gammas = parse_numbers(gammas, "--gamma");
      for (double g : cfg.gammas) {
        if (!(g > 0.0)) throw CLI::ValidationError("--gamma", "values must be positive");
      }
    }
    if (!penalties.empty()) cfg.penalties = parse_numbers(penalties, "--penalty");
    if (rho != "1") cfg.rho = to_vector(parse_numbers(rho, "--rho"));
    if (kappa_max != "none") cfg.kappa_sq_max = to_vector(parse_numbers(kappa_max, "--kappa-max"));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  CommandResult result;
  try {
    if (chosen == sim && !support.empty()) {
      const ModelFile m = read_model_file(cfg.model);
      std::vector<int> idx;
      for (const std::string& s : split(support, ',')) {
        int found = -1;
        for (int i = 0; i < m.plant.ny(); ++i) {
          if (m.plant.sensor_name(i) == s) found = i;
        }
        if (found < 0) found = static_cast<int>(parse_numbers(s, "--support").front());
        idx.push_back(found);
      }
      std::sort(idx.begin(), idx.end());
      cfg.support = idx;
    }
    if (chosen == design) result = cmd_design(cfg);
    else if (chosen == exhaustive) result = cmd_exhaustive(cfg);
    else if (chosen == sim) result = cmd_simulate(cfg);
    else result = cmd_sweep(cfg);
  } catch (const ModelFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  for (const std::string& m : result.messages) std::cerr << m << "\n";
  if (result.exit_code == kExitIo) return kExitIo;
  try {
    commit(result, cfg.out_dir);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return result.exit_code;
}

}  // namespace sparseobs
