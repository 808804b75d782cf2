// Acceptance run over the bundled F-16 model. Prints one line per
// criterion: PASS, FAIL or SKIP followed by the measured numbers.
// Exit status is 0 once the run completes; pass --strict to turn any FAIL
// into exit status 1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sdp_cases.hpp"
#include "sparseobs/analysis.hpp"
#include "sparseobs/design.hpp"
#include "sparseobs/model_io.hpp"
#include "support.hpp"

using namespace sparseobs;
using Clock = std::chrono::steady_clock;

namespace {

const std::vector<double> kGammas{1.0, 0.1, 0.01};
const std::vector<int> kSupport{1, 4};  // w_dot, qbar

// Published precisions for (w_dot, qbar), V = 1000 ft/s.
const std::map<std::pair<NormType, double>, std::pair<double, double>> kReference{
    {{NormType::H2, 1.0}, {0.0733, 0.0186}},       {{NormType::H2, 0.1}, {11.5177, 1.9002}},
    {{NormType::H2, 0.01}, {1160.0183, 189.6549}}, {{NormType::Hinf, 1.0}, {0.0304, 0.0289}},
    {{NormType::Hinf, 0.1}, {3.5216, 3.1227}},     {{NormType::Hinf, 0.01}, {352.6480, 312.5102}},
};

// Other trim speeds, used only when their model files are present.
const std::map<int, std::map<double, std::pair<double, double>>> kOtherTrims{
    {600, {{1.0, {0.0418, 0.0117}}, {0.1, {18.2490, 2.9759}}, {0.01, {1888.3814, 295.7141}}}},
    {1600, {{1.0, {0.0699, 0.0143}}, {0.1, {7.9630, 1.4194}}, {0.01, {797.5027, 141.9043}}}},
};

struct Verdict {
  int id;
  std::string result;
  std::string detail;
};

std::vector<Verdict> g_verdicts;

void report(int id, bool ok, const std::string& detail) {
  g_verdicts.push_back({id, ok ? "PASS" : "FAIL", detail});
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

void skip(int id, const std::string& detail) {
  g_verdicts.push_back({id, "SKIP", detail});
  std::printf("criterion %d: SKIP  %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string names(const LtiPlant& p, const std::vector<int>& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + p.sensor_name(s[k]);
  return out + "}";
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Case {
  NormType norm;
  double gamma;
  DesignResult result;
};

ErrorSystem error_system(const LtiPlant& p, const DesignResult& r) {
  return build_error_system(p, r.L, r.kappa_sq);
}

ErrorSystem make(Matrix a, Matrix b, Matrix c) {
  ErrorSystem s;
  s.A_cl = std::move(a);
  s.B_cl = std::move(b);
  s.C_z = std::move(c);
  for (int j = 0; j < s.B_cl.cols(); ++j) s.input_channels.push_back(j);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const LtiPlant plant = load_model(testing::f16_path());

  // 1. Sparsity pattern.
  std::vector<Case> cases;
  {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (NormType n : {NormType::H2, NormType::Hinf}) {
      for (double g : kGammas) {
        DesignResult r = sparse_design(plant, DesignSpec::fixed(n, g));
        const bool hit = r.status == DesignStatus::Optimal && r.support == kSupport;
        ok = ok && hit;
        detail += fmt("%s/%g=%s ", to_string(n).c_str(), g, names(plant, r.support).c_str());
        cases.push_back({n, g, std::move(r)});
      }
    }
    const double t = seconds(t0);
    ok = ok && t < 30.0;
    report(1, ok, detail + fmt("time %.2fs", t));
  }

  // 2. Precision values against the published ones, plus the Kalman oracle
  //    for H2 (minimal precisions put the optimal filter exactly on γ).
  {
    bool ok = true;
    double worst = 0.0, worst_kf = 0.0;
    for (const Case& c : cases) {
      if (c.result.status != DesignStatus::Optimal) {
        ok = false;
        continue;
      }
      const auto [w, q] = kReference.at({c.norm, c.gamma});
      const Vector& k = c.result.kappa_sq.kappa_sq;
      worst = std::max({worst, rel(k(1), w), rel(k(4), q)});
      if (c.norm == NormType::H2) worst_kf = std::max(worst_kf, rel(testing::kalman_h2(plant, k), c.gamma));
    }
    ok = ok && worst <= 0.10 && worst_kf <= 1e-3;
    report(2, ok, fmt("max relative deviation %.3g (limit 0.10); H2 Kalman norm vs gamma %.2g", worst, worst_kf));
  }

  // 3. Other trim speeds.
  {
    std::vector<std::string> missing;
    std::string detail;
    bool ok = true;
    for (const auto& [v, rows] : kOtherTrims) {
      const std::string path = std::string(SPARSEOBS_DATA_DIR) + "/f16_v" + std::to_string(v) + ".json";
      if (!std::filesystem::exists(path)) {
        missing.push_back(path);
        continue;
      }
      const LtiPlant p = load_model(path);
      for (const auto& [g, ref] : rows) {
        const DesignResult r = sparse_design(p, DesignSpec::fixed(NormType::H2, g));
        const bool hit = r.status == DesignStatus::Optimal && r.support == kSupport &&
                         rel(r.kappa_sq.kappa_sq(1), ref.first) <= 0.1 &&
                         rel(r.kappa_sq.kappa_sq(4), ref.second) <= 0.1;
        ok = ok && hit;
        detail += fmt("V=%d/%g %s ", v, g, hit ? "ok" : "off");
      }
    }
    if (missing.size() == kOtherTrims.size()) {
      skip(3, "no linearised models for V = 600 or 1600 ft/s are bundled; not reproducible here");
    } else {
      report(3, ok && missing.empty(), detail + (missing.empty() ? "" : "(one model missing)"));
    }
  }

  // 4. Exhaustive search.
  std::vector<Case> exhaustive_winners;
  std::map<std::pair<NormType, double>, std::size_t> exhaustive_l0;
  {
    const auto t0 = Clock::now();
    std::string detail;
    bool hinf_ok = false, h2_ok = true;
    for (NormType n : {NormType::Hinf, NormType::H2}) {
      for (double g : kGammas) {
        ExhaustiveResult ex = exhaustive_search(plant, DesignSpec::fixed(n, g));
        exhaustive_l0[{n, g}] = ex.best.status == DesignStatus::Optimal ? ex.best.support.size() : 0;
        if (n == NormType::Hinf && g == 1.0) {
          const double k = ex.best.status == DesignStatus::Optimal ? ex.best.kappa_sq.kappa_sq(4) : NAN;
          hinf_ok = ex.best_mask == (1u << 4) && rel(k, 1292.2) <= 0.1;
          detail += fmt("hinf/1 winner %s kappa_sq %.6g; ", names(plant, ex.best.support).c_str(), k);
        }
        if (n == NormType::H2) {
          const DesignResult* rw = nullptr;
          for (const Case& c : cases) {
            if (c.norm == n && c.gamma == g) rw = &c.result;
          }
          const bool same = rw && ex.best.support == rw->support;
          h2_ok = h2_ok && same;
          const double single = testing::min_single_sensor_precision(plant, 1, g);
          detail += fmt("h2/%g winner %s l1 %.6g (Kalman: w_dot alone needs %.4g) %s; ", g,
                        names(plant, ex.best.support).c_str(), ex.best.kappa_sq.l1(), single,
                        same ? "matches" : "differs");
        }
        if (ex.best.status == DesignStatus::Optimal) exhaustive_winners.push_back({n, g, std::move(ex.best)});
      }
    }
    const double t = seconds(t0);
    report(4, hinf_ok && h2_ok && t < 120.0, detail + fmt("time %.2fs", t));
  }

  // 5. Certificates of every design above.
  {
    bool ok = true;
    double worst = -INFINITY;
    int count = 0;
    auto check = [&](const Case& c) {
      if (c.result.status != DesignStatus::Optimal) return;
      const ErrorSystem sys = error_system(plant, c.result);
      const double v = c.norm == NormType::H2 ? h2_norm(sys) : hinf_report(sys, 1e-10).value;
      worst = std::max(worst, v / c.gamma - 1.0);
      ok = ok && v < c.gamma * (1.0 + 1e-4);
      ++count;
    };
    for (const Case& c : cases) check(c);
    for (const Case& c : exhaustive_winners) check(c);
    report(5, ok && count > 0, fmt("%d designs, max (norm/gamma - 1) = %.3g", count, worst));
  }

  // 6. Norm oracles.
  {
    double err = 0.0;
    const ErrorSystem first = make(Matrix::Constant(1, 1, -4.0), Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1));
    err = std::max({err, rel(h2_norm(first), 2.0 / std::sqrt(8.0)), rel(hinf_norm(first, 1e-9), 0.5)});
    const Vector a{{1.0, 3.0, 0.5}}, b{{1.0, 2.0, 0.3}}, c{{2.0, 1.0, 1.0}};
    const ErrorSystem diag = make(Matrix((-a).asDiagonal()), Matrix(b.asDiagonal()), Matrix(c.asDiagonal()));
    double h2 = 0.0, hinf = 0.0;
    for (int i = 0; i < 3; ++i) {
      h2 += std::pow(b(i) * c(i), 2) / (2.0 * a(i));
      hinf = std::max(hinf, b(i) * c(i) / a(i));
    }
    err = std::max({err, rel(h2_norm(diag), std::sqrt(h2)), rel(hinf_norm(diag, 1e-9), hinf)});
    const double zeta = 0.1;
    const ErrorSystem res = make(Matrix{{0.0, 1.0}, {-4.0, -0.4}}, Matrix{{0.0}, {4.0}}, Matrix{{1.0, 0.0}});
    err = std::max({err, rel(h2_norm(res), std::sqrt(2.0 / (4.0 * zeta))),
                    rel(hinf_norm(res, 1e-9), 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta)))});

    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const ErrorSystem s = make(testing::random_stable(rng, 4), testing::random_matrix(rng, 4, 2),
                                 testing::random_matrix(rng, 2, 4));
      worst = std::max(worst, rel(hinf_norm_lmi(s), hinf_norm(s, 1e-9)));
    }
    report(6, err <= 1e-6 && worst <= 1e-4,
           fmt("analytic max rel error %.2g; Hamiltonian vs LMI max rel diff %.2g over 20 systems", err, worst));
  }

  // 7. Solver on the analytic suite.
  {
    bool ok = true;
    double worst_obj = 0.0, worst_kkt = 0.0;
    const auto suite = testing::analytic_cases();
    for (const auto& c : suite) {
      const sdp::SdpSolution s = sdp::solve(c.problem, testing::tight_options());
      if (s.status != sdp::Status::Optimal) {
        ok = false;
        continue;
      }
      worst_obj = std::max(worst_obj, std::abs(s.primal_objective - c.optimum) / std::max(1.0, std::abs(c.optimum)));
      worst_kkt = std::max({worst_kkt, s.primal_residual, s.dual_residual, s.relative_gap});
    }
    ok = ok && worst_obj <= 1e-6 && worst_kkt <= 1e-7;
    report(7, ok,
           fmt("%zu problems, max objective error %.2g, max KKT residual %.2g", suite.size(), worst_obj, worst_kkt));
  }

  // 8. Penalised γ with precision bounds.
  {
    const Vector bounds{{1.0, 1.0, 0.01, 0.01, 2.25}};
    DesignSpec spec = DesignSpec::penalized(NormType::H2, 1000.0);
    spec.kappa_sq_max = bounds;
    const DesignResult r = solve_design(plant, spec);
    bool ok = r.status == DesignStatus::Optimal;
    std::string detail;
    if (ok) {
      const double achieved = h2_norm(error_system(plant, r));
      const Vector& k = r.kappa_sq.kappa_sq;
      bool saturated = true;
      for (int i : r.kappa_sq.support) {
        if (k(i) > 1e-4 * bounds(i)) saturated = saturated && rel(k(i), bounds(i)) <= 1e-3;
      }
      const double kf = testing::kalman_h2(plant, bounds);
      ok = saturated && rel(achieved, 0.29) <= 0.1 && rel(achieved, kf) <= 1e-3;
      detail = fmt("gamma* %.6g (Kalman with all bounds active %.6g), kappa_sq (%.4g, %.4g, %.2g, %.2g, %.4g)",
                   achieved, kf, k(0), k(1), k(2), k(3), k(4));
    }
    report(8, ok, detail);
  }

  // 9. Monotonicity.
  {
    bool ok = true;
    std::string detail;
    for (NormType n : {NormType::H2, NormType::Hinf}) {
      double prev = 0.0;
      for (double g : kGammas) {
        for (const Case& c : cases) {
          if (c.norm != n || c.gamma != g) continue;
          const double l1 = c.result.kappa_sq.l1();
          ok = ok && l1 >= prev;
          prev = l1;
        }
      }
    }
    int plants = 0;
    for (const Case& c : cases) {
      const std::size_t ex = exhaustive_l0[{c.norm, c.gamma}];
      ok = ok && ex > 0 && ex <= c.result.support.size();
      ++plants;
    }
    // Random three-sensor plants.
    std::mt19937_64 rng(2024);
    int random_compared = 0;
    for (int trial = 0; trial < 6; ++trial) {
      LtiPlant p;
      p.A = testing::random_stable(rng, 3);
      p.B_u = Matrix::Zero(3, 1);
      p.B_d = testing::random_matrix(rng, 3, 1);
      p.C_y = testing::random_matrix(rng, 3, 3);
      p.C_z = Matrix::Identity(3, 3);
      p.D_u = Matrix::Zero(3, 1);
      p.D_d = Matrix::Zero(3, 1);
      p.S_d = Matrix::Identity(1, 1);
      const ErrorSystem open = build_error_system(p, Matrix::Zero(3, 3), PrecisionVector::from_values(Vector::Zero(3)));
      for (NormType n : {NormType::H2, NormType::Hinf}) {
        const double g = 0.5 * (n == NormType::H2 ? h2_norm(open) : hinf_norm(open));
        const DesignResult rw = sparse_design(p, DesignSpec::fixed(n, g));
        if (rw.status != DesignStatus::Optimal) continue;
        const ExhaustiveResult ex = exhaustive_search(p, DesignSpec::fixed(n, g));
        ok = ok && ex.best.status == DesignStatus::Optimal && ex.best.support.size() <= rw.support.size();
        ++random_compared;
      }
    }
    report(9, ok && random_compared > 0,
           fmt("l1 non-increasing in gamma for both norms; l0 check on %d F-16 cases and %d random plants", plants,
               random_compared));
  }

  // 10. Simulation: sparse vs full RMS and the noise-free decay envelope.
  {
    bool ok = true;
    std::string detail;
    for (double g : kGammas) {
      const DesignSpec spec = DesignSpec::fixed(NormType::H2, g);
      const DesignResult* sparse = nullptr;
      for (const Case& c : cases) {
        if (c.norm == NormType::H2 && c.gamma == g) sparse = &c.result;
      }
      const DesignResult full = polish(plant, spec, {0, 1, 2, 3, 4});
      if (!sparse || sparse->status != DesignStatus::Optimal || full.status != DesignStatus::Optimal) {
        ok = false;
        continue;
      }
      const ErrorSystem s_sys = error_system(plant, *sparse), f_sys = error_system(plant, full);
      SimulationOptions o;
      o.horizon = 200.0;
      o.seed = 42;
      const double rs = stationary_rms(simulate(s_sys, o), 50.0);
      const double rf = stationary_rms(simulate(f_sys, o), 50.0);
      const double ratio = std::abs(rs - rf) / std::min(rs, rf);
      o.noise.kind = NoiseModel::Kind::None;
      o.horizon = 10.0;
      const DecayCheck ds = check_decay(s_sys, simulate(s_sys, o));
      const DecayCheck df = check_decay(f_sys, simulate(f_sys, o));
      ok = ok && ratio <= 0.25 && ds.ok && df.ok;
      if (!detail.empty()) detail += "; ";
      detail += fmt("gamma %g: rms %.4g vs %.4g (diff %.1f%%), decay %s", g, rs, rf, 100.0 * ratio,
                    ds.ok && df.ok ? "ok" : "violated");
    }
    report(10, ok, detail);
  }

  int pass = 0, fail = 0, skipped = 0;
  for (const Verdict& v : g_verdicts) {
    if (v.result == "PASS") ++pass;
    else if (v.result == "FAIL") ++fail;
    else ++skipped;
  }
  std::printf("summary: %d passed, %d failed, %d skipped\n", pass, fail, skipped);
  return strict && fail > 0 ? 1 : 0;
}
