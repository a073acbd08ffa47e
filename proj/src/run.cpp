#include "lacelab/run.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "lacelab/critical.hpp"
#include "lacelab/error.hpp"
#include "lacelab/gaussian.hpp"
#include "lacelab/io.hpp"
#include "lacelab/quadrature.hpp"
#include "lacelab/recursion.hpp"
#include "lacelab/verify.hpp"

namespace lace {

namespace fs = std::filesystem;

StepDistribution build_kernel(const RunConfig& config) {
  if (!config.kernel.file.empty()) {
    std::ifstream in(config.kernel.file);
    if (!in) throw ConfigError("cannot open kernel file '" + config.kernel.file + "'");
    return kernel_from_json(json::parse(in));
  }
  return parse_kernel_spec(config.kernel.spec);
}

ModelSequences build_model(const RunConfig& config, const StepDistribution& kernel) {
  const int cap =
      config.model.n_max > 0 ? std::min(config.model.n_max, config.budgets.max_horizon) : config.budgets.max_horizon;
  switch (config.model.kind) {
    case ModelKind::simple_random_walk: return ModelSequences::simple_random_walk(kernel, cap);
    case ModelKind::synthetic_theta: return ModelSequences::synthetic(kernel, config.model.synthetic, cap);
    case ModelKind::weakly_saw:
      return ModelSequences::weakly_saw(kernel, config.model.u, cap, config.budgets.max_enumeration_steps);
    case ModelKind::extracted: break;
  }
  throw ConfigError("extracted models cannot be built from a config");
}

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, std::vector<ArtifactEntry>& files) : dir_(std::move(dir)), files_(files) {}

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (dir_ / name).string() + "'");
    out << bytes;
    out.close();
    files_.push_back({name, sha256_hex(bytes), bytes.size()});
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
  std::vector<ArtifactEntry>& files_;
};

// Every m in [2, 64], then powers of two up to the horizon.
std::vector<int> check_ms(int horizon) {
  std::vector<int> ms;
  for (int m = 2; m <= std::min(horizon, 64); ++m) ms.push_back(m);
  for (int m = 128; m <= horizon; m *= 2) ms.push_back(m);
  if (ms.back() != horizon) ms.push_back(horizon);
  return ms;
}

std::vector<int> dyadic_ms(int horizon) {
  std::vector<int> ms;
  for (int m = 1; m <= horizon; m *= 2) ms.push_back(m);
  if (ms.back() != horizon) ms.push_back(horizon);
  return ms;
}

QuadratureSpec quad_for(const RunConfig& config, const StepDistribution& kernel) {
  QuadratureSpec q = config.norms.quad;
  q.seed = config.seed;
  if (kernel.dim() > 3) q.method = QuadMethod::monte_carlo;
  q.samples = std::min<std::uint64_t>(q.samples, config.budgets.max_mc_samples);
  return q;
}

json seeded(std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  return j;
}

}  // namespace

RunOutcome run_all(const RunConfig& config) {
  RunOutcome outcome;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  ArtifactWriter out(dir, outcome.files);
  const std::uint64_t seed = config.seed;

  std::optional<Analysis> current;
  std::vector<std::string> completed;
  try {
    const StepDistribution kernel = build_kernel(config);
    {
      json kj = seeded(seed);
      kj["kernel"] = kernel_to_json(kernel);
      kj["sigma2"] = kernel.sigma2();
      kj["beta"] = config.params.beta;
      out.write_json("kernel.json", kj);
    }
    const ModelSequences model = build_model(config, kernel);
    std::optional<CriticalConstants> crit;

    for (Analysis a : analysis_order()) {
      if (!config.wants(a)) continue;
      current = a;
      switch (a) {
        case Analysis::check_d: {
          const auto ks = default_k_samples(kernel);
          json j = seeded(seed);
          j["kernel"] = kernel.spec_string();
          j["report"] = to_json(check_assumption_d(kernel, ks));
          out.write_json("assumption_d.json", j);
          break;
        }
        case Analysis::run: {
          const auto ks = config.run.k_file.empty() ? default_k_samples(kernel, config.run.k_count)
                                                    : read_k_file(config.run.k_file, kernel.dim());
          const RecursionState st = solve(model, config.run.z.value, ks, config.run.horizon);
          out.write("f_table.csv", f_table_csv(st, seed));
          out.write_json("f_table.json", f_table_json(st, seed));
          out.write("coefficients.csv", coefficients_csv(model, ks, st.z, st.horizon, seed));
          break;
        }
        case Analysis::critical: {
          ZcOptions opt;
          opt.tol = config.critical.tol;
          opt.bracket_half_width = config.critical.alpha;
          crit = solve_zc(model, config.critical.M, opt);
          json j = seeded(seed);
          j.update(to_json(*crit));
          out.write_json("critical.json", j);
          break;
        }
        case Analysis::verify: {
          const double z = config.verify.z.use_zc ? crit->z_c : config.verify.z.value;
          const int h = config.verify.horizon;
          const auto ks = default_k_samples(kernel, config.verify.k_count);
          const RecursionState st = solve(model, z, ks, h);
          const SequenceState seq = sequences(model, z, h);
          CheckGrid grid{check_ms(h), ks, config.verify.zs};
          const QuadratureSpec quad = quad_for(config, kernel);
          const auto norms = lp_norms(model, z, dyadic_ms(h), config.params.B, quad);

          std::vector<BoundReport> reports = check_f_bounds(st, kernel, config.params, norms);
          auto append = [&](std::vector<BoundReport> more) {
            reports.insert(reports.end(), more.begin(), more.end());
          };
          append(check_assumption_e(model, config.params, grid));
          append(check_assumption_g(model, config.params, grid, config.verify.eps_primes));
          RegimeCounts regimes;
          append(check_h1_h4(model, st, seq, config.params, &regimes));
          append(check_consequences(model, st, seq, config.params, norms, grid, config.verify.eps_primes));

          // Envelope rate c in exp(-c p j (L|k|)^2): half the Gaussian rate of f_j.
          const double rate = kernel.sigma2() / (4.0 * kernel.range() * kernel.range());
          json regions = json::array();
          for (int j : config.verify.region_js) {
            if (j > h) continue;
            for (double p : config.params.B) {
              const auto samples = std::min(default_mc_samples(j), config.budgets.max_mc_samples);
              regions.push_back(to_json(region_decomposition(model, z, j, p, config.params, samples, seed, rate)));
            }
          }

          json j = seeded(seed);
          j["z"] = z;
          j["horizon"] = h;
          j["reports"] = to_json(reports);
          j["regimes"] = {{"h3_points", regimes.h3_points},
                          {"h4_points", regimes.h4_points},
                          {"empty_h3_at", regimes.empty_h3_at}};
          j["regions"] = std::move(regions);
          out.write_json("verify.json", j);
          out.write("verify.txt", "# seed=" + std::to_string(seed) + "\n" + bound_table(reports));
          if (!all_pass(reports)) outcome.exit_status = 1;
          break;
        }
        case Analysis::norms: {
          const double z = config.norms.z.use_zc ? crit->z_c : config.norms.z.value;
          const auto norms = lp_norms(model, z, config.norms.ms, config.norms.ps, quad_for(config, kernel));
          out.write("norms.csv", norms_csv(norms, seed));
          json j = seeded(seed);
          j["z"] = z;
          json fits = json::array();
          if (config.norms.fit) {
            for (double p : config.norms.ps) {
              std::vector<NormEstimate> sel;
              for (const auto& n : norms) {
                if (n.p == p) sel.push_back(n);
              }
              json f{{"p", p}};
              try {
                const DecayFit fit = decay_fit(sel, -expected_decay_exponent(kernel.dim(), p, config.params.theta));
                f["slope"] = fit.slope;
                f["amplitude"] = fit.amplitude;
                f["expected_slope"] = *fit.expected_slope;
                f["deviation"] = *fit.deviation;
                f["points"] = fit.points;
              } catch (const FitError& e) {
                f["error"] = e.what();
              }
              fits.push_back(std::move(f));
            }
          }
          j["fits"] = std::move(fits);
          out.write_json("norms.json", j);
          break;
        }
        case Analysis::gaussian: {
          ClTProbeSet probes = default_probes(kernel.dim());
          probes.magnitudes = config.gaussian.magnitudes;
          const ScalingProbe probe = probe_clt(model, *crit, config.gaussian.ladder, probes, config.params.gamma);
          out.write("gaussian.csv", gaussian_csv(probe, seed));
          json j = seeded(seed);
          j["z_c"] = probe.z_c;
          j["A_used"] = probe.A_used;
          j["v_used"] = probe.v_used;
          j["delta_hat"] = probe.delta_hat ? json(*probe.delta_hat) : json(nullptr);
          j["theta_hat"] = probe.theta_hat_minus_2 ? json(*probe.theta_hat_minus_2 + 2.0) : json(nullptr);
          j["skipped_n"] = probe.skipped_n;
          j["fit_note"] =
              "modelling choice: the k = 0 deviation gives theta_hat - 2, the k-dependent excess gives delta_hat";
          try {
            const VarianceProbe vp = probe_variance(model, *crit, config.gaussian.ladder);
            j["variance"] = {{"n", vp.n},
                             {"ratio", vp.ratio},
                             {"delta_hat", vp.delta_hat ? json(*vp.delta_hat) : json(nullptr)}};
          } catch (const DegenerateError& e) {
            j["variance"] = {{"error", e.what()}};
          }
          out.write_json("gaussian.json", j);
          break;
        }
      }
      completed.push_back(to_string(a));
    }
    current.reset();
  } catch (const std::exception& e) {
    outcome.complete = false;
    outcome.exit_status = 2;
    outcome.failed_analysis = current;
    outcome.error = (current ? to_string(*current) : std::string("setup")) + ": " + e.what();
  }

  json m = seeded(seed);
  m["complete"] = outcome.complete;
  m["exit_status"] = outcome.exit_status;
  json requested = json::array();
  for (Analysis a : analysis_order()) {
    if (config.wants(a)) requested.push_back(to_string(a));
  }
  m["requested"] = std::move(requested);
  m["completed"] = completed;
  if (!outcome.complete) m["error"] = outcome.error;
  json files = json::array();
  for (const auto& f : outcome.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  m["files"] = std::move(files);
  std::ofstream(dir / "manifest.json", std::ios::binary) << m.dump(2) << "\n";
  return outcome;
}

}  // namespace lace
