#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lacelab/config.hpp"
#include "lacelab/error.hpp"
#include "lacelab/run.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;

  std::string kernel;
  std::string model;
  double theta = 0.0;
  double beta0 = 0.0;
  double beta0_e = 0.0;
  std::string signs;
  double u = 0.0;
  int n_max = 0;
  double z = 1.0;
  int horizon = 0;
  std::string k_file;
  int M = 0;
};

void add_model_flags(CLI::App* app, Flags& f) {
  app->add_option("--kernel", f.kernel, "Kernel spec d:L[:include-origin]");
  app->add_option("--model", f.model, "Model kind: srw, synthetic, weakly_saw");
  app->add_option("--theta", f.theta, "Decay exponent of the synthetic family");
  app->add_option("--beta0", f.beta0, "Amplitude of g_m, m >= 2 (synthetic)");
  app->add_option("--beta0-e", f.beta0_e, "Amplitude of e_m, m >= 2 (synthetic)");
  app->add_option("--signs", f.signs, "Sign pattern: +, -, alt");
  app->add_option("--u", f.u, "Self-avoidance strength (weakly_saw)");
  app->add_option("--n-max", f.n_max, "Enumeration horizon (weakly_saw)");
}

json load_doc(const Flags& f) {
  if (f.config.empty()) return json::object();
  std::ifstream in(f.config);
  if (!in) throw lace::ConfigError("cannot open config '" + f.config + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw lace::ConfigError(f.config + ": not valid JSON: " + e.what());
  }
}

// Applies command-line overrides on top of the config document.
json merge(json doc, const CLI::App& sub, const Flags& f) {
  if (f.seed_set) doc["seed"] = f.seed;
  if (!doc.contains("seed")) {
    if (!f.config.empty()) throw lace::ConfigError(f.config + ": /seed: missing required field");
    doc["seed"] = 1;
  }
  if (!f.out.empty()) doc["output_dir"] = f.out;
  auto given = [&](const char* name) {
    const CLI::Option* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--kernel")) doc["kernel"] = f.kernel;
  if (given("--model")) doc["model"]["kind"] = f.model;
  if (given("--theta")) doc["model"]["theta"] = f.theta;
  if (given("--beta0")) doc["model"]["beta0"] = f.beta0;
  if (given("--beta0-e")) doc["model"]["beta0_e"] = f.beta0_e;
  if (given("--signs")) doc["model"]["signs"] = f.signs;
  if (given("--u")) doc["model"]["u"] = f.u;
  if (given("--n-max")) doc["model"]["n_max"] = f.n_max;
  if (given("--z")) doc["run"]["z"] = f.z;
  if (given("--horizon")) doc["run"]["horizon"] = f.horizon;
  if (given("--k-file")) doc["run"]["k_file"] = f.k_file;
  if (given("--M")) doc["critical"]["M"] = f.M;
  return doc;
}

bool refers_to_zc(const json& doc, const char* section) {
  if (!doc.contains(section) || !doc[section].contains("z")) return true;  // default is z_c
  const auto& z = doc[section]["z"];
  return z.is_string() && z.get<std::string>() == "z_c";
}

json analyses_for(const std::string& name, const json& doc) {
  if (name == "all") return doc.contains("analyses") ? doc["analyses"] : json::array({"check-d", "run", "critical",
                                                                                     "verify", "norms", "gaussian"});
  if (name == "gaussian") return json::array({"critical", "gaussian"});
  if ((name == "verify" || name == "norms") && refers_to_zc(doc, name.c_str())) return json::array({"critical", name});
  return json::array({name});
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  if (in) std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursion laboratory for lace-expansion style convolution equations"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "Run configuration (JSON)");
  app.add_option("--out", f.out, "Output directory");
  app.add_option_function<std::uint64_t>(
      "--seed",
      [&](std::uint64_t s) {
        f.seed = s;
        f.seed_set = true;
      },
      "Seed for all randomized estimates");

  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"check-d", "Check the kernel regularity conditions"},
      {"run", "Solve the recursion on a k set"},
      {"critical", "Locate z_c and the constants A, v"},
      {"verify", "Measure hypothesis constants and their consequences"},
      {"norms", "Estimate L^p norms and fit decay exponents"},
      {"gaussian", "Probe variance ratios and the scaling limit"},
      {"all", "Run every analysis in dependency order"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_model_flags(sub, f);
    subs.push_back(sub);
  }
  CLI::App* run = app.get_subcommand("run");
  run->add_option("--z", f.z, "Fugacity");
  run->add_option("--horizon", f.horizon, "Largest time index");
  run->add_option("--k-file", f.k_file, "Frequencies, one vector per line");
  app.get_subcommand("critical")->add_option("--M", f.M, "Truncation order");

  CLI11_PARSE(app, argc, argv);

  const CLI::App* chosen = nullptr;
  for (const CLI::App* s : subs) {
    if (s->parsed()) chosen = s;
  }
  const std::string name = chosen->get_name();

  try {
    json doc = merge(load_doc(f), *chosen, f);
    doc["analyses"] = analyses_for(name, doc);
    const lace::RunConfig config = lace::parse_config(doc.dump(), f.config.empty() ? "<flags>" : f.config);
    const lace::RunOutcome outcome = lace::run_all(config);

    const std::string dir = config.output_dir + "/";
    if (name == "critical") print_file(dir + "critical.json");
    if (name == "verify") print_file(dir + "verify.txt");
    if (name == "check-d") print_file(dir + "assumption_d.json");
    for (const auto& file : outcome.files) std::cerr << "wrote " << dir << file.name << "\n";
    if (!outcome.complete) std::cerr << "error: " << outcome.error << "\n";
    return outcome.exit_status;
  } catch (const lace::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
