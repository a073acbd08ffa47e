#include "lacelab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lacelab/error.hpp"
#include "lacelab/io.hpp"
#include "lacelab/kernel.hpp"

namespace lace {

std::string to_string(Analysis a) {
  switch (a) {
    case Analysis::check_d: return "check-d";
    case Analysis::run: return "run";
    case Analysis::critical: return "critical";
    case Analysis::verify: return "verify";
    case Analysis::norms: return "norms";
    case Analysis::gaussian: return "gaussian";
  }
  return "?";
}

Analysis parse_analysis(const std::string& s) {
  for (Analysis a : analysis_order()) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown analysis '" + s + "'");
}

const std::vector<Analysis>& analysis_order() {
  static const std::vector<Analysis> order{Analysis::check_d, Analysis::run,   Analysis::critical,
                                           Analysis::verify,  Analysis::norms, Analysis::gaussian};
  return order;
}

bool RunConfig::wants(Analysis a) const { return std::find(analyses.begin(), analyses.end(), a) != analyses.end(); }

namespace {

// Thin reader that remembers the JSON path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path, std::string origin) : j_(j), path_(std::move(path)), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(origin_ + ": " + (path_.empty() ? "/" : path_) + ": " + what);
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) Node(j_, path_ + "/" + key, origin_).fail("missing required field");
    return Node(j_.at(key), path_ + "/" + key, origin_);
  }

  const json& raw() const { return j_; }
  // True for messages produced by fail() on a node of this document.
  bool owns(const std::string& msg) const { return msg.rfind(origin_ + ": /", 0) == 0; }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }
  std::uint64_t uint64() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0)) {
      fail("expected a nonnegative integer");
    }
    return j_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<Node> items() const {
    if (!j_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.emplace_back(j_[i], path_ + "/" + std::to_string(i), origin_);
    return out;
  }
  Vec numbers() const {
    Vec out;
    for (const auto& n : items()) out.push_back(n.number());
    return out;
  }
  std::vector<int> integers() const {
    std::vector<int> out;
    for (const auto& n : items()) out.push_back(n.integer());
    return out;
  }
  ZChoice z_choice() const {
    if (j_.is_string()) {
      if (j_.get<std::string>() != "z_c") fail("expected a number or \"z_c\"");
      return {true, 1.0};
    }
    return {false, number()};
  }

  // Rejects keys outside `allowed`.
  void only(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        Node(value, path_ + "/" + key, origin_).fail("unknown field");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::string origin_;
};

template <class Fn>
auto guarded(const Node& n, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (n.owns(e.what())) throw;
    n.fail(e.what());
  } catch (const Error& e) {
    n.fail(e.what());
  }
}

StepDistribution load_kernel(const KernelConfig& kc) {
  if (!kc.file.empty()) {
    std::ifstream in(kc.file);
    if (!in) throw ConfigError("cannot open kernel file '" + kc.file + "'");
    return kernel_from_json(json::parse(in));
  }
  return parse_kernel_spec(kc.spec);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": not valid JSON: " + e.what());
  }
  const Node root(doc, "", origin);
  root.only({"seed", "output_dir", "kernel", "model", "params", "analyses", "budgets", "run", "critical", "verify",
             "norms", "gaussian"});
  RunConfig c;
  c.seed = root.at("seed").uint64();
  if (root.has("output_dir")) c.output_dir = root.at("output_dir").string();

  if (root.has("kernel")) {
    const Node k = root.at("kernel");
    if (k.raw().is_string()) {
      c.kernel.spec = k.string();
    } else {
      k.only({"spec", "file"});
      if (k.has("spec")) c.kernel.spec = k.at("spec").string();
      if (k.has("file")) c.kernel.file = k.at("file").string();
    }
  }
  const StepDistribution kernel = guarded(root, [&] { return load_kernel(c.kernel); });

  if (root.has("budgets")) {
    const Node b = root.at("budgets");
    b.only({"max_horizon", "max_enumeration_steps", "max_mc_samples"});
    if (b.has("max_horizon")) c.budgets.max_horizon = b.at("max_horizon").integer();
    if (b.has("max_enumeration_steps")) c.budgets.max_enumeration_steps = b.at("max_enumeration_steps").number();
    if (b.has("max_mc_samples")) c.budgets.max_mc_samples = b.at("max_mc_samples").uint64();
    if (c.budgets.max_horizon < 1) b.at("max_horizon").fail("must be >= 1");
  }

  if (root.has("params")) {
    const Node p = root.at("params");
    p.only({"theta", "eps", "gamma", "delta", "lambda", "p_star", "B", "beta", "K1", "K2", "K3", "K4", "K5", "K4p",
            "C_e", "C_g", "K_f", "c_K4", "C", "gg_ratio"});
    auto& q = c.params;
    auto num = [&](const char* key, double& dst) {
      if (p.has(key)) dst = p.at(key).number();
    };
    auto opt = [&](const char* key, std::optional<double>& dst) {
      if (p.has(key)) dst = p.at(key).number();
    };
    num("theta", q.theta);
    num("eps", q.eps);
    num("gamma", q.gamma);
    num("delta", q.delta);
    num("lambda", q.lambda);
    num("p_star", q.p_star);
    if (p.has("B")) q.B = p.at("B").numbers();
    if (p.has("beta")) {
      q.beta = p.at("beta").number();
      c.beta_given = true;
    }
    num("K1", q.K1);
    num("K2", q.K2);
    num("K3", q.K3);
    num("K4", q.K4);
    num("K5", q.K5);
    opt("K4p", q.K4p);
    opt("C_e", q.C_e);
    opt("C_g", q.C_g);
    opt("K_f", q.K_f);
    num("c_K4", q.c_K4);
    num("C", q.C);
    num("gg_ratio", q.gg_ratio);
  }
  if (!c.beta_given) c.params.beta = beta_for(kernel.range(), kernel.dim(), c.params.p_star);

  if (root.has("model")) {
    const Node m = root.at("model");
    m.only({"kind", "theta", "beta0", "beta0_rel", "beta0_e", "beta0_e_rel", "signs", "u", "n_max"});
    c.model.kind = guarded(m.at("kind"), [&] { return parse_model_kind(m.at("kind").string()); });
    auto& s = c.model.synthetic;
    s.theta = m.has("theta") ? m.at("theta").number() : c.params.theta;
    if (m.has("beta0") && m.has("beta0_rel")) m.fail("give beta0 or beta0_rel, not both");
    if (m.has("beta0")) s.beta0 = m.at("beta0").number();
    if (m.has("beta0_rel")) s.beta0 = m.at("beta0_rel").number() * c.params.beta;
    if (m.has("beta0_e") && m.has("beta0_e_rel")) m.fail("give beta0_e or beta0_e_rel, not both");
    if (m.has("beta0_e")) s.beta0_e = m.at("beta0_e").number();
    if (m.has("beta0_e_rel")) s.beta0_e = m.at("beta0_e_rel").number() * c.params.beta;
    if (m.has("signs")) s.signs = guarded(m.at("signs"), [&] { return parse_sign_pattern(m.at("signs").string()); });
    if (m.has("u")) c.model.u = m.at("u").number();
    if (m.has("n_max")) c.model.n_max = m.at("n_max").integer();
    if (c.model.kind == ModelKind::weakly_saw && !m.has("n_max")) m.fail("weakly_saw requires n_max");
    if (c.model.kind == ModelKind::extracted) m.at("kind").fail("extracted models are built from f-tables, not configs");
  }

  if (root.has("analyses")) {
    for (const auto& a : root.at("analyses").items()) {
      const Analysis an = guarded(a, [&] { return parse_analysis(a.string()); });
      if (!c.wants(an)) c.analyses.push_back(an);
    }
  } else {
    c.analyses = analysis_order();
  }

  if (root.has("run")) {
    const Node r = root.at("run");
    r.only({"z", "horizon", "k_count", "k_file"});
    if (r.has("z")) c.run.z = r.at("z").z_choice();
    if (r.has("horizon")) c.run.horizon = r.at("horizon").integer();
    if (r.has("k_count")) c.run.k_count = r.at("k_count").integer();
    if (r.has("k_file")) c.run.k_file = r.at("k_file").string();
  }
  if (root.has("critical")) {
    const Node r = root.at("critical");
    r.only({"M", "tol", "alpha"});
    if (r.has("M")) c.critical.M = r.at("M").integer();
    if (r.has("tol")) c.critical.tol = r.at("tol").number();
    if (r.has("alpha")) c.critical.alpha = r.at("alpha").number();
  }
  if (root.has("verify")) {
    const Node r = root.at("verify");
    r.only({"z", "horizon", "k_count", "zs", "eps_primes", "region_js"});
    if (r.has("z")) c.verify.z = r.at("z").z_choice();
    if (r.has("horizon")) c.verify.horizon = r.at("horizon").integer();
    if (r.has("k_count")) c.verify.k_count = r.at("k_count").integer();
    if (r.has("zs")) c.verify.zs = r.at("zs").numbers();
    if (r.has("eps_primes")) c.verify.eps_primes = r.at("eps_primes").numbers();
    if (r.has("region_js")) c.verify.region_js = r.at("region_js").integers();
  }
  if (root.has("norms")) {
    const Node r = root.at("norms");
    r.only({"z", "ms", "ps", "method", "grid_n", "samples", "fit"});
    if (r.has("z")) c.norms.z = r.at("z").z_choice();
    if (r.has("ms")) c.norms.ms = r.at("ms").integers();
    if (r.has("ps")) c.norms.ps = r.at("ps").numbers();
    if (r.has("method")) {
      c.norms.quad.method = guarded(r.at("method"), [&] { return parse_quad_method(r.at("method").string()); });
    }
    if (r.has("grid_n")) c.norms.quad.grid_n = r.at("grid_n").integer();
    if (r.has("samples")) c.norms.quad.samples = r.at("samples").uint64();
    if (r.has("fit")) c.norms.fit = r.at("fit").boolean();
  }
  if (c.verify.eps_primes.empty()) c.verify.eps_primes = {0.0, c.params.eps};
  if (c.norms.ms.empty()) c.norms.ms = {1, 2, 4, 8, 16, 32, 64, 128};
  c.norms.quad.seed = c.seed;
  if (root.has("gaussian")) {
    const Node r = root.at("gaussian");
    r.only({"ladder", "magnitudes"});
    if (r.has("ladder")) c.gaussian.ladder = r.at("ladder").integers();
    if (r.has("magnitudes")) c.gaussian.magnitudes = r.at("magnitudes").numbers();
  }

  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void validate(const RunConfig& c) {
  validate(c.params);
  const int cap = c.model.n_max > 0 ? std::min(c.model.n_max, c.budgets.max_horizon) : c.budgets.max_horizon;
  auto horizon = [&](const char* where, int h) {
    if (h < 1) throw ConfigError(std::string(where) + ": horizon must be >= 1");
    if (h > cap) {
      throw ConfigError(std::string(where) + ": horizon " + std::to_string(h) + " exceeds the cap " +
                        std::to_string(cap));
    }
  };
  auto needs_zc = [&](const char* where, const ZChoice& z) {
    if (z.use_zc && !c.wants(Analysis::critical)) {
      throw ConfigError(std::string(where) + ": z = \"z_c\" requires the critical analysis");
    }
  };
  if (c.model.kind == ModelKind::synthetic_theta && !(c.model.synthetic.theta > 2.0)) {
    throw ConfigError("/model/theta: θ > 2 required");
  }
  if (c.model.kind == ModelKind::weakly_saw && !(c.model.u >= 0.0 && c.model.u <= 1.0)) {
    throw ConfigError("/model/u: u ∈ [0, 1] required");
  }
  if (c.wants(Analysis::run)) {
    horizon("/run", c.run.horizon);
    // The recursion runs before the critical point is located.
    if (c.run.z.use_zc) throw ConfigError("/run/z: must be a number");
  }
  if (c.wants(Analysis::critical)) {
    if (c.critical.M < 1) throw ConfigError("/critical/M: must be >= 1");
    if (c.model.kind == ModelKind::weakly_saw) horizon("/critical", c.critical.M);
  }
  if (c.wants(Analysis::verify)) {
    horizon("/verify", c.verify.horizon);
    needs_zc("/verify/z", c.verify.z);
    if (c.verify.zs.empty()) throw ConfigError("/verify/zs: at least one z required");
    for (int j : c.verify.region_js) {
      if (j < 2) throw ConfigError("/verify/region_js: entries must be >= 2");
    }
  }
  if (c.wants(Analysis::norms)) {
    needs_zc("/norms/z", c.norms.z);
    for (int m : c.norms.ms) horizon("/norms/ms", m);
    for (double p : c.norms.ps) {
      if (!(p >= 1.0)) throw ConfigError("/norms/ps: p >= 1 required");
    }
    if (c.norms.quad.method == QuadMethod::monte_carlo && c.norms.quad.samples > c.budgets.max_mc_samples) {
      throw ConfigError("/norms/samples: exceeds budgets.max_mc_samples");
    }
  }
  if (c.wants(Analysis::gaussian)) {
    if (!c.wants(Analysis::critical)) throw ConfigError("/analyses: gaussian requires the critical analysis");
    for (int n : c.gaussian.ladder) horizon("/gaussian/ladder", n);
  }
}

}  // namespace lace
