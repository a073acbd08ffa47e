#include "lacelab/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lacelab/error.hpp"

namespace lace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

json number_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

double parse_mass(const json& m) {
  if (m.is_number()) return m.get<double>();
  if (m.is_string()) {
    const auto s = m.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw ConfigError("kernel mass has zero denominator");
      return num / den;
    } catch (const std::invalid_argument&) {
      throw ConfigError("kernel mass '" + s + "' is not a rational");
    }
  }
  throw ConfigError("kernel mass must be a number or a \"num/den\" string");
}

}  // namespace

json kernel_to_json(const StepDistribution& dist) {
  json j;
  j["d"] = dist.dim();
  j["L"] = dist.range();
  if (dist.is_box()) j["include_origin"] = dist.includes_origin();
  json sup = json::array();
  for (const auto& s : dist.support()) {
    json rec;
    rec["x"] = s.x;
    if (s.den > 0) {
      rec["mass"] = std::to_string(s.num) + "/" + std::to_string(s.den);
    } else {
      rec["mass"] = s.mass;
    }
    sup.push_back(std::move(rec));
  }
  j["support"] = std::move(sup);
  return j;
}

StepDistribution kernel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("L") || !j.contains("support")) {
    throw ConfigError("kernel document needs d, L and support");
  }
  std::vector<Site> sites;
  for (const auto& rec : j.at("support")) {
    Site s;
    s.x = rec.at("x").get<std::vector<int>>();
    s.mass = parse_mass(rec.at("mass"));
    if (rec.at("mass").is_string()) {
      const auto str = rec.at("mass").get<std::string>();
      const auto slash = str.find('/');
      if (slash != std::string::npos) {
        s.num = std::stoll(str.substr(0, slash));
        s.den = std::stoll(str.substr(slash + 1));
      }
    }
    sites.push_back(std::move(s));
  }
  return StepDistribution(j.at("d").get<int>(), j.at("L").get<int>(), std::move(sites));
}

json to_json(const AssumptionDReport& r) {
  json j;
  j["eta"] = r.eta;
  j["eta_bound2"] = number_or_null(r.eta_bound2);
  j["eta_bound3"] = number_or_null(r.eta_bound3);
  j["c1"] = number_or_null(r.c1);
  j["c2"] = number_or_null(r.c2);
  j["holds_bound1"] = r.holds_bound1;
  j["holds_bound2"] = r.holds_bound2;
  j["holds_bound3"] = r.holds_bound3;
  j["worst_k"] = vec_json(r.worst_k);
  j["max_mass_ratio"] = r.max_mass_ratio;
  j["sigma2_ratio"] = r.sigma2_ratio;
  j["small_k_samples"] = r.small_count;
  j["large_k_samples"] = r.large_count;
  return j;
}

json to_json(const CriticalConstants& c) {
  json j;
  j["z_c"] = c.z_c;
  j["A"] = c.A;
  j["v"] = c.v;
  j["M"] = c.M;
  j["residual"] = c.residual;
  j["tail_estimate"] = c.tail_estimate ? number_or_null(*c.tail_estimate) : json(nullptr);
  j["bracket"] = {c.bracket.lo, c.bracket.hi};
  j["bracket_widened"] = c.bracket_widened;
  return j;
}

json to_json(const BoundReport& r) {
  json j;
  j["bound_id"] = r.bound_id;
  j["empirical_constant"] = number_or_null(r.empirical_constant);
  j["supplied_constant"] = r.supplied_constant ? json(*r.supplied_constant) : json(nullptr);
  j["passes"] = r.passes;
  j["witness"] = {{"index", r.witness.index}, {"k", vec_json(r.witness.k)}, {"z", r.witness.z}};
  j["tested_count"] = r.tested_count;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const std::vector<BoundReport>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

json to_json(const NormEstimate& n) {
  return json{{"m", n.m},
              {"p", n.p},
              {"value", n.value},
              {"std_error", n.std_error},
              {"method", to_string(n.method)},
              {"samples", n.sample_count},
              {"seed", n.seed}};
}

json to_json(const RegionReport& r) {
  json j;
  j["j"] = r.j;
  j["p"] = r.p;
  j["threshold"] = r.threshold;
  j["shares"] = {r.share[0], r.share[1], r.share[2], r.share[3]};
  j["counts"] = {r.count[0], r.count[1], r.count[2], r.count[3]};
  j["total"] = r.total;
  j["std_error"] = r.std_error;
  j["r1_envelope_constant"] = r.r1_envelope_constant;
  j["gaussian_rate"] = r.gaussian_rate;
  j["r2_empty"] = r.r2_empty;
  j["degenerate_regions"] = r.degenerate_regions;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  return j;
}

std::string f_table_csv(const RecursionState& st, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << " z=" << format_double(st.z) << "\n";
  os << "m,k_index,f\n";
  for (int m = 0; m <= st.horizon; ++m) {
    for (std::size_t ki = 0; ki < st.k_set.size(); ++ki) {
      os << m << ',' << ki << ',' << format_double(st.f[ki][m]) << '\n';
    }
  }
  return os.str();
}

json f_table_json(const RecursionState& st, std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["z"] = st.z;
  j["horizon"] = st.horizon;
  json ks = json::array();
  for (const auto& k : st.k_set) ks.push_back(vec_json(k));
  j["k_set"] = std::move(ks);
  json f = json::array();
  for (const auto& row : st.f) f.push_back(vec_json(row));
  j["f"] = std::move(f);
  if (st.f_at_zero) j["f_at_zero"] = vec_json(*st.f_at_zero);
  if (st.laplacian0) j["laplacian_at_zero"] = vec_json(*st.laplacian0);
  return j;
}

std::string coefficients_csv(const ModelSequences& model, const std::vector<Vec>& k_set, double z, int horizon,
                             std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << "\n";
  os << "m,k_index,z,g,e\n";
  for (std::size_t ki = 0; ki < k_set.size(); ++ki) {
    const Vec g = model.g_values(k_set[ki], z, horizon);
    const Vec e = model.e_values(k_set[ki], z, horizon);
    for (int m = 1; m <= horizon; ++m) {
      os << m << ',' << ki << ',' << format_double(z) << ',' << format_double(g[m - 1]) << ','
         << format_double(e[m - 1]) << '\n';
    }
  }
  return os.str();
}

std::string norms_csv(const std::vector<NormEstimate>& norms, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << "\n";
  os << "m,p,value,std_error,method,samples,seed\n";
  for (const auto& n : norms) {
    os << n.m << ',' << format_double(n.p) << ',' << format_double(n.value) << ',' << format_double(n.std_error)
       << ',' << to_string(n.method) << ',' << n.sample_count << ',' << n.seed << '\n';
  }
  return os.str();
}

std::string gaussian_csv(const ScalingProbe& probe, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << "\n";
  os << "n,k_magnitude,direction,ratio,regime_flag\n";
  for (const auto& r : probe.rows) {
    os << r.n << ',' << format_double(r.k_magnitude) << ',' << r.direction << ',' << format_double(r.ratio) << ','
       << (r.in_regime ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string bound_table(const std::vector<BoundReport>& rs) {
  std::ostringstream os;
  auto cell = [&](const std::string& text, int width) { os << std::left << std::setw(width) << text << ' '; };
  cell("bound", 17);
  cell("empirical", 23);
  cell("supplied", 23);
  cell("status", 6);
  cell("index", 7);
  os << "tested\n";
  for (const auto& r : rs) {
    cell(r.bound_id, 17);
    cell(format_double(r.empirical_constant), 23);
    cell(r.supplied_constant ? format_double(*r.supplied_constant) : std::string("-"), 23);
    cell(r.passes ? "ok" : "FAIL", 6);
    cell(std::to_string(r.witness.index), 7);
    os << r.tested_count;
    if (!r.note.empty()) os << "  (" << r.note << ")";
    os << '\n';
  }
  return os.str();
}

std::vector<Vec> read_k_file(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open k-file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<Vec> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const json j = json::parse(text);
    for (const auto& row : j) out.push_back(row.get<Vec>());
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      for (auto& c : line) {
        if (c == ',') c = ' ';
      }
      std::istringstream ls(line);
      Vec k;
      double x;
      while (ls >> x) k.push_back(x);
      if (!k.empty()) out.push_back(std::move(k));
    }
  }
  for (const auto& k : out) {
    if (static_cast<int>(k.size()) != d) {
      throw ConfigError("k-file '" + path + "': expected " + std::to_string(d) + " components per vector");
    }
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

}  // namespace lace
