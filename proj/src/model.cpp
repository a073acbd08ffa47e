#include "lacelab/model.hpp"

#include <cmath>
#include <limits>

#include "lacelab/error.hpp"
#include "lacelab/recursion.hpp"

namespace lace {

struct ModelSequences::Cached {
  std::mutex mu;
  std::map<Vec, Vec> g_unit;  // canonical k -> g_1..g_nmax at z = 1
};

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::simple_random_walk: return "simple_random_walk";
    case ModelKind::synthetic_theta: return "synthetic_theta";
    case ModelKind::weakly_saw: return "weakly_saw";
    case ModelKind::extracted: return "extracted";
  }
  return "unknown";
}

std::string to_string(SignPattern signs) {
  switch (signs) {
    case SignPattern::plus: return "+";
    case SignPattern::minus: return "-";
    case SignPattern::alternating: return "alt";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "simple_random_walk" || s == "srw") return ModelKind::simple_random_walk;
  if (s == "synthetic_theta" || s == "synthetic") return ModelKind::synthetic_theta;
  if (s == "weakly_saw") return ModelKind::weakly_saw;
  if (s == "extracted") return ModelKind::extracted;
  throw ConfigError("unknown model kind '" + s + "'");
}

SignPattern parse_sign_pattern(const std::string& s) {
  if (s == "+" || s == "plus") return SignPattern::plus;
  if (s == "-" || s == "−" || s == "minus") return SignPattern::minus;
  if (s == "alt" || s == "alternating") return SignPattern::alternating;
  throw ConfigError("unknown sign pattern '" + s + "' (expected +, -, alt)");
}

int sign_of(SignPattern signs, int m) {
  switch (signs) {
    case SignPattern::plus: return 1;
    case SignPattern::minus: return -1;
    case SignPattern::alternating: return (m % 2 == 0) ? 1 : -1;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

class VisitCounter {
 public:
  VisitCounter(int d, int radius) : d_(d), side_(2 * radius + 1), radius_(radius) {
    double cells = std::pow(static_cast<double>(side_), d);
    if (cells <= 1e7) dense_.assign(static_cast<std::size_t>(cells), 0);
  }

  std::int64_t index(const std::vector<int>& x) const {
    std::int64_t idx = 0;
    for (int i = d_ - 1; i >= 0; --i) idx = idx * side_ + (x[i] + radius_);
    return idx;
  }

  int get(std::int64_t idx) const {
    if (!dense_.empty()) return dense_[static_cast<std::size_t>(idx)];
    auto it = sparse_.find(idx);
    return it == sparse_.end() ? 0 : it->second;
  }
  void bump(std::int64_t idx, int delta) {
    if (!dense_.empty()) {
      dense_[static_cast<std::size_t>(idx)] += delta;
    } else {
      sparse_[idx] += delta;
    }
  }

 private:
  int d_;
  std::int64_t side_;
  int radius_;
  std::vector<int> dense_;
  std::map<std::int64_t, int> sparse_;
};

struct Enumerator {
  const StepDistribution& kernel;
  double u;
  int n_max;
  VisitCounter visits;
  std::vector<std::map<std::int64_t, std::pair<std::vector<int>, double>>> acc;
  std::uint64_t steps = 0;
  std::vector<int> pos;

  void walk(int n, double weight) {
    for (const auto& site : kernel.support()) {
      std::vector<int> next = pos;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += site.x[i];
      const auto idx = visits.index(next);
      const int prior = visits.get(idx);
      double w = weight * site.mass;
      if (prior > 0) w *= std::pow(1.0 - u, prior);
      ++steps;
      if (w == 0.0) continue;
      auto& slot = acc[n + 1][idx];
      if (slot.first.empty()) slot.first = next;
      slot.second += w;
      if (n + 1 < n_max) {
        visits.bump(idx, 1);
        std::swap(pos, next);
        walk(n + 1, w);
        std::swap(pos, next);
        visits.bump(idx, -1);
      }
    }
  }
};

}  // namespace

WalkEnumeration enumerate_walks(const StepDistribution& kernel, double u, int n_max, double budget) {
  if (!(u >= 0.0 && u <= 1.0)) throw PreconditionError("enumerate_walks: u must lie in [0, 1]");
  if (n_max < 1) throw PreconditionError("enumerate_walks: n_max must be >= 1");
  const double s = static_cast<double>(kernel.support().size());
  double total = 0.0;
  double term = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    term *= s;
    total += term;
  }
  if (total > budget) {
    throw BudgetError("enumeration budget exceeded: " + std::to_string(total) + " path-steps > budget " +
                      std::to_string(budget));
  }

  const int d = kernel.dim();
  Enumerator en{kernel, u, n_max, VisitCounter(d, n_max * kernel.range()), {}, 0, std::vector<int>(d, 0)};
  en.acc.resize(n_max + 1);
  en.visits.bump(en.visits.index(en.pos), 1);
  en.walk(0, 1.0);

  WalkEnumeration out;
  out.n_max = n_max;
  out.u = u;
  out.path_steps = en.steps;
  out.endpoints.resize(n_max + 1);
  out.endpoints[0].push_back({std::vector<int>(d, 0), 1.0});
  for (int n = 1; n <= n_max; ++n) {
    for (auto& [idx, entry] : en.acc[n]) out.endpoints[n].push_back(std::move(entry));
  }
  return out;
}

FTable walk_f_table(const WalkEnumeration& walks, std::span<const Vec> k_set, double z) {
  FTable t;
  t.z = z;
  t.k_set.assign(k_set.begin(), k_set.end());
  for (const auto& k : k_set) {
    Vec f(walks.n_max + 1);
    double zn = 1.0;
    for (int n = 0; n <= walks.n_max; ++n) {
      CompensatedSum s;
      for (const auto& [x, w] : walks.endpoints[n]) {
        double phase = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) phase += k[i] * x[i];
        s.add(w * std::cos(phase));
      }
      f[n] = zn * s.value();
      zn *= z;
    }
    t.values.push_back(std::move(f));
  }
  return t;
}

FTable enumerate_weakly_saw(const StepDistribution& kernel, double u, int n_max,
                            std::span<const Vec> k_set, double z, double budget) {
  return walk_f_table(enumerate_walks(kernel, u, n_max, budget), k_set, z);
}

// ---------------------------------------------------------------------------
// Extraction

ExtendedVec deconvolve_extended(std::span<const double> f, int horizon) {
  if (horizon < 0 || static_cast<int>(f.size()) < horizon + 1) {
    throw IncompleteInputError("extract_coefficients: missing f_m for m <= " + std::to_string(horizon));
  }
  if (std::abs(f[0] - 1.0) > 1e-12) {
    throw IncompleteInputError("extract_coefficients: f_0 = 1 required");
  }
  ExtendedVec g(horizon + 1);  // g[0] unused
  for (int m = 1; m <= horizon; ++m) {
    Extended s = f[m];
    for (int j = 1; j < m; ++j) s -= g[j] * f[m - j];
    g[m] = s;
  }
  return {g.begin() + 1, g.end()};
}

Vec deconvolve(std::span<const double> f, int horizon) {
  const auto g = deconvolve_extended(f, horizon);
  Vec out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<double>(g[i]);
  return out;
}

ModelSequences extract_coefficients(const StepDistribution& kernel, const FTable& table, int horizon) {
  return ModelSequences::extracted(kernel, std::span<const FTable>(&table, 1), horizon);
}

// ---------------------------------------------------------------------------
// ModelSequences

ModelSequences ModelSequences::simple_random_walk(StepDistribution kernel, int n_max) {
  if (n_max < 1) throw PreconditionError("model horizon must be >= 1");
  ModelSequences m;
  m.kind_ = ModelKind::simple_random_walk;
  m.kernel_ = std::make_shared<const StepDistribution>(std::move(kernel));
  m.n_max_ = n_max;
  return m;
}

ModelSequences ModelSequences::synthetic(StepDistribution kernel, SyntheticSpec spec, int n_max) {
  if (!(spec.theta > 2.0)) throw PreconditionError("synthetic model: theta > 2 required");
  if (!(spec.beta0 >= 0.0) || !(spec.beta0_e >= 0.0)) {
    throw PreconditionError("synthetic model: amplitudes must be nonnegative");
  }
  if (n_max < 1) throw PreconditionError("model horizon must be >= 1");
  ModelSequences m;
  m.kind_ = ModelKind::synthetic_theta;
  m.kernel_ = std::make_shared<const StepDistribution>(std::move(kernel));
  m.n_max_ = n_max;
  m.synthetic_ = spec;
  return m;
}

ModelSequences ModelSequences::weakly_saw(StepDistribution kernel, double u, int n_max, double budget) {
  ModelSequences m;
  m.kind_ = ModelKind::weakly_saw;
  m.walks_ = std::make_shared<const WalkEnumeration>(enumerate_walks(kernel, u, n_max, budget));
  m.kernel_ = std::make_shared<const StepDistribution>(std::move(kernel));
  m.n_max_ = n_max;
  m.u_ = u;
  m.cache_ = std::make_shared<Cached>();
  return m;
}

ModelSequences ModelSequences::extracted(StepDistribution kernel, std::span<const FTable> tables, int horizon) {
  if (tables.empty()) throw IncompleteInputError("extract_coefficients: no f tables supplied");
  if (horizon < 1) throw PreconditionError("extract_coefficients: horizon must be >= 1");
  auto data = std::make_shared<std::map<double, std::map<Vec, ExtendedVec>>>();
  for (const auto& t : tables) {
    if (t.values.size() != t.k_set.size()) {
      throw IncompleteInputError("extract_coefficients: table has mismatched k-set and values");
    }
    auto& per_k = (*data)[t.z];
    for (std::size_t i = 0; i < t.k_set.size(); ++i) {
      if (static_cast<int>(t.k_set[i].size()) != kernel.dim()) {
        throw PreconditionError("extract_coefficients: k has wrong dimension");
      }
      per_k[canonical_frequency(t.k_set[i])] = deconvolve_extended(t.values[i], horizon);
    }
  }
  ModelSequences m;
  m.kind_ = ModelKind::extracted;
  m.kernel_ = std::make_shared<const StepDistribution>(std::move(kernel));
  m.n_max_ = horizon;
  m.extracted_ = std::move(data);
  return m;
}

int ModelSequences::memory_length() const {
  return kind_ == ModelKind::simple_random_walk ? 1 : n_max_;
}

double ModelSequences::k_step(int m) const {
  return 1e-3 / (kernel_->range() * std::sqrt(static_cast<double>(std::max(m, 1))));
}

void ModelSequences::check_index(int m) const {
  if (m < 1) throw PreconditionError("coefficient index m must be >= 1");
  if (m > n_max_) {
    throw HorizonError("coefficient index m = " + std::to_string(m) + " exceeds horizon n_max = " +
                       std::to_string(n_max_));
  }
}

void ModelSequences::check_query(int m, std::span<const double> k, double z) const {
  check_index(m);
  if (static_cast<int>(k.size()) != kernel_->dim()) {
    throw PreconditionError("coefficient query: k has wrong dimension");
  }
  if (!(z > 0.0)) throw PreconditionError("coefficient query: z must be positive");
}

const Vec& ModelSequences::cached_g_unit(std::span<const double> k) const {
  Vec key = canonical_frequency(k);
  std::lock_guard lock(cache_->mu);
  auto it = cache_->g_unit.find(key);
  if (it != cache_->g_unit.end()) return it->second;
  const std::vector<Vec> ks{key};
  const FTable t = walk_f_table(*walks_, ks, 1.0);
  return cache_->g_unit.emplace(std::move(key), deconvolve(t.values[0], n_max_)).first->second;
}

const ExtendedVec& ModelSequences::extracted_g(std::span<const double> k, double z) const {
  auto zt = extracted_->find(z);
  if (zt == extracted_->end()) {
    throw IncompleteInputError("extracted coefficients are not available at z = " + std::to_string(z));
  }
  auto kt = zt->second.find(canonical_frequency(k));
  if (kt == zt->second.end()) {
    throw IncompleteInputError("extracted coefficients are not available at the requested k");
  }
  return kt->second;
}

Vec ModelSequences::g_values(std::span<const double> k, double z, int n) const {
  if (n < 0) throw PreconditionError("g_values: n must be >= 0");
  if (n == 0) return {};
  check_query(n, k, z);
  Vec out(n, 0.0);
  switch (kind_) {
    case ModelKind::simple_random_walk:
      out[0] = z * fourier(*kernel_, k);
      break;
    case ModelKind::synthetic_theta: {
      const double dhat = fourier(*kernel_, k);
      out[0] = z * dhat;
      for (int m = 2; m <= n; ++m) {
        out[m - 1] = sign_of(synthetic_.signs, m) * synthetic_.beta0 *
                     std::pow(static_cast<double>(m), -synthetic_.theta) * std::pow(z * dhat, m);
      }
      break;
    }
    case ModelKind::weakly_saw: {
      const Vec& gu = cached_g_unit(k);
      double zm = 1.0;
      for (int m = 1; m <= n; ++m) {
        zm *= z;
        out[m - 1] = zm * gu[m - 1];
      }
      break;
    }
    case ModelKind::extracted: {
      const auto& gx = extracted_g(k, z);
      for (int m = 0; m < n; ++m) out[m] = static_cast<double>(gx[m]);
      break;
    }
  }
  return out;
}

long double ModelSequences::g1_extended(std::span<const double> k, double z) const {
  check_query(1, k, z);
  if (kind_ == ModelKind::simple_random_walk || kind_ == ModelKind::synthetic_theta) {
    return static_cast<long double>(z) * fourier_extended(*kernel_, k);
  }
  return g(1, k, z);
}

std::optional<ExtendedVec> ModelSequences::g_values_extended(std::span<const double> k, double z,
                                                                          int n) const {
  if (kind_ != ModelKind::extracted) return std::nullopt;
  if (n < 1) throw PreconditionError("g_values_extended: n must be >= 1");
  check_query(n, k, z);
  const auto& gx = extracted_g(k, z);
  return ExtendedVec(gx.begin(), gx.begin() + n);
}

Vec ModelSequences::e_values(std::span<const double> k, double z, int n) const {
  if (n < 0) throw PreconditionError("e_values: n must be >= 0");
  if (n == 0) return {};
  check_query(n, k, z);
  Vec out(n, 0.0);
  if (kind_ == ModelKind::synthetic_theta && synthetic_.beta0_e != 0.0) {
    const double dhat = fourier(*kernel_, k);
    for (int m = 2; m <= n; ++m) {
      out[m - 1] = sign_of(synthetic_.signs, m) * synthetic_.beta0_e *
                   std::pow(static_cast<double>(m), -synthetic_.theta) * std::pow(dhat, m);
    }
  }
  return out;
}

double ModelSequences::g(int m, std::span<const double> k, double z) const {
  check_query(m, k, z);
  switch (kind_) {
    case ModelKind::simple_random_walk:
      return m == 1 ? z * fourier(*kernel_, k) : 0.0;
    case ModelKind::synthetic_theta: {
      const double dhat = fourier(*kernel_, k);
      if (m == 1) return z * dhat;
      return sign_of(synthetic_.signs, m) * synthetic_.beta0 *
             std::pow(static_cast<double>(m), -synthetic_.theta) * std::pow(z * dhat, m);
    }
    case ModelKind::weakly_saw:
      return std::pow(z, m) * cached_g_unit(k)[m - 1];
    case ModelKind::extracted:
      return static_cast<double>(extracted_g(k, z)[m - 1]);
  }
  return 0.0;
}

double ModelSequences::e(int m, std::span<const double> k, double z) const {
  check_query(m, k, z);
  if (m == 1 || kind_ != ModelKind::synthetic_theta) return 0.0;
  return sign_of(synthetic_.signs, m) * synthetic_.beta0_e *
         std::pow(static_cast<double>(m), -synthetic_.theta) * std::pow(fourier(*kernel_, k), m);
}

double ModelSequences::g_laplacian_at_zero(int m, double z) const {
  check_index(m);
  const double s2 = kernel_->sigma2();
  switch (kind_) {
    case ModelKind::simple_random_walk:
      return m == 1 ? -z * s2 : 0.0;
    case ModelKind::synthetic_theta: {
      // Laplacian of D-hat^m at 0 is -m sigma^2 (D-hat(0) = 1, grad D-hat(0) = 0).
      const Vec zero(kernel_->dim(), 0.0);
      return -static_cast<double>(m) * s2 * g(m, zero, z);
    }
    case ModelKind::weakly_saw:
    case ModelKind::extracted:
      return symmetric_laplacian_fd([&](std::span<const double> k) { return g(m, k, z); },
                                    kernel_->dim(), k_step(m));
  }
  return 0.0;
}

double ModelSequences::e_laplacian_at_zero(int m, double z) const {
  check_index(m);
  if (kind_ != ModelKind::synthetic_theta || m == 1) return 0.0;
  const Vec zero(kernel_->dim(), 0.0);
  return -static_cast<double>(m) * kernel_->sigma2() * e(m, zero, z);
}

double ModelSequences::g_z_derivative_at_zero(int m, double z) const {
  check_index(m);
  switch (kind_) {
    case ModelKind::simple_random_walk:
      return m == 1 ? 1.0 : 0.0;
    case ModelKind::synthetic_theta:
      if (m == 1) return 1.0;
      return sign_of(synthetic_.signs, m) * synthetic_.beta0 * m *
             std::pow(static_cast<double>(m), -synthetic_.theta) * std::pow(z, m - 1);
    case ModelKind::weakly_saw:
    case ModelKind::extracted: {
      const Vec zero(kernel_->dim(), 0.0);
      auto central = [&](double h) { return (g(m, zero, z + h) - g(m, zero, z - h)) / (2.0 * h); };
      const double coarse = central(kZStep);
      const double fine = central(kZStep / 2.0);
      return (4.0 * fine - coarse) / 3.0;
    }
  }
  return 0.0;
}

std::optional<double> ModelSequences::tail_estimate(int M, double z) const {
  switch (kind_) {
    case ModelKind::simple_random_walk:
      return 0.0;
    case ModelKind::synthetic_theta: {
      if (synthetic_.beta0 == 0.0) return 0.0;
      if (z > 1.0) return std::numeric_limits<double>::infinity();
      const double t = synthetic_.theta;
      return synthetic_.beta0 * std::pow(static_cast<double>(M), 2.0 - t) / (t - 2.0);
    }
    case ModelKind::weakly_saw:
    case ModelKind::extracted:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace lace
