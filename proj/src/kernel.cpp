#include "lacelab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <type_traits>

#include "lacelab/error.hpp"

namespace lace {

namespace {

constexpr double kPi = std::numbers::pi;

double compute_sigma2(const std::vector<Site>& support) {
  CompensatedSum s;
  for (const auto& site : support) {
    long long r2 = 0;
    for (int c : site.x) r2 += static_cast<long long>(c) * c;
    s.add(site.mass * static_cast<double>(r2));
  }
  return s.value();
}

void validate_symmetry(int dim, const std::vector<Site>& support) {
  std::map<std::vector<int>, double> masses;
  for (const auto& s : support) masses[s.x] += s.mass;
  auto mass_at = [&](const std::vector<int>& x) {
    auto it = masses.find(x);
    return it == masses.end() ? 0.0 : it->second;
  };
  // Sign flips of each coordinate and adjacent transpositions generate the
  // full hyperoctahedral group.
  for (const auto& [x, m] : masses) {
    for (int i = 0; i < dim; ++i) {
      auto y = x;
      y[i] = -y[i];
      if (std::abs(mass_at(y) - m) > 1e-14) {
        throw PreconditionError("kernel support is not invariant under sign flip of coordinate " +
                                std::to_string(i));
      }
      if (i + 1 < dim) {
        auto w = x;
        std::swap(w[i], w[i + 1]);
        if (std::abs(mass_at(w) - m) > 1e-14) {
          throw PreconditionError("kernel support is not invariant under coordinate permutations");
        }
      }
    }
  }
}

// sum_{x=-L}^{L} cos(t x)
template <class R>
R dirichlet_sum(R t, int L) {
  R s = 1;
  for (int x = 1; x <= L; ++x) s += 2 * std::cos(t * x);
  return s;
}

template <class R>
R fourier_in(const StepDistribution& dist, std::span<const double> k) {
  if (static_cast<int>(k.size()) != dist.dim()) {
    throw PreconditionError("fourier: frequency has wrong dimension");
  }
  const Vec q = canonical_frequency(k);
  const R origin = dist.includes_origin() ? 0 : 1;
  if (dist.is_box()) {
    R prod = 1;
    for (double t : q) prod *= dirichlet_sum<R>(t, dist.range());
    const R count = std::pow(R(2 * dist.range() + 1), dist.dim()) - origin;
    return (prod - origin) / count;
  }
  if constexpr (std::is_same_v<R, double>) {
    CompensatedSum s;
    for (const auto& site : dist.support()) {
      double phase = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) phase += q[i] * site.x[i];
      s.add(site.mass * std::cos(phase));
    }
    return s.value();
  } else {
    R s = 0;
    for (const auto& site : dist.support()) {
      R phase = 0;
      for (std::size_t i = 0; i < q.size(); ++i) phase += R(q[i]) * site.x[i];
      s += R(site.mass) * std::cos(phase);
    }
    return s;
  }
}
}  // namespace

StepDistribution::StepDistribution(int dim, int range, std::vector<Site> support)
    : dim_(dim), range_(range), support_(std::move(support)) {
  if (dim_ < 1) throw PreconditionError("kernel dimension must be >= 1");
  if (range_ < 1) throw PreconditionError("kernel range L must be >= 1");
  if (support_.empty()) throw PreconditionError("kernel support is empty");
  CompensatedSum total;
  for (const auto& s : support_) {
    if (static_cast<int>(s.x.size()) != dim_) {
      throw PreconditionError("kernel site has wrong dimension");
    }
    if (!(s.mass >= 0.0)) throw PreconditionError("kernel masses must be nonnegative");
    total.add(s.mass);
    max_mass_ = std::max(max_mass_, s.mass);
    if (s.mass > 0.0 && std::all_of(s.x.begin(), s.x.end(), [](int c) { return c == 0; })) {
      include_origin_ = true;
    }
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw PreconditionError("kernel masses must sum to 1");
  }
  validate_symmetry(dim_, support_);
  sigma2_ = compute_sigma2(support_);
}

double StepDistribution::max_mass_ratio() const {
  return max_mass_ * std::pow(static_cast<double>(range_), dim_);
}

double StepDistribution::l2_norm_squared() const {
  CompensatedSum s;
  for (const auto& site : support_) s.add(site.mass * site.mass);
  return s.value();
}

std::string StepDistribution::spec_string() const {
  std::ostringstream os;
  os << dim_ << ':' << range_;
  if (box_ && include_origin_) os << ":include-origin";
  return os.str();
}

StepDistribution make_uniform_box(int d, int L, bool include_origin) {
  if (d < 1) throw PreconditionError("make_uniform_box: d must be >= 1");
  if (L < 1) throw PreconditionError("make_uniform_box: L must be >= 1");
  const double side = 2.0 * L + 1.0;
  const double cells = std::pow(side, d);
  if (cells > 5e7) throw BudgetError("make_uniform_box: box has too many sites");
  const auto count = static_cast<std::int64_t>(cells) - (include_origin ? 0 : 1);

  StepDistribution dist;
  dist.dim_ = d;
  dist.range_ = L;
  dist.box_ = true;
  dist.include_origin_ = include_origin;
  dist.support_.reserve(static_cast<std::size_t>(count));
  std::vector<int> x(d, -L);
  const double mass = 1.0 / static_cast<double>(count);
  while (true) {
    const bool origin = std::all_of(x.begin(), x.end(), [](int c) { return c == 0; });
    if (include_origin || !origin) dist.support_.push_back({x, mass, 1, count});
    int i = 0;
    while (i < d && x[i] == L) x[i++] = -L;
    if (i == d) break;
    ++x[i];
  }
  dist.max_mass_ = mass;
  dist.sigma2_ = compute_sigma2(dist.support_);
  return dist;
}

StepDistribution parse_kernel_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 2 || parts.size() > 3) {
    throw ConfigError("kernel spec must be d:L[:include-origin], got '" + spec + "'");
  }
  int d = 0;
  int L = 0;
  try {
    d = std::stoi(parts[0]);
    L = std::stoi(parts[1]);
  } catch (const std::exception&) {
    throw ConfigError("kernel spec must be d:L[:include-origin], got '" + spec + "'");
  }
  bool include_origin = false;
  if (parts.size() == 3) {
    if (parts[2] != "include-origin") {
      throw ConfigError("unknown kernel option '" + parts[2] + "'");
    }
    include_origin = true;
  }
  if (d < 1 || L < 1) throw ConfigError("kernel spec needs d >= 1 and L >= 1");
  return make_uniform_box(d, L, include_origin);
}

Vec canonical_frequency(std::span<const double> k) {
  Vec c(k.size());
  std::transform(k.begin(), k.end(), c.begin(), [](double x) { return std::abs(x); });
  std::sort(c.begin(), c.end());
  return c;
}

double fourier(const StepDistribution& dist, std::span<const double> k) { return fourier_in<double>(dist, k); }

long double fourier_extended(const StepDistribution& dist, std::span<const double> k) {
  return fourier_in<long double>(dist, k);
}

double a_of_k(const StepDistribution& dist, std::span<const double> k) {
  return 1.0 - fourier(dist, k);
}

double moment(const StepDistribution& dist, double order) {
  if (order < 0.0) throw PreconditionError("moment: order must be >= 0");
  CompensatedSum s;
  for (const auto& site : dist.support()) {
    double r2 = 0.0;
    for (int c : site.x) r2 += static_cast<double>(c) * c;
    // |x|^0 = 1 including at the origin.
    const double w = order == 0.0 ? 1.0 : (order == 2.0 ? r2 : std::pow(r2, order / 2.0));
    s.add(site.mass * w);
  }
  return s.value();
}

AssumptionDReport check_assumption_d(const StepDistribution& dist,
                                     std::span<const Vec> k_samples) {
  AssumptionDReport rep;
  const double L = dist.range();
  const double inv_L = 1.0 / L;
  rep.max_mass_ratio = dist.max_mass_ratio();
  rep.sigma2_ratio = dist.sigma2() / (L * L);

  double c1 = std::numeric_limits<double>::infinity();
  double c2 = 0.0;
  double min_a_large = std::numeric_limits<double>::infinity();
  double max_a = -std::numeric_limits<double>::infinity();
  Vec c1_k, c2_k, large_k, max_k;

  for (const auto& k : k_samples) {
    const double a = a_of_k(dist, k);
    const double kinf = norm_inf(k);
    const double k2 = norm2_squared(k);
    if (a > max_a) {
      max_a = a;
      max_k = k;
    }
    if (kinf <= inv_L && k2 > 0.0) {
      ++rep.small_count;
      const double ratio = a / (L * L * k2);
      if (ratio < c1) {
        c1 = ratio;
        c1_k = k;
      }
      if (ratio > c2) {
        c2 = ratio;
        c2_k = k;
      }
    }
    if (kinf >= inv_L) {
      ++rep.large_count;
      if (a < min_a_large) {
        min_a_large = a;
        large_k = k;
      }
    }
  }
  if (rep.small_count == 0) {
    throw RegimeUncoveredError("check_assumption_d: regime uncovered: no samples with 0 < ||k||_inf <= 1/L");
  }
  if (rep.large_count == 0) {
    throw RegimeUncoveredError("check_assumption_d: regime uncovered: no samples with ||k||_inf >= 1/L");
  }

  rep.c1 = c1;
  rep.c2 = c2;
  rep.eta_bound2 = min_a_large;
  rep.eta_bound3 = 2.0 - max_a;
  rep.holds_bound1 = c1 > 0.0 && std::isfinite(c2);
  rep.holds_bound2 = rep.eta_bound2 > 0.0;
  rep.holds_bound3 = rep.eta_bound3 > 0.0;
  rep.eta = std::max(0.0, std::min(rep.eta_bound2, rep.eta_bound3));

  if (!rep.holds_bound3) {
    rep.worst_k = max_k;
  } else if (!rep.holds_bound2) {
    rep.worst_k = large_k;
  } else if (!rep.holds_bound1) {
    rep.worst_k = c1_k;
  } else {
    rep.worst_k = rep.eta_bound2 <= rep.eta_bound3 ? large_k : max_k;
  }
  return rep;
}

Vec log_spaced(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw PreconditionError("log_spaced: need count >= 2 and 0 < lo < hi");
  }
  Vec out(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

std::vector<Vec> axis_rays(int d, std::span<const double> magnitudes) {
  std::vector<Vec> out;
  out.reserve(magnitudes.size());
  for (double r : magnitudes) {
    Vec k(d, 0.0);
    k[0] = r;
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<Vec> diagonal_rays(int d, std::span<const double> magnitudes) {
  std::vector<Vec> out;
  const double s = std::sqrt(static_cast<double>(d));
  for (double r : magnitudes) {
    const double c = std::min(r / s, kPi);
    out.emplace_back(d, c);
  }
  return out;
}

std::vector<Vec> tensor_grid(int d, int n) {
  if (d > 3) throw PreconditionError("tensor_grid: only offered for d <= 3");
  if (n < 1) throw PreconditionError("tensor_grid: n must be >= 1");
  std::vector<Vec> out;
  const double h = 2.0 * kPi / n;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec k(d);
    for (int i = 0; i < d; ++i) k[i] = -kPi + (idx[i] + 0.5) * h;
    out.push_back(std::move(k));
    int i = 0;
    while (i < d && idx[i] == n - 1) idx[i++] = 0;
    if (i == d) break;
    ++idx[i];
  }
  return out;
}

std::vector<Vec> default_k_samples(const StepDistribution& dist, int count) {
  const int d = dist.dim();
  const Vec mags = log_spaced(1e-3 / dist.range(), kPi, count);
  auto out = axis_rays(d, mags);
  auto diag = diagonal_rays(d, mags);
  out.insert(out.end(), diag.begin(), diag.end());
  Vec lin(count);
  for (int i = 0; i < count; ++i) lin[i] = kPi * (i + 1) / count;
  auto sweep = axis_rays(d, lin);
  out.insert(out.end(), sweep.begin(), sweep.end());
  return out;
}

}  // namespace lace
