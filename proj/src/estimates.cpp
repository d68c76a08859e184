#include "rellandau/estimates.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "rellandau/densities.hpp"
#include "rellandau/errors.hpp"
#include "rellandau/kernel.hpp"
#include "rellandau/parallel.hpp"
#include "rellandau/random.hpp"

namespace rellandau::estimates {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Id>
struct NamedId {
  Id id;
  std::string_view name;
};

constexpr NamedId<BoundId> kBoundNames[] = {
    {BoundId::Lambda, "lambda"},
    {BoundId::PhiNorm, "phi_norm"},
    {BoundId::BNorm, "b_norm"},
    {BoundId::BDiff, "b_diff"},
    {BoundId::SigmaDiffTrivial, "sigma_diff_trivial"},
    {BoundId::SigmaDiffLipschitz, "sigma_diff_lipschitz"},
};

constexpr NamedId<IntegralId> kIntegralNames[] = {
    {IntegralId::Lem41I, "lem41_I"},         {IntegralId::Lem41IV, "lem41_IV"},
    {IntegralId::Prop42Sigma, "prop42_sigma"}, {IntegralId::Prop42B, "prop42_B"},
    {IntegralId::Prop43, "prop43"},
};

constexpr NamedId<DensityId> kDensityNames[] = {
    {DensityId::Juttner, "juttner"},
    {DensityId::TruncatedGaussian, "truncated_gaussian"},
};

template <class Id, std::size_t N>
Id parse(const NamedId<Id> (&table)[N], std::string_view s, const char* what) {
  for (const auto& e : table)
    if (e.name == s) return e.id;
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <class Id, std::size_t N>
std::string_view lookup(const NamedId<Id> (&table)[N], Id id) {
  for (const auto& e : table)
    if (e.id == id) return e.name;
  return "?";
}

double distance(const Momentum& p, const Momentum& q) { return norm(p.vec() - q.vec()); }

/// |p - q| for an A-branch bound; throws on coincident momenta.
double separation_on_a(const Momentum& p, const Momentum& q) {
  const double d = distance(p, q);
  if (d == 0.0) throw SingularPair("bound function evaluated at p = q");
  return d;
}

}  // namespace

Region region(const Momentum& p, const Momentum& q) {
  return std::sqrt(p.energy() * q.energy()) >= distance(p, q) ? Region::A : Region::Ac;
}

double psi(double x) {
  if (!(x >= 0.0)) throw std::domain_error("psi: argument must be >= 0");
  if (x == 0.0) return 0.0;
  return x <= 1.0 ? x * (1.0 - std::log(x)) : x;
}

double theta(double x) {
  if (!(x >= 0.0)) throw std::domain_error("theta: argument must be >= 0");
  if (x == 0.0) return 0.0;
  return x <= 0.5 ? x * (1.0 - std::log(x)) : x * std::numbers::ln2 + 0.5;
}

double psi_integral(double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw std::domain_error("psi_integral: need 0 <= a <= b");
  if (a == b) return 0.0;
  if (a == 0.0) return kInf;
  // On (0, 1]: d/dy [-log(1 - log y)] = 1 / Psi(y).
  auto lower = [](double lo, double hi) {
    return std::log1p(std::log(hi / lo) / (1.0 - std::log(hi)));
  };
  if (b <= 1.0) return lower(a, b);
  if (a >= 1.0) return std::log(b / a);
  return lower(a, 1.0) + std::log(b);
}

double phi_b1(const Momentum& p, const Momentum& q) {
  if (region(p, q) == Region::Ac) return 1.0;
  const double d = separation_on_a(p, q);
  return std::min(p.energy(), q.energy()) / (d * d);
}

double phi_b2(const Momentum& p, const Momentum& q) {
  if (region(p, q) == Region::Ac) return 1.0;
  const double d = separation_on_a(p, q);
  return std::pow(q.energy(), 3) / (d * d * d);
}

double phi_sigma1(const Momentum& p, const Momentum& q) {
  const double m = std::min(p.energy(), q.energy());
  if (region(p, q) == Region::Ac) return m * m;
  return m * m * m / separation_on_a(p, q);
}

double phi_sigma2(const Momentum& p, const Momentum& q) {
  if (region(p, q) == Region::Ac) return std::pow(q.energy(), 5);
  const double d = separation_on_a(p, q);
  return std::pow(std::min(p.energy(), q.energy()), 7) / (d * d * d);
}

BoundId parse_bound_id(std::string_view s) { return parse(kBoundNames, s, "bound_id"); }
IntegralId parse_integral_id(std::string_view s) { return parse(kIntegralNames, s, "integral"); }
DensityId parse_density_id(std::string_view s) { return parse(kDensityNames, s, "density"); }
std::string_view name(BoundId id) { return lookup(kBoundNames, id); }
std::string_view name(IntegralId id) { return lookup(kIntegralNames, id); }
std::string_view name(DensityId id) { return lookup(kDensityNames, id); }

const std::vector<BoundId>& all_bound_ids() {
  static const std::vector<BoundId> ids = [] {
    std::vector<BoundId> v;
    for (const auto& e : kBoundNames) v.push_back(e.id);
    return v;
  }();
  return ids;
}

const std::vector<IntegralId>& all_integral_ids() {
  static const std::vector<IntegralId> ids = [] {
    std::vector<IntegralId> v;
    for (const auto& e : kIntegralNames) v.push_back(e.id);
    return v;
  }();
  return ids;
}

// ---------------------------------------------------------------- pointwise surveys

namespace {

struct Sample {
  double ratio = 0.0;
  std::vector<Momentum> args;
  bool noisy = false;
};

double log_uniform(rng::Stream& s, double lo, double hi) {
  return lo * std::pow(hi / lo, s.uniform());
}

/// |p| uniform on [0, 10] or log-uniform on [10, 1e3], direction uniform.
Momentum draw_momentum(rng::Stream& s) {
  const double r = s.uniform() < 0.5 ? s.uniform(0.0, 10.0) : log_uniform(s, 10.0, 1e3);
  return Momentum(r * s.unit_vector());
}

/// Mostly a near neighbour of p at log-uniform distance in [1e-4, 10];
/// otherwise an independent draw.
Momentum draw_partner(rng::Stream& s, const Momentum& p) {
  if (s.uniform() < 0.25) return draw_momentum(s);
  return Momentum(p.vec() + log_uniform(s, 1e-4, 10.0) * s.unit_vector());
}

/// Bound functions with +inf instead of an exception at coincident points,
/// for use inside a min.
template <class F>
double or_inf(F f, const Momentum& p, const Momentum& q) {
  return p == q ? kInf : f(p, q);
}

double lambda_rhs(const Momentum& p, const Momentum& q) {
  const double d = distance(p, q);
  if (region(p, q) == Region::A) return std::sqrt(p.energy() * q.energy()) / (d * d * d);
  return 1.0 / (d * d);
}

Sample pointwise_sample(BoundId id, rng::Stream& s) {
  const Momentum p = draw_momentum(s);
  const Momentum q = draw_partner(s, p);
  Sample out;
  switch (id) {
    case BoundId::Lambda:
      out.ratio = kernel::lambda(p, q, 0.0) / lambda_rhs(p, q);
      out.args = {p, q};
      return out;
    case BoundId::PhiNorm:
      out.ratio = kernel::phi(p, q, 0.0).norm() /
                  (1.0 + std::min(p.energy(), q.energy()) / distance(p, q));
      out.args = {p, q};
      return out;
    case BoundId::BNorm:
      out.ratio = norm(kernel::drift_b(p, q, 0.0)) / phi_b1(p, q);
      out.args = {p, q};
      return out;
    default:
      break;
  }

  const Momentum pt = draw_partner(s, p);
  const bool same_q = id == BoundId::BDiff && s.uniform() < 0.5;
  const Momentum qt = same_q ? q : draw_partner(s, q);
  out.args = {p, q, pt, qt};
  const double dp = distance(p, pt);
  const double dq = distance(q, qt);

  if (id == BoundId::BDiff) {
    const double lhs = norm(kernel::drift_b(p, q, 0.0) - kernel::drift_b(pt, qt, 0.0));
    const double trivial = phi_b1(p, q) + phi_b1(pt, qt);
    double lipschitz = dp * (or_inf(phi_b2, p, q) + or_inf(phi_b2, pt, q));
    if (dq > 0.0) lipschitz += dq * (or_inf(phi_b2, q, pt) + or_inf(phi_b2, qt, pt));
    out.ratio = lhs == 0.0 ? 0.0 : lhs / std::min(trivial, lipschitz);
    return out;
  }

  const double lhs = (kernel::sigma(p, q, 0.0) - kernel::sigma(pt, qt, 0.0)).norm();
  const double lhs2 = lhs * lhs;
  double rhs;
  if (id == BoundId::SigmaDiffTrivial) {
    rhs = phi_sigma1(p, q) + phi_sigma1(pt, qt);
  } else {
    rhs = dp * dp * (or_inf(phi_sigma2, p, q) + or_inf(phi_sigma2, pt, q));
    if (dq > 0.0) rhs += dq * dq * (or_inf(phi_sigma2, q, pt) + or_inf(phi_sigma2, qt, pt));
  }
  out.ratio = lhs2 == 0.0 ? 0.0 : lhs2 / rhs;
  return out;
}

/// Evaluates n samples in parallel and keeps the first maximizer.
template <class F>
BoundReport run_survey(std::size_t n, F&& make_sample) {
  std::vector<Sample> samples(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) samples[i] = make_sample(i);
  });
  BoundReport report;
  report.n_samples = n;
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = samples[i].ratio;
    if (!std::isfinite(r)) throw NumericError("survey produced a non-finite ratio");
    if (samples[i].noisy) ++report.n_noisy;
    if (best == n || r > report.max_ratio) {
      best = i;
      report.max_ratio = r;
    }
  }
  if (best < n) report.argmax = samples[best].args;
  return report;
}

}  // namespace

BoundReport bound_survey(BoundId id, std::size_t n, std::uint64_t seed) {
  const auto tag = static_cast<std::uint32_t>(id);
  BoundReport report = run_survey(n, [&](std::size_t i) {
    rng::Stream s(seed, rng::Domain::Survey, rng::substream(tag, static_cast<std::uint32_t>(i)));
    return pointwise_sample(id, s);
  });
  report.bound_id = std::string(name(id));
  report.sampler_spec =
      "|p| ~ U[0,10] or logU[10,1e3]; partners at logU[1e-4,10] separation (p=0.75) or "
      "independent";
  return report;
}

// ---------------------------------------------------------------- integral surveys

namespace {

using densities::RadialDensity;

/// 4 pi integral_{lo}^{inf} r^(beta) gbar(a, r) dr, split at the kinks of the
/// sphere average.
double radial_integral(const RadialDensity& g, double a, double lo, double beta) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double r) { return std::pow(r, beta) * g.sphere_average(a, r); };
  std::vector<double> cuts{lo};
  auto add_cut = [&](double c) {
    if (c > lo) cuts.push_back(c);
  };
  add_cut(a);
  double top = kInf;
  if (g.id() == DensityId::TruncatedGaussian) {
    add_cut(std::abs(6.0 - a));
    top = a + 6.0;
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double x0 = cuts[k];
    const double x1 = k + 1 < cuts.size() ? cuts[k + 1] : top;
    if (x1 <= x0) continue;
    total += gauss_kronrod<double, 31>::integrate(f, x0, x1, 15, 1e-11);
  }
  return 4.0 * std::numbers::pi * total;
}

/// Radial proposal around a centre: log-uniform |q - c| on [r_min, r_max].
struct LogShell {
  Vec3 centre;
  double r_min;
  double r_max;

  Vec3 draw(rng::Stream& s) const {
    return centre + log_uniform(s, r_min, r_max) * s.unit_vector();
  }
  double density(const Vec3& q) const {
    // Draws just inside r_min through rounding keep their proposal weight.
    const double r = norm(q - centre);
    if (r < 0.5 * r_min || r > r_max) return 0.0;
    return 1.0 / (4.0 * std::numbers::pi * r * r * r * std::log(r_max / r_min));
  }
};

/// Monte Carlo of integral f(q) g(q) dq with the mixture g/2 + shells/4 each.
/// Returns (mean, stderr).
template <class F>
std::pair<double, double> mixture_integral(const RadialDensity& g, const LogShell& s1,
                                           const LogShell& s2, std::size_t m, rng::Stream& s,
                                           F&& f) {
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double u = s.uniform();
    const Vec3 q = u < 0.5 ? g.sample(s) : (u < 0.75 ? s1.draw(s) : s2.draw(s));
    const double gq = g(q);
    double w = 0.0;
    if (gq > 0.0) {
      const double mix = 0.5 * gq + 0.25 * (s1.density(q) + s2.density(q));
      w = f(Momentum(q)) * gq / mix;
    }
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / double(m);
  const double var = std::max(0.0, sum2 / double(m) - mean * mean);
  return {mean, std::sqrt(var / double(m))};
}

/// Rotation by angle theta about a unit axis (Rodrigues).
Mat3 rotation(const Vec3& axis, double theta) {
  Mat3 k;
  k(0, 1) = -axis.z; k(0, 2) = axis.y;
  k(1, 0) = axis.z;  k(1, 2) = -axis.x;
  k(2, 0) = -axis.y; k(2, 1) = axis.x;
  return Mat3::identity() + k * std::sin(theta) + (k * k) * (1.0 - std::cos(theta));
}

/// Second moment of |p| under g.
double second_moment(const RadialDensity& g) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double r) { return r * r * r * r * g.at_radius(r); };
  const double top = g.id() == DensityId::TruncatedGaussian ? 6.0 : kInf;
  return 4.0 * std::numbers::pi * gauss_kronrod<double, 31>::integrate(f, 0.0, top, 15, 1e-12);
}

Sample integral_sample(IntegralId id, const RadialDensity& g, const IntegralOptions& opt,
                       double p2_mean, rng::Stream& s) {
  Sample out;
  const std::size_t m = opt.inner_samples;

  if (id == IntegralId::Lem41I || id == IntegralId::Lem41IV) {
    const Momentum p(s.uniform(0.0, 20.0) * s.unit_vector());
    const double a = norm(p.vec());
    if (id == IntegralId::Lem41I) {
      out.ratio = radial_integral(g, a, 0.0, opt.alpha + 2.0) / (1.0 + g.sup());
      out.args = {p};
    } else {
      const double eps = log_uniform(s, 1e-6, 1.0);
      out.ratio = radial_integral(g, a, eps, -1.0) / (1.0 + g.sup() * std::log(1.0 / eps));
      out.args = {p, Momentum(eps, 0.0, 0.0)};
    }
    return out;
  }

  if (id == IntegralId::Prop42Sigma || id == IntegralId::Prop42B) {
    const Momentum p(s.uniform(0.0, 10.0) * s.unit_vector());
    const double sep = log_uniform(s, 1e-4, 10.0);
    const Momentum pt(p.vec() + sep * s.unit_vector());
    out.args = {p, pt};
    // Shells reach far below sep so the |p - q|^-2 singularity has bounded weights.
    const LogShell s1{p.vec(), 1e-12, std::max(2.0, 2.0 * sep)};
    const LogShell s2{pt.vec(), 1e-12, std::max(2.0, 2.0 * sep)};
    std::pair<double, double> est;
    double shape;
    if (id == IntegralId::Prop42Sigma) {
      est = mixture_integral(g, s1, s2, m, s, [&](const Momentum& q) {
        const double d = (kernel::sigma(p, q, 0.0) - kernel::sigma(pt, q, 0.0)).norm();
        return d * d;
      });
      shape = psi(sep * sep);
    } else {
      est = mixture_integral(g, s1, s2, m, s, [&](const Momentum& q) {
        return norm(kernel::drift_b(p, q, 0.0) - kernel::drift_b(pt, q, 0.0));
      });
      shape = psi(sep);
    }
    out.ratio = est.first / shape;
    out.noisy = est.second > 0.1 * est.first;
    return out;
  }

  // prop43: g~ = g(. - delta); Q: p~ = R1 p + delta, R: q~ = R2 q + delta.
  const double dsep = s.uniform() < 1.0 / 3.0 ? 0.0 : log_uniform(s, 1e-4, 10.0);
  const Vec3 delta = dsep * s.unit_vector();
  auto draw_angle = [&] { return s.uniform() < 0.5 ? 0.0 : log_uniform(s, 1e-4, std::numbers::pi); };
  const double th1 = draw_angle();
  const double th2 = draw_angle();
  const Mat3 r1 = rotation(s.unit_vector(), th1);
  const Mat3 r2 = rotation(s.unit_vector(), th2);
  // E|p - p~|^2 = 2 (1 - cos th) (2/3) E|p|^2 + |delta|^2 since E p = 0.
  const double wq = 4.0 / 3.0 * (1.0 - std::cos(th1)) * p2_mean + dsep * dsep;
  const double wr = 4.0 / 3.0 * (1.0 - std::cos(th2)) * p2_mean + dsep * dsep;
  out.args = {Momentum(delta), Momentum(th1, th2, 0.0)};

  const std::size_t mo = std::max<std::size_t>(1, m / 4);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < mo; ++k) {
    const Momentum p(g.sample(s));
    const Momentum pt(r1 * p.vec() + delta);
    const double dp = distance(p, pt);
    // q~ meets p~ at q = R2^T R1 p.
    const LogShell s1{p.vec(), 1e-12, 2.0};
    const LogShell s2{r2.transposed() * (r1 * p.vec()), 1e-12, 2.0};
    rng::Stream inner(s.next_u64(), rng::Domain::Density, k);
    const auto est = mixture_integral(g, s1, s2, 4, inner, [&](const Momentum& q) {
      const Momentum qt(r2 * q.vec() + delta);
      if (q == p || qt == pt) return 0.0;
      return dp * norm(kernel::drift_b(p, q, 0.0) - kernel::drift_b(pt, qt, 0.0));
    });
    sum += est.first;
    sum2 += est.first * est.first;
  }
  const double mean = sum / double(mo);
  const double err = std::sqrt(std::max(0.0, sum2 / double(mo) - mean * mean) / double(mo));
  const double rhs = psi(wq) + psi(wr);
  out.ratio = rhs == 0.0 ? 0.0 : mean / rhs;
  out.noisy = err > 0.1 * mean;
  return out;
}

}  // namespace

BoundReport integral_survey(IntegralId id, DensityId density, std::size_t n, std::uint64_t seed,
                            const IntegralOptions& options) {
  if (options.inner_samples == 0) throw ConfigError("integral_survey: inner_samples must be > 0");
  if (!(options.alpha > -3.0 && options.alpha <= 0.0))
    throw ConfigError("integral_survey: alpha must lie in (-3, 0]");
  const RadialDensity g = RadialDensity::make(density);
  const double p2 = id == IntegralId::Prop43 ? second_moment(g) : 0.0;
  const auto tag = 64u + static_cast<std::uint32_t>(id) * 4u + static_cast<std::uint32_t>(density);
  BoundReport report = run_survey(n, [&](std::size_t i) {
    rng::Stream s(seed, rng::Domain::Survey, rng::substream(tag, static_cast<std::uint32_t>(i)));
    return integral_sample(id, g, options, p2, s);
  });
  report.bound_id = std::string(name(id));
  report.sampler_spec = std::string("density=") + std::string(name(density)) +
                        "; inner_samples=" + std::to_string(options.inner_samples);
  return report;
}

std::string csv_header() {
  return "bound_id,n_samples,max_ratio,p_x,p_y,p_z,q_x,q_y,q_z,pt_x,pt_y,pt_z,qt_x,qt_y,qt_z";
}

void write_csv_row(std::ostream& os, const BoundReport& r) {
  const auto old = os.precision(17);
  os << r.bound_id << ',' << r.n_samples << ',' << r.max_ratio;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t c = 0; c < 3; ++c) {
      os << ',';
      if (k < r.argmax.size()) os << r.argmax[k][c];
    }
  }
  os << '\n';
  os.precision(old);
}

}  // namespace rellandau::estimates
