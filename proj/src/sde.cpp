#include "rellandau/sde.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "rellandau/errors.hpp"
#include "rellandau/estimates.hpp"
#include "rellandau/gronwall.hpp"
#include "rellandau/linalg.hpp"
#include "rellandau/parallel.hpp"
#include "rellandau/random.hpp"

namespace rellandau::sde {

using transport::Ensemble;

void SimConfig::validate() const {
  if (n_particles < 1) throw ConfigError("sim: n_particles must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim: dt must be > 0");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("sim: t_final must be >= 0");
  if (t_final > 0.0 && dt > t_final) throw ConfigError("sim: dt must not exceed t_final");
  if (!(eps_reg > 0.0) || !std::isfinite(eps_reg))
    throw ConfigError("sim: eps_reg must be > 0 for simulation");
  if (record_every < 1) throw ConfigError("sim: record_every must be >= 1");
  if (w2_subsample > 512) throw ConfigError("sim: w2_subsample must be <= 512");
  if (w2_subsample > n_particles) throw ConfigError("sim: w2_subsample exceeds n_particles");
  if (coupling_mode.kind == CouplingMode::Kind::OptimalEveryK && coupling_mode.k < 1)
    throw ConfigError("sim: OptimalEveryK needs k >= 1");
  if (steps() >= (std::size_t{1} << 32)) throw ConfigError("sim: too many steps");
  if (scheme == Scheme::Pairwise && n_particles > 65535)
    throw ConfigError("sim: pairwise scheme supports at most 65535 particles");
}

std::size_t SimConfig::steps() const {
  if (t_final == 0.0) return 0;
  const double r = t_final / dt;
  const double n = std::round(r);
  if (std::abs(r - n) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(n);
  return static_cast<std::size_t>(std::ceil(r));
}

// ---------------------------------------------------------------- interaction sums

namespace {

constexpr std::size_t kTile = 64;
constexpr std::size_t kLanes = 8;
constexpr std::size_t kComponents = 9;  // xx xy xz yy yz zz bx by bz

struct Soa {
  std::vector<double> x, y, z, e;
  explicit Soa(std::span<const Vec3> p) : x(p.size()), y(p.size()), z(p.size()), e(p.size()) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      x[i] = p[i].x;
      y[i] = p[i].y;
      z[i] = p[i].z;
      e[i] = energy(p[i]);
    }
  }
};

/// Pairs (i, j) with i in tile ti, j in tile tj, i < j. Each pair is
/// evaluated once; row i accumulates Phi(i, j), B(i, j) and row j receives
/// Phi(j, i) = Phi(i, j), B(j, i) = -B(i, j), which the kernel guarantees
/// bit for bit. part[(c * nb + K) * n + r] holds the sum over partners in
/// tile K for row r; each slot is written by exactly one tile pair.
void tile_pairs(const Soa& s, std::size_t n, std::size_t nb, std::size_t ti, std::size_t tj,
                double eps, double* part) {
  const std::size_t i0 = ti * kTile, i1 = std::min(n, i0 + kTile);
  const std::size_t j1 = std::min(n, tj * kTile + kTile);
  alignas(64) double buf[kComponents][kTile];
  for (std::size_t i = i0; i < i1; ++i) {
    const std::size_t jb = ti == tj ? i + 1 : tj * kTile;
    const std::size_t len = j1 > jb ? j1 - jb : 0;
    const Vec3 pi{s.x[i], s.y[i], s.z[i]};
    const double ei = s.e[i];
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t j = jb + k;
      const auto c = kernel::pair_coefficients(pi, ei, {s.x[j], s.y[j], s.z[j]}, s.e[j], eps);
      buf[0][k] = c.phi.xx;
      buf[1][k] = c.phi.xy;
      buf[2][k] = c.phi.xz;
      buf[3][k] = c.phi.yy;
      buf[4][k] = c.phi.yz;
      buf[5][k] = c.phi.zz;
      buf[6][k] = c.drift.x;
      buf[7][k] = c.drift.y;
      buf[8][k] = c.drift.z;
    }
    double lanes[kComponents][kLanes] = {};
    for (std::size_t c = 0; c < kComponents; ++c) {
      for (std::size_t k = 0; k < len; ++k) lanes[c][k % kLanes] += buf[c][k];
      double* row = part + (c * nb + ti) * n + jb;
      if (c < 6)
        for (std::size_t k = 0; k < len; ++k) row[k] += buf[c][k];
      else
        for (std::size_t k = 0; k < len; ++k) row[k] -= buf[c][k];
      double acc = 0.0;
      for (std::size_t l = 0; l < kLanes; ++l) acc += lanes[c][l];
      part[(c * nb + tj) * n + i] += acc;
    }
  }
}

std::vector<Vec3> positions(const Ensemble& e) {
  std::vector<Vec3> p(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) p[i] = e[i].vec();
  return p;
}

Ensemble to_ensemble(const std::vector<Vec3>& p) {
  std::vector<Momentum> out;
  out.reserve(p.size());
  for (const auto& v : p) {
    if (!is_finite(v)) throw NumericError("particle left the finite range");
    out.emplace_back(v);
  }
  return Ensemble(std::move(out));
}

void check_step_args(double dt, double eps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("step: dt must be > 0");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("step: eps_reg must be > 0");
}

StepDiagnostics drift_diagnostics(const std::vector<Vec3>& b) {
  Vec3 sum;
  double scale = 0.0;
  for (const auto& v : b) {
    sum += v;
    scale += norm(v);
  }
  return {norm(sum), scale};
}

Vec3 particle_noise(const StepNoise& noise, std::size_t i) {
  if (noise.zero) return {};
  rng::Stream s(noise.seed, rng::Domain::SdeNoise,
                rng::substream(static_cast<std::uint32_t>(noise.step), static_cast<std::uint32_t>(i)));
  return s.normal3();
}

}  // namespace

Interaction interaction(std::span<const Vec3> particles, double eps_reg) {
  const std::size_t n = particles.size();
  Interaction out;
  out.a.resize(n);
  out.b.resize(n);
  if (n < 2) return out;

  const Soa s(particles);
  const std::size_t nb = (n + kTile - 1) / kTile;
  std::vector<double> part(kComponents * nb * n, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> tiles;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i; j < nb; ++j) tiles.emplace_back(i, j);
  parallel_for(tiles.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t)
      tile_pairs(s, n, nb, tiles[t].first, tiles[t].second, eps_reg, part.data());
  });

  const double w = 1.0 / double(n - 1);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double acc[kComponents] = {};
      for (std::size_t c = 0; c < kComponents; ++c)
        for (std::size_t k = 0; k < nb; ++k) acc[c] += part[(c * nb + k) * n + i];
      out.a[i] = {acc[0] * w, acc[1] * w, acc[2] * w, acc[3] * w, acc[4] * w, acc[5] * w};
      out.b[i] = {acc[6] * w, acc[7] * w, acc[8] * w};
    }
  });
  return out;
}

// ---------------------------------------------------------------- steps

Ensemble step_meanfield(const Ensemble& e, double dt, double eps_reg, const StepNoise& noise,
                        StepDiagnostics* diag) {
  check_step_args(dt, eps_reg);
  const std::size_t n = e.size();
  if (diag) *diag = {};
  if (n == 1) return e;
  const std::vector<Vec3> p = positions(e);
  const Interaction in = interaction(p, eps_reg);
  if (diag) *diag = drift_diagnostics(in.b);

  const double sq = std::sqrt(dt);
  std::vector<Vec3> next(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Vec3 x = p[i] + dt * in.b[i];
      if (!noise.zero) x += sq * (linalg::sqrt_psd(in.a[i].full()) * particle_noise(noise, i));
      next[i] = x;
    }
  });
  return to_ensemble(next);
}

Ensemble step_pairwise(const Ensemble& e, double dt, double eps_reg, const StepNoise& noise,
                       StepDiagnostics* diag) {
  check_step_args(dt, eps_reg);
  const std::size_t n = e.size();
  if (diag) *diag = {};
  if (n == 1) return e;
  const std::vector<Vec3> p = positions(e);
  const Interaction in = interaction(p, eps_reg);
  if (diag) *diag = drift_diagnostics(in.b);

  const double scale = std::sqrt(dt / double(n - 1));
  std::vector<Vec3> next(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Vec3 x = p[i] + dt * in.b[i];
      if (!noise.zero) {
        Vec3 kick;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          rng::Stream s(noise.seed, rng::Domain::SdePairNoise,
                        rng::substream(static_cast<std::uint32_t>(noise.step),
                                       static_cast<std::uint32_t>(i * n + j)));
          kick += kernel::sigma(e[i], e[j], eps_reg) * s.normal3();
        }
        x += scale * kick;
      }
      next[i] = x;
    }
  });
  return to_ensemble(next);
}

// ---------------------------------------------------------------- runs

namespace {

Ensemble step(const SimConfig& c, const Ensemble& e, double h, std::size_t k,
              StepDiagnostics& diag) {
  const StepNoise noise{c.seed, k, false};
  try {
    return c.scheme == Scheme::MeanField ? step_meanfield(e, h, c.eps_reg, noise, &diag)
                                         : step_pairwise(e, h, c.eps_reg, noise, &diag);
  } catch (const std::exception& ex) {
    throw StepError(k, ex.what());
  }
}

/// m sorted distinct positions in [0, n), fixed by the seed.
std::vector<std::size_t> choose_subsample(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng::Stream s(seed, rng::Domain::Subsample, 0);
  for (std::size_t k = 0; k < m; ++k) std::swap(idx[k], idx[k + s.uniform_index(n - k)]);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Times of the steps in a run: t_k = k dt, last one t_final.
double time_after(const SimConfig& c, std::size_t k, std::size_t steps) {
  return k == steps ? c.t_final : double(k) * c.dt;
}

double step_length(const SimConfig& c, std::size_t k, std::size_t steps) {
  return time_after(c, k + 1, steps) - time_after(c, k, steps);
}

}  // namespace

TrajectoryRecord run(const SimConfig& c, const Ensemble& initial) {
  c.validate();
  if (initial.size() != c.n_particles)
    throw ConfigError("run: initial ensemble size differs from n_particles");
  const std::size_t steps = c.steps();

  std::vector<std::size_t> sub;
  std::optional<Ensemble> reference;
  if (c.w2_to_reference && c.w2_subsample > 0) {
    sub = choose_subsample(c.n_particles, c.w2_subsample, c.seed);
    rng::Stream s(c.seed, rng::Domain::Reference, 0);
    reference = transport::sample_juttner(c.w2_subsample, s.next_u64());
  }

  TrajectoryRecord rec;
  auto record = [&](double t, const Ensemble& e) {
    TrajectoryEntry entry;
    entry.t = t;
    entry.moments = transport::moments(e, kRecordedMoments);
    if (reference) entry.w2_to_reference = transport::w2_exact(e.subset(sub), *reference).distance;
    rec.entries.push_back(std::move(entry));
  };

  Ensemble e = initial;
  record(0.0, e);
  for (std::size_t k = 0; k < steps; ++k) {
    StepDiagnostics diag;
    e = step(c, e, step_length(c, k, steps), k, diag);
    if (diag.drift_scale > 0.0)
      rec.max_drift_imbalance = std::max(rec.max_drift_imbalance, diag.drift_sum / diag.drift_scale);
    if ((k + 1) % c.record_every == 0 || k + 1 == steps) record(time_after(c, k + 1, steps), e);
  }
  rec.final_state = e.particles();
  return rec;
}

CoupledRecord run_coupled(const SimConfig& c, const Ensemble& first, const Ensemble& second) {
  c.validate();
  if (first.size() != second.size()) throw ConfigError("run_coupled: ensemble sizes differ");
  if (first.size() != c.n_particles)
    throw ConfigError("run_coupled: ensemble size differs from n_particles");
  const std::size_t n = first.size();
  const std::size_t steps = c.steps();

  Ensemble a = first;
  std::vector<Momentum> bp = second.particles();
  if (n <= transport::kMaxAssignmentSize) {
    const auto plan = transport::optimal_coupling(first, second);
    for (std::size_t i = 0; i < n; ++i) bp[i] = second[plan.permutation[i]];
  }
  Ensemble b(std::move(bp));

  const std::size_t m = c.w2_subsample > 0 ? c.w2_subsample : std::min<std::size_t>(n, 512);
  const auto sub = choose_subsample(n, m, c.seed);

  CoupledRecord rec;
  rec.subsample_size = m;
  std::size_t n_records = 0;
  auto record = [&](double t) {
    const auto plan = transport::optimal_coupling(a.subset(sub), b.subset(sub));
    CoupledEntry entry;
    entry.t = t;
    entry.w2_sq = plan.cost;
    entry.first = transport::moments(a, kRecordedMoments);
    entry.second = transport::moments(b, kRecordedMoments);
    rec.entries.push_back(std::move(entry));
    const bool reassign = c.coupling_mode.kind == CouplingMode::Kind::OptimalEveryK &&
                          n_records > 0 && n_records % c.coupling_mode.k == 0;
    if (reassign) {
      std::vector<Momentum> p = b.particles();
      for (std::size_t i = 0; i < m; ++i) p[sub[i]] = b[sub[plan.permutation[i]]];
      b = Ensemble(std::move(p));
    }
    ++n_records;
  };

  record(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = step_length(c, k, steps);
    StepDiagnostics diag;
    a = step(c, a, h, k, diag);
    b = step(c, b, h, k, diag);
    if ((k + 1) % c.record_every == 0 || k + 1 == steps) record(time_after(c, k + 1, steps));
  }

  std::vector<double> ts, ws;
  for (const auto& e : rec.entries) {
    ts.push_back(e.t);
    ws.push_back(e.w2_sq);
  }
  rec.gamma_fitted = fit_gamma(ts, ws);
  const auto env = envelope(ws.front(), rec.gamma_fitted, ts);
  for (std::size_t k = 0; k < rec.entries.size(); ++k) rec.entries[k].envelope = env[k];
  return rec;
}

double fit_gamma(std::span<const double> t, std::span<const double> w) {
  if (t.size() != w.size() || t.empty()) throw std::invalid_argument("fit_gamma: bad series");
  const double w0 = w[0];
  double gamma = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > 0.0) || w[k] <= w0) continue;
    if (w0 == 0.0) return std::numeric_limits<double>::infinity();
    gamma = std::max(gamma, estimates::psi_integral(w0, w[k]) / t[k]);
  }
  // Absorb the rounding of gamma * t so the envelope still covers the maximizer.
  return gamma * (1.0 + 1e-12);
}

std::vector<double> envelope(double w0, double gamma, std::span<const double> t) {
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (w0 == 0.0) {
      out[k] = gamma > 0.0 && t[k] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      continue;
    }
    out[k] = gronwall::invert_bound(w0, gamma * t[k]);
  }
  return out;
}

// ---------------------------------------------------------------- weak form

TestFunction TestFunction::parse(std::string_view id) {
  TestFunction f;
  if (id == "momentum_x") {
    f.kind = Kind::MomentumX;
  } else if (id == "momentum_y") {
    f.kind = Kind::MomentumY;
  } else if (id == "momentum_z") {
    f.kind = Kind::MomentumZ;
  } else if (id == "energy") {
    f.kind = Kind::Energy;
  } else {
    constexpr std::string_view prefix = "gaussian_bump(";
    if (!id.starts_with(prefix) || !id.ends_with(")"))
      throw ConfigError("unknown test function '" + std::string(id) + "'");
    std::string_view args = id.substr(prefix.size(), id.size() - prefix.size() - 1);
    double v[4];
    for (int k = 0; k < 4; ++k) {
      const auto comma = args.find(',');
      if ((k < 3) != (comma != std::string_view::npos))
        throw ConfigError("gaussian_bump expects (cx,cy,cz,r)");
      const std::string_view tok = args.substr(0, comma);
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v[k]);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ConfigError("gaussian_bump: bad number '" + std::string(tok) + "'");
      args = k < 3 ? args.substr(comma + 1) : std::string_view{};
    }
    if (!(v[3] > 0.0)) throw ConfigError("gaussian_bump: radius must be > 0");
    f.kind = Kind::GaussianBump;
    f.centre = {v[0], v[1], v[2]};
    f.radius = v[3];
  }
  return f;
}

double TestFunction::value(const Vec3& p) const {
  switch (kind) {
    case Kind::MomentumX: return p.x;
    case Kind::MomentumY: return p.y;
    case Kind::MomentumZ: return p.z;
    case Kind::Energy: return energy(p);
    case Kind::GaussianBump: return std::exp(-0.5 * norm_sq(p - centre) / (radius * radius));
  }
  return 0.0;
}

Vec3 TestFunction::gradient(const Vec3& p) const {
  switch (kind) {
    case Kind::MomentumX: return {1, 0, 0};
    case Kind::MomentumY: return {0, 1, 0};
    case Kind::MomentumZ: return {0, 0, 1};
    case Kind::Energy: return (1.0 / energy(p)) * p;
    case Kind::GaussianBump: return (-value(p) / (radius * radius)) * (p - centre);
  }
  return {};
}

Mat3 TestFunction::hessian(const Vec3& p) const {
  switch (kind) {
    case Kind::MomentumX:
    case Kind::MomentumY:
    case Kind::MomentumZ: return Mat3::zero();
    case Kind::Energy: {
      const double e = energy(p);
      return (Mat3::identity() - Mat3::outer(p, p) * (1.0 / (e * e))) * (1.0 / e);
    }
    case Kind::GaussianBump: {
      const double r2 = radius * radius;
      const Vec3 d = p - centre;
      return (Mat3::outer(d, d) * (1.0 / (r2 * r2)) - Mat3::identity() * (1.0 / r2)) * value(p);
    }
  }
  return {};
}

Residual generator_residual(const Ensemble& e, const TestFunction& f, double dt, double eps_reg,
                            std::size_t n_replicas, std::uint64_t seed) {
  check_step_args(dt, eps_reg);
  if (n_replicas < 2) throw ConfigError("generator_residual: need at least 2 replicas");
  const std::size_t n = e.size();
  if (n < 2) throw ConfigError("generator_residual: need at least 2 particles");

  const std::vector<Vec3> p = positions(e);
  const Interaction in = interaction(p, eps_reg);
  std::vector<Mat3> root(n);
  std::vector<double> phi0(n);
  double rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat3 a = in.a[i].full();
    root[i] = linalg::sqrt_psd(a);
    phi0[i] = f.value(p[i]);
    rhs += 0.5 * frobenius_dot(a, f.hessian(p[i])) + dot(in.b[i], f.gradient(p[i]));
  }

  const double sq = std::sqrt(dt);
  std::vector<double> diff(n_replicas);
  parallel_for(n_replicas, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const StepNoise noise{seed, k, false};
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 x = p[i] + dt * in.b[i] + sq * (root[i] * particle_noise(noise, i));
        s += f.value(x) - phi0[i];
      }
      diff[k] = s / (double(n) * dt);
    }
  });

  Residual r;
  r.rhs = rhs / double(n);
  double sum = 0.0;
  for (double d : diff) sum += d;
  r.lhs = sum / double(n_replicas);
  double ss = 0.0;
  for (double d : diff) ss += (d - r.lhs) * (d - r.lhs);
  r.stderr = std::sqrt(ss / double(n_replicas - 1) / double(n_replicas));
  return r;
}

// ---------------------------------------------------------------- output

void write_csv(std::ostream& os, const TrajectoryRecord& rec) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "t,mean_px,mean_py,mean_pz,mean_energy,m2,m4,m7,w2_to_ref\n";
  for (const auto& e : rec.entries) {
    const auto& m = e.moments;
    os << e.t << ',' << m.mean_momentum.x << ',' << m.mean_momentum.y << ',' << m.mean_momentum.z
       << ',' << m.mean_energy << ',' << m.moment(2.0) << ',' << m.moment(4.0) << ','
       << m.moment(7.0) << ',';
    if (e.w2_to_reference) os << *e.w2_to_reference;
    os << '\n';
  }
  os.precision(old);
}

void write_csv(std::ostream& os, const CoupledRecord& rec) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "t,w2_sq,envelope,gamma_fitted\n";
  for (const auto& e : rec.entries)
    os << e.t << ',' << e.w2_sq << ',' << e.envelope << ',' << rec.gamma_fitted << '\n';
  os.precision(old);
}

}  // namespace rellandau::sde
