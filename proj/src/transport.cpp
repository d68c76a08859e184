#include "rellandau/transport.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rellandau/parallel.hpp"

namespace rellandau::transport {

Ensemble::Ensemble(std::vector<Momentum> particles) : particles_(std::move(particles)) {
  if (particles_.empty()) throw std::invalid_argument("Ensemble: at least one particle required");
  for (const auto& p : particles_)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      throw std::invalid_argument("Ensemble: particles must be finite");
}

Ensemble Ensemble::translated(const Vec3& delta) const {
  std::vector<Momentum> out;
  out.reserve(size());
  for (const auto& p : particles_) out.emplace_back(p.vec() + delta);
  return Ensemble(std::move(out));
}

Ensemble Ensemble::subset(std::span<const std::size_t> positions) const {
  std::vector<Momentum> out;
  out.reserve(positions.size());
  for (std::size_t i : positions) out.push_back(particles_.at(i));
  return Ensemble(std::move(out));
}

// ---------------------------------------------------------------- Juttner

double juttner_normalization() {
  static const double value = [] {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [](double r) { return r * r * std::exp(-std::sqrt(1.0 + r * r)); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(),
                                                15, 1e-14);
  }();
  return value;
}

double juttner_density(const Vec3& p) {
  return std::exp(-energy(p)) / (4.0 * std::numbers::pi * juttner_normalization());
}

Vec3 sample_juttner_one(rng::Stream& stream, std::size_t* attempts) {
  std::size_t tries = 0;
  for (;;) {
    ++tries;
    const double r = -std::log(stream.uniform() * stream.uniform() * stream.uniform());
    const double p0 = std::sqrt(1.0 + r * r);
    if (stream.uniform() <= std::exp(r - p0)) {
      if (attempts) *attempts = tries;
      return r * stream.unit_vector();
    }
  }
}

Ensemble sample_juttner(std::size_t n, std::uint64_t seed, SamplerStats* stats) {
  if (n == 0) throw std::invalid_argument("sample_juttner: n must be >= 1");
  std::vector<Vec3> v(n);
  std::vector<std::size_t> tries(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      rng::Stream s(seed, rng::Domain::Juttner, i);
      v[i] = sample_juttner_one(s, &tries[i]);
    }
  });
  if (stats) {
    stats->accepted = n;
    stats->proposed = 0;
    for (auto t : tries) stats->proposed += t;
  }
  std::vector<Momentum> particles;
  particles.reserve(n);
  for (const auto& x : v) particles.emplace_back(x);
  return Ensemble(std::move(particles));
}

// ---------------------------------------------------------------- moments

MomentSummary moments(const Ensemble& e, std::span<const double> ks) {
  MomentSummary m;
  const double inv_n = 1.0 / double(e.size());
  Vec3 sum_p;
  double sum_e = 0.0;
  for (const auto& p : e) {
    sum_p += p.vec();
    sum_e += p.energy();
  }
  m.mean_momentum = inv_n * sum_p;
  m.mean_energy = sum_e * inv_n;
  for (double k : ks) {
    if (!(k >= 0.0)) throw std::invalid_argument("moments: k must be >= 0");
    double s = 0.0;
    for (const auto& p : e) s += std::pow(1.0 + norm_sq(p.vec()), k);
    m.weighted_moments[k] = s * inv_n;
  }
  return m;
}

// ---------------------------------------------------------------- assignment

double plan_cost(const Ensemble& a, const Ensemble& b, std::span<const std::size_t> perm) {
  if (a.size() != b.size() || perm.size() != a.size())
    throw std::invalid_argument("plan_cost: size mismatch");
  // Ascending order makes the sum independent of which ensemble comes first.
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) terms[i] = norm_sq(a[i].vec() - b[perm[i]].vec());
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s / double(a.size());
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw std::invalid_argument("solve_assignment: cost must be n x n");
  // Shortest augmenting paths with row/column potentials, 1-based with a
  // virtual column 0.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      const double* row = cost.data() + (i0 - 1) * n;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

CouplingPlan optimal_coupling(const Ensemble& a, const Ensemble& b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("optimal_coupling: ensembles differ in size");
  if (n > kMaxAssignmentSize)
    throw std::invalid_argument("optimal_coupling: N exceeds " +
                                std::to_string(kMaxAssignmentSize) + "; subsample first");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = norm_sq(a[i].vec() - b[j].vec());
  CouplingPlan plan;
  plan.permutation = solve_assignment(cost, n);
  plan.cost = plan_cost(a, b, plan.permutation);
  return plan;
}

W2Result w2_exact(const Ensemble& a, const Ensemble& b) {
  W2Result r;
  r.plan = optimal_coupling(a, b);
  r.distance = std::sqrt(r.plan.cost);
  return r;
}

// ---------------------------------------------------------------- serialization

void write_csv(std::ostream& os, const Ensemble& e) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "px,py,pz\n";
  for (const auto& p : e) os << p[0] << ',' << p[1] << ',' << p[2] << '\n';
  os.precision(old);
}

Ensemble read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "px,py,pz")
    throw std::runtime_error("ensemble CSV: expected header 'px,py,pz'");
  std::vector<Momentum> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[3];
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 3; ++k) {
      auto [ptr, ec] = std::from_chars(cur, end, v[k]);
      const bool sep_ok = k < 2 ? (ptr < end && *ptr == ',') : ptr == end;
      if (ec != std::errc() || !sep_ok)
        throw std::runtime_error("ensemble CSV: malformed line " + std::to_string(lineno));
      cur = ptr + 1;
    }
    out.emplace_back(v[0], v[1], v[2]);
  }
  return Ensemble(std::move(out));
}

namespace {

template <class T>
T to_little(T x) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &x, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&x, b, sizeof(T));
  }
  return x;
}

template <class T>
void put(std::ostream& os, T x) {
  x = to_little(x);
  os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T x;
  if (!is.read(reinterpret_cast<char*>(&x), sizeof(T)))
    throw std::runtime_error("ensemble binary: truncated input");
  return to_little(x);
}

}  // namespace

void write_binary(std::ostream& os, const Ensemble& e) {
  if (e.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::length_error("ensemble binary: too many particles");
  os.write("RLEN", 4);
  put(os, static_cast<std::uint32_t>(e.size()));
  for (const auto& p : e)
    for (std::size_t k = 0; k < 3; ++k) put(os, p[k]);
}

Ensemble read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "RLEN", 4) != 0)
    throw std::runtime_error("ensemble binary: bad magic");
  const auto n = get<std::uint32_t>(is);
  std::vector<Momentum> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = get<double>(is);
    const double y = get<double>(is);
    const double z = get<double>(is);
    out.emplace_back(x, y, z);
  }
  return Ensemble(std::move(out));
}

}  // namespace rellandau::transport
