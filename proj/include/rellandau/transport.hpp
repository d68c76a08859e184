#pragma once

// Particle ensembles as equal-weight empirical measures: Juttner sampling,
// moments, exact W2 couplings and serialization.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "rellandau/random.hpp"
#include "rellandau/types.hpp"

namespace rellandau::transport {

/// Non-empty list of finite momenta, each with weight 1/N.
class Ensemble {
 public:
  /// Throws std::invalid_argument when empty or when a coordinate is not finite.
  explicit Ensemble(std::vector<Momentum> particles);

  std::size_t size() const { return particles_.size(); }
  const Momentum& operator[](std::size_t i) const { return particles_[i]; }
  const std::vector<Momentum>& particles() const { return particles_; }
  auto begin() const { return particles_.begin(); }
  auto end() const { return particles_.end(); }

  /// Copy with every particle shifted by delta.
  Ensemble translated(const Vec3& delta) const;
  /// Particles at the given positions, in that order.
  Ensemble subset(std::span<const std::size_t> positions) const;

  friend bool operator==(const Ensemble&, const Ensemble&) = default;

 private:
  std::vector<Momentum> particles_;
};

/// K2(1) = (1 / 4 pi) * integral of exp(-p0) over R^3. Computed once by
/// quadrature.
double juttner_normalization();
/// Normalized Juttner density exp(-p0) / (4 pi K2(1)).
double juttner_density(const Vec3& p);

/// One Juttner draw. Radial proposal Gamma(3, 1), accepted with probability
/// exp(-(p0 - |p|)); direction uniform. attempts, if given, receives the
/// number of proposals used.
Vec3 sample_juttner_one(rng::Stream& stream, std::size_t* attempts = nullptr);

struct SamplerStats {
  std::size_t accepted = 0;
  std::size_t proposed = 0;
  double acceptance() const { return proposed ? double(accepted) / double(proposed) : 0.0; }
};

/// n i.i.d. Juttner samples; particle i uses stream (seed, Juttner, i).
Ensemble sample_juttner(std::size_t n, std::uint64_t seed, SamplerStats* stats = nullptr);

struct MomentSummary {
  Vec3 mean_momentum;
  double mean_energy = 1.0;
  /// k -> M_k = mean of (1 + |p|^2)^k.
  std::map<double, double> weighted_moments;

  /// Throws std::out_of_range if k was not requested.
  double moment(double k) const { return weighted_moments.at(k); }
};

MomentSummary moments(const Ensemble& e, std::span<const double> ks);

/// Largest ensemble accepted by the assignment solver.
inline constexpr std::size_t kMaxAssignmentSize = 1024;

struct CouplingPlan {
  /// Particle i of the first ensemble is matched with permutation[i] of the second.
  std::vector<std::size_t> permutation;
  /// (1/N) sum_i |p_i - q_perm(i)|^2
  double cost = 0.0;
};

/// (1/N) sum_i |a_i - b_perm(i)|^2, terms summed in ascending order.
double plan_cost(const Ensemble& a, const Ensemble& b, std::span<const std::size_t> permutation);

/// Minimum-cost perfect matching under squared Euclidean cost. Throws
/// std::invalid_argument on size mismatch or N > kMaxAssignmentSize.
CouplingPlan optimal_coupling(const Ensemble& a, const Ensemble& b);

struct W2Result {
  double distance = 0.0;
  CouplingPlan plan;
};

W2Result w2_exact(const Ensemble& a, const Ensemble& b);

/// Rectangular assignment on a dense row-major n x n cost matrix; returns
/// the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

/// CSV with header px,py,pz and one particle per row.
void write_csv(std::ostream& os, const Ensemble& e);
Ensemble read_csv(std::istream& is);
/// "RLEN", u32 little-endian count, then little-endian f64 triples.
void write_binary(std::ostream& os, const Ensemble& e);
Ensemble read_binary(std::istream& is);

}  // namespace rellandau::transport
