#pragma once

// Interacting particle approximation of the relativistic Landau SDE:
// Euler-Maruyama steps, single and coupled runs, weak-form diagnostics.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rellandau/kernel.hpp"
#include "rellandau/transport.hpp"

namespace rellandau::sde {

enum class Scheme { MeanField, Pairwise };

struct CouplingMode {
  enum class Kind { Index, OptimalEveryK };
  Kind kind = Kind::Index;
  /// Records between re-assignments for OptimalEveryK.
  std::size_t k = 1;
};

struct SimConfig {
  std::size_t n_particles = 1000;
  double dt = 1e-3;
  double t_final = 1.0;
  double eps_reg = 1e-3;
  Scheme scheme = Scheme::MeanField;
  std::uint64_t seed = 0;
  std::size_t record_every = 10;
  /// Particles used for W2 diagnostics (exact assignment), at most 512.
  std::size_t w2_subsample = 512;
  /// Record W2 between a fixed subsample and a Juttner reference sample.
  bool w2_to_reference = false;
  CouplingMode coupling_mode;

  /// Throws ConfigError. t_final = 0 is accepted and yields a record with
  /// only the initial state.
  void validate() const;
  /// Number of steps; the last one is shortened to end at t_final.
  std::size_t steps() const;
};

/// Noise selection for one step. Particle i draws from stream
/// (seed, SdeNoise, (step, i)); ordered pair (i, j) from
/// (seed, SdePairNoise, (step, i N + j)). zero replaces every draw by 0.
struct StepNoise {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  bool zero = false;
};

/// a_i = (1/(N-1)) sum_{j != i} Phi_eps(P_i, P_j) and b_i likewise for B_eps.
/// The result is bit-identical for any thread count.
struct Interaction {
  std::vector<kernel::SymMat3> a;
  std::vector<Vec3> b;
};
Interaction interaction(std::span<const Vec3> particles, double eps_reg);

struct StepDiagnostics {
  /// |sum_i b_i| and sum_i |b_i| of the step's drift field.
  double drift_sum = 0.0;
  double drift_scale = 0.0;
};

transport::Ensemble step_meanfield(const transport::Ensemble& e, double dt, double eps_reg,
                                   const StepNoise& noise, StepDiagnostics* diag = nullptr);
transport::Ensemble step_pairwise(const transport::Ensemble& e, double dt, double eps_reg,
                                  const StepNoise& noise, StepDiagnostics* diag = nullptr);

/// Moment orders recorded in trajectories (M_2, M_4, M_7).
inline constexpr double kRecordedMoments[] = {2.0, 4.0, 7.0};

struct TrajectoryEntry {
  double t = 0.0;
  transport::MomentSummary moments;
  std::optional<double> w2_to_reference;
};

struct TrajectoryRecord {
  std::vector<TrajectoryEntry> entries;
  /// Largest |sum_i b_i| / sum_i |b_i| seen over all steps.
  double max_drift_imbalance = 0.0;
  std::vector<Momentum> final_state;
};

/// Throws ConfigError on invalid config or size mismatch and StepError when a
/// step fails.
TrajectoryRecord run(const SimConfig& config, const transport::Ensemble& initial);

struct CoupledEntry {
  double t = 0.0;
  double w2_sq = 0.0;
  double envelope = 0.0;
  transport::MomentSummary first;
  transport::MomentSummary second;
};

struct CoupledRecord {
  std::vector<CoupledEntry> entries;
  double gamma_fitted = 0.0;
  std::size_t subsample_size = 0;
};

/// Two ensembles driven by shared noise. The second one is first reordered by
/// an optimal assignment (N <= 1024), after which particle i of each
/// ensemble consumes the same draws.
CoupledRecord run_coupled(const SimConfig& config, const transport::Ensemble& first,
                          const transport::Ensemble& second);

/// Smallest gamma with invert_bound(w[0], gamma t_k) >= w[k] for all k.
/// 0 if the series never rises; +inf if w[0] = 0 and some w[k] > 0.
double fit_gamma(std::span<const double> t, std::span<const double> w2_sq);
/// invert_bound(w0, gamma t_k) for each time.
std::vector<double> envelope(double w0, double gamma, std::span<const double> t);

/// Test functions with closed-form gradient and Hessian.
struct TestFunction {
  enum class Kind { MomentumX, MomentumY, MomentumZ, Energy, GaussianBump };
  Kind kind = Kind::Energy;
  Vec3 centre;
  double radius = 1.0;

  /// momentum_x|momentum_y|momentum_z|energy|gaussian_bump(cx,cy,cz,r).
  /// Throws ConfigError on anything else.
  static TestFunction parse(std::string_view id);

  double value(const Vec3& p) const;
  Vec3 gradient(const Vec3& p) const;
  Mat3 hessian(const Vec3& p) const;
};

struct Residual {
  double lhs = 0.0;     // mean over replicas of (phibar(t + dt) - phibar(t)) / dt
  double rhs = 0.0;     // mean of L phi over ordered distinct pairs
  double stderr = 0.0;  // standard error of lhs
};

/// One-step weak-form check with the mean-field scheme. Replica k uses
/// StepNoise{seed, k}.
Residual generator_residual(const transport::Ensemble& e, const TestFunction& f, double dt,
                            double eps_reg, std::size_t n_replicas, std::uint64_t seed);

/// Header t,mean_px,mean_py,mean_pz,mean_energy,m2,m4,m7,w2_to_ref.
void write_csv(std::ostream& os, const TrajectoryRecord& record);
/// Header t,w2_sq,envelope,gamma_fitted.
void write_csv(std::ostream& os, const CoupledRecord& record);

}  // namespace rellandau::sde
