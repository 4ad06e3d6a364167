#pragma once

// Random generation: stick-breaking frequencies, sequential (restaurant)
// partition growth, block-count chains, the alpha = 1/2 residual
// construction, stable variates and Poisson jump simulation.

#include <cstdint>
#include <vector>

#include "pkpart/models.hpp"
#include "pkpart/partitions.hpp"
#include "pkpart/random.hpp"

namespace pkpart {

// First k size-biased frequencies W_j prod_{i<j} (1 - W_i) with
// W_j ~ beta(1 - alpha, theta + j alpha). Stops early if a mass underflows.
MassVector sample_gem(double alpha, double theta, int k, RandomSource& r);

// Sequential growth by the model's prediction rule.
SetPartition sample_crp(const PartitionModel& model, int n, RandomSource& r);

// Path K_1..K_n of the block-count chain of the Brownian model.
std::vector<int> sample_kn_chain(double lambda, int n, RandomSource& r);
// Same chain with a caller-owned ladder of depth >= 2n.
std::vector<int> sample_kn_chain(const specfun::HermiteLadder& ladder, int n, RandomSource& r);

// P_j = lambda^2/(lambda^2 + S_{j-1}) - lambda^2/(lambda^2 + S_j), S_j a sum of
// j squared standard normals.
MassVector sample_residual_construction(double lambda, int k, RandomSource& r);

// T with E exp(-lambda T) = exp(-lambda^alpha) (Kanter's representation).
double sample_stable(double alpha, RandomSource& r);
// Density proportional to exp(-b t) f_alpha(t), by rejection from the stable
// law. `proposals`, if given, is incremented once per proposal.
double sample_tilted_stable(double alpha, double b, RandomSource& r,
                            std::uint64_t* proposals = nullptr);

struct JumpProcessSpec {
  double alpha;
  double b;
  double c;
  // Jumps below epsilon are replaced by their mean total. 0 selects the
  // largest epsilon whose remainder mean is delta * kappa_1.
  double epsilon = 0.0;
  double delta = 1e-4;
};

struct JumpRealization {
  std::vector<double> jumps;  // decreasing
  double remainder = 0.0;     // mean mass of the jumps below epsilon
  double total = 0.0;
};

// Resolves epsilon for the spec; ConfigurationError when infeasible.
double jump_truncation(const JumpProcessSpec& spec);
JumpRealization simulate_jumps(const JumpProcessSpec& spec, RandomSource& r);
// n uniform points on the normalised jump intervals; points falling in the
// remainder become singletons.
SetPartition sample_jump_partition(const JumpProcessSpec& spec, int n, RandomSource& r);

// Grows a two-parameter partition until n elements lie outside its first k
// classes and returns the partition of those n elements.
SetPartition sample_pk_deletion(double alpha, double theta, int k, int n, RandomSource& r);

}  // namespace pkpart
