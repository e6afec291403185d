#ifndef CRSLAB_ORACLES_HPP
#define CRSLAB_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "crslab/model.hpp"
#include "crslab/ocrs.hpp"

namespace crslab {

// Optimal-online value with its accept/skip decisions per reachable
// (batch, availability) state. States are masks over contended items.
struct DpValue {
    double value = 0.0;
    // trace[t][state] = bitmask over the batch's products marked worth accepting
    std::vector<std::unordered_map<std::uint32_t, std::uint64_t>> trace;
};

// Exact backward induction over (batch, available-item subset). Requires unit
// inventories and at most 22 contended items.
DpValue optimal_online_dp(const Instance& instance);

// Maximum total reward over feasible subsets of the realized active products
// (branch and bound; at most 24 actives).
double offline_optimum(const InstanceIndex& ix, const Realization& realization);

// Mean of offline_optimum over `paths` sampled realizations.
double offline_optimum_mean(const Instance& instance, long long paths, std::uint64_t seed,
                            int threads = 0);

// Independent oracle for exact_feasibility_probs: enumerates every
// (active-per-batch, acceptance-coin) combination with its probability. The
// enumeration guard follows prod_t(|N_t|+1) * 2^{#coins} <= 1e7.
AcceptanceProfile exhaustive_acceptance_probs(const Instance& instance, const OcrsPolicy& policy);

// A scheme runs one sample path: given the realization and a fresh stream it
// returns the accepted product indices (drawing arrival order internally if
// it needs one).
using SchemeRunner = std::function<std::vector<int>(const InstanceIndex&, const Realization&, Rng&)>;

// Per-product empirical P(Z_j | X_j = 1) with 95% Wilson intervals over
// `paths` independent sample paths. Products with x_j = 0 come back with
// defined = false.
AcceptanceProfile estimate_selectability(const Instance& instance, const SchemeRunner& runner,
                                         long long paths, std::uint64_t seed, int threads = 0);

}  // namespace crslab

#endif
