#ifndef CRSLAB_OCRS_HPP
#define CRSLAB_OCRS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "crslab/model.hpp"
#include "crslab/rng.hpp"

namespace crslab {

enum class OcrsMode { exact, monte_carlo };

// Exact-selection policy: an active, feasible product j is accepted
// independently with probability min{1, alpha / P(F_j)}. In monte_carlo mode
// the stored feasibility values are empirical estimates and the divisor is
// floored at alpha, so noisy estimates below alpha cap the coin at 1 instead
// of inflating it.
struct OcrsPolicy {
    double alpha = 0.0;
    std::vector<double> feas_probs;  // per product index
    OcrsMode mode = OcrsMode::exact;

    double accept_prob(int j) const {
        double denom = feas_probs[j];
        if (mode == OcrsMode::monte_carlo && denom < alpha) denom = alpha;
        if (denom <= 0.0) return 1.0;  // unreachable for x_j > 0 under valid inputs
        const double p = alpha / denom;
        return p < 1.0 ? p : 1.0;
    }
};

struct MonteCarloConfig {
    double eps = 0.1;
    long long trials = 0;  // K; 0 defers to the sample-complexity bound
    std::uint64_t seed = 0;
};

// Sample bound K = ceil(3(1+L)/eps^2 * ln(2*T*M/eps)), natural log.
long long mc_trial_count(int L, int T, int num_items, double eps);

// One sampled demand path: at most one active product per batch, drawn from
// (x_j); -1 encodes "no arrival".
struct Realization {
    std::vector<int> active;
};

Realization draw_realization(const InstanceIndex& ix, Rng& rng);

struct ProductStats {
    double x = 0.0;
    double feas_prob = 1.0;   // P(F_j), exact or estimated
    double ratio = 0.0;       // P(Z_j | X_j = 1)
    double accept_prob = 0.0; // P(Z_j) = x_j * ratio
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool capped = false;      // min{1, alpha/P(F_j)} engaged
    bool defined = true;      // false when x_j = 0 makes the ratio unobservable
};

struct AcceptanceProfile {
    std::vector<ProductStats> per_product;
};

// Exact per-product feasibility and acceptance probabilities of the
// exact-selection policy, by propagating the distribution over available-item
// subsets batch by batch. Items incident to at most one product never block
// and are marginalized out; the remaining items must number <= 22. Requires
// unit inventories.
AcceptanceProfile exact_feasibility_probs(const Instance& instance, double alpha);

// Builds the exact-mode policy (alpha + exact feasibility probabilities).
OcrsPolicy exact_policy(const Instance& instance, double alpha);

// Executes one sample path; returns accepted product indices in batch order.
std::vector<int> run_ocrs(const InstanceIndex& ix, const OcrsPolicy& policy,
                          const Realization& realization, Rng& rng);

// Simulation-based policy: processes batches in order, estimating each
// P(F_j) as the empirical feasibility frequency over K fresh trials that
// replay batches 1..t-1 with the already-frozen estimates and
// alpha = (1-eps)/(1+L). K follows mc_trial_count unless trials_override > 0.
// Deterministic given the seed; trials are parallelized in fixed blocks.
std::pair<OcrsPolicy, AcceptanceProfile> simulate_ocrs_mc(const Instance& instance, double eps,
                                                          std::uint64_t seed, int threads = 0,
                                                          long long trials_override = 0);

std::pair<OcrsPolicy, AcceptanceProfile> simulate_ocrs_mc(const Instance& instance,
                                                          const MonteCarloConfig& config,
                                                          int threads = 0);

struct PairProbe {
    double estimate = 0.0;
    double ci_half = 0.0;
    long long trials = 0;
};

// Unbiased Monte Carlo estimate of P(Z_j and Z_j') over full sample paths.
// Requires j and j' to sit in distinct batches with disjoint item sets.
PairProbe pair_acceptance_probe(const Instance& instance, const OcrsPolicy& policy,
                                const std::string& j_id, const std::string& jp_id,
                                long long trials, std::uint64_t seed, int threads = 0);

// 95% Wilson score interval for successes/n; returns {lo, hi}.
std::pair<double, double> wilson_interval(long long successes, long long n);

}  // namespace crslab

#endif
