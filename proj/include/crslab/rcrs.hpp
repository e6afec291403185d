#ifndef CRSLAB_RCRS_HPP
#define CRSLAB_RCRS_HPP

#include <cstdint>
#include <vector>

#include "crslab/model.hpp"
#include "crslab/ocrs.hpp"
#include "crslab/rng.hpp"

namespace crslab {

// Uniform arrival times per batch plus the induced visit order. Collisions
// (probability zero up to float resolution) are regenerated.
struct ArrivalOrder {
    std::vector<double> times;  // per batch
    std::vector<int> order;     // batch indices sorted by time
};

ArrivalOrder draw_arrival_order(int T, Rng& rng);

// x_{t,j}: fractional mass of batch t's products whose bundles intersect
// A_j, for every (batch, product) pair.
struct AttenuationContext {
    int L = 0;
    std::vector<std::vector<double>> xtj;  // [batch][product]

    explicit AttenuationContext(const InstanceIndex& ix);
};

// b(x) = (L-x)(1-e^{-L}) / (L(1-e^{-(L-x)})), decreasing on [0,1], b(0)=1.
double attenuation_b(int L, double x);

// Algorithm: visit batches in increasing arrival time; the active product (if
// any) survives a Bernoulli(b(x_{t,j})) attenuation coin and is accepted when
// it survives and all its items are free. Requires unit inventories.
std::vector<int> run_attenuate_greedy(const InstanceIndex& ix, const AttenuationContext& ctx,
                                      const Realization& realization, const ArrivalOrder& arrival,
                                      Rng& rng);

// Accepts every active, feasible product in arrival order.
std::vector<int> run_greedy_rcrs(const InstanceIndex& ix, const Realization& realization,
                                 const ArrivalOrder& arrival);

// Worst-case selectability of the attenuated scheme: the minimum over the
// incident own-batch mass z0 of b(z0) * int_0^1 (1 - y(1-z0) b((1-z0)/L)) *
// (1 - y b(1/L))^{L-1} dy. Strictly greater than 1/(1+L); about 0.397 at L=2.
double rcrs_random_element_guarantee(int L);

// Tabulated solution of c(y) = 1 - L*int_0^y c + ((L-1)/L) * (int_0^y
// c(z)(1-z)^L dz)^2, solved as the equivalent initial-value system with
// classical RK4. The residual of the integral equation is checked at every
// grid point.
struct SelectionFunction {
    int L = 0;
    std::vector<double> grid;      // y_0=0 .. y_G=1
    std::vector<double> c_values;
    std::vector<double> S_values;  // int_0^y c(z)(1-z)^L dz
    std::vector<double> C_values;  // int_0^y c(z) dz
    double max_residual = 0.0;

    double integral() const { return C_values.back(); }
    double c_at_one() const { return c_values.back(); }
    double c_at(double y) const;  // linear interpolation
};

SelectionFunction solve_selection_function(int L, int grid_points);

// Smallest even phase count comfortably above the 2L/c(1) validity threshold.
int recommended_phase_count(const SelectionFunction& c);

// Frozen per-phase feasibility estimates F^_j(q) = P(items of j free at y_q |
// Y_j > y_q), built by nested self-simulation phase by phase.
struct RecursivePolicy {
    int K = 0;
    std::vector<std::vector<double>> fhat;  // [phase][product]
};

RecursivePolicy build_recursive_policy(const InstanceIndex& ix, const SelectionFunction& c, int K,
                                       int sub_trials, std::uint64_t seed, int threads = 0);

// One path of the recursive scheme: products arrive at fresh uniform times;
// an arriving active product at time y accepts with probability
// min(c(y)/F^_j(phase(y)), 1) when feasible. Standard inputs only (every
// batch a singleton).
std::vector<int> run_recursive_path(const InstanceIndex& ix, const SelectionFunction& c,
                                    const RecursivePolicy& policy, Rng& rng);

// Builds the policy, then aggregates P(Z_j | X_j = 1) over `paths` runs.
AcceptanceProfile run_recursive_standard_rcrs(const Instance& instance, const SelectionFunction& c,
                                              int K, int sub_trials, long long paths,
                                              std::uint64_t seed, int threads = 0);

}  // namespace crslab

#endif
