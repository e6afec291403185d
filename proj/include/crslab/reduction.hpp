#ifndef CRSLAB_REDUCTION_HPP
#define CRSLAB_REDUCTION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "crslab/lp.hpp"
#include "crslab/model.hpp"
#include "crslab/ocrs.hpp"

namespace crslab {

struct SysProduct {
    std::string id;
    std::vector<std::string> items;
    double reward = 0.0;
};

// One playable action: phi[j] is the probability of selling product j when
// the action is played.
struct SysAction {
    std::string id;
    std::vector<double> phi;
};

// Abstract problem with substitutable actions: per period an explicit action
// list whose rows sum to at most 1, with a null (all-zero) action present.
// The recourse oracle maps (period, action, forbidden mask) to an action of
// the same period selling nothing forbidden and weakly more of everything
// else; adapters install structural oracles, loaded documents fall back to a
// scan over the period's table.
struct SubstitutableSystem {
    std::vector<Item> items;
    std::vector<SysProduct> products;
    std::vector<std::vector<SysAction>> period_actions;

    using Oracle = std::function<int(const SubstitutableSystem&, int, int, const std::vector<char>&)>;
    Oracle recourse_oracle;

    int periods() const { return static_cast<int>(period_actions.size()); }
    int num_products() const { return static_cast<int>(products.size()); }
};

// Scans the period's action list for any conforming recourse action.
int generic_recourse_scan(const SubstitutableSystem& system, int t, int action,
                          const std::vector<char>& forbidden);

// Structural checks (dimensions, probability ranges, row sums, null action).
// Throws std::invalid_argument on the first failure.
void check_system(const SubstitutableSystem& system);

SubstitutableSystem parse_system(const std::string& text);
SubstitutableSystem load_system(std::istream& in);
std::string save_system(const SubstitutableSystem& system);

// Mixture over recourse actions; weights may sum to less than one, the
// remainder falling on the period's null action.
struct RecourseMixture {
    std::vector<std::pair<int, double>> entries;  // (action index, weight)

    double total_weight() const {
        double sum = 0.0;
        for (const auto& [a, w] : entries) sum += w;
        return sum;
    }
};

// Breakpoint construction: computes a randomized action whose expected sale
// probability is 0 on the forbidden set and exactly phi_t(j, S) elsewhere.
// The expectation identity is verified to 1e-12 before returning.
RecourseMixture scale_down(const SubstitutableSystem& system, int t, int action,
                           const std::vector<char>& forbidden);

// Generalization used by the online wrapper when preprocessing has split a
// product across item units: targets[j] in [0, phi_t(j, S)] is hit exactly in
// expectation.
RecourseMixture scale_down_targets(const SubstitutableSystem& system, int t, int action,
                                   const std::vector<double>& targets);

// One product copy of the reduced instance.
struct CopyInfo {
    std::string copy_id;
    int original_product = -1;
    int period = -1;
    double x = 0.0;
};

struct ReductionOutput {
    Instance instance;             // unit items, one batch per period
    std::vector<CopyInfo> mapping; // aligned with instance.products
    std::vector<int> dummy_counts; // splits per period, <= |M| each
};

LinearProgram build_relaxation_lp(const SubstitutableSystem& system);

// Splits items into units and products into copies at unit-capacity
// breakpoints, so every copy's mass fits inside single units (the second
// initial processing step).
ReductionOutput preprocess(const SubstitutableSystem& system, const LpSolution& lp);

struct OnlineRunStats {
    long long paths = 0;
    double mean_reward = 0.0;
    std::vector<long long> sale_counts;  // per copy
    std::vector<double> sale_freq;       // per copy
};

// Runs the reduction end to end: per period the OCRS pre-decides bits for
// every copy (shared within groups of copies that consume identical units),
// the LP action distribution is scaled down around the refused copies, one
// action is played, and the realized sale feeds both the inventory state and
// the OCRS state. Throws std::logic_error if an inventory would underflow.
OnlineRunStats online_algorithm(const SubstitutableSystem& system, const ReductionOutput& reduction,
                                const OcrsPolicy& policy, long long paths, std::uint64_t seed,
                                int threads = 0);

// Accept-reject NRM: assortment actions are all subsets of each period's
// support (support size capped at 12), phi_t(j, S) = lambda_tj * 1(j in S).
SubstitutableSystem nrm_accept_reject(const std::vector<std::vector<double>>& lambda,
                                      const std::vector<SysProduct>& products,
                                      const std::vector<Item>& items);

struct OcaAgent {
    std::vector<std::string> bundle;
    std::vector<std::pair<double, double>> values;  // (value, probability), probs sum <= 1
};

// Single-minded combinatorial auction: one product per (agent, support
// value), identical bundles within an agent, threshold actions "accept iff
// value >= v" plus null. Items get unit inventories.
SubstitutableSystem oca_single_minded(const std::vector<OcaAgent>& agents);

}  // namespace crslab

#endif
