#include "crslab/ocrs.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "crslab/parallel.hpp"

namespace crslab {

long long mc_trial_count(int L, int T, int num_items, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("mc_trial_count: eps must lie in (0,1)");
    const double k = 3.0 * (1.0 + L) / (eps * eps) * std::log(2.0 * T * num_items / eps);
    return static_cast<long long>(std::ceil(k));
}

Realization draw_realization(const InstanceIndex& ix, Rng& rng) {
    Realization realization;
    realization.active.assign(ix.T, -1);
    for (int t = 0; t < ix.T; ++t) {
        double u = rng.next_double();
        for (int j : ix.batch_products[t]) {
            u -= ix.x[j];
            if (u < 0.0) {
                realization.active[t] = j;
                break;
            }
        }
    }
    return realization;
}

std::pair<double, double> wilson_interval(long long successes, long long n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double z2 = z * z;
    const double phat = static_cast<double>(successes) / static_cast<double>(n);
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {center - half, center + half};
}

namespace {

// Items incident to >= 2 products can be blocked by a competing acceptance;
// only those enter the availability state. Everything else is always free.
std::vector<int> tracked_items(const InstanceIndex& ix) {
    std::vector<int> tracked;
    for (int i = 0; i < ix.num_items; ++i)
        if (ix.products_on[i].size() >= 2) tracked.push_back(i);
    return tracked;
}

std::vector<std::uint32_t> tracked_masks(const InstanceIndex& ix, const std::vector<int>& tracked) {
    std::vector<int> slot(ix.num_items, -1);
    for (int s = 0; s < static_cast<int>(tracked.size()); ++s) slot[tracked[s]] = s;
    std::vector<std::uint32_t> mask(ix.num_products, 0);
    for (int j = 0; j < ix.num_products; ++j)
        for (int i : ix.items_of[j])
            if (slot[i] >= 0) mask[j] |= 1u << slot[i];
    return mask;
}

bool engages_cap(double alpha, double feas) { return alpha > feas * (1.0 + 1e-9) + 1e-15; }

}  // namespace

AcceptanceProfile exact_feasibility_probs(const Instance& instance, double alpha) {
    const InstanceIndex ix(instance);
    if (!ix.unit_inventories())
        throw std::invalid_argument("exact_feasibility_probs: requires unit inventories");
    const std::vector<int> tracked = tracked_items(ix);
    if (tracked.size() > 22)
        throw std::invalid_argument("exact_feasibility_probs: state space too large (" +
                                    std::to_string(tracked.size()) + " contended items)");
    const std::vector<std::uint32_t> mask = tracked_masks(ix, tracked);
    const std::uint32_t full = tracked.empty() ? 0u : (tracked.size() == 32 ? ~0u : (1u << tracked.size()) - 1u);

    AcceptanceProfile profile;
    profile.per_product.resize(ix.num_products);

    // ordered states keep the summation order, and hence the last-ulp
    // behavior, identical across standard libraries
    std::map<std::uint32_t, double> dist;
    dist[full] = 1.0;
    std::map<std::uint32_t, double> next;
    for (int t = 0; t < ix.T; ++t) {
        std::vector<double> feas(ix.batch_products[t].size(), 0.0);
        for (const auto& [state, w] : dist)
            for (size_t k = 0; k < ix.batch_products[t].size(); ++k) {
                const int j = ix.batch_products[t][k];
                if ((state & mask[j]) == mask[j]) feas[k] += w;
            }
        std::vector<double> accept(ix.batch_products[t].size(), 0.0);
        for (size_t k = 0; k < ix.batch_products[t].size(); ++k) {
            const int j = ix.batch_products[t][k];
            ProductStats& stats = profile.per_product[j];
            stats.x = ix.x[j];
            stats.feas_prob = feas[k];
            stats.capped = engages_cap(alpha, feas[k]);
            const double coin = feas[k] > 0.0 ? std::min(1.0, alpha / feas[k]) : 1.0;
            accept[k] = coin;
            stats.ratio = feas[k] * coin;
            stats.accept_prob = ix.x[j] * stats.ratio;
            stats.ci_lo = stats.ci_hi = stats.ratio;
        }

        next.clear();
        const double none = 1.0 - ix.batch_sum[t];
        for (const auto& [state, w] : dist) {
            double stay = none;
            for (size_t k = 0; k < ix.batch_products[t].size(); ++k) {
                const int j = ix.batch_products[t][k];
                if ((state & mask[j]) == mask[j]) {
                    next[state & ~mask[j]] += w * ix.x[j] * accept[k];
                    stay += ix.x[j] * (1.0 - accept[k]);
                } else {
                    stay += ix.x[j];
                }
            }
            if (stay != 0.0) next[state] += w * stay;
        }
        dist.swap(next);
    }
    return profile;
}

OcrsPolicy exact_policy(const Instance& instance, double alpha) {
    const AcceptanceProfile profile = exact_feasibility_probs(instance, alpha);
    OcrsPolicy policy;
    policy.alpha = alpha;
    policy.mode = OcrsMode::exact;
    policy.feas_probs.reserve(profile.per_product.size());
    for (const auto& stats : profile.per_product) policy.feas_probs.push_back(stats.feas_prob);
    return policy;
}

std::vector<int> run_ocrs(const InstanceIndex& ix, const OcrsPolicy& policy,
                          const Realization& realization, Rng& rng) {
    if (static_cast<int>(realization.active.size()) != ix.T)
        throw std::invalid_argument("run_ocrs: realization batch count mismatch");
    if (static_cast<int>(policy.feas_probs.size()) != ix.num_products)
        throw std::invalid_argument("run_ocrs: policy not built for this instance");

    std::vector<char> available(ix.num_items, 1);
    std::vector<int> accepted;
    for (int t = 0; t < ix.T; ++t) {
        const int j = realization.active[t];
        if (j < 0) continue;
        if (ix.batch_of[j] != t)
            throw std::invalid_argument("run_ocrs: active product not in its batch");
        bool feasible = true;
        for (int i : ix.items_of[j])
            if (!available[i]) {
                feasible = false;
                break;
            }
        if (!feasible) continue;
        if (!rng.bernoulli(policy.accept_prob(j))) continue;
        for (int i : ix.items_of[j]) available[i] = 0;
        accepted.push_back(j);
    }
    return accepted;
}

std::pair<OcrsPolicy, AcceptanceProfile> simulate_ocrs_mc(const Instance& instance, double eps,
                                                          std::uint64_t seed, int threads,
                                                          long long trials_override) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("simulate_ocrs_mc: eps must lie in (0,1)");
    const InstanceIndex ix(instance);
    if (!ix.unit_inventories())
        throw std::invalid_argument("simulate_ocrs_mc: requires unit inventories");

    const long long trials =
        trials_override > 0 ? trials_override : mc_trial_count(ix.L, ix.T, ix.num_items, eps);
    OcrsPolicy policy;
    policy.alpha = (1.0 - eps) / (1.0 + ix.L);
    policy.mode = OcrsMode::monte_carlo;
    policy.feas_probs.assign(ix.num_products, 1.0);

    AcceptanceProfile profile;
    profile.per_product.resize(ix.num_products);

    constexpr std::int64_t kBlock = 1024;
    for (int t = 0; t < ix.T; ++t) {
        const auto& batch = ix.batch_products[t];
        const std::int64_t num_blocks = (trials + kBlock - 1) / kBlock;
        std::vector<std::vector<long long>> counts(num_blocks, std::vector<long long>(batch.size(), 0));
        parallel_blocks(trials, kBlock, threads, [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
            std::vector<char> available(ix.num_items);
            auto& local = counts[blk];
            for (std::int64_t trial = lo; trial < hi; ++trial) {
                Rng rng(derive_seed(seed, "ocrs", static_cast<std::uint64_t>(t),
                                    static_cast<std::uint64_t>(trial)));
                available.assign(ix.num_items, 1);
                for (int tau = 0; tau < t; ++tau) {
                    double u = rng.next_double();
                    int active = -1;
                    for (int j : ix.batch_products[tau]) {
                        u -= ix.x[j];
                        if (u < 0.0) {
                            active = j;
                            break;
                        }
                    }
                    if (active < 0) continue;
                    bool feasible = true;
                    for (int i : ix.items_of[active])
                        if (!available[i]) {
                            feasible = false;
                            break;
                        }
                    if (!feasible) continue;
                    if (!rng.bernoulli(policy.accept_prob(active))) continue;
                    for (int i : ix.items_of[active]) available[i] = 0;
                }
                for (size_t k = 0; k < batch.size(); ++k) {
                    bool feasible = true;
                    for (int i : ix.items_of[batch[k]])
                        if (!available[i]) {
                            feasible = false;
                            break;
                        }
                    if (feasible) ++local[k];
                }
            }
        });
        for (size_t k = 0; k < batch.size(); ++k) {
            long long total = 0;
            for (const auto& local : counts) total += local[k];
            const int j = batch[k];
            policy.feas_probs[j] = static_cast<double>(total) / static_cast<double>(trials);
            ProductStats& stats = profile.per_product[j];
            stats.x = ix.x[j];
            stats.feas_prob = policy.feas_probs[j];
            const double coin = policy.accept_prob(j);
            stats.capped = coin >= 1.0 && policy.alpha > stats.feas_prob;
            stats.ratio = stats.feas_prob * coin;
            stats.accept_prob = stats.x * stats.ratio;
            auto [lo, hi] = wilson_interval(total, trials);
            stats.ci_lo = lo * coin;
            stats.ci_hi = hi * coin;
        }
    }
    return {policy, profile};
}

std::pair<OcrsPolicy, AcceptanceProfile> simulate_ocrs_mc(const Instance& instance,
                                                          const MonteCarloConfig& config,
                                                          int threads) {
    return simulate_ocrs_mc(instance, config.eps, config.seed, threads, config.trials);
}

PairProbe pair_acceptance_probe(const Instance& instance, const OcrsPolicy& policy,
                                const std::string& j_id, const std::string& jp_id,
                                long long trials, std::uint64_t seed, int threads) {
    const InstanceIndex ix(instance);
    const auto ja = ix.product_index.find(j_id);
    const auto jb = ix.product_index.find(jp_id);
    if (ja == ix.product_index.end() || jb == ix.product_index.end())
        throw std::invalid_argument("pair_acceptance_probe: unknown product id");
    const int j = ja->second, jp = jb->second;
    if (ix.batch_of[j] == ix.batch_of[jp])
        throw std::invalid_argument("pair_acceptance_probe: products must sit in distinct batches");
    for (int i : ix.items_of[j])
        for (int ip : ix.items_of[jp])
            if (i == ip)
                throw std::invalid_argument("pair_acceptance_probe: item sets must be disjoint");
    if (trials < 1) throw std::invalid_argument("pair_acceptance_probe: trials must be >= 1");

    constexpr std::int64_t kBlock = 4096;
    const std::int64_t num_blocks = (trials + kBlock - 1) / kBlock;
    std::vector<long long> hits(num_blocks, 0);
    parallel_blocks(trials, kBlock, threads, [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
        long long local = 0;
        for (std::int64_t path = lo; path < hi; ++path) {
            Rng rng(derive_seed(seed, "pair_probe", static_cast<std::uint64_t>(path)));
            const Realization realization = draw_realization(ix, rng);
            const std::vector<int> accepted = run_ocrs(ix, policy, realization, rng);
            bool has_j = false, has_jp = false;
            for (int a : accepted) {
                has_j |= a == j;
                has_jp |= a == jp;
            }
            if (has_j && has_jp) ++local;
        }
        hits[blk] = local;
    });
    long long total = 0;
    for (long long h : hits) total += h;

    PairProbe probe;
    probe.trials = trials;
    probe.estimate = static_cast<double>(total) / static_cast<double>(trials);
    auto [lo, hi] = wilson_interval(total, trials);
    probe.ci_half = (hi - lo) / 2.0;
    return probe;
}

}  // namespace crslab
