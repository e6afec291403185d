#include "crslab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crslab/parallel.hpp"

namespace crslab {

namespace {

std::vector<int> contended_items(const InstanceIndex& ix) {
    std::vector<int> out;
    for (int i = 0; i < ix.num_items; ++i)
        if (ix.products_on[i].size() >= 2) out.push_back(i);
    return out;
}

std::vector<std::uint32_t> contended_masks(const InstanceIndex& ix, const std::vector<int>& items) {
    std::vector<int> slot(ix.num_items, -1);
    for (int s = 0; s < static_cast<int>(items.size()); ++s) slot[items[s]] = s;
    std::vector<std::uint32_t> mask(ix.num_products, 0);
    for (int j = 0; j < ix.num_products; ++j)
        for (int i : ix.items_of[j])
            if (slot[i] >= 0) mask[j] |= 1u << slot[i];
    return mask;
}

}  // namespace

DpValue optimal_online_dp(const Instance& instance) {
    const InstanceIndex ix(instance);
    if (!ix.unit_inventories())
        throw std::invalid_argument("optimal_online_dp: requires unit inventories");
    const std::vector<int> items = contended_items(ix);
    if (items.size() > 22)
        throw std::invalid_argument("optimal_online_dp: state space too large (" +
                                    std::to_string(items.size()) + " contended items)");
    const std::vector<std::uint32_t> mask = contended_masks(ix, items);
    const std::uint32_t full = items.empty() ? 0u : (1u << items.size()) - 1u;

    DpValue result;
    result.trace.resize(ix.T);
    // forward pass over reachable states, memoized backward values
    std::vector<std::unordered_map<std::uint32_t, double>> memo(ix.T + 1);
    std::function<double(int, std::uint32_t)> value = [&](int t, std::uint32_t state) -> double {
        if (t == ix.T) return 0.0;
        auto hit = memo[t].find(state);
        if (hit != memo[t].end()) return hit->second;
        double v = (1.0 - ix.batch_sum[t]) * value(t + 1, state);
        std::uint64_t accept_bits = 0;
        for (size_t k = 0; k < ix.batch_products[t].size(); ++k) {
            const int j = ix.batch_products[t][k];
            const double skip = value(t + 1, state);
            double best = skip;
            if ((state & mask[j]) == mask[j]) {
                const double take = ix.reward[j] + value(t + 1, state & ~mask[j]);
                if (take > skip) {
                    best = take;
                    accept_bits |= 1ull << k;
                }
            }
            v += ix.x[j] * best;
        }
        memo[t][state] = v;
        result.trace[t][state] = accept_bits;
        return v;
    };
    result.value = value(0, full);
    return result;
}

namespace {

struct OfflineSearch {
    const InstanceIndex& ix;
    std::vector<int> actives;
    std::vector<double> suffix;
    std::vector<int> stock;
    double best = 0.0;

    void dfs(size_t idx, double current) {
        if (current > best) best = current;
        if (idx >= actives.size()) return;
        if (current + suffix[idx] <= best) return;
        const int j = actives[idx];
        bool fits = true;
        for (int i : ix.items_of[j])
            if (stock[i] == 0) {
                fits = false;
                break;
            }
        if (fits) {
            for (int i : ix.items_of[j]) --stock[i];
            dfs(idx + 1, current + ix.reward[j]);
            for (int i : ix.items_of[j]) ++stock[i];
        }
        dfs(idx + 1, current);
    }
};

}  // namespace

double offline_optimum(const InstanceIndex& ix, const Realization& realization) {
    if (static_cast<int>(realization.active.size()) != ix.T)
        throw std::invalid_argument("offline_optimum: realization batch count mismatch");
    OfflineSearch search{ix, {}, {}, {}, 0.0};
    for (int j : realization.active)
        if (j >= 0) search.actives.push_back(j);
    if (search.actives.size() > 24)
        throw std::invalid_argument("offline_optimum: too many active products");
    std::sort(search.actives.begin(), search.actives.end(),
              [&](int a, int b) { return ix.reward[a] > ix.reward[b]; });
    search.suffix.assign(search.actives.size() + 1, 0.0);
    for (int k = static_cast<int>(search.actives.size()) - 1; k >= 0; --k)
        search.suffix[k] = search.suffix[k + 1] + ix.reward[search.actives[k]];
    search.stock.assign(ix.inventory.begin(), ix.inventory.end());
    search.dfs(0, 0.0);
    return search.best;
}

double offline_optimum_mean(const Instance& instance, long long paths, std::uint64_t seed,
                            int threads) {
    if (paths < 1) throw std::invalid_argument("offline_optimum_mean: paths must be >= 1");
    const InstanceIndex ix(instance);
    constexpr std::int64_t kBlock = 8192;
    const std::int64_t num_blocks = (paths + kBlock - 1) / kBlock;
    std::vector<double> sums(num_blocks, 0.0);
    parallel_blocks(paths, kBlock, threads, [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
        double sum = 0.0;
        for (std::int64_t path = lo; path < hi; ++path) {
            Rng rng(derive_seed(seed, "offline", static_cast<std::uint64_t>(path)));
            const Realization realization = draw_realization(ix, rng);
            sum += offline_optimum(ix, realization);
        }
        sums[blk] = sum;
    });
    double total = 0.0;
    for (double s : sums) total += s;
    return total / static_cast<double>(paths);
}

AcceptanceProfile exhaustive_acceptance_probs(const Instance& instance, const OcrsPolicy& policy) {
    const InstanceIndex ix(instance);
    if (!ix.unit_inventories())
        throw std::invalid_argument("exhaustive_acceptance_probs: requires unit inventories");
    if (ix.num_items > 32)
        throw std::invalid_argument("exhaustive_acceptance_probs: too many items");
    double budget = 1.0;
    int coins = 0;
    for (int t = 0; t < ix.T; ++t) {
        budget *= static_cast<double>(ix.batch_products[t].size() + 1);
        coins += static_cast<int>(ix.batch_products[t].size());
    }
    budget *= std::pow(2.0, coins);
    if (budget > 1e7)
        throw std::invalid_argument("exhaustive_acceptance_probs: enumeration too large");

    // full item masks here, not just contended ones: this oracle must stay
    // independent of the marginalization used by the exact DP
    std::vector<std::uint32_t> mask(ix.num_products, 0);
    for (int j = 0; j < ix.num_products; ++j)
        for (int i : ix.items_of[j]) mask[j] |= 1u << i;
    const std::uint32_t full = ix.num_items == 32 ? ~0u : (1u << ix.num_items) - 1u;

    std::vector<double> feas(ix.num_products, 0.0), accepted(ix.num_products, 0.0);
    std::function<void(int, std::uint32_t, double)> walk = [&](int t, std::uint32_t avail, double w) {
        if (w == 0.0 || t == ix.T) return;
        for (int j : ix.batch_products[t])
            if ((avail & mask[j]) == mask[j]) feas[j] += w;
        walk(t + 1, avail, w * (1.0 - ix.batch_sum[t]));
        for (int j : ix.batch_products[t]) {
            if ((avail & mask[j]) == mask[j]) {
                const double coin = policy.accept_prob(j);
                accepted[j] += w * ix.x[j] * coin;
                walk(t + 1, avail & ~mask[j], w * ix.x[j] * coin);
                walk(t + 1, avail, w * ix.x[j] * (1.0 - coin));
            } else {
                walk(t + 1, avail, w * ix.x[j]);
            }
        }
    };
    walk(0, full, 1.0);

    AcceptanceProfile profile;
    profile.per_product.resize(ix.num_products);
    for (int j = 0; j < ix.num_products; ++j) {
        ProductStats& stats = profile.per_product[j];
        stats.x = ix.x[j];
        stats.feas_prob = feas[j];
        stats.accept_prob = accepted[j];
        stats.ratio = ix.x[j] > 0.0 ? accepted[j] / ix.x[j] : feas[j] * policy.accept_prob(j);
        stats.capped = policy.alpha > feas[j] * (1.0 + 1e-9) + 1e-15;
        stats.ci_lo = stats.ci_hi = stats.ratio;
    }
    return profile;
}

AcceptanceProfile estimate_selectability(const Instance& instance, const SchemeRunner& runner,
                                         long long paths, std::uint64_t seed, int threads) {
    if (paths < 1) throw std::invalid_argument("estimate_selectability: paths must be >= 1");
    const InstanceIndex ix(instance);

    struct Counts {
        std::vector<long long> active, accepted;
    };
    constexpr std::int64_t kBlock = 2048;
    const std::int64_t num_blocks = (paths + kBlock - 1) / kBlock;
    std::vector<Counts> partial(num_blocks);
    parallel_blocks(paths, kBlock, threads, [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
        Counts counts;
        counts.active.assign(ix.num_products, 0);
        counts.accepted.assign(ix.num_products, 0);
        for (std::int64_t path = lo; path < hi; ++path) {
            Rng rng(derive_seed(seed, "selectability", static_cast<std::uint64_t>(path)));
            const Realization realization = draw_realization(ix, rng);
            const std::vector<int> accepted = runner(ix, realization, rng);
            for (int j : realization.active)
                if (j >= 0) ++counts.active[j];
            for (int j : accepted) ++counts.accepted[j];
        }
        partial[blk] = std::move(counts);
    });

    std::vector<long long> active(ix.num_products, 0), accepted(ix.num_products, 0);
    for (const auto& counts : partial)
        for (int j = 0; j < ix.num_products; ++j) {
            active[j] += counts.active[j];
            accepted[j] += counts.accepted[j];
        }

    AcceptanceProfile profile;
    profile.per_product.resize(ix.num_products);
    for (int j = 0; j < ix.num_products; ++j) {
        ProductStats& stats = profile.per_product[j];
        stats.x = ix.x[j];
        if (ix.x[j] <= 0.0 || active[j] == 0) {
            stats.defined = false;
            continue;
        }
        stats.ratio = static_cast<double>(accepted[j]) / static_cast<double>(active[j]);
        stats.accept_prob = stats.x * stats.ratio;
        auto [lo, hi] = wilson_interval(accepted[j], active[j]);
        stats.ci_lo = lo;
        stats.ci_hi = hi;
    }
    return profile;
}

}  // namespace crslab
