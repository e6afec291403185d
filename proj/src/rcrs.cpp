#include "crslab/rcrs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "crslab/parallel.hpp"

namespace crslab {

ArrivalOrder draw_arrival_order(int T, Rng& rng) {
    ArrivalOrder arrival;
    arrival.times.resize(T);
    for (;;) {
        for (int t = 0; t < T; ++t) arrival.times[t] = rng.next_double();
        arrival.order.resize(T);
        std::iota(arrival.order.begin(), arrival.order.end(), 0);
        std::sort(arrival.order.begin(), arrival.order.end(),
                  [&](int a, int b) { return arrival.times[a] < arrival.times[b]; });
        bool distinct = true;
        for (int t = 0; t + 1 < T; ++t)
            if (arrival.times[arrival.order[t]] == arrival.times[arrival.order[t + 1]]) distinct = false;
        if (distinct) return arrival;
    }
}

AttenuationContext::AttenuationContext(const InstanceIndex& ix) : L(ix.L) {
    xtj.assign(ix.T, std::vector<double>(ix.num_products, 0.0));
    std::vector<char> touches(ix.num_items, 0);
    for (int j = 0; j < ix.num_products; ++j) {
        for (int i : ix.items_of[j]) touches[i] = 1;
        for (int t = 0; t < ix.T; ++t) {
            double mass = 0.0;
            for (int jp : ix.batch_products[t]) {
                bool incident = false;
                for (int i : ix.items_of[jp])
                    if (touches[i]) {
                        incident = true;
                        break;
                    }
                if (incident) mass += ix.x[jp];
            }
            xtj[t][j] = mass;
        }
        for (int i : ix.items_of[j]) touches[i] = 0;
    }
}

double attenuation_b(int L, double x) {
    if (L < 2) throw std::invalid_argument("attenuation_b: L must be >= 2");
    if (x < -1e-12 || x > 1.0 + 1e-12) throw std::invalid_argument("attenuation_b: x must lie in [0,1]");
    x = std::clamp(x, 0.0, 1.0);
    // (L-x)(1-e^{-L}) / (L(1-e^{-(L-x)})); the x -> 0 limit is taken literally
    return (L - x) * (-std::expm1(-L)) / (L * (-std::expm1(-(L - x))));
}

std::vector<int> run_attenuate_greedy(const InstanceIndex& ix, const AttenuationContext& ctx,
                                      const Realization& realization, const ArrivalOrder& arrival,
                                      Rng& rng) {
    if (!ix.unit_inventories())
        throw std::invalid_argument("run_attenuate_greedy: requires unit inventories");
    std::vector<char> available(ix.num_items, 1);
    std::vector<int> accepted;
    for (int t : arrival.order) {
        const int j = realization.active[t];
        if (j < 0) continue;
        const bool survives = rng.bernoulli(attenuation_b(ctx.L, ctx.xtj[t][j]));
        if (!survives) continue;
        bool feasible = true;
        for (int i : ix.items_of[j])
            if (!available[i]) {
                feasible = false;
                break;
            }
        if (!feasible) continue;
        for (int i : ix.items_of[j]) available[i] = 0;
        accepted.push_back(j);
    }
    return accepted;
}

std::vector<int> run_greedy_rcrs(const InstanceIndex& ix, const Realization& realization,
                                 const ArrivalOrder& arrival) {
    if (!ix.unit_inventories())
        throw std::invalid_argument("run_greedy_rcrs: requires unit inventories");
    std::vector<char> available(ix.num_items, 1);
    std::vector<int> accepted;
    for (int t : arrival.order) {
        const int j = realization.active[t];
        if (j < 0) continue;
        bool feasible = true;
        for (int i : ix.items_of[j])
            if (!available[i]) {
                feasible = false;
                break;
            }
        if (!feasible) continue;
        for (int i : ix.items_of[j]) available[i] = 0;
        accepted.push_back(j);
    }
    return accepted;
}

namespace {

// int_0^1 (1 - a*y)(1 - b*y)^{L-1} dy for the guarantee bound; the integrand
// is a degree-L polynomial, so 32-node Gauss-Legendre is exact here.
double guarantee_integral(int L, double a, double b) {
    static const double nodes[] = {
        -0.997263861849482, -0.985611511545268, -0.964762255587506, -0.934906075937740,
        -0.896321155766052, -0.849367613732570, -0.794483795967942, -0.732182118740290,
        -0.663044266930215, -0.587715757240762, -0.506899908932229, -0.421351276130635,
        -0.331868602282128, -0.239287362252137, -0.144471961582796, -0.048307665687738,
        0.048307665687738,  0.144471961582796,  0.239287362252137,  0.331868602282128,
        0.421351276130635,  0.506899908932229,  0.587715757240762,  0.663044266930215,
        0.732182118740290,  0.794483795967942,  0.849367613732570,  0.896321155766052,
        0.934906075937740,  0.964762255587506,  0.985611511545268,  0.997263861849482};
    static const double weights[] = {
        0.007018610009470, 0.016274394730906, 0.025392065309262, 0.034273862913021,
        0.042835898022227, 0.050998059262376, 0.058684093478536, 0.065822222776362,
        0.072345794108849, 0.078193895787070, 0.083311924226947, 0.087652093004404,
        0.091173878695764, 0.093844399080805, 0.095638720079275, 0.096540088514728,
        0.096540088514728, 0.095638720079275, 0.093844399080805, 0.091173878695764,
        0.087652093004404, 0.083311924226947, 0.078193895787070, 0.072345794108849,
        0.065822222776362, 0.058684093478536, 0.050998059262376, 0.042835898022227,
        0.034273862913021, 0.025392065309262, 0.016274394730906, 0.007018610009470};
    double sum = 0.0;
    for (int k = 0; k < 32; ++k) {
        const double y = 0.5 * (nodes[k] + 1.0);
        sum += weights[k] * (1.0 - a * y) * std::pow(1.0 - b * y, L - 1);
    }
    return 0.5 * sum;
}

}  // namespace

double rcrs_random_element_guarantee(int L) {
    if (L < 2) throw std::invalid_argument("rcrs_random_element_guarantee: L must be >= 2");
    const double b_inner = attenuation_b(L, 1.0 / L);
    double worst = 1.0;
    for (int step = 0; step <= 1000; ++step) {
        const double z0 = step / 1000.0;
        const double a = (1.0 - z0) * attenuation_b(L, (1.0 - z0) / L);
        const double value = attenuation_b(L, z0) * guarantee_integral(L, a, b_inner);
        worst = std::min(worst, value);
    }
    return worst;
}

SelectionFunction solve_selection_function(int L, int grid_points) {
    if (L < 2) throw std::invalid_argument("solve_selection_function: L must be >= 2");
    if (grid_points < 1000)
        throw std::invalid_argument("solve_selection_function: need at least 1000 grid points");

    SelectionFunction out;
    out.L = L;
    const int G = grid_points;
    const double h = 1.0 / G;
    out.grid.resize(G + 1);
    out.c_values.resize(G + 1);
    out.S_values.resize(G + 1);
    out.C_values.resize(G + 1);

    // state (c, S, C):  c' = -L c + 2((L-1)/L) S c (1-y)^L,  S' = c (1-y)^L,
    // C' = c, with c(0)=1, S(0)=C(0)=0
    const double coef = 2.0 * (L - 1.0) / L;
    auto deriv = [&](double y, double c, double S, double& dc, double& dS, double& dC) {
        const double decay = std::pow(1.0 - y, L);
        dc = -L * c + coef * S * c * decay;
        dS = c * decay;
        dC = c;
    };

    double c = 1.0, S = 0.0, C = 0.0;
    out.grid[0] = 0.0;
    out.c_values[0] = c;
    out.S_values[0] = S;
    out.C_values[0] = C;
    for (int g = 0; g < G; ++g) {
        const double y = g * h;
        double k1c, k1S, k1C, k2c, k2S, k2C, k3c, k3S, k3C, k4c, k4S, k4C;
        deriv(y, c, S, k1c, k1S, k1C);
        deriv(y + 0.5 * h, c + 0.5 * h * k1c, S + 0.5 * h * k1S, k2c, k2S, k2C);
        deriv(y + 0.5 * h, c + 0.5 * h * k2c, S + 0.5 * h * k2S, k3c, k3S, k3C);
        deriv(y + h, c + h * k3c, S + h * k3S, k4c, k4S, k4C);
        c += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        S += h / 6.0 * (k1S + 2.0 * k2S + 2.0 * k3S + k4S);
        C += h / 6.0 * (k1C + 2.0 * k2C + 2.0 * k3C + k4C);
        out.grid[g + 1] = (g + 1) * h;
        out.c_values[g + 1] = c;
        out.S_values[g + 1] = S;
        out.C_values[g + 1] = C;
    }

    out.max_residual = 0.0;
    for (int g = 0; g <= G; ++g) {
        const double rhs = 1.0 - L * out.C_values[g] +
                           (L - 1.0) / L * out.S_values[g] * out.S_values[g];
        out.max_residual = std::max(out.max_residual, std::fabs(out.c_values[g] - rhs));
    }
    if (out.max_residual > 1e-6)
        throw std::runtime_error("solve_selection_function: grid too coarse, residual " +
                                 std::to_string(out.max_residual));
    return out;
}

double SelectionFunction::c_at(double y) const {
    if (y <= 0.0) return c_values.front();
    if (y >= 1.0) return c_values.back();
    const int G = static_cast<int>(grid.size()) - 1;
    const double pos = y * G;
    const int g = std::min(G - 1, static_cast<int>(pos));
    const double frac = pos - g;
    return c_values[g] * (1.0 - frac) + c_values[g + 1] * frac;
}

int recommended_phase_count(const SelectionFunction& c) {
    return static_cast<int>(std::ceil(4.0 * c.L / c.c_at_one()));
}

namespace {

int phase_of(double y, int K) {
    // y in (y_q, y_{q+1}] maps to q
    int q = static_cast<int>(std::ceil(y * K)) - 1;
    return std::clamp(q, 0, K - 1);
}

void require_standard(const InstanceIndex& ix) {
    for (const auto& batch : ix.batch_products)
        if (batch.size() != 1)
            throw std::invalid_argument("recursive RCRS: standard inputs only (every batch a singleton)");
}

// Per-product draws for one simulated path. Consuming exactly three uniforms
// per product keeps replay independent of processing order.
struct PathDraws {
    std::vector<double> arrival, u_active, u_coin;
    std::vector<int> order;

    void draw(int n, Rng& rng) {
        arrival.resize(n);
        u_active.resize(n);
        u_coin.resize(n);
        for (int j = 0; j < n; ++j) {
            arrival[j] = rng.next_double();
            u_active[j] = rng.next_double();
            u_coin[j] = rng.next_double();
        }
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return arrival[a] < arrival[b]; });
    }
};

}  // namespace

RecursivePolicy build_recursive_policy(const InstanceIndex& ix, const SelectionFunction& c, int K,
                                       int sub_trials, std::uint64_t seed, int threads) {
    require_standard(ix);
    if (K < 2.0 * ix.L / c.c_at_one() - 1e-9)
        throw std::invalid_argument("build_recursive_policy: K below the 2L/c(1) threshold");
    if (sub_trials < 1) throw std::invalid_argument("build_recursive_policy: sub_trials must be >= 1");

    const int n = ix.num_products;
    RecursivePolicy policy;
    policy.K = K;
    policy.fhat.assign(K, std::vector<double>(n, 1.0));

    constexpr std::int64_t kBlock = 512;
    const std::int64_t num_blocks = (sub_trials + kBlock - 1) / kBlock;
    std::vector<std::vector<long long>> counts(num_blocks);

    for (int q = 1; q < K; ++q) {
        const double yq = static_cast<double>(q) / K;
        // one pooled simulation batch estimates F^_j(q) for every j at once:
        // each trial replays the scheme below yq once per excluded product
        for (auto& slot : counts) slot.assign(n, 0);
        parallel_blocks(sub_trials, kBlock, threads,
                        [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
            PathDraws draws;
            std::vector<char> available(ix.num_items);
            auto& local = counts[blk];
            for (std::int64_t trial = lo; trial < hi; ++trial) {
                for (int excluded = 0; excluded < n; ++excluded) {
                    Rng rng(derive_seed(seed, "rcrs_fhat", static_cast<std::uint64_t>(q),
                                        static_cast<std::uint64_t>(excluded),
                                        static_cast<std::uint64_t>(trial)));
                    draws.draw(n, rng);
                    available.assign(ix.num_items, 1);
                    for (int j : draws.order) {
                        if (j == excluded) continue;  // conditioning on Y_j > y_q
                        const double y = draws.arrival[j];
                        if (y >= yq) break;
                        if (draws.u_active[j] >= ix.x[j]) continue;
                        const double denom = policy.fhat[phase_of(y, K)][j];
                        const double p = std::min(c.c_at(y) / denom, 1.0);
                        if (draws.u_coin[j] >= p) continue;
                        bool feasible = true;
                        for (int i : ix.items_of[j])
                            if (!available[i]) {
                                feasible = false;
                                break;
                            }
                        if (!feasible) continue;
                        for (int i : ix.items_of[j]) available[i] = 0;
                    }
                    bool free = true;
                    for (int i : ix.items_of[excluded])
                        if (!available[i]) {
                            free = false;
                            break;
                        }
                    if (free) ++local[excluded];
                }
            }
        });
        for (int j = 0; j < n; ++j) {
            long long total = 0;
            for (const auto& local : counts) total += local[j];
            policy.fhat[q][j] = static_cast<double>(total) / static_cast<double>(sub_trials);
        }
    }
    return policy;
}

std::vector<int> run_recursive_path(const InstanceIndex& ix, const SelectionFunction& c,
                                    const RecursivePolicy& policy, Rng& rng) {
    PathDraws draws;
    draws.draw(ix.num_products, rng);
    std::vector<char> available(ix.num_items, 1);
    std::vector<int> accepted;
    for (int j : draws.order) {
        if (draws.u_active[j] >= ix.x[j]) continue;
        const double y = draws.arrival[j];
        const double denom = policy.fhat[phase_of(y, policy.K)][j];
        const double p = std::min(c.c_at(y) / denom, 1.0);
        if (draws.u_coin[j] >= p) continue;
        bool feasible = true;
        for (int i : ix.items_of[j])
            if (!available[i]) {
                feasible = false;
                break;
            }
        if (!feasible) continue;
        for (int i : ix.items_of[j]) available[i] = 0;
        accepted.push_back(j);
    }
    return accepted;
}

AcceptanceProfile run_recursive_standard_rcrs(const Instance& instance, const SelectionFunction& c,
                                              int K, int sub_trials, long long paths,
                                              std::uint64_t seed, int threads) {
    const InstanceIndex ix(instance);
    require_standard(ix);
    const RecursivePolicy policy = build_recursive_policy(ix, c, K, sub_trials, seed, threads);

    const int n = ix.num_products;
    constexpr std::int64_t kBlock = 2048;
    const std::int64_t num_blocks = (paths + kBlock - 1) / kBlock;
    std::vector<std::vector<long long>> active(num_blocks), accepted(num_blocks);
    parallel_blocks(paths, kBlock, threads, [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
        active[blk].assign(n, 0);
        accepted[blk].assign(n, 0);
        PathDraws draws;
        std::vector<char> available(ix.num_items);
        for (std::int64_t path = lo; path < hi; ++path) {
            Rng rng(derive_seed(seed, "rcrs_path", static_cast<std::uint64_t>(path)));
            draws.draw(n, rng);
            available.assign(ix.num_items, 1);
            for (int j : draws.order) {
                if (draws.u_active[j] >= ix.x[j]) continue;
                ++active[blk][j];
                const double y = draws.arrival[j];
                const double denom = policy.fhat[phase_of(y, policy.K)][j];
                const double p = std::min(c.c_at(y) / denom, 1.0);
                if (draws.u_coin[j] >= p) continue;
                bool feasible = true;
                for (int i : ix.items_of[j])
                    if (!available[i]) {
                        feasible = false;
                        break;
                    }
                if (!feasible) continue;
                for (int i : ix.items_of[j]) available[i] = 0;
                ++accepted[blk][j];
            }
        }
    });

    AcceptanceProfile profile;
    profile.per_product.resize(n);
    for (int j = 0; j < n; ++j) {
        long long act = 0, acc = 0;
        for (std::int64_t blk = 0; blk < num_blocks; ++blk) {
            act += active[blk][j];
            acc += accepted[blk][j];
        }
        ProductStats& stats = profile.per_product[j];
        stats.x = ix.x[j];
        if (act == 0) {
            stats.defined = false;
            continue;
        }
        stats.ratio = static_cast<double>(acc) / static_cast<double>(act);
        stats.accept_prob = stats.x * stats.ratio;
        auto [lo, hi] = wilson_interval(acc, act);
        stats.ci_lo = lo;
        stats.ci_hi = hi;
    }
    return profile;
}

}  // namespace crslab
