#include "crslab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "crslab/parallel.hpp"
#include "json.hpp"

namespace crslab {

namespace {

constexpr double kEps = 1e-12;

std::unordered_map<std::string, int> index_items(const SubstitutableSystem& system) {
    std::unordered_map<std::string, int> index;
    for (int i = 0; i < static_cast<int>(system.items.size()); ++i)
        if (!index.emplace(system.items[i].id, i).second)
            throw std::invalid_argument("system: duplicate item id \"" + system.items[i].id + "\"");
    return index;
}

}  // namespace

void check_system(const SubstitutableSystem& system) {
    const auto item_index = index_items(system);
    for (const auto& item : system.items)
        if (item.inventory < 1)
            throw std::invalid_argument("system: inventory must be >= 1 for item \"" + item.id + "\"");
    std::unordered_map<std::string, int> product_index;
    for (int j = 0; j < system.num_products(); ++j) {
        const auto& product = system.products[j];
        if (!product_index.emplace(product.id, j).second)
            throw std::invalid_argument("system: duplicate product id \"" + product.id + "\"");
        if (product.items.empty())
            throw std::invalid_argument("system: product \"" + product.id + "\" has an empty bundle");
        for (const auto& iid : product.items)
            if (!item_index.count(iid))
                throw std::invalid_argument("system: product \"" + product.id +
                                            "\" references unknown item \"" + iid + "\"");
        if (product.reward < 0.0)
            throw std::invalid_argument("system: negative reward on product \"" + product.id + "\"");
    }
    for (int t = 0; t < system.periods(); ++t) {
        bool has_null = false;
        for (const auto& action : system.period_actions[t]) {
            if (static_cast<int>(action.phi.size()) != system.num_products())
                throw std::invalid_argument("system: phi row size mismatch on action \"" + action.id + "\"");
            double sum = 0.0;
            for (double p : action.phi) {
                if (p < -kEps || p > 1.0 + kEps)
                    throw std::invalid_argument("system: phi out of [0,1] on action \"" + action.id + "\"");
                sum += p;
            }
            if (sum > 1.0 + 1e-9)
                throw std::invalid_argument("system: phi row sums to " + std::to_string(sum) +
                                            " > 1 on action \"" + action.id + "\"");
            if (sum <= kEps) has_null = true;
        }
        if (!has_null)
            throw std::invalid_argument("system: period " + std::to_string(t) + " lacks a null action");
    }
}

int generic_recourse_scan(const SubstitutableSystem& system, int t, int action,
                          const std::vector<char>& forbidden) {
    const auto& actions = system.period_actions[t];
    const auto& base = actions[action].phi;
    for (int a = 0; a < static_cast<int>(actions.size()); ++a) {
        const auto& phi = actions[a].phi;
        bool ok = true;
        for (int j = 0; j < system.num_products() && ok; ++j) {
            if (forbidden[j])
                ok = phi[j] <= kEps;
            else
                ok = phi[j] >= base[j] - kEps;
        }
        if (ok) return a;
    }
    throw std::runtime_error("recourse scan: no conforming action in period " + std::to_string(t) +
                             " for action \"" + actions[action].id + "\"");
}

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end())
        throw std::runtime_error(std::string("system schema error: missing field \"") + name + "\"");
    return *it;
}

}  // namespace

SubstitutableSystem parse_system(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("parse error: ") + e.what());
    }
    SubstitutableSystem system;
    const int periods = field(doc, "periods").get<int>();
    for (const auto& it : field(doc, "inventories"))
        system.items.push_back({field(it, "id").get<std::string>(), field(it, "inventory").get<int>()});
    std::unordered_map<std::string, int> product_index;
    for (const auto& pj : field(doc, "products")) {
        SysProduct product;
        product.id = field(pj, "id").get<std::string>();
        for (const auto& iid : field(pj, "items")) product.items.push_back(iid.get<std::string>());
        product.reward = field(pj, "reward").get<double>();
        product_index.emplace(product.id, static_cast<int>(system.products.size()));
        system.products.push_back(std::move(product));
    }
    const json& actions = field(doc, "actions");
    if (static_cast<int>(actions.size()) != periods)
        throw std::runtime_error("system schema error: \"actions\" must list one array per period");
    for (const auto& period : actions) {
        std::vector<SysAction> list;
        for (const auto& aj : period) {
            SysAction action;
            action.id = field(aj, "id").get<std::string>();
            action.phi.assign(system.products.size(), 0.0);
            for (const auto& [pid, prob] : field(aj, "phi").items()) {
                auto it = product_index.find(pid);
                if (it == product_index.end())
                    throw std::runtime_error("system schema error: phi references unknown product \"" +
                                             pid + "\"");
                action.phi[it->second] = prob.get<double>();
            }
            list.push_back(std::move(action));
        }
        system.period_actions.push_back(std::move(list));
    }
    system.recourse_oracle = generic_recourse_scan;
    check_system(system);
    return system;
}

SubstitutableSystem load_system(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_system(buffer.str());
}

std::string save_system(const SubstitutableSystem& system) {
    json doc;
    doc["periods"] = system.periods();
    doc["inventories"] = json::array();
    for (const auto& item : system.items)
        doc["inventories"].push_back({{"id", item.id}, {"inventory", item.inventory}});
    doc["products"] = json::array();
    for (const auto& product : system.products)
        doc["products"].push_back(
            {{"id", product.id}, {"items", product.items}, {"reward", product.reward}});
    doc["actions"] = json::array();
    for (const auto& period : system.period_actions) {
        json list = json::array();
        for (const auto& action : period) {
            json phi = json::object();
            for (int j = 0; j < static_cast<int>(action.phi.size()); ++j)
                if (action.phi[j] != 0.0) phi[system.products[j].id] = action.phi[j];
            list.push_back({{"id", action.id}, {"phi", phi}});
        }
        doc["actions"].push_back(std::move(list));
    }
    return doc.dump(2) + "\n";
}

RecourseMixture scale_down_targets(const SubstitutableSystem& system, int t, int action,
                                   const std::vector<double>& targets) {
    const auto& actions = system.period_actions[t];
    const int n = system.num_products();
    if (static_cast<int>(targets.size()) != n)
        throw std::invalid_argument("scale_down: targets size mismatch");
    const auto& base = actions[action].phi;
    for (int j = 0; j < n; ++j)
        if (targets[j] < -kEps || targets[j] > base[j] + kEps)
            throw std::invalid_argument("scale_down: target out of [0, phi] for product \"" +
                                        system.products[j].id + "\"");
    if (!system.recourse_oracle) throw std::invalid_argument("scale_down: system has no recourse oracle");

    std::vector<char> closed(n, 0);
    std::vector<double> remaining = targets;
    for (int j = 0; j < n; ++j)
        if (targets[j] <= kEps) closed[j] = 1;

    RecourseMixture mixture;
    int current = action;
    double weight_left = 1.0;
    for (int guard = 0; guard <= n; ++guard) {
        bool open = false;
        for (int j = 0; j < n; ++j)
            if (!closed[j]) open = true;
        if (!open) break;
        if (guard == n) throw std::logic_error("scale_down: breakpoint loop failed to terminate");

        const int next = system.recourse_oracle(system, t, current, closed);
        const auto& phi = actions[next].phi;
        for (int j = 0; j < n; ++j) {
            if (closed[j]) {
                if (phi[j] > kEps)
                    throw std::runtime_error("scale_down: oracle action \"" + actions[next].id +
                                             "\" sells forbidden product \"" + system.products[j].id + "\"");
            } else if (phi[j] + kEps < actions[current].phi[j]) {
                throw std::runtime_error("scale_down: oracle action \"" + actions[next].id +
                                         "\" sells less of product \"" + system.products[j].id + "\"");
            }
        }

        // gamma = min remaining/phi over open products; the greatest violator
        // (argmin) is closed, ties broken by lowest product index
        double gamma = std::numeric_limits<double>::infinity();
        int argmin = -1;
        for (int j = 0; j < n; ++j) {
            if (closed[j]) continue;
            double ratio;
            if (remaining[j] <= kEps)
                ratio = 0.0;
            else if (phi[j] <= kEps)
                throw std::runtime_error("scale_down: oracle action \"" + actions[next].id +
                                         "\" cannot reach the remaining mass of product \"" +
                                         system.products[j].id + "\"");
            else
                ratio = remaining[j] / phi[j];
            if (ratio < gamma - kEps) {
                gamma = ratio;
                argmin = j;
            }
        }
        gamma = std::min(gamma, weight_left);
        if (gamma > kEps) {
            mixture.entries.emplace_back(next, gamma);
            weight_left -= gamma;
            for (int j = 0; j < n; ++j)
                if (!closed[j]) remaining[j] -= gamma * phi[j];
        }
        closed[argmin] = 1;
        remaining[argmin] = 0.0;
        current = next;
    }

    // verify the expectation identity before handing the mixture out
    std::vector<double> expectation(n, 0.0);
    for (const auto& [a, w] : mixture.entries)
        for (int j = 0; j < n; ++j) expectation[j] += w * actions[a].phi[j];
    for (int j = 0; j < n; ++j)
        if (std::fabs(expectation[j] - targets[j]) > 1e-12 * std::max(1.0, std::fabs(targets[j])) + 1e-12)
            throw std::logic_error("scale_down: expectation identity failed for product \"" +
                                   system.products[j].id + "\"");
    if (mixture.total_weight() > 1.0 + 1e-9)
        throw std::logic_error("scale_down: mixture weights exceed 1");
    return mixture;
}

RecourseMixture scale_down(const SubstitutableSystem& system, int t, int action,
                           const std::vector<char>& forbidden) {
    const int n = system.num_products();
    if (static_cast<int>(forbidden.size()) != n)
        throw std::invalid_argument("scale_down: forbidden mask size mismatch");
    std::vector<double> targets(n, 0.0);
    for (int j = 0; j < n; ++j)
        if (!forbidden[j]) targets[j] = system.period_actions[t][action].phi[j];
    return scale_down_targets(system, t, action, targets);
}

LinearProgram build_relaxation_lp(const SubstitutableSystem& system) {
    check_system(system);
    const auto item_index = index_items(system);
    const int T = system.periods();
    int num_vars = 0;
    for (const auto& period : system.period_actions) num_vars += static_cast<int>(period.size());

    LinearProgram lp;
    lp.num_vars = num_vars;
    lp.objective.assign(num_vars, 0.0);
    lp.lower.assign(num_vars, 0.0);
    lp.upper.assign(num_vars, kLpInfinity);

    std::vector<std::vector<double>> item_rows(system.items.size(),
                                               std::vector<double>(num_vars, 0.0));
    int var = 0;
    for (int t = 0; t < T; ++t) {
        std::vector<double> period_row(num_vars, 0.0);
        for (const auto& action : system.period_actions[t]) {
            lp.var_names.push_back("x[" + std::to_string(t) + "," + action.id + "]");
            for (int j = 0; j < system.num_products(); ++j) {
                if (action.phi[j] == 0.0) continue;
                lp.objective[var] += system.products[j].reward * action.phi[j];
                for (const auto& iid : system.products[j].items)
                    item_rows[item_index.at(iid)][var] += action.phi[j];
            }
            period_row[var] = 1.0;
            ++var;
        }
        lp.add_constraint(std::move(period_row), Sense::eq, 1.0);
    }
    for (size_t i = 0; i < system.items.size(); ++i)
        lp.add_constraint(std::move(item_rows[i]), Sense::le,
                          static_cast<double>(system.items[i].inventory));
    return lp;
}

namespace {

// per-period sale mass x_j = sum_S phi_t(j,S) x_t(S)
std::vector<std::vector<double>> period_masses(const SubstitutableSystem& system,
                                               const LpSolution& lp) {
    std::vector<std::vector<double>> mass(system.periods(),
                                          std::vector<double>(system.num_products(), 0.0));
    int var = 0;
    for (int t = 0; t < system.periods(); ++t)
        for (const auto& action : system.period_actions[t]) {
            const double weight = lp.values[var++];
            if (weight > 0.0)
                for (int j = 0; j < system.num_products(); ++j)
                    mass[t][j] += action.phi[j] * weight;
        }
    return mass;
}

}  // namespace

ReductionOutput preprocess(const SubstitutableSystem& system, const LpSolution& lp) {
    check_system(system);
    if (lp.status != LpStatus::optimal)
        throw std::invalid_argument("preprocess: LP solution is not optimal");
    int num_vars = 0;
    for (const auto& period : system.period_actions) num_vars += static_cast<int>(period.size());
    if (static_cast<int>(lp.values.size()) != num_vars)
        throw std::invalid_argument("preprocess: LP solution does not match the system");

    const auto item_index = index_items(system);
    const auto mass = period_masses(system, lp);

    ReductionOutput out;
    int L = 1;
    for (const auto& product : system.products)
        L = std::max(L, static_cast<int>(product.items.size()));
    out.instance.L = L;

    // one unit item per inventory unit
    std::vector<std::vector<std::string>> unit_ids(system.items.size());
    for (size_t i = 0; i < system.items.size(); ++i)
        for (int u = 0; u < system.items[i].inventory; ++u) {
            unit_ids[i].push_back(system.items[i].id + "#" + std::to_string(u + 1));
            out.instance.items.push_back({unit_ids[i].back(), 1});
        }

    std::vector<int> unit_at(system.items.size(), 0);       // current unit per item
    std::vector<double> capacity(system.items.size(), 1.0); // remaining mass of that unit
    out.dummy_counts.assign(system.periods(), 0);

    for (int t = 0; t < system.periods(); ++t) {
        out.instance.batches.emplace_back();
        for (int j = 0; j < system.num_products(); ++j) {
            double left = mass[t][j];
            if (left <= kEps) continue;
            int piece = 0;
            while (left > kEps) {
                double delta = std::numeric_limits<double>::infinity();
                bool exhausted = false;
                for (const auto& iid : system.products[j].items) {
                    const int i = item_index.at(iid);
                    if (unit_at[i] >= system.items[i].inventory) {
                        exhausted = true;
                        break;
                    }
                    delta = std::min(delta, capacity[i]);
                }
                if (exhausted) {
                    if (left <= 1e-6) break;  // tolerate LP feasibility slack
                    throw std::logic_error("preprocess: item capacity exhausted with mass " +
                                           std::to_string(left) + " left on product \"" +
                                           system.products[j].id + "\"");
                }
                const bool split = delta < left - kEps;
                const double alloc = split ? delta : left;

                Product copy;
                copy.id = system.products[j].id + "@" + std::to_string(t) + "#" + std::to_string(++piece);
                for (const auto& iid : system.products[j].items) {
                    const int i = item_index.at(iid);
                    copy.items.push_back(unit_ids[i][unit_at[i]]);
                }
                copy.reward = system.products[j].reward;
                copy.active_prob = alloc;
                copy.batch = t;
                out.instance.batches.back().push_back(copy.id);
                out.instance.products.push_back(copy);
                out.mapping.push_back({copy.id, j, t, alloc});
                if (split) ++out.dummy_counts[t];

                for (const auto& iid : system.products[j].items) {
                    const int i = item_index.at(iid);
                    capacity[i] -= alloc;
                    if (capacity[i] <= kEps) {
                        ++unit_at[i];
                        capacity[i] = 1.0;
                    }
                }
                left -= alloc;
            }
        }
    }
    return out;
}

namespace {

struct PeriodLayout {
    std::vector<int> copies;                 // copy indices of this period
    std::vector<std::vector<int>> groups;    // copies sharing an identical unit set
    std::vector<int> group_of_copy;          // aligned with `copies`
    std::vector<int> support_actions;        // LP-support action indices
    std::vector<double> support_weights;     // x_t(S), renormalized
};

struct OnlineContext {
    const SubstitutableSystem& system;
    const ReductionOutput& reduction;
    const InstanceIndex ix;  // of the reduced instance
    std::vector<PeriodLayout> layout;
    std::vector<std::vector<double>> mass;  // per (t, original product)
    std::vector<int> original_item;         // reduced item -> original item index

    OnlineContext(const SubstitutableSystem& system_, const ReductionOutput& reduction_,
                  const LpSolution& lp)
        : system(system_), reduction(reduction_), ix(reduction_.instance) {
        const auto item_index = index_items(system);
        original_item.resize(ix.num_items);
        for (int u = 0; u < ix.num_items; ++u) {
            const std::string& uid = reduction.instance.items[u].id;
            original_item[u] = item_index.at(uid.substr(0, uid.rfind('#')));
        }
        mass.assign(system.periods(), std::vector<double>(system.num_products(), 0.0));
        for (const auto& copy : reduction.mapping) mass[copy.period][copy.original_product] += copy.x;

        layout.resize(system.periods());
        for (int c = 0; c < static_cast<int>(reduction.mapping.size()); ++c)
            layout[reduction.mapping[c].period].copies.push_back(c);
        for (int t = 0; t < system.periods(); ++t) {
            auto& slot = layout[t];
            std::map<std::vector<int>, int> group_index;
            slot.group_of_copy.resize(slot.copies.size());
            for (size_t k = 0; k < slot.copies.size(); ++k) {
                std::vector<int> key = ix.items_of[slot.copies[k]];
                std::sort(key.begin(), key.end());
                auto [it, inserted] = group_index.emplace(std::move(key), slot.groups.size());
                if (inserted) slot.groups.emplace_back();
                slot.groups[it->second].push_back(slot.copies[k]);
                slot.group_of_copy[k] = it->second;
            }
        }
        int var = 0;
        for (int t = 0; t < system.periods(); ++t) {
            double total = 0.0;
            for (int a = 0; a < static_cast<int>(system.period_actions[t].size()); ++a) {
                const double w = lp.values[var++];
                if (w > 1e-12) {
                    layout[t].support_actions.push_back(a);
                    layout[t].support_weights.push_back(w);
                    total += w;
                }
            }
            for (double& w : layout[t].support_weights) w /= total;
        }
    }
};

}  // namespace

OnlineRunStats online_algorithm(const SubstitutableSystem& system, const ReductionOutput& reduction,
                                const OcrsPolicy& policy, long long paths, std::uint64_t seed,
                                int threads) {
    if (paths < 1) throw std::invalid_argument("online_algorithm: paths must be >= 1");
    if (static_cast<int>(policy.feas_probs.size()) != static_cast<int>(reduction.mapping.size()))
        throw std::invalid_argument("online_algorithm: policy not built on the reduced instance");

    // The LP is re-solved here so the wrapper stays a function of (system,
    // reduction); the simplex is deterministic, so the support matches the
    // one preprocess saw.
    const LpSolution lp = simplex_solve(build_relaxation_lp(system));
    if (lp.status != LpStatus::optimal)
        throw std::invalid_argument("online_algorithm: relaxation not solvable");
    const OnlineContext ctx(system, reduction, lp);
    const int num_copies = static_cast<int>(reduction.mapping.size());

    struct Partial {
        double reward = 0.0;
        std::vector<long long> sales;
    };
    constexpr std::int64_t kBlock = 1024;
    const std::int64_t num_blocks = (paths + kBlock - 1) / kBlock;
    std::vector<Partial> partial(num_blocks);

    parallel_blocks(paths, kBlock, threads, [&](std::int64_t lo, std::int64_t hi, std::int64_t blk) {
        Partial local;
        local.sales.assign(num_copies, 0);
        std::vector<char> unit_free(ctx.ix.num_items);
        std::vector<int> stock(system.items.size());
        std::vector<char> group_bit;
        std::vector<double> targets(system.num_products());
        std::vector<double> admitted(system.num_products());
        // mixtures depend on the bit pattern only; cache per (t, action, pattern)
        std::vector<std::map<std::pair<int, std::uint64_t>, RecourseMixture>> cache(system.periods());

        for (std::int64_t path = lo; path < hi; ++path) {
            Rng rng(derive_seed(seed, "online", static_cast<std::uint64_t>(path)));
            std::fill(unit_free.begin(), unit_free.end(), 1);
            for (size_t i = 0; i < system.items.size(); ++i) stock[i] = system.items[i].inventory;

            for (int t = 0; t < system.periods(); ++t) {
                const PeriodLayout& slot = ctx.layout[t];
                // pre-decide one bit per unit-set group
                group_bit.assign(slot.groups.size(), 0);
                std::uint64_t pattern = 0;
                for (size_t g = 0; g < slot.groups.size(); ++g) {
                    const int lead = slot.groups[g][0];
                    bool feasible = true;
                    for (int u : ctx.ix.items_of[lead])
                        if (!unit_free[u]) {
                            feasible = false;
                            break;
                        }
                    const bool bit = feasible && rng.bernoulli(policy.accept_prob(lead));
                    group_bit[g] = bit;
                    if (bit && g < 64) pattern |= 1ull << g;
                }
                // per-product admitted fraction of this period's mass
                std::fill(targets.begin(), targets.end(), 0.0);
                std::fill(admitted.begin(), admitted.end(), 0.0);
                for (size_t k = 0; k < slot.copies.size(); ++k)
                    if (group_bit[slot.group_of_copy[k]])
                        admitted[reduction.mapping[slot.copies[k]].original_product] +=
                            reduction.mapping[slot.copies[k]].x;

                // sample an LP-support action
                double u = rng.next_double();
                int action = slot.support_actions.back();
                for (size_t s = 0; s < slot.support_actions.size(); ++s) {
                    u -= slot.support_weights[s];
                    if (u < 0.0) {
                        action = slot.support_actions[s];
                        break;
                    }
                }
                const auto& base_phi = system.period_actions[t][action].phi;
                for (int j = 0; j < system.num_products(); ++j)
                    if (ctx.mass[t][j] > kEps && admitted[j] > kEps)
                        targets[j] = base_phi[j] * std::min(1.0, admitted[j] / ctx.mass[t][j]);

                const RecourseMixture* mixture;
                if (slot.groups.size() <= 64) {
                    auto key = std::make_pair(action, pattern);
                    auto it = cache[t].find(key);
                    if (it == cache[t].end())
                        it = cache[t].emplace(key, scale_down_targets(system, t, action, targets)).first;
                    mixture = &it->second;
                } else {
                    static thread_local RecourseMixture scratch;
                    scratch = scale_down_targets(system, t, action, targets);
                    mixture = &scratch;
                }

                // play the mixture: pick a recourse action, then a sale
                double v = rng.next_double();
                int played = -1;
                for (const auto& [a, w] : mixture->entries) {
                    v -= w;
                    if (v < 0.0) {
                        played = a;
                        break;
                    }
                }
                if (played < 0) continue;  // null remainder, nothing sold
                double s = rng.next_double();
                int sold = -1;
                for (int j = 0; j < system.num_products(); ++j) {
                    s -= system.period_actions[t][played].phi[j];
                    if (s < 0.0) {
                        sold = j;
                        break;
                    }
                }
                if (sold < 0) continue;  // no sale this period

                // attribute the sale to an admitted copy proportionally to mass
                double pick = rng.next_double() * admitted[sold];
                int copy = -1;
                for (size_t k = 0; k < slot.copies.size(); ++k) {
                    const int c = slot.copies[k];
                    if (reduction.mapping[c].original_product != sold ||
                        !group_bit[slot.group_of_copy[k]])
                        continue;
                    copy = c;
                    pick -= reduction.mapping[c].x;
                    if (pick < 0.0) break;
                }
                if (copy < 0)
                    throw std::logic_error("online_algorithm: sale with no admitted copy");

                for (int unit : ctx.ix.items_of[copy]) {
                    if (!unit_free[unit])
                        throw std::logic_error("online_algorithm: unit consumed twice");
                    unit_free[unit] = 0;
                    if (--stock[ctx.original_item[unit]] < 0)
                        throw std::logic_error("online_algorithm: inventory underflow");
                }
                local.reward += system.products[sold].reward;
                ++local.sales[copy];
            }
        }
        partial[blk] = std::move(local);
    });

    OnlineRunStats stats;
    stats.paths = paths;
    stats.sale_counts.assign(num_copies, 0);
    double reward = 0.0;
    for (const auto& p : partial) {
        reward += p.reward;
        for (int c = 0; c < num_copies; ++c) stats.sale_counts[c] += p.sales[c];
    }
    stats.mean_reward = reward / static_cast<double>(paths);
    stats.sale_freq.resize(num_copies);
    for (int c = 0; c < num_copies; ++c)
        stats.sale_freq[c] = static_cast<double>(stats.sale_counts[c]) / static_cast<double>(paths);
    return stats;
}

SubstitutableSystem nrm_accept_reject(const std::vector<std::vector<double>>& lambda,
                                      const std::vector<SysProduct>& products,
                                      const std::vector<Item>& items) {
    SubstitutableSystem system;
    system.items = items;
    system.products = products;
    const int n = static_cast<int>(products.size());

    auto subset_maps = std::make_shared<std::vector<std::unordered_map<std::uint64_t, int>>>();

    for (int t = 0; t < static_cast<int>(lambda.size()); ++t) {
        if (static_cast<int>(lambda[t].size()) != n)
            throw std::invalid_argument("nrm_accept_reject: lambda row size mismatch");
        std::vector<int> support;
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
            if (lambda[t][j] > 0.0) {
                support.push_back(j);
                sum += lambda[t][j];
            }
        if (sum > 1.0 + 1e-9)
            throw std::invalid_argument("nrm_accept_reject: period arrival mass exceeds 1");
        if (support.size() > 12)
            throw std::invalid_argument("nrm_accept_reject: period support too large (> 12)");

        std::vector<SysAction> actions;
        std::unordered_map<std::uint64_t, int> by_subset;
        const int count = 1 << support.size();
        for (int m = 0; m < count; ++m) {
            SysAction action;
            action.phi.assign(n, 0.0);
            std::uint64_t key = 0;
            std::string label;
            for (size_t b = 0; b < support.size(); ++b)
                if (m & (1 << b)) {
                    const int j = support[b];
                    action.phi[j] = lambda[t][j];
                    key |= 1ull << j;
                    if (!label.empty()) label += "+";
                    label += products[j].id;
                }
            action.id = "t" + std::to_string(t) + ":" + (label.empty() ? "null" : label);
            by_subset.emplace(key, static_cast<int>(actions.size()));
            actions.push_back(std::move(action));
        }
        subset_maps->push_back(std::move(by_subset));
        system.period_actions.push_back(std::move(actions));
    }

    // canonical recourse S' = S \ F, looked up by support mask
    system.recourse_oracle = [subset_maps, n](const SubstitutableSystem& sys, int t, int action,
                                              const std::vector<char>& forbidden) {
        std::uint64_t key = 0;
        const auto& phi = sys.period_actions[t][action].phi;
        for (int j = 0; j < n; ++j)
            if (phi[j] > 0.0 && !forbidden[j]) key |= 1ull << j;
        return (*subset_maps)[t].at(key);
    };
    check_system(system);
    return system;
}

SubstitutableSystem oca_single_minded(const std::vector<OcaAgent>& agents) {
    SubstitutableSystem system;
    std::unordered_map<std::string, int> item_index;
    for (const auto& agent : agents) {
        if (agent.bundle.empty()) throw std::invalid_argument("oca_single_minded: empty bundle");
        for (const auto& iid : agent.bundle)
            if (item_index.emplace(iid, static_cast<int>(item_index.size())).second)
                system.items.push_back({iid, 1});
    }

    for (int t = 0; t < static_cast<int>(agents.size()); ++t) {
        const auto& agent = agents[t];
        if (agent.values.size() > 16)
            throw std::invalid_argument("oca_single_minded: value support too large (> 16)");
        // merge duplicate values, sort ascending
        std::map<double, double> dist;
        double total = 0.0;
        for (const auto& [value, prob] : agent.values) {
            if (value < 0.0 || prob < 0.0)
                throw std::invalid_argument("oca_single_minded: negative value or probability");
            dist[value] += prob;
            total += prob;
        }
        if (total > 1.0 + 1e-9)
            throw std::invalid_argument("oca_single_minded: value probabilities exceed 1");

        int s = 0;
        for (const auto& value : dist) {
            SysProduct product;
            product.id = "a" + std::to_string(t) + ":v" + std::to_string(s++);
            product.items = agent.bundle;
            product.reward = value.first;
            system.products.push_back(std::move(product));
        }
    }

    // phi rows need the full product count, so actions are built second
    const int n = system.num_products();
    int first = 0;
    for (int t = 0; t < static_cast<int>(agents.size()); ++t) {
        std::map<double, double> dist;
        for (const auto& [value, prob] : agents[t].values) dist[value] += prob;
        std::vector<SysAction> actions;
        SysAction null_action;
        null_action.id = "t" + std::to_string(t) + ":null";
        null_action.phi.assign(n, 0.0);
        actions.push_back(std::move(null_action));
        int s = 0;
        for (const auto& [threshold, _] : dist) {
            SysAction action;
            action.id = "t" + std::to_string(t) + ":v>=" + std::to_string(s++);
            action.phi.assign(n, 0.0);
            int k = first;
            for (const auto& [value, prob] : dist) {
                if (value >= threshold) action.phi[k] = prob;
                ++k;
            }
            actions.push_back(std::move(action));
        }
        system.period_actions.push_back(std::move(actions));
        first += static_cast<int>(dist.size());
    }
    system.recourse_oracle = generic_recourse_scan;
    check_system(system);
    return system;
}

}  // namespace crslab
