#include "support/generators.hpp"

#include <stdexcept>

#include "crslab/rng.hpp"

namespace crslab::testgen {

std::vector<std::string> clubsuit_target(int L) {
    std::vector<std::string> target;
    for (int i = 0; i < L; ++i) target.push_back("g" + std::to_string(i));
    return target;
}

namespace {

// capacity-aware extra assignment: reuse pool items while their load allows,
// otherwise mint a fresh one
struct ExtraPool {
    std::vector<std::string> ids;
    std::vector<double> load;
    int fresh = 0;

    std::string acquire(double x, const std::vector<std::string>& taken, Rng& rng) {
        const size_t tries = ids.size();
        for (size_t attempt = 0; attempt < tries; ++attempt) {
            const size_t k = rng.next_below(ids.size());
            if (load[k] + x > 1.0 - 1e-9) continue;
            bool used = false;
            for (const auto& id : taken)
                if (id == ids[k]) used = true;
            if (used) continue;
            load[k] += x;
            return ids[k];
        }
        const std::string id = "fresh" + std::to_string(fresh++);
        ids.push_back(id);
        load.push_back(x);
        return id;
    }
};

}  // namespace

Instance clubsuit_standard_instance(int L, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "clubsuit_standard"));
    Instance instance;
    instance.L = L;
    const auto target = clubsuit_target(L);
    ExtraPool pool;
    for (int e = 0; e < L + 2; ++e) {
        pool.ids.push_back("e" + std::to_string(e));
        pool.load.push_back(0.0);
    }

    int next = 0;
    for (int i = 0; i < L; ++i) {
        const int count = 2 + static_cast<int>(rng.next_below(3));
        std::vector<double> weights;
        double sum = 0.0;
        for (int k = 0; k < count; ++k) {
            weights.push_back(0.2 + 0.8 * rng.next_double());
            sum += weights.back();
        }
        for (int k = 0; k < count; ++k) {
            Product product;
            product.id = "p" + std::to_string(next);
            product.batch = next++;
            product.active_prob = weights[k] / sum;  // target loads end exactly at 1
            product.reward = rng.next_double();
            product.items.push_back(target[i]);
            const int extras = static_cast<int>(rng.next_below(L));
            for (int s = 0; s < extras; ++s)
                product.items.push_back(pool.acquire(product.active_prob, product.items, rng));
            instance.batches.push_back({product.id});
            instance.products.push_back(std::move(product));
        }
    }
    for (const auto& id : target) instance.items.push_back({id, 1});
    for (const auto& id : pool.ids) instance.items.push_back({id, 1});
    return instance;
}

Instance clubsuit_partite_instance(int L, std::uint64_t seed,
                                   std::vector<std::vector<std::string>>* partition) {
    Rng rng(derive_seed(seed, "clubsuit_partite"));
    Instance instance;
    instance.L = L;

    // group l: target "g<l>" plus a pool of spare members; fresh spares are
    // minted per group when capacity runs out
    std::vector<std::vector<std::string>> groups(L);
    std::vector<std::vector<double>> spare_load(L);
    for (int l = 0; l < L; ++l) {
        groups[l].push_back("g" + std::to_string(l));
        for (int m = 0; m < 3; ++m) {
            groups[l].push_back("m" + std::to_string(l) + "_" + std::to_string(m));
            spare_load[l].push_back(0.0);
        }
    }

    struct Draft {
        int target_group = -1;  // -1: touches no target item
        double x = 0.0;
    };
    std::vector<Draft> drafts;
    const int per_target = 2 + static_cast<int>(rng.next_below(2));
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < per_target; ++k) drafts.push_back({l, 0.2 + 0.8 * rng.next_double()});
    const int loose = static_cast<int>(rng.next_below(3));
    for (int k = 0; k < loose; ++k) drafts.push_back({-1, 0.3 * rng.next_double()});

    // normalize so each target item's load is exactly 1
    std::vector<double> target_sum(L, 0.0);
    for (const auto& draft : drafts)
        if (draft.target_group >= 0) target_sum[draft.target_group] += draft.x;
    for (auto& draft : drafts)
        if (draft.target_group >= 0) draft.x /= target_sum[draft.target_group];

    // interleave the targets so first-fit packing mixes them across batches
    for (size_t k = drafts.size(); k > 1; --k)
        std::swap(drafts[k - 1], drafts[rng.next_below(k)]);

    for (int n = 0; n < static_cast<int>(drafts.size()); ++n) {
        Product product;
        product.id = "p" + std::to_string(n);
        product.reward = rng.next_double();
        product.active_prob = drafts[n].x;
        for (int l = 0; l < L; ++l) {
            if (l == drafts[n].target_group) {
                product.items.push_back(groups[l][0]);
                continue;
            }
            // non-target member with room, fresh spare otherwise
            bool placed = false;
            const size_t spares = spare_load[l].size();
            for (size_t attempt = 0; attempt < spares && !placed; ++attempt) {
                const size_t m = rng.next_below(spare_load[l].size());
                if (spare_load[l][m] + drafts[n].x <= 1.0 - 1e-9) {
                    spare_load[l][m] += drafts[n].x;
                    product.items.push_back(groups[l][m + 1]);
                    placed = true;
                }
            }
            if (!placed) {
                const std::string id =
                    "m" + std::to_string(l) + "_" + std::to_string(groups[l].size() - 1);
                groups[l].push_back(id);
                spare_load[l].push_back(drafts[n].x);
                product.items.push_back(id);
            }
        }
        instance.products.push_back(std::move(product));
    }

    // first-fit packing into batches of fractional mass <= 1
    std::vector<double> batch_mass;
    for (auto& product : instance.products) {
        int slot = -1;
        for (size_t b = 0; b < batch_mass.size(); ++b)
            if (batch_mass[b] + product.active_prob <= 1.0 + 1e-12) {
                slot = static_cast<int>(b);
                break;
            }
        if (slot < 0) {
            slot = static_cast<int>(batch_mass.size());
            batch_mass.push_back(0.0);
            instance.batches.emplace_back();
        }
        batch_mass[slot] += product.active_prob;
        product.batch = slot;
        instance.batches[slot].push_back(product.id);
    }

    for (int l = 0; l < L; ++l)
        for (const auto& id : groups[l]) instance.items.push_back({id, 1});
    if (partition) *partition = groups;
    return instance;
}

Instance clubsuit_partite_instance(int L, std::uint64_t seed) {
    return clubsuit_partite_instance(L, seed, nullptr);
}

Instance first_try_instance(int L, double x0, int per_batch) {
    if (L < 2 || per_batch < 1 || !(x0 > 0.0 && x0 < 1.0))
        throw std::invalid_argument("first_try_instance: bad parameters");
    Instance instance;
    instance.L = L;
    for (int i = 0; i < L; ++i) instance.items.push_back({"c" + std::to_string(i), 1});

    Product head;
    head.id = "j0";
    head.batch = 0;
    head.active_prob = x0;
    head.reward = 1.0;
    for (int i = 0; i < L; ++i) head.items.push_back("c" + std::to_string(i));
    instance.batches.push_back({head.id});
    instance.products.push_back(std::move(head));

    const double x = (1.0 - x0) / per_batch;
    for (int t = 0; t < L; ++t) {
        instance.batches.emplace_back();
        for (int k = 0; k < per_batch; ++k) {
            Product product;
            product.id = "b" + std::to_string(t) + "_" + std::to_string(k);
            product.batch = t + 1;
            product.active_prob = x;
            product.reward = 1.0;
            product.items.push_back("c" + std::to_string(t));
            for (int pad = 0; pad < L - 1; ++pad) {
                const std::string id =
                    "pad" + std::to_string(t) + "_" + std::to_string(k) + "_" + std::to_string(pad);
                instance.items.push_back({id, 1});
                product.items.push_back(id);
            }
            instance.batches.back().push_back(product.id);
            instance.products.push_back(std::move(product));
        }
    }
    return instance;
}

SubstitutableSystem nrm_from_instance(const Instance& instance) {
    std::vector<SysProduct> products;
    for (const auto& p : instance.products) products.push_back({p.id, p.items, p.reward});
    std::vector<std::vector<double>> lambda(instance.batches.size(),
                                            std::vector<double>(products.size(), 0.0));
    for (size_t j = 0; j < instance.products.size(); ++j)
        lambda[instance.products[j].batch][j] = instance.products[j].active_prob;
    return nrm_accept_reject(lambda, products, instance.items);
}

SubstitutableSystem random_nrm_system(std::uint64_t seed, int max_inventory) {
    Rng rng(derive_seed(seed, "nrm_gen"));
    const int num_items = 3 + static_cast<int>(rng.next_below(4));
    const int num_products = 2 + static_cast<int>(rng.next_below(4));
    const int periods = 2 + static_cast<int>(rng.next_below(3));
    std::vector<Item> items;
    for (int i = 0; i < num_items; ++i)
        items.push_back({"i" + std::to_string(i), 1 + static_cast<int>(rng.next_below(max_inventory))});
    std::vector<SysProduct> products;
    for (int j = 0; j < num_products; ++j) {
        SysProduct product;
        product.id = "p" + std::to_string(j);
        const int bundle = 1 + static_cast<int>(rng.next_below(2));
        while (static_cast<int>(product.items.size()) < bundle) {
            const std::string candidate = items[rng.next_below(num_items)].id;
            bool seen = false;
            for (const auto& existing : product.items) seen |= existing == candidate;
            if (!seen) product.items.push_back(candidate);
        }
        product.reward = rng.next_double() * 3.0;
        products.push_back(std::move(product));
    }
    std::vector<std::vector<double>> lambda(periods, std::vector<double>(num_products, 0.0));
    for (int t = 0; t < periods; ++t) {
        double budget = 0.9;
        for (int j = 0; j < num_products; ++j) {
            if (rng.next_below(2) == 0) continue;
            const double mass = std::min(budget, 0.05 + 0.4 * rng.next_double());
            lambda[t][j] = mass;
            budget -= mass;
            if (budget <= 0.05) break;
        }
    }
    return nrm_accept_reject(lambda, products, items);
}

}  // namespace crslab::testgen
