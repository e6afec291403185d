#include <stdexcept>
#include <algorithm>
#include <cmath>

#include "crslab/geometry.hpp"
#include "crslab/guarantees.hpp"
#include "crslab/oracles.hpp"
#include "crslab/rcrs.hpp"
#include "doctest.h"
#include "support/generators.hpp"

using namespace crslab;

namespace {

double min_defined_ratio(const AcceptanceProfile& profile) {
    double worst = 1.0;
    for (const auto& stats : profile.per_product)
        if (stats.defined) worst = std::min(worst, stats.ratio);
    return worst;
}

}  // namespace

TEST_CASE("attenuation function endpoints and monotonicity") {
    for (int L = 2; L <= 10; ++L) {
        CHECK(attenuation_b(L, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        double previous = attenuation_b(L, 0.0);
        for (int step = 1; step <= 1000; ++step) {
            const double value = attenuation_b(L, step / 1000.0);
            CHECK(value < previous);
            CHECK(value > 0.0);
            previous = value;
        }
    }
    // direct evaluation of the closed form at L=2, x=1
    const double direct = (2.0 - 1.0) * (1.0 - std::exp(-2.0)) / (2.0 * (1.0 - std::exp(-1.0)));
    CHECK(attenuation_b(2, 1.0) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(direct == doctest::Approx(0.68394).epsilon(1e-4));
    CHECK_THROWS_AS(attenuation_b(1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(attenuation_b(2, 1.5), std::invalid_argument);
}

TEST_CASE("incident-mass table matches the construction that defeats naive attenuation") {
    const Instance instance = testgen::first_try_instance(2, 0.02, 10);
    const InstanceIndex ix(instance);
    const AttenuationContext ctx(ix);
    const int j0 = ix.product_index.at("j0");
    for (int t = 1; t <= 2; ++t) {
        CHECK(ctx.xtj[t][j0] == doctest::Approx(0.98).epsilon(1e-12));
        for (int j : ix.batch_products[t]) {
            CHECK(ctx.xtj[t][j] == doctest::Approx(0.98).epsilon(1e-12));  // whole batch collides
            CHECK(ctx.xtj[0][j] == doctest::Approx(0.02).epsilon(1e-12));
        }
    }
    CHECK(ctx.xtj[0][j0] == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("greedy accepts every active product when nothing conflicts") {
    Instance instance;
    instance.L = 2;
    for (int k = 0; k < 4; ++k) {
        instance.items.push_back({"a" + std::to_string(k), 1});
        instance.items.push_back({"b" + std::to_string(k), 1});
        Product product;
        product.id = "p" + std::to_string(k);
        product.items = {"a" + std::to_string(k), "b" + std::to_string(k)};
        product.active_prob = 0.8;
        product.batch = k;
        instance.batches.push_back({product.id});
        instance.products.push_back(std::move(product));
    }
    const InstanceIndex ix(instance);
    for (int path = 0; path < 200; ++path) {
        Rng rng(derive_seed(2, "greedy", path));
        const Realization realization = draw_realization(ix, rng);
        const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
        const std::vector<int> accepted = run_greedy_rcrs(ix, realization, arrival);
        size_t actives = 0;
        for (int j : realization.active)
            if (j >= 0) ++actives;
        CHECK(accepted.size() == actives);
    }
}

TEST_CASE("all random-order schemes emit feasible sets") {
    const Instance instance = random_instance(3, 9, 4, 3, true, 31);
    const InstanceIndex ix(instance);
    const AttenuationContext ctx(ix);
    for (int path = 0; path < 1000; ++path) {
        Rng rng(derive_seed(8, "rcrs_safety", path));
        const Realization realization = draw_realization(ix, rng);
        const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
        for (const auto& accepted : {run_attenuate_greedy(ix, ctx, realization, arrival, rng),
                                     run_greedy_rcrs(ix, realization, arrival)}) {
            std::vector<int> used(ix.num_items, 0);
            for (int j : accepted)
                for (int i : ix.items_of[j]) CHECK(++used[i] <= 1);
        }
    }
}

TEST_CASE("closed-form guarantee values") {
    // L=2 equals the explicit exponential expression
    const double e = std::exp(1.0);
    const double closed2 = (3.0 - 6.0 * std::sqrt(e) + e + 8.0 * std::pow(e, 1.5) + 21.0 * e * e +
                            14.0 * std::pow(e, 2.5) + 7.0 * e * e * e) /
                           (16.0 * e * std::pow(1.0 + std::sqrt(e) + e, 2.0));
    CHECK(rcrs_random_element_guarantee(2) == doctest::Approx(closed2).epsilon(1e-9));
    CHECK(rcrs_random_element_guarantee(2) == doctest::Approx(0.397).epsilon(2e-3));

    // L>=3: the worst case sits at full own-batch mass, where the bound is
    // b(1) * int (1 - y b(1/L))^{L-1} dy with a closed antiderivative
    for (int L = 3; L <= 6; ++L) {
        const double b1 = attenuation_b(L, 1.0);
        const double binner = attenuation_b(L, 1.0 / L);
        const double integral = (1.0 - std::pow(1.0 - binner, L)) / (L * binner);
        CHECK(rcrs_random_element_guarantee(L) == doctest::Approx(b1 * integral).epsilon(1e-9));
    }
    for (int L = 2; L <= 10; ++L) CHECK(rcrs_random_element_guarantee(L) > 1.0 / (1.0 + L));
    CHECK_THROWS_AS(rcrs_random_element_guarantee(1), std::invalid_argument);
}

TEST_CASE("attenuate-greedy clears its guarantee on the hard instances (smoke)") {
    const Instance instance = tightness_instance(2, 0.1);
    const InstanceIndex probe(instance);
    const AttenuationContext ctx(probe);
    const AcceptanceProfile profile = estimate_selectability(
        instance,
        [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
            const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
            return run_attenuate_greedy(ix, ctx, realization, arrival, rng);
        },
        100000, 14, 2);
    CHECK(min_defined_ratio(profile) >= rcrs_random_element_guarantee(2) - 0.015);
}

TEST_CASE("attenuation dominates plain greed where batch collisions pile up") {
    const Instance instance = testgen::first_try_instance(2, 0.02, 10);
    const InstanceIndex probe(instance);
    const AttenuationContext ctx(probe);
    const AcceptanceProfile attenuated = estimate_selectability(
        instance,
        [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
            const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
            return run_attenuate_greedy(ix, ctx, realization, arrival, rng);
        },
        100000, 15, 2);
    const AcceptanceProfile greedy = estimate_selectability(
        instance,
        [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
            const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
            return run_greedy_rcrs(ix, realization, arrival);
        },
        100000, 15, 2);
    CHECK(min_defined_ratio(attenuated) > min_defined_ratio(greedy) + 0.05);
}

TEST_CASE("greedy sits at 1/(1+L) in the near-Poisson regime") {
    const Instance instance = testgen::first_try_instance(2, 0.01, 40);
    const AcceptanceProfile profile = estimate_selectability(
        instance,
        [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
            const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
            return run_greedy_rcrs(ix, realization, arrival);
        },
        60000, 16, 2);
    CHECK(min_defined_ratio(profile) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("selection function solves the acceptance-rate equation") {
    for (int L = 2; L <= 10; ++L) {
        const SelectionFunction c = solve_selection_function(L, 1500);
        CAPTURE(L);
        CHECK(c.c_values.front() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.max_residual <= 1e-6);
        CHECK(c.c_at_one() > 0.0);
        for (size_t g = 1; g < c.c_values.size(); ++g) CHECK(c.c_values[g] < c.c_values[g - 1]);
        CHECK(c.integral() > -std::expm1(-L) / L);
        if (L >= 5) CHECK(c.integral() > (1.0 - std::pow(1.0 + L, -(1.0 + L))) / L);
    }
    CHECK(solve_selection_function(2, 4000).integral() >= 0.441);
    CHECK(solve_selection_function(3, 4000).integral() >= 0.321);
    CHECK_THROWS_AS(solve_selection_function(2, 500), std::invalid_argument);
    CHECK_THROWS_AS(solve_selection_function(1, 4000), std::invalid_argument);
}

TEST_CASE("selection function interpolation is monotone in y") {
    const SelectionFunction c = solve_selection_function(2, 2000);
    CHECK(c.c_at(0.0) == doctest::Approx(1.0));
    CHECK(c.c_at(1.0) == doctest::Approx(c.c_at_one()));
    CHECK(c.c_at(0.25) > c.c_at(0.5));
}

TEST_CASE("batch mass bound from the scheme analysis") {
    // sum over the batch products incident to an external j0 of b(x_{t,j}) x_j
    // never beats x_{t,j0} b(x_{t,j0}/L); built from real batch structures
    Rng rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        const int L = 2 + static_cast<int>(rng.next_below(4));
        Instance instance;
        instance.L = L;
        for (int i = 0; i < L; ++i) instance.items.push_back({"t" + std::to_string(i), 1});
        Product head;
        head.id = "j0";
        head.batch = 0;
        head.active_prob = 0.01;
        for (int i = 0; i < L; ++i) head.items.push_back("t" + std::to_string(i));
        instance.batches.push_back({"j0"});
        instance.products.push_back(head);

        // the dangerous batch: each product grabs one of j0's items, groups
        // share that item, pads are fresh
        instance.batches.emplace_back();
        const int groups = 1 + static_cast<int>(rng.next_below(L));
        std::vector<double> weights;
        double total = 0.0;
        int pads = 0;
        std::vector<Product> drafts;
        for (int g = 0; g < groups; ++g) {
            const int members = 1 + static_cast<int>(rng.next_below(3));
            for (int m = 0; m < members; ++m) {
                Product product;
                product.id = "b" + std::to_string(g) + "_" + std::to_string(m);
                product.batch = 1;
                product.items.push_back("t" + std::to_string(g));
                const int extra = static_cast<int>(rng.next_below(L));
                for (int s = 0; s < extra; ++s) {
                    const std::string pad = "pad" + std::to_string(pads++);
                    instance.items.push_back({pad, 1});
                    product.items.push_back(pad);
                }
                weights.push_back(0.05 + rng.next_double());
                total += weights.back();
                drafts.push_back(std::move(product));
            }
        }
        const double scale = std::min(1.0, (1.0 - head.active_prob) / total) * (0.4 + 0.6 * rng.next_double());
        for (size_t k = 0; k < drafts.size(); ++k) {
            drafts[k].active_prob = weights[k] * scale;
            instance.batches[1].push_back(drafts[k].id);
            instance.products.push_back(drafts[k]);
        }
        REQUIRE(validate(instance).ok);

        const InstanceIndex ix(instance);
        const AttenuationContext ctx(ix);
        const int j0 = ix.product_index.at("j0");
        double lhs = 0.0;
        for (int j : ix.batch_products[1]) lhs += attenuation_b(L, ctx.xtj[1][j]) * ix.x[j];
        const double mass = ctx.xtj[1][j0];
        const double rhs = mass * attenuation_b(L, mass / L);
        CAPTURE(trial);
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("recursive scheme accepts a lone product at rate integral-of-c") {
    Instance instance;
    instance.L = 2;
    instance.items = {{"a", 1}, {"b", 1}};
    instance.products = {{"p", {"a", "b"}, 1.0, 0.6, 0}};
    instance.batches = {{"p"}};
    const SelectionFunction c = solve_selection_function(2, 1500);
    const int K = recommended_phase_count(c);
    const AcceptanceProfile profile = run_recursive_standard_rcrs(instance, c, K, 200, 50000, 23, 2);
    REQUIRE(profile.per_product[0].defined);
    CHECK(profile.per_product[0].ratio == doctest::Approx(c.integral()).epsilon(0.02));
}

TEST_CASE("recursive scheme enforces its preconditions") {
    const SelectionFunction c = solve_selection_function(2, 1500);
    Instance batched = tightness_instance(2, 0.1);  // batches of two products
    CHECK_THROWS_WITH_AS(run_recursive_standard_rcrs(batched, c, 60, 10, 10, 1),
                         doctest::Contains("standard inputs"), std::invalid_argument);

    Instance standard;
    standard.L = 2;
    standard.items = {{"a", 1}, {"b", 1}};
    standard.products = {{"p", {"a", "b"}, 1.0, 0.6, 0}};
    standard.batches = {{"p"}};
    CHECK_THROWS_WITH_AS(run_recursive_standard_rcrs(standard, c, 3, 10, 10, 1),
                         doctest::Contains("threshold"), std::invalid_argument);
}

TEST_CASE("recursive scheme never activates a zero-mass product") {
    Instance instance;
    instance.L = 2;
    instance.items = {{"a", 1}, {"b", 1}};
    instance.products = {{"ghost", {"a"}, 1.0, 0.0, 0}, {"live", {"a", "b"}, 1.0, 0.5, 1}};
    instance.batches = {{"ghost"}, {"live"}};
    const SelectionFunction c = solve_selection_function(2, 1500);
    const AcceptanceProfile profile =
        run_recursive_standard_rcrs(instance, c, recommended_phase_count(c), 100, 5000, 77, 2);
    CHECK_FALSE(profile.per_product[0].defined);  // no arrivals at all
    CHECK(profile.per_product[1].defined);
}

TEST_CASE("recursive scheme clears the discretized guarantee (smoke)") {
    const Instance instance = random_instance(2, 6, 5, 1, true, 77);
    const SelectionFunction c = solve_selection_function(2, 1500);
    const int K = recommended_phase_count(c);
    const AcceptanceProfile profile = run_recursive_standard_rcrs(instance, c, K, 2000, 40000, 29, 4);
    const double floor = (1.0 - 2.0 / (K * c.c_at_one())) * c.integral();
    CHECK(min_defined_ratio(profile) >= floor - 0.03);
}

TEST_CASE("arrival orders are permutations with distinct times") {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const ArrivalOrder arrival = draw_arrival_order(6, rng);
        std::vector<int> sorted = arrival.order;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
        for (int t = 0; t + 1 < 6; ++t)
            CHECK(arrival.times[arrival.order[t]] < arrival.times[arrival.order[t + 1]]);
    }
}
