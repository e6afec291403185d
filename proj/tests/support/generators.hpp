#ifndef CRSLAB_TEST_GENERATORS_HPP
#define CRSLAB_TEST_GENERATORS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "crslab/model.hpp"
#include "crslab/reduction.hpp"

namespace crslab::testgen {

// Target item ids shared by the disjoint-pair-mass generators: "g0".."g{L-1}".
std::vector<std::string> clubsuit_target(int L);

// Standard input (singleton batches) in which every product contains at most
// one target item and every target item's load is exactly 1.
Instance clubsuit_standard_instance(int L, std::uint64_t seed);

// L-partite input: items in L groups, every product exactly one item per
// group, at most one target item per product, target loads exactly 1, batch
// sums <= 1.
Instance clubsuit_partite_instance(int L, std::uint64_t seed);

// The same construction with the group partition exposed (for structural
// checks and the never-caps sweeps).
Instance clubsuit_partite_instance(int L, std::uint64_t seed,
                                   std::vector<std::vector<std::string>>* partition);

// One tiny batch with x ~ 0 against L batches whose products all intersect
// it: every batch-t product contains core item t plus fresh padding.
Instance first_try_instance(int L, double x0, int per_batch);

// Accept-reject adapter fed straight from a batched instance: one period per
// batch, arrival mass = active_prob.
SubstitutableSystem nrm_from_instance(const Instance& instance);

// Random independent-demand system (substitutable by construction) with
// inventories up to max_inventory.
SubstitutableSystem random_nrm_system(std::uint64_t seed, int max_inventory);

}  // namespace crslab::testgen

#endif
