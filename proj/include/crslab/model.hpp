#ifndef CRSLAB_MODEL_HPP
#define CRSLAB_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace crslab {

// A resource with an integer starting inventory (one unit after preprocessing).
struct Item {
    std::string id;
    int inventory = 1;
};

// A sellable bundle of up to L items. active_prob is the fractional value x_j
// (lambda_j for raw accept-reject inputs); batch is the index of the period it
// belongs to.
struct Product {
    std::string id;
    std::vector<std::string> items;
    double reward = 0.0;
    double active_prob = 0.0;
    int batch = 0;
};

// Batched instance with L-bounded products. Immutable by convention: all
// operations take it by const reference and never mutate it.
struct Instance {
    int L = 1;
    std::vector<Item> items;
    std::vector<Product> products;
    std::vector<std::vector<std::string>> batches;
};

struct Violation {
    std::string constraint;
    std::string offender;
    double magnitude = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
};

// Checks every instance invariant to within additive tolerance tol.
// Violations are data, not failures: nothing throws.
ValidationReport validate(const Instance& instance, double tol = 1e-9);

// Textual (JSON) instance document. parse errors and schema violations throw
// std::runtime_error naming the offending locus/field.
Instance parse_instance(const std::string& text);
Instance load_instance(std::istream& in);
std::string save_instance(const Instance& instance);

// Deterministic generator for test workloads. With tight=true every item
// touched by some product ends with load exactly 1 (rescale, then pad the
// slack with singleton products in fresh trailing batches).
Instance random_instance(int L, int num_items, int num_batches, int max_batch_size, bool tight,
                         std::uint64_t seed);

// True iff every product takes at most one item from every group. The groups
// must form a partition of the instance's items into exactly L parts.
bool is_l_partite(const Instance& instance, const std::vector<std::vector<std::string>>& partition);

// Integer-indexed view of a valid Instance, shared by all schemes and oracles.
// Construction throws std::invalid_argument on dangling references or on a
// batch structure that does not partition the product set.
struct InstanceIndex {
    const Instance* src = nullptr;
    int T = 0;
    int L = 1;
    int num_items = 0;
    int num_products = 0;
    std::unordered_map<std::string, int> item_index;
    std::unordered_map<std::string, int> product_index;
    std::vector<std::vector<int>> batch_products;  // per batch: product ids
    std::vector<std::vector<int>> items_of;        // per product: item ids
    std::vector<std::vector<int>> products_on;     // per item: incident products
    std::vector<double> x;                         // active_prob per product
    std::vector<double> reward;
    std::vector<int> batch_of;      // per product
    std::vector<int> inventory;     // per item
    std::vector<double> batch_sum;  // sum of x per batch
    std::vector<double> item_load;  // sum of x over incident products

    explicit InstanceIndex(const Instance& instance);

    bool unit_inventories() const;
};

}  // namespace crslab

#endif
