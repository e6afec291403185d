#include "crslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crslab/rng.hpp"
#include "json.hpp"

namespace crslab {

namespace {

void add_violation(ValidationReport& report, std::string constraint, std::string offender,
                   double magnitude) {
    report.ok = false;
    report.violations.push_back({std::move(constraint), std::move(offender), magnitude});
}

}  // namespace

ValidationReport validate(const Instance& instance, double tol) {
    ValidationReport report;

    if (instance.L < 1) add_violation(report, "L_positive", "L", 1.0 - instance.L);

    std::unordered_map<std::string, int> item_idx;
    for (const auto& item : instance.items) {
        if (!item_idx.emplace(item.id, static_cast<int>(item_idx.size())).second)
            add_violation(report, "duplicate_item_id", item.id, 0.0);
        if (item.inventory < 1)
            add_violation(report, "inventory_positive", item.id, 1.0 - item.inventory);
    }

    std::unordered_map<std::string, int> product_idx;
    for (const auto& product : instance.products) {
        if (!product_idx.emplace(product.id, static_cast<int>(product_idx.size())).second)
            add_violation(report, "duplicate_product_id", product.id, 0.0);
        if (product.items.empty()) add_violation(report, "bundle_nonempty", product.id, 1.0);
        if (static_cast<int>(product.items.size()) > instance.L)
            add_violation(report, "bundle_size", product.id,
                          static_cast<double>(product.items.size()) - instance.L);
        std::set<std::string> seen;
        for (const auto& it : product.items) {
            if (!item_idx.count(it)) add_violation(report, "unknown_item", product.id, 0.0);
            if (!seen.insert(it).second) add_violation(report, "repeated_item", product.id, 0.0);
        }
        if (product.active_prob < -tol || product.active_prob > 1.0 + tol)
            add_violation(report, "active_prob_range", product.id,
                          std::max(-product.active_prob, product.active_prob - 1.0));
        if (product.reward < -tol) add_violation(report, "reward_nonnegative", product.id, -product.reward);
    }

    // batches must partition the product set, with batch fields consistent
    std::unordered_map<std::string, int> assigned;
    for (int t = 0; t < static_cast<int>(instance.batches.size()); ++t) {
        for (const auto& pid : instance.batches[t]) {
            auto it = product_idx.find(pid);
            if (it == product_idx.end()) {
                add_violation(report, "unknown_product_in_batch", pid, 0.0);
                continue;
            }
            if (!assigned.emplace(pid, t).second) {
                add_violation(report, "product_in_multiple_batches", pid, 0.0);
                continue;
            }
            if (instance.products[it->second].batch != t)
                add_violation(report, "batch_field_mismatch", pid,
                              std::abs(instance.products[it->second].batch - t));
        }
    }
    for (const auto& product : instance.products)
        if (!assigned.count(product.id)) add_violation(report, "product_unbatched", product.id, 0.0);

    // per-batch fractional mass
    for (int t = 0; t < static_cast<int>(instance.batches.size()); ++t) {
        double sum = 0.0;
        for (const auto& pid : instance.batches[t]) {
            auto it = product_idx.find(pid);
            if (it != product_idx.end()) sum += instance.products[it->second].active_prob;
        }
        if (sum > 1.0 + tol) add_violation(report, "batch_sum", "batch " + std::to_string(t), sum - 1.0);
    }

    // per-item expected load
    std::vector<double> load(instance.items.size(), 0.0);
    for (const auto& product : instance.products)
        for (const auto& it : product.items) {
            auto found = item_idx.find(it);
            if (found != item_idx.end()) load[found->second] += product.active_prob;
        }
    for (size_t i = 0; i < instance.items.size(); ++i)
        if (load[i] > instance.items[i].inventory + tol)
            add_violation(report, "item_load", instance.items[i].id,
                          load[i] - instance.items[i].inventory);

    return report;
}

namespace {

using nlohmann::json;

const json& require_field(const json& obj, const char* field, const char* where) {
    auto it = obj.find(field);
    if (it == obj.end())
        throw std::runtime_error(std::string("schema error in ") + where + ": missing field \"" +
                                 field + "\"");
    return *it;
}

double number_field(const json& obj, const char* field, const char* where) {
    const json& v = require_field(obj, field, where);
    if (!v.is_number())
        throw std::runtime_error(std::string("schema error in ") + where + ": field \"" + field +
                                 "\" must be a number");
    return v.get<double>();
}

}  // namespace

Instance parse_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("parse error: ") + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("schema error: document must be an object");

    Instance instance;
    const json& l = require_field(doc, "L", "document");
    if (!l.is_number_integer() || l.get<int>() < 1)
        throw std::runtime_error("schema error: \"L\" must be a positive integer");
    instance.L = l.get<int>();

    for (const auto& it : require_field(doc, "items", "document")) {
        Item item;
        item.id = require_field(it, "id", "items").get<std::string>();
        const json& inv = require_field(it, "inventory", "items");
        if (!inv.is_number_integer() || inv.get<int>() < 1)
            throw std::runtime_error("schema error in items: \"inventory\" must be a positive integer (item \"" +
                                     item.id + "\")");
        item.inventory = inv.get<int>();
        instance.items.push_back(std::move(item));
    }

    for (const auto& pj : require_field(doc, "products", "document")) {
        Product product;
        product.id = require_field(pj, "id", "products").get<std::string>();
        for (const auto& iid : require_field(pj, "items", "products"))
            product.items.push_back(iid.get<std::string>());
        product.reward = number_field(pj, "reward", "products");
        product.active_prob = number_field(pj, "active_prob", "products");
        if (product.active_prob < 0.0 || product.active_prob > 1.0)
            throw std::runtime_error("schema error: active_prob out of range for product \"" +
                                     product.id + "\"");
        if (product.reward < 0.0)
            throw std::runtime_error("schema error: reward must be nonnegative for product \"" +
                                     product.id + "\"");
        const json& b = require_field(pj, "batch", "products");
        if (!b.is_number_integer() || b.get<int>() < 0)
            throw std::runtime_error("schema error: \"batch\" must be a nonnegative integer (product \"" +
                                     product.id + "\")");
        product.batch = b.get<int>();
        instance.products.push_back(std::move(product));
    }

    for (const auto& bj : require_field(doc, "batches", "document")) {
        std::vector<std::string> batch;
        for (const auto& pid : bj) batch.push_back(pid.get<std::string>());
        instance.batches.push_back(std::move(batch));
    }
    return instance;
}

Instance load_instance(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

std::string save_instance(const Instance& instance) {
    json doc;
    doc["L"] = instance.L;
    doc["items"] = json::array();
    for (const auto& item : instance.items)
        doc["items"].push_back({{"id", item.id}, {"inventory", item.inventory}});
    doc["products"] = json::array();
    for (const auto& product : instance.products)
        doc["products"].push_back({{"id", product.id},
                                   {"items", product.items},
                                   {"reward", product.reward},
                                   {"active_prob", product.active_prob},
                                   {"batch", product.batch}});
    doc["batches"] = instance.batches;
    return doc.dump(2) + "\n";
}

Instance random_instance(int L, int num_items, int num_batches, int max_batch_size, bool tight,
                         std::uint64_t seed) {
    if (L < 1) throw std::invalid_argument("random_instance: L must be >= 1");
    if (num_items < L) throw std::invalid_argument("random_instance: num_items must be >= L");
    if (num_batches < 1) throw std::invalid_argument("random_instance: num_batches must be >= 1");
    if (max_batch_size < 1) throw std::invalid_argument("random_instance: max_batch_size must be >= 1");

    Rng rng(derive_seed(seed, "random_instance"));
    Instance instance;
    instance.L = L;
    for (int i = 0; i < num_items; ++i)
        instance.items.push_back({"i" + std::to_string(i), 1});

    std::vector<double> raw;
    for (int t = 0; t < num_batches; ++t) {
        const int size = 1 + static_cast<int>(rng.next_below(max_batch_size));
        instance.batches.emplace_back();
        for (int k = 0; k < size; ++k) {
            Product product;
            product.id = "p" + std::to_string(t) + "_" + std::to_string(k);
            product.batch = t;
            const int bundle = 1 + static_cast<int>(rng.next_below(L));
            std::vector<int> pick;
            while (static_cast<int>(pick.size()) < bundle) {
                int candidate = static_cast<int>(rng.next_below(num_items));
                if (std::find(pick.begin(), pick.end(), candidate) == pick.end())
                    pick.push_back(candidate);
            }
            for (int idx : pick) product.items.push_back(instance.items[idx].id);
            product.reward = rng.next_double();
            raw.push_back(0.05 + 0.95 * rng.next_double());
            instance.batches.back().push_back(product.id);
            instance.products.push_back(std::move(product));
        }
    }

    // shrink the raw fractional values until both constraint families hold
    std::unordered_map<std::string, double> load;
    double scale = 1.0;
    for (int t = 0, k = 0; t < num_batches; ++t) {
        double sum = 0.0;
        for (size_t j = 0; j < instance.batches[t].size(); ++j) sum += raw[k + j];
        k += static_cast<int>(instance.batches[t].size());
        if (sum > 0.0) scale = std::min(scale, 1.0 / sum);
    }
    for (size_t j = 0; j < instance.products.size(); ++j)
        for (const auto& iid : instance.products[j].items) load[iid] += raw[j];
    for (const auto& [iid, value] : load)
        if (value > 0.0) scale = std::min(scale, 1.0 / value);
    if (!tight) scale *= 0.3 + 0.65 * rng.next_double();
    for (size_t j = 0; j < instance.products.size(); ++j)
        instance.products[j].active_prob = raw[j] * scale;

    if (tight) {
        // pad every touched item up to load exactly 1
        std::unordered_map<std::string, double> final_load;
        for (const auto& product : instance.products)
            for (const auto& iid : product.items) final_load[iid] += product.active_prob;
        int pad = 0;
        for (const auto& item : instance.items) {
            auto it = final_load.find(item.id);
            if (it == final_load.end()) continue;
            const double slack = 1.0 - it->second;
            if (slack <= 1e-12) continue;
            Product product;
            product.id = "pad" + std::to_string(pad++);
            product.items = {item.id};
            product.reward = rng.next_double();
            product.active_prob = slack;
            product.batch = static_cast<int>(instance.batches.size());
            instance.batches.push_back({product.id});
            instance.products.push_back(std::move(product));
        }
    }
    return instance;
}

bool is_l_partite(const Instance& instance, const std::vector<std::vector<std::string>>& partition) {
    if (static_cast<int>(partition.size()) != instance.L)
        throw std::invalid_argument("is_l_partite: partition must have exactly L groups");
    std::unordered_map<std::string, int> group_of;
    for (int g = 0; g < static_cast<int>(partition.size()); ++g)
        for (const auto& iid : partition[g])
            if (!group_of.emplace(iid, g).second)
                throw std::invalid_argument("is_l_partite: item \"" + iid + "\" appears in two groups");
    for (const auto& item : instance.items)
        if (!group_of.count(item.id))
            throw std::invalid_argument("is_l_partite: item \"" + item.id + "\" not covered by the partition");
    if (group_of.size() != instance.items.size())
        throw std::invalid_argument("is_l_partite: partition mentions unknown items");

    for (const auto& product : instance.products) {
        std::vector<int> hits(partition.size(), 0);
        for (const auto& iid : product.items)
            if (++hits[group_of.at(iid)] > 1) return false;
    }
    return true;
}

InstanceIndex::InstanceIndex(const Instance& instance) : src(&instance) {
    L = instance.L;
    T = static_cast<int>(instance.batches.size());
    num_items = static_cast<int>(instance.items.size());
    num_products = static_cast<int>(instance.products.size());

    for (int i = 0; i < num_items; ++i) {
        if (!item_index.emplace(instance.items[i].id, i).second)
            throw std::invalid_argument("duplicate item id \"" + instance.items[i].id + "\"");
        inventory.push_back(instance.items[i].inventory);
    }
    products_on.resize(num_items);
    items_of.resize(num_products);
    x.resize(num_products);
    reward.resize(num_products);
    batch_of.assign(num_products, -1);
    for (int j = 0; j < num_products; ++j) {
        const Product& product = instance.products[j];
        if (!product_index.emplace(product.id, j).second)
            throw std::invalid_argument("duplicate product id \"" + product.id + "\"");
        x[j] = product.active_prob;
        reward[j] = product.reward;
        for (const auto& iid : product.items) {
            auto it = item_index.find(iid);
            if (it == item_index.end())
                throw std::invalid_argument("product \"" + product.id + "\" references unknown item \"" +
                                            iid + "\"");
            items_of[j].push_back(it->second);
            products_on[it->second].push_back(j);
        }
    }
    batch_products.resize(T);
    batch_sum.assign(T, 0.0);
    for (int t = 0; t < T; ++t)
        for (const auto& pid : instance.batches[t]) {
            auto it = product_index.find(pid);
            if (it == product_index.end())
                throw std::invalid_argument("batch references unknown product \"" + pid + "\"");
            if (batch_of[it->second] != -1)
                throw std::invalid_argument("product \"" + pid + "\" appears in two batches");
            batch_of[it->second] = t;
            batch_products[t].push_back(it->second);
            batch_sum[t] += x[it->second];
        }
    for (int j = 0; j < num_products; ++j)
        if (batch_of[j] == -1)
            throw std::invalid_argument("product \"" + instance.products[j].id + "\" is not in any batch");
    item_load.assign(num_items, 0.0);
    for (int j = 0; j < num_products; ++j)
        for (int i : items_of[j]) item_load[i] += x[j];
}

bool InstanceIndex::unit_inventories() const {
    for (int inv : inventory)
        if (inv != 1) return false;
    return true;
}

}  // namespace crslab
