#include "crslab/guarantees.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "crslab/rcrs.hpp"

namespace crslab {

namespace {

double power_ratio(int L, double alpha) {
    const double num = 1.0 - alpha * (1.0 + L) + alpha / (2.0 * L);
    const double den = 1.0 - alpha * L + alpha / (2.0 * L);
    if (den <= 0.0) throw std::domain_error("kappa: pole, 1 - alpha L + alpha/(2L) <= 0");
    return std::pow(num / den, 2 * L);
}

// Both selectability conditions evaluated at alpha = 1/(1+L) + h without the
// 1 - alpha(1+L) cancellation: the root offset h* shrinks like (2L+1)^{-2L}
// and would otherwise drown in rounding noise well before L = 10.
double condition_at_offset(int L, double h, double quad_coef) {
    const double alpha = 1.0 / (1.0 + L) + h;
    const double num = alpha / (2.0 * L) - h * (1.0 + L);  // == 1 - alpha(1+L) + alpha/(2L)
    const double den = 1.0 - alpha * L + alpha / (2.0 * L);
    const double ratio = std::pow(num / den, 2 * L);
    return -h * (1.0 + L) + quad_coef * alpha * alpha * ratio;
}

// root offset of the decreasing condition on [0, H]; H is the point where
// the ratio's numerator vanishes and the condition is plainly negative
double bisect_offset(int L, double quad_coef) {
    double lo = 0.0;
    double hi = 1.0 / ((2.0 * L * (1.0 + L) - 1.0) * (1.0 + L));
    if (condition_at_offset(L, lo, quad_coef) < 0.0 || condition_at_offset(L, hi, quad_coef) > 0.0)
        throw std::logic_error("bisect_offset: no sign change on the bracket");
    for (int iter = 0; iter < 300 && hi - lo > 1e-4 * hi * 1e-14; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (condition_at_offset(L, mid, quad_coef) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

double kappa(int L, double alpha) {
    if (L < 2) throw std::invalid_argument("kappa: L must be >= 2");
    return 1.0 - alpha * (1.0 + L) + alpha * alpha * (L - 1.0) / L * power_ratio(L, alpha);
}

double partite_condition(int L, double alpha) {
    if (L < 2) throw std::invalid_argument("partite_condition: L must be >= 2");
    return 1.0 - alpha * (1.0 + L) + alpha * alpha / L * power_ratio(L, alpha);
}

double standard_alpha_offset(int L) {
    if (L < 2) throw std::invalid_argument("solve_standard_alpha: L must be >= 2");
    return bisect_offset(L, (L - 1.0) / L);
}

double solve_standard_alpha(int L) {
    const double root = 1.0 / (1.0 + L) + standard_alpha_offset(L);
    // side condition of the pair-probability bound must hold at the root
    if (root > 1.0 - root * L + root / (2.0 * L) + 1e-12)
        throw std::logic_error("solve_standard_alpha: side condition violated at the root");
    return root;
}

double partite_alpha_offset(int L) {
    if (L < 2) throw std::invalid_argument("solve_partite_alpha: L must be >= 2");
    return bisect_offset(L, 1.0 / L);
}

double solve_partite_alpha(int L) { return 1.0 / (1.0 + L) + partite_alpha_offset(L); }

double pair_lower_bound(int L, double alpha) {
    if (L < 2) throw std::invalid_argument("pair_lower_bound: L must be >= 2");
    if (alpha > 1.0 - alpha * L + alpha / (2.0 * L) + 1e-12)
        throw std::domain_error("pair_lower_bound: side condition alpha <= 1 - alpha L + alpha/(2L) violated");
    return alpha * alpha * power_ratio(L, alpha);
}

GuaranteeTable curve_values(int L) {
    if (L < 1) throw std::invalid_argument("curve_values: L must be >= 1");
    GuaranteeTable table;
    table.L = L;
    table.baseline = 1.0 / (1.0 + L);
    table.offline_ub = (1.0 - std::pow(1.0 + L, -(1.0 + L))) / L;
    table.integrality_gap = 1.0 / (L - 1.0 + 1.0 / L);
    table.poisson = -std::expm1(-L) / L;
    if (L >= 2) {
        table.standard_alpha = solve_standard_alpha(L);
        table.partite_alpha = solve_partite_alpha(L);
        table.rcrs_random_element_alpha = rcrs_random_element_guarantee(L);
        table.rcrs_standard_integral = solve_selection_function(L, 4000).integral();
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        table.standard_alpha = nan;
        table.partite_alpha = nan;
        table.rcrs_random_element_alpha = nan;
        table.rcrs_standard_integral = nan;
    }
    return table;
}

double clubsuit(const Instance& instance, const std::vector<std::string>& target_items) {
    const InstanceIndex ix(instance);
    if (static_cast<int>(target_items.size()) != ix.L)
        throw std::invalid_argument("clubsuit: target must list exactly L items");
    std::vector<char> in_target(ix.num_items, 0);
    for (const auto& iid : target_items) {
        auto it = ix.item_index.find(iid);
        if (it == ix.item_index.end())
            throw std::invalid_argument("clubsuit: unknown target item \"" + iid + "\"");
        if (in_target[it->second]) throw std::invalid_argument("clubsuit: duplicate target item");
        in_target[it->second] = 1;
    }

    // qualifying products: exactly one target item in the bundle
    std::vector<int> hit(ix.num_products, -1);
    std::vector<int> qualifying;
    for (int j = 0; j < ix.num_products; ++j) {
        int count = 0, which = -1;
        for (int i : ix.items_of[j])
            if (in_target[i]) {
                ++count;
                which = i;
            }
        if (count == 1) {
            hit[j] = which;
            qualifying.push_back(j);
        }
    }

    double sum = 0.0;
    for (int j : qualifying)
        for (int jp : qualifying) {
            if (j == jp || ix.batch_of[j] == ix.batch_of[jp] || hit[j] == hit[jp]) continue;
            bool disjoint = true;
            for (int i : ix.items_of[j]) {
                for (int ip : ix.items_of[jp])
                    if (i == ip) {
                        disjoint = false;
                        break;
                    }
                if (!disjoint) break;
            }
            if (disjoint) sum += ix.x[j] * ix.x[jp];
        }
    return sum;
}

}  // namespace crslab
