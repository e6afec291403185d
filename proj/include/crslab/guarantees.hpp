#ifndef CRSLAB_GUARANTEES_HPP
#define CRSLAB_GUARANTEES_HPP

#include <string>
#include <vector>

#include "crslab/model.hpp"

namespace crslab {

// The closed-form baseline curves plus the root-found improvements, per L.
// Root-found fields are NaN for L=1 where they are not defined.
struct GuaranteeTable {
    int L = 0;
    double baseline = 0.0;         // 1/(1+L)
    double offline_ub = 0.0;       // (1 - 1/(1+L)^{1+L})/L
    double integrality_gap = 0.0;  // 1/(L-1+1/L)
    double poisson = 0.0;          // (1-e^{-L})/L
    double standard_alpha = 0.0;
    double partite_alpha = 0.0;
    double rcrs_random_element_alpha = 0.0;
    double rcrs_standard_integral = 0.0;
};

GuaranteeTable curve_values(int L);

// kappa(alpha) = 1 - alpha(1+L)
//              + alpha^2 (L-1)/L * ((1-alpha(1+L)+alpha/2L)/(1-alpha L+alpha/2L))^{2L}
double kappa(int L, double alpha);

// Left-hand side of the L-partite selectability condition (kappa with the
// (L-1)/L factor replaced by 1/L).
double partite_condition(int L, double alpha);

// Root of kappa on [1/(1+L), 2L/(2L(1+L)-1)], bisected in offset space so the
// excess over the baseline survives rounding even when it is below one ulp of
// the root itself. Also asserts the pair-probability side condition
// alpha <= 1 - alpha L + alpha/(2L).
double solve_standard_alpha(int L);

// The root's strictly positive excess over 1/(1+L). For L >= 7 this is the
// only faithful witness that the root beats the baseline: the sum
// 1/(1+L) + offset rounds back to 1/(1+L) in double precision.
double standard_alpha_offset(int L);

// Largest alpha with partite_condition(alpha) >= 0, same bracket and
// precision story.
double solve_partite_alpha(int L);
double partite_alpha_offset(int L);

// C(alpha, L) = alpha^2 * ((1-alpha(1+L)+alpha/2L)/(1-alpha L+alpha/2L))^{2L};
// P(Z_j and Z_j') >= C(alpha,L) x_j x_j' for disjoint cross-batch pairs.
// Requires the side condition alpha <= 1 - alpha L + alpha/(2L).
double pair_lower_bound(int L, double alpha);

// Brute-force disjoint-pair mass: sum of x_j x_j' over ordered pairs from
// distinct batches with disjoint bundles, each meeting target_items in
// exactly one (distinct) item. target_items must list L existing items.
// Products meeting the target more than once never qualify and contribute
// nothing.
double clubsuit(const Instance& instance, const std::vector<std::string>& target_items);

}  // namespace crslab

#endif
