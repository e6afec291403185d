#ifndef CRSLAB_GEOMETRY_HPP
#define CRSLAB_GEOMETRY_HPP

#include <string>
#include <vector>

#include "crslab/model.hpp"

namespace crslab {

// GF(p^k) with elements encoded as integers in [0, p^k): the base-p digits of
// an element are the coefficients of its polynomial representative, lowest
// degree first. The modulus is the lexicographically smallest monic
// irreducible of degree k, so tables are reproducible.
struct FiniteField {
    int p = 2;
    int k = 1;
    long long order = 2;
    std::vector<int> modulus;  // k+1 coefficients, low to high, top one == 1

    int add(int a, int b) const;
    int neg(int a) const;
    int mul(int a, int b) const;
    int inv(int a) const;  // throws on a == 0
};

enum class FieldOp { add, mul, inv };

FiniteField field_new(int p, int k);
int field_arith(const FiniteField& f, int a, int b, FieldOp op);

// Returns true iff n = p^k for a prime p; optionally reports p and k.
bool is_prime_power(int n, int* p_out = nullptr, int* k_out = nullptr);

// Finite affine plane of prime-power order L: L^2 points, 1+L parallel
// classes of L mutually disjoint lines, any two lines from different classes
// meeting in exactly one point. Lines store point indices.
struct AffinePlane {
    int order = 0;
    std::vector<std::string> points;
    std::vector<std::vector<std::vector<int>>> classes;
};

AffinePlane affine_plane(int L);

// Adversarial instance in which the union bound is tight: one unit item per
// plane point, one product per line, one batch per parallel class. The first
// L batches carry x=(1-eps)/L and reward 1, the last batch x=eps and reward
// 1/(eps*L). Every item load is exactly 1.
Instance tightness_instance(int L, double eps);

// Same combinatorics with x=1/(1+L) and reward 1 everywhere; the random-order
// / offline hardness instance.
Instance random_order_instance(int L);

}  // namespace crslab

#endif
