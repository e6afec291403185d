#include "crslab/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace crslab {

namespace {

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; static_cast<long long>(d) * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// polynomials over GF(p) as coefficient vectors, low to high, no trailing zeros
using Poly = std::vector<int>;

int degree(const Poly& a) { return static_cast<int>(a.size()) - 1; }

Poly trim(Poly a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

Poly poly_mod(Poly a, const Poly& m, int p) {
    a = trim(std::move(a));
    while (degree(a) >= degree(m)) {
        const int shift = degree(a) - degree(m);
        const int lead = a.back();  // m is monic
        for (int i = 0; i <= degree(m); ++i) {
            int& c = a[i + shift];
            c = (c - lead * m[i]) % p;
            if (c < 0) c += p;
        }
        a = trim(std::move(a));
    }
    return a;
}

Poly poly_mul(const Poly& a, const Poly& b, int p) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] = (out[i + j] + a[i] * b[j]) % p;
    return trim(std::move(out));
}

Poly decode(long long code, int p) {
    Poly out;
    while (code > 0) {
        out.push_back(static_cast<int>(code % p));
        code /= p;
    }
    return out;
}

long long encode(const Poly& a, int p) {
    long long code = 0;
    for (int i = degree(a); i >= 0; --i) code = code * p + a[i];
    return code;
}

// exhaustive trial division by all monic polynomials of degree 1..k/2
bool irreducible(const Poly& m, int p) {
    const int k = degree(m);
    for (int d = 1; 2 * d <= k; ++d) {
        long long count = 1;
        for (int i = 0; i < d; ++i) count *= p;  // p^d monic candidates of degree d
        for (long long low = 0; low < count; ++low) {
            Poly divisor = decode(low, p);
            divisor.resize(d + 1, 0);
            divisor[d] = 1;
            if (poly_mod(m, divisor, p).empty()) return false;
        }
    }
    return true;
}

}  // namespace

int FiniteField::add(int a, int b) const {
    int out = 0, mult = 1;
    for (int i = 0; i < k; ++i) {
        out += ((a % p + b % p) % p) * mult;
        a /= p;
        b /= p;
        mult *= p;
    }
    return out;
}

int FiniteField::neg(int a) const {
    int out = 0, mult = 1;
    for (int i = 0; i < k; ++i) {
        out += ((p - a % p) % p) * mult;
        a /= p;
        mult *= p;
    }
    return out;
}

int FiniteField::mul(int a, int b) const {
    Poly prod = poly_mul(decode(a, p), decode(b, p), p);
    return static_cast<int>(encode(poly_mod(std::move(prod), modulus, p), p));
}

int FiniteField::inv(int a) const {
    if (a == 0) throw std::domain_error("field inverse of zero");
    for (int b = 1; b < order; ++b)
        if (mul(a, b) == 1) return b;
    throw std::logic_error("field element without inverse");  // unreachable in a field
}

FiniteField field_new(int p, int k) {
    if (!is_prime(p)) throw std::invalid_argument("field_new: p not prime");
    if (k < 1 || k > 8) throw std::invalid_argument("field_new: k out of supported range");

    FiniteField f;
    f.p = p;
    f.k = k;
    f.order = 1;
    for (int i = 0; i < k; ++i) f.order *= p;

    if (k == 1) {
        f.modulus = {0, 1};  // the polynomial x
        return f;
    }
    // lexicographically smallest monic irreducible of degree k, ordered by the
    // low-order coefficient vector read as a base-p number
    long long count = 1;
    for (int i = 0; i < k; ++i) count *= p;
    for (long long low = 0; low < count; ++low) {
        Poly candidate = decode(low, p);
        candidate.resize(k + 1, 0);
        candidate[k] = 1;
        if (irreducible(candidate, p)) {
            f.modulus = candidate;
            return f;
        }
    }
    throw std::logic_error("field_new: no irreducible polynomial found");  // cannot happen
}

int field_arith(const FiniteField& f, int a, int b, FieldOp op) {
    if (a < 0 || a >= f.order || b < 0 || b >= f.order)
        throw std::invalid_argument("field_arith: element out of range");
    switch (op) {
        case FieldOp::add: return f.add(a, b);
        case FieldOp::mul: return f.mul(a, b);
        case FieldOp::inv: return f.inv(a);
    }
    throw std::invalid_argument("field_arith: unknown op");
}

bool is_prime_power(int n, int* p_out, int* k_out) {
    if (n < 2) return false;
    for (int d = 2; d <= n; ++d) {
        if (n % d != 0) continue;
        // d is the smallest prime factor: n must be a power of it
        int m = n, k = 0;
        while (m % d == 0) {
            m /= d;
            ++k;
        }
        if (m != 1) return false;
        if (p_out) *p_out = d;
        if (k_out) *k_out = k;
        return true;
    }
    return false;
}

AffinePlane affine_plane(int L) {
    int p = 0, k = 0;
    if (L < 2 || L > 256 || !is_prime_power(L, &p, &k))
        throw std::invalid_argument("affine_plane: no plane constructed (order " + std::to_string(L) +
                                    " is not a prime power in [2,256])");
    const FiniteField f = field_new(p, k);

    AffinePlane plane;
    plane.order = L;
    // point (a, b) at index a*L + b
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            plane.points.push_back("pt(" + std::to_string(a) + "," + std::to_string(b) + ")");

    // one class per slope m: lines {(x, m*x + c) : x in GF(L)}
    for (int slope = 0; slope < L; ++slope) {
        std::vector<std::vector<int>> lines;
        for (int c = 0; c < L; ++c) {
            std::vector<int> line;
            for (int a = 0; a < L; ++a) line.push_back(a * L + f.add(f.mul(slope, a), c));
            lines.push_back(std::move(line));
        }
        plane.classes.push_back(std::move(lines));
    }
    // the vertical class {x = c}
    {
        std::vector<std::vector<int>> lines;
        for (int c = 0; c < L; ++c) {
            std::vector<int> line;
            for (int b = 0; b < L; ++b) line.push_back(c * L + b);
            lines.push_back(std::move(line));
        }
        plane.classes.push_back(std::move(lines));
    }

    // defensive post-construction check of the plane axioms: classes must
    // partition the points, and each line of one class must meet every line
    // of another class exactly once
    const size_t num_classes = plane.classes.size();
    std::vector<std::vector<int>> line_of(num_classes, std::vector<int>(L * L, -1));
    for (size_t ci = 0; ci < num_classes; ++ci) {
        for (size_t li = 0; li < plane.classes[ci].size(); ++li) {
            const auto& line = plane.classes[ci][li];
            if (static_cast<int>(line.size()) != L) throw std::logic_error("affine_plane: bad line size");
            for (int point : line) {
                if (line_of[ci][point] != -1)
                    throw std::logic_error("affine_plane: class is not a partition");
                line_of[ci][point] = static_cast<int>(li);
            }
        }
        for (int point = 0; point < L * L; ++point)
            if (line_of[ci][point] < 0) throw std::logic_error("affine_plane: class misses a point");
    }
    // a line's L points must land on L distinct lines of the other class;
    // exhaustive for all class pairs up to order 32, a strided sample beyond
    const size_t stride = L <= 32 ? 1 : num_classes / 8 + 1;
    std::vector<char> seen(L, 0);
    for (size_t ci = 0; ci < num_classes; ci += stride)
        for (size_t cj = 0; cj < num_classes; cj += stride) {
            if (ci == cj) continue;
            for (const auto& line : plane.classes[ci]) {
                std::fill(seen.begin(), seen.end(), 0);
                for (int point : line) {
                    const int other = line_of[cj][point];
                    if (seen[other])
                        throw std::logic_error("affine_plane: cross-class intersection != 1");
                    seen[other] = 1;
                }
            }
        }
    return plane;
}

namespace {

Instance plane_instance(int L, const std::vector<double>& class_x, const std::vector<double>& class_r) {
    const AffinePlane plane = affine_plane(L);
    Instance instance;
    instance.L = L;
    for (const auto& pid : plane.points) instance.items.push_back({pid, 1});
    for (int t = 0; t < static_cast<int>(plane.classes.size()); ++t) {
        instance.batches.emplace_back();
        for (int l = 0; l < static_cast<int>(plane.classes[t].size()); ++l) {
            Product product;
            product.id = "ln(" + std::to_string(t) + "," + std::to_string(l) + ")";
            for (int point : plane.classes[t][l]) product.items.push_back(plane.points[point]);
            product.active_prob = class_x[t];
            product.reward = class_r[t];
            product.batch = t;
            instance.batches.back().push_back(product.id);
            instance.products.push_back(std::move(product));
        }
    }
    return instance;
}

}  // namespace

Instance tightness_instance(int L, double eps) {
    if (!(eps > 0.0 && eps < 1.0 / L))
        throw std::invalid_argument("tightness_instance: eps must lie in (0, 1/L)");
    std::vector<double> xs(L + 1, (1.0 - eps) / L), rs(L + 1, 1.0);
    xs[L] = eps;
    rs[L] = 1.0 / (eps * L);
    return plane_instance(L, xs, rs);
}

Instance random_order_instance(int L) {
    std::vector<double> xs(L + 1, 1.0 / (1.0 + L)), rs(L + 1, 1.0);
    return plane_instance(L, xs, rs);
}

}  // namespace crslab
