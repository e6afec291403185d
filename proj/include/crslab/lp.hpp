#ifndef CRSLAB_LP_HPP
#define CRSLAB_LP_HPP

#include <limits>
#include <string>
#include <vector>

#include "crslab/model.hpp"

namespace crslab {

enum class Sense { le, eq, ge };

struct LinearConstraint {
    std::vector<double> coeffs;
    Sense sense = Sense::le;
    double rhs = 0.0;
};

constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

// Dense LP in maximization form with per-variable bounds. Lower bounds must
// be finite; upper bounds may be +infinity.
struct LinearProgram {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> var_names;  // optional, used by reports

    void add_constraint(std::vector<double> coeffs, Sense sense, double rhs) {
        constraints.push_back({std::move(coeffs), sense, rhs});
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> values;
    double objective = 0.0;
};

// Two-phase primal simplex on a dense tableau, Bland's anti-cycling rule,
// deterministic pivoting. Suited to the desk-scale problems this project
// builds (at most a few hundred rows/columns).
LpSolution simplex_solve(const LinearProgram& lp, double tol = 1e-9);

// max sum_j r_j x_j subject to per-item loads <= k_i and 0 <= x_j <= lambda_j.
LinearProgram fluid_lp(const Instance& instance);

double fluid_lp_value(const Instance& instance);

}  // namespace crslab

#endif
