#include "crslab/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace crslab {

namespace {

// Dense tableau with an attached objective row. Column layout: structural
// variables first, then slacks/surpluses, then artificials; last column is
// the rhs. Basic solution kept primal-feasible throughout (rhs >= 0).
struct Tableau {
    int rows = 0;
    int cols = 0;  // excluding rhs
    std::vector<std::vector<double>> a;  // rows x (cols+1)
    std::vector<double> obj;             // cols+1, reduced costs + value
    std::vector<int> basis;              // per row
    double tol;

    explicit Tableau(double tol_) : tol(tol_) {}

    void pivot(int r, int s) {
        const double inv = 1.0 / a[r][s];
        for (int j = 0; j <= cols; ++j) a[r][j] *= inv;
        a[r][s] = 1.0;
        for (int i = 0; i < rows; ++i) {
            if (i == r || std::fabs(a[i][s]) <= 0.0) continue;
            const double factor = a[i][s];
            for (int j = 0; j <= cols; ++j) a[i][j] -= factor * a[r][j];
            a[i][s] = 0.0;
        }
        const double factor = obj[s];
        if (factor != 0.0) {
            for (int j = 0; j <= cols; ++j) obj[j] -= factor * a[r][j];
            obj[s] = 0.0;
        }
        basis[r] = s;
    }

    // Bland's rule: entering = lowest-index column with positive reduced
    // cost, leaving = min ratio with ties broken by lowest basis variable.
    // Returns false when the problem is unbounded in the entering direction.
    bool run(const std::vector<char>& allowed) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < cols; ++j)
                if (allowed[j] && obj[j] > tol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < rows; ++i) {
                if (a[i][enter] <= tol) continue;
                const double ratio = a[i][cols] / a[i][enter];
                if (leave < 0 || ratio < best - tol ||
                    (ratio < best + tol && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpSolution simplex_solve(const LinearProgram& lp, double tol) {
    const int n = lp.num_vars;
    if (static_cast<int>(lp.objective.size()) != n || static_cast<int>(lp.lower.size()) != n ||
        static_cast<int>(lp.upper.size()) != n)
        throw std::invalid_argument("simplex_solve: objective/bounds dimension mismatch");
    for (const auto& c : lp.constraints)
        if (static_cast<int>(c.coeffs.size()) != n)
            throw std::invalid_argument("simplex_solve: constraint dimension mismatch");
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(lp.lower[j]))
            throw std::invalid_argument("simplex_solve: lower bounds must be finite");
        if (lp.upper[j] < lp.lower[j]) return {LpStatus::infeasible, {}, 0.0};
    }

    // shift x = lower + y, y >= 0, and materialize finite upper bounds as rows
    struct Row {
        std::vector<double> coeffs;
        Sense sense;
        double rhs;
    };
    std::vector<Row> rows;
    for (const auto& c : lp.constraints) {
        double rhs = c.rhs;
        for (int j = 0; j < n; ++j) rhs -= c.coeffs[j] * lp.lower[j];
        rows.push_back({c.coeffs, c.sense, rhs});
    }
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(lp.upper[j])) continue;
        std::vector<double> coeffs(n, 0.0);
        coeffs[j] = 1.0;
        rows.push_back({std::move(coeffs), Sense::le, lp.upper[j] - lp.lower[j]});
    }
    for (auto& row : rows) {
        if (row.rhs >= 0.0) continue;
        for (double& c : row.coeffs) c = -c;
        row.rhs = -row.rhs;
        row.sense = row.sense == Sense::le ? Sense::ge : row.sense == Sense::ge ? Sense::le : Sense::eq;
    }

    const int m = static_cast<int>(rows.size());
    int num_slack = 0, num_art = 0;
    for (const auto& row : rows) {
        if (row.sense != Sense::eq) ++num_slack;
        if (row.sense != Sense::le) ++num_art;
    }

    Tableau tab(tol);
    tab.rows = m;
    tab.cols = n + num_slack + num_art;
    tab.a.assign(m, std::vector<double>(tab.cols + 1, 0.0));
    tab.basis.assign(m, -1);
    int slack_at = n, art_at = n + num_slack;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) tab.a[i][j] = rows[i].coeffs[j];
        tab.a[i][tab.cols] = rows[i].rhs;
        if (rows[i].sense == Sense::le) {
            tab.a[i][slack_at] = 1.0;
            tab.basis[i] = slack_at++;
        } else if (rows[i].sense == Sense::ge) {
            tab.a[i][slack_at++] = -1.0;
            tab.a[i][art_at] = 1.0;
            tab.basis[i] = art_at++;
        } else {
            tab.a[i][art_at] = 1.0;
            tab.basis[i] = art_at++;
        }
    }

    std::vector<char> allowed(tab.cols, 1);

    if (num_art > 0) {
        // phase 1: maximize -sum(artificials), priced out for the start basis
        tab.obj.assign(tab.cols + 1, 0.0);
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < n + num_slack) continue;
            for (int j = 0; j <= tab.cols; ++j) tab.obj[j] += tab.a[i][j];
        }
        for (int j = n + num_slack; j < tab.cols; ++j) tab.obj[j] = 0.0;
        if (!tab.run(allowed)) throw std::logic_error("simplex_solve: phase 1 unbounded");
        if (tab.obj[tab.cols] > 1e-7) return {LpStatus::infeasible, {}, 0.0};
        // pivot lingering artificials out of the basis where possible
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < n + num_slack) continue;
            int enter = -1;
            for (int j = 0; j < n + num_slack; ++j)
                if (std::fabs(tab.a[i][j]) > tol) {
                    enter = j;
                    break;
                }
            if (enter >= 0) tab.pivot(i, enter);
        }
        for (int j = n + num_slack; j < tab.cols; ++j) allowed[j] = 0;
    }

    // phase 2: maximize the shifted objective c'y
    tab.obj.assign(tab.cols + 1, 0.0);
    for (int j = 0; j < n; ++j) tab.obj[j] = lp.objective[j];
    for (int i = 0; i < m; ++i) {
        const int b = tab.basis[i];
        if (b >= n) continue;
        const double cb = lp.objective[b];
        if (cb == 0.0) continue;
        for (int j = 0; j <= tab.cols; ++j) tab.obj[j] -= cb * tab.a[i][j];
    }
    if (!tab.run(allowed)) return {LpStatus::unbounded, {}, 0.0};

    LpSolution solution;
    solution.status = LpStatus::optimal;
    solution.values.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n) solution.values[tab.basis[i]] = tab.a[i][tab.cols];
    for (int j = 0; j < n; ++j) solution.values[j] += lp.lower[j];
    solution.objective = 0.0;
    for (int j = 0; j < n; ++j) solution.objective += lp.objective[j] * solution.values[j];
    return solution;
}

LinearProgram fluid_lp(const Instance& instance) {
    const InstanceIndex ix(instance);
    LinearProgram lp;
    lp.num_vars = ix.num_products;
    lp.objective = ix.reward;
    lp.lower.assign(ix.num_products, 0.0);
    lp.upper = ix.x;
    for (int j = 0; j < ix.num_products; ++j) lp.var_names.push_back(instance.products[j].id);
    for (int i = 0; i < ix.num_items; ++i) {
        std::vector<double> coeffs(ix.num_products, 0.0);
        for (int j : ix.products_on[i]) coeffs[j] = 1.0;
        lp.add_constraint(std::move(coeffs), Sense::le, static_cast<double>(ix.inventory[i]));
    }
    return lp;
}

double fluid_lp_value(const Instance& instance) {
    const LpSolution solution = simplex_solve(fluid_lp(instance));
    if (solution.status != LpStatus::optimal)
        throw std::runtime_error("fluid_lp_value: solver did not reach optimality");
    return solution.objective;
}

}  // namespace crslab
