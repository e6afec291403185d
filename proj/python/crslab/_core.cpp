#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "crslab/cli.hpp"
#include "crslab/geometry.hpp"
#include "crslab/guarantees.hpp"
#include "crslab/lp.hpp"
#include "crslab/model.hpp"
#include "crslab/ocrs.hpp"
#include "crslab/oracles.hpp"
#include "crslab/rcrs.hpp"
#include "crslab/reduction.hpp"

namespace py = pybind11;
using namespace crslab;

namespace {

// Instances cross the boundary as JSON documents (the same schema the CLI
// reads and writes); results come back as plain dicts and lists.

py::dict stats_dict(const Instance& instance, const ProductStats& stats, size_t j) {
    py::dict out;
    out["product_id"] = instance.products[j].id;
    out["x"] = stats.x;
    out["feas_prob"] = stats.feas_prob;
    out["defined"] = stats.defined;
    if (stats.defined) {
        out["ratio"] = stats.ratio;
        out["accept_prob"] = stats.accept_prob;
        out["ci_lo"] = stats.ci_lo;
        out["ci_hi"] = stats.ci_hi;
    }
    out["capped"] = stats.capped;
    return out;
}

py::list profile_list(const Instance& instance, const AcceptanceProfile& profile) {
    py::list out;
    for (size_t j = 0; j < profile.per_product.size(); ++j)
        out.append(stats_dict(instance, profile.per_product[j], j));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "online contention resolution schemes for L-bounded products";

    // instance construction and validation
    m.def("tightness_instance",
          [](int L, double eps) { return save_instance(tightness_instance(L, eps)); },
          py::arg("L"), py::arg("eps"));
    m.def("random_order_instance",
          [](int L) { return save_instance(random_order_instance(L)); }, py::arg("L"));
    m.def("random_instance",
          [](int L, int items, int batches, int max_batch_size, bool tight, std::uint64_t seed) {
              return save_instance(random_instance(L, items, batches, max_batch_size, tight, seed));
          },
          py::arg("L"), py::arg("items"), py::arg("batches"), py::arg("max_batch_size"),
          py::arg("tight"), py::arg("seed"));
    m.def("validate", [](const std::string& doc, double tol) {
        const ValidationReport report = validate(parse_instance(doc), tol);
        py::list violations;
        for (const auto& v : report.violations)
            violations.append(py::make_tuple(v.constraint, v.offender, v.magnitude));
        py::dict out;
        out["ok"] = report.ok;
        out["violations"] = violations;
        return out;
    }, py::arg("instance"), py::arg("tol") = 1e-9);

    m.def("affine_plane", [](int L) {
        const AffinePlane plane = affine_plane(L);
        py::dict out;
        out["order"] = plane.order;
        out["points"] = plane.points;
        out["classes"] = plane.classes;
        return out;
    }, py::arg("L"));

    // linear programming
    m.def("fluid_lp_value",
          [](const std::string& doc) { return fluid_lp_value(parse_instance(doc)); },
          py::arg("instance"));
    m.def("fluid_lp_solution", [](const std::string& doc) {
        const Instance instance = parse_instance(doc);
        const LpSolution solution = simplex_solve(fluid_lp(instance));
        py::dict values;
        for (size_t j = 0; j < instance.products.size(); ++j)
            values[py::str(instance.products[j].id)] =
                solution.status == LpStatus::optimal ? solution.values[j] : 0.0;
        py::dict out;
        out["status"] = solution.status == LpStatus::optimal     ? "optimal"
                        : solution.status == LpStatus::infeasible ? "infeasible"
                                                                  : "unbounded";
        out["objective"] = solution.objective;
        out["values"] = values;
        return out;
    }, py::arg("instance"));

    // exact-selection scheme
    m.def("exact_feasibility_probs", [](const std::string& doc, double alpha) {
        const Instance instance = parse_instance(doc);
        return profile_list(instance, exact_feasibility_probs(instance, alpha));
    }, py::arg("instance"), py::arg("alpha"));
    m.def("simulate_ocrs_mc", [](const std::string& doc, double eps, std::uint64_t seed, int threads) {
        const Instance instance = parse_instance(doc);
        const auto [policy, profile] = simulate_ocrs_mc(instance, eps, seed, threads);
        py::dict out;
        out["alpha"] = policy.alpha;
        out["profile"] = profile_list(instance, profile);
        return out;
    }, py::arg("instance"), py::arg("eps"), py::arg("seed"), py::arg("threads") = 0);
    m.def("mc_trial_count", &mc_trial_count, py::arg("L"), py::arg("T"), py::arg("num_items"),
          py::arg("eps"));
    m.def("estimate_ocrs_selectability",
          [](const std::string& doc, double alpha, long long paths, std::uint64_t seed, int threads) {
              const Instance instance = parse_instance(doc);
              const OcrsPolicy policy = exact_policy(instance, alpha);
              return profile_list(instance, estimate_selectability(
                  instance,
                  [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
                      return run_ocrs(ix, policy, realization, rng);
                  },
                  paths, seed, threads));
          },
          py::arg("instance"), py::arg("alpha"), py::arg("paths"), py::arg("seed"),
          py::arg("threads") = 0);

    // random-order schemes
    m.def("attenuation_b", &attenuation_b, py::arg("L"), py::arg("x"));
    m.def("rcrs_random_element_guarantee", &rcrs_random_element_guarantee, py::arg("L"));
    m.def("estimate_attenuate_greedy",
          [](const std::string& doc, long long paths, std::uint64_t seed, int threads) {
              const Instance instance = parse_instance(doc);
              const InstanceIndex probe(instance);
              const AttenuationContext ctx(probe);
              return profile_list(instance, estimate_selectability(
                  instance,
                  [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
                      const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
                      return run_attenuate_greedy(ix, ctx, realization, arrival, rng);
                  },
                  paths, seed, threads));
          },
          py::arg("instance"), py::arg("paths"), py::arg("seed"), py::arg("threads") = 0);
    m.def("selection_function", [](int L, int grid) {
        const SelectionFunction c = solve_selection_function(L, grid);
        py::dict out;
        out["y"] = c.grid;
        out["c"] = c.c_values;
        out["S"] = c.S_values;
        out["integral"] = c.integral();
        out["c1"] = c.c_at_one();
        out["max_residual"] = c.max_residual;
        return out;
    }, py::arg("L"), py::arg("grid") = 4000);
    m.def("run_recursive_standard_rcrs",
          [](const std::string& doc, int K, int sub_trials, long long paths, std::uint64_t seed,
             int threads) {
              const Instance instance = parse_instance(doc);
              const SelectionFunction c = solve_selection_function(instance.L, 4000);
              const int phases = K > 0 ? K : recommended_phase_count(c);
              return profile_list(instance, run_recursive_standard_rcrs(instance, c, phases,
                                                                        sub_trials, paths, seed,
                                                                        threads));
          },
          py::arg("instance"), py::arg("K") = 0, py::arg("sub_trials") = 10000,
          py::arg("paths") = 100000, py::arg("seed") = 12345, py::arg("threads") = 0);

    // guarantee curves and the disjoint-pair mass
    m.def("curve_values", [](int L) {
        const GuaranteeTable table = curve_values(L);
        py::dict out;
        out["L"] = table.L;
        out["baseline"] = table.baseline;
        out["offline_ub"] = table.offline_ub;
        out["integrality_gap"] = table.integrality_gap;
        out["poisson"] = table.poisson;
        out["standard_alpha"] = table.standard_alpha;
        out["partite_alpha"] = table.partite_alpha;
        out["rcrs_random_element_alpha"] = table.rcrs_random_element_alpha;
        out["rcrs_standard_integral"] = table.rcrs_standard_integral;
        return out;
    }, py::arg("L"));
    m.def("kappa", &kappa, py::arg("L"), py::arg("alpha"));
    m.def("partite_condition", &partite_condition, py::arg("L"), py::arg("alpha"));
    m.def("solve_standard_alpha", &solve_standard_alpha, py::arg("L"));
    m.def("standard_alpha_offset", &standard_alpha_offset, py::arg("L"));
    m.def("solve_partite_alpha", &solve_partite_alpha, py::arg("L"));
    m.def("partite_alpha_offset", &partite_alpha_offset, py::arg("L"));
    m.def("pair_lower_bound", &pair_lower_bound, py::arg("L"), py::arg("alpha"));
    m.def("clubsuit", [](const std::string& doc, const std::vector<std::string>& target) {
        return clubsuit(parse_instance(doc), target);
    }, py::arg("instance"), py::arg("target_items"));
    m.def("is_l_partite",
          [](const std::string& doc, const std::vector<std::vector<std::string>>& partition) {
              return is_l_partite(parse_instance(doc), partition);
          },
          py::arg("instance"), py::arg("partition"));

    // oracles
    m.def("optimal_online_dp_value",
          [](const std::string& doc) { return optimal_online_dp(parse_instance(doc)).value; },
          py::arg("instance"));
    m.def("offline_optimum_mean",
          [](const std::string& doc, long long paths, std::uint64_t seed, int threads) {
              return offline_optimum_mean(parse_instance(doc), paths, seed, threads);
          },
          py::arg("instance"), py::arg("paths"), py::arg("seed"), py::arg("threads") = 0);
    m.def("exhaustive_acceptance_probs", [](const std::string& doc, double alpha) {
        const Instance instance = parse_instance(doc);
        const OcrsPolicy policy = exact_policy(instance, alpha);
        return profile_list(instance, exhaustive_acceptance_probs(instance, policy));
    }, py::arg("instance"), py::arg("alpha"));

    // reduction pipeline
    m.def("reduce_system", [](const std::string& doc) {
        const SubstitutableSystem system = parse_system(doc);
        const LpSolution lp = simplex_solve(build_relaxation_lp(system));
        const ReductionOutput reduction = preprocess(system, lp);
        py::list mapping;
        for (const auto& copy : reduction.mapping) {
            py::dict entry;
            entry["copy_id"] = copy.copy_id;
            entry["product_id"] = system.products[copy.original_product].id;
            entry["period"] = copy.period;
            entry["x"] = copy.x;
            mapping.append(entry);
        }
        py::dict out;
        out["lp_value"] = lp.objective;
        out["instance"] = save_instance(reduction.instance);
        out["mapping"] = mapping;
        out["dummy_counts"] = reduction.dummy_counts;
        return out;
    }, py::arg("system"));
    m.def("run_online",
          [](const std::string& doc, double alpha, long long paths, std::uint64_t seed, int threads) {
              const SubstitutableSystem system = parse_system(doc);
              const LpSolution lp = simplex_solve(build_relaxation_lp(system));
              const ReductionOutput reduction = preprocess(system, lp);
              const double a = alpha > 0.0 ? alpha : 1.0 / (1.0 + reduction.instance.L);
              const OcrsPolicy policy = exact_policy(reduction.instance, a);
              const OnlineRunStats stats =
                  online_algorithm(system, reduction, policy, paths, seed, threads);
              py::list copies;
              for (size_t c = 0; c < reduction.mapping.size(); ++c) {
                  py::dict entry;
                  entry["copy_id"] = reduction.mapping[c].copy_id;
                  entry["x"] = reduction.mapping[c].x;
                  entry["sale_freq"] = stats.sale_freq[c];
                  entry["alpha_x"] = a * reduction.mapping[c].x;
                  copies.append(entry);
              }
              py::dict out;
              out["lp_value"] = lp.objective;
              out["alpha"] = a;
              out["mean_reward"] = stats.mean_reward;
              out["copies"] = copies;
              return out;
          },
          py::arg("system"), py::arg("alpha") = 0.0, py::arg("paths") = 100000,
          py::arg("seed") = 12345, py::arg("threads") = 0);

    // the full CLI, handy for smoke tests
    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
