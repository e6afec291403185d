#include "crslab/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crslab/geometry.hpp"
#include "crslab/guarantees.hpp"
#include "crslab/lp.hpp"
#include "crslab/model.hpp"
#include "crslab/ocrs.hpp"
#include "crslab/oracles.hpp"
#include "crslab/rcrs.hpp"
#include "crslab/reduction.hpp"
#include "crslab/report.hpp"
#include "json.hpp"

namespace crslab {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("--instance/--system", "cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " to " + path);
}

// report to stdout, or atomically to --out when given
void deliver(const std::string& out_path, const std::string& content, std::ostream& out) {
    if (out_path.empty())
        out << content;
    else
        write_atomic(out_path, content);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("CRSLAB_SEED")) return std::strtoull(env, nullptr, 10);
    return 12345;
}

ReportFormat parse_format(const std::string& name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    if (name == "table") return ReportFormat::table;
    throw CLI::ValidationError("--format", "expected csv, json or table");
}

std::pair<int, int> parse_l_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const int l = std::stoi(text);
        return {l, l};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

double resolve_alpha(const std::string& text, int L) {
    if (text == "auto") return 1.0 / (1.0 + L);
    return std::stod(text);
}

Report profile_report(const Instance& instance, const AcceptanceProfile& profile, bool with_feas) {
    Report report;
    if (with_feas)
        report.columns = {"product_id", "x", "feas_prob", "ratio", "ci_lo", "ci_hi"};
    else
        report.columns = {"product_id", "x", "ratio", "ci_lo", "ci_hi"};
    for (size_t j = 0; j < profile.per_product.size(); ++j) {
        const ProductStats& stats = profile.per_product[j];
        std::vector<ReportValue> row;
        row.emplace_back(instance.products[j].id);
        row.emplace_back(stats.x);
        if (with_feas) row.emplace_back(stats.feas_prob);
        if (stats.defined) {
            row.emplace_back(stats.ratio);
            row.emplace_back(stats.ci_lo);
            row.emplace_back(stats.ci_hi);
        } else {
            row.emplace_back(std::string("n/a"));
            row.emplace_back(std::string("n/a"));
            row.emplace_back(std::string("n/a"));
        }
        report.add_row(std::move(row));
    }
    return report;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"contention-resolution laboratory for L-bounded products"};
    app.require_subcommand(1);
    app.fallthrough();  // inheritable: lets --threads appear after a subcommand
    int threads = 0;
    app.add_option("--threads", threads, "worker thread bound (0 = auto)");

    std::string instance_path, system_path, out_path, alpha_text = "auto", scheme = "attenuate";
    std::string mode = "exact", format_text = "csv", l_range_text = "2";
    int L = 2, grid = 4000, K = 0, sub_trials = 10000, num_items = 6, num_batches = 4, max_batch = 3;
    bool tight = false;
    double eps = 0.1, tol = 1e-9;
    long long paths = 100000, trials = 0;
    std::uint64_t seed = default_seed();

    // generate
    auto* generate = app.add_subcommand("generate", "emit instances and planes");
    generate->require_subcommand(1);
    auto* gen_tight = generate->add_subcommand("tightness", "union-bound-tight plane instance");
    gen_tight->add_option("--L", L)->required();
    gen_tight->add_option("--eps", eps);
    gen_tight->add_option("--out", out_path);
    auto* gen_rand_order = generate->add_subcommand("random-order", "offline hardness plane instance");
    gen_rand_order->add_option("--L", L)->required();
    gen_rand_order->add_option("--out", out_path);
    auto* gen_plane = generate->add_subcommand("plane", "finite affine plane");
    gen_plane->add_option("--L", L)->required();
    gen_plane->add_option("--out", out_path);
    auto* gen_random = generate->add_subcommand("random", "seeded random instance");
    gen_random->add_option("--L", L)->required();
    gen_random->add_option("--items", num_items);
    gen_random->add_option("--batches", num_batches);
    gen_random->add_option("--max-batch-size", max_batch);
    gen_random->add_flag("--tight", tight);
    gen_random->add_option("--seed", seed);
    gen_random->add_option("--out", out_path);

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check instance invariants");
    validate_cmd->add_option("--instance", instance_path)->required();
    validate_cmd->add_option("--tol", tol);

    // lp
    auto* lp_cmd = app.add_subcommand("lp", "solve the fluid LP");
    lp_cmd->add_option("--instance", instance_path)->required();

    // guarantees
    auto* guarantees_cmd = app.add_subcommand("guarantees", "closed-form and root-found curves");
    guarantees_cmd->add_option("--L", l_range_text, "single L or range a..b");
    guarantees_cmd->add_option("--format", format_text);
    guarantees_cmd->add_option("--out", out_path);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run schemes");
    simulate->require_subcommand(1);
    auto* sim_ocrs = simulate->add_subcommand("ocrs", "exact-selection scheme");
    sim_ocrs->add_option("--instance", instance_path)->required();
    sim_ocrs->add_option("--alpha", alpha_text);
    sim_ocrs->add_option("--mode", mode)->check(CLI::IsMember({"exact", "mc"}));
    sim_ocrs->add_option("--eps", eps);
    sim_ocrs->add_option("--trials", trials, "override the sample-complexity K");
    sim_ocrs->add_option("--seed", seed);
    sim_ocrs->add_option("--out", out_path);
    auto* sim_rcrs = simulate->add_subcommand("rcrs", "random-order schemes");
    sim_rcrs->add_option("--scheme", scheme)->check(CLI::IsMember({"attenuate", "recursive", "greedy"}));
    sim_rcrs->add_option("--instance", instance_path)->required();
    sim_rcrs->add_option("--paths", paths);
    sim_rcrs->add_option("--K", K, "phase count (0 = auto)");
    sim_rcrs->add_option("--sub-trials", sub_trials);
    sim_rcrs->add_option("--grid", grid, "selection-function grid points");
    sim_rcrs->add_option("--seed", seed);
    sim_rcrs->add_option("--out", out_path);

    // selection-function
    auto* selection_cmd = app.add_subcommand("selection-function", "solve the acceptance-rate equation");
    selection_cmd->add_option("--L", L)->required();
    selection_cmd->add_option("--grid", grid);
    selection_cmd->add_option("--out", out_path);

    // reduce
    auto* reduce_cmd = app.add_subcommand("reduce", "preprocess a substitutable system");
    reduce_cmd->add_option("--system", system_path)->required();
    reduce_cmd->add_option("--out", out_path);

    // run-online
    auto* online_cmd = app.add_subcommand("run-online", "reduction pipeline end to end");
    online_cmd->add_option("--system", system_path)->required();
    online_cmd->add_option("--alpha", alpha_text);
    online_cmd->add_option("--paths", paths);
    online_cmd->add_option("--seed", seed);
    online_cmd->add_option("--out", out_path);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "reference computations");
    oracle->require_subcommand(1);
    auto* oracle_dp = oracle->add_subcommand("dp", "optimal online value");
    oracle_dp->add_option("--instance", instance_path)->required();
    auto* oracle_offline = oracle->add_subcommand("offline", "mean offline optimum");
    oracle_offline->add_option("--instance", instance_path)->required();
    oracle_offline->add_option("--paths", paths);
    oracle_offline->add_option("--seed", seed);
    auto* oracle_enum = oracle->add_subcommand("enumerate", "exhaustive acceptance probabilities");
    oracle_enum->add_option("--instance", instance_path)->required();
    oracle_enum->add_option("--alpha", alpha_text);
    oracle_enum->add_option("--out", out_path);

    // verify
    auto* verify = app.add_subcommand("verify", "statistical checks");
    verify->require_subcommand(1);
    auto* verify_sel = verify->add_subcommand("selectability", "simulated ratios must cover alpha");
    verify_sel->add_option("--instance", instance_path)->required();
    verify_sel->add_option("--alpha", alpha_text);
    verify_sel->add_option("--paths", paths);
    verify_sel->add_option("--seed", seed);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen_tight->parsed()) {
            deliver(out_path, save_instance(tightness_instance(L, eps)), out);
            return 0;
        }
        if (gen_rand_order->parsed()) {
            deliver(out_path, save_instance(random_order_instance(L)), out);
            return 0;
        }
        if (gen_plane->parsed()) {
            const AffinePlane plane = affine_plane(L);
            nlohmann::json doc;
            doc["order"] = plane.order;
            doc["points"] = plane.points;
            doc["classes"] = plane.classes;
            deliver(out_path, doc.dump(2) + "\n", out);
            return 0;
        }
        if (gen_random->parsed()) {
            deliver(out_path,
                    save_instance(random_instance(L, num_items, num_batches, max_batch, tight, seed)),
                    out);
            return 0;
        }
        if (validate_cmd->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            const ValidationReport report = validate(instance, tol);
            Report table;
            table.columns = {"constraint", "offender", "magnitude"};
            for (const auto& v : report.violations)
                table.add_row({v.constraint, v.offender, v.magnitude});
            out << (report.ok ? "ok\n" : "invalid\n") << emit_csv(table);
            return report.ok ? 0 : 1;
        }
        if (lp_cmd->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            const LpSolution solution = simplex_solve(fluid_lp(instance));
            const char* status = solution.status == LpStatus::optimal     ? "optimal"
                                 : solution.status == LpStatus::infeasible ? "infeasible"
                                                                           : "unbounded";
            out << "status," << status << "\n";
            out << "objective," << format_value(solution.objective) << "\n";
            Report table;
            table.columns = {"product_id", "x"};
            for (size_t j = 0; j < instance.products.size(); ++j)
                table.add_row({instance.products[j].id,
                               solution.status == LpStatus::optimal ? solution.values[j] : 0.0});
            out << emit_csv(table);
            return 0;
        }
        if (guarantees_cmd->parsed()) {
            const auto [lo, hi] = parse_l_range(l_range_text);
            Report table;
            table.columns = {"L",
                             "baseline",
                             "offline_ub",
                             "integrality_gap",
                             "poisson",
                             "standard_alpha",
                             "partite_alpha",
                             "rcrs_random_element_alpha",
                             "rcrs_standard_integral"};
            for (int l = lo; l <= hi; ++l) {
                const GuaranteeTable row = curve_values(l);
                table.add_row({static_cast<long long>(row.L), row.baseline, row.offline_ub,
                               row.integrality_gap, row.poisson, row.standard_alpha,
                               row.partite_alpha, row.rcrs_random_element_alpha,
                               row.rcrs_standard_integral});
            }
            deliver(out_path, emit_report(table, parse_format(format_text)), out);
            return 0;
        }
        if (sim_ocrs->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            if (mode == "exact") {
                const double alpha = resolve_alpha(alpha_text, instance.L);
                const AcceptanceProfile profile = exact_feasibility_probs(instance, alpha);
                deliver(out_path, emit_csv(profile_report(instance, profile, true)), out);
            } else {
                const auto [policy, profile] = simulate_ocrs_mc(instance, eps, seed, threads, trials);
                deliver(out_path, emit_csv(profile_report(instance, profile, true)), out);
            }
            return 0;
        }
        if (sim_rcrs->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            AcceptanceProfile profile;
            if (scheme == "recursive") {
                const SelectionFunction c = solve_selection_function(instance.L, grid);
                const int phases = K > 0 ? K : recommended_phase_count(c);
                profile = run_recursive_standard_rcrs(instance, c, phases, sub_trials, paths, seed,
                                                      threads);
            } else {
                const InstanceIndex probe(instance);
                const AttenuationContext ctx(probe);
                const bool attenuate = scheme == "attenuate";
                profile = estimate_selectability(
                    instance,
                    [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
                        const ArrivalOrder arrival = draw_arrival_order(ix.T, rng);
                        return attenuate ? run_attenuate_greedy(ix, ctx, realization, arrival, rng)
                                         : run_greedy_rcrs(ix, realization, arrival);
                    },
                    paths, seed, threads);
            }
            deliver(out_path, emit_csv(profile_report(instance, profile, false)), out);
            return 0;
        }
        if (selection_cmd->parsed()) {
            const SelectionFunction c = solve_selection_function(L, grid);
            Report table;
            table.columns = {"y", "c", "S"};
            for (size_t g = 0; g < c.grid.size(); ++g)
                table.add_row({c.grid[g], c.c_values[g], c.S_values[g]});
            deliver(out_path, emit_csv(table), out);
            return 0;
        }
        if (reduce_cmd->parsed()) {
            const SubstitutableSystem system = parse_system(read_file(system_path));
            const LpSolution lp = simplex_solve(build_relaxation_lp(system));
            const ReductionOutput reduction = preprocess(system, lp);
            nlohmann::json doc;
            doc["lp_value"] = lp.objective;
            doc["instance"] = nlohmann::json::parse(save_instance(reduction.instance));
            doc["dummy_counts"] = reduction.dummy_counts;
            doc["mapping"] = nlohmann::json::array();
            for (const auto& copy : reduction.mapping)
                doc["mapping"].push_back({{"copy_id", copy.copy_id},
                                          {"product_id", system.products[copy.original_product].id},
                                          {"period", copy.period},
                                          {"x", copy.x}});
            deliver(out_path, doc.dump(2) + "\n", out);
            return 0;
        }
        if (online_cmd->parsed()) {
            const SubstitutableSystem system = parse_system(read_file(system_path));
            const LpSolution lp = simplex_solve(build_relaxation_lp(system));
            const ReductionOutput reduction = preprocess(system, lp);
            const double alpha = resolve_alpha(alpha_text, reduction.instance.L);
            const OcrsPolicy policy = exact_policy(reduction.instance, alpha);
            const OnlineRunStats stats = online_algorithm(system, reduction, policy, paths, seed, threads);
            out << "lp_value," << format_value(lp.objective) << "\n";
            out << "alpha," << format_value(alpha) << "\n";
            out << "mean_reward," << format_value(stats.mean_reward) << "\n";
            out << "reward_over_lp," << format_value(stats.mean_reward / lp.objective) << "\n";
            Report table;
            table.columns = {"copy_id", "x", "sale_freq", "alpha_x"};
            for (size_t c = 0; c < reduction.mapping.size(); ++c)
                table.add_row({reduction.mapping[c].copy_id, reduction.mapping[c].x,
                               stats.sale_freq[c], alpha * reduction.mapping[c].x});
            deliver(out_path, emit_csv(table), out);
            return 0;
        }
        if (oracle_dp->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            const DpValue dp = optimal_online_dp(instance);
            const double lp = fluid_lp_value(instance);
            out << "dp_value," << format_value(dp.value) << "\n";
            out << "lp_value," << format_value(lp) << "\n";
            out << "ratio," << format_value(dp.value / lp) << "\n";
            return 0;
        }
        if (oracle_offline->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            const double mean = offline_optimum_mean(instance, paths, seed, threads);
            const double lp = fluid_lp_value(instance);
            out << "offline_mean," << format_value(mean) << "\n";
            out << "lp_value," << format_value(lp) << "\n";
            out << "ratio," << format_value(mean / lp) << "\n";
            return 0;
        }
        if (oracle_enum->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            const double alpha = resolve_alpha(alpha_text, instance.L);
            const OcrsPolicy policy = exact_policy(instance, alpha);
            const AcceptanceProfile profile = exhaustive_acceptance_probs(instance, policy);
            deliver(out_path, emit_csv(profile_report(instance, profile, true)), out);
            return 0;
        }
        if (verify_sel->parsed()) {
            const Instance instance = parse_instance(read_file(instance_path));
            const double alpha = resolve_alpha(alpha_text, instance.L);
            const OcrsPolicy policy = exact_policy(instance, alpha);
            const AcceptanceProfile profile = estimate_selectability(
                instance,
                [&](const InstanceIndex& ix, const Realization& realization, Rng& rng) {
                    return run_ocrs(ix, policy, realization, rng);
                },
                paths, seed, threads);
            out << emit_csv(profile_report(instance, profile, false));
            bool pass = true;
            for (const auto& stats : profile.per_product)
                if (stats.defined && (alpha < stats.ci_lo || alpha > stats.ci_hi)) pass = false;
            out << (pass ? "pass\n" : "fail\n");
            return pass ? 0 : 1;
        }
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "usage error: no subcommand\n";
    return 2;
}

}  // namespace crslab
