"""Online contention resolution schemes for L-bounded products.

Instances and substitutable systems cross the boundary as JSON documents in
the same schema the ``crslab`` CLI reads; see the project README.
"""

from ._core import (
    affine_plane,
    attenuation_b,
    clubsuit,
    curve_values,
    estimate_attenuate_greedy,
    estimate_ocrs_selectability,
    exact_feasibility_probs,
    exhaustive_acceptance_probs,
    fluid_lp_solution,
    fluid_lp_value,
    is_l_partite,
    kappa,
    mc_trial_count,
    offline_optimum_mean,
    optimal_online_dp_value,
    pair_lower_bound,
    partite_alpha_offset,
    partite_condition,
    random_instance,
    random_order_instance,
    reduce_system,
    run_cli,
    run_online,
    run_recursive_standard_rcrs,
    rcrs_random_element_guarantee,
    selection_function,
    simulate_ocrs_mc,
    solve_partite_alpha,
    solve_standard_alpha,
    standard_alpha_offset,
    tightness_instance,
    validate,
)

__all__ = [
    "affine_plane",
    "attenuation_b",
    "clubsuit",
    "curve_values",
    "estimate_attenuate_greedy",
    "estimate_ocrs_selectability",
    "exact_feasibility_probs",
    "exhaustive_acceptance_probs",
    "fluid_lp_solution",
    "fluid_lp_value",
    "is_l_partite",
    "kappa",
    "mc_trial_count",
    "offline_optimum_mean",
    "optimal_online_dp_value",
    "pair_lower_bound",
    "partite_alpha_offset",
    "partite_condition",
    "random_instance",
    "random_order_instance",
    "reduce_system",
    "run_cli",
    "run_online",
    "run_recursive_standard_rcrs",
    "rcrs_random_element_guarantee",
    "selection_function",
    "simulate_ocrs_mc",
    "solve_partite_alpha",
    "solve_standard_alpha",
    "standard_alpha_offset",
    "tightness_instance",
    "validate",
]
