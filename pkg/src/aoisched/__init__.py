"""Broadcast scheduling for timely updates under an age/energy trade-off.

The package provides exact domain arithmetic (ages, channels, costs), an
online fractional covering/packing machine with feasibility and ratio
certificates, randomized and greedy schedulers, an exact offline oracle,
channel generators, and a reproducible experiment harness with a CLI.
"""

from ._version import __version__
from .channels import (
    ADVERSARIAL_FAMILIES,
    MarkovChannelSpec,
    gen_adversarial,
    gen_markov,
    load_markov_spec,
    save_markov_spec,
)
from .errors import CapacityError, ConfigurationError
from .harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    run_experiment,
    sample_instance,
    simulate_run,
    verify_suite,
    write_rows_csv,
)
from .model import (
    AgeState,
    ChannelPattern,
    CostSchedule,
    RunResult,
    advance_age,
    decode_indicator,
    k_star,
    k_star_all,
    load_pattern,
    resolve_ages,
    save_pattern,
    total_cost,
)
from .oracle import OptResult, dual_lower_bound, solve_opt_dp
from .primal_dual import (
    FeasibilityReport,
    PdObjectives,
    PdState,
    check_dual_feasible,
    check_primal_feasible,
    compute_theta,
    dual_objective,
    dump_trace_jsonl,
    new_pd_state,
    pd_step,
    pd_step_slot,
    primal_objective,
    run_primal_dual,
    trigger_load,
)
from .schedulers import (
    SCHEDULER_NAMES,
    ChannelAgnosticScheduler,
    Greedy1Scheduler,
    Greedy2Scheduler,
    OnlineScheduler,
    RoundingState,
    agnostic_step,
    broadcast_run_costs,
    greedy1_step,
    greedy2_step,
    make_scheduler,
    new_rounding_state,
    online_step,
    rounding_transmit_masks,
)

__all__ = [
    "__version__",
    "ADVERSARIAL_FAMILIES",
    "AgeState",
    "CapacityError",
    "ChannelAgnosticScheduler",
    "ChannelPattern",
    "ConfigurationError",
    "CostSchedule",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "FeasibilityReport",
    "Greedy1Scheduler",
    "Greedy2Scheduler",
    "MarkovChannelSpec",
    "OnlineScheduler",
    "OptResult",
    "PdObjectives",
    "PdState",
    "RoundingState",
    "RunResult",
    "SCHEDULER_NAMES",
    "advance_age",
    "agnostic_step",
    "broadcast_run_costs",
    "check_dual_feasible",
    "check_primal_feasible",
    "compute_theta",
    "decode_indicator",
    "dual_lower_bound",
    "dual_objective",
    "dump_trace_jsonl",
    "gen_adversarial",
    "gen_markov",
    "greedy1_step",
    "greedy2_step",
    "k_star",
    "k_star_all",
    "load_markov_spec",
    "load_pattern",
    "make_scheduler",
    "new_pd_state",
    "new_rounding_state",
    "online_step",
    "pd_step",
    "pd_step_slot",
    "primal_objective",
    "resolve_ages",
    "run_experiment",
    "run_primal_dual",
    "sample_instance",
    "save_markov_spec",
    "save_pattern",
    "simulate_run",
    "solve_opt_dp",
    "total_cost",
    "trigger_load",
    "verify_suite",
    "write_rows_csv",
]
