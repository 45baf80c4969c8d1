//! Monte Carlo experiments on sampled arrays: tail estimates, bound
//! validity sweeps and finite-horizon convergence diagnostics.

mod diagnostics;
mod engine;
mod exact;
mod plan;
mod presets;
mod report;
mod sweep;
mod truncate;

pub use diagnostics::{
    complete_convergence_diagnostic, convergence_rows, poisson_log_slope, strong_law_path_diagnostic, trailing_rows,
    ConvergenceRow, TrailingRow, MIN_SCHEDULE_POINTS, SLOPE_THRESHOLD,
};
pub use engine::{
    centered_summand_laws, estimate_tail, nearest_rank, normalized_row_sum, Engine, MonteCarloEstimate, SimulationRun,
};
pub use exact::{DiscreteSumLaw, MAX_SUM_ATOMS};
pub use plan::{dyadic_schedule, BoundKind, Center, ExperimentPlan, Semantics, MIN_REPLICATIONS};
pub use presets::{
    corollary1, corollary1_scheme, preset, theorem2, theorem2_scheme, CheckTarget, Preset, PRESET_EPSILONS,
};
pub use report::{run_plan, SimulationReport, TailRow, CONVERGENCE_HEADER, TAILS_HEADER, TRAILING_HEADER};
pub use sweep::{bound_validity_sweep, MSource, SweepMode, SweepRow};
pub use truncate::{truncate_split, TruncationSplit};
