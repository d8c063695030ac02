//! Scenario replay and counter reporting.

mod report;
mod run;
mod scenario;

pub use report::{ratio_summary, report, report_runs, to_csv, RatioSummary, Report, CSV_HEADER};
pub use run::{run_scenario, CheckRecord, Mode, RunError, RunOptions, RunResult, StepRecord, ORACLE_PRODUCT_LIMIT};
pub use scenario::{adoption_sweep, generate_random_scenario, parse_scenario, Scenario, ScenarioError, Step};
