//! Figure data, asymptotics reports and the verification suite.

pub mod asymptotics;
pub mod criteria;
pub mod figure;
pub mod suite;

pub use asymptotics::{asymptotics_report, AsymptoticsReport, Trend, Window};
pub use criteria::{run_criteria, CriterionOutcome};
pub use figure::{figure_pipeline, write_csv, FigureData, FigureRow};
pub use suite::{run_suite, Profile, SuiteOptions, SuiteSummary};
