//! Batch experiments: JSON configs, seeded trial runs, sample-complexity
//! sweeps and the CSV/JSON reports they produce.

mod audit;
mod config;
mod run;

pub use audit::{run_audit, write_audit_csv, AuditExperiment, AuditTarget, ProcedureBase};
pub use config::{
    build_learner, BuiltLearner, ClassRef, ExperimentConfig, LearnerSpec, OutputConfig, Sweep,
    SweepAxis, TargetSpec,
};
pub use run::{
    run_experiment, sample_complexity_curve, summary_table, write_curve_csv, write_outputs,
    write_trials_csv, Aggregate, CurveRow, TrialRecord, TrialReport, CURVE_SCHEMA, TRIALS_SCHEMA,
};
