//! Parameter sweeps, CSV records and log-log slope fits.

pub mod fit;
pub mod records;
pub mod sweeps;

pub use fit::{aggregate, fit_loglog_slope, Curve, CurveKey, SlopeFit, XAxis, DEFAULT_FLOOR};
pub use records::{read_csv, read_csv_from, sort_records, write_csv, write_csv_to, ErrorKind, Protocol, SweepRecord, CSV_HEADER};
pub use sweeps::{
    logspace, run_fig1_sweep, run_fig2_sweep, run_hahn_sweep, Fig1Axis, Fig1Config, Fig1Protocol, Fig2Axis,
    Fig2Config, HahnConfig, Precision,
};
