//! Dataset evaluation: manifests, dataset adapters, geometric perturbation
//! sweeps, correlation statistics and report files.

pub mod adapters;
pub mod config;
pub mod evaluate;
pub mod logistic;
pub mod manifest;
pub mod report;
pub mod stats;
pub mod synthetic;

pub use adapters::{adapt_pipal, adapt_tid2013};
pub use config::{Perturbation, PerturbationParams, ReportFormat, RunConfig};
pub use evaluate::{evaluate, evaluate_with, run};
pub use logistic::{fit_logistic4, Logistic4};
pub use manifest::{load_manifest, write_manifest, EvalSample, Manifest, MosConvention};
pub use report::{emit_report, load_report, render_report, CorrelationReport};
pub use stats::{kendall_tau_b, pearson, spearman};
