//! End-to-end approximation runs: classification, modulation, the opening →
//! smoothing → thickening → projection chain, extension and shrinking, and studies.

pub mod classify;
pub mod config;
pub mod modulation;
pub mod nontrivial;
pub mod report;
pub mod smooth;
pub mod study;

pub use classify::{classify_cubes, CubeClassification};
pub use config::{Auto, Mode, PipelineConfig};
pub use nontrivial::{approximate_nontrivial, NontrivialRun};
pub use report::{PipelineReport, ReportRow};
pub use smooth::{approximate_smooth, demo_obstruction, mollify_and_project, smooth_from_rclass};
pub use study::{approximate_once, convergence_study};
