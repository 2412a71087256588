//! One-point-per-cube configurations avoiding a constraint, their margin
//! certificates, exhaustive verification and typical-set approximants.

mod certificate;
mod constraint;
mod generate;
mod margin;
mod scan;
mod stats;
mod typical;

pub use certificate::{verify_certificate, AvoidanceCertificate, VerifyReport};
pub use constraint::{AngleSpec, Constraint};
pub use generate::{default_tau, generate, GenerateConfig, RESOLUTION_BITS};
pub use margin::{
    check_c1, compute_margin, gap_shift_bound, perturbation_trials, MarginOptions, MarginReport, MarginTerm,
    TrialReport, MARGIN_SAFETY,
};
pub use scan::{binomial, find_violation, scan, ScanOptions, ScanReport, Violation};
pub use stats::{completion_statistics, CompletionStats};
pub use typical::{sample_typical, stage_radius, TypicalSample};
