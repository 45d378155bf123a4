//! Monte Carlo risk engine, grid quadrature oracle, dominance scans and
//! importance sampling of the dual laws.

pub mod dominance;
pub mod dual;
pub mod engine;
pub mod oracle;
pub mod unbiased;

pub use dominance::{dominance_scan, standard_mu_grid, DominanceReport, Verdict};
pub use dual::{importance_sample_dual, DualSample, DualVariant};
pub use engine::{mc_risk, mc_risk_paired, Model, PairedEstimate, RiskEstimate, CHUNK};
pub use oracle::quadrature_loss_oracle;
pub use unbiased::{unbiasedness_check, UnbiasednessReport};
