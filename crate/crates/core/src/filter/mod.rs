//! Edge-aware weighted guided filtering and base/detail decomposition.
//!
//! The filter fits a per-window linear model of the guidance image with an
//! edge-aware ridge penalty, then blends the per-window coefficients with
//! weights driven by each window's fit residual. Windowed sums run on
//! integral tables, so the cost is linear in pixel count and independent of
//! the window radius.

mod decompose;
mod error;
mod iwgif;
mod oracle;
mod params;

pub use decompose::{decode_high, decompose, decompose_luma_guided, encode_high, Decomposition};
pub use error::{FilterError, OracleTooLarge};
pub use iwgif::{
    aggregation_weight, edge_aware_weight, fit_linear_coefficients, iwgif_filter, residual_energy,
    CoefficientField,
};
pub use oracle::{naive_iwgif_oracle, ORACLE_SIDE_LIMIT};
pub use params::FilterParams;
