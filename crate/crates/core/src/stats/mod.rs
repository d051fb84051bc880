//! Distribution tests and feature-importance rankings.

mod importance;
mod ks;

pub use importance::{
    gain_importance, permutation_importance, write_importance_csv, ImportanceKind, ImportanceReport,
};
pub use ks::{kolmogorov_sf, ks_table, ks_two_sample, write_ks_csv, GroupBy, KsResult, KsRow};
