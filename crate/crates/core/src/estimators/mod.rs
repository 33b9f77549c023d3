//! QMLE and QBE from a quasi-likelihood field, standardization, and
//! closed-form oracles for the reference models.

mod oracle;
mod prior;
mod qbe;
mod qmle;
mod record;

pub use oracle::{qmle_linear_oracle, qmle_vol_oracle};
pub use prior::Prior;
pub use qbe::{qbe, QbeOptions};
pub use qmle::{qmle, QmleOptions};
pub use record::{standardize, EstimateRecord, EstimatorKind};
