//! Verifiers for the exponent conditions, moment orders, the conditional
//! Rosenthal bound, the PLD tail inequality and the localization indicator.

mod b1;
mod pld;
mod profile;
mod psi;
mod rosenthal;

pub use b1::{check_b1, moment_orders, B1Params, B1Report, B1Set, Constraint, MomentOrders};
pub use pld::{pld_log_threshold, pld_tail_mc, PldConfig, PldReport, PldRow};
pub use profile::{MixingProfile, ProfileSource};
pub use psi::{envelope_moment, psi_study, psi_truncation, write_psi_csv, zero_fraction, PsiConfig, PsiResult};
pub use rosenthal::{rosenthal_mc_check, rosenthal_rhs, write_rosenthal_csv, BlockFunctional, RosenthalConfig, RosenthalRow};
