//! Quasi-likelihood random fields, the likelihood-ratio field and its LAQ
//! decomposition, and the limit field.

mod continuous;
mod field;
mod laq;
mod limit;
mod lr;
mod theta_box;
mod volatility;

pub use continuous::{h_continuous, RegressionField};
pub use field::{FnField, QuadraticField, QuasiLikelihood};
pub use laq::{laq_decompose, LaqDecomp, LaqTerms};
pub use limit::{limit_field, limit_information, LimitField, LimitInformation};
pub use lr::{modulus_of_continuity, z_field, FieldEval, LikelihoodRatio, Rate};
pub use theta_box::{linspace, TensorGrid, ThetaBox};
pub use volatility::{h_volatility, VolatilityField};
