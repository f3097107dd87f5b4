//! Local-model randomizers: PrivUnit and the semi-local mean built on it.

pub mod beta;
pub mod privunit;

pub use beta::{cap_fraction, incomplete_beta, sphere_inner_product_density};
pub use privunit::{
    privunit_audit, privunit_mse, privunit_randomize, select_privunit_params, semi_privunit_mean, AuditReport, PrivUnitConfig,
};
