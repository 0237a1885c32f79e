//! Manufactured-solution study, error norms and the discrete inf-sup
//! constant.

pub mod convergence;
pub mod infsup;
pub mod manufactured;
pub mod norms;

pub use convergence::{
    convergence_study, convergence_study_with, ConvergenceReport, ConvergenceRow, RateRow, StudyMode,
};
pub use infsup::{infsup_dense, infsup_study, kernel_coercivity, InfSupReport, InfSupRow, KernelCoercivity};
pub use manufactured::{manufactured_case, verify_data_identity, DataIdentity, ManufacturedCase};
pub use norms::{error_norms, ErrorNorms};
