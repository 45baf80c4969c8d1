//! Dependent triangular arrays: marginal laws, joint tables, samplers and
//! END certification.

mod certify;
mod domination;
mod joint;
mod marginal;
mod model;

pub use certify::{
    certify_end_row, certify_end_row_with, certify_fgm_discretization, CertMode, CertStatus, CertifyOptions,
    EndCertificate,
};
pub use domination::{check_stochastic_domination, check_weak_mean_domination, DominationOutcome};
pub use joint::{parse_joint_tables, JointTable, DEFAULT_ATOM_BUDGET};
pub use marginal::MarginalSpec;
pub use model::{
    fgm_conditional_inverse, Dependence, DominatingSequence, GaussianRow, GaussianStructure, MarginalLayout,
    TriangularArrayModel, Weights,
};
