//! Two-mode linear and f-deformed charge coherent states.
//!
//! States are simultaneous eigenvectors of the charge operator
//! `Q = a^dag a - b^dag b` and of `G = (A + B^dag)(A^dag + B)`, where
//! `A = a f(n_a)` and `B = b f(n_b)` are deformed ladder operators. They are
//! built on a truncated fixed-charge Fock ladder by forward recursion, checked
//! against a continued-fraction form, the linear closed form, a Hermite
//! reference and direct application of `G`, and characterized by photon
//! statistics and the Husimi function.

mod ddouble;
pub mod diagnostics;
pub mod error;
pub mod fock_math;
pub mod husimi;
pub mod nonlinearity;
pub mod state;

pub use diagnostics::{moments, Diagnostic, DiagnosticsReport, Mode, MomentSet, PhotonCount};
pub use error::{BuildError, HusimiError, NonlinearityError};
pub use husimi::{husimi_grid, husimi_norm_check, husimi_point, AxisRange, HusimiGrid};
pub use nonlinearity::Nonlinearity;
pub use state::{
    build_deformed, build_linear_closed, Branch, ChargeState, StateDocument, TruncationPolicy,
};
