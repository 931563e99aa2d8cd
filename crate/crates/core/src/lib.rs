//! Finite-truncation constructions for Uq(sl2-hat) oscillator modules,
//! their L-operators and R-matrices, defect transfer matrices, and the
//! sine-Gordon defect scattering matrices, together with numerical checks
//! of the identities they satisfy.

pub mod defect;
pub mod error;
pub mod fusion;
pub mod intertwiners;
pub mod lattice;
pub mod linalg;
pub mod report;
pub mod repr;
pub mod sampling;
pub mod sine_gordon;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{interior_residual, Atom, Factor, LabeledSpace, LinearOperator, Matrix, Residual, Spin, C64};
pub use report::{Check, ReportLine, VerificationReport};
pub use repr::{ReprParams, TruncationSpec};

/// Values closer to zero than this are treated as exact zeros of a
/// denominator.
pub const POLE_EPS: f64 = 1e-12;

pub(crate) fn nonzero(what: &'static str, v: C64) -> Result<C64> {
    if v.norm() < POLE_EPS {
        Err(Error::Pole { what, value: v.norm() })
    } else {
        Ok(v)
    }
}

/// q-integer `[m] = (q^m - q^-m)/(q - q^-1)`.
pub fn qint(m: i32, q: C64) -> C64 {
    (q.powi(m) - q.powi(-m)) / (q - q.inv())
}
