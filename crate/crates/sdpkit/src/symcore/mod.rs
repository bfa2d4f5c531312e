//! Dense symmetric-matrix kernel: decompositions, PSD tests and structural
//! transforms used by every other module.

mod eigen;
mod factor;
mod matrix;

pub use eigen::{
    eig_decompose, frobenius_norm, gershgorin_interval, psd_check, rank_of, EigenDecomp,
    PsdVerdict, DEFAULT_TOL,
};
pub use factor::{
    all_principal_minors_nonneg, chol_pd, chol_psd, det, gram_factor, gram_schmidt_qr,
    principal_sqrt, schur_complement, sylvester_pd, CholFactor, GramMethod,
};
pub use matrix::{dot, norm2, parse_matrix_text, write_matrix_text, Mat, SymMatrix};

pub(crate) use factor::chol_solve;
pub(crate) use matrix::fmt_f64;
