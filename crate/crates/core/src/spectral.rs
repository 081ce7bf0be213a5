//! Almost-flexes and almost-stresses from the singular value decomposition.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Framework, RANK_TOL};
use crate::linalg::{self, FullSvd};

pub const DEFAULT_SIGMA_CUTOFF: f64 = 1e-7;

/// Which singular vectors count as almost-flexes and almost-stresses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSelection {
    /// Every singular vector with singular value at most the cutoff.
    Cutoff(f64),
    /// A fixed number of the smallest right (flexes) and left (stresses) vectors.
    Smallest { flexes: usize, stresses: usize },
}

impl Default for SubspaceSelection {
    fn default() -> Self {
        SubspaceSelection::Cutoff(DEFAULT_SIGMA_CUTOFF)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// `dn x n_v`, orthonormal, inside `C`.
    pub v: DMatrix<f64>,
    /// `m x n_w`, orthonormal.
    pub w: DMatrix<f64>,
    /// Singular values of `R(p) C`, descending.
    pub singular_values: Vec<f64>,
    /// Smallest singular value of `R(p) C` above the rank cutoff.
    pub sigma0: Option<f64>,
}

impl SpectralDecomposition {
    pub fn n_v(&self) -> usize {
        self.v.ncols()
    }

    pub fn n_w(&self) -> usize {
        self.w.ncols()
    }

    /// The almost-stress basis vectors as owned columns.
    pub fn stresses(&self) -> Vec<DVector<f64>> {
        self.w.column_iter().map(|c| c.into_owned()).collect()
    }
}

fn select(svd_vectors: &DMatrix<f64>, values: impl Fn(usize) -> f64, pick: impl Fn(usize, f64) -> bool) -> DMatrix<f64> {
    let cols: Vec<usize> = (0..svd_vectors.ncols()).filter(|&j| pick(j, values(j))).collect();
    let mut out = DMatrix::zeros(svd_vectors.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &svd_vectors.column(src));
    }
    out
}

pub fn decompose(f: &Framework, c: &DMatrix<f64>, selection: SubspaceSelection) -> Result<SpectralDecomposition> {
    if c.nrows() != f.n_coords() {
        return Err(Error::DimensionMismatch {
            expected: f.n_coords(),
            found: c.nrows(),
        });
    }
    let r = f.rigidity_matrix(f.positions())?;
    let rc = &r * c;
    let svd_rc = linalg::full_svd(&rc);
    let svd_r = linalg::full_svd(&r);

    let k = c.ncols();
    let m = f.n_edges();
    let (v_local, w) = match selection {
        SubspaceSelection::Cutoff(cut) => (
            select(&svd_rc.v, |j| svd_rc.right_value(j), |_, s| s <= cut),
            select(&svd_r.u, |i| svd_r.left_value(i), |_, s| s <= cut),
        ),
        SubspaceSelection::Smallest { flexes, stresses } => {
            if flexes > k || stresses > m {
                return Err(Error::Precondition(format!(
                    "asked for {flexes} flexes and {stresses} stresses, have {k} and {m}"
                )));
            }
            (
                select(&svd_rc.v, |_| 0.0, |j, _| j >= k - flexes),
                select(&svd_r.u, |_| 0.0, |i, _| i >= m - stresses),
            )
        }
    };

    Ok(SpectralDecomposition {
        v: c * v_local,
        w,
        sigma0: smallest_nonzero(&svd_rc),
        singular_values: svd_rc.singular_values,
    })
}

fn smallest_nonzero(svd: &FullSvd) -> Option<f64> {
    let smax = svd.singular_values.first().copied()?;
    svd.singular_values
        .iter()
        .copied()
        .filter(|&s| s > RANK_TOL * smax)
        .reduce(f64::min)
}

/// Smallest singular value of `R(p) C` above the relative rank cutoff.
pub fn smallest_nonzero_singular(f: &Framework, c: &DMatrix<f64>) -> Result<f64> {
    let r = f.rigidity_matrix(f.positions())?;
    smallest_nonzero(&linalg::full_svd(&(r * c))).ok_or(Error::NoNonzeroSingularValue)
}
