//! Frameworks and the linear maps built from them.
//!
//! Configurations are flat vectors of length `d * n` in vertex-major order:
//! coordinate `a` of vertex `i` lives at index `d * i + a`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative singular-value cutoff used for rank decisions on bases.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Strut,
    Bar,
    Cable,
}

impl EdgeLabel {
    /// Sign used in the tensegrity constraint: cables carry positive stress.
    pub fn sign(self) -> f64 {
        match self {
            EdgeLabel::Strut => -1.0,
            EdgeLabel::Bar => 0.0,
            EdgeLabel::Cable => 1.0,
        }
    }

    pub fn from_sign(s: i64) -> Option<Self> {
        match s {
            -1 => Some(EdgeLabel::Strut),
            0 => Some(EdgeLabel::Bar),
            1 => Some(EdgeLabel::Cable),
            _ => None,
        }
    }
}

/// A bar framework `(G, p)` with optional tensegrity labels and pinned coordinates.
///
/// Indices are 0-based in memory; the JSON form in [`crate::corpus`] is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    dim: usize,
    positions: DVector<f64>,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<EdgeLabel>>,
    pinned: Option<Vec<usize>>,
}

impl Framework {
    pub fn new(dim: usize, vertices: &[Vec<f64>], edges: Vec<(usize, usize)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFramework("dimension must be at least 1".into()));
        }
        let mut positions = Vec::with_capacity(dim * vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::InvalidFramework(format!(
                    "vertex {} has {} coordinates, expected {dim}",
                    i + 1,
                    v.len()
                )));
            }
            positions.extend_from_slice(v);
        }
        Self::from_flat(dim, DVector::from_vec(positions), edges)
    }

    pub fn from_flat(dim: usize, positions: DVector<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let f = Framework {
            dim,
            positions,
            edges,
            labels: None,
            pinned: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_labels(mut self, labels: Vec<EdgeLabel>) -> Result<Self> {
        if labels.len() != self.edges.len() {
            return Err(Error::InvalidFramework(format!(
                "{} labels for {} edges",
                labels.len(),
                self.edges.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_pinned(mut self, pinned: Vec<usize>) -> Result<Self> {
        let dn = self.positions.len();
        if let Some(&bad) = pinned.iter().find(|&&c| c >= dn) {
            return Err(Error::InvalidFramework(format!(
                "pinned coordinate {} out of range 1..={dn}",
                bad + 1
            )));
        }
        self.pinned = Some(pinned);
        Ok(self)
    }

    /// Same graph, labels and pins at a new configuration.
    pub fn with_positions(&self, q: DVector<f64>) -> Result<Self> {
        if q.len() != self.positions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.positions.len(),
                found: q.len(),
            });
        }
        let mut f = self.clone();
        f.positions = q;
        f.validate()?;
        Ok(f)
    }

    /// Drop the listed edges (0-based), keeping labels aligned.
    pub fn without_edges(&self, drop: &[usize]) -> Result<Self> {
        let drop: HashSet<usize> = drop.iter().copied().collect();
        let keep: Vec<usize> = (0..self.edges.len()).filter(|k| !drop.contains(k)).collect();
        let mut f = self.clone();
        f.edges = keep.iter().map(|&k| self.edges[k]).collect();
        f.labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|&k| l[k]).collect());
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidFramework("dimension must be at least 1".into()));
        }
        if !self.positions.len().is_multiple_of(self.dim) {
            return Err(Error::InvalidFramework(format!(
                "configuration length {} is not a multiple of d = {}",
                self.positions.len(),
                self.dim
            )));
        }
        if let Some(k) = self.positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidFramework(format!(
                "vertex {} has a non-finite coordinate",
                k / self.dim + 1
            )));
        }
        let n = self.n_vertices();
        let mut seen = HashSet::new();
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            if i >= j || j >= n {
                return Err(Error::InvalidFramework(format!(
                    "edge {} = ({}, {}) must satisfy 1 <= i < j <= {n}",
                    k + 1,
                    i + 1,
                    j + 1
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidFramework(format!(
                    "edge {} = ({}, {}) is repeated",
                    k + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Total number of coordinates, `d * n`.
    pub fn n_coords(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &DVector<f64> {
        &self.positions
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[EdgeLabel]> {
        self.labels.as_deref()
    }

    pub fn pinned(&self) -> Option<&[usize]> {
        self.pinned.as_deref()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.positions.as_slice()[self.dim * i..self.dim * (i + 1)]
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        (0..self.n_vertices()).map(|i| self.vertex(i).to_vec()).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices()];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Maximum vertex degree `z`.
    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    fn check_len(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.n_coords() {
            return Err(Error::DimensionMismatch {
                expected: self.n_coords(),
                found: q.len(),
            });
        }
        Ok(())
    }

    /// Squared edge lengths `|q_i - q_j|^2`, one per edge.
    pub fn edge_vector(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(q)?;
        let d = self.dim;
        Ok(DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().map(|&(i, j)| {
                (0..d)
                    .map(|a| {
                        let t = q[d * i + a] - q[d * j + a];
                        t * t
                    })
                    .sum::<f64>()
            }),
        ))
    }

    /// Edge lengths at the framework's own configuration.
    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edge_vector(&self.positions)
            .expect("own configuration")
            .iter()
            .map(|x| x.sqrt())
            .collect()
    }

    /// The `m x dn` rigidity matrix at `q`.
    ///
    /// Row `k` for edge `(i, j)` holds `q_i - q_j` in vertex `i`'s columns and
    /// `q_j - q_i` in vertex `j`'s. Passing a displacement `v` gives `R(v)`.
    pub fn rigidity_matrix(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(q)?;
        let d = self.dim;
        let mut r = DMatrix::zeros(self.edges.len(), self.n_coords());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            for a in 0..d {
                let t = q[d * i + a] - q[d * j + a];
                r[(k, d * i + a)] = t;
                r[(k, d * j + a)] = -t;
            }
        }
        Ok(r)
    }

    /// The `dn x dn` stress matrix with `u^T Omega v = sum w_ij (u_i - u_j).(v_i - v_j)`.
    pub fn stress_matrix(&self, omega: &DVector<f64>) -> Result<DMatrix<f64>> {
        if omega.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                found: omega.len(),
            });
        }
        let d = self.dim;
        let mut s = DMatrix::zeros(self.n_coords(), self.n_coords());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            let w = omega[k];
            for a in 0..d {
                let (ia, ja) = (d * i + a, d * j + a);
                s[(ia, ia)] += w;
                s[(ja, ja)] += w;
                s[(ia, ja)] -= w;
                s[(ja, ia)] -= w;
            }
        }
        Ok(s)
    }

    /// Translations and infinitesimal rotations at `q`, orthonormalized.
    pub fn trivial_space(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(q)?;
        let d = self.dim;
        let n = self.n_vertices();
        let count = d + d * (d - 1) / 2;
        let mut gens = DMatrix::zeros(d * n, count);
        for a in 0..d {
            for i in 0..n {
                gens[(d * i + a, a)] = 1.0;
            }
        }
        let mut col = d;
        for a in 0..d {
            for b in (a + 1)..d {
                for i in 0..n {
                    gens[(d * i + a, col)] = -q[d * i + b];
                    gens[(d * i + b, col)] = q[d * i + a];
                }
                col += 1;
            }
        }
        Ok(linalg::orthonormal_basis(&gens, RANK_TOL))
    }

    /// Norm of `q` after subtracting its centroid.
    pub fn centered_norm(&self, q: &DVector<f64>) -> f64 {
        center(q, self.dim).norm()
    }
}

/// How the complement `C` of the trivial space is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComplementMode {
    /// `C = T^perp`.
    Orthogonal,
    /// `C` spanned by the unit vectors of the coordinates that are not pinned
    /// (0-based coordinate indices).
    Pinned(Vec<usize>),
}

/// Orthonormal basis of a complement `C` to the trivial space `t`.
pub fn complement_space(t: &DMatrix<f64>, mode: &ComplementMode) -> Result<DMatrix<f64>> {
    let dn = t.nrows();
    match mode {
        ComplementMode::Orthogonal => Ok(linalg::orthonormal_complement(t)),
        ComplementMode::Pinned(pins) => {
            let pinned: HashSet<usize> = pins.iter().copied().collect();
            if let Some(&bad) = pins.iter().find(|&&c| c >= dn) {
                return Err(Error::Precondition(format!(
                    "pinned coordinate {} out of range 1..={dn}",
                    bad + 1
                )));
            }
            let free: Vec<usize> = (0..dn).filter(|c| !pinned.contains(c)).collect();
            let mut c = DMatrix::zeros(dn, free.len());
            for (col, &coord) in free.iter().enumerate() {
                c[(coord, col)] = 1.0;
            }
            let mut joined = DMatrix::zeros(dn, c.ncols() + t.ncols());
            joined.columns_mut(0, c.ncols()).copy_from(&c);
            joined.columns_mut(c.ncols(), t.ncols()).copy_from(t);
            let rank = linalg::rank(&joined, RANK_TOL);
            if c.ncols() + t.ncols() != dn || rank != dn {
                return Err(Error::NotComplementary { rank, needed: dn });
            }
            Ok(c)
        }
    }
}

/// Subtract the centroid of a configuration.
pub fn center(q: &DVector<f64>, dim: usize) -> DVector<f64> {
    let n = q.len() / dim;
    let mut out = q.clone();
    if n == 0 {
        return out;
    }
    for a in 0..dim {
        let mean = (0..n).map(|i| q[dim * i + a]).sum::<f64>() / n as f64;
        for i in 0..n {
            out[dim * i + a] -= mean;
        }
    }
    out
}

/// Map `moving` onto `reference` by the proper rigid motion minimizing the
/// configuration distance. Reflections are not allowed.
pub fn kabsch_align(reference: &DVector<f64>, moving: &DVector<f64>, dim: usize) -> Result<DVector<f64>> {
    if reference.len() != moving.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: moving.len(),
        });
    }
    if dim == 0 || !reference.len().is_multiple_of(dim) {
        return Err(Error::Precondition(format!(
            "configuration length {} is not a multiple of d = {dim}",
            reference.len()
        )));
    }
    let n = reference.len() / dim;
    let a = center(reference, dim);
    let b = center(moving, dim);
    let offset = reference - &a;

    let am = DMatrix::from_row_slice(n, dim, a.as_slice());
    let bm = DMatrix::from_row_slice(n, dim, b.as_slice());
    let h = bm.transpose() * &am;
    let svd = linalg::full_svd(&h);
    let mut correction = DMatrix::<f64>::identity(dim, dim);
    if (&svd.v * svd.u.transpose()).determinant() < 0.0 {
        correction[(dim - 1, dim - 1)] = -1.0;
    }
    let rot = &svd.v * correction * svd.u.transpose();
    let rotated = bm * rot.transpose();

    let mut out = DVector::zeros(reference.len());
    for i in 0..n {
        for c in 0..dim {
            out[dim * i + c] = rotated[(i, c)] + offset[dim * i + c];
        }
    }
    Ok(out)
}

/// Minimum of `|qa - g(qb)|` over proper rotations and translations `g`.
pub fn kabsch_distance(qa: &DVector<f64>, qb: &DVector<f64>, dim: usize) -> Result<f64> {
    let aligned = kabsch_align(qa, qb, dim)?;
    Ok((qa - aligned).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Framework {
        Framework::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_edges() {
        let v = [vec![0.0], vec![1.0]];
        assert!(Framework::new(1, &v, vec![(1, 0)]).is_err());
        assert!(Framework::new(1, &v, vec![(0, 2)]).is_err());
        assert!(Framework::new(1, &v, vec![(0, 1), (0, 1)]).is_err());
        assert!(Framework::new(2, &v, vec![(0, 1)]).is_err());
    }

    #[test]
    fn single_edge_rigidity_matrix() {
        let f = Framework::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0]], vec![(0, 1)]).unwrap();
        let r = f.rigidity_matrix(f.positions()).unwrap();
        assert_eq!(r.as_slice(), &[-1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn rigidity_matrix_is_half_jacobian_of_edge_vector() {
        let f = square();
        let p = f.positions().clone();
        let v = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.5, -0.4, 0.2, 0.7, -0.1]);
        let h = 1e-6;
        let fd = (f.edge_vector(&(&p + &v * h)).unwrap() - f.edge_vector(&(&p - &v * h)).unwrap())
            / (2.0 * h);
        let exact = f.rigidity_matrix(&p).unwrap() * &v * 2.0;
        assert!((fd - exact).norm() < 1e-8);
    }

    #[test]
    fn stress_matrix_quadratic_form() {
        let f = square();
        let w = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, -1.5]);
        let om = f.stress_matrix(&w).unwrap();
        let u = DVector::from_vec(vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8]);
        let direct: f64 = f
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| {
                let dx = u[2 * i] - u[2 * j];
                let dy = u[2 * i + 1] - u[2 * j + 1];
                w[k] * (dx * dx + dy * dy)
            })
            .sum();
        assert!((u.dot(&(om * &u)) - direct).abs() < 1e-14);
    }

    #[test]
    fn trivial_space_dimensions() {
        let f = square();
        assert_eq!(f.trivial_space(f.positions()).unwrap().ncols(), 3);
        let line = Framework::new(
            3,
            &[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]],
            vec![(0, 1), (1, 2)],
        )
        .unwrap();
        assert_eq!(line.trivial_space(line.positions()).unwrap().ncols(), 5);
        let r = line.rigidity_matrix(line.positions()).unwrap();
        let t = line.trivial_space(line.positions()).unwrap();
        assert!((r * t).abs().max() < 1e-14);
    }

    #[test]
    fn orthogonal_complement_dimension() {
        let f = square();
        let t = f.trivial_space(f.positions()).unwrap();
        let c = complement_space(&t, &ComplementMode::Orthogonal).unwrap();
        assert_eq!(c.ncols(), 5);
        assert!((t.transpose() * c).abs().max() < 1e-14);
    }

    #[test]
    fn pinned_complement_requires_rotation_to_be_fixed() {
        let f = Framework::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 1.0],
                vec![0.5, 0.5],
                vec![1.0 / 3.0, 0.0],
                vec![2.0 / 3.0, 0.0],
            ],
            vec![(0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (0, 4), (1, 5), (4, 5)],
        )
        .unwrap();
        let t = f.trivial_space(f.positions()).unwrap();
        // Vertex 1 and the x coordinate of vertex 4 (which sits above it).
        let c = complement_space(&t, &ComplementMode::Pinned(vec![0, 1, 6])).unwrap();
        assert_eq!(c.ncols(), 9);
        // Vertex 1 and the x coordinate of vertex 2 leave the rotation about vertex 1.
        let err = complement_space(&t, &ComplementMode::Pinned(vec![0, 1, 2])).unwrap_err();
        assert!(err.to_string().contains("C not complementary to T"));
    }

    #[test]
    fn kabsch_square_embeddings() {
        let f = square();
        let p = f.positions().clone();
        let fold = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let reflect = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0, 1.0, -1.0, 0.0, -1.0]);
        assert!((kabsch_distance(&p, &fold, 2).unwrap() - 1.5f64.sqrt()).abs() < 1e-12);
        assert!((kabsch_distance(&p, &reflect, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kabsch_recovers_rigid_motion() {
        let p = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.3, 0.4, 1.0]);
        let (c, s) = (0.6f64, 0.8f64);
        let mut q = DVector::zeros(12);
        for i in 0..4 {
            let (x, y, z) = (p[3 * i], p[3 * i + 1], p[3 * i + 2]);
            q[3 * i] = c * x - s * y + 1.0;
            q[3 * i + 1] = s * x + c * y - 2.0;
            q[3 * i + 2] = z + 0.5;
        }
        assert!(kabsch_distance(&p, &q, 3).unwrap() < 1e-12);
    }
}
