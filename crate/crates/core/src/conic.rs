//! Small semidefinite programs: the prestress-stability stress search, the
//! tensegrity variants, and the minimal spring constant `kappa`.
//!
//! The stress searches are all instances of
//!
//! ```text
//! maximize u  subject to  sum_i a_i M_i - u I >= 0,  G a - u 1 >= 0,  |a| <= 1
//! ```
//!
//! and are solved with a primal log-barrier method (Newton centering, barrier
//! weight increased geometrically). The problems have at most a few dozen
//! variables so dense Newton steps are cheap.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, Framework, RANK_TOL};
use crate::linalg;
use crate::spectral::SpectralDecomposition;

/// Relative tolerance on `t_opt` (scaled by the largest `|M_i|`) for success.
pub const SUCCESS_TOL: f64 = 1e-9;
/// Relative bisection tolerance for `kappa`.
pub const KAPPA_TOL: f64 = 1e-8;
const KAPPA_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    PositiveDefinite,
    Failed,
    Vacuous,
    NoStress,
}

/// How the stress coefficients were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    None,
    SingleStressEigen,
    SingleFlexNorm,
    Barrier,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StressCertificate {
    pub status: CertificateStatus,
    pub method: CertificateMethod,
    pub omega: Vec<f64>,
    pub a: Vec<f64>,
    pub lambda0: f64,
    /// Minimum eigenvalue of `C^T Omega(omega) C`.
    pub mu0: f64,
}

impl StressCertificate {
    pub fn is_success(&self) -> bool {
        self.status == CertificateStatus::PositiveDefinite
    }

    pub fn omega_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.omega)
    }

    fn trivial(status: CertificateStatus, m: usize) -> Self {
        StressCertificate {
            status,
            method: CertificateMethod::None,
            omega: vec![0.0; m],
            a: Vec::new(),
            lambda0: 0.0,
            mu0: 0.0,
        }
    }
}

/// `M_i = sym(V^T Omega(w_i) V)` for each almost-stress `w_i`.
pub fn stress_blocks(f: &Framework, sd: &SpectralDecomposition) -> Result<Vec<DMatrix<f64>>> {
    sd.stresses()
        .iter()
        .map(|w| {
            let om = f.stress_matrix(w)?;
            Ok(linalg::symmetrize(&(sd.v.transpose() * om * &sd.v)))
        })
        .collect()
}

fn combine(ms: &[DMatrix<f64>], a: &DVector<f64>) -> DMatrix<f64> {
    let n = ms.first().map_or(0, |m| m.nrows());
    ms.iter()
        .zip(a.iter())
        .fold(DMatrix::zeros(n, n), |acc, (m, &ai)| acc + m * ai)
}

fn scale_of(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(linalg::max_abs_eigenvalue).fold(0.0, f64::max)
}

/// Search for a stress making `Omega` positive definite on the almost-flexes.
pub fn pss_stress_search(f: &Framework, c: &DMatrix<f64>, sd: &SpectralDecomposition) -> Result<StressCertificate> {
    let m = f.n_edges();
    if sd.n_v() == 0 {
        return Ok(StressCertificate::trivial(CertificateStatus::Vacuous, m));
    }
    if sd.n_w() == 0 {
        return Ok(StressCertificate::trivial(CertificateStatus::NoStress, m));
    }
    let ms = stress_blocks(f, sd)?;
    let tol = SUCCESS_TOL * scale_of(&ms);

    let (a, method) = if sd.n_w() == 1 {
        let lo = linalg::min_eigenvalue(&ms[0]);
        let hi = -linalg::min_eigenvalue(&(-&ms[0]));
        // lambda_min(M) = lo and lambda_min(-M) = -hi; keep the better sign.
        let sign = if lo >= -hi { 1.0 } else { -1.0 };
        (DVector::from_element(1, sign), CertificateMethod::SingleStressEigen)
    } else if sd.n_v() == 1 {
        // Scalars: lambda_min(sum a_i M_i) = a . M, maximized at a = M / |M|.
        let mv = DVector::from_iterator(ms.len(), ms.iter().map(|mi| mi[(0, 0)]));
        let norm = mv.norm();
        let a = if norm > 0.0 { mv / norm } else { DVector::zeros(ms.len()) };
        (a, CertificateMethod::SingleFlexNorm)
    } else {
        let sol = maximize_min_eigen(&ms, None)?;
        (sol.a, CertificateMethod::Barrier)
    };

    let lambda0 = linalg::min_eigenvalue(&combine(&ms, &a));
    let omega = &sd.w * &a;
    let mu0 = min_eig_on(f, c, &omega)?;
    let status = if lambda0 > tol {
        CertificateStatus::PositiveDefinite
    } else {
        CertificateStatus::Failed
    };
    Ok(StressCertificate {
        status,
        method,
        omega: omega.iter().copied().collect(),
        a: a.iter().copied().collect(),
        lambda0,
        mu0,
    })
}

/// Minimum eigenvalue of `C^T Omega(omega) C`.
pub fn min_eig_on(f: &Framework, c: &DMatrix<f64>, omega: &DVector<f64>) -> Result<f64> {
    let om = f.stress_matrix(omega)?;
    Ok(linalg::min_eigenvalue(&linalg::symmetrize(&(c.transpose() * om * c))))
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub a: DVector<f64>,
    /// Lower bound on the optimum returned by the barrier iterate.
    pub u: f64,
    pub newton_steps: usize,
}

/// Maximize `min(lambda_min(sum a_i M_i), min_k (G a)_k)` over `|a| <= 1`.
///
/// Either part may be absent: `ms` may hold `0 x 0` blocks and `g` may be `None`.
pub fn maximize_min_eigen(ms: &[DMatrix<f64>], g: Option<&DMatrix<f64>>) -> Result<BarrierSolution> {
    let k = match (ms.len(), g) {
        (0, Some(g)) => g.ncols(),
        (n, _) => n,
    };
    let nv = ms.first().map_or(0, |m| m.nrows());
    let n_lin = g.map_or(0, |g| g.nrows());
    if k == 0 || (nv == 0 && n_lin == 0) {
        return Err(Error::Precondition("barrier problem has no constraints bounding u".into()));
    }
    if let Some(g) = g {
        if g.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: g.ncols(),
            });
        }
    }

    let scale = {
        let s = scale_of(ms).max(g.map_or(0.0, |g| g.abs().max()));
        if s > 0.0 { s } else { 1.0 }
    };
    let ms: Vec<DMatrix<f64>> = ms.iter().map(|m| m / scale).collect();
    let g = g.map(|g| g / scale);
    let prob = Barrier { ms: &ms, g: g.as_ref(), k, nv };

    let nu = (nv + n_lin + 1) as f64;
    let mut y = DVector::zeros(k + 1);
    y[k] = -1.0;
    let mut tau = 1.0;
    let mut steps = 0;
    let mut last_decrement = f64::INFINITY;
    loop {
        for _ in 0..200 {
            let (grad, hess) = prob.derivatives(&y, tau);
            let dir = newton_direction(hess, &grad);
            let decrement = -grad.dot(&dir);
            last_decrement = decrement;
            if decrement < 1e-14 {
                break;
            }
            let phi0 = prob.value(&y, tau).expect("iterate is feasible");
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..80 {
                let trial = &y + &dir * step;
                if let Some(phi) = prob.value(&trial, tau) {
                    if phi <= phi0 - 0.25 * step * decrement {
                        y = trial;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            steps += 1;
            if !moved {
                break;
            }
        }
        let gap = nu / tau;
        if gap < 1e-12 {
            break;
        }
        if tau > 1e16 {
            return Err(Error::ConicNotConverged {
                iterations: steps,
                gap,
                decrement: last_decrement,
            });
        }
        tau *= 8.0;
    }
    Ok(BarrierSolution {
        a: y.rows(0, k).into_owned(),
        u: y[k] * scale,
        newton_steps: steps,
    })
}

fn newton_direction(mut hess: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let n = hess.nrows();
    let mut shift = 0.0;
    loop {
        if let Some(ch) = Cholesky::new(hess.clone()) {
            return -ch.solve(grad);
        }
        shift = if shift == 0.0 { 1e-14 * (1.0 + hess.diagonal().amax()) } else { shift * 10.0 };
        for i in 0..n {
            hess[(i, i)] += shift;
        }
    }
}

struct Barrier<'a> {
    ms: &'a [DMatrix<f64>],
    g: Option<&'a DMatrix<f64>>,
    k: usize,
    nv: usize,
}

impl Barrier<'_> {
    fn lmi(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let a = y.rows(0, self.k).into_owned();
        let mut x = combine(self.ms, &a);
        for i in 0..self.nv {
            x[(i, i)] -= y[self.k];
        }
        x
    }

    fn slacks(&self, y: &DVector<f64>) -> Option<DVector<f64>> {
        self.g.map(|g| {
            let s = g * y.rows(0, self.k);
            s.add_scalar(-y[self.k])
        })
    }

    /// Barrier objective, or `None` outside the feasible interior.
    fn value(&self, y: &DVector<f64>, tau: f64) -> Option<f64> {
        let a = y.rows(0, self.k);
        let ball = 1.0 - a.norm_squared();
        if ball <= 0.0 {
            return None;
        }
        let mut phi = -tau * y[self.k] - ball.ln();
        if self.nv > 0 {
            let ch = Cholesky::new(self.lmi(y))?;
            let logdet: f64 = ch.l_dirty().diagonal().iter().take(self.nv).map(|d| 2.0 * d.ln()).sum();
            if !logdet.is_finite() {
                return None;
            }
            phi -= logdet;
        }
        if let Some(s) = self.slacks(y) {
            for &si in s.iter() {
                if si <= 0.0 {
                    return None;
                }
                phi -= si.ln();
            }
        }
        Some(phi)
    }

    fn derivatives(&self, y: &DVector<f64>, tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let k = self.k;
        let mut grad = DVector::zeros(k + 1);
        let mut hess = DMatrix::zeros(k + 1, k + 1);
        grad[k] = -tau;

        if self.nv > 0 {
            let xinv = Cholesky::new(self.lmi(y)).expect("feasible iterate").inverse();
            // P_i = X^{-1} F_i with F_i = M_i and F_u = -I.
            let mut ps: Vec<DMatrix<f64>> = self.ms.iter().map(|m| &xinv * m).collect();
            ps.push(-xinv.clone());
            for i in 0..=k {
                grad[i] -= ps[i].trace();
                for j in 0..=i {
                    let h = ps[i].component_mul(&ps[j].transpose()).sum();
                    hess[(i, j)] += h;
                    if i != j {
                        hess[(j, i)] += h;
                    }
                }
            }
        }

        if let (Some(g), Some(s)) = (self.g, self.slacks(y)) {
            for (row, &si) in g.row_iter().zip(s.iter()) {
                let mut v = DVector::zeros(k + 1);
                v.rows_mut(0, k).copy_from(&row.transpose());
                v[k] = -1.0;
                grad -= &v / si;
                hess += &v * v.transpose() / (si * si);
            }
        }

        let a = y.rows(0, k).into_owned();
        let ball = 1.0 - a.norm_squared();
        let mut ga = grad.rows_mut(0, k);
        ga += &a * (2.0 / ball);
        let mut ha = hess.view_mut((0, 0), (k, k));
        ha += DMatrix::<f64>::identity(k, k) * (2.0 / ball) + &a * a.transpose() * (4.0 / (ball * ball));
        (grad, hess)
    }
}

/// Result of the tensegrity stress search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensegrityCertificate {
    pub certificate: StressCertificate,
    /// `min_k l_k omega_k` over cables and struts.
    pub s: f64,
    /// `lambda_min(V^T Omega V)`; `None` when there are no almost-flexes.
    pub t: Option<f64>,
    /// Labeled edges (0-based) whose sign constraint is not strict.
    pub slack_edges: Vec<usize>,
}

/// Tensegrity variant: also require `l_k omega_k > 0` on cables and struts.
pub fn tensegrity_stress_search(
    f: &Framework,
    c: &DMatrix<f64>,
    sd: &SpectralDecomposition,
) -> Result<TensegrityCertificate> {
    let labels = f
        .labels()
        .ok_or_else(|| Error::Precondition("tensegrity search needs edge labels".into()))?;
    let signed: Vec<(usize, f64)> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l != EdgeLabel::Bar)
        .map(|(k, l)| (k, l.sign()))
        .collect();

    if signed.is_empty() {
        let cert = pss_stress_search(f, c, sd)?;
        let t = (sd.n_v() > 0).then_some(cert.lambda0);
        return Ok(TensegrityCertificate {
            certificate: cert,
            s: f64::INFINITY,
            t,
            slack_edges: Vec::new(),
        });
    }
    let m = f.n_edges();
    if sd.n_w() == 0 {
        return Ok(TensegrityCertificate {
            certificate: StressCertificate::trivial(CertificateStatus::NoStress, m),
            s: 0.0,
            t: None,
            slack_edges: signed.iter().map(|&(k, _)| k).collect(),
        });
    }

    let mut ew = DMatrix::zeros(signed.len(), sd.n_w());
    for (row, &(k, l)) in signed.iter().enumerate() {
        ew.set_row(row, &(sd.w.row(k) * l));
    }
    let ms = if sd.n_v() > 0 { stress_blocks(f, sd)? } else { Vec::new() };
    let sol = maximize_min_eigen(&ms, Some(&ew))?;
    let a = sol.a;
    let omega = &sd.w * &a;
    let margins: Vec<f64> = signed.iter().map(|&(k, l)| l * omega[k]).collect();
    let s = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let t = (sd.n_v() > 0).then(|| linalg::min_eigenvalue(&combine(&ms, &a)));

    let tol_s = SUCCESS_TOL * ew.abs().max().max(f64::MIN_POSITIVE);
    let tol_t = SUCCESS_TOL * scale_of(&ms);
    let ok = s > tol_s && t.is_none_or(|t| t > tol_t);
    let slack_edges = signed
        .iter()
        .zip(&margins)
        .filter(|(_, &mk)| mk <= tol_s)
        .map(|(&(k, _), _)| k)
        .collect();
    let mu0 = min_eig_on(f, c, &omega)?;

    Ok(TensegrityCertificate {
        certificate: StressCertificate {
            status: if ok {
                CertificateStatus::PositiveDefinite
            } else {
                CertificateStatus::Failed
            },
            method: CertificateMethod::Barrier,
            omega: omega.iter().copied().collect(),
            a: a.iter().copied().collect(),
            lambda0: t.unwrap_or(0.0),
            mu0,
        },
        s,
        t,
        slack_edges,
    })
}

/// Largest squared-length change for which the energy argument still applies
/// to a tensegrity: `min 2|omega_ij| / kappa` over cables and struts.
pub fn tensegrity_edge_margin(f: &Framework, omega: &DVector<f64>, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return f64::INFINITY;
    }
    let Some(labels) = f.labels() else {
        return f64::INFINITY;
    };
    labels
        .iter()
        .zip(omega.iter())
        .filter(|(l, _)| **l != EdgeLabel::Bar)
        .map(|(_, w)| 2.0 * w.abs() / kappa)
        .fold(f64::INFINITY, f64::min)
}

/// The reduced matrices `A = C^T Omega C` and `B = 2 C^T R^T R C`.
#[derive(Debug, Clone)]
pub struct KappaProblem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl KappaProblem {
    pub fn new(f: &Framework, c: &DMatrix<f64>, omega: &DVector<f64>) -> Result<Self> {
        let om = f.stress_matrix(omega)?;
        let rc = f.rigidity_matrix(f.positions())? * c;
        Ok(KappaProblem {
            a: linalg::symmetrize(&(c.transpose() * om * c)),
            b: linalg::symmetrize(&(rc.transpose() * rc * 2.0)),
        })
    }

    pub fn min_eig_at(&self, kappa: f64) -> f64 {
        linalg::min_eigenvalue(&(&self.a + &self.b * kappa))
    }

    fn feasible(&self, kappa: f64, lambda: f64) -> bool {
        self.min_eig_at(kappa) >= lambda
    }

    /// Eigen-split of `B` into its null space and range.
    fn split(&self) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
        let (vals, vecs) = linalg::sym_eigen_sorted(&self.b);
        let bmax = vals.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        let null: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= RANK_TOL * bmax).collect();
        let range: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > RANK_TOL * bmax).collect();
        let pick = |idx: &[usize]| {
            let mut out = DMatrix::zeros(vecs.nrows(), idx.len());
            for (dst, &src) in idx.iter().enumerate() {
                out.set_column(dst, &vecs.column(src));
            }
            out
        };
        (pick(&null), pick(&range), range.iter().map(|&i| vals[i]).collect())
    }

    fn check_null_space(&self, lambda: f64) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
        let (null, range, beta) = self.split();
        if null.ncols() > 0 {
            let ann = linalg::symmetrize(&(null.transpose() * &self.a * &null));
            let lo = linalg::min_eigenvalue(&ann);
            if lo <= lambda {
                return Err(Error::KappaInfeasible(format!(
                    "A has eigenvalue {lo:.6e} <= lambda = {lambda:.6e} on Null(B)"
                )));
            }
        }
        Ok((null, range, beta))
    }

    /// Smallest `kappa >= 0` with `A + kappa B >= lambda I`, by bisection.
    pub fn solve_bisection(&self, lambda: f64) -> Result<f64> {
        self.check_null_space(lambda)?;
        if self.feasible(0.0, lambda) {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while !self.feasible(hi, lambda) {
            hi *= 2.0;
            if hi > KAPPA_CAP {
                return Err(Error::KappaInfeasible(format!(
                    "no kappa below {KAPPA_CAP:e} reaches lambda = {lambda:.6e}"
                )));
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        while hi - lo > KAPPA_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.feasible(mid, lambda) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Same quantity through a Schur complement on the range of `B`.
    ///
    /// In an eigenbasis of `B`, with `A' = A - lambda I` split into null (`N`)
    /// and range (`R`) blocks, `A' + kappa B >= 0` iff `A'_NN > 0` and
    /// `S + kappa D >= 0`, where `S = A'_RR - A'_RN A'_NN^{-1} A'_NR` and `D`
    /// holds the nonzero eigenvalues of `B`.
    pub fn solve_schur(&self, lambda: f64) -> Result<f64> {
        let (null, range, beta) = self.check_null_space(lambda)?;
        let n = self.a.nrows();
        let shifted = &self.a - DMatrix::<f64>::identity(n, n) * lambda;
        let arr = range.transpose() * &shifted * &range;
        let s = if null.ncols() > 0 {
            let ann = null.transpose() * &shifted * &null;
            let anr = null.transpose() * &shifted * &range;
            let ch = Cholesky::new(linalg::symmetrize(&ann))
                .ok_or_else(|| Error::KappaInfeasible("A - lambda I not positive on Null(B)".into()))?;
            &arr - anr.transpose() * ch.solve(&anr)
        } else {
            arr
        };
        let scaled = DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| s[(i, j)] / (beta[i] * beta[j]).sqrt());
        Ok((-linalg::min_eigenvalue(&linalg::symmetrize(&scaled))).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    /// Brute-force maximum of `lambda_min(sum a_i M_i)` over unit vectors `a`
    /// in two dimensions.
    fn circle_oracle(ms: &[DMatrix<f64>]) -> f64 {
        (0..20000)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 20000.0;
                let a = DVector::from_vec(vec![th.cos(), th.sin()]);
                linalg::min_eigenvalue(&combine(ms, &a))
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn barrier_matches_circle_oracle() {
        let ms = vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -0.5]),
            DMatrix::from_row_slice(2, 2, &[-0.2, 0.1, 0.1, 0.9]),
        ];
        let sol = maximize_min_eigen(&ms, None).unwrap();
        let got = linalg::min_eigenvalue(&combine(&ms, &sol.a));
        let want = circle_oracle(&ms);
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        assert!(sol.a.norm() <= 1.0 + 1e-9);
        assert!((got - sol.u).abs() < 1e-7);
    }

    #[test]
    fn barrier_returns_zero_when_no_positive_combination() {
        let ms = vec![diag(&[1.0, -1.0]), diag(&[-1.0, 1.0])];
        let sol = maximize_min_eigen(&ms, None).unwrap();
        assert!(sol.u.abs() < 1e-9);
    }

    #[test]
    fn barrier_linear_only() {
        // maximize min(a1, a2) over the unit disc -> 1/sqrt(2).
        let g = DMatrix::identity(2, 2);
        let sol = maximize_min_eigen(&[], Some(&g)).unwrap();
        assert!((sol.u - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn kappa_zero_when_already_feasible() {
        let p = KappaProblem { a: diag(&[2.0, 3.0]), b: diag(&[1.0, 0.0]) };
        assert_eq!(p.solve_bisection(1.0).unwrap(), 0.0);
        assert_eq!(p.solve_schur(1.0).unwrap(), 0.0);
    }

    #[test]
    fn kappa_routes_agree() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 0.4, 0.2, 0.4, 2.0, 0.1, 0.2, 0.1, 0.5]);
        let b = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = KappaProblem { a, b };
        let k1 = p.solve_bisection(0.25).unwrap();
        let k2 = p.solve_schur(0.25).unwrap();
        assert!((k1 - k2).abs() <= 1e-6 * k2, "{k1} vs {k2}");
        assert!(p.min_eig_at(k1 * (1.0 + 10.0 * KAPPA_TOL)) >= 0.25);
        assert!(p.min_eig_at(k1 * (1.0 - 10.0 * KAPPA_TOL)) < 0.25);
    }

    #[test]
    fn kappa_rejects_bad_null_space() {
        let p = KappaProblem { a: diag(&[0.1, 1.0]), b: diag(&[0.0, 1.0]) };
        assert!(matches!(p.solve_bisection(0.5), Err(Error::KappaInfeasible(_))));
        assert!(matches!(p.solve_schur(0.5), Err(Error::KappaInfeasible(_))));
    }

    #[test]
    fn edge_margin_formula() {
        let f = Framework::new(1, &[vec![0.0], vec![1.0], vec![2.0]], vec![(0, 1), (1, 2)])
            .unwrap()
            .with_labels(vec![EdgeLabel::Cable, EdgeLabel::Strut])
            .unwrap();
        let w = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(tensegrity_edge_margin(&f, &w, 0.0), f64::INFINITY);
        assert!((tensegrity_edge_margin(&f, &w, 2.0) - 1.0).abs() < 1e-15);
    }
}
