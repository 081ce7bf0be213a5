//! The spring energy `H(q) = sum 1/2 kappa (q_ij^2 - p_ij^2)^2 + omega_ij q_ij^2`,
//! its directional derivatives, and sampling checks of the radii it certifies.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::almost_rigidity::{length_scale, EminEvaluator};
use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::geometry::Framework;
use crate::linalg;

/// Absolute slack allowed in the barrier checks.
pub const BARRIER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EnergyModel {
    framework: Framework,
    kappa: f64,
    omega: DVector<f64>,
    p_sq: DVector<f64>,
}

impl EnergyModel {
    pub fn new(f: &Framework, kappa: f64, omega: DVector<f64>) -> Result<Self> {
        if omega.len() != f.n_edges() {
            return Err(Error::DimensionMismatch {
                expected: f.n_edges(),
                found: omega.len(),
            });
        }
        Ok(EnergyModel {
            p_sq: f.edge_vector(f.positions())?,
            framework: f.clone(),
            kappa,
            omega,
        })
    }

    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        EnergyModel { kappa, ..self.clone() }
    }

    pub fn energy(&self, q: &DVector<f64>) -> Result<f64> {
        let e = self.framework.edge_vector(q)?;
        Ok(e.iter()
            .zip(self.p_sq.iter())
            .zip(self.omega.iter())
            .map(|((&x, &p2), &w)| 0.5 * self.kappa * (x - p2) * (x - p2) + w * x)
            .sum())
    }

    /// `e(q) - e(p)`, computed from the displacement to avoid cancellation.
    pub fn edge_change(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let f = &self.framework;
        if q.len() != f.n_coords() {
            return Err(Error::DimensionMismatch {
                expected: f.n_coords(),
                found: q.len(),
            });
        }
        let u = q - f.positions();
        let d = f.dim();
        let p = f.positions();
        let mut out = DVector::zeros(f.n_edges());
        for (k, &(i, j)) in f.edges().iter().enumerate() {
            let mut s = 0.0;
            for a in 0..d {
                let pij = p[d * i + a] - p[d * j + a];
                let uij = u[d * i + a] - u[d * j + a];
                s += uij * (2.0 * pij + uij);
            }
            out[k] = s;
        }
        Ok(out)
    }

    /// `H(q) - H(p) = 1/2 kappa |de|^2 + omega . de` with `de = e(q) - e(p)`.
    pub fn delta_energy(&self, q: &DVector<f64>) -> Result<f64> {
        let de = self.edge_change(q)?;
        Ok(0.5 * self.kappa * de.norm_squared() + self.omega.dot(&de))
    }

    /// Stress of the energy at `q`: `kappa (q_ij^2 - p_ij^2) + omega_ij`.
    pub fn stress_at(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let e = self.framework.edge_vector(q)?;
        Ok((e - &self.p_sq) * self.kappa + &self.omega)
    }

    /// First through fourth derivatives of `t -> H(q + t v)` at `t = 0`.
    pub fn directional_derivatives(&self, q: &DVector<f64>, v: &DVector<f64>) -> Result<[f64; 4]> {
        let f = &self.framework;
        let rq_v = f.rigidity_matrix(q)? * v;
        let rv_v = f.rigidity_matrix(v)? * v;
        let wq = self.stress_at(q)?;
        let h1 = 2.0 * wq.dot(&rq_v);
        let h2 = 4.0 * self.kappa * rq_v.norm_squared() + 2.0 * v.dot(&(f.stress_matrix(&wq)? * v));
        let h3 = 12.0 * self.kappa * rq_v.dot(&rv_v);
        let h4 = 12.0 * self.kappa * rv_v.norm_squared();
        Ok([h1, h2, h3, h4])
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CheckStats {
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed value of (left side - required bound).
    pub worst_margin: f64,
}

impl CheckStats {
    fn new() -> Self {
        CheckStats {
            samples: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, margin: f64, ok: bool) {
        self.samples += 1;
        if !ok {
            self.violations += 1;
        }
        self.worst_margin = self.worst_margin.min(margin);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub seed: u64,
    pub directions: usize,
    pub radii_per_direction: usize,
    /// `Delta H > 0` for `eta1 < |q - p| < eta2`.
    pub annulus: Option<CheckStats>,
    /// `Delta H >= (1/3) lambda eta^2 (1 - 3 eta1 / 2 eta)` for `3 eta1 / 2 < eta <= eta3`.
    pub barrier: Option<CheckStats>,
    /// `|e(q) - e(p)| >= e_min(eta)` on the same shells.
    pub edge_barrier: Option<CheckStats>,
    pub notices: Vec<String>,
}

impl VerificationRecord {
    pub fn total_violations(&self) -> usize {
        [&self.annulus, &self.barrier, &self.edge_barrier]
            .iter()
            .filter_map(|c| c.as_ref())
            .map(|c| c.violations)
            .sum()
    }
}

/// What the verifier needs: the energy, the complement `C`, and the radii under test.
#[derive(Debug, Clone)]
pub struct VerificationInputs {
    pub model: EnergyModel,
    pub c: DMatrix<f64>,
    pub eta1: f64,
    pub eta2: Option<f64>,
    pub eta3: Option<f64>,
    pub emin: Option<EminEvaluator>,
}

impl VerificationInputs {
    pub fn from_analysis(an: &Analysis) -> Result<Self> {
        let dc = an
            .constants()
            .ok_or_else(|| Error::NoCertificate("analysis produced no constants".into()))?;
        let eta1 = an.report.eta1.unwrap_or(0.0);
        let omega = an.report.certificate.omega_vec();
        Ok(VerificationInputs {
            model: EnergyModel::new(&an.framework, dc.kappa, omega)?,
            c: an.c.clone(),
            eta1,
            eta2: an.report.eta2.filter(|_| an.report.annulus_applies),
            eta3: an.report.eta3.filter(|_| an.report.barrier_applies),
            emin: an.emin(),
        })
    }

    /// The same inputs with the energy's spring constant replaced, as a
    /// sensitivity check of the harness.
    pub fn with_kappa(&self, kappa: f64) -> Self {
        VerificationInputs {
            model: self.model.with_kappa(kappa),
            emin: self.emin.map(|e| EminEvaluator { kappa, ..e }),
            ..self.clone()
        }
    }
}

/// Unit directions in `C`: `count` Gaussian samples in the `C` basis, plus
/// both signs of every eigenvector of the reduced Hessian of `H` at `p`.
pub fn sample_directions(model: &EnergyModel, c: &DMatrix<f64>, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<DVector<f64>>> {
    let k = c.ncols();
    let mut out = Vec::with_capacity(count + 2 * k);
    if k == 0 {
        return Ok(out);
    }
    for _ in 0..count {
        let g = DVector::from_fn(k, |_, _| StandardNormal.sample(rng));
        let v: DVector<f64> = c * g;
        out.push(v.normalize());
    }
    let f = model.framework();
    let r = f.rigidity_matrix(f.positions())? * c;
    let om = f.stress_matrix(model.omega())?;
    let hess = r.transpose() * r * (4.0 * model.kappa()) + c.transpose() * om * c * 2.0;
    let (_, vecs) = linalg::sym_eigen_sorted(&hess);
    for col in vecs.column_iter() {
        let v: DVector<f64> = c * col;
        out.push(v.normalize());
        out.push(-v.normalize());
    }
    Ok(out)
}

pub const RADII_PER_DIRECTION: usize = 8;

pub fn verify(inputs: &VerificationInputs, samples: usize, seed: u64) -> Result<VerificationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = &inputs.model;
    let p = model.framework().positions().clone();
    let dirs = sample_directions(model, &inputs.c, samples, &mut rng)?;
    let unit = Uniform::new(0.0, 1.0).expect("unit interval");
    let mut notices = Vec::new();
    let eta1 = inputs.eta1;

    let annulus = match inputs.eta2 {
        Some(eta2) if eta2.is_finite() && eta2 > eta1 => {
            let mut st = CheckStats::new();
            for v in &dirs {
                for k in 0..RADII_PER_DIRECTION {
                    let u: f64 = unit.sample(&mut rng);
                    let r = eta1 + (eta2 - eta1) * (k as f64 + u) / RADII_PER_DIRECTION as f64;
                    if r <= eta1 || r >= eta2 {
                        continue;
                    }
                    let dh = model.delta_energy(&(&p + v * r))?;
                    st.record(dh, dh > 0.0);
                }
            }
            Some(st)
        }
        _ => {
            notices.push("annulus check skipped: eta2 unavailable or infinite".into());
            None
        }
    };

    let (barrier, edge_barrier) = match (inputs.eta3, inputs.emin) {
        (Some(eta3), Some(emin)) if eta3.is_finite() && eta3 > 1.5 * eta1 => {
            let mut bar = CheckStats::new();
            let mut edge = CheckStats::new();
            let lo = 1.5 * eta1;
            for v in &dirs {
                for k in 0..RADII_PER_DIRECTION {
                    let u: f64 = unit.sample(&mut rng);
                    let eta = lo + (eta3 - lo) * (k as f64 + 1.0 - u) / RADII_PER_DIRECTION as f64;
                    if eta <= lo {
                        continue;
                    }
                    let q = &p + v * eta;
                    let dh = model.delta_energy(&q)?;
                    let need = emin.energy_gap(eta);
                    bar.record(dh - need, dh >= need - BARRIER_SLACK);
                    let de = model.edge_change(&q)?.norm();
                    let need = emin.eval(eta);
                    edge.record(de - need, de >= need - BARRIER_SLACK);
                }
            }
            (Some(bar), Some(edge))
        }
        _ => {
            notices.push("barrier checks skipped: eta3 unavailable or infinite".into());
            (None, None)
        }
    };

    Ok(VerificationRecord {
        seed,
        directions: dirs.len(),
        radii_per_direction: RADII_PER_DIRECTION,
        annulus,
        barrier,
        edge_barrier,
        notices,
    })
}

pub fn verify_analysis(an: &Analysis, samples: usize, seed: u64) -> Result<VerificationRecord> {
    verify(&VerificationInputs::from_analysis(an)?, samples, seed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRecord {
    pub seed: u64,
    /// `|H'''(p + r v)(v)| / H''(p)(v)` against its bound.
    pub hbounds: CheckStats,
    /// `kappa |R(p) v| / (2 kappa |R(p) v|^2 + v^T Omega v)` against its bound.
    pub rpv: CheckStats,
    /// `|R(q) u| <= 2 sqrt(z) |q| |u|` on random `q`, `u`.
    pub rbounds: CheckStats,
    /// `eta0(0) = (L/2) mu_bar^(-1/2)`.
    pub eta0: f64,
    /// The cruder `L^2 / |p|` obtained by bounding the derivatives separately.
    pub eta0_alternative: f64,
}

pub struct BoundInputs {
    pub model: EnergyModel,
    pub c: DMatrix<f64>,
    pub lambda: f64,
    pub mu0: f64,
}

impl BoundInputs {
    pub fn from_analysis(an: &Analysis) -> Result<Self> {
        let dc = an
            .constants()
            .ok_or_else(|| Error::NoCertificate("analysis produced no constants".into()))?;
        Ok(BoundInputs {
            model: EnergyModel::new(&an.framework, dc.kappa, an.report.certificate.omega_vec())?,
            c: an.c.clone(),
            lambda: dc.lambda,
            mu0: dc.mu0,
        })
    }
}

pub fn bound_checks(inputs: &BoundInputs, trials: usize, seed: u64) -> Result<BoundRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = &inputs.model;
    let f = model.framework();
    let p = f.positions().clone();
    let z = f.max_degree() as f64;
    let (kappa, lambda, mu0) = (model.kappa(), inputs.lambda, inputs.mu0);
    let s = (8.0 * z * kappa / lambda).sqrt();
    let l = length_scale(lambda, f.max_degree(), kappa);
    let ratio_bound = |r: f64| 3.0 * s * ((1.0 - mu0 / lambda).sqrt() + s * r);
    let rpv_bound = kappa.sqrt() * (lambda - mu0).sqrt() / (2f64.sqrt() * lambda);
    let r_max = if l.is_finite() { 2.0 * l } else { 1.0 };

    let mut hb = CheckStats::new();
    let mut rpv = CheckStats::new();
    let rp = f.rigidity_matrix(&p)?;
    let om = f.stress_matrix(model.omega())?;
    for v in sample_directions(model, &inputs.c, trials, &mut rng)? {
        let h2 = model.directional_derivatives(&p, &v)?[1];
        for k in 0..RADII_PER_DIRECTION {
            let r = r_max * k as f64 / (RADII_PER_DIRECTION - 1) as f64;
            let h3 = model.directional_derivatives(&(&p + &v * r), &v)?[2];
            let margin = ratio_bound(r) - h3.abs() / h2;
            hb.record(margin, margin >= -BARRIER_SLACK);
        }
        let rv = (&rp * &v).norm();
        let lhs = kappa * rv / (2.0 * kappa * rv * rv + v.dot(&(&om * &v)));
        let margin = rpv_bound - lhs;
        rpv.record(margin, margin >= -BARRIER_SLACK);
    }

    let mut rb = CheckStats::new();
    let dn = f.n_coords();
    for _ in 0..trials {
        let q = DVector::from_fn(dn, |_, _| StandardNormal.sample(&mut rng));
        let u = DVector::from_fn(dn, |_, _| StandardNormal.sample(&mut rng));
        let lhs = (f.rigidity_matrix(&q)? * &u).norm();
        let bound = 2.0 * z.sqrt() * q.norm() * u.norm();
        rb.record(bound - lhs, lhs <= bound * (1.0 + 1e-12));
    }

    let mu_bar = 1.0 - mu0 / lambda;
    Ok(BoundRecord {
        seed,
        hbounds: hb,
        rpv,
        rbounds: rb,
        eta0: l / 2.0 / mu_bar.sqrt(),
        eta0_alternative: l * l / f.centered_norm(&p),
    })
}

/// The cubic `g(t, a) = a t^3 + b t^2 + c t` with `|a| <= a_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicProbe {
    pub a_bar: f64,
    pub b: f64,
    pub c: f64,
}

impl CubicProbe {
    pub fn new(a_bar: f64, b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0) || !(a_bar > 0.0) {
            return Err(Error::Precondition(format!("need b > 0 and a_bar > 0, got b = {b}, a_bar = {a_bar}")));
        }
        let probe = CubicProbe { a_bar, b, c };
        if c != 0.0 && !(a_bar < probe.a_star()) {
            return Err(Error::Precondition(format!(
                "a_bar = {a_bar} must be below a_* = {}",
                probe.a_star()
            )));
        }
        Ok(probe)
    }

    pub fn g(&self, t: f64, a: f64) -> f64 {
        ((a * t + self.b) * t + self.c) * t
    }

    /// `f(t) = -a_bar t^3 + b t^2 - |c| t`, a lower bound for `g(+-t, a)`.
    pub fn lower(&self, t: f64) -> f64 {
        ((-self.a_bar * t + self.b) * t - self.c.abs()) * t
    }

    pub fn t_star(&self) -> f64 {
        2.0 * self.c.abs() / self.b
    }

    pub fn a_star(&self) -> f64 {
        if self.c == 0.0 {
            f64::INFINITY
        } else {
            self.b * self.b / (4.0 * self.c.abs())
        }
    }

    pub fn t1_plus(&self, a: f64) -> f64 {
        let a = a.abs();
        self.b / (2.0 * a) * (1.0 + (1.0 - 4.0 * a * self.c.abs() / (self.b * self.b)).sqrt())
    }

    pub fn t_c(&self) -> f64 {
        2.0 * self.b / (3.0 * self.a_bar)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicReport {
    pub probe: CubicProbe,
    pub t_star: f64,
    pub t1_plus: f64,
    pub t_c: f64,
    /// Half-open interval `[lo, hi)` of `|t|` on which positivity is claimed
    /// (open at `lo` as well when `c = 0`).
    pub interval: (f64, f64),
    pub t_points: usize,
    pub a_points: usize,
    pub positivity: CheckStats,
    pub lower_bound: CheckStats,
}

pub const CUBIC_T_POINTS: usize = 2000;
pub const CUBIC_A_POINTS: usize = 200;

/// Brute-force check of the positivity interval and the cubic lower bound on
/// a `2000 x 200` grid in `(t, a)`.
pub fn cubic_oracles(probe: &CubicProbe) -> CubicReport {
    let (lo, hi) = (probe.t_star(), probe.t1_plus(probe.a_bar));
    let nt = CUBIC_T_POINTS;
    let na = CUBIC_A_POINTS;
    let a_at = |j: usize| probe.a_bar * (-1.0 + 2.0 * j as f64 / (na - 1) as f64);

    let mut pos = CheckStats::new();
    for i in 0..nt {
        let t = if probe.c == 0.0 {
            hi * (i + 1) as f64 / (nt + 1) as f64
        } else {
            lo + (hi - lo) * i as f64 / nt as f64
        };
        for j in 0..na {
            let a = a_at(j);
            for s in [t, -t] {
                let g = probe.g(s, a);
                pos.record(g, g > 0.0);
            }
        }
    }

    let mut low = CheckStats::new();
    for i in 1..=nt {
        let t = 2.0 * hi * i as f64 / nt as f64;
        let f = probe.lower(t);
        let scale = probe.a_bar * t.powi(3) + probe.b * t * t + probe.c.abs() * t;
        for j in 0..na {
            let a = a_at(j);
            for s in [t, -t] {
                let margin = probe.g(s, a) - f;
                low.record(margin, margin >= -1e-12 * scale);
            }
        }
    }

    CubicReport {
        probe: *probe,
        t_star: lo,
        t1_plus: hi,
        t_c: probe.t_c(),
        interval: (lo, hi),
        t_points: nt,
        a_points: na,
        positivity: pos,
        lower_bound: low,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn single_edge_energy() {
        let f = Framework::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0]], vec![(0, 1)]).unwrap();
        let m = EnergyModel::new(&f, 2.0, DVector::zeros(1)).unwrap();
        assert_eq!(m.delta_energy(f.positions()).unwrap(), 0.0);
        let q = DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]);
        assert!((m.delta_energy(&q).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.energy(&q).unwrap() - m.energy(f.positions()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stress_at_p_is_omega() {
        let f = corpus::generate("square").unwrap();
        let w = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.4, -0.5]);
        let m = EnergyModel::new(&f, 1.5, w.clone()).unwrap();
        assert_eq!(m.stress_at(f.positions()).unwrap(), w);
    }

    #[test]
    fn translations_have_zero_derivatives() {
        let f = corpus::generate("tetrahedron").unwrap();
        let m = EnergyModel::new(&f, 1.3, DVector::from_element(6, 0.2)).unwrap();
        let mut v = DVector::zeros(12);
        for i in 0..4 {
            v[3 * i + 1] = 0.5;
        }
        let q = f.positions() + DVector::from_fn(12, |i, _| 0.01 * (i as f64).sin());
        for d in m.directional_derivatives(&q, &v).unwrap() {
            assert!(d.abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_reference_probe() {
        let a_star = 2.0 * 2.0 / 4.0;
        let probe = CubicProbe::new(0.8 * a_star, 2.0, 1.0).unwrap();
        let rep = cubic_oracles(&probe);
        assert_eq!(rep.positivity.violations, 0);
        assert_eq!(rep.lower_bound.violations, 0);
        assert!((rep.t_star - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_without_linear_term() {
        let probe = CubicProbe::new(1.0, 2.0, 0.0).unwrap();
        let rep = cubic_oracles(&probe);
        assert_eq!(rep.interval, (0.0, 2.0));
        assert_eq!(rep.positivity.violations, 0);
    }

    #[test]
    fn cubic_rejects_a_bar_at_a_star() {
        assert!(CubicProbe::new(1.0, 2.0, 1.0).is_err());
        assert!(CubicProbe::new(0.5, -1.0, 0.0).is_err());
    }
}
