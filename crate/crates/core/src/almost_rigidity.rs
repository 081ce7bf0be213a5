//! Constants, radii and barriers of the almost-rigidity certificate.
//!
//! Given a stress certificate, `derive_constants` fixes `lambda`, `kappa`,
//! the length scale `L = sqrt(lambda / (8 z kappa))` and the dimensionless
//! `mu_bar = 1 - mu0 / lambda`. Everything else is closed-form in those.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conic::{CertificateStatus, KappaProblem, StressCertificate};
use crate::error::{Error, Result};
use crate::geometry::Framework;

/// Relative residual below which a stress counts as an exact self-stress.
pub const SELF_STRESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub lambda0: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// `kappa` recomputed through the Schur-complement route.
    pub kappa_schur: f64,
    pub l: f64,
    pub mu0: f64,
    pub mu_bar: f64,
    pub z: usize,
    /// `|omega^T R(p)|`.
    pub residual: f64,
    pub omega_norm: f64,
    /// Norm of the centered configuration.
    pub p_norm: f64,
    /// True on the first-order path (`omega = 0`, `kappa = 1`, `lambda = 2 sigma0^2`).
    pub first_order: bool,
}

pub fn length_scale(lambda: f64, z: usize, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return f64::INFINITY;
    }
    (lambda / (8.0 * z as f64 * kappa)).sqrt()
}

pub fn mu_bar(mu0: f64, lambda: f64) -> f64 {
    1.0 - mu0 / lambda
}

pub fn derive_constants(
    cert: &StressCertificate,
    f: &Framework,
    c: &DMatrix<f64>,
    lambda_fraction: f64,
    sigma0: Option<f64>,
) -> Result<DerivedConstants> {
    let z = f.max_degree();
    let p_norm = f.centered_norm(f.positions());
    match cert.status {
        CertificateStatus::Vacuous => {
            let sigma0 = sigma0.ok_or(Error::NoNonzeroSingularValue)?;
            let lambda = 2.0 * sigma0 * sigma0;
            let problem = KappaProblem::new(f, c, &DVector::zeros(f.n_edges()))?;
            let kappa_schur = problem.solve_schur(lambda)?;
            Ok(DerivedConstants {
                lambda0: lambda,
                lambda,
                kappa: 1.0,
                kappa_schur,
                l: length_scale(lambda, z, 1.0),
                mu0: 0.0,
                mu_bar: 1.0,
                z,
                residual: 0.0,
                omega_norm: 0.0,
                p_norm,
                first_order: true,
            })
        }
        CertificateStatus::PositiveDefinite => {
            if !(lambda_fraction > 0.0 && lambda_fraction < 1.0) {
                return Err(Error::Precondition(format!(
                    "lambda fraction {lambda_fraction} must lie in (0, 1)"
                )));
            }
            let omega = cert.omega_vec();
            let lambda = lambda_fraction * cert.lambda0;
            let problem = KappaProblem::new(f, c, &omega)?;
            let kappa = problem.solve_bisection(lambda)?;
            let kappa_schur = problem.solve_schur(lambda)?;
            let r = f.rigidity_matrix(f.positions())?;
            Ok(DerivedConstants {
                lambda0: cert.lambda0,
                lambda,
                kappa,
                kappa_schur,
                l: length_scale(lambda, z, kappa),
                mu0: cert.mu0,
                mu_bar: mu_bar(cert.mu0, lambda),
                z,
                residual: (r.transpose() * &omega).norm(),
                omega_norm: omega.norm(),
                p_norm,
                first_order: false,
            })
        }
        other => Err(Error::NoCertificate(format!("certificate status is {other:?}"))),
    }
}

pub fn compute_eta1(residual: f64, lambda: f64) -> f64 {
    4.0 * residual / lambda
}

pub fn compute_d(eta1: f64, l: f64, mu_bar: f64) -> f64 {
    let x = eta1 / l;
    x * (mu_bar.sqrt() + x)
}

pub fn compute_d_pss(eta1: f64, l: f64, mu_bar: f64, p_norm: f64) -> f64 {
    let x = eta1 / l;
    x * (mu_bar.sqrt() + 1.5 * x + 0.5 * p_norm / l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eta2Case {
    Case1,
    Case2,
}

/// `D` below which the first form of `eta2` applies.
pub fn eta2_case_threshold(mu_bar: f64) -> f64 {
    0.25 + (mu_bar.sqrt() * (mu_bar + 4.0).sqrt() - mu_bar) / 8.0
}

pub fn eta2_case1(eta1: f64, l: f64, mu_bar: f64) -> f64 {
    l * ((mu_bar + 4.0).sqrt() - mu_bar.sqrt()) / 2.0 - eta1
}

pub fn eta2_case2(l: f64, mu_bar: f64) -> f64 {
    l * ((mu_bar + 2.0).sqrt() - mu_bar.sqrt()) / 2.0
}

pub fn compute_eta2(eta1: f64, l: f64, mu_bar: f64, d: f64) -> Result<(f64, Eta2Case)> {
    if !(d < 0.5) {
        return Err(Error::Precondition(format!("D = {d} is not below 1/2")));
    }
    let out = if d < eta2_case_threshold(mu_bar) {
        (eta2_case1(eta1, l, mu_bar), Eta2Case::Case1)
    } else {
        (eta2_case2(l, mu_bar), Eta2Case::Case2)
    };
    debug_assert!(out.0 > eta1 || l.is_infinite(), "eta2 = {} <= eta1 = {eta1}", out.0);
    Ok(out)
}

/// Largest `D` for which the barrier radius `eta3` exists: `(8/3 + sqrt(mu)(mu + 8/3)^(1/2) - mu) / 9`.
pub fn barrier_d_bound(mu_bar: f64) -> f64 {
    (8.0 / 3.0 + mu_bar.sqrt() * (mu_bar + 8.0 / 3.0).sqrt() - mu_bar) / 9.0
}

pub fn compute_eta3(l: f64, mu_bar: f64) -> f64 {
    l / 2.0 * ((mu_bar + 8.0 / 3.0).sqrt() - mu_bar.sqrt())
}

/// The edge-length barrier `e_min(eta)` for a fixed set of constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EminEvaluator {
    pub eta1: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub omega_norm: f64,
}

impl EminEvaluator {
    pub fn new(dc: &DerivedConstants, eta1: f64) -> Self {
        EminEvaluator {
            eta1,
            lambda: dc.lambda,
            kappa: dc.kappa,
            omega_norm: dc.omega_norm,
        }
    }

    /// Energy barrier `(1/3) lambda eta^2 (1 - 3 eta1 / (2 eta))`.
    pub fn energy_gap(&self, eta: f64) -> f64 {
        self.lambda * eta * eta * (1.0 - 1.5 * self.eta1 / eta) / 3.0
    }

    pub fn eval(&self, eta: f64) -> f64 {
        let gap = self.energy_gap(eta);
        if self.kappa == 0.0 {
            return gap / self.omega_norm;
        }
        // sqrt(w^2 + x) - w, written without cancellation.
        let w = self.omega_norm / self.kappa;
        let x = 2.0 * gap / self.kappa;
        x / ((w * w + x).sqrt() + w)
    }
}

pub fn compute_eta3_emin(dc: &DerivedConstants, eta1: f64) -> (f64, EminEvaluator, f64) {
    let eta3 = compute_eta3(dc.l, dc.mu_bar);
    let emin = EminEvaluator::new(dc, eta1);
    (eta3, emin, emin.eval(eta3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMaxRegime {
    /// `eta1 = 0`, `omega = 0`: grows linearly in `epsilon`.
    Linear,
    /// `eta1 = 0`, `omega != 0`: grows like `epsilon^(1/2)`.
    SquareRoot,
    /// `eta1 > 0`: tends to `(3/2) eta1` as `epsilon -> 0`.
    Offset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaMax {
    pub value: f64,
    pub regime: EtaMaxRegime,
    /// Coefficient of the leading power of `epsilon` (or `(3/2) eta1` for `Offset`).
    pub leading: f64,
}

pub fn compute_eta_max(epsilon: f64, eta1: f64, lambda: f64, kappa: f64, omega_norm: f64) -> EtaMax {
    let h = 0.75 * eta1;
    let value = h + (h * h + 3.0 * omega_norm / lambda * epsilon + 1.5 * kappa / lambda * epsilon * epsilon).sqrt();
    let (regime, leading) = if eta1 > 0.0 {
        (EtaMaxRegime::Offset, 1.5 * eta1)
    } else if omega_norm == 0.0 {
        (EtaMaxRegime::Linear, (1.5 * kappa / lambda).sqrt())
    } else {
        (EtaMaxRegime::SquareRoot, (3.0 * omega_norm / lambda).sqrt())
    };
    EtaMax { value, regime, leading }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    FirstOrderRigid,
    PrestressStable,
    AlmostRigid,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::FirstOrderRigid => "first_order_rigid",
            Classification::PrestressStable => "prestress_stable",
            Classification::AlmostRigid => "almost_rigid",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyInputs {
    pub n_v: usize,
    /// Certificate on the selected subspaces succeeded.
    pub certified: bool,
    /// A certificate on the machine-scale null spaces succeeded with an exact self-stress.
    pub exact_prestress: bool,
    pub eta1: Option<f64>,
    pub d: Option<f64>,
}

pub fn classify(x: ClassifyInputs) -> Classification {
    if x.n_v == 0 {
        return Classification::FirstOrderRigid;
    }
    if x.exact_prestress {
        return Classification::PrestressStable;
    }
    match (x.certified, x.eta1, x.d) {
        (true, Some(eta1), Some(d)) if eta1 > 0.0 && d < 0.5 => Classification::AlmostRigid,
        _ => Classification::Inconclusive,
    }
}

/// Whether `residual` is zero to machine scale relative to `|R| |omega|`.
pub fn is_self_stress(residual: f64, r_norm: f64, omega_norm: f64) -> bool {
    residual < SELF_STRESS_TOL * r_norm * omega_norm
}
