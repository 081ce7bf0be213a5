//! End-to-end analysis of one framework.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::almost_rigidity::{self as ar, Classification, ClassifyInputs, DerivedConstants, EminEvaluator, Eta2Case};
use crate::conic::{self, CertificateStatus, StressCertificate, TensegrityCertificate};
use crate::error::Result;
use crate::geometry::{complement_space, ComplementMode, Framework, RANK_TOL};
use crate::spectral::{self, SpectralDecomposition, SubspaceSelection};

/// Relative disagreement between the two `kappa` routes that triggers a warning.
pub const KAPPA_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub selection: SubspaceSelection,
    pub lambda_fraction: f64,
    pub complement: ComplementMode,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            selection: SubspaceSelection::default(),
            lambda_fraction: 0.5,
            complement: ComplementMode::Orthogonal,
        }
    }
}

impl AnalysisSettings {
    pub fn with_cutoff(cutoff: f64) -> Self {
        AnalysisSettings {
            selection: SubspaceSelection::Cutoff(cutoff),
            ..Self::default()
        }
    }
}

/// Serializable summary of an analysis. Lengths are in the units of the
/// input coordinates; `e_min_star` is a squared length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityReport {
    pub dimension: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub selection: SubspaceSelection,
    pub lambda_fraction: f64,
    pub complement: String,
    pub singular_values: Vec<f64>,
    pub sigma0: Option<f64>,
    pub n_v: usize,
    pub n_w: usize,
    pub certificate: StressCertificate,
    pub constants: Option<DerivedConstants>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub eta2_case: Option<Eta2Case>,
    pub eta3: Option<f64>,
    pub e_min_star: Option<f64>,
    pub d: Option<f64>,
    pub d_pss: Option<f64>,
    pub annulus_applies: bool,
    pub barrier_applies: bool,
    pub prestress_bound_applies: bool,
    pub classification: Classification,
    pub warnings: Vec<String>,
}

/// Report plus the intermediate objects needed by the verifier.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub framework: Framework,
    pub c: DMatrix<f64>,
    pub spectral: SpectralDecomposition,
    pub report: RigidityReport,
}

impl Analysis {
    pub fn constants(&self) -> Option<&DerivedConstants> {
        self.report.constants.as_ref()
    }

    pub fn emin(&self) -> Option<EminEvaluator> {
        Some(EminEvaluator::new(self.constants()?, self.report.eta1?))
    }
}

pub fn complement_for(f: &Framework, mode: &ComplementMode) -> Result<DMatrix<f64>> {
    complement_space(&f.trivial_space(f.positions())?, mode)
}

pub fn analyze(f: &Framework, settings: &AnalysisSettings) -> Result<Analysis> {
    let c = complement_for(f, &settings.complement)?;
    let sd = spectral::decompose(f, &c, settings.selection)?;
    let cert = conic::pss_stress_search(f, &c, &sd)?;
    let mut warnings = Vec::new();

    let constants = match cert.status {
        CertificateStatus::PositiveDefinite | CertificateStatus::Vacuous => Some(ar::derive_constants(
            &cert,
            f,
            &c,
            settings.lambda_fraction,
            sd.sigma0,
        )?),
        CertificateStatus::Failed => {
            warnings.push(format!(
                "no stress makes Omega positive definite on the almost-flexes (best lambda_min {:.3e})",
                cert.lambda0
            ));
            None
        }
        CertificateStatus::NoStress => {
            warnings.push("almost-flexes present but no almost-stress".into());
            None
        }
    };

    let mut report = RigidityReport {
        dimension: f.dim(),
        n_vertices: f.n_vertices(),
        n_edges: f.n_edges(),
        selection: settings.selection,
        lambda_fraction: settings.lambda_fraction,
        complement: match &settings.complement {
            ComplementMode::Orthogonal => "orthogonal".into(),
            ComplementMode::Pinned(_) => "pinned".into(),
        },
        singular_values: sd.singular_values.clone(),
        sigma0: sd.sigma0,
        n_v: sd.n_v(),
        n_w: sd.n_w(),
        certificate: cert,
        constants: None,
        eta1: None,
        eta2: None,
        eta2_case: None,
        eta3: None,
        e_min_star: None,
        d: None,
        d_pss: None,
        annulus_applies: false,
        barrier_applies: false,
        prestress_bound_applies: false,
        classification: Classification::Inconclusive,
        warnings: Vec::new(),
    };

    if let Some(dc) = &constants {
        let eta1 = ar::compute_eta1(dc.residual, dc.lambda);
        let d = ar::compute_d(eta1, dc.l, dc.mu_bar);
        let d_pss = ar::compute_d_pss(eta1, dc.l, dc.mu_bar, dc.p_norm);
        report.eta1 = Some(eta1);
        report.d = Some(d);
        report.d_pss = Some(d_pss);
        report.annulus_applies = d < 0.5;
        report.barrier_applies = d < ar::barrier_d_bound(dc.mu_bar);
        report.prestress_bound_applies = d_pss < 0.5;
        if let Ok((eta2, case)) = ar::compute_eta2(eta1, dc.l, dc.mu_bar, d) {
            report.eta2 = Some(eta2);
            report.eta2_case = Some(case);
        }
        if report.barrier_applies {
            let (eta3, _, estar) = ar::compute_eta3_emin(dc, eta1);
            report.eta3 = Some(eta3);
            report.e_min_star = Some(estar);
        }
        if dc.kappa == 0.0 {
            warnings.push("kappa = 0: L is infinite, so eta2 and eta3 are infinite".into());
        }
        let scale = dc.kappa.abs().max(dc.kappa_schur.abs());
        if (dc.kappa - dc.kappa_schur).abs() > KAPPA_AGREEMENT * scale {
            warnings.push(format!(
                "kappa routes disagree: bisection {:.9e}, Schur {:.9e}",
                dc.kappa, dc.kappa_schur
            ));
        }
        if !report.annulus_applies {
            warnings.push(format!("D = {d:.3e} is not below 1/2"));
        }
        if let (Some(e2), Some(e3)) = (report.eta2, report.eta3) {
            if e2 < e3 {
                warnings.push(format!("eta2 = {e2:.3e} is smaller than eta3 = {e3:.3e}"));
            }
        }
    }

    let exact_prestress = match &constants {
        Some(dc) if !dc.first_order => {
            let r = f.rigidity_matrix(f.positions())?;
            ar::is_self_stress(dc.residual, r.norm(), dc.omega_norm) && exact_certificate(f, &c)?
        }
        _ => false,
    };

    report.classification = ar::classify(ClassifyInputs {
        n_v: sd.n_v(),
        certified: report.certificate.is_success(),
        exact_prestress,
        eta1: report.eta1,
        d: report.d,
    });
    report.constants = constants;
    report.warnings = warnings;

    Ok(Analysis {
        framework: f.clone(),
        c,
        spectral: sd,
        report,
    })
}

/// Tensegrity search plus the spring constant and edge margin of its stress.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensegrityReport {
    pub certificate: TensegrityCertificate,
    /// Edges (0-based, original numbering) dropped because their sign
    /// constraint was slack; they carry zero stress in `certificate.omega`.
    pub removed_edges: Vec<usize>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    /// `min 2|omega_ij| / kappa` over cables and struts.
    pub edge_margin: Option<f64>,
    pub prestress_stable: bool,
}

/// Runs the tensegrity search, dropping slack members and retrying until the
/// search succeeds or nothing is left to drop.
///
/// Without almost-flexes there is no `lambda_0` from the search, so `lambda`
/// is taken from the first-order value `2 sigma0^2`.
pub fn analyze_tensegrity(f: &Framework, settings: &AnalysisSettings) -> Result<TensegrityReport> {
    let m = f.n_edges();
    let mut alive: Vec<usize> = (0..m).collect();
    let mut removed = Vec::new();
    let mut g = f.clone();
    loop {
        let c = complement_for(&g, &settings.complement)?;
        let sd = spectral::decompose(&g, &c, settings.selection)?;
        let mut tc = conic::tensegrity_stress_search(&g, &c, &sd)?;
        let retry = !tc.certificate.is_success()
            && tc.certificate.status != CertificateStatus::NoStress
            && !tc.slack_edges.is_empty()
            && tc.slack_edges.len() < g.n_edges();
        if retry {
            removed.extend(tc.slack_edges.iter().map(|&k| alive[k]));
            let drop = tc.slack_edges.clone();
            g = g.without_edges(&drop)?;
            alive = alive
                .iter()
                .enumerate()
                .filter(|(k, _)| !drop.contains(k))
                .map(|(_, &e)| e)
                .collect();
            continue;
        }

        let mut omega = vec![0.0; m];
        for (k, &e) in alive.iter().enumerate() {
            omega[e] = tc.certificate.omega.get(k).copied().unwrap_or(0.0);
        }
        let local_slack: Vec<usize> = tc.slack_edges.iter().map(|&k| alive[k]).collect();
        let success = tc.certificate.is_success();
        let (mut lambda, mut kappa, mut margin) = (None, None, None);
        if success {
            let w = nalgebra::DVector::from_column_slice(&tc.certificate.omega);
            let l0 = match tc.t {
                Some(t) => t,
                None => {
                    let s0 = sd.sigma0.ok_or(crate::error::Error::NoNonzeroSingularValue)?;
                    2.0 * s0 * s0
                }
            };
            let l = settings.lambda_fraction * l0;
            let k = conic::KappaProblem::new(&g, &c, &w)?.solve_bisection(l)?;
            lambda = Some(l);
            kappa = Some(k);
            margin = Some(conic::tensegrity_edge_margin(&g, &w, k));
        }
        tc.certificate.omega = omega;
        tc.slack_edges = local_slack;
        return Ok(TensegrityReport {
            certificate: tc,
            removed_edges: removed,
            lambda,
            kappa,
            edge_margin: margin,
            prestress_stable: success,
        });
    }
}

/// Certificate on the exact null spaces (machine-scale cutoff).
fn exact_certificate(f: &Framework, c: &DMatrix<f64>) -> Result<bool> {
    let r = f.rigidity_matrix(f.positions())?;
    let smax = crate::linalg::full_svd(&r).singular_values.first().copied().unwrap_or(0.0);
    let sd = spectral::decompose(f, c, SubspaceSelection::Cutoff(RANK_TOL * smax))?;
    let cert = conic::pss_stress_search(f, c, &sd)?;
    Ok(matches!(
        cert.status,
        CertificateStatus::PositiveDefinite | CertificateStatus::Vacuous
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn square_first_order() {
        let a = analyze(&corpus::generate("square").unwrap(), &AnalysisSettings::default()).unwrap();
        let r = &a.report;
        assert_eq!(r.classification, Classification::FirstOrderRigid);
        assert_eq!(r.eta1, Some(0.0));
        assert!((r.eta2.unwrap() - 0.16).abs() < 0.005);
    }

    #[test]
    fn example_a_prestress_stable() {
        let a = analyze(&corpus::generate("example_a").unwrap(), &AnalysisSettings::default()).unwrap();
        let r = &a.report;
        assert_eq!((r.n_v, r.n_w), (2, 1));
        assert_eq!(r.classification, Classification::PrestressStable);
        assert!(r.eta1.unwrap() < 1e-10);
    }

    #[test]
    fn snelson_x_tensegrity() {
        let t = analyze_tensegrity(&corpus::generate("snelson_x").unwrap(), &AnalysisSettings::default()).unwrap();
        assert!(t.prestress_stable);
        assert!(t.removed_edges.is_empty());
        assert!(t.edge_margin.unwrap() > 0.0);
    }

    #[test]
    fn cable_triangle_as_bars_is_first_order_rigid() {
        let a = analyze(&corpus::generate("cable_triangle").unwrap(), &AnalysisSettings::default()).unwrap();
        assert_eq!(a.report.classification, Classification::FirstOrderRigid);
    }
}
