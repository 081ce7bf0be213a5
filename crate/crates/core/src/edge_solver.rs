//! Solving `|q_i - q_j|^2 = d_ij^2` to a tolerance, and the experiment that
//! tracks how the certified radii depend on that tolerance.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalysisSettings};
use crate::error::{Error, Result};
use crate::geometry::{kabsch_align, Framework};
use crate::linalg;
use crate::spectral::SubspaceSelection;

#[derive(Debug, Clone)]
pub struct SolveSettings {
    /// Tolerance on `max |q_ij^2 - d_ij^2|`.
    pub delta: f64,
    pub max_iterations: usize,
    /// Starting configuration; the framework's own positions when `None`.
    pub initial: Option<DVector<f64>>,
    /// 0-based coordinates held fixed.
    pub pinned: Vec<usize>,
    /// Initial damping relative to `|J^T J|`.
    pub initial_damping: f64,
    pub damping_factor: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            delta: 1e-12,
            max_iterations: 500,
            initial: None,
            pinned: Vec::new(),
            initial_damping: 1e-3,
            damping_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub configuration: Vec<f64>,
    pub iterations: usize,
    pub max_residual: f64,
    /// `|f(q)|` after each accepted step, starting with the initial value.
    pub residual_norms: Vec<f64>,
}

impl SolveReport {
    pub fn configuration_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.configuration)
    }
}

fn residuals(f: &Framework, q: &DVector<f64>, target_sq: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(f.edge_vector(q)? - target_sq)
}

/// Levenberg-Marquardt on the squared-length residuals.
///
/// Steps are taken through the SVD of the Jacobian `2 R(q)`, which stays
/// well defined when the Jacobian is rank deficient.
pub fn solve_edges(f: &Framework, targets: &[f64], settings: &SolveSettings) -> Result<SolveReport> {
    let target_sq = DVector::from_iterator(targets.len(), targets.iter().map(|d| d * d));
    solve_squared(f, &target_sq, settings)
}

/// As [`solve_edges`], with squared target lengths.
pub fn solve_squared(f: &Framework, target_sq: &DVector<f64>, settings: &SolveSettings) -> Result<SolveReport> {
    if target_sq.len() != f.n_edges() {
        return Err(Error::DimensionMismatch {
            expected: f.n_edges(),
            found: target_sq.len(),
        });
    }
    if !(settings.delta > 0.0) {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let mut q = settings.initial.clone().unwrap_or_else(|| f.positions().clone());
    if q.len() != f.n_coords() {
        return Err(Error::DimensionMismatch {
            expected: f.n_coords(),
            found: q.len(),
        });
    }
    let free: Vec<usize> = (0..f.n_coords()).filter(|c| !settings.pinned.contains(c)).collect();

    let mut res = residuals(f, &q, target_sq)?;
    let mut norms = vec![res.norm()];
    let mut mu: Option<f64> = None;
    let mut iterations = 0;

    while res.amax() > settings.delta {
        if iterations >= settings.max_iterations {
            return Err(Error::SolverNotConverged {
                iterations,
                max_residual: res.amax(),
                best: q.iter().copied().collect(),
            });
        }
        let r = f.rigidity_matrix(&q)?;
        let mut jac = DMatrix::zeros(f.n_edges(), free.len());
        for (col, &c) in free.iter().enumerate() {
            jac.set_column(col, &(r.column(c) * 2.0));
        }
        let svd = linalg::full_svd(&jac);
        let smax = svd.singular_values.first().copied().unwrap_or(0.0);
        let jtj = smax * smax;
        let floor = 1e-30 * jtj.max(f64::MIN_POSITIVE);
        let mut damping = mu.unwrap_or(settings.initial_damping * jtj).max(floor);
        let ut_r = svd.u.transpose() * &res;

        loop {
            iterations += 1;
            let mut step = DVector::zeros(free.len());
            for (k, &s) in svd.singular_values.iter().enumerate() {
                step -= svd.v.column(k) * (s / (s * s + damping) * ut_r[k]);
            }
            let mut trial = q.clone();
            for (col, &c) in free.iter().enumerate() {
                trial[c] += step[col];
            }
            let trial_res = residuals(f, &trial, target_sq)?;
            if trial_res.norm() < res.norm() {
                q = trial;
                res = trial_res;
                norms.push(res.norm());
                mu = Some((damping / settings.damping_factor).max(floor));
                break;
            }
            damping *= settings.damping_factor;
            if damping > 1e20 * jtj.max(1.0) || iterations >= settings.max_iterations {
                return Err(Error::SolverNotConverged {
                    iterations,
                    max_residual: res.amax(),
                    best: q.iter().copied().collect(),
                });
            }
        }
    }

    Ok(SolveReport {
        configuration: q.iter().copied().collect(),
        iterations,
        max_residual: res.amax(),
        residual_norms: norms,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentSettings {
    pub deltas: Vec<f64>,
    pub trials: usize,
    /// Standard deviation of the perturbation, relative to the mean edge length.
    pub perturb_scale: f64,
    pub seed: u64,
    /// Settings for the seed analysis; its subspace sizes are reused for every trial.
    pub analysis: AnalysisSettings,
    pub max_iterations: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            deltas: (0..=8).map(|k| 10f64.powi(-14 + k)).collect(),
            trials: 20,
            perturb_scale: 1e-3,
            seed: 0,
            analysis: AnalysisSettings::default(),
            max_iterations: 500,
        }
    }
}

/// One `(delta, trial)` cell. The CSV columns are `delta, trial, eta1, eta2,
/// eta3, e_min_star, D, D_pss, classification`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub delta: f64,
    pub trial: usize,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub eta3: Option<f64>,
    pub e_min_star: Option<f64>,
    pub d: Option<f64>,
    pub d_pss: Option<f64>,
    pub classification: String,
    pub max_residual: Option<f64>,
    pub distance_to_seed: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct MeanStd {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
        let n = v.len();
        if n == 0 {
            return MeanStd { count: 0, mean: f64::NAN, std: f64::NAN };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        MeanStd { count: n, mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaSummary {
    pub delta: f64,
    pub failures: usize,
    pub eta1: MeanStd,
    pub eta2: MeanStd,
    pub e_min_star: MeanStd,
    pub d: MeanStd,
    pub d_pss: MeanStd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub selection: SubspaceSelection,
    pub seed_eta2: Option<f64>,
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<DeltaSummary>,
}

impl ExperimentResult {
    /// Least-squares slope of `log(mean eta1)` against `log(delta)`.
    pub fn eta1_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .summary
            .iter()
            .filter(|s| s.eta1.count > 0 && s.eta1.mean > 0.0)
            .map(|s| (s.delta, s.eta1.mean))
            .collect();
        log_log_slope(&pts)
    }
}

pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

pub fn perturbation_experiment(f: &Framework, settings: &ExperimentSettings) -> Result<ExperimentResult> {
    if settings.trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    if settings.deltas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("delta list must be sorted ascending".into()));
    }
    let seed_analysis = analyze(f, &settings.analysis)?;
    let selection = SubspaceSelection::Smallest {
        flexes: seed_analysis.report.n_v,
        stresses: seed_analysis.report.n_w,
    };
    let trial_settings = AnalysisSettings {
        selection,
        ..settings.analysis.clone()
    };
    let lengths = f.edge_lengths();
    let mean_len = lengths.iter().sum::<f64>() / lengths.len().max(1) as f64;
    let target_sq = f.edge_vector(f.positions())?;
    let sigma = settings.perturb_scale * mean_len;
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Precondition(e.to_string()))?;

    let per_trial: Vec<Vec<ExperimentRow>> = (0..settings.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(trial as u64);
            let start = f.positions().map(|x| x + noise.sample(&mut rng));
            settings
                .deltas
                .iter()
                .map(|&delta| run_cell(f, &target_sq, &start, delta, trial, &trial_settings, settings.max_iterations))
                .collect()
        })
        .collect();
    let rows: Vec<ExperimentRow> = per_trial.into_iter().flatten().collect();

    let summary = settings
        .deltas
        .iter()
        .map(|&delta| {
            let cell: Vec<&ExperimentRow> = rows.iter().filter(|r| r.delta == delta).collect();
            let stat = |get: fn(&ExperimentRow) -> Option<f64>| MeanStd::of(cell.iter().filter_map(|r| get(r)));
            DeltaSummary {
                delta,
                failures: cell.iter().filter(|r| r.error.is_some()).count(),
                eta1: stat(|r| r.eta1),
                eta2: stat(|r| r.eta2),
                e_min_star: stat(|r| r.e_min_star),
                d: stat(|r| r.d),
                d_pss: stat(|r| r.d_pss),
            }
        })
        .collect();

    Ok(ExperimentResult {
        selection,
        seed_eta2: seed_analysis.report.eta2,
        rows,
        summary,
    })
}

fn run_cell(
    f: &Framework,
    target_sq: &DVector<f64>,
    start: &DVector<f64>,
    delta: f64,
    trial: usize,
    analysis: &AnalysisSettings,
    max_iterations: usize,
) -> ExperimentRow {
    let mut row = ExperimentRow {
        delta,
        trial,
        eta1: None,
        eta2: None,
        eta3: None,
        e_min_star: None,
        d: None,
        d_pss: None,
        classification: "failed".into(),
        max_residual: None,
        distance_to_seed: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let solve = solve_squared(
            f,
            target_sq,
            &SolveSettings {
                delta,
                max_iterations,
                initial: Some(start.clone()),
                ..SolveSettings::default()
            },
        )?;
        row.max_residual = Some(solve.max_residual);
        let aligned = kabsch_align(f.positions(), &solve.configuration_vec(), f.dim())?;
        row.distance_to_seed = Some((&aligned - f.positions()).norm());
        let rep = analyze(&f.with_positions(aligned)?, analysis)?.report;
        row.eta1 = rep.eta1;
        row.eta2 = rep.eta2;
        row.eta3 = rep.eta3;
        row.e_min_star = rep.e_min_star;
        row.d = rep.d;
        row.d_pss = rep.d_pss;
        row.classification = rep.classification.to_string();
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn exact_start_needs_no_iterations() {
        let f = corpus::generate("square").unwrap();
        let target_sq = f.edge_vector(f.positions()).unwrap();
        let rep = solve_squared(&f, &target_sq, &SolveSettings::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.max_residual, 0.0);
        assert_eq!(rep.configuration_vec(), *f.positions());
    }

    #[test]
    fn tetrahedron_from_nearby_start() {
        let f = corpus::generate("tetrahedron").unwrap();
        let start = f.positions().map(|x| x + 0.05 * (x * 37.0).sin());
        let settings = SolveSettings {
            delta: 9e-16,
            initial: Some(start),
            ..SolveSettings::default()
        };
        let rep = solve_edges(&f, &f.edge_lengths(), &settings).unwrap();
        assert!(rep.max_residual <= 9e-16);
        assert!(rep.residual_norms.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn pinned_coordinates_do_not_move() {
        let f = corpus::generate("example_h").unwrap();
        let start = f.positions().map(|x| x + 0.01 * (x * 11.0 + 1.0).cos());
        let pinned = vec![0, 1, 2];
        let settings = SolveSettings {
            delta: 1e-10,
            initial: Some(start.clone()),
            pinned: pinned.clone(),
            ..SolveSettings::default()
        };
        let rep = solve_edges(&f, &f.edge_lengths(), &settings).unwrap();
        for c in pinned {
            assert_eq!(rep.configuration[c].to_bits(), start[c].to_bits());
        }
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (10f64.powi(k), 3.0 * 10f64.powf(0.5 * k as f64))).collect();
        assert!((log_log_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn huge_delta_single_trial_does_not_crash() {
        let f = corpus::generate("example_h").unwrap();
        let settings = ExperimentSettings {
            deltas: vec![10.0],
            trials: 1,
            perturb_scale: 0.2,
            ..ExperimentSettings::default()
        };
        let res = perturbation_experiment(&f, &settings).unwrap();
        assert_eq!(res.rows.len(), 1);
    }
}
