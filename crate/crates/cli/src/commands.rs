use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use rigidity::analysis::{analyze as run_analysis, analyze_tensegrity, TensegrityReport};
use rigidity::corpus;
use rigidity::edge_solver::{perturbation_experiment, ExperimentSettings};
use rigidity::energy::{verify_analysis, VerificationRecord};
use rigidity::geometry::EdgeLabel;
use rigidity::RigidityReport;

use crate::input::{emit, load, settings};
use crate::{text, AnalyzeArgs, Format, PerturbArgs, ScanArgs, SweepArgs, TensegrityArgs};

#[derive(Serialize)]
struct AnalyzeOutput {
    report: RigidityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationRecord>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let f = load(&a.source)?;
    let an = run_analysis(&f, &settings(&a.tuning, &f)?)?;
    let verification = if a.verify > 0 {
        if an.constants().is_some() {
            Some(verify_analysis(&an, a.verify, a.seed)?)
        } else {
            eprintln!("verification skipped: no certificate");
            None
        }
    } else {
        None
    };
    let out = AnalyzeOutput {
        report: an.report,
        verification,
    };
    let body = match a.format {
        Format::Json => to_json(&out)?,
        Format::Text => {
            let mut s = text::report(&out.report);
            if let Some(v) = &out.verification {
                s.push_str(&text::verification(v));
            }
            s
        }
    };
    emit(a.out.as_deref(), &body)
}

#[derive(Serialize)]
struct SweepRow {
    lambda_frac: f64,
    #[serde(rename = "L")]
    l: Option<f64>,
    kappa: Option<f64>,
    eta1: Option<f64>,
    eta2: Option<f64>,
    eta3: Option<f64>,
    e_min_star: Option<f64>,
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        bail!("grid must look like start:stop:count, got {spec:?}");
    };
    let (lo, hi): (f64, f64) = (lo.trim().parse()?, hi.trim().parse()?);
    let n: usize = n.trim().parse()?;
    if n == 0 || !(lo > 0.0 && hi < 1.0 && lo <= hi) {
        bail!("grid needs 0 < start <= stop < 1 and count >= 1");
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

pub fn sweep_lambda(a: &SweepArgs) -> Result<()> {
    let f = load(&a.source)?;
    let base = settings(&a.tuning, &f)?;
    let grid = parse_grid(&a.grid)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for frac in grid {
        let s = rigidity::AnalysisSettings {
            lambda_fraction: frac,
            ..base.clone()
        };
        let rep = run_analysis(&f, &s)?.report;
        let c = rep.constants.as_ref();
        w.serialize(SweepRow {
            lambda_frac: frac,
            l: c.map(|c| c.l),
            kappa: c.map(|c| c.kappa),
            eta1: rep.eta1,
            eta2: rep.eta2,
            eta3: rep.eta3,
            e_min_star: rep.e_min_star,
        })?;
    }
    emit(a.out.as_deref(), &String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct ScanRow {
    file: String,
    status: &'static str,
    classification: Option<String>,
    n_v: Option<usize>,
    n_w: Option<usize>,
    eta1: Option<f64>,
    eta2: Option<f64>,
    eta3: Option<f64>,
    e_min_star: Option<f64>,
    #[serde(rename = "D")]
    d: Option<f64>,
    #[serde(rename = "D_pss")]
    d_pss: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct Aggregate {
    files: usize,
    completed: usize,
    failed: Vec<String>,
    classifications: BTreeMap<String, usize>,
    max_d: Option<f64>,
    max_d_pss: Option<f64>,
    d_at_least_half: usize,
}

fn scan_one(path: &Path, tuning: &crate::Tuning, out_dir: &Path) -> ScanRow {
    let file = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let result = (|| -> Result<RigidityReport> {
        let f = corpus::load(path)?;
        let rep = run_analysis(&f, &settings(tuning, &f)?)?.report;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        fs::write(out_dir.join(format!("{stem}.report.json")), to_json(&rep)?)?;
        Ok(rep)
    })();
    match result {
        Ok(r) => ScanRow {
            file,
            status: "ok",
            classification: Some(r.classification.to_string()),
            n_v: Some(r.n_v),
            n_w: Some(r.n_w),
            eta1: r.eta1,
            eta2: r.eta2,
            eta3: r.eta3,
            e_min_star: r.e_min_star,
            d: r.d,
            d_pss: r.d_pss,
            error: None,
        },
        Err(e) => ScanRow {
            file,
            status: "error",
            classification: None,
            n_v: None,
            n_w: None,
            eta1: None,
            eta2: None,
            eta3: None,
            e_min_star: None,
            d: None,
            d_pss: None,
            error: Some(format!("{e:#}")),
        },
    }
}

pub fn scan(a: &ScanArgs) -> Result<()> {
    let mut files: Vec<PathBuf> = fs::read_dir(&a.dir)
        .with_context(|| format!("reading directory {}", a.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = a.parallel {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build()?;
    let rows: Vec<ScanRow> = pool.install(|| files.par_iter().map(|p| scan_one(p, &a.tuning, &a.out_dir)).collect());

    let mut w = csv::Writer::from_path(a.out_dir.join("summary.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let mut classifications = BTreeMap::new();
    for r in &rows {
        if let Some(c) = &r.classification {
            *classifications.entry(c.clone()).or_insert(0) += 1;
        }
    }
    let fmax = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    let agg = Aggregate {
        files: rows.len(),
        completed: rows.iter().filter(|r| r.status == "ok").count(),
        failed: rows.iter().filter(|r| r.status != "ok").map(|r| r.file.clone()).collect(),
        classifications,
        max_d: fmax(&mut rows.iter().filter_map(|r| r.d)),
        max_d_pss: fmax(&mut rows.iter().filter_map(|r| r.d_pss)),
        d_at_least_half: rows.iter().filter(|r| r.d.is_some_and(|d| d >= 0.5)).count(),
    };
    let body = to_json(&agg)?;
    fs::write(a.out_dir.join("aggregate.json"), &body)?;
    emit(None, &body)
}

#[derive(Serialize)]
struct PerturbRow<'a> {
    delta: f64,
    trial: usize,
    eta1: Option<f64>,
    eta2: Option<f64>,
    eta3: Option<f64>,
    e_min_star: Option<f64>,
    #[serde(rename = "D")]
    d: Option<f64>,
    #[serde(rename = "D_pss")]
    d_pss: Option<f64>,
    classification: &'a str,
}

pub fn perturb(a: &PerturbArgs) -> Result<()> {
    let f = load(&a.source)?;
    let mut deltas = a.delta_list.clone();
    deltas.sort_by(f64::total_cmp);
    let settings = ExperimentSettings {
        deltas,
        trials: a.trials,
        perturb_scale: a.scale,
        seed: a.seed,
        analysis: settings(&a.tuning, &f)?,
        max_iterations: a.max_iterations,
    };
    let res = perturbation_experiment(&f, &settings)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &res.rows {
        w.serialize(PerturbRow {
            delta: r.delta,
            trial: r.trial,
            eta1: r.eta1,
            eta2: r.eta2,
            eta3: r.eta3,
            e_min_star: r.e_min_star,
            d: r.d,
            d_pss: r.d_pss,
            classification: &r.classification,
        })?;
    }
    emit(a.out.as_deref(), &String::from_utf8(w.into_inner()?)?)?;

    for s in &res.summary {
        eprintln!(
            "delta {:e}: eta1 {:e} +- {:e}, eta2 {:e}, e_min* {:e}, D {:e}, failures {}",
            s.delta, s.eta1.mean, s.eta1.std, s.eta2.mean, s.e_min_star.mean, s.d.mean, s.failures
        );
    }
    if let Some(slope) = res.eta1_slope() {
        eprintln!("log-log slope of mean eta1 against delta: {slope:.4}");
    }
    Ok(())
}

#[derive(Serialize)]
struct TensegrityOutput {
    #[serde(flatten)]
    report: TensegrityReport,
    /// 0 when certified, 1 otherwise. The process exit code stays 0.
    exit_status: u8,
}

pub fn tensegrity(a: &TensegrityArgs) -> Result<()> {
    let f = load(&a.source)?;
    let all_bars = f.labels().is_none_or(|l| l.iter().all(|&x| x == EdgeLabel::Bar));
    if all_bars {
        // Nothing to sign-constrain: this is exactly the plain analysis.
        return analyze(&AnalyzeArgs {
            source: a.source.clone(),
            tuning: a.tuning.clone(),
            verify: 0,
            seed: 0,
            format: a.format,
            out: a.out.clone(),
        });
    }
    let rep = analyze_tensegrity(&f, &settings(&a.tuning, &f)?)?;
    let body = match a.format {
        Format::Json => to_json(&TensegrityOutput {
            exit_status: u8::from(!rep.prestress_stable),
            report: rep,
        })?,
        Format::Text => text::tensegrity(&rep),
    };
    emit(a.out.as_deref(), &body)
}

pub fn corpus_list() -> Result<()> {
    let mut s = String::new();
    for (name, desc) in corpus::ENTRIES {
        s.push_str(&format!("{name:<16} {desc}\n"));
    }
    emit(None, &s)
}

pub fn corpus_show(name: &str) -> Result<()> {
    let f = corpus::generate(name)?;
    emit(None, &format!("{}\n", corpus::to_json_string(&f)))
}

pub fn corpus_export(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for name in corpus::names() {
        corpus::save(dir.join(format!("{name}.json")), &corpus::generate(name)?)?;
    }
    Ok(())
}
