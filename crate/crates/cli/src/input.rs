use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rigidity::analysis::AnalysisSettings;
use rigidity::geometry::ComplementMode;
use rigidity::spectral::SubspaceSelection;
use rigidity::{corpus, Framework};

use crate::{Source, Tuning};

pub fn load(source: &Source) -> Result<Framework> {
    match (&source.input, &source.corpus) {
        (_, Some(name)) => Ok(corpus::generate(name)?),
        (Some(path), None) => corpus::load(path).with_context(|| format!("reading {}", path.display())),
        (None, None) => bail!("give a framework file or --corpus NAME"),
    }
}

pub fn settings(tuning: &Tuning, f: &Framework) -> Result<AnalysisSettings> {
    if !(tuning.lambda_frac > 0.0 && tuning.lambda_frac < 1.0) {
        bail!("--lambda-frac must lie in (0, 1), got {}", tuning.lambda_frac);
    }
    if !(tuning.sigma_cutoff >= 0.0) {
        bail!("--sigma-cutoff must be nonnegative");
    }
    Ok(AnalysisSettings {
        selection: SubspaceSelection::Cutoff(tuning.sigma_cutoff),
        lambda_fraction: tuning.lambda_frac,
        complement: complement_mode(&tuning.pin, f)?,
    })
}

fn complement_mode(pin: &str, f: &Framework) -> Result<ComplementMode> {
    match pin {
        "auto" => Ok(match f.pinned() {
            Some(p) => ComplementMode::Pinned(p.to_vec()),
            None => ComplementMode::Orthogonal,
        }),
        "none" => Ok(ComplementMode::Orthogonal),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading pin file {path}"))?;
            let coords: Vec<usize> =
                serde_json::from_str(&text).with_context(|| format!("pin file {path}: expected a JSON array of indices"))?;
            let n = f.n_coords();
            if let Some(c) = coords.iter().find(|&&c| c == 0 || c > n) {
                bail!("pin file {path}: coordinate {c} outside 1..={n}");
            }
            Ok(ComplementMode::Pinned(coords.iter().map(|c| c - 1).collect()))
        }
    }
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, body).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}
