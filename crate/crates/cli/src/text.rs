//! Plain-text rendering. Every number is printed with `{:e}`, which
//! round-trips, so the text and JSON outputs carry identical values.

use std::fmt::Write;

use rigidity::analysis::TensegrityReport;
use rigidity::energy::{CheckStats, VerificationRecord};
use rigidity::RigidityReport;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:e}"))
}

pub fn report(r: &RigidityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "classification  {}", r.classification);
    let _ = writeln!(s, "size            d = {}, n = {}, m = {}", r.dimension, r.n_vertices, r.n_edges);
    let _ = writeln!(s, "complement      {}", r.complement);
    let _ = writeln!(s, "n_v, n_w        {}, {}", r.n_v, r.n_w);
    let _ = writeln!(s, "sigma0          {}", opt(r.sigma0));
    let _ = writeln!(
        s,
        "certificate     {:?} via {:?}, lambda0 = {:e}, mu0 = {:e}",
        r.certificate.status, r.certificate.method, r.certificate.lambda0, r.certificate.mu0
    );
    if let Some(c) = &r.constants {
        let _ = writeln!(s, "lambda          {:e}", c.lambda);
        let _ = writeln!(s, "kappa           {:e} (Schur {:e})", c.kappa, c.kappa_schur);
        let _ = writeln!(s, "L               {:e}", c.l);
        let _ = writeln!(s, "mu_bar          {:e}", c.mu_bar);
        let _ = writeln!(s, "z               {}", c.z);
    }
    let _ = writeln!(s, "eta1            {}", opt(r.eta1));
    let _ = writeln!(s, "eta2            {}", opt(r.eta2));
    let _ = writeln!(s, "eta3            {}", opt(r.eta3));
    let _ = writeln!(s, "e_min_star      {}", opt(r.e_min_star));
    let _ = writeln!(s, "D               {}", opt(r.d));
    let _ = writeln!(s, "D_pss           {}", opt(r.d_pss));
    for w in &r.warnings {
        let _ = writeln!(s, "warning         {w}");
    }
    s
}

fn stats(s: &mut String, name: &str, c: &Option<CheckStats>) {
    match c {
        Some(c) => {
            let _ = writeln!(
                s,
                "{name:<15} {} samples, {} violations, worst margin {:e}",
                c.samples, c.violations, c.worst_margin
            );
        }
        None => {
            let _ = writeln!(s, "{name:<15} skipped");
        }
    }
}

pub fn verification(v: &VerificationRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verification    seed {}, {} directions x {} radii", v.seed, v.directions, v.radii_per_direction);
    stats(&mut s, "annulus", &v.annulus);
    stats(&mut s, "barrier", &v.barrier);
    stats(&mut s, "edge barrier", &v.edge_barrier);
    for n in &v.notices {
        let _ = writeln!(s, "notice          {n}");
    }
    s
}

pub fn tensegrity(t: &TensegrityReport) -> String {
    let mut s = String::new();
    let c = &t.certificate;
    let _ = writeln!(s, "status          {:?}", c.certificate.status);
    let _ = writeln!(s, "prestress       {}", if t.prestress_stable { "stable" } else { "not certified" });
    let _ = writeln!(s, "s               {:e}", c.s);
    let _ = writeln!(s, "t               {}", opt(c.t));
    let _ = writeln!(s, "lambda          {}", opt(t.lambda));
    let _ = writeln!(s, "kappa           {}", opt(t.kappa));
    let _ = writeln!(s, "edge margin     {}", opt(t.edge_margin));
    let list = |v: &[usize]| {
        if v.is_empty() {
            "-".to_string()
        } else {
            v.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(" ")
        }
    };
    let _ = writeln!(s, "slack edges     {}", list(&c.slack_edges));
    let _ = writeln!(s, "removed edges   {}", list(&t.removed_edges));
    let omega: Vec<String> = c.certificate.omega.iter().map(|w| format!("{w:e}")).collect();
    let _ = writeln!(s, "omega           {}", omega.join(" "));
    s
}
