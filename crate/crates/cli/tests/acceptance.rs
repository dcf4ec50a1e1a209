//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p tsd-cli --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use tsd_cli::repro::{self, ReproSettings};
use tsd_core::models::{hubbard_tau, hubbard_term_matrix};
use tsd_core::{GrowthModel, NoiseMode};

struct Criterion {
    id: u32,
    name: &'static str,
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Self { id, name, checks: Vec::new() }
    }

    fn check(&mut self, pass: bool, detail: String) {
        self.checks.push((pass, detail));
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(p, _)| *p)
    }

    fn report(&self) {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let details: Vec<String> =
            self.checks.iter().map(|(p, d)| format!("{}{d}", if *p { "" } else { "[x] " })).collect();
        println!("{verdict} {}. {}: {}", self.id, self.name, details.join("; "));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn scalar_criteria(settings: &ReproSettings) -> (Criterion, Criterion) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    let start = Instant::now();
    let r = pool.install(|| repro::scalar(settings)).expect("scalar campaign");
    let secs = start.elapsed().as_secs_f64();

    let mut c1 = Criterion::new(1, "scalar log-normal reproduction");
    let target_mean = 0.125f64.exp();
    let target_std = (0.5f64.exp() - 0.25f64.exp()).sqrt();
    c1.check(rel(r.x_mean, target_mean) <= 0.01, format!("mean(X) {:.5} vs {target_mean:.5} (tol 1%)", r.x_mean));
    c1.check(rel(r.x_std, target_std) <= 0.03, format!("std(X) {:.5} vs {target_std:.5} (tol 3%)", r.x_std));
    let e = &r.epsilon;
    c1.check(
        e.mean >= r.scalar_mean_lower - 3.0 * e.mean_stderr,
        format!("mu(eps) {:.5} >= {:.5} - 3se", e.mean, r.scalar_mean_lower),
    );
    c1.check(
        e.std >= r.scalar_std_lower - 3.0 * e.std_stderr,
        format!("sigma(eps) {:.5} >= {:.5} - 3se", e.std, r.scalar_std_lower),
    );
    c1.check(secs <= 30.0, format!("{} trials in {secs:.1}s single-threaded (limit 30s)", r.trials));

    let mut c2 = Criterion::new(2, "folded log-normal shape");
    c2.check(r.ks_folded_lognormal <= 0.02, format!("KS {:.4} (limit 0.02)", r.ks_folded_lognormal));
    (c1, c2)
}

fn factor_error_criterion(settings: &ReproSettings) -> Criterion {
    let r = repro::factor_error(settings).expect("factor error campaign");
    let mut c = Criterion::new(3, "per-factor error corridor");
    let em = r.epsilon_m;
    for p in &r.points {
        let (lo, hi) = (0.9 * em, 1.1 * em * (p.dim as f64).sqrt());
        c.check(lo <= p.rms && p.rms <= hi, format!("dim {} sigma {:.3e} in [{lo:.2e}, {hi:.2e}]", p.dim, p.rms));
        if p.dim == 64 {
            c.check(
                p.fraction_within_support >= 0.99,
                format!("dim 64 {:.2}% <= {:.2e}", 100.0 * p.fraction_within_support, p.support),
            );
        }
    }
    c
}

fn instability_criterion(settings: &ReproSettings) -> Criterion {
    let r = repro::instability(settings).expect("instability campaign");
    let mut c = Criterion::new(4, "instability without normalization");
    let fit = r.series.fit;
    let sigmas: Vec<String> = r.series.points.iter().map(|p| format!("{}:{:.2e}", p.n, p.stats.std)).collect();
    c.check(
        fit.model == GrowthModel::Exponential && fit.rate > 0.0 && fit.r_squared >= 0.95,
        format!(
            "factor norm {:.3}; sigma {}; fit {:?} rate {:.4} r2 {:.4}",
            r.mean_factor_norm,
            sigmas.join(" "),
            fit.model,
            fit.rate,
            fit.r_squared
        ),
    );
    c
}

fn stabilized_criterion(settings: &ReproSettings) -> Criterion {
    let r = repro::stabilized(settings).expect("stabilized campaign");
    let mut c = Criterion::new(5, "stabilized linear growth");
    for s in &r.series {
        let label = format!("{:?} dim {}", s.mode, s.dim);
        let within_thm3 = s.points.iter().all(|p| p.stats.std <= p.bounds.thm3_upper);
        let worst = s.points.iter().map(|p| p.stats.std / p.bounds.thm3_upper).fold(0.0, f64::max);
        c.check(within_thm3, format!("{label}: sigma <= thm3 (max ratio {worst:.3})"));
        if s.mode == NoiseMode::GaussianUnitary {
            let worst = s.points.iter().map(|p| p.stats.std / p.bounds.cor5_upper).fold(0.0, f64::max);
            c.check(worst <= 1.0, format!("{label}: sigma <= cor5 (max ratio {worst:.3})"));
            c.check(
                s.fit.model == GrowthModel::Linear,
                format!(
                    "{label}: fit {:?} (linear r2 {:.3}, exponential r2 {:.3})",
                    s.fit.model,
                    s.fit.linear_r_squared,
                    s.fit.exponential_r_squared.unwrap_or(f64::NAN)
                ),
            );
        }
    }
    c
}

fn budget_criterion(settings: &ReproSettings) -> Criterion {
    let r = repro::budget(settings).expect("budget campaign");
    let mut c = Criterion::new(6, "machine-precision budget");
    let limit = r.epsilon_t + 3.0 * r.stats.std_stderr;
    c.check(
        r.stats.std <= limit,
        format!("epsilon_m {:.4e}; sigma {:.3e} <= {:.3e}", r.epsilon_m, r.stats.std, r.epsilon_t),
    );
    c
}

fn order_criterion(settings: &ReproSettings) -> Criterion {
    let r = repro::order_scaling(settings).expect("order scaling");
    let mut c = Criterion::new(7, "ideal-error order scaling");
    c.check((r.slope_k1 - 3.0).abs() <= 0.3, format!("k=1 slope {:.3}", r.slope_k1));
    c.check((r.slope_k2 - 5.0).abs() <= 0.3, format!("k=2 slope {:.3}", r.slope_k2));
    c.check((1.6..=2.4).contains(&r.trotter_ratio), format!("trotter r-doubling ratio {:.3}", r.trotter_ratio));
    c
}

fn hubbard_criterion() -> Criterion {
    let mut c = Criterion::new(8, "Hubbard closed forms");
    let h = hubbard_term_matrix::<f64>(1.0, 2.0).expect("term matrix");
    let expected = [[0.0, 0.0, -1.0, -1.0], [0.0, 0.0, 1.0, 1.0], [-1.0, 1.0, 2.0, 0.0], [-1.0, 1.0, 0.0, 2.0]];
    let exact = (0..4).all(|i| (0..4).all(|j| h[(i, j)].re == expected[i][j] && h[(i, j)].im == 0.0));
    c.check(exact, "term matrix exact".into());
    let tau = hubbard_tau(1.0, 1.0, 2.0);
    c.check((tau - 4.0).abs() <= 1e-12, format!("tau {tau}"));
    let doc = repro::hubbard().expect("hubbard");
    c.check(
        doc.cross_check_residual <= 1e-12,
        format!("N_exp {:.4e}, budget {:.4e}, cross-check residual {:.1e}", doc.n_exp, doc.epsilon_m_budget, doc.cross_check_residual),
    );
    c
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("output directory") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).expect("prefix").display().to_string();
                files.insert(key, fs::read(&path).expect("output file"));
            }
        }
    }
    files
}

fn determinism_criterion() -> Criterion {
    let mut c = Criterion::new(9, "determinism");
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut runs = Vec::new();
    for (name, threads) in [("first", "1"), ("second", "1"), ("eight", "8")] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_tsd"))
            .args(["repro", "--trials", "200", "--threads", threads, "--out"])
            .arg(&out)
            .output()
            .expect("run tsd");
        if !status.status.success() {
            c.check(false, format!("repro failed: {}", String::from_utf8_lossy(&status.stderr)));
            return c;
        }
        runs.push(tree(&out));
    }
    c.check(!runs[0].is_empty(), format!("{} files per run", runs[0].len()));
    c.check(runs[0] == runs[1], "repeat run byte-identical".into());
    c.check(runs[0] == runs[2], "1 vs 8 threads byte-identical".into());
    c
}

fn main() {
    let settings = ReproSettings::default();
    let (c1, c2) = scalar_criteria(&settings);
    let criteria = vec![
        c1,
        c2,
        factor_error_criterion(&settings),
        instability_criterion(&settings),
        stabilized_criterion(&settings),
        budget_criterion(&settings),
        order_criterion(&settings),
        hubbard_criterion(),
        determinism_criterion(),
    ];
    for c in &criteria {
        c.report();
    }
    let failed: Vec<u32> = criteria.iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
