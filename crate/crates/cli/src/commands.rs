use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use tsd_core::models::{
    enumerate_lattice_terms, hubbard_cost, hubbard_cross_check, hubbard_machine_epsilon, hubbard_tau,
    hubbard_term_matrix, Boundary, HubbardParams,
};
use tsd_core::{
    build_schedule, fit_growth, ideal_error, theorem_bounds, BoundReport, DoubleDouble, GeneratorClass,
    GeneratorSet, GrowthFit, NoiseSpec, PreparedProduct, Scalar, Schedule,
};

use crate::campaign::{run_point, trials_csv, PointInfo, Premises, Summary};
use crate::config::{half_order, order_spec, CampaignConfig, LambdaScaling, Precision};
use crate::error::{CliError, CliResult};
use crate::output::{Csv, Outputs};

/// What a command produced: files to commit and a message for stdout.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Outputs,
    pub stdout: String,
}

fn total_lambda(cfg: &CampaignConfig, lambda: f64, r: u32) -> f64 {
    match cfg.lambda_scaling {
        LambdaScaling::Total => lambda,
        LambdaScaling::PerSegment => lambda * f64::from(r),
    }
}

fn schedule_in<T: Scalar>(m: usize, order: u32, r: u32, lambda: f64, merge: bool) -> CliResult<Schedule<T>> {
    Ok(build_schedule(m, order_spec(order, r)?, T::lit(lambda), merge)?)
}

pub fn schedule(cfg: &CampaignConfig) -> CliResult<Report> {
    let m = cfg.m()?;
    let lambda = total_lambda(cfg, cfg.lambda()?, cfg.r);
    let s = schedule_in::<f64>(m, cfg.order, cfg.r, lambda, cfg.merge)?;
    let count = s.exponential_count();
    let mut outputs = Outputs::new();
    outputs.add_json("schedule.json", &s)?;
    Ok(Report {
        outputs,
        stdout: format!(
            "terms: {}\nraw exponentials: {}\nmerged exponentials: {}\n",
            s.len(),
            count.raw_exponentials,
            count.merged_exponentials
        ),
    })
}

fn axis<T: Copy>(values: &Option<Vec<T>>, default: T) -> Vec<T> {
    values.clone().unwrap_or_else(|| vec![default])
}

fn lambdas(cfg: &CampaignConfig) -> CliResult<Vec<f64>> {
    match &cfg.sweep.lambda {
        Some(values) => Ok(values.clone()),
        None => Ok(vec![cfg.lambda()?]),
    }
}

fn reject_axes(cfg: &CampaignConfig, command: &str, names: &[&str]) -> CliResult<()> {
    let present = |name: &str| match name {
        "n" => cfg.sweep.n.is_some(),
        "epsilon_m" => cfg.sweep.epsilon_m.is_some(),
        _ => false,
    };
    match names.iter().find(|n| present(n)) {
        Some(n) => Err(CliError::invalid(format!("sweep axis `{n}` does not apply to {command}"))),
        None => Ok(()),
    }
}

fn ideal_in<T: Scalar>(gens: &GeneratorSet<f64>, order: u32, r: u32, lambda: f64, merge: bool) -> CliResult<f64> {
    let gens = gens.cast::<T>();
    let s = schedule_in::<T>(gens.len(), order, r, lambda, merge)?;
    Ok(ideal_error(&gens, T::lit(lambda), &s)?.to_f64_lossy())
}

pub fn ideal_error_sweep(cfg: &CampaignConfig) -> CliResult<Report> {
    reject_axes(cfg, "ideal-error", &["n", "epsilon_m"])?;
    let gens = cfg.source()?.build()?;
    let mut csv = Csv::new(&["lambda", "r", "k", "ideal_error"]);
    let mut rows = 0usize;
    for order in axis(&cfg.sweep.order, cfg.order) {
        for r in axis(&cfg.sweep.r, cfg.r) {
            let spec = order_spec(order, r)?;
            for lambda in lambdas(cfg)? {
                let lambda = total_lambda(cfg, lambda, r);
                let err = match cfg.precision {
                    Precision::F64 => ideal_in::<f64>(&gens, order, r, lambda, cfg.merge)?,
                    Precision::Dd => ideal_in::<DoubleDouble>(&gens, order, r, lambda, cfg.merge)?,
                };
                csv.row(&[lambda.into(), r.into(), half_order(spec).into(), err.into()])?;
                rows += 1;
            }
        }
    }
    let mut outputs = Outputs::new();
    outputs.add_csv("ideal_error.csv", csv);
    Ok(Report { outputs, stdout: format!("{rows} ideal-error rows\n") })
}

#[derive(Clone, Copy, Debug)]
struct NoisePoint {
    order: u32,
    r: u32,
    lambda: f64,
    epsilon_m: f64,
}

fn noise_points(cfg: &CampaignConfig, m: usize, base: &NoiseSpec) -> CliResult<Vec<NoisePoint>> {
    if cfg.sweep.n.is_some() && cfg.sweep.r.is_some() {
        return Err(CliError::invalid("sweep axes `n` and `r` are mutually exclusive"));
    }
    let mut points = Vec::new();
    for order in axis(&cfg.sweep.order, cfg.order) {
        let per_segment = order_spec(order, 1)?.factors_per_segment(m)?;
        let rs: Vec<u32> = match &cfg.sweep.n {
            Some(ns) => ns
                .iter()
                .map(|&n| {
                    let fits = per_segment > 0 && n % per_segment as u64 == 0 && n > 0;
                    if !fits || cfg.merge {
                        return Err(CliError::invalid(format!(
                            "N = {n} is not a whole number of unmerged {per_segment}-factor segments"
                        )));
                    }
                    u32::try_from(n / per_segment as u64).map_err(|_| CliError::invalid(format!("N = {n} is too large")))
                })
                .collect::<CliResult<_>>()?,
            None => axis(&cfg.sweep.r, cfg.r),
        };
        for &r in &rs {
            for lambda in lambdas(cfg)? {
                for epsilon_m in axis(&cfg.sweep.epsilon_m, base.epsilon_m) {
                    points.push(NoisePoint { order, r, lambda: total_lambda(cfg, lambda, r), epsilon_m });
                }
            }
        }
    }
    Ok(points)
}

fn simulate<T: Scalar>(
    cfg: &CampaignConfig,
    gens: &GeneratorSet<f64>,
    pt: NoisePoint,
    spec: NoiseSpec,
    trials: u64,
    epsilon_t: f64,
) -> CliResult<(Summary, Outputs)> {
    let gens_t = gens.cast::<T>();
    let s = schedule_in::<T>(gens.len(), pt.order, pt.r, pt.lambda, cfg.merge)?;
    let prepared = PreparedProduct::new(&gens_t, &s)?;
    let result = run_point(&prepared, &spec, trials, true)?;
    let premises = Premises {
        mode: spec.mode,
        epsilon_m: spec.epsilon_m,
        skew_hermitian: gens.class() == GeneratorClass::SkewHermitian,
        real_factors: prepared.factors().iter().all(|f| f.is_real()),
    };
    let info = PointInfo {
        order: pt.order,
        k: half_order(s.order()),
        r: pt.r,
        lambda: pt.lambda,
        n: result.n,
        dim: result.dim,
        noise: spec,
    };
    let summary = Summary::build(info, &result, epsilon_t, premises)?;
    let mut outputs = Outputs::new();
    outputs.add_csv("trials.csv", trials_csv(&result.records)?);
    outputs.add_json("summary.json", &summary)?;
    Ok((summary, outputs))
}

#[derive(Debug, Serialize)]
struct GrowthGroup {
    order: u32,
    lambda_per_segment: Option<f64>,
    epsilon_m: f64,
    fit: GrowthFit,
}

#[derive(Debug, Serialize)]
struct SweepDoc<'a> {
    points: &'a [Summary],
    growth: Vec<GrowthGroup>,
}

pub fn noise_sim(cfg: &CampaignConfig) -> CliResult<Report> {
    let base = cfg.noise()?;
    let trials = cfg.trials.ok_or_else(|| CliError::invalid("config needs `trials` (or --trials)"))?;
    let epsilon_t = cfg.epsilon_t.ok_or_else(|| CliError::invalid("config needs `epsilon_t`"))?;
    let gens = cfg.source()?.build()?;
    let points = noise_points(cfg, gens.len(), &base)?;

    let mut summaries = Vec::with_capacity(points.len());
    let mut outputs = Outputs::new();
    let single = points.len() == 1;
    let mut sweep = Csv::new(&["point", "order", "r", "lambda", "N", "epsilon_m", "trials", "mean", "std", "std_stderr", "ideal_error"]);
    for (i, &pt) in points.iter().enumerate() {
        let spec = NoiseSpec { epsilon_m: pt.epsilon_m, ..base };
        spec.validate()?;
        let (summary, files) = match cfg.precision {
            Precision::F64 => simulate::<f64>(cfg, &gens, pt, spec, trials, epsilon_t)?,
            Precision::Dd => simulate::<DoubleDouble>(cfg, &gens, pt, spec, trials, epsilon_t)?,
        };
        if single {
            outputs = files;
        } else {
            outputs.nest(Path::new(&format!("point_{i:03}")), files);
        }
        sweep.row(&[
            i.into(),
            pt.order.into(),
            pt.r.into(),
            pt.lambda.into(),
            summary.point.n.into(),
            pt.epsilon_m.into(),
            summary.stats.trials.into(),
            summary.stats.mean.into(),
            summary.stats.std.into(),
            summary.stats.std_stderr.into(),
            summary.ideal_error.into(),
        ])?;
        summaries.push(summary);
    }

    let stdout = if single {
        let s = &summaries[0];
        format!("N = {}, trials = {}, mean = {}, std = {}\n", s.point.n, s.stats.trials, s.stats.mean, s.stats.std)
    } else {
        let doc = SweepDoc { points: &summaries, growth: growth_groups(cfg, &points, &summaries)? };
        outputs.add_csv("sweep.csv", sweep);
        outputs.add_json("sweep.json", &doc)?;
        format!("{} sweep points\n", summaries.len())
    };
    Ok(Report { outputs, stdout })
}

/// Fits σ(ε) against N within each group of points that differ only in N.
fn growth_groups(cfg: &CampaignConfig, points: &[NoisePoint], summaries: &[Summary]) -> CliResult<Vec<GrowthGroup>> {
    let per_segment = cfg.lambda_scaling == LambdaScaling::PerSegment;
    let mut groups: BTreeMap<(u32, u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for (pt, s) in points.iter().zip(summaries) {
        let lambda_key = if per_segment { pt.lambda / f64::from(pt.r) } else { pt.lambda };
        groups
            .entry((pt.order, lambda_key.to_bits(), pt.epsilon_m.to_bits()))
            .or_default()
            .push((s.point.n as f64, s.stats.std));
    }
    let mut out = Vec::new();
    for ((order, lambda_bits, eps_bits), pts) in groups {
        let mut ns: Vec<u64> = pts.iter().map(|p| p.0.to_bits()).collect();
        ns.sort_unstable();
        ns.dedup();
        if ns.len() < 4 || ns.len() != pts.len() {
            continue;
        }
        out.push(GrowthGroup {
            order,
            lambda_per_segment: per_segment.then(|| f64::from_bits(lambda_bits)),
            epsilon_m: f64::from_bits(eps_bits),
            fit: fit_growth(&pts)?,
        });
    }
    Ok(out)
}

pub fn bounds(n: u64, dim: usize, epsilon_m: f64, epsilon_t: f64) -> CliResult<Report> {
    let report: BoundReport = theorem_bounds(n, dim, epsilon_m, epsilon_t)?;
    let mut outputs = Outputs::new();
    outputs.add_json("bounds.json", &report)?;
    let stdout = String::from_utf8(crate::output::json_bytes(&report)?).expect("JSON is UTF-8");
    Ok(Report { outputs, stdout })
}

#[derive(Clone, Debug, Serialize)]
pub struct HubbardDoc {
    pub params: HubbardParams,
    /// Real entries of the two-site term matrix, row by row.
    pub term_matrix: Vec<Vec<f64>>,
    pub tau: f64,
    pub cost_terms: u64,
    #[serde(rename = "N_exp")]
    pub n_exp: f64,
    pub epsilon_m_budget: f64,
    pub edge_count: usize,
    pub cross_check_residual: f64,
}

pub fn hubbard_doc(params: &HubbardParams, cost_terms: Option<u64>) -> CliResult<HubbardDoc> {
    params.validate()?;
    let m = cost_terms.unwrap_or_else(|| params.default_terms());
    let tau = hubbard_tau(params.sim_time, params.t_h, params.u_h);
    let h = hubbard_term_matrix::<f64>(params.t_h, params.u_h)?;
    let term_matrix = (0..h.dim()).map(|i| (0..h.dim()).map(|j| h[(i, j)].re).collect()).collect();
    let n_exp = hubbard_cost(params.eta, tau, m, params.epsilon_t)?;
    let budget = hubbard_machine_epsilon(params.epsilon_t, params.eta, tau, m)?;
    let eta = usize::try_from(params.eta).map_err(|_| CliError::invalid("eta is too large"))?;
    Ok(HubbardDoc {
        params: *params,
        term_matrix,
        tau,
        cost_terms: m,
        n_exp,
        epsilon_m_budget: budget,
        edge_count: enumerate_lattice_terms(eta, params.boundary)?.len(),
        cross_check_residual: hubbard_cross_check(budget, params.epsilon_t, params.eta, tau, m)?,
    })
}

pub fn hubbard(params: &HubbardParams, cost_terms: Option<u64>) -> CliResult<Report> {
    let doc = hubbard_doc(params, cost_terms)?;
    let mut outputs = Outputs::new();
    outputs.add_json("hubbard.json", &doc)?;
    Ok(Report {
        outputs,
        stdout: format!(
            "tau = {}\nN_exp = {}\nepsilon_m budget = {}\nedges = {}\n",
            doc.tau, doc.n_exp, doc.epsilon_m_budget, doc.edge_count
        ),
    })
}

/// Parses `open` or `periodic`.
pub fn parse_boundary(s: &str) -> Result<Boundary, String> {
    match s {
        "open" => Ok(Boundary::Open),
        "periodic" => Ok(Boundary::Periodic),
        other => Err(format!("unknown boundary `{other}` (expected open or periodic)")),
    }
}
