//! The bundled reproduction campaigns. Each one has a fixed configuration and
//! a seed offset from the master seed, so `repro` output depends only on the
//! seed and the trial override.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use tsd_core::models::{Boundary, HubbardParams};
use tsd_core::stability::{folded_lognormal_cdf, ks_distance, required_machine_epsilon, single_factor_norm_cdf, TrialRecord};
use tsd_core::{
    build_schedule, fit_growth, ideal_error, perturb, sample_generator_set, theorem_bounds, BoundReport,
    DoubleDouble, ErrorStats, GeneratorClass, GeneratorSet, GrowthFit, Matrix, NoiseMode, NoiseSpec, OrderSpec,
    PreparedProduct, RngStream,
};

use crate::campaign::{run_point, trials_csv};
use crate::commands::{hubbard_doc, HubbardDoc};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Csv, Outputs};

pub const DEFAULT_SEED: u64 = 20_161_103;

pub const SCALAR_N: u64 = 100;
pub const SCALAR_EPSILON_M: f64 = 0.05;
pub const SCALAR_TRIALS: u64 = 100_000;

pub const FACTOR_DIMS: [usize; 4] = [1, 4, 16, 64];
pub const FACTOR_EPSILON_M: f64 = 1e-3;
pub const FACTOR_TRIALS: u64 = 10_000;
/// Multiple of `ε_m √ℓ` below which the limiting law is supported.
pub const FACTOR_SUPPORT: f64 = 2.2;

pub const INSTABILITY_NS: [u64; 4] = [8, 16, 24, 32];
pub const INSTABILITY_DIM: usize = 4;
pub const INSTABILITY_FACTOR_NORM: f64 = 1.2;
pub const GROWTH_EPSILON_M: f64 = 1e-3;
pub const GROWTH_TRIALS: u64 = 10_000;

pub const STABILIZED_NS: [u64; 4] = [10, 25, 50, 100];
pub const STABILIZED_DIMS: [usize; 2] = [2, 4];
/// Skew-Hermitian generators per segment in the unitary campaigns.
pub const UNITARY_TERMS: usize = 5;
pub const UNITARY_STEP: f64 = 0.5;

pub const BUDGET_EPSILON_T: f64 = 1e-2;
pub const BUDGET_N: u64 = 100;
pub const BUDGET_DIM: usize = 4;

pub const ORDER_LAMBDAS: [f64; 4] = [1e-3, 2e-3, 4e-3, 8e-3];
pub const TROTTER_LAMBDA: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub struct ReproSettings {
    pub seed: u64,
    /// Replaces every campaign's trial count when set.
    pub trials: Option<u64>,
}

impl Default for ReproSettings {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, trials: None }
    }
}

impl ReproSettings {
    fn trials(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }

    fn seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }
}

fn noise(epsilon_m: f64, mode: NoiseMode, seed: u64) -> CliResult<NoiseSpec> {
    Ok(NoiseSpec::new(epsilon_m, mode, seed)?)
}

/// Sample standard deviation, Bessel-corrected.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalarReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub epsilon_m: f64,
    pub trials: u64,
    pub x_mean: f64,
    pub x_std: f64,
    /// Moments of `e^Y` with `Y ~ N(0, Nε_m²)`.
    pub lognormal_mean: f64,
    pub lognormal_std: f64,
    /// Exact moments of a product of independent `N(1, ε_m²)` factors.
    pub exact_mean: f64,
    pub exact_std: f64,
    pub epsilon: ErrorStats,
    pub scalar_mean_lower: f64,
    pub scalar_std_lower: f64,
    pub ks_folded_lognormal: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// `N` unit factors with real Gaussian noise: the machine error is `|X − 1|`
/// for the product `X` of the perturbed factors.
pub fn scalar(s: &ReproSettings) -> CliResult<ScalarReport> {
    let (n, em) = (SCALAR_N, SCALAR_EPSILON_M);
    let trials = s.trials(SCALAR_TRIALS);
    let gens = GeneratorSet::new(vec![Matrix::<f64>::zeros(1)], GeneratorClass::General)?;
    let schedule = build_schedule(1, OrderSpec::Trotter { r: n as u32 }, 1.0, false)?;
    let prepared = PreparedProduct::new(&gens, &schedule)?;
    let spec = noise(em, NoiseMode::Gaussian, s.seed(1))?;
    let rows: Vec<(f64, TrialRecord)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            prepared.trial_product(&spec, trial).map(|(x, e, net)| {
                (x[(0, 0)].re, TrialRecord { trial, epsilon: e, epsilon_net: net })
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<tsd_core::Result<_>>()?;
    let (x, records): (Vec<f64>, Vec<TrialRecord>) = rows.into_iter().unzip();
    let eps: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    let (x_mean, x_std) = mean_std(&x);
    let v = n as f64 * em * em;
    let bounds = theorem_bounds(n, 1, em, BUDGET_EPSILON_T)?;
    Ok(ScalarReport {
        n,
        epsilon_m: em,
        trials,
        x_mean,
        x_std,
        lognormal_mean: (v / 2.0).exp(),
        lognormal_std: ((2.0 * v).exp() - v.exp()).sqrt(),
        exact_mean: 1.0,
        exact_std: ((1.0 + em * em).powi(n as i32) - 1.0).sqrt(),
        epsilon: ErrorStats::from_samples(&eps)?,
        scalar_mean_lower: bounds.scalar_mean_lower,
        scalar_std_lower: bounds.scalar_std_lower,
        ks_folded_lognormal: ks_distance(&eps, |e| folded_lognormal_cdf(e, n, em))?,
        x,
        records,
    })
}

impl ScalarReport {
    fn outputs(&self) -> CliResult<Outputs> {
        let mut out = Outputs::new();
        out.add_csv("trials.csv", trials_csv(&self.records)?);
        let mut csv = Csv::new(&["trial", "x"]);
        for (t, &x) in self.x.iter().enumerate() {
            csv.row(&[t.into(), x.into()])?;
        }
        out.add_csv("samples.csv", csv);
        out.add_json("summary.json", self)?;
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorErrorPoint {
    pub dim: usize,
    pub trials: u64,
    pub mean: f64,
    pub std: f64,
    /// Root mean square, the spread the corridor is stated for.
    pub rms: f64,
    pub support: f64,
    pub fraction_within_support: f64,
    pub ks_limit_law: f64,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorErrorReport {
    pub epsilon_m: f64,
    pub points: Vec<FactorErrorPoint>,
}

/// Relative norm error of one perturbed random unitary, per dimension.
pub fn factor_error(s: &ReproSettings) -> CliResult<FactorErrorReport> {
    let em = FACTOR_EPSILON_M;
    let trials = s.trials(FACTOR_TRIALS);
    let spec = noise(em, NoiseMode::Gaussian, s.seed(2))?;
    let mut points = Vec::new();
    for (i, &dim) in FACTOR_DIMS.iter().enumerate() {
        let gen = sample_generator_set::<f64>(dim, 1, GeneratorClass::SkewHermitian, 2.0, &RngStream::at(s.seed(2), &[i as u64]))?;
        let u = gen.get(0).exp()?;
        let samples = (0..trials)
            .into_par_iter()
            .map(|t| perturb(&u, &spec, &spec.factor_stream(t, 0)).and_then(|v| u.relative_distance(&v)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<tsd_core::Result<Vec<f64>>>()?;
        let stats = ErrorStats::from_samples(&samples)?;
        let support = FACTOR_SUPPORT * em * (dim as f64).sqrt();
        let within = samples.iter().filter(|&&x| x <= support).count();
        points.push(FactorErrorPoint {
            dim,
            trials,
            mean: stats.mean,
            std: stats.std,
            rms: stats.rms,
            support,
            fraction_within_support: within as f64 / trials as f64,
            ks_limit_law: ks_distance(&samples, |x| single_factor_norm_cdf(x, em, dim))?,
            samples,
        });
    }
    Ok(FactorErrorReport { epsilon_m: em, points })
}

impl FactorErrorReport {
    fn outputs(&self) -> CliResult<Outputs> {
        let mut out = Outputs::new();
        let mut csv = Csv::new(&["dim", "trial", "relative_error"]);
        for p in &self.points {
            for (t, &x) in p.samples.iter().enumerate() {
                csv.row(&[p.dim.into(), t.into(), x.into()])?;
            }
        }
        out.add_csv("samples.csv", csv);
        out.add_json("summary.json", self)?;
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthPoint {
    #[serde(rename = "N")]
    pub n: u64,
    pub stats: ErrorStats,
    pub bounds: BoundReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSeries {
    pub mode: NoiseMode,
    pub dim: usize,
    pub points: Vec<GrowthPoint>,
    pub fit: GrowthFit,
}

impl GrowthSeries {
    fn csv_rows(&self, csv: &mut Csv) -> CliResult<()> {
        let mode = match self.mode {
            NoiseMode::Gaussian => "gaussian",
            NoiseMode::GaussianUnitary => "gaussian_unitary",
            NoiseMode::NormStabilized => "norm_stabilized",
        };
        for p in &self.points {
            csv.row(&[
                Cell::Text(mode),
                self.dim.into(),
                p.n.into(),
                p.stats.mean.into(),
                p.stats.std.into(),
                p.stats.std_stderr.into(),
                p.bounds.thm2_lower_log10.into(),
                p.bounds.thm3_upper.into(),
                p.bounds.cor5_upper.into(),
            ])?;
        }
        Ok(())
    }
}

const SERIES_HEADER: [&str; 9] = ["mode", "dim", "N", "mean", "std", "std_stderr", "thm2_lower_log10", "thm3_upper", "cor5_upper"];

/// Trotter campaigns at a fixed step per segment; `N = m r`.
fn growth_series(
    gens: &GeneratorSet<f64>,
    step: f64,
    ns: &[u64],
    spec: &NoiseSpec,
    trials: u64,
) -> CliResult<GrowthSeries> {
    let m = gens.len() as u64;
    let mut points = Vec::new();
    for &n in ns {
        let r = u32::try_from(n / m).map_err(|_| CliError::invalid("N too large"))?;
        let schedule = build_schedule(gens.len(), OrderSpec::Trotter { r }, step * f64::from(r), false)?;
        let prepared = PreparedProduct::new(gens, &schedule)?;
        let result = run_point(&prepared, spec, trials, false)?;
        points.push(GrowthPoint {
            n: result.n,
            stats: result.stats,
            bounds: theorem_bounds(result.n, gens.dim(), spec.epsilon_m, BUDGET_EPSILON_T)?,
        });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.stats.std)).collect();
    Ok(GrowthSeries { mode: spec.mode, dim: gens.dim(), fit: fit_growth(&xy)?, points })
}

#[derive(Clone, Debug, Serialize)]
pub struct InstabilityReport {
    pub step: f64,
    pub mean_factor_norm: f64,
    pub series: GrowthSeries,
}

fn mean_factor_norm(gens: &GeneratorSet<f64>, step: f64) -> CliResult<f64> {
    let mut total = 0.0;
    for a in gens.generators() {
        total += a.scale(step).exp()?.spectral_norm()?;
    }
    Ok(total / gens.len() as f64)
}

/// Step at which the factors' mean spectral norm reaches `target`.
fn calibrate_step(gens: &GeneratorSet<f64>, target: f64) -> CliResult<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    while mean_factor_norm(gens, hi)? < target {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(CliError::Runtime("factor norms do not grow with the step".into()));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mean_factor_norm(gens, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Non-normalized general factors with norms near 1.2, unprotected noise.
pub fn instability(s: &ReproSettings) -> CliResult<InstabilityReport> {
    let gens = sample_generator_set::<f64>(INSTABILITY_DIM, 2, GeneratorClass::General, 1.0, &RngStream::new(s.seed(3)))?;
    let step = calibrate_step(&gens, INSTABILITY_FACTOR_NORM)?;
    let spec = noise(GROWTH_EPSILON_M, NoiseMode::Gaussian, s.seed(3))?;
    let series = growth_series(&gens, step, &INSTABILITY_NS, &spec, s.trials(GROWTH_TRIALS))?;
    Ok(InstabilityReport { step, mean_factor_norm: mean_factor_norm(&gens, step)?, series })
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizedReport {
    pub series: Vec<GrowthSeries>,
}

fn unitary_generators(dim: usize, seed: u64) -> CliResult<GeneratorSet<f64>> {
    Ok(sample_generator_set(dim, UNITARY_TERMS, GeneratorClass::SkewHermitian, 1.0, &RngStream::new(seed))?)
}

/// Unitary factors under projected and norm-stabilized noise.
pub fn stabilized(s: &ReproSettings) -> CliResult<StabilizedReport> {
    let mut series = Vec::new();
    for mode in [NoiseMode::GaussianUnitary, NoiseMode::NormStabilized] {
        for &dim in &STABILIZED_DIMS {
            let gens = unitary_generators(dim, s.seed(4))?;
            let spec = noise(GROWTH_EPSILON_M, mode, s.seed(4))?;
            series.push(growth_series(&gens, UNITARY_STEP, &STABILIZED_NS, &spec, s.trials(GROWTH_TRIALS))?);
        }
    }
    Ok(StabilizedReport { series })
}

#[derive(Clone, Debug, Serialize)]
pub struct BudgetReport {
    pub epsilon_t: f64,
    pub epsilon_m: f64,
    pub stats: ErrorStats,
    pub bounds: BoundReport,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Unitary campaign run at the machine precision the linear bound requires.
pub fn budget(s: &ReproSettings) -> CliResult<BudgetReport> {
    let em = required_machine_epsilon(BUDGET_EPSILON_T, BUDGET_N, BUDGET_DIM)?;
    let gens = unitary_generators(BUDGET_DIM, s.seed(5))?;
    let r = (BUDGET_N / UNITARY_TERMS as u64) as u32;
    let schedule = build_schedule(UNITARY_TERMS, OrderSpec::Trotter { r }, UNITARY_STEP * f64::from(r), false)?;
    let prepared = PreparedProduct::new(&gens, &schedule)?;
    let spec = noise(em, NoiseMode::GaussianUnitary, s.seed(5))?;
    let result = run_point(&prepared, &spec, s.trials(GROWTH_TRIALS), false)?;
    Ok(BudgetReport {
        epsilon_t: BUDGET_EPSILON_T,
        epsilon_m: em,
        bounds: theorem_bounds(result.n, BUDGET_DIM, em, BUDGET_EPSILON_T)?,
        stats: result.stats,
        records: result.records,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealRow {
    pub lambda: f64,
    pub r: u32,
    pub k: u32,
    pub ideal_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderScalingReport {
    pub slope_k1: f64,
    pub slope_k2: f64,
    /// Trotter ideal error at `r = 1` over `r = 2`.
    pub trotter_ratio: f64,
    pub rows: Vec<IdealRow>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln() / n, b + y.ln() / n));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in points {
        sxy += (x.ln() - mx) * (y.ln() - my);
        sxx += (x.ln() - mx).powi(2);
    }
    sxy / sxx
}

/// Ideal error of a random Hermitian pair; the symmetric formulas are
/// evaluated in double-double so that fifth-order errors stay resolvable.
pub fn order_scaling(s: &ReproSettings) -> CliResult<OrderScalingReport> {
    let gens = sample_generator_set::<f64>(4, 2, GeneratorClass::Hermitian, 1.0, &RngStream::new(s.seed(6)))?;
    let gens_dd = gens.cast::<DoubleDouble>();
    let mut rows = Vec::new();
    let mut slopes = [0.0; 2];
    for (slot, k) in [1u32, 2].into_iter().enumerate() {
        let mut pts = Vec::new();
        for &lambda in &ORDER_LAMBDAS {
            let lam = DoubleDouble::new(lambda);
            let schedule = build_schedule(2, OrderSpec::Suzuki { k, r: 1 }, lam, false)?;
            let err = ideal_error(&gens_dd, lam, &schedule)?.parts().0;
            pts.push((lambda, err));
            rows.push(IdealRow { lambda, r: 1, k, ideal_error: err });
        }
        slopes[slot] = loglog_slope(&pts);
    }
    let mut trotter = [0.0; 2];
    for (slot, r) in [1u32, 2].into_iter().enumerate() {
        let schedule = build_schedule(2, OrderSpec::Trotter { r }, TROTTER_LAMBDA, false)?;
        trotter[slot] = ideal_error(&gens, TROTTER_LAMBDA, &schedule)?;
        rows.push(IdealRow { lambda: TROTTER_LAMBDA, r, k: 0, ideal_error: trotter[slot] });
    }
    Ok(OrderScalingReport { slope_k1: slopes[0], slope_k2: slopes[1], trotter_ratio: trotter[0] / trotter[1], rows })
}

impl OrderScalingReport {
    fn outputs(&self) -> CliResult<Outputs> {
        let mut csv = Csv::new(&["lambda", "r", "k", "ideal_error"]);
        for row in &self.rows {
            csv.row(&[row.lambda.into(), row.r.into(), row.k.into(), row.ideal_error.into()])?;
        }
        let mut out = Outputs::new();
        out.add_csv("ideal_error.csv", csv);
        out.add_json("summary.json", self)?;
        Ok(out)
    }
}

pub fn hubbard_params() -> HubbardParams {
    HubbardParams { t_h: 1.0, u_h: 2.0, eta: 2, sim_time: 1.0, epsilon_t: 1e-3, boundary: Boundary::Periodic }
}

/// Cost-formula term count for the bundled example: the eight periodic bonds.
pub const HUBBARD_COST_TERMS: u64 = 8;

pub fn hubbard() -> CliResult<HubbardDoc> {
    hubbard_doc(&hubbard_params(), Some(HUBBARD_COST_TERMS))
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproReport {
    pub seed: u64,
    pub scalar: ScalarReport,
    pub factor_error: FactorErrorReport,
    pub instability: InstabilityReport,
    pub stabilized: StabilizedReport,
    pub budget: BudgetReport,
    pub order_scaling: OrderScalingReport,
    pub hubbard: HubbardDoc,
}

pub fn run_all(s: &ReproSettings) -> CliResult<ReproReport> {
    Ok(ReproReport {
        seed: s.seed,
        scalar: scalar(s)?,
        factor_error: factor_error(s)?,
        instability: instability(s)?,
        stabilized: stabilized(s)?,
        budget: budget(s)?,
        order_scaling: order_scaling(s)?,
        hubbard: hubbard()?,
    })
}

impl ReproReport {
    pub fn outputs(&self) -> CliResult<Outputs> {
        let mut out = Outputs::new();
        out.nest(Path::new("scalar"), self.scalar.outputs()?);
        out.nest(Path::new("factor_error"), self.factor_error.outputs()?);

        let mut csv = Csv::new(&SERIES_HEADER);
        self.instability.series.csv_rows(&mut csv)?;
        let mut sub = Outputs::new();
        sub.add_csv("sweep.csv", csv);
        sub.add_json("summary.json", &self.instability)?;
        out.nest(Path::new("instability"), sub);

        let mut csv = Csv::new(&SERIES_HEADER);
        for series in &self.stabilized.series {
            series.csv_rows(&mut csv)?;
        }
        let mut sub = Outputs::new();
        sub.add_csv("sweep.csv", csv);
        sub.add_json("summary.json", &self.stabilized)?;
        out.nest(Path::new("stabilized"), sub);

        let mut sub = Outputs::new();
        sub.add_csv("trials.csv", trials_csv(&self.budget.records)?);
        sub.add_json("summary.json", &self.budget)?;
        out.nest(Path::new("budget"), sub);

        out.nest(Path::new("order_scaling"), self.order_scaling.outputs()?);
        let mut sub = Outputs::new();
        sub.add_json("hubbard.json", &self.hubbard)?;
        out.nest(Path::new("hubbard"), sub);
        Ok(out)
    }
}
