//! Campaign configuration: one JSON document, with a few fields overridable
//! from the command line.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tsd_core::models::{hubbard_generators, Evolution, HubbardParams};
use tsd_core::{
    sample_generator_set, Complex, GeneratorClass, GeneratorSet, Matrix, NoiseSpec, OrderSpec,
    RngStream,
};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub generators: Option<GeneratorSource>,
    /// Generator count for `schedule` when no generator source is given.
    pub m: Option<usize>,
    /// 1 selects the first-order formula; an even value `2k` selects the
    /// symmetric recursion of half-order `k`.
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_r")]
    pub r: u32,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambda_scaling: LambdaScaling,
    #[serde(default)]
    pub merge: bool,
    pub noise: Option<NoiseSpec>,
    pub trials: Option<u64>,
    pub epsilon_t: Option<f64>,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub precision: Precision,
    pub out: Option<PathBuf>,
}

fn default_order() -> u32 {
    2
}

fn default_r() -> u32 {
    1
}

impl Default for CampaignConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

/// How `lambda` relates to the number of segments `r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaScaling {
    /// `lambda` is the total time; factors shrink as `r` grows.
    #[default]
    Total,
    /// `lambda` is the time per segment; factors stay fixed as `r` grows.
    PerSegment,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    F64,
    /// Double-double arithmetic, for ideal errors below f64 resolution.
    Dd,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub n: Option<Vec<u64>>,
    pub epsilon_m: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub order: Option<Vec<u32>>,
    pub r: Option<Vec<u32>>,
}

impl Sweep {
    fn check_non_empty(&self) -> CliResult<()> {
        let empty = [
            ("n", self.n.as_ref().map(Vec::len)),
            ("epsilon_m", self.epsilon_m.as_ref().map(Vec::len)),
            ("lambda", self.lambda.as_ref().map(Vec::len)),
            ("order", self.order.as_ref().map(Vec::len)),
            ("r", self.r.as_ref().map(Vec::len)),
        ];
        match empty.iter().find(|(_, len)| *len == Some(0)) {
            Some((name, _)) => Err(CliError::invalid(format!("sweep axis `{name}` is empty"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSource {
    Synthetic(SyntheticSource),
    Explicit(ExplicitSource),
    Hubbard(HubbardSource),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub dim: usize,
    pub m: usize,
    pub class: GeneratorClass,
    pub norm_bound: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSource {
    pub class: GeneratorClass,
    /// Each matrix is a list of rows; entries are reals or `[re, im]` pairs.
    pub matrices: Vec<Vec<Vec<Entry>>>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardSource {
    pub params: HubbardParams,
    #[serde(default)]
    pub evolution: Evolution,
    /// Term count in the cost formulas; defaults to `η²`.
    pub cost_terms: Option<u64>,
}

impl GeneratorSource {
    pub fn build(&self) -> CliResult<GeneratorSet<f64>> {
        match self {
            GeneratorSource::Synthetic(s) => Ok(sample_generator_set(
                s.dim,
                s.m,
                s.class,
                s.norm_bound,
                &RngStream::new(s.seed),
            )?),
            GeneratorSource::Explicit(e) => {
                let matrices = e
                    .matrices
                    .iter()
                    .map(|rows| {
                        let rows: Vec<Vec<Complex<f64>>> = rows
                            .iter()
                            .map(|row| {
                                row.iter()
                                    .map(|&x| match x {
                                        Entry::Real(re) => Complex::new(re, 0.0),
                                        Entry::Complex([re, im]) => Complex::new(re, im),
                                    })
                                    .collect()
                            })
                            .collect();
                        Matrix::from_rows(&rows)
                    })
                    .collect::<tsd_core::Result<Vec<_>>>()?;
                Ok(GeneratorSet::new(matrices, e.class)?)
            }
            GeneratorSource::Hubbard(h) => {
                h.params.validate()?;
                Ok(hubbard_generators(h.params.t_h, h.params.u_h, h.evolution)?)
            }
        }
    }

    pub fn m(&self) -> usize {
        match self {
            GeneratorSource::Synthetic(s) => s.m,
            GeneratorSource::Explicit(e) => e.matrices.len(),
            GeneratorSource::Hubbard(_) => 2,
        }
    }

    fn default_lambda(&self) -> Option<f64> {
        match self {
            GeneratorSource::Hubbard(h) => Some(h.params.sim_time),
            _ => None,
        }
    }
}

/// Flags that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_OUT: &str = "tsd-out";

impl CampaignConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Invalid(msg) => CliError::invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::invalid(e.to_string()))?;
        cfg.sweep.check_non_empty()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            if let Some(noise) = self.noise.as_mut() {
                noise.master_seed = seed;
            }
        }
        if let Some(t) = o.trials {
            self.trials = Some(t);
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn source(&self) -> CliResult<&GeneratorSource> {
        self.generators.as_ref().ok_or_else(|| CliError::invalid("config needs a `generators` source"))
    }

    pub fn lambda(&self) -> CliResult<f64> {
        self.lambda
            .or_else(|| self.generators.as_ref().and_then(GeneratorSource::default_lambda))
            .ok_or_else(|| CliError::invalid("config needs `lambda`"))
    }

    pub fn noise(&self) -> CliResult<NoiseSpec> {
        let spec = self.noise.ok_or_else(|| CliError::invalid("config needs a `noise` section"))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn m(&self) -> CliResult<usize> {
        match (&self.generators, self.m) {
            (Some(src), Some(m)) if src.m() != m => Err(CliError::invalid(format!(
                "`m` = {m} disagrees with the generator source ({})",
                src.m()
            ))),
            (Some(src), _) => Ok(src.m()),
            (None, Some(m)) => Ok(m),
            (None, None) => Err(CliError::invalid("config needs `generators` or `m`")),
        }
    }
}

/// Maps the user-facing order to a schedule shape.
pub fn order_spec(order: u32, r: u32) -> CliResult<OrderSpec> {
    match order {
        1 => Ok(OrderSpec::Trotter { r }),
        o if o >= 2 && o % 2 == 0 => Ok(OrderSpec::Suzuki { k: o / 2, r }),
        o => Err(CliError::invalid(format!("order must be 1 or an even number, got {o}"))),
    }
}

/// Half-order column value: 0 for the first-order formula.
pub fn half_order(spec: OrderSpec) -> u32 {
    match spec {
        OrderSpec::Trotter { .. } => 0,
        OrderSpec::Suzuki { k, .. } => k,
    }
}
