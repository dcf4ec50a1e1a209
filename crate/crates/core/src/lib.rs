//! Trotter-Suzuki product formulas, a Gaussian machine-error model for their
//! factors, and the statistics and bounds that separate stable from unstable
//! error growth.
//!
//! The numerical core is generic over [`Scalar`]; the aliases below fix the
//! common precisions.

pub mod dd;
pub mod error;
pub mod generators;
pub mod matrix;
pub mod models;
pub mod noise;
pub mod product;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod stability;

pub use error::{Error, Result};
pub use generators::{sample_generator_set, GeneratorClass, GeneratorSet};
pub use matrix::Matrix;
pub use noise::{noisy_product, perturb, NoiseMode, NoiseSpec, NoisyProductResult, PreparedProduct};
pub use product::{evaluate_schedule, exact_flow, ideal_error};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use schedule::{build_schedule, suzuki_coefficient, CostCount, OrderSpec, Schedule, Term};
pub use stability::{fit_growth, monte_carlo, theorem_bounds, BoundReport, ErrorStats, GrowthFit, GrowthModel};

pub use num_complex::Complex;
pub use dd::DoubleDouble;


pub type ComplexMatrix = Matrix<f64>;
pub type ComplexMatrixF32 = Matrix<f32>;
pub type ComplexMatrixDD = Matrix<DoubleDouble>;

pub type GeneratorSet64 = GeneratorSet<f64>;
pub type GeneratorSetDD = GeneratorSet<DoubleDouble>;

pub type Schedule64 = Schedule<f64>;
pub type ScheduleDD = Schedule<DoubleDouble>;
