//! Threshold-triggered disclosure ("social assurance contracts"): equilibrium
//! participation with safety in numbers, threshold design, observer updating,
//! mechanism comparison and the finite-N benchmark.

pub mod binomial;
pub mod compare;
pub mod design;
pub mod dist;
pub mod equilibrium;
pub mod error;
pub mod finite_n;
pub mod model;
pub mod overton;
pub mod presets;

pub use binomial::{binom_pmf, binom_tail, trunc_mean_share, BinomialRow};
pub use design::{optimize_threshold, DesignCurve, DesignPoint, Objective, OppositionSpec, SeedModel};
pub use dist::{BetaPrior, TypeDistribution};
pub use equilibrium::{enumerate_fixed_points, high_equilibrium, participation_map, FixedPointSet};
pub use error::{Error, Result};
pub use model::{CutoffRule, ModelParams, SafetySpec, Threshold};
