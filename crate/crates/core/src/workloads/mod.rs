//! Encrypted mean, variance and linear-regression pipelines.
//!
//! Each pipeline encrypts a [`Dataset`] on the host, dispatches the
//! homomorphic work to [`crate::pimsim`] kernels, and finishes on the host:
//! decryption, any remaining partial sums, and exact rational division.
//! Every pipeline also has a cost-only plan that prices the same stages
//! without materializing data, for user counts beyond desk scale.

mod dataset;
pub mod oracle;
mod pipelines;
mod reduce;

use num_rational::Ratio;
use serde::{Deserialize, Serialize, Serializer};

use crate::bfv::HeParams;
use crate::bfv::ParamsSummary;
use crate::pimsim::{cost_only_estimate, KernelKind, KernelReport, PimConfig};
use crate::Result;

pub use dataset::{Dataset, KeyBundle};
pub use pipelines::{
    linreg_pipeline, linreg_plan, mean_pipeline, mean_plan, variance_pipeline, variance_plan,
    LinregModel, LinregOptions, MeanOptions, WeightMode, REGRESSION_FEATURES,
};
pub use reduce::Reduction;

/// Schema tag of serialized pipeline results.
pub const PIPELINE_SCHEMA: &str = "pipeline_v1";

/// How user values map onto ciphertexts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One value per ciphertext, in the constant coefficient.
    #[default]
    Scalar,
    /// A user's whole row in one ciphertext, value `j` in coefficient `j`.
    Packed,
}

impl std::str::FromStr for Encoding {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Self::Scalar),
            "packed" => Ok(Self::Packed),
            other => Err(crate::Error::Parameter(format!(
                "unknown encoding `{other}`"
            ))),
        }
    }
}

/// One planned kernel launch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub kind: KernelKind,
    pub items: usize,
}

impl Stage {
    pub fn new(name: impl Into<String>, kind: KernelKind, items: usize) -> Self {
        Self {
            name: name.into(),
            kind,
            items,
        }
    }
}

/// A named kernel report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub report: KernelReport,
}

impl StageReport {
    pub fn new(name: impl Into<String>, report: KernelReport) -> Self {
        Self {
            name: name.into(),
            report,
        }
    }
}

/// Prices a plan with closed-form kernel costs.
pub fn estimate_plan(
    stages: &[Stage],
    params: &HeParams,
    cfg: &PimConfig,
) -> Result<Vec<StageReport>> {
    stages
        .iter()
        .map(|s| {
            cost_only_estimate(s.kind, s.items, params, cfg).map(|r| StageReport::new(&s.name, r))
        })
        .collect()
}

fn ratio_strings<S: Serializer>(v: &[Ratio<i128>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

/// Outcome of one pipeline run.
///
/// `answers` holds one exact rational per output: per column for mean and
/// variance, per sample (user-major) for regression. Cost-only runs carry
/// no answers.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineResult {
    pub schema: &'static str,
    pub version: &'static str,
    pub workload: String,
    pub params: ParamsSummary,
    pub seed: u64,
    pub users: usize,
    pub cost_only: bool,
    #[serde(serialize_with = "ratio_strings")]
    pub answers: Vec<Ratio<i128>>,
    pub stages: Vec<StageReport>,
    pub total: KernelReport,
    pub host_ms: f64,
    pub host_additions: usize,
    pub min_noise_budget: Option<u32>,
}

impl PipelineResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        workload: &str,
        params: &HeParams,
        seed: u64,
        users: usize,
        answers: Vec<Ratio<i128>>,
        stages: Vec<StageReport>,
        host_ms: f64,
        host_additions: usize,
        min_noise_budget: Option<u32>,
        cost_only: bool,
    ) -> Self {
        let mut total = KernelReport::total(stages.iter().map(|s| &s.report));
        total.kernel = workload.to_string();
        Self {
            schema: PIPELINE_SCHEMA,
            version: crate::VERSION,
            workload: workload.to_string(),
            params: params.summary(),
            seed,
            users,
            cost_only,
            answers,
            stages,
            total,
            host_ms,
            host_additions,
            min_noise_budget,
        }
    }

    /// Device cycles spent in stages whose name starts with `prefix`.
    pub fn cycles_in(&self, prefix: &str) -> u64 {
        self.stages
            .iter()
            .filter(|s| s.name.starts_with(prefix))
            .map(|s| s.report.cycles_per_core)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline results serialize")
    }
}
