//! Microbenchmark sweeps and workload runs.

use pimhe::bfv::{he_add, he_mul, Ciphertext, HeParams, ParamsSummary};
use pimhe::pimsim::{
    cost_only_estimate, run_vector_add_kernel, run_vector_mul_kernel, KernelKind, KernelReport,
};
use pimhe::polyring::Polynomial;
use pimhe::rng::SeedStream;
use pimhe::workloads::{
    linreg_pipeline, linreg_plan, mean_pipeline, mean_plan, oracle, variance_pipeline,
    variance_plan, Dataset, KeyBundle, LinregModel, LinregOptions, MeanOptions, PipelineResult,
    REGRESSION_FEATURES,
};
use rand::Rng;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::spec::{BenchSpec, Mode};

/// Schema tag of bench reports.
pub const BENCH_SCHEMA: &str = "bench_v1";

/// Largest functional add launch.
pub const FUNCTIONAL_ADD_ITEMS: usize = 4096;

/// Largest functional multiply workload, in `items · n²`.
pub const FUNCTIONAL_MUL_WORK: usize = 1 << 26;

/// Everything needed to re-run a report.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub schema: &'static str,
    pub version: &'static str,
    pub spec: BenchSpec,
    pub params: ParamsSummary,
}

/// One CSV line: a sweep point or a pipeline stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub kernel: String,
    pub security: u32,
    pub items: u64,
    pub cost_only: bool,
    pub verified: bool,
    pub cycles: u64,
    pub elapsed_ms: f64,
    pub transfer_ms: f64,
    pub end_to_end_ms: f64,
    pub cores_used: usize,
    pub tasklets_used: usize,
    pub adds: u64,
    pub addcs: u64,
    pub muls32: u64,
    pub loads: u64,
    pub stores: u64,
    pub loop_overhead: u64,
    pub bytes_to_pim: u64,
    pub bytes_from_pim: u64,
}

/// Column order of [`Row`].
pub const COLUMNS: [&str; 20] = [
    "label",
    "kernel",
    "security",
    "items",
    "cost_only",
    "verified",
    "cycles",
    "elapsed_ms",
    "transfer_ms",
    "end_to_end_ms",
    "cores_used",
    "tasklets_used",
    "adds",
    "addcs",
    "muls32",
    "loads",
    "stores",
    "loop_overhead",
    "bytes_to_pim",
    "bytes_from_pim",
];

impl Row {
    pub fn new(
        label: &str,
        security: u32,
        report: &KernelReport,
        cost_only: bool,
        verified: bool,
    ) -> Self {
        Self {
            label: label.to_string(),
            kernel: report.kernel.clone(),
            security,
            items: report.items,
            cost_only,
            verified,
            cycles: report.cycles_per_core,
            elapsed_ms: report.elapsed_ms,
            transfer_ms: report.transfer_ms,
            end_to_end_ms: report.end_to_end_ms(),
            cores_used: report.cores_used,
            tasklets_used: report.tasklets_used,
            adds: report.instr.adds,
            addcs: report.instr.addcs,
            muls32: report.instr.muls32,
            loads: report.instr.loads,
            stores: report.instr.stores,
            loop_overhead: report.instr.loop_overhead,
            bytes_to_pim: report.bytes_to_pim,
            bytes_from_pim: report.bytes_from_pim,
        }
    }
}

/// A finished run, ready to emit.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    #[serde(flatten)]
    pub header: Header,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<PipelineResult>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

pub fn params_for(spec: &BenchSpec) -> Result<HeParams> {
    let level = spec.level();
    let params = match spec.plain_modulus {
        Some(t) => HeParams::with_plain_modulus(level, t),
        None => HeParams::standard(level),
    };
    params.map_err(|e| BenchError::usage("--plain-modulus", e))
}

pub fn run(spec: &BenchSpec) -> Result<Outcome> {
    let params = params_for(spec)?;
    let mut outcome = Outcome {
        header: Header {
            schema: BENCH_SCHEMA,
            version: pimhe::VERSION,
            spec: spec.clone(),
            params: params.summary(),
        },
        rows: Vec::new(),
        result: None,
        warnings: Vec::new(),
    };
    match spec.mode {
        Mode::MicrobenchAdd => microbench(
            spec,
            &params,
            KernelKind::Add { lhs: 2, rhs: 2 },
            &mut outcome,
        )?,
        Mode::MicrobenchMul => microbench(spec, &params, KernelKind::Mul, &mut outcome)?,
        Mode::WorkloadMean | Mode::WorkloadVariance | Mode::WorkloadLinreg => {
            workload(spec, &params, &mut outcome)?
        }
    }
    Ok(outcome)
}

fn mul_fits(items: usize, params: &HeParams) -> bool {
    items.saturating_mul(params.n() * params.n()) <= FUNCTIONAL_MUL_WORK
}

fn random_ciphertexts(
    params: &HeParams,
    stream: &SeedStream,
    count: usize,
) -> Result<Vec<Ciphertext>> {
    let mut rng = stream.rng();
    let q = params.q();
    (0..count)
        .map(|_| {
            let comps = (0..2)
                .map(|_| {
                    let c: Vec<u128> = (0..params.n()).map(|_| rng.gen_range(0..q)).collect();
                    Polynomial::from_u128s(params.ring(), &c)
                })
                .collect::<pimhe::Result<Vec<_>>>()?;
            Ok(Ciphertext::new(params, comps, 0)?)
        })
        .collect()
}

fn microbench(
    spec: &BenchSpec,
    params: &HeParams,
    kind: KernelKind,
    out: &mut Outcome,
) -> Result<()> {
    let mul = kind == KernelKind::Mul;
    for &items in &spec.items {
        let fits = if mul {
            mul_fits(items, params)
        } else {
            items <= FUNCTIONAL_ADD_ITEMS
        };
        let estimate = cost_only_estimate(kind, items, params, &spec.pim)?;
        if spec.cost_only || !fits {
            if !spec.cost_only {
                out.warnings.push(format!(
                    "{items} items exceed the functional cap; priced with the cost model only"
                ));
            }
            out.rows
                .push(Row::new("sweep", spec.security, &estimate, true, false));
            continue;
        }

        let stream = SeedStream::new(spec.seed)
            .child(spec.mode.name())
            .child(items.to_string());
        let lhs = random_ciphertexts(params, &stream.child("lhs"), items)?;
        let rhs = random_ciphertexts(params, &stream.child("rhs"), items)?;
        let (outputs, report) = if mul {
            run_vector_mul_kernel(params, &lhs, &rhs, &spec.pim)?
        } else {
            run_vector_add_kernel(params, &lhs, &rhs, &spec.pim)?
        };
        for (i, ((a, b), got)) in lhs.iter().zip(&rhs).zip(&outputs).enumerate() {
            let want = if mul {
                he_mul(params, a, b)?
            } else {
                he_add(params, a, b)?
            };
            if *got != want {
                return Err(BenchError::OracleMismatch(format!(
                    "{} item {i} of {items} differs from the host reference",
                    kind.name()
                )));
            }
        }
        if report != estimate {
            return Err(BenchError::OracleMismatch(format!(
                "{} at {items} items: measured counts differ from the cost model",
                kind.name()
            )));
        }
        out.rows
            .push(Row::new("sweep", spec.security, &report, false, true));
    }
    Ok(())
}

fn compare<T: PartialEq + std::fmt::Display>(workload: &str, got: &[T], want: &[T]) -> Result<()> {
    if got.len() != want.len() {
        return Err(BenchError::OracleMismatch(format!(
            "{workload}: {} answers, oracle has {}",
            got.len(),
            want.len()
        )));
    }
    if let Some(k) = (0..got.len()).find(|&k| got[k] != want[k]) {
        return Err(BenchError::OracleMismatch(format!(
            "{workload}: answer {k} is {}, oracle says {}",
            got[k], want[k]
        )));
    }
    Ok(())
}

fn load_data(spec: &BenchSpec) -> Result<Option<Dataset>> {
    spec.data
        .as_ref()
        .map(|p| Dataset::from_csv_path(p).map_err(|e| BenchError::usage("--data", e)))
        .transpose()
}

fn workload(spec: &BenchSpec, params: &HeParams, out: &mut Outcome) -> Result<()> {
    let (t, cfg) = (params.t(), &spec.pim);
    let keys = || KeyBundle::generate(params.clone(), spec.seed);
    let data_seed = SeedStream::new(spec.seed).child("bench").root();
    let given = load_data(spec)?;
    let users = match (&given, spec.mode) {
        (Some(d), Mode::WorkloadLinreg) => {
            if d.users() % spec.cts_per_user != 0 {
                return Err(BenchError::usage(
                    "--data",
                    format!(
                        "{} samples do not split into users of {}",
                        d.users(),
                        spec.cts_per_user
                    ),
                ));
            }
            d.users() / spec.cts_per_user
        }
        (Some(d), _) => d.users(),
        (None, _) => spec.users,
    };
    let cols = given.as_ref().map_or(1, Dataset::cols);
    let mut result = match spec.mode {
        Mode::WorkloadMean => {
            let opts = MeanOptions {
                encoding: spec.encoding,
                reduction: spec.reduction,
            };
            if spec.cost_only || users * cols > FUNCTIONAL_ADD_ITEMS {
                cost_only_note(spec, out, users * cols);
                mean_plan(users, cols, params, cfg, opts)?
            } else {
                let data = match given {
                    Some(d) => d,
                    None => {
                        let max = (t - 1) / users as u64;
                        zero_note(out, max);
                        Dataset::synthetic(users, 1, max, data_seed)?
                    }
                };
                let r = mean_pipeline(&data, &keys()?, cfg, opts, spec.seed)?;
                compare("mean", &r.answers, &oracle::mean(&data))?;
                r
            }
        }
        Mode::WorkloadVariance => {
            let inputs = users * cols;
            if spec.cost_only || inputs > FUNCTIONAL_ADD_ITEMS || !mul_fits(inputs, params) {
                cost_only_note(spec, out, inputs);
                variance_plan(users, cols, params, cfg, spec.reduction)?
            } else {
                let data = match given {
                    Some(d) => d,
                    None => {
                        let max = ((t - 1) / users as u64).isqrt();
                        zero_note(out, max);
                        Dataset::synthetic(users, 1, max, data_seed)?
                    }
                };
                let r = variance_pipeline(&data, &keys()?, cfg, spec.reduction, spec.seed)?;
                compare("variance", &r.answers, &oracle::variance(&data))?;
                r
            }
        }
        _ => {
            let opts = LinregOptions {
                mode: spec.weights,
                samples_per_user: spec.cts_per_user,
                allow_any_features: false,
            };
            let samples = users * spec.cts_per_user;
            let features = given.as_ref().map_or(REGRESSION_FEATURES, Dataset::cols);
            let products = samples * features;
            if spec.cost_only || products > FUNCTIONAL_ADD_ITEMS || !mul_fits(products, params) {
                cost_only_note(spec, out, samples);
                linreg_plan(users, features, params, cfg, opts)?
            } else {
                let data = match given {
                    Some(d) => d,
                    None => Dataset::synthetic(samples, REGRESSION_FEATURES, t - 1, data_seed)?,
                };
                let mut rng = SeedStream::new(spec.seed).child("model").rng();
                let weights = (0..features).map(|_| rng.gen_range(0..t)).collect();
                let model = LinregModel::new(weights, rng.gen_range(0..t));
                let r = linreg_pipeline(&data, &model, &keys()?, cfg, opts, spec.seed)?;
                compare("linreg", &r.answers, &oracle::linreg(&data, &model, t))?;
                r
            }
        }
    };
    result.seed = spec.seed;
    let cost_only = result.cost_only;
    for s in &result.stages {
        out.rows.push(Row::new(
            &s.name,
            spec.security,
            &s.report,
            cost_only,
            !cost_only,
        ));
    }
    out.rows.push(Row::new(
        "total",
        spec.security,
        &result.total,
        cost_only,
        !cost_only,
    ));
    out.result = Some(result);
    Ok(())
}

fn cost_only_note(spec: &BenchSpec, out: &mut Outcome, count: usize) {
    if !spec.cost_only {
        out.warnings.push(format!(
            "{count} encrypted inputs exceed the functional cap; priced with the cost model only"
        ));
    }
}

fn zero_note(out: &mut Outcome, max: u64) {
    if max == 0 {
        out.warnings.push(
            "t is too small for this many users: every value is 0; raise --plain-modulus".into(),
        );
    }
}
