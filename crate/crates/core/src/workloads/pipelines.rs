use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::{self, Reduction};
use super::{estimate_plan, Dataset, Encoding, KeyBundle, PipelineResult, Stage, StageReport};
use crate::bfv::{
    decode_scalar, decode_vector, decrypt_with_budget, encode_scalar, encode_vector, encrypt_from,
    Ciphertext, HeParams, Plaintext,
};
use crate::pimsim::{
    run_scalar_mul_kernel, run_vector_add_kernel, run_vector_mul_kernel, KernelKind, PimConfig,
};
use crate::rng::SeedStream;
use crate::{Error, Result};

/// Feature count of a regression sample.
pub const REGRESSION_FEATURES: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanOptions {
    pub encoding: Encoding,
    pub reduction: Reduction,
}

/// How regression weights reach the device.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Encrypted weights, ciphertext-by-ciphertext products.
    #[default]
    Encrypted,
    /// Plaintext weights, ciphertext-by-scalar products.
    Plain,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encrypted" => Ok(Self::Encrypted),
            "plain" => Ok(Self::Plain),
            other => Err(Error::Parameter(format!("unknown weight mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinregOptions {
    pub mode: WeightMode,
    /// Dataset rows per user; the row count must be a multiple.
    pub samples_per_user: usize,
    /// Accept feature counts other than [`REGRESSION_FEATURES`].
    pub allow_any_features: bool,
}

impl Default for LinregOptions {
    fn default() -> Self {
        Self {
            mode: WeightMode::Encrypted,
            samples_per_user: 1,
            allow_any_features: false,
        }
    }
}

/// Weights and bias, integers mod `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinregModel {
    pub weights: Vec<u64>,
    pub bias: u64,
}

impl LinregModel {
    pub fn new(weights: Vec<u64>, bias: u64) -> Self {
        Self { weights, bias }
    }
}

fn check_below_t(data: &Dataset, t: u64) -> Result<()> {
    for (i, row) in data.rows().iter().enumerate() {
        if let Some(j) = row.iter().position(|&v| v >= t) {
            return Err(Error::Overflow(format!(
                "user {i} column {j}: value {} is not below t = {t}",
                row[j]
            )));
        }
    }
    Ok(())
}

/// Rejects columns whose worst-case sum of `power`-th powers reaches `t`.
fn check_sum_bound(data: &Dataset, power: u32, t: u64) -> Result<()> {
    check_below_t(data, t)?;
    let users = data.users() as u128;
    for j in 0..data.cols() {
        let col = data.column(j);
        let (i, &max) = col
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|&(_, v)| *v)
            .expect("datasets are non-empty");
        let bound = users.saturating_mul((max as u128).saturating_pow(power));
        if bound >= t as u128 {
            return Err(Error::Overflow(format!(
                "column {j}: {users} users x {max}^{power} (user {i}) = {bound} reaches t = {t}"
            )));
        }
    }
    Ok(())
}

fn encrypt_all(
    keys: &KeyBundle,
    stream: &SeedStream,
    pts: &[(String, Plaintext)],
) -> Result<Vec<Ciphertext>> {
    pts.par_iter()
        .map(|(label, pt)| encrypt_from(&keys.params, &keys.pk, pt, &stream.child(label)))
        .collect()
}

/// One ciphertext per value, column-major: list `j` holds column `j`.
fn encrypt_columns(
    keys: &KeyBundle,
    stream: &SeedStream,
    data: &Dataset,
) -> Result<Vec<Vec<Ciphertext>>> {
    let mut pts = Vec::with_capacity(data.users() * data.cols());
    for j in 0..data.cols() {
        for (i, v) in data.column(j).into_iter().enumerate() {
            pts.push((format!("{i}/{j}"), encode_scalar(&keys.params, v)?));
        }
    }
    let cts = encrypt_all(keys, stream, &pts)?;
    Ok(cts.chunks(data.users()).map(<[_]>::to_vec).collect())
}

/// Decrypts one output, refusing it once the noise has used up the budget.
fn open(keys: &KeyBundle, ct: &Ciphertext, what: &str) -> Result<(Plaintext, u32)> {
    let (pt, budget) = decrypt_with_budget(&keys.params, &keys.sk, ct)?;
    if budget == 0 {
        return Err(Error::NoiseExhausted(format!(
            "{what} has no noise budget left"
        )));
    }
    Ok((pt, budget))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn check_users(users: usize) -> Result<()> {
    if users == 0 {
        return Err(Error::Dataset("pipelines need at least one user".into()));
    }
    Ok(())
}

fn mean_stages(
    users: usize,
    cols: usize,
    params: &HeParams,
    opts: MeanOptions,
    cfg: &PimConfig,
) -> Result<(Vec<Stage>, usize)> {
    check_users(users)?;
    Ok(match opts.encoding {
        Encoding::Scalar => reduce::plan("mean/sum", cols, users, 2, opts.reduction, cfg),
        Encoding::Packed => {
            if cols > params.n() {
                return Err(Error::LengthMismatch {
                    left: cols,
                    right: params.n(),
                });
            }
            reduce::plan("mean/sum", 1, users, 2, opts.reduction, cfg)
        }
    })
}

/// Column means of `data`: device sums, host decryption and division.
pub fn mean_pipeline(
    data: &Dataset,
    keys: &KeyBundle,
    cfg: &PimConfig,
    opts: MeanOptions,
    seed: u64,
) -> Result<PipelineResult> {
    let params = &keys.params;
    let (users, cols) = (data.users(), data.cols());
    let (_, host_additions) = mean_stages(users, cols, params, opts, cfg)?;
    check_sum_bound(data, 1, params.t())?;
    let stream = SeedStream::new(seed).child("mean");
    let lists = match opts.encoding {
        Encoding::Scalar => encrypt_columns(keys, &stream, data)?,
        Encoding::Packed => {
            let pts = data
                .rows()
                .iter()
                .enumerate()
                .map(|(i, row)| Ok((i.to_string(), encode_vector(params, row)?)))
                .collect::<Result<Vec<_>>>()?;
            vec![encrypt_all(keys, &stream, &pts)?]
        }
    };
    let (sums, stages) = reduce::reduce("mean/sum", params, lists, opts.reduction, cfg)?;

    let start = Instant::now();
    let mut totals = Vec::with_capacity(cols);
    let mut min_budget = u32::MAX;
    for (k, ct) in sums.iter().enumerate() {
        let (pt, budget) = open(keys, ct, &format!("mean sum {k}"))?;
        min_budget = min_budget.min(budget);
        match opts.encoding {
            Encoding::Scalar => totals.push(decode_scalar(&pt)),
            Encoding::Packed => totals.extend(decode_vector(&pt, cols)),
        }
    }
    let answers = totals
        .into_iter()
        .map(|s| Ratio::new(s as i128, users as i128))
        .collect();
    let host_ms = elapsed_ms(start);
    Ok(PipelineResult::new(
        "mean",
        params,
        seed,
        users,
        answers,
        stages,
        host_ms,
        host_additions,
        Some(min_budget),
        false,
    ))
}

/// Device cost of [`mean_pipeline`] without running it.
pub fn mean_plan(
    users: usize,
    cols: usize,
    params: &HeParams,
    cfg: &PimConfig,
    opts: MeanOptions,
) -> Result<PipelineResult> {
    let (stages, host_additions) = mean_stages(users, cols, params, opts, cfg)?;
    let reports = estimate_plan(&stages, params, cfg)?;
    Ok(PipelineResult::new(
        "mean",
        params,
        0,
        users,
        Vec::new(),
        reports,
        0.0,
        host_additions,
        None,
        true,
    ))
}

fn variance_stages(
    users: usize,
    cols: usize,
    reduction: Reduction,
    cfg: &PimConfig,
) -> Result<(Vec<Stage>, usize)> {
    check_users(users)?;
    let mut stages = vec![Stage::new("variance/square", KernelKind::Mul, users * cols)];
    let (sq, host_sq) = reduce::plan("variance/sum_sq", cols, users, 3, reduction, cfg);
    let (s, host_s) = reduce::plan("variance/sum", cols, users, 2, reduction, cfg);
    stages.extend(sq);
    stages.extend(s);
    Ok((stages, host_sq + host_s))
}

/// Population variance of each column as `E[x²] − E[x]²`.
pub fn variance_pipeline(
    data: &Dataset,
    keys: &KeyBundle,
    cfg: &PimConfig,
    reduction: Reduction,
    seed: u64,
) -> Result<PipelineResult> {
    let params = &keys.params;
    let (users, cols) = (data.users(), data.cols());
    let (_, host_additions) = variance_stages(users, cols, reduction, cfg)?;
    check_sum_bound(data, 2, params.t())?;
    let lists = encrypt_columns(keys, &SeedStream::new(seed).child("variance"), data)?;

    let flat: Vec<Ciphertext> = lists.concat();
    let (squares, report) = run_vector_mul_kernel(params, &flat, &flat, cfg)?;
    let mut stages = vec![StageReport::new("variance/square", report)];
    let sq_lists = squares.chunks(users).map(<[_]>::to_vec).collect();
    let (sum_sq, st) = reduce::reduce("variance/sum_sq", params, sq_lists, reduction, cfg)?;
    stages.extend(st);
    let (sum, st) = reduce::reduce("variance/sum", params, lists, reduction, cfg)?;
    stages.extend(st);

    let start = Instant::now();
    let mut min_budget = u32::MAX;
    let mut answers = Vec::with_capacity(cols);
    for j in 0..cols {
        let (p2, b2) = open(keys, &sum_sq[j], &format!("sum of squares {j}"))?;
        let (p1, b1) = open(keys, &sum[j], &format!("sum {j}"))?;
        min_budget = min_budget.min(b1).min(b2);
        let ex2 = Ratio::new(decode_scalar(&p2) as i128, users as i128);
        let ex = Ratio::new(decode_scalar(&p1) as i128, users as i128);
        answers.push(ex2 - ex * ex);
    }
    let host_ms = elapsed_ms(start);
    Ok(PipelineResult::new(
        "variance",
        params,
        seed,
        users,
        answers,
        stages,
        host_ms,
        host_additions,
        Some(min_budget),
        false,
    ))
}

/// Device cost of [`variance_pipeline`] without running it.
pub fn variance_plan(
    users: usize,
    cols: usize,
    params: &HeParams,
    cfg: &PimConfig,
    reduction: Reduction,
) -> Result<PipelineResult> {
    let (stages, host_additions) = variance_stages(users, cols, reduction, cfg)?;
    let reports = estimate_plan(&stages, params, cfg)?;
    Ok(PipelineResult::new(
        "variance",
        params,
        0,
        users,
        Vec::new(),
        reports,
        0.0,
        host_additions,
        None,
        true,
    ))
}

fn linreg_stages(samples: usize, features: usize, opts: &LinregOptions) -> Result<Vec<Stage>> {
    if features == 0 {
        return Err(Error::Parameter(
            "regression needs at least one feature".into(),
        ));
    }
    if features != REGRESSION_FEATURES && !opts.allow_any_features {
        return Err(Error::Parameter(format!(
            "regression samples have {REGRESSION_FEATURES} features, got {features}"
        )));
    }
    if opts.samples_per_user == 0 || !samples.is_multiple_of(opts.samples_per_user) {
        return Err(Error::Parameter(format!(
            "{samples} samples do not split into users of {}",
            opts.samples_per_user
        )));
    }
    check_users(samples)?;
    let (product, comps) = match opts.mode {
        WeightMode::Encrypted => (KernelKind::Mul, 3),
        WeightMode::Plain => (KernelKind::ScalarMul { components: 2 }, 2),
    };
    let mut stages = vec![Stage::new("linreg/products", product, samples * features)];
    for j in 1..features {
        let add = KernelKind::Add {
            lhs: comps,
            rhs: comps,
        };
        stages.push(Stage::new(format!("linreg/dot{j}"), add, samples));
    }
    let bias = KernelKind::Add { lhs: comps, rhs: 2 };
    stages.push(Stage::new("linreg/bias", bias, samples));
    Ok(stages)
}

/// Applies `model` to every row: `Σ w_j x_j + b mod t`.
///
/// Rows are samples; each user owns `opts.samples_per_user` consecutive rows.
pub fn linreg_pipeline(
    data: &Dataset,
    model: &LinregModel,
    keys: &KeyBundle,
    cfg: &PimConfig,
    opts: LinregOptions,
    seed: u64,
) -> Result<PipelineResult> {
    let params = &keys.params;
    let (samples, f) = (data.users(), data.cols());
    linreg_stages(samples, f, &opts)?;
    if model.weights.len() != f {
        return Err(Error::LengthMismatch {
            left: model.weights.len(),
            right: f,
        });
    }
    let t = params.t();
    if let Some(w) = model.weights.iter().chain([&model.bias]).find(|&&w| w >= t) {
        return Err(Error::Parameter(format!(
            "model coefficient {w} is not below t = {t}"
        )));
    }
    check_below_t(data, t)?;

    let stream = SeedStream::new(seed).child("linreg");
    let mut pts = Vec::with_capacity(samples * f);
    for (i, row) in data.rows().iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            pts.push((format!("{i}/{j}"), encode_scalar(params, x)?));
        }
    }
    let features = encrypt_all(keys, &stream, &pts)?;
    let bias_pt = encode_scalar(params, model.bias)?;

    let (products, report, bias) = match opts.mode {
        WeightMode::Encrypted => {
            let mut wpts = Vec::with_capacity(f + 1);
            for (j, &w) in model.weights.iter().enumerate() {
                wpts.push((format!("w/{j}"), encode_scalar(params, w)?));
            }
            wpts.push(("b".to_string(), bias_pt));
            let mut weights = encrypt_all(keys, &stream, &wpts)?;
            let bias = weights.pop().expect("bias was encrypted last");
            let rhs: Vec<Ciphertext> = (0..samples * f).map(|k| weights[k % f].clone()).collect();
            let (products, report) = run_vector_mul_kernel(params, &features, &rhs, cfg)?;
            (products, report, bias)
        }
        WeightMode::Plain => {
            let scalars: Vec<u64> = (0..samples * f).map(|k| model.weights[k % f]).collect();
            let (products, report) = run_scalar_mul_kernel(params, &features, &scalars, cfg)?;
            (products, report, Ciphertext::trivial(params, &bias_pt)?)
        }
    };
    let mut stages = vec![StageReport::new("linreg/products", report)];
    let mut acc: Vec<Ciphertext> = products.iter().step_by(f).cloned().collect();
    for j in 1..f {
        let rhs: Vec<Ciphertext> = products.iter().skip(j).step_by(f).cloned().collect();
        let (sums, report) = run_vector_add_kernel(params, &acc, &rhs, cfg)?;
        stages.push(StageReport::new(format!("linreg/dot{j}"), report));
        acc = sums;
    }
    let (acc, report) = run_vector_add_kernel(params, &acc, &vec![bias; samples], cfg)?;
    stages.push(StageReport::new("linreg/bias", report));

    let start = Instant::now();
    let mut min_budget = u32::MAX;
    let mut answers = Vec::with_capacity(samples);
    for (i, ct) in acc.iter().enumerate() {
        let (pt, budget) = open(keys, ct, &format!("prediction {i}"))?;
        min_budget = min_budget.min(budget);
        answers.push(Ratio::from_integer(decode_scalar(&pt) as i128));
    }
    let host_ms = elapsed_ms(start);
    Ok(PipelineResult::new(
        "linreg",
        params,
        seed,
        samples / opts.samples_per_user,
        answers,
        stages,
        host_ms,
        0,
        Some(min_budget),
        false,
    ))
}

/// Device cost of [`linreg_pipeline`] for `users × opts.samples_per_user`
/// samples of `features` features.
pub fn linreg_plan(
    users: usize,
    features: usize,
    params: &HeParams,
    cfg: &PimConfig,
    opts: LinregOptions,
) -> Result<PipelineResult> {
    let stages = linreg_stages(users * opts.samples_per_user, features, &opts)?;
    let reports = estimate_plan(&stages, params, cfg)?;
    Ok(PipelineResult::new(
        "linreg",
        params,
        0,
        users,
        Vec::new(),
        reports,
        0.0,
        0,
        None,
        true,
    ))
}
