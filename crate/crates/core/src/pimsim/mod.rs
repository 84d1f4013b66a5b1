//! A functional simulator and analytic cost model of a many-core PIM system.
//!
//! Work items are spread round-robin over the cores. Every item runs through
//! the counting limb kernels, so a launch returns both exact results and the
//! instruction counts that drive the cycle model. The same counts are
//! available in closed form through [`cost_only_estimate`], which is how
//! large item counts are priced without materializing data.

mod config;
pub mod kernels;
mod model;
mod report;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bfv::wire::serialized_len;
use crate::bfv::{Ciphertext, HeParams};
use crate::limbint::InstrCounter;
use crate::polyring::{check_same_ring, Polynomial};
use crate::{Error, Result};

pub use config::{CostTable, PimConfig};
pub use model::{elapsed_ms, estimate_cycles, partition, transfer_time, Partition};
pub use report::{KernelReport, REPORT_SCHEMA};

/// Kernel families known to the cost model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KernelKind {
    /// Ciphertext addition of operands with `lhs` and `rhs` components.
    Add { lhs: usize, rhs: usize },
    /// Ciphertext multiplication with scale-and-round.
    Mul,
    /// One raw negacyclic polynomial product.
    RawMul,
    /// Ciphertext of `components` polynomials times a plaintext scalar.
    ScalarMul { components: usize },
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Add { .. } => "add",
            Self::Mul => "mul",
            Self::RawMul => "raw_mul",
            Self::ScalarMul { .. } => "scalar_mul",
        }
    }

    /// Instruction counts of one work item.
    pub fn item_cost(&self, params: &HeParams) -> InstrCounter {
        let (n, w, k) = (params.n(), params.width(), params.ring().modulus().k());
        match *self {
            Self::Add { lhs, rhs } => kernels::cost::add_item(n, w, lhs.max(rhs)),
            Self::Mul => kernels::cost::mul_item(n, w, k),
            Self::RawMul => kernels::cost::raw_mul_item(n, w, k),
            Self::ScalarMul { components } => kernels::cost::scalar_mul_item(n, w, k, components),
        }
    }

    /// Serialized bytes moved to and from the device per item.
    pub fn item_bytes(&self, params: &HeParams) -> (u64, u64) {
        let ct = |c: usize| serialized_len(params, c) as u64;
        match *self {
            Self::Add { lhs, rhs } => (ct(lhs) + ct(rhs), ct(lhs.max(rhs))),
            Self::Mul => (2 * ct(2), ct(3)),
            Self::RawMul => (2 * ct(1), ct(1)),
            Self::ScalarMul { components } => {
                (ct(components) + 4 * params.width() as u64, ct(components))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |c: usize| (1..=crate::bfv::MAX_COMPONENTS).contains(&c);
        let valid = match *self {
            Self::Add { lhs, rhs } => ok(lhs) && ok(rhs),
            Self::ScalarMul { components } => ok(components),
            Self::Mul | Self::RawMul => true,
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "invalid component counts in {self}"
            )))
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Add { lhs, rhs } => write!(f, "add({lhs}x{rhs})"),
            Self::ScalarMul { components } => write!(f, "scalar_mul({components})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    /// `add`, `mul`, `raw_mul` or `scalar_mul`, for fresh two-component operands.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "add" => Ok(Self::Add { lhs: 2, rhs: 2 }),
            "mul" => Ok(Self::Mul),
            "raw_mul" => Ok(Self::RawMul),
            "scalar_mul" => Ok(Self::ScalarMul { components: 2 }),
            _ => Err(Error::UnknownKernel(s.to_string())),
        }
    }
}

/// Tasklets that find work: coefficients are split among them.
fn tasklets_used(items: usize, params: &HeParams, cfg: &PimConfig) -> usize {
    if items == 0 {
        0
    } else {
        cfg.tasklets.min(params.n())
    }
}

fn check_capacity(part: &Partition, bytes: &[u64], cfg: &PimConfig) -> Result<()> {
    let mut per_core = vec![0u64; part.cores_used()];
    for (item, &core) in part.assignments().iter().enumerate() {
        per_core[core] += bytes[item];
    }
    if let Some((core, &b)) = per_core
        .iter()
        .enumerate()
        .find(|(_, &b)| b > cfg.per_core_mem_bytes)
    {
        return Err(Error::Capacity(format!(
            "core {core} needs {b} bytes, capacity is {}",
            cfg.per_core_mem_bytes
        )));
    }
    Ok(())
}

/// Runs `f` on every item and assembles the report from the measured counters.
///
/// `bytes[i]` is `(to_pim, from_pim)` for item `i`.
fn launch<T, R, F>(
    kernel: &str,
    items: &[T],
    bytes: &[(u64, u64)],
    params: &HeParams,
    cfg: &PimConfig,
    f: F,
) -> Result<(Vec<R>, KernelReport)>
where
    T: Sync,
    R: Send,
    F: Fn(&T, &mut InstrCounter) -> Result<R> + Sync,
{
    cfg.validate()?;
    if items.is_empty() {
        return Ok((Vec::new(), KernelReport::empty(kernel)));
    }
    let part = partition(items.len(), cfg);
    let footprint: Vec<u64> = bytes.iter().map(|(i, o)| i + o).collect();
    check_capacity(&part, &footprint, cfg)?;

    let outcomes = items
        .par_iter()
        .map(|item| {
            let mut ctr = InstrCounter::default();
            f(item, &mut ctr).map(|r| (r, ctr))
        })
        .collect::<Result<Vec<_>>>()?;

    let tasklets = tasklets_used(items.len(), params, cfg);
    let mut total = InstrCounter::default();
    let mut cycles = 0;
    for core_items in part.by_core() {
        let core: InstrCounter = core_items.iter().map(|&i| outcomes[i].1).sum();
        total += core;
        cycles = cycles.max(estimate_cycles(&core, tasklets, cfg));
    }
    let to_pim = bytes.iter().map(|b| b.0).sum();
    let from_pim = bytes.iter().map(|b| b.1).sum();
    let report = KernelReport::build(
        kernel,
        items.len(),
        total,
        cycles,
        to_pim,
        from_pim,
        part.cores_used(),
        tasklets,
        cfg,
    );
    Ok((outcomes.into_iter().map(|(r, _)| r).collect(), report))
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

fn ct_bytes(params: &HeParams, ct: &Ciphertext) -> u64 {
    serialized_len(params, ct.len()) as u64
}

/// Pairwise [`crate::bfv::he_add`] on the device.
pub fn run_vector_add_kernel(
    params: &HeParams,
    lhs: &[Ciphertext],
    rhs: &[Ciphertext],
    cfg: &PimConfig,
) -> Result<(Vec<Ciphertext>, KernelReport)> {
    check_lengths(lhs.len(), rhs.len())?;
    let pairs: Vec<(&Ciphertext, &Ciphertext)> = lhs.iter().zip(rhs).collect();
    let mut bytes = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        a.check_params(params)?;
        b.check_params(params)?;
        let out = serialized_len(params, a.len().max(b.len())) as u64;
        bytes.push((ct_bytes(params, a) + ct_bytes(params, b), out));
    }
    launch("add", &pairs, &bytes, params, cfg, |(a, b), ctr| {
        kernels::add_item(params, a, b, ctr)
    })
}

/// Pairwise [`crate::bfv::he_mul`] on the device.
pub fn run_vector_mul_kernel(
    params: &HeParams,
    lhs: &[Ciphertext],
    rhs: &[Ciphertext],
    cfg: &PimConfig,
) -> Result<(Vec<Ciphertext>, KernelReport)> {
    check_lengths(lhs.len(), rhs.len())?;
    let pairs: Vec<(&Ciphertext, &Ciphertext)> = lhs.iter().zip(rhs).collect();
    for (i, (a, b)) in pairs.iter().enumerate() {
        a.check_params(params)?;
        b.check_params(params)?;
        if a.len() != 2 || b.len() != 2 || a.mul_depth() > 0 || b.mul_depth() > 0 {
            return Err(Error::Depth(format!(
                "item {i}: multiplication needs fresh 2-component operands, got lengths {}/{}",
                a.len(),
                b.len()
            )));
        }
    }
    let bytes = vec![KernelKind::Mul.item_bytes(params); pairs.len()];
    launch("mul", &pairs, &bytes, params, cfg, |(a, b), ctr| {
        kernels::mul_item(params, a, b, ctr)
    })
}

/// Pairwise raw negacyclic products of ring elements, without scaling.
pub fn run_raw_mul_kernel(
    params: &HeParams,
    lhs: &[Polynomial],
    rhs: &[Polynomial],
    cfg: &PimConfig,
) -> Result<(Vec<Polynomial>, KernelReport)> {
    check_lengths(lhs.len(), rhs.len())?;
    let pairs: Vec<(&Polynomial, &Polynomial)> = lhs.iter().zip(rhs).collect();
    for (a, b) in &pairs {
        check_same_ring(a.ring(), params.ring())?;
        check_same_ring(b.ring(), params.ring())?;
    }
    let bytes = vec![KernelKind::RawMul.item_bytes(params); pairs.len()];
    launch("raw_mul", &pairs, &bytes, params, cfg, |(a, b), ctr| {
        kernels::raw_mul_item(a, b, ctr)
    })
}

/// Each ciphertext times its plaintext scalar, as [`crate::bfv::he_scalar_mul`].
pub fn run_scalar_mul_kernel(
    params: &HeParams,
    cts: &[Ciphertext],
    scalars: &[u64],
    cfg: &PimConfig,
) -> Result<(Vec<Ciphertext>, KernelReport)> {
    check_lengths(cts.len(), scalars.len())?;
    let items: Vec<(&Ciphertext, u64)> = cts.iter().zip(scalars.iter().copied()).collect();
    let mut bytes = Vec::with_capacity(items.len());
    for (ct, w) in &items {
        ct.check_params(params)?;
        if *w >= params.t() {
            return Err(Error::Contract(format!(
                "scalar {w} is not below t = {}",
                params.t()
            )));
        }
        bytes.push(
            KernelKind::ScalarMul {
                components: ct.len(),
            }
            .item_bytes(params),
        );
    }
    launch("scalar_mul", &items, &bytes, params, cfg, |(ct, w), ctr| {
        kernels::scalar_mul_item(params, ct, *w, ctr)
    })
}

/// Report for `num_items` items of `kind` from closed-form counts alone.
///
/// Matches the report of a functional launch of the same shape exactly.
pub fn cost_only_estimate(
    kind: KernelKind,
    num_items: usize,
    params: &HeParams,
    cfg: &PimConfig,
) -> Result<KernelReport> {
    cfg.validate()?;
    kind.validate()?;
    if num_items == 0 {
        return Ok(KernelReport::empty(kind.name()));
    }
    let part = partition(num_items, cfg);
    let (to_pim, from_pim) = kind.item_bytes(params);
    let busiest = (to_pim + from_pim) * part.max_load() as u64;
    if busiest > cfg.per_core_mem_bytes {
        return Err(Error::Capacity(format!(
            "core 0 needs {busiest} bytes, capacity is {}",
            cfg.per_core_mem_bytes
        )));
    }
    let item = kind.item_cost(params);
    let tasklets = tasklets_used(num_items, params, cfg);
    let cycles = estimate_cycles(&(item * part.max_load() as u64), tasklets, cfg);
    Ok(KernelReport::build(
        kind.name(),
        num_items,
        item * num_items as u64,
        cycles,
        to_pim * num_items as u64,
        from_pim * num_items as u64,
        part.cores_used(),
        tasklets,
        cfg,
    ))
}

/// Parses a kernel name and prices it; unknown names are an error.
pub fn cost_only_estimate_named(
    kind: &str,
    num_items: usize,
    params: &HeParams,
    cfg: &PimConfig,
) -> Result<KernelReport> {
    cost_only_estimate(kind.parse()?, num_items, params, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_names() {
        assert_eq!(
            "add".parse::<KernelKind>().unwrap(),
            KernelKind::Add { lhs: 2, rhs: 2 }
        );
        assert_eq!("raw-mul".parse::<KernelKind>().unwrap(), KernelKind::RawMul);
        assert!(matches!(
            "fft".parse::<KernelKind>(),
            Err(Error::UnknownKernel(_))
        ));
        assert_eq!(KernelKind::Add { lhs: 3, rhs: 2 }.to_string(), "add(3x2)");
        let p = HeParams::custom(8, 97, 7, 1).unwrap();
        assert!(cost_only_estimate_named("nope", 4, &p, &PimConfig::default()).is_err());
        assert!(cost_only_estimate(
            KernelKind::Add { lhs: 4, rhs: 2 },
            4,
            &p,
            &PimConfig::default()
        )
        .is_err());
    }

    #[test]
    fn empty_launches() {
        let p = HeParams::custom(8, 97, 7, 1).unwrap();
        let cfg = PimConfig::default();
        let (out, r) = run_vector_add_kernel(&p, &[], &[], &cfg).unwrap();
        assert!(out.is_empty());
        assert!(r.instr.is_zero() && r.cycles_per_core == 0 && r.bytes_to_pim == 0);
        assert_eq!(
            cost_only_estimate(KernelKind::Mul, 0, &p, &cfg)
                .unwrap()
                .elapsed_ms,
            0.0
        );
    }

    #[test]
    fn capacity_is_enforced() {
        let p = HeParams::custom(8, 97, 7, 1).unwrap();
        let cfg = PimConfig {
            num_cores: 1,
            per_core_mem_bytes: 100,
            ..Default::default()
        };
        assert!(matches!(
            cost_only_estimate(KernelKind::Mul, 10, &p, &cfg),
            Err(Error::Capacity(_))
        ));
    }
}
