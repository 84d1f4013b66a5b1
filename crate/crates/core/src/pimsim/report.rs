use serde::{Deserialize, Serialize};

use super::model::{elapsed_ms, transfer_time};
use super::PimConfig;
use crate::limbint::InstrCounter;

/// Schema tag carried by every serialized report.
pub const REPORT_SCHEMA: &str = "report_v1";

/// Counts, cycles and transfer volume of one kernel launch, or of several combined.
///
/// `instr` sums every item on every core. `cycles_per_core` is the busiest
/// core, which sets the launch time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub schema: String,
    pub kernel: String,
    pub items: u64,
    pub instr: InstrCounter,
    pub cycles_per_core: u64,
    pub elapsed_ms: f64,
    pub bytes_to_pim: u64,
    pub bytes_from_pim: u64,
    pub transfer_ms: f64,
    pub cores_used: usize,
    pub tasklets_used: usize,
}

impl KernelReport {
    /// Report for a launch of zero items.
    pub fn empty(kernel: &str) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            kernel: kernel.to_string(),
            items: 0,
            instr: InstrCounter::default(),
            cycles_per_core: 0,
            elapsed_ms: 0.0,
            bytes_to_pim: 0,
            bytes_from_pim: 0,
            transfer_ms: 0.0,
            cores_used: 0,
            tasklets_used: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build(
        kernel: &str,
        items: usize,
        instr: InstrCounter,
        cycles_per_core: u64,
        bytes_to_pim: u64,
        bytes_from_pim: u64,
        cores_used: usize,
        tasklets_used: usize,
        cfg: &PimConfig,
    ) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            kernel: kernel.to_string(),
            items: items as u64,
            instr,
            cycles_per_core,
            elapsed_ms: elapsed_ms(cycles_per_core, cfg),
            bytes_to_pim,
            bytes_from_pim,
            transfer_ms: transfer_time(bytes_to_pim + bytes_from_pim, cfg),
            cores_used,
            tasklets_used,
        }
    }

    /// Sequential composition: counts, cycles, bytes and times add up,
    /// `cores_used` and `tasklets_used` take the maximum.
    pub fn combine(&self, other: &Self) -> Self {
        let kernel = match (self.kernel.as_str(), other.kernel.as_str()) {
            ("", k) | (k, "") => k.to_string(),
            (a, b) if a == b => a.to_string(),
            (a, b) => format!("{a}+{b}"),
        };
        Self {
            schema: REPORT_SCHEMA.to_string(),
            kernel,
            items: self.items + other.items,
            instr: self.instr + other.instr,
            cycles_per_core: self.cycles_per_core + other.cycles_per_core,
            elapsed_ms: self.elapsed_ms + other.elapsed_ms,
            bytes_to_pim: self.bytes_to_pim + other.bytes_to_pim,
            bytes_from_pim: self.bytes_from_pim + other.bytes_from_pim,
            transfer_ms: self.transfer_ms + other.transfer_ms,
            cores_used: self.cores_used.max(other.cores_used),
            tasklets_used: self.tasklets_used.max(other.tasklets_used),
        }
    }

    /// Folds a sequence of stage reports with [`Self::combine`].
    pub fn total<'a>(reports: impl IntoIterator<Item = &'a Self>) -> Self {
        reports
            .into_iter()
            .fold(Self::empty(""), |acc, r| acc.combine(r))
    }

    /// Device time plus both transfer directions.
    pub fn end_to_end_ms(&self) -> f64 {
        self.elapsed_ms + self.transfer_ms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_is_fieldwise() {
        let cfg = PimConfig::default();
        let ic = InstrCounter {
            adds: 5,
            ..Default::default()
        };
        let a = KernelReport::build("add", 4, ic, 425, 100, 50, 4, 11, &cfg);
        let b = KernelReport::build("mul", 2, ic * 2, 850, 10, 5, 2, 16, &cfg);
        let c = a.combine(&b);
        assert_eq!(c.kernel, "add+mul");
        assert_eq!(c.instr.adds, 15);
        assert_eq!(c.cycles_per_core, 1275);
        assert!((c.elapsed_ms - 0.003).abs() < 1e-15);
        assert!((c.transfer_ms - (a.transfer_ms + b.transfer_ms)).abs() < 1e-15);
        assert_eq!((c.cores_used, c.tasklets_used), (4, 16));
        assert_eq!(KernelReport::total([&a, &b]), c);
        assert_eq!(KernelReport::total([&a]).kernel, "add");
    }

    #[test]
    fn json_field_names() {
        let r = KernelReport::empty("add");
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], "report_v1");
        for key in [
            "instr",
            "cycles_per_core",
            "elapsed_ms",
            "bytes_to_pim",
            "bytes_from_pim",
            "transfer_ms",
            "cores_used",
            "tasklets_used",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: KernelReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
