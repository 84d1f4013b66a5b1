use super::PimConfig;
use crate::limbint::InstrCounter;

/// Work-item to core mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignments: Vec<usize>,
    cores_used: usize,
}

impl Partition {
    /// Core index of each item.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn num_items(&self) -> usize {
        self.assignments.len()
    }

    pub fn cores_used(&self) -> usize {
        self.cores_used
    }

    /// Items held by `core`.
    pub fn load(&self, core: usize) -> usize {
        if core >= self.cores_used {
            return 0;
        }
        let base = self.num_items() / self.cores_used;
        base + usize::from(core < self.num_items() % self.cores_used)
    }

    pub fn max_load(&self) -> usize {
        self.load(0)
    }

    /// Item indices grouped by core, in core order.
    pub fn by_core(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cores_used];
        for (item, &core) in self.assignments.iter().enumerate() {
            out[core].push(item);
        }
        out
    }
}

/// Round-robin over `min(num_items, num_cores)` cores.
pub fn partition(num_items: usize, cfg: &PimConfig) -> Partition {
    let cores_used = num_items.min(cfg.num_cores);
    Partition {
        assignments: (0..num_items).map(|i| i % cores_used.max(1)).collect(),
        cores_used,
    }
}

/// Per-core cycles for a core executing `instr` in total, spread over `tasklets` threads.
///
/// `ceil(I · sat / min(tasklets, sat))` with `I` the cost-weighted count.
pub fn estimate_cycles(instr: &InstrCounter, tasklets: usize, cfg: &PimConfig) -> u64 {
    let weighted = cfg.cost_table.weigh(instr) as u128;
    let sat = cfg.saturation_threads as u128;
    let active = (tasklets.max(1) as u128).min(sat);
    (weighted * sat).div_ceil(active) as u64
}

/// Wall time of `cycles` at the configured clock.
pub fn elapsed_ms(cycles: u64, cfg: &PimConfig) -> f64 {
    cycles as f64 / (cfg.clock_mhz * 1e3)
}

/// Host link time for `bytes`.
pub fn transfer_time(bytes: u64, cfg: &PimConfig) -> f64 {
    bytes as f64 * 8.0 / (cfg.host_link_gbps * 1e9) * 1e3
}
