use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::limbint::InstrCounter;
use crate::{Error, Result};

/// Cycles charged per instruction class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostTable {
    pub add: u64,
    pub addc: u64,
    pub load: u64,
    pub store: u64,
    pub mul32: u64,
    pub loop_overhead: u64,
}

impl Default for CostTable {
    fn default() -> Self {
        Self {
            add: 1,
            addc: 1,
            load: 1,
            store: 1,
            mul32: 96,
            loop_overhead: 2,
        }
    }
}

impl CostTable {
    /// `Σ count × price` over the six classes.
    pub fn weigh(&self, c: &InstrCounter) -> u64 {
        c.adds * self.add
            + c.addcs * self.addc
            + c.loads * self.load
            + c.stores * self.store
            + c.muls32 * self.mul32
            + c.loop_overhead * self.loop_overhead
    }
}

/// Shape and speed of the simulated device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PimConfig {
    pub num_cores: usize,
    pub clock_mhz: f64,
    pub tasklets: usize,
    pub saturation_threads: usize,
    pub cost_table: CostTable,
    pub per_core_mem_bytes: u64,
    pub host_link_gbps: f64,
}

impl Default for PimConfig {
    fn default() -> Self {
        Self {
            num_cores: 2524,
            clock_mhz: 425.0,
            tasklets: 16,
            saturation_threads: 11,
            cost_table: CostTable::default(),
            per_core_mem_bytes: 64 << 20,
            host_link_gbps: 8.0,
        }
    }
}

impl PimConfig {
    /// Rejects zero counts, zero prices and non-positive rates.
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_cores", self.num_cores as u64),
            ("tasklets", self.tasklets as u64),
            ("saturation_threads", self.saturation_threads as u64),
            ("per_core_mem_bytes", self.per_core_mem_bytes),
            ("cost_table.add", self.cost_table.add),
            ("cost_table.addc", self.cost_table.addc),
            ("cost_table.load", self.cost_table.load),
            ("cost_table.store", self.cost_table.store),
            ("cost_table.mul32", self.cost_table.mul32),
            ("cost_table.loop_overhead", self.cost_table.loop_overhead),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        for (name, v) in [
            ("clock_mhz", self.clock_mhz),
            ("host_link_gbps", self.host_link_gbps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Parses JSON; absent fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn total_mem_bytes(&self) -> u64 {
        self.num_cores as u64 * self.per_core_mem_bytes
    }
}
