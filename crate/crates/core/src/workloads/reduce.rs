use serde::{Deserialize, Serialize};

use super::{Stage, StageReport};
use crate::bfv::{he_add, Ciphertext, HeParams};
use crate::pimsim::{run_vector_add_kernel, KernelKind, PimConfig};
use crate::Result;

/// How a list of ciphertexts is summed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Each core sums a group of ciphertexts held in its own bank; the host
    /// adds the per-group partial sums.
    #[default]
    BankLocal,
    /// Pairwise tree on the device until one ciphertext per list remains.
    FullTree,
}

impl std::str::FromStr for Reduction {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "bank_local" => Ok(Self::BankLocal),
            "full_tree" | "tree" => Ok(Self::FullTree),
            other => Err(crate::Error::Parameter(format!(
                "unknown reduction `{other}`"
            ))),
        }
    }
}

/// Group size for bank-local sums of `lists` lists of `len` ciphertexts:
/// the smallest `g >= 2` that keeps every group on its own core.
pub(crate) fn group_size(lists: usize, len: usize, cores: usize) -> usize {
    if len <= 1 {
        return len;
    }
    (2..=len)
        .find(|&g| lists * len.div_ceil(g) <= cores)
        .unwrap_or(len)
}

/// Device add launches for summing `lists` lists of `len` ciphertexts with
/// `components` polynomials each, plus the number of host-side additions.
pub(crate) fn plan(
    name: &str,
    lists: usize,
    len: usize,
    components: usize,
    reduction: Reduction,
    cfg: &PimConfig,
) -> (Vec<Stage>, usize) {
    let kind = KernelKind::Add {
        lhs: components,
        rhs: components,
    };
    let mut stages = Vec::new();
    match reduction {
        Reduction::BankLocal => {
            let g = group_size(lists, len, cfg.num_cores);
            if g == 0 {
                return (stages, 0);
            }
            for r in 1..g {
                let per_list = len / g + usize::from(len % g > r);
                stages.push(Stage::new(
                    format!("{name}/pass{r}"),
                    kind,
                    lists * per_list,
                ));
            }
            (stages, lists * (len.div_ceil(g) - 1))
        }
        Reduction::FullTree => {
            let (mut remaining, mut round) = (len, 1);
            while remaining > 1 {
                stages.push(Stage::new(
                    format!("{name}/round{round}"),
                    kind,
                    lists * (remaining / 2),
                ));
                remaining = remaining.div_ceil(2);
                round += 1;
            }
            (stages, 0)
        }
    }
}

/// Sums every list to one ciphertext.
///
/// All lists must have the same length and component count. Returns the
/// sums, the device stage reports and the number of host additions.
pub(crate) fn reduce(
    name: &str,
    params: &HeParams,
    lists: Vec<Vec<Ciphertext>>,
    reduction: Reduction,
    cfg: &PimConfig,
) -> Result<(Vec<Ciphertext>, Vec<StageReport>)> {
    let len = lists.first().map_or(0, Vec::len);
    let mut reports = Vec::new();
    match reduction {
        Reduction::BankLocal => {
            let g = group_size(lists.len(), len, cfg.num_cores);
            let groups: Vec<Vec<Ciphertext>> = lists
                .into_iter()
                .flat_map(|l| {
                    let chunks: Vec<Vec<Ciphertext>> =
                        l.chunks(g.max(1)).map(<[_]>::to_vec).collect();
                    chunks
                })
                .collect();
            let mut acc: Vec<Ciphertext> = groups.iter().map(|grp| grp[0].clone()).collect();
            for r in 1..g {
                let active: Vec<usize> =
                    (0..groups.len()).filter(|&k| groups[k].len() > r).collect();
                let lhs: Vec<Ciphertext> = active.iter().map(|&k| acc[k].clone()).collect();
                let rhs: Vec<Ciphertext> = active.iter().map(|&k| groups[k][r].clone()).collect();
                let (sums, report) = run_vector_add_kernel(params, &lhs, &rhs, cfg)?;
                for (k, s) in active.into_iter().zip(sums) {
                    acc[k] = s;
                }
                reports.push(StageReport::new(format!("{name}/pass{r}"), report));
            }
            // partial sums of one list are adjacent
            let per_list = len.div_ceil(g.max(1));
            let sums = acc
                .chunks(per_list.max(1))
                .map(|partials| {
                    partials[1..]
                        .iter()
                        .try_fold(partials[0].clone(), |s, p| he_add(params, &s, p))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((sums, reports))
        }
        Reduction::FullTree => {
            let mut level = lists;
            let mut round = 1;
            while level.first().is_some_and(|l| l.len() > 1) {
                let mut lhs = Vec::new();
                let mut rhs = Vec::new();
                for l in &level {
                    for pair in l.chunks_exact(2) {
                        lhs.push(pair[0].clone());
                        rhs.push(pair[1].clone());
                    }
                }
                let (sums, report) = run_vector_add_kernel(params, &lhs, &rhs, cfg)?;
                reports.push(StageReport::new(format!("{name}/round{round}"), report));
                let mut sums = sums.into_iter();
                level = level
                    .iter()
                    .map(|l| {
                        let mut next: Vec<Ciphertext> = sums.by_ref().take(l.len() / 2).collect();
                        if l.len() % 2 == 1 {
                            next.push(l[l.len() - 1].clone());
                        }
                        next
                    })
                    .collect();
                round += 1;
            }
            Ok((
                level.into_iter().map(|mut l| l.remove(0)).collect(),
                reports,
            ))
        }
    }
}
