use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

use super::{run_closed_loop, ControllerKind, Scenario, Summary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub controller: ControllerKind,
    pub ts: f64,
    pub summary: Summary,
}

/// Runs every `(controller, ts)` pair built by `build` on the rayon pool.
/// Rows come back ordered by controller, then by position in `ts_list`,
/// whatever the scheduling.
pub fn sweep_sampling_times<F>(build: F, controllers: &[ControllerKind], ts_list: &[f64]) -> Result<Vec<SweepRow>>
where
    F: Fn(ControllerKind, f64) -> Result<Scenario> + Sync,
{
    let mut jobs: Vec<(ControllerKind, usize)> = controllers
        .iter()
        .flat_map(|c| (0..ts_list.len()).map(move |i| (*c, i)))
        .collect();
    jobs.sort();
    jobs.dedup();
    jobs.par_iter()
        .map(|&(controller, i)| {
            let ts = ts_list[i];
            let result = run_closed_loop(&build(controller, ts)?)?;
            Ok(SweepRow {
                controller,
                ts,
                summary: result.summary(),
            })
        })
        .collect()
}
