//! Greedy baseline: per swath, look at covered cells in order of decreasing
//! pending penalty at one fixed resolution until the budget runs out.
//!
//! Pending penalty is the cell's curve evaluated at the hours since its last
//! look (scenario start if never looked). Ties go north-to-south, then
//! west-to-east. The baseline knows nothing about `rmin` or `maxlow`; the
//! evaluator reports those violations instead.

use crate::geometry::CoverageSets;
use crate::plan::{Look, LookPlan};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Slack on the per-swath budget of 1 for accumulated rounding.
pub const BUDGET_TOL: f64 = 1e-9;

pub fn greedy_plan(scn: &Scenario, cov: &CoverageSets, resolution: u8) -> Result<LookPlan> {
    let swaths = scn.num_swaths();
    let mut costs = Vec::with_capacity(swaths);
    for s in 1..=swaths {
        let cost = scn
            .cost(s, resolution)
            .ok_or_else(|| Error::ResolutionOmitted {
                swath: s,
                sensor: scn.swath(s).sensor_id.clone(),
                resolution,
            })?;
        costs.push(cost);
    }

    let mut last_look = vec![0.0f64; scn.num_cells()];
    let mut looks = Vec::new();
    for s in 1..=swaths {
        let t = scn.time(s);
        let mut ranked = Vec::with_capacity(cov.for_swath(s).len());
        for &c in cov.for_swath(s) {
            let cell = scn.cell(c);
            let pending = scn.curve_of(c).eval(t - last_look[c - 1])?;
            ranked.push((pending, cell.row, cell.col, c));
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let cost = costs[s - 1];
        let mut used = 0.0;
        for (_, _, _, c) in ranked {
            if used + cost > 1.0 + BUDGET_TOL {
                break;
            }
            used += cost;
            looks.push(Look::new(c, s, resolution));
            last_look[c - 1] = t;
        }
    }
    Ok(LookPlan::new(looks))
}
