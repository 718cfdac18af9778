//! Exact solver for desk-scale instances.
//!
//! Depth-first search over swaths in chronological order. Each level picks
//! one allocation for the swath (a set of `(cell, resolution)` pairs with
//! distinct cells and total cost at most 1). The state carries, per cell,
//! the last swath with a look, the look count and the count of looks below
//! `rmin`. A branch is cut when its accrued penalty plus the `never` charge
//! for cells that no remaining swath can rescue reaches the incumbent.
//!
//! The search refuses instances beyond [`SearchLimits`] instead of returning
//! a possibly suboptimal plan.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::evaluate::objective_value;
use crate::exec::{map_range, Execution};
use crate::geometry::CoverageSets;
use crate::heuristic::BUDGET_TOL;
use crate::plan::{Look, LookPlan};
use crate::scenario::{PenaltyTable, Scenario};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_cells: usize,
    pub max_swaths: usize,
    pub max_resolutions: u8,
    pub max_nodes: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_cells: 6,
            max_swaths: 4,
            max_resolutions: 2,
            max_nodes: 10_000_000,
        }
    }
}

impl SearchLimits {
    pub fn check(&self, scn: &Scenario) -> Result<()> {
        let mut over = Vec::new();
        if scn.num_cells() > self.max_cells {
            over.push(format!("C = {} > {}", scn.num_cells(), self.max_cells));
        }
        if scn.num_swaths() > self.max_swaths {
            over.push(format!("S = {} > {}", scn.num_swaths(), self.max_swaths));
        }
        if scn.num_resolutions() > self.max_resolutions {
            over.push(format!(
                "R = {} > {}",
                scn.num_resolutions(),
                self.max_resolutions
            ));
        }
        if over.is_empty() {
            Ok(())
        } else {
            Err(Error::LimitsExceeded(over.join(", ")))
        }
    }
}

/// One swath's choice: `(cell, resolution)` pairs, ascending by cell.
pub type Allocation = Vec<(usize, u8)>;

/// Every allocation of distinct covered cells with total cost at most 1,
/// starting with the empty one. `costs[r - 1]` is `None` for unusable
/// resolutions. Cells are tried in the given order, each first skipped and
/// then looked at resolution 1, 2, ...
pub fn enumerate_swath_allocations(
    covered: &[usize],
    costs: &[Option<f64>],
    max_nodes: u64,
) -> Result<Vec<Allocation>> {
    fn rec(
        covered: &[usize],
        costs: &[Option<f64>],
        used: f64,
        cur: &mut Allocation,
        out: &mut Vec<Allocation>,
        max: u64,
    ) -> Result<()> {
        let Some((&c, rest)) = covered.split_first() else {
            if out.len() as u64 >= max {
                return Err(Error::SearchBlowup { nodes: max });
            }
            out.push(cur.clone());
            return Ok(());
        };
        rec(rest, costs, used, cur, out, max)?;
        for (i, cost) in costs.iter().enumerate() {
            let Some(k) = cost else { continue };
            if used + k > 1.0 + BUDGET_TOL {
                continue;
            }
            cur.push((c, (i + 1) as u8));
            rec(rest, costs, used + k, cur, out, max)?;
            cur.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(covered, costs, 0.0, &mut Vec::new(), &mut out, max_nodes)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub plan: LookPlan,
    /// Objective of `plan` as computed by [`objective_value`].
    pub objective: f64,
    pub nodes: u64,
}

struct Search<'a> {
    cells: usize,
    swaths: usize,
    pen: &'a PenaltyTable,
    allocations: Vec<Vec<Allocation>>,
    rmin: Vec<u8>,
    maxlow: u32,
    required: u32,
    never: f64,
    /// `remaining[s][c - 1]`: swaths after `s` that cover `c`.
    remaining: Vec<Vec<u32>>,
    nodes: &'a AtomicU64,
    max_nodes: u64,
    aborted: &'a AtomicBool,
    shared_best: &'a AtomicU64,
}

#[derive(Clone)]
struct State {
    last: Vec<usize>,
    looks: Vec<u32>,
    low: Vec<u32>,
}

struct Worker {
    best: f64,
    best_path: Option<Vec<usize>>,
    path: Vec<usize>,
}

impl Search<'_> {
    /// `never` charge that is unavoidable after swath `s`, or `None` if some
    /// cell can no longer reach `required - 1` looks.
    fn forced_never(&self, st: &State, s: usize) -> Option<f64> {
        let mut short = 0u32;
        for c in 0..self.cells {
            let reachable = st.looks[c] + self.remaining[s][c];
            let deficit = self.required.saturating_sub(reachable);
            if deficit > 1 {
                return None;
            }
            short += deficit;
        }
        Some(self.never * f64::from(short))
    }

    fn publish(&self, value: f64) {
        self.shared_best
            .fetch_min(value.to_bits(), Ordering::Relaxed);
    }

    fn shared(&self) -> f64 {
        f64::from_bits(self.shared_best.load(Ordering::Relaxed))
    }

    fn dfs(&self, st: &mut State, s: usize, accrued: f64, w: &mut Worker) {
        if self.aborted.load(Ordering::Relaxed) {
            return;
        }
        if s > self.swaths {
            let mut short = 0u32;
            for c in 0..self.cells {
                let deficit = self.required.saturating_sub(st.looks[c]);
                if deficit > 1 {
                    return;
                }
                short += deficit;
            }
            let total = accrued + self.never * f64::from(short);
            if total < w.best {
                w.best = total;
                w.best_path = Some(w.path.clone());
                self.publish(total);
            }
            return;
        }
        for k in 0..self.allocations[s - 1].len() {
            self.branch(st, s, k, accrued, w);
        }
    }

    /// Applies allocation `k` at swath `s` and recurses if the bound allows.
    fn branch(&self, st: &mut State, s: usize, k: usize, accrued: f64, w: &mut Worker) {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
            self.aborted.store(true, Ordering::Relaxed);
            return;
        }
        let alloc = &self.allocations[s - 1][k];
        if alloc
            .iter()
            .any(|&(c, r)| r < self.rmin[c - 1] && st.low[c - 1] + 1 > self.maxlow)
        {
            return;
        }
        let mut looked = vec![false; self.cells];
        for &(c, _) in alloc {
            looked[c - 1] = true;
        }
        let mut step = 0.0;
        for c in 1..=self.cells {
            if !looked[c - 1] {
                step += self.pen.get(c, s, s - st.last[c - 1]);
            }
        }
        let saved = st.clone();
        for &(c, r) in alloc {
            st.last[c - 1] = s;
            st.looks[c - 1] += 1;
            if r < self.rmin[c - 1] {
                st.low[c - 1] += 1;
            }
        }
        let value = accrued + step;
        if let Some(forced) = self.forced_never(st, s) {
            // own incumbent: first found wins ties; other workers' incumbents
            // only cut strictly worse branches so tie order stays global
            let bound = value + forced;
            if bound < w.best && bound <= self.shared() {
                w.path.push(k);
                self.dfs(st, s + 1, value, w);
                w.path.pop();
            }
        }
        *st = saved;
    }
}

pub fn solve_exact(
    scn: &Scenario,
    pen: &PenaltyTable,
    cov: &CoverageSets,
    limits: &SearchLimits,
) -> Result<ExactSolution> {
    solve_exact_with(scn, pen, cov, limits, Execution::default())
}

/// Root-level parallel variant: the first swath's allocations are split
/// across workers and the minimum is reduced by `(objective, root index)`,
/// which gives the same plan as the sequential search.
pub fn solve_exact_with(
    scn: &Scenario,
    pen: &PenaltyTable,
    cov: &CoverageSets,
    limits: &SearchLimits,
    exec: Execution,
) -> Result<ExactSolution> {
    limits.check(scn)?;
    let cells = scn.num_cells();
    let swaths = scn.num_swaths();
    if swaths == 0 {
        return Err(Error::NoSwaths);
    }
    let costs = scn.costs();
    let mut allocations = Vec::with_capacity(swaths);
    for s in 1..=swaths {
        let covered: Vec<usize> = cov.for_swath(s).iter().copied().collect();
        allocations.push(enumerate_swath_allocations(
            &covered,
            &costs[s - 1],
            limits.max_nodes,
        )?);
    }
    let by_cell = cov.swaths_by_cell(cells);
    let remaining = (0..=swaths)
        .map(|s| {
            by_cell
                .iter()
                .map(|list| list.iter().filter(|&&t| t > s).count() as u32)
                .collect()
        })
        .collect();

    let nodes = AtomicU64::new(0);
    let aborted = AtomicBool::new(false);
    let shared_best = AtomicU64::new(f64::INFINITY.to_bits());
    let search = Search {
        cells,
        swaths,
        pen,
        allocations,
        rmin: scn.cells.iter().map(|c| c.rmin).collect(),
        maxlow: scn.params.maxlow,
        required: scn.params.looks_required,
        never: scn.params.never,
        remaining,
        nodes: &nodes,
        max_nodes: limits.max_nodes,
        aborted: &aborted,
        shared_best: &shared_best,
    };
    let root = State {
        last: vec![0; cells],
        looks: vec![0; cells],
        low: vec![0; cells],
    };

    let roots = search.allocations[0].len();
    let results: Vec<(f64, Option<Vec<usize>>)> = if exec.is_parallel() {
        map_range(exec, roots, |k| {
            let mut w = Worker {
                best: f64::INFINITY,
                best_path: None,
                path: Vec::new(),
            };
            let mut st = root.clone();
            search.branch(&mut st, 1, k, 0.0, &mut w);
            (w.best, w.best_path)
        })
    } else {
        let mut w = Worker {
            best: f64::INFINITY,
            best_path: None,
            path: Vec::new(),
        };
        let mut st = root.clone();
        search.dfs(&mut st, 1, 0.0, &mut w);
        vec![(w.best, w.best_path)]
    };

    if aborted.load(Ordering::Relaxed) {
        return Err(Error::SearchBlowup {
            nodes: nodes.load(Ordering::Relaxed),
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for (value, path) in results {
        if let Some(path) = path {
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, path));
            }
        }
    }
    let (_, path) = best.ok_or(Error::NoFeasiblePlan)?;
    let mut looks = Vec::new();
    for (i, &k) in path.iter().enumerate() {
        let s = i + 1;
        looks.extend(
            search.allocations[i][k]
                .iter()
                .map(|&(c, r)| Look::new(c, s, r)),
        );
    }
    let plan = LookPlan::new(looks);
    let objective = objective_value(scn, pen, &plan);
    Ok(ExactSolution {
        plan,
        objective,
        nodes: nodes.load(Ordering::Relaxed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::coverage_sets;
    use crate::scenario::{precompute_pen, BudgetRow, Footprint};

    #[test]
    fn allocations_cost_point_six() {
        let a = enumerate_swath_allocations(&[1, 2], &[Some(0.6)], 100).unwrap();
        assert_eq!(a, vec![vec![], vec![(2, 1)], vec![(1, 1)]]);
    }

    #[test]
    fn allocations_cost_half() {
        let a = enumerate_swath_allocations(&[1, 2], &[Some(0.5)], 100).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.contains(&vec![(1, 1), (2, 1)]));
    }

    #[test]
    fn allocations_no_cells() {
        let a = enumerate_swath_allocations(&[], &[Some(0.5)], 100).unwrap();
        assert_eq!(a, vec![Vec::<(usize, u8)>::new()]);
    }

    #[test]
    fn allocations_blowup() {
        let cells: Vec<usize> = (1..=20).collect();
        let err = enumerate_swath_allocations(&cells, &[Some(0.01)], 1000).unwrap_err();
        assert!(matches!(err, Error::SearchBlowup { .. }));
        assert!(err.to_string().contains("export the MILP"));
    }

    fn single_cell(covered: bool) -> Scenario {
        let mut scn = fixtures::three_cell_scenario();
        scn.cells.truncate(1);
        scn.params.resolutions = 1;
        scn.swaths.truncate(1);
        scn.swaths[0].footprint = Footprint::Cells(if covered { vec![1] } else { vec![] });
        scn
    }

    #[test]
    fn one_cell_covered() {
        let scn = single_cell(true);
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let sol = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.plan.looks, vec![Look::new(1, 1, 1)]);
    }

    #[test]
    fn one_cell_never_covered() {
        let mut scn = single_cell(false);
        scn.swaths = fixtures::three_cell_scenario().swaths;
        for sw in &mut scn.swaths {
            sw.footprint = Footprint::Cells(vec![]);
        }
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let sol = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap();
        assert!(sol.plan.is_empty());
        assert_eq!(
            sol.objective,
            pen.get(1, 1, 1) + pen.get(1, 2, 2) + scn.params.never
        );
    }

    #[test]
    fn refuses_oversized_instances() {
        let mut scn = fixtures::three_cell_scenario();
        scn.params.resolutions = 5;
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let err = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap_err();
        assert!(matches!(err, Error::LimitsExceeded(_)), "{err}");
    }

    #[test]
    fn node_limit_is_an_error() {
        let mut scn = fixtures::three_cell_scenario();
        scn.params.resolutions = 1;
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let limits = SearchLimits {
            max_nodes: 5,
            ..SearchLimits::default()
        };
        for exec in [Execution::Sequential, Execution::Parallel] {
            let err = solve_exact_with(&scn, &pen, &cov, &limits, exec).unwrap_err();
            assert!(matches!(err, Error::SearchBlowup { .. }), "{err}");
        }
    }

    #[test]
    fn sequential_and_parallel_agree_on_fixture() {
        let mut scn = fixtures::three_cell_scenario();
        scn.params.resolutions = 1;
        // one look per swath
        scn.sensors.get_mut("eo").unwrap().budget_rows.insert(
            1,
            BudgetRow {
                area_budget: 2500.0,
                look_budget: 1.0,
            },
        );
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let a = solve_exact_with(
            &scn,
            &pen,
            &cov,
            &SearchLimits::default(),
            Execution::Sequential,
        )
        .unwrap();
        let b = solve_exact_with(
            &scn,
            &pen,
            &cov,
            &SearchLimits::default(),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.objective, b.objective);
        // three cells, two looks: one cell must go without
        assert_eq!(a.plan.len(), 2);
        assert!(a.objective >= scn.params.never);
    }
}
