//! The look optimization MILP.
//!
//! Variables (names as exported):
//!
//! * `X_c_s_r` binary: cell `c` gets a look at resolution `r` from swath `s`
//! * `Y_c_s_g` binary: at swath `s` the gap since the last look in `c` is `g`
//! * `G_c_s`   continuous >= 0: that gap as a number
//! * `Z_c`     continuous in [0, 1]: shortfall of the at-least-once rule
//!
//! Minimize `sum pen[c][s][g] Y + never sum Z` subject to the row families
//! tagged [`RowTag::Eq2`] through [`RowTag::FixUnavailable`]. The gap row is
//! the g-weighted form `sum_g g Y[c,s,g] = G[c,s]`.
//!
//! Sparse mode only creates `X` where the swath covers the cell and the
//! resolution has a usable cost. Dense mode creates every index over the full
//! ranges and pins the structural zeros with fixing rows instead, which is
//! only useful for comparing model sizes.

mod io;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

pub use io::{
    export, export_warm_start, import_solution, parse_lp, parse_mps, read_values, write_lp,
    write_mps, ExportFormat, ParsedColumn, ParsedModel, ParsedRow,
};

use crate::exec::{map_range, Execution};
use crate::geometry::CoverageSets;
use crate::plan::{gap_trajectories, Look, LookPlan};
use crate::scenario::{PenaltyTable, Scenario};
use crate::{Error, Result};

/// Feasibility tolerance for rows, bounds and integrality.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X { c: usize, s: usize, r: u8 },
    Y { c: usize, s: usize, g: usize },
    G { c: usize, s: usize },
    Z { c: usize },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::X { c, s, r } => write!(f, "X_{c}_{s}_{r}"),
            Var::Y { c, s, g } => write!(f, "Y_{c}_{s}_{g}"),
            Var::G { c, s } => write!(f, "G_{c}_{s}"),
            Var::Z { c } => write!(f, "Z_{c}"),
        }
    }
}

impl FromStr for Var {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        let bad = || Error::UnknownVariable(name.to_string());
        let mut parts = name.split('_');
        let kind = parts.next().ok_or_else(bad)?;
        let nums: Vec<usize> = parts
            .map(|p| p.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (kind, nums.as_slice()) {
            ("X", &[c, s, r]) => Ok(Var::X {
                c,
                s,
                r: u8::try_from(r).map_err(|_| bad())?,
            }),
            ("Y", &[c, s, g]) => Ok(Var::Y { c, s, g }),
            ("G", &[c, s]) => Ok(Var::G { c, s }),
            ("Z", &[c]) => Ok(Var::Z { c }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variable {
    pub var: Var,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    fn binary(var: Var) -> Self {
        Variable {
            var,
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
        }
    }

    fn continuous(var: Var, upper: f64) -> Self {
        Variable {
            var,
            kind: VarKind::Continuous,
            lower: 0.0,
            upper,
        }
    }
}

/// Row families, in export order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowTag {
    /// `sum_g g Y[c,s,g] - G[c,s] = 0`
    Eq2,
    /// `sum_g Y[c,s,g] = 1`
    Eq3,
    /// `G[c,s-1] - G[c,s] - bigM sum_r X[c,s,r] <= -1`
    Eq4,
    /// `sum_{s,r} X[c,s,r] + Z[c] >= looks_required`
    Eq5,
    /// `sum_{c,r} cost[s,r] X[c,s,r] <= 1`
    Eq6,
    /// `sum_{s, r < rmin_c} X[c,s,r] <= maxlow`
    Eq7,
    /// `X[c,0,r] = 0` (dense only)
    Fix8,
    /// `Y[c,s,g] = 0` for `s < g` (dense only)
    Fix9,
    /// `G[c,0] = 0`
    Fix11,
    /// `X[c,s,r] = 0` where the swath misses the cell or `r` has no usable
    /// cost (dense only)
    FixUnavailable,
}

impl RowTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RowTag::Eq2 => "eq2",
            RowTag::Eq3 => "eq3",
            RowTag::Eq4 => "eq4",
            RowTag::Eq5 => "eq5",
            RowTag::Eq6 => "eq6",
            RowTag::Eq7 => "eq7",
            RowTag::Fix8 => "fix8",
            RowTag::Fix9 => "fix9",
            RowTag::Fix11 => "fix11",
            RowTag::FixUnavailable => "fixna",
        }
    }

    pub fn from_name(name: &str) -> Option<RowTag> {
        let tag = name.split('_').next()?;
        [
            RowTag::Eq2,
            RowTag::Eq3,
            RowTag::Eq4,
            RowTag::Eq5,
            RowTag::Eq6,
            RowTag::Eq7,
            RowTag::Fix8,
            RowTag::Fix9,
            RowTag::Fix11,
            RowTag::FixUnavailable,
        ]
        .into_iter()
        .find(|t| t.as_str() == tag)
    }
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

impl Sense {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Eq => (lhs - rhs).abs() <= tol,
            Sense::Le => lhs <= rhs + tol,
            Sense::Ge => lhs >= rhs - tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Eq => "=",
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub tag: RowTag,
    pub name: String,
    /// `(variable index, coefficient)`
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelMode {
    #[default]
    Sparse,
    Dense,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub mode: ModelMode,
    /// Largest modeled gap `G`. Only `G = S` is supported; `None` means `S`.
    pub gap_levels: Option<usize>,
}

impl BuildOptions {
    pub fn dense() -> Self {
        BuildOptions {
            mode: ModelMode::Dense,
            gap_levels: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub mode: ModelMode,
    pub big_m: f64,
    pub cells: usize,
    pub swaths: usize,
    pub resolutions: u8,
    pub never: f64,
    pub looks_required: u32,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// `(variable index, coefficient)`, zero coefficients dropped.
    pub objective: Vec<(usize, f64)>,
    index: HashMap<Var, usize>,
}

impl ModelInstance {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn index_of(&self, var: &Var) -> Option<usize> {
        self.index.get(var).copied()
    }

    pub fn contains(&self, var: &Var) -> bool {
        self.index.contains_key(var)
    }

    pub fn rows_tagged(&self, tag: RowTag) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.tag == tag)
    }

    /// Row counts per tag, in tag order.
    pub fn row_counts(&self) -> BTreeMap<RowTag, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rows {
            *m.entry(r.tag).or_insert(0) += 1;
        }
        m
    }

    /// Variable counts as `(X, Y, G, Z)`.
    pub fn variable_counts(&self) -> (usize, usize, usize, usize) {
        let mut n = (0, 0, 0, 0);
        for v in &self.variables {
            match v.var {
                Var::X { .. } => n.0 += 1,
                Var::Y { .. } => n.1 += 1,
                Var::G { .. } => n.2 += 1,
                Var::Z { .. } => n.3 += 1,
            }
        }
        n
    }

    fn values(&self, a: &Assignment) -> Vec<f64> {
        self.variables
            .iter()
            .map(|v| a.get(&v.var).unwrap_or(0.0))
            .collect()
    }

    /// Objective evaluated at the raw assignment values.
    pub fn objective_at(&self, a: &Assignment) -> f64 {
        let x = self.values(a);
        self.objective.iter().map(|&(j, coef)| coef * x[j]).sum()
    }
}

/// Row fields before interning: tag, name, terms, sense, rhs.
type RawRow = (RowTag, String, Vec<(Var, f64)>, Sense, f64);

struct CellPart {
    xs: Vec<Variable>,
    ys: Vec<Variable>,
    gs: Vec<Variable>,
    z: Variable,
    rows: Vec<RawRow>,
    objective_y: Vec<(Var, f64)>,
}

/// Builds the MILP for a validated scenario.
pub fn build_model(
    scn: &Scenario,
    pen: &PenaltyTable,
    cov: &CoverageSets,
    opts: &BuildOptions,
) -> Result<ModelInstance> {
    build_model_with(scn, pen, cov, opts, Execution::default())
}

pub fn build_model_with(
    scn: &Scenario,
    pen: &PenaltyTable,
    cov: &CoverageSets,
    opts: &BuildOptions,
    exec: Execution,
) -> Result<ModelInstance> {
    let swaths = scn.num_swaths();
    if swaths == 0 {
        return Err(Error::NoSwaths);
    }
    if let Some(g) = opts.gap_levels {
        if g != swaths {
            return Err(Error::UnsupportedGapRange {
                requested: g,
                swaths,
            });
        }
    }
    let cells = scn.num_cells();
    let r_max = scn.num_resolutions();
    let dense = opts.mode == ModelMode::Dense;
    let big_m = swaths as f64;
    let costs = scn.costs();
    let cost = |s: usize, r: u8| -> Option<f64> {
        if s == 0 {
            None
        } else {
            costs[s - 1][r as usize - 1]
        }
    };
    let available = |c: usize, s: usize, r: u8| cost(s, r).is_some() && cov.covers(s, c);
    let maxlow = scn.params.maxlow as f64;
    let looks_required = scn.params.looks_required;

    let parts = map_range(exec, cells, |i| {
        let c = i + 1;
        let rmin = scn.cell(c).rmin;
        let s_lo = if dense { 0 } else { 1 };
        let mut xs = Vec::new();
        for s in s_lo..=swaths {
            for r in 1..=r_max {
                if dense || available(c, s, r) {
                    xs.push(Variable::binary(Var::X { c, s, r }));
                }
            }
        }
        let mut ys = Vec::new();
        for s in s_lo..=swaths {
            let g_hi = if dense { swaths } else { s };
            for g in 0..=g_hi {
                ys.push(Variable::binary(Var::Y { c, s, g }));
            }
        }
        let gs = (0..=swaths)
            .map(|s| Variable::continuous(Var::G { c, s }, f64::INFINITY))
            .collect();
        let z = Variable::continuous(Var::Z { c }, 1.0);

        let x_at = |s: usize| -> Vec<Var> {
            (1..=r_max)
                .filter(|&r| dense || available(c, s, r))
                .map(|r| Var::X { c, s, r })
                .collect()
        };

        let mut rows = Vec::new();
        for s in s_lo..=swaths {
            let g_hi = if dense { swaths } else { s };
            let gap_terms = (1..=g_hi)
                .map(|g| (Var::Y { c, s, g }, g as f64))
                .chain(std::iter::once((Var::G { c, s }, -1.0)))
                .collect();
            rows.push((
                RowTag::Eq2,
                format!("eq2_{c}_{s}"),
                gap_terms,
                Sense::Eq,
                0.0,
            ));
        }
        for s in s_lo..=swaths {
            let g_hi = if dense { swaths } else { s };
            let terms = (0..=g_hi).map(|g| (Var::Y { c, s, g }, 1.0)).collect();
            rows.push((RowTag::Eq3, format!("eq3_{c}_{s}"), terms, Sense::Eq, 1.0));
        }
        for s in 1..=swaths {
            let mut terms = vec![(Var::G { c, s: s - 1 }, 1.0), (Var::G { c, s }, -1.0)];
            terms.extend(x_at(s).into_iter().map(|x| (x, -big_m)));
            rows.push((RowTag::Eq4, format!("eq4_{c}_{s}"), terms, Sense::Le, -1.0));
        }
        let mut look_terms: Vec<(Var, f64)> = xs.iter().map(|v: &Variable| (v.var, 1.0)).collect();
        look_terms.push((Var::Z { c }, 1.0));
        rows.push((
            RowTag::Eq5,
            format!("eq5_{c}"),
            look_terms,
            Sense::Ge,
            looks_required as f64,
        ));
        let low: Vec<(Var, f64)> = xs
            .iter()
            .filter(|v| matches!(v.var, Var::X { r, .. } if r < rmin))
            .map(|v| (v.var, 1.0))
            .collect();
        if dense || !low.is_empty() {
            rows.push((RowTag::Eq7, format!("eq7_{c}"), low, Sense::Le, maxlow));
        }
        if dense {
            for r in 1..=r_max {
                rows.push((
                    RowTag::Fix8,
                    format!("fix8_{c}_{r}"),
                    vec![(Var::X { c, s: 0, r }, 1.0)],
                    Sense::Eq,
                    0.0,
                ));
            }
            for s in 0..=swaths {
                for g in s + 1..=swaths {
                    rows.push((
                        RowTag::Fix9,
                        format!("fix9_{c}_{s}_{g}"),
                        vec![(Var::Y { c, s, g }, 1.0)],
                        Sense::Eq,
                        0.0,
                    ));
                }
            }
        }
        rows.push((
            RowTag::Fix11,
            format!("fix11_{c}"),
            vec![(Var::G { c, s: 0 }, 1.0)],
            Sense::Eq,
            0.0,
        ));
        if dense {
            for s in 1..=swaths {
                for r in 1..=r_max {
                    if !available(c, s, r) {
                        rows.push((
                            RowTag::FixUnavailable,
                            format!("fixna_{c}_{s}_{r}"),
                            vec![(Var::X { c, s, r }, 1.0)],
                            Sense::Eq,
                            0.0,
                        ));
                    }
                }
            }
        }

        let mut objective_y = Vec::new();
        for s in 1..=swaths {
            for g in 1..=s {
                let p = pen.get(c, s, g);
                if p != 0.0 {
                    objective_y.push((Var::Y { c, s, g }, p));
                }
            }
        }
        CellPart {
            xs,
            ys,
            gs,
            z,
            rows,
            objective_y,
        }
    });

    let mut variables: Vec<Variable> = Vec::new();
    for p in &parts {
        variables.extend_from_slice(&p.xs);
    }
    for p in &parts {
        variables.extend_from_slice(&p.ys);
    }
    for p in &parts {
        variables.extend_from_slice(&p.gs);
    }
    variables.extend(parts.iter().map(|p| p.z));
    let index: HashMap<Var, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.var, i))
        .collect();
    let resolve = |terms: Vec<(Var, f64)>| -> Vec<(usize, f64)> {
        terms.into_iter().map(|(v, k)| (index[&v], k)).collect()
    };

    let mut rows: Vec<Row> = Vec::new();
    let mut objective = Vec::new();
    for p in parts {
        for (tag, name, terms, sense, rhs) in p.rows {
            rows.push(Row {
                tag,
                name,
                terms: resolve(terms),
                sense,
                rhs,
            });
        }
        objective.extend(resolve(p.objective_y));
    }
    for s in 1..=swaths {
        let mut terms = Vec::new();
        for c in 1..=cells {
            for r in 1..=r_max {
                let Some(k) = cost(s, r) else { continue };
                if available(c, s, r) || dense {
                    terms.push((index[&Var::X { c, s, r }], k));
                }
            }
        }
        if dense || !terms.is_empty() {
            rows.push(Row {
                tag: RowTag::Eq6,
                name: format!("eq6_{s}"),
                terms,
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
    }
    // stable: per-cell rows are already in index order within each tag
    rows.sort_by_key(|r| r.tag);
    objective.sort_by_key(|&(j, _)| j);
    objective.extend((1..=cells).map(|c| (index[&Var::Z { c }], scn.params.never)));

    Ok(ModelInstance {
        mode: opts.mode,
        big_m,
        cells,
        swaths,
        resolutions: r_max,
        never: scn.params.never,
        looks_required,
        variables,
        rows,
        objective,
        index,
    })
}

/// Variable values keyed by variable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    pub values: BTreeMap<Var, f64>,
}

impl Assignment {
    pub fn get(&self, var: &Var) -> Option<f64> {
        self.values.get(var).copied()
    }

    pub fn set(&mut self, var: Var, value: f64) {
        self.values.insert(var, value);
    }
}

/// The all-ignored starting point: no looks, every gap equal to its swath
/// index, every shortfall 1.
pub fn warm_start(model: &ModelInstance) -> Assignment {
    let values = model
        .variables
        .iter()
        .map(|v| {
            let x = match v.var {
                Var::X { .. } => 0.0,
                Var::Y { s, g, .. } => f64::from(u8::from(s == g)),
                Var::G { s, .. } => s as f64,
                Var::Z { .. } => 1.0,
            };
            (v.var, x)
        })
        .collect();
    Assignment { values }
}

/// Encodes a look plan as a full assignment (gaps from the reset/increment
/// rule, shortfall clamped to [0, 1]).
pub fn encode_plan(model: &ModelInstance, plan: &LookPlan) -> Result<Assignment> {
    let mut a = Assignment::default();
    for l in &plan.looks {
        let var = Var::X {
            c: l.c,
            s: l.s,
            r: l.r,
        };
        if !model.contains(&var) {
            return Err(Error::UnknownVariable(var.to_string()));
        }
    }
    let looks = plan.looks_per_cell(model.cells);
    let gaps = gap_trajectories(plan, model.cells, model.swaths);
    let plan_set: std::collections::HashSet<Look> = plan.looks.iter().copied().collect();
    for v in &model.variables {
        let x = match v.var {
            Var::X { c, s, r } => f64::from(u8::from(plan_set.contains(&Look { c, s, r }))),
            Var::Y { c, s, g } => f64::from(u8::from(gaps[c - 1][s] == g)),
            Var::G { c, s } => gaps[c - 1][s] as f64,
            Var::Z { c } => shortfall(model.looks_required, looks[c - 1]),
        };
        a.set(v.var, x);
    }
    Ok(a)
}

/// `clamp(required - looks, 0, 1)`.
pub(crate) fn shortfall(required: u32, looks: u32) -> f64 {
    f64::from(required.saturating_sub(looks).min(1))
}

/// One violated row, bound or integrality requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub name: String,
    /// Row tag, or `bound` / `integrality`.
    pub tag: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for RowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] lhs={} rhs={}",
            self.name, self.tag, self.lhs, self.rhs
        )
    }
}

/// Checks every row, bound and integrality requirement at tolerance
/// [`FEAS_TOL`]. Variables missing from the assignment count as 0.
pub fn check_feasible(
    model: &ModelInstance,
    a: &Assignment,
) -> std::result::Result<(), Vec<RowViolation>> {
    let x = model.values(a);
    let mut out = Vec::new();
    for row in &model.rows {
        let lhs: f64 = row.terms.iter().map(|&(j, k)| k * x[j]).sum();
        if !row.sense.holds(lhs, row.rhs, FEAS_TOL) {
            out.push(RowViolation {
                name: row.name.clone(),
                tag: row.tag.to_string(),
                lhs,
                rhs: row.rhs,
            });
        }
    }
    for (v, &val) in model.variables.iter().zip(&x) {
        if val < v.lower - FEAS_TOL || val > v.upper + FEAS_TOL {
            out.push(RowViolation {
                name: v.var.to_string(),
                tag: "bound".into(),
                lhs: val,
                rhs: if val < v.lower { v.lower } else { v.upper },
            });
        } else if v.kind == VarKind::Binary && (val - val.round()).abs() > FEAS_TOL {
            out.push(RowViolation {
                name: v.var.to_string(),
                tag: "integrality".into(),
                lhs: val,
                rhs: val.round(),
            });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSolution {
    pub plan: LookPlan,
    /// `gaps[c - 1][s]`, `s` in 0..=S, from `G` rounded to the nearest integer.
    pub gaps: Vec<Vec<i64>>,
    /// Penalty term recomputed from the binary `Y` values.
    pub penalty: f64,
    /// `never * sum Z`.
    pub never_penalty: f64,
    pub objective: f64,
    /// Extra looks dropped because the same swath looked at the cell at a
    /// higher resolution too.
    pub collapsed: usize,
}

/// Turns a feasible assignment into a plan, gap trajectories and a
/// recomputed objective.
///
/// The model puts no price on `X`, so a solver may pick several resolutions
/// for one cell on one swath. Only the highest is kept: dropping the others
/// never breaks a budget or low-resolution row and leaves the objective
/// unchanged.
pub fn decode_solution(model: &ModelInstance, a: &Assignment) -> Result<DecodedSolution> {
    check_feasible(model, a)
        .map_err(|v| Error::Infeasible(v.iter().map(ToString::to_string).collect()))?;
    let x = model.values(a);
    let mut looks = Vec::new();
    let mut gaps = vec![vec![0i64; model.swaths + 1]; model.cells];
    let mut z_total = 0.0;
    for (v, &val) in model.variables.iter().zip(&x) {
        match v.var {
            Var::X { c, s, r } if s >= 1 && val > 0.5 => looks.push(Look { c, s, r }),
            Var::G { c, s } => gaps[c - 1][s] = val.round() as i64,
            Var::Z { .. } => z_total += val,
            _ => {}
        }
    }
    let mut penalty = 0.0;
    for &(j, coef) in &model.objective {
        if let Var::Y { .. } = model.variables[j].var {
            if x[j] > 0.5 {
                penalty += coef;
            }
        }
    }
    let never_penalty = model.never * z_total;
    let plan = LookPlan::new(looks);
    let total = plan.len();
    let mut kept: Vec<Look> = Vec::with_capacity(total);
    for l in plan.looks {
        match kept.last_mut() {
            // sorted by (s, c, r): the last of a run has the highest r
            Some(prev) if prev.s == l.s && prev.c == l.c => *prev = l,
            _ => kept.push(l),
        }
    }
    let collapsed = total - kept.len();
    Ok(DecodedSolution {
        plan: LookPlan::new(kept),
        gaps,
        penalty,
        never_penalty,
        objective: penalty + never_penalty,
        collapsed,
    })
}

/// Rounds every entry half-to-even at `places` decimals.
pub fn round_penalties(pen: &PenaltyTable, places: u32) -> PenaltyTable {
    let scale = 10f64.powi(places as i32);
    pen.map(|x| (x * scale).round_ties_even() / scale)
}

#[cfg(test)]
mod tests;
