//! Simulates a look plan against a scenario: gap trajectories, the MILP
//! objective, coverage and the per-class / per-resolution look tables.
//!
//! Plans are never rejected here. Budget overruns, low-resolution looks past
//! `maxlow` and cells short of `looks_required` are listed as violations so
//! that baseline plans can be compared on equal footing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::CoverageSets;
use crate::heuristic::BUDGET_TOL;
use crate::model::shortfall;
use crate::plan::{gap_trajectories, LookPlan};
use crate::scenario::{PenaltyTable, PriorityClass, Scenario};
use crate::{Error, Result};

/// `gap[c - 1][s]` for `s` in 0..=S.
pub fn simulate_gaps(scn: &Scenario, plan: &LookPlan) -> Vec<Vec<usize>> {
    gap_trajectories(plan, scn.num_cells(), scn.num_swaths())
}

fn penalty_terms(scn: &Scenario, pen: &PenaltyTable, plan: &LookPlan) -> (f64, f64) {
    let gaps = simulate_gaps(scn, plan);
    let looks = plan.looks_per_cell(scn.num_cells());
    let mut penalty = 0.0;
    for c in 1..=scn.num_cells() {
        for s in 1..=scn.num_swaths() {
            penalty += pen.get(c, s, gaps[c - 1][s]);
        }
    }
    let short: f64 = looks
        .iter()
        .map(|&n| shortfall(scn.params.looks_required, n))
        .sum();
    (penalty, scn.params.never * short)
}

/// Accrued penalty over the horizon plus `never` per cell short of its
/// required looks (capped at one `never` per cell).
pub fn objective_value(scn: &Scenario, pen: &PenaltyTable, plan: &LookPlan) -> f64 {
    let (p, n) = penalty_terms(scn, pen, plan);
    p + n
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    pub unique_cells: usize,
    pub total_looks: usize,
}

impl fmt::Display for ClassCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.total_looks > self.unique_cells {
            write!(f, "{} [{}]", self.unique_cells, self.total_looks)
        } else {
            write!(f, "{}", self.unique_cells)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanViolation {
    /// Look refers to a cell or swath outside the scenario.
    InvalidLook {
        c: usize,
        s: usize,
        r: u8,
    },
    /// Swath does not see the cell.
    NotCovered {
        c: usize,
        s: usize,
    },
    /// Resolution has no usable cost on this swath.
    UnusableResolution {
        c: usize,
        s: usize,
        r: u8,
    },
    DuplicateLook {
        c: usize,
        s: usize,
    },
    Budget {
        s: usize,
        used: f64,
    },
    LowResolution {
        c: usize,
        low_looks: u32,
        maxlow: u32,
    },
    Shortfall {
        c: usize,
        looks: u32,
        required: u32,
    },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::InvalidLook { c, s, r } => {
                write!(f, "look ({c}, {s}, {r}) is outside the scenario")
            }
            PlanViolation::NotCovered { c, s } => write!(f, "swath {s} does not cover cell {c}"),
            PlanViolation::UnusableResolution { c, s, r } => {
                write!(f, "cell {c}: resolution {r} is not usable on swath {s}")
            }
            PlanViolation::DuplicateLook { c, s } => {
                write!(f, "cell {c} looked more than once on swath {s}")
            }
            PlanViolation::Budget { s, used } => write!(f, "swath {s}: budget used {used} > 1"),
            PlanViolation::LowResolution {
                c,
                low_looks,
                maxlow,
            } => write!(
                f,
                "cell {c}: {low_looks} looks below rmin (maxlow {maxlow})"
            ),
            PlanViolation::Shortfall { c, looks, required } => {
                write!(f, "cell {c}: {looks} looks, {required} required")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Fingerprint of the evaluated scenario.
    pub scenario: String,
    pub cells: usize,
    pub class_cells: BTreeMap<PriorityClass, usize>,
    /// Fraction of cells with at least one look, in [0, 1].
    pub coverage_pct: f64,
    pub per_class: BTreeMap<PriorityClass, ClassCount>,
    pub per_resolution: BTreeMap<u8, BTreeMap<PriorityClass, ClassCount>>,
    pub total_penalty: f64,
    pub never_penalty: f64,
    pub objective: f64,
    pub violations: Vec<PlanViolation>,
}

fn count(looks: impl Iterator<Item = usize>) -> ClassCount {
    let mut cells = BTreeSet::new();
    let mut total = 0;
    for c in looks {
        cells.insert(c);
        total += 1;
    }
    ClassCount {
        unique_cells: cells.len(),
        total_looks: total,
    }
}

pub fn coverage_report(
    scn: &Scenario,
    pen: &PenaltyTable,
    cov: &CoverageSets,
    plan: &LookPlan,
) -> EvalReport {
    let cells = scn.num_cells();
    let swaths = scn.num_swaths();
    let params = &scn.params;
    let mut violations = Vec::new();

    let valid: Vec<_> = plan
        .looks
        .iter()
        .copied()
        .filter(|l| {
            let ok = (1..=cells).contains(&l.c) && (1..=swaths).contains(&l.s);
            if !ok {
                violations.push(PlanViolation::InvalidLook {
                    c: l.c,
                    s: l.s,
                    r: l.r,
                });
            }
            ok
        })
        .collect();

    let mut used = vec![0.0; swaths];
    let mut seen = BTreeSet::new();
    let mut low = vec![0u32; cells];
    for l in &valid {
        if !cov.covers(l.s, l.c) {
            violations.push(PlanViolation::NotCovered { c: l.c, s: l.s });
        }
        match scn.cost(l.s, l.r) {
            Some(k) => used[l.s - 1] += k,
            None => violations.push(PlanViolation::UnusableResolution {
                c: l.c,
                s: l.s,
                r: l.r,
            }),
        }
        if !seen.insert((l.c, l.s)) {
            violations.push(PlanViolation::DuplicateLook { c: l.c, s: l.s });
        }
        if l.r < scn.cell(l.c).rmin {
            low[l.c - 1] += 1;
        }
    }
    for (i, &u) in used.iter().enumerate() {
        if u > 1.0 + BUDGET_TOL {
            violations.push(PlanViolation::Budget { s: i + 1, used: u });
        }
    }
    for (i, &n) in low.iter().enumerate() {
        if n > params.maxlow {
            violations.push(PlanViolation::LowResolution {
                c: i + 1,
                low_looks: n,
                maxlow: params.maxlow,
            });
        }
    }
    let valid_plan = LookPlan::new(valid.clone());
    let per_cell = valid_plan.looks_per_cell(cells);
    for (i, &n) in per_cell.iter().enumerate() {
        if n < params.looks_required {
            violations.push(PlanViolation::Shortfall {
                c: i + 1,
                looks: n,
                required: params.looks_required,
            });
        }
    }

    let class_of = |c: usize| scn.cell(c).priority_class;
    let mut class_cells = BTreeMap::new();
    for cell in &scn.cells {
        *class_cells.entry(cell.priority_class).or_insert(0) += 1;
    }
    let per_class = PriorityClass::ALL
        .into_iter()
        .map(|k| {
            (
                k,
                count(valid.iter().filter(|l| class_of(l.c) == k).map(|l| l.c)),
            )
        })
        .collect();
    let per_resolution = (1..=params.resolutions)
        .map(|r| {
            let row = PriorityClass::ALL
                .into_iter()
                .map(|k| {
                    (
                        k,
                        count(
                            valid
                                .iter()
                                .filter(|l| l.r == r && class_of(l.c) == k)
                                .map(|l| l.c),
                        ),
                    )
                })
                .collect();
            (r, row)
        })
        .collect();
    let looked = per_cell.iter().filter(|&&n| n > 0).count();
    let (total_penalty, never_penalty) = penalty_terms(scn, pen, &valid_plan);

    EvalReport {
        scenario: scn.fingerprint(),
        cells,
        class_cells,
        coverage_pct: if cells == 0 {
            0.0
        } else {
            looked as f64 / cells as f64
        },
        per_class,
        per_resolution,
        total_penalty,
        never_penalty,
        objective: total_penalty + never_penalty,
        violations,
    }
}

impl EvalReport {
    pub fn total(&self) -> ClassCount {
        self.per_class
            .values()
            .fold(ClassCount::default(), |a, b| ClassCount {
                unique_cells: a.unique_cells + b.unique_cells,
                total_looks: a.total_looks + b.total_looks,
            })
    }

    pub fn class_coverage(&self, class: PriorityClass) -> Option<f64> {
        let n = *self.class_cells.get(&class)?;
        (n > 0).then(|| self.per_class.get(&class).map_or(0, |c| c.unique_cells) as f64 / n as f64)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Aligned text table: unique cells per class and resolution with total
    /// looks in brackets when they exceed the cell count.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let pct = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{:.2}%", 100.0 * v));
        let _ = writeln!(
            out,
            "{:<12}{:>16}{:>16}{:>16}",
            "Resolution", "High", "Low", "Total"
        );
        for (r, row) in &self.per_resolution {
            let hi = row.get(&PriorityClass::High).copied().unwrap_or_default();
            let lo = row.get(&PriorityClass::Low).copied().unwrap_or_default();
            let tot = ClassCount {
                unique_cells: hi.unique_cells + lo.unique_cells,
                total_looks: hi.total_looks + lo.total_looks,
            };
            let _ = writeln!(
                out,
                "{:<12}{:>16}{:>16}{:>16}",
                r,
                hi.to_string(),
                lo.to_string(),
                tot.to_string()
            );
        }
        let hi = self
            .per_class
            .get(&PriorityClass::High)
            .copied()
            .unwrap_or_default();
        let lo = self
            .per_class
            .get(&PriorityClass::Low)
            .copied()
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<12}{:>16}{:>16}{:>16}",
            "Total",
            hi.to_string(),
            lo.to_string(),
            self.total().to_string()
        );
        let _ = writeln!(
            out,
            "{:<12}{:>16}{:>16}{:>16}",
            "Coverage",
            pct(self.class_coverage(PriorityClass::High)),
            pct(self.class_coverage(PriorityClass::Low)),
            pct(Some(self.coverage_pct))
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "penalty   {}", self.total_penalty);
        let _ = writeln!(out, "never     {}", self.never_penalty);
        let _ = writeln!(out, "objective {}", self.objective);
        let _ = writeln!(out, "violations {}", self.violations.len());
        out
    }
}

/// Side-by-side differences `a - b` between two reports on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scenario: String,
    pub coverage_a: f64,
    pub coverage_b: f64,
    pub coverage_delta: f64,
    /// `(a - b) / b`; `None` when `b` has zero coverage.
    pub relative_improvement: Option<f64>,
    pub per_class: BTreeMap<PriorityClass, CountDelta>,
    pub per_resolution: BTreeMap<u8, BTreeMap<PriorityClass, CountDelta>>,
    pub looks_a: usize,
    pub looks_b: usize,
    pub looks_delta: i64,
    pub objective_a: f64,
    pub objective_b: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountDelta {
    pub a: ClassCount,
    pub b: ClassCount,
    pub unique_delta: i64,
    pub looks_delta: i64,
}

fn delta(a: ClassCount, b: ClassCount) -> CountDelta {
    CountDelta {
        a,
        b,
        unique_delta: a.unique_cells as i64 - b.unique_cells as i64,
        looks_delta: a.total_looks as i64 - b.total_looks as i64,
    }
}

pub fn compare(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    if a.scenario != b.scenario {
        return Err(Error::ScenarioMismatch(
            a.scenario.clone(),
            b.scenario.clone(),
        ));
    }
    let get = |m: &BTreeMap<PriorityClass, ClassCount>, k| m.get(&k).copied().unwrap_or_default();
    let per_class = PriorityClass::ALL
        .into_iter()
        .map(|k| (k, delta(get(&a.per_class, k), get(&b.per_class, k))))
        .collect();
    let resolutions: BTreeSet<u8> = a
        .per_resolution
        .keys()
        .chain(b.per_resolution.keys())
        .copied()
        .collect();
    let empty = BTreeMap::new();
    let per_resolution = resolutions
        .into_iter()
        .map(|r| {
            let ra = a.per_resolution.get(&r).unwrap_or(&empty);
            let rb = b.per_resolution.get(&r).unwrap_or(&empty);
            let row = PriorityClass::ALL
                .into_iter()
                .map(|k| (k, delta(get(ra, k), get(rb, k))))
                .collect();
            (r, row)
        })
        .collect();
    let (ta, tb) = (a.total(), b.total());
    Ok(Comparison {
        scenario: a.scenario.clone(),
        coverage_a: a.coverage_pct,
        coverage_b: b.coverage_pct,
        coverage_delta: a.coverage_pct - b.coverage_pct,
        relative_improvement: (b.coverage_pct > 0.0)
            .then(|| (a.coverage_pct - b.coverage_pct) / b.coverage_pct),
        per_class,
        per_resolution,
        looks_a: ta.total_looks,
        looks_b: tb.total_looks,
        looks_delta: ta.total_looks as i64 - tb.total_looks as i64,
        objective_a: a.objective,
        objective_b: b.objective,
    })
}

/// Marker printed for an undefined relative improvement.
pub const UNDEFINED: &str = "undefined";

impl Comparison {
    pub fn csv_header() -> [&'static str; 9] {
        [
            "scenario",
            "coverage_a",
            "coverage_b",
            "coverage_delta",
            "relative_improvement",
            "looks_a",
            "looks_b",
            "objective_a",
            "objective_b",
        ]
    }

    pub fn csv_record(&self) -> [String; 9] {
        [
            self.scenario.clone(),
            self.coverage_a.to_string(),
            self.coverage_b.to_string(),
            self.coverage_delta.to_string(),
            self.relative_improvement
                .map_or(UNDEFINED.to_string(), |v| v.to_string()),
            self.looks_a.to_string(),
            self.looks_b.to_string(),
            self.objective_a.to_string(),
            self.objective_b.to_string(),
        ]
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let pct = |x: f64| format!("{:.2}%", 100.0 * x);
        let _ = writeln!(out, "{:<16}{:>14}{:>14}{:>14}", "", "A", "B", "A - B");
        let _ = writeln!(
            out,
            "{:<16}{:>14}{:>14}{:>14}",
            "coverage",
            pct(self.coverage_a),
            pct(self.coverage_b),
            pct(self.coverage_delta)
        );
        for (k, d) in &self.per_class {
            let _ = writeln!(
                out,
                "{:<16}{:>14}{:>14}{:>14}",
                format!("{k} cells"),
                d.a.to_string(),
                d.b.to_string(),
                format!("{:+} [{:+}]", d.unique_delta, d.looks_delta)
            );
        }
        for (r, row) in &self.per_resolution {
            for (k, d) in row {
                let _ = writeln!(
                    out,
                    "{:<16}{:>14}{:>14}{:>14}",
                    format!("r{r} {k}"),
                    d.a.to_string(),
                    d.b.to_string(),
                    format!("{:+} [{:+}]", d.unique_delta, d.looks_delta)
                );
            }
        }
        let _ = writeln!(
            out,
            "{:<16}{:>14}{:>14}{:>14}",
            "looks", self.looks_a, self.looks_b, self.looks_delta
        );
        let _ = writeln!(
            out,
            "relative coverage improvement: {}",
            self.relative_improvement
                .map_or(UNDEFINED.to_string(), |v| format!("{:.2}%", 100.0 * v))
        );
        out
    }
}

/// Mean and median of the defined relative improvements in a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovementSummary {
    pub defined: usize,
    pub undefined: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

pub fn summarize_improvements(values: &[Option<f64>]) -> ImprovementSummary {
    let mut v: Vec<f64> = values.iter().flatten().copied().collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    };
    ImprovementSummary {
        defined: n,
        undefined: values.len() - n,
        mean: (n > 0).then(|| v.iter().sum::<f64>() / n as f64),
        median,
    }
}
