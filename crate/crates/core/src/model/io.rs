//! MPS / LP export, a reader for both, and the `name value` files used for
//! warm starts and imported solutions.
//!
//! The MPS writer keeps the fixed-format column layout but variable and row
//! names are longer than eight characters, so readers must treat it as free
//! MPS (whitespace separated). Binaries sit between integer markers with an
//! explicit upper bound of 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{Assignment, ModelInstance, Sense, Var, VarKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Mps,
    Lp,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mps" => Ok(ExportFormat::Mps),
            "lp" => Ok(ExportFormat::Lp),
            other => Err(format!(
                "unknown model format {other:?} (expected mps or lp)"
            )),
        }
    }
}

fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn write_mps(model: &ModelInstance) -> String {
    let mut out = String::new();
    let n = model.variables.len();
    let mut columns: Vec<Vec<(&str, f64)>> = vec![Vec::new(); n];
    for &(j, k) in &model.objective {
        columns[j].push(("OBJ", k));
    }
    for row in &model.rows {
        for &(j, k) in &row.terms {
            if k != 0.0 {
                columns[j].push((row.name.as_str(), k));
            }
        }
    }

    out.push_str("NAME          LOM\n");
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for row in &model.rows {
        let t = match row.sense {
            Sense::Eq => 'E',
            Sense::Le => 'L',
            Sense::Ge => 'G',
        };
        let _ = writeln!(out, " {t}  {}", row.name);
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (j, v) in model.variables.iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let m = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(
                out,
                "    MARKER                 'MARKER'                 {m}"
            );
            in_int = is_int;
        }
        let name = v.var.to_string();
        if columns[j].is_empty() {
            let _ = writeln!(out, "    {name:<10} {:<10} 0", "OBJ");
        }
        for (row, k) in &columns[j] {
            let _ = writeln!(out, "    {name:<10} {row:<10} {}", num(*k));
        }
    }
    if in_int {
        out.push_str("    MARKER                 'MARKER'                 'INTEND'\n");
    }
    out.push_str("RHS\n");
    for row in &model.rows {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS       {:<10} {}", row.name, num(row.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        if v.lower != 0.0 {
            let _ = writeln!(out, " LO BND       {:<10} {}", v.var, num(v.lower));
        }
        if v.upper.is_finite() {
            let _ = writeln!(out, " UP BND       {:<10} {}", v.var, num(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    out
}

const LP_LINE: usize = 120;

fn write_expr(out: &mut String, label: &str, terms: &[(String, f64)]) {
    let mut line = format!(" {label}:");
    for (i, (name, k)) in terms.iter().enumerate() {
        let piece = if i == 0 && *k >= 0.0 {
            format!(" {} {name}", num(*k))
        } else if *k < 0.0 {
            format!(" - {} {name}", num(-k))
        } else {
            format!(" + {} {name}", num(*k))
        };
        if line.len() + piece.len() > LP_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
}

pub fn write_lp(model: &ModelInstance) -> String {
    let names: Vec<String> = model.variables.iter().map(|v| v.var.to_string()).collect();
    let named = |terms: &[(usize, f64)]| -> Vec<(String, f64)> {
        terms
            .iter()
            .filter(|&&(_, k)| k != 0.0)
            .map(|&(j, k)| (names[j].clone(), k))
            .collect()
    };
    let mut out = String::from("\\ look optimization model\nMinimize\n");
    write_expr(&mut out, "obj", &named(&model.objective));
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let mut terms = named(&row.terms);
        if terms.is_empty() {
            // LP rows need at least one variable
            terms.push((names[0].clone(), 0.0));
        }
        write_expr(&mut out, &row.name, &terms);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        if v.kind == VarKind::Binary {
            continue;
        }
        match (v.lower, v.upper.is_finite()) {
            (lo, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", num(lo), num(v.upper));
            }
            (lo, false) if lo != 0.0 => {
                let _ = writeln!(out, " {name} >= {}", num(lo));
            }
            _ => {}
        }
    }
    out.push_str("Binaries\n");
    for (v, name) in model.variables.iter().zip(&names) {
        if v.kind == VarKind::Binary {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

pub fn export(model: &ModelInstance, format: ExportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ExportFormat::Mps => write_mps(model),
        ExportFormat::Lp => write_lp(model),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn values_text(model: &ModelInstance, a: &Assignment) -> Result<String> {
    let mut out = String::new();
    for v in &model.variables {
        let x = a
            .get(&v.var)
            .ok_or_else(|| Error::MissingVariable(v.var.to_string()))?;
        let _ = writeln!(out, "{} {}", v.var, num(x));
    }
    Ok(out)
}

/// Writes `name value` lines in model variable order. Every model variable
/// must be present in the assignment.
pub fn export_warm_start(
    model: &ModelInstance,
    a: &Assignment,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = values_text(model, a)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a `name value` file. Blank lines and `#` comments are skipped.
pub fn read_values(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_values(&text, &path.display().to_string())
}

fn parse_values(text: &str, origin: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            msg: msg.to_string(),
        };
        let mut it = line.split_whitespace();
        let (Some(name), Some(value), None) = (it.next(), it.next(), it.next()) else {
            return Err(err("expected `<name> <value>`"));
        };
        let value: f64 = value.parse().map_err(|_| err("value is not a number"))?;
        out.push((name.to_string(), value));
    }
    Ok(out)
}

/// Reads a solver solution in `name value` form into an assignment for
/// `model`. Names the model does not know are rejected.
pub fn import_solution(model: &ModelInstance, path: impl AsRef<Path>) -> Result<Assignment> {
    let mut a = Assignment::default();
    for (name, value) in read_values(path)? {
        let var: Var = name.parse()?;
        if !model.contains(&var) {
            return Err(Error::UnknownVariable(name));
        }
        a.set(var, value);
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub sense: Sense,
    pub terms: Vec<(String, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedColumn {
    pub name: String,
    pub integer: bool,
    pub lower: f64,
    pub upper: f64,
}

/// A model as read back from an MPS or LP file, independent of
/// [`ModelInstance`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedModel {
    pub columns: Vec<ParsedColumn>,
    pub rows: Vec<ParsedRow>,
    pub objective: Vec<(String, f64)>,
}

impl ParsedModel {
    pub fn column_index(&self) -> HashMap<&str, usize> {
        self.columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.as_str(), i))
            .collect()
    }

    pub fn objective_value(&self, values: &HashMap<String, f64>) -> f64 {
        self.objective
            .iter()
            .map(|(n, k)| k * values.get(n).copied().unwrap_or(0.0))
            .sum()
    }

    /// Names of rows, bounds and integrality requirements violated at `tol`.
    pub fn violations(&self, values: &HashMap<String, f64>, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            let lhs: f64 = row
                .terms
                .iter()
                .map(|(n, k)| k * values.get(n).copied().unwrap_or(0.0))
                .sum();
            if !row.sense.holds(lhs, row.rhs, tol) {
                out.push(row.name.clone());
            }
        }
        for col in &self.columns {
            let x = values.get(&col.name).copied().unwrap_or(0.0);
            if x < col.lower - tol || x > col.upper + tol {
                out.push(format!("bound {}", col.name));
            }
            if col.integer && (x - x.round()).abs() > tol {
                out.push(format!("integrality {}", col.name));
            }
        }
        out
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: "<model>".into(),
        line,
        msg: msg.into(),
    }
}

fn pnum(tok: &str, line: usize) -> Result<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse()
            .map_err(|_| perr(line, format!("expected a number, got {tok:?}"))),
    }
}

/// Reads free-format MPS (which includes what [`write_mps`] produces).
pub fn parse_mps(text: &str) -> Result<ParsedModel> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        Rows,
        Columns,
        Rhs,
        Bounds,
    }
    let mut sec = Sec::None;
    let mut obj_name = String::new();
    let mut rows: Vec<ParsedRow> = Vec::new();
    let mut row_idx: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<ParsedColumn> = Vec::new();
    let mut col_idx: HashMap<String, usize> = HashMap::new();
    let mut objective = Vec::new();
    let mut in_int = false;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            sec = match toks[0] {
                "NAME" => Sec::None,
                "ROWS" => Sec::Rows,
                "COLUMNS" => Sec::Columns,
                "RHS" => Sec::Rhs,
                "BOUNDS" => Sec::Bounds,
                "ENDATA" => break,
                other => return Err(perr(ln, format!("unsupported section {other}"))),
            };
            continue;
        }
        match sec {
            Sec::Rows => {
                let [t, name] = toks[..] else {
                    return Err(perr(ln, "bad ROWS line"));
                };
                let sense = match t {
                    "N" => {
                        if obj_name.is_empty() {
                            obj_name = name.to_string();
                        }
                        continue;
                    }
                    "E" => Sense::Eq,
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    _ => return Err(perr(ln, format!("bad row type {t}"))),
                };
                row_idx.insert(name.to_string(), rows.len());
                rows.push(ParsedRow {
                    name: name.to_string(),
                    sense,
                    terms: Vec::new(),
                    rhs: 0.0,
                });
            }
            Sec::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    in_int = toks[2] == "'INTORG'";
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(ln, "bad COLUMNS line"));
                }
                let name = toks[0];
                col_idx.entry(name.to_string()).or_insert_with(|| {
                    cols.push(ParsedColumn {
                        name: name.to_string(),
                        integer: in_int,
                        lower: 0.0,
                        upper: f64::INFINITY,
                    });
                    cols.len() - 1
                });
                for pair in toks[1..].chunks(2) {
                    let k = pnum(pair[1], ln)?;
                    if pair[0] == obj_name {
                        if k != 0.0 {
                            objective.push((name.to_string(), k));
                        }
                    } else {
                        let r = *row_idx
                            .get(pair[0])
                            .ok_or_else(|| perr(ln, format!("unknown row {}", pair[0])))?;
                        rows[r].terms.push((name.to_string(), k));
                    }
                }
            }
            Sec::Rhs => {
                let body = if toks.len() % 2 == 1 {
                    &toks[1..]
                } else {
                    &toks[..]
                };
                for pair in body.chunks(2) {
                    if pair.len() != 2 {
                        return Err(perr(ln, "bad RHS line"));
                    }
                    if pair[0] == obj_name {
                        continue;
                    }
                    let r = *row_idx
                        .get(pair[0])
                        .ok_or_else(|| perr(ln, format!("unknown row {}", pair[0])))?;
                    rows[r].rhs = pnum(pair[1], ln)?;
                }
            }
            Sec::Bounds => {
                if toks.len() < 3 {
                    return Err(perr(ln, "bad BOUNDS line"));
                }
                let j = *col_idx
                    .get(toks[2])
                    .ok_or_else(|| perr(ln, format!("unknown column {}", toks[2])))?;
                let val = toks.get(3).map(|t| pnum(t, ln)).transpose()?;
                let need = || val.ok_or_else(|| perr(ln, "bound needs a value"));
                let c = &mut cols[j];
                match toks[0] {
                    "UP" => c.upper = need()?,
                    "LO" => c.lower = need()?,
                    "FX" => {
                        c.lower = need()?;
                        c.upper = c.lower;
                    }
                    "BV" => {
                        c.integer = true;
                        c.lower = 0.0;
                        c.upper = 1.0;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    "PL" => c.upper = f64::INFINITY,
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    other => return Err(perr(ln, format!("unsupported bound type {other}"))),
                }
            }
            Sec::None => return Err(perr(ln, "data outside a section")),
        }
    }
    Ok(ParsedModel {
        columns: cols,
        rows,
        objective,
    })
}

#[derive(Debug, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Label(String),
    Plus,
    Minus,
    Cmp(Sense),
}

fn lp_tokens(body: &str, ln: usize) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    for t in body.split_whitespace() {
        match t {
            "+" => out.push(Tok::Plus),
            "-" => out.push(Tok::Minus),
            "<=" | "=<" | "<" => out.push(Tok::Cmp(Sense::Le)),
            ">=" | "=>" | ">" => out.push(Tok::Cmp(Sense::Ge)),
            "=" => out.push(Tok::Cmp(Sense::Eq)),
            _ if t.ends_with(':') => out.push(Tok::Label(t.trim_end_matches(':').to_string())),
            _ => match pnum(t, ln) {
                Ok(x) if !t.chars().next().is_some_and(char::is_alphabetic) => {
                    out.push(Tok::Num(x))
                }
                _ => out.push(Tok::Name(t.to_string())),
            },
        }
    }
    Ok(out)
}

/// Optional label, terms and optional comparison.
type LinearPiece = (Option<String>, Vec<(String, f64)>, Option<(Sense, f64)>);

/// Parses `[label:] terms [cmp rhs]` token streams into linear pieces.
fn lp_linear(toks: &[Tok], ln: usize) -> Result<Vec<LinearPiece>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut label = None;
        if let Tok::Label(l) = &toks[i] {
            label = Some(l.clone());
            i += 1;
        }
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        let mut cmp = None;
        while i < toks.len() {
            match &toks[i] {
                Tok::Plus => {}
                Tok::Minus => sign = -sign,
                Tok::Num(x) => coef = Some(*x),
                Tok::Name(n) => {
                    terms.push((n.clone(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
                Tok::Cmp(s) => {
                    let mut rsign = 1.0;
                    i += 1;
                    if let Some(Tok::Minus) = toks.get(i) {
                        rsign = -1.0;
                        i += 1;
                    }
                    let Some(Tok::Num(rhs)) = toks.get(i) else {
                        return Err(perr(ln, "comparison without a numeric right-hand side"));
                    };
                    cmp = Some((*s, rsign * rhs));
                    i += 1;
                    break;
                }
                Tok::Label(_) => break,
            }
            i += 1;
        }
        out.push((label, terms, cmp));
    }
    Ok(out)
}

/// Reads the CPLEX-style LP subset that [`write_lp`] emits.
pub fn parse_lp(text: &str) -> Result<ParsedModel> {
    #[derive(PartialEq, Clone, Copy)]
    enum Sec {
        None,
        Obj,
        Cons,
        Bounds,
        Bin,
        Gen,
    }
    let mut sec = Sec::None;
    let mut chunks: Vec<(Sec, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let next = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(Sec::Obj),
            "subject to" | "st" | "s.t." | "such that" => Some(Sec::Cons),
            "bounds" => Some(Sec::Bounds),
            "binaries" | "binary" | "bin" => Some(Sec::Bin),
            "generals" | "general" | "gen" => Some(Sec::Gen),
            "end" => break,
            _ => None,
        };
        if let Some(n) = next {
            sec = n;
            continue;
        }
        match chunks.last_mut() {
            Some((s, body)) if *s == sec && matches!(sec, Sec::Obj | Sec::Cons) => {
                body.push(' ');
                body.push_str(line);
            }
            _ => chunks.push((sec, line.to_string())),
        }
    }

    let mut model = ParsedModel::default();
    let mut col_idx: HashMap<String, usize> = HashMap::new();
    let mut bounds: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut ints: Vec<String> = Vec::new();
    fn see(col_idx: &mut HashMap<String, usize>, model: &mut ParsedModel, name: &str) -> usize {
        *col_idx.entry(name.to_string()).or_insert_with(|| {
            model.columns.push(ParsedColumn {
                name: name.to_string(),
                integer: false,
                lower: 0.0,
                upper: f64::INFINITY,
            });
            model.columns.len() - 1
        })
    }
    for (ln, (sec, body)) in chunks.iter().enumerate() {
        match sec {
            Sec::Obj => {
                let toks = lp_tokens(body, ln)?;
                for (_, terms, _) in lp_linear(&toks, ln)? {
                    for (n, k) in terms {
                        see(&mut col_idx, &mut model, &n);
                        if k != 0.0 {
                            model.objective.push((n, k));
                        }
                    }
                }
            }
            Sec::Cons => {
                let toks = lp_tokens(body, ln)?;
                for (idx, (label, terms, cmp)) in lp_linear(&toks, ln)?.into_iter().enumerate() {
                    let (sense, rhs) =
                        cmp.ok_or_else(|| perr(ln, "constraint without comparison"))?;
                    for (n, _) in &terms {
                        see(&mut col_idx, &mut model, n);
                    }
                    model.rows.push(ParsedRow {
                        name: label.unwrap_or_else(|| format!("R{idx}")),
                        sense,
                        terms: terms.into_iter().filter(|(_, k)| *k != 0.0).collect(),
                        rhs,
                    });
                }
            }
            Sec::Bounds => {
                let toks = lp_tokens(body, ln)?;
                match toks.as_slice() {
                    [Tok::Num(lo), Tok::Cmp(Sense::Le), Tok::Name(n), Tok::Cmp(Sense::Le), Tok::Num(hi)] =>
                    {
                        bounds.insert(n.clone(), (*lo, *hi));
                    }
                    [Tok::Name(n), Tok::Cmp(Sense::Le), Tok::Num(hi)] => {
                        bounds.entry(n.clone()).or_insert((0.0, f64::INFINITY)).1 = *hi;
                    }
                    [Tok::Name(n), Tok::Cmp(Sense::Ge), Tok::Num(lo)] => {
                        bounds.entry(n.clone()).or_insert((0.0, f64::INFINITY)).0 = *lo;
                    }
                    [Tok::Name(n), Tok::Cmp(Sense::Eq), Tok::Num(v)] => {
                        bounds.insert(n.clone(), (*v, *v));
                    }
                    [Tok::Name(n), Tok::Name(free)] if free.eq_ignore_ascii_case("free") => {
                        bounds.insert(n.clone(), (f64::NEG_INFINITY, f64::INFINITY));
                    }
                    _ => return Err(perr(ln, format!("unsupported bound {body:?}"))),
                }
            }
            Sec::Bin | Sec::Gen => {
                for n in body.split_whitespace() {
                    ints.push(n.to_string());
                    if *sec == Sec::Bin {
                        bounds.insert(n.to_string(), (0.0, 1.0));
                    }
                }
            }
            Sec::None => return Err(perr(ln, "data outside a section")),
        }
    }
    for n in &ints {
        let j = see(&mut col_idx, &mut model, n);
        model.columns[j].integer = true;
    }
    for (n, (lo, hi)) in bounds {
        let j = see(&mut col_idx, &mut model, &n);
        let c = &mut model.columns[j];
        c.lower = lo;
        c.upper = hi;
    }
    Ok(model)
}
