//! SDPA sparse format (`.dat-s`) export and parsing, and import of SDPA-style
//! solver output.
//!
//! A program `max ⟨c, x⟩ s.t. Ax = b, x ∈ K` is the SDPA dual form
//! `max F₀•Y s.t. Fᵢ•Y = bᵢ, Y ⪰ 0`. Block 1 is a diagonal block holding the
//! free variables (as `(+, −)` pairs) followed by the nonnegative variables;
//! PSD variables follow in order. Free-variable pairs are announced by a
//! leading comment line so the file parses back to the same program.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::check::{cone_violation, row_residuals};
use super::expr::{LinExpr, Var};
use super::program::{Assignment, ConicProgram, EqRow};
use super::solver::{Solution, Status};
use crate::error::{Error, Result};

const FREE_MARKER: &str = "* invset free pairs:";

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

struct BlockMap {
    lp_size: usize,
    free: usize,
    psd_offset: usize,
}

impl BlockMap {
    fn new(prog: &ConicProgram) -> Self {
        let lp_size = 2 * prog.num_free() + prog.num_nonneg();
        Self {
            lp_size,
            free: prog.num_free(),
            psd_offset: if lp_size > 0 { 2 } else { 1 },
        }
    }

    /// `(block, i, j, value)` entries (1-based) carrying coefficient `c` of `v`.
    fn entries(&self, v: Var, c: f64) -> Vec<(usize, usize, usize, f64)> {
        match v {
            Var::Free(k) => vec![(1, 2 * k + 1, 2 * k + 1, c), (1, 2 * k + 2, 2 * k + 2, -c)],
            Var::Nonneg(k) => {
                let p = 2 * self.free + k + 1;
                vec![(1, p, p, c)]
            }
            Var::Psd { block, i, j } => {
                let val = if i == j { c } else { c / 2.0 };
                vec![(self.psd_offset + block, i + 1, j + 1, val)]
            }
        }
    }
}

/// Renders the program as SDPA sparse text with 17 significant digits.
pub fn export_sdpa(prog: &ConicProgram) -> String {
    let map = BlockMap::new(prog);
    let mut out = String::new();
    if prog.num_free() > 0 {
        let _ = writeln!(out, "{FREE_MARKER} {}", prog.num_free());
    }
    let mut sizes: Vec<String> = Vec::new();
    if map.lp_size > 0 {
        sizes.push(format!("-{}", map.lp_size));
    }
    sizes.extend(prog.psd_sides().iter().map(|k| k.to_string()));
    let _ = writeln!(out, "{}", prog.rows().len());
    let _ = writeln!(out, "{}", sizes.len());
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = prog.rows().iter().map(|r| fmt_num(r.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let mut emit = |row: usize, terms: &mut dyn Iterator<Item = (Var, f64)>| {
        let mut entries: Vec<(usize, usize, usize, f64)> =
            terms.flat_map(|(v, c)| map.entries(v, c)).collect();
        entries.sort_by_key(|a| (a.0, a.1, a.2));
        for (blk, i, j, val) in entries {
            let _ = writeln!(out, "{row} {blk} {i} {j} {}", fmt_num(val));
        }
    };
    emit(0, &mut prog.objective().terms());
    for (r, row) in prog.rows().iter().enumerate() {
        emit(r + 1, &mut row.terms.iter().copied());
    }
    out
}

/// Human-readable description of the SDPA block layout.
pub fn sdpa_legend(prog: &ConicProgram) -> String {
    let map = BlockMap::new(prog);
    let mut out = String::new();
    if map.lp_size > 0 {
        let free = 2 * prog.num_free();
        let parts = match (free, prog.num_nonneg()) {
            (0, k) => format!("{k} nonnegative variables"),
            (f, 0) => format!("{} free variables as (+,-) pairs", f / 2),
            (f, k) => format!("entries 1..{f}: {} free variables as (+,-) pairs, then {k} nonnegative variables", f / 2),
        };
        let _ = writeln!(out, "block 1: diagonal, size {} ({parts})", map.lp_size);
    }
    for (b, &side) in prog.psd_sides().iter().enumerate() {
        let owner = prog
            .blocks()
            .iter()
            .find(|blk| blk.psd.contains(&b))
            .map_or("template variable", |blk| blk.name.as_str());
        let _ = writeln!(out, "block {}: PSD {side}x{side} ({owner})", map.psd_offset + b);
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Numeric tokens of SDPA text with their 1-based line numbers; comment lines
/// before the first number are returned separately.
fn tokens(text: &str) -> (Vec<String>, Vec<(usize, String)>) {
    let mut comments = Vec::new();
    let mut toks = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if toks.is_empty() && (trimmed.starts_with('*') || trimmed.starts_with('"')) {
            comments.push(trimmed.to_string());
            continue;
        }
        let cleaned: String = line
            .chars()
            .map(|c| if "{}(),".contains(c) { ' ' } else { c })
            .collect();
        for t in cleaned.split_whitespace() {
            toks.push((ln + 1, t.to_string()));
        }
    }
    (comments, toks)
}

/// Parses SDPA sparse text back into a program.
pub fn parse_sdpa(text: &str) -> Result<ConicProgram> {
    let (comments, toks) = tokens(text);
    let mut num_free = 0;
    for c in &comments {
        if let Some(rest) = c.strip_prefix(FREE_MARKER) {
            num_free = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(1, format!("bad free-pair count {rest:?}")))?;
        }
    }
    let mut it = toks.into_iter().peekable();
    fn take(it: &mut impl Iterator<Item = (usize, String)>, what: &str) -> Result<(usize, String)> {
        it.next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of input, expected {what}")))
    }
    let mut next = |what: &str| take(&mut it, what);
    fn num<T: std::str::FromStr>(tok: &(usize, String), what: &str) -> Result<T> {
        tok.1
            .parse()
            .map_err(|_| parse_err(tok.0, format!("expected {what}, found {:?}", tok.1)))
    }

    let m: usize = num(&next("constraint count")?, "constraint count")?;
    let nblocks: usize = num(&next("block count")?, "block count")?;
    let mut sizes = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let t = next("block size")?;
        let s: i64 = num(&t, "block size")?;
        if s == 0 {
            return Err(parse_err(t.0, "block size 0"));
        }
        sizes.push(s);
    }
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        rhs.push(num::<f64>(&next("right-hand side")?, "right-hand side")?);
    }

    let lp_size = match sizes.first() {
        Some(&s) if s < 0 => s.unsigned_abs() as usize,
        _ => 0,
    };
    if sizes.iter().skip(1).any(|&s| s < 0) {
        return Err(parse_err(3, "only the first block may be diagonal"));
    }
    if 2 * num_free > lp_size {
        return Err(parse_err(1, "more free pairs than diagonal entries"));
    }
    let psd_offset = if lp_size > 0 { 2 } else { 1 };
    let psd_sides: Vec<usize> = sizes
        .iter()
        .skip(psd_offset - 1)
        .map(|&s| s as usize)
        .collect();
    let num_nonneg = lp_size - 2 * num_free;

    let mut exprs: Vec<LinExpr> = vec![LinExpr::default(); m + 1];
    // negative halves of free pairs, checked against the positive halves
    let mut free_neg: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    while it.peek().is_some() {
        let mut next = |what: &str| take(&mut it, what);
        let first = next("row index")?;
        let line = first.0;
        let row: usize = num(&first, "row index")?;
        let blk: usize = num(&next("block index")?, "block index")?;
        let i: usize = num(&next("entry row")?, "entry row")?;
        let j: usize = num(&next("entry column")?, "entry column")?;
        let val: f64 = num(&next("entry value")?, "entry value")?;
        if row > m || blk == 0 || blk > nblocks || i == 0 || j == 0 {
            return Err(parse_err(line, "entry index out of range"));
        }
        let side = sizes[blk - 1].unsigned_abs() as usize;
        if i > side || j > side {
            return Err(parse_err(line, "entry outside its block"));
        }
        if blk == 1 && lp_size > 0 {
            if i != j {
                return Err(parse_err(line, "off-diagonal entry in diagonal block"));
            }
            let p = i - 1;
            if p < 2 * num_free {
                if p.is_multiple_of(2) {
                    exprs[row].add_term(Var::Free(p / 2), val);
                } else {
                    *free_neg.entry((row, p / 2)).or_insert(0.0) += val;
                }
            } else {
                exprs[row].add_term(Var::Nonneg(p - 2 * num_free), val);
            }
        } else {
            let b = blk - psd_offset;
            let coeff = if i == j { val } else { 2.0 * val };
            exprs[row].add_term(Var::psd(b, i - 1, j - 1), coeff);
        }
    }
    for ((row, k), neg) in free_neg {
        if exprs[row].coefficient(Var::Free(k)) != -neg {
            return Err(parse_err(0, format!("free pair {k} in row {row} is not antisymmetric")));
        }
    }

    let objective = exprs[0].clone();
    let rows: Vec<EqRow> = exprs
        .into_iter()
        .skip(1)
        .zip(rhs)
        .map(|(e, rhs)| EqRow {
            terms: e.terms().collect(),
            rhs,
        })
        .collect();
    ConicProgram::from_parts(num_free, num_nonneg, psd_sides, rows, objective)
}

#[derive(Debug)]
enum Node {
    Num(f64),
    List(Vec<Node>),
}

fn parse_braces(text: &str, base_line: usize) -> Result<Node> {
    let mut stack: Vec<Vec<Node>> = vec![Vec::new()];
    let mut token = String::new();
    let mut line = base_line;
    let flush = |token: &mut String, stack: &mut Vec<Vec<Node>>, line: usize| -> Result<()> {
        if !token.is_empty() {
            let v: f64 = token
                .parse()
                .map_err(|_| parse_err(line, format!("bad number {token:?}")))?;
            stack.last_mut().expect("stack non-empty").push(Node::Num(v));
            token.clear();
        }
        Ok(())
    };
    for ch in text.chars() {
        match ch {
            '{' => {
                flush(&mut token, &mut stack, line)?;
                stack.push(Vec::new());
            }
            '}' => {
                flush(&mut token, &mut stack, line)?;
                let done = stack.pop().ok_or_else(|| parse_err(line, "unbalanced '}'"))?;
                stack
                    .last_mut()
                    .ok_or_else(|| parse_err(line, "unbalanced '}'"))?
                    .push(Node::List(done));
                if stack.len() == 1 {
                    break;
                }
            }
            ',' | ' ' | '\t' | '\r' => flush(&mut token, &mut stack, line)?,
            '\n' => {
                flush(&mut token, &mut stack, line)?;
                line += 1;
            }
            c => token.push(c),
        }
    }
    if stack.len() != 1 {
        return Err(parse_err(line, "unterminated '{'"));
    }
    stack
        .pop()
        .and_then(|mut v| v.pop())
        .ok_or_else(|| parse_err(base_line, "empty matrix list"))
}

/// Reads an SDPA-style result (`phase.value`, `objValPrimal`, `objValDual`,
/// `yMat`) and maps the `yMat` blocks back to program variables. Residuals are
/// recomputed from the imported values.
pub fn import_solution(prog: &ConicProgram, text: &str) -> Result<Solution> {
    let map = BlockMap::new(prog);
    let mut phase = None;
    let mut obj_primal = None;
    let mut obj_dual = None;
    let mut ymat_at = None;
    for (ln, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        let value_after_eq = || trimmed.split_once('=').map(|(_, v)| v.trim().to_string());
        if trimmed.starts_with("phase.value") {
            phase = value_after_eq();
        } else if trimmed.starts_with("objValPrimal") {
            obj_primal = value_after_eq().and_then(|v| v.parse::<f64>().ok());
        } else if trimmed.starts_with("objValDual") {
            obj_dual = value_after_eq().and_then(|v| v.parse::<f64>().ok());
        } else if trimmed.starts_with("yMat") {
            ymat_at = Some(ln);
        }
    }
    let phase = phase.ok_or_else(|| parse_err(0, "missing phase.value"))?;
    let status = match phase.as_str() {
        "pdOPT" => Status::Optimal,
        "dINF" | "pUNBD" | "pFEAS_dINF" | "pdINF" => Status::InfeasibleCertified,
        "pdFEAS" | "noINFO" | "pFEAS" | "dFEAS" => Status::Inaccurate,
        _ => Status::IterationLimit,
    };
    if status == Status::InfeasibleCertified {
        return Ok(Solution::infeasible(f64::NAN, 0));
    }
    let ln = ymat_at.ok_or_else(|| parse_err(0, "missing yMat"))?;
    let rest: String = text
        .lines()
        .skip(ln)
        .collect::<Vec<_>>()
        .join("\n");
    let body = rest
        .split_once('=')
        .map(|(_, b)| b)
        .ok_or_else(|| parse_err(ln + 1, "yMat without '='"))?;
    let Node::List(blocks) = parse_braces(body, ln + 1)? else {
        return Err(parse_err(ln + 1, "yMat is not a list"));
    };
    let expected = usize::from(map.lp_size > 0) + prog.psd_sides().len();
    if blocks.len() != expected {
        return Err(parse_err(
            ln + 1,
            format!("yMat has {} blocks, expected {expected}", blocks.len()),
        ));
    }

    let mut values = Assignment::zeros(prog);
    let mut blocks = blocks.into_iter();
    if map.lp_size > 0 {
        let diag = flatten_diag(blocks.next().expect("count checked"), map.lp_size, ln + 1)?;
        for k in 0..prog.num_free() {
            values.free[k] = diag[2 * k] - diag[2 * k + 1];
        }
        for k in 0..prog.num_nonneg() {
            values.nonneg[k] = diag[2 * prog.num_free() + k];
        }
    }
    for (b, node) in blocks.enumerate() {
        values.psd[b] = dense_block(node, prog.psd_sides()[b], ln + 1)?;
    }

    let residual = row_residuals(prog, &values).into_iter().fold(0.0, f64::max);
    let objective = values.eval(prog.objective());
    let gap = match (obj_primal, obj_dual) {
        (Some(p), Some(d)) => (p - d).abs(),
        _ => f64::NAN,
    };
    Ok(Solution {
        status,
        cone_violation: cone_violation(&values),
        values: Some(values),
        objective,
        primal_residual: residual,
        dual_residual: f64::NAN,
        gap,
        iterations: 0,
        trace: Vec::new(),
    })
}

fn flatten_diag(node: Node, size: usize, line: usize) -> Result<Vec<f64>> {
    let items = match node {
        Node::List(items) => items,
        Node::Num(_) => return Err(parse_err(line, "diagonal block is not a list")),
    };
    // either a flat list of the diagonal or a full matrix
    if items.iter().all(|n| matches!(n, Node::Num(_))) {
        let diag: Vec<f64> = items
            .into_iter()
            .map(|n| match n {
                Node::Num(v) => v,
                Node::List(_) => unreachable!(),
            })
            .collect();
        if diag.len() != size {
            return Err(parse_err(line, format!("diagonal block has {} entries, expected {size}", diag.len())));
        }
        return Ok(diag);
    }
    let m = dense_block(Node::List(items), size, line)?;
    Ok((0..size).map(|i| m[(i, i)]).collect())
}

fn dense_block(node: Node, side: usize, line: usize) -> Result<DMatrix<f64>> {
    let Node::List(rows) = node else {
        return Err(parse_err(line, "matrix block is not a list"));
    };
    // a 1×1 block may be written as a bare list {v}
    if side == 1 && rows.len() == 1 {
        if let Node::Num(v) = rows[0] {
            return Ok(DMatrix::from_element(1, 1, v));
        }
    }
    if rows.len() != side {
        return Err(parse_err(line, format!("block has {} rows, expected {side}", rows.len())));
    }
    let mut m = DMatrix::zeros(side, side);
    for (i, row) in rows.into_iter().enumerate() {
        let Node::List(entries) = row else {
            return Err(parse_err(line, "matrix row is not a list"));
        };
        if entries.len() != side {
            return Err(parse_err(line, format!("row has {} entries, expected {side}", entries.len())));
        }
        for (j, e) in entries.into_iter().enumerate() {
            match e {
                Node::Num(v) => m[(i, j)] = v,
                Node::List(_) => return Err(parse_err(line, "nested list in matrix row")),
            }
        }
    }
    Ok((&m + m.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ConicProgram {
        let mut p = ConicProgram::new();
        let t = p.add_free();
        let s = p.add_nonneg();
        let one = LinExpr::constant(1.0);
        let tv = LinExpr::var(t);
        p.add_psd_constraint(&[vec![one.clone(), tv.clone() * 0.3], vec![tv.clone() * 0.3, one]]);
        p.add_eq(&(LinExpr::var(s) + tv.clone() - LinExpr::constant(0.1)));
        p.maximize(tv);
        p
    }

    #[test]
    fn single_block_file_has_five_lines() {
        let mut p = ConicProgram::new();
        let x = p.add_psd(1);
        p.add_eq(&(x.entry(0, 0) - LinExpr::constant(1.0)));
        let text = export_sdpa(&p);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text, export_sdpa(&p));
    }

    #[test]
    fn round_trip_is_exact() {
        let p = sample();
        let text = export_sdpa(&p);
        let q = parse_sdpa(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(text, export_sdpa(&q));
    }

    #[test]
    fn import_maps_blocks() {
        let p = sample();
        // t = 0.1, s = 0
        let text = "phase.value = pdOPT\nobjValPrimal = 0.1\nobjValDual = 0.1\nyMat =\n{\n{ 0.1, 0.0, 0.0 }\n{ {1.0, 0.03}, {0.03, 1.0} }\n}\n";
        let sol = import_solution(&p, text).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        let v = sol.values.unwrap();
        assert!((v.free[0] - 0.1).abs() < 1e-15);
        assert!(sol.primal_residual < 1e-12);
        assert!((sol.objective - 0.1).abs() < 1e-15);
    }

    #[test]
    fn malformed_input_reports_line() {
        let err = parse_sdpa("1\n1\n2\n1.0\n1 1 1 x 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
        let p = sample();
        let err = import_solution(&p, "phase.value = pdOPT\nyMat =\n{\n{ 0.1, 0.0 }\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
