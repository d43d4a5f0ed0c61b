//! SDPA sparse format (`.dat-s`).
//!
//! The relaxation is written as `min Σ_i c_i y_i` subject to
//! `Σ_i y_i F_i − F_0 ⪰ 0`, where `i` runs over the moment positions other
//! than `y_0 = 1`. The `y_0` terms move into `F_0` (negated) and the constant
//! of the objective into an `* objective_offset` comment. Equality rows
//! become a diagonal block holding each row twice with opposite signs.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::relax::RelaxationProblem;

/// One block of an SDPA file: positive size for a dense symmetric block,
/// negative for a diagonal one.
pub type SdpaBlock = i64;

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaProblem {
    pub m: usize,
    pub blocks: Vec<SdpaBlock>,
    pub c: Vec<f64>,
    pub objective_offset: f64,
    /// `(matrix, block, row, col) → value`, 1-based with `row <= col`;
    /// matrix 0 is `F_0`.
    pub entries: BTreeMap<(usize, usize, usize, usize), f64>,
}

impl SdpaProblem {
    pub fn from_relaxation(rp: &RelaxationProblem) -> Self {
        let m = rp.npositions() - 1;
        let mut c = vec![0.0; m];
        let mut offset = 0.0;
        for &(p, v) in &rp.objective.terms {
            if p == 0 {
                offset = v;
            } else {
                c[p - 1] = v;
            }
        }
        let mut blocks: Vec<SdpaBlock> = rp.blocks.iter().map(|b| b.size() as i64).collect();
        let mut entries = BTreeMap::new();
        let mut put = |pos: usize, blk: usize, i: usize, j: usize, v: f64| {
            let (mat, val) = if pos == 0 { (0, -v) } else { (pos, v) };
            if val != 0.0 {
                *entries.entry((mat, blk, i, j)).or_insert(0.0) += val;
            }
        };
        for (k, b) in rp.blocks.iter().enumerate() {
            for e in &b.entries {
                put(e.pos, k + 1, e.row + 1, e.col + 1, e.coef);
            }
        }
        if !rp.eq_rows.is_empty() {
            let blk = blocks.len() + 1;
            blocks.push(-2 * rp.eq_rows.len() as i64);
            for (r, row) in rp.eq_rows.iter().enumerate() {
                for &(p, v) in &row.form.terms {
                    put(p, blk, 2 * r + 1, 2 * r + 1, v);
                    put(p, blk, 2 * r + 2, 2 * r + 2, -v);
                }
            }
        }
        Self { m, blocks, c, objective_offset: offset, entries }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "* objective_offset {:.16e}", self.objective_offset);
        let _ = writeln!(s, "{}", self.m);
        let _ = writeln!(s, "{}", self.blocks.len());
        let sizes: Vec<String> = self.blocks.iter().map(i64::to_string).collect();
        let _ = writeln!(s, "{}", sizes.join(" "));
        let cs: Vec<String> = self.c.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", cs.join(" "));
        for (&(mat, blk, i, j), v) in &self.entries {
            let _ = writeln!(s, "{mat} {blk} {i} {j} {v:.16e}");
        }
        s
    }
}

/// SDPA text for a relaxation.
pub fn export_sdpa(rp: &RelaxationProblem) -> String {
    SdpaProblem::from_relaxation(rp).to_text()
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Sdpa { line, msg: msg.into() }
}

fn number<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| err(line, format!("expected {what}, found `{tok}`")))
}

/// Parses SDPA sparse text, validating indices, block shapes and symmetry.
pub fn import_sdpa(text: &str) -> Result<SdpaProblem> {
    let mut offset = 0.0;
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('*').or_else(|| t.strip_prefix('"')) {
            let mut it = rest.split_whitespace();
            if it.next() == Some("objective_offset") {
                let v = it.next().ok_or_else(|| err(line, "missing objective offset value"))?;
                offset = number(v, line, "a number")?;
            }
            continue;
        }
        let cleaned: String = t.chars().map(|ch| if "{}(),".contains(ch) { ' ' } else { ch }).collect();
        lines.push((line, cleaned));
    }
    let mut it = lines.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| err(text.lines().count(), format!("unexpected end of file, expected {what}")));

    let (l, s) = next("the number of matrices")?;
    let m: usize = number(s.split_whitespace().next().unwrap_or(""), l, "the number of matrices")?;
    let (l, s) = next("the number of blocks")?;
    let nb: usize = number(s.split_whitespace().next().unwrap_or(""), l, "the number of blocks")?;
    let (l, s) = next("the block structure")?;
    let blocks: Vec<i64> = s.split_whitespace().map(|t| number(t, l, "a block size")).collect::<Result<_>>()?;
    if blocks.len() != nb {
        return Err(err(l, format!("expected {nb} block sizes, found {}", blocks.len())));
    }
    if blocks.contains(&0) {
        return Err(err(l, "block size 0"));
    }
    let (l, s) = next("the objective vector")?;
    let c: Vec<f64> = s.split_whitespace().map(|t| number(t, l, "a number")).collect::<Result<_>>()?;
    if c.len() != m {
        return Err(err(l, format!("expected {m} objective coefficients, found {}", c.len())));
    }
    let mut entries = BTreeMap::new();
    while let Ok((l, s)) = next("") {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(err(l, format!("expected 5 fields, found {}", toks.len())));
        }
        let mat: usize = number(toks[0], l, "a matrix index")?;
        let blk: usize = number(toks[1], l, "a block index")?;
        let i: usize = number(toks[2], l, "a row index")?;
        let j: usize = number(toks[3], l, "a column index")?;
        let v: f64 = number(toks[4], l, "a value")?;
        if mat > m {
            return Err(err(l, format!("matrix index {mat} exceeds {m}")));
        }
        if blk == 0 || blk > nb {
            return Err(err(l, format!("block index {blk} outside 1..={nb}")));
        }
        let size = blocks[blk - 1].unsigned_abs() as usize;
        if i == 0 || j == 0 || i > size || j > size {
            return Err(err(l, format!("entry ({i}, {j}) outside block {blk} of size {size}")));
        }
        if blocks[blk - 1] < 0 && i != j {
            return Err(err(l, format!("off-diagonal entry ({i}, {j}) in diagonal block {blk}")));
        }
        let key = (mat, blk, i.min(j), i.max(j));
        if entries.insert(key, v).is_some() {
            return Err(err(l, format!("duplicate entry ({i}, {j}) of matrix {mat}, block {blk}")));
        }
    }
    Ok(SdpaProblem { m, blocks, c, objective_offset: offset, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_pop;
    use crate::relax::assemble_dense;

    #[test]
    fn square_export() {
        let rp = assemble_dense(&parse_pop("vars x; min x^2;").unwrap(), 1).unwrap();
        let text = export_sdpa(&rp);
        let p = import_sdpa(&text).unwrap();
        assert_eq!(p.blocks, vec![2]);
        assert_eq!(p.entries.len(), 3);
        assert_eq!(p.to_text(), text);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = "1\n1\n2\n1.0\n1 1 1 3 1.0\n";
        assert_eq!(import_sdpa(bad).unwrap_err(), Error::Sdpa { line: 5, msg: "entry (1, 3) outside block 1 of size 2".into() });
        let dup = "1\n1\n2\n1.0\n1 1 1 2 1.0\n1 1 2 1 1.0\n";
        assert!(matches!(import_sdpa(dup), Err(Error::Sdpa { line: 6, .. })));
    }
}
