//! Cables of framed words and full-twist insertion.

use crate::cobcat::{BoundaryWord, Mark};
use crate::error::{Error, Result};

use super::word::{CrossKind, Gen, TangleWord};

/// Number of reversed and coherent parallel copies per component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CableSpec {
    pub per_component: Vec<(usize, usize)>,
}

impl CableSpec {
    pub fn uniform(n: usize, minus: usize, plus: usize) -> Self {
        CableSpec { per_component: vec![(minus, plus); n] }
    }

    pub fn swapped(&self) -> Self {
        CableSpec { per_component: self.per_component.iter().map(|&(a, b)| (b, a)).collect() }
    }
}

/// Component index of every point on every row of the word (row `k` is below
/// generator `k`).
pub(crate) fn row_components(w: &TangleWord) -> Result<(Vec<Vec<usize>>, usize)> {
    let d = w.diagram()?;
    let comps = d.components();
    let levels = d.levels.as_ref().unwrap();
    let find = |l| comps.iter().position(|c| c.contains(&l)).unwrap();
    let rows: Vec<Vec<usize>> = levels.iter().take(w.gens.len() + 1).map(|lv| lv.iter().map(|(l, _)| find(*l)).collect()).collect();
    Ok((rows, comps.len()))
}

/// Marks of copies `0..k` of a point, left to right, and their ribbon indices.
fn copies(m: Mark, minus: usize, plus: usize) -> Vec<(usize, Mark)> {
    let k = minus + plus;
    let mark = |r: usize| if r < minus { m.flip() } else { m };
    let order: Vec<usize> = match m {
        Mark::Up => (0..k).collect(),
        Mark::Down => (0..k).rev().collect(),
    };
    order.into_iter().map(|r| (r, mark(r))).collect()
}

fn full_twists(at: usize, width: usize, n: i64) -> Vec<Gen> {
    let kind = if n > 0 { CrossKind::Plus } else { CrossKind::Minus };
    let mut out = vec![];
    for _ in 0..n.unsigned_abs() {
        for _ in 0..width {
            for j in 0..width.saturating_sub(1) {
                out.push(Gen::Cross { at: at + j, kind });
            }
        }
    }
    out
}

/// Replace each component by `k⁻ + k⁺` parallel copies (the first `k⁻` along the
/// ribbon reversed), adding full twists so that the blackboard framing of the
/// cable matches the declared framing (default 0).
pub fn cable(w: &TangleWord, spec: &CableSpec) -> Result<TangleWord> {
    let (rows, ncomp) = row_components(w)?;
    if spec.per_component.len() != ncomp {
        return Err(Error::Word(format!("cable spec has {} entries for {} components", spec.per_component.len(), ncomp)));
    }
    let d = w.diagram()?;
    let writhe = d.writhes();
    let twists: Vec<i64> = (0..ncomp).map(|c| w.framings.get(c).copied().unwrap_or(0) - writhe[c]).collect();
    let width = |c: usize| spec.per_component[c].0 + spec.per_component[c].1;
    let start = |row: &[usize], i: usize| -> usize { row[..i].iter().map(|c| width(*c)).sum() };

    let mut source = vec![];
    for (m, c) in w.source.0.iter().zip(&rows[0]) {
        let (a, b) = spec.per_component[*c];
        source.extend(copies(*m, a, b).into_iter().map(|(_, m)| m));
    }
    let mut gens = vec![];
    let mut twisted = vec![false; ncomp];
    // components present at the bottom are twisted right away
    for (i, c) in rows[0].iter().enumerate() {
        if !twisted[*c] {
            twisted[*c] = true;
            gens.extend(full_twists(start(&rows[0], i), width(*c), twists[*c]));
        }
    }
    for (k, g) in w.gens.iter().enumerate() {
        let row = &rows[k];
        match *g {
            Gen::Cup { at, rev } => {
                let c = rows[k + 1][at];
                let (minus, plus) = spec.per_component[c];
                let kk = minus + plus;
                let p = start(row, at);
                let lm = if rev { Mark::Down } else { Mark::Up };
                let left = copies(lm, minus, plus);
                for j in 0..kk {
                    let mark = left[j].1;
                    gens.push(Gen::Cup { at: p + j, rev: mark == Mark::Down });
                }
                if !twisted[c] {
                    twisted[c] = true;
                    gens.extend(full_twists(p, kk, twists[c]));
                }
            }
            Gen::Cap { at } => {
                let c = row[at];
                let kk = width(c);
                let p = start(row, at);
                for j in 0..kk {
                    gens.push(Gen::Cap { at: p + kk - 1 - j });
                }
            }
            Gen::Cross { at, kind } => {
                let (a, b) = (width(row[at]), width(row[at + 1]));
                let p = start(row, at);
                for s in (0..a).rev() {
                    for t in 0..b {
                        gens.push(Gen::Cross { at: p + s + t, kind });
                    }
                }
            }
        }
    }
    let out = TangleWord { source: BoundaryWord(source), gens, framings: vec![] };
    out.target()?;
    Ok(out)
}

/// Mirror image with reversed orientations.
pub fn mirror(w: &TangleWord) -> TangleWord {
    w.mirror()
}

/// Insert `n` full twists on the `width` points starting at position `at`,
/// right after the first `level` generators.
pub fn twist_insert(w: &TangleWord, level: usize, at: usize, width: usize, n: i64) -> Result<TangleWord> {
    if level > w.gens.len() {
        return Err(Error::Word(format!("level {level} beyond the word")));
    }
    let row = TangleWord::new(w.source.clone(), w.gens[..level].to_vec()).target()?;
    if at + width > row.len() {
        return Err(Error::Word("twist region outside the row".into()));
    }
    let mut gens = w.gens[..level].to_vec();
    gens.extend(full_twists(at, width, n));
    gens.extend_from_slice(&w.gens[level..]);
    Ok(TangleWord { source: w.source.clone(), gens, framings: w.framings.clone() })
}
