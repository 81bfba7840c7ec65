//! The line-based tangle word format.

use std::fmt;

use crate::cobcat::{BoundaryWord, Label, Mark};
use crate::error::{Error, Result};

use super::{Diagram, Piece};

/// Which strand is on top: for `Plus` the strand running from bottom-left to
/// top-right is over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CrossKind {
    Plus,
    Minus,
}

impl CrossKind {
    pub fn flip(self) -> CrossKind {
        match self {
            CrossKind::Plus => CrossKind::Minus,
            CrossKind::Minus => CrossKind::Plus,
        }
    }
}

/// Generators act on a row of points, read bottom to top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    /// New points at `at` and `at + 1`. Oriented up on the left unless `rev`.
    Cup { at: usize, rev: bool },
    /// Join points `at` and `at + 1`.
    Cap { at: usize },
    /// Cross points `at` and `at + 1`.
    Cross { at: usize, kind: CrossKind },
}

impl Gen {
    pub fn at(&self) -> usize {
        match *self {
            Gen::Cup { at, .. } | Gen::Cap { at } | Gen::Cross { at, .. } => at,
        }
    }

    pub fn shifted(&self, by: usize) -> Gen {
        match *self {
            Gen::Cup { at, rev } => Gen::Cup { at: at + by, rev },
            Gen::Cap { at } => Gen::Cap { at: at + by },
            Gen::Cross { at, kind } => Gen::Cross { at: at + by, kind },
        }
    }

    /// Width change of the row.
    pub fn width_delta(&self) -> isize {
        match self {
            Gen::Cup { .. } => 2,
            Gen::Cap { .. } => -2,
            Gen::Cross { .. } => 0,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Cup { at, rev: false } => write!(f, "cup {at}"),
            Gen::Cup { at, rev: true } => write!(f, "cup {at} rev"),
            Gen::Cap { at } => write!(f, "cap {at}"),
            Gen::Cross { at, kind: CrossKind::Plus } => write!(f, "x+ {at}"),
            Gen::Cross { at, kind: CrossKind::Minus } => write!(f, "x- {at}"),
        }
    }
}

/// A tangle diagram as a word in generators with a source boundary and a
/// declared framing per component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangleWord {
    pub source: BoundaryWord,
    pub gens: Vec<Gen>,
    pub framings: Vec<i64>,
}

impl TangleWord {
    pub fn new(source: BoundaryWord, gens: Vec<Gen>) -> Self {
        TangleWord { source, gens, framings: vec![] }
    }

    pub fn closed(gens: Vec<Gen>) -> Self {
        TangleWord::new(BoundaryWord(vec![]), gens)
    }

    /// Boundary word after all generators, or an error naming the first
    /// inadmissible generator.
    pub fn target(&self) -> Result<BoundaryWord> {
        let mut row = self.source.0.clone();
        for (k, g) in self.gens.iter().enumerate() {
            apply(&mut row, g).map_err(|m| Error::Word(format!("generator {} ({g}): {m}", k + 1)))?;
        }
        Ok(BoundaryWord(row))
    }

    pub fn parse(text: &str) -> Result<TangleWord> {
        let mut source = None;
        let mut target = None;
        let mut framings = vec![];
        let mut gens = vec![];
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            if let Some((key, val)) = line.split_once(':') {
                let val = val.trim();
                match key.trim() {
                    "source" => source = Some(parse_boundary(val).map_err(err)?),
                    "target" => target = Some(parse_boundary(val).map_err(err)?),
                    "framing" | "framings" => {
                        framings = val
                            .split_whitespace()
                            .map(|t| t.parse::<i64>().map_err(|_| err(format!("bad framing '{t}'"))))
                            .collect::<Result<_>>()?
                    }
                    k => return Err(err(format!("unknown header '{k}'"))),
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let pos = |i: usize| -> Result<usize> {
                toks.get(i)
                    .ok_or_else(|| err("missing position".into()))?
                    .parse()
                    .map_err(|_| err(format!("bad position '{}'", toks[i])))
            };
            let g = match toks[0] {
                "cup" => {
                    let rev = match toks.get(2) {
                        None => false,
                        Some(&"rev") => true,
                        Some(t) => return Err(err(format!("unexpected '{t}'"))),
                    };
                    Gen::Cup { at: pos(1)?, rev }
                }
                "cap" => Gen::Cap { at: pos(1)? },
                "x+" | "X+" | "pos" => Gen::Cross { at: pos(1)?, kind: CrossKind::Plus },
                "x-" | "X-" | "neg" => Gen::Cross { at: pos(1)?, kind: CrossKind::Minus },
                t => return Err(err(format!("unknown generator '{t}'"))),
            };
            if toks.len() > 2 && !matches!(g, Gen::Cup { .. }) {
                return Err(err(format!("unexpected '{}'", toks[2])));
            }
            gens.push(g);
        }
        let w = TangleWord { source: source.unwrap_or(BoundaryWord(vec![])), gens, framings };
        let got = w.target().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        if let Some(t) = target {
            if t != got {
                return Err(Error::Parse { line: 0, msg: format!("declared target {t} but word ends at {got}") });
            }
        }
        Ok(w)
    }

    /// Label every endpoint and build the piece list. Labels are assigned in the
    /// order points are created; strands untouched by any generator get an arc
    /// from source to target.
    pub fn diagram(&self) -> Result<Diagram> {
        let mut next: Label = 0;
        let mut row: Vec<(Label, Mark)> = self
            .source
            .0
            .iter()
            .map(|m| {
                next += 1;
                (next - 1, *m)
            })
            .collect();
        let mut levels = vec![row.clone()];
        let mut pieces = vec![];
        for (k, g) in self.gens.iter().enumerate() {
            let bad = |m: String| Error::Word(format!("generator {} ({g}): {m}", k + 1));
            let w = row.len();
            match *g {
                Gen::Cup { at, rev } => {
                    if at > w {
                        return Err(bad("position out of range".into()));
                    }
                    let (a, b) = (next, next + 1);
                    next += 2;
                    let marks = if rev { (Mark::Down, Mark::Up) } else { (Mark::Up, Mark::Down) };
                    row.insert(at, (b, marks.1));
                    row.insert(at, (a, marks.0));
                    pieces.push(Piece::Arc(a, b));
                }
                Gen::Cap { at } => {
                    if at + 1 >= w {
                        return Err(bad("position out of range".into()));
                    }
                    if row[at].1 == row[at + 1].1 {
                        return Err(bad("cap joins two points with the same orientation".into()));
                    }
                    pieces.push(Piece::Arc(row[at].0, row[at + 1].0));
                    row.drain(at..at + 2);
                }
                Gen::Cross { at, kind } => {
                    if at + 1 >= w {
                        return Err(bad("position out of range".into()));
                    }
                    let (a, ma) = row[at];
                    let (b, mb) = row[at + 1];
                    let (c, d) = (next, next + 1);
                    next += 2;
                    // strands: a -> d and b -> c
                    let vertical = [(a, c), (b, d)];
                    let turnback = [(a, b), (c, d)];
                    let (zero, one) = match kind {
                        CrossKind::Plus => (vertical, turnback),
                        CrossKind::Minus => (turnback, vertical),
                    };
                    let same = ma == mb;
                    let sign = match (kind, same) {
                        (CrossKind::Plus, true) | (CrossKind::Minus, false) => 1,
                        _ => -1,
                    };
                    pieces.push(Piece::Crossing { zero, one, strands: [(a, d), (b, c)], sign });
                    row[at] = (c, mb);
                    row[at + 1] = (d, ma);
                }
            }
            levels.push(row.clone());
        }
        // untouched strands
        let used: std::collections::BTreeSet<Label> = pieces.iter().flat_map(|p| p.ends()).collect();
        for i in 0..row.len() {
            let (l, m) = row[i];
            if !used.contains(&l) {
                pieces.push(Piece::Arc(l, next));
                row[i] = (next, m);
                next += 1;
                levels.push(row.clone());
            }
        }
        Ok(Diagram { pieces, levels: Some(levels), framings: self.framings.clone() })
    }

    /// The mirror image with every orientation reversed (Khovanov homology only
    /// sees the mirroring).
    pub fn mirror(&self) -> TangleWord {
        let gens = self
            .gens
            .iter()
            .map(|g| match *g {
                Gen::Cross { at, kind } => Gen::Cross { at, kind: kind.flip() },
                Gen::Cup { at, rev } => Gen::Cup { at, rev: !rev },
                g => g,
            })
            .collect();
        TangleWord {
            source: BoundaryWord(self.source.0.iter().map(|m| m.flip()).collect()),
            gens,
            framings: self.framings.iter().map(|f| -f).collect(),
        }
    }

    pub fn crossings(&self) -> usize {
        self.gens.iter().filter(|g| matches!(g, Gen::Cross { .. })).count()
    }

    /// Closed word joining each top point to the bottom point below it by
    /// strands passing to the left. Needs equal source and target.
    pub fn closure(&self) -> Result<TangleWord> {
        let marks = &self.source.0;
        if self.target()? != self.source {
            return Err(Error::Boundary(format!("closure needs source = target, got {} and {}", self.source, self.target()?)));
        }
        let k = marks.len();
        let mut gens: Vec<Gen> = (0..k).map(|j| Gen::Cup { at: j, rev: marks[k - 1 - j] == Mark::Up }).collect();
        gens.extend(self.gens.iter().map(|g| g.shifted(k)));
        gens.extend((0..k).rev().map(|j| Gen::Cap { at: j }));
        Ok(TangleWord::closed(gens))
    }
}

fn apply(row: &mut Vec<Mark>, g: &Gen) -> std::result::Result<(), String> {
    let w = row.len();
    match *g {
        Gen::Cup { at, rev } => {
            if at > w {
                return Err("position out of range".into());
            }
            let (a, b) = if rev { (Mark::Down, Mark::Up) } else { (Mark::Up, Mark::Down) };
            row.insert(at, b);
            row.insert(at, a);
        }
        Gen::Cap { at } => {
            if at + 1 >= w {
                return Err("position out of range".into());
            }
            if row[at] == row[at + 1] {
                return Err("cap joins two points with the same orientation".into());
            }
            row.drain(at..at + 2);
        }
        Gen::Cross { at, .. } => {
            if at + 1 >= w {
                return Err("position out of range".into());
            }
            row.swap(at, at + 1);
        }
    }
    Ok(())
}

fn parse_boundary(s: &str) -> std::result::Result<BoundaryWord, String> {
    let mut out = vec![];
    for c in s.chars() {
        match c {
            '^' | 'u' | 'U' | '+' => out.push(Mark::Up),
            'v' | 'd' | 'D' | '-' => out.push(Mark::Down),
            ' ' | ',' => {}
            _ => return Err(format!("bad orientation mark '{c}'")),
        }
    }
    Ok(BoundaryWord(out))
}

impl fmt::Display for TangleWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source: {}", self.source)?;
        if let Ok(t) = self.target() {
            writeln!(f, "target: {t}")?;
        }
        if !self.framings.is_empty() {
            let fs: Vec<String> = self.framings.iter().map(|x| x.to_string()).collect();
            writeln!(f, "framing: {}", fs.join(" "))?;
        }
        for g in &self.gens {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}
