//! Tangle diagrams: the word and PD text formats, labelled pieces, and the
//! scanning construction of Khovanov complexes.

mod cable;
mod movie;
mod word;

pub use cable::{cable, mirror, twist_insert, CableSpec};
pub use movie::{movie_to_chainmap, Frame, Movie, MovieMap, Resolved, MAX_CROSSINGS};

pub use word::{CrossKind, Gen, TangleWord};

use std::collections::{BTreeMap, BTreeSet};

use crate::cobcat::{FlatTangle, Label, Mark, Mor};
use crate::complex::{simplify, tensor, Complex, Obj};
use crate::error::{Error, Result};
use crate::field::Field;

/// One elementary piece of a diagram with labelled endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    /// A crossingless arc.
    Arc(Label, Label),
    /// A crossing with its two resolutions and the two strands through it.
    Crossing { zero: [(Label, Label); 2], one: [(Label, Label); 2], strands: [(Label, Label); 2], sign: i8 },
}

impl Piece {
    pub fn ends(&self) -> Vec<Label> {
        let mut v = match self {
            Piece::Arc(a, b) => vec![*a, *b],
            Piece::Crossing { zero, .. } => vec![zero[0].0, zero[0].1, zero[1].0, zero[1].1],
        };
        v.sort_unstable();
        v
    }

    /// Connections along the underlying strands.
    pub fn strand_pairs(&self) -> Vec<(Label, Label)> {
        match self {
            Piece::Arc(a, b) => vec![(*a, *b)],
            Piece::Crossing { strands, .. } => strands.to_vec(),
        }
    }

    pub fn complex(&self, field: Field) -> Complex {
        match self {
            Piece::Arc(a, b) => Complex::single(field, FlatTangle::from_arcs(&[(*a, *b)], 0).unwrap(), 0, 0),
            Piece::Crossing { zero, one, sign, .. } => {
                let r0 = FlatTangle::from_arcs(zero, 0).unwrap();
                let r1 = FlatTangle::from_arcs(one, 0).unwrap();
                let (h, q) = if *sign > 0 { (0, 1) } else { (-1, -2) };
                Complex::cone(field, Obj { tangle: r0, q }, Obj { tangle: r1, q: q + 1 }, Mor::basis(0, field.one()), h)
            }
        }
    }

    pub fn relabel(&self, f: &dyn Fn(Label) -> Label) -> Piece {
        let p = |(a, b): (Label, Label)| (f(a), f(b));
        match self {
            Piece::Arc(a, b) => Piece::Arc(f(*a), f(*b)),
            Piece::Crossing { zero, one, strands, sign } => Piece::Crossing {
                zero: [p(zero[0]), p(zero[1])],
                one: [p(one[0]), p(one[1])],
                strands: [p(strands[0]), p(strands[1])],
                sign: *sign,
            },
        }
    }
}

/// A diagram as a list of labelled pieces. Diagrams built from words also keep
/// their levels (labels and orientation marks between consecutive pieces).
#[derive(Clone, Debug)]
pub struct Diagram {
    pub pieces: Vec<Piece>,
    /// `levels[k]` is the level below piece `k`; the last entry is the top.
    pub levels: Option<Vec<Vec<(Label, Mark)>>>,
    pub framings: Vec<i64>,
}

impl Diagram {
    pub fn source(&self) -> Vec<Label> {
        self.levels.as_ref().map(|l| l[0].iter().map(|p| p.0).collect()).unwrap_or_default()
    }

    pub fn target(&self) -> Vec<Label> {
        self.levels.as_ref().map(|l| l.last().unwrap().iter().map(|p| p.0).collect()).unwrap_or_default()
    }

    /// Boundary labels (ends appearing in exactly one piece).
    pub fn boundary(&self) -> Vec<Label> {
        let mut count: BTreeMap<Label, usize> = BTreeMap::new();
        for p in &self.pieces {
            for l in p.ends() {
                *count.entry(l).or_default() += 1;
            }
        }
        count.into_iter().filter(|(_, c)| *c == 1).map(|(l, _)| l).collect()
    }

    pub fn crossings(&self) -> usize {
        self.pieces.iter().filter(|p| matches!(p, Piece::Crossing { .. })).count()
    }

    pub fn max_label(&self) -> Label {
        let mut m = 0;
        for p in &self.pieces {
            for l in p.ends() {
                m = m.max(l);
            }
        }
        if let Some(levels) = &self.levels {
            for lv in levels {
                for (l, _) in lv {
                    m = m.max(*l);
                }
            }
        }
        m
    }

    /// Components as label sets, ordered by their smallest label.
    pub fn components(&self) -> Vec<BTreeSet<Label>> {
        let mut parent: BTreeMap<Label, Label> = BTreeMap::new();
        fn find(p: &mut BTreeMap<Label, Label>, x: Label) -> Label {
            let mut r = x;
            while let Some(&q) = p.get(&r) {
                if q == r {
                    break;
                }
                r = q;
            }
            p.insert(x, r);
            r
        }
        for piece in &self.pieces {
            for l in piece.ends() {
                parent.entry(l).or_insert(l);
            }
            for (a, b) in piece.strand_pairs() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    let (lo, hi) = (ra.min(rb), ra.max(rb));
                    parent.insert(hi, lo);
                }
            }
        }
        let labels: Vec<Label> = parent.keys().copied().collect();
        let mut groups: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
        for l in labels {
            let r = find(&mut parent, l);
            groups.entry(r).or_default().insert(l);
        }
        let mut out: Vec<BTreeSet<Label>> = groups.into_values().collect();
        out.sort_by_key(|s| *s.iter().next().unwrap());
        out
    }

    pub fn component_of(&self, l: Label) -> Option<usize> {
        self.components().iter().position(|c| c.contains(&l))
    }

    /// Writhe of each component (sum of signs of its self-crossings).
    pub fn writhes(&self) -> Vec<i64> {
        let comps = self.components();
        let mut w = vec![0; comps.len()];
        for p in &self.pieces {
            if let Piece::Crossing { strands, sign, .. } = p {
                let a = comps.iter().position(|c| c.contains(&strands[0].0)).unwrap();
                let b = comps.iter().position(|c| c.contains(&strands[1].0)).unwrap();
                if a == b {
                    w[a] += *sign as i64;
                }
            }
        }
        w
    }

    /// Number of closed components.
    pub fn closed_components(&self) -> usize {
        let bd: BTreeSet<Label> = self.boundary().into_iter().collect();
        self.components().iter().filter(|c| c.is_disjoint(&bd)).count()
    }

    /// The mirror image: every crossing changes sign and its resolutions swap.
    pub fn mirror(&self) -> Diagram {
        let pieces = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Crossing { zero, one, strands, sign } => {
                    Piece::Crossing { zero: *one, one: *zero, strands: *strands, sign: -sign }
                }
                a => a.clone(),
            })
            .collect();
        Diagram { pieces, levels: self.levels.clone(), framings: self.framings.iter().map(|f| -f).collect() }
    }

    /// Order in which to tensor pieces: word order, or for unstructured diagrams a
    /// greedy order maximizing glued endpoints.
    fn scan_order(&self) -> Vec<usize> {
        if self.levels.is_some() {
            return (0..self.pieces.len()).collect();
        }
        let n = self.pieces.len();
        let mut done = vec![false; n];
        let mut open: BTreeSet<Label> = BTreeSet::new();
        let mut order = vec![];
        for _ in 0..n {
            let mut best = None;
            let mut best_score = i64::MIN;
            for (i, p) in self.pieces.iter().enumerate() {
                if done[i] {
                    continue;
                }
                let ends = p.ends();
                let shared = ends.iter().filter(|l| open.contains(l)).count() as i64;
                let score = 2 * shared - ends.len() as i64;
                if score > best_score {
                    best_score = score;
                    best = Some(i);
                }
            }
            let i = best.unwrap();
            done[i] = true;
            for l in self.pieces[i].ends() {
                if !open.remove(&l) {
                    open.insert(l);
                }
            }
            order.push(i);
        }
        order
    }

    /// The minimal Khovanov complex, built by tensoring pieces one at a time and
    /// simplifying after each step.
    pub fn khovanov_complex(&self, field: Field) -> Complex {
        let mut c = Complex::unit(field);
        for i in self.scan_order() {
            let t = tensor(&c, &self.pieces[i].complex(field));
            c = simplify(&t, false).complex.trim();
        }
        c
    }

    /// Unsimplified cube of resolutions (for small diagrams and tests).
    pub fn raw_complex(&self, field: Field) -> Complex {
        let mut c = Complex::unit(field);
        for i in self.scan_order() {
            c = tensor(&c, &self.pieces[i].complex(field));
        }
        c
    }

    /// Cut the strand through `label` into two open ends: `label` stays with its
    /// first piece and a fresh label replaces it in the second.
    pub fn cut(&self, label: Label) -> Result<(Diagram, Label)> {
        let fresh = self.max_label() + 1;
        let mut seen = false;
        let mut pieces = vec![];
        for p in &self.pieces {
            if p.ends().contains(&label) {
                if seen {
                    pieces.push(p.relabel(&|l| if l == label { fresh } else { l }));
                    continue;
                }
                seen = true;
            }
            pieces.push(p.clone());
        }
        if !seen {
            return Err(Error::Word(format!("label {label} not in diagram")));
        }
        Ok((Diagram { pieces, levels: None, framings: self.framings.clone() }, fresh))
    }

    /// Parse a PD code such as `PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]`.
    pub fn from_pd(text: &str) -> Result<Diagram> {
        let crossings = parse_pd(text)?;
        let mut pieces = vec![];
        let mut next = crossings.iter().flatten().copied().max().unwrap_or(0) + 1;
        let mut count: BTreeMap<Label, usize> = BTreeMap::new();
        for x in &crossings {
            for l in x {
                *count.entry(*l).or_default() += 1;
            }
        }
        if let Some((l, c)) = count.iter().find(|(_, c)| **c != 2) {
            return Err(Error::Parse { line: 1, msg: format!("edge {l} appears {c} times") });
        }
        for orig in &crossings {
            let mut x = *orig;
            // an edge joining a crossing to itself gets a second label and an arc
            for k in 0..4 {
                if x[..k].contains(&x[k]) {
                    pieces.push(Piece::Arc(x[k], next));
                    x[k] = next;
                    next += 1;
                }
            }
            let [i, j, k, l] = x;
            // the over strand runs l -> j when j follows l
            let (oj, ol) = (orig[1], orig[3]);
            let positive = oj as i64 - ol as i64 == 1 || ol as i64 - oj as i64 > 1;
            pieces.push(Piece::Crossing {
                zero: [(i, j), (k, l)],
                one: [(i, l), (j, k)],
                strands: [(i, k), (j, l)],
                sign: if positive { 1 } else { -1 },
            });
        }
        Ok(Diagram { pieces, levels: None, framings: vec![] })
    }

    /// Convert to PD notation: one `(zero-resolution pairs)` per crossing. Arcs are
    /// contracted away; only available for closed diagrams where every component
    /// has a crossing.
    pub fn crossing_states(&self) -> Vec<Piece> {
        self.pieces.iter().filter(|p| matches!(p, Piece::Crossing { .. })).cloned().collect()
    }
}

fn parse_pd(text: &str) -> Result<Vec<[Label; 4]>> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.strip_prefix("PD").unwrap_or(&t);
    let t = t.trim_start_matches(['[', '(']).trim_end_matches([']', ')']);
    let mut out = vec![];
    for chunk in t.split(['X', 'x']).filter(|c| !c.is_empty()) {
        let inner = chunk.trim_matches(|c: char| !c.is_ascii_digit());
        let nums: Vec<&str> = inner.split(|c: char| !c.is_ascii_digit()).filter(|s| !s.is_empty()).collect();
        if nums.len() != 4 {
            return Err(Error::Parse { line: 1, msg: format!("crossing '{chunk}' needs four edges") });
        }
        let mut x = [0 as Label; 4];
        for (k, n) in nums.iter().enumerate() {
            x[k] = n.parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad edge '{n}'") })?;
        }
        out.push(x);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no crossings".into() });
    }
    Ok(out)
}
