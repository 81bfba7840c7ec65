//! Movies of tangle cobordisms and their chain maps.
//!
//! A frame replaces a window of consecutive generators of a closed word. The
//! induced map on the cube of resolutions is the local map on the window glued
//! to the identity cobordism elsewhere; it is transported to the simplified
//! complexes through the equivalences recorded by simplification.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::cobcat::{canonicalize, FlatTangle, Label, Loops, Mark, Mor, RawCob, RawComponent};
use crate::complex::{isotopy_equivalence, simplify, tensor_indexed, ChainMap, Complex};
use crate::error::{Error, Result};
use crate::field::Field;

use super::word::{CrossKind, Gen, TangleWord};
use super::Piece;

/// One elementary move of a movie. `level` counts generators from the bottom;
/// `at` is a position in the row at that level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    /// A small circle appears between positions `at - 1` and `at`.
    Birth { level: usize, at: usize },
    /// The circle formed by `cup at` and `cap at` at `level`, `level + 1` dies.
    Death { level: usize },
    /// Two antiparallel strands at `at`, `at + 1` are joined by a saddle; if the
    /// word has `cap at` followed by `cup at` there, the saddle undoes them.
    Saddle { level: usize, at: usize },
    /// `dots` dots on the strand at position `at`.
    Dot { level: usize, at: usize, dots: usize },
    /// A kink on the strand at `at`.
    R1 { level: usize, at: usize, kind: CrossKind },
    /// A cancelling pair of crossings on strands `at`, `at + 1`.
    R2 { level: usize, at: usize, kind: CrossKind },
    /// `x at, x at+1, x at` becomes `x at+1, x at, x at+1` (or back).
    R3 { level: usize },
    /// Replace `remove` generators by `insert`; the two sides must be isotopic.
    Isotopy { level: usize, remove: usize, insert: Vec<Gen> },
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = |c: &CrossKind| if *c == CrossKind::Plus { "+" } else { "-" };
        match self {
            Frame::Birth { level, at } => write!(f, "birth {level} {at}"),
            Frame::Death { level } => write!(f, "death {level}"),
            Frame::Saddle { level, at } => write!(f, "saddle {level} {at}"),
            Frame::Dot { level, at, dots } => write!(f, "dot {level} {at} {dots}"),
            Frame::R1 { level, at, kind } => write!(f, "r1{} {level} {at}", k(kind)),
            Frame::R2 { level, at, kind } => write!(f, "r2{} {level} {at}", k(kind)),
            Frame::R3 { level } => write!(f, "r3 {level}"),
            Frame::Isotopy { level, remove, insert } => {
                let gens: Vec<String> = insert.iter().map(|g| g.to_string()).collect();
                write!(f, "iso {level} {remove} : {}", gens.join("; "))
            }
        }
    }
}

/// A movie starting from a closed word.
#[derive(Clone, Debug)]
pub struct Movie {
    pub start: TangleWord,
    pub frames: Vec<Frame>,
}

impl Movie {
    pub fn identity(start: TangleWord) -> Self {
        Movie { start, frames: vec![] }
    }

    /// Frames, one per line: `birth L A`, `death L`, `saddle L A`, `dot L A [D]`,
    /// `r1+ L A`, `r1- L A`, `r2+ L A`, `r2- L A`, `r3 L`,
    /// `iso L N : gen; gen; ...`. `#` starts a comment.
    /// The word before each frame and after the last, without computing maps.
    pub fn words(&self) -> Result<Vec<TangleWord>> {
        let mut out = vec![self.start.clone()];
        for (i, f) in self.frames.iter().enumerate() {
            let w = resolve(out.last().unwrap(), f, i)?;
            let next = apply(out.last().unwrap(), &w);
            out.push(next);
        }
        Ok(out)
    }

    /// Euler characteristic of the traced surface.
    pub fn euler_characteristic(&self) -> i64 {
        self.frames
            .iter()
            .map(|f| match f {
                Frame::Birth { .. } | Frame::Death { .. } => 1,
                Frame::Saddle { .. } => -1,
                _ => 0,
            })
            .sum()
    }

    pub fn parse_frames(text: &str) -> Result<Vec<Frame>> {
        let mut out = vec![];
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() || line == "identity" {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: n + 1, msg: msg.to_string() };
            let (head, tail) = match line.split_once(':') {
                Some((h, t)) => (h.trim(), Some(t)),
                None => (line, None),
            };
            let t: Vec<&str> = head.split_whitespace().collect();
            let num = |i: usize| -> Result<usize> {
                t.get(i).ok_or_else(|| bad("missing argument"))?.parse::<usize>().map_err(|_| bad("expected a number"))
            };
            let frame = match t[0] {
                "birth" => Frame::Birth { level: num(1)?, at: num(2)? },
                "death" => Frame::Death { level: num(1)? },
                "saddle" => Frame::Saddle { level: num(1)?, at: num(2)? },
                "dot" => Frame::Dot { level: num(1)?, at: num(2)?, dots: if t.len() > 3 { num(3)? } else { 1 } },
                "r1+" | "r1-" => Frame::R1 { level: num(1)?, at: num(2)?, kind: if t[0].ends_with('+') { CrossKind::Plus } else { CrossKind::Minus } },
                "r2+" | "r2-" => Frame::R2 { level: num(1)?, at: num(2)?, kind: if t[0].ends_with('+') { CrossKind::Plus } else { CrossKind::Minus } },
                "r3" => Frame::R3 { level: num(1)? },
                "iso" => {
                    let body = tail.ok_or_else(|| bad("iso needs ': generators'"))?;
                    let gens = body
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_gen(s).ok_or_else(|| bad(&format!("bad generator '{s}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    Frame::Isotopy { level: num(1)?, remove: num(2)?, insert: gens }
                }
                other => return Err(bad(&format!("unknown frame '{other}'"))),
            };
            out.push(frame);
        }
        Ok(out)
    }
}

fn parse_gen(s: &str) -> Option<Gen> {
    let t: Vec<&str> = s.split_whitespace().collect();
    let at = t.get(1)?.parse().ok()?;
    let g = match (t[0], t.get(2)) {
        ("cup", None) => Gen::Cup { at, rev: false },
        ("cup", Some(&"rev")) => Gen::Cup { at, rev: true },
        ("cap", None) => Gen::Cap { at },
        ("x+", None) => Gen::Cross { at, kind: CrossKind::Plus },
        ("x-", None) => Gen::Cross { at, kind: CrossKind::Minus },
        _ => return None,
    };
    Some(g)
}

/// The local part of a frame.
#[derive(Clone, Debug)]
enum Local {
    /// A fixed cobordism of the given enriched degree between crossingless windows.
    Birth,
    Death,
    Saddle,
    Dot { at: usize, dots: usize },
    Isotopy,
}

/// A frame resolved against a word: the window and its replacement.
#[derive(Clone, Debug)]
struct Window {
    level: usize,
    remove: usize,
    insert: Vec<Gen>,
    local: Local,
}

fn row_at(word: &TangleWord, level: usize) -> Result<Vec<Mark>> {
    Ok(TangleWord::new(word.source.clone(), word.gens[..level].to_vec()).target()?.0)
}

fn resolve(word: &TangleWord, frame: &Frame, index: usize) -> Result<Window> {
    let bad = |msg: String| Error::Frame { frame: index, msg };
    let level = match frame {
        Frame::Birth { level, .. }
        | Frame::Death { level }
        | Frame::Saddle { level, .. }
        | Frame::Dot { level, .. }
        | Frame::R1 { level, .. }
        | Frame::R2 { level, .. }
        | Frame::R3 { level }
        | Frame::Isotopy { level, .. } => *level,
    };
    if level > word.gens.len() {
        return Err(bad(format!("level {level} beyond the word")));
    }
    let row = row_at(word, level).map_err(|e| bad(e.to_string()))?;
    let gens = &word.gens;
    let w = match frame {
        Frame::Birth { at, .. } => {
            if *at > row.len() {
                return Err(bad("position out of range".into()));
            }
            Window { level, remove: 0, insert: vec![Gen::Cup { at: *at, rev: false }, Gen::Cap { at: *at }], local: Local::Birth }
        }
        Frame::Death { .. } => match (gens.get(level), gens.get(level + 1)) {
            (Some(Gen::Cup { at: a, .. }), Some(Gen::Cap { at: b })) if a == b => Window { level, remove: 2, insert: vec![], local: Local::Death },
            _ => return Err(bad("death needs 'cup i' directly followed by 'cap i'".into())),
        },
        Frame::Saddle { at, .. } => {
            if let (Some(Gen::Cap { at: a }), Some(Gen::Cup { at: b, .. })) = (gens.get(level), gens.get(level + 1)) {
                if a == at && b == at {
                    return Ok(Window { level, remove: 2, insert: vec![], local: Local::Saddle });
                }
            }
            if at + 1 >= row.len() || row[*at] == row[at + 1] {
                return Err(bad("saddle needs two antiparallel strands".into()));
            }
            let rev = row[*at] == Mark::Down;
            Window { level, remove: 0, insert: vec![Gen::Cap { at: *at }, Gen::Cup { at: *at, rev }], local: Local::Saddle }
        }
        Frame::Dot { at, dots, .. } => {
            if *at >= row.len() {
                return Err(bad("position out of range".into()));
            }
            Window { level, remove: 0, insert: vec![], local: Local::Dot { at: *at, dots: *dots } }
        }
        Frame::R1 { at, kind, .. } => {
            if *at >= row.len() {
                return Err(bad("position out of range".into()));
            }
            let rev = row[*at] == Mark::Down;
            let insert = vec![Gen::Cup { at: at + 1, rev }, Gen::Cross { at: *at, kind: *kind }, Gen::Cap { at: at + 1 }];
            Window { level, remove: 0, insert, local: Local::Isotopy }
        }
        Frame::R2 { at, kind, .. } => {
            if at + 1 >= row.len() {
                return Err(bad("position out of range".into()));
            }
            let insert = vec![Gen::Cross { at: *at, kind: *kind }, Gen::Cross { at: *at, kind: kind.flip() }];
            Window { level, remove: 0, insert, local: Local::Isotopy }
        }
        Frame::R3 { .. } => match (gens.get(level), gens.get(level + 1), gens.get(level + 2)) {
            (Some(Gen::Cross { at: a, kind: k1 }), Some(Gen::Cross { at: b, kind: k2 }), Some(Gen::Cross { at: c, kind: k3 }))
                if a == c && (*b == a + 1 || b + 1 == *a) && k1 == k3 =>
            {
                let insert = vec![Gen::Cross { at: *b, kind: *k3 }, Gen::Cross { at: *a, kind: *k2 }, Gen::Cross { at: *b, kind: *k1 }];
                Window { level, remove: 3, insert, local: Local::Isotopy }
            }
            _ => return Err(bad("r3 needs three crossings x i, x i±1, x i".into())),
        },
        Frame::Isotopy { remove, insert, .. } => {
            if level + remove > gens.len() {
                return Err(bad("window beyond the word".into()));
            }
            Window { level, remove: *remove, insert: insert.clone(), local: Local::Isotopy }
        }
    };
    Ok(w)
}

fn apply(word: &TangleWord, w: &Window) -> TangleWord {
    let mut gens = word.gens[..w.level].to_vec();
    gens.extend(w.insert.iter().cloned());
    gens.extend_from_slice(&word.gens[w.level + w.remove..]);
    TangleWord { source: word.source.clone(), gens, framings: word.framings.clone() }
}

/// Per object of a raw cube complex: which crossings take their 1-resolution,
/// and one label on each circle (in circle order).
#[derive(Clone, Debug)]
pub(crate) struct CubeObject {
    pub bits: u64,
    pub reps: Vec<Label>,
}

/// The unsimplified complex of a list of pieces with cube bookkeeping.
#[derive(Clone)]
pub(crate) struct Cube {
    pub complex: Complex,
    pub info: BTreeMap<(i32, usize), CubeObject>,
    pub by_bits: HashMap<u64, (i32, usize)>,
}

impl Cube {
    pub fn new(pieces: &[Piece], field: Field) -> Cube {
        let mut c = Complex::unit(field);
        let mut info = BTreeMap::new();
        info.insert((0, 0), CubeObject { bits: 0, reps: vec![] });
        let mut ncross = 0;
        for p in pieces {
            let pc = p.complex(field);
            let (t, index) = tensor_indexed(&c, &pc);
            let mut next = BTreeMap::new();
            for (&(hc, x, he, y), &(h, pos)) in &index {
                let prev = &info[&(hc, x)];
                let mut bits = prev.bits;
                if matches!(p, Piece::Crossing { .. }) && he > pc.hmin {
                    bits |= 1 << ncross;
                }
                let (_, origins) = FlatTangle::glue(&c.degree_objs(hc)[x].tangle, &pc.degree_objs(he)[y].tangle);
                let reps = origins
                    .iter()
                    .map(|o| match o {
                        crate::cobcat::CircleOrigin::Left(i) => prev.reps[*i],
                        crate::cobcat::CircleOrigin::Through(l) => *l,
                        crate::cobcat::CircleOrigin::Right(_) => unreachable!("pieces carry no circles"),
                    })
                    .collect();
                next.insert((h, pos), CubeObject { bits, reps });
            }
            if matches!(p, Piece::Crossing { .. }) {
                ncross += 1;
            }
            c = t;
            info = next;
        }
        let by_bits = info.iter().map(|(k, v)| (v.bits, *k)).collect();
        Cube { complex: c, info, by_bits }
    }
}

/// Arcs of the resolution of `pieces` where crossing `k` (in order) uses bit `k` of `bits`.
fn resolution(pieces: &[Piece], bits: u64) -> Vec<(Label, Label)> {
    let mut out = vec![];
    let mut k = 0;
    for p in pieces {
        match p {
            Piece::Arc(a, b) => out.push((*a, *b)),
            Piece::Crossing { zero, one, .. } => {
                out.extend(if bits >> k & 1 == 1 { one } else { zero });
                k += 1;
            }
        }
    }
    out
}

fn crossing_count(pieces: &[Piece]) -> usize {
    pieces.iter().filter(|p| matches!(p, Piece::Crossing { .. })).count()
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Circle id of every label for a closed set of arcs.
fn circles_of(arcs: &[(Label, Label)]) -> HashMap<Label, usize> {
    let mut idx: HashMap<Label, usize> = HashMap::new();
    for &(a, b) in arcs {
        let n = idx.len();
        idx.entry(a).or_insert(n);
        let n = idx.len();
        idx.entry(b).or_insert(n);
    }
    let mut dsu = Dsu::new(idx.len());
    for &(a, b) in arcs {
        dsu.union(idx[&a], idx[&b]);
    }
    let keys: Vec<Label> = idx.keys().copied().collect();
    keys.into_iter().map(|l| (l, dsu.find(idx[&l]))).collect()
}

/// One side of a glued cobordism: the window object and the global object.
pub(crate) struct Side<'a> {
    pub window: &'a FlatTangle,
    pub window_reps: &'a [Label],
    pub window_arcs: &'a [(Label, Label)],
    pub global_reps: &'a [Label],
}

/// The cobordism between two closed resolutions that is `local` (a morphism
/// between the window objects) inside the window and the identity on the
/// `outside` arcs, shared by both resolutions.
pub(crate) fn glue_cobordism(outside: &[(Label, Label)], s: &Side, t: &Side, local: &Mor) -> Mor {
    if local.is_zero() {
        return Mor::zero();
    }
    let loops = Loops::new(s.window, t.window);
    let no = outside.len();
    let nodes = no + loops.count;
    let mut dsu = Dsu::new(nodes);
    let mut incident: HashMap<Label, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in outside.iter().enumerate() {
        incident.entry(a).or_default().push(i);
        incident.entry(b).or_default().push(i);
    }
    for &e in s.window.ends() {
        incident.entry(e).or_default().push(no + loops.of_label(s.window, e));
    }
    let mut glued = vec![];
    for v in incident.values() {
        debug_assert_eq!(v.len(), 2, "every point joins two pieces");
        dsu.union(v[0], v[1]);
        glued.push(v[0]);
    }
    let mut euler: HashMap<usize, i64> = HashMap::new();
    for n in 0..nodes {
        *euler.entry(dsu.find(n)).or_default() += 1;
    }
    for n in glued {
        *euler.entry(dsu.find(n)).or_default() -= 1;
    }
    // node of every global circle
    let mut node_of = |side: &Side, circle0: usize| -> Vec<usize> {
        let mut arcs = outside.to_vec();
        arcs.extend_from_slice(side.window_arcs);
        let circ = circles_of(&arcs);
        let mut node: HashMap<usize, usize> = HashMap::new();
        for (i, (a, _)) in outside.iter().enumerate() {
            node.entry(circ[a]).or_insert(i);
        }
        for (j, r) in side.window_reps.iter().enumerate() {
            node.entry(circ[r]).or_insert(no + circle0 + j);
        }
        side.global_reps.iter().map(|r| dsu.find(node[&circ[r]])).collect()
    };
    let s_nodes = node_of(s, loops.s_circle0);
    let t_nodes = node_of(t, loops.t_circle0);
    let ns = s_nodes.len();
    let mut comp_loops: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, r) in s_nodes.iter().enumerate() {
        comp_loops.entry(*r).or_default().push(k);
    }
    for (k, r) in t_nodes.iter().enumerate() {
        comp_loops.entry(*r).or_default().push(ns + k);
    }
    let roots: Vec<usize> = comp_loops.keys().copied().collect();
    let mut raws = vec![];
    for (mask, c) in local.terms() {
        let mut dots: HashMap<usize, usize> = HashMap::new();
        for i in 0..loops.count {
            if mask >> i & 1 == 1 {
                *dots.entry(dsu.find(no + i)).or_default() += 1;
            }
        }
        let components = roots
            .iter()
            .map(|r| {
                let b = comp_loops[r].len() as i64;
                let g = 2 - euler[r] - b;
                debug_assert!(g >= 0 && g % 2 == 0, "bad genus");
                RawComponent { loops: comp_loops[r].clone(), genus: (g / 2) as usize, dots: dots.get(r).copied().unwrap_or(0) }
            })
            .collect();
        raws.push(RawCob { coef: c.clone(), components });
    }
    canonicalize(&raws)
}

/// A closed word with its cube and simplification data.
pub struct Resolved {
    pub word: TangleWord,
    pub pieces: Vec<Piece>,
    pub(crate) cube: Cube,
    /// simplified complex
    pub complex: Complex,
    forward: ChainMap,
    backward: ChainMap,
}

impl Resolved {
    pub fn new(word: &TangleWord, field: Field) -> Result<Resolved> {
        if !word.source.is_empty() || !word.target()?.is_empty() {
            return Err(Error::NotClosed(word.source.len() + word.target()?.len()));
        }
        let d = word.diagram()?;
        if crossing_count(&d.pieces) > MAX_CROSSINGS {
            return Err(Error::Word("too many crossings for a movie".into()));
        }
        let cube = Cube::new(&d.pieces, field);
        let s = simplify(&cube.complex, true);
        Ok(Resolved {
            word: word.clone(),
            pieces: d.pieces,
            cube,
            complex: s.complex,
            forward: s.forward.unwrap(),
            backward: s.backward.unwrap(),
        })
    }

    /// Transport a map between cubes to the simplified complexes.
    pub(crate) fn transport(&self, raw: &ChainMap, target: &Resolved) -> ChainMap {
        self.backward.then(raw).then(&target.forward)
    }
}

/// Cubes are built in full, so movies stay small.
pub const MAX_CROSSINGS: usize = 18;

const TOP: Label = 1 << 28;
const SHIFT: Label = 1 << 29;

/// Relabelling of a word around a window: prefix labels kept, the row above the
/// window renamed to `TOP + i`, labels created later moved to `SHIFT + ...`.
struct Model {
    prefix: Vec<Piece>,
    window: Vec<Piece>,
    suffix: Vec<Piece>,
    /// original label -> model label
    lambda: HashMap<Label, Label>,
    crossings: (usize, usize, usize),
}

fn model(pieces: &[Piece], levels: &[Vec<(Label, Mark)>], level: usize, len: usize) -> Model {
    let bottom: Vec<Label> = levels[level].iter().map(|x| x.0).collect();
    let top: Vec<Label> = levels[level + len].iter().map(|x| x.0).collect();
    let mut created_before = bottom.iter().copied().max().map_or(0, |m| m + 1);
    for p in &pieces[..level + len] {
        for l in p.ends() {
            created_before = created_before.max(l + 1);
        }
    }
    let mut lambda: HashMap<Label, Label> = HashMap::new();
    for p in pieces {
        for l in p.ends() {
            lambda.insert(l, l);
        }
    }
    for (i, &l) in top.iter().enumerate() {
        if !bottom.contains(&l) {
            lambda.insert(l, TOP + i as Label);
        }
    }
    for l in lambda.clone().keys() {
        if *l >= created_before {
            lambda.insert(*l, l - created_before + SHIFT);
        }
    }
    let prefix = pieces[..level].to_vec();
    let mut window: Vec<Piece> = pieces[level..level + len].iter().map(|p| p.relabel(&|l| lambda[&l])).collect();
    for (i, &l) in top.iter().enumerate() {
        if bottom.contains(&l) {
            window.push(Piece::Arc(l, TOP + i as Label));
        }
    }
    let top_map: HashMap<Label, Label> = top.iter().enumerate().map(|(i, &l)| (l, TOP + i as Label)).collect();
    let suffix = pieces[level + len..].iter().map(|p| p.relabel(&|l| top_map.get(&l).copied().unwrap_or(lambda[&l]))).collect();
    let crossings = (crossing_count(&pieces[..level]), crossing_count(&pieces[level..level + len]), crossing_count(&pieces[level + len..]));
    Model { prefix, window, suffix, lambda, crossings }
}

fn split_bits(bits: u64, (p, w, _): (usize, usize, usize)) -> (u64, u64, u64) {
    let mask = |n: usize| if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    (bits & mask(p), (bits >> p) & mask(w), bits >> (p + w))
}

/// The local chain map of a window frame on the window cubes.
fn local_map(w: &Window, s: &Cube, t: &Cube, s_pieces: &[Piece], field: Field) -> Result<ChainMap> {
    let (mor, qshift) = match &w.local {
        Local::Isotopy => {
            let a = simplify(&s.complex, true);
            let b = simplify(&t.complex, true);
            let iso = isotopy_equivalence(&a.complex, &b.complex)?;
            return Ok(a.forward.unwrap().then(&iso).then(&b.backward.unwrap()));
        }
        Local::Birth | Local::Death | Local::Saddle => {
            let q = match w.local {
                Local::Saddle => 1,
                _ => -1,
            };
            single(s)?;
            single(t)?;
            (Mor::basis(0, field.one()), q)
        }
        Local::Dot { at, dots } => {
            let ts = single(s)?;
            // the strand at `at` starts at the `at`-th label of the window bottom
            let bottom = window_bottom(s_pieces, *at)?;
            let mut m = Mor::identity(ts, field);
            let dot = Mor::dot_at(ts, bottom, field);
            for _ in 0..*dots {
                m = crate::cobcat::compose(ts, ts, ts, &m, &dot);
            }
            (m, 2 * *dots as i32)
        }
    };
    let mut f = ChainMap::zero(s.complex.clone(), t.complex.clone(), 0, qshift);
    f.set(0, 0, 0, mor);
    Ok(f)
}

fn single(c: &Cube) -> Result<&FlatTangle> {
    if c.complex.len() != 1 || c.complex.degree_objs(0).len() != 1 {
        return Err(Error::Word("window is not crossingless".into()));
    }
    Ok(&c.complex.degree_objs(0)[0].tangle)
}

/// Label of the `at`-th point of the window's bottom row: the window of a
/// crossingless frame consists of identity arcs `(bottom, TOP + i)`.
fn window_bottom(pieces: &[Piece], at: usize) -> Result<Label> {
    for p in pieces {
        if let Piece::Arc(a, b) = p {
            if *b == TOP + at as Label {
                return Ok(*a);
            }
        }
    }
    Err(Error::Word("dot position not found".into()))
}

/// The chain map of one frame between the cubes of `before` and `after`.
fn frame_cube_map(before: &Resolved, after: &Resolved, w: &Window, field: Field) -> Result<ChainMap> {
    let (db, da) = (before.word.diagram()?, after.word.diagram()?);
    let (lb, la) = (db.levels.as_ref().unwrap(), da.levels.as_ref().unwrap());
    let mb = model(&before.pieces, lb, w.level, w.remove);
    let ma = model(&after.pieces, la, w.level, w.insert.len());
    debug_assert_eq!(mb.prefix, ma.prefix);
    debug_assert_eq!(mb.suffix, ma.suffix);
    let ws = Cube::new(&mb.window, field);
    let wt = Cube::new(&ma.window, field);
    let local = local_map(w, &ws, &wt, &mb.window, field)?;
    let mut out = ChainMap::zero(before.cube.complex.clone(), after.cube.complex.clone(), 0, local.qshift);
    let ws_objs: HashMap<(i32, usize), (Vec<(Label, Label)>, &CubeObject)> =
        ws.info.iter().map(|(k, o)| (*k, (resolution(&mb.window, o.bits), o))).collect();
    let wt_objs: HashMap<(i32, usize), (Vec<(Label, Label)>, &CubeObject)> =
        wt.info.iter().map(|(k, o)| (*k, (resolution(&ma.window, o.bits), o))).collect();
    for ((h, i), obj) in &before.cube.info {
        let (pre, win, suf) = split_bits(obj.bits, mb.crossings);
        let (wh, wi) = ws.by_bits[&win];
        let Some(row) = local.comps.get(&wh).map(|m| &m[wi]) else { continue };
        let mut outside = resolution(&mb.prefix, pre);
        outside.extend(resolution(&mb.suffix, suf));
        let s_reps: Vec<Label> = obj.reps.iter().map(|r| mb.lambda[r]).collect();
        let (s_arcs, s_obj) = &ws_objs[&(wh, wi)];
        let s_side = Side { window: &ws.complex.degree_objs(wh)[wi].tangle, window_reps: &s_obj.reps, window_arcs: s_arcs, global_reps: &s_reps };
        for (t, m) in row {
            let th = wh + local.hshift;
            let (t_arcs, t_obj) = &wt_objs[&(th, *t)];
            let (p, wn, _) = ma.crossings;
            let bits = pre | (t_obj.bits << p) | (suf << (p + wn));
            let (gh, gi) = after.cube.by_bits[&bits];
            debug_assert_eq!(gh, *h);
            let g = &after.cube.info[&(gh, gi)];
            let t_reps: Vec<Label> = g.reps.iter().map(|r| ma.lambda[r]).collect();
            let t_side = Side { window: &wt.complex.degree_objs(th)[*t].tangle, window_reps: &t_obj.reps, window_arcs: t_arcs, global_reps: &t_reps };
            let mor = glue_cobordism(&outside, &s_side, &t_side, m);
            out.add_to(*h, *i, gi, mor);
        }
    }
    Ok(out)
}

/// The result of running a movie: simplified complexes of the first and last
/// words and the induced map between them.
pub struct MovieMap {
    pub source: Complex,
    pub target: Complex,
    pub target_word: TangleWord,
    pub map: ChainMap,
}

/// The chain map induced by a movie on simplified Khovanov complexes.
pub fn movie_to_chainmap(movie: &Movie, field: Field) -> Result<MovieMap> {
    let first = Resolved::new(&movie.start, field)?;
    let mut total = ChainMap::identity(&first.complex);
    let source = first.complex.clone();
    let mut cur = first;
    for (k, frame) in movie.frames.iter().enumerate() {
        let w = resolve(&cur.word, frame, k)?;
        let next_word = apply(&cur.word, &w);
        next_word.target().map_err(|e| Error::Frame { frame: k, msg: e.to_string() })?;
        let next = Resolved::new(&next_word, field)?;
        let raw = frame_cube_map(&cur, &next, &w, field).map_err(|e| match e {
            Error::NoEquivalence(m) => Error::Frame { frame: k, msg: format!("sides are not isotopic ({m})") },
            other => other,
        })?;
        let step = cur.transport(&raw, &next);
        total = total.then(&step);
        cur = next;
    }
    Ok(MovieMap { source, target: cur.complex.clone(), target_word: cur.word.clone(), map: total })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> TangleWord {
        TangleWord::parse(s).unwrap()
    }

    fn scalar(m: &MovieMap) -> Option<crate::field::Coef> {
        m.map.component(0, 0, 0).and_then(|x| x.coef(0)).cloned()
    }

    #[test]
    fn empty_movie_is_identity() {
        let m = movie_to_chainmap(&Movie::identity(word("cup 0\ncap 0\n")), Field::Rational).unwrap();
        assert_eq!(m.source.len(), 2);
        m.map.check().unwrap();
        for h in m.source.hmin..=m.source.hmax() {
            for i in 0..m.source.degree_objs(h).len() {
                assert_eq!(m.map.component(h, i, i).unwrap().coef(0), Some(&Field::Rational.one()));
            }
        }
    }

    #[test]
    fn sphere_evaluations() {
        let empty = TangleWord::closed(vec![]);
        let plain = Movie { start: empty.clone(), frames: vec![Frame::Birth { level: 0, at: 0 }, Frame::Death { level: 0 }] };
        let m = movie_to_chainmap(&plain, Field::Rational).unwrap();
        assert!(m.map.is_zero());
        let dotted = Movie {
            start: empty,
            frames: vec![Frame::Birth { level: 0, at: 0 }, Frame::Dot { level: 1, at: 0, dots: 1 }, Frame::Death { level: 0 }],
        };
        let m = movie_to_chainmap(&dotted, Field::Rational).unwrap();
        assert_eq!(scalar(&m), Some(Field::Rational.one()));
        assert_eq!(m.map.qshift, 0);
    }

    #[test]
    fn reidemeister_frames_are_invertible() {
        let unknot = word("cup 0\ncap 0\n");
        for frames in [
            vec![Frame::R1 { level: 1, at: 0, kind: CrossKind::Plus }],
            vec![Frame::R1 { level: 1, at: 1, kind: CrossKind::Minus }],
            vec![Frame::R2 { level: 1, at: 0, kind: CrossKind::Plus }],
        ] {
            let m = movie_to_chainmap(&Movie { start: unknot.clone(), frames }, Field::Rational).unwrap();
            m.map.check().unwrap();
            assert_eq!(m.map.hshift, 0);
            assert_eq!(m.map.qshift, 0);
            // identity-like on the two homology classes
            assert_eq!(m.source.object_counts(), m.target.object_counts());
        }
    }

    #[test]
    fn split_then_merge_is_a_torus() {
        let start = word("cup 0\ncap 0\n");
        let frames = vec![Frame::Saddle { level: 1, at: 0 }, Frame::Saddle { level: 1, at: 0 }];
        let m = movie_to_chainmap(&Movie { start: start.clone(), frames: frames[..1].to_vec() }, Field::Rational).unwrap();
        m.map.check().unwrap();
        assert_eq!(m.map.qshift, 1);
        assert_eq!(m.target.len(), 4);
        let m = movie_to_chainmap(&Movie { start, frames }, Field::Rational).unwrap();
        m.map.check().unwrap();
        assert_eq!(m.map.qshift, 2);
        // a torus with one boundary circle on each side is twice the dot
        assert!(!m.map.is_zero());
    }

    #[test]
    fn frames_round_trip_through_text() {
        let frames = vec![
            Frame::Birth { level: 0, at: 0 },
            Frame::Dot { level: 1, at: 1, dots: 1 },
            Frame::R2 { level: 2, at: 0, kind: CrossKind::Minus },
            Frame::Isotopy { level: 0, remove: 2, insert: vec![Gen::Cup { at: 0, rev: true }, Gen::Cap { at: 0 }] },
        ];
        let text: String = frames.iter().map(|f| format!("{f}\n")).collect();
        assert_eq!(Movie::parse_frames(&text).unwrap(), frames);
    }
}
