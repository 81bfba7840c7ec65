//! Complexes over R = k[X]/(X²) coming from (1,1)-tangles: splitting into the
//! indecomposables C_k, the zeroth Hochschild homology of the two-point
//! category, trace classes of endomorphisms, and K₀ lower bounds from braids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cobcat::{BoundaryWord, FlatTangle, Label, Mark, Mor};
use crate::complex::{hom_space, simplify, BigradedDims, ChainMap, Complex, HomSpace, Obj};
use crate::diagram::{movie_to_chainmap, CrossKind, Diagram, Gen, Movie, TangleWord};
use crate::error::{Error, Result};
use crate::field::{Coef, Field};
use crate::linalg::{invert_dense, mul_dense, rank_dense, solve, Echelon, SparseVec};

/// `multiplicity` copies of C_k with its first term in bidegree (hom_shift, q_shift).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CkPattern {
    pub k: usize,
    pub hom_shift: i32,
    pub q_shift: i32,
    pub multiplicity: usize,
}

impl fmt::Display for CkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x C{} [h={}, q={}]", self.multiplicity, self.k, self.hom_shift, self.q_shift)
    }
}

/// `C_k` on the arc `ends`: `R{q} -X-> R{q+2} -X-> ... ` starting in degree `h`.
pub fn pattern_complex(k: usize, h: i32, q: i32, ends: (Label, Label), field: Field) -> Complex {
    let arc = FlatTangle::from_arcs(&[ends], 0).unwrap();
    let objs: Vec<Vec<Obj>> = (0..=k).map(|m| vec![Obj { tangle: arc.clone(), q: q + 2 * m as i32 }]).collect();
    let d = (0..=k)
        .map(|m| {
            let mut row = BTreeMap::new();
            if m < k {
                row.insert(0, Mor::basis(1, field.one()));
            }
            vec![row]
        })
        .collect();
    Complex { field, ends: vec![ends.0.min(ends.1), ends.0.max(ends.1)], hmin: h, objs, d }
}

/// One summand of a decomposition: C_k starting at (h, q), occupying object
/// `slots[m]` of degree `h + m` in the direct sum.
#[derive(Clone, Debug)]
pub struct Block {
    pub k: usize,
    pub h: i32,
    pub q: i32,
    pub slots: Vec<usize>,
}

/// A minimal complex over R written as a direct sum of C_k's.
pub struct Decomposition {
    pub minimal: Complex,
    pub sum: Complex,
    pub blocks: Vec<Block>,
    /// sum -> minimal
    pub from_blocks: ChainMap,
    /// minimal -> sum
    pub to_blocks: ChainMap,
}

impl Decomposition {
    pub fn patterns(&self) -> Vec<CkPattern> {
        let mut count: BTreeMap<(usize, i32, i32), usize> = BTreeMap::new();
        for b in &self.blocks {
            *count.entry((b.k, b.h, b.q)).or_default() += 1;
        }
        count.into_iter().map(|((k, h, q), m)| CkPattern { k, hom_shift: h, q_shift: q, multiplicity: m }).collect()
    }
}

fn pattern_error(c: &Complex, detail: impl Into<String>) -> Error {
    Error::Pattern { objects: c.len(), detail: format!("{}\n{:?}", detail.into(), c) }
}

/// An interval of the persistence-style decomposition: vectors in the
/// coordinates of each degree it occupies.
struct Interval {
    birth: i32,
    vecs: Vec<Vec<Coef>>,
}

/// Split a minimal complex over R into C_k summands. Every differential entry
/// of a minimal complex is a multiple of X, so along each diagonal q - 2h the
/// complex is a chain of vector spaces; its interval decomposition is the
/// C_k decomposition.
pub fn decompose_minimal(c: &Complex) -> Result<Decomposition> {
    let field = c.field;
    if c.ends.len() != 2 {
        return Err(pattern_error(c, format!("expected two endpoints, found {}", c.ends.len())));
    }
    let arc = FlatTangle::from_arcs(&[(c.ends[0], c.ends[1])], 0).unwrap();
    for o in c.objs.iter().flatten() {
        if o.tangle != arc {
            return Err(pattern_error(c, "object is not the single arc"));
        }
    }
    // positions of each (h, diagonal)
    let mut slots: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
    for h in c.hmin..=c.hmax() {
        for (i, o) in c.degree_objs(h).iter().enumerate() {
            slots.entry((o.q - 2 * h, h)).or_default().push(i);
        }
    }
    let diagonals: BTreeSet<i32> = slots.keys().map(|k| k.0).collect();
    let zero = field.zero();
    // X-coefficient matrix from (h, diag) to (h + 1, diag), rows = targets
    let xmat = |h: i32, diag: i32| -> Result<Vec<Vec<Coef>>> {
        let src = slots.get(&(diag, h)).cloned().unwrap_or_default();
        let tgt = slots.get(&(diag, h + 1)).cloned().unwrap_or_default();
        let mut m = vec![vec![zero.clone(); src.len()]; tgt.len()];
        for (j, s) in src.iter().enumerate() {
            for (i, t) in tgt.iter().enumerate() {
                if let Some(e) = c.entry(h, *s, *t) {
                    if e.coef(0).is_some() {
                        return Err(pattern_error(c, "differential has an invertible entry; complex is not minimal"));
                    }
                    if let Some(x) = e.coef(1) {
                        m[i][j] = x.clone();
                    }
                }
            }
        }
        Ok(m)
    };
    // entries between different diagonals cannot occur for degree reasons
    let mut intervals: Vec<(i32, Interval)> = vec![];
    for &diag in &diagonals {
        let mut done: Vec<Interval> = vec![];
        let mut alive: Vec<Interval> = vec![];
        for h in c.hmin..=c.hmax() {
            let n = slots.get(&(diag, h)).map_or(0, |v| v.len());
            // complete the surviving vectors to a basis
            let mut ech = Echelon::new();
            for iv in &alive {
                ech.insert(to_sparse(iv.vecs.last().unwrap()));
            }
            for i in 0..n {
                let mut e = vec![zero.clone(); n];
                e[i] = field.one();
                if ech.insert(to_sparse(&e)) {
                    alive.push(Interval { birth: h, vecs: vec![e] });
                }
            }
            if h == c.hmax() {
                done.append(&mut alive);
                break;
            }
            let a = xmat(h, diag)?;
            alive.sort_by_key(|iv| iv.birth);
            let mut kept: Vec<Interval> = vec![];
            let mut kept_imgs: Vec<SparseVec> = vec![];
            for mut iv in alive.drain(..) {
                let v = iv.vecs.last().unwrap();
                let img: Vec<Coef> = apply_dense(field, &a, v);
                let sp = to_sparse(&img);
                let combo = if sp.is_empty() { Some(SparseVec::new()) } else { solve(field, &kept_imgs, &sp) };
                match combo {
                    Some(x) => {
                        // iv - sum x_k kept_k has zero image and dies here
                        for (k, cf) in &x {
                            let older = &kept[*k];
                            for m in iv.birth..=h {
                                let o = &older.vecs[(m - older.birth) as usize];
                                let t = &mut iv.vecs[(m - iv.birth) as usize];
                                for (ti, oi) in t.iter_mut().zip(o) {
                                    *ti = &*ti - &(cf * oi);
                                }
                            }
                        }
                        done.push(iv);
                    }
                    None => {
                        kept_imgs.push(sp);
                        kept.push(iv);
                    }
                }
            }
            for (mut iv, img) in kept.into_iter().zip(&kept_imgs) {
                let dense = (0..slots.get(&(diag, h + 1)).map_or(0, |v| v.len())).map(|i| img.get(&i).cloned().unwrap_or(zero.clone())).collect();
                iv.vecs.push(dense);
                alive.push(iv);
            }
        }
        intervals.extend(done.into_iter().map(|iv| (diag, iv)));
    }
    // the direct sum and the change of basis
    let ends = (c.ends[0], c.ends[1]);
    let mut sum = Complex { field, ends: c.ends.clone(), hmin: c.hmin, objs: vec![vec![]; c.objs.len()], d: vec![vec![]; c.objs.len()] };
    let mut blocks = vec![];
    intervals.sort_by_key(|(diag, iv)| (iv.vecs.len(), iv.birth, *diag));
    for (diag, iv) in &intervals {
        let k = iv.vecs.len() - 1;
        let q = diag + 2 * iv.birth;
        let mut bslots = vec![];
        for m in 0..=k {
            let deg = (iv.birth - c.hmin) as usize + m;
            sum.objs[deg].push(Obj { tangle: arc.clone(), q: q + 2 * m as i32 });
            sum.d[deg].push(BTreeMap::new());
            bslots.push(sum.objs[deg].len() - 1);
        }
        for m in 0..k {
            let deg = (iv.birth - c.hmin) as usize + m;
            sum.d[deg][bslots[m]].insert(bslots[m + 1], Mor::basis(1, field.one()));
        }
        blocks.push(Block { k, h: iv.birth, q, slots: bslots });
    }
    let _ = ends;
    let mut from_blocks = ChainMap::zero(sum.clone(), c.clone(), 0, 0);
    let mut to_blocks = ChainMap::zero(c.clone(), sum.clone(), 0, 0);
    for ((diag, h), orig) in &slots {
        // columns: block vectors living at (h, diag)
        let mut cols: Vec<(usize, &Vec<Coef>)> = vec![];
        for (b, (d2, iv)) in blocks.iter().zip(&intervals) {
            if d2 == diag && iv.birth <= *h && *h <= iv.birth + b.k as i32 {
                let m = (h - iv.birth) as usize;
                cols.push((b.slots[m], &iv.vecs[m]));
            }
        }
        if cols.len() != orig.len() {
            return Err(pattern_error(c, "interval vectors do not form a basis"));
        }
        // P[i][j] = coordinate i of column j
        let p: Vec<Vec<Coef>> = (0..orig.len()).map(|i| cols.iter().map(|(_, v)| v[i].clone()).collect()).collect();
        let pinv = invert_dense(field, &p).ok_or_else(|| pattern_error(c, "interval vectors are dependent"))?;
        for (j, (slot, _)) in cols.iter().enumerate() {
            for (i, o) in orig.iter().enumerate() {
                from_blocks.add_to(*h, *slot, *o, Mor::basis(0, p[i][j].clone()));
                to_blocks.add_to(*h, *o, *slot, Mor::basis(0, pinv[j][i].clone()));
            }
        }
    }
    Ok(Decomposition { minimal: c.clone(), sum, blocks, from_blocks, to_blocks })
}

fn to_sparse(v: &[Coef]) -> SparseVec {
    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect()
}

fn apply_dense(field: Field, a: &[Vec<Coef>], v: &[Coef]) -> Vec<Coef> {
    let col: Vec<Vec<Coef>> = v.iter().map(|x| vec![x.clone()]).collect();
    if a.is_empty() {
        return vec![];
    }
    mul_dense(field, a, &col).into_iter().map(|r| r[0].clone()).collect()
}

/// Decompose the minimal complex of a (1,1)-tangle diagram. Only C_0 and C_1
/// are expected; anything else is reported.
pub fn decompose_diagram(d: &Diagram, field: Field) -> Result<Decomposition> {
    if d.boundary().len() != 2 {
        return Err(Error::Boundary(format!("a (1,1)-tangle has two endpoints, found {}", d.boundary().len())));
    }
    let c = d.khovanov_complex(field);
    let dec = decompose_minimal(&c)?;
    if let Some(b) = dec.blocks.iter().find(|b| b.k > 1) {
        return Err(pattern_error(&c, format!("summand C{} at ({}, {})", b.k, b.h, b.q)));
    }
    let total: usize = dec.blocks.iter().map(|b| b.k + 1).sum();
    if total != c.len() {
        return Err(pattern_error(&c, "pattern sizes do not add up"));
    }
    Ok(dec)
}

/// Patterns of a (1,1)-tangle word.
pub fn decompose_11(t: &TangleWord, field: Field) -> Result<Vec<CkPattern>> {
    if t.source.len() != 1 || t.target()?.len() != 1 {
        return Err(Error::Boundary(format!("a (1,1)-tangle needs one point at each end, found {} and {}", t.source.len(), t.target()?.len())));
    }
    Ok(decompose_diagram(&t.diagram()?, field)?.patterns())
}

/// Homology of the closure: C_k at (h, q) contributes (h, q - 1) and
/// (h + k, q + 2k + 1); C_0 gives the two classes of a circle.
pub fn closure_homology(patterns: &[CkPattern]) -> BigradedDims {
    let mut out = BigradedDims::new();
    for p in patterns {
        let k = p.k as i32;
        *out.entry((p.hom_shift, p.q_shift - 1)).or_default() += p.multiplicity;
        *out.entry((p.hom_shift + k, p.q_shift + 2 * k + 1)).or_default() += p.multiplicity;
    }
    out
}

/// Basis labels of the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceLabel {
    /// Identity of C_l.
    Id(usize),
    /// X from the last term of C_l to the first term of C_l shifted right by l.
    RX(usize),
    /// Identity of the empty tangle (no boundary points).
    Empty,
}

impl fmt::Display for TraceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceLabel::Id(l) => write!(f, "Id_C{l}"),
            TraceLabel::RX(l) => write!(f, "RX_C{l}"),
            TraceLabel::Empty => write!(f, "Id_empty"),
        }
    }
}

/// A basis class of the trace. Its bidegree is `(-hshift, qshift)` of the
/// endomorphism: a map landing in a copy shifted right by `l` has degree `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HH0Class {
    pub label: TraceLabel,
    pub bidegree: (i32, i32),
}

impl fmt::Display for HH0Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ({}, {})", self.label, self.bidegree.0, self.bidegree.1)
    }
}

const ARC: (Label, Label) = (0, 1);

/// The endomorphism behind a trace label.
pub fn label_endo(label: TraceLabel, field: Field) -> ChainMap {
    match label {
        TraceLabel::Id(l) => ChainMap::identity(&pattern_complex(l, 0, 0, ARC, field)),
        TraceLabel::RX(l) => {
            let c = pattern_complex(l, 0, 0, ARC, field);
            let mut f = ChainMap::zero(c.clone(), c, -(l as i32), 2 * l as i32 + 2);
            f.set(l as i32, 0, 0, Mor::basis(1, field.one()));
            f
        }
        TraceLabel::Empty => ChainMap::identity(&Complex::unit(field)),
    }
}

/// Zeroth Hochschild homology of the full subcategory on a few generators
/// (with all their shifts), in a window of bidegrees.
pub struct Trace {
    field: Field,
    gens: Vec<(Complex, Vec<TraceLabel>)>,
    homs: BTreeMap<(usize, usize, i32, i32), HomSpace>,
    hrange: (i32, i32),
    qrange: (i32, i32),
}

/// Quotient data in one bidegree.
struct Quotient {
    offsets: Vec<usize>,
    dim: usize,
    relations: Vec<SparseVec>,
    classes: Vec<(HH0Class, SparseVec)>,
}

impl Trace {
    /// The category generated by C_l for the given l.
    pub fn patterns(ls: &[usize], field: Field) -> Trace {
        let gens = ls.iter().map(|&l| (pattern_complex(l, 0, 0, ARC, field), vec![TraceLabel::Id(l), TraceLabel::RX(l)])).collect();
        Trace::new(gens, field, (-3, 3), (-8, 8))
    }

    /// The category generated by the empty tangle.
    pub fn empty(field: Field) -> Trace {
        Trace::new(vec![(Complex::unit(field), vec![TraceLabel::Empty])], field, (-2, 2), (-4, 4))
    }

    fn new(gens: Vec<(Complex, Vec<TraceLabel>)>, field: Field, hrange: (i32, i32), qrange: (i32, i32)) -> Trace {
        let mut homs = BTreeMap::new();
        for a in 0..gens.len() {
            for b in 0..gens.len() {
                for h in hrange.0..=hrange.1 {
                    for q in qrange.0..=qrange.1 {
                        let hs = HomSpace::new(&gens[a].0, &gens[b].0, h, q);
                        if hs.dim() > 0 {
                            homs.insert((a, b, h, q), hs);
                        }
                    }
                }
            }
        }
        Trace { field, gens, homs, hrange, qrange }
    }

    fn end_coords(&self, a: usize, f: &ChainMap) -> Option<Vec<Coef>> {
        self.homs.get(&(a, a, f.hshift, f.qshift)).map(|hs| hs.coordinates(f).expect("closed endomorphism"))
    }

    fn quotient(&self, i: i32, j: i32) -> Quotient {
        let field = self.field;
        let mut offsets = vec![];
        let mut dim = 0;
        for a in 0..self.gens.len() {
            offsets.push(dim);
            dim += self.homs.get(&(a, a, i, j)).map_or(0, |h| h.dim());
        }
        let embed = |a: usize, f: &ChainMap| -> SparseVec {
            match self.end_coords(a, f) {
                Some(v) => v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (offsets[a] + k, c)).collect(),
                None => SparseVec::new(),
            }
        };
        let mut relations = vec![];
        if dim > 0 {
            for ((a, b, h1, q1), fs) in &self.homs {
                let Some(gs) = self.homs.get(&(*b, *a, i - h1, j - q1)) else { continue };
                let sign = if (h1 * (i - h1)).rem_euclid(2) == 1 { field.int(-1) } else { field.one() };
                for f in &fs.basis {
                    for g in &gs.basis {
                        let mut r = embed(*a, &f.then(g));
                        crate::linalg::axpy(&mut r, &-&sign, &embed(*b, &g.then(f)));
                        if !r.is_empty() {
                            relations.push(r);
                        }
                    }
                }
            }
        }
        let mut classes = vec![];
        for (a, (_, labels)) in self.gens.iter().enumerate() {
            for &label in labels {
                let e = label_endo(label, field);
                if (e.hshift, e.qshift) == (i, j) {
                    classes.push((HH0Class { label, bidegree: (-i, j) }, embed(a, &e)));
                }
            }
        }
        Quotient { offsets, dim, relations, classes }
    }

    /// Basis of the trace in the window, with the expected labels. Fails if the
    /// labelled classes do not form a basis of some bidegree.
    pub fn classes(&self) -> Result<Vec<HH0Class>> {
        let mut out = vec![];
        for i in self.hrange.0..=self.hrange.1 {
            for j in self.qrange.0..=self.qrange.1 {
                let q = self.quotient(i, j);
                let mut ech = Echelon::new();
                for r in &q.relations {
                    ech.insert(r.clone());
                }
                let qdim = q.dim - ech.rank();
                let mut found = 0;
                for (c, v) in &q.classes {
                    if ech.insert(v.clone()) {
                        out.push(*c);
                        found += 1;
                    }
                }
                if found != qdim {
                    return Err(Error::Presentation(format!(
                        "trace has dimension {qdim} in bidegree ({i}, {j}) but {found} labelled classes are independent there"
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Coordinates of the class of an endomorphism of generator `a`.
    fn class_of(&self, a: usize, f: &ChainMap) -> Result<Vec<(HH0Class, Coef)>> {
        let q = self.quotient(f.hshift, f.qshift);
        let Some(v) = self.end_coords(a, f) else { return Ok(vec![]) };
        let v: SparseVec = v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (q.offsets[a] + k, c)).collect();
        if v.is_empty() {
            return Ok(vec![]);
        }
        let mut cols: Vec<SparseVec> = q.classes.iter().map(|c| c.1.clone()).collect();
        cols.extend(q.relations.iter().cloned());
        let x = solve(self.field, &cols, &v).ok_or_else(|| Error::Presentation("endomorphism outside the span of the trace basis".into()))?;
        Ok(q.classes.iter().enumerate().filter_map(|(k, (c, _))| x.get(&k).map(|cf| (*c, cf.clone()))).collect())
    }
}

/// The trace of the two-point category: classes of Id and RX on C_0 and C_1.
pub fn hh0_two_point(field: Field) -> Result<Vec<HH0Class>> {
    Trace::patterns(&[0, 1], field).classes()
}

/// The trace with no boundary points.
pub fn hh0_empty(field: Field) -> Result<Vec<HH0Class>> {
    Trace::empty(field).classes()
}

fn same_complex(a: &Complex, b: &Complex) -> bool {
    a.hmin == b.hmin && a.objs == b.objs && a.ends == b.ends
}

/// Trace class of a homogeneous endomorphism of a (1,1)-tangle complex.
pub fn trace_class(endo: &ChainMap) -> Result<Vec<(HH0Class, Coef)>> {
    if !same_complex(&endo.source, &endo.target) {
        return Err(Error::NotEndo("source and target complexes differ".into()));
    }
    endo.check().map_err(|e| Error::NotEndo(e.to_string()))?;
    let field = endo.source.field;
    let s = simplify(&endo.source, true);
    let min_endo = s.backward.unwrap().then(endo).then(&s.forward.unwrap());
    let dec = decompose_minimal(&s.complex)?;
    let g = dec.from_blocks.then(&min_endo).then(&dec.to_blocks);
    let mut ls: BTreeSet<usize> = [0, 1].into_iter().collect();
    ls.extend(dec.blocks.iter().map(|b| b.k));
    let ls: Vec<usize> = ls.into_iter().collect();
    let trace = Trace::patterns(&ls, field);
    let mut acc: BTreeMap<HH0Class, Coef> = BTreeMap::new();
    for b in &dec.blocks {
        let std = pattern_complex(b.k, 0, 0, ARC, field);
        let mut local = ChainMap::zero(std.clone(), std, g.hshift, g.qshift);
        for m in 0..=b.k {
            let tm = m as i32 + g.hshift;
            if tm < 0 || tm > b.k as i32 {
                continue;
            }
            if let Some(x) = g.component(b.h + m as i32, b.slots[m], b.slots[tm as usize]) {
                local.set(m as i32, 0, 0, x.clone());
            }
        }
        if local.is_zero() {
            continue;
        }
        let a = ls.iter().position(|l| *l == b.k).unwrap();
        // the standard C_k sits at degree 0; the block at b.h carries (-1)^{b.h}
        let sign = if b.h.rem_euclid(2) == 1 { field.int(-1) } else { field.one() };
        for (c, x) in trace.class_of(a, &local)? {
            let e = acc.entry(c).or_insert(field.zero());
            *e += &(&x * &sign);
        }
    }
    Ok(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

/// Graded trace with Koszul signs of the endomorphism a movie induces on the
/// homology of its (closed) start diagram.
pub fn lefschetz_trace(movie: &Movie, field: Field) -> Result<Coef> {
    let m = movie_to_chainmap(movie, field)?;
    if m.target_word.gens != movie.start.gens {
        return Err(Error::NotEndo("movie does not return to its starting diagram".into()));
    }
    let mut acc = field.zero();
    if m.map.hshift != 0 || m.map.qshift != 0 {
        return Ok(acc);
    }
    if m.source.d.iter().any(|r| r.iter().any(|x| !x.is_empty())) {
        return Err(Error::NotEndo("complex is not minimal".into()));
    }
    for h in m.source.hmin..=m.source.hmax() {
        let sign = if h.rem_euclid(2) == 1 { field.int(-1) } else { field.one() };
        for i in 0..m.source.degree_objs(h).len() {
            if let Some(x) = m.map.component(h, i, i).and_then(|x| x.coef(0)) {
                acc += &(&sign * x);
            }
        }
    }
    Ok(acc)
}

/// Object counts per (h, q, resolution).
pub type Signature = BTreeMap<(i32, i32, FlatTangle), usize>;

pub fn signature(c: &Complex) -> Signature {
    let mut out = Signature::new();
    for h in c.hmin..=c.hmax() {
        for o in c.degree_objs(h) {
            *out.entry((h, o.q, o.tangle.clone())).or_default() += 1;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct K0Entry {
    pub power: usize,
    pub objects: usize,
    pub signature: Signature,
    /// degree-zero endomorphisms are scalars, so the endomorphism ring is local
    pub local: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Signature,
    NoIsomorphism,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct K0Certificate {
    pub p: usize,
    pub entries: Vec<K0Entry>,
    pub witnesses: Vec<(usize, usize, Witness)>,
    /// number of pairwise separated indecomposable entries
    pub bound: usize,
}

impl K0Certificate {
    /// Re-run the comparisons.
    pub fn verify(&self, field: Field) -> Result<bool> {
        let again = k0_lower_bound(self.p, self.entries.len() - 1, field)?;
        Ok(again.bound == self.bound && again.witnesses == self.witnesses)
    }
}

/// The word σ₁^k on p upward strands.
pub fn braid_power(p: usize, k: usize) -> TangleWord {
    TangleWord::new(BoundaryWord(vec![Mark::Up; p]), vec![Gen::Cross { at: 0, kind: CrossKind::Plus }; k])
}

/// Minimal complexes of σ₁^0..=σ₁^max on p strands, separated pairwise.
pub fn k0_lower_bound(p: usize, braid_power_max: usize, field: Field) -> Result<K0Certificate> {
    if p < 2 {
        return Err(Error::Config("k0_lower_bound needs p >= 2".into()));
    }
    let mut complexes = vec![];
    let mut entries = vec![];
    for k in 0..=braid_power_max {
        let c = braid_power(p, k).diagram()?.khovanov_complex(field);
        let local = hom_space(&c, &c, 0, 0).len() == 1;
        entries.push(K0Entry { power: k, objects: c.len(), signature: signature(&c), local });
        complexes.push(c);
    }
    let mut witnesses = vec![];
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let w = if entries[i].signature != entries[j].signature {
                Witness::Signature
            } else {
                isomorphism_search(&complexes[i], &complexes[j])
            };
            witnesses.push((i, j, w));
        }
    }
    let separated = |i: usize, j: usize| witnesses.iter().any(|(a, b, w)| (*a, *b) == (i.min(j), i.max(j)) && *w != Witness::Inconclusive);
    let mut chosen: Vec<usize> = vec![];
    for i in 0..entries.len() {
        if entries[i].local && chosen.iter().all(|&j| separated(i, j)) {
            chosen.push(i);
        }
    }
    Ok(K0Certificate { p, entries, witnesses, bound: chosen.len() })
}

/// Minimal complexes are isomorphic iff some degree-zero map has invertible
/// scalar part; checked on a basis and one generic combination.
fn isomorphism_search(a: &Complex, b: &Complex) -> Witness {
    let hs = hom_space(a, b, 0, 0);
    if hs.is_empty() {
        return Witness::NoIsomorphism;
    }
    let field = a.field;
    let mut generic = ChainMap::zero(a.clone(), b.clone(), 0, 0);
    for (n, f) in hs.iter().enumerate() {
        generic = generic.add(&f.scale(&field.int(n as i64 * 7 + 3)));
    }
    for f in hs.iter().chain(std::iter::once(&generic)) {
        if scalar_invertible(f) {
            return Witness::Inconclusive;
        }
    }
    if hs.len() == 1 {
        Witness::NoIsomorphism
    } else {
        Witness::Inconclusive
    }
}

fn scalar_invertible(f: &ChainMap) -> bool {
    let (c, e) = (&f.source, &f.target);
    let mut blocks: BTreeMap<(i32, i32, FlatTangle), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for h in c.hmin.min(e.hmin)..=c.hmax().max(e.hmax()) {
        for (i, o) in c.degree_objs(h).iter().enumerate() {
            blocks.entry((h, o.q, o.tangle.clone())).or_default().0.push(i);
        }
        for (i, o) in e.degree_objs(h).iter().enumerate() {
            blocks.entry((h, o.q, o.tangle.clone())).or_default().1.push(i);
        }
    }
    blocks.into_iter().all(|((h, _, _), (s, t))| {
        s.len() == t.len() && {
            let rows: Vec<Vec<Coef>> = s
                .iter()
                .map(|x| t.iter().map(|y| f.component(h, *x, *y).and_then(|m| m.coef(0)).cloned().unwrap_or(c.field.zero())).collect())
                .collect();
            rank_dense(&rows) == s.len()
        }
    })
}
