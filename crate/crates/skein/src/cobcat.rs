//! The dotted cobordism category at N = 2.
//!
//! Objects are crossingless tangles whose endpoints carry integer labels; only
//! connectivity matters. A morphism `S -> T` is a linear combination of basis
//! cobordisms. After neck-cutting every component is a disk bounding one loop of
//! `S ∪ T`, carrying zero or one dot, so a basis cobordism is just the set of
//! dotted loops, stored as a bit mask.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Coef, Field};

pub type Label = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    Up,
    Down,
}

impl Mark {
    pub fn flip(self) -> Mark {
        match self {
            Mark::Up => Mark::Down,
            Mark::Down => Mark::Up,
        }
    }
}

/// Orientation marks along a boundary interval.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryWord(pub Vec<Mark>);

impl BoundaryWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `p` up marks followed by `p` down marks.
    pub fn balanced(p: usize) -> Self {
        BoundaryWord(std::iter::repeat(Mark::Up).take(p).chain(std::iter::repeat(Mark::Down).take(p)).collect())
    }
}

impl fmt::Display for BoundaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.0 {
            write!(f, "{}", if *m == Mark::Up { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// A crossingless tangle: a perfect matching on its labelled endpoints plus a
/// number of closed circles. Endpoint labels are kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatTangle {
    ends: Vec<Label>,
    mate: Vec<u16>,
    circles: u16,
}

impl fmt::Debug for FlatTangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![];
        for (i, &j) in self.mate.iter().enumerate() {
            if i < j as usize {
                parts.push(format!("{}-{}", self.ends[i], self.ends[j as usize]));
            }
        }
        write!(f, "[{}", parts.join(" "))?;
        if self.circles > 0 {
            write!(f, " o{}", self.circles)?;
        }
        write!(f, "]")
    }
}

/// Where a circle of a glued tangle came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircleOrigin {
    Left(usize),
    Right(usize),
    Through(Label),
}

impl FlatTangle {
    pub fn empty() -> Self {
        FlatTangle { ends: vec![], mate: vec![], circles: 0 }
    }

    /// Build from arcs given as label pairs.
    pub fn from_arcs(arcs: &[(Label, Label)], circles: usize) -> Result<Self> {
        let mut ends: Vec<Label> = arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
        ends.sort_unstable();
        if ends.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Boundary(format!("repeated endpoint in {arcs:?}")));
        }
        let idx = |l: Label| ends.binary_search(&l).unwrap() as u16;
        let mut mate = vec![0u16; ends.len()];
        for &(a, b) in arcs {
            mate[idx(a) as usize] = idx(b);
            mate[idx(b) as usize] = idx(a);
        }
        Ok(FlatTangle { ends, mate, circles: circles as u16 })
    }

    pub fn circle(n: usize) -> Self {
        FlatTangle { ends: vec![], mate: vec![], circles: n as u16 }
    }

    pub fn ends(&self) -> &[Label] {
        &self.ends
    }

    pub fn circles(&self) -> usize {
        self.circles as usize
    }

    pub fn arcs(&self) -> Vec<(Label, Label)> {
        self.mate
            .iter()
            .enumerate()
            .filter(|(i, &j)| *i < j as usize)
            .map(|(i, &j)| (self.ends[i], self.ends[j as usize]))
            .collect()
    }

    pub fn partner(&self, l: Label) -> Option<Label> {
        let i = self.ends.binary_search(&l).ok()?;
        Some(self.ends[self.mate[i] as usize])
    }

    pub fn without_circles(&self) -> Self {
        FlatTangle { circles: 0, ..self.clone() }
    }

    pub fn relabel(&self, f: &dyn Fn(Label) -> Label) -> Self {
        let arcs: Vec<_> = self.arcs().into_iter().map(|(a, b)| (f(a), f(b))).collect();
        FlatTangle::from_arcs(&arcs, self.circles()).expect("relabel must be injective")
    }

    /// Glue two tangles along their common labels.
    pub fn glue(a: &FlatTangle, b: &FlatTangle) -> (FlatTangle, Vec<CircleOrigin>) {
        let shared: Vec<Label> = a.ends.iter().copied().filter(|l| b.ends.binary_search(l).is_ok()).collect();
        let is_shared = |l: Label| shared.binary_search(&l).is_ok();
        let mut arcs = vec![];
        let mut seen: Vec<Label> = vec![];
        // walk from every free end of a or b
        let step = |side: bool, l: Label| -> Label {
            if side {
                a.partner(l).unwrap()
            } else {
                b.partner(l).unwrap()
            }
        };
        for (side, t) in [(true, a), (false, b)] {
            for &l in &t.ends {
                if is_shared(l) || seen.contains(&l) {
                    continue;
                }
                let mut cur = step(side, l);
                let mut s = side;
                while is_shared(cur) {
                    seen.push(cur);
                    s = !s;
                    cur = step(s, cur);
                }
                seen.push(l);
                seen.push(cur);
                arcs.push((l, cur));
            }
        }
        let mut origins: Vec<CircleOrigin> = (0..a.circles()).map(CircleOrigin::Left).collect();
        origins.extend((0..b.circles()).map(CircleOrigin::Right));
        let mut used: Vec<Label> = vec![];
        for &l in &shared {
            if used.contains(&l) || seen.contains(&l) {
                continue;
            }
            let mut cur = l;
            let mut s = true;
            loop {
                used.push(cur);
                cur = step(s, cur);
                s = !s;
                if cur == l {
                    break;
                }
            }
            origins.push(CircleOrigin::Through(l));
        }
        let t = FlatTangle::from_arcs(&arcs, origins.len()).unwrap();
        (t, origins)
    }

    /// Hom-space dimension as a graded count: the number of loops of `self ∪ other`.
    pub fn loop_count(&self, other: &FlatTangle) -> usize {
        Loops::new(self, other).count
    }
}

/// Loops of `S ∪ T` for two tangles with the same endpoints: arc loops ordered by
/// their smallest endpoint, then circles of `S`, then circles of `T`.
#[derive(Clone, Debug)]
pub struct Loops {
    pub of_end: Vec<u16>,
    pub s_circle0: usize,
    pub t_circle0: usize,
    pub count: usize,
}

impl Loops {
    pub fn new(s: &FlatTangle, t: &FlatTangle) -> Self {
        assert_eq!(s.ends, t.ends, "loops of tangles with different boundaries");
        let n = s.ends.len();
        let mut of_end = vec![u16::MAX; n];
        let mut k = 0u16;
        for i in 0..n {
            if of_end[i] != u16::MAX {
                continue;
            }
            let mut cur = i;
            loop {
                of_end[cur] = k;
                let j = s.mate[cur] as usize;
                of_end[j] = k;
                cur = t.mate[j] as usize;
                if cur == i {
                    break;
                }
            }
            k += 1;
        }
        let arcs = k as usize;
        Loops { of_end, s_circle0: arcs, t_circle0: arcs + s.circles(), count: arcs + s.circles() + t.circles() }
    }

    pub fn of_label(&self, t: &FlatTangle, l: Label) -> usize {
        self.of_end[t.ends.binary_search(&l).unwrap()] as usize
    }
}

/// A basis cobordism together with its coefficient.
pub type Term = (u64, Coef);

/// A morphism between two fixed flat tangles: dotted-loop masks with coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Mor {
    terms: Vec<Term>,
}

impl fmt::Debug for Mor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c}*{m:b}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Mor {
    pub fn zero() -> Self {
        Mor { terms: vec![] }
    }

    pub fn basis(mask: u64, c: Coef) -> Self {
        if c.is_zero() {
            Mor::zero()
        } else {
            Mor { terms: vec![(mask, c)] }
        }
    }

    pub fn from_map(m: BTreeMap<u64, Coef>) -> Self {
        Mor { terms: m.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Identity on a circle-free tangle.
    pub fn id(field: Field) -> Self {
        Mor::basis(0, field.one())
    }

    /// Identity on any tangle: a cylinder over each circle, which is not a
    /// basis element.
    pub fn identity(t: &FlatTangle, field: Field) -> Self {
        if t.circles() == 0 {
            return Mor::id(field);
        }
        let loops = Loops::new(t, t);
        let mut comps: Vec<RawComponent> = (0..loops.s_circle0).map(|l| RawComponent { loops: vec![l], genus: 0, dots: 0 }).collect();
        for c in 0..t.circles() {
            comps.push(RawComponent { loops: vec![loops.s_circle0 + c, loops.t_circle0 + c], genus: 0, dots: 0 });
        }
        canonicalize(&[RawCob { coef: field.one(), components: comps }])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coef(&self, mask: u64) -> Option<&Coef> {
        self.terms.iter().find(|(m, _)| *m == mask).map(|(_, c)| c)
    }

    pub fn scale(&self, c: &Coef) -> Mor {
        Mor { terms: self.terms.iter().map(|(m, x)| (*m, x * c)).filter(|(_, x)| !x.is_zero()).collect() }
    }

    pub fn add(&self, other: &Mor) -> Mor {
        let mut m: BTreeMap<u64, Coef> = self.terms.iter().cloned().collect();
        for (k, c) in &other.terms {
            match m.get_mut(k) {
                Some(e) => *e += c,
                None => {
                    m.insert(*k, c.clone());
                }
            }
        }
        Mor::from_map(m)
    }

    pub fn neg(&self) -> Mor {
        Mor { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn sub(&self, other: &Mor) -> Mor {
        self.add(&other.neg())
    }

    /// Quantum degree of a basis cobordism `s -> t`: the shift `k` such that it is a
    /// degree-preserving map `s -> t{k}`. Equals `-χ + #ends/2 + 2·dots`.
    pub fn basis_degree(s: &FlatTangle, t: &FlatTangle, mask: u64) -> i32 {
        let loops = Loops::new(s, t).count as i32;
        -loops + s.ends.len() as i32 / 2 + 2 * mask.count_ones() as i32
    }

    /// Degrees of the terms; `None` for zero, error-free callers check homogeneity.
    pub fn degrees(&self, s: &FlatTangle, t: &FlatTangle) -> Vec<i32> {
        self.terms.iter().map(|(m, _)| Mor::basis_degree(s, t, *m)).collect()
    }

    /// Identity with a dot on the loop through endpoint `l`.
    pub fn dot_at(t: &FlatTangle, l: Label, field: Field) -> Mor {
        let loops = Loops::new(t, t);
        Mor::basis(1u64 << loops.of_label(t, l), field.one())
    }

    /// Map `t` (with circles) to its circle-free part capping each circle; bit `i`
    /// of `dots` puts a dot on circle `i`.
    pub fn caps(t: &FlatTangle, dots: u64, field: Field) -> Mor {
        let loops = Loops::new(t, &t.without_circles());
        Mor::basis(dots << loops.s_circle0, field.one())
    }

    /// Map from the circle-free part of `t` to `t`, creating its circles.
    pub fn cups(t: &FlatTangle, dots: u64, field: Field) -> Mor {
        let loops = Loops::new(&t.without_circles(), t);
        Mor::basis(dots << loops.t_circle0, field.one())
    }
}

/// One connected component of a raw (non-canonical) cobordism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawComponent {
    /// Boundary loops (indices into the loops of source ∪ target).
    pub loops: Vec<usize>,
    pub genus: usize,
    pub dots: usize,
}

/// A single cobordism with arbitrary genus and dots per component.
#[derive(Clone, Debug)]
pub struct RawCob {
    pub coef: Coef,
    pub components: Vec<RawComponent>,
}

/// Apply neck-cutting, the sphere relations and X² = 0.
///
/// A connected component with `b` boundary loops, genus `g` and `d` dots equals
/// `2^g` times the sum over all ways of dotting exactly `d + g + b - 1` of its loops.
pub fn canonicalize(raw: &[RawCob]) -> Mor {
    let mut acc: BTreeMap<u64, Coef> = BTreeMap::new();
    for cob in raw {
        let mut partial: Vec<(u64, Coef)> = vec![(0, cob.coef.clone())];
        for comp in &cob.components {
            let b = comp.loops.len();
            let k = comp.dots as i64 + comp.genus as i64 + b as i64 - 1;
            if k < 0 || k > b as i64 {
                partial.clear();
                break;
            }
            let mut factor = cob.coef.field().one();
            let two = cob.coef.field().int(2);
            for _ in 0..comp.genus {
                factor = &factor * &two;
            }
            if factor.is_zero() {
                partial.clear();
                break;
            }
            let subsets = subsets_of_size(&comp.loops, k as usize);
            let mut next = Vec::with_capacity(partial.len() * subsets.len());
            for (m, c) in &partial {
                let cf = c * &factor;
                for s in &subsets {
                    next.push((m | s, cf.clone()));
                }
            }
            partial = next;
        }
        for (m, c) in partial {
            match acc.get_mut(&m) {
                Some(e) => *e += &c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
    }
    Mor::from_map(acc)
}

fn subsets_of_size(items: &[usize], k: usize) -> Vec<u64> {
    let mut out = vec![];
    fn rec(items: &[usize], k: usize, cur: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        if items.len() < k {
            return;
        }
        rec(&items[1..], k - 1, cur | (1u64 << items[0]), out);
        rec(&items[1..], k, cur, out);
    }
    rec(items, k, 0, &mut out);
    out
}

impl Mor {
    /// The canonical morphism as a list of raw cobordisms (one disk per loop).
    pub fn to_raw(&self, loops: usize) -> Vec<RawCob> {
        self.terms
            .iter()
            .map(|(m, c)| RawCob {
                coef: c.clone(),
                components: (0..loops)
                    .map(|i| RawComponent { loops: vec![i], genus: 0, dots: ((m >> i) & 1) as usize })
                    .collect(),
            })
            .collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Surface topology shared by every pair of basis terms in a composition.
struct Gluing {
    /// component of each node (first-factor loops, then second-factor loops)
    comp_of: Vec<usize>,
    /// per component: (nodes, glued intervals, result loops)
    comps: Vec<(usize, usize, Vec<usize>)>,
    n1: usize,
}

impl Gluing {
    fn build(mut uf: UnionFind, n1: usize, n2: usize, glued: Vec<usize>, result_loop_nodes: Vec<usize>) -> Gluing {
        let mut root_id: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comp_of = vec![0; n1 + n2];
        for x in 0..n1 + n2 {
            let r = uf.find(x);
            let len = root_id.len();
            comp_of[x] = *root_id.entry(r).or_insert(len);
        }
        let mut comps = vec![(0usize, 0usize, vec![]); root_id.len()];
        for x in 0..n1 + n2 {
            comps[comp_of[x]].0 += 1;
        }
        for g in glued {
            comps[comp_of[g]].1 += 1;
        }
        for (li, node) in result_loop_nodes.into_iter().enumerate() {
            comps[comp_of[node]].2.push(li);
        }
        Gluing { comp_of, comps, n1 }
    }

    fn apply(&self, f: &Mor, g: &Mor) -> Mor {
        let mut raws = Vec::with_capacity(f.terms.len() * g.terms.len());
        for (ma, ca) in &f.terms {
            for (mb, cb) in &g.terms {
                let mut dots = vec![0usize; self.comps.len()];
                for i in 0..self.n1 {
                    if (ma >> i) & 1 == 1 {
                        dots[self.comp_of[i]] += 1;
                    }
                }
                for i in 0..self.comp_of.len() - self.n1 {
                    if (mb >> i) & 1 == 1 {
                        dots[self.comp_of[self.n1 + i]] += 1;
                    }
                }
                let components = self
                    .comps
                    .iter()
                    .zip(&dots)
                    .map(|((v, e, loops), d)| {
                        let chi = *v as i64 - *e as i64;
                        let twice_g = 2 - chi - loops.len() as i64;
                        debug_assert!(twice_g >= 0 && twice_g % 2 == 0);
                        RawComponent { loops: loops.clone(), genus: (twice_g / 2) as usize, dots: *d }
                    })
                    .collect();
                raws.push(RawCob { coef: ca * cb, components });
            }
        }
        canonicalize(&raws)
    }
}

/// Vertical composition: `f: s -> t` followed by `g: t -> u`.
pub fn compose(s: &FlatTangle, t: &FlatTangle, u: &FlatTangle, f: &Mor, g: &Mor) -> Mor {
    if f.is_zero() || g.is_zero() {
        return Mor::zero();
    }
    let l1 = Loops::new(s, t);
    let l2 = Loops::new(t, u);
    let l3 = Loops::new(s, u);
    let (n1, n2) = (l1.count, l2.count);
    let mut uf = UnionFind::new(n1 + n2);
    let mut glued = vec![];
    for i in 0..t.ends.len() {
        let j = t.mate[i] as usize;
        if i < j {
            uf.union(l1.of_end[i] as usize, n1 + l2.of_end[i] as usize);
            glued.push(l1.of_end[i] as usize);
        }
    }
    for c in 0..t.circles() {
        uf.union(l1.t_circle0 + c, n1 + l2.s_circle0 + c);
    }
    let mut rep = vec![usize::MAX; l3.count];
    for i in 0..s.ends.len() {
        rep[l3.of_end[i] as usize] = l1.of_end[i] as usize;
    }
    for c in 0..s.circles() {
        rep[l3.s_circle0 + c] = l1.s_circle0 + c;
    }
    for c in 0..u.circles() {
        rep[l3.t_circle0 + c] = n1 + l2.t_circle0 + c;
    }
    Gluing::build(uf, n1, n2, glued, rep).apply(f, g)
}

/// Checked vertical composition.
pub fn compose_vertical(
    f: (&FlatTangle, &FlatTangle, &Mor),
    g: (&FlatTangle, &FlatTangle, &Mor),
) -> Result<Mor> {
    if f.1 != g.0 {
        return Err(Error::Boundary(format!("target {:?} differs from source {:?}", f.1, g.0)));
    }
    Ok(compose(f.0, f.1, g.1, f.2, g.2))
}

/// Planar gluing of `f: s1 -> t1` and `g: s2 -> t2` along their common endpoint
/// labels. Returns the glued source, glued target and glued morphism.
pub fn compose_horizontal(
    s1: &FlatTangle,
    t1: &FlatTangle,
    f: &Mor,
    s2: &FlatTangle,
    t2: &FlatTangle,
    g: &Mor,
) -> Result<(FlatTangle, FlatTangle, Mor)> {
    if s1.ends != t1.ends || s2.ends != t2.ends {
        return Err(Error::Boundary("source and target endpoints differ".into()));
    }
    let (s, so) = FlatTangle::glue(s1, s2);
    let (t, to) = FlatTangle::glue(t1, t2);
    let m = glue_with(s1, t1, s2, t2, &s, &so, &t, &to, f, g);
    Ok((s, t, m))
}

/// Planar gluing with precomputed glued objects.
#[allow(clippy::too_many_arguments)]
pub fn glue_with(
    s1: &FlatTangle,
    t1: &FlatTangle,
    s2: &FlatTangle,
    t2: &FlatTangle,
    s: &FlatTangle,
    so: &[CircleOrigin],
    t: &FlatTangle,
    to: &[CircleOrigin],
    f: &Mor,
    g: &Mor,
) -> Mor {
    if f.is_zero() || g.is_zero() {
        return Mor::zero();
    }
    let la = Loops::new(s1, t1);
    let lb = Loops::new(s2, t2);
    let (n1, n2) = (la.count, lb.count);
    let mut uf = UnionFind::new(n1 + n2);
    let mut glued = vec![];
    for (i, l) in s1.ends.iter().enumerate() {
        if let Ok(j) = s2.ends.binary_search(l) {
            uf.union(la.of_end[i] as usize, n1 + lb.of_end[j] as usize);
            glued.push(la.of_end[i] as usize);
        }
    }
    let l3 = Loops::new(s, t);
    let mut rep = vec![usize::MAX; l3.count];
    for (i, l) in s.ends.iter().enumerate() {
        rep[l3.of_end[i] as usize] = match s1.ends.binary_search(l) {
            Ok(j) => la.of_end[j] as usize,
            Err(_) => n1 + lb.of_end[s2.ends.binary_search(l).unwrap()] as usize,
        };
    }
    let origin_node = |o: &CircleOrigin, source: bool| -> usize {
        match *o {
            CircleOrigin::Left(c) => {
                if source {
                    la.s_circle0 + c
                } else {
                    la.t_circle0 + c
                }
            }
            CircleOrigin::Right(c) => {
                if source {
                    n1 + lb.s_circle0 + c
                } else {
                    n1 + lb.t_circle0 + c
                }
            }
            CircleOrigin::Through(l) => la.of_label(s1, l),
        }
    };
    for (c, o) in so.iter().enumerate() {
        rep[l3.s_circle0 + c] = origin_node(o, true);
    }
    for (c, o) in to.iter().enumerate() {
        rep[l3.t_circle0 + c] = origin_node(o, false);
    }
    Gluing::build(uf, n1, n2, glued, rep).apply(f, g)
}
