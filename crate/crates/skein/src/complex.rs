//! Bounded chain complexes over the cobordism category: tensor products along
//! shared endpoints, delooping, Gaussian elimination and homology.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cobcat::{compose, glue_with, FlatTangle, Label, Loops, Mor};
use crate::error::{Error, Result};
use crate::field::{Coef, Field};
use crate::linalg::{kernel, Echelon, SparseVec};

/// A flat tangle with a quantum shift.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Obj {
    pub tangle: FlatTangle,
    pub q: i32,
}

/// Sparse matrix of morphisms: `entries[src]` maps target index to morphism.
pub type Mat = Vec<BTreeMap<usize, Mor>>;

#[derive(Clone)]
pub struct Complex {
    pub field: Field,
    pub ends: Vec<Label>,
    pub hmin: i32,
    pub objs: Vec<Vec<Obj>>,
    /// `d[k]` goes from degree `hmin + k` to `hmin + k + 1`.
    pub d: Vec<Mat>,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, objs) in self.objs.iter().enumerate() {
            writeln!(f, "[{}]", self.hmin + k as i32)?;
            for (i, o) in objs.iter().enumerate() {
                write!(f, "  {i}: {:?}{{{}}}", o.tangle, o.q)?;
                for (t, m) in &self.d[k][i] {
                    write!(f, "  ->{t}: {m:?}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Bigraded dimensions `(i, j) -> n`.
pub type BigradedDims = BTreeMap<(i32, i32), usize>;

impl Complex {
    pub fn zero(field: Field, ends: Vec<Label>) -> Self {
        Complex { field, ends, hmin: 0, objs: vec![], d: vec![] }
    }

    /// One object in degree `h`.
    pub fn single(field: Field, tangle: FlatTangle, h: i32, q: i32) -> Self {
        let ends = tangle.ends().to_vec();
        Complex { field, ends, hmin: h, objs: vec![vec![Obj { tangle, q }]], d: vec![vec![BTreeMap::new()]] }
    }

    /// The unit for tensor products: the empty tangle in bidegree (0, 0).
    pub fn unit(field: Field) -> Self {
        Complex::single(field, FlatTangle::empty(), 0, 0)
    }

    /// Two-term complex `a -> b` with `a` in degree `h`.
    pub fn cone(field: Field, a: Obj, b: Obj, m: Mor, h: i32) -> Self {
        let ends = a.tangle.ends().to_vec();
        let mut d0 = BTreeMap::new();
        if !m.is_zero() {
            d0.insert(0, m);
        }
        Complex { field, ends, hmin: h, objs: vec![vec![a], vec![b]], d: vec![vec![d0], vec![BTreeMap::new()]] }
    }

    pub fn hmax(&self) -> i32 {
        self.hmin + self.objs.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.objs.iter().map(|v| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree_objs(&self, h: i32) -> &[Obj] {
        let k = h - self.hmin;
        if k < 0 || k as usize >= self.objs.len() {
            &[]
        } else {
            &self.objs[k as usize]
        }
    }

    pub fn entry(&self, h: i32, src: usize, tgt: usize) -> Option<&Mor> {
        let k = (h - self.hmin) as usize;
        self.d.get(k)?.get(src)?.get(&tgt)
    }

    /// Shift all bidegrees.
    pub fn shifted(mut self, dh: i32, dq: i32) -> Self {
        self.hmin += dh;
        for v in &mut self.objs {
            for o in v {
                o.q += dq;
            }
        }
        self
    }

    /// Drop empty degrees at both ends.
    pub fn trim(mut self) -> Self {
        while self.objs.last().map_or(false, |v| v.is_empty()) {
            self.objs.pop();
            self.d.pop();
        }
        while self.objs.first().map_or(false, |v| v.is_empty()) {
            self.objs.remove(0);
            self.d.remove(0);
            self.hmin += 1;
        }
        if self.objs.is_empty() {
            self.hmin = 0;
        }
        self
    }

    pub fn has_circles(&self) -> bool {
        self.objs.iter().flatten().any(|o| o.tangle.circles() > 0)
    }

    /// Check d∘d = 0 and that each entry is homogeneous of degree zero.
    /// Rename the boundary points in order: the i-th smallest end becomes
    /// `ends[i]`. Order is kept, so morphism loop masks keep their meaning.
    pub fn with_ends(&self, ends: &[Label]) -> Result<Complex> {
        if ends.len() != self.ends.len() || ends.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Boundary(format!("cannot rename {:?} to {ends:?}", self.ends)));
        }
        let map: BTreeMap<Label, Label> = self.ends.iter().copied().zip(ends.iter().copied()).collect();
        let f = |l: Label| map.get(&l).copied().unwrap_or(l);
        let mut c = self.clone();
        c.ends = ends.to_vec();
        for os in &mut c.objs {
            for o in os {
                o.tangle = o.tangle.relabel(&f);
            }
        }
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        for k in 0..self.objs.len() {
            for (i, row) in self.d[k].iter().enumerate() {
                let a = &self.objs[k][i];
                for (j, m) in row {
                    let b = &self.objs[k + 1][*j];
                    for deg in m.degrees(&a.tangle, &b.tangle) {
                        if deg != b.q - a.q {
                            return Err(Error::Boundary(format!(
                                "inhomogeneous differential at degree {}: {deg} vs {}",
                                self.hmin + k as i32,
                                b.q - a.q
                            )));
                        }
                    }
                }
            }
        }
        for k in 0..self.objs.len().saturating_sub(2) {
            for (i, row) in self.d[k].iter().enumerate() {
                let mut acc: BTreeMap<usize, Mor> = BTreeMap::new();
                for (j, m1) in row {
                    for (l, m2) in &self.d[k + 1][*j] {
                        let c = compose(&self.objs[k][i].tangle, &self.objs[k + 1][*j].tangle, &self.objs[k + 2][*l].tangle, m1, m2);
                        let e = acc.entry(*l).or_default();
                        *e = e.add(&c);
                    }
                }
                if acc.values().any(|m| !m.is_zero()) {
                    return Err(Error::Boundary(format!("d^2 != 0 at degree {}", self.hmin + k as i32)));
                }
            }
        }
        Ok(())
    }

    /// Per-bidegree object counts.
    pub fn object_counts(&self) -> BigradedDims {
        let mut out = BigradedDims::new();
        for (k, v) in self.objs.iter().enumerate() {
            for o in v {
                *out.entry((self.hmin + k as i32, o.q)).or_default() += 1;
            }
        }
        out
    }
}

/// Tensor (planar gluing) of two complexes along their shared endpoint labels.
pub fn tensor(c: &Complex, e: &Complex) -> Complex {
    tensor_indexed(c, e).0
}

/// Index of `(x, y)` in the tensor: per total degree, the position of each pair.
pub type PairIndex = BTreeMap<(i32, usize, i32, usize), (i32, usize)>;

pub fn tensor_indexed(c: &Complex, e: &Complex) -> (Complex, PairIndex) {
    let field = c.field;
    let mut ends: Vec<Label> = c.ends.iter().chain(&e.ends).copied().collect();
    ends.sort_unstable();
    let mut ends2 = vec![];
    for (i, l) in ends.iter().enumerate() {
        let dup = (i > 0 && ends[i - 1] == *l) || (i + 1 < ends.len() && ends[i + 1] == *l);
        if !dup {
            ends2.push(*l);
        }
    }
    if c.is_empty() || e.is_empty() {
        return (Complex::zero(field, ends2), PairIndex::new());
    }
    let hmin = c.hmin + e.hmin;
    let hlen = c.objs.len() + e.objs.len() - 1;
    let mut objs: Vec<Vec<Obj>> = vec![vec![]; hlen];
    let mut index = PairIndex::new();
    let mut glue_info = BTreeMap::new();
    for (a, ca) in c.objs.iter().enumerate() {
        for (b, eb) in e.objs.iter().enumerate() {
            for (x, ox) in ca.iter().enumerate() {
                for (y, oy) in eb.iter().enumerate() {
                    let (t, orig) = FlatTangle::glue(&ox.tangle, &oy.tangle);
                    let pos = objs[a + b].len();
                    objs[a + b].push(Obj { tangle: t, q: ox.q + oy.q });
                    index.insert((c.hmin + a as i32, x, e.hmin + b as i32, y), (hmin + (a + b) as i32, pos));
                    glue_info.insert((a, x, b, y), orig);
                }
            }
        }
    }
    let mut d: Vec<Mat> = objs.iter().map(|v| vec![BTreeMap::new(); v.len()]).collect();
    let minus = field.int(-1);
    for (a, ca) in c.objs.iter().enumerate() {
        let sign_odd = (c.hmin + a as i32).rem_euclid(2) == 1;
        for (b, eb) in e.objs.iter().enumerate() {
            for (x, ox) in ca.iter().enumerate() {
                for (y, oy) in eb.iter().enumerate() {
                    let (_, src) = index[&(c.hmin + a as i32, x, e.hmin + b as i32, y)];
                    let so = &glue_info[&(a, x, b, y)];
                    let st = objs[a + b][src].tangle.clone();
                    let id_x = Mor::identity(&ox.tangle, field);
                    let id_y = Mor::identity(&oy.tangle, field);
                    // d_C ⊗ id
                    for (x2, m) in &c.d[a][x] {
                        let (_, tgt) = index[&(c.hmin + a as i32 + 1, *x2, e.hmin + b as i32, y)];
                        let to = &glue_info[&(a + 1, *x2, b, y)];
                        let tt = &objs[a + b + 1][tgt].tangle;
                        let g = glue_with(&ox.tangle, &c.objs[a + 1][*x2].tangle, &oy.tangle, &oy.tangle, &st, so, tt, to, m, &id_y);
                        add_entry(&mut d[a + b][src], tgt, g);
                    }
                    // (-1)^deg id ⊗ d_E
                    for (y2, m) in &e.d[b][y] {
                        let (_, tgt) = index[&(c.hmin + a as i32, x, e.hmin + b as i32 + 1, *y2)];
                        let to = &glue_info[&(a, x, b + 1, *y2)];
                        let tt = &objs[a + b + 1][tgt].tangle;
                        let mut g = glue_with(&ox.tangle, &ox.tangle, &oy.tangle, &e.objs[b + 1][*y2].tangle, &st, so, tt, to, &id_x, m);
                        if sign_odd {
                            g = g.scale(&minus);
                        }
                        add_entry(&mut d[a + b][src], tgt, g);
                    }
                }
            }
        }
    }
    (Complex { field, ends: ends2, hmin, objs, d }, index)
}

fn add_entry(row: &mut BTreeMap<usize, Mor>, tgt: usize, m: Mor) {
    if m.is_zero() {
        return;
    }
    let e = row.entry(tgt).or_default();
    *e = e.add(&m);
    if e.is_zero() {
        row.remove(&tgt);
    }
}

/// A degree-preserving chain map (optionally with a homological shift).
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: Complex,
    pub target: Complex,
    /// maps degree `i` of the source to degree `i + hshift` of the target
    pub hshift: i32,
    /// enriched quantum degree of every component
    pub qshift: i32,
    /// `comps[h][src]`: target index -> morphism, keyed by absolute source degree
    pub comps: BTreeMap<i32, Mat>,
}

impl ChainMap {
    pub fn zero(source: Complex, target: Complex, hshift: i32, qshift: i32) -> Self {
        ChainMap { source, target, hshift, qshift, comps: BTreeMap::new() }
    }

    pub fn identity(c: &Complex) -> Self {
        let mut comps = BTreeMap::new();
        for (k, v) in c.objs.iter().enumerate() {
            let mat: Mat = (0..v.len())
                .map(|i| {
                    let mut r = BTreeMap::new();
                    r.insert(i, Mor::identity(&v[i].tangle, c.field));
                    r
                })
                .collect();
            comps.insert(c.hmin + k as i32, mat);
        }
        ChainMap { source: c.clone(), target: c.clone(), hshift: 0, qshift: 0, comps }
    }

    pub fn component(&self, h: i32, src: usize, tgt: usize) -> Option<&Mor> {
        self.comps.get(&h)?.get(src)?.get(&tgt)
    }

    pub fn set(&mut self, h: i32, src: usize, tgt: usize, m: Mor) {
        let n = self.source.degree_objs(h).len();
        let mat = self.comps.entry(h).or_insert_with(|| vec![BTreeMap::new(); n]);
        if m.is_zero() {
            mat[src].remove(&tgt);
        } else {
            mat[src].insert(tgt, m);
        }
    }

    pub fn add_to(&mut self, h: i32, src: usize, tgt: usize, m: Mor) {
        let n = self.source.degree_objs(h).len();
        let mat = self.comps.entry(h).or_insert_with(|| vec![BTreeMap::new(); n]);
        add_entry(&mut mat[src], tgt, m);
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|m| m.iter().all(|r| r.is_empty()))
    }

    pub fn scale(&self, c: &Coef) -> ChainMap {
        let mut out = self.clone();
        for mat in out.comps.values_mut() {
            for row in mat.iter_mut() {
                for m in row.values_mut() {
                    *m = m.scale(c);
                }
                row.retain(|_, m| !m.is_zero());
            }
        }
        out
    }

    pub fn add(&self, other: &ChainMap) -> ChainMap {
        let mut out = self.clone();
        for (h, mat) in &other.comps {
            for (s, row) in mat.iter().enumerate() {
                for (t, m) in row {
                    out.add_to(*h, s, *t, m.clone());
                }
            }
        }
        out
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ChainMap) -> ChainMap {
        let mut out = ChainMap::zero(self.source.clone(), other.target.clone(), self.hshift + other.hshift, self.qshift + other.qshift);
        for (h, mat) in &self.comps {
            let mid_h = h + self.hshift;
            let Some(mat2) = other.comps.get(&mid_h) else { continue };
            for (s, row) in mat.iter().enumerate() {
                let so = &self.source.degree_objs(*h)[s].tangle;
                for (m, f) in row {
                    let mo = &self.target.degree_objs(mid_h)[*m].tangle;
                    for (t, g) in &mat2[*m] {
                        let to = &other.target.degree_objs(mid_h + other.hshift)[*t].tangle;
                        out.add_to(*h, s, *t, compose(so, mo, to, f, g));
                    }
                }
            }
        }
        out
    }

    /// Differential of the source as a chain map-like matrix product helper.
    fn d_then(c: &Complex, h: i32, src: usize) -> Vec<(usize, &Mor)> {
        let k = h - c.hmin;
        if k < 0 || k as usize >= c.d.len() {
            return vec![];
        }
        c.d[k as usize][src].iter().map(|(t, m)| (*t, m)).collect()
    }

    /// Check `d f = (-1)^hshift f d` and homogeneity.
    pub fn check(&self) -> Result<()> {
        let sgn = if self.hshift.rem_euclid(2) == 1 { self.source.field.int(-1) } else { self.source.field.one() };
        for h in self.source.hmin..=self.source.hmax() {
            for s in 0..self.source.degree_objs(h).len() {
                let so = &self.source.degree_objs(h)[s];
                let mut acc: BTreeMap<usize, Mor> = BTreeMap::new();
                if let Some(row) = self.comps.get(&h).map(|m| &m[s]) {
                    for (t, f) in row {
                        let to = &self.target.degree_objs(h + self.hshift)[*t];
                        for deg in f.degrees(&so.tangle, &to.tangle) {
                            if deg - (to.q - so.q) != self.qshift {
                                return Err(Error::Boundary("chain map component has wrong degree".into()));
                            }
                        }
                        for (u, dm) in ChainMap::d_then(&self.target, h + self.hshift, *t) {
                            let uo = &self.target.degree_objs(h + self.hshift + 1)[u];
                            let c = compose(&so.tangle, &to.tangle, &uo.tangle, f, dm);
                            let e = acc.entry(u).or_default();
                            *e = e.add(&c);
                        }
                    }
                }
                for (s2, dm) in ChainMap::d_then(&self.source, h, s) {
                    let s2o = &self.source.degree_objs(h + 1)[s2];
                    if let Some(row) = self.comps.get(&(h + 1)).map(|m| &m[s2]) {
                        for (u, f) in row {
                            let uo = &self.target.degree_objs(h + 1 + self.hshift)[*u];
                            let c = compose(&so.tangle, &s2o.tangle, &uo.tangle, dm, f).scale(&sgn);
                            let e = acc.entry(*u).or_default();
                            *e = e.sub(&c);
                        }
                    }
                }
                if acc.values().any(|m| !m.is_zero()) {
                    return Err(Error::Boundary(format!("chain map does not commute with d at degree {h}")));
                }
            }
        }
        Ok(())
    }

    /// Tensor with the identity of `e` (`self ⊗ id_e`), for maps with hshift 0.
    pub fn tensor_id(&self, e: &Complex) -> ChainMap {
        assert_eq!(self.hshift, 0);
        let (src, si) = tensor_indexed(&self.source, e);
        let (tgt, ti) = tensor_indexed(&self.target, e);
        let mut out = ChainMap::zero(src.clone(), tgt.clone(), 0, self.qshift);
        for (h, mat) in &self.comps {
            for (s, row) in mat.iter().enumerate() {
                let so = &self.source.degree_objs(*h)[s].tangle;
                for (t, f) in row {
                    let to = &self.target.degree_objs(*h)[*t].tangle;
                    for eh in e.hmin..=e.hmax() {
                        for (y, oy) in e.degree_objs(eh).iter().enumerate() {
                            let (th, sp) = si[&(*h, s, eh, y)];
                            let (_, tp) = ti[&(*h, *t, eh, y)];
                            let (_, so2) = FlatTangle::glue(so, &oy.tangle);
                            let (_, to2) = FlatTangle::glue(to, &oy.tangle);
                            let g = glue_with(
                                so,
                                to,
                                &oy.tangle,
                                &oy.tangle,
                                &src.degree_objs(th)[sp].tangle,
                                &so2,
                                &tgt.degree_objs(th)[tp].tangle,
                                &to2,
                                f,
                                &Mor::identity(&oy.tangle, self.source.field),
                            );
                            out.add_to(th, sp, tp, g);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Mutable simplification state with optional equivalence tracking.
struct Work {
    field: Field,
    hmin: i32,
    objs: Vec<Vec<Option<Obj>>>,
    out: Vec<Vec<BTreeMap<usize, Mor>>>,
    inc: Vec<Vec<BTreeSet<usize>>>,
    track: bool,
    /// forward map: for each current object, original index -> morphism
    fwd: Vec<Vec<BTreeMap<usize, Mor>>>,
    /// backward map: for each current object, original index -> morphism
    bwd: Vec<Vec<BTreeMap<usize, Mor>>>,
}

/// Result of simplification: the minimal complex plus, when tracked, mutually
/// inverse homotopy equivalences with the input.
pub struct Simplified {
    pub complex: Complex,
    pub forward: Option<ChainMap>,
    pub backward: Option<ChainMap>,
}

impl Work {
    fn from(c: &Complex, track: bool) -> Self {
        let objs: Vec<Vec<Option<Obj>>> = c.objs.iter().map(|v| v.iter().cloned().map(Some).collect()).collect();
        let out: Vec<Vec<BTreeMap<usize, Mor>>> = c.d.clone();
        let mut inc: Vec<Vec<BTreeSet<usize>>> = c.objs.iter().map(|v| vec![BTreeSet::new(); v.len()]).collect();
        for k in 0..out.len() {
            for (s, row) in out[k].iter().enumerate() {
                for t in row.keys() {
                    inc[k + 1][*t].insert(s);
                }
            }
        }
        let eye = |v: &Vec<Obj>| -> Vec<BTreeMap<usize, Mor>> {
            (0..v.len())
                .map(|i| {
                    let mut m = BTreeMap::new();
                    if track {
                        m.insert(i, Mor::identity(&v[i].tangle, c.field));
                    }
                    m
                })
                .collect()
        };
        let fwd = c.objs.iter().map(eye).collect();
        let bwd = c.objs.iter().map(eye).collect();
        Work { field: c.field, hmin: c.hmin, objs, out, inc, track, fwd, bwd }
    }

    fn deloop(&mut self, orig: &Complex) {
        let field = self.field;
        let mut new_objs: Vec<Vec<Option<Obj>>> = vec![];
        // (new index, fwd mor, bwd mor) per old object
        let mut images: Vec<Vec<Vec<(usize, Mor, Mor)>>> = vec![];
        for v in &self.objs {
            let mut nv = vec![];
            let mut imv = vec![];
            for o in v {
                let mut im = vec![];
                if let Some(o) = o {
                    let c = o.tangle.circles();
                    let base = o.tangle.without_circles();
                    for eps in 0..(1u64 << c) {
                        let up = eps.count_ones() as i32;
                        let q = o.q + up - (c as i32 - up);
                        let f = Mor::caps(&o.tangle, eps, field);
                        let b = Mor::cups(&o.tangle, !eps & ((1u64 << c) - 1), field);
                        im.push((nv.len(), f, b));
                        nv.push(Some(Obj { tangle: base.clone(), q }));
                    }
                }
                imv.push(im);
            }
            new_objs.push(nv);
            images.push(imv);
        }
        let mut new_out: Vec<Vec<BTreeMap<usize, Mor>>> = new_objs.iter().map(|v| vec![BTreeMap::new(); v.len()]).collect();
        for k in 0..self.out.len() {
            for (s, row) in self.out[k].iter().enumerate() {
                let Some(so) = &self.objs[k][s] else { continue };
                for (t, m) in row {
                    let to = self.objs[k + 1][*t].as_ref().unwrap();
                    for (ns, _, sb) in &images[k][s] {
                        let nso = &new_objs[k][*ns].as_ref().unwrap().tangle;
                        let m1 = compose(nso, &so.tangle, &to.tangle, sb, m);
                        if m1.is_zero() {
                            continue;
                        }
                        for (nt, tf, _) in &images[k + 1][*t] {
                            let nto = &new_objs[k + 1][*nt].as_ref().unwrap().tangle;
                            let m2 = compose(nso, &to.tangle, nto, &m1, tf);
                            add_entry(&mut new_out[k][*ns], *nt, m2);
                        }
                    }
                }
            }
        }
        if self.track {
            let mut nf: Vec<Vec<BTreeMap<usize, Mor>>> = new_objs.iter().map(|v| vec![BTreeMap::new(); v.len()]).collect();
            let mut nb = nf.clone();
            for k in 0..self.objs.len() {
                let oh = self.hmin + k as i32;
                for (s, o) in self.objs[k].iter().enumerate() {
                    let Some(o) = o else { continue };
                    for (n, f, b) in &images[k][s] {
                        let no = &new_objs[k][*n].as_ref().unwrap().tangle;
                        for (x, m) in &self.fwd[k][s] {
                            let xo = &orig.degree_objs(oh)[*x].tangle;
                            let c = compose(xo, &o.tangle, no, m, f);
                            if !c.is_zero() {
                                nf[k][*n].insert(*x, c);
                            }
                        }
                        for (x, m) in &self.bwd[k][s] {
                            let xo = &orig.degree_objs(oh)[*x].tangle;
                            let c = compose(no, &o.tangle, xo, b, m);
                            if !c.is_zero() {
                                nb[k][*n].insert(*x, c);
                            }
                        }
                    }
                }
            }
            self.fwd = nf;
            self.bwd = nb;
        }
        let mut inc: Vec<Vec<BTreeSet<usize>>> = new_objs.iter().map(|v| vec![BTreeSet::new(); v.len()]).collect();
        for k in 0..new_out.len() {
            for (s, row) in new_out[k].iter().enumerate() {
                for t in row.keys() {
                    inc[k + 1][*t].insert(s);
                }
            }
        }
        self.objs = new_objs;
        self.out = new_out;
        self.inc = inc;
    }

    fn find_iso(&self, k: usize, s: usize) -> Option<(usize, Coef)> {
        let so = self.objs[k][s].as_ref()?;
        for (t, m) in &self.out[k][s] {
            let to = self.objs[k + 1][*t].as_ref().unwrap();
            if to.q == so.q && to.tangle == so.tangle {
                if let Some(c) = m.coef(0) {
                    return Some((*t, c.clone()));
                }
            }
        }
        None
    }

    /// Cancel the isomorphism `a -> b` (a in degree index k) with coefficient `c`.
    fn eliminate(&mut self, k: usize, a: usize, b: usize, c: &Coef, orig: &Complex) {
        let cinv = c.inv();
        let neg_cinv = -&cinv;
        let at = self.objs[k][a].as_ref().unwrap().tangle.clone();
        let sources: Vec<usize> = self.inc[k + 1][b].iter().copied().filter(|x| *x != a).collect();
        let targets: Vec<(usize, Mor)> = self.out[k][a].iter().filter(|(y, _)| **y != b).map(|(y, m)| (*y, m.clone())).collect();
        for &x in &sources {
            let delta = self.out[k][x][&b].scale(&neg_cinv);
            let xt = self.objs[k][x].as_ref().unwrap().tangle.clone();
            for (y, gamma) in &targets {
                let yt = &self.objs[k + 1][*y].as_ref().unwrap().tangle;
                let m = compose(&xt, &at, yt, &delta, gamma);
                if m.is_zero() {
                    continue;
                }
                add_entry(&mut self.out[k][x], *y, m);
                if self.out[k][x].contains_key(y) {
                    self.inc[k + 1][*y].insert(x);
                } else {
                    self.inc[k + 1][*y].remove(&x);
                }
            }
        }
        if self.track {
            let oh = self.hmin + k as i32;
            // forward: objects receiving from b through -gamma phi^-1
            let fb: Vec<(usize, Mor)> = self.fwd[k + 1][b].iter().map(|(o, m)| (*o, m.clone())).collect();
            for (o, m) in &fb {
                let ot = &orig.degree_objs(oh + 1)[*o].tangle;
                let m = m.scale(&neg_cinv);
                for (y, gamma) in &targets {
                    let yt = &self.objs[k + 1][*y].as_ref().unwrap().tangle;
                    let c2 = compose(ot, &at, yt, &m, gamma);
                    add_entry(&mut self.fwd[k + 1][*y], *o, c2);
                }
            }
            let ga: Vec<(usize, Mor)> = self.bwd[k][a].iter().map(|(o, m)| (*o, m.clone())).collect();
            for &x in &sources {
                let delta = self.out[k][x].get(&b).cloned();
                let Some(delta) = delta else { continue };
                let delta = delta.scale(&neg_cinv);
                let xt = self.objs[k][x].as_ref().unwrap().tangle.clone();
                for (o, m) in &ga {
                    let ot = &orig.degree_objs(oh)[*o].tangle;
                    let c2 = compose(&xt, &at, ot, &delta, m);
                    add_entry(&mut self.bwd[k][x], *o, c2);
                }
            }
            self.fwd[k][a].clear();
            self.fwd[k + 1][b].clear();
            self.bwd[k][a].clear();
            self.bwd[k + 1][b].clear();
        }
        // remove a and b
        for &x in &sources {
            self.out[k][x].remove(&b);
        }
        if k > 0 {
            for x in std::mem::take(&mut self.inc[k][a]) {
                self.out[k - 1][x].remove(&a);
            }
        }
        for (y, _) in std::mem::take(&mut self.out[k][a]) {
            self.inc[k + 1][y].remove(&a);
        }
        if k + 1 < self.out.len() {
            for (y, _) in std::mem::take(&mut self.out[k + 1][b]) {
                self.inc[k + 2][y].remove(&b);
            }
        }
        self.inc[k + 1][b].clear();
        self.objs[k][a] = None;
        self.objs[k + 1][b] = None;
    }

    fn eliminate_all(&mut self, orig: &Complex, order: Option<&mut dyn FnMut(usize) -> usize>) {
        let mut order = order;
        loop {
            let mut found = false;
            for k in 0..self.out.len().saturating_sub(1) {
                let n = self.objs[k].len();
                if n == 0 {
                    continue;
                }
                let start = match order.as_mut() {
                    Some(f) => f(n),
                    None => 0,
                };
                let mut s_iter = 0;
                while s_iter < n {
                    let s = (start + s_iter) % n;
                    s_iter += 1;
                    if let Some((t, c)) = self.find_iso(k, s) {
                        self.eliminate(k, s, t, &c, orig);
                        found = true;
                    }
                }
            }
            if !found {
                break;
            }
        }
    }

    fn finish(self, orig: &Complex) -> Simplified {
        let mut objs = vec![];
        let mut remap: Vec<Vec<Option<usize>>> = vec![];
        for v in &self.objs {
            let mut nv = vec![];
            let mut rm = vec![];
            for o in v {
                match o {
                    Some(o) => {
                        rm.push(Some(nv.len()));
                        nv.push(o.clone());
                    }
                    None => rm.push(None),
                }
            }
            objs.push(nv);
            remap.push(rm);
        }
        let mut d: Vec<Mat> = objs.iter().map(|v| vec![BTreeMap::new(); v.len()]).collect();
        for k in 0..self.out.len() {
            for (s, row) in self.out[k].iter().enumerate() {
                let Some(ns) = remap[k][s] else { continue };
                for (t, m) in row {
                    d[k][ns].insert(remap[k + 1][*t].unwrap(), m.clone());
                }
            }
        }
        let complex = Complex { field: self.field, ends: orig.ends.clone(), hmin: self.hmin, objs, d };
        let (forward, backward) = if self.track {
            let mut f = ChainMap::zero(orig.clone(), complex.clone(), 0, 0);
            let mut b = ChainMap::zero(complex.clone(), orig.clone(), 0, 0);
            for k in 0..self.objs.len() {
                let h = self.hmin + k as i32;
                for (s, _) in self.objs[k].iter().enumerate() {
                    let Some(ns) = remap[k][s] else { continue };
                    for (o, m) in &self.fwd[k][s] {
                        f.set(h, *o, ns, m.clone());
                    }
                    for (o, m) in &self.bwd[k][s] {
                        b.set(h, ns, *o, m.clone());
                    }
                }
            }
            (Some(f), Some(b))
        } else {
            (None, None)
        };
        Simplified { complex, forward, backward }
    }
}

/// Replace every circle by two shifted copies of the circle-free tangle.
pub fn deloop(c: &Complex) -> (Complex, ChainMap, ChainMap) {
    let mut w = Work::from(c, true);
    w.deloop(c);
    let s = w.finish(c);
    (s.complex, s.forward.unwrap(), s.backward.unwrap())
}

/// Cancel all invertible differential entries (the input must be circle-free).
pub fn gaussian_eliminate(c: &Complex) -> (Complex, ChainMap, ChainMap) {
    let mut w = Work::from(c, true);
    w.eliminate_all(c, None);
    let s = w.finish(c);
    (s.complex, s.forward.unwrap(), s.backward.unwrap())
}

/// Deloop then eliminate.
pub fn simplify(c: &Complex, track: bool) -> Simplified {
    let mut w = Work::from(c, track);
    if c.has_circles() {
        w.deloop(c);
    }
    w.eliminate_all(c, None);
    let s = w.finish(c);
    Simplified { complex: s.complex.trim_keep(), forward: s.forward, backward: s.backward }
}

/// Simplify with a pseudo-random elimination order (for order-invariance tests).
pub fn simplify_shuffled(c: &Complex, seed: u64) -> Complex {
    let mut w = Work::from(c, false);
    if c.has_circles() {
        w.deloop(c);
    }
    let mut state = seed | 1;
    let mut next = move |n: usize| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % n as u64) as usize
    };
    w.eliminate_all(c, Some(&mut next));
    w.finish(c).complex
}

impl Complex {
    /// Trimming would change degree bookkeeping of tracked maps, so simplified
    /// complexes keep their range.
    fn trim_keep(self) -> Self {
        self
    }

    /// Homology of a closed (boundary-free) complex: object counts of the
    /// minimal complex, whose differential vanishes.
    pub fn homology_table(&self) -> Result<BigradedDims> {
        if !self.ends.is_empty() {
            return Err(Error::NotClosed(self.ends.len()));
        }
        let s = simplify(self, false).complex;
        debug_assert!(s.d.iter().all(|m| m.iter().all(|r| r.is_empty())));
        Ok(s.object_counts())
    }
}

/// Compose two complexes (tensor) without simplifying.
pub fn compose_complexes(a: &Complex, b: &Complex) -> Result<Complex> {
    if a.field != b.field {
        return Err(Error::Boundary("complexes over different fields".into()));
    }
    Ok(tensor(a, b))
}

/// Hom space of closed chain maps `c -> e` of bidegree (hshift, qshift) modulo
/// null-homotopic maps; returns representatives of a basis.
pub fn hom_space(c: &Complex, e: &Complex, hshift: i32, qshift: i32) -> Vec<ChainMap> {
    HomSpace::new(c, e, hshift, qshift).basis
}

type CompKey = (i32, usize, usize, u64);

/// Chain maps of a fixed bidegree up to homotopy, with coordinates.
pub struct HomSpace {
    pub basis: Vec<ChainMap>,
    field: Field,
    unknowns: Vec<CompKey>,
    uindex: BTreeMap<CompKey, usize>,
    /// basis cycles followed by the boundaries, as columns
    cols: Vec<SparseVec>,
}

impl HomSpace {
    pub fn new(c: &Complex, e: &Complex, hshift: i32, qshift: i32) -> Self {
        let field = c.field;
        let unknowns = component_basis(c, e, hshift, qshift);
        let homotopies = component_basis(c, e, hshift - 1, qshift);
        let targets = component_basis(c, e, hshift + 1, qshift);
        let tindex: BTreeMap<CompKey, usize> = targets.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let uindex: BTreeMap<CompKey, usize> = unknowns.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let sgn = |n: i32| if n.rem_euclid(2) == 1 { field.int(-1) } else { field.one() };
        // δf = d f - (-1)^n f d, where f has homological degree n
        let delta = |key: &CompKey, n: i32, index: &BTreeMap<CompKey, usize>| -> SparseVec {
            let (h, s, t, mask) = *key;
            let so = &c.degree_objs(h)[s];
            let to = &e.degree_objs(h + n)[t];
            let f = Mor::basis(mask, field.one());
            let mut v = SparseVec::new();
            let mut push = |hh: i32, ss: usize, tt: usize, m: Mor, sign: &Coef| {
                for (mk, cf) in m.terms() {
                    if let Some(i) = index.get(&(hh, ss, tt, *mk)) {
                        crate::linalg::axpy(&mut v, sign, &[(*i, cf.clone())].into_iter().collect());
                    } else {
                        panic!("component outside enumerated basis");
                    }
                }
            };
            let k = h + n - e.hmin;
            if k >= 0 && (k as usize) < e.d.len() {
                for (u, dm) in &e.d[k as usize][t] {
                    let uo = &e.degree_objs(h + n + 1)[*u];
                    push(h, s, *u, compose(&so.tangle, &to.tangle, &uo.tangle, &f, dm), &field.one());
                }
            }
            let k = h - 1 - c.hmin;
            if k >= 0 && (k as usize) < c.d.len() {
                for (p, row) in c.d[k as usize].iter().enumerate() {
                    if let Some(dm) = row.get(&s) {
                        let po = &c.degree_objs(h - 1)[p];
                        let m = compose(&po.tangle, &so.tangle, &to.tangle, dm, &f);
                        push(h - 1, p, t, m, &-&sgn(n));
                    }
                }
            }
            v
        };
        let dcols: Vec<SparseVec> = unknowns.iter().map(|k| delta(k, hshift, &tindex)).collect();
        let cycles = kernel(field, &dcols);
        let mut bounds = Echelon::new();
        let mut bvecs = vec![];
        for k in &homotopies {
            let b = delta(k, hshift - 1, &uindex);
            if bounds.insert(b.clone()) {
                bvecs.push(b);
            }
        }
        let mut basis = vec![];
        let mut cols = vec![];
        for z in cycles {
            if bounds.insert(z.clone()) {
                let mut f = ChainMap::zero(c.clone(), e.clone(), hshift, qshift);
                for (i, cf) in &z {
                    let (h, s, t, mask) = unknowns[*i];
                    f.add_to(h, s, t, Mor::basis(mask, cf.clone()));
                }
                basis.push(f);
                cols.push(z);
            }
        }
        cols.extend(bvecs);
        HomSpace { basis, field, unknowns, uindex, cols }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of a closed map in the basis, up to homotopy. `None` if `f` is
    /// not a cycle of this bidegree.
    pub fn coordinates(&self, f: &ChainMap) -> Option<Vec<Coef>> {
        let mut v = SparseVec::new();
        for (h, mat) in &f.comps {
            for (s, row) in mat.iter().enumerate() {
                for (t, m) in row {
                    for (mask, cf) in m.terms() {
                        let i = self.uindex.get(&(*h, s, *t, *mask))?;
                        crate::linalg::axpy(&mut v, &self.field.one(), &[(*i, cf.clone())].into_iter().collect());
                    }
                }
            }
        }
        let x = crate::linalg::solve(self.field, &self.cols, &v)?;
        Some((0..self.basis.len()).map(|i| x.get(&i).cloned().unwrap_or(self.field.zero())).collect())
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns.len()
    }
}

/// Basis of component space `c^h -> e^{h+n}` of enriched degree `qshift`.
fn component_basis(c: &Complex, e: &Complex, n: i32, qshift: i32) -> Vec<(i32, usize, usize, u64)> {
    let mut out = vec![];
    for h in c.hmin..=c.hmax() {
        for (s, so) in c.degree_objs(h).iter().enumerate() {
            for (t, to) in e.degree_objs(h + n).iter().enumerate() {
                let loops = Loops::new(&so.tangle, &to.tangle).count;
                let base = -(loops as i32) + so.tangle.ends().len() as i32 / 2;
                // basis degree = base + 2·dots must equal qshift + (to.q - so.q)
                let need = qshift + to.q - so.q - base;
                if need < 0 || need % 2 != 0 {
                    continue;
                }
                let dots = (need / 2) as u32;
                if dots as usize > loops {
                    continue;
                }
                for mask in 0..(1u64 << loops) {
                    if mask.count_ones() == dots {
                        out.push((h, s, t, mask));
                    }
                }
            }
        }
    }
    out
}

/// The unique-up-to-scalar isomorphism between two minimal complexes of isotopic
/// tangles, normalized so that its first identity component is 1.
pub fn isotopy_equivalence(c: &Complex, e: &Complex) -> Result<ChainMap> {
    let hs = hom_space(c, e, 0, 0);
    if hs.len() != 1 {
        return Err(Error::NoEquivalence(format!("degree-zero hom space has dimension {}", hs.len())));
    }
    let f = hs.into_iter().next().unwrap();
    // normalize on the first component between equal objects
    for (h, mat) in &f.comps {
        for (s, row) in mat.iter().enumerate() {
            for (t, m) in row {
                let so = &c.degree_objs(*h)[s];
                let to = &e.degree_objs(*h)[*t];
                if so == to {
                    if let Some(x) = m.coef(0) {
                        let inv = x.inv();
                        let g = f.scale(&inv);
                        check_invertible(&g)?;
                        return Ok(g);
                    }
                }
            }
        }
    }
    Err(Error::NoEquivalence("no identity component".into()))
}

/// A map between minimal complexes is invertible iff its identity components form
/// invertible scalar matrices in each bidegree.
fn check_invertible(f: &ChainMap) -> Result<()> {
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
    for ((h, _, _), (src, tgt)) in blocks {
        if src.len() != tgt.len() {
            return Err(Error::NoEquivalence("object counts differ".into()));
        }
        let rows: Vec<Vec<Coef>> = src
            .iter()
            .map(|s| tgt.iter().map(|t| f.component(h, *s, *t).and_then(|m| m.coef(0)).cloned().unwrap_or(f.source.field.zero())).collect())
            .collect();
        if crate::linalg::rank_dense(&rows) != src.len() {
            return Err(Error::NoEquivalence("scalar part is singular".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crossing(field: Field, a: Label, b: Label, c: Label, d: Label) -> Complex {
        let r0 = FlatTangle::from_arcs(&[(a, b), (c, d)], 0).unwrap();
        let r1 = FlatTangle::from_arcs(&[(a, d), (b, c)], 0).unwrap();
        Complex::cone(field, Obj { tangle: r0, q: 1 }, Obj { tangle: r1, q: 2 }, Mor::basis(0, field.one()), 0)
    }

    #[test]
    fn circle_deloops_to_two() {
        let f = Field::Rational;
        let c = Complex::single(f, FlatTangle::circle(1), 0, 0);
        let (d, fw, bw) = deloop(&c);
        let qs: Vec<i32> = d.objs[0].iter().map(|o| o.q).collect();
        assert_eq!(qs, vec![-1, 1]);
        let round = bw.then(&fw);
        assert_eq!(round.component(0, 0, 0), Some(&Mor::id(f)));
        assert_eq!(round.component(0, 1, 1), Some(&Mor::id(f)));
        assert!(round.component(0, 0, 1).is_none());
        let two = Complex::single(f, FlatTangle::circle(2), 0, 0);
        let mut qs: Vec<i32> = deloop(&two).0.objs[0].iter().map(|o| o.q).collect();
        qs.sort();
        assert_eq!(qs, vec![-2, 0, 0, 2]);
    }

    #[test]
    fn identity_cone_cancels() {
        let f = Field::Rational;
        let t = FlatTangle::from_arcs(&[(0, 1)], 0).unwrap();
        let c = Complex::cone(f, Obj { tangle: t.clone(), q: 0 }, Obj { tangle: t, q: 0 }, Mor::id(f), 0);
        let (m, _, _) = gaussian_eliminate(&c);
        assert_eq!(m.len(), 0);
    }

    #[test]
    fn positive_kink() {
        // crossing with two of its ends joined: a one-crossing unknot diagram of a kink
        let f = Field::Rational;
        let x = crossing(f, 0, 1, 2, 3);
        let cap = Complex::single(f, FlatTangle::from_arcs(&[(1, 2)], 0).unwrap(), 0, 0);
        let t = tensor(&x, &cap);
        t.check().unwrap();
        let s = simplify(&t, true);
        assert_eq!(s.complex.len(), 1);
        let fw = s.forward.unwrap();
        let bw = s.backward.unwrap();
        fw.check().unwrap();
        bw.check().unwrap();
        let round = bw.then(&fw);
        let h = (s.complex.hmin..=s.complex.hmax()).find(|h| !s.complex.degree_objs(*h).is_empty()).unwrap();
        assert_eq!((h, s.complex.degree_objs(h)[0].q), (1, 3));
        assert_eq!(round.component(h, 0, 0), Some(&Mor::id(f)));
    }

    #[test]
    fn hom_space_of_arc() {
        let f = Field::Rational;
        let t = FlatTangle::from_arcs(&[(0, 1)], 0).unwrap();
        let c = Complex::single(f, t, 0, 0);
        assert_eq!(hom_space(&c, &c, 0, 0).len(), 1);
        assert_eq!(hom_space(&c, &c, 0, 2).len(), 1);
        assert_eq!(hom_space(&c, &c, 0, 4).len(), 0);
    }
}

/// Plain-data form of a complex for on-disk storage.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StoredComplex {
    pub field: Field,
    pub ends: Vec<Label>,
    pub hmin: i32,
    /// per degree: (arcs, circles, q)
    pub objs: Vec<Vec<(Vec<(Label, Label)>, usize, i32)>>,
    /// per degree: (source, target, [(mask, coefficient)])
    pub d: Vec<Vec<(usize, usize, Vec<(u64, String)>)>>,
}

impl From<&Complex> for StoredComplex {
    fn from(c: &Complex) -> Self {
        StoredComplex {
            field: c.field,
            ends: c.ends.clone(),
            hmin: c.hmin,
            objs: c.objs.iter().map(|os| os.iter().map(|o| (o.tangle.arcs(), o.tangle.circles(), o.q)).collect()).collect(),
            d: c.d
                .iter()
                .map(|m| {
                    m.iter()
                        .enumerate()
                        .flat_map(|(s, row)| {
                            row.iter().map(move |(t, f)| (s, *t, f.terms().iter().map(|(k, v)| (*k, v.to_string())).collect()))
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl StoredComplex {
    /// Rebuild and check d² = 0.
    pub fn load(&self) -> Result<Complex> {
        let mut objs = vec![];
        for os in &self.objs {
            let mut v = vec![];
            for (arcs, circles, q) in os {
                v.push(Obj { tangle: FlatTangle::from_arcs(arcs, *circles)?, q: *q });
            }
            objs.push(v);
        }
        if self.d.len() > objs.len() {
            return Err(Error::Cache("more differentials than degrees".into()));
        }
        let mut d: Vec<Mat> = objs.iter().map(|os| vec![BTreeMap::new(); os.len()]).collect();
        for (k, entries) in self.d.iter().enumerate() {
            for (s, t, terms) in entries {
                if *s >= objs[k].len() || k + 1 >= objs.len() || *t >= objs[k + 1].len() {
                    return Err(Error::Cache("differential entry out of range".into()));
                }
                let mut m = BTreeMap::new();
                for (mask, c) in terms {
                    m.insert(*mask, self.field.coef(c)?);
                }
                d[k][*s].insert(*t, Mor::from_map(m));
            }
        }
        let c = Complex { field: self.field, ends: self.ends.clone(), hmin: self.hmin, objs, d };
        c.check().map_err(|e| Error::Cache(format!("stored complex fails validation: {e}")))?;
        Ok(c)
    }
}
