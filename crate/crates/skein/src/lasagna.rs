//! Truncated presentations of skein lasagna modules (N = 2) from handle data.
//!
//! Supported 2-handle data: the attaching link K is a crossingless 0-framed
//! unlink split from L. Its cables are unlinks, so every cable homology basis
//! is a tensor power of A = k[X]/X², the braid action is by permutation of
//! same-orientation copies, and the annulus maps have closed forms. The
//! generator count of each cable is cross-checked against the complex engine.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Deserialize;

use crate::cobcat::{BoundaryWord, Mark};
use crate::complex::BigradedDims;
use crate::diagram::{cable, twist_insert, CableSpec, Frame, Movie, TangleWord};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{Echelon, SparseVec};
use crate::onehandle::{hh0_two_point, k0_lower_bound};

/// Bumped whenever gradings or file semantics change; part of cache keys.
pub const CONVENTION: &str = "skein-lasagna-2";

/// Cables with at most this many circles are recomputed by the complex engine.
const CHECK_CIRCLES: usize = 6;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    handles: RawHandles,
    #[serde(rename = "K", default)]
    k: RawLink,
    #[serde(rename = "L", default)]
    l: RawLink,
    #[serde(default)]
    sigma: BTreeMap<String, RawSigma>,
    #[serde(default)]
    compute: RawCompute,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawHandles {
    #[serde(default)]
    m: usize,
    #[serde(default)]
    n: usize,
    #[serde(default)]
    p: usize,
    #[serde(default)]
    four_handles: usize,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLink {
    #[serde(default)]
    word: String,
    #[serde(default)]
    framings: Vec<i64>,
    /// per 1-handle, the marks of the strands crossing its belt sphere
    #[serde(default)]
    handles: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSigma {
    counts: Vec<[usize; 2]>,
    #[serde(default = "unknot_text")]
    start: String,
    #[serde(default)]
    movie: String,
}

fn unknot_text() -> String {
    "cup 0\ncap 0\n".into()
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCompute {
    alpha: Option<Vec<i64>>,
    rmax: Option<usize>,
    window: Option<[i32; 2]>,
    alpha_bound: Option<i64>,
    field: Option<String>,
    braid_max: Option<usize>,
}

/// Surface Σ_j of a 3-handle: a connected planar surface in the boundary from
/// the attaching circle J to parallel copies of the K components.
#[derive(Clone, Debug)]
pub struct Sigma {
    /// (reversed, coherent) copies per K component
    pub counts: Vec<(usize, usize)>,
    pub movie: Movie,
}

impl Sigma {
    pub fn copies(&self) -> usize {
        self.counts.iter().map(|(a, b)| a + b).sum()
    }

    /// The class [S_j] = s⁺ − s⁻.
    pub fn class(&self) -> Vec<i64> {
        self.counts.iter().map(|&(a, b)| b as i64 - a as i64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComputeParams {
    pub alpha: Vec<i64>,
    pub r_max: usize,
    /// quantum window (j_min, j_max)
    pub window: (i32, i32),
    pub alpha_bound: i64,
    pub field: Field,
    pub braid_max: usize,
}

#[derive(Clone, Debug)]
pub struct KirbyPresentation {
    pub m: usize,
    pub k: TangleWord,
    pub n: usize,
    pub l: TangleWord,
    /// marks of L crossing each 1-handle belt sphere, one entry per handle
    pub l_handles: Vec<BoundaryWord>,
    pub sigmas: Vec<Sigma>,
    pub four_handles: usize,
    pub compute: ComputeParams,
}

fn parse_marks(s: &str) -> Result<BoundaryWord> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '+' => Ok(Mark::Up),
            '-' => Ok(Mark::Down),
            _ => Err(Error::Config(format!("bad handle marker {c:?}"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(BoundaryWord)
}

fn closed_word(text: &str, what: &str) -> Result<TangleWord> {
    let w = TangleWord::parse(text)?;
    if !w.source.0.is_empty() || !w.target()?.0.is_empty() {
        return Err(Error::Config(format!("{what} must be a closed word")));
    }
    Ok(w)
}

impl KirbyPresentation {
    pub fn parse(text: &str) -> Result<KirbyPresentation> {
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0);
            Error::Parse { line, msg: e.message().to_string() }
        })?;
        let h = &raw.handles;

        let mut k = closed_word(&raw.k.word, "K")?;
        let n = if k.gens.is_empty() { 0 } else { k.diagram()?.components().len() };
        if n != h.n {
            return Err(Error::Config(format!("[handles] n = {} but K has {n} components", h.n)));
        }
        if k.crossings() > 0 {
            return Err(Error::Config("unsupported: K must be a crossingless unlink".into()));
        }
        if raw.k.framings.is_empty() {
            k.framings = vec![0; n];
        } else if raw.k.framings.len() != n {
            return Err(Error::Config(format!("{} framings for {n} components of K", raw.k.framings.len())));
        } else {
            k.framings = raw.k.framings.clone();
        }
        if k.framings.iter().any(|&f| f != 0) {
            return Err(Error::Config("unsupported: K components must be 0-framed".into()));
        }
        if raw.k.handles.iter().any(|s| !s.trim().is_empty()) {
            return Err(Error::Config("unsupported: K strands through 1-handles".into()));
        }

        let l = closed_word(&raw.l.word, "L")?;
        if raw.l.handles.len() > h.m {
            return Err(Error::Config(format!("L crosses {} handles but m = {}", raw.l.handles.len(), h.m)));
        }
        let mut l_handles = raw.l.handles.iter().map(|s| parse_marks(s)).collect::<Result<Vec<_>>>()?;
        l_handles.resize(h.m, BoundaryWord(vec![]));

        if raw.sigma.len() != h.p {
            return Err(Error::Config(format!("[handles] p = {} but {} sigma sections", h.p, raw.sigma.len())));
        }
        let mut keyed = vec![];
        for (key, s) in &raw.sigma {
            let idx: usize = key.parse().map_err(|_| Error::Config(format!("sigma key {key:?} is not an index")))?;
            keyed.push((idx, s));
        }
        keyed.sort_by_key(|x| x.0);
        let mut sigmas = vec![];
        for (idx, s) in keyed {
            let sigma = Sigma {
                counts: s.counts.iter().map(|c| (c[0], c[1])).collect(),
                movie: Movie { start: closed_word(&s.start, "sigma start")?, frames: Movie::parse_frames(&s.movie)? },
            };
            check_sigma(&sigma, n).map_err(|e| match e {
                Error::Boundary(m) => Error::Boundary(format!("sigma.{idx}: {m}")),
                e => e,
            })?;
            sigmas.push(sigma);
        }

        let c = &raw.compute;
        let r_max = c.rmax.unwrap_or(3);
        let alpha = c.alpha.clone().unwrap_or_else(|| vec![0; n]);
        if alpha.len() != n {
            return Err(Error::Config(format!("alpha has length {} but K has {n} components", alpha.len())));
        }
        let window = c.window.map(|w| (w[0], w[1])).unwrap_or((-6, 6));
        if window.0 > window.1 {
            return Err(Error::Config("empty quantum window".into()));
        }
        let compute = ComputeParams {
            alpha,
            r_max,
            window,
            alpha_bound: c.alpha_bound.unwrap_or(r_max as i64),
            field: Field::parse(c.field.as_deref().unwrap_or("Q"))?,
            braid_max: c.braid_max.unwrap_or(3),
        };
        Ok(KirbyPresentation { m: h.m, k, n, l, l_handles, sigmas, four_handles: h.four_handles, compute })
    }

    /// The cable of K with the given (reversed, coherent) counts.
    pub fn cable(&self, counts: &[(usize, usize)]) -> Result<TangleWord> {
        cable(&self.k, &CableSpec { per_component: counts.to_vec() })
    }
}

fn check_sigma(s: &Sigma, n: usize) -> Result<()> {
    if s.counts.len() != n {
        return Err(Error::Boundary(format!("{} boundary counts for {n} components of K", s.counts.len())));
    }
    let words = s.movie.words()?;
    let comps = |w: &TangleWord| -> Result<usize> { Ok(if w.gens.is_empty() { 0 } else { w.diagram()?.components().len() }) };
    if comps(&words[0])? != 1 {
        return Err(Error::Boundary("the movie must start from the single circle J".into()));
    }
    let end = comps(words.last().unwrap())?;
    if end != s.copies() {
        return Err(Error::Boundary(format!("movie ends with {end} circles, counts give {}", s.copies())));
    }
    if s.movie.frames.iter().any(|f| matches!(f, Frame::Dot { .. })) {
        return Err(Error::Boundary("the surface carries no dots of its own".into()));
    }
    let chi = s.movie.euler_characteristic();
    if chi != 1 - s.copies() as i64 {
        return Err(Error::Boundary(format!("surface has χ = {chi}, a connected planar surface needs {}", 1 - s.copies() as i64)));
    }
    Ok(())
}

/// (reversed, coherent) copies in the cable K(r − α⁻, r + α⁺) of one component.
pub fn copies(alpha: i64, r: usize) -> (usize, usize) {
    (r + (-alpha).max(0) as usize, r + alpha.max(0) as usize)
}

/// A basis vector of the cable homology: per component, the number of
/// reversed and coherent copies labelled X (the rest carry 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CableGen {
    pub alpha: Vec<i64>,
    pub r: Vec<usize>,
    pub xs: Vec<(usize, usize)>,
}

impl CableGen {
    /// Quantum degree −q − (2|r| + |α|): minus twice the number of 1 labels.
    pub fn j(&self) -> i32 {
        let ones: usize = self
            .alpha
            .iter()
            .zip(&self.r)
            .zip(&self.xs)
            .map(|((&a, &r), &(xm, xp))| {
                let (km, kp) = copies(a, r);
                km - xm + kp - xp
            })
            .sum();
        -2 * ones as i32
    }
}

fn enumerate(alpha: &[i64], r_max: usize, out: &mut Vec<CableGen>) {
    let n = alpha.len();
    let mut r = vec![0usize; n];
    loop {
        let mut xs = vec![(0usize, 0usize); n];
        loop {
            out.push(CableGen { alpha: alpha.to_vec(), r: r.clone(), xs: xs.clone() });
            if !bump(&mut xs, |i, (a, b)| {
                let (km, kp) = copies(alpha[i], r[i]);
                if *b < kp {
                    *b += 1;
                    true
                } else if *a < km {
                    *a += 1;
                    *b = 0;
                    true
                } else {
                    *a = 0;
                    *b = 0;
                    false
                }
            }) {
                break;
            }
        }
        if !bump(&mut r, |_, x| {
            if *x < r_max {
                *x += 1;
                true
            } else {
                *x = 0;
                false
            }
        }) {
            break;
        }
    }
}

/// Odometer step: advance the first entry that does not wrap.
fn bump<T>(v: &mut [T], mut step: impl FnMut(usize, &mut T) -> bool) -> bool {
    for i in 0..v.len() {
        if step(i, &mut v[i]) {
            return true;
        }
    }
    false
}

/// The quotient of the truncated direct sum of cable homologies by the
/// cabling (and optionally 3-handle) relations, restricted to a window.
#[derive(Clone, Debug)]
pub struct QuotientPresentation {
    pub field: Field,
    pub window: (i32, i32),
    pub r_max: usize,
    pub alphas: Vec<Vec<i64>>,
    pub generators: Vec<CableGen>,
    index: HashMap<CableGen, usize>,
    pub relations: Vec<SparseVec>,
    /// relations whose image leaves the truncation
    pub dropped: usize,
    /// negate the relations that are set to zero (they are sign-insensitive)
    pub flip_signs: bool,
}

type Image = Vec<(CableGen, i64)>;

impl QuotientPresentation {
    /// Generators and cabling relations: β by passing to coinvariants of the
    /// symmetric groups on same-orientation copies, ψ^[0](v) ~ 0 and
    /// ψ^[1](v) ~ v.
    pub fn cabled(alphas: &[Vec<i64>], r_max: usize, window: (i32, i32), field: Field) -> Self {
        let mut qp = QuotientPresentation {
            field,
            window,
            r_max,
            alphas: alphas.to_vec(),
            generators: vec![],
            index: HashMap::new(),
            relations: vec![],
            dropped: 0,
            flip_signs: false,
        };
        let mut all = vec![];
        for a in alphas {
            enumerate(a, r_max, &mut all);
        }
        all.sort();
        all.dedup();
        let inside = |j: i32| j >= window.0 && j <= window.1;
        for g in all.iter().filter(|g| inside(g.j())) {
            qp.index.insert(g.clone(), qp.generators.len());
            qp.generators.push(g.clone());
        }
        for g in &all {
            for i in 0..g.alpha.len() {
                if inside(g.j()) {
                    qp.relate(psi(g, i, 1), Some(g));
                }
                if inside(g.j() - 2) {
                    qp.relate(psi(g, i, 0), None);
                }
            }
        }
        qp
    }

    /// Adds image − g, or just the image when `minus` is None. Relations whose
    /// image leaves the truncation are dropped and counted.
    fn relate(&mut self, image: Image, minus: Option<&CableGen>) {
        let mut v = SparseVec::new();
        for (h, c) in image {
            let Some(&idx) = self.index.get(&h) else {
                self.dropped += 1;
                return;
            };
            let c = if minus.is_none() && self.flip_signs { -c } else { c };
            crate::linalg::axpy(&mut v, &self.field.int(c), &SparseVec::from([(idx, self.field.one())]));
        }
        if let Some(g) = minus {
            let idx = self.index[g];
            crate::linalg::axpy(&mut v, &self.field.int(-1), &SparseVec::from([(idx, self.field.one())]));
        }
        if !v.is_empty() {
            self.relations.push(v);
        }
    }

    /// 3-handle coequalizer relations Ψ_{Σ(0•)}(v) ~ 0 and Ψ_{Σ(1•)}(v) ~ v,
    /// the second side being the closed form of capping J with a dotted disk.
    pub fn add_three_handles(&mut self, sigmas: &[Sigma]) {
        let window = self.window;
        let inside = |j: i32| j >= window.0 && j <= window.1;
        let mut all = vec![];
        for a in &self.alphas {
            enumerate(a, self.r_max, &mut all);
        }
        for s in sigmas {
            for g in &all {
                if inside(g.j()) {
                    self.relate(sigma_image(g, s, 1), Some(g));
                }
                if inside(g.j() - 2) {
                    self.relate(sigma_image(g, s, 0), None);
                }
            }
        }
    }

    pub fn dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        let mut ranks: BTreeMap<i32, Echelon> = BTreeMap::new();
        for g in &self.generators {
            *out.entry(g.j()).or_insert(0usize) += 1;
        }
        for v in &self.relations {
            let j = self.generators[*v.keys().next().unwrap()].j();
            ranks.entry(j).or_default().insert(v.clone());
        }
        for (j, e) in ranks {
            *out.get_mut(&j).unwrap() -= e.rank();
        }
        out.retain(|_, d| *d > 0);
        out
    }

    pub fn is_homogeneous(&self) -> bool {
        self.relations.iter().all(|v| {
            let mut js = v.keys().map(|&i| self.generators[i].j());
            let j0 = js.next();
            js.all(|j| Some(j) == j0)
        })
    }
}

fn psi(g: &CableGen, i: usize, dots: usize) -> Image {
    let mut h = g.clone();
    h.r[i] += 1;
    let (a, b) = g.xs[i];
    if dots == 1 {
        h.xs[i] = (a + 1, b + 1);
        vec![(h, 1)]
    } else {
        let mut h2 = h.clone();
        h.xs[i] = (a, b + 1);
        h2.xs[i] = (a + 1, b);
        vec![(h, 1), (h2, 1)]
    }
}

/// Ψ_{Σ(d•)}(v): v tensored with the genus-0 surface from nothing to the new
/// copies carrying d dots, i.e. X on every new circle but d + s − 1 of them
/// summed over choices.
fn sigma_image(g: &CableGen, s: &Sigma, dots: usize) -> Image {
    let total = s.copies();
    if total == 0 {
        return if dots == 1 { vec![(g.clone(), 1)] } else { vec![] };
    }
    let mut h = g.clone();
    for (i, &(sm, sp)) in s.counts.iter().enumerate() {
        let (km, kp) = copies(g.alpha[i], g.r[i]);
        let a = g.alpha[i] + sp as i64 - sm as i64;
        let (km, kp) = (km + sm, kp + sp);
        let r = kp - a.max(0) as usize;
        debug_assert_eq!(copies(a, r), (km, kp));
        h.alpha[i] = a;
        h.r[i] = r;
        h.xs[i] = (g.xs[i].0 + sm, g.xs[i].1 + sp);
    }
    if dots == 1 {
        return vec![(h, 1)];
    }
    let mut out = vec![];
    for (i, &(sm, sp)) in s.counts.iter().enumerate() {
        if sm > 0 {
            let mut x = h.clone();
            x.xs[i].0 -= 1;
            out.push((x, sm as i64));
        }
        if sp > 0 {
            let mut x = h.clone();
            x.xs[i].1 -= 1;
            out.push((x, sp as i64));
        }
    }
    out
}

/// Integer row echelon form of lattice generators.
fn int_echelon(mut rows: Vec<Vec<i128>>, n: usize) -> Vec<Vec<i128>> {
    let mut out = vec![];
    for col in 0..n {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    out.push(rows.remove(i));
                }
                break;
            }
            let best = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            let pivot = rows[best].clone();
            for &i in &nz {
                if i != best {
                    let q = rows[i][col] / pivot[col];
                    for c in 0..n {
                        rows[i][c] -= q * pivot[c];
                    }
                }
            }
        }
    }
    out
}

/// Whether `v` lies in the integer span of `gens`.
pub fn lattice_contains(gens: &[Vec<i64>], v: &[i64]) -> bool {
    let n = v.len();
    let rows = int_echelon(gens.iter().map(|g| g.iter().map(|&x| x as i128).collect()).collect(), n);
    let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    for row in rows {
        let c = row.iter().position(|&x| x != 0).unwrap();
        if v[c] % row[c] != 0 {
            return false;
        }
        let q = v[c] / row[c];
        for k in 0..n {
            v[k] -= q * row[k];
        }
    }
    v.iter().all(|&x| x == 0)
}

/// Classes α ≡ α′ modulo the 3-handle classes [S_j], with |α|∞ ≤ bound.
pub fn alpha_classes(kp: &KirbyPresentation) -> Vec<Vec<i64>> {
    let n = kp.n;
    let b = kp.compute.alpha_bound;
    let gens: Vec<Vec<i64>> = kp.sigmas.iter().map(|s| s.class()).collect();
    let base = &kp.compute.alpha;
    let mut out = vec![];
    let mut a = vec![-b; n];
    loop {
        let diff: Vec<i64> = a.iter().zip(base).map(|(x, y)| x - y).collect();
        if lattice_contains(&gens, &diff) {
            out.push(a.clone());
        }
        if !bump(&mut a, |_, x| {
            if *x < b {
                *x += 1;
                true
            } else {
                *x = -b;
                false
            }
        }) {
            break;
        }
    }
    out
}

/// How the 1-handles are dealt with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    /// L and K avoid every handle: the handles change nothing.
    Drop,
    /// [L] ≠ 0 in H₁: no fillings.
    NoFillings,
    /// one handle, L = S¹ × P₁
    TwoPoint,
    /// one handle, L = S¹ × P_p with p ≥ 2: only a lower bound is computed
    LowerBound { p: usize },
}

pub fn one_handle_reduce(kp: &KirbyPresentation) -> Result<Reduced> {
    for marks in &kp.l_handles {
        let up = marks.0.iter().filter(|&&m| m == Mark::Up).count();
        if 2 * up != marks.len() {
            return Ok(Reduced::NoFillings);
        }
    }
    let through: Vec<&BoundaryWord> = kp.l_handles.iter().filter(|w| !w.0.is_empty()).collect();
    if through.is_empty() {
        return Ok(Reduced::Drop);
    }
    if kp.m != 1 || kp.n != 0 || !kp.sigmas.is_empty() || !kp.l.gens.is_empty() {
        return Err(Error::Config(
            "unsupported: L through a 1-handle is handled for m = 1, no 2- or 3-handles and no other components".into(),
        ));
    }
    let p = through[0].len() / 2;
    Ok(if p == 1 { Reduced::TwoPoint } else { Reduced::LowerBound { p } })
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Mode {
    /// no truncation involved
    Exact,
    /// quotient of the r ≤ r_max truncation
    Truncated,
    /// dimension lower bound from split Grothendieck group classes
    LowerBound,
}

#[derive(Clone, Debug)]
pub struct LasagnaResult {
    /// (i, j) → dimension
    pub dims: BigradedDims,
    pub stable: BTreeMap<(i32, i32), bool>,
    pub mode: Mode,
    pub dropped: usize,
    pub notes: Vec<String>,
}

/// Quantum degrees of the cable part: dims per j at truncation `r_max`.
pub fn cabled_module(kp: &KirbyPresentation, alphas: &[Vec<i64>], r_max: usize, window: (i32, i32), three_handles: bool) -> QuotientPresentation {
    let mut qp = QuotientPresentation::cabled(alphas, r_max, window, kp.compute.field);
    if three_handles {
        qp.add_three_handles(&kp.sigmas);
    }
    qp
}

/// Compares the closed-form generator count of every small cable with the
/// homology computed by the complex engine.
pub fn check_cable_bases(kp: &KirbyPresentation, alphas: &[Vec<i64>], r_max: usize) -> Result<()> {
    let mut cases = vec![];
    for a in alphas {
        let mut r = vec![0usize; kp.n];
        loop {
            let counts: Vec<(usize, usize)> = a.iter().zip(&r).map(|(&a, &r)| copies(a, r)).collect();
            if counts.iter().map(|(x, y)| x + y).sum::<usize>() <= CHECK_CIRCLES {
                cases.push((a.clone(), r.clone(), counts));
            }
            if !bump(&mut r, |_, x| {
                if *x < r_max {
                    *x += 1;
                    true
                } else {
                    *x = 0;
                    false
                }
            }) {
                break;
            }
        }
    }
    cases.par_iter().try_for_each(|(a, r, counts)| {
        let w = kp.cable(counts)?;
        let table = if w.gens.is_empty() {
            BigradedDims::from([((0, 0), 1)])
        } else {
            w.diagram()?.khovanov_complex(kp.compute.field).homology_table()?
        };
        let mut expect = BigradedDims::new();
        let mut gens = vec![];
        let base = CableGen { alpha: a.clone(), r: r.clone(), xs: vec![(0, 0); a.len()] };
        all_labels(&base, &mut gens);
        let shift: usize = counts.iter().map(|(x, y)| x + y).sum();
        for g in gens {
            // every basis vector counted with its multiplicity as a monomial
            let q = -g.0.j() - shift as i32;
            *expect.entry((0, q)).or_insert(0) += g.1;
        }
        if table != expect {
            return Err(Error::Presentation(format!("cable basis for alpha {a:?}, r {r:?}: engine {table:?}, closed form {expect:?}")));
        }
        Ok(())
    })
}

/// Every monomial of the cable (not just the coinvariant classes), grouped by
/// X counts, with multiplicities.
fn all_labels(base: &CableGen, out: &mut Vec<(CableGen, usize)>) {
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let mut v = vec![];
    enumerate_fixed(base, &mut v);
    for g in v {
        let mult = g
            .alpha
            .iter()
            .zip(&g.r)
            .zip(&g.xs)
            .map(|((&a, &r), &(xm, xp))| {
                let (km, kp) = copies(a, r);
                binom(km, xm) * binom(kp, xp)
            })
            .product();
        out.push((g, mult));
    }
}

fn enumerate_fixed(base: &CableGen, out: &mut Vec<CableGen>) {
    let mut all = vec![];
    enumerate(&base.alpha, *base.r.iter().max().unwrap_or(&0), &mut all);
    out.extend(all.into_iter().filter(|g| g.r == base.r));
}

fn kh_table(w: &TangleWord, field: Field) -> Result<BigradedDims> {
    if w.gens.is_empty() {
        return Ok(BigradedDims::from([((0, 0), 1)]));
    }
    w.diagram()?.khovanov_complex(field).homology_table()
}

/// Cable part dims per j (homological degree 0) tensored with Kh(L), with the
/// quantum grading of L negated.
fn assemble(kp: &KirbyPresentation, alphas: &[Vec<i64>], r_max: usize, l_table: &BigradedDims, three_handles: bool) -> (BigradedDims, usize) {
    let (lo, hi) = kp.compute.window;
    let qmin = l_table.keys().map(|k| k.1).min().unwrap_or(0);
    let qmax = l_table.keys().map(|k| k.1).max().unwrap_or(0);
    let qp = cabled_module(kp, alphas, r_max, (lo + qmin, (hi + qmax).min(0)), three_handles);
    let cable = qp.dims();
    let mut out = BigradedDims::new();
    for (&jk, &dk) in &cable {
        for (&(h, q), &dl) in l_table {
            let j = jk - q;
            if j >= lo && j <= hi {
                *out.entry((h, j)).or_insert(0) += dk * dl;
            }
        }
    }
    out.retain(|_, d| *d > 0);
    (out, qp.dropped)
}

/// The cabled module of the single class α′, ignoring any 3-handles.
pub fn cable_module(kp: &KirbyPresentation) -> Result<LasagnaResult> {
    if kp.l_handles.iter().any(|w| !w.0.is_empty()) {
        return Err(Error::Config("the cabled module needs L away from the 1-handles".into()));
    }
    truncated(kp, &[kp.compute.alpha.clone()], false, vec![])
}

pub fn full_pipeline(kp: &KirbyPresentation) -> Result<LasagnaResult> {
    let field = kp.compute.field;
    let (lo, hi) = kp.compute.window;
    let mut notes = vec![];
    let exact = |dims: BigradedDims, mode: Mode, notes: Vec<String>| {
        let stable = dims.keys().map(|&k| (k, true)).collect();
        LasagnaResult { dims, stable, mode, dropped: 0, notes }
    };
    let in_window = |d: &mut BigradedDims| d.retain(|k, _| k.1 >= lo && k.1 <= hi);
    match one_handle_reduce(kp)? {
        Reduced::NoFillings => {
            notes.push("[L] is nonzero in H_1: no lasagna fillings".into());
            return Ok(exact(BigradedDims::new(), Mode::Exact, notes));
        }
        Reduced::TwoPoint => {
            let mut dims = BigradedDims::new();
            for c in hh0_two_point(field)? {
                *dims.entry(c.bidegree).or_insert(0) += 1;
            }
            in_window(&mut dims);
            return Ok(exact(dims, Mode::Exact, notes));
        }
        Reduced::LowerBound { p } => {
            let cert = k0_lower_bound(p, kp.compute.braid_max, field)?;
            notes.push(format!("lower bound from {} braid powers on {p} strands", cert.entries.len()));
            let mut dims = BigradedDims::from([((0, 0), cert.bound)]);
            in_window(&mut dims);
            return Ok(exact(dims, Mode::LowerBound, notes));
        }
        Reduced::Drop => {
            if kp.m > 0 {
                notes.push(format!("{} 1-handle(s) away from L dropped", kp.m));
            }
        }
    }
    let alphas = alpha_classes(kp);
    if alphas.is_empty() {
        notes.push("no homology class within the alpha bound".into());
    }
    truncated(kp, &alphas, true, notes)
}

fn truncated(kp: &KirbyPresentation, alphas: &[Vec<i64>], three_handles: bool, mut notes: Vec<String>) -> Result<LasagnaResult> {
    let (lo, hi) = kp.compute.window;
    let l_table = kh_table(&kp.l, kp.compute.field)?;
    let alphas = alphas.to_vec();
    if kp.n == 0 {
        let (dims, _) = assemble(kp, &alphas, 0, &l_table, three_handles);
        if dims.is_empty() {
            notes.push("window contains no generator".into());
        }
        let stable = dims.keys().map(|&k| (k, true)).collect();
        return Ok(LasagnaResult { dims, stable, mode: Mode::Exact, dropped: 0, notes });
    }
    let r_max = kp.compute.r_max;
    check_cable_bases(kp, &alphas, r_max)?;
    let (dims, dropped) = assemble(kp, &alphas, r_max, &l_table, three_handles);
    let below = if r_max > 0 { Some(assemble(kp, &alphas, r_max - 1, &l_table, three_handles).0) } else { None };
    let mut stable = BTreeMap::new();
    let mut keys: Vec<(i32, i32)> = dims.keys().copied().collect();
    if let Some(b) = &below {
        keys.extend(b.keys().copied());
    }
    for k in keys {
        let ok = below.as_ref().map(|b| b.get(&k) == dims.get(&k)).unwrap_or(false);
        stable.insert(k, ok);
    }
    if dims.is_empty() {
        notes.push("window contains no generator".into());
        log::warn!("quantum window {lo}..{hi} contains no generator");
    }
    Ok(LasagnaResult { dims, stable, mode: Mode::Truncated, dropped, notes })
}

/// L with n_i full twists in place of the i-th handle, closed up in the 3-sphere.
pub fn twisted_link(kp: &KirbyPresentation, twists: &[i64]) -> Result<TangleWord> {
    if twists.len() != kp.m {
        return Err(Error::Config(format!("{} twist counts for {} handles", twists.len(), kp.m)));
    }
    let marks: Vec<Mark> = kp.l_handles.iter().flat_map(|w| w.0.iter().copied()).collect();
    let mut braid = TangleWord::new(BoundaryWord(marks), vec![]);
    let mut at = 0;
    for (w, &t) in kp.l_handles.iter().zip(twists) {
        if w.len() > 1 && t != 0 {
            braid = twist_insert(&braid, braid.gens.len(), at, w.len(), t)?;
        }
        at += w.len();
    }
    let mut gens = kp.l.gens.clone();
    if at > 0 {
        gens.extend(braid.closure()?.gens);
    }
    Ok(TangleWord::closed(gens))
}

/// Dimension of Kh(L(n)) at a raw Khovanov bidegree (h, q) for each twist vector.
pub fn rw_probe(kp: &KirbyPresentation, steps: &[Vec<i64>], bidegree: (i32, i32)) -> Result<Vec<usize>> {
    if steps.iter().flatten().any(|&n| n < 0) {
        return Err(Error::Config("twist counts must be nonnegative".into()));
    }
    steps
        .par_iter()
        .map(|n| Ok(kh_table(&twisted_link(kp, n)?, kp.compute.field)?.get(&bidegree).copied().unwrap_or(0)))
        .collect()
}
