//! Property checks shared by the proptest suite and the acceptance runner.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use skein::cobcat::{canonicalize, FlatTangle, RawCob, RawComponent};
use skein::complex::{deloop, gaussian_eliminate, hom_space, simplify, simplify_shuffled, ChainMap, Complex};
use skein::diagram::{movie_to_chainmap, CrossKind, Diagram, Frame, Movie, TangleWord};
use skein::lasagna::{full_pipeline, KirbyPresentation};
use skein::onehandle::trace_class;
use skein::{Coef, Field};

use super::{braid_closure_word, PRIME_KNOTS};

pub const CASES: u32 = 100;

pub fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Rational), Just(Field::Prime(2)), Just(Field::Prime(3))]
}

/// Braid letters `±(i + 1)` on `strands` strands.
pub fn braid(strands: usize, max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    let s = strands as i32;
    prop::collection::vec((1..s, any::<bool>()).prop_map(|(g, pos)| if pos { g } else { -g }), 0..=max_len)
}

pub fn closed_braid() -> impl Strategy<Value = (usize, Vec<i32>)> {
    (2usize..=3).prop_flat_map(|s| (Just(s), braid(s, 6)))
}

fn word(strands: usize, letters: &[i32]) -> TangleWord {
    TangleWord::parse(&braid_closure_word(strands, letters)).unwrap()
}

fn tce(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

pub fn check_d_squared(strands: usize, letters: &[i32], f: Field) -> Result<(), TestCaseError> {
    let d = word(strands, letters).diagram().map_err(tce)?;
    let raw = d.raw_complex(f);
    raw.check().map_err(tce)?;
    let (delooped, fwd, bwd) = deloop(&raw);
    delooped.check().map_err(tce)?;
    fwd.check().map_err(tce)?;
    bwd.check().map_err(tce)?;
    let (elim, fwd, bwd) = gaussian_eliminate(&delooped);
    elim.check().map_err(tce)?;
    fwd.check().map_err(tce)?;
    bwd.check().map_err(tce)?;
    let s = simplify(&raw, true);
    s.complex.check().map_err(tce)?;
    s.forward.unwrap().check().map_err(tce)?;
    d.khovanov_complex(f).check().map_err(tce)?;
    Ok(())
}

/// Random raw cobordism on `loops` loops: a random partition into components.
pub fn raw_cobs() -> impl Strategy<Value = (usize, Vec<(i64, Vec<(usize, usize, usize)>)>)> {
    (1usize..=5).prop_flat_map(|loops| {
        let cob = (-3i64..=3, prop::collection::vec((0..loops, 0usize..=2, 0usize..=2), loops..=loops));
        (Just(loops), prop::collection::vec(cob, 1..=3))
    })
}

pub fn check_canonicalize_idempotent(loops: usize, cobs: &[(i64, Vec<(usize, usize, usize)>)], f: Field) -> Result<(), TestCaseError> {
    // loop i goes to component label cobs[..].1[i].0; genus and dots taken from the first loop of each component
    let raw: Vec<RawCob> = cobs
        .iter()
        .map(|(c, spec)| {
            let mut comps: Vec<RawComponent> = vec![];
            let mut owner: std::collections::BTreeMap<usize, usize> = Default::default();
            for (i, &(label, genus, dots)) in spec.iter().enumerate() {
                match owner.get(&label) {
                    Some(&k) => comps[k].loops.push(i),
                    None => {
                        owner.insert(label, comps.len());
                        comps.push(RawComponent { loops: vec![i], genus, dots });
                    }
                }
            }
            RawCob { coef: f.int(*c), components: comps }
        })
        .collect();
    let once = canonicalize(&raw);
    let twice = canonicalize(&once.to_raw(loops));
    prop_assert_eq!(&once, &twice);
    prop_assert_eq!(canonicalize(&twice.to_raw(loops)), twice);
    Ok(())
}

pub fn check_order_invariance(strands: usize, letters: &[i32], seed: u64, f: Field) -> Result<(), TestCaseError> {
    let raw = word(strands, letters).diagram().map_err(tce)?.raw_complex(f);
    let reference = raw.homology_table().map_err(tce)?;
    let shuffled = simplify_shuffled(&raw, seed);
    shuffled.check().map_err(tce)?;
    prop_assert_eq!(shuffled.homology_table().map_err(tce)?, reference);
    Ok(())
}

#[derive(Clone, Debug)]
pub enum Move {
    R1 { level: usize, at: usize, plus: bool },
    R2 { level: usize, at: usize, plus: bool },
    /// insert σ_a σ_b σ_a (σ_b σ_a σ_b)⁻¹ into the braid
    R3 { pos: usize, first: bool },
}

pub fn moves() -> impl Strategy<Value = Move> {
    prop_oneof![
        (0usize..40, 0usize..8, any::<bool>()).prop_map(|(level, at, plus)| Move::R1 { level, at, plus }),
        (0usize..40, 0usize..8, any::<bool>()).prop_map(|(level, at, plus)| Move::R2 { level, at, plus }),
        (0usize..8, any::<bool>()).prop_map(|(pos, first)| Move::R3 { pos, first }),
    ]
}

pub fn check_reidemeister(strands: usize, letters: &[i32], mv: &Move, f: Field) -> Result<(), TestCaseError> {
    let w = word(strands, letters);
    let moved = match *mv {
        Move::R1 { level, at, plus } | Move::R2 { level, at, plus } => {
            let level = level % (w.gens.len() + 1);
            let width = TangleWord::new(w.source.clone(), w.gens[..level].to_vec()).target().map_err(tce)?.len();
            let kind = if plus { CrossKind::Plus } else { CrossKind::Minus };
            let frame = match mv {
                Move::R1 { .. } if width > 0 => Frame::R1 { level, at: at % width, kind },
                Move::R2 { .. } if width > 1 => Frame::R2 { level, at: at % (width - 1), kind },
                _ => return Ok(()),
            };
            let words = Movie { start: w.clone(), frames: vec![frame] }.words().map_err(tce)?;
            words[1].clone()
        }
        Move::R3 { pos, first } => {
            if strands < 3 {
                return Ok(());
            }
            let (a, b) = if first { (1, 2) } else { (2, 1) };
            let mut l = letters.to_vec();
            let at = pos % (l.len() + 1);
            l.splice(at..at, [a, b, a, -b, -a, -b]);
            word(strands, &l)
        }
    };
    let before = w.diagram().map_err(tce)?.khovanov_complex(f).homology_table().map_err(tce)?;
    let after = moved.diagram().map_err(tce)?.khovanov_complex(f).homology_table().map_err(tce)?;
    prop_assert_eq!(before, after);
    Ok(())
}

/// Minimal complexes of a few long knots with their pairwise hom spaces.
pub struct TracePool {
    pub complexes: Vec<Complex>,
}

impl TracePool {
    pub fn new() -> Self {
        let mut complexes = vec![];
        for (_, pd, _) in PRIME_KNOTS.iter().take(3) {
            for cut in [1, 2] {
                let (long, _) = Diagram::from_pd(pd).unwrap().cut(cut).unwrap();
                for d in [long.clone(), long.mirror()] {
                    let c = simplify(&d.khovanov_complex(Field::Rational), false).complex;
                    complexes.push(c.with_ends(&[0, 1]).unwrap());
                }
            }
        }
        complexes.push(Complex::single(Field::Rational, FlatTangle::from_arcs(&[(0, 1)], 0).unwrap(), 0, 0));
        TracePool { complexes }
    }
}

pub fn trace_inputs(pool: usize) -> impl Strategy<Value = (usize, usize, i32, i32, Vec<i64>, Vec<i64>)> {
    (0..pool, 0..pool, -1i32..=1, prop_oneof![Just(0i32), Just(2), Just(-2), Just(4)], prop::collection::vec(-2i64..=2, 4), prop::collection::vec(-2i64..=2, 4))
}

fn combo(basis: &[ChainMap], coefs: &[i64], f: Field) -> Option<ChainMap> {
    let mut acc: Option<ChainMap> = None;
    for (m, &c) in basis.iter().zip(coefs.iter().cycle()) {
        let t = m.scale(&f.int(c));
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t),
        });
    }
    acc
}

fn sorted(v: Vec<(skein::onehandle::HH0Class, Coef)>) -> Vec<(skein::onehandle::HH0Class, Coef)> {
    let mut v = v;
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

/// tr(g∘f) = (−1)^{|f||g|} tr(f∘g) for f: A → B, g: B → A.
pub fn check_trace_commutator(pool: &TracePool, a: usize, b: usize, h: i32, q: i32, cf: &[i64], cg: &[i64]) -> Result<(), TestCaseError> {
    let f = Field::Rational;
    let (ca, cb) = (&pool.complexes[a], &pool.complexes[b]);
    let fs = hom_space(ca, cb, h, q);
    let gs = hom_space(cb, ca, -h, -q);
    let (Some(fm), Some(gm)) = (combo(&fs, cf, f), combo(&gs, cg, f)) else { return Ok(()) };
    let on_a = sorted(trace_class(&fm.then(&gm)).map_err(tce)?);
    let on_b = sorted(trace_class(&gm.then(&fm)).map_err(tce)?);
    let sign = if (h * h) % 2 == 0 { f.one() } else { f.int(-1) };
    let on_b: Vec<_> = on_b.into_iter().map(|(c, x)| (c, &x * &sign)).collect();
    let norm = |v: Vec<(skein::onehandle::HH0Class, Coef)>| -> Vec<_> { v.into_iter().filter(|(_, x)| !x.is_zero()).collect() };
    prop_assert_eq!(norm(on_a), norm(on_b));
    Ok(())
}

pub fn handle_inputs() -> impl Strategy<Value = (usize, Vec<i32>, usize, bool)> {
    ((2usize..=3).prop_flat_map(|s| (Just(s), braid(s, 4))), 1usize..=2, any::<bool>()).prop_map(|((s, b), m, c)| (s, b, m, c))
}

fn kirby_text(l: &str, m: usize, cancel: bool) -> String {
    let mut s = format!("[handles]\nm = {m}\n");
    if cancel {
        s += "n = 1\np = 1\n[K]\nword = \"cup 0\\ncap 0\"\n[sigma.1]\ncounts = [[0, 1]]\n";
    }
    s += &format!("[L]\nword = \"\"\"\n{l}\"\"\"\n[compute]\nrmax = 2\nwindow = [-8, 8]\n");
    s
}

/// Adding 1-handles away from L leaves every dimension unchanged.
pub fn check_handle_independence(strands: usize, letters: &[i32], m: usize, cancel: bool) -> Result<(), TestCaseError> {
    let l = braid_closure_word(strands, letters);
    let base = full_pipeline(&KirbyPresentation::parse(&kirby_text(&l, 0, cancel)).map_err(tce)?).map_err(tce)?;
    let more = full_pipeline(&KirbyPresentation::parse(&kirby_text(&l, m, cancel)).map_err(tce)?).map_err(tce)?;
    prop_assert_eq!(base.dims, more.dims);
    Ok(())
}

/// Checks d² = 0 on movie maps along random Reidemeister II frames.
pub fn check_movie_maps(strands: usize, letters: &[i32], level: usize, at: usize, f: Field) -> Result<(), TestCaseError> {
    let w = word(strands, letters);
    let level = level % (w.gens.len() + 1);
    let width = TangleWord::new(w.source.clone(), w.gens[..level].to_vec()).target().map_err(tce)?.len();
    if width < 2 {
        return Ok(());
    }
    let m = movie_to_chainmap(&Movie { start: w, frames: vec![Frame::R2 { level, at: at % (width - 1), kind: CrossKind::Plus }] }, f).map_err(tce)?;
    m.map.check().map_err(tce)?;
    Ok(())
}

/// Run one suite of `CASES` cases; returns the failure message, if any.
pub fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map(|_| CASES).map_err(|e| e.to_string())
}
