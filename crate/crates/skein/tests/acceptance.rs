//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::props;
use common::*;
use rand::SeedableRng;
use skein::complex::BigradedDims;
use skein::diagram::{Diagram, Movie, TangleWord};
use skein::lasagna::{full_pipeline, cable_module, KirbyPresentation};
use skein::onehandle::{closure_homology, decompose_diagram, hh0_two_point, k0_lower_bound, lefschetz_trace};
use skein::Field;

const SIXTY: Duration = Duration::from_secs(60);
const TEN_MIN: Duration = Duration::from_secs(600);
const FIVE: Duration = Duration::from_secs(5);

fn bundled(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../skein-cli/examples").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn engine(text: &str, f: Field) -> BigradedDims {
    TangleWord::parse(text).unwrap().diagram().unwrap().khovanov_complex(f).homology_table().unwrap()
}

const UNKNOT: &str = "cup 0\ncap 0\n";
const HOPF_POS: &str = "cup 0\ncup 2\nx+ 1\nx+ 1\ncap 2\ncap 0\n";
const HOPF_NEG: &str = "cup 0\ncup 2 rev\nx- 1\nx- 1\ncap 2\ncap 0\n";
const TREFOIL_R: &str = "cup 0\ncup 2 rev\nx+ 1\nx+ 1\nx+ 1\ncap 2\ncap 0\n";
const TREFOIL_L: &str = "cup 0\ncup 2 rev\nx- 1\nx- 1\nx- 1\ncap 2\ncap 0\n";

fn figure_eight() -> String {
    braid_closure_word(3, &[1, -2, 1, -2])
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut cases: Vec<(String, String)> = vec![
        ("unknot".into(), UNKNOT.into()),
        ("hopf+".into(), HOPF_POS.into()),
        ("hopf-".into(), HOPF_NEG.into()),
        ("trefoil R".into(), TREFOIL_R.into()),
        ("trefoil L".into(), TREFOIL_L.into()),
        ("figure-eight".into(), figure_eight()),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for k in 0..10 {
        let strands = 3 + k % 2;
        let b = random_braid(&mut rng, strands, 8);
        cases.push((format!("braid {b:?}"), braid_closure_word(strands, &b)));
    }
    for (name, text) in &cases {
        let sd = state_data_from_word(text);
        for (f, of) in [(Field::Rational, OracleField::Q), (Field::Prime(2), OracleField::P(2))] {
            if engine(text, f) != khovanov_oracle(&sd, of) {
                return Err(format!("{name} over {f} differs from the cube oracle"));
            }
        }
    }
    let t = start.elapsed();
    if t > SIXTY {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("{} diagrams over Q and F2 in {t:.1?}", cases.len()))
}

fn criterion_2() -> Result<String, String> {
    let links = [
        ("unknot", UNKNOT.to_string(), 1),
        ("2-unlink", "cup 0\ncap 0\ncup 0\ncap 0\n".to_string(), 2),
        ("hopf+", HOPF_POS.into(), 2),
        ("hopf-", HOPF_NEG.into(), 2),
        ("trefoil", TREFOIL_R.into(), 1),
        ("figure-eight", figure_eight(), 1),
    ];
    let mut seen = vec![];
    for (name, text, comps) in links {
        let w = TangleWord::parse(&text).unwrap();
        let t = lefschetz_trace(&Movie::identity(w), Field::Rational).map_err(|e| format!("{name}: {e}"))?;
        let v = t.to_i64().ok_or(format!("{name}: non-integral trace"))?;
        if v.abs() != 1 << comps {
            return Err(format!("{name}: |trace| = {}, expected {}", v.abs(), 1 << comps));
        }
        seen.push(format!("{name}={v}"));
    }
    Ok(seen.join(" "))
}

fn only_origin(d: &BigradedDims, iw: (i32, i32), jw: (i32, i32)) -> bool {
    let inside: BigradedDims = d.iter().filter(|(k, _)| k.0 >= iw.0 && k.0 <= iw.1 && k.1 >= jw.0 && k.1 <= jw.1).map(|(k, v)| (*k, *v)).collect();
    inside == BigradedDims::from([((0, 0), 1)])
}

fn criterion_3() -> Result<String, String> {
    let start = Instant::now();
    for name in ["s4.kirby", "s1xs3.kirby"] {
        let mut kp = KirbyPresentation::parse(&bundled(name)).map_err(|e| format!("{name}: {e}"))?;
        kp.compute.window = (-6, 6);
        let r = full_pipeline(&kp).map_err(|e| format!("{name}: {e}"))?;
        if !only_origin(&r.dims, (-3, 3), (-6, 6)) {
            return Err(format!("{name}: {:?}", r.dims));
        }
    }
    let t = start.elapsed();
    if t > SIXTY {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("S4 and S1xS3 are k at (0,0) in {t:.1?}"))
}

fn criterion_4() -> Result<String, String> {
    let start = Instant::now();
    let mut kp = KirbyPresentation::parse(&bundled("s2xd2_cancel.kirby")).map_err(|e| e.to_string())?;
    kp.compute.r_max = 3;
    kp.compute.alpha_bound = 3;
    kp.compute.window = (-4, 4);
    let r = full_pipeline(&kp).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    if r.dims != BigradedDims::from([((0, 0), 1)]) {
        return Err(format!("dims {:?}", r.dims));
    }
    if t > TEN_MIN {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("dim 1 at (0,0) only, r_max 3, stable={}, {t:.1?}", r.stable[&(0, 0)]))
}

/// Degree-1 monomials A0^a A1^b (b ≥ 0) with A0 in degree 0 and A1 in degree −2.
fn monomial_oracle(window: (i32, i32)) -> BTreeMap<i32, usize> {
    let mut out = BTreeMap::new();
    for b in 0..=20i32 {
        let j = -2 * b;
        if j >= window.0 && j <= window.1 {
            *out.entry(j).or_insert(0) += 1;
        }
    }
    out
}

fn criterion_5() -> Result<String, String> {
    let mut kp = KirbyPresentation::parse(&bundled("s2xd2.kirby")).map_err(|e| e.to_string())?;
    kp.compute.window = (-4, 0);
    let expect: BigradedDims = monomial_oracle((-4, 0)).into_iter().map(|(j, d)| ((0, j), d)).collect();
    for r_max in 2..=4 {
        kp.compute.r_max = r_max;
        let r = cable_module(&kp).map_err(|e| e.to_string())?;
        if r.dims != expect {
            return Err(format!("r_max {r_max}: {:?} vs {expect:?}", r.dims));
        }
    }
    Ok("dims 1 at j = 0, -2, -4 for r_max 2..4".into())
}

fn criterion_6() -> Result<String, String> {
    let start = Instant::now();
    let classes = hh0_two_point(Field::Rational).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let mut b: Vec<(i32, i32)> = classes.iter().map(|c| c.bidegree).collect();
    b.sort();
    if b != vec![(0, 0), (0, 0), (0, 2), (1, 4)] {
        return Err(format!("bidegrees {b:?}"));
    }
    if t > FIVE {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("4 classes {b:?} in {t:.1?}"))
}

fn criterion_7() -> Result<String, String> {
    let start = Instant::now();
    for (name, pd, _) in PRIME_KNOTS {
        let (long, _) = Diagram::from_pd(pd).unwrap().cut(1).unwrap();
        let pats = decompose_diagram(&long, Field::Rational).map_err(|e| format!("{name}: {e}"))?.patterns();
        let c0: usize = pats.iter().filter(|p| p.k == 0).map(|p| p.multiplicity).sum();
        if c0 != 1 || pats.iter().any(|p| p.k > 1) {
            return Err(format!("{name}: {}", pats.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")));
        }
        let oracle = khovanov_oracle(&state_data_from_pd(&parse_pd_quads(pd)), OracleField::Q);
        if closure_homology(&pats) != oracle {
            return Err(format!("{name}: closure differs from the oracle"));
        }
    }
    let t = start.elapsed();
    if t > TEN_MIN {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("{} prime knots, one C0 each, closures exact, {t:.1?}", PRIME_KNOTS.len()))
}

fn criterion_8() -> Result<String, String> {
    let start = Instant::now();
    let mut bounds = vec![];
    for max in 0..=5 {
        let cert = k0_lower_bound(2, max, Field::Rational).map_err(|e| e.to_string())?;
        if !cert.verify(Field::Rational).map_err(|e| e.to_string())? {
            return Err(format!("certificate for {max} does not verify"));
        }
        bounds.push(cert.bound);
    }
    let t = start.elapsed();
    if bounds[5] < 6 || bounds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("bounds {bounds:?}"));
    }
    if t > TEN_MIN {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("bounds {bounds:?} in {t:.1?}"))
}

fn criterion_9() -> Result<String, String> {
    use props::*;
    let start = Instant::now();
    let pool = TracePool::new();
    let n = pool.complexes.len();
    let suites: Vec<(&str, Result<u32, String>)> = vec![
        ("d2", run((closed_braid(), field()), |((s, b), f)| check_d_squared(s, &b, f))),
        ("movie-d2", run((closed_braid(), 0usize..20, 0usize..6, field()), |((s, b), l, a, f)| check_movie_maps(s, &b, l, a, f))),
        ("canonicalize", run((raw_cobs(), field()), |((l, c), f)| check_canonicalize_idempotent(l, &c, f))),
        ("order", run((closed_braid(), proptest::num::u64::ANY, field()), |((s, b), seed, f)| check_order_invariance(s, &b, seed, f))),
        ("reidemeister", run((closed_braid(), moves(), field()), |((s, b), m, f)| check_reidemeister(s, &b, &m, f))),
        ("trace", run(trace_inputs(n), |(a, b, h, q, cf, cg)| check_trace_commutator(&pool, a, b, h, q, &cf, &cg))),
        ("one-handle", run(handle_inputs(), |(s, b, m, c)| check_handle_independence(s, &b, m, c))),
    ];
    let mut parts = vec![];
    for (name, r) in suites {
        match r {
            Ok(k) => parts.push(format!("{name}:{k}")),
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    Ok(format!("{} in {:.1?}", parts.join(" "), start.elapsed()))
}

fn bundled_examples() -> Result<String, String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../skein-cli/examples");
    let mut names: Vec<String> = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    for name in &names {
        let text = bundled(name);
        let r = if name.ends_with(".kirby") {
            KirbyPresentation::parse(&text).and_then(|kp| full_pipeline(&kp)).map(|_| ())
        } else if name.ends_with(".tangle") {
            TangleWord::parse(&text).and_then(|w| {
                let d = w.diagram()?;
                if d.boundary().is_empty() {
                    d.khovanov_complex(Field::Rational).homology_table().map(|_| ())
                } else {
                    skein::onehandle::decompose_11(&w, Field::Rational).map(|_| ())
                }
            })
        } else if name.ends_with(".movie") {
            Movie::parse_frames(&text).and_then(|frames| {
                lefschetz_trace(&Movie { start: TangleWord::parse(UNKNOT).unwrap(), frames }, Field::Rational).map(|_| ())
            })
        } else {
            Ok(())
        };
        r.map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} files", names.len()))
}

fn main() {
    let checks: Vec<(&str, fn() -> Result<String, String>)> = vec![
        ("1 homology oracle", criterion_1),
        ("2 lefschetz trace", criterion_2),
        ("3 S4 and S1xS3", criterion_3),
        ("4 handle cancellation", criterion_4),
        ("5 cabled module alpha=1", criterion_5),
        ("6 two-point trace", criterion_6),
        ("7 knight-move decomposition", criterion_7),
        ("8 K0 lower bound", criterion_8),
        ("9 property suites", criterion_9),
        ("bundled examples", bundled_examples),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS criterion {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL criterion {name}: panicked");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
