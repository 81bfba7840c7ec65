//! Test-side helpers: a brute-force Khovanov cube, diagram tables and random
//! diagrams. Nothing here calls into the library's algebra.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

/// A crossing with its two smoothings (label pairs) and sign.
#[derive(Clone, Debug)]
pub struct StateCrossing {
    pub zero: [(u32, u32); 2],
    pub one: [(u32, u32); 2],
    pub sign: i8,
}

/// Crossings plus crossingless arcs of a closed diagram.
#[derive(Clone, Debug, Default)]
pub struct StateData {
    pub crossings: Vec<StateCrossing>,
    pub arcs: Vec<(u32, u32)>,
}

/// From PD quadruples, using the label-successor sign rule.
pub fn state_data_from_pd(pd: &[[u32; 4]]) -> StateData {
    let crossings = pd
        .iter()
        .map(|&[i, j, k, l]| StateCrossing {
            zero: [(i, j), (k, l)],
            one: [(i, l), (j, k)],
            sign: if j as i64 - l as i64 == 1 || l as i64 - j as i64 > 1 { 1 } else { -1 },
        })
        .collect();
    StateData { crossings, arcs: vec![] }
}

/// From a word in `cup i [rev]`, `cap i`, `x+ i`, `x- i` lines, closed.
pub fn state_data_from_word(text: &str) -> StateData {
    let mut row: Vec<(u32, bool)> = vec![];
    let mut next = 0u32;
    let mut out = StateData::default();
    for line in text.lines() {
        let t: Vec<&str> = line.split('#').next().unwrap().split_whitespace().collect();
        if t.is_empty() || t[0].ends_with(':') || t[0].contains(':') {
            continue;
        }
        let at: usize = t[1].parse().unwrap();
        match t[0] {
            "cup" => {
                let rev = t.get(2) == Some(&"rev");
                row.insert(at, (next + 1, rev));
                row.insert(at, (next, !rev));
                out.arcs.push((next, next + 1));
                next += 2;
            }
            "cap" => {
                out.arcs.push((row[at].0, row[at + 1].0));
                row.drain(at..at + 2);
            }
            kind => {
                let (a, ua) = row[at];
                let (b, ub) = row[at + 1];
                let (c, d) = (next, next + 1);
                next += 2;
                let vertical = [(a, c), (b, d)];
                let turnback = [(a, b), (c, d)];
                let plus = kind == "x+";
                let same = ua == ub;
                let sign = if plus == same { 1 } else { -1 };
                let (zero, one) = if plus { (vertical, turnback) } else { (turnback, vertical) };
                out.crossings.push(StateCrossing { zero, one, sign });
                row[at] = (c, ub);
                row[at + 1] = (d, ua);
            }
        }
    }
    assert!(row.is_empty(), "oracle words must be closed");
    out
}

fn circles(arcs: &[(u32, u32)]) -> (usize, BTreeMap<u32, usize>) {
    let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
    fn find(p: &mut BTreeMap<u32, u32>, x: u32) -> u32 {
        let q = *p.entry(x).or_insert(x);
        if q == x {
            x
        } else {
            let r = find(p, q);
            p.insert(x, r);
            r
        }
    }
    for &(a, b) in arcs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let labels: Vec<u32> = parent.keys().copied().collect();
    let mut ids: BTreeMap<u32, usize> = BTreeMap::new();
    let mut of = BTreeMap::new();
    for l in labels {
        let r = find(&mut parent, l);
        let n = ids.len();
        let id = *ids.entry(r).or_insert(n);
        of.insert(l, id);
    }
    (ids.len(), of)
}

/// Field for the oracle: exact rationals or integers mod p.
#[derive(Clone, Copy, Debug)]
pub enum OracleField {
    Q,
    P(u64),
}

fn rank(rows: Vec<Vec<i64>>, field: OracleField) -> usize {
    if rows.is_empty() {
        return 0;
    }
    match field {
        OracleField::P(p) => {
            let mut m: Vec<Vec<u64>> = rows.into_iter().map(|r| r.into_iter().map(|x| x.rem_euclid(p as i64) as u64).collect()).collect();
            let cols = m[0].len();
            let mut r = 0;
            for c in 0..cols {
                let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
                m.swap(r, piv);
                let inv = modpow(m[r][c], p - 2, p);
                for i in 0..m.len() {
                    if i != r && m[i][c] != 0 {
                        let f = m[i][c] * inv % p;
                        for j in c..cols {
                            m[i][j] = (m[i][j] + p * p - f * m[r][j] % p) % p;
                        }
                    }
                }
                r += 1;
            }
            r
        }
        OracleField::Q => {
            let mut m: Vec<Vec<BigRational>> =
                rows.into_iter().map(|r| r.into_iter().map(|x| BigRational::from_integer(BigInt::from(x))).collect()).collect();
            let cols = m[0].len();
            let mut r = 0;
            for c in 0..cols {
                let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
                m.swap(r, piv);
                let inv = BigRational::one() / m[r][c].clone();
                for i in 0..m.len() {
                    if i != r && !m[i][c].is_zero() {
                        let f = &m[i][c] * &inv;
                        for j in c..cols {
                            let t = &f * &m[r][j];
                            m[i][j] -= t;
                        }
                    }
                }
                r += 1;
            }
            r
        }
    }
}

fn modpow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Khovanov homology by the cube of resolutions: `(i, j) -> dim`.
pub fn khovanov_oracle(d: &StateData, field: OracleField) -> BTreeMap<(i32, i32), usize> {
    let n = d.crossings.len();
    let npos = d.crossings.iter().filter(|c| c.sign > 0).count() as i32;
    let nneg = n as i32 - npos;
    // per state: circle count and circle id of each label
    let states: Vec<(usize, BTreeMap<u32, usize>)> = (0..1u32 << n)
        .map(|s| {
            let mut arcs = d.arcs.clone();
            for (k, c) in d.crossings.iter().enumerate() {
                let pairs = if s >> k & 1 == 1 { c.one } else { c.zero };
                arcs.extend(pairs);
            }
            circles(&arcs)
        })
        .collect();
    // generators: (state, mask of circles carrying x)
    let mut gens: BTreeMap<(i32, i32), Vec<(u32, u32)>> = BTreeMap::new();
    for s in 0..1u32 << n {
        let r = s.count_ones() as i32;
        let c = states[s as usize].0;
        for m in 0..1u32 << c {
            let q = c as i32 - 2 * m.count_ones() as i32 + r + npos - 2 * nneg;
            gens.entry((r - nneg, q)).or_default().push((s, m));
        }
    }
    let index: BTreeMap<(i32, i32), BTreeMap<(u32, u32), usize>> =
        gens.iter().map(|(k, v)| (*k, v.iter().enumerate().map(|(i, g)| (*g, i)).collect())).collect();
    // differential from (i, j) to (i + 1, j)
    let diff_rank = |i: i32, j: i32| -> usize {
        let (Some(src), Some(tgt)) = (gens.get(&(i, j)), index.get(&(i + 1, j))) else { return 0 };
        let mut rows = vec![vec![0i64; tgt.len()]; src.len()];
        for (row, &(s, m)) in src.iter().enumerate() {
            for k in 0..n {
                if s >> k & 1 == 1 {
                    continue;
                }
                let t = s | 1 << k;
                let sign = if (s & ((1 << k) - 1)).count_ones() % 2 == 0 { 1 } else { -1 };
                let (cs, ls) = (&states[s as usize].0, &states[s as usize].1);
                let (ct, lt) = (&states[t as usize].0, &states[t as usize].1);
                let c = &d.crossings[k];
                let [(a, b), (e, f)] = c.zero;
                let _ = (b, f);
                // images of source circles in the target state
                let img = |circle: usize| -> usize {
                    let l = *ls.iter().find(|(_, v)| **v == circle).unwrap().0;
                    lt[&l]
                };
                let x_on = |mask: u32, k: usize| mask >> k & 1 == 1;
                if *ct + 1 == *cs {
                    // merge circles ls[a] and ls[e]
                    let (p, q) = (ls[&a], ls[&e]);
                    if x_on(m, p) && x_on(m, q) {
                        continue;
                    }
                    let mut tm = 0u32;
                    for circ in 0..*cs {
                        if x_on(m, circ) {
                            tm |= 1 << img(circ);
                        }
                    }
                    rows[row][tgt[&(t, tm)]] += sign;
                } else {
                    // split circle ls[a] along the two arcs of the 1-smoothing
                    let p = ls[&a];
                    let (u, v) = (lt[&c.one[0].0], lt[&c.one[1].0]);
                    let mut base = 0u32;
                    for circ in 0..*cs {
                        if circ != p && x_on(m, circ) {
                            base |= 1 << img(circ);
                        }
                    }
                    if x_on(m, p) {
                        rows[row][tgt[&(t, base | 1 << u | 1 << v)]] += sign;
                    } else {
                        rows[row][tgt[&(t, base | 1 << u)]] += sign;
                        rows[row][tgt[&(t, base | 1 << v)]] += sign;
                    }
                }
                let _ = ct;
            }
        }
        rank(rows, field)
    };
    let mut out = BTreeMap::new();
    for (&(i, j), v) in &gens {
        let h = v.len() - diff_rank(i, j) - diff_rank(i - 1, j);
        if h > 0 {
            out.insert((i, j), h);
        }
    }
    out
}

/// Word text for the closure of a braid on `strands` strands; letters are
/// `±(i + 1)` for the generator at position `i`.
pub fn braid_closure_word(strands: usize, letters: &[i32]) -> String {
    let mut s = String::new();
    for j in 0..strands {
        s += &format!("cup {j} rev\n");
    }
    for &l in letters {
        let i = l.unsigned_abs() as usize - 1;
        s += &format!("{} {}\n", if l > 0 { "x+" } else { "x-" }, strands + i);
    }
    for j in (0..strands).rev() {
        s += &format!("cap {j}\n");
    }
    s
}

pub fn random_braid(rng: &mut impl Rng, strands: usize, len: usize) -> Vec<i32> {
    (0..len)
        .map(|_| {
            let g = rng.gen_range(1..strands as i32);
            if rng.gen_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect()
}

/// PD codes of the prime knots through seven crossings.
pub const PRIME_KNOTS: &[(&str, &str, usize)] = &[
    ("3_1", "X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)", 3),
    ("4_1", "X(4,2,5,1), X(8,6,1,5), X(6,3,7,4), X(2,7,3,8)", 5),
    ("5_1", "X(1,6,2,7), X(3,8,4,9), X(5,10,6,1), X(7,2,8,3), X(9,4,10,5)", 5),
    ("5_2", "X(1,4,2,5), X(3,8,4,9), X(5,10,6,1), X(9,6,10,7), X(7,2,8,3)", 7),
    ("6_1", "X(1,4,2,5), X(7,10,8,11), X(3,9,4,8), X(9,3,10,2), X(5,12,6,1), X(11,6,12,7)", 9),
    ("6_2", "X(1,4,2,5), X(5,10,6,11), X(3,9,4,8), X(9,3,10,2), X(7,12,8,1), X(11,6,12,7)", 11),
    ("6_3", "X(4,2,5,1), X(8,4,9,3), X(12,9,1,10), X(10,5,11,6), X(6,11,7,12), X(2,8,3,7)", 13),
    ("7_1", "X(1,8,2,9), X(3,10,4,11), X(5,12,6,13), X(7,14,8,1), X(9,2,10,3), X(11,4,12,5), X(13,6,14,7)", 7),
    ("7_2", "X(1,4,2,5), X(3,10,4,11), X(5,14,6,1), X(7,12,8,13), X(11,8,12,9), X(13,6,14,7), X(9,2,10,3)", 11),
    ("7_3", "X(6,2,7,1), X(10,4,11,3), X(14,8,1,7), X(8,14,9,13), X(12,6,13,5), X(2,10,3,9), X(4,12,5,11)", 13),
    ("7_4", "X(5,14,6,1), X(13,6,14,7), X(7,12,8,13), X(1,8,2,9), X(11,2,12,3), X(3,10,4,11), X(9,4,10,5)", 15),
    ("7_5", "X(9,1,10,14), X(13,9,14,8), X(7,13,8,12), X(1,7,2,6), X(5,3,6,2), X(11,5,12,4), X(3,11,4,10)", 17),
    ("7_6", "X(5,14,6,1), X(13,6,14,7), X(1,13,2,12), X(11,3,12,2), X(7,10,8,11), X(3,8,4,9), X(9,4,10,5)", 19),
    ("7_7", "X(5,14,6,1), X(13,6,14,7), X(1,13,2,12), X(7,3,8,2), X(11,9,12,8), X(3,10,4,11), X(9,4,10,5)", 21),
];

pub fn parse_pd_quads(s: &str) -> Vec<[u32; 4]> {
    s.split('X')
        .filter(|c| c.chars().any(|ch| ch.is_ascii_digit()))
        .map(|c| {
            let v: Vec<u32> = c.split(|ch: char| !ch.is_ascii_digit()).filter(|t| !t.is_empty()).map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

/// Knot determinant read off a homology table: the Euler characteristic
/// divided by `q + q^-1`, evaluated at `q = sqrt(-1)`.
pub fn determinant_from_table(t: &BTreeMap<(i32, i32), usize>) -> i64 {
    let mut coef: BTreeMap<i32, i64> = BTreeMap::new();
    for (&(i, j), &d) in t {
        *coef.entry(j).or_default() += if i.rem_euclid(2) == 0 { 1 } else { -1 } * d as i64;
    }
    let lo = *coef.keys().next().unwrap();
    // polynomial in q with exponent offset lo, divided by (q^2 + 1)
    let mut p: Vec<i64> = vec![0; (coef.keys().last().unwrap() - lo + 1) as usize];
    for (j, c) in &coef {
        p[(j - lo) as usize] = *c;
    }
    let mut quot = vec![0i64; p.len().saturating_sub(2)];
    for k in (2..p.len()).rev() {
        let c = p[k];
        quot[k - 2] = c;
        p[k] -= c;
        p[k - 2] -= c;
    }
    assert!(p.iter().all(|c| *c == 0), "Euler characteristic not divisible by q + 1/q");
    let (mut re, mut im) = (0i64, 0i64);
    for (k, c) in quot.iter().enumerate() {
        match k % 4 {
            0 => re += c,
            1 => im += c,
            2 => re -= c,
            _ => im -= c,
        }
    }
    ((re * re + im * im) as f64).sqrt().round() as i64
}
pub mod props;
