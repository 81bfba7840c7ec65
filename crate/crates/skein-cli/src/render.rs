//! Tables and Poincaré polynomials.

use std::collections::BTreeMap;
use std::fmt::Write;

use skein::complex::BigradedDims;

fn term(dim: usize, j: i32) -> String {
    let mono = match j {
        0 => String::new(),
        1 => "q".into(),
        _ => format!("q^{{{j}}}"),
    };
    match (dim, mono.is_empty()) {
        (d, true) => d.to_string(),
        (1, false) => mono,
        (d, false) => format!("{d}{mono}"),
    }
}

/// One line per homological degree, e.g. `i=0: q^{-1}+q`.
pub fn poincare(dims: &BigradedDims) -> String {
    let mut rows: BTreeMap<i32, Vec<String>> = BTreeMap::new();
    for (&(i, j), &d) in dims {
        if d > 0 {
            rows.entry(i).or_default().push(term(d, j));
        }
    }
    if rows.is_empty() {
        return "0\n".into();
    }
    let mut out = String::new();
    for (i, terms) in rows {
        writeln!(out, "i={i}: {}", terms.join("+")).unwrap();
    }
    out
}

pub fn table(dims: &BigradedDims, qname: &str, stable: Option<&BTreeMap<(i32, i32), bool>>) -> String {
    let mut out = String::new();
    match stable {
        Some(_) => writeln!(out, "i\t{qname}\tdim\tstable").unwrap(),
        None => writeln!(out, "i\t{qname}\tdim").unwrap(),
    }
    for (&(i, j), &d) in dims {
        match stable {
            Some(s) => {
                let flag = if s.get(&(i, j)).copied().unwrap_or(false) { "yes" } else { "no" };
                writeln!(out, "{i}\t{j}\t{d}\t{flag}").unwrap()
            }
            None => writeln!(out, "{i}\t{j}\t{d}").unwrap(),
        }
    }
    out
}

pub fn dims_json(dims: &BigradedDims, qname: &str, stable: Option<&BTreeMap<(i32, i32), bool>>) -> serde_json::Value {
    dims.iter()
        .map(|(&(i, j), &d)| {
            let mut e = serde_json::json!({ "i": i, qname: j, "dim": d });
            if let Some(s) = stable {
                e["stable"] = serde_json::Value::Bool(s.get(&(i, j)).copied().unwrap_or(false));
            }
            e
        })
        .collect()
}
