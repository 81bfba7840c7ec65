mod common;

use common::*;
use rand::SeedableRng;
use skein::diagram::{Diagram, TangleWord};
use skein::Field;

fn engine(text: &str, field: Field) -> std::collections::BTreeMap<(i32, i32), usize> {
    let w = TangleWord::parse(text).unwrap();
    w.diagram().unwrap().khovanov_complex(field).homology_table().unwrap()
}

#[test]
fn prime_knot_tables_are_sane() {
    for (name, pd, det) in PRIME_KNOTS {
        let quads = parse_pd_quads(pd);
        let t = khovanov_oracle(&state_data_from_pd(&quads), OracleField::Q);
        assert_eq!(determinant_from_table(&t), *det as i64, "{name}");
        assert_eq!(t.values().sum::<usize>(), det + 1, "{name}");
        let d = Diagram::from_pd(pd).unwrap();
        assert_eq!(d.components().len(), 1, "{name}");
        let e = d.khovanov_complex(Field::Rational).homology_table().unwrap();
        assert_eq!(e, t, "{name}");
    }
}

#[test]
fn braid_closures_match_cube() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..12 {
        let strands = 3;
        let len = 5;
        let b = random_braid(&mut rng, strands, len);
        let text = braid_closure_word(strands, &b);
        let sd = state_data_from_word(&text);
        for (f, of) in [(Field::Rational, OracleField::Q), (Field::prime(2).unwrap(), OracleField::P(2))] {
            assert_eq!(engine(&text, f), khovanov_oracle(&sd, of), "{b:?}");
        }
    }
}
