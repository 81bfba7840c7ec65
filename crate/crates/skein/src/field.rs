//! Exact coefficient fields: the rationals and prime fields.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    pub fn prime(p: u32) -> Result<Field> {
        if p < 2 || !(2..).take_while(|d: &u32| (*d as u64) * (*d as u64) <= p as u64).all(|d| p % d != 0) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(self) -> Coef {
        self.int(0)
    }

    pub fn one(self) -> Coef {
        self.int(1)
    }

    pub fn int(self, n: i64) -> Coef {
        match self {
            Field::Rational => Coef::Q(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Coef::P(n.rem_euclid(p as i64) as u32, p),
        }
    }

    /// Parse an element written by `Coef`'s `Display`.
    pub fn coef(self, s: &str) -> Result<Coef> {
        let bad = || Error::Config(format!("bad coefficient '{s}' for {self}"));
        match self {
            Field::Rational => s.trim().parse::<BigRational>().map(Coef::Q).map_err(|_| bad()),
            Field::Prime(p) => {
                let v: i64 = s.trim().parse().map_err(|_| bad())?;
                Ok(Coef::P(v.rem_euclid(p as i64) as u32, p))
            }
        }
    }

    pub fn characteristic(self) -> u32 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => p,
        }
    }

    pub fn parse(s: &str) -> Result<Field> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "q" | "rational" | "rationals" | "0" => Ok(Field::Rational),
            _ => {
                let digits = t.trim_start_matches("f").trim_start_matches("p").trim_start_matches('_');
                let p: u32 = digits
                    .parse()
                    .map_err(|_| Error::Config(format!("unknown field '{s}'")))?;
                Field::prime(p)
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F{p}"),
        }
    }
}

/// A field element. Prime-field values carry their modulus.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Coef {
    Q(BigRational),
    P(u32, u32),
}

impl Coef {
    pub fn field(&self) -> Field {
        match self {
            Coef::Q(_) => Field::Rational,
            Coef::P(_, p) => Field::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Q(q) => q.is_zero(),
            Coef::P(v, _) => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coef::Q(q) => q.is_one(),
            Coef::P(v, _) => *v == 1,
        }
    }

    pub fn inv(&self) -> Coef {
        match self {
            Coef::Q(q) => {
                assert!(!q.is_zero(), "inverse of zero");
                Coef::Q(q.recip())
            }
            Coef::P(v, p) => {
                assert!(*v != 0, "inverse of zero");
                let (mut e, mut b, mut r) = (*p as u64 - 2, *v as u64, 1u64);
                while e > 0 {
                    if e & 1 == 1 {
                        r = r * b % *p as u64;
                    }
                    b = b * b % *p as u64;
                    e >>= 1;
                }
                Coef::P(r as u32, *p)
            }
        }
    }

    pub fn is_integral(&self) -> bool {
        match self {
            Coef::Q(q) => q.is_integer(),
            Coef::P(..) => true,
        }
    }

    /// Small integer value, when it is one (rationals only; prime fields use the
    /// symmetric representative).
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Coef::Q(q) if q.is_integer() => q.to_integer().to_i64(),
            Coef::Q(_) => None,
            Coef::P(v, p) => {
                let v = *v as i64;
                let p = *p as i64;
                Some(if v > p / 2 { v - p } else { v })
            }
        }
    }

    pub fn numer_abs(&self) -> BigInt {
        match self {
            Coef::Q(q) => q.numer().abs(),
            Coef::P(v, _) => BigInt::from(*v),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Coef::Q(q) => q.denom().clone(),
            Coef::P(..) => BigInt::one(),
        }
    }

    pub fn scale_int(&self, n: &BigInt) -> Coef {
        match self {
            Coef::Q(q) => Coef::Q(q * BigRational::from_integer(n.clone())),
            Coef::P(v, p) => {
                let m = n.mod_floor(&BigInt::from(*p)).to_u64().unwrap();
                Coef::P(((*v as u64 * m) % *p as u64) as u32, *p)
            }
        }
    }
}

impl fmt::Debug for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Q(q) => write!(f, "{q}"),
            Coef::P(v, _) => write!(f, "{v}"),
        }
    }
}

fn mismatch(a: &Coef, b: &Coef) -> ! {
    panic!("coefficient field mismatch: {} vs {}", a.field(), b.field())
}

impl Add for &Coef {
    type Output = Coef;
    fn add(self, rhs: &Coef) -> Coef {
        match (self, rhs) {
            (Coef::Q(a), Coef::Q(b)) => Coef::Q(a + b),
            (Coef::P(a, p), Coef::P(b, q)) if p == q => Coef::P(((*a as u64 + *b as u64) % *p as u64) as u32, *p),
            _ => mismatch(self, rhs),
        }
    }
}

impl Sub for &Coef {
    type Output = Coef;
    fn sub(self, rhs: &Coef) -> Coef {
        match (self, rhs) {
            (Coef::Q(a), Coef::Q(b)) => Coef::Q(a - b),
            (Coef::P(a, p), Coef::P(b, q)) if p == q => {
                Coef::P(((*a as u64 + *p as u64 - *b as u64) % *p as u64) as u32, *p)
            }
            _ => mismatch(self, rhs),
        }
    }
}

impl Mul for &Coef {
    type Output = Coef;
    fn mul(self, rhs: &Coef) -> Coef {
        match (self, rhs) {
            (Coef::Q(a), Coef::Q(b)) => Coef::Q(a * b),
            (Coef::P(a, p), Coef::P(b, q)) if p == q => Coef::P(((*a as u64 * *b as u64) % *p as u64) as u32, *p),
            _ => mismatch(self, rhs),
        }
    }
}

impl Neg for &Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        match self {
            Coef::Q(a) => Coef::Q(-a),
            Coef::P(a, p) => Coef::P((*p - *a) % *p, *p),
        }
    }
}

impl Neg for Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        -&self
    }
}

impl AddAssign<&Coef> for Coef {
    fn add_assign(&mut self, rhs: &Coef) {
        *self = &*self + rhs;
    }
}
