//! Exact rational scalars, p-adic valuations and level bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational scalar. All apartment geometry is done over this type.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Renders a rational as `num` or `num/den`, the format used in all JSON
/// interfaces of this crate.
pub fn rat_to_string(x: &Rat) -> String {
    x.to_string()
}

pub fn rat_from_str(s: &str) -> Result<Rat, String> {
    s.trim()
        .parse::<Rat>()
        .map_err(|e| format!("bad rational {s:?}: {e}"))
}

/// A valuation value: finite or +infinity (the valuation of 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Val {
    Fin(i64),
    Inf,
}

impl Val {
    pub fn is_finite(self) -> bool {
        matches!(self, Val::Fin(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Fin(v) => Some(v),
            Val::Inf => None,
        }
    }

    pub fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::Fin(a), Val::Fin(b)) => Val::Fin(a + b),
            _ => Val::Inf,
        }
    }

    pub fn min(self, other: Val) -> Val {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn as_rat(self) -> Option<Rat> {
        self.finite().map(rat_int)
    }
}

impl std::fmt::Display for Val {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Val::Fin(v) => write!(f, "{v}"),
            Val::Inf => write!(f, "inf"),
        }
    }
}

fn int_val(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

/// Exact p-adic valuation of a rational; `Val::Inf` for zero.
pub fn padic_val(x: &Rat, p: u64) -> Val {
    if x.is_zero() {
        return Val::Inf;
    }
    Val::Fin(int_val(x.numer(), p) - int_val(x.denom(), p))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Serde helpers rendering rationals as `"num/den"` strings, the format
/// used by every JSON interface in this crate.
pub mod serde_rat {
    use super::{rat_from_str, rat_to_string, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rat_vec {
    use super::{rat_from_str, rat_to_string, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(rat_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let ss = Vec::<String>::deserialize(d)?;
        ss.iter()
            .map(|s| rat_from_str(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// The value set a wall level may come from: a discrete subgroup of the
/// line with a positive generator, or the whole line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueGroup {
    Discrete(#[serde(with = "serde_rat")] Rat),
    FullLine,
}

impl ValueGroup {
    pub fn integers() -> Self {
        ValueGroup::Discrete(Rat::one())
    }

    pub fn contains(&self, x: &Rat) -> bool {
        match self {
            ValueGroup::FullLine => true,
            ValueGroup::Discrete(g) => (x / g).is_integer(),
        }
    }

    /// Least element `>= x` (or `> x` when `strict`). `None` when no least
    /// element exists, which happens exactly for the full line with a
    /// strict bound.
    pub fn least_geq(&self, x: &Rat, strict: bool) -> Option<Rat> {
        match self {
            ValueGroup::FullLine => {
                if strict {
                    None
                } else {
                    Some(x.clone())
                }
            }
            ValueGroup::Discrete(g) => {
                let q = x / g;
                let c = q.ceil();
                let mut k = c.clone();
                if strict && c == q {
                    k += Rat::one();
                }
                Some(k * g)
            }
        }
    }
}

/// Supremum of a linear form over a shape, with germ semantics.
///
/// `attained = false` records that the supremum is a limit over the
/// elements of a filter: a level has to be strictly larger than the value
/// to dominate some element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    Fin { value: Rat, attained: bool },
    PosInf,
}

impl Bound {
    pub fn at(value: Rat) -> Bound {
        Bound::Fin {
            value,
            attained: true,
        }
    }

    pub fn limit(value: Rat) -> Bound {
        Bound::Fin {
            value,
            attained: false,
        }
    }

    /// Max of two bounds (sup over a union).
    pub fn join(self, other: Bound) -> Bound {
        use Bound::*;
        match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, b) => b,
            (a, NegInf) => a,
            (
                Fin {
                    value: a,
                    attained: aa,
                },
                Fin {
                    value: b,
                    attained: ab,
                },
            ) => match a.cmp(&b) {
                std::cmp::Ordering::Less => Fin {
                    value: b,
                    attained: ab,
                },
                std::cmp::Ordering::Greater => Fin {
                    value: a,
                    attained: aa,
                },
                std::cmp::Ordering::Equal => Fin {
                    value: a,
                    attained: aa || ab,
                },
            },
        }
    }

    /// Sum of two bounds (sup over a Minkowski sum). `NegInf` absorbs
    /// anything except `PosInf`; a `NegInf + PosInf` query never arises for
    /// the shapes in this crate and is rejected loudly.
    pub fn add(self, other: Bound) -> Bound {
        use Bound::*;
        match (self, other) {
            (NegInf, PosInf) | (PosInf, NegInf) => {
                panic!("sup over a shape with both infinities in the same direction")
            }
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (
                Fin {
                    value: a,
                    attained: aa,
                },
                Fin {
                    value: b,
                    attained: ab,
                },
            ) => Fin {
                value: a + b,
                attained: aa && ab,
            },
        }
    }

    /// Does the level `lambda` dominate this supremum, i.e. is the shape
    /// inside `{ f <= lambda }` (some element of it, for filters)?
    pub fn dominated_by(&self, lambda: &Rat) -> bool {
        match self {
            Bound::NegInf => true,
            Bound::PosInf => false,
            Bound::Fin { value, attained } => {
                if *attained {
                    lambda >= value
                } else {
                    lambda > value
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padic_values() {
        assert_eq!(padic_val(&rat_int(8), 2), Val::Fin(3));
        assert_eq!(padic_val(&rat(3, 4), 2), Val::Fin(-2));
        assert_eq!(padic_val(&rat_int(0), 2), Val::Inf);
        assert_eq!(padic_val(&rat(9, 5), 3), Val::Fin(2));
        // ultrametric on a couple of samples
        let a = rat(6, 1);
        let b = rat(10, 1);
        let s = &a + &b;
        assert!(padic_val(&s, 2) >= padic_val(&a, 2).min(padic_val(&b, 2)));
        assert_eq!(
            padic_val(&(&a * &b), 2),
            padic_val(&a, 2).add(padic_val(&b, 2))
        );
    }

    #[test]
    fn value_group_rounding() {
        let z = ValueGroup::integers();
        assert_eq!(z.least_geq(&rat(-3, 10), false), Some(rat_int(0)));
        assert_eq!(z.least_geq(&rat(3, 10), false), Some(rat_int(1)));
        assert_eq!(z.least_geq(&rat_int(2), false), Some(rat_int(2)));
        assert_eq!(z.least_geq(&rat_int(2), true), Some(rat_int(3)));
        let r = ValueGroup::FullLine;
        assert_eq!(r.least_geq(&rat(3, 10), false), Some(rat(3, 10)));
        assert_eq!(r.least_geq(&rat(3, 10), true), None);
        let half = ValueGroup::Discrete(rat(1, 2));
        assert_eq!(half.least_geq(&rat(3, 10), false), Some(rat(1, 2)));
        assert!(half.contains(&rat(-5, 2)));
        assert!(!half.contains(&rat(1, 3)));
    }

    #[test]
    fn bound_algebra() {
        let a = Bound::at(rat_int(1));
        let b = Bound::limit(rat_int(1));
        assert_eq!(a.clone().join(b.clone()), Bound::at(rat_int(1)));
        assert_eq!(
            a.clone().add(b.clone()),
            Bound::limit(rat_int(2))
        );
        assert!(a.dominated_by(&rat_int(1)));
        assert!(!b.dominated_by(&rat_int(1)));
        assert!(b.dominated_by(&rat(11, 10)));
        assert!(Bound::NegInf.dominated_by(&rat_int(-1000)));
        assert!(!Bound::PosInf.dominated_by(&rat_int(1000)));
    }

    #[test]
    fn rational_strings() {
        let x = rat(-3, 4);
        assert_eq!(rat_to_string(&x), "-3/4");
        assert_eq!(rat_from_str("-3/4").unwrap(), x);
        assert_eq!(rat_from_str("7").unwrap(), rat_int(7));
    }
}
