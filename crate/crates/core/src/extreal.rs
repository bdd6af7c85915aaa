//! Extended reals `ℝ ∪ {−∞, +∞}` with a total order and two addition modes.
//!
//! * [`ExtReal::strict_add`] refuses `(+∞) + (−∞)`.
//! * [`ExtReal::upper_add`] resolves it to `+∞`, the convention used by
//!   upper integrals.
//!
//! NaN is never stored: constructors map it to an error or panic in debug
//! builds, so `Ord` is total.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtReal::{NegInf, PosInf};

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Builds an extended real from an `f64`, mapping `±inf` to the
    /// corresponding infinity. NaN is rejected.
    pub fn try_from_f64(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::InvalidInput("NaN is not an extended real".into()))
        } else if x == f64::INFINITY {
            Ok(PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(NegInf)
        } else {
            Ok(ExtReal::Finite(x))
        }
    }

    /// Infallible variant of [`try_from_f64`](Self::try_from_f64) for values
    /// produced by arithmetic that cannot yield NaN. Panics on NaN.
    pub fn from_f64(x: f64) -> Self {
        Self::try_from_f64(x).expect("NaN reached ExtReal::from_f64")
    }

    pub fn finite(x: f64) -> Self {
        debug_assert!(x.is_finite());
        ExtReal::Finite(x)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    /// Finite payload, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Lossy view as `f64` with infinities mapped to `±inf`.
    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            PosInf => f64::INFINITY,
        }
    }

    /// Sum that refuses `(+∞) + (−∞)`.
    pub fn strict_add(self, other: ExtReal) -> Result<ExtReal> {
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::UndefinedSum),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Ok(ExtReal::from_f64(a + b)),
        }
    }

    /// Sum with the upper-integral convention `(+∞) + (−∞) = +∞`.
    pub fn upper_add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_f64(a + b),
        }
    }

    /// Strict difference `self − other`.
    pub fn strict_sub(self, other: ExtReal) -> Result<ExtReal> {
        self.strict_add(-other)
    }

    /// Multiplication by a scalar `t > 0`; infinities keep their sign.
    pub fn scale(self, t: f64) -> ExtReal {
        assert!(t > 0.0 && t.is_finite(), "scale factor must be positive and finite");
        match self {
            ExtReal::Finite(x) => ExtReal::from_f64(t * x),
            inf => inf,
        }
    }

    /// Multiplication by `t ≥ 0` in integration mode, where `0·(±∞) = 0`.
    pub fn scale_measure(self, t: f64) -> ExtReal {
        assert!(t >= 0.0 && t.is_finite(), "measure weight must be nonnegative");
        if t == 0.0 {
            ExtReal::ZERO
        } else {
            self.scale(t)
        }
    }

    /// Positive part `max(v, 0)`.
    pub fn pos_part(self) -> ExtReal {
        self.max(ExtReal::ZERO)
    }

    /// Negative part `max(−v, 0)`.
    pub fn neg_part(self) -> ExtReal {
        (-self).max(ExtReal::ZERO)
    }

    /// Test-oriented equality: exact on infinities, absolute `tol` on finite values.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (a, b) => a == b,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
        }
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // Finite payloads are never NaN, and -0.0 == 0.0 here.
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            PosInf => write!(f, "inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Free-function form of [`ExtReal::upper_add`].
pub fn upper_sum(a: ExtReal, b: ExtReal) -> ExtReal {
    a.upper_add(b)
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NegInf => s.serialize_str("-inf"),
            PosInf => s.serialize_str("inf"),
            ExtReal::Finite(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::try_from_f64(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" | "Infinity" => Ok(PosInf),
                    "-inf" | "-Infinity" => Ok(NegInf),
                    other => Err(E::custom(format!("not an extended real: {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: fn(f64) -> ExtReal = ExtReal::Finite;

    #[test]
    fn upper_sum_examples() {
        assert_eq!(upper_sum(PosInf, NegInf), PosInf);
        assert_eq!(upper_sum(F(3.0), NegInf), NegInf);
        assert_eq!(upper_sum(F(2.0), F(5.0)), F(7.0));
    }

    #[test]
    fn strict_sum_refuses_opposite_infinities() {
        assert_eq!(PosInf.strict_add(NegInf), Err(Error::UndefinedSum));
        assert_eq!(NegInf.strict_add(PosInf), Err(Error::UndefinedSum));
        assert_eq!(PosInf.strict_add(F(-1e300)), Ok(PosInf));
    }

    #[test]
    fn order_is_total() {
        assert!(NegInf < F(-1e308));
        assert!(F(1e308) < PosInf);
        assert_eq!(F(0.0).cmp(&F(-0.0)), Ordering::Equal);
    }

    #[test]
    fn scaling() {
        assert_eq!(PosInf.scale(0.5), PosInf);
        assert_eq!(NegInf.scale(2.0), NegInf);
        assert_eq!(NegInf.scale_measure(0.0), F(0.0));
        assert_eq!(F(3.0).scale(2.0), F(6.0));
    }

    #[test]
    fn json_roundtrip() {
        let v = vec![NegInf, F(1.5), PosInf, F(-2.0)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["-inf",1.5,"inf",-2.0]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>("\"nan\"").is_err());
    }

    fn ext() -> impl Strategy<Value = ExtReal> {
        prop_oneof![
            1 => Just(NegInf),
            1 => Just(PosInf),
            6 => (-1e6f64..1e6).prop_map(F),
        ]
    }

    proptest! {
        #[test]
        fn upper_sum_commutes(a in ext(), b in ext()) {
            prop_assert_eq!(upper_sum(a, b), upper_sum(b, a));
        }

        #[test]
        fn upper_sum_monotone(a in ext(), b in ext(), c in ext()) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(upper_sum(lo, c) <= upper_sum(hi, c));
        }

        #[test]
        fn strict_agrees_with_upper_when_defined(a in ext(), b in ext()) {
            if let Ok(s) = a.strict_add(b) {
                prop_assert_eq!(s, upper_sum(a, b));
            }
        }
    }
}
