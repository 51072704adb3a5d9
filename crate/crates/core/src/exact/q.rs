//! Exact rationals with an `i64` fast path that promotes to big integers on
//! overflow. Values are kept canonical: `Big` only when the reduced fraction
//! does not fit in `i64`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::rational::Rat;

#[derive(Clone, Debug)]
pub enum Q {
    Small(Ratio<i64>),
    Big(Rat),
}

impl Q {
    pub fn zero() -> Q {
        Q::Small(Ratio::from_integer(0))
    }

    pub fn one() -> Q {
        Q::Small(Ratio::from_integer(1))
    }

    pub fn from_i64(n: i64) -> Q {
        Q::Small(Ratio::from_integer(n))
    }

    pub fn from_rat(r: &Rat) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Q::Small(Ratio::new_raw(n, d)),
            _ => Q::Big(r.clone()),
        }
    }

    pub fn to_rat(&self) -> Rat {
        match self {
            Q::Small(r) => Rat::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Q::Big(r) => r.clone(),
        }
    }

    fn big(&self) -> Rat {
        self.to_rat()
    }

    fn demote(r: Rat) -> Q {
        Q::from_rat(&r)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::Small(r) => r.is_zero(),
            Q::Big(r) => r.is_zero(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::Small(r) => r.is_integer(),
            Q::Big(r) => r.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Q::Small(r) => r.numer().signum() as i32,
            Q::Big(r) => {
                if r.is_positive() {
                    1
                } else if r.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn add(&self, o: &Q) -> Q {
        if let (Q::Small(a), Q::Small(b)) = (self, o) {
            if let Some(r) = a.checked_add(b) {
                return Q::Small(r);
            }
        }
        Q::demote(self.big() + o.big())
    }

    pub fn sub(&self, o: &Q) -> Q {
        if let (Q::Small(a), Q::Small(b)) = (self, o) {
            if let Some(r) = a.checked_sub(b) {
                return Q::Small(r);
            }
        }
        Q::demote(self.big() - o.big())
    }

    pub fn mul(&self, o: &Q) -> Q {
        if let (Q::Small(a), Q::Small(b)) = (self, o) {
            if let Some(r) = a.checked_mul(b) {
                return Q::Small(r);
            }
        }
        Q::demote(self.big() * o.big())
    }

    /// Panics on division by zero.
    pub fn div(&self, o: &Q) -> Q {
        assert!(!o.is_zero(), "division by zero");
        if let (Q::Small(a), Q::Small(b)) = (self, o) {
            if let Some(r) = a.checked_div(b) {
                if *r.numer() != i64::MIN {
                    return Q::Small(r);
                }
            }
        }
        Q::demote(self.big() / o.big())
    }

    pub fn neg(&self) -> Q {
        match self {
            Q::Small(r) if *r.numer() != i64::MIN => Q::Small(-*r),
            _ => Q::demote(-self.big()),
        }
    }

    /// `self - f * g`, the simplex update.
    pub fn sub_mul(&self, f: &Q, g: &Q) -> Q {
        self.sub(&f.mul(g))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Q::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Q::Big(r) => crate::rational::to_f64(r),
        }
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Q) -> bool {
        match (self, other) {
            (Q::Small(a), Q::Small(b)) => a == b,
            _ => self.big() == other.big(),
        }
    }
}

impl Eq for Q {}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Q) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Q) -> Ordering {
        match (self, other) {
            (Q::Small(a), Q::Small(b)) => {
                // Cross-multiply in i128 to avoid overflow.
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.big().cmp(&other.big()),
        }
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::from_i64(n)
    }
}

impl Default for Q {
    fn default() -> Q {
        Q::zero()
    }
}
