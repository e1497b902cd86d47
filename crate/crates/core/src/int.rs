//! Integer backends for the hot loops.
//!
//! Trajectory walking and sequence enumeration are generic over [`Int`] so
//! the same code runs on `i128` when every intermediate value provably fits
//! and on [`BigInt`] otherwise. Callers pick the backend with
//! [`fits_i128`] before entering the loop.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

/// Signed integer usable as a trajectory value.
pub trait Int: Integer + Signed + Clone + Hash + Debug + ToPrimitive + Send + Sync {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn from_i64(v: i64) -> Self;
}

impl Int for i128 {
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

impl Int for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

/// Headroom kept below `i128::MAX` so sums of a few bounded terms never wrap.
const I128_HEADROOM_BITS: u64 = 4;

/// True when `|bound|` stays comfortably inside `i128`.
pub fn fits_i128(bound: &BigInt) -> bool {
    bound.bits() + I128_HEADROOM_BITS < 127
}

/// Branch parameters converted into a backend.
#[derive(Clone, Debug)]
pub struct StepTable<T> {
    pub d: T,
    pub branches: Vec<(T, T)>,
}

impl<T: Int> StepTable<T> {
    /// One application: returns the next value and the residue class used.
    #[inline]
    pub fn apply(&self, x: &T) -> (T, usize) {
        let b = x.mod_floor(&self.d);
        let idx = b.to_usize().expect("residue fits usize");
        let (m, r) = &self.branches[idx];
        ((m.clone() * x.clone() - r.clone()) / self.d.clone(), idx)
    }
}
