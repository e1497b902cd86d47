//! Exact affine composition of branch sequences.
//!
//! Following branches `s_1 .. s_k` maps `x` to `A x + B` with
//! `A = Π m_{s_j} / d` (the product λ) and an order-dependent offset `B`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::mapping::MappingDef;
use crate::ratio::ExactRatio;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub slope: ExactRatio,
    pub offset: ExactRatio,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            slope: ExactRatio::one(),
            offset: ExactRatio::zero(),
        }
    }

    /// The single branch `x -> (m x - r) / d`.
    pub fn branch(mapping: &MappingDef, index: usize) -> Self {
        let b = mapping.branch(index);
        let d = mapping.d() as i64;
        AffineMap {
            slope: ExactRatio::new(b.m, d),
            offset: ExactRatio::new(-b.r, d),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        AffineMap {
            slope: &self.slope * &next.slope,
            offset: ExactRatio::from(
                next.slope.as_rational() * self.offset.as_rational() + next.offset.as_rational(),
            ),
        }
    }

    pub fn eval(&self, x: &BigInt) -> ExactRatio {
        ExactRatio::from(
            self.slope.as_rational() * BigRational::from_integer(x.clone())
                + self.offset.as_rational(),
        )
    }

    /// Fixed point `B / (1 - A)`, or `None` when the slope is exactly one.
    pub fn fixed_point(&self) -> Option<ExactRatio> {
        let one_minus = BigRational::one() - self.slope.as_rational();
        if one_minus.is_zero() {
            return None;
        }
        Some(ExactRatio::from(self.offset.as_rational() / one_minus))
    }
}

/// Composes the branches of `sequence` in order.
pub fn compose_affine(mapping: &MappingDef, sequence: &[usize]) -> AffineMap {
    sequence
        .iter()
        .fold(AffineMap::identity(), |acc, &b| acc.then(&AffineMap::branch(mapping, b)))
}
