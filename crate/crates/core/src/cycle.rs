//! Cycle detection and canonical cycles.
//!
//! Step budget semantics: a start "enters a cycle within `max_steps`" when
//! the tail length plus the period is at most `max_steps`, i.e. the first
//! repeated value shows up within the first `max_steps` applications. A
//! magnitude cutoff is reported only if it is hit before that. Both the
//! plain Brent walk and the memoized walk used by range searches classify
//! every start identically under these rules.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::int::{fits_i128, Int, StepTable};
use crate::mapping::{BranchCounts, MappingDef};
use crate::serde_big;

/// A cycle listed from its least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cycle {
    #[serde(with = "serde_big::vec")]
    pub elements: Vec<BigInt>,
    pub counts: BranchCounts,
}

impl Cycle {
    pub fn period(&self) -> usize {
        self.elements.len()
    }

    pub fn min_element(&self) -> &BigInt {
        &self.elements[0]
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        self.elements.contains(x)
    }

    /// Sort key used by catalogs: `(period, min)`.
    pub fn sort_key(&self) -> (usize, BigInt) {
        (self.period(), self.min_element().clone())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycleError {
    #[error("empty element list")]
    Empty,
    #[error("element {index} maps to {got}, expected {expected}")]
    NotClosed {
        index: usize,
        expected: BigInt,
        got: BigInt,
    },
    #[error("element {0} appears more than once")]
    Repeated(BigInt),
}

/// Rotates a closed orbit so the least element comes first and records
/// the branch counts. Fails when the list is not closed under `mapping`.
pub fn canonicalize(mapping: &MappingDef, raw: &[BigInt]) -> Result<Cycle, CycleError> {
    if raw.is_empty() {
        return Err(CycleError::Empty);
    }
    let p = raw.len();
    let mut branches = Vec::with_capacity(p);
    for (j, x) in raw.iter().enumerate() {
        let (next, b) = mapping.apply(x);
        let expected = &raw[(j + 1) % p];
        if &next != expected {
            return Err(CycleError::NotClosed {
                index: j,
                expected: expected.clone(),
                got: next,
            });
        }
        branches.push(b);
    }
    let mut sorted: Vec<&BigInt> = raw.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(CycleError::Repeated(w[0].clone()));
    }
    let start = (0..p).min_by_key(|&j| &raw[j]).expect("non-empty");
    let elements = raw[start..].iter().chain(&raw[..start]).cloned().collect();
    Ok(Cycle {
        elements,
        counts: BranchCounts::from_branches(mapping.d(), branches),
    })
}

/// Follows the orbit of `x` (assumed periodic) and canonicalizes it.
pub fn orbit_cycle(mapping: &MappingDef, x: &BigInt, max_period: u64) -> Option<Cycle> {
    let mut elems = vec![x.clone()];
    let mut y = mapping.apply(x).0;
    while &y != x {
        if elems.len() as u64 >= max_period {
            return None;
        }
        elems.push(y.clone());
        y = mapping.apply(&y).0;
    }
    canonicalize(mapping, &elems).ok()
}

/// Cutoffs for a single detection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_magnitude: BigInt,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 1_000_000,
            max_magnitude: BigInt::from(10u8).pow(30),
        }
    }
}

impl Limits {
    /// Whether the `i128` backend is exact for this mapping and cutoff.
    pub fn fits_i128(&self, mapping: &MappingDef) -> bool {
        let bound = &self.max_magnitude * mapping.max_abs_m() + mapping.max_abs_r();
        fits_i128(&bound)
    }
}

/// Outcome of following one start value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Detection {
    /// Entered `cycle` after `tail` steps (0 when the start is a member).
    Entered { cycle: Cycle, tail: u64 },
    /// No repeat within `max_steps`.
    StepLimit,
    /// An iterate exceeded `max_magnitude` at `step`.
    MagnitudeLimit { step: u64 },
}

impl Detection {
    pub fn cycle(&self) -> Option<&Cycle> {
        match self {
            Detection::Entered { cycle, .. } => Some(cycle),
            _ => None,
        }
    }
}

/// Follows `start` until it enters a cycle or a cutoff fires.
pub fn detect_cycle(mapping: &MappingDef, start: &BigInt, limits: &Limits) -> Detection {
    assert!(limits.max_steps > 0, "max_steps must be positive");
    assert!(limits.max_magnitude.is_positive(), "max_magnitude must be positive");
    if limits.fits_i128(mapping) {
        if let Some(s) = i128::from_big(start) {
            let walker = Walker::<i128>::new(mapping, limits);
            return walker.detect(&s, None).into_detection(mapping);
        }
    }
    let walker = Walker::<BigInt>::new(mapping, limits);
    walker.detect(start, None).into_detection(mapping)
}

/// Raw result of a walk in backend `T`.
#[derive(Debug)]
pub(crate) enum Walk<T> {
    /// New cycle: its elements in orbit order starting anywhere.
    Found { orbit: Vec<T>, tail: u64 },
    /// Hit a member of an already known cycle.
    Known { id: usize, tail: u64 },
    StepLimit,
    MagnitudeLimit { step: u64 },
}

impl<T: Int> Walk<T> {
    fn into_detection(self, mapping: &MappingDef) -> Detection {
        match self {
            Walk::Found { orbit, tail } => {
                let raw: Vec<BigInt> = orbit.iter().map(Int::to_big).collect();
                let cycle = canonicalize(mapping, &raw).expect("detected orbit is closed");
                Detection::Entered { cycle, tail }
            }
            Walk::Known { .. } => unreachable!("no memo supplied"),
            Walk::StepLimit => Detection::StepLimit,
            Walk::MagnitudeLimit { step } => Detection::MagnitudeLimit { step },
        }
    }
}

pub(crate) struct Walker<T> {
    table: StepTable<T>,
    max_steps: u64,
    max_magnitude: T,
}

impl<T: Int> Walker<T> {
    pub(crate) fn new(mapping: &MappingDef, limits: &Limits) -> Self {
        Walker {
            table: mapping.step_table(),
            max_steps: limits.max_steps,
            max_magnitude: T::from_big(&limits.max_magnitude).expect("cutoff fits backend"),
        }
    }

    #[inline]
    fn f(&self, x: &T) -> T {
        self.table.apply(x).0
    }

    /// Brent's cycle finding with an optional map of known cycle members.
    ///
    /// The hare visits positions 1, 2, 3, .. in order, so the first
    /// position where it meets a known member is exactly the tail length,
    /// and the first oversized value is found at its true position.
    pub(crate) fn detect(&self, start: &T, known: Option<&HashMap<T, (usize, u64)>>) -> Walk<T> {
        if start.abs() > self.max_magnitude {
            return Walk::MagnitudeLimit { step: 0 };
        }
        if let Some(hit) = known.and_then(|k| k.get(start)) {
            return self.known_hit(hit, 0);
        }
        // Brent needs at most about 3 * (tail + period) hare moves.
        let budget = self.max_steps.saturating_mul(3).saturating_add(3);
        let mut power: u64 = 1;
        let mut lam: u64 = 1;
        let mut tortoise = start.clone();
        let mut hare = self.f(start);
        let mut pos: u64 = 1;
        loop {
            if hare.abs() > self.max_magnitude {
                return if pos <= self.max_steps {
                    Walk::MagnitudeLimit { step: pos }
                } else {
                    Walk::StepLimit
                };
            }
            if let Some(hit) = known.and_then(|k| k.get(&hare)) {
                return self.known_hit(hit, pos);
            }
            if tortoise == hare {
                break;
            }
            if pos >= budget {
                return Walk::StepLimit;
            }
            if power == lam {
                tortoise = hare.clone();
                power *= 2;
                lam = 0;
            }
            hare = self.f(&hare);
            lam += 1;
            pos += 1;
        }
        // Tail length: two pointers `lam` apart.
        let mut a = start.clone();
        let mut b = start.clone();
        for _ in 0..lam {
            b = self.f(&b);
        }
        let mut tail = 0u64;
        while a != b {
            a = self.f(&a);
            b = self.f(&b);
            tail += 1;
        }
        if tail + lam > self.max_steps {
            return Walk::StepLimit;
        }
        let mut orbit = Vec::with_capacity(lam.to_usize().unwrap_or(0));
        let mut x = a;
        for _ in 0..lam {
            let next = self.f(&x);
            orbit.push(x);
            x = next;
        }
        Walk::Found { orbit, tail }
    }

    fn known_hit(&self, &(id, period): &(usize, u64), tail: u64) -> Walk<T> {
        if tail + period > self.max_steps {
            Walk::StepLimit
        } else {
            Walk::Known { id, tail }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn bigs(v: &[i64]) -> Vec<BigInt> {
        v.iter().copied().map(big).collect()
    }

    #[test]
    fn finds_twelve_cycle_from_44() {
        let g = family::collatz();
        let d = detect_cycle(&g, &big(44), &Limits::default());
        let c = d.cycle().unwrap();
        assert_eq!(c.elements, bigs(&[44, 59, 79, 105, 70, 93, 62, 83, 111, 74, 99, 66]));
        assert_eq!(c.counts.growth_split(&g), (7, 5));
    }

    #[test]
    fn finds_negative_eleven_cycle() {
        let t = family::three_x_plus_one();
        let c = detect_cycle(&t, &big(-17), &Limits::default()).cycle().unwrap().clone();
        assert_eq!(
            c.elements,
            bigs(&[-136, -68, -34, -17, -25, -37, -55, -82, -41, -61, -91])
        );
        assert_eq!(c.counts.growth_split(&t), (7, 4));
    }

    #[test]
    fn finds_h_six_cycle() {
        let h = family::permutation_variant(3).unwrap();
        let d = detect_cycle(&h, &big(8), &Limits::default());
        assert_eq!(d.cycle().unwrap().elements, bigs(&[4, 7, 11, 8, 6, 5]));
        assert!(matches!(d, Detection::Entered { tail: 0, .. }));
    }

    #[test]
    fn tail_is_measured() {
        let t = family::three_x_plus_one();
        // 6 -> 3 -> 5 -> 8 -> 4 -> 2 -> 1
        let d = detect_cycle(&t, &big(6), &Limits::default());
        assert_eq!(d.cycle().unwrap().elements, bigs(&[1, 2]));
        assert!(matches!(d, Detection::Entered { tail: 5, .. }));
    }

    #[test]
    fn cutoffs_are_distinct() {
        let g = family::collatz();
        let mag = Limits {
            max_steps: 1_000_000,
            max_magnitude: big(1000),
        };
        assert!(matches!(detect_cycle(&g, &big(8), &mag), Detection::MagnitudeLimit { .. }));
        let t = family::three_x_plus_one();
        let steps = Limits {
            max_steps: 6,
            max_magnitude: big(1000),
        };
        // tail 5 + period 2 = 7 > 6
        assert_eq!(detect_cycle(&t, &big(6), &steps), Detection::StepLimit);
        let enough = Limits { max_steps: 7, ..steps };
        assert!(detect_cycle(&t, &big(6), &enough).cycle().is_some());
    }

    #[test]
    fn bigint_backend_agrees() {
        let g = family::collatz();
        let huge = Limits {
            max_steps: 10_000,
            max_magnitude: BigInt::from(10u8).pow(60),
        };
        assert!(!huge.fits_i128(&g));
        for s in [1, 2, 4, 44, -44, 0] {
            let a = detect_cycle(&g, &big(s), &huge);
            let b = detect_cycle(&g, &big(s), &Limits::default());
            assert_eq!(a.cycle(), b.cycle());
        }
        assert!(matches!(detect_cycle(&g, &big(8), &huge), Detection::MagnitudeLimit { .. }));
    }

    #[test]
    fn canonical_rotation() {
        let g = family::collatz();
        let c = canonicalize(&g, &bigs(&[7, 9, 6, 4, 5])).unwrap();
        assert_eq!(c.elements, bigs(&[4, 5, 7, 9, 6]));
        let t = family::three_x_plus_one();
        let c = canonicalize(&t, &bigs(&[-7, -10, -5])).unwrap();
        assert_eq!(c.elements, bigs(&[-10, -5, -7]));
        let one = canonicalize(&g, &bigs(&[1])).unwrap();
        assert_eq!(one.elements, bigs(&[1]));
        assert!(matches!(
            canonicalize(&g, &bigs(&[4, 5, 7])),
            Err(CycleError::NotClosed { index: 2, .. })
        ));
        assert_eq!(canonicalize(&g, &[]), Err(CycleError::Empty));
        assert!(matches!(canonicalize(&g, &bigs(&[2, 3, 2, 3])), Err(CycleError::Repeated(_))));
    }
}
