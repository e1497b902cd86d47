//! Generalized 3x+1 mappings `x -> (m_i * x - r_i) / d` for `x ≡ i (mod d)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::int::{Int, StepTable};

/// One residue-class branch: `x -> (m * x - r) / d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub m: i64,
    pub r: i64,
}

impl Branch {
    pub const fn new(m: i64, r: i64) -> Self {
        Branch { m, r }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("modulus d = {0} must be at least 2")]
    ModulusTooSmall(i64),
    #[error("expected {expected} branches for d = {expected}, got {got}")]
    BranchCount { expected: usize, got: usize },
    #[error("branch {index}: multiplier must be non-zero")]
    ZeroMultiplier { index: usize },
    #[error("branch {index}: r = {r} is not congruent to {index} * {m} (mod {d})")]
    Congruence { index: usize, m: i64, r: i64, d: u32 },
    #[error("{0}")]
    Family(String),
}

/// A validated generalized mapping.
///
/// Invariants: `d >= 2`, exactly `d` branches, every `m_i != 0`, and
/// `r_i ≡ i * m_i (mod d)` so that every step is an exact division.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MappingDef {
    d: u32,
    branches: Vec<Branch>,
}

impl MappingDef {
    /// Checks every invariant and reports the first one violated.
    pub fn validate(d: i64, branches: Vec<Branch>) -> Result<Self, MappingError> {
        if d < 2 || d > u32::MAX as i64 {
            return Err(MappingError::ModulusTooSmall(d));
        }
        if branches.len() as i64 != d {
            return Err(MappingError::BranchCount {
                expected: d as usize,
                got: branches.len(),
            });
        }
        for (index, b) in branches.iter().enumerate() {
            if b.m == 0 {
                return Err(MappingError::ZeroMultiplier { index });
            }
            let lhs = (b.r as i128).mod_floor(&(d as i128));
            let rhs = ((index as i128) * (b.m as i128)).mod_floor(&(d as i128));
            if lhs != rhs {
                return Err(MappingError::Congruence {
                    index,
                    m: b.m,
                    r: b.r,
                    d: d as u32,
                });
            }
        }
        Ok(MappingDef {
            d: d as u32,
            branches,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, index: usize) -> Branch {
        self.branches[index]
    }

    /// Canonical residue in `0..d`, also for negative `x`.
    pub fn residue(&self, x: &BigInt) -> usize {
        x.mod_floor(&BigInt::from(self.d))
            .to_usize()
            .expect("residue below d")
    }

    /// Applies the mapping once, returning the image and the branch taken.
    pub fn apply(&self, x: &BigInt) -> (BigInt, usize) {
        let idx = self.residue(x);
        let b = self.branches[idx];
        let num = x * b.m - b.r;
        debug_assert!((&num % self.d).is_zero());
        (num / self.d, idx)
    }

    pub fn max_abs_m(&self) -> u64 {
        self.branches
            .iter()
            .map(|b| b.m.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_r(&self) -> u64 {
        self.branches
            .iter()
            .map(|b| b.r.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn step_table<T: Int>(&self) -> StepTable<T> {
        StepTable {
            d: T::from_i64(self.d as i64),
            branches: self
                .branches
                .iter()
                .map(|b| (T::from_i64(b.m), T::from_i64(b.r)))
                .collect(),
        }
    }

    /// Branches whose ratio `|m_i| / d` exceeds one.
    pub fn is_growth(&self, index: usize) -> bool {
        self.branches[index].m.unsigned_abs() > self.d as u64
    }

    /// Branches whose ratio `|m_i| / d` is below one.
    pub fn is_contraction(&self, index: usize) -> bool {
        self.branches[index].m.unsigned_abs() < self.d as u64
    }

    /// Distinct reduced ratios `m_i / d`, in branch order of first appearance.
    pub fn distinct_ratios(&self) -> Vec<(i64, i64)> {
        let mut out: Vec<(i64, i64)> = Vec::new();
        for b in &self.branches {
            let g = b.m.gcd(&(self.d as i64));
            let ratio = (b.m / g, self.d as i64 / g);
            if !out.contains(&ratio) {
                out.push(ratio);
            }
        }
        out
    }

    /// Walks `steps` applications from `start`.
    ///
    /// With `max_magnitude` set, stops with an error as soon as an iterate
    /// exceeds it in absolute value. That is a cutoff, not a divergence claim.
    pub fn trajectory(
        &self,
        start: &BigInt,
        steps: u64,
        max_magnitude: Option<&BigInt>,
    ) -> Result<Trajectory, TrajectoryError> {
        let mut traj = Trajectory {
            start: start.clone(),
            steps: Vec::with_capacity(steps.min(1 << 16) as usize),
        };
        let mut x = start.clone();
        for step in 0..steps {
            let (next, branch) = self.apply(&x);
            if let Some(limit) = max_magnitude {
                if next.abs() > *limit {
                    return Err(TrajectoryError::MagnitudeExceeded {
                        step: step + 1,
                        partial: traj,
                    });
                }
            }
            traj.steps.push(TrajectoryStep {
                value: next.clone(),
                branch,
            });
            x = next;
        }
        Ok(traj)
    }
}

impl<'de> Deserialize<'de> for MappingDef {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            d: i64,
            branches: Vec<Branch>,
        }
        let raw = Raw::deserialize(de)?;
        MappingDef::validate(raw.d, raw.branches).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for MappingDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} [", self.d)?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}x{:+})/{}", b.m, -b.r, self.d)?;
        }
        f.write_str("]")
    }
}

/// A single iterate together with the branch that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub value: BigInt,
    /// Residue class of the previous value, i.e. the branch applied.
    pub branch: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub start: BigInt,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    /// Start followed by every iterate.
    pub fn values(&self) -> Vec<BigInt> {
        std::iter::once(self.start.clone())
            .chain(self.steps.iter().map(|s| s.value.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> &BigInt {
        self.steps.last().map(|s| &s.value).unwrap_or(&self.start)
    }

    pub fn branch_counts(&self, d: u32) -> BranchCounts {
        BranchCounts::from_branches(d, self.steps.iter().map(|s| s.branch))
    }
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("iterate exceeded the magnitude cutoff at step {step}")]
    MagnitudeExceeded { step: u64, partial: Trajectory },
}

/// Per-branch usage counts of a trajectory or cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchCounts {
    pub counts: Vec<u64>,
}

impl BranchCounts {
    pub fn zeros(d: u32) -> Self {
        BranchCounts {
            counts: vec![0; d as usize],
        }
    }

    pub fn from_branches(d: u32, branches: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::zeros(d);
        for b in branches {
            c.counts[b] += 1;
        }
        c
    }

    /// Total number of steps `k`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(k1, k2)`: uses of growth branches (`|m_i| > d`) and of contraction
    /// branches (`|m_i| < d`). For the Collatz permutation families `k2`
    /// counts the `2n/3`-type branch, for 3x+1 the halving branch.
    pub fn growth_split(&self, mapping: &MappingDef) -> (u64, u64) {
        let mut growth = 0;
        let mut contraction = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if mapping.is_growth(i) {
                growth += c;
            } else if mapping.is_contraction(i) {
                contraction += c;
            }
        }
        (growth, contraction)
    }

    /// Count of steps taken on non-zero residue classes.
    pub fn nonzero_residue_total(&self) -> u64 {
        self.counts.iter().skip(1).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn validates_named_parameter_choices() {
        let g = MappingDef::validate(3, vec![Branch::new(2, 0), Branch::new(4, 1), Branch::new(4, -1)]);
        assert!(g.is_ok());
        let t = MappingDef::validate(2, vec![Branch::new(1, 0), Branch::new(3, -1)]);
        assert!(t.is_ok());
    }

    #[test]
    fn reports_first_violation() {
        let err = MappingDef::validate(3, vec![Branch::new(2, 0), Branch::new(4, 2), Branch::new(4, -1)])
            .unwrap_err();
        assert_eq!(err, MappingError::Congruence { index: 1, m: 4, r: 2, d: 3 });
        assert_eq!(
            MappingDef::validate(1, vec![Branch::new(1, 0)]).unwrap_err(),
            MappingError::ModulusTooSmall(1)
        );
        assert_eq!(
            MappingDef::validate(2, vec![Branch::new(1, 0), Branch::new(0, 0)]).unwrap_err(),
            MappingError::ZeroMultiplier { index: 1 }
        );
        assert!(matches!(
            MappingDef::validate(3, vec![Branch::new(1, 0)]).unwrap_err(),
            MappingError::BranchCount { expected: 3, got: 1 }
        ));
    }

    #[test]
    fn single_steps() {
        let g = family::collatz();
        assert_eq!(g.apply(&big(2)), (big(3), 2));
        assert_eq!(g.apply(&big(44)), (big(59), 2));
        let t = family::three_x_plus_one();
        assert_eq!(t.apply(&big(3)), (big(5), 1));
    }

    #[test]
    fn negative_residues_are_canonical() {
        let m = family::matthews();
        assert_eq!(m.residue(&big(-330)), 2);
        assert_eq!(m.apply(&big(-330)), (big(-413), 2));
        assert_eq!(m.apply(&big(-413)), (big(-1756), 3));
        assert_eq!(m.apply(&big(-1756)), (big(-439), 0));
        assert_eq!(m.apply(&big(-439)), (big(-330), 1));
    }

    #[test]
    fn trajectories() {
        let g = family::collatz();
        let t = g.trajectory(&big(4), 5, None).unwrap();
        assert_eq!(t.values(), [4, 5, 7, 9, 6, 4].map(big).to_vec());
        let tt = family::three_x_plus_one().trajectory(&big(-5), 3, None).unwrap();
        assert_eq!(tt.values(), [-5, -7, -10, -5].map(big).to_vec());
        let z = g.trajectory(&big(17), 0, None).unwrap();
        assert_eq!(z.values(), vec![big(17)]);
        assert!(z.is_empty());
    }

    #[test]
    fn trajectory_magnitude_cutoff() {
        let g = family::collatz();
        let err = g.trajectory(&big(8), 1000, Some(&big(1000))).unwrap_err();
        let TrajectoryError::MagnitudeExceeded { step, partial } = err;
        assert_eq!(partial.len() as u64, step - 1);
        assert!(partial.values().iter().all(|v| v.abs() <= big(1000)));
    }

    #[test]
    fn branch_count_splits() {
        let g = family::collatz();
        let c = g.trajectory(&big(4), 5, None).unwrap().branch_counts(3);
        assert_eq!(c.growth_split(&g), (3, 2));
        assert_eq!(c.total(), 5);
        let two = g.trajectory(&big(2), 2, None).unwrap().branch_counts(3);
        assert_eq!(two.growth_split(&g), (1, 1));
        let one = g.trajectory(&big(1), 1, None).unwrap().branch_counts(3);
        assert_eq!(one.growth_split(&g), (1, 0));
    }

    #[test]
    fn json_round_trip_validates() {
        let g = family::collatz();
        let s = serde_json::to_string(&g).unwrap();
        let back: MappingDef = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"d":3,"branches":[{"m":2,"r":0},{"m":4,"r":2},{"m":4,"r":-1}]}"#;
        assert!(serde_json::from_str::<MappingDef>(bad).is_err());
    }
}
