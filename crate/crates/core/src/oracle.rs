//! Exact enumeration of all cycles up to a period bound.
//!
//! Following a branch sequence `s_1 .. s_p` from `x` gives `(P x - N) / D`
//! with `P = Π m`, `D = d^p` and `N` accumulated step by step. A cycle
//! with that sequence must sit at the fixed point `x = N / (P - D)`, so
//! every cycle of period `<= p` is found by solving one linear equation
//! per sequence and replaying the candidate.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Pow;
use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::CycleCatalog;
use crate::cycle::{orbit_cycle, Cycle};
use crate::int::{fits_i128, Int};
use crate::mapping::MappingDef;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{d}^{max_period} sequences exceed the budget of {budget}")]
    Budget { d: u32, max_period: u32, budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub mapping: MappingDef,
    /// Sorted by `(period, min)`.
    pub cycles: Vec<Cycle>,
    /// Branch sequences examined (all lengths).
    pub sequences: u64,
    /// Sequences skipped because their slope is exactly 1.
    pub degenerate: u64,
}

impl Enumeration {
    pub fn catalog(&self) -> CycleCatalog {
        let mut c = CycleCatalog::from_cycles(self.mapping.clone(), self.cycles.clone());
        c.notes.push(format!(
            "exact enumeration: {} sequences, {} with slope 1 skipped",
            self.sequences, self.degenerate
        ));
        c
    }
}

/// Lists every cycle whose period is at most `max_period`.
///
/// Cycles are sorted by `(period, min)`. The result does not depend on
/// how the work is split across threads.
pub fn enumerate_cycles_exact(
    mapping: &MappingDef,
    max_period: u32,
    budget: u64,
) -> Result<Enumeration, OracleError> {
    let d = mapping.d();
    let too_big = || OracleError::Budget { d, max_period, budget };
    let leaves = (d as u64).checked_pow(max_period).ok_or_else(too_big)?;
    if leaves > budget {
        return Err(too_big());
    }
    if max_period == 0 {
        return Ok(Enumeration {
            mapping: mapping.clone(),
            cycles: Vec::new(),
            sequences: 0,
            degenerate: 0,
        });
    }
    let bound = value_bound(mapping, max_period);
    // replayed iterates stay below bound^2
    let scan = if fits_i128(&(&bound * &bound)) {
        scan::<i128>(mapping, max_period)
    } else {
        scan::<BigInt>(mapping, max_period)
    };
    let mut found: BTreeMap<(usize, BigInt), Cycle> = BTreeMap::new();
    for x in scan.candidates {
        if let Some(c) = orbit_cycle(mapping, &x, max_period as u64) {
            found.entry(c.sort_key()).or_insert(c);
        }
    }
    Ok(Enumeration {
        mapping: mapping.clone(),
        cycles: found.into_values().collect(),
        sequences: scan.sequences,
        degenerate: scan.degenerate,
    })
}

/// Bound on `|P|`, `|D|`, `|N|` and `|P - D|` over sequences up to `p` long.
fn value_bound(mapping: &MappingDef, p: u32) -> BigInt {
    let base = BigInt::from(mapping.max_abs_m().max(mapping.d() as u64));
    let r = BigInt::from(mapping.max_abs_r());
    Pow::pow(&base, p) * (r * p + 2u32) * 2u32
}

struct Scan {
    candidates: Vec<BigInt>,
    sequences: u64,
    degenerate: u64,
}

struct Frame<T> {
    p: T,
    n: T,
    dd: T,
    seq: Vec<usize>,
}

fn scan<T: Int>(mapping: &MappingDef, max_period: u32) -> Scan {
    let table = mapping.step_table::<T>();
    let d = mapping.d() as usize;
    let root = Frame {
        p: T::one(),
        n: T::zero(),
        dd: T::one(),
        seq: Vec::new(),
    };
    // Split on the first two branches so every worker gets a subtree.
    let depth = max_period.min(2) as usize;
    let mut prefixes = vec![root];
    for _ in 0..depth {
        prefixes = prefixes
            .into_iter()
            .flat_map(|f| (0..d).map(move |b| (b, f.p.clone(), f.n.clone(), f.dd.clone(), f.seq.clone())))
            .map(|(b, p, n, dd, mut seq)| {
                let (m, r) = &table.branches[b];
                seq.push(b);
                Frame {
                    p: m.clone() * p,
                    n: m.clone() * n + r.clone() * dd.clone(),
                    dd: table.d.clone() * dd,
                    seq,
                }
            })
            .collect();
    }
    let shallow: Vec<Scan> = if depth >= 2 {
        // Sequences of length 1 sit above the split.
        vec![visit_shallow(&table, d)]
    } else {
        Vec::new()
    };
    let parts: Vec<Scan> = prefixes
        .into_par_iter()
        .map(|f| {
            let mut out = Scan {
                candidates: Vec::new(),
                sequences: 0,
                degenerate: 0,
            };
            dfs(&table, d, max_period as usize, f, &mut out);
            out
        })
        .collect();
    let mut all = Scan {
        candidates: Vec::new(),
        sequences: 0,
        degenerate: 0,
    };
    for s in shallow.into_iter().chain(parts) {
        all.candidates.extend(s.candidates);
        all.sequences += s.sequences;
        all.degenerate += s.degenerate;
    }
    all
}

fn visit_shallow<T: Int>(table: &crate::int::StepTable<T>, d: usize) -> Scan {
    let mut out = Scan {
        candidates: Vec::new(),
        sequences: 0,
        degenerate: 0,
    };
    for b in 0..d {
        let (m, r) = &table.branches[b];
        let f = Frame {
            p: m.clone(),
            n: r.clone(),
            dd: table.d.clone(),
            seq: vec![b],
        };
        check(table, &f, &mut out);
    }
    out
}

fn dfs<T: Int>(table: &crate::int::StepTable<T>, d: usize, max: usize, f: Frame<T>, out: &mut Scan) {
    check(table, &f, out);
    if f.seq.len() == max {
        return;
    }
    for b in 0..d {
        let (m, r) = &table.branches[b];
        let mut seq = f.seq.clone();
        seq.push(b);
        let child = Frame {
            p: m.clone() * f.p.clone(),
            n: m.clone() * f.n.clone() + r.clone() * f.dd.clone(),
            dd: table.d.clone() * f.dd.clone(),
            seq,
        };
        dfs(table, d, max, child, out);
    }
}

/// Solves the fixed point of one sequence and replays it.
fn check<T: Int>(table: &crate::int::StepTable<T>, f: &Frame<T>, out: &mut Scan) {
    out.sequences += 1;
    let den = f.p.clone() - f.dd.clone();
    if den.is_zero() {
        out.degenerate += 1;
        return;
    }
    if !f.n.is_multiple_of(&den) {
        return;
    }
    let x = f.n.clone() / den;
    let mut y = x.clone();
    for &b in &f.seq {
        let (next, idx) = table.apply(&y);
        if idx != b {
            return;
        }
        y = next;
    }
    if y == x {
        out.candidates.push(x.to_big());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family;

    fn mins(e: &Enumeration) -> Vec<(usize, i64)> {
        e.cycles
            .iter()
            .map(|c| (c.period(), i64::try_from(c.min_element()).unwrap()))
            .collect()
    }

    #[test]
    fn collatz_up_to_five() {
        let e = enumerate_cycles_exact(&family::collatz(), 5, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            mins(&e),
            vec![(1, -1), (1, 0), (1, 1), (2, -3), (2, 2), (5, -9), (5, 4)]
        );
        assert_eq!(e.sequences, 3 + 9 + 27 + 81 + 243);
        assert_eq!(e.degenerate, 0);
    }

    #[test]
    fn three_x_plus_one_up_to_three() {
        let e = enumerate_cycles_exact(&family::three_x_plus_one(), 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(mins(&e), vec![(1, -1), (1, 0), (2, 1), (3, -10)]);
        let c = &e.cycles[3];
        assert_eq!(c.elements, vec![BigInt::from(-10), BigInt::from(-5), BigInt::from(-7)]);
    }

    #[test]
    fn period_zero_and_budget() {
        let e = enumerate_cycles_exact(&family::collatz(), 0, DEFAULT_BUDGET).unwrap();
        assert!(e.cycles.is_empty());
        assert!(matches!(
            enumerate_cycles_exact(&family::collatz(), 20, DEFAULT_BUDGET),
            Err(OracleError::Budget { .. })
        ));
    }

    #[test]
    fn degenerate_sequences_are_counted() {
        // 1/2 then 2 (either order) has slope exactly 1
        let m = MappingDef::validate(
            2,
            vec![crate::mapping::Branch::new(1, 0), crate::mapping::Branch::new(4, 2)],
        )
        .unwrap();
        let e = enumerate_cycles_exact(&m, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(e.degenerate, 2);
    }

    #[test]
    fn backends_agree() {
        let g = family::collatz();
        let small = scan::<i128>(&g, 6);
        let big = scan::<BigInt>(&g, 6);
        let mut a = small.candidates;
        let mut b = big.candidates;
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(small.sequences, big.sequences);
    }

    #[test]
    fn matthews_period_four() {
        let m = family::matthews();
        let e = enumerate_cycles_exact(&m, 4, DEFAULT_BUDGET).unwrap();
        let fours: Vec<&Cycle> = e.cycles.iter().filter(|c| c.period() == 4).collect();
        assert_eq!(fours.len(), 6);
        for start in [-330, -117, -137, -186, -261, -333] {
            assert!(fours.iter().any(|c| c.contains(&BigInt::from(start))), "{start}");
        }
        for c in fours {
            assert_eq!(c.counts.counts, vec![1, 1, 1, 1]);
        }
    }
}
