//! Bounded searches over ranges of start values.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::CycleCatalog;
use crate::cycle::{canonicalize, Cycle, Limits, Walk, Walker};
use crate::hp::Fixed;
use crate::int::Int;
use crate::mapping::{BranchCounts, MappingDef};
use crate::nodes::{bound_c, BoundConstant, BoundResult, NodeError, TwoBranchFamily};
use crate::ratio::ExactRatio;
use crate::serde_big;

pub const DEFAULT_BLOCK: u64 = 4096;
pub const DEFAULT_NODE_START_CAP: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub limits: Limits,
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub block: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            limits: Limits::default(),
            threads: None,
            block: DEFAULT_BLOCK,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("empty range: lo {lo} > hi {hi}")]
    EmptyRange { lo: BigInt, hi: BigInt },
    #[error("range of {0} starts is too large")]
    TooLarge(BigInt),
    #[error("cutoffs must be positive")]
    BadLimits,
    #[error("could not build a thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Node(#[from] NodeError),
    #[error("bound C = {c} allows {starts} starts, above the cap of {cap}")]
    NodeRangeTooLarge { c: String, starts: BigInt, cap: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tallies {
    pub starts: u64,
    /// Starts that entered a cycle, members included.
    pub entered_cycle: u64,
    /// Starts that are themselves cycle members.
    pub in_cycle: u64,
    pub step_limit: u64,
    pub magnitude_limit: u64,
}

impl Tallies {
    fn add(&mut self, o: &Tallies) {
        self.starts += o.starts;
        self.entered_cycle += o.entered_cycle;
        self.in_cycle += o.in_cycle;
        self.step_limit += o.step_limit;
        self.magnitude_limit += o.magnitude_limit;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleHits {
    #[serde(flatten)]
    pub cycle: Cycle,
    /// Starts in the range that reached this cycle.
    pub hits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub mapping: MappingDef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(with = "serde_big")]
    pub lo: BigInt,
    #[serde(with = "serde_big")]
    pub hi: BigInt,
    pub max_steps: u64,
    #[serde(with = "serde_big")]
    pub max_magnitude: BigInt,
    pub tallies: Tallies,
    /// Sorted by `(period, min)`.
    pub cycles: Vec<CycleHits>,
}

impl SearchReport {
    pub fn catalog(&self) -> CycleCatalog {
        let mut c = CycleCatalog::from_cycles(
            self.mapping.clone(),
            self.cycles.iter().map(|h| h.cycle.clone()).collect(),
        );
        c.family = self.family.clone();
        c.notes.push(format!(
            "search over [{}, {}], max_steps {}, max_magnitude {}",
            self.lo, self.hi, self.max_steps, self.max_magnitude
        ));
        c
    }

    pub fn find(&self, x: &BigInt) -> Option<&CycleHits> {
        self.cycles.iter().find(|h| h.cycle.contains(x))
    }
}

/// Per-block partial result, merged by canonical cycle.
#[derive(Default)]
struct Partial {
    tallies: Tallies,
    cycles: BTreeMap<(usize, BigInt), (Cycle, u64)>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        self.tallies.add(&other.tallies);
        for (k, (c, h)) in other.cycles {
            self.cycles.entry(k).or_insert((c, 0)).1 += h;
        }
        self
    }
}

/// Runs cycle detection from every start in `[lo, hi]`.
///
/// Starts are split into blocks; each block keeps a map of the cycle
/// members it has seen so later starts can stop as soon as they hit one.
/// The map never changes a classification, so the report is the same
/// for any thread count or block size.
pub fn search_range(
    mapping: &MappingDef,
    lo: &BigInt,
    hi: &BigInt,
    opts: &SearchOptions,
) -> Result<SearchReport, SearchError> {
    if lo > hi {
        return Err(SearchError::EmptyRange {
            lo: lo.clone(),
            hi: hi.clone(),
        });
    }
    if opts.limits.max_steps == 0 || !opts.limits.max_magnitude.is_positive() {
        return Err(SearchError::BadLimits);
    }
    let span = hi - lo + 1u32;
    let n = span.to_u64().ok_or_else(|| SearchError::TooLarge(span.clone()))?;
    let block = opts.block.max(1);
    let run = || {
        let small = opts.limits.fits_i128(mapping)
            && i128::from_big(lo).is_some()
            && i128::from_big(hi).is_some();
        if small {
            run_blocks::<i128>(mapping, lo, n, block, &opts.limits)
        } else {
            run_blocks::<BigInt>(mapping, lo, n, block, &opts.limits)
        }
    };
    let partial = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| SearchError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(SearchReport {
        mapping: mapping.clone(),
        family: None,
        lo: lo.clone(),
        hi: hi.clone(),
        max_steps: opts.limits.max_steps,
        max_magnitude: opts.limits.max_magnitude.clone(),
        tallies: partial.tallies,
        cycles: partial
            .cycles
            .into_values()
            .map(|(cycle, hits)| CycleHits { cycle, hits })
            .collect(),
    })
}

fn run_blocks<T: Int>(mapping: &MappingDef, lo: &BigInt, n: u64, block: u64, limits: &Limits) -> Partial {
    let walker = Walker::<T>::new(mapping, limits);
    let blocks = n.div_ceil(block);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let first = T::from_big(&(lo + b * block)).expect("start fits backend");
            let len = block.min(n - b * block);
            search_block(mapping, &walker, first, len)
        })
        .reduce(Partial::default, Partial::merge)
}

fn search_block<T: Int>(mapping: &MappingDef, walker: &Walker<T>, first: T, len: u64) -> Partial {
    let mut known: HashMap<T, (usize, u64)> = HashMap::new();
    let mut found: Vec<(Cycle, u64)> = Vec::new();
    let mut out = Partial::default();
    let mut x = first;
    for _ in 0..len {
        out.tallies.starts += 1;
        match walker.detect(&x, Some(&known)) {
            Walk::Found { orbit, tail } => {
                let id = found.len();
                let period = orbit.len() as u64;
                for v in &orbit {
                    known.insert(v.clone(), (id, period));
                }
                let raw: Vec<BigInt> = orbit.iter().map(Int::to_big).collect();
                let cycle = canonicalize(mapping, &raw).expect("detected orbit is closed");
                found.push((cycle, 1));
                out.tallies.entered_cycle += 1;
                if tail == 0 {
                    out.tallies.in_cycle += 1;
                }
            }
            Walk::Known { id, tail } => {
                found[id].1 += 1;
                out.tallies.entered_cycle += 1;
                if tail == 0 {
                    out.tallies.in_cycle += 1;
                }
            }
            Walk::StepLimit => out.tallies.step_limit += 1,
            Walk::MagnitudeLimit { .. } => out.tallies.magnitude_limit += 1,
        }
        x = x + T::one();
    }
    for (c, h) in found {
        out.cycles.insert(c.sort_key(), (c, h));
    }
    out
}

/// Which signs of start values a node search covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SignPolicy {
    Positive,
    Negative,
    Both,
    /// Positive starts for λ < 1, negative for λ > 1.
    BySide,
}

impl SignPolicy {
    /// 3x+1 cycles on the positive integers need λ < 1 and on the
    /// negatives λ > 1; permutation families are searched on the positives.
    pub fn default_for(mapping: &MappingDef) -> Self {
        if *mapping == crate::family::three_x_plus_one() {
            SignPolicy::BySide
        } else if (1..=6).any(|i| crate::family::permutation_variant(i).ok().as_ref() == Some(mapping)) {
            SignPolicy::Positive
        } else {
            SignPolicy::Both
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeSearchReport {
    pub k1: u64,
    pub k2: u64,
    /// λ of the node.
    pub lambda: ExactRatio,
    /// C rounded to 7 decimals.
    pub c: String,
    pub ln_c: String,
    pub constant: ExactRatio,
    pub used_abs_lambda: bool,
    pub signs: SignPolicy,
    /// `None` when C < 1 and nothing was searched.
    pub positive: Option<SearchReport>,
    pub negative: Option<SearchReport>,
    /// Cycles with exactly the node's counts.
    pub cycles: Vec<Cycle>,
}

/// Searches `1 <= |m| <= C` for cycles whose `(k1, k2)` equal the node's.
///
/// `mapping` must have two ratios `|m_i|/d`; `k1` counts growth steps.
pub fn search_node(
    mapping: &MappingDef,
    k1: u64,
    k2: u64,
    constant: &BoundConstant,
    signs: Option<SignPolicy>,
    opts: &SearchOptions,
    start_cap: u64,
) -> Result<NodeSearchReport, SearchError> {
    TwoBranchFamily::from_mapping("", mapping)?;
    let counts = node_counts(mapping, k1, k2);
    let bound: BoundResult = bound_c(mapping, &counts, constant, 128)?;
    let lambda = crate::nodes::lambda_exact(mapping, &counts);
    let signs = signs.unwrap_or_else(|| SignPolicy::default_for(mapping));
    let limit = floor_fixed(&bound.c);
    if limit > BigInt::from(start_cap) {
        return Err(SearchError::NodeRangeTooLarge {
            c: bound.c.to_decimal(7),
            starts: limit,
            cap: start_cap,
        });
    }
    let below_one = lambda < ExactRatio::one();
    let (pos, neg) = match signs {
        SignPolicy::Positive => (true, false),
        SignPolicy::Negative => (false, true),
        SignPolicy::Both => (true, true),
        SignPolicy::BySide => (below_one, !below_one),
    };
    let mut positive = None;
    let mut negative = None;
    if limit >= BigInt::one() {
        if pos {
            positive = Some(search_range(mapping, &BigInt::one(), &limit, opts)?);
        }
        if neg {
            negative = Some(search_range(mapping, &-&limit, &-BigInt::one(), opts)?);
        }
    }
    let mut cycles: Vec<Cycle> = positive
        .iter()
        .chain(negative.iter())
        .flat_map(|r| r.cycles.iter())
        .filter(|h| h.cycle.counts.growth_split(mapping) == (k1, k2))
        .map(|h| h.cycle.clone())
        .collect();
    cycles.sort_by_key(Cycle::sort_key);
    cycles.dedup();
    Ok(NodeSearchReport {
        k1,
        k2,
        lambda,
        c: bound.c.to_decimal(7),
        ln_c: bound.ln_c.to_decimal(7),
        constant: bound.constant,
        used_abs_lambda: bound.used_abs_lambda,
        signs,
        positive,
        negative,
        cycles,
    })
}

/// A count vector with `k1` steps on the first growth branch and `k2` on
/// the first contraction branch.
pub fn node_counts(mapping: &MappingDef, k1: u64, k2: u64) -> BranchCounts {
    let d = mapping.d() as usize;
    let mut counts = BranchCounts::zeros(mapping.d());
    if let Some(g) = (0..d).find(|&i| mapping.is_growth(i)) {
        counts.counts[g] = k1;
    }
    if let Some(c) = (0..d).find(|&i| mapping.is_contraction(i)) {
        counts.counts[c] = k2;
    }
    counts
}

fn floor_fixed(x: &Fixed) -> BigInt {
    x.mantissa().div_floor(&(BigInt::one() << x.bits()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileEntry {
    #[serde(with = "serde_big")]
    pub start: BigInt,
    /// Steps walked: the return time, or the horizon.
    pub steps: u64,
    #[serde(with = "serde_big")]
    pub second: BigInt,
    #[serde(with = "serde_big")]
    pub end: BigInt,
    pub k1: u64,
    pub k2: u64,
    pub lambda: ExactRatio,
    /// The walk came back to `start` within the horizon.
    pub returned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileBin {
    /// Bin covers `lo <= |ln λ| < hi`.
    pub lo: f64,
    pub hi: f64,
    pub samples: u64,
    pub returns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaProfile {
    pub horizon: u64,
    pub entries: Vec<ProfileEntry>,
    pub histogram: Vec<ProfileBin>,
}

pub const PROFILE_EDGES: [f64; 9] = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, f64::INFINITY];

/// Walks each start for `horizon` steps, stopping early if it comes back
/// to the start, and records λ of the counts at the stopping point.
pub fn lambda_profile(mapping: &MappingDef, starts: &[BigInt], horizon: u64) -> LambdaProfile {
    assert!(horizon >= 1, "horizon must be at least 1");
    let entries: Vec<ProfileEntry> = starts
        .par_iter()
        .map(|s| profile_one(mapping, s, horizon))
        .collect();
    let mut histogram: Vec<ProfileBin> = PROFILE_EDGES
        .windows(2)
        .map(|w| ProfileBin {
            lo: w[0],
            hi: w[1],
            samples: 0,
            returns: 0,
        })
        .collect();
    for e in &entries {
        let v = e.lambda.to_f64().ln().abs();
        if let Some(bin) = histogram.iter_mut().find(|b| v >= b.lo && v < b.hi) {
            bin.samples += 1;
            bin.returns += e.returned as u64;
        }
    }
    LambdaProfile {
        horizon,
        entries,
        histogram,
    }
}

fn profile_one(mapping: &MappingDef, start: &BigInt, horizon: u64) -> ProfileEntry {
    let mut counts = BranchCounts::zeros(mapping.d());
    let mut x = start.clone();
    let mut second = start.clone();
    let mut steps = 0;
    let mut returned = false;
    while steps < horizon {
        let (next, b) = mapping.apply(&x);
        counts.counts[b] += 1;
        x = next;
        steps += 1;
        if steps == 1 {
            second = x.clone();
        }
        if &x == start {
            returned = true;
            break;
        }
    }
    let (k1, k2) = counts.growth_split(mapping);
    ProfileEntry {
        start: start.clone(),
        steps,
        second,
        end: x,
        k1,
        k2,
        lambda: crate::nodes::lambda_exact(mapping, &counts),
        returned,
    }
}
