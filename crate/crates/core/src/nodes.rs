//! λ, the least-element bound C, and the PP/PG node algorithm.
//!
//! For a trajectory with branch counts `c_i`, λ = Π (m_i/d)^{c_i} is the
//! slope of the composed affine map. Any cycle with least element `m`
//! satisfies `|m| <= C = constant / ((1/k_growth) |ln λ|)`, so C is largest
//! when λ is close to 1. The node algorithm walks the running products PP
//! (just below 1) and PG (just above 1): each step multiplies them, and the
//! product replaces whichever side it falls on.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hp::{ln_int, Fixed};
use crate::mapping::{BranchCounts, MappingDef};
use crate::ratio::{ExactRatio, FactoredRatio};

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const MIN_PRECISION_BITS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NodeError {
    #[error("λ = 1 exactly; the bound is undefined")]
    LambdaOne,
    #[error("λ is negative; its logarithm is undefined")]
    NegativeLambda,
    #[error("no growth steps; the bound is undefined")]
    NoGrowthSteps,
    #[error("this mapping needs an explicit `par` constant")]
    ParRequired,
    #[error("not a two-ratio family: {0}")]
    NotTwoBranch(String),
    #[error("precision must be at least {MIN_PRECISION_BITS} bits, got {0}")]
    PrecisionTooLow(u32),
    #[error("expected {expected} branch counts, got {got}")]
    CountsLength { expected: usize, got: usize },
}

/// Numerator of the least-element bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundConstant {
    /// 7/24, valid for every least element `m >= 1` of the Collatz permutation.
    Collatz,
    /// 63/248, valid for `m >= 8`.
    Atkin,
    /// 5/12 for 3x+1, valid for `|m| >= 1`.
    ThreeXPlusOne,
    /// User-supplied parameter for other families.
    Par(ExactRatio),
}

impl BoundConstant {
    pub fn value(&self) -> ExactRatio {
        match self {
            BoundConstant::Collatz => ExactRatio::new(7, 24),
            BoundConstant::Atkin => ExactRatio::new(63, 248),
            BoundConstant::ThreeXPlusOne => ExactRatio::new(5, 12),
            BoundConstant::Par(v) => v.clone(),
        }
    }
}

impl FromStr for BoundConstant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "collatz" | "7/24" => Ok(BoundConstant::Collatz),
            "atkin" | "63/248" => Ok(BoundConstant::Atkin),
            "3x1" | "5/12" => Ok(BoundConstant::ThreeXPlusOne),
            other => {
                let v: ExactRatio = other.parse()?;
                if v <= ExactRatio::zero() {
                    return Err(format!("constant must be positive, got {other}"));
                }
                Ok(BoundConstant::Par(v))
            }
        }
    }
}

impl fmt::Display for BoundConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Exact `Π (m_i/d)^{c_i}`.
pub fn lambda_exact(mapping: &MappingDef, counts: &BranchCounts) -> ExactRatio {
    let d = mapping.d() as i64;
    mapping
        .branches()
        .iter()
        .zip(&counts.counts)
        .fold(ExactRatio::one(), |acc, (b, &c)| {
            &acc * &ExactRatio::new(b.m, d).powi(c)
        })
}

fn check_counts(mapping: &MappingDef, counts: &BranchCounts) -> Result<(), NodeError> {
    if counts.counts.len() != mapping.d() as usize {
        return Err(NodeError::CountsLength {
            expected: mapping.d() as usize,
            got: counts.counts.len(),
        });
    }
    Ok(())
}

fn check_precision(bits: u32) -> Result<(), NodeError> {
    if bits < MIN_PRECISION_BITS {
        Err(NodeError::PrecisionTooLow(bits))
    } else {
        Ok(())
    }
}

fn lambda_is_negative(mapping: &MappingDef, counts: &BranchCounts) -> bool {
    mapping
        .branches()
        .iter()
        .zip(&counts.counts)
        .filter(|(b, &c)| b.m < 0 && c % 2 == 1)
        .count()
        % 2
        == 1
}

/// `Σ c_i (ln|m_i| - ln d)` without the sign check.
fn ln_abs_lambda(mapping: &MappingDef, counts: &BranchCounts, bits: u32) -> Fixed {
    let k_bits = 64 - counts.total().leading_zeros();
    let w = bits + 16 + k_bits;
    let ln_d = ln_int(&BigInt::from(mapping.d()), w);
    let mut acc = Fixed::zero(w);
    for (b, &c) in mapping.branches().iter().zip(&counts.counts) {
        if c == 0 {
            continue;
        }
        let term = ln_int(&BigInt::from(b.m.unsigned_abs()), w).sub(&ln_d);
        acc = acc.add(&term.mul_int(&BigInt::from(c)));
    }
    acc.with_bits(bits)
}

/// ln λ at `precision_bits`, within `2^-(precision_bits - 8)`.
/// Exactly zero only when λ = 1.
pub fn ln_lambda(
    mapping: &MappingDef,
    counts: &BranchCounts,
    precision_bits: u32,
) -> Result<Fixed, NodeError> {
    check_precision(precision_bits)?;
    check_counts(mapping, counts)?;
    if lambda_is_negative(mapping, counts) {
        return Err(NodeError::NegativeLambda);
    }
    if lambda_exact_is_one(mapping, counts) {
        return Ok(Fixed::zero(precision_bits));
    }
    Ok(ln_abs_lambda(mapping, counts, precision_bits))
}

fn factored_lambda(mapping: &MappingDef, counts: &BranchCounts) -> FactoredRatio {
    let d = mapping.d() as i64;
    mapping
        .branches()
        .iter()
        .zip(&counts.counts)
        .fold(FactoredRatio::one(), |acc, (b, &c)| {
            acc.mul(&FactoredRatio::power(b.m, d, &BigUint::from(c)))
        })
}

fn lambda_exact_is_one(mapping: &MappingDef, counts: &BranchCounts) -> bool {
    let f = factored_lambda(mapping, counts);
    f.exponents.is_empty()
}

/// Largest `|offset|` of `k1` growth steps of the Collatz permutation
/// mixed with any number of `2n/3` steps: `(4^k1 - 3^k1) / 3^k1`.
pub fn rho_max(k1: u32) -> ExactRatio {
    let four = BigInt::from(4).pow(k1);
    let three = BigInt::from(3).pow(k1);
    ExactRatio::new(four - &three, three)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundResult {
    pub c: Fixed,
    pub ln_c: Fixed,
    pub constant: ExactRatio,
    /// Number of steps the bound is normalized by.
    pub k_growth: BigUint,
    /// Set when λ was negative and `|λ|` was used instead.
    pub used_abs_lambda: bool,
}

/// `C = constant * k_growth / |ln λ|` from an already computed `ln λ`.
///
/// `ln_lambda` must carry enough relative precision; callers that derive it
/// from large counts raise its precision first (see [`generate_nodes`]).
pub fn bound_from_ln(
    ln_lambda: &Fixed,
    k_growth: &BigUint,
    constant: &ExactRatio,
    precision_bits: u32,
) -> Result<BoundResult, NodeError> {
    if k_growth.is_zero() {
        return Err(NodeError::NoGrowthSteps);
    }
    if ln_lambda.is_zero() {
        return Err(NodeError::LambdaOne);
    }
    let k = BigInt::from_biguint(Sign::Plus, k_growth.clone());
    let abs_ln = ln_lambda.abs();
    let w = abs_ln.bits().max(precision_bits);
    let num = Fixed::from_ratio(&(constant.numer() * &k), constant.denom(), w);
    let c = num.div(&abs_ln.with_bits(w)).with_bits(precision_bits);
    let ln_c = ln_fraction(constant, precision_bits + 8)
        .add(&ln_int(&k, precision_bits + 8))
        .sub(&abs_ln.ln(precision_bits + 8).expect("non-zero"))
        .with_bits(precision_bits);
    Ok(BoundResult {
        c,
        ln_c,
        constant: constant.clone(),
        k_growth: k_growth.clone(),
        used_abs_lambda: false,
    })
}

fn ln_fraction(v: &ExactRatio, bits: u32) -> Fixed {
    ln_int(v.numer(), bits).sub(&ln_int(v.denom(), bits))
}

/// The bound C for a count vector.
///
/// For mappings with exactly two ratios `m_i/d` (one below and one above 1)
/// the denominator uses the number of growth steps. Other mappings use the
/// number of steps on non-zero residue classes and require `Par`.
pub fn bound_c(
    mapping: &MappingDef,
    counts: &BranchCounts,
    constant: &BoundConstant,
    precision_bits: u32,
) -> Result<BoundResult, NodeError> {
    check_precision(precision_bits)?;
    check_counts(mapping, counts)?;
    let two_branch = TwoBranchFamily::from_mapping("", mapping).is_ok();
    let k_growth = if two_branch {
        counts.growth_split(mapping).0
    } else {
        if !matches!(constant, BoundConstant::Par(_)) {
            return Err(NodeError::ParRequired);
        }
        counts.nonzero_residue_total()
    };
    if lambda_exact_is_one(mapping, counts) {
        return Err(NodeError::LambdaOne);
    }
    let negative = lambda_is_negative(mapping, counts);
    let k_bits = 64 - counts.total().leading_zeros();
    // |ln λ| can be as small as ~1/k; keep enough bits for full relative precision.
    let ln = ln_abs_lambda(mapping, counts, precision_bits + 2 * k_bits + 32);
    let mut out = bound_from_ln(&ln, &BigUint::from(k_growth), &constant.value(), precision_bits)?;
    out.used_abs_lambda = negative;
    Ok(out)
}

/// A mapping analysed through two ratios: contraction (< 1) and growth (> 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoBranchFamily {
    pub label: String,
    /// Reduced `(numerator, denominator)` of the contraction ratio.
    pub contraction: (i64, i64),
    /// Reduced `(numerator, denominator)` of the growth ratio.
    pub growth: (i64, i64),
    pub default_constant: Option<BoundConstant>,
}

impl TwoBranchFamily {
    pub fn collatz() -> Self {
        TwoBranchFamily {
            label: "collatz".into(),
            contraction: (2, 3),
            growth: (4, 3),
            default_constant: Some(BoundConstant::Collatz),
        }
    }

    pub fn three_x_plus_one() -> Self {
        TwoBranchFamily {
            label: "3x1".into(),
            contraction: (1, 2),
            growth: (3, 2),
            default_constant: Some(BoundConstant::ThreeXPlusOne),
        }
    }

    /// Extracts the two ratios from a mapping. Multiplier signs are dropped.
    pub fn from_mapping(label: &str, mapping: &MappingDef) -> Result<Self, NodeError> {
        let mut ratios: Vec<(i64, i64)> = mapping
            .distinct_ratios()
            .into_iter()
            .map(|(n, d)| (n.abs(), d))
            .collect();
        ratios.sort();
        ratios.dedup();
        let below: Vec<_> = ratios.iter().filter(|(n, d)| n < d).collect();
        let above: Vec<_> = ratios.iter().filter(|(n, d)| n > d).collect();
        if ratios.len() != 2 || below.len() != 1 || above.len() != 1 {
            return Err(NodeError::NotTwoBranch(format!(
                "{} distinct ratios |m_i|/d",
                ratios.len()
            )));
        }
        let default_constant = if *mapping == crate::family::collatz() {
            Some(BoundConstant::Collatz)
        } else if *mapping == crate::family::three_x_plus_one() {
            Some(BoundConstant::ThreeXPlusOne)
        } else {
            None
        };
        Ok(TwoBranchFamily {
            label: label.to_string(),
            contraction: *below[0],
            growth: *above[0],
            default_constant,
        })
    }

    pub fn lambda_factored(&self, k1: &BigUint, k2: &BigUint) -> FactoredRatio {
        FactoredRatio::power(self.growth.0, self.growth.1, k1)
            .mul(&FactoredRatio::power(self.contraction.0, self.contraction.1, k2))
    }

    fn ln_ratios(&self, bits: u32) -> (Fixed, Fixed) {
        let ln = |(n, d): (i64, i64)| {
            ln_int(&BigInt::from(n), bits).sub(&ln_int(&BigInt::from(d), bits))
        };
        (ln(self.growth), ln(self.contraction))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// λ < 1
    PP,
    /// λ > 1
    PG,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::PP => "PP",
            Side::PG => "PG",
        })
    }
}

/// One node `N_{main, secondary}` of the PP/PG walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub main: u64,
    pub secondary: u64,
    pub side: Side,
    /// Growth steps.
    pub k1: BigUint,
    /// Contraction steps.
    pub k2: BigUint,
    pub ln_lambda: Fixed,
    /// Absent for the two seeds and when no bound constant applies.
    pub ln_c: Option<Fixed>,
}

impl Node {
    pub fn k(&self) -> BigUint {
        &self.k1 + &self.k2
    }

    pub fn is_seed(&self) -> bool {
        self.main == 1
    }

    pub fn lambda_f64(&self) -> f64 {
        self.ln_lambda.to_f64().exp()
    }

    /// λ rounded to `digits` decimals, via a high-precision exponential.
    pub fn lambda_decimal(&self, digits: u32) -> String {
        let bits = ((digits as f64) * 3.33) as u32 + 64;
        self.ln_lambda.exp(bits).to_decimal(digits)
    }

    pub fn counts_u64(&self) -> Option<(u64, u64)> {
        Some((u64::try_from(&self.k1).ok()?, u64::try_from(&self.k2).ok()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeStop {
    /// Emit nodes with main index up to this value (seeds are main node 1).
    MainNodes(u64),
    /// Emit products while `k = k1 + k2` stays at or below this value.
    MaxK(BigUint),
    /// Emit this many products after the seeds.
    Products(usize),
}

#[derive(Clone, Debug)]
pub struct NodeOptions {
    pub stop: NodeStop,
    /// Overrides the family default; `None` with no default leaves `ln_c` empty.
    pub constant: Option<BoundConstant>,
    pub precision_bits: u32,
}

impl NodeOptions {
    pub fn main_nodes(n: u64) -> Self {
        NodeOptions {
            stop: NodeStop::MainNodes(n),
            constant: None,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }
}

/// Runs the PP/PG walk.
///
/// Seeds are PP = contraction ratio with `(k1, k2) = (0, 1)` and PG =
/// growth ratio with `(1, 0)`, both labelled `N_{1,1}`. Every product
/// `PP * PG` is one node; a new main index starts whenever the side of
/// the product differs from the previous product's.
///
/// The side of each product is decided exactly: λ = 1 is excluded on the
/// factored form, then the working precision of ln λ is doubled until its
/// error bound is `2^precision_bits` times smaller than |ln λ|.
pub fn generate_nodes(family: &TwoBranchFamily, opts: &NodeOptions) -> Result<Vec<Node>, NodeError> {
    check_precision(opts.precision_bits)?;
    let bits = opts.precision_bits;
    let constant = opts
        .constant
        .clone()
        .or_else(|| family.default_constant.clone())
        .map(|c| c.value());
    let mut w = bits.max(128);
    let (mut lg, mut lc) = family.ln_ratios(w);

    let one = BigUint::one();
    let zero = BigUint::zero();
    let mut out = vec![
        Node {
            main: 1,
            secondary: 1,
            side: Side::PP,
            k1: zero.clone(),
            k2: one.clone(),
            ln_lambda: lc.with_bits(bits),
            ln_c: None,
        },
        Node {
            main: 1,
            secondary: 1,
            side: Side::PG,
            k1: one.clone(),
            k2: zero.clone(),
            ln_lambda: lg.with_bits(bits),
            ln_c: None,
        },
    ];
    let mut pp = (zero.clone(), one.clone());
    let mut pg = (one, zero);
    let mut main = 1u64;
    let mut secondary = 0u64;
    let mut last_side: Option<Side> = None;
    let mut products = 0usize;

    loop {
        if let NodeStop::Products(n) = opts.stop {
            if products >= n {
                break;
            }
        }
        let k1 = &pp.0 + &pg.0;
        let k2 = &pp.1 + &pg.1;
        let k = &k1 + &k2;
        if let NodeStop::MaxK(max) = &opts.stop {
            if &k > max {
                break;
            }
        }
        if family.lambda_factored(&k1, &k2).is_one() {
            return Err(NodeError::LambdaOne);
        }
        let k1i = BigInt::from_biguint(Sign::Plus, k1.clone());
        let k2i = BigInt::from_biguint(Sign::Plus, k2.clone());
        let ki = BigInt::from_biguint(Sign::Plus, k.clone());
        let ln = loop {
            let val = lg.mul_int(&k1i).add(&lc.mul_int(&k2i));
            // each ratio log is within one ulp at w bits
            let err = Fixed::ulp(w).mul_int(&(&ki + 2u32));
            let margin = err.mul_int(&(BigInt::one() << bits));
            if val.abs() > margin {
                break val;
            }
            w *= 2;
            (lg, lc) = family.ln_ratios(w);
        };
        let side = if ln.is_negative() { Side::PP } else { Side::PG };
        if last_side != Some(side) {
            main += 1;
            secondary = 1;
            last_side = Some(side);
        } else {
            secondary += 1;
        }
        if let NodeStop::MainNodes(n) = opts.stop {
            if main > n {
                break;
            }
        }
        let ln_c = match &constant {
            Some(cst) => Some(bound_from_ln(&ln, &k1, cst, bits)?.ln_c),
            None => None,
        };
        out.push(Node {
            main,
            secondary,
            side,
            k1: k1.clone(),
            k2: k2.clone(),
            ln_lambda: ln,
            ln_c,
        });
        match side {
            Side::PP => pp = (k1, k2),
            Side::PG => pg = (k1, k2),
        }
        products += 1;
    }
    Ok(out)
}

/// Result of comparing the node sequences of two families.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReciprocityReport {
    pub pairs_checked: usize,
    /// Indices (into the second list) whose value is not the exact reciprocal.
    pub value_mismatches: Vec<usize>,
    /// Secondary-node counts per main node of each family, from main node 2.
    pub runs_first: Vec<u64>,
    pub runs_second: Vec<u64>,
    pub run_pairs_checked: usize,
    pub run_mismatches: Vec<usize>,
}

impl ReciprocityReport {
    pub fn ok(&self) -> bool {
        self.value_mismatches.is_empty() && self.run_mismatches.is_empty()
    }
}

fn run_lengths(nodes: &[Node]) -> Vec<u64> {
    let mut runs: Vec<u64> = Vec::new();
    for n in nodes.iter().filter(|n| !n.is_seed()) {
        let idx = (n.main - 2) as usize;
        if runs.len() <= idx {
            runs.resize(idx + 1, 0);
        }
        runs[idx] += 1;
    }
    runs
}

/// Checks that every value of `second` except its PP seed is the exact
/// reciprocal of the value at the same position of `first` (seeds then
/// products), and that main node `i` of `first` has as many secondary
/// nodes as main node `i + 1` of `second`.
pub fn reciprocity_check(
    first_family: &TwoBranchFamily,
    first: &[Node],
    second_family: &TwoBranchFamily,
    second: &[Node],
) -> ReciprocityReport {
    let mut report = ReciprocityReport::default();
    let second_rest = second.get(1..).unwrap_or(&[]);
    for (i, (a, b)) in first.iter().zip(second_rest).enumerate() {
        let fa = first_family.lambda_factored(&a.k1, &a.k2);
        let fb = second_family.lambda_factored(&b.k1, &b.k2);
        report.pairs_checked += 1;
        if fa.recip() != fb {
            report.value_mismatches.push(i + 1);
        }
    }
    report.runs_first = run_lengths(first);
    report.runs_second = run_lengths(second);
    // complete runs only: the last main node of each list may be cut short
    let n1 = report.runs_first.len().saturating_sub(1);
    let n2 = report.runs_second.len().saturating_sub(1);
    for i in 0..n1.min(n2.saturating_sub(1)) {
        report.run_pairs_checked += 1;
        if report.runs_first[i] != report.runs_second[i + 1] {
            report.run_mismatches.push(i + 2);
        }
    }
    report
}
