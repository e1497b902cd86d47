//! Named mapping families and the textual family selector.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::mapping::{Branch, MappingDef, MappingError};

/// The original Collatz permutation `g`: `2n/3`, `(4n-1)/3`, `(4n+1)/3`.
pub fn collatz() -> MappingDef {
    MappingDef::validate(3, vec![Branch::new(2, 0), Branch::new(4, 1), Branch::new(4, -1)])
        .expect("valid")
}

/// `T(n) = n/2` or `(3n+1)/2`.
pub fn three_x_plus_one() -> MappingDef {
    MappingDef::validate(2, vec![Branch::new(1, 0), Branch::new(3, -1)]).expect("valid")
}

/// Four-branch example with multipliers 1, 3, 5, 17 over d = 4.
pub fn matthews() -> MappingDef {
    MappingDef::validate(
        4,
        vec![Branch::new(1, 0), Branch::new(3, 3), Branch::new(5, 2), Branch::new(17, 3)],
    )
    .expect("valid")
}

/// `T_d`: `x/d` on class 0, `((d+1)x + d - i)/d` on class `i`.
pub fn carnielli_t(d: u32) -> Result<MappingDef, MappingError> {
    if d < 2 {
        return Err(MappingError::ModulusTooSmall(d as i64));
    }
    let d64 = d as i64;
    let branches = (0..d64)
        .map(|i| {
            if i == 0 {
                Branch::new(1, 0)
            } else {
                Branch::new(d64 + 1, -(d64 - i))
            }
        })
        .collect();
    MappingDef::validate(d64, branches)
}

/// `L_d`: `x/d` on class 0, `((d+1)x - i)/d` for the signed representative
/// `-d/2 < i <= d/2` of the class.
pub fn carnielli_l(d: u32) -> Result<MappingDef, MappingError> {
    if d < 2 {
        return Err(MappingError::ModulusTooSmall(d as i64));
    }
    let d64 = d as i64;
    let mut branches = vec![Branch::new(1, 0); d as usize];
    for i in (-(d64 - 1) / 2)..=(d64 / 2) {
        if i == 0 {
            continue;
        }
        let residue = i.rem_euclid(d64) as usize;
        branches[residue] = Branch::new(d64 + 1, i);
    }
    MappingDef::validate(d64, branches)
}

/// Output forms of the `f(3n) = ..` presentation, as `(m, r)` per input class.
///
/// Row = output kind (`2n`, `4n-3`, `4n-1`), column = input class
/// (`3n` = class 0, `3n-2` = class 1, `3n-1` = class 2).
const PERMUTATION_FORMS: [[(i64, i64); 3]; 3] = [
    [(2, 0), (2, -4), (2, -2)],
    [(4, 9), (4, 1), (4, 5)],
    [(4, 3), (4, -5), (4, -1)],
];

/// Output kind assigned to classes 0, 1, 2 for each variant. The first four
/// are the displayed functions in order; 5 and 6 are the two remaining
/// assignments in lexicographic order.
const PERMUTATION_ORDER: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 2, 0],
    [1, 0, 2],
    [2, 0, 1],
    [2, 1, 0],
];

/// One of the six infinite-permutation variants built from `f(3n) = 2n`,
/// `f(3n-2) = 4n-3`, `f(3n-1) = 4n-1` by permuting the outputs.
/// Variant 1 is `g`, variant 3 is `h`.
pub fn permutation_variant(index: u8) -> Result<MappingDef, MappingError> {
    if !(1..=6).contains(&index) {
        return Err(MappingError::Family(format!(
            "permutation variant {index} out of range 1..=6"
        )));
    }
    let order = PERMUTATION_ORDER[(index - 1) as usize];
    let branches = order
        .iter()
        .enumerate()
        .map(|(class, &kind)| {
            let (m, r) = PERMUTATION_FORMS[kind][class];
            Branch::new(m, r)
        })
        .collect();
    MappingDef::validate(3, branches)
}

/// A family selector as written on the command line or in config files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Collatz,
    ThreeXPlusOne,
    Matthews,
    Permutation(u8),
    CarnielliT(u32),
    CarnielliL(u32),
    Custom(PathBuf),
}

impl Family {
    pub fn mapping(&self) -> Result<MappingDef, MappingError> {
        match self {
            Family::Collatz => Ok(collatz()),
            Family::ThreeXPlusOne => Ok(three_x_plus_one()),
            Family::Matthews => Ok(matthews()),
            Family::Permutation(i) => permutation_variant(*i),
            Family::CarnielliT(d) => carnielli_t(*d),
            Family::CarnielliL(d) => carnielli_l(*d),
            Family::Custom(path) => load_mapping(path),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Collatz => f.write_str("collatz"),
            Family::ThreeXPlusOne => f.write_str("3x1"),
            Family::Matthews => f.write_str("matthews"),
            Family::Permutation(i) => write!(f, "perm:{i}"),
            Family::CarnielliT(d) => write!(f, "carnielli-T:{d}"),
            Family::CarnielliL(d) => write!(f, "carnielli-L:{d}"),
            Family::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl FromStr for Family {
    type Err = MappingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MappingError::Family(format!("unknown family selector '{s}'"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u32, MappingError> {
            a.and_then(|v| v.parse().ok()).ok_or_else(bad)
        };
        match (head, arg) {
            ("collatz" | "g", None) => Ok(Family::Collatz),
            ("3x1" | "3x+1", None) => Ok(Family::ThreeXPlusOne),
            ("matthews", None) => Ok(Family::Matthews),
            ("perm", a) => {
                let i = num(a)?;
                if !(1..=6).contains(&i) {
                    return Err(bad());
                }
                Ok(Family::Permutation(i as u8))
            }
            ("carnielli-T", a) => Ok(Family::CarnielliT(num(a)?)),
            ("carnielli-L", a) => Ok(Family::CarnielliL(num(a)?)),
            ("custom", Some(p)) if !p.is_empty() => Ok(Family::Custom(PathBuf::from(p))),
            _ => Err(bad()),
        }
    }
}

/// Reads a JSON mapping file `{"d": .., "branches": [{"m": .., "r": ..}, ..]}`.
pub fn load_mapping(path: &Path) -> Result<MappingDef, MappingError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MappingError::Family(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| MappingError::Family(format!("{}: {e}", path.display())))
}
