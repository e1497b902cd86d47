//! Cycle catalogs: JSON persistence, verification and bundled fixtures.
//!
//! An entry either lists a cycle's elements or only a `start` value and
//! its period; the latter is expanded by iteration when verified.

use std::collections::HashMap;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle::{canonicalize, orbit_cycle, Cycle};
use crate::mapping::{BranchCounts, MappingDef};
use crate::serde_big;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    #[serde(default, with = "serde_big::vec", skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<BigInt>,
    #[serde(default, with = "serde_big::option", skip_serializing_if = "Option::is_none")]
    pub start: Option<BigInt>,
    pub period: usize,
    #[serde(default, with = "serde_big::option", skip_serializing_if = "Option::is_none")]
    pub min: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BranchCounts>,
}

impl CatalogEntry {
    pub fn from_cycle(c: &Cycle) -> Self {
        CatalogEntry {
            elements: c.elements.clone(),
            start: None,
            period: c.period(),
            min: Some(c.min_element().clone()),
            counts: Some(c.counts.clone()),
        }
    }

    pub fn seed(start: i64, period: usize) -> Self {
        CatalogEntry {
            elements: Vec::new(),
            start: Some(BigInt::from(start)),
            period,
            min: None,
            counts: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCatalog {
    pub mapping: MappingDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub cycles: Vec<CatalogEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid catalog {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
}

impl CycleCatalog {
    pub fn from_cycles(mapping: MappingDef, cycles: Vec<Cycle>) -> Self {
        CycleCatalog {
            mapping,
            family: None,
            cycles: cycles.iter().map(CatalogEntry::from_cycle).collect(),
            notes: Vec::new(),
        }
    }

    pub fn with_family(mut self, family: impl Into<String>) -> Self {
        self.family = Some(family.into());
        self
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CatalogError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    /// Expands every entry; `None` where an entry does not describe a cycle.
    pub fn resolve(&self, mapping: &MappingDef) -> Vec<Option<Cycle>> {
        self.cycles.iter().map(|e| resolve_entry(mapping, e)).collect()
    }
}

fn resolve_entry(mapping: &MappingDef, e: &CatalogEntry) -> Option<Cycle> {
    if !e.elements.is_empty() {
        canonicalize(mapping, &e.elements).ok()
    } else {
        let start = e.start.as_ref()?;
        orbit_cycle(mapping, start, e.period as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryCheck {
    pub index: usize,
    pub ok: bool,
    pub problems: Vec<String>,
    pub period: Option<usize>,
    #[serde(with = "serde_big::option")]
    pub min: Option<BigInt>,
    pub counts: Option<BranchCounts>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub entries: Vec<EntryCheck>,
    /// Pairs of entries that share an element.
    pub shared: Vec<(usize, usize)>,
    /// The catalog names a different mapping than the one checked against.
    pub mapping_mismatch: bool,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        !self.mapping_mismatch && self.shared.is_empty() && self.entries.iter().all(|e| e.ok)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.ok).count()
    }
}

/// Re-walks every entry and compares the stated period, least element
/// and counts against the recomputed ones.
pub fn verify_catalog(mapping: &MappingDef, catalog: &CycleCatalog) -> VerifyReport {
    let mut entries = Vec::with_capacity(catalog.cycles.len());
    let mut owner: HashMap<BigInt, usize> = HashMap::new();
    let mut shared = Vec::new();
    for (index, e) in catalog.cycles.iter().enumerate() {
        let mut problems = Vec::new();
        let cycle = if !e.elements.is_empty() {
            match canonicalize(mapping, &e.elements) {
                Ok(c) => {
                    if c.elements != e.elements {
                        problems.push("elements are not in canonical rotation".to_string());
                    }
                    Some(c)
                }
                Err(err) => {
                    problems.push(err.to_string());
                    None
                }
            }
        } else if let Some(start) = &e.start {
            let c = orbit_cycle(mapping, start, e.period as u64);
            if c.is_none() {
                problems.push(format!("{start} does not return within {} steps", e.period));
            }
            c
        } else {
            problems.push("entry has neither elements nor start".to_string());
            None
        };
        if let Some(c) = &cycle {
            if c.period() != e.period {
                problems.push(format!("period {} stated, {} found", e.period, c.period()));
            }
            if let Some(m) = &e.min {
                if m != c.min_element() {
                    problems.push(format!("min {m} stated, {} found", c.min_element()));
                }
            }
            if let Some(k) = &e.counts {
                if k != &c.counts {
                    problems.push(format!("counts {:?} stated, {:?} found", k.counts, c.counts.counts));
                }
            }
            for x in &c.elements {
                if let Some(&other) = owner.get(x) {
                    if other != index && !shared.contains(&(other, index)) {
                        shared.push((other, index));
                    }
                } else {
                    owner.insert(x.clone(), index);
                }
            }
        }
        entries.push(EntryCheck {
            index,
            ok: problems.is_empty(),
            problems,
            period: cycle.as_ref().map(Cycle::period),
            min: cycle.as_ref().map(|c| c.min_element().clone()),
            counts: cycle.map(|c| c.counts),
        });
    }
    VerifyReport {
        entries,
        shared,
        mapping_mismatch: &catalog.mapping != mapping,
    }
}

/// Catalogs shipped with the crate.
pub mod fixtures {
    use super::CycleCatalog;
    use crate::mapping::MappingDef;

    fn parse(text: &str) -> CycleCatalog {
        serde_json::from_str(text).expect("bundled catalog parses")
    }

    pub const COLLATZ: &str = include_str!("../fixtures/collatz_cycles.json");
    pub const THREE_X_PLUS_ONE: &str = include_str!("../fixtures/3x1_cycles.json");
    pub const PERMUTATION_3: &str = include_str!("../fixtures/perm3_cycles.json");
    pub const MATTHEWS: &str = include_str!("../fixtures/matthews_cycles.json");
    pub const MATTHEWS_MAPPING: &str = include_str!("../fixtures/matthews_mapping.json");

    /// The nine cycles of the Collatz permutation on the integers.
    pub fn collatz() -> CycleCatalog {
        parse(COLLATZ)
    }

    /// The five known 3x+1 cycles on the integers.
    pub fn three_x_plus_one() -> CycleCatalog {
        parse(THREE_X_PLUS_ONE)
    }

    /// Permutation variant 3: the 6-cycle and the 94-cycle through 144.
    pub fn permutation_3() -> CycleCatalog {
        parse(PERMUTATION_3)
    }

    /// Seventeen cycles of the 4-branch map, stored as start values.
    pub fn matthews() -> CycleCatalog {
        parse(MATTHEWS)
    }

    pub fn matthews_mapping() -> MappingDef {
        serde_json::from_str(MATTHEWS_MAPPING).expect("bundled mapping parses")
    }

    /// Looks a bundled catalog up by name.
    pub fn by_name(name: &str) -> Option<CycleCatalog> {
        match name {
            "collatz" | "g" => Some(collatz()),
            "3x1" | "3x+1" => Some(three_x_plus_one()),
            "perm:3" | "perm3" => Some(permutation_3()),
            "matthews" => Some(matthews()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 4] = ["collatz", "3x1", "perm:3", "matthews"];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family;

    #[test]
    fn bundled_catalogs_verify() {
        let cases = [
            (fixtures::collatz(), family::collatz(), 9),
            (fixtures::three_x_plus_one(), family::three_x_plus_one(), 5),
            (fixtures::permutation_3(), family::permutation_variant(3).unwrap(), 2),
            (fixtures::matthews(), family::matthews(), 17),
        ];
        for (cat, mapping, n) in cases {
            assert_eq!(cat.cycles.len(), n);
            let r = verify_catalog(&mapping, &cat);
            assert!(r.ok(), "{:?}: {:?}", cat.family, r);
        }
        assert_eq!(fixtures::matthews_mapping(), family::matthews());
    }

    #[test]
    fn tampered_entry_fails() {
        let mut cat = fixtures::collatz();
        let idx = cat.cycles.iter().position(|e| e.period == 5).unwrap();
        cat.cycles[idx].elements[2] += 1;
        let r = verify_catalog(&family::collatz(), &cat);
        assert!(!r.ok());
        assert_eq!(r.failures(), 1);
        assert!(!r.entries[idx].ok);
    }

    #[test]
    fn stated_fields_are_checked() {
        let mut cat = fixtures::three_x_plus_one();
        cat.cycles[2].min = Some(BigInt::from(2));
        let r = verify_catalog(&family::three_x_plus_one(), &cat);
        assert_eq!(r.failures(), 1);
        let mut cat = fixtures::matthews();
        cat.cycles[0].period = 2;
        assert!(!verify_catalog(&family::matthews(), &cat).ok());
    }

    #[test]
    fn shared_elements_are_reported() {
        let mut cat = fixtures::collatz();
        cat.cycles.push(CatalogEntry::seed(5, 5));
        let r = verify_catalog(&family::collatz(), &cat);
        assert_eq!(r.failures(), 0);
        assert_eq!(r.shared.len(), 1);
        assert!(!r.ok());
    }

    #[test]
    fn json_round_trip() {
        let cat = fixtures::collatz();
        let back: CycleCatalog = serde_json::from_str(&cat.to_json()).unwrap();
        assert_eq!(back, cat);
        let m = fixtures::matthews();
        let resolved = m.resolve(&family::matthews());
        let big = resolved.iter().flatten().find(|c| c.period() == 1426).unwrap();
        let text = serde_json::to_string(&CatalogEntry::from_cycle(big)).unwrap();
        assert!(text.contains("\"-564506377241448536097472678944\""));
    }
}
