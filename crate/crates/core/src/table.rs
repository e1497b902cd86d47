//! Node tables: row formatting and comparison with reference tables.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::hp::Fixed;
use crate::nodes::{Node, Side};
use crate::ratio::ExactRatio;
use crate::serde_big;

pub const LAMBDA_DIGITS: u32 = 15;
pub const LN_C_DIGITS: u32 = 7;
pub const LAMBDA_TOL: f64 = 1e-13;
pub const LN_C_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRow {
    pub i: u64,
    pub j: u64,
    pub side: Side,
    #[serde(with = "serde_big")]
    pub k1: BigInt,
    #[serde(with = "serde_big")]
    pub k2: BigInt,
    #[serde(with = "serde_big")]
    pub k: BigInt,
    pub lambda: String,
    pub ln_c: Option<String>,
}

impl NodeRow {
    pub fn from_node(n: &Node) -> Self {
        let big = |v: &BigUint| BigInt::from(v.clone());
        NodeRow {
            i: n.main,
            j: n.secondary,
            side: n.side,
            k1: big(&n.k1),
            k2: big(&n.k2),
            k: big(&n.k()),
            lambda: n.lambda_decimal(LAMBDA_DIGITS),
            ln_c: n.ln_c.as_ref().map(|v| v.to_decimal(LN_C_DIGITS)),
        }
    }
}

pub fn node_rows(nodes: &[Node]) -> Vec<NodeRow> {
    nodes.iter().map(NodeRow::from_node).collect()
}

const HEADER: [&str; 8] = ["i", "j", "side", "k1", "k2", "k", "lambda", "ln_c"];

fn fields(r: &NodeRow) -> [String; 8] {
    [
        r.i.to_string(),
        r.j.to_string(),
        r.side.to_string(),
        r.k1.to_string(),
        r.k2.to_string(),
        r.k.to_string(),
        r.lambda.clone(),
        r.ln_c.clone().unwrap_or_default(),
    ]
}

pub fn render_csv(rows: &[NodeRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("write to memory");
    for r in rows {
        w.write_record(fields(r)).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

pub fn render_json(rows: &[NodeRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

pub fn render_pretty(rows: &[NodeRow]) -> String {
    let cells: Vec<[String; 8]> = rows.iter().map(fields).collect();
    let mut width = HEADER.map(str::len);
    for c in &cells {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, c: &[String]| {
        let parts: Vec<String> = c
            .iter()
            .zip(width)
            .enumerate()
            .map(|(i, (s, w))| if i == 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&mut out, &HEADER.map(String::from));
    let mut prev = None;
    for (r, c) in rows.iter().zip(&cells) {
        if prev.is_some() && prev != Some(r.i) {
            out.push('\n');
        }
        prev = Some(r.i);
        line(&mut out, c);
    }
    out
}

/// One printed row of a reference table. `node` is the label as printed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub node: u64,
    pub j: u64,
    pub side: Side,
    pub k1: u64,
    pub k2: u64,
    pub k: u64,
    pub lambda: String,
    pub ln_c: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub family: String,
    pub rows: Vec<ReferenceRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowCheck {
    pub k1: u64,
    pub k2: u64,
    pub found: bool,
    pub side_ok: bool,
    pub k_ok: bool,
    pub lambda_diff: Option<f64>,
    pub ln_c_diff: Option<f64>,
}

impl RowCheck {
    pub fn lambda_ok(&self) -> bool {
        self.lambda_diff.is_some_and(|d| d <= LAMBDA_TOL)
    }

    pub fn ln_c_ok(&self) -> bool {
        self.ln_c_diff.is_none_or(|d| d <= LN_C_TOL)
    }

    pub fn ok(&self) -> bool {
        self.found && self.side_ok && self.k_ok && self.lambda_ok() && self.ln_c_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceCheck {
    pub family: String,
    pub rows: Vec<RowCheck>,
}

impl ReferenceCheck {
    pub fn ok(&self) -> bool {
        self.rows.iter().all(RowCheck::ok)
    }

    pub fn failures(&self) -> Vec<&RowCheck> {
        self.rows.iter().filter(|r| !r.ok()).collect()
    }
}

fn diff(value: &Fixed, printed: &str) -> Option<f64> {
    let p: ExactRatio = printed.parse().ok()?;
    let bits = value.bits().max(128);
    let p = Fixed::from_ratio(p.numer(), p.denom(), bits);
    Some(value.with_bits(bits).sub(&p).abs().to_f64())
}

/// Compares generated nodes with a reference table, matching rows by
/// `(k1, k2)`: λ within [`LAMBDA_TOL`] and ln C within [`LN_C_TOL`].
pub fn check_reference(nodes: &[Node], table: &ReferenceTable) -> ReferenceCheck {
    let by_counts: HashMap<(BigUint, BigUint), &Node> =
        nodes.iter().map(|n| ((n.k1.clone(), n.k2.clone()), n)).collect();
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let key = (BigUint::from(r.k1), BigUint::from(r.k2));
            match by_counts.get(&key) {
                None => RowCheck {
                    k1: r.k1,
                    k2: r.k2,
                    found: false,
                    side_ok: false,
                    k_ok: false,
                    lambda_diff: None,
                    ln_c_diff: None,
                },
                Some(n) => RowCheck {
                    k1: r.k1,
                    k2: r.k2,
                    found: true,
                    side_ok: n.side == r.side,
                    k_ok: n.k() == BigUint::from(r.k),
                    lambda_diff: diff(&n.ln_lambda.exp(160), &r.lambda),
                    ln_c_diff: match (&r.ln_c, &n.ln_c) {
                        (None, _) => None,
                        (Some(p), Some(v)) => diff(v, p),
                        (Some(_), None) => Some(f64::INFINITY),
                    },
                },
            }
        })
        .collect();
    ReferenceCheck {
        family: table.family.clone(),
        rows,
    }
}

pub mod fixtures {
    use super::ReferenceTable;

    pub const TABLE1: &str = include_str!("../fixtures/table1_nodes.json");
    pub const TABLE4: &str = include_str!("../fixtures/table4_nodes.json");

    /// Printed node rows for the Collatz permutation.
    pub fn collatz() -> ReferenceTable {
        serde_json::from_str(TABLE1).expect("bundled table parses")
    }

    /// Printed node rows for 3x+1.
    pub fn three_x_plus_one() -> ReferenceTable {
        serde_json::from_str(TABLE4).expect("bundled table parses")
    }

    /// Main-node depth needed to cover every row.
    pub fn depth(table: &ReferenceTable) -> u64 {
        if table.family == "3x1" {
            10
        } else {
            9
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{generate_nodes, NodeOptions, TwoBranchFamily};

    fn first_nodes() -> Vec<Node> {
        generate_nodes(&TwoBranchFamily::collatz(), &NodeOptions::main_nodes(4)).unwrap()
    }

    #[test]
    fn rows_and_formats() {
        let rows = node_rows(&first_nodes());
        assert_eq!(rows[2].lambda, "0.888888888888889");
        assert_eq!(rows[2].ln_c.as_deref(), Some("0.9067673"));
        assert_eq!(rows[0].ln_c, None);
        let csv = render_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("i,j,side,k1,k2,k,lambda,ln_c"));
        assert_eq!(lines.next(), Some("1,1,PP,0,1,1,0.666666666666667,"));
        let json: serde_json::Value = serde_json::from_str(&render_json(&rows)).unwrap();
        assert_eq!(json[6]["k"], 12);
        assert_eq!(json[6]["ln_c"], "5.0150589");
        let pretty = render_pretty(&rows);
        assert!(pretty.contains("0.986540368545144"));
    }

    #[test]
    fn csv_and_json_agree() {
        let rows = node_rows(&first_nodes());
        let json: Vec<serde_json::Value> = serde_json::from_str(&render_json(&rows)).unwrap();
        let csv = render_csv(&rows);
        for (line, j) in csv.lines().skip(1).zip(json) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[3], j["k1"].to_string());
            assert_eq!(f[6], j["lambda"].as_str().unwrap());
            assert_eq!(f[7], j["ln_c"].as_str().unwrap_or(""));
        }
    }

    #[test]
    fn reference_check_catches_changes() {
        let nodes = first_nodes();
        let mut table = fixtures::collatz();
        table.rows.truncate(7);
        assert!(check_reference(&nodes, &table).ok());
        table.rows[4].ln_c = Some("2.8208".into());
        table.rows[5].lambda = "0.93644261545516".into();
        let c = check_reference(&nodes, &table);
        assert_eq!(c.failures().len(), 2);
        table.rows.push(ReferenceRow {
            node: 5,
            j: 1,
            side: Side::PG,
            k1: 10,
            k2: 7,
            k: 17,
            lambda: "1.0393".into(),
            ln_c: None,
        });
        assert!(!check_reference(&nodes, &table).rows.last().unwrap().found);
    }

    #[test]
    fn bundled_tables_load() {
        assert_eq!(fixtures::collatz().rows.len(), 22);
        assert_eq!(fixtures::three_x_plus_one().rows.len(), 23);
    }
}
