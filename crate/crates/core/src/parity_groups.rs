//! Parity groups built by stacking arrangements of a horizontal code.
//!
//! An *arrangement* (extended row) places the `δ` parity columns of the
//! code among the `k` positions, data everywhere else. Stacking all
//! `δ!·C(k,δ)` arrangements gives a group in which every column plays every
//! role equally often, so rebuild reads are uniform across the surviving
//! columns (C3) and every column carries the same parity share (C4).
//!
//! Reads are counted at extended-row granularity: under the rule, a
//! surviving column of an extended row is either read in full (`r` entries)
//! or not touched.

use std::fmt;

use itertools::Itertools;
use num_integer::binomial;
use serde::{Deserialize, Serialize};

use crate::erasure_codes::{reconstruction_rule, ColumnLabel, HorizontalCode};
use crate::{Error, Result};

/// Labels of one extended row, indexed by group column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arrangement(pub Vec<ColumnLabel>);

impl Arrangement {
    pub fn labels(&self) -> &[ColumnLabel] {
        &self.0
    }

    pub fn symbols(&self, delta: usize) -> String {
        self.0.iter().map(|l| l.symbol(delta)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupFamily {
    /// All `δ!·C(k,δ)` parity placements.
    #[default]
    Balanced,
    /// The code in its original column order only.
    Single,
    /// The `k` cyclic rotations of the original column order.
    Rotations,
    /// Caller-supplied arrangements.
    Custom,
}

/// Group descriptor used in layout files:
/// `{"code":"rdp","p":3}` or `{"code":"rs","k":5,"delta":2}`, with an
/// optional `"family"` (default `"balanced"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(flatten)]
    pub code: CodeSpec,
    #[serde(default, skip_serializing_if = "is_balanced")]
    pub family: GroupFamily,
}

fn is_balanced(f: &GroupFamily) -> bool {
    *f == GroupFamily::Balanced
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "lowercase")]
pub enum CodeSpec {
    Rdp { p: usize },
    Rs { k: usize, delta: usize },
}

impl CodeSpec {
    pub fn build(self) -> Result<HorizontalCode> {
        match self {
            CodeSpec::Rdp { p } => HorizontalCode::rdp(p),
            CodeSpec::Rs { k, delta } => HorizontalCode::reed_solomon(k, delta),
        }
    }
}

impl GroupSpec {
    pub fn build(self) -> Result<ParityGroup> {
        let code = self.code.build()?;
        match self.family {
            GroupFamily::Balanced => Ok(ParityGroup::balanced(code)),
            GroupFamily::Single => Ok(ParityGroup::single(code)),
            GroupFamily::Rotations => Ok(ParityGroup::rotations(code)),
            GroupFamily::Custom => Err(Error::Format(
                "custom arrangement families cannot be described by a group spec".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGroup {
    code: HorizontalCode,
    family: GroupFamily,
    arrangements: Vec<Arrangement>,
    /// `columns[e][c]`: canonical code column stored at group column `c` of
    /// extended row `e`.
    columns: Vec<Vec<usize>>,
}

/// Stacks every placement of the parity columns: position tuples in
/// lexicographic order, and for each tuple the parity indices permuted in
/// lexicographic order.
pub fn balance_horizontal_code(code: HorizontalCode) -> ParityGroup {
    ParityGroup::balanced(code)
}

impl ParityGroup {
    pub fn balanced(code: HorizontalCode) -> Self {
        let (k, delta) = (code.k(), code.delta());
        let mut arrangements = Vec::new();
        for positions in (0..k).combinations(delta) {
            for perm in (1..=delta).permutations(delta) {
                let mut labels = vec![ColumnLabel::Data; k];
                for (&pos, &idx) in positions.iter().zip(&perm) {
                    labels[pos] = ColumnLabel::Parity(idx);
                }
                arrangements.push(Arrangement(labels));
            }
        }
        Self::assemble(code, GroupFamily::Balanced, arrangements)
    }

    pub fn single(code: HorizontalCode) -> Self {
        Self::assemble(code, GroupFamily::Single, vec![Arrangement(code.labels())])
    }

    /// Rotation `s` moves the column at original position `c` to `(c + s) mod k`.
    pub fn rotations(code: HorizontalCode) -> Self {
        let k = code.k();
        let base = code.labels();
        let arrangements = (0..k)
            .map(|s| Arrangement((0..k).map(|c| base[(c + k - s) % k]).collect()))
            .collect();
        Self::assemble(code, GroupFamily::Rotations, arrangements)
    }

    /// Any family of arrangements, each holding exactly the code's labels.
    pub fn custom(code: HorizontalCode, arrangements: Vec<Arrangement>) -> Result<Self> {
        if arrangements.is_empty() {
            return Err(Error::Param("a group needs at least one arrangement".into()));
        }
        let mut expected = code.labels();
        expected.sort();
        for (e, a) in arrangements.iter().enumerate() {
            let mut got = a.0.clone();
            got.sort();
            if got != expected {
                return Err(Error::Param(format!(
                    "arrangement {e} ({}) does not hold the labels of {code}",
                    a.symbols(code.delta())
                )));
            }
        }
        Ok(Self::assemble(code, GroupFamily::Custom, arrangements))
    }

    fn assemble(code: HorizontalCode, family: GroupFamily, arrangements: Vec<Arrangement>) -> Self {
        let data = code.data_columns();
        let columns = arrangements
            .iter()
            .map(|a| {
                let mut next_data = 0;
                a.0.iter()
                    .map(|&label| match label {
                        ColumnLabel::Data => {
                            next_data += 1;
                            next_data - 1
                        }
                        ColumnLabel::Parity(i) => data + i - 1,
                    })
                    .collect()
            })
            .collect();
        ParityGroup {
            code,
            family,
            arrangements,
            columns,
        }
    }

    pub fn code(&self) -> HorizontalCode {
        self.code
    }

    pub fn family(&self) -> GroupFamily {
        self.family
    }

    pub fn spec(&self) -> Result<GroupSpec> {
        let code = match self.code.kind() {
            crate::erasure_codes::CodeKind::Rdp => CodeSpec::Rdp { p: self.code.k() - 1 },
            crate::erasure_codes::CodeKind::ReedSolomon => CodeSpec::Rs {
                k: self.code.k(),
                delta: self.code.delta(),
            },
        };
        if self.family == GroupFamily::Custom {
            return Err(Error::Format(
                "custom arrangement families cannot be described by a group spec".into(),
            ));
        }
        Ok(GroupSpec {
            code,
            family: self.family,
        })
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    pub fn delta(&self) -> usize {
        self.code.delta()
    }

    pub fn arrangements(&self) -> &[Arrangement] {
        &self.arrangements
    }

    pub fn extended_rows(&self) -> usize {
        self.arrangements.len()
    }

    /// Entries per column of one extended row.
    pub fn rows_per_extended_row(&self) -> usize {
        self.code.rows()
    }

    /// Depth `m` of the group.
    pub fn m(&self) -> usize {
        self.code.rows() * self.arrangements.len()
    }

    /// Canonical code column stored at `column` in extended row `row`.
    pub fn canonical_column(&self, row: usize, column: usize) -> usize {
        self.columns[row][column]
    }

    pub fn parity_entries_per_column(&self) -> Vec<u64> {
        parity_per_column(&self.arrangements, self.k(), self.code.rows())
    }

    /// Entries read from each group column when the columns in `lost` are
    /// rebuilt. Lost columns report zero.
    pub fn read_counts(&self, lost: &[usize]) -> Result<Vec<u64>> {
        read_counts(&self.arrangements, self.delta(), self.code.rows(), self.k(), lost)
    }

    pub fn verify(&self, max_s: usize) -> Result<BalanceReport> {
        verify_balance(&self.arrangements, self.delta(), self.code.rows(), max_s)
    }

    /// `τ_s`: entries read from every surviving column when `s` columns are
    /// lost. Defined only when the count is the same for every surviving
    /// column of every `s`-subset.
    pub fn tau(&self, s: usize) -> Result<u64> {
        if s == 0 || s > self.delta() {
            return Err(Error::Param(format!("s must lie in 1..={}", self.delta())));
        }
        let mut value = None;
        for lost in (0..self.k()).combinations(s) {
            let counts = self.read_counts(&lost)?;
            for c in (0..self.k()).filter(|c| !lost.contains(c)) {
                if *value.get_or_insert(counts[c]) != counts[c] {
                    return Err(Error::UnbalancedGroup { s });
                }
            }
        }
        value.ok_or(Error::UnbalancedGroup { s })
    }

    /// `(r_DQ, r_PQ, r_QP)` for the ordered column pair `(i, j)`, in
    /// extended rows.
    pub fn arrangement_counts(&self, i: usize, j: usize) -> Result<ArrangementCounts> {
        if self.delta() != 2 {
            return Err(Error::Param(format!(
                "arrangement counts are defined for two parities, group has {}",
                self.delta()
            )));
        }
        if i == j || i >= self.k() || j >= self.k() {
            return Err(Error::Param(format!("need two distinct columns, got {i} and {j}")));
        }
        let (p, q) = (ColumnLabel::Parity(1), ColumnLabel::Parity(2));
        let count = |a: ColumnLabel, b: ColumnLabel| {
            self.arrangements
                .iter()
                .filter(|r| r.0[i] == a && r.0[j] == b)
                .count() as u64
        };
        Ok(ArrangementCounts {
            r_dq: count(ColumnLabel::Data, q),
            r_pq: count(p, q),
            r_qp: count(q, p),
        })
    }
}

impl fmt::Display for ParityGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} group of {} ({} extended rows, m = {})",
            self.family,
            self.code,
            self.extended_rows(),
            self.m()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArrangementCounts {
    pub r_dq: u64,
    pub r_pq: u64,
    pub r_qp: u64,
}

/// Entries read from one surviving column for one failure set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureReads {
    pub lost: Vec<usize>,
    /// `(surviving column, entries read)`.
    pub reads: Vec<(usize, u64)>,
}

impl FailureReads {
    pub fn uniform(&self) -> bool {
        self.reads.iter().map(|r| r.1).all_equal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceReport {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
    pub max_s: usize,
    pub parity_per_column: Vec<u64>,
    pub failures: Vec<FailureReads>,
    /// `tau[s-1]` is `τ_s`, or `None` when reads differ for that `s`.
    pub tau: Vec<Option<u64>>,
}

impl BalanceReport {
    pub fn balanced(&self) -> bool {
        self.c1 && self.c2 && self.c3 && self.c4
    }
}

fn parity_per_column(arrangements: &[Arrangement], k: usize, rows: usize) -> Vec<u64> {
    (0..k)
        .map(|c| {
            let n = arrangements.iter().filter(|a| a.0[c].is_parity()).count();
            (n * rows) as u64
        })
        .collect()
}

fn read_counts(
    arrangements: &[Arrangement],
    delta: usize,
    rows: usize,
    k: usize,
    lost: &[usize],
) -> Result<Vec<u64>> {
    if let Some(&c) = lost.iter().find(|&&c| c >= k) {
        return Err(Error::Param(format!("column {c} out of range 0..{k}")));
    }
    let mut counts = vec![0u64; k];
    if lost.is_empty() {
        return Ok(counts);
    }
    for a in arrangements {
        let lost_labels: Vec<ColumnLabel> = lost.iter().map(|&c| a.0[c]).collect();
        let rule = reconstruction_rule(delta, &lost_labels)?;
        for c in (0..k).filter(|c| !lost.contains(c)) {
            if rule.contains(&a.0[c]) {
                counts[c] += rows as u64;
            }
        }
    }
    Ok(counts)
}

/// Checks C1–C4 for any stack of arrangements. C3 is checked for every
/// failure set of `1 ..= max_s` columns.
pub fn verify_balance(
    arrangements: &[Arrangement],
    delta: usize,
    rows: usize,
    max_s: usize,
) -> Result<BalanceReport> {
    if max_s > delta {
        return Err(Error::Param(format!("max_s = {max_s} exceeds delta = {delta}")));
    }
    let k = arrangements
        .first()
        .map(|a| a.0.len())
        .ok_or_else(|| Error::Param("no arrangements".into()))?;
    if arrangements.iter().any(|a| a.0.len() != k) {
        return Err(Error::Param("arrangements differ in width".into()));
    }

    let c1 = arrangements.iter().all(|a| {
        let mut parities: Vec<usize> = a
            .0
            .iter()
            .filter_map(|l| match l {
                ColumnLabel::Parity(i) => Some(*i),
                ColumnLabel::Data => None,
            })
            .collect();
        parities.sort_unstable();
        parities == (1..=delta).collect::<Vec<_>>()
    });

    // every loss of at most delta columns must leave enough parities
    let c2 = c1
        && (0..=delta).all(|s| {
            (0..k).combinations(s).all(|lost| {
                arrangements.iter().all(|a| {
                    let labels: Vec<ColumnLabel> = lost.iter().map(|&c| a.0[c]).collect();
                    let lost_data = labels.iter().filter(|l| !l.is_parity()).count();
                    reconstruction_rule(delta, &labels)
                        .map(|rule| rule.iter().filter(|l| l.is_parity()).count() == lost_data)
                        .unwrap_or(false)
                })
            })
        });

    let parity = parity_per_column(arrangements, k, rows);
    let c4 = parity.iter().all_equal();

    let mut failures = Vec::new();
    let mut tau = Vec::with_capacity(max_s);
    for s in 1..=max_s {
        let mut value: Option<Option<u64>> = None;
        for lost in (0..k).combinations(s) {
            let counts = read_counts(arrangements, delta, rows, k, &lost)?;
            let reads: Vec<(usize, u64)> = (0..k)
                .filter(|c| !lost.contains(c))
                .map(|c| (c, counts[c]))
                .collect();
            let entry = FailureReads { lost, reads };
            let this = if entry.uniform() {
                entry.reads.first().map(|r| r.1)
            } else {
                None
            };
            value = match value {
                None => Some(this),
                Some(v) if v == this => Some(v),
                Some(_) => Some(None),
            };
            failures.push(entry);
        }
        tau.push(value.flatten());
    }
    let c3 = failures.iter().all(FailureReads::uniform);

    Ok(BalanceReport {
        c1,
        c2,
        c3,
        c4,
        max_s,
        parity_per_column: parity,
        failures,
        tau,
    })
}

/// Number of arrangements in the balanced family, `δ!·C(k,δ)`.
pub fn balanced_family_size(k: usize, delta: usize) -> usize {
    let fact: usize = (1..=delta).product();
    fact * binomial(k, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rdp(p: usize) -> HorizontalCode {
        HorizontalCode::rdp(p).unwrap()
    }

    #[test]
    fn balanced_sizes() {
        let g = balance_horizontal_code(rdp(3));
        assert_eq!((g.extended_rows(), g.m()), (12, 24));
        let g = balance_horizontal_code(rdp(5));
        assert_eq!((g.extended_rows(), g.m()), (30, 120));
        let g = balance_horizontal_code(HorizontalCode::reed_solomon(5, 2).unwrap());
        assert_eq!((g.extended_rows(), g.m()), (20, 20));
        assert_eq!(balanced_family_size(6, 3), 120);
    }

    #[test]
    fn enumeration_order() {
        let g = balance_horizontal_code(rdp(5));
        let first: Vec<String> = g.arrangements()[..4].iter().map(|a| a.symbols(2)).collect();
        assert_eq!(first, ["PQDDDD", "QPDDDD", "PDQDDD", "QDPDDD"]);
        assert_eq!(g.arrangements()[29].symbols(2), "DDDDQP");
        // every one of the 30 placements appears exactly once
        let distinct: std::collections::HashSet<_> = g.arrangements().iter().collect();
        assert_eq!(distinct.len(), 30);
    }

    #[test]
    fn canonical_columns_follow_labels() {
        let g = ParityGroup::single(rdp(3));
        assert_eq!((0..4).map(|c| g.canonical_column(0, c)).collect::<Vec<_>>(), [0, 1, 2, 3]);
        let g = balance_horizontal_code(rdp(3));
        // "QPDD": Q at 0, P at 1, data columns 0 and 1 at 2 and 3
        assert_eq!(g.arrangements()[1].symbols(2), "QPDD");
        assert_eq!((0..4).map(|c| g.canonical_column(1, c)).collect::<Vec<_>>(), [3, 2, 0, 1]);
    }

    #[test]
    fn rotations_match_the_rotated_figure() {
        let g = ParityGroup::rotations(rdp(5));
        let rows: Vec<String> = g.arrangements().iter().map(|a| a.symbols(2)).collect();
        assert_eq!(rows, ["DDDDPQ", "QDDDDP", "PQDDDD", "DPQDDD", "DDPQDD", "DDDPQD"]);
    }

    #[test]
    fn rdp_k6_balanced() {
        let g = balance_horizontal_code(rdp(5));
        let report = g.verify(2).unwrap();
        assert!(report.balanced());
        assert_eq!(report.tau, vec![Some(96), Some(120)]);
        assert_eq!(g.tau(1).unwrap(), 96);
        assert_eq!(g.tau(2).unwrap(), 120);
        assert_eq!(report.parity_per_column, vec![40; 6]);
    }

    #[test]
    fn single_arrangement_fails_c3_and_c4() {
        let g = ParityGroup::single(rdp(5));
        let report = g.verify(2).unwrap();
        assert!(report.c1 && report.c2);
        assert!(!report.c3 && !report.c4);
        assert!(matches!(g.tau(1), Err(Error::UnbalancedGroup { s: 1 })));
    }

    #[test]
    fn rotations_pass_c4_fail_c3() {
        let g = ParityGroup::rotations(rdp(5));
        let report = g.verify(1).unwrap();
        assert!(report.c4);
        assert!(!report.c3);
        let lost0 = &report.failures[0];
        assert_eq!(lost0.lost, vec![0]);
        let rows = |c: usize| lost0.reads.iter().find(|r| r.0 == c).unwrap().1 / 4;
        assert_eq!(rows(1), 5);
        assert_eq!(rows(5), 4);
    }

    #[test]
    fn arrangement_counts_small_k() {
        let g = balance_horizontal_code(rdp(3));
        let c = g.arrangement_counts(0, 3).unwrap();
        assert_eq!((c.r_dq, c.r_pq, c.r_qp), (2, 1, 1));
        let g = balance_horizontal_code(HorizontalCode::reed_solomon(3, 2).unwrap());
        assert_eq!(g.extended_rows(), 6);
        let c = g.arrangement_counts(2, 1).unwrap();
        assert_eq!((c.r_dq, c.r_pq, c.r_qp), (1, 1, 1));
        let g3 = balance_horizontal_code(HorizontalCode::reed_solomon(5, 3).unwrap());
        assert!(g3.arrangement_counts(0, 1).is_err());
        assert!(g.arrangement_counts(1, 1).is_err());
    }

    #[test]
    fn verify_rejects_large_s() {
        let g = balance_horizontal_code(rdp(3));
        assert!(matches!(g.verify(3), Err(Error::Param(_))));
        assert!(matches!(g.tau(3), Err(Error::Param(_))));
    }

    #[test]
    fn custom_checks_labels() {
        use ColumnLabel::{Data as D, Parity as P};
        let code = rdp(3);
        assert!(ParityGroup::custom(code, vec![Arrangement(vec![D, P(1), D, P(2)])]).is_ok());
        assert!(ParityGroup::custom(code, vec![Arrangement(vec![D, P(1), D, P(1)])]).is_err());
        assert!(ParityGroup::custom(code, vec![]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec: GroupSpec = serde_json::from_str(r#"{"code":"rdp","p":3}"#).unwrap();
        assert_eq!(spec.family, GroupFamily::Balanced);
        let g = spec.build().unwrap();
        assert_eq!(g.spec().unwrap(), spec);
        assert_eq!(serde_json::to_string(&spec).unwrap(), r#"{"code":"rdp","p":3}"#);

        let spec: GroupSpec =
            serde_json::from_str(r#"{"code":"rs","k":5,"delta":2,"family":"single"}"#).unwrap();
        assert_eq!(spec.build().unwrap().extended_rows(), 1);
    }
}
