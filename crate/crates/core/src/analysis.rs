//! Rebuild workload per surviving disk: exhaustive counts over a layout,
//! closed forms for 3-designs with two-parity groups, and the storage /
//! workload trade-off table.

use std::collections::HashMap;
use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;

use crate::designs::{count_lambda, Design, DesignParams};
use crate::erasure_codes::ColumnLabel;
use crate::layout::{build_layout, ser_ratio, DeclusteredLayout};
use crate::parity_groups::ParityGroup;
use crate::{Error, Ratio, Result};

/// Units each disk reads to rebuild a failure set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorkloadReport {
    pub failed: Vec<usize>,
    /// Units read per disk; failed disks read nothing.
    pub reads: Vec<u64>,
    /// Column-units per disk with at least one unit read.
    pub column_units_accessed: Vec<u64>,
    pub rows_per_disk: usize,
    pub uniform: bool,
    /// Closed-form count for 3-designs with a balanced two-parity group.
    pub closed_form: Option<u64>,
    /// Share of each surviving disk that is read, when uniform.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub fraction: Option<Ratio>,
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<Ratio>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl WorkloadReport {
    pub fn surviving(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.reads
            .iter()
            .copied()
            .enumerate()
            .filter(|(x, _)| !self.failed.contains(x))
    }

    pub fn min_max(&self) -> Option<(u64, u64)> {
        self.surviving().map(|(_, r)| r).minmax().into_option()
    }
}

pub(crate) fn check_failure_set(n: usize, delta: usize, failed: &[usize]) -> Result<Vec<usize>> {
    let mut f = failed.to_vec();
    f.sort_unstable();
    f.dedup();
    if f.len() != failed.len() {
        return Err(Error::Param(format!("failure set {failed:?} repeats a disk")));
    }
    if let Some(&x) = f.iter().find(|&&x| x >= n) {
        return Err(Error::Param(format!("disk {x} outside 0..{n}")));
    }
    if f.len() > delta {
        return Err(Error::TooManyFailures {
            failed: f.len(),
            max: delta,
        });
    }
    Ok(f)
}

/// Counts, for every disk, the units rebuilt groups read from it. Each
/// instance that lost columns applies the reconstruction rule to every one
/// of its extended rows.
pub fn reconstruction_workload(layout: &DeclusteredLayout, failed: &[usize]) -> Result<WorkloadReport> {
    let group = layout.group();
    let failed = check_failure_set(layout.n(), group.delta(), failed)?;
    let mut reads = vec![0u64; layout.n()];
    let mut accessed = vec![0u64; layout.n()];
    let mut cache: HashMap<Vec<usize>, Vec<u64>> = HashMap::new();
    for placement in layout.placements() {
        let lost: Vec<usize> = (0..group.k())
            .filter(|&c| failed.contains(&placement[c]))
            .collect();
        if lost.is_empty() {
            continue;
        }
        let counts = match cache.get(&lost) {
            Some(c) => c,
            None => {
                let c = group.read_counts(&lost)?;
                cache.entry(lost.clone()).or_insert(c)
            }
        };
        for (c, &disk) in placement.iter().enumerate() {
            if counts[c] > 0 {
                reads[disk] += counts[c];
                accessed[disk] += 1;
            }
        }
    }

    let rows = layout.rows_per_disk();
    let uniform = reads
        .iter()
        .enumerate()
        .filter(|(x, _)| !failed.contains(x))
        .map(|(_, r)| r)
        .all_equal();
    let fraction = if uniform {
        (0..layout.n())
            .find(|x| !failed.contains(x))
            .map(|x| Ratio::new(reads[x] as u128, rows as u128))
    } else {
        None
    };
    let closed_form = if failed.is_empty() || layout.rotated() > 0 {
        None
    } else {
        closed_form_workload(layout.design().params(), group, failed.len()).ok()
    };
    Ok(WorkloadReport {
        failed,
        reads,
        column_units_accessed: accessed,
        rows_per_disk: rows,
        uniform,
        closed_form,
        fraction,
    })
}

/// Every failure set of size `s`, in lexicographic order.
pub fn failure_sets(n: usize, s: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(s).collect()
}

/// Units read from each surviving disk for `s` failed disks of a layout
/// built from a 3-design and a balanced two-parity group:
/// `λ₂·τ₁` for one failure and `λ·τ₂ + 2·λ₂⁽¹⁾·τ₁` for two.
pub fn closed_form_workload(params: DesignParams, group: &ParityGroup, s: usize) -> Result<u64> {
    if params.t != 3 || group.delta() != 2 {
        return Err(Error::Param(format!(
            "closed forms cover 3-designs with two parities, got t = {}, delta = {}",
            params.t,
            group.delta()
        )));
    }
    match s {
        1 => Ok(count_lambda(params, 2, 0)? * group.tau(1)?),
        2 => {
            let lambda_2_1 = count_lambda(params, 2, 1)?;
            Ok(params.lambda * group.tau(2)? + 2 * lambda_2_1 * group.tau(1)?)
        }
        _ => Err(Error::Param(format!("closed forms cover one or two failures, got {s}"))),
    }
}

/// Share of a surviving disk read for one failure, `(k−2)/(n−1)`.
pub fn one_failure_fraction(n: usize, k: usize) -> Ratio {
    Ratio::new((k - 2) as u128, (n - 1) as u128)
}

/// Share of a surviving disk read for two failures,
/// `(k−2)(2n−k−1)/((n−1)(n−2))`.
pub fn two_failure_fraction(n: usize, k: usize) -> Ratio {
    Ratio::new(
        ((k - 2) * (2 * n - k - 1)) as u128,
        ((n - 1) * (n - 2)) as u128,
    )
}

/// Index column of the `n = 20` trade-off table: smallest known `λ` of a
/// 3-`(20,k,λ)` design for each `k`, taken as given.
pub const N20_LAMBDAS: [(usize, u64); 18] = [
    (3, 1),
    (4, 1),
    (5, 6),
    (6, 10),
    (7, 35),
    (8, 14),
    (9, 28),
    (10, 4),
    (11, 55),
    (12, 55),
    (13, 286),
    (14, 182),
    (15, 273),
    (16, 140),
    (17, 680),
    (18, 136),
    (19, 17),
    (20, 1),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TradeoffRow {
    pub k: usize,
    pub lambda: u64,
    /// Share of each surviving disk read for one failure.
    #[serde(serialize_with = "ser_ratio")]
    pub pct_one: Ratio,
    #[serde(serialize_with = "ser_ratio")]
    pub pct_two: Ratio,
    #[serde(serialize_with = "ser_ratio")]
    pub parity_disks: Ratio,
    /// `M/m = λ(n−1)(n−2)/((k−1)(k−2))`.
    #[serde(serialize_with = "ser_ratio")]
    pub depth_over_m: Ratio,
}

pub fn tradeoff_table(n: usize, rows: &[(usize, u64)]) -> Result<Vec<TradeoffRow>> {
    rows.iter()
        .map(|&(k, lambda)| {
            if !(3..=n).contains(&k) {
                return Err(Error::Param(format!("need 3 <= k <= n = {n}, got k = {k}")));
            }
            if lambda == 0 {
                return Err(Error::Param("lambda must be at least 1".into()));
            }
            Ok(TradeoffRow {
                k,
                lambda,
                pct_one: one_failure_fraction(n, k),
                pct_two: two_failure_fraction(n, k),
                parity_disks: Ratio::new(2 * n as u128, k as u128),
                depth_over_m: Ratio::new(
                    lambda as u128 * ((n - 1) * (n - 2)) as u128,
                    ((k - 1) * (k - 2)) as u128,
                ),
            })
        })
        .collect()
}

/// Rounds half up to `decimals` places and prints the result.
pub fn round_half_up(value: Ratio, decimals: u32) -> String {
    let scale = 10u128.pow(decimals);
    let scaled = value * Ratio::from_integer(scale);
    let r = (scaled + Ratio::new(1, 2)).floor().to_integer();
    if decimals == 0 {
        return r.to_string();
    }
    format!("{}.{:0width$}", r / scale, r % scale, width = decimals as usize)
}

fn depth_display(r: Ratio) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        r.to_string()
    }
}

impl TradeoffRow {
    pub fn pct_one_display(&self) -> String {
        round_half_up(self.pct_one * Ratio::from_integer(100), 1)
    }

    pub fn pct_two_display(&self) -> String {
        round_half_up(self.pct_two * Ratio::from_integer(100), 1)
    }

    pub fn parity_display(&self) -> String {
        round_half_up(self.parity_disks, 1)
    }

    pub fn depth_display(&self) -> String {
        depth_display(self.depth_over_m)
    }
}

pub const TRADEOFF_CSV_HEADER: &str = "k,lambda,pct_one_failure,pct_two_failures,parity_disks,depth_over_m";

pub fn tradeoff_csv(rows: &[TradeoffRow]) -> String {
    let mut out = String::from(TRADEOFF_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            r.lambda,
            r.pct_one_display(),
            r.pct_two_display(),
            r.parity_display(),
            r.depth_display()
        );
    }
    out
}

pub fn tradeoff_json(rows: &[TradeoffRow]) -> String {
    let items: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let num = |s: String| -> serde_json::Value {
                serde_json::from_str(&s).unwrap_or(serde_json::Value::String(s))
            };
            serde_json::json!({
                "k": r.k,
                "lambda": r.lambda,
                "pct_one_failure": num(r.pct_one_display()),
                "pct_two_failures": num(r.pct_two_display()),
                "parity_disks": num(r.parity_display()),
                "depth_over_m": num(r.depth_display()),
            })
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("rows serialize")
}

pub fn tradeoff_text(n: usize, rows: &[TradeoffRow]) -> String {
    let mut out = format!("n = {n}\n");
    let _ = writeln!(
        out,
        "{:>4} {:>7} {:>10} {:>11} {:>7} {:>9}",
        "k", "lambda", "1 failure", "2 failures", "parity", "depth/m"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>4} {:>7} {:>9}% {:>10}% {:>7} {:>9}",
            r.k,
            r.lambda,
            r.pct_one_display(),
            r.pct_two_display(),
            r.parity_display(),
            r.depth_display()
        );
    }
    out
}

/// One column-unit in the access table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccessCell {
    pub column: usize,
    /// Set when the group has a single arrangement, so a column has one role.
    pub label: Option<ColumnLabel>,
    pub failed: bool,
    pub units_read: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccessRow {
    pub instance: usize,
    /// Indexed by disk; `None` where the instance has no column-unit.
    pub cells: Vec<Option<AccessCell>>,
}

/// Per-instance, per-disk view of which column-units a failure set touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccessTable {
    pub delta: usize,
    pub failed: Vec<usize>,
    pub rows: Vec<AccessRow>,
    pub column_units_accessed: Vec<u64>,
    pub units_read: Vec<u64>,
    pub uniform: bool,
}

/// Builds the layout for `group` on `design` and tabulates, for each group
/// instance and disk, the column-unit held and how much of it is read when
/// `failed` is rebuilt.
pub fn counterexample_report(group: &ParityGroup, design: &Design, failed: &[usize]) -> Result<AccessTable> {
    let layout = build_layout(group, design)?;
    access_table(&layout, failed)
}

pub fn access_table(layout: &DeclusteredLayout, failed: &[usize]) -> Result<AccessTable> {
    let group = layout.group();
    let report = reconstruction_workload(layout, failed)?;
    let single = group.extended_rows() == 1;
    let rows = layout
        .placements()
        .iter()
        .enumerate()
        .map(|(i, placement)| {
            let lost: Vec<usize> = (0..group.k())
                .filter(|&c| report.failed.contains(&placement[c]))
                .collect();
            let counts = group.read_counts(&lost)?;
            let mut cells = vec![None; layout.n()];
            for (c, &disk) in placement.iter().enumerate() {
                cells[disk] = Some(AccessCell {
                    column: c,
                    label: single.then(|| group.arrangements()[0].labels()[c]),
                    failed: lost.contains(&c),
                    units_read: counts[c],
                });
            }
            Ok(AccessRow { instance: i, cells })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccessTable {
        delta: group.delta(),
        failed: report.failed.clone(),
        rows,
        column_units_accessed: report.column_units_accessed.clone(),
        units_read: report.reads.clone(),
        uniform: report.uniform,
    })
}

impl AccessTable {
    /// Text table restricted to `disks`. Read column-units are starred,
    /// `X` marks disks the instance does not touch.
    pub fn render(&self, disks: &[usize]) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "group");
        for d in disks {
            let _ = write!(out, "{:>8}", format!("disk {d}"));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<10}", format!("G{}", row.instance));
            for &d in disks {
                let cell = match &row.cells[d] {
                    None => "X".to_string(),
                    Some(c) => {
                        let name = c
                            .label
                            .map(|l| l.symbol(self.delta))
                            .unwrap_or_else(|| format!("c{}", c.column));
                        if !c.failed && c.units_read > 0 {
                            format!("*{name}")
                        } else {
                            name
                        }
                    }
                };
                let _ = write!(out, "{cell:>8}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<10}", "accessed");
        for &d in disks {
            let _ = write!(out, "{:>8}", self.column_units_accessed[d]);
        }
        out.push('\n');
        let _ = write!(out, "{:<10}", "units");
        for &d in disks {
            let _ = write!(out, "{:>8}", self.units_read[d]);
        }
        out.push('\n');
        out
    }
}
