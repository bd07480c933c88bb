//! Byte-level simulation: fill a layout with data, encode every group
//! instance, fail disks, decode onto replacement disks and count I/O.
//!
//! Units are single bytes. Data bytes come from ChaCha8 seeded with
//! `seed_from_u64(seed)`, drawn instance by instance, extended row by
//! extended row, canonical data column by column, top row first.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::analysis::{check_failure_set, failure_sets, reconstruction_workload};
use crate::erasure_codes::ColumnLabel;
use crate::layout::DeclusteredLayout;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fill {
    Seeded(u64),
    Zero,
}

/// Where a unit on a disk comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub instance: usize,
    pub extended_row: usize,
    pub row: usize,
    pub column: usize,
    pub label: ColumnLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiskArray<'a> {
    layout: &'a DeclusteredLayout,
    disks: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct IoStats {
    pub reads: Vec<u64>,
    pub writes: Vec<u64>,
}

/// Fills and encodes every group instance of `layout`.
pub fn materialize(layout: &DeclusteredLayout, fill: Fill) -> DiskArray<'_> {
    let group = layout.group();
    let code = group.code();
    let rows = code.rows();
    let mut rng = match fill {
        Fill::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Fill::Zero => None,
    };
    let mut array = DiskArray {
        layout,
        disks: vec![vec![0u8; layout.rows_per_disk()]; layout.n()],
    };
    for instance in 0..layout.instances() {
        for e in 0..group.extended_rows() {
            let data: Vec<Vec<u8>> = (0..code.data_columns())
                .map(|_| {
                    let mut col = vec![0u8; rows];
                    if let Some(rng) = rng.as_mut() {
                        rng.fill_bytes(&mut col);
                    }
                    col
                })
                .collect();
            let codeword = code.encode(&data).expect("data matches the code shape");
            for c in 0..group.k() {
                let (disk, start) = array.entry(instance, e, c);
                array.disks[disk][start..start + rows]
                    .copy_from_slice(&codeword[group.canonical_column(e, c)]);
            }
        }
    }
    array
}

impl<'a> DiskArray<'a> {
    pub fn layout(&self) -> &'a DeclusteredLayout {
        self.layout
    }

    pub fn disks(&self) -> &[Vec<u8>] {
        &self.disks
    }

    pub fn disk(&self, x: usize) -> &[u8] {
        &self.disks[x]
    }

    /// Disk and offset of the first entry of group column `c` in extended
    /// row `e` of `instance`.
    fn entry(&self, instance: usize, e: usize, c: usize) -> (usize, usize) {
        let (disk, start) = self.layout.locate(instance, c);
        (disk, start + e * self.layout.group().rows_per_extended_row())
    }

    fn column(&self, instance: usize, e: usize, c: usize) -> &[u8] {
        let (disk, start) = self.entry(instance, e, c);
        &self.disks[disk][start..start + self.layout.group().rows_per_extended_row()]
    }

    /// Canonical codeword stored in extended row `e` of `instance`.
    fn codeword(&self, instance: usize, e: usize) -> Vec<Vec<u8>> {
        let group = self.layout.group();
        let mut cw = vec![Vec::new(); group.k()];
        for c in 0..group.k() {
            cw[group.canonical_column(e, c)] = self.column(instance, e, c).to_vec();
        }
        cw
    }

    /// Checks every parity unit against its group's data units.
    pub fn verify_parity(&self) -> Result<()> {
        let group = self.layout.group();
        let code = group.code();
        for instance in 0..self.layout.instances() {
            for e in 0..group.extended_rows() {
                let cw = self.codeword(instance, e);
                let expected = code.encode(&cw[..code.data_columns()])?;
                if expected != cw {
                    return Err(Error::Invariant(format!(
                        "parity mismatch in instance {instance}, extended row {e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn provenance(&self, disk: usize, offset: usize) -> Provenance {
        let group = self.layout.group();
        let m = group.m();
        let rows = group.rows_per_extended_row();
        let (instance, column) = self.layout.disk_units(disk)[offset / m];
        let within = offset % m;
        let extended_row = within / rows;
        Provenance {
            instance,
            extended_row,
            row: within % rows,
            column,
            label: group.code().label(group.canonical_column(extended_row, column)),
        }
    }

    /// One line per unit: offset, byte, instance, extended row, row, label.
    pub fn hex_dump(&self, disk: usize) -> String {
        let delta = self.layout.group().delta();
        let mut out = format!("disk {disk}\n");
        for (offset, byte) in self.disks[disk].iter().enumerate() {
            let p = self.provenance(disk, offset);
            let _ = writeln!(
                out,
                "{offset:06x}  {byte:02x}  G{} e{} r{} {}",
                p.instance,
                p.extended_row,
                p.row,
                p.label.symbol(delta)
            );
        }
        out
    }
}

/// Fails the disks in `failed`, rebuilds their contents onto blank
/// replacements and reports the units read from and written to each disk.
pub fn fail_and_reconstruct<'a>(array: &DiskArray<'a>, failed: &[usize]) -> Result<(DiskArray<'a>, IoStats)> {
    let layout = array.layout;
    let group = layout.group();
    let code = group.code();
    let rows = group.rows_per_extended_row();
    let failed = check_failure_set(layout.n(), group.delta(), failed)?;

    let mut recovered = array.clone();
    for &x in &failed {
        recovered.disks[x].fill(0);
    }
    let mut stats = IoStats {
        reads: vec![0; layout.n()],
        writes: vec![0; layout.n()],
    };
    for (instance, placement) in layout.placements().iter().enumerate() {
        let lost: Vec<usize> = (0..group.k())
            .filter(|&c| failed.contains(&placement[c]))
            .collect();
        if lost.is_empty() {
            continue;
        }
        for e in 0..group.extended_rows() {
            let lost_canonical: Vec<usize> = lost.iter().map(|&c| group.canonical_column(e, c)).collect();
            let rebuilt = code.reconstruct(&lost_canonical, |cc| {
                let c = (0..group.k())
                    .find(|&c| group.canonical_column(e, c) == cc)
                    .expect("canonical column is placed");
                let (disk, start) = array.entry(instance, e, c);
                debug_assert!(!failed.contains(&disk));
                stats.reads[disk] += rows as u64;
                array.disks[disk][start..start + rows].to_vec()
            })?;
            for (&c, col) in lost.iter().zip(rebuilt) {
                let (disk, start) = array.entry(instance, e, c);
                recovered.disks[disk][start..start + rows].copy_from_slice(&col);
                stats.writes[disk] += rows as u64;
            }
        }
    }
    Ok((recovered, stats))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetOutcome {
    pub failed: Vec<usize>,
    pub recovered: bool,
    /// Measured reads equal the enumerated workload.
    pub matches_prediction: bool,
    pub reads: Vec<u64>,
    pub min: u64,
    pub max: u64,
}

impl SetOutcome {
    pub fn passed(&self) -> bool {
        self.recovered && self.matches_prediction
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub s: usize,
    pub total: usize,
    pub passed: usize,
    pub min_reads: u64,
    pub max_reads: u64,
    pub uniform: bool,
    pub sets: Vec<SetOutcome>,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn headline(&self) -> String {
        let reads = if self.uniform {
            format!("uniform reads {}/disk", self.min_reads)
        } else {
            format!("reads {}..{}/disk", self.min_reads, self.max_reads)
        };
        format!("{}/{} recovered, {reads}", self.passed, self.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub fill: Fill,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            fill: Fill::Seeded(0),
            jobs: None,
        }
    }
}

fn run_set(array: &DiskArray<'_>, failed: &[usize]) -> Result<SetOutcome> {
    let (recovered, stats) = fail_and_reconstruct(array, failed)?;
    let predicted = reconstruction_workload(array.layout, failed)?;
    let survivors: Vec<u64> = stats
        .reads
        .iter()
        .enumerate()
        .filter(|(x, _)| !failed.contains(x))
        .map(|(_, &r)| r)
        .collect();
    Ok(SetOutcome {
        failed: failed.to_vec(),
        recovered: recovered.disks == array.disks,
        matches_prediction: stats.reads == predicted.reads,
        min: survivors.iter().copied().min().unwrap_or(0),
        max: survivors.iter().copied().max().unwrap_or(0),
        reads: stats.reads,
    })
}

#[cfg(feature = "parallel")]
fn run_all(array: &DiskArray<'_>, sets: &[Vec<usize>], jobs: Option<usize>) -> Result<Vec<SetOutcome>> {
    use rayon::prelude::*;
    let sweep = || sets.par_iter().map(|f| run_set(array, f)).collect();
    match jobs {
        Some(1) => sets.iter().map(|f| run_set(array, f)).collect(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Param(format!("thread pool: {e}")))?
            .install(sweep),
        None => sweep(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all(array: &DiskArray<'_>, sets: &[Vec<usize>], _jobs: Option<usize>) -> Result<Vec<SetOutcome>> {
    sets.iter().map(|f| run_set(array, f)).collect()
}

/// Runs [`fail_and_reconstruct`] for every `s`-subset of disks, in
/// lexicographic order of failure sets.
pub fn exhaustive_verify(layout: &DeclusteredLayout, s: usize, options: SweepOptions) -> Result<SweepSummary> {
    let delta = layout.group().delta();
    if s > delta {
        return Err(Error::TooManyFailures { failed: s, max: delta });
    }
    let array = materialize(layout, options.fill);
    let sets = failure_sets(layout.n(), s);
    let outcomes = run_all(&array, &sets, options.jobs)?;
    let min_reads = outcomes.iter().map(|o| o.min).min().unwrap_or(0);
    let max_reads = outcomes.iter().map(|o| o.max).max().unwrap_or(0);
    Ok(SweepSummary {
        s,
        total: outcomes.len(),
        passed: outcomes.iter().filter(|o| o.passed()).count(),
        min_reads,
        max_reads,
        uniform: min_reads == max_reads,
        sets: outcomes,
    })
}
