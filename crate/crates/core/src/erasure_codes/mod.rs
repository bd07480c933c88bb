//! Systematic horizontal MDS codes and their table-driven reconstruction rule.
//!
//! A codeword is column-major: `k` columns of equal length, the first
//! `k − δ` holding data and the last `δ` holding parities `P₁ … P_δ`.
//! For `δ = 2`, `P₁` is the row parity `P` and `P₂` is the second parity `Q`.

pub mod gf256;
pub mod rdp;
pub mod rs;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Role of a column inside a codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColumnLabel {
    Data,
    /// Parity column, indexed from 1.
    Parity(usize),
}

impl ColumnLabel {
    pub fn is_parity(self) -> bool {
        matches!(self, ColumnLabel::Parity(_))
    }

    /// Short symbol for tables: `D`, and `P`/`Q` when `δ = 2`, `P` when
    /// `δ = 1`, `P1 … Pδ` otherwise.
    pub fn symbol(self, delta: usize) -> String {
        match (self, delta) {
            (ColumnLabel::Data, _) => "D".into(),
            (ColumnLabel::Parity(_), 1) => "P".into(),
            (ColumnLabel::Parity(1), 2) => "P".into(),
            (ColumnLabel::Parity(2), 2) => "Q".into(),
            (ColumnLabel::Parity(i), _) => format!("P{i}"),
        }
    }
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnLabel::Data => f.write_str("D"),
            ColumnLabel::Parity(i) => write!(f, "P{i}"),
        }
    }
}

/// Which labels must be read in full to rebuild `lost`.
///
/// With `d` lost data columns the answer is every surviving data column plus
/// the `d` lowest-indexed surviving parities. Lost parities are recomputed
/// from the data. `Data` is always part of the answer; when no data column
/// survives it simply selects nothing.
///
/// | lost | read      |
/// |------|-----------|
/// | D    | D, P      |
/// | P    | D         |
/// | Q    | D         |
pub fn reconstruction_rule(delta: usize, lost: &[ColumnLabel]) -> Result<BTreeSet<ColumnLabel>> {
    if lost.len() > delta {
        return Err(Error::Param(format!(
            "{} lost columns exceed the {delta} the code tolerates",
            lost.len()
        )));
    }
    let mut lost_parities = BTreeSet::new();
    let mut lost_data = 0;
    for &label in lost {
        match label {
            ColumnLabel::Data => lost_data += 1,
            ColumnLabel::Parity(i) if (1..=delta).contains(&i) => {
                if !lost_parities.insert(i) {
                    return Err(Error::Param(format!("parity P{i} lost twice")));
                }
            }
            ColumnLabel::Parity(i) => {
                return Err(Error::Param(format!("no parity P{i} when delta = {delta}")))
            }
        }
    }
    let mut read = BTreeSet::from([ColumnLabel::Data]);
    read.extend(
        (1..=delta)
            .filter(|i| !lost_parities.contains(i))
            .take(lost_data)
            .map(ColumnLabel::Parity),
    );
    Ok(read)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeKind {
    /// Row-diagonal parity over a prime `p`: `k = p + 1`, `δ = 2`, `p − 1` rows.
    Rdp,
    /// Reed–Solomon over GF(2^8), one row per codeword.
    ReedSolomon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HorizontalCode {
    kind: CodeKind,
    k: usize,
    delta: usize,
    rows: usize,
}

/// A decoded codeword plus the columns the decoder fetched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub codeword: Vec<Vec<u8>>,
    pub read: Vec<usize>,
}

impl HorizontalCode {
    pub fn rdp(p: usize) -> Result<Self> {
        rdp::check_prime(p)?;
        Ok(HorizontalCode {
            kind: CodeKind::Rdp,
            k: p + 1,
            delta: 2,
            rows: p - 1,
        })
    }

    pub fn reed_solomon(k: usize, delta: usize) -> Result<Self> {
        rs::check_params(k, delta)?;
        Ok(HorizontalCode {
            kind: CodeKind::ReedSolomon,
            k,
            delta,
            rows: 1,
        })
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    /// Column count.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Parity column count, equal to the number of erasures tolerated.
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Symbols per column in one codeword.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn data_columns(&self) -> usize {
        self.k - self.delta
    }

    pub fn label(&self, column: usize) -> ColumnLabel {
        assert!(column < self.k);
        let data = self.data_columns();
        if column < data {
            ColumnLabel::Data
        } else {
            ColumnLabel::Parity(column - data + 1)
        }
    }

    /// `D … D P₁ … P_δ`.
    pub fn labels(&self) -> Vec<ColumnLabel> {
        (0..self.k).map(|c| self.label(c)).collect()
    }

    pub fn encode(&self, data: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
        match self.kind {
            CodeKind::Rdp => rdp::encode(self.k - 1, data),
            CodeKind::ReedSolomon => rs::encode(self.k, self.delta, data),
        }
    }

    /// Canonical column indices the reconstruction rule reads when the
    /// columns in `lost` are gone.
    pub fn columns_to_read(&self, lost: &[usize]) -> Result<Vec<usize>> {
        if lost.len() > self.delta {
            return Err(Error::TooManyErasures {
                erased: lost.len(),
                max: self.delta,
            });
        }
        if let Some(&c) = lost.iter().find(|&&c| c >= self.k) {
            return Err(Error::Param(format!("column {c} out of range 0..{}", self.k)));
        }
        let lost_labels: Vec<ColumnLabel> = lost.iter().map(|&c| self.label(c)).collect();
        let rule = reconstruction_rule(self.delta, &lost_labels)?;
        Ok((0..self.k)
            .filter(|c| !lost.contains(c) && rule.contains(&self.label(*c)))
            .collect())
    }

    /// Rebuilds the `lost` columns, pulling surviving columns through
    /// `fetch`. Only the columns named by [`Self::columns_to_read`] are
    /// fetched. Returns the rebuilt columns in the order of `lost`.
    pub fn reconstruct(
        &self,
        lost: &[usize],
        fetch: impl FnMut(usize) -> Vec<u8>,
    ) -> Result<Vec<Vec<u8>>> {
        let read = self.columns_to_read(lost)?;
        match self.kind {
            CodeKind::Rdp => rdp::reconstruct(self.k - 1, lost, &read, fetch),
            CodeKind::ReedSolomon => rs::reconstruct(self.k, self.delta, lost, &read, fetch),
        }
    }

    /// Fills in the `None` columns of a codeword.
    pub fn decode(&self, columns: &[Option<Vec<u8>>]) -> Result<Decoded> {
        if columns.len() != self.k {
            return Err(Error::Param(format!(
                "expected {} columns, got {}",
                self.k,
                columns.len()
            )));
        }
        let lost: Vec<usize> = (0..self.k).filter(|&c| columns[c].is_none()).collect();
        let mut read = Vec::new();
        let rebuilt = self.reconstruct(&lost, |c| {
            read.push(c);
            columns[c].clone().expect("decoder only fetches surviving columns")
        })?;
        let mut codeword: Vec<Vec<u8>> = columns.iter().map(|c| c.clone().unwrap_or_default()).collect();
        for (c, col) in lost.into_iter().zip(rebuilt) {
            codeword[c] = col;
        }
        read.sort_unstable();
        Ok(Decoded { codeword, read })
    }
}

impl fmt::Display for HorizontalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CodeKind::Rdp => write!(f, "RDP(p={})", self.k - 1),
            CodeKind::ReedSolomon => write!(f, "RS(k={}, delta={})", self.k, self.delta),
        }
    }
}
