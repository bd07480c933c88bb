//! Row-diagonal parity over a prime `p`.
//!
//! A codeword has `p − 1` rows and `p + 1` columns: data in columns
//! `0 … p−2`, row parity in column `p−1`, diagonal parity in column `p`.
//! Diagonal `d` collects the entries `(i, j)` of columns `0 … p−1` with
//! `(i + j) mod p = d`; diagonal `p − 1` is the missing one and has no
//! parity entry, so `Q[d]` is stored at row `d` for `d < p − 1`.

use crate::{Error, Result};

pub fn check_prime(p: usize) -> Result<()> {
    let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
    if !prime || p < 3 {
        return Err(Error::Param(format!("RDP needs an odd prime p >= 3, got {p}")));
    }
    Ok(())
}

fn diagonal_parity(p: usize, core: &[Vec<u8>]) -> Vec<u8> {
    let mut q = vec![0u8; p - 1];
    for (j, col) in core.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            let d = (i + j) % p;
            if d != p - 1 {
                q[d] ^= v;
            }
        }
    }
    q
}

/// Encodes `p − 1` data columns of `p − 1` symbols each.
pub fn encode(p: usize, data: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    check_prime(p)?;
    let rows = p - 1;
    if data.len() != p - 1 || data.iter().any(|c| c.len() != rows) {
        return Err(Error::Param(format!(
            "RDP(p={p}) takes {} data columns of {rows} symbols",
            p - 1
        )));
    }
    let mut columns = data.to_vec();
    let row_parity = (0..rows)
        .map(|i| data.iter().fold(0u8, |acc, c| acc ^ c[i]))
        .collect();
    columns.push(row_parity);
    let q = diagonal_parity(p, &columns);
    columns.push(q);
    Ok(columns)
}

/// Rebuilds `lost` columns from the columns in `read`, which must follow
/// the reconstruction rule. Unknown entries of columns `0 … p−1` are peeled
/// off one at a time using any row with a single unknown (row parity) or,
/// when `Q` was read, any diagonal with a single unknown.
pub(crate) fn reconstruct(
    p: usize,
    lost: &[usize],
    read: &[usize],
    mut fetch: impl FnMut(usize) -> Vec<u8>,
) -> Result<Vec<Vec<u8>>> {
    let rows = p - 1;
    let mut core: Vec<Vec<Option<u8>>> = vec![vec![None; rows]; p];
    let mut q: Option<Vec<u8>> = None;
    for &c in read {
        let col = fetch(c);
        if col.len() != rows {
            return Err(Error::Param(format!(
                "column {c} has {} symbols, expected {rows}",
                col.len()
            )));
        }
        if c == p {
            q = Some(col);
        } else {
            core[c] = col.into_iter().map(Some).collect();
        }
    }

    loop {
        let mut progress = false;
        for i in 0..rows {
            let unknown: Vec<usize> = (0..p).filter(|&j| core[j][i].is_none()).collect();
            if let [j] = unknown[..] {
                let v = (0..p).filter(|&c| c != j).fold(0u8, |acc, c| acc ^ core[c][i].unwrap());
                core[j][i] = Some(v);
                progress = true;
            }
        }
        if let Some(q) = &q {
            for (d, &qd) in q.iter().enumerate() {
                let cells: Vec<(usize, usize)> = (0..p)
                    .map(|j| ((d + p - j) % p, j))
                    .filter(|&(i, _)| i < rows)
                    .collect();
                let unknown: Vec<(usize, usize)> =
                    cells.iter().copied().filter(|&(i, j)| core[j][i].is_none()).collect();
                if let [(ui, uj)] = unknown[..] {
                    let v = cells
                        .iter()
                        .filter(|&&cell| cell != (ui, uj))
                        .fold(qd, |acc, &(i, j)| acc ^ core[j][i].unwrap());
                    core[uj][ui] = Some(v);
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }

    let solved: Vec<Option<Vec<u8>>> = core
        .iter()
        .map(|col| col.iter().copied().collect::<Option<Vec<u8>>>())
        .collect();
    let mut out = Vec::with_capacity(lost.len());
    for &c in lost {
        if c == p {
            let full: Option<Vec<Vec<u8>>> = solved.iter().cloned().collect();
            let full = full.ok_or_else(|| Error::Param("RDP peeling left unknown entries".into()))?;
            out.push(diagonal_parity(p, &full));
        } else {
            let col = solved[c]
                .clone()
                .ok_or_else(|| Error::Param(format!("RDP peeling could not rebuild column {c}")))?;
            out.push(col);
        }
    }
    Ok(out)
}
