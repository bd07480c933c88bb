//! Systematic Reed–Solomon over GF(2^8).
//!
//! Parity `P_{i+1} = Σ_j c[i][j]·D_j` with a Cauchy matrix
//! `1/(x_i + y_j)`, `x_i = i`, `y_j = δ + j`, whose columns are rescaled so
//! the first row is all ones. Row and column scaling keeps every square
//! submatrix nonsingular, so any `δ` erasures decode, and `P₁` is the plain
//! XOR of the data.

use super::gf256;
use crate::{Error, Result};

pub fn check_params(k: usize, delta: usize) -> Result<()> {
    if !(2..=255).contains(&k) || delta == 0 || delta >= k {
        return Err(Error::Param(format!(
            "Reed-Solomon needs 2 <= k <= 255 and 1 <= delta < k, got k={k}, delta={delta}"
        )));
    }
    Ok(())
}

/// `δ × (k − δ)` parity coefficients.
pub fn parity_matrix(k: usize, delta: usize) -> Vec<Vec<u8>> {
    let data = k - delta;
    (0..delta)
        .map(|i| {
            (0..data)
                .map(|j| {
                    let y = (delta + j) as u8;
                    gf256::mul(gf256::inv(i as u8 ^ y), y)
                })
                .collect()
        })
        .collect()
}

/// Encodes `k − δ` data columns of equal length.
pub fn encode(k: usize, delta: usize, data: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    check_params(k, delta)?;
    if data.len() != k - delta {
        return Err(Error::Param(format!(
            "RS(k={k}, delta={delta}) takes {} data columns, got {}",
            k - delta,
            data.len()
        )));
    }
    let len = data[0].len();
    if data.iter().any(|c| c.len() != len) {
        return Err(Error::Param("data columns differ in length".into()));
    }
    let matrix = parity_matrix(k, delta);
    let mut columns = data.to_vec();
    for row in &matrix {
        let mut parity = vec![0u8; len];
        for (coef, col) in row.iter().zip(data) {
            gf256::mul_acc(&mut parity, col, *coef);
        }
        columns.push(parity);
    }
    Ok(columns)
}

pub(crate) fn reconstruct(
    k: usize,
    delta: usize,
    lost: &[usize],
    read: &[usize],
    mut fetch: impl FnMut(usize) -> Vec<u8>,
) -> Result<Vec<Vec<u8>>> {
    let data_cols = k - delta;
    let matrix = parity_matrix(k, delta);

    let mut columns: Vec<Option<Vec<u8>>> = vec![None; k];
    let mut len = None;
    for &c in read {
        let col = fetch(c);
        if *len.get_or_insert(col.len()) != col.len() {
            return Err(Error::Param("fetched columns differ in length".into()));
        }
        columns[c] = Some(col);
    }
    let len = len.ok_or_else(|| Error::Param("nothing to read".into()))?;

    let unknown: Vec<usize> = (0..data_cols).filter(|&j| columns[j].is_none()).collect();
    if !unknown.is_empty() {
        let parities: Vec<usize> = (0..delta)
            .filter(|&i| columns[data_cols + i].is_some())
            .take(unknown.len())
            .collect();
        if parities.len() < unknown.len() {
            return Err(Error::Param("not enough parity columns were read".into()));
        }
        // rhs_a = P_a + Σ_{known j} c[a][j]·D_j = Σ_{unknown j} c[a][j]·D_j
        let rhs: Vec<Vec<u8>> = parities
            .iter()
            .map(|&i| {
                let mut acc = columns[data_cols + i].clone().unwrap();
                for j in (0..data_cols).filter(|j| !unknown.contains(j)) {
                    gf256::mul_acc(&mut acc, columns[j].as_ref().unwrap(), matrix[i][j]);
                }
                acc
            })
            .collect();
        let system: Vec<Vec<u8>> = parities
            .iter()
            .map(|&i| unknown.iter().map(|&j| matrix[i][j]).collect())
            .collect();
        let inverse = gf256::invert(&system)
            .ok_or_else(|| Error::Param("singular decoding submatrix".into()))?;
        for (b, &j) in unknown.iter().enumerate() {
            let mut col = vec![0u8; len];
            for (a, r) in rhs.iter().enumerate() {
                gf256::mul_acc(&mut col, r, inverse[b][a]);
            }
            columns[j] = Some(col);
        }
    }

    lost.iter()
        .map(|&c| {
            if c < data_cols {
                Ok(columns[c].clone().unwrap())
            } else {
                let mut parity = vec![0u8; len];
                for (j, coef) in matrix[c - data_cols].iter().enumerate() {
                    gf256::mul_acc(&mut parity, columns[j].as_ref().unwrap(), *coef);
                }
                Ok(parity)
            }
        })
        .collect()
}
