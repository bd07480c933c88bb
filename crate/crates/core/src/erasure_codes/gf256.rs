//! GF(2^8) arithmetic over the polynomial x⁸+x⁴+x³+x²+1 (0x11D).

pub const POLY: u16 = 0x11d;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= POLY;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build_tables();

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
}

/// Multiplicative inverse. Panics on zero.
#[inline]
pub fn inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no inverse in GF(256)");
    TABLES.exp[255 - TABLES.log[a as usize] as usize]
}

#[inline]
pub fn div(a: u8, b: u8) -> u8 {
    mul(a, inv(b))
}

/// Carry-less shift-and-add multiplication, reduced modulo [`POLY`].
pub fn mul_carryless(a: u8, b: u8) -> u8 {
    let mut acc: u16 = 0;
    let (a, mut b) = (a as u16, b);
    let mut shifted = a;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= shifted;
        }
        shifted <<= 1;
        if shifted & 0x100 != 0 {
            shifted ^= POLY;
        }
        b >>= 1;
    }
    acc as u8
}

/// `dst ^= c · src`, symbol by symbol.
pub fn mul_acc(dst: &mut [u8], src: &[u8], c: u8) {
    match c {
        0 => {}
        1 => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s),
        _ => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= mul(*s, c)),
    }
}

/// Inverts a square matrix by Gauss-Jordan elimination. `None` if singular.
pub fn invert(matrix: &[Vec<u8>]) -> Option<Vec<Vec<u8>>> {
    let n = matrix.len();
    let mut a: Vec<Vec<u8>> = matrix.to_vec();
    let mut out: Vec<Vec<u8>> = (0..n)
        .map(|i| (0..n).map(|j| u8::from(i == j)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, pivot);
        out.swap(col, pivot);
        let scale = inv(a[col][col]);
        for j in 0..n {
            a[col][j] = mul(a[col][j], scale);
            out[col][j] = mul(out[col][j], scale);
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] ^= mul(f, a[col][j]);
                    out[r][j] ^= mul(f, out[col][j]);
                }
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_agree_with_carryless_product() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(mul(a, b), mul_carryless(a, b), "{a} * {b}");
            }
        }
    }

    #[test]
    fn inverses() {
        for a in 1..=255u8 {
            assert_eq!(mul(a, inv(a)), 1);
            assert_eq!(div(a, a), 1);
        }
    }

    #[test]
    fn generator_has_full_order() {
        // x = 2 generates the multiplicative group under 0x11D
        let mut seen = [false; 256];
        let mut x = 1u8;
        for _ in 0..255 {
            assert!(!seen[x as usize]);
            seen[x as usize] = true;
            x = mul_carryless(x, 2);
        }
        assert_eq!(x, 1);
    }

    #[test]
    fn invert_round_trip() {
        let m = vec![vec![1, 1, 1], vec![1, 2, 4], vec![1, 3, 5]];
        let inv_m = invert(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v = (0..3).fold(0u8, |acc, l| acc ^ mul(m[i][l], inv_m[l][j]));
                assert_eq!(v, u8::from(i == j));
            }
        }
        assert!(invert(&[vec![1, 1], vec![1, 1]]).is_none());
    }
}
