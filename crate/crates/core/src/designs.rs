//! `t`-`(n,k,λ)` designs: validation, the complete and Hadamard
//! constructions, and the block-counting identities used by the workload
//! closed forms.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_integer::binomial;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Strength, point count, block size and index of a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignParams {
    pub t: usize,
    pub n: usize,
    pub k: usize,
    pub lambda: u64,
}

impl DesignParams {
    /// Checks `1 ≤ t ≤ k ≤ n`, `λ ≥ 1` and that `λ·C(n,t)` is a multiple of
    /// `C(k,t)`.
    pub fn new(t: usize, n: usize, k: usize, lambda: u64) -> Result<Self> {
        let params = DesignParams { t, n, k, lambda };
        params.check()?;
        Ok(params)
    }

    fn check(&self) -> Result<()> {
        let DesignParams { t, n, k, lambda } = *self;
        if !(1 <= t && t <= k && k <= n) {
            return Err(Error::Param(format!(
                "need 1 <= t <= k <= n, got t={t}, k={k}, n={n}"
            )));
        }
        if lambda == 0 {
            return Err(Error::Param("lambda must be at least 1".into()));
        }
        let num = lambda as u128 * binomial(n as u128, t as u128);
        let den = binomial(k as u128, t as u128);
        if !num.is_multiple_of(den) {
            return Err(Error::Param(format!(
                "{t}-({n},{k},{lambda}) has a fractional block count {num}/{den}"
            )));
        }
        Ok(())
    }

    /// `|ℬ| = λ·C(n,t)/C(k,t)`.
    pub fn block_count(&self) -> u64 {
        let num = self.lambda as u128 * binomial(self.n as u128, self.t as u128);
        (num / binomial(self.k as u128, self.t as u128)) as u64
    }
}

impl fmt::Display for DesignParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-({},{},{})", self.t, self.n, self.k, self.lambda)
    }
}

/// A validated design. Blocks are sorted point lists kept in input order;
/// repeated blocks are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    params: DesignParams,
    blocks: Vec<Vec<usize>>,
}

impl Design {
    pub fn params(&self) -> DesignParams {
        self.params
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn t(&self) -> usize {
        self.params.t
    }

    pub fn lambda(&self) -> u64 {
        self.params.lambda
    }

    /// Number of blocks containing every point of `contains` and no point of
    /// `avoids`, counted directly over the block list.
    pub fn count_blocks_with(&self, contains: &[usize], avoids: &[usize]) -> u64 {
        self.blocks
            .iter()
            .filter(|b| contains.iter().all(|p| b.binary_search(p).is_ok()))
            .filter(|b| avoids.iter().all(|p| b.binary_search(p).is_err()))
            .count() as u64
    }

    pub fn to_file(&self) -> DesignFile {
        DesignFile {
            t: self.params.t,
            n: self.params.n,
            k: self.params.k,
            lambda: self.params.lambda,
            blocks: self.blocks.clone(),
            extra: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("design serializes")
    }

    /// Parses the JSON design format and validates it. Unknown top-level
    /// fields are logged and ignored.
    pub fn from_json(text: &str) -> Result<Design> {
        let file: DesignFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_design()
    }
}

/// On-disk form: `{"t":3,"n":8,"k":4,"lambda":1,"blocks":[[0,1,2,3],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub t: usize,
    pub n: usize,
    pub k: usize,
    pub lambda: u64,
    pub blocks: Vec<Vec<usize>>,
    #[serde(flatten, skip_serializing)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl DesignFile {
    pub fn into_design(self) -> Result<Design> {
        for key in self.extra.keys() {
            log::warn!("ignoring unknown design field `{key}`");
        }
        let params = DesignParams {
            t: self.t,
            n: self.n,
            k: self.k,
            lambda: self.lambda,
        };
        validate_design(params, &self.blocks)
    }
}

/// Colex rank of a sorted subset among all subsets of the same size.
fn colex_rank(subset: &[usize]) -> usize {
    subset
        .iter()
        .enumerate()
        .map(|(i, &p)| binomial(p as u128, i as u128 + 1) as usize)
        .sum()
}

/// Validates a raw block collection against the claimed parameters.
///
/// Every block must be a `k`-subset of `{0,…,n−1}` and every one of the
/// `C(n,t)` `t`-subsets must lie in exactly `λ` blocks. The first uncovered
/// or overcovered subset in lexicographic order is reported.
pub fn validate_design(params: DesignParams, blocks: &[Vec<usize>]) -> Result<Design> {
    params.check()?;
    let DesignParams { t, n, k, lambda } = params;

    let mut sorted = Vec::with_capacity(blocks.len());
    for (i, block) in blocks.iter().enumerate() {
        let mut b = block.clone();
        b.sort_unstable();
        if b.len() != k {
            return Err(Error::BlockSize {
                block: i,
                k,
                reason: format!("has {} points", b.len()),
            });
        }
        if let Some(&p) = b.iter().find(|&&p| p >= n) {
            return Err(Error::BlockSize {
                block: i,
                k,
                reason: format!("point {p} is outside 0..{n}"),
            });
        }
        if b.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BlockSize {
                block: i,
                k,
                reason: "repeats a point".into(),
            });
        }
        sorted.push(b);
    }

    let mut counts = vec![0u64; binomial(n as u128, t as u128) as usize];
    for b in &sorted {
        for sub in b.iter().copied().combinations(t) {
            counts[colex_rank(&sub)] += 1;
        }
    }
    for sub in (0..n).combinations(t) {
        let count = counts[colex_rank(&sub)];
        if count != lambda {
            return Err(Error::Coverage {
                subset: sub,
                count,
                expected: lambda,
            });
        }
    }

    Ok(Design {
        params,
        blocks: sorted,
    })
}

/// The trivial design: every `k`-subset is a block, in lexicographic order,
/// giving `λ = C(n−t, k−t)`.
pub fn complete_design(n: usize, k: usize, t: usize) -> Result<Design> {
    if !(1 <= t && t <= k && k <= n) {
        return Err(Error::Param(format!(
            "need 1 <= t <= k <= n, got t={t}, k={k}, n={n}"
        )));
    }
    let lambda = binomial((n - t) as u128, (k - t) as u128) as u64;
    let blocks: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    validate_design(DesignParams { t, n, k, lambda }, &blocks)
}

/// Hadamard 3-`(n, n/2, n/4−1)` design from the Sylvester matrix of order
/// `n`: each non-constant row contributes the support of its `+1` entries
/// and then the support of its `−1` entries.
pub fn hadamard_3design(n: usize) -> Result<Design> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Param(format!(
            "Sylvester construction needs n a power of two >= 8, got {n}"
        )));
    }
    let mut blocks = Vec::with_capacity(2 * (n - 1));
    for row in 1..n {
        // Sylvester entry H[row][col] = (-1)^popcount(row & col)
        let (plus, minus): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&col| (row & col).count_ones() % 2 == 0);
        blocks.push(plus);
        blocks.push(minus);
    }
    let params = DesignParams::new(3, n, n / 2, (n / 4 - 1) as u64)?;
    validate_design(params, &blocks)
}

/// True iff the block multiset is closed under complementation. Needs `2k = n`.
pub fn is_self_complementary(design: &Design) -> Result<bool> {
    let DesignParams { n, k, .. } = design.params;
    if 2 * k != n {
        return Err(Error::Param(format!(
            "complementation needs 2k = n, got k={k}, n={n}"
        )));
    }
    let mut original: Vec<&Vec<usize>> = design.blocks.iter().collect();
    original.sort();
    let mut complements: Vec<Vec<usize>> = design
        .blocks
        .iter()
        .map(|b| (0..n).filter(|p| b.binary_search(p).is_err()).collect())
        .collect();
    complements.sort();
    Ok(original.into_iter().eq(complements.iter()))
}

/// `λ_i^(j) = λ·C(n−i−j, k−i) / C(n−t, k−t)`: the number of blocks that
/// contain a fixed `i`-set and avoid a disjoint `j`-set.
pub fn count_lambda(params: DesignParams, i: usize, j: usize) -> Result<u64> {
    let DesignParams { t, n, k, lambda } = params;
    if i + j > t {
        return Err(Error::Param(format!("i + j = {} exceeds t = {t}", i + j)));
    }
    let num = if k < i || n - i - j < k - i {
        0
    } else {
        lambda as u128 * binomial((n - i - j) as u128, (k - i) as u128)
    };
    let den = binomial((n - t) as u128, (k - t) as u128);
    if num % den != 0 {
        return Err(Error::Param(format!(
            "λ_{i}^({j}) = {num}/{den} is not an integer for {params}"
        )));
    }
    Ok((num / den) as u64)
}

/// Reinterprets the blocks of a `t`-design as an `s`-design, `1 ≤ s ≤ t`.
pub fn reduce_design(design: &Design, s: usize) -> Result<Design> {
    let params = design.params;
    if s == 0 || s > params.t {
        return Err(Error::Param(format!(
            "strength {s} must lie in 1..={}",
            params.t
        )));
    }
    let lambda = count_lambda(params, s, 0)?;
    validate_design(DesignParams { t: s, lambda, ..params }, &design.blocks)
}

/// The 3-(8,4,1) design listed with the two-failure worked example, in its
/// printed block order.
pub fn example_3_8_4_1() -> Design {
    let blocks: [[usize; 4]; 14] = [
        [0, 1, 2, 3],
        [0, 1, 4, 5],
        [0, 1, 6, 7],
        [0, 2, 4, 6],
        [0, 2, 5, 7],
        [0, 3, 4, 7],
        [0, 3, 5, 6],
        [4, 5, 6, 7],
        [2, 3, 6, 7],
        [2, 3, 4, 5],
        [1, 3, 5, 7],
        [1, 3, 4, 6],
        [1, 2, 5, 6],
        [1, 2, 4, 7],
    ];
    let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
    validate_design(DesignParams::new(3, 8, 4, 1).unwrap(), &blocks).unwrap()
}

/// The 2-(5,4,3) design used for single-failure declustering.
pub fn example_2_5_4_3() -> Design {
    let blocks = vec![
        vec![0, 1, 2, 3],
        vec![0, 1, 2, 4],
        vec![0, 1, 3, 4],
        vec![0, 2, 3, 4],
        vec![1, 2, 3, 4],
    ];
    validate_design(DesignParams::new(2, 5, 4, 3).unwrap(), &blocks).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_designs_validate() {
        let d = example_3_8_4_1();
        assert_eq!(d.blocks().len(), 14);
        assert_eq!(d.params().block_count(), 14);
        let d = example_2_5_4_3();
        assert_eq!(d.blocks().len(), 5);
    }

    #[test]
    fn dropping_first_block_breaks_coverage_of_012() {
        let d = example_3_8_4_1();
        let err = validate_design(d.params(), &d.blocks()[1..]).unwrap_err();
        assert_eq!(
            err,
            Error::Coverage {
                subset: vec![0, 1, 2],
                count: 0,
                expected: 1
            }
        );
    }

    #[test]
    fn block_size_errors() {
        let p = DesignParams::new(2, 5, 4, 3).unwrap();
        let mut blocks = example_2_5_4_3().blocks().to_vec();
        blocks[2] = vec![0, 1, 3];
        assert!(matches!(
            validate_design(p, &blocks),
            Err(Error::BlockSize { block: 2, .. })
        ));
        blocks[2] = vec![0, 1, 3, 5];
        assert!(matches!(
            validate_design(p, &blocks),
            Err(Error::BlockSize { block: 2, .. })
        ));
        blocks[2] = vec![0, 1, 3, 3];
        assert!(matches!(
            validate_design(p, &blocks),
            Err(Error::BlockSize { block: 2, .. })
        ));
    }

    #[test]
    fn param_errors() {
        assert!(matches!(DesignParams::new(3, 8, 2, 1), Err(Error::Param(_))));
        assert!(matches!(DesignParams::new(0, 8, 4, 1), Err(Error::Param(_))));
        assert!(matches!(DesignParams::new(3, 8, 4, 0), Err(Error::Param(_))));
        // 2-(7,3,1) is fine, 2-(8,3,1) has 28/3 blocks
        assert!(DesignParams::new(2, 7, 3, 1).is_ok());
        assert!(matches!(DesignParams::new(2, 8, 3, 1), Err(Error::Param(_))));
    }

    #[test]
    fn complete_designs() {
        let d = complete_design(4, 2, 2).unwrap();
        assert_eq!((d.blocks().len(), d.lambda()), (6, 1));
        let d = complete_design(6, 3, 3).unwrap();
        assert_eq!((d.blocks().len(), d.lambda()), (20, 1));
        let d = complete_design(5, 4, 2).unwrap();
        assert_eq!((d.blocks().len(), d.lambda()), (5, 3));
        let mut a = d.blocks().to_vec();
        let mut b = example_2_5_4_3().blocks().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(complete_design(3, 4, 2).is_err());
    }

    #[test]
    fn hadamard_orders() {
        let d = hadamard_3design(8).unwrap();
        assert_eq!(d.params(), DesignParams::new(3, 8, 4, 1).unwrap());
        assert_eq!(d.blocks().len(), 14);
        let d = hadamard_3design(16).unwrap();
        assert_eq!(d.params(), DesignParams::new(3, 16, 8, 3).unwrap());
        assert_eq!(d.blocks().len(), 30);
        assert!(hadamard_3design(32).is_ok());
        assert!(matches!(hadamard_3design(12), Err(Error::Param(_))));
        assert!(matches!(hadamard_3design(4), Err(Error::Param(_))));
    }

    #[test]
    fn self_complementary() {
        assert!(is_self_complementary(&example_3_8_4_1()).unwrap());
        assert!(is_self_complementary(&complete_design(8, 4, 3).unwrap()).unwrap());
        assert!(is_self_complementary(&hadamard_3design(16).unwrap()).unwrap());

        // swap {4,5,6,7} for a second {0,1,2,3}; build unvalidated on purpose
        let mut d = example_3_8_4_1();
        d.blocks[7] = vec![0, 1, 2, 3];
        assert!(!is_self_complementary(&d).unwrap());

        assert!(is_self_complementary(&example_2_5_4_3()).is_err());
    }

    #[test]
    fn lambda_counts() {
        let p = example_3_8_4_1().params();
        assert_eq!(count_lambda(p, 1, 0).unwrap(), 7);
        assert_eq!(count_lambda(p, 2, 0).unwrap(), 3);
        assert_eq!(count_lambda(p, 2, 1).unwrap(), 2);
        assert_eq!(count_lambda(p, 0, 0).unwrap(), 14);
        assert!(matches!(count_lambda(p, 2, 2), Err(Error::Param(_))));

        let d = example_3_8_4_1();
        assert_eq!(d.count_blocks_with(&[0, 1], &[2]), 2);
    }

    #[test]
    fn reduction() {
        let d = example_3_8_4_1();
        let two = reduce_design(&d, 2).unwrap();
        assert_eq!(two.params(), DesignParams::new(2, 8, 4, 3).unwrap());
        let one = reduce_design(&d, 1).unwrap();
        assert_eq!(one.params(), DesignParams::new(1, 8, 4, 7).unwrap());
        assert_eq!(reduce_design(&d, 3).unwrap(), d);
        assert!(reduce_design(&d, 0).is_err());
        assert!(reduce_design(&d, 4).is_err());
    }

    #[test]
    fn json_round_trip_ignores_unknown_fields() {
        let d = example_3_8_4_1();
        assert_eq!(Design::from_json(&d.to_json()).unwrap(), d);

        let text = r#"{"t":2,"n":5,"k":4,"lambda":3,"comment":"five points",
            "blocks":[[0,1,2,3],[0,1,2,4],[0,1,3,4],[0,2,3,4],[1,2,3,4]]}"#;
        assert_eq!(Design::from_json(text).unwrap(), example_2_5_4_3());

        assert!(matches!(Design::from_json("{\"t\":2}"), Err(Error::Format(_))));
    }
}
