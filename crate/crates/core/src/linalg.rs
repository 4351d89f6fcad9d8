//! Exact linear algebra: integer Smith normal form with smallest-entry
//! pivoting, `𝔽_p` rank and solving, and rational elimination.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A sparse integer matrix, row-major, with a column index for pivoting.
#[derive(Debug, Clone, Default)]
pub struct SparseIntMatrix {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<BTreeMap<usize, BigInt>>,
}

impl SparseIntMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseIntMatrix {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        if v == 0 {
            self.rows[r].remove(&c);
        } else {
            self.rows[r].insert(c, BigInt::from(v));
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: i64) {
        let entry = self.rows[r].entry(c).or_insert_with(BigInt::zero);
        *entry += v;
        if entry.is_zero() {
            self.rows[r].remove(&c);
        }
    }

    /// Diagonal of the Smith normal form: rank and invariant factors
    /// `d_1 | d_2 | …` (only entries > 1 are returned as torsion).
    pub fn smith_invariants(mut self) -> SmithResult {
        // Column index: for each column, the set of rows with a nonzero entry.
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row.keys() {
                col_rows[c].insert(r);
            }
        }
        let mut active_rows: BTreeSet<usize> = (0..self.nrows)
            .filter(|&r| !self.rows[r].is_empty())
            .collect();
        let mut diagonal: Vec<BigInt> = Vec::new();

        while !active_rows.is_empty() {
            // Pick the entry of smallest absolute value, preferring sparser
            // rows among ties to limit fill-in.
            let mut pivot: Option<(usize, usize, BigInt)> = None;
            'scan: for &r in &active_rows {
                for (&c, v) in &self.rows[r] {
                    let better = match &pivot {
                        None => true,
                        Some((_, _, pv)) => v.abs() < pv.abs(),
                    };
                    if better {
                        let is_unit = v.abs().is_one();
                        pivot = Some((r, c, v.clone()));
                        if is_unit {
                            break 'scan;
                        }
                    }
                }
            }
            let (pr, pc, _) = match pivot {
                Some(p) => p,
                None => break,
            };

            loop {
                let pivot_val = self.rows[pr][&pc].clone();
                // Clear the pivot column with row operations; a nonzero
                // remainder becomes the new, smaller pivot.
                let mut smaller: Option<usize> = None;
                let rows_in_col: Vec<usize> = col_rows[pc]
                    .iter()
                    .copied()
                    .filter(|&r| r != pr && active_rows.contains(&r))
                    .collect();
                for r in rows_in_col {
                    let val = match self.rows[r].get(&pc) {
                        Some(v) => v.clone(),
                        None => continue,
                    };
                    let q = rounded_div(&val, &pivot_val);
                    if !q.is_zero() {
                        self.row_axpy(r, pr, &-&q, &mut col_rows);
                    }
                    if self.rows[r].contains_key(&pc) {
                        smaller = Some(r);
                    }
                }
                if smaller.is_some() {
                    // Entry with |value| < |pivot| remains in the column;
                    // retry with the smallest entry of this column.
                    let (mut br, mut bv): (usize, Option<BigInt>) = (pr, None);
                    for &r in col_rows[pc].iter() {
                        if !active_rows.contains(&r) {
                            continue;
                        }
                        if let Some(v) = self.rows[r].get(&pc) {
                            if bv.as_ref().is_none_or(|b| v.abs() < b.abs()) {
                                bv = Some(v.clone());
                                br = r;
                            }
                        }
                    }
                    if br != pr {
                        self.rows.swap(br, pr);
                        for set in col_rows.iter_mut() {
                            let has_a = set.contains(&br);
                            let has_b = set.contains(&pr);
                            if has_a != has_b {
                                if has_a {
                                    set.remove(&br);
                                    set.insert(pr);
                                } else {
                                    set.remove(&pr);
                                    set.insert(br);
                                }
                            }
                        }
                    }
                    continue;
                }
                // Column is clear; clear the pivot row with column
                // operations. Column ops do not change other rows' support
                // of the pivot column, so they are just entry rewrites.
                let pivot_val = self.rows[pr][&pc].clone();
                let row_entries: Vec<(usize, BigInt)> = self.rows[pr]
                    .iter()
                    .filter(|&(&c, _)| c != pc)
                    .map(|(&c, v)| (c, v.clone()))
                    .collect();
                let mut leftover = false;
                for (c, v) in row_entries {
                    let q = rounded_div(&v, &pivot_val);
                    if !q.is_zero() {
                        // col_c -= q · col_pc. The pivot column was just
                        // cleared, so only the pivot row changes.
                        let new_v = &v - &q * &pivot_val;
                        if new_v.is_zero() {
                            self.rows[pr].remove(&c);
                            col_rows[c].remove(&pr);
                        } else {
                            self.rows[pr].insert(c, new_v);
                        }
                    }
                    if self.rows[pr].contains_key(&c) {
                        leftover = true;
                    }
                }
                if leftover {
                    // |leftover entries| < |pivot|: move the smallest into
                    // the pivot position by a column swap.
                    let (best_c, _) = self.rows[pr]
                        .iter()
                        .filter(|&(&c, _)| c != pc)
                        .min_by_key(|&(_, v)| v.abs())
                        .map(|(&c, v)| (c, v.clone()))
                        .unwrap();
                    self.swap_columns(pc, best_c, &mut col_rows);
                    continue;
                }
                break;
            }

            diagonal.push(self.rows[pr][&pc].abs());
            // Retire the pivot row and column.
            for &c in self.rows[pr].clone().keys() {
                col_rows[c].remove(&pr);
            }
            self.rows[pr].clear();
            active_rows.remove(&pr);
        }

        // Normalize diagonal entries into a divisibility chain.
        let mut entries: Vec<BigInt> = diagonal;
        let k = entries.len();
        loop {
            let mut changed = false;
            for i in 0..k {
                for j in i + 1..k {
                    let (a, b) = (entries[i].clone(), entries[j].clone());
                    if (&b % &a).is_zero() {
                        continue;
                    }
                    let g = a.gcd(&b);
                    let l = (&a * &b) / &g;
                    entries[i] = g;
                    entries[j] = l;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        entries.sort();
        let torsion: Vec<BigUint> = entries
            .iter()
            .filter(|d| d.abs() > BigInt::one())
            .map(|d| d.abs().to_biguint().unwrap())
            .collect();
        SmithResult {
            rank: k,
            torsion,
        }
    }

    /// row r += q · row src, maintaining the column index.
    fn row_axpy(
        &mut self,
        r: usize,
        src: usize,
        q: &BigInt,
        col_rows: &mut [BTreeSet<usize>],
    ) {
        let src_entries: Vec<(usize, BigInt)> =
            self.rows[src].iter().map(|(&c, v)| (c, v.clone())).collect();
        for (c, v) in src_entries {
            let entry = self.rows[r].entry(c).or_insert_with(BigInt::zero);
            *entry += q * &v;
            if entry.is_zero() {
                self.rows[r].remove(&c);
                col_rows[c].remove(&r);
            } else {
                col_rows[c].insert(r);
            }
        }
    }

    fn swap_columns(&mut self, a: usize, b: usize, col_rows: &mut [BTreeSet<usize>]) {
        if a == b {
            return;
        }
        let rows: BTreeSet<usize> = col_rows[a].union(&col_rows[b]).copied().collect();
        for r in rows {
            let va = self.rows[r].remove(&a);
            let vb = self.rows[r].remove(&b);
            if let Some(v) = va {
                self.rows[r].insert(b, v);
            }
            if let Some(v) = vb {
                self.rows[r].insert(a, v);
            }
        }
        col_rows.swap(a, b);
    }
}

/// Quotient rounding to nearest, so remainders satisfy `|rem| ≤ |b|/2`.
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    let two_r: BigInt = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.is_positive()) == (b.is_positive()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithResult {
    pub rank: usize,
    /// Invariant factors > 1, in divisibility order.
    pub torsion: Vec<BigUint>,
}

/// Dense matrix over `𝔽_p` supporting rank computation by elimination.
#[derive(Debug, Clone)]
pub struct ModPMatrix {
    pub p: u64,
    pub ncols: usize,
    /// Reduced rows in echelon form, keyed by pivot column.
    pivots: BTreeMap<usize, Vec<u64>>,
}

impl ModPMatrix {
    pub fn new(p: u64, ncols: usize) -> Self {
        ModPMatrix {
            p,
            ncols,
            pivots: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces a row against the current echelon basis; returns true when
    /// the row was independent (and absorbed).
    pub fn insert_row(&mut self, mut row: Vec<u64>) -> bool {
        let p = self.p;
        debug_assert_eq!(row.len(), self.ncols);
        loop {
            let lead = match row.iter().position(|&v| v != 0) {
                None => return false,
                Some(c) => c,
            };
            match self.pivots.get(&lead) {
                Some(basis_row) => {
                    let factor = row[lead] % p;
                    for (v, b) in row.iter_mut().zip(basis_row) {
                        *v = (*v + (p - factor) * b % p) % p;
                    }
                }
                None => {
                    let inv = mod_inverse(row[lead], p);
                    for v in row.iter_mut() {
                        *v = *v * inv % p;
                    }
                    self.pivots.insert(lead, row);
                    return true;
                }
            }
        }
    }
}

pub fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Exact determinant of a small dense integer matrix (Bareiss elimination).
pub fn int_determinant(matrix: &[Vec<i64>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Solves `xᵀ·M = target` exactly over `ℚ` for a matrix given by rows.
/// Returns `None` when the system is inconsistent.
pub fn solve_rational(rows: &[Vec<BigRational>], target: &[BigRational]) -> Option<Vec<BigRational>> {
    let nr = rows.len();
    let nc = target.len();
    // Transpose into a standard A·x = b system with A[c][r] = rows[r][c].
    let mut aug: Vec<Vec<BigRational>> = (0..nc)
        .map(|c| {
            let mut row: Vec<BigRational> = (0..nr).map(|r| rows[r][c].clone()).collect();
            row.push(target[c].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; nr];
    let mut used_rows: Vec<bool> = vec![false; nc];
    for col in 0..nr {
        let pivot_row = (0..nc).find(|&r| !used_rows[r] && !aug[r][col].is_zero());
        let pr = match pivot_row {
            Some(r) => r,
            None => continue,
        };
        used_rows[pr] = true;
        pivot_of_col[col] = Some(pr);
        let inv = aug[pr][col].clone();
        for v in aug[pr].iter_mut() {
            *v /= inv.clone();
        }
        for r in 0..nc {
            if r != pr && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                #[allow(clippy::needless_range_loop)]
                for c in 0..=nr {
                    let delta = &factor * &aug[pr][c];
                    aug[r][c] -= delta;
                }
            }
        }
    }
    // Rows never used as pivots end up with zero coefficients throughout,
    // so a nonzero right side there means the system is inconsistent.
    for (r, used) in used_rows.iter().enumerate() {
        if !used && !aug[r][nr].is_zero() {
            return None;
        }
    }
    let mut solution = vec![BigRational::zero(); nr];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(pr) = pivot {
            solution[col] = aug[*pr][nr].clone();
        }
    }
    // Verify (guards against inconsistent systems with free columns).
    for c in 0..nc {
        let mut acc = BigRational::zero();
        for r in 0..nr {
            acc += &solution[r] * &rows[r][c];
        }
        if acc != target[c] {
            return None;
        }
    }
    Some(solution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_small() {
        let mut m = SparseIntMatrix::new(4, 4);
        let data = [
            [-6, 111, -36, 6],
            [5, -672, 210, 74],
            [0, -255, 81, 24],
            [-7, 255, -81, -10],
        ];
        for (r, row) in data.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        let res = m.smith_invariants();
        assert_eq!(res.rank, 3);
        assert_eq!(
            res.torsion,
            vec![BigUint::from(3u32), BigUint::from(21u32)]
        );
    }

    #[test]
    fn smith_identity_and_zero() {
        let mut m = SparseIntMatrix::new(3, 3);
        for i in 0..3 {
            m.set(i, i, 1);
        }
        let res = m.smith_invariants();
        assert_eq!(res.rank, 3);
        assert!(res.torsion.is_empty());

        let z = SparseIntMatrix::new(2, 5);
        let res = z.smith_invariants();
        assert_eq!(res.rank, 0);
    }

    #[test]
    fn smith_torsion_two() {
        // [[2]] has invariant factor 2.
        let mut m = SparseIntMatrix::new(1, 1);
        m.set(0, 0, 2);
        let res = m.smith_invariants();
        assert_eq!(res.rank, 1);
        assert_eq!(res.torsion, vec![BigUint::from(2u32)]);
    }

    #[test]
    fn modp_rank() {
        let mut m = ModPMatrix::new(5, 3);
        assert!(m.insert_row(vec![1, 2, 3]));
        assert!(m.insert_row(vec![0, 1, 4]));
        assert!(!m.insert_row(vec![1, 3, 2])); // row1 + row2 mod 5
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(int_determinant(&[vec![1, 1], vec![0, 1]]), BigInt::one());
        assert_eq!(
            int_determinant(&[vec![1, 1, 1], vec![1, 1, 0], vec![1, 0, 1]]),
            BigInt::from(-1)
        );
        assert_eq!(int_determinant(&[vec![2, 0], vec![0, 3]]), BigInt::from(6));
    }

    #[test]
    fn rational_solve() {
        let q = |v: i64| BigRational::from_integer(BigInt::from(v));
        let rows = vec![vec![q(1), q(1), q(1)], vec![q(0), q(1), q(1)]];
        let target = vec![q(1), q(0), q(0)];
        let sol = solve_rational(&rows, &target).unwrap();
        assert_eq!(sol, vec![q(1), q(-1)]);
        let bad_target = vec![q(0), q(1), q(0)];
        assert!(solve_rational(&rows, &bad_target).is_none());
    }
}
