//! Sparse matrices in CSR form and a banded direct solver.
//!
//! The Jacobians assembled on the structured meshes here have small, known
//! bandwidth, so the factorization stores the matrix in LAPACK-style band
//! storage and runs an unblocked LU with partial pivoting inside the band.
//! Pivot selection breaks ties at the first maximal row, which keeps repeated
//! solves bitwise reproducible.

use alloc::vec::Vec;

use crate::real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinalgError {
    /// No usable pivot in this column (matrix singular to working precision).
    Singular { column: usize },
    /// A non-finite value entered the factorization.
    NonFinite { column: usize },
    /// Right-hand side length does not match the matrix size.
    DimensionMismatch { expected: usize, got: usize },
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::Singular { column } => {
                write!(f, "singular matrix: no pivot in column {column}")
            }
            LinalgError::NonFinite { column } => {
                write!(f, "non-finite entry while factorizing column {column}")
            }
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "right-hand side has length {got}, expected {expected}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Square sparse matrix in compressed row storage.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed in their
    /// original order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> SparseMatrix {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = alloc::vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for &k in &order {
            let (r, c, v) = triplets[k];
            debug_assert!(r < n && c < n);
            // entries arrive grouped by row, so a duplicate can only be the
            // immediately preceding entry of the same row
            if row_ptr[r + 1] > 0 && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Lower and upper bandwidths `(kl, ku)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(real::abs(v)))
    }

    /// Dense copy (intended for small matrices in tests and oracles).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = alloc::vec![alloc::vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                dense[i][j] = v;
            }
        }
        dense
    }

    /// Direct solve `A x = rhs` through a banded LU with partial pivoting.
    pub fn lu_solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let factor = BandedLu::factor(self)?;
        Ok(factor.solve(rhs))
    }
}

/// LU factorization of a banded matrix with partial pivoting.
///
/// Band storage holds `2*kl + ku + 1` diagonals per column; the topmost `kl`
/// slots of each column take the fill produced by pivoting.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<BandedLu, LinalgError> {
        let n = a.n();
        let (kl, ku_raw) = a.bandwidths();
        // room for pivot fill
        let ku = ku_raw + kl;
        let ldab = kl + ku + 1;
        let mut ab = alloc::vec![0.0f64; ldab * n];
        // entry (i, j) lives at ab[j * ldab + ku + i - j]; slots 0..kl-1 of a
        // column are the fill space
        let diag = ku;
        for i in 0..n {
            for (j, v) in a.row(i) {
                ab[j * ldab + diag + i - j] = v;
            }
        }
        let mut ipiv = alloc::vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j, rows j..=j+km
            let mut p_best = 0;
            let mut v_best = real::abs(ab[j * ldab + diag]);
            for p in 1..=km {
                let v = real::abs(ab[j * ldab + diag + p]);
                if v > v_best {
                    v_best = v;
                    p_best = p;
                }
            }
            if !v_best.is_finite() {
                return Err(LinalgError::NonFinite { column: j });
            }
            if v_best == 0.0 {
                return Err(LinalgError::Singular { column: j });
            }
            ipiv[j] = j + p_best;
            let c_hi = (j + ku).min(n - 1);
            if p_best != 0 {
                for c in j..=c_hi {
                    let r1 = c * ldab + diag + j - c;
                    let r2 = r1 + p_best;
                    ab.swap(r1, r2);
                }
            }
            let piv = ab[j * ldab + diag];
            for p in 1..=km {
                ab[j * ldab + diag + p] /= piv;
            }
            for c in (j + 1)..=c_hi {
                let ujc = ab[c * ldab + diag + j - c];
                if ujc != 0.0 {
                    for p in 1..=km {
                        let m = ab[j * ldab + diag + p];
                        ab[c * ldab + diag + j + p - c] -= m * ujc;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ab, ipiv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let ldab = self.kl + self.ku + 1;
        let diag = self.ku;
        let n = self.n;
        let mut b = rhs.to_vec();
        for j in 0..n {
            let jp = self.ipiv[j];
            if jp != j {
                b.swap(j, jp);
            }
            let km = self.kl.min(n - 1 - j);
            for p in 1..=km {
                b[j + p] -= self.ab[j * ldab + diag + p] * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[j * ldab + diag];
            let lo = j.saturating_sub(self.ku);
            for i in lo..j {
                b[i] -= self.ab[j * ldab + diag + i - j] * b[j];
            }
        }
        b
    }
}
