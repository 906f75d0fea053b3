//! Exact linear algebra over the prime field Z_b.
//!
//! Entries are stored as bytes, so the modulus must be a prime below 256.
//! Base 2 takes a bit-packed path for rank computations, which is what the
//! net verification loops hit hardest.

use crate::error::{Error, Result};

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiplicative inverse of a nonzero residue modulo a prime.
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    // Fermat: a^(p-2)
    let mut result = 1u32;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// A dense matrix over Z_b, row-major, immutable once built.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GfMatrix {
    modulus: u8,
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl GfMatrix {
    /// Builds a matrix from row-major entries, validating the modulus and every residue.
    pub fn new(modulus: u32, rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if modulus > 255 || !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| u32::from(e) >= modulus) {
            return Err(Error::InvalidResidue {
                value: bad.into(),
                modulus,
            });
        }
        Ok(GfMatrix {
            modulus: modulus as u8,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(modulus: u32, rows: usize, cols: usize) -> Result<Self> {
        Self::new(modulus, rows, cols, vec![0; rows * cols])
    }

    pub fn identity(modulus: u32, n: usize) -> Result<Self> {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self::new(modulus, n, n, entries)
    }

    /// Builds a matrix from a slice of rows. Entries are reduced modulo `modulus`.
    pub fn from_rows(modulus: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            if modulus == 0 {
                return Err(Error::NotPrime(0));
            }
            entries.extend(row.iter().map(|&v| (v % modulus) as u8));
        }
        Self::new(modulus, rows.len(), cols, entries)
    }

    pub fn modulus(&self) -> u32 {
        u32::from(self.modulus)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// The first `k` rows as a new matrix.
    pub fn leading_rows(&self, k: usize) -> GfMatrix {
        let k = k.min(self.rows);
        GfMatrix {
            modulus: self.modulus,
            rows: k,
            cols: self.cols,
            entries: self.entries[..k * self.cols].to_vec(),
        }
    }

    /// Stacks matrices with equal column counts and moduli on top of each other.
    pub fn vstack(parts: &[GfMatrix]) -> Result<GfMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::out_of_range("vstack", "no matrices given"))?;
        let mut entries = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != first.cols {
                return Err(Error::DimensionMismatch {
                    expected: first.cols,
                    found: p.cols,
                });
            }
            if p.modulus != first.modulus {
                return Err(Error::NotPrime(p.modulus()));
            }
            entries.extend_from_slice(&p.entries);
            rows += p.rows;
        }
        Ok(GfMatrix {
            modulus: first.modulus,
            rows,
            cols: first.cols,
            entries,
        })
    }

    /// Row r packed into a word, bit c holding entry (r, c). Only for b = 2 and cols <= 64.
    pub fn packed_rows(&self) -> Option<Vec<u64>> {
        if self.modulus != 2 || self.cols > 64 {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|r| {
                    self.row(r)
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (c, &e)| acc | (u64::from(e) << c))
                })
                .collect(),
        )
    }

    /// M·v modulo b.
    pub fn matvec(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let p = self.modulus();
        Ok((0..self.rows)
            .map(|r| {
                let acc = self
                    .row(r)
                    .iter()
                    .zip(v)
                    .fold(0u32, |acc, (&a, &x)| (acc + u32::from(a) * u32::from(x)) % p);
                acc as u8
            })
            .collect())
    }

    /// Rank over Z_b by Gaussian elimination.
    pub fn rank(&self) -> usize {
        if let Some(mut rows) = self.packed_rows() {
            return rank_packed(&mut rows);
        }
        let mut work = self.entries.clone();
        row_reduce(&mut work, self.rows, self.cols, self.cols, self.modulus()).len()
    }

    /// Solves M·x = rhs over Z_b, returning the affine solution space.
    pub fn solve_affine(&self, rhs: &[u8]) -> Result<AffineSolutions> {
        if rhs.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: rhs.len(),
            });
        }
        let p = self.modulus();
        if let Some(&bad) = rhs.iter().find(|&&e| u32::from(e) >= p) {
            return Err(Error::InvalidResidue {
                value: bad.into(),
                modulus: p,
            });
        }
        let n = self.cols;
        let width = n + 1;
        let mut aug = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            aug.extend_from_slice(self.row(r));
            aug.push(rhs[r]);
        }
        let pivots = row_reduce(&mut aug, self.rows, width, n, p);

        // A nonzero right-hand side in a zero row means no solution.
        for r in pivots.len()..self.rows {
            if aug[r * width + n] != 0 {
                return Ok(AffineSolutions {
                    modulus: p,
                    unknowns: n,
                    particular: None,
                    kernel: Vec::new(),
                });
            }
        }

        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut particular = vec![0u8; n];
        for (r, &c) in pivots.iter().enumerate() {
            particular[c] = aug[r * width + n];
        }
        let kernel = (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0u8; n];
                v[f] = 1;
                for (r, &c) in pivots.iter().enumerate() {
                    let e = u32::from(aug[r * width + f]);
                    v[c] = ((p - e) % p) as u8;
                }
                v
            })
            .collect();
        Ok(AffineSolutions {
            modulus: p,
            unknowns: n,
            particular: Some(particular),
            kernel,
        })
    }
}

/// Reduces the first `pivot_cols` columns of a row-major matrix to reduced row
/// echelon form in place and returns the pivot columns in row order.
fn row_reduce(m: &mut [u8], rows: usize, width: usize, pivot_cols: usize, p: u32) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m[i * width + c] != 0) else {
            continue;
        };
        if pr != r {
            for k in 0..width {
                m.swap(pr * width + k, r * width + k);
            }
        }
        let inv = inv_mod(u32::from(m[r * width + c]), p);
        for k in 0..width {
            m[r * width + k] = (u32::from(m[r * width + k]) * inv % p) as u8;
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = u32::from(m[i * width + c]);
            if factor == 0 {
                continue;
            }
            for k in 0..width {
                let sub = factor * u32::from(m[r * width + k]) % p;
                m[i * width + k] = ((u32::from(m[i * width + k]) + p - sub) % p) as u8;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of bit-packed rows over Z_2. Destroys the input.
pub(crate) fn rank_packed(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for i in 0..rows.len() {
        let pivot = rows[i];
        if pivot == 0 {
            continue;
        }
        rank += 1;
        let low = pivot & pivot.wrapping_neg();
        for row in rows[i + 1..].iter_mut() {
            if *row & low != 0 {
                *row ^= pivot;
            }
        }
    }
    rank
}

/// Solution set of an affine system x = particular + Σ c_f · kernel_f.
#[derive(Clone, Debug)]
pub struct AffineSolutions {
    modulus: u32,
    unknowns: usize,
    particular: Option<Vec<u8>>,
    kernel: Vec<Vec<u8>>,
}

impl AffineSolutions {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }

    /// Dimension of the solution space (number of free unknowns), if consistent.
    pub fn free_dimension(&self) -> Option<usize> {
        self.particular.as_ref().map(|_| self.kernel.len())
    }

    /// Number of solutions: 0 or b^(unknowns - rank). `None` on u128 overflow.
    pub fn count(&self) -> Option<u128> {
        match self.particular {
            None => Some(0),
            Some(_) => u128::from(self.modulus).checked_pow(self.kernel.len() as u32),
        }
    }

    pub fn particular(&self) -> Option<&[u8]> {
        self.particular.as_deref()
    }

    pub fn kernel_basis(&self) -> &[Vec<u8>] {
        &self.kernel
    }

    /// Enumerates every solution. The caller is responsible for keeping the
    /// solution count small.
    pub fn iter(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        let total: u128 = self.count().unwrap_or(u128::MAX);
        let p = self.modulus;
        (0..total).map(move |idx| {
            let mut x = self.particular.clone().unwrap_or_default();
            let mut rest = idx;
            for basis in &self.kernel {
                let coef = (rest % u128::from(p)) as u32;
                rest /= u128::from(p);
                if coef == 0 {
                    continue;
                }
                for (xi, &bi) in x.iter_mut().zip(basis) {
                    *xi = ((u32::from(*xi) + coef * u32::from(bi)) % p) as u8;
                }
            }
            debug_assert_eq!(x.len(), self.unknowns);
            x
        })
    }
}
