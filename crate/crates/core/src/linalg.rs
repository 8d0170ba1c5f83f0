//! Dense linear algebra over GF(q): elimination, rank, pivots and an
//! incremental echelon basis. GF(2) rows are bit-packed into `u64` words.

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// A dense row-major matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Matrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| v as u32 >= field.q()) {
            return Err(Error::InvalidParameter(format!("entry {v} not reduced mod {}", field.q())));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = self.field.reduce(v as u64);
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c));
            }
        }
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.q(), other.field.q()));
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let q = self.field.q() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u64 * other.get(k, j) as u64;
                }
                out.data[i * other.cols + j] = (acc % q) as u8;
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        let mut scratch = self.data.clone();
        rank_in_place(self.field, self.rows, self.cols, &mut scratch)
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = rref_in_place(self.field, m.rows, m.cols, &mut m.data);
        (m, pivots)
    }

    /// Indices of the lexicographically first maximal set of linearly
    /// independent rows.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut basis = EchelonBasis::new(self.field, self.cols);
        (0..self.rows)
            .filter(|&r| basis.insert(self.row(r).to_vec()))
            .collect()
    }
}

/// Rank of a row-major `rows x cols` buffer, destroying its contents.
pub fn rank_in_place(field: PrimeField, rows: usize, cols: usize, data: &mut [u8]) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    if field.q() == 2 {
        return gf2_rank_bytes(rows, cols, data);
    }
    eliminate(field, rows, cols, data, false).len()
}

/// In-place RREF; returns pivot columns.
pub fn rref_in_place(field: PrimeField, rows: usize, cols: usize, data: &mut [u8]) -> Vec<usize> {
    eliminate(field, rows, cols, data, true)
}

fn eliminate(field: PrimeField, rows: usize, cols: usize, data: &mut [u8], reduce_up: bool) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(data[r * cols + c]).expect("pivot is nonzero");
        if inv != 1 {
            for j in c..cols {
                data[r * cols + j] = field.mul(data[r * cols + j], inv);
            }
        }
        let start = if reduce_up { 0 } else { r + 1 };
        for i in start..rows {
            if i == r {
                continue;
            }
            let factor = data[i * cols + c];
            if factor == 0 {
                continue;
            }
            let neg = field.neg(factor);
            for j in c..cols {
                let v = data[r * cols + j];
                if v != 0 {
                    data[i * cols + j] = field.add(data[i * cols + j], field.mul(neg, v));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn gf2_rank_bytes(rows: usize, cols: usize, data: &[u8]) -> usize {
    let words = cols.div_ceil(64);
    let mut packed = vec![0u64; rows * words];
    for r in 0..rows {
        for c in 0..cols {
            if data[r * cols + c] & 1 == 1 {
                packed[r * words + c / 64] |= 1 << (c % 64);
            }
        }
    }
    gf2_rank_packed(rows, words, &mut packed)
}

/// Rank of bit-packed GF(2) rows (`words` u64 per row), destroying the input.
pub fn gf2_rank_packed(rows: usize, words: usize, packed: &mut [u64]) -> usize {
    let mut rank = 0;
    for w in 0..words {
        for bit in 0..64 {
            if rank == rows {
                return rank;
            }
            let mask = 1u64 << bit;
            let Some(p) = (rank..rows).find(|&i| packed[i * words + w] & mask != 0) else {
                continue;
            };
            if p != rank {
                for j in 0..words {
                    packed.swap(p * words + j, rank * words + j);
                }
            }
            for i in rank + 1..rows {
                if packed[i * words + w] & mask != 0 {
                    for j in w..words {
                        packed[i * words + j] ^= packed[rank * words + j];
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// An incrementally built basis kept in echelon form, so membership and
/// independence tests cost one reduction pass.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: PrimeField,
    dim: usize,
    // (pivot column, row normalised to 1 at the pivot)
    rows: Vec<(usize, Vec<u8>)>,
}

impl EchelonBasis {
    pub fn new(field: PrimeField, dim: usize) -> Self {
        EchelonBasis {
            field,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduce `v` against the basis in place; returns true when the
    /// remainder is zero.
    pub fn reduce(&self, v: &mut [u8]) -> bool {
        let f = self.field;
        for (p, row) in &self.rows {
            let factor = v[*p];
            if factor != 0 {
                let neg = f.neg(factor);
                for (x, &b) in v.iter_mut().zip(row).skip(*p) {
                    if b != 0 {
                        *x = f.add(*x, f.mul(neg, b));
                    }
                }
            }
        }
        v.iter().all(|&x| x == 0)
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w)
    }

    /// Adds `v` if independent of the current span; returns whether it was.
    pub fn insert(&mut self, mut v: Vec<u8>) -> bool {
        if self.reduce(&mut v) {
            return false;
        }
        let p = v.iter().position(|&x| x != 0).expect("nonzero remainder");
        let inv = self.field.inv(v[p]).expect("nonzero pivot");
        for x in v.iter_mut() {
            *x = self.field.mul(*x, inv);
        }
        self.rows.push((p, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn f(q: u32) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    /// Rank by brute force: largest k with a nonzero k x k minor.
    fn minor_rank(m: &Matrix) -> usize {
        use itertools::Itertools;
        let fld = m.field();
        let det = |rows: &[usize], cols: &[usize]| -> u8 {
            // Leibniz expansion
            let k = rows.len();
            let mut acc = 0u8;
            for perm in (0..k).permutations(k) {
                let mut inversions = 0;
                for i in 0..k {
                    for j in i + 1..k {
                        if perm[i] > perm[j] {
                            inversions += 1;
                        }
                    }
                }
                let mut prod = 1u8;
                for i in 0..k {
                    prod = fld.mul(prod, m.get(rows[i], cols[perm[i]]));
                }
                acc = if inversions % 2 == 0 { fld.add(acc, prod) } else { fld.sub(acc, prod) };
            }
            acc
        };
        for k in (1..=m.rows().min(m.cols())).rev() {
            for rows in (0..m.rows()).combinations(k) {
                for cols in (0..m.cols()).combinations(k) {
                    if det(&rows, &cols) != 0 {
                        return k;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn small_ranks() {
        assert_eq!(Matrix::identity(f(5), 4).rank(), 4);
        assert_eq!(Matrix::zeros(f(3), 3, 5).rank(), 0);
        assert_eq!(Matrix::zeros(f(3), 0, 5).rank(), 0);
        let ones = Matrix::new(f(2), 2, 2, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(ones.rank(), minor_rank(&ones));
        assert_eq!(ones.rank(), 1);
    }

    #[test]
    fn rank_matches_minor_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for q in [2u32, 3, 5] {
            for _ in 0..60 {
                let r = rng.random_range(1..=4);
                let c = rng.random_range(1..=4);
                let data = (0..r * c).map(|_| rng.random_range(0..q) as u8).collect();
                let m = Matrix::new(f(q), r, c, data).unwrap();
                assert_eq!(m.rank(), minor_rank(&m), "{m:?}");
            }
        }
    }

    #[test]
    fn packed_and_generic_paths_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = rng.random_range(1..=70);
            let c = rng.random_range(1..=130);
            let data: Vec<u8> = (0..r * c).map(|_| rng.random_range(0..2)).collect();
            let mut a = data.clone();
            let generic = eliminate(f(2), r, c, &mut a, false).len();
            let m = Matrix::new(f(2), r, c, data).unwrap();
            assert_eq!(m.rank(), generic);
        }
    }

    #[test]
    fn independent_rows_span_rank() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let data = (0..6 * 5).map(|_| rng.random_range(0..3)).collect();
            let m = Matrix::new(f(3), 6, 5, data).unwrap();
            let rows = m.independent_rows();
            assert_eq!(rows.len(), m.rank());
            let sub = m.submatrix(&rows, &(0..5).collect::<Vec<_>>());
            assert_eq!(sub.rank(), rows.len());
        }
    }

    #[test]
    fn rref_pivots() {
        let m = Matrix::new(f(7), 2, 3, vec![0, 2, 4, 0, 1, 2]).unwrap();
        let (r, piv) = m.rref();
        assert_eq!(piv, vec![1]);
        assert_eq!(r.row(0), &[0, 1, 2]);
        assert_eq!(r.row(1), &[0, 0, 0]);
    }
}
