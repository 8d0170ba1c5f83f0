//! Enumeration of subspaces of GF(q)^n by reduced row echelon basis, and of
//! projective points in lexicographic order.

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;

use crate::field::PrimeField;
use crate::linalg::Matrix;

/// Number of `k`-dimensional subspaces of GF(q)^n.
pub fn gaussian_binomial(q: u32, n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1u32;
        den *= q.pow((i + 1) as u32) - 1u32;
    }
    num / den
}

/// Nonzero vectors of GF(q)^n whose first nonzero entry is 1, in
/// lexicographic order.
pub fn projective_points(field: PrimeField, n: usize) -> Vec<Vec<u8>> {
    let q = field.q() as u8;
    let mut out = Vec::new();
    for lead in 0..n {
        let mut v = vec![0u8; n];
        v[lead] = 1;
        loop {
            out.push(v.clone());
            if !odometer_step(&mut v[lead + 1..], q) {
                break;
            }
        }
    }
    out.sort_unstable();
    out
}

/// Advances `digits` as a base-`q` counter with the last digit fastest.
/// Returns false after wrapping round to all zeros.
pub fn odometer_step(digits: &mut [u8], q: u8) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

/// All `k`-dimensional subspaces of GF(q)^n, each yielded once as its
/// `k × n` reduced row echelon basis. Pivot sets come in lexicographic order.
pub struct Subspaces {
    field: PrimeField,
    n: usize,
    k: usize,
    pivots: Vec<Vec<usize>>,
    pivot_idx: usize,
    free: Vec<(usize, usize)>,
    digits: Vec<u8>,
    fresh: bool,
}

impl Subspaces {
    pub fn new(field: PrimeField, n: usize, k: usize) -> Self {
        let pivots: Vec<Vec<usize>> = if k > n {
            Vec::new()
        } else {
            (0..n).combinations(k).collect()
        };
        let mut s = Subspaces {
            field,
            n,
            k,
            pivots,
            pivot_idx: 0,
            free: Vec::new(),
            digits: Vec::new(),
            fresh: true,
        };
        s.load_pivots();
        s
    }

    fn load_pivots(&mut self) {
        self.free.clear();
        if let Some(p) = self.pivots.get(self.pivot_idx) {
            for (row, &pc) in p.iter().enumerate() {
                for c in pc + 1..self.n {
                    if !p.contains(&c) {
                        self.free.push((row, c));
                    }
                }
            }
        }
        self.digits = vec![0; self.free.len()];
        self.fresh = true;
    }

    fn current(&self) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.k, self.n);
        for (row, &pc) in self.pivots[self.pivot_idx].iter().enumerate() {
            m.set(row, pc, 1);
        }
        for (&(r, c), &v) in self.free.iter().zip(&self.digits) {
            m.set(r, c, v);
        }
        m
    }
}

impl Iterator for Subspaces {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        loop {
            if self.pivot_idx >= self.pivots.len() {
                return None;
            }
            if self.fresh {
                self.fresh = false;
                return Some(self.current());
            }
            if odometer_step(&mut self.digits, self.field.q() as u8) {
                return Some(self.current());
            }
            self.pivot_idx += 1;
            self.load_pivots();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts_match_gaussian_binomial() {
        for q in [2u32, 3, 5] {
            let f = PrimeField::new(q).unwrap();
            for n in 0..=4 {
                for k in 0..=n + 1 {
                    let list: Vec<Matrix> = Subspaces::new(f, n, k).collect();
                    assert_eq!(BigUint::from(list.len()), gaussian_binomial(q, n, k), "q={q} n={n} k={k}");
                    for m in &list {
                        assert_eq!(m.rank(), k);
                        assert_eq!(&m.rref().0, m);
                    }
                }
            }
        }
    }

    #[test]
    fn subspaces_are_distinct() {
        // compare spans as sets of vectors
        let f = PrimeField::new(3).unwrap();
        let mut seen = HashSet::new();
        for m in Subspaces::new(f, 3, 2) {
            let mut span = Vec::new();
            for a in 0..3u8 {
                for b in 0..3u8 {
                    let v: Vec<u8> = (0..3)
                        .map(|c| f.add(f.mul(a, m.get(0, c)), f.mul(b, m.get(1, c))))
                        .collect();
                    span.push(v);
                }
            }
            span.sort();
            assert!(seen.insert(span));
        }
        assert_eq!(seen.len(), 13);
    }

    #[test]
    fn projective_points_order() {
        let f = PrimeField::new(3).unwrap();
        let pts = projective_points(f, 2);
        assert_eq!(pts, vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![1, 2]]);
        assert_eq!(projective_points(f, 3).len(), 13);
        assert!(projective_points(f, 0).is_empty());
    }
}
