//! Independent oracles: straightforward enumerations that share no code with
//! the library routines they check.
#![allow(dead_code)]

use num_complex::Complex64;
use ranklab::{PolyMap, Tensor};

/// Advances a base-`q` counter; false after wrapping.
pub fn step(digits: &mut [u8], q: u8) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

fn character(v: u64, q: u32) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (v % q as u64) as f64 / q as f64)
}

/// `E_{x_1, …, x_d} ω^{T(x_1, …, x_d)}` by summing over every tuple.
pub fn character_sum_bias(t: &Tensor) -> f64 {
    let q = t.field().q();
    let dims = t.dims().to_vec();
    let total: usize = dims.iter().sum();
    let mut digits = vec![0u8; total];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    loop {
        let mut xs = Vec::with_capacity(dims.len());
        let mut at = 0;
        for &n in &dims {
            xs.push(digits[at..at + n].to_vec());
            at += n;
        }
        // T(x) = Σ_idx T[idx] Π x_a[idx_a]
        let mut value = 0u64;
        let mut idx = vec![0usize; dims.len()];
        'outer: loop {
            let e = t.get(&idx).unwrap() as u64;
            let prod = idx.iter().enumerate().fold(e, |acc, (a, &i)| acc * xs[a][i] as u64 % q as u64);
            value = (value + prod) % q as u64;
            for a in (0..dims.len()).rev() {
                idx[a] += 1;
                if idx[a] < dims[a] {
                    continue 'outer;
                }
                idx[a] = 0;
            }
            break;
        }
        sum += character(value, q);
        count += 1;
        if !step(&mut digits, q as u8) {
            break;
        }
    }
    assert!(sum.im.abs() < 1e-9 * count as f64, "bias must be real");
    sum.re / count as f64
}

/// `‖e(P)‖_{U^d}^{2^d} = E_{x, h_1..h_d} e(Δ_{h_1} ⋯ Δ_{h_d} P(x))` for a
/// scalar map.
pub fn gowers_norm_power(p: &PolyMap, d: usize) -> f64 {
    let q = p.field().q();
    let n = p.n();
    let mut digits = vec![0u8; n * (d + 1)];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    loop {
        let x = &digits[..n];
        let mut delta: i64 = 0;
        for s in 0u32..1 << d {
            let mut point: Vec<u64> = x.iter().map(|&v| v as u64).collect();
            for j in 0..d {
                if s >> j & 1 == 1 {
                    for i in 0..n {
                        point[i] += digits[n * (j + 1) + i] as u64;
                    }
                }
            }
            let pt: Vec<u8> = point.iter().map(|&v| (v % q as u64) as u8).collect();
            let v = p.eval(&pt).unwrap()[0] as i64;
            let sign = if (d as u32 - s.count_ones()).is_multiple_of(2) { 1 } else { -1 };
            delta += sign * v;
        }
        sum += character(delta.rem_euclid(q as i64) as u64, q);
        count += 1;
        if !step(&mut digits, q as u8) {
            break;
        }
    }
    sum.re / count as f64
}

/// `Pr[Bin(n, p) >= k]`.
pub fn binomial_tail(n: usize, p: f64, k: usize) -> f64 {
    let mut total = 0.0;
    let mut coeff = 1.0f64;
    for j in 0..=n {
        if j > 0 {
            coeff *= (n - j + 1) as f64 / j as f64;
        }
        if j >= k {
            total += coeff * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
        }
    }
    total
}

/// The four-term difference `φ(x_{I∪J}) − φ(x_I) − φ(x_J) + φ(0)` as a truth
/// table indexed by `Σ x_i q^i`.
pub fn four_term_bracket(phi: &PolyMap, i_set: &[usize], j_set: &[usize]) -> Vec<Vec<u8>> {
    let q = phi.field().q();
    let n = phi.n();
    let mask = |x: &[u8], keep: &dyn Fn(usize) -> bool| -> Vec<u8> {
        (0..n).map(|i| if keep(i) { x[i] } else { 0 }).collect()
    };
    let mut tables = vec![Vec::new(); phi.k()];
    let mut x = vec![0u8; n];
    loop {
        let both = phi.eval(&mask(&x, &|i| i_set.contains(&i) || j_set.contains(&i))).unwrap();
        let only_i = phi.eval(&mask(&x, &|i| i_set.contains(&i))).unwrap();
        let only_j = phi.eval(&mask(&x, &|i| j_set.contains(&i))).unwrap();
        let zero = phi.eval(&vec![0; n]).unwrap();
        for c in 0..phi.k() {
            let v = both[c] as i64 - only_i[c] as i64 - only_j[c] as i64 + zero[c] as i64;
            tables[c].push(v.rem_euclid(q as i64) as u8);
        }
        if !step(&mut x, q as u8) {
            break;
        }
    }
    tables
}
