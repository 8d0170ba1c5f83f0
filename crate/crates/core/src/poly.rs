//! Polynomial maps `GF(q)^n → GF(q)^k` in reduced form (every exponent
//! below `q`), so that maps and functions correspond one to one.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::rref_in_place;
use crate::tensor::Tensor;

/// One monomial `coeff · Π x_i^exps[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub exps: Vec<u8>,
    pub coeff: u8,
}

impl Term {
    pub fn degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    /// Variables with a positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i)
    }
}

/// A tuple of `k` reduced polynomials in `n` variables of degree at most `d`.
/// Terms are sorted by exponent vector, distinct, and have nonzero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMap {
    field: PrimeField,
    n: usize,
    k: usize,
    d: usize,
    outputs: Vec<Vec<Term>>,
}

/// Reduced exponent vectors in `n` variables of total degree `<= max_deg`,
/// in lexicographic order.
pub fn reduced_monomials(q: u32, n: usize, max_deg: usize) -> Vec<Vec<u8>> {
    fn rec(q: u32, n: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..q.min(left as u32 + 1) {
            cur.push(e as u8);
            rec(q, n, left - e as usize, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, n, max_deg, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Coordinates of the point with index `idx = Σ x_i q^i`.
pub fn point_of_index(mut idx: usize, n: usize, q: u32) -> Vec<u8> {
    (0..n)
        .map(|_| {
            let v = (idx % q as usize) as u8;
            idx /= q as usize;
            v
        })
        .collect()
}

fn reduce_exponent(e: u32, q: u32) -> u8 {
    if e < q {
        e as u8
    } else {
        // x^q = x as functions on GF(q)
        ((e - 1) % (q - 1) + 1) as u8
    }
}

impl PolyMap {
    /// Builds and canonicalises a map from raw `(exponents, coefficient)`
    /// terms, one list per output.
    pub fn new(field: PrimeField, n: usize, d: usize, outputs: Vec<Vec<(Vec<u32>, u64)>>) -> Result<Self> {
        let q = field.q();
        let k = outputs.len();
        let mut canon = Vec::with_capacity(k);
        for terms in outputs {
            let mut acc: BTreeMap<Vec<u8>, u8> = BTreeMap::new();
            for (exps, c) in terms {
                if exps.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "monomial with {} exponents in {n} variables",
                        exps.len()
                    )));
                }
                let key: Vec<u8> = exps.iter().map(|&e| reduce_exponent(e, q)).collect();
                let slot = acc.entry(key).or_insert(0);
                *slot = field.add(*slot, field.reduce(c));
            }
            canon.push(
                acc.into_iter()
                    .filter(|&(_, c)| c != 0)
                    .map(|(exps, coeff)| Term { exps, coeff })
                    .collect::<Vec<_>>(),
            );
        }
        let p = PolyMap {
            field,
            n,
            k,
            d,
            outputs: canon,
        };
        let deg = p.degree();
        if deg > d {
            return Err(Error::DegreeTooHigh { got: deg, bound: d });
        }
        Ok(p)
    }

    fn from_canonical(field: PrimeField, n: usize, d: usize, outputs: Vec<Vec<Term>>) -> Self {
        PolyMap {
            field,
            n,
            k: outputs.len(),
            d,
            outputs,
        }
    }

    pub fn zero(field: PrimeField, n: usize, k: usize, d: usize) -> Self {
        PolyMap::from_canonical(field, n, d, vec![Vec::new(); k])
    }

    /// The constant map with the given value.
    pub fn constant(field: PrimeField, n: usize, d: usize, values: &[u8]) -> Self {
        let outputs = values
            .iter()
            .map(|&v| {
                let v = field.reduce(v as u64);
                if v == 0 {
                    Vec::new()
                } else {
                    vec![Term {
                        exps: vec![0; n],
                        coeff: v,
                    }]
                }
            })
            .collect();
        PolyMap::from_canonical(field, n, d, outputs)
    }

    /// Every reduced monomial of degree `<= d` gets an independent uniform
    /// coefficient.
    pub fn random<R: Rng + ?Sized>(field: PrimeField, n: usize, k: usize, d: usize, rng: &mut R) -> Self {
        let monos = reduced_monomials(field.q(), n, d);
        let outputs = (0..k)
            .map(|_| {
                monos
                    .iter()
                    .filter_map(|m| {
                        let c = rng.random_range(0..field.q()) as u8;
                        (c != 0).then(|| Term { exps: m.clone(), coeff: c })
                    })
                    .collect()
            })
            .collect();
        PolyMap::from_canonical(field, n, d, outputs)
    }

    pub fn random_seeded(field: PrimeField, n: usize, k: usize, d: usize, seed: u64) -> Self {
        PolyMap::random(field, n, k, d, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Interpolates the unique reduced map with the given truth tables
    /// (indexed by `Σ x_i q^i`). The degree bound is the actual degree unless
    /// `d` is given.
    pub fn from_truth_tables(field: PrimeField, n: usize, tables: &[Vec<u8>], d: Option<usize>) -> Result<Self> {
        let q = field.q();
        let size = (q as usize).pow(n as u32);
        let w = inverse_vandermonde(field);
        let mut outputs = Vec::with_capacity(tables.len());
        for table in tables {
            if table.len() != size {
                return Err(Error::DimensionMismatch(format!(
                    "truth table of length {} for {size} points",
                    table.len()
                )));
            }
            let mut coeffs = table.clone();
            transform(field, n, &mut coeffs, &w);
            let terms = coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| Term {
                    exps: point_of_index(i, n, q),
                    coeff: c,
                })
                .collect::<Vec<_>>();
            let mut terms = terms;
            terms.sort();
            outputs.push(terms);
        }
        let mut p = PolyMap::from_canonical(field, n, 0, outputs);
        let deg = p.degree();
        p.d = match d {
            Some(bound) if deg > bound => return Err(Error::DegreeTooHigh { got: deg, bound }),
            Some(bound) => bound,
            None => deg,
        };
        Ok(p)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The declared degree bound.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn outputs(&self) -> &[Vec<Term>] {
        &self.outputs
    }

    /// Degree of the reduced form (0 for the zero map).
    pub fn degree(&self) -> usize {
        self.outputs.iter().flatten().map(Term::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.outputs.iter().all(Vec::is_empty)
    }

    /// Replaces the degree bound, which must not be below the actual degree.
    pub fn with_degree_bound(mut self, d: usize) -> Result<Self> {
        let deg = self.degree();
        if deg > d {
            return Err(Error::DegreeTooHigh { got: deg, bound: d });
        }
        self.d = d;
        Ok(self)
    }

    pub fn eval(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!("{} coordinates for {} variables", x.len(), self.n)));
        }
        let x: Vec<u8> = x.iter().map(|&v| self.field.reduce(v as u64)).collect();
        Ok(self.eval_reduced(&x))
    }

    fn eval_reduced(&self, x: &[u8]) -> Vec<u8> {
        let f = self.field;
        self.outputs
            .iter()
            .map(|terms| {
                terms.iter().fold(0u8, |acc, t| {
                    let m = t
                        .exps
                        .iter()
                        .zip(x)
                        .fold(t.coeff, |m, (&e, &v)| if e == 0 { m } else { f.mul(m, f.pow(v, e as u64)) });
                    f.add(acc, m)
                })
            })
            .collect()
    }

    /// `k` tables of length `q^n`, indexed by `Σ x_i q^i`.
    pub fn truth_tables(&self) -> Vec<Vec<u8>> {
        let f = self.field;
        let q = f.q() as usize;
        let size = q.pow(self.n as u32);
        let mut tables = vec![vec![0u8; size]; self.k];
        // powers[v][e] = v^e
        let powers: Vec<Vec<u8>> = (0..q).map(|v| (0..q).map(|e| f.pow(v as u8, e as u64)).collect()).collect();
        let mut x = vec![0u8; self.n];
        for idx in 0..size {
            for (table, terms) in tables.iter_mut().zip(&self.outputs) {
                let mut acc = 0u8;
                for t in terms {
                    let mut m = t.coeff;
                    for (&e, &v) in t.exps.iter().zip(&x) {
                        if e != 0 {
                            m = f.mul(m, powers[v as usize][e as usize]);
                        }
                    }
                    acc = f.add(acc, m);
                }
                table[idx] = acc;
            }
            for v in x.iter_mut() {
                *v += 1;
                if (*v as usize) < q {
                    break;
                }
                *v = 0;
            }
        }
        tables
    }

    fn check_compatible(&self, other: &PolyMap) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.q(), other.field.q()));
        }
        if self.n != other.n || self.k != other.k {
            return Err(Error::DimensionMismatch(format!(
                "maps {}→{} and {}→{}",
                self.n, self.k, other.n, other.k
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyMap) -> Result<PolyMap> {
        self.check_compatible(other)?;
        let f = self.field;
        let outputs = self
            .outputs
            .iter()
            .zip(&other.outputs)
            .map(|(a, b)| {
                let mut acc: BTreeMap<&[u8], u8> = BTreeMap::new();
                for t in a.iter().chain(b) {
                    let slot = acc.entry(&t.exps).or_insert(0);
                    *slot = f.add(*slot, t.coeff);
                }
                acc.into_iter()
                    .filter(|&(_, c)| c != 0)
                    .map(|(e, coeff)| Term { exps: e.to_vec(), coeff })
                    .collect()
            })
            .collect();
        Ok(PolyMap::from_canonical(f, self.n, self.d.max(other.d), outputs))
    }

    pub fn neg(&self) -> PolyMap {
        let f = self.field;
        let outputs = self
            .outputs
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| Term {
                        exps: t.exps.clone(),
                        coeff: f.neg(t.coeff),
                    })
                    .collect()
            })
            .collect();
        PolyMap::from_canonical(f, self.n, self.d, outputs)
    }

    pub fn sub(&self, other: &PolyMap) -> Result<PolyMap> {
        self.add(&other.neg())
    }

    fn filter_terms(&self, keep: impl Fn(&Term) -> bool) -> PolyMap {
        let outputs = self
            .outputs
            .iter()
            .map(|terms| terms.iter().filter(|t| keep(t)).cloned().collect())
            .collect();
        PolyMap::from_canonical(self.field, self.n, self.d, outputs)
    }

    fn membership(&self, set: &[usize]) -> Result<Vec<bool>> {
        let mut inside = vec![false; self.n];
        for &i in set {
            if i >= self.n {
                return Err(Error::IndexOutOfRange(format!("variable {i} of {}", self.n)));
            }
            inside[i] = true;
        }
        Ok(inside)
    }

    /// The map `x ↦ φ(x̄)` on all `n` variables, where `x̄` agrees with `x` on
    /// `set` and is zero elsewhere.
    pub fn zero_outside(&self, set: &[usize]) -> Result<PolyMap> {
        let inside = self.membership(set)?;
        Ok(self.filter_terms(|t| t.support().all(|i| inside[i])))
    }

    /// `φ|_I` as a map in the `|I|` variables of `I`, renumbered in increasing
    /// order.
    pub fn restrict(&self, set: &[usize]) -> Result<PolyMap> {
        let inside = self.membership(set)?;
        let kept: Vec<usize> = (0..self.n).filter(|&i| inside[i]).collect();
        let outputs = self
            .outputs
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter(|t| t.support().all(|i| inside[i]))
                    .map(|t| Term {
                        exps: kept.iter().map(|&i| t.exps[i]).collect(),
                        coeff: t.coeff,
                    })
                    .collect()
            })
            .collect();
        Ok(PolyMap::from_canonical(self.field, kept.len(), self.d, outputs))
    }

    /// `φ[I, J] = φ|_{I∪J} − φ|_I − φ|_J + φ(0)` on all `n` variables.
    ///
    /// Also computed as the sum of monomials supported in `I ∪ J` that meet
    /// both `I` and `J`; disagreement is reported as an error.
    pub fn bracket(&self, i_set: &[usize], j_set: &[usize]) -> Result<PolyMap> {
        let in_i = self.membership(i_set)?;
        let in_j = self.membership(j_set)?;
        if in_i.iter().zip(&in_j).any(|(&a, &b)| a && b) {
            return Err(Error::OverlappingSets);
        }
        let union: Vec<usize> = (0..self.n).filter(|&v| in_i[v] || in_j[v]).collect();
        let at_zero = self.eval_reduced(&vec![0; self.n]);
        let identity = self
            .zero_outside(&union)?
            .sub(&self.zero_outside(i_set)?)?
            .sub(&self.zero_outside(j_set)?)?
            .add(&PolyMap::constant(self.field, self.n, self.d, &at_zero))?;
        let mixed = self.filter_terms(|t| {
            t.support().all(|v| in_i[v] || in_j[v]) && t.support().any(|v| in_i[v]) && t.support().any(|v| in_j[v])
        });
        if identity != mixed {
            return Err(Error::InternalInconsistency(
                "bracket identity disagrees with the mixed-monomial sum".into(),
            ));
        }
        Ok(identity)
    }

    /// Serialises to the `poly v1` format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("poly v1\n");
        let _ = writeln!(s, "q={} n={} k={} d={}", self.field.q(), self.n, self.k, self.d);
        for (j, terms) in self.outputs.iter().enumerate() {
            let _ = write!(s, "out {j}: ");
            if terms.is_empty() {
                s.push('0');
            }
            for (idx, t) in terms.iter().enumerate() {
                if idx > 0 {
                    s.push_str(" + ");
                }
                let mut factors = vec![t.coeff.to_string()];
                for (i, &e) in t.exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(format!("x{i}")),
                        _ => factors.push(format!("x{i}^{e}")),
                    }
                }
                s.push_str(&factors.join("*"));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PolyMap> {
        let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (l0, header) = lines.next().ok_or_else(|| perr(0, "empty input".into()))?;
        if header.trim() != "poly v1" {
            return Err(perr(l0, "expected `poly v1`".into()));
        }
        let (l1, shape) = lines.next().ok_or_else(|| perr(l0 + 1, "missing shape line".into()))?;
        let mut vals: BTreeMap<&str, usize> = BTreeMap::new();
        for tok in shape.split_whitespace() {
            let (key, v) = tok.split_once('=').ok_or_else(|| perr(l1, format!("expected key=value, got `{tok}`")))?;
            if !["q", "n", "k", "d"].contains(&key) {
                return Err(perr(l1, format!("unknown key `{key}`")));
            }
            vals.insert(key, v.parse().map_err(|_| perr(l1, format!("bad value for {key}")))?);
        }
        let get = |key: &str| vals.get(key).copied().ok_or_else(|| perr(l1, format!("missing {key}")));
        let (q, n, k, d) = (get("q")?, get("n")?, get("k")?, get("d")?);
        let field = PrimeField::new(q as u32).map_err(|e| perr(l1, e.to_string()))?;
        let mut outputs: Vec<Option<Vec<(Vec<u32>, u64)>>> = vec![None; k];
        for (ln, line) in lines {
            let rest = line
                .trim()
                .strip_prefix("out")
                .ok_or_else(|| perr(ln, "expected `out <j>: ...`".into()))?;
            let (j, body) = rest.split_once(':').ok_or_else(|| perr(ln, "missing `:`".into()))?;
            let j: usize = j.trim().parse().map_err(|_| perr(ln, format!("bad output index `{}`", j.trim())))?;
            if j >= k {
                return Err(perr(ln, format!("output {j} out of range for k={k}")));
            }
            if outputs[j].is_some() {
                return Err(perr(ln, format!("output {j} given twice")));
            }
            let mut terms = Vec::new();
            for term in body.split('+') {
                let term = term.trim();
                if term.is_empty() {
                    return Err(perr(ln, "empty term".into()));
                }
                let mut exps = vec![0u32; n];
                let mut coeff = 1u64;
                for factor in term.split('*').map(str::trim) {
                    if let Some(var) = factor.strip_prefix('x') {
                        let (i, e) = match var.split_once('^') {
                            Some((i, e)) => (i, e.parse::<u32>().map_err(|_| perr(ln, format!("bad exponent in `{factor}`")))?),
                            None => (var, 1),
                        };
                        let i: usize = i.parse().map_err(|_| perr(ln, format!("bad variable `{factor}`")))?;
                        if i >= n {
                            return Err(perr(ln, format!("variable x{i} out of range for n={n}")));
                        }
                        exps[i] += e;
                    } else {
                        let c: u64 = factor.parse().map_err(|_| perr(ln, format!("bad factor `{factor}`")))?;
                        coeff = coeff * (c % q as u64) % q as u64;
                    }
                }
                terms.push((exps, coeff));
            }
            outputs[j] = Some(terms);
        }
        let last = text.lines().count();
        let outputs = outputs
            .into_iter()
            .enumerate()
            .map(|(j, o)| o.ok_or_else(|| perr(last, format!("missing output {j}"))))
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(field, n, d, outputs).map_err(|e| match e {
            Error::DegreeTooHigh { .. } => perr(last.saturating_sub(1), e.to_string()),
            other => other,
        })
    }
}

/// `W` with `Σ_x W[e][x] x^{e'} = [e = e']` for `x, e, e' ∈ GF(q)`.
fn inverse_vandermonde(field: PrimeField) -> Vec<Vec<u8>> {
    let q = field.q() as usize;
    // rref([V | I]) = [I | V^{-1}] with V[x][e] = x^e, 0^0 = 1
    let mut aug = vec![0u8; q * 2 * q];
    for x in 0..q {
        for e in 0..q {
            aug[x * 2 * q + e] = field.pow(x as u8, e as u64);
        }
        aug[x * 2 * q + q + x] = 1;
    }
    rref_in_place(field, q, 2 * q, &mut aug);
    (0..q).map(|e| aug[e * 2 * q + q..(e + 1) * 2 * q].to_vec()).collect()
}

fn transform(field: PrimeField, n: usize, data: &mut [u8], w: &[Vec<u8>]) {
    let q = field.q() as usize;
    let qq = q as u64;
    let mut buf = vec![0u8; q];
    for var in 0..n {
        let stride = q.pow(var as u32);
        let block = stride * q;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (e, slot) in buf.iter_mut().enumerate() {
                    let mut acc = 0u64;
                    for x in 0..q {
                        acc += w[e][x] as u64 * data[base + off + x * stride] as u64;
                    }
                    *slot = (acc % qq) as u8;
                }
                for (x, &v) in buf.iter().enumerate() {
                    data[base + off + x * stride] = v;
                }
            }
        }
    }
}

/// The order-`d` tensor of the `d`-fold difference
/// `T(h_1, …, h_d) = Σ_{S ⊆ [d]} (−1)^{d−|S|} P(Σ_{j∈S} h_j)`, tabulated on
/// basis vectors. The result is checked to be multilinear on 100 random
/// argument tuples.
pub fn derivative_tensor(p: &PolyMap, d: usize) -> Result<Tensor> {
    if p.k != 1 {
        return Err(Error::DimensionMismatch(format!("derivative tensor needs k = 1, got {}", p.k)));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("order must be >= 1".into()));
    }
    let field = p.field;
    if field.q() as usize <= d {
        return Err(Error::CharacteristicTooSmall { q: field.q(), d });
    }
    let deg = p.degree();
    if deg > d {
        return Err(Error::DegreeTooHigh { got: deg, bound: d });
    }
    let n = p.n;
    let diff = |hs: &[Vec<u8>]| -> u8 {
        let mut acc = 0u8;
        for mask in 0u32..(1 << d) {
            let mut x = vec![0u8; n];
            for (j, h) in hs.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    for (xi, &hi) in x.iter_mut().zip(h) {
                        *xi = field.add(*xi, hi);
                    }
                }
            }
            let v = p.eval_reduced(&x)[0];
            let sign_neg = (d - mask.count_ones() as usize) % 2 == 1;
            acc = if sign_neg { field.sub(acc, v) } else { field.add(acc, v) };
        }
        acc
    };
    let t = Tensor::from_fn(field, vec![n; d], |idx| {
        let hs: Vec<Vec<u8>> = idx
            .iter()
            .map(|&i| {
                let mut e = vec![0u8; n];
                e[i] = 1;
                e
            })
            .collect();
        diff(&hs) as u64
    });
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d75_6c74_696c_696e);
    for trial in 0..100 {
        let hs: Vec<Vec<u8>> = (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(0..field.q()) as u8).collect())
            .collect();
        if diff(&hs) != t.eval_multilinear(&hs)? {
            return Err(Error::NotMultilinear(format!("random tuple {trial}")));
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u32) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn parse(s: &str) -> PolyMap {
        PolyMap::from_text(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        let c = PolyMap::constant(gf(5), 3, 0, &[4]);
        assert_eq!(c.eval(&[1, 2, 3]).unwrap(), vec![4]);
        let p = parse("poly v1\nq=2 n=2 k=1 d=2\nout 0: x0*x1\n");
        assert_eq!(p.eval(&[1, 1]).unwrap(), vec![1]);
        let p = parse("poly v1\nq=3 n=2 k=1 d=2\nout 0: 2*x0^2 + x1\n");
        assert_eq!(p.eval(&[2, 1]).unwrap(), vec![0]);
        assert!(matches!(p.eval(&[1]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn exponents_reduce() {
        let p = parse("poly v1\nq=3 n=1 k=1 d=2\nout 0: x0^3 + x0^4\n");
        // x^3 = x, x^4 = x^2
        assert_eq!(p, parse("poly v1\nq=3 n=1 k=1 d=2\nout 0: x0 + x0^2\n"));
        let p = parse("poly v1\nq=2 n=2 k=1 d=1\nout 0: x0*x0 + x0\n");
        assert!(p.is_zero());
    }

    #[test]
    fn degree_bound_enforced() {
        let r = PolyMap::from_text("poly v1\nq=5 n=2 k=1 d=1\nout 0: x0*x1\n");
        assert!(matches!(r, Err(Error::Parse { .. })));
        let r = PolyMap::new(gf(5), 2, 1, vec![vec![(vec![1, 1], 1)]]);
        assert!(matches!(r, Err(Error::DegreeTooHigh { got: 2, bound: 1 })));
    }

    #[test]
    fn restrict_examples() {
        let p = parse("poly v1\nq=2 n=3 k=1 d=2\nout 0: x0*x1 + x2\n");
        assert_eq!(p.restrict(&[0, 1, 2]).unwrap(), p);
        let empty = p.restrict(&[]).unwrap();
        assert_eq!(empty.n(), 0);
        assert_eq!(empty.eval(&[]).unwrap(), p.eval(&[0, 0, 0]).unwrap());
        assert_eq!(p.restrict(&[0, 1]).unwrap(), parse("poly v1\nq=2 n=2 k=1 d=2\nout 0: x0*x1\n"));
        assert!(matches!(p.restrict(&[3]), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn bracket_examples() {
        let p = parse("poly v1\nq=2 n=2 k=1 d=2\nout 0: x0 + x1 + 1\n");
        assert!(p.bracket(&[0], &[1]).unwrap().is_zero());
        let m = parse("poly v1\nq=2 n=2 k=1 d=2\nout 0: x0*x1\n");
        assert_eq!(m.bracket(&[0], &[1]).unwrap(), m);
        let p = parse("poly v1\nq=2 n=2 k=1 d=2\nout 0: x0*x1 + x0 + x1 + 1\n");
        assert_eq!(p.bracket(&[0], &[1]).unwrap(), m);
        assert!(matches!(p.bracket(&[0, 1], &[1]), Err(Error::OverlappingSets)));
    }

    #[test]
    fn truth_table_and_interpolation() {
        let f = gf(3);
        let p = PolyMap::random_seeded(f, 3, 2, 4, 11);
        let tables = p.truth_tables();
        let back = PolyMap::from_truth_tables(f, 3, &tables, Some(4)).unwrap();
        assert_eq!(back, p);
        for (idx, x) in (0..27).map(|i| (i, point_of_index(i, 3, 3))) {
            let v = p.eval(&x).unwrap();
            assert_eq!(v, vec![tables[0][idx], tables[1][idx]]);
        }
    }

    #[test]
    fn derivative_tensor_examples() {
        let f3 = gf(3);
        let p = parse("poly v1\nq=3 n=2 k=1 d=2\nout 0: x0*x1\n");
        let t = derivative_tensor(&p, 2).unwrap();
        assert_eq!(t.entries(), &[0, 1, 1, 0]);
        let lin = parse("poly v1\nq=3 n=3 k=1 d=2\nout 0: x0 + 2*x2 + 1\n");
        assert!(derivative_tensor(&lin, 2).unwrap().is_zero());
        let c = PolyMap::constant(f3, 2, 2, &[2]);
        assert!(derivative_tensor(&c, 2).unwrap().is_zero());
        let q2 = parse("poly v1\nq=2 n=2 k=1 d=2\nout 0: x0*x1\n");
        assert!(matches!(derivative_tensor(&q2, 2), Err(Error::CharacteristicTooSmall { q: 2, d: 2 })));
        let cubic = parse("poly v1\nq=5 n=2 k=1 d=3\nout 0: x0^3\n");
        assert!(matches!(derivative_tensor(&cubic, 2), Err(Error::DegreeTooHigh { got: 3, bound: 2 })));
    }

    #[test]
    fn derivative_tensor_of_cube() {
        // Δ³ of x^3 is 6 h1 h2 h3
        let f = gf(7);
        let p = parse("poly v1\nq=7 n=1 k=1 d=3\nout 0: x0^3\n");
        let t = derivative_tensor(&p, 3).unwrap();
        assert_eq!(t.entries(), &[f.reduce(6)]);
    }

    #[test]
    fn text_round_trip_examples() {
        let p = parse("poly v1\nq=5 n=3 k=2 d=3\nout 1: 3*x0*x2^2 + 4\nout 0: 0\n");
        assert_eq!(p.to_text(), "poly v1\nq=5 n=3 k=2 d=3\nout 0: 0\nout 1: 4 + 3*x0*x2^2\n");
        assert_eq!(parse(&p.to_text()), p);
        assert!(matches!(
            PolyMap::from_text("poly v1\nq=5 n=3 k=2 d=3\nout 0: x3\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(PolyMap::from_text("poly v1\nq=5 n=3 k=2 d=3\nout 0: x1\n").is_err());
    }

    fn arb_poly() -> impl Strategy<Value = PolyMap> {
        (prop::sample::select(vec![2u32, 3, 5]), 0usize..5, 1usize..3, 0usize..4, any::<u64>())
            .prop_map(|(q, n, k, d, seed)| PolyMap::random_seeded(PrimeField::new(q).unwrap(), n, k, d, seed))
    }

    fn subset(n: usize, mask: u32) -> Vec<usize> {
        (0..n).filter(|i| mask >> i & 1 == 1).collect()
    }

    proptest! {
        #[test]
        fn restriction_agrees_with_masked_evaluation(p in arb_poly(), mask in any::<u32>()) {
            let set = subset(p.n(), mask);
            let r = p.restrict(&set).unwrap();
            let z = p.zero_outside(&set).unwrap();
            let q = p.field().q();
            for idx in 0..(q as usize).pow(set.len() as u32) {
                let y = point_of_index(idx, set.len(), q);
                let mut bar = vec![0u8; p.n()];
                for (&i, &v) in set.iter().zip(&y) {
                    bar[i] = v;
                }
                prop_assert_eq!(r.eval(&y).unwrap(), p.eval(&bar).unwrap());
                prop_assert_eq!(z.eval(&bar).unwrap(), p.eval(&bar).unwrap());
            }
        }

        #[test]
        fn nested_zero_outside_intersects(p in arb_poly(), a in any::<u32>(), b in any::<u32>()) {
            let (i, j) = (subset(p.n(), a), subset(p.n(), b));
            let both = subset(p.n(), a & b);
            prop_assert_eq!(
                p.zero_outside(&j).unwrap().zero_outside(&i).unwrap(),
                p.zero_outside(&both).unwrap()
            );
        }

        #[test]
        fn text_round_trip(p in arb_poly()) {
            prop_assert_eq!(PolyMap::from_text(&p.to_text()).unwrap(), p);
        }

        #[test]
        fn interpolation_inverts_tables(p in arb_poly()) {
            let back = PolyMap::from_truth_tables(p.field(), p.n(), &p.truth_tables(), Some(p.d())).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn bracket_never_inconsistent(p in arb_poly(), a in any::<u32>(), b in any::<u32>()) {
            let (i, j) = (subset(p.n(), a & !b), subset(p.n(), b));
            prop_assert!(p.bracket(&i, &j).is_ok());
        }

        #[test]
        fn derivative_tensor_is_symmetric(n in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
            let f = PrimeField::new(5).unwrap();
            let p = PolyMap::random_seeded(f, n, 1, d, seed);
            let t = derivative_tensor(&p, d).unwrap();
            let perm: Vec<usize> = (0..d).rev().collect();
            prop_assert_eq!(t.permute_axes(&perm).unwrap(), t.clone());
            if d >= 2 {
                let mut swap: Vec<usize> = (0..d).collect();
                swap.swap(0, 1);
                prop_assert_eq!(t.permute_axes(&swap).unwrap(), t);
            }
        }
    }
}
