//! Dense d-tensors over GF(q), the special tensors used by the experiments,
//! restriction, slicing, flattening and the `tensor v1` text format.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};
use crate::linalg::Matrix;

/// A map `X_1 × … × X_d → GF(q)` stored densely in row-major order (last
/// axis fastest). Axes of length zero are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tensor {
    field: PrimeField,
    dims: Vec<usize>,
    entries: Vec<u8>,
}

/// One strictly increasing index list per axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSubsetFamily {
    sets: Vec<Vec<usize>>,
}

impl IndexSubsetFamily {
    /// Validates the sets against `dims`.
    pub fn new(sets: Vec<Vec<usize>>, dims: &[usize]) -> Result<Self> {
        if sets.len() != dims.len() {
            return Err(Error::IndexOutOfRange(format!(
                "{} index sets for an order-{} tensor",
                sets.len(),
                dims.len()
            )));
        }
        for (axis, (set, &n)) in sets.iter().zip(dims).enumerate() {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::IndexOutOfRange(format!(
                    "axis {axis}: indices must be strictly increasing"
                )));
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange(format!("axis {axis}: index {bad} >= {n}")));
            }
        }
        Ok(IndexSubsetFamily { sets })
    }

    pub fn full(dims: &[usize]) -> Self {
        IndexSubsetFamily {
            sets: dims.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    /// The same subset `set` on every one of `d` axes, as in `I^d`.
    pub fn cubic(set: Vec<usize>, d: usize) -> Self {
        IndexSubsetFamily {
            sets: vec![set; d],
        }
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    /// Maps `inner`, given in the coordinates of a restriction by `self`,
    /// back to coordinates of the original tensor.
    pub fn compose(&self, inner: &IndexSubsetFamily) -> Result<IndexSubsetFamily> {
        let dims = self.sizes();
        let inner = IndexSubsetFamily::new(inner.sets.clone(), &dims)?;
        Ok(IndexSubsetFamily {
            sets: self
                .sets
                .iter()
                .zip(&inner.sets)
                .map(|(outer, inn)| inn.iter().map(|&i| outer[i]).collect())
                .collect(),
        })
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Iterates all multi-indices of `dims` in row-major order.
fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0; dims.len()];
    loop {
        f(&idx);
        let mut a = dims.len();
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

impl Tensor {
    pub fn new(field: PrimeField, dims: Vec<usize>, entries: Vec<u8>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("a tensor needs order >= 1".into()));
        }
        let len: usize = dims.iter().product();
        if entries.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for dims {:?} (expected {len})",
                entries.len(),
                dims
            )));
        }
        if let Some(v) = entries.iter().find(|&&v| v as u32 >= field.q()) {
            return Err(Error::InvalidParameter(format!(
                "entry {v} not reduced mod {}",
                field.q()
            )));
        }
        Ok(Tensor {
            field,
            dims,
            entries,
        })
    }

    pub fn zeros(field: PrimeField, dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Tensor {
            field,
            dims,
            entries: vec![0; len],
        }
    }

    pub fn from_fn(field: PrimeField, dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> u64) -> Self {
        let mut entries = Vec::with_capacity(dims.iter().product());
        for_each_index(&dims, |idx| entries.push(field.reduce(f(idx))));
        Tensor {
            field,
            dims,
            entries,
        }
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Tensor {
            field: m.field(),
            dims: vec![m.rows(), m.cols()],
            entries: m.data().to_vec(),
        }
    }

    /// Order-2 view as a [`Matrix`].
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.order() != 2 {
            return Err(Error::WrongOrder {
                expected: "2".into(),
                got: self.order(),
            });
        }
        Matrix::new(self.field, self.dims[0], self.dims[1], self.entries.clone())
    }

    /// `T[i,…,i] = values[i]`, zero elsewhere.
    pub fn diagonal(field: PrimeField, d: usize, values: &[FieldElem]) -> Result<Self> {
        if d == 0 {
            return Err(Error::ShapeMismatch("a tensor needs order >= 1".into()));
        }
        if let Some(v) = values.iter().find(|v| v.field() != field) {
            return Err(Error::FieldMismatch(field.q(), v.field().q()));
        }
        let n = values.len();
        let mut t = Tensor::zeros(field, vec![n; d]);
        let step: usize = (0..d).map(|k| n.pow(k as u32)).sum();
        for (i, v) in values.iter().enumerate() {
            t.entries[i * step] = v.value();
        }
        Ok(t)
    }

    /// Diagonal tensor with all `n` diagonal entries equal to one.
    pub fn diagonal_ones(field: PrimeField, d: usize, n: usize) -> Self {
        Tensor::diagonal(field, d, &vec![field.one(); n]).expect("valid diagonal")
    }

    /// The `n × n × 2` tensor whose first slice along the last axis is the
    /// identity and whose second slice is all ones.
    pub fn identity_ones(field: PrimeField, n: usize) -> Self {
        Tensor::from_fn(field, vec![n, n, 2], |idx| match idx[2] {
            0 => (idx[0] == idx[1]) as u64,
            _ => 1,
        })
    }

    /// Uniform i.i.d. entries from a seeded generator.
    pub fn random(field: PrimeField, dims: Vec<usize>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::random_with(field, dims, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(field: PrimeField, dims: Vec<usize>, rng: &mut R) -> Self {
        let len = dims.iter().product();
        let entries = (0..len).map(|_| rng.random_range(0..field.q()) as u8).collect();
        Tensor {
            field,
            dims,
            entries,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0).count()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order() {
            return Err(Error::IndexOutOfRange(format!(
                "{}-index into an order-{} tensor",
                idx.len(),
                self.order()
            )));
        }
        let mut off = 0;
        for (a, (&i, &n)) in idx.iter().zip(&self.dims).enumerate() {
            if i >= n {
                return Err(Error::IndexOutOfRange(format!("axis {a}: index {i} >= {n}")));
            }
            off = off * n + i;
        }
        Ok(off)
    }

    pub fn get(&self, idx: &[usize]) -> Result<u8> {
        Ok(self.entries[self.offset(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], v: u8) -> Result<()> {
        let off = self.offset(idx)?;
        self.entries[off] = self.field.reduce(v as u64);
        Ok(())
    }

    /// The sub-tensor on `I_1 × … × I_d`.
    pub fn restrict(&self, family: &IndexSubsetFamily) -> Result<Tensor> {
        let family = IndexSubsetFamily::new(family.sets.clone(), &self.dims)?;
        Ok(self.restrict_unchecked(&family.sets))
    }

    pub(crate) fn restrict_unchecked(&self, sets: &[Vec<usize>]) -> Tensor {
        let dims: Vec<usize> = sets.iter().map(Vec::len).collect();
        let st = self.strides();
        let mut entries = Vec::with_capacity(dims.iter().product());
        for_each_index(&dims, |idx| {
            let off: usize = idx.iter().enumerate().map(|(a, &i)| sets[a][i] * st[a]).sum();
            entries.push(self.entries[off]);
        });
        Tensor {
            field: self.field,
            dims,
            entries,
        }
    }

    /// Restriction of one axis only.
    pub fn restrict_axis(&self, axis: usize, set: &[usize]) -> Result<Tensor> {
        if axis >= self.order() {
            return Err(Error::IndexOutOfRange(format!("axis {axis}")));
        }
        let mut sets: Vec<Vec<usize>> = self.dims.iter().map(|&n| (0..n).collect()).collect();
        sets[axis] = set.to_vec();
        self.restrict(&IndexSubsetFamily { sets })
    }

    /// The order-(d−1) tensor with `axis` (0-based) fixed at `u`.
    pub fn slice(&self, axis: usize, u: usize) -> Result<Tensor> {
        if self.order() < 2 {
            return Err(Error::WrongOrder {
                expected: ">= 2".into(),
                got: self.order(),
            });
        }
        if axis >= self.order() || u >= self.dims[axis] {
            return Err(Error::IndexOutOfRange(format!("slice axis {axis} at {u}")));
        }
        let r = self.restrict_axis(axis, &[u])?;
        let mut dims = r.dims;
        dims.remove(axis);
        Ok(Tensor {
            field: self.field,
            dims,
            entries: r.entries,
        })
    }

    /// Matrix with rows indexed by the axes in `axes` and columns by the rest,
    /// both in row-major order of the original axes.
    pub fn flatten(&self, axes: &[usize]) -> Result<Matrix> {
        let d = self.order();
        let mut in_rows = vec![false; d];
        for &a in axes {
            if a >= d || in_rows[a] {
                return Err(Error::InvalidAxisSet(format!("{axes:?} for order {d}")));
            }
            in_rows[a] = true;
        }
        let nrow = in_rows.iter().filter(|&&b| b).count();
        if nrow == 0 || nrow == d {
            return Err(Error::InvalidAxisSet(format!(
                "{axes:?} must be a nonempty strict subset of the {d} axes"
            )));
        }
        let row_axes: Vec<usize> = (0..d).filter(|&a| in_rows[a]).collect();
        let col_axes: Vec<usize> = (0..d).filter(|&a| !in_rows[a]).collect();
        let rows: usize = row_axes.iter().map(|&a| self.dims[a]).product();
        let cols: usize = col_axes.iter().map(|&a| self.dims[a]).product();
        let mut data = vec![0u8; rows * cols];
        let mut k = 0;
        for_each_index(&self.dims, |idx| {
            let r = row_axes.iter().fold(0, |acc, &a| acc * self.dims[a] + idx[a]);
            let c = col_axes.iter().fold(0, |acc, &a| acc * self.dims[a] + idx[a]);
            data[r * cols + c] = self.entries[k];
            k += 1;
        });
        Matrix::new(self.field, rows, cols, data)
    }

    /// Reorders axes so that new axis `i` is old axis `perm[i]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Tensor> {
        let d = self.order();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&p| p >= d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidAxisSet(format!("{perm:?} is not a permutation of {d} axes")));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let st = self.strides();
        let mut entries = Vec::with_capacity(self.len());
        for_each_index(&dims, |idx| {
            let off: usize = idx.iter().zip(perm).map(|(&i, &p)| i * st[p]).sum();
            entries.push(self.entries[off]);
        });
        Ok(Tensor {
            field: self.field,
            dims,
            entries,
        })
    }

    /// Applies a linear map along `axis`: entry `T'[…, k, …] = Σ_i M[k][i] T[…, i, …]`.
    pub fn contract_axis(&self, axis: usize, m: &Matrix) -> Result<Tensor> {
        if axis >= self.order() || m.cols() != self.dims[axis] {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} map along axis {axis} of dims {:?}",
                m.rows(),
                m.cols(),
                self.dims
            )));
        }
        let f = self.field;
        let q = f.q() as u64;
        let outer: usize = self.dims[..axis].iter().product();
        let inner: usize = self.dims[axis + 1..].iter().product();
        let n = self.dims[axis];
        let k = m.rows();
        let mut dims = self.dims.clone();
        dims[axis] = k;
        let mut entries = vec![0u8; outer * k * inner];
        for o in 0..outer {
            for r in 0..k {
                for s in 0..inner {
                    let mut acc = 0u64;
                    for i in 0..n {
                        let c = m.get(r, i);
                        if c != 0 {
                            acc += c as u64 * self.entries[(o * n + i) * inner + s] as u64;
                        }
                    }
                    entries[(o * k + r) * inner + s] = (acc % q) as u8;
                }
            }
        }
        Ok(Tensor {
            field: f,
            dims,
            entries,
        })
    }

    /// Evaluates the multilinear form at one vector per axis.
    pub fn eval_multilinear(&self, xs: &[Vec<u8>]) -> Result<u8> {
        if xs.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for order {}",
                xs.len(),
                self.order()
            )));
        }
        let mut t = self.clone();
        for (a, x) in xs.iter().enumerate().rev() {
            let m = Matrix::new(self.field, 1, x.len(), x.clone())?;
            t = t.contract_axis(a, &m)?;
        }
        Ok(t.entries.first().copied().unwrap_or(0))
    }

    fn check_same(&self, other: &Tensor) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.q(), other.field.q()));
        }
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same(other)?;
        let f = self.field;
        Ok(Tensor {
            field: f,
            dims: self.dims.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| f.add(a, b)).collect(),
        })
    }

    pub fn neg(&self) -> Tensor {
        let f = self.field;
        Tensor {
            field: f,
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|&a| f.neg(a)).collect(),
        }
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.add(&other.neg())
    }

    /// Serialises to the `tensor v1` format: header, shape line, then one
    /// line per last-axis fibre.
    pub fn to_text(&self) -> String {
        let mut s = String::from("tensor v1\n");
        let dims: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "q={} d={} dims={}", self.field.q(), self.order(), dims.join(","));
        let width = *self.dims.last().unwrap_or(&1);
        if width > 0 {
            for chunk in self.entries.chunks(width) {
                let row: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Tensor> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (l0, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
        if header.trim() != "tensor v1" {
            return Err(perr(l0, "expected `tensor v1`"));
        }
        let (l1, shape) = lines.next().ok_or_else(|| perr(l0 + 1, "missing shape line"))?;
        let mut q = None;
        let mut d = None;
        let mut dims = None;
        for tok in shape.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| perr(l1, "expected key=value"))?;
            match k {
                "q" => q = Some(v.parse::<u32>().map_err(|_| perr(l1, "bad q"))?),
                "d" => d = Some(v.parse::<usize>().map_err(|_| perr(l1, "bad d"))?),
                "dims" => {
                    dims = Some(
                        v.split(',')
                            .map(|x| x.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| perr(l1, "bad dims"))?,
                    )
                }
                _ => return Err(perr(l1, &format!("unknown key `{k}`"))),
            }
        }
        let q = q.ok_or_else(|| perr(l1, "missing q"))?;
        let d = d.ok_or_else(|| perr(l1, "missing d"))?;
        let dims = dims.ok_or_else(|| perr(l1, "missing dims"))?;
        let field = PrimeField::new(q).map_err(|e| perr(l1, &e.to_string()))?;
        if dims.len() != d || d == 0 {
            return Err(perr(l1, &format!("d={d} but {} dims given", dims.len())));
        }
        let expected: usize = dims.iter().product();
        let mut entries = Vec::with_capacity(expected);
        let mut last_line = l1;
        for (ln, line) in lines {
            last_line = ln;
            for tok in line.split_whitespace() {
                let v: u32 = tok.parse().map_err(|_| perr(ln, &format!("bad entry `{tok}`")))?;
                if v >= q {
                    return Err(perr(ln, &format!("entry {v} out of range for q={q}")));
                }
                if entries.len() == expected {
                    return Err(perr(ln, &format!("more than {expected} entries")));
                }
                entries.push(v as u8);
            }
        }
        if entries.len() != expected {
            return Err(perr(
                last_line + 1,
                &format!("expected {expected} entries, found {}", entries.len()),
            ));
        }
        Tensor::new(field, dims, entries)
    }
}
