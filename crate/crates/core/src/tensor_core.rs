//! Pointwise algebra of symmetric and elastic tensors in `R^n`.
//!
//! A symmetric `m`-tensor is stored once per non-decreasing multi-index
//! `i_1 <= ... <= i_m`, so symmetry holds by construction. Inner products
//! weight each stored component by the number of index tuples it stands
//! for, which makes them agree with the full `n^m` contraction.
//!
//! Elastic 2-tensors (`E^2(n)`) are stored as a symmetric matrix over the
//! canonical index pairs `(ij)`, `i <= j`. In two dimensions the pairs are
//! `11, 12, 22` and the six stored values are, in order,
//! `w1111, w1112, w1122, w1212, w1222, w2222`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest symmetric order handled here.
pub const MAX_SYM_ORDER: usize = 3;

/// Tolerance on `|xi| = 1` and on the polarization alignment test.
pub const RAY_TOL: f64 = 1e-12;

/// Scalars a tensor can carry: real values or complex spectra.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_real(v: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(v: f64) -> Self {
        v
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of stored components of a symmetric `order`-tensor in `R^dim`.
pub fn sym_len(order: usize, dim: usize) -> usize {
    if dim == 0 {
        return usize::from(order == 0);
    }
    binomial(dim + order - 1, order)
}

/// All non-decreasing multi-indices of length `order` over `0..dim`, in
/// lexicographic order. This is the storage order of [`SymTensor`].
pub fn canonical_indices(order: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sym_len(order, dim));
    let mut cur = vec![0usize; order];
    if dim == 0 && order > 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance to the next non-decreasing tuple
        let mut p = order;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            if cur[p] + 1 < dim {
                let v = cur[p] + 1;
                for slot in cur.iter_mut().skip(p) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Storage position of a sorted multi-index.
fn rank_sorted(sorted: &[usize], dim: usize) -> usize {
    let m = sorted.len();
    let mut rank = 0;
    let mut lo = 0;
    for (p, &v) in sorted.iter().enumerate() {
        let rest = m - p - 1;
        for w in lo..v {
            rank += sym_len(rest, dim - w);
        }
        lo = v;
    }
    rank
}

/// Number of distinct index tuples that are permutations of `sorted`.
pub fn multiplicity(sorted: &[usize]) -> usize {
    let mut denom = 1usize;
    let mut run = 1usize;
    for w in 1..=sorted.len() {
        if w < sorted.len() && sorted[w] == sorted[w - 1] {
            run += 1;
        } else {
            denom *= (1..=run).product::<usize>();
            run = 1;
        }
    }
    (1..=sorted.len()).product::<usize>() / denom
}

fn full_offset(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

fn for_each_full_index(order: usize, dim: usize, mut f: impl FnMut(&[usize])) {
    let total = dim.pow(order as u32);
    let mut idx = vec![0usize; order];
    for mut flat in 0..total {
        for slot in idx.iter_mut().rev() {
            *slot = flat % dim;
            flat /= dim;
        }
        f(&idx);
    }
}

/// Dense symmetric tensor of order `m <= 3` in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T = f64> {
    order: usize,
    dim: usize,
    comps: Vec<T>,
}

impl<T: Scalar> SymTensor<T> {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        if order > MAX_SYM_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_SYM_ORDER });
        }
        Ok(Self { order, dim, comps: vec![T::zero(); sym_len(order, dim)] })
    }

    /// Builds a tensor from its canonical components.
    pub fn from_components(order: usize, dim: usize, comps: Vec<T>) -> Result<Self> {
        if order > MAX_SYM_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_SYM_ORDER });
        }
        let expected = sym_len(order, dim);
        if comps.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: comps.len() });
        }
        Ok(Self { order, dim, comps })
    }

    pub fn scalar(value: T, dim: usize) -> Self {
        Self { order: 0, dim, comps: vec![value] }
    }

    pub fn vector(values: &[T]) -> Self {
        Self { order: 1, dim: values.len(), comps: values.to_vec() }
    }

    /// Symmetric 2-tensor in the plane from `(f11, f12, f22)`.
    pub fn sym2(f11: T, f12: T, f22: T) -> Self {
        Self { order: 2, dim: 2, comps: vec![f11, f12, f22] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[T] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [T] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<T> {
        self.comps
    }

    fn position(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        rank_sorted(&sorted, self.dim)
    }

    /// Component at any (not necessarily sorted) index tuple.
    pub fn get(&self, idx: &[usize]) -> T {
        self.comps[self.position(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let p = self.position(idx);
        self.comps[p] = value;
    }

    /// Expands to the full `n^m` array, first index slowest.
    pub fn to_full(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim.pow(self.order as u32));
        for_each_full_index(self.order, self.dim, |idx| out.push(self.get(idx)));
        out
    }

    /// Full contraction `sum f_{i..} g_{i..}` over all index tuples.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!((self.order, self.dim), (other.order, other.dim));
        canonical_indices(self.order, self.dim)
            .iter()
            .zip(self.comps.iter().zip(&other.comps))
            .fold(T::zero(), |acc, (idx, (&a, &b))| acc + a * b * multiplicity(idx) as f64)
    }

    pub fn max_modulus(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.modulus()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { comps: self.comps.iter().map(|&c| c * s).collect(), ..self.clone() }
    }

    /// Symmetric multiplication `i_x f = sigma(x ⊗ f)`.
    pub fn i_x(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let order = self.order + 1;
        if order > MAX_SYM_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_SYM_ORDER });
        }
        let comps = canonical_indices(order, self.dim)
            .iter()
            .map(|idx| {
                let mut acc = T::zero();
                for p in 0..order {
                    let mut rest = idx.clone();
                    let slot = rest.remove(p);
                    acc = acc + self.comps[rank_sorted(&rest, self.dim)] * x[slot];
                }
                acc / order as f64
            })
            .collect();
        Ok(Self { order, dim: self.dim, comps })
    }

    pub fn i_x_pow(&self, x: &[f64], k: usize) -> Result<Self> {
        let order = self.order + k;
        if order > MAX_SYM_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_SYM_ORDER });
        }
        (0..k).try_fold(self.clone(), |acc, _| acc.i_x(x))
    }

    /// Contraction of the last slot with `x`.
    pub fn j_x(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if self.order == 0 {
            return Err(Error::OrderUnderflow { order: 0, times: 1 });
        }
        let order = self.order - 1;
        let comps = canonical_indices(order, self.dim)
            .iter()
            .map(|idx| {
                let mut full = idx.clone();
                full.push(0);
                (0..self.dim).fold(T::zero(), |acc, k| {
                    *full.last_mut().unwrap() = k;
                    acc + self.get(&full) * x[k]
                })
            })
            .collect();
        Ok(Self { order, dim: self.dim, comps })
    }

    pub fn j_x_pow(&self, x: &[f64], k: usize) -> Result<Self> {
        if k == 0 || k > self.order {
            return Err(Error::OrderUnderflow { order: self.order, times: k });
        }
        (0..k).try_fold(self.clone(), |acc, _| acc.j_x(x))
    }
}

impl<T: Scalar> Add for &SymTensor<T> {
    type Output = SymTensor<T>;
    fn add(self, rhs: Self) -> SymTensor<T> {
        assert_eq!((self.order, self.dim), (rhs.order, rhs.dim));
        let comps = self.comps.iter().zip(&rhs.comps).map(|(&a, &b)| a + b).collect();
        SymTensor { comps, ..self.clone() }
    }
}

impl<T: Scalar> Sub for &SymTensor<T> {
    type Output = SymTensor<T>;
    fn sub(self, rhs: Self) -> SymTensor<T> {
        assert_eq!((self.order, self.dim), (rhs.order, rhs.dim));
        let comps = self.comps.iter().zip(&rhs.comps).map(|(&a, &b)| a - b).collect();
        SymTensor { comps, ..self.clone() }
    }
}

/// Full symmetrization (`sigma^{m,0}`) of a raw `m`-tensor given as an
/// `n^m` array, first index slowest.
pub fn sigma_project<T: Scalar>(order: usize, dim: usize, raw: &[T]) -> Result<SymTensor<T>> {
    if order > MAX_SYM_ORDER {
        return Err(Error::UnsupportedOrder { order, max: MAX_SYM_ORDER });
    }
    let expected = dim.pow(order as u32);
    if raw.len() != expected {
        return Err(Error::ShapeMismatch { expected, got: raw.len() });
    }
    let mut comps = vec![T::zero(); sym_len(order, dim)];
    let mut counts = vec![0usize; comps.len()];
    for_each_full_index(order, dim, |idx| {
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        let r = rank_sorted(&sorted, dim);
        comps[r] = comps[r] + raw[full_offset(idx, dim)];
        counts[r] += 1;
    });
    for (c, n) in comps.iter_mut().zip(counts) {
        *c = *c / n as f64;
    }
    SymTensor::from_components(order, dim, comps)
}

/// Number of canonical index pairs `(i, j)`, `i <= j`, in `R^dim`.
pub fn pair_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Canonical index pairs in storage order.
pub fn pairs(dim: usize) -> Vec<(usize, usize)> {
    canonical_indices(2, dim).into_iter().map(|p| (p[0], p[1])).collect()
}

/// Storage position of the pair `(i, j)` in either order.
pub fn pair_index(i: usize, j: usize, dim: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    rank_sorted(&[a, b], dim)
}

fn tri_offset(p: usize, q: usize, n_pairs: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    p * n_pairs - p * (p + 1) / 2 + q
}

/// Elastic 2-tensor: symmetric in `(ij)`, in `(kl)` and under `(ij) <-> (kl)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticTensor2<T = f64> {
    dim: usize,
    comps: Vec<T>,
}

impl<T: Scalar> ElasticTensor2<T> {
    pub fn zeros(dim: usize) -> Self {
        let p = pair_count(dim);
        Self { dim, comps: vec![T::zero(); p * (p + 1) / 2] }
    }

    /// Builds from the upper triangle of the pair matrix, row by row.
    pub fn from_components(dim: usize, comps: Vec<T>) -> Result<Self> {
        let p = pair_count(dim);
        let expected = p * (p + 1) / 2;
        if comps.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: comps.len() });
        }
        Ok(Self { dim, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[T] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<T> {
        self.comps
    }

    /// Value at pair positions `(p, q)`.
    pub fn pair(&self, p: usize, q: usize) -> T {
        self.comps[tri_offset(p, q, pair_count(self.dim))]
    }

    pub fn set_pair(&mut self, p: usize, q: usize, value: T) {
        let off = tri_offset(p, q, pair_count(self.dim));
        self.comps[off] = value;
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.pair(pair_index(i, j, self.dim), pair_index(k, l, self.dim))
    }

    pub fn to_full(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim.pow(4));
        for_each_full_index(4, self.dim, |idx| out.push(self.get(idx[0], idx[1], idx[2], idx[3])));
        out
    }

    /// Full contraction over all 4-index tuples.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        let ps = pairs(self.dim);
        let mult = |p: usize| if ps[p].0 == ps[p].1 { 1.0 } else { 2.0 };
        let n = ps.len();
        let mut acc = T::zero();
        for p in 0..n {
            for q in 0..n {
                acc = acc + self.pair(p, q) * other.pair(p, q) * (mult(p) * mult(q));
            }
        }
        acc
    }

    pub fn max_modulus(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.modulus()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, comps: self.comps.iter().map(|&c| c * s).collect() }
    }
}

impl<T: Scalar> Add for &ElasticTensor2<T> {
    type Output = ElasticTensor2<T>;
    fn add(self, rhs: Self) -> ElasticTensor2<T> {
        assert_eq!(self.dim, rhs.dim);
        let comps = self.comps.iter().zip(&rhs.comps).map(|(&a, &b)| a + b).collect();
        ElasticTensor2 { dim: self.dim, comps }
    }
}

impl<T: Scalar> Sub for &ElasticTensor2<T> {
    type Output = ElasticTensor2<T>;
    fn sub(self, rhs: Self) -> ElasticTensor2<T> {
        assert_eq!(self.dim, rhs.dim);
        let comps = self.comps.iter().zip(&rhs.comps).map(|(&a, &b)| a - b).collect();
        ElasticTensor2 { dim: self.dim, comps }
    }
}

/// Projection of a raw 4-tensor (`n^4` array) onto `E^2(n)`: symmetrize in
/// `(ij)` and `(kl)`, then average with the pair-swapped tensor.
pub fn eps_project<T: Scalar>(dim: usize, raw: &[T]) -> Result<ElasticTensor2<T>> {
    let expected = dim.pow(4);
    if raw.len() != expected {
        return Err(Error::ShapeMismatch { expected, got: raw.len() });
    }
    let at = |i, j, k, l| raw[full_offset(&[i, j, k, l], dim)];
    let ps = pairs(dim);
    let mut out = ElasticTensor2::zeros(dim);
    for (p, &(i, j)) in ps.iter().enumerate() {
        for (q, &(k, l)) in ps.iter().enumerate().skip(p) {
            let sum = at(i, j, k, l)
                + at(j, i, k, l)
                + at(i, j, l, k)
                + at(j, i, l, k)
                + at(k, l, i, j)
                + at(l, k, i, j)
                + at(k, l, j, i)
                + at(l, k, j, i);
            out.set_pair(p, q, sum / 8.0);
        }
    }
    Ok(out)
}

/// A line direction with a polarization: `|xi| = 1` and `zeta` either
/// parallel or perpendicular to `xi`. `zeta` is normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedRay {
    x: Vec<f64>,
    xi: Vec<f64>,
    zeta: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

impl PolarizedRay {
    pub fn new(x: Vec<f64>, xi: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        let n = xi.len();
        if x.len() != n || zeta.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len().max(zeta.len()) });
        }
        let xi_norm = dot(&xi, &xi).sqrt();
        if (xi_norm - 1.0).abs() > RAY_TOL {
            return Err(Error::InvalidRay(format!("|xi| = {xi_norm}, expected 1")));
        }
        let z_norm = dot(&zeta, &zeta).sqrt();
        if z_norm == 0.0 || !z_norm.is_finite() {
            return Err(Error::InvalidRay("polarization must be nonzero".into()));
        }
        let zeta: Vec<f64> = zeta.iter().map(|z| z / z_norm).collect();
        let c = dot(&zeta, &xi).abs();
        if c > RAY_TOL && (c - 1.0).abs() > RAY_TOL {
            return Err(Error::InvalidRay(format!(
                "polarization neither parallel nor perpendicular to xi (|<zeta, xi>| = {c})"
            )));
        }
        Ok(Self { x, xi, zeta })
    }

    pub fn base(&self) -> &[f64] {
        &self.x
    }

    pub fn direction(&self) -> &[f64] {
        &self.xi
    }

    pub fn polarization(&self) -> &[f64] {
        &self.zeta
    }
}

/// `<f, (xi ⊗ zeta)^{⊗m}>` for the integrand of the elastic ray transform.
pub trait RayContraction<T> {
    fn contract_ray(&self, ray: &PolarizedRay) -> Result<T>;
}

impl<T: Scalar> RayContraction<T> for SymTensor<T> {
    fn contract_ray(&self, ray: &PolarizedRay) -> Result<T> {
        if self.order != 2 {
            return Err(Error::UnsupportedOrder { order: self.order, max: 2 });
        }
        if ray.xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: ray.xi.len() });
        }
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc = acc + self.get(&[i, j]) * (ray.xi[i] * ray.zeta[j]);
            }
        }
        Ok(acc)
    }
}

impl<T: Scalar> RayContraction<T> for ElasticTensor2<T> {
    fn contract_ray(&self, ray: &PolarizedRay) -> Result<T> {
        let n = self.dim;
        if ray.xi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: ray.xi.len() });
        }
        // b_{ij} = xi_i zeta_j, symmetrized since the pair slots are symmetric
        let ps = pairs(n);
        let b: Vec<f64> = ps
            .iter()
            .map(|&(i, j)| {
                if i == j {
                    ray.xi[i] * ray.zeta[i]
                } else {
                    ray.xi[i] * ray.zeta[j] + ray.xi[j] * ray.zeta[i]
                }
            })
            .collect();
        let mut acc = T::zero();
        for p in 0..ps.len() {
            for q in 0..ps.len() {
                acc = acc + self.pair(p, q) * (b[p] * b[q]);
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn storage_sizes() {
        assert_eq!(sym_len(2, 2), 3);
        assert_eq!(sym_len(3, 2), 4);
        assert_eq!(sym_len(3, 3), 10);
        assert_eq!(canonical_indices(3, 3).len(), 10);
        assert_eq!(ElasticTensor2::<f64>::zeros(2).components().len(), 6);
        for (r, idx) in canonical_indices(3, 4).iter().enumerate() {
            assert_eq!(rank_sorted(idx, 4), r);
        }
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(&[0, 1]), 2);
        assert_eq!(multiplicity(&[1, 1]), 1);
        assert_eq!(multiplicity(&[0, 0, 1]), 3);
        assert_eq!(multiplicity(&[0, 1, 2]), 6);
    }

    #[test]
    fn sigma_of_upper_entry() {
        let s = sigma_project(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.to_full(), vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn sigma_kills_antisymmetric() {
        let s = sigma_project(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(s.components().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sigma_rejects_order_four() {
        let raw = vec![0.0; 16];
        assert!(matches!(sigma_project(4, 2, &raw), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn eps_single_entry() {
        let mut raw = vec![0.0; 16];
        raw[full_offset(&[0, 1, 0, 0], 2)] = 1.0;
        let e = eps_project(2, &raw).unwrap();
        assert!(close(e.get(0, 1, 0, 0), 0.25, 1e-15));
        assert!(close(e.get(1, 0, 0, 0), 0.25, 1e-15));
        assert!(close(e.get(0, 0, 0, 1), 0.25, 1e-15));
        // the (12)/(21) orbit against (11) carries 1/2 in total
        assert!(close(e.get(0, 1, 0, 0) + e.get(1, 0, 0, 0), 0.5, 1e-15));
        assert_eq!(e.pair(0, 0), 0.0);
    }

    #[test]
    fn i_x_examples() {
        let f = SymTensor::vector(&[0.0, 1.0]);
        let g = f.i_x(&[1.0, 0.0]).unwrap();
        assert_eq!(g.to_full(), vec![0.0, 0.5, 0.5, 0.0]);

        let c = SymTensor::scalar(3.0, 2);
        let x = [0.7, -1.3];
        let g = c.i_x_pow(&x, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(g.get(&[i, j]), 3.0 * x[i] * x[j], 1e-15));
            }
        }
        let z = SymTensor::sym2(1.0, 2.0, 3.0).i_x(&[0.0, 0.0]).unwrap();
        assert!(z.components().iter().all(|&c| c == 0.0));
        assert!(SymTensor::sym2(1.0, 2.0, 3.0).i_x_pow(&x, 2).is_err());
    }

    #[test]
    fn j_x_examples() {
        let f = SymTensor::sym2(2.0, 3.0, 5.0);
        let x = [1.0, 0.0];
        assert_eq!(f.j_x(&x).unwrap().components(), &[2.0, 3.0]);
        assert_eq!(f.j_x_pow(&x, 2).unwrap().components(), &[2.0]);

        let u = [0.6, 0.8];
        let xx = SymTensor::scalar(1.0, 2).i_x_pow(&u, 2).unwrap();
        assert!(close(xx.j_x_pow(&u, 2).unwrap().components()[0], 1.0, 1e-15));
        assert!(SymTensor::scalar(1.0, 2).j_x(&u).is_err());
    }

    #[test]
    fn contract_examples() {
        let xi = vec![1.0, 0.0];
        let perp = PolarizedRay::new(vec![0.0, 0.0], xi.clone(), vec![0.0, 1.0]).unwrap();
        let long = PolarizedRay::new(vec![0.0, 0.0], xi.clone(), xi.clone()).unwrap();

        // delta_ij delta_kl
        let mut dd = ElasticTensor2::zeros(2);
        dd.set_pair(0, 0, 1.0);
        dd.set_pair(0, 2, 1.0);
        dd.set_pair(2, 2, 1.0);
        assert!(close(dd.contract_ray(&perp).unwrap(), 0.0, 1e-15));
        assert!(close(dd.contract_ray(&long).unwrap(), 1.0, 1e-15));

        let f = SymTensor::sym2(2.0, 3.0, 5.0);
        assert!(close(f.contract_ray(&perp).unwrap(), 3.0, 1e-15));
    }

    #[test]
    fn ray_validation() {
        let bad_xi = PolarizedRay::new(vec![0.0; 2], vec![2.0, 0.0], vec![1.0, 0.0]);
        assert!(bad_xi.is_err());
        let oblique = PolarizedRay::new(vec![0.0; 2], vec![1.0, 0.0], vec![1.0, 1.0]);
        assert!(oblique.is_err());
        let scaled = PolarizedRay::new(vec![0.0; 2], vec![0.0, 1.0], vec![-3.0, 0.0]).unwrap();
        assert_eq!(scaled.polarization(), &[-1.0, 0.0]);
    }
}
