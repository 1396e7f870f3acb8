//! Differential operators on grid fields.
//!
//! Every operator is assembled from partial derivatives of single components,
//! taken either spectrally or by periodic 4th-order central differences.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid_field::{FieldKind, Grid2, GridField};
use crate::spectral::{forward_component, inverse_component, partial_symbol, Fft2};
use crate::tensor_core::{canonical_indices, multiplicity, pair_index, pairs, sigma_project};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Spectral,
    FiniteDifference,
}

/// Partial derivatives of one component under a fixed backend.
struct Partials<'a> {
    grid: Grid2,
    backend: Backend,
    values: &'a [f64],
    fft: Option<&'a Fft2>,
    spectrum: Option<Vec<Complex64>>,
}

impl<'a> Partials<'a> {
    fn new(grid: Grid2, backend: Backend, fft: &'a Fft2, values: &'a [f64]) -> Self {
        let (fft, spectrum) = match backend {
            Backend::Spectral => (Some(fft), Some(forward_component(&grid, fft, values))),
            Backend::FiniteDifference => (None, None),
        };
        Self { grid, backend, values, fft, spectrum }
    }

    fn partial(&self, alpha: [usize; 2]) -> Vec<f64> {
        match self.backend {
            Backend::Spectral => {
                let s = partial_symbol(&self.grid, self.spectrum.as_ref().unwrap(), alpha);
                inverse_component(&self.grid, self.fft.unwrap(), &s)
            }
            Backend::FiniteDifference => {
                let mut out = self.values.to_vec();
                for (axis, &count) in alpha.iter().enumerate() {
                    let mut left = count;
                    while left >= 2 {
                        out = fd_second(&self.grid, &out, axis);
                        left -= 2;
                    }
                    if left == 1 {
                        out = fd_first(&self.grid, &out, axis);
                    }
                }
                out
            }
        }
    }
}

fn fd_apply(grid: &Grid2, values: &[f64], axis: usize, weights: [f64; 5], scale: f64) -> Vec<f64> {
    let n = grid.n();
    let mut out = vec![0.0; values.len()];
    for b in 0..n {
        for a in 0..n {
            let mut acc = 0.0;
            for (s, w) in weights.iter().enumerate() {
                let shift = (s + n - 2) % n;
                let (aa, bb) = if axis == 0 { ((a + shift) % n, b) } else { (a, (b + shift) % n) };
                acc += w * values[grid.offset(aa, bb)];
            }
            out[grid.offset(a, b)] = acc * scale;
        }
    }
    out
}

fn fd_first(grid: &Grid2, values: &[f64], axis: usize) -> Vec<f64> {
    let h = grid.spacing();
    fd_apply(grid, values, axis, [1.0, -8.0, 0.0, 8.0, -1.0], 1.0 / (12.0 * h))
}

fn fd_second(grid: &Grid2, values: &[f64], axis: usize) -> Vec<f64> {
    let h = grid.spacing();
    fd_apply(grid, values, axis, [-1.0, 16.0, -30.0, 16.0, -1.0], 1.0 / (12.0 * h * h))
}

fn unit(axis: usize) -> [usize; 2] {
    let mut a = [0; 2];
    a[axis] += 1;
    a
}

/// Gradients `[d_1 c, d_2 c]` of every component.
fn gradients(f: &GridField, backend: Backend) -> Vec<[Vec<f64>; 2]> {
    let fft = Fft2::new(f.grid().n());
    f.components()
        .iter()
        .map(|c| {
            let p = Partials::new(*f.grid(), backend, &fft, c);
            [p.partial(unit(0)), p.partial(unit(1))]
        })
        .collect()
}

/// Second derivatives `[d11 c, d12 c, d22 c]` of every component.
fn hessians(f: &GridField, backend: Backend) -> Vec<[Vec<f64>; 3]> {
    let fft = Fft2::new(f.grid().n());
    f.components()
        .iter()
        .map(|c| {
            let p = Partials::new(*f.grid(), backend, &fft, c);
            [p.partial([2, 0]), p.partial([1, 1]), p.partial([0, 2])]
        })
        .collect()
}

fn sym_order(f: &GridField) -> Result<usize> {
    f.kind().sym_order().ok_or_else(|| Error::KindMismatch {
        expected: "symmetric tensor field".into(),
        got: f.kind().to_string(),
    })
}

fn combine(len: usize, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (w, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += w * x;
        }
    }
    out
}

/// Inner differentiation `(du)_{i1..i_{m+1}} = sigma(d_{i_{m+1}} u_{i1..im})`.
pub fn apply_d(f: &GridField, backend: Backend) -> Result<GridField> {
    let m = sym_order(f)?;
    let kind = FieldKind::from_sym_order(m + 1)
        .ok_or(Error::UnsupportedOrder { order: m + 1, max: 3 })?;
    let grads = gradients(f, backend);
    let src = canonical_indices(m, 2);
    let rank = |idx: &[usize]| src.iter().position(|s| s.as_slice() == idx).unwrap();
    let data = canonical_indices(m + 1, 2)
        .iter()
        .map(|idx| {
            let terms: Vec<(f64, &[f64])> = (0..=m)
                .map(|p| {
                    let mut rest = idx.clone();
                    let axis = rest.remove(p);
                    (1.0 / (m + 1) as f64, grads[rank(&rest)][axis].as_slice())
                })
                .collect();
            combine(f.grid().len(), &terms)
        })
        .collect();
    GridField::new(*f.grid(), kind, data)
}

/// Divergence `(delta u)_{i1..i_{m-1}} = sum_j d_j u_{i1..i_{m-1} j}`.
pub fn apply_div(f: &GridField, backend: Backend) -> Result<GridField> {
    let m = sym_order(f)?;
    if m == 0 {
        return Err(Error::OrderUnderflow { order: 0, times: 1 });
    }
    let grads = gradients(f, backend);
    let src = canonical_indices(m, 2);
    let rank = |idx: &[usize]| {
        let mut s = idx.to_vec();
        s.sort_unstable();
        src.iter().position(|t| *t == s).unwrap()
    };
    let data = canonical_indices(m - 1, 2)
        .iter()
        .map(|idx| {
            let terms: Vec<(f64, &[f64])> = (0..2)
                .map(|j| {
                    let mut full = idx.clone();
                    full.push(j);
                    (1.0, grads[rank(&full)][j].as_slice())
                })
                .collect();
            combine(f.grid().len(), &terms)
        })
        .collect();
    GridField::new(*f.grid(), FieldKind::from_sym_order(m - 1).unwrap(), data)
}

/// `(Hv)_{ijkl} = (d_i d_j v_kl + d_k d_l v_ij) / 2`.
pub fn apply_h(v: &GridField, backend: Backend) -> Result<GridField> {
    v.expect_kind(FieldKind::Sym2)?;
    let hess = hessians(v, backend);
    let len = v.grid().len();
    let np = pairs(2).len();
    let mut data = Vec::new();
    for p in 0..np {
        for q in p..np {
            data.push(combine(len, &[(0.5, &hess[q][p]), (0.5, &hess[p][q])]));
        }
    }
    GridField::new(*v.grid(), FieldKind::Elastic2, data)
}

/// `(H*w)_{ij} = sum_{k,l} d_k d_l w_{ijkl}`.
pub fn apply_hstar(w: &GridField, backend: Backend) -> Result<GridField> {
    w.expect_kind(FieldKind::Elastic2)?;
    let hess = hessians(w, backend);
    let ps = pairs(2);
    let slot = |p: usize, q: usize| elastic_slot(p.min(q), p.max(q));
    let data = (0..ps.len())
        .map(|p| {
            let terms: Vec<(f64, &[f64])> = (0..ps.len())
                .map(|q| (multiplicity(&[ps[q].0, ps[q].1]) as f64, hess[slot(p, q)][q].as_slice()))
                .collect();
            combine(w.grid().len(), &terms)
        })
        .collect();
    GridField::new(*w.grid(), FieldKind::Sym2, data)
}

/// `(Ku)_{ijkl} = (d_i u_j + d_j u_i) delta_kl / 4 + (d_k u_l + d_l u_k) delta_ij / 4`.
pub fn apply_k(u: &GridField, backend: Backend) -> Result<GridField> {
    u.expect_kind(FieldKind::Vector)?;
    let g = gradients(u, backend);
    let len = u.grid().len();
    let ps = pairs(2);
    let strain: Vec<Vec<f64>> =
        ps.iter().map(|&(i, j)| combine(len, &[(0.5, &g[j][i]), (0.5, &g[i][j])])).collect();
    let diag = |p: usize| if ps[p].0 == ps[p].1 { 0.5 } else { 0.0 };
    let mut data = Vec::new();
    for p in 0..ps.len() {
        for q in p..ps.len() {
            data.push(combine(len, &[(diag(q), &strain[p]), (diag(p), &strain[q])]));
        }
    }
    GridField::new(*u.grid(), FieldKind::Elastic2, data)
}

/// `(K*w)_i = -sum_{j,k} d_j w_{ijkk}`.
pub fn apply_kstar(w: &GridField, backend: Backend) -> Result<GridField> {
    w.expect_kind(FieldKind::Elastic2)?;
    let len = w.grid().len();
    // trace over the second pair, t_{ij} = sum_k w_{ijkk}
    let trace: Vec<Vec<f64>> = (0..3)
        .map(|p| {
            let terms: Vec<(f64, &[f64])> = (0..2)
                .map(|k| {
                    let q = pair_index(k, k, 2);
                    (1.0, w.component(elastic_slot(p.min(q), p.max(q))))
                })
                .collect();
            combine(len, &terms)
        })
        .collect();
    let t = GridField::new(*w.grid(), FieldKind::Sym2, trace)?;
    Ok(apply_div(&t, backend)?.scaled(-1.0))
}

/// Storage slot of pair block `(p, q)`, `p <= q`, in an elastic field.
pub fn elastic_slot(p: usize, q: usize) -> usize {
    let np = 3;
    p * np - p * (p + 1) / 2 + q
}

/// Literal `sigma(j,k){d_k f_ij - d_j f_ik}` from a full gradient `G_{ijk} = d_k f_ij`.
pub fn saint_venant_pointwise(grad: &[f64; 8]) -> [f64; 8] {
    let at = |i: usize, j: usize, k: usize| grad[i * 4 + j * 2 + k];
    let mut out = [0.0; 8];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let bracket = at(i, j, k) - at(i, k, j);
                let swapped = at(i, k, j) - at(i, j, k);
                out[i * 4 + j * 2 + k] = 0.5 * (bracket + swapped);
            }
        }
    }
    out
}

/// Literal Saint-Venant expression evaluated at every node; an order-3 full field.
pub fn saint_venant_literal(f: &GridField, backend: Backend) -> Result<GridField> {
    f.expect_kind(FieldKind::Sym2)?;
    let grad = tilde_d(f, backend)?;
    let len = f.grid().len();
    let mut data = vec![vec![0.0; len]; 8];
    for o in 0..len {
        let mut g = [0.0; 8];
        for (c, v) in g.iter_mut().enumerate() {
            *v = grad.component(c)[o];
        }
        for (c, v) in saint_venant_pointwise(&g).iter().enumerate() {
            data[c][o] = *v;
        }
    }
    GridField::new(*f.grid(), FieldKind::Full3, data)
}

/// `Wf = d22 f11 + d11 f22 - 2 d12 f12`, which vanishes exactly on Hessians.
pub fn compatibility_2d(f: &GridField, backend: Backend) -> Result<GridField> {
    f.expect_kind(FieldKind::Sym2)?;
    let h = hessians(f, backend);
    let data = combine(f.grid().len(), &[(1.0, &h[0][2]), (1.0, &h[2][0]), (-2.0, &h[1][1])]);
    GridField::new(*f.grid(), FieldKind::Scalar, vec![data])
}

/// Full gradient with the derivative index last.
pub fn tilde_d(f: &GridField, backend: Backend) -> Result<GridField> {
    let (kind, order) = match f.kind() {
        FieldKind::Scalar => (FieldKind::Vector, 0),
        FieldKind::Vector => (FieldKind::Full2, 1),
        FieldKind::Sym2 => (FieldKind::Full3, 2),
        FieldKind::Full2 => (FieldKind::Full3, 2),
        other => {
            return Err(Error::KindMismatch { expected: "order <= 2 field".into(), got: other.to_string() })
        }
    };
    let grads = gradients(f, backend);
    let src_rank = |idx: &[usize]| -> usize {
        match f.kind() {
            FieldKind::Sym2 => pair_index(idx[0], idx[1], 2),
            FieldKind::Full2 => idx[0] * 2 + idx[1],
            FieldKind::Vector => idx[0],
            _ => 0,
        }
    };
    let mut data = Vec::new();
    for flat in 0..(1usize << (order + 1)) {
        let idx: Vec<usize> = (0..=order).rev().map(|bit| (flat >> bit) & 1).collect();
        let axis = idx[order];
        data.push(grads[src_rank(&idx[..order])][axis].clone());
    }
    GridField::new(*f.grid(), kind, data)
}

/// Pointwise full symmetrization of a `full2`/`full3` field.
pub fn sigma_field(t: &GridField) -> Result<GridField> {
    let (order, kind) = match t.kind() {
        FieldKind::Full2 => (2, FieldKind::Sym2),
        FieldKind::Full3 => (3, FieldKind::Sym3),
        other => {
            return Err(Error::KindMismatch { expected: "full2 or full3".into(), got: other.to_string() })
        }
    };
    let len = t.grid().len();
    let mut data = vec![vec![0.0; len]; kind.num_components()];
    let mut raw = vec![0.0; t.kind().num_components()];
    for o in 0..len {
        for (c, r) in raw.iter_mut().enumerate() {
            *r = t.component(c)[o];
        }
        let s = sigma_project(order, 2, &raw)?;
        for (c, v) in s.components().iter().enumerate() {
            data[c][o] = *v;
        }
    }
    GridField::new(*t.grid(), kind, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{
        gen_gaussian, gen_hessian_field, gen_random_bandlimited, gen_random_decaying, sample_field,
        AnalyticScalar, Poly,
    };

    fn centre(grid: &Grid2) -> usize {
        grid.offset(grid.n() / 2, grid.n() / 2)
    }

    #[test]
    fn h_of_enveloped_quadratic() {
        let grid = Grid2::desk();
        let v11 = AnalyticScalar::gauss_poly([0.0, 0.0], 1.0, Poly::monomial(1.0, 0, 2));
        let z = AnalyticScalar::zero();
        let v = sample_field(&grid, FieldKind::Sym2, &[v11, z.clone(), z]).unwrap();
        let w = apply_h(&v, Backend::Spectral).unwrap();
        assert!((w.component(2)[centre(&grid)] - 1.0).abs() < 1e-9);
        let zero = apply_h(&GridField::zeros(grid, FieldKind::Sym2), Backend::Spectral).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn k_of_enveloped_linear() {
        let grid = Grid2::desk();
        let u1 = AnalyticScalar::gauss_poly([0.0, 0.0], 1.0, Poly::monomial(1.0, 0, 1));
        let u = sample_field(&grid, FieldKind::Vector, &[u1, AnalyticScalar::zero()]).unwrap();
        let w = apply_k(&u, Backend::Spectral).unwrap();
        assert!((w.component(1)[centre(&grid)] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn compatibility_examples() {
        let grid = Grid2::desk();
        let f = gen_gaussian(&grid, FieldKind::Sym2, [0.0, 0.0], 1.0, &[1.0, 0.0, 0.0], None).unwrap();
        let w = compatibility_2d(&f, Backend::Spectral).unwrap();
        assert!((w.component(0)[centre(&grid)] + 2.0).abs() < 1e-9);

        let v = AnalyticScalar::gaussian([0.3, 0.1], 0.9, 1.0);
        let hess = gen_hessian_field(&grid, &v);
        let w = compatibility_2d(&hess, Backend::Spectral).unwrap();
        assert!(w.max_abs() <= 1e-9 * hess.max_abs());
    }

    #[test]
    fn literal_saint_venant_vanishes() {
        let grid = Grid2::new(32, 3.0).unwrap();
        let f = gen_random_bandlimited(&grid, FieldKind::Sym2, 2, 0.5, false).unwrap();
        let r = saint_venant_literal(&f, Backend::Spectral).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn sigma_of_tilde_d_is_d() {
        let grid = Grid2::new(64, 4.0).unwrap();
        for kind in [FieldKind::Vector, FieldKind::Sym2] {
            let u = gen_random_bandlimited(&grid, kind, 11, 0.25, false).unwrap();
            let lhs = sigma_field(&tilde_d(&u, Backend::Spectral).unwrap()).unwrap();
            let rhs = apply_d(&u, Backend::Spectral).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * rhs.max_abs());
        }
        let mut c = GridField::zeros(grid, FieldKind::Vector);
        c.shift(&[-2.0, 3.0]);
        assert!(tilde_d(&c, Backend::Spectral).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn gradient_of_enveloped_coordinate() {
        let grid = Grid2::desk();
        let u = AnalyticScalar::gauss_poly([0.0, 0.0], 1.0, Poly::monomial(1.0, 1, 0));
        let f = sample_field(&grid, FieldKind::Scalar, &[u]).unwrap();
        let g = tilde_d(&f, Backend::Spectral).unwrap();
        let o = centre(&grid);
        assert!((g.component(0)[o] - 1.0).abs() < 1e-10);
        assert!(g.component(1)[o].abs() < 1e-10);
    }

    #[test]
    fn adjoint_pairs() {
        let grid = Grid2::desk();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        for backend in [Backend::Spectral, Backend::FiniteDifference] {
            let v = gen_random_decaying(&grid, FieldKind::Sym2, 1).unwrap();
            let w = gen_random_decaying(&grid, FieldKind::Elastic2, 2).unwrap();
            let u = gen_random_decaying(&grid, FieldKind::Vector, 3).unwrap();
            let s3 = gen_random_decaying(&grid, FieldKind::Sym3, 4).unwrap();

            let lhs = apply_h(&v, backend).unwrap().inner(&w).unwrap();
            let rhs = v.inner(&apply_hstar(&w, backend).unwrap()).unwrap();
            assert!(rel(lhs, rhs) < 1e-8, "H {backend:?}: {lhs} {rhs}");

            let lhs = apply_k(&u, backend).unwrap().inner(&w).unwrap();
            let rhs = u.inner(&apply_kstar(&w, backend).unwrap()).unwrap();
            assert!(rel(lhs, rhs) < 1e-8, "K {backend:?}: {lhs} {rhs}");

            let lhs = apply_d(&v, backend).unwrap().inner(&s3).unwrap();
            let rhs = -v.inner(&apply_div(&s3, backend).unwrap()).unwrap();
            assert!(rel(lhs, rhs) < 1e-8, "d {backend:?}: {lhs} {rhs}");
        }
    }

    #[test]
    fn backends_agree_to_fourth_order() {
        let v = AnalyticScalar::gaussian([0.1, -0.2], 1.0, 1.0);
        let errs: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&n| {
                let grid = Grid2::new(n, 6.0).unwrap();
                let f = gen_hessian_field(&grid, &v);
                let s = apply_d(&f, Backend::Spectral).unwrap();
                let d = apply_d(&f, Backend::FiniteDifference).unwrap();
                s.max_abs_diff(&d).unwrap()
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(ratio > 12.0 && ratio < 20.0, "{errs:?}");
    }

    #[test]
    fn h_and_hessian_consistency() {
        // v_kl = delta_kl phi gives (Hv)_{ijkl} = (d_ij phi delta_kl + d_kl phi delta_ij) / 2 = K(grad phi)
        let grid = Grid2::desk();
        let phi = AnalyticScalar::gaussian([0.0, 0.2], 0.9, 1.0);
        let p = phi.sample(&grid);
        let v = GridField::new(grid, FieldKind::Sym2, vec![p.clone(), vec![0.0; p.len()], p]).unwrap();
        let grad = sample_field(&grid, FieldKind::Vector, &[phi.deriv(0), phi.deriv(1)]).unwrap();
        let hv = apply_h(&v, Backend::Spectral).unwrap();
        let kg = apply_k(&grad, Backend::Spectral).unwrap();
        assert!(hv.max_abs_diff(&kg).unwrap() <= 1e-10 * hv.max_abs());
    }
}
