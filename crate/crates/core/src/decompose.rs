//! Solenoidal/potential splits of symmetric and elastic 2-tensor fields.
//!
//! Pointwise, on a frequency `y != 0`:
//!
//! * symmetric: `f^ = g^ + (y (x) y) v^` with `j_y^2 g^ = 0`;
//! * elastic: `f^ = g^ + H_y v^ + K_y u^` with `H*_y g^ = K*_y g^ = 0` and `<u^, y> = 0`.
//!
//! These symbol identities carry no factors of `i`. On fields the true
//! multipliers are `FT(d^2 v) = -(y (x) y) FT(v)`, `FT(Hv) = -H_y FT(v)` and
//! `FT(Ku) = i K_y FT(u)`, so the space-domain potentials are
//! `v = -IFT(v^)` and `u = IFT(u^ / i)`.
//!
//! The zero bin carries no information about a potential. After the
//! mean-zero gate it is cleared, and each potential is then shifted so its
//! mean over the outermost grid ring is zero. For decaying potentials this
//! restores the additive constant the periodic box cannot see.

use num_complex::Complex64;
use serde::Serialize;

use crate::diffops::{apply_d, apply_h, apply_k, Backend};
use crate::error::{Error, Result};
use crate::grid_field::{mean_integral, FieldKind, Grid2, GridField};
use crate::spectral::{dft_at, fft_field, ifft_field, SpectralField};
use crate::tensor_core::{multiplicity, pairs, ElasticTensor2, Scalar, SymTensor};

pub const DEFAULT_MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// Admissible `|int f_c| / sum_c int |f_c|` per component.
    pub mean_tol: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { mean_tol: DEFAULT_MEAN_TOL }
    }
}

fn norm2(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

/// `(H_y v)_{ijkl} = (y_i y_j v_kl + y_k y_l v_ij) / 2`.
pub fn h_hat<T: Scalar>(y: &[f64], v: &SymTensor<T>) -> ElasticTensor2<T> {
    let ps = pairs(y.len());
    let mut out = ElasticTensor2::zeros(y.len());
    for (p, &(i, j)) in ps.iter().enumerate() {
        for (q, &(k, l)) in ps.iter().enumerate().skip(p) {
            let val = (v.get(&[k, l]) * (y[i] * y[j]) + v.get(&[i, j]) * (y[k] * y[l])) * 0.5;
            out.set_pair(p, q, val);
        }
    }
    out
}

/// `(H*_y w)_{ij} = sum_{k,l} y_k y_l w_{ijkl}`.
pub fn h_hat_star<T: Scalar>(y: &[f64], w: &ElasticTensor2<T>) -> SymTensor<T> {
    let n = y.len();
    let ps = pairs(n);
    let comps = ps
        .iter()
        .map(|&(i, j)| {
            ps.iter().fold(T::zero(), |acc, &(k, l)| {
                acc + w.get(i, j, k, l) * (y[k] * y[l] * multiplicity(&[k, l]) as f64)
            })
        })
        .collect();
    SymTensor::from_components(2, n, comps).unwrap()
}

/// `(K_y u)_{ijkl} = (y_i u_j + y_j u_i) delta_kl / 4 + (y_k u_l + y_l u_k) delta_ij / 4`.
pub fn k_hat<T: Scalar>(y: &[f64], u: &SymTensor<T>) -> ElasticTensor2<T> {
    let ps = pairs(y.len());
    let sym = |i: usize, j: usize| (u.get(&[j]) * y[i] + u.get(&[i]) * y[j]) * 0.25;
    let mut out = ElasticTensor2::zeros(y.len());
    for (p, &(i, j)) in ps.iter().enumerate() {
        for (q, &(k, l)) in ps.iter().enumerate().skip(p) {
            let mut val = T::zero();
            if k == l {
                val = val + sym(i, j);
            }
            if i == j {
                val = val + sym(k, l);
            }
            out.set_pair(p, q, val);
        }
    }
    out
}

/// `(K*_y w)_i = sum_{j,k} y_j w_{ijkk}`.
pub fn k_hat_star<T: Scalar>(y: &[f64], w: &ElasticTensor2<T>) -> SymTensor<T> {
    let n = y.len();
    let comps: Vec<T> = (0..n)
        .map(|i| {
            let mut acc = T::zero();
            for (j, &yj) in y.iter().enumerate() {
                for k in 0..n {
                    acc = acc + w.get(i, j, k, k) * yj;
                }
            }
            acc
        })
        .collect();
    SymTensor::vector(&comps)
}

/// Symmetric split `(g^, v^)` at one frequency: `v^ = y_i y_j f^_ij / |y|^4`.
pub fn pointwise_split_sym2<T: Scalar>(
    f: &SymTensor<T>,
    y: &[f64],
) -> Result<(SymTensor<T>, SymTensor<T>)> {
    if f.order() != 2 {
        return Err(Error::UnsupportedOrder { order: f.order(), max: 2 });
    }
    let y2 = norm2(y);
    if y2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let v = f.j_x_pow(y, 2)?.scale(1.0 / (y2 * y2));
    let g = f - &v.i_x_pow(y, 2)?;
    Ok((g, v))
}

/// Pointwise elastic split.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticParts<T> {
    pub v: SymTensor<T>,
    pub u: SymTensor<T>,
    pub g: ElasticTensor2<T>,
}

/// Elastic split at one frequency; `n >= 2`.
pub fn pointwise_split_elastic<T: Scalar>(
    f: &ElasticTensor2<T>,
    y: &[f64],
) -> Result<ElasticParts<T>> {
    let n = y.len();
    if n < 2 || f.dim() != n {
        return Err(Error::DimensionMismatch { expected: f.dim().max(2), got: n });
    }
    let y2 = norm2(y);
    if y2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let kf = k_hat_star(y, f);
    let hf = h_hat_star(y, f);
    let hf_y = hf.j_x(y)?;
    let yyyy = hf_y.j_x(y)?.get(&[]);
    let ky = kf.j_x(y)?.get(&[]);
    let pre = 4.0 / ((n - 1) as f64 * y2 * y2);
    let u: Vec<T> = (0..n)
        .map(|i| {
            let eps_kf = kf.get(&[i]) * y2 - ky * y[i];
            (eps_kf - hf_y.get(&[i]) + yyyy * (y[i] / y2)) * pre
        })
        .collect();
    let u = SymTensor::vector(&u);
    let yu = u.i_x(y)?;
    let v_comps = pairs(n)
        .iter()
        .map(|&(i, j)| {
            hf.get(&[i, j]) * (2.0 / (y2 * y2)) - yu.get(&[i, j]) * (1.0 / y2)
                - yyyy * (y[i] * y[j] / y2.powi(4))
        })
        .collect();
    let v = SymTensor::from_components(2, n, v_comps)?;
    let g = &(f - &h_hat(y, &v)) - &k_hat(y, &u);
    Ok(ElasticParts { v, u, g })
}

fn check_means(f: &GridField, tol: f64) -> Result<Vec<f64>> {
    let means = mean_integral(f);
    let l1 = f.l1_norm();
    let names = f.kind().component_names();
    let offending: Vec<(String, f64)> = names
        .into_iter()
        .zip(&means)
        .filter(|(_, m)| m.abs() > tol * l1)
        .map(|(n, &m)| (n, m))
        .collect();
    if !offending.is_empty() {
        return Err(Error::MeanNotZero { means: offending, tol });
    }
    Ok(means)
}

fn is_skipped(grid: &Grid2, a: usize, b: usize) -> bool {
    (a == 0 && b == 0) || grid.is_nyquist(a) || grid.is_nyquist(b)
}

fn ring_normalize(mut f: GridField) -> GridField {
    let means = f.ring_means();
    f.shift(&means);
    f
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sym2Residuals {
    /// `||f - g - d^2 v||_inf / ||f||_inf`.
    pub reconstruction: f64,
    /// `max |j_y^2 g^| / max |y|^2 |f^|` over non-Nyquist bins.
    pub solenoidal: f64,
    /// Component integrals of the input.
    pub means: Vec<f64>,
    /// Boundary-decay ratio of the recovered potential.
    pub v_decay: f64,
}

#[derive(Debug, Clone)]
pub struct Sym2Split {
    pub g: GridField,
    pub v: GridField,
    pub residuals: Sym2Residuals,
}

/// `f = g + d^2 v` with `delta^2 g = 0`.
pub fn decompose_sym2(f: &GridField, opts: DecomposeOptions) -> Result<Sym2Split> {
    f.expect_kind(FieldKind::Sym2)?;
    let means = check_means(f, opts.mean_tol)?;
    let grid = *f.grid();
    let n = grid.n();
    let spec = fft_field(f);
    let mut vhat = SpectralField::zeros(grid, FieldKind::Scalar);
    for b in 0..n {
        for a in 0..n {
            if is_skipped(&grid, a, b) {
                continue;
            }
            let y = spec.frequency(a, b);
            let t = SymTensor::from_components(2, 2, spec.at(a, b))?;
            let (_, v) = pointwise_split_sym2(&t, &y)?;
            vhat.set_at(a, b, &[-v.get(&[])]);
        }
    }
    let v = ring_normalize(ifft_field(&vhat));
    let d2v = apply_d(&apply_d(&v, Backend::Spectral)?, Backend::Spectral)?;
    let g = f.sub(&d2v)?;

    let scale = f.max_abs();
    let recon = f.sub(&g)?.sub(&d2v)?.max_abs();
    let gspec = fft_field(&g);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for b in 0..n {
        for a in 0..n {
            if grid.is_nyquist(a) || grid.is_nyquist(b) {
                continue;
            }
            let y = gspec.frequency(a, b);
            let gt = SymTensor::from_components(2, 2, gspec.at(a, b))?;
            num = num.max(gt.j_x_pow(&y, 2)?.get(&[]).norm());
            let ft = SymTensor::from_components(2, 2, spec.at(a, b))?;
            den = den.max(norm2(&y) * ft.max_modulus());
        }
    }
    let residuals = Sym2Residuals {
        reconstruction: ratio(recon, scale),
        solenoidal: ratio(num, den),
        means,
        v_decay: v.boundary_decay(),
    };
    Ok(Sym2Split { g, v, residuals })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElasticResiduals {
    /// `||f - Hv - Ku - g||_inf / ||f||_inf`.
    pub reconstruction: f64,
    /// `max |H*_y g^| / max |y|^2 |f^|`.
    pub h_star: f64,
    /// `max |K*_y g^| / max |y| |f^|`.
    pub k_star: f64,
    /// `max |<u^, y>| / max |y| |u^|`.
    pub u_orthogonality: f64,
    pub means: Vec<f64>,
    pub v_decay: f64,
    pub u_decay: f64,
}

#[derive(Debug, Clone)]
pub struct ElasticSplit {
    pub v: GridField,
    pub u: GridField,
    pub g: GridField,
    pub residuals: ElasticResiduals,
}

/// `f = Hv + Ku + g` with `H*g = K*g = 0` and `u` divergence-free.
pub fn decompose_elastic(f: &GridField, opts: DecomposeOptions) -> Result<ElasticSplit> {
    f.expect_kind(FieldKind::Elastic2)?;
    let means = check_means(f, opts.mean_tol)?;
    let grid = *f.grid();
    let n = grid.n();
    let spec = fft_field(f);
    let mut vhat = SpectralField::zeros(grid, FieldKind::Sym2);
    let mut uhat = SpectralField::zeros(grid, FieldKind::Vector);
    let minus_i = Complex64::new(0.0, -1.0);
    for b in 0..n {
        for a in 0..n {
            if is_skipped(&grid, a, b) {
                continue;
            }
            let y = spec.frequency(a, b);
            let t = ElasticTensor2::from_components(2, spec.at(a, b))?;
            let parts = pointwise_split_elastic(&t, &y)?;
            let v: Vec<Complex64> = parts.v.components().iter().map(|&x| -x).collect();
            let u: Vec<Complex64> = parts.u.components().iter().map(|&x| x * minus_i).collect();
            vhat.set_at(a, b, &v);
            uhat.set_at(a, b, &u);
        }
    }
    let v = ring_normalize(ifft_field(&vhat));
    let u = ring_normalize(ifft_field(&uhat));
    let hv = apply_h(&v, Backend::Spectral)?;
    let ku = apply_k(&u, Backend::Spectral)?;
    let g = f.sub(&hv)?.sub(&ku)?;

    let recon = f.sub(&hv)?.sub(&ku)?.sub(&g)?.max_abs();
    let gspec = fft_field(&g);
    let uspec = fft_field(&u);
    let (mut h_num, mut k_num, mut h_den, mut k_den) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut o_num, mut o_den) = (0.0f64, 0.0f64);
    for b in 0..n {
        for a in 0..n {
            if grid.is_nyquist(a) || grid.is_nyquist(b) {
                continue;
            }
            let y = gspec.frequency(a, b);
            let ynorm = norm2(&y).sqrt();
            let gt = ElasticTensor2::from_components(2, gspec.at(a, b))?;
            let ft = ElasticTensor2::from_components(2, spec.at(a, b))?;
            h_num = h_num.max(h_hat_star(&y, &gt).max_modulus());
            k_num = k_num.max(k_hat_star(&y, &gt).max_modulus());
            h_den = h_den.max(ynorm * ynorm * ft.max_modulus());
            k_den = k_den.max(ynorm * ft.max_modulus());
            let ut = uspec.at(a, b);
            o_num = o_num.max((ut[0] * y[0] + ut[1] * y[1]).norm());
            o_den = o_den.max(ynorm * ut[0].norm().max(ut[1].norm()));
        }
    }
    let residuals = ElasticResiduals {
        reconstruction: ratio(recon, f.max_abs()),
        h_star: ratio(h_num, h_den),
        k_star: ratio(k_num, k_den),
        u_orthogonality: ratio(o_num, o_den),
        means,
        v_decay: v.boundary_decay(),
        u_decay: u.boundary_decay(),
    };
    Ok(ElasticSplit { v, u, g, residuals })
}

/// Behaviour of `|v^(r w)| |r w|^2 = |w . f^(r w) . w|` as `r -> 0` along one direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeDirection {
    pub omega: [f64; 2],
    /// `|w . f^(0) . w|`.
    pub expected: f64,
    /// Quadratic extrapolation to `r = 0` from three sub-lattice radii.
    pub fitted: f64,
    /// `fitted / expected`, when `expected` is nonzero.
    pub agreement: Option<f64>,
    /// `(r, |v^| r^2)` at the three smallest lattice radii along `w`.
    pub lattice: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanZeroProbe {
    pub directions: Vec<ProbeDirection>,
    pub max_fitted: f64,
}

fn contract_dir(f: &[Complex64; 3], w: [f64; 2]) -> f64 {
    (f[0] * (w[0] * w[0]) + f[1] * (2.0 * w[0] * w[1]) + f[2] * (w[1] * w[1])).norm()
}

/// Measures the `|y|^{-2}` singularity a nonzero mean leaves in `v^`.
///
/// `f^` is evaluated off the lattice by direct quadrature at radii
/// `e, 2e, 3e` with `e = 1e-3 pi / L` and extrapolated to `r = 0`.
/// The three smallest lattice radii are reported alongside for reference.
pub fn mean_zero_necessity_probe(f: &GridField) -> Result<MeanZeroProbe> {
    f.expect_kind(FieldKind::Sym2)?;
    let grid = *f.grid();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dirs = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
    let eps = grid.frequency_step() * 1e-3;
    let at = |y: [f64; 2]| -> [Complex64; 3] {
        [dft_at(&grid, f.component(0), y), dft_at(&grid, f.component(1), y), dft_at(&grid, f.component(2), y)]
    };
    let f0 = at([0.0, 0.0]);
    let spec = fft_field(f);
    let n = grid.n();
    let mut directions = Vec::new();
    for w in dirs {
        let expected = contract_dir(&f0, w);
        let c: Vec<f64> =
            (1..=3).map(|k| contract_dir(&at([k as f64 * eps * w[0], k as f64 * eps * w[1]]), w)).collect();
        let fitted = (3.0 * c[0] - 3.0 * c[1] + c[2]).abs();
        // lattice steps along the direction: (1,0), (0,1), (1,1), (1,-1)
        let step = [w[0].signum() as i64 * (w[0] != 0.0) as i64, w[1].signum() as i64 * (w[1] != 0.0) as i64];
        let lattice = (1..=3i64)
            .map(|k| {
                let idx = |m: i64| (m.rem_euclid(n as i64)) as usize;
                let (a, b) = (idx(k * step[0]), idx(k * step[1]));
                let y = spec.frequency(a, b);
                let vals = spec.at(a, b);
                let t = SymTensor::from_components(2, 2, vals).unwrap();
                let y2 = norm2(&y);
                let (_, v) = pointwise_split_sym2(&t, &y).unwrap();
                (y2.sqrt(), v.get(&[]).norm() * y2)
            })
            .collect();
        let agreement = (expected > 0.0).then(|| fitted / expected);
        directions.push(ProbeDirection { omega: w, expected, fitted, agreement, lattice });
    }
    let max_fitted = directions.iter().fold(0.0f64, |m, d| m.max(d.fitted));
    Ok(MeanZeroProbe { directions, max_fitted })
}
