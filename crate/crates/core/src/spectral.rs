//! Component-wise Fourier transforms of grid fields.
//!
//! The transform approximates `f^(y) = (2 pi)^{-1} int f(x) e^{-i x.y} dx` on the
//! lattice `y_k = (pi / L) k`, `k in {-N/2, .., N/2 - 1}^2`, stored in standard
//! FFT order (slot `i` holds wavenumber `i` for `i < N/2`, `i - N` otherwise).
//! Because grid points start at `-L`, the DFT picks up a `(-1)^{k1 + k2}` phase.
//!
//! Derivatives multiply by `i y`: `FT(d^k f) = i^k i_y^k f^` and
//! `FT(delta^k f) = i^k j_y^k f^`. The Nyquist row and column are cleared first.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid_field::{FieldKind, Grid2, GridField};
use crate::tensor_core::{SymTensor, MAX_SYM_ORDER};

/// In-place unnormalized 2-D FFT of a row-major `N x N` buffer.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(&self.fwd, buf);
    }

    /// Inverse transform without the `1 / N^2` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(&self.inv, buf);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n * self.n);
        plan.process(buf);
        transpose(buf, self.n);
        plan.process(buf);
        transpose(buf, self.n);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in r + 1..n {
            buf.swap(r * n + c, c * n + r);
        }
    }
}

/// Fourier transform of a [`GridField`], one complex array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid2,
    kind: FieldKind,
    data: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn new(grid: Grid2, kind: FieldKind, data: Vec<Vec<Complex64>>) -> Result<Self> {
        if data.len() != kind.num_components() {
            return Err(Error::ShapeMismatch { expected: kind.num_components(), got: data.len() });
        }
        if let Some(c) = data.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: c.len() });
        }
        Ok(Self { grid, kind, data })
    }

    pub fn zeros(grid: Grid2, kind: FieldKind) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { grid, kind, data: vec![vec![z; grid.len()]; kind.num_components()] }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.data
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.data[c]
    }

    /// Frequency `y` of storage slot `(a, b)`.
    pub fn frequency(&self, a: usize, b: usize) -> [f64; 2] {
        [self.grid.frequency(a), self.grid.frequency(b)]
    }

    /// Component values at one frequency.
    pub fn at(&self, a: usize, b: usize) -> Vec<Complex64> {
        let o = self.grid.offset(a, b);
        self.data.iter().map(|c| c[o]).collect()
    }

    pub fn set_at(&mut self, a: usize, b: usize, values: &[Complex64]) {
        let o = self.grid.offset(a, b);
        for (c, &v) in self.data.iter_mut().zip(values) {
            c[o] = v;
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Clears the `k = -N/2` row and column of every component.
    pub fn zero_nyquist(&mut self) {
        let grid = self.grid;
        let n = grid.n();
        let z = Complex64::new(0.0, 0.0);
        for c in &mut self.data {
            for b in 0..n {
                for a in 0..n {
                    if grid.is_nyquist(a) || grid.is_nyquist(b) {
                        c[grid.offset(a, b)] = z;
                    }
                }
            }
        }
    }

    /// `max |F(k) - conj F(-k)|` over all components and bins.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for c in &self.data {
            for b in 0..n {
                for a in 0..n {
                    let mirror = self.grid.offset((n - a) % n, (n - b) % n);
                    let d = (c[self.grid.offset(a, b)] - c[mirror].conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// Lattice `l2` norm `(pi/L) (sum |F|^2)^{1/2}` of each component.
    pub fn l2_norms(&self) -> Vec<f64> {
        let dy = self.grid.frequency_step();
        self.data.iter().map(|c| dy * c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect()
    }
}

fn phase(a: usize, b: usize) -> f64 {
    if (a + b).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn forward_component(grid: &Grid2, fft: &Fft2, values: &[f64]) -> Vec<Complex64> {
    let scale = grid.spacing().powi(2) / (2.0 * PI);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    let n = grid.n();
    for b in 0..n {
        for a in 0..n {
            buf[grid.offset(a, b)] *= scale * phase(a, b);
        }
    }
    buf
}

pub(crate) fn inverse_component(grid: &Grid2, fft: &Fft2, spectrum: &[Complex64]) -> Vec<f64> {
    let n = grid.n();
    let scale = 2.0 * PI / (grid.spacing().powi(2) * grid.len() as f64);
    let mut buf: Vec<Complex64> = spectrum.to_vec();
    for b in 0..n {
        for a in 0..n {
            buf[grid.offset(a, b)] *= scale * phase(a, b);
        }
    }
    fft.inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

pub fn fft_field(f: &GridField) -> SpectralField {
    let grid = *f.grid();
    let fft = Fft2::new(grid.n());
    let data = f.components().iter().map(|c| forward_component(&grid, &fft, c)).collect();
    SpectralField { grid, kind: f.kind(), data }
}

/// Inverse transform; keeps the real part.
pub fn ifft_field(s: &SpectralField) -> GridField {
    let grid = s.grid;
    let fft = Fft2::new(grid.n());
    let data = s.data.iter().map(|c| inverse_component(&grid, &fft, c)).collect();
    GridField::new(grid, s.kind, data).expect("inverse of a well-formed spectrum")
}

fn sym_order_of(s: &SpectralField) -> Result<usize> {
    s.kind.sym_order().ok_or_else(|| Error::KindMismatch {
        expected: "symmetric tensor field".into(),
        got: s.kind.to_string(),
    })
}

fn i_pow(k: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][k % 4]
}

fn map_bins(
    s: &SpectralField,
    out_kind: FieldKind,
    op: impl Fn([f64; 2], SymTensor<Complex64>) -> SymTensor<Complex64>,
) -> SpectralField {
    let mut src = s.clone();
    src.zero_nyquist();
    let in_order = s.kind.sym_order().unwrap();
    let mut out = SpectralField::zeros(s.grid, out_kind);
    let n = s.grid.n();
    for b in 0..n {
        for a in 0..n {
            let t = SymTensor::from_components(in_order, 2, src.at(a, b)).unwrap();
            let r = op(src.frequency(a, b), t);
            out.set_at(a, b, r.components());
        }
    }
    out
}

/// `FT(d^k f) = i^k i_y^k f^`.
pub fn spectral_d(s: &SpectralField, k: usize) -> Result<SpectralField> {
    let order = sym_order_of(s)?;
    if order + k > MAX_SYM_ORDER {
        return Err(Error::UnsupportedOrder { order: order + k, max: MAX_SYM_ORDER });
    }
    let kind = FieldKind::from_sym_order(order + k).unwrap();
    let factor = i_pow(k);
    Ok(map_bins(s, kind, |y, t| {
        let r = t.i_x_pow(&y, k).unwrap();
        SymTensor::from_components(r.order(), 2, r.components().iter().map(|&c| c * factor).collect())
            .unwrap()
    }))
}

/// `FT(delta^k f) = i^k j_y^k f^`.
pub fn spectral_div(s: &SpectralField, k: usize) -> Result<SpectralField> {
    let order = sym_order_of(s)?;
    if k > order {
        return Err(Error::OrderUnderflow { order, times: k });
    }
    let kind = FieldKind::from_sym_order(order - k).unwrap();
    let factor = i_pow(k);
    Ok(map_bins(s, kind, |y, t| {
        let r = t.j_x_pow(&y, k).unwrap();
        SymTensor::from_components(r.order(), 2, r.components().iter().map(|&c| c * factor).collect())
            .unwrap()
    }))
}

/// Multiplies one spectrum by `(i y1)^{a1} (i y2)^{a2}` with Nyquist bins cleared.
pub fn partial_symbol(grid: &Grid2, spectrum: &[Complex64], alpha: [usize; 2]) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let factor = i_pow(alpha[0] + alpha[1]);
    for b in 0..n {
        if grid.is_nyquist(b) {
            continue;
        }
        let y2 = grid.frequency(b).powi(alpha[1] as i32);
        for a in 0..n {
            if grid.is_nyquist(a) {
                continue;
            }
            let y1 = grid.frequency(a).powi(alpha[0] as i32);
            let o = grid.offset(a, b);
            out[o] = spectrum[o] * factor * (y1 * y2);
        }
    }
    out
}

/// Direct quadrature `(2 pi)^{-1} h^2 sum f(x) e^{-i x.y}` at an arbitrary frequency.
pub fn dft_at(grid: &Grid2, values: &[f64], y: [f64; 2]) -> Complex64 {
    let n = grid.n();
    let e1: Vec<Complex64> = (0..n).map(|a| Complex64::from_polar(1.0, -grid.coord(a) * y[0])).collect();
    let e2: Vec<Complex64> = (0..n).map(|b| Complex64::from_polar(1.0, -grid.coord(b) * y[1])).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for b in 0..n {
        let row = &values[b * n..(b + 1) * n];
        let inner: Complex64 = row.iter().zip(&e1).map(|(&v, &e)| e * v).sum();
        total += inner * e2[b];
    }
    total * (grid.spacing().powi(2) / (2.0 * PI))
}

/// Grid `l2` norm `h (sum f^2)^{1/2}` of each component.
pub fn grid_l2_norms(f: &GridField) -> Vec<f64> {
    let h = f.grid().spacing();
    f.components().iter().map(|c| h * c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{gen_gaussian, gen_hessian_field, gen_random_bandlimited, AnalyticScalar};

    fn gauss11(grid: &Grid2) -> GridField {
        gen_gaussian(grid, FieldKind::Sym2, [0.0, 0.0], 1.0, &[1.0, 0.0, 0.0], None).unwrap()
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let grid = Grid2::desk();
        let s = fft_field(&gauss11(&grid));
        let n = grid.n();
        let mut worst = 0.0f64;
        for b in 0..n {
            for a in 0..n {
                let y = s.frequency(a, b);
                let exact = 0.5 * (-(y[0] * y[0] + y[1] * y[1]) / 4.0).exp();
                worst = worst.max((s.at(a, b)[0] - exact).norm());
            }
        }
        assert!(worst < 1e-9, "{worst}");
        assert!(s.hermitian_defect() < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval() {
        let grid = Grid2::new(64, 4.0).unwrap();
        let f = gen_random_bandlimited(&grid, FieldKind::Sym2, 3, 0.5, false).unwrap();
        let s = fft_field(&f);
        let back = ifft_field(&s);
        assert!(back.max_abs_diff(&f).unwrap() <= 1e-12 * f.max_abs());
        for (g, l) in grid_l2_norms(&f).iter().zip(s.l2_norms()) {
            assert!((g - l).abs() <= 1e-10 * g);
        }
    }

    #[test]
    fn constant_shift_only_moves_the_zero_bin() {
        let grid = Grid2::new(32, 3.0).unwrap();
        let f = gen_random_bandlimited(&grid, FieldKind::Scalar, 1, 0.5, true).unwrap();
        let mut shifted = f.clone();
        shifted.shift(&[-0.75]);
        let (a, b) = (fft_field(&f), fft_field(&shifted));
        for (i, (x, y)) in a.component(0).iter().zip(b.component(0)).enumerate() {
            if i != 0 {
                assert!((x - y).norm() < 1e-14);
            }
        }
        let expected = 0.75 * 36.0 / (2.0 * PI);
        assert!((b.component(0)[0] - a.component(0)[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn spectral_hessian_matches_analytic() {
        let grid = Grid2::desk();
        let v = AnalyticScalar::gaussian([0.2, -0.3], 1.1, 1.0);
        let vf = GridField::new(grid, FieldKind::Scalar, vec![v.sample(&grid)]).unwrap();
        let d2 = ifft_field(&spectral_d(&fft_field(&vf), 2).unwrap());
        let exact = gen_hessian_field(&grid, &v);
        assert!(d2.max_abs_diff(&exact).unwrap() <= 1e-9 * exact.max_abs());
    }

    #[test]
    fn div_squared_of_hessian_is_bilaplacian() {
        let grid = Grid2::desk();
        let v = AnalyticScalar::gaussian([0.0, 0.0], 1.0, 1.0);
        let vf = GridField::new(grid, FieldKind::Scalar, vec![v.sample(&grid)]).unwrap();
        let s = spectral_d(&fft_field(&vf), 2).unwrap();
        let out = ifft_field(&spectral_div(&s, 2).unwrap());
        let bilap = v.partial([4, 0]).plus(&v.partial([2, 2]).scaled(2.0)).plus(&v.partial([0, 4]));
        let exact = GridField::new(grid, FieldKind::Scalar, vec![bilap.sample(&grid)]).unwrap();
        assert!(out.max_abs_diff(&exact).unwrap() <= 1e-8 * exact.max_abs());
    }

    #[test]
    fn order_limits() {
        let grid = Grid2::new(16, 1.0).unwrap();
        let s = SpectralField::zeros(grid, FieldKind::Sym2);
        assert!(matches!(spectral_d(&s, 2), Err(Error::UnsupportedOrder { .. })));
        let v = SpectralField::zeros(grid, FieldKind::Vector);
        assert!(matches!(spectral_div(&v, 2), Err(Error::OrderUnderflow { .. })));
        assert_eq!(spectral_div(&s, 1).unwrap().max_modulus(), 0.0);
    }

    #[test]
    fn dft_at_agrees_with_fft_on_lattice() {
        let grid = Grid2::new(32, 3.0).unwrap();
        let f = gen_random_bandlimited(&grid, FieldKind::Scalar, 5, 0.5, false).unwrap();
        let s = fft_field(&f);
        for &(a, b) in &[(0, 0), (3, 1), (30, 7), (12, 20)] {
            let direct = dft_at(&grid, f.component(0), s.frequency(a, b));
            assert!((direct - s.at(a, b)[0]).norm() < 1e-12);
        }
    }
}
