//! Line-integral transforms of tensor fields.
//!
//! Off-grid values come from a cubic B-spline fitted to the field's
//! trigonometric interpolant on a grid four times finer. Points outside
//! `[-L, L)^2` count as zero. Each line integral is a composite trapezoid rule
//! with step at most `h / 2` over the chord `|t - t0| <= L sqrt 2`, where `t0`
//! is the parameter of the point of the line closest to the origin.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_field::{FieldKind, Grid2, GridField};
use crate::spectral::{dft_at, Fft2};
use crate::tensor_core::pairs;

/// Refinement factor of the spline grid.
pub const UPSAMPLE: usize = 4;

/// Per direction: contraction weights and the `(channel, moment)` pairs they feed.
type SweepSpec<'a> = dyn Fn([f64; 2]) -> Vec<(Vec<f64>, Vec<(Channel, u32)>)> + Sync + 'a;

/// Lines `x = s xi_perp + t xi` with `xi = (cos phi, sin phi)`, `phi_a = a pi / A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineGrid {
    n_angles: usize,
    n_offsets: usize,
    extent: f64,
}

impl LineGrid {
    pub fn new(grid: &Grid2, n_angles: usize, n_offsets: usize) -> Result<Self> {
        if n_angles == 0 || n_offsets < 2 {
            return Err(Error::InvalidArgument(format!(
                "line grid needs >= 1 angle and >= 2 offsets, got {n_angles} x {n_offsets}"
            )));
        }
        Ok(Self { n_angles, n_offsets, extent: grid.extent() })
    }

    /// 64 angles and `N + 1` offsets, so offsets coincide with grid lines.
    pub fn desk(grid: &Grid2) -> Self {
        Self { n_angles: 64, n_offsets: grid.n() + 1, extent: grid.extent() }
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn n_offsets(&self) -> usize {
        self.n_offsets
    }

    pub fn angle(&self, a: usize) -> f64 {
        a as f64 * PI / self.n_angles as f64
    }

    pub fn offset(&self, b: usize) -> f64 {
        -self.extent + b as f64 * 2.0 * self.extent / (self.n_offsets - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_angles * self.n_offsets
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn direction(phi: f64) -> [f64; 2] {
    [phi.cos(), phi.sin()]
}

/// Right-handed perpendicular `(-xi_2, xi_1)`.
pub fn perp(xi: [f64; 2]) -> [f64; 2] {
    [-xi[1], xi[0]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    I0,
    I1,
    I2,
    X1Long,
    X1Perp,
    X2Long,
    X2Perp,
    Mixed,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::I0 => "i0",
            Channel::I1 => "i1",
            Channel::I2 => "i2",
            Channel::X1Long => "x1_long",
            Channel::X1Perp => "x1_perp",
            Channel::X2Long => "x2_long",
            Channel::X2Perp => "x2_perp",
            Channel::Mixed => "mixed",
        }
    }

    fn moment(q: u32) -> Self {
        [Channel::I0, Channel::I1, Channel::I2][q as usize]
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "i0" => Channel::I0,
            "i1" => Channel::I1,
            "i2" => Channel::I2,
            "x1_long" => Channel::X1Long,
            "x1_perp" => Channel::X1Perp,
            "x2_long" => Channel::X2Long,
            "x2_perp" => Channel::X2Perp,
            "mixed" => Channel::Mixed,
            other => return Err(Error::Parse(format!("unknown channel '{other}'"))),
        })
    }
}

/// Ray-transform samples, one `A x B` table per channel (angle slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    lines: LineGrid,
    channels: Vec<Channel>,
    values: Vec<Vec<f64>>,
}

impl Sinogram {
    pub fn new(lines: LineGrid, channels: Vec<Channel>, values: Vec<Vec<f64>>) -> Result<Self> {
        if channels.len() != values.len() {
            return Err(Error::ShapeMismatch { expected: channels.len(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| v.len() != lines.len()) {
            return Err(Error::ShapeMismatch { expected: lines.len(), got: v.len() });
        }
        Ok(Self { lines, channels, values })
    }

    pub fn lines(&self) -> &LineGrid {
        &self.lines
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, ch: Channel) -> Option<&[f64]> {
        self.channels.iter().position(|&c| c == ch).map(|i| self.values[i].as_slice())
    }

    pub fn get(&self, ch: Channel, a: usize, b: usize) -> Option<f64> {
        self.channel(ch).map(|v| v[a * self.lines.n_offsets + b])
    }

    pub fn max_abs(&self, ch: Channel) -> Option<f64> {
        self.channel(ch).map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }

    pub fn max_abs_all(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Joins the channels of two sinograms over the same lines.
    pub fn stack(mut self, other: Sinogram) -> Result<Self> {
        if self.lines != other.lines {
            return Err(Error::InvalidArgument("sinograms use different line grids".into()));
        }
        self.channels.extend(other.channels);
        self.values.extend(other.values);
        Ok(self)
    }
}

/// Weights `w_c` with `sum_c w_c f_c = <f, (xi (x) zeta)^{(x) m}>` for the stored components.
pub fn ray_weights(kind: FieldKind, xi: [f64; 2], zeta: [f64; 2]) -> Result<Vec<f64>> {
    let b: Vec<f64> = pairs(2)
        .iter()
        .map(|&(i, j)| if i == j { xi[i] * zeta[j] } else { xi[i] * zeta[j] + xi[j] * zeta[i] })
        .collect();
    match kind {
        FieldKind::Sym2 => Ok(b),
        FieldKind::Elastic2 => {
            let mut w = Vec::with_capacity(6);
            for p in 0..3 {
                for q in p..3 {
                    w.push(b[p] * b[q] * if p == q { 1.0 } else { 2.0 });
                }
            }
            Ok(w)
        }
        FieldKind::Scalar => Ok(vec![1.0]),
        other => Err(Error::KindMismatch { expected: "sym2 or elastic2".into(), got: other.to_string() }),
    }
}

fn bspline_weights(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    let t2 = t * t;
    let t3 = t2 * t;
    [s * s * s / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0, (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0]
}

/// Spline representation of a field for evaluation along arbitrary lines.
pub struct LineIntegrator {
    grid: Grid2,
    kind: FieldKind,
    fine_n: usize,
    fine_h: f64,
    coeffs: Vec<Vec<f64>>,
    peak: f64,
}

impl LineIntegrator {
    pub fn new(f: &GridField) -> Self {
        let grid = *f.grid();
        let fine_n = grid.n() * UPSAMPLE;
        let coarse = Fft2::new(grid.n());
        let fine = Fft2::new(fine_n);
        let coeffs = f.components().iter().map(|c| spline_coeffs(&grid, &coarse, &fine, c)).collect();
        Self { grid, kind: f.kind(), fine_n, fine_h: grid.spacing() / UPSAMPLE as f64, coeffs, peak: f.max_abs() }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// `||f||_inf L`, the natural size of a line integral of `f`.
    pub fn scale(&self) -> f64 {
        self.peak * self.grid.extent()
    }

    fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.fine_n * self.fine_n];
        for (c, &w) in self.coeffs.iter().zip(weights) {
            if w != 0.0 {
                out.iter_mut().zip(c).for_each(|(o, v)| *o += w * v);
            }
        }
        out
    }

    fn eval_coeffs(&self, c: &[f64], x: [f64; 2]) -> f64 {
        let l = self.grid.extent();
        if x[0] < -l || x[0] >= l || x[1] < -l || x[1] >= l {
            return 0.0;
        }
        let m = self.fine_n;
        let u = [(x[0] + l) / self.fine_h, (x[1] + l) / self.fine_h];
        let i = [u[0].floor(), u[1].floor()];
        let w0 = bspline_weights(u[0] - i[0]);
        let w1 = bspline_weights(u[1] - i[1]);
        let (i0, i1) = (i[0] as usize + m, i[1] as usize + m);
        let mut acc = 0.0;
        for (dj, wj) in w1.iter().enumerate() {
            let row = (i1 + dj - 1) % m * m;
            let mut r = 0.0;
            for (di, wi) in w0.iter().enumerate() {
                r += wi * c[row + (i0 + di - 1) % m];
            }
            acc += wj * r;
        }
        acc
    }

    /// Interpolated value of component `c` at `x`.
    pub fn component_at(&self, c: usize, x: [f64; 2]) -> f64 {
        self.eval_coeffs(&self.coeffs[c], x)
    }

    /// `sum_c w_c f_c(x)` from the spline.
    pub fn eval(&self, weights: &[f64], x: [f64; 2]) -> f64 {
        self.coeffs.iter().zip(weights).filter(|(_, &w)| w != 0.0).map(|(c, &w)| w * self.eval_coeffs(c, x)).sum()
    }

    /// `int t^q G(x + t xi) dt` for each `q` in `qs`, with `G` the spline `c` and any nonzero `xi`.
    fn moments_with(&self, g: impl Fn([f64; 2]) -> f64, x: [f64; 2], xi: [f64; 2], qs: &[u32]) -> Vec<f64> {
        let len = dot(xi, xi).sqrt();
        let dir = [xi[0] / len, xi[1] / len];
        // arc-length parameter u = |xi| t
        let u0 = -dot(x, dir);
        let half = self.grid.extent() * std::f64::consts::SQRT_2;
        let steps = (2.0 * half / (0.5 * self.grid.spacing())).ceil() as usize;
        let tau = 2.0 * half / steps as f64;
        let mut out = vec![0.0; qs.len()];
        for k in 0..=steps {
            let u = u0 - half + k as f64 * tau;
            let val = g([x[0] + u * dir[0], x[1] + u * dir[1]]);
            if val == 0.0 {
                continue;
            }
            let w = if k == 0 || k == steps { 0.5 * tau } else { tau };
            let t = u / len;
            for (o, &q) in out.iter_mut().zip(qs) {
                *o += w * val * t.powi(q as i32);
            }
        }
        out.iter_mut().zip(qs).for_each(|(o, _)| *o /= len);
        out
    }

    /// `int t^q sum_c w_c f_c(x + t xi) dt`.
    pub fn line_moments(&self, weights: &[f64], x: [f64; 2], xi: [f64; 2], qs: &[u32]) -> Result<Vec<f64>> {
        if dot(xi, xi) == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(self.moments_with(|p| self.eval(weights, p), x, xi, qs))
    }

    /// `J^q f(x, xi) = int t^q f_ij(x + t xi) xi^i xi^j dt` by direct quadrature.
    pub fn momentum_j_direct(&self, q: u32, x: [f64; 2], xi: [f64; 2]) -> Result<f64> {
        self.kind_is(FieldKind::Sym2)?;
        let w = ray_weights(FieldKind::Sym2, xi, xi)?;
        Ok(self.line_moments(&w, x, xi, &[q])?[0])
    }

    /// `(I^0, I^1, I^2)` on the line through `x` with unit direction `xi`.
    pub fn momentum_i_at(&self, x: [f64; 2], xi: [f64; 2]) -> Result<[f64; 3]> {
        self.kind_is(FieldKind::Sym2)?;
        let w = ray_weights(FieldKind::Sym2, xi, xi)?;
        let m = self.line_moments(&w, x, xi, &[0, 1, 2])?;
        Ok([m[0], m[1], m[2]])
    }

    /// `(J^0, J^1, J^2)` from `I^q` at the projected base point.
    pub fn momentum_j_via_i(&self, x: [f64; 2], xi: [f64; 2]) -> Result<[f64; 3]> {
        let len2 = dot(xi, xi);
        if len2 == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let len = len2.sqrt();
        let a = dot(x, xi) / len2;
        let base = [x[0] - a * xi[0], x[1] - a * xi[1]];
        let i = self.momentum_i_at(base, [xi[0] / len, xi[1] / len])?;
        j_from_i(i, x, xi)
    }

    /// `int f_kj(x + t xi) xi_j dt` for `k = 1, 2`.
    pub fn vector_transform(&self, x: [f64; 2], xi: [f64; 2]) -> Result<[f64; 2]> {
        self.kind_is(FieldKind::Sym2)?;
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            let mut e = [0.0; 2];
            e[k] = 1.0;
            *o = self.line_moments(&ray_weights(FieldKind::Sym2, e, xi)?, x, xi, &[0])?[0];
        }
        Ok(out)
    }

    /// `M(x, xi, eta) = int f_ij(x + t xi) xi_i (eta - <xi, eta> xi / |xi|^2)_j dt`.
    pub fn mixed_at(&self, x: [f64; 2], xi: [f64; 2], eta: [f64; 2]) -> Result<f64> {
        self.kind_is(FieldKind::Sym2)?;
        let len2 = dot(xi, xi);
        if len2 == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let c = dot(xi, eta) / len2;
        let eta_perp = [eta[0] - c * xi[0], eta[1] - c * xi[1]];
        Ok(self.line_moments(&ray_weights(FieldKind::Sym2, xi, eta_perp)?, x, xi, &[0])?[0])
    }

    fn kind_is(&self, kind: FieldKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch { expected: kind.to_string(), got: self.kind.to_string() });
        }
        Ok(())
    }

    /// One row per angle: for each weight set, the listed moments on every offset.
    fn sweep(
        &self,
        lines: &LineGrid,
        specs: &SweepSpec<'_>,
    ) -> Result<Sinogram> {
        let rows: Vec<Vec<(Channel, Vec<f64>)>> = (0..lines.n_angles)
            .into_par_iter()
            .map(|a| {
                let xi = direction(lines.angle(a));
                let xp = perp(xi);
                let mut out = Vec::new();
                for (weights, chans) in specs(xi) {
                    let c = self.combine(&weights);
                    let qs: Vec<u32> = chans.iter().map(|&(_, q)| q).collect();
                    let mut vals = vec![Vec::with_capacity(lines.n_offsets); chans.len()];
                    for b in 0..lines.n_offsets {
                        let s = lines.offset(b);
                        let m = self.moments_with(|p| self.eval_coeffs(&c, p), [s * xp[0], s * xp[1]], xi, &qs);
                        for (v, x) in vals.iter_mut().zip(m) {
                            v.push(x);
                        }
                    }
                    out.extend(chans.iter().map(|&(ch, _)| ch).zip(vals));
                }
                out
            })
            .collect();
        let channels: Vec<Channel> = rows.first().map(|r| r.iter().map(|(c, _)| *c).collect()).unwrap_or_default();
        let mut values = vec![Vec::with_capacity(lines.len()); channels.len()];
        for row in rows {
            for (v, (_, r)) in values.iter_mut().zip(row) {
                v.extend(r);
            }
        }
        Sinogram::new(*lines, channels, values)
    }
}

fn spline_coeffs(grid: &Grid2, coarse: &Fft2, fine: &Fft2, values: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let m = n * UPSAMPLE;
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    coarse.forward(&mut spec);
    let symbol = |k: i64| 2.0 / 3.0 + (2.0 * PI * k as f64 / m as f64).cos() / 3.0;
    let mut up = vec![Complex64::new(0.0, 0.0); m * m];
    let norm = 1.0 / (n * n) as f64;
    for b in 0..n {
        if grid.is_nyquist(b) {
            continue;
        }
        let kb = grid.wavenumber(b);
        for a in 0..n {
            if grid.is_nyquist(a) {
                continue;
            }
            let ka = grid.wavenumber(a);
            let fa = ka.rem_euclid(m as i64) as usize;
            let fb = kb.rem_euclid(m as i64) as usize;
            up[fb * m + fa] = spec[grid.offset(a, b)] * (norm / (symbol(ka) * symbol(kb)));
        }
    }
    fine.inverse(&mut up);
    up.iter().map(|c| c.re).collect()
}

/// `(J^0, J^1, J^2)(x, xi)` from `I^q` sampled at `x - (<x, xi> / |xi|^2) xi` along `xi / |xi|`.
pub fn j_from_i(i: [f64; 3], x: [f64; 2], xi: [f64; 2]) -> Result<[f64; 3]> {
    let len2 = dot(xi, xi);
    if len2 == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let len = len2.sqrt();
    let c = dot(xi, x);
    Ok([
        len * i[0],
        -c / len * i[0] + i[1],
        c * c / (len2 * len) * i[0] - 2.0 * c / len2 * i[1] + i[2] / len,
    ])
}

/// `I^q f` for each requested `q <= 2` over all lines.
pub fn momentum_i(f: &GridField, qs: &[u32], lines: &LineGrid) -> Result<Sinogram> {
    f.expect_kind(FieldKind::Sym2)?;
    if let Some(&q) = qs.iter().find(|&&q| q > 2) {
        return Err(Error::InvalidArgument(format!("moment order {q} exceeds 2")));
    }
    let li = LineIntegrator::new(f);
    let chans: Vec<(Channel, u32)> = qs.iter().map(|&q| (Channel::moment(q), q)).collect();
    li.sweep(lines, &|xi| vec![(ray_weights(FieldKind::Sym2, xi, xi).unwrap(), chans.clone())])
}

/// Elastic ray transform `X^m` with polarizations `zeta = xi` and `zeta = xi_perp`.
///
/// `m = 1` takes a symmetric 2-tensor field, `m = 2` an elastic one.
pub fn elastic_x(f: &GridField, m: u32, lines: &LineGrid) -> Result<Sinogram> {
    let (kind, long, tran) = match m {
        1 => (FieldKind::Sym2, Channel::X1Long, Channel::X1Perp),
        2 => (FieldKind::Elastic2, Channel::X2Long, Channel::X2Perp),
        _ => return Err(Error::InvalidArgument(format!("elastic transform order {m} must be 1 or 2"))),
    };
    f.expect_kind(kind)?;
    let li = LineIntegrator::new(f);
    li.sweep(lines, &|xi| {
        vec![
            (ray_weights(kind, xi, xi).unwrap(), vec![(long, 0)]),
            (ray_weights(kind, xi, perp(xi)).unwrap(), vec![(tran, 0)]),
        ]
    })
}

/// Mixed ray transform `int f_ij(x + t xi) xi_i xi_perp_j dt`.
pub fn mixed_m(f: &GridField, lines: &LineGrid) -> Result<Sinogram> {
    f.expect_kind(FieldKind::Sym2)?;
    let li = LineIntegrator::new(f);
    li.sweep(lines, &|xi| vec![(ray_weights(FieldKind::Sym2, xi, perp(xi)).unwrap(), vec![(Channel::Mixed, 0)])])
}

/// Both sides of the slice identity along one angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceAngle {
    pub phi: f64,
    pub sigma: Vec<f64>,
    /// `(2 pi)^{-1/2} int I^0 f(s xi_perp, xi) e^{-i s sigma} ds`, as `(re, im)`.
    pub lhs: Vec<(f64, f64)>,
    /// `(2 pi)^{1/2} f^_ij(sigma xi_perp) xi^i xi^j`, as `(re, im)`.
    pub rhs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceReport {
    pub angles: Vec<SliceAngle>,
    /// `max |lhs - rhs|` over all angles and frequencies.
    pub max_error: f64,
    /// `max |rhs|`.
    pub max_reference: f64,
}

impl SliceReport {
    pub fn relative_error(&self) -> f64 {
        if self.max_reference == 0.0 {
            self.max_error
        } else {
            self.max_error / self.max_reference
        }
    }
}

/// Compares the 1-D transform over offsets of `I^0 f` with the field spectrum on the
/// perpendicular frequency line, for `|sigma| <= sigma_max`.
pub fn fourier_slice_check(f: &GridField, phis: &[f64], sigma_max: f64) -> Result<SliceReport> {
    f.expect_kind(FieldKind::Sym2)?;
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let l = grid.extent();
    let li = LineIntegrator::new(f);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut angles = Vec::new();
    let (mut max_error, mut max_reference) = (0.0f64, 0.0f64);
    for &phi in phis {
        let xi = direction(phi);
        let xp = perp(xi);
        let w = ray_weights(FieldKind::Sym2, xi, xi)?;
        let mut row: Vec<Complex64> = (0..n)
            .map(|b| {
                let s = grid.coord(b);
                Complex64::new(li.line_moments(&w, [s * xp[0], s * xp[1]], xi, &[0]).unwrap()[0], 0.0)
            })
            .collect();
        fft.process(&mut row);
        let mut sa = SliceAngle { phi, sigma: vec![], lhs: vec![], rhs: vec![] };
        for (k, &x) in row.iter().enumerate() {
            let kk = grid.wavenumber(k);
            let sigma = PI / l * kk as f64;
            if sigma.abs() > sigma_max || grid.is_nyquist(k) {
                continue;
            }
            let lhs = x * Complex64::from_polar(1.0, l * sigma) * (h / (2.0 * PI).sqrt());
            let y = [sigma * xp[0], sigma * xp[1]];
            let fhat: Complex64 =
                (0..3).map(|c| dft_at(&grid, f.component(c), y) * w[c]).sum::<Complex64>();
            let rhs = fhat * (2.0 * PI).sqrt();
            max_error = max_error.max((lhs - rhs).norm());
            max_reference = max_reference.max(rhs.norm());
            sa.sigma.push(sigma);
            sa.lhs.push((lhs.re, lhs.im));
            sa.rhs.push((rhs.re, rhs.im));
        }
        angles.push(sa);
    }
    Ok(SliceReport { angles, max_error, max_reference })
}

/// Finite-difference check of `d_xi_k J^0 - d_x_k J^1 = 2 int f_kj xi_j dt` at one probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationProbe {
    pub x: [f64; 2],
    pub xi: [f64; 2],
    /// `d_xi_k J^0 - d_x_k J^1`.
    pub lhs: [f64; 2],
    /// `2 int f_kj xi_j dt`.
    pub rhs: [f64; 2],
    /// `d_x_k J^1` by finite differences.
    pub dx_j1: [f64; 2],
    /// `d_xi_k J^0 - 2 (d_eta_k M + xi_k J^0 / |xi|^2)`.
    pub recovered_dx_j1: [f64; 2],
    /// Change of the left side when the step is halved.
    pub richardson: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub probes: Vec<RelationProbe>,
    pub step: f64,
    pub scale: f64,
    pub max_relation: f64,
    pub max_recovery: f64,
    pub max_richardson: f64,
}

/// Default finite-difference step in `x`, `xi` and `eta`.
pub const FD_STEP: f64 = 1e-3;

/// Evaluates the moment relation and the recovery of `d_x J^1` from `X^1` data.
///
/// Probes are `(x, xi)` with `|xi| = 1` and `x` orthogonal to `xi`.
pub fn moment_relation_residual(f: &GridField, probes: &[([f64; 2], [f64; 2])], step: f64) -> Result<RelationReport> {
    f.expect_kind(FieldKind::Sym2)?;
    let li = LineIntegrator::new(f);
    let j = |x: [f64; 2], xi: [f64; 2]| li.momentum_j_via_i(x, xi);
    let lhs_at = |x: [f64; 2], xi: [f64; 2], k: usize, d: f64| -> Result<(f64, f64)> {
        let mut e = [0.0; 2];
        e[k] = d;
        let dxi = (j(x, [xi[0] + e[0], xi[1] + e[1]])?[0] - j(x, [xi[0] - e[0], xi[1] - e[1]])?[0]) / (2.0 * d);
        let dx = (j([x[0] + e[0], x[1] + e[1]], xi)?[1] - j([x[0] - e[0], x[1] - e[1]], xi)?[1]) / (2.0 * d);
        Ok((dxi, dx))
    };
    let mut out = Vec::with_capacity(probes.len());
    let (mut max_relation, mut max_recovery, mut max_richardson) = (0.0f64, 0.0f64, 0.0f64);
    for &(x, xi) in probes {
        let j0 = j(x, xi)?[0];
        let v = li.vector_transform(x, xi)?;
        let eta0 = perp(xi);
        let mut p = RelationProbe {
            x,
            xi,
            lhs: [0.0; 2],
            rhs: [0.0; 2],
            dx_j1: [0.0; 2],
            recovered_dx_j1: [0.0; 2],
            richardson: [0.0; 2],
        };
        for k in 0..2 {
            let (dxi, dx) = lhs_at(x, xi, k, step)?;
            let (dxi2, dx2) = lhs_at(x, xi, k, 0.5 * step)?;
            let mut e = [0.0; 2];
            e[k] = step;
            let dm = (li.mixed_at(x, xi, [eta0[0] + e[0], eta0[1] + e[1]])?
                - li.mixed_at(x, xi, [eta0[0] - e[0], eta0[1] - e[1]])?)
                / (2.0 * step);
            p.lhs[k] = dxi - dx;
            p.rhs[k] = 2.0 * v[k];
            p.dx_j1[k] = dx;
            p.recovered_dx_j1[k] = dxi - 2.0 * (dm + xi[k] * j0 / dot(xi, xi));
            p.richardson[k] = ((dxi - dx) - (dxi2 - dx2)).abs();
            max_relation = max_relation.max((p.lhs[k] - p.rhs[k]).abs());
            max_recovery = max_recovery.max((p.dx_j1[k] - p.recovered_dx_j1[k]).abs());
            max_richardson = max_richardson.max(p.richardson[k]);
        }
        out.push(p);
    }
    Ok(RelationReport { probes: out, step, scale: li.scale(), max_relation, max_recovery, max_richardson })
}
