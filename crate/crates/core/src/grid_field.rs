//! Tensor fields sampled on a uniform periodic grid over `[-L, L)^2`.
//!
//! The periodic box stands in for the whole plane. That is only faithful for
//! fields that have decayed to machine noise at the box edge, so every field
//! records its boundary-decay ratio and the Gaussian generator refuses fields
//! that fail [`DECAY_GATE`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Fft2;
use crate::tensor_core::{canonical_indices, multiplicity, pairs};

/// Largest admissible ratio of boundary-ring magnitude to peak magnitude.
pub const DECAY_GATE: f64 = 1e-12;

pub const DEFAULT_GRID_N: usize = 128;
pub const DEFAULT_EXTENT: f64 = 6.0;

/// Uniform `N x N` grid on `[-L, L)^2`, sample `(a, b)` at `(-L + a h, -L + b h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    n: usize,
    extent: f64,
}

impl Grid2 {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N = {n} must be a power of two >= 16")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidGrid(format!("extent L = {extent} must be positive")));
        }
        Ok(Self { n, extent })
    }

    pub fn desk() -> Self {
        Self { n: DEFAULT_GRID_N, extent: DEFAULT_EXTENT }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, a: usize) -> f64 {
        -self.extent + a as f64 * self.spacing()
    }

    pub fn point(&self, a: usize, b: usize) -> [f64; 2] {
        [self.coord(a), self.coord(b)]
    }

    /// Row-major offset, `x1` fastest.
    pub fn offset(&self, a: usize, b: usize) -> usize {
        b * self.n + a
    }

    /// Signed wavenumber index of FFT storage slot `i`, in `-N/2..N/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Angular frequency `(pi / L) k` of FFT storage slot `i`.
    pub fn frequency(&self, i: usize) -> f64 {
        std::f64::consts::PI / self.extent * self.wavenumber(i) as f64
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Lattice spacing `pi / L` of the frequency grid.
    pub fn frequency_step(&self) -> f64 {
        std::f64::consts::PI / self.extent
    }

    /// `pi / h`, the magnitude of the Nyquist frequency.
    pub fn frequency_max(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    fn is_ring(&self, a: usize, b: usize) -> bool {
        a == 0 || b == 0 || a == self.n - 1 || b == self.n - 1
    }
}

/// What a grid field holds at each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Vector,
    Sym2,
    Sym3,
    Elastic2,
    /// Unsymmetrized 2-tensor, components `t11, t12, t21, t22`.
    Full2,
    /// Unsymmetrized 3-tensor, first index slowest.
    Full3,
}

impl FieldKind {
    pub fn num_components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 2,
            FieldKind::Sym2 => 3,
            FieldKind::Sym3 => 4,
            FieldKind::Elastic2 => 6,
            FieldKind::Full2 => 4,
            FieldKind::Full3 => 8,
        }
    }

    pub fn component_names(self) -> Vec<String> {
        let join = |idx: &[usize], prefix: &str| {
            let digits: String = idx.iter().map(|i| char::from(b'1' + *i as u8)).collect();
            format!("{prefix}{digits}")
        };
        match self {
            FieldKind::Scalar => vec!["v".into()],
            FieldKind::Vector => vec!["u1".into(), "u2".into()],
            FieldKind::Sym2 | FieldKind::Sym3 => {
                let order = self.sym_order().unwrap();
                canonical_indices(order, 2).iter().map(|i| join(i, "f")).collect()
            }
            FieldKind::Elastic2 => {
                let ps = pairs(2);
                let mut names = Vec::new();
                for p in 0..ps.len() {
                    for q in p..ps.len() {
                        names.push(join(&[ps[p].0, ps[p].1, ps[q].0, ps[q].1], "w"));
                    }
                }
                names
            }
            FieldKind::Full2 | FieldKind::Full3 => {
                let order = if self == FieldKind::Full2 { 2 } else { 3 };
                (0..1usize << order)
                    .map(|flat| {
                        let idx: Vec<usize> =
                            (0..order).rev().map(|bit| (flat >> bit) & 1).collect();
                        join(&idx, "t")
                    })
                    .collect()
            }
        }
    }

    /// Order when the kind is a symmetric tensor (scalars and vectors included).
    pub fn sym_order(self) -> Option<usize> {
        match self {
            FieldKind::Scalar => Some(0),
            FieldKind::Vector => Some(1),
            FieldKind::Sym2 => Some(2),
            FieldKind::Sym3 => Some(3),
            _ => None,
        }
    }

    pub fn from_sym_order(order: usize) -> Option<Self> {
        match order {
            0 => Some(FieldKind::Scalar),
            1 => Some(FieldKind::Vector),
            2 => Some(FieldKind::Sym2),
            3 => Some(FieldKind::Sym3),
            _ => None,
        }
    }

    /// Weight of each stored component in the full-index inner product.
    pub fn component_weights(self) -> Vec<f64> {
        match self {
            FieldKind::Full2 | FieldKind::Full3 => vec![1.0; self.num_components()],
            FieldKind::Elastic2 => {
                let ps = pairs(2);
                let m = |p: usize| if ps[p].0 == ps[p].1 { 1.0 } else { 2.0 };
                let mut w = Vec::new();
                for p in 0..ps.len() {
                    for q in p..ps.len() {
                        let sym = if p == q { 1.0 } else { 2.0 };
                        w.push(m(p) * m(q) * sym);
                    }
                }
                w
            }
            _ => {
                let order = self.sym_order().unwrap();
                canonical_indices(order, 2).iter().map(|i| multiplicity(i) as f64).collect()
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Vector => "vector",
            FieldKind::Sym2 => "sym2",
            FieldKind::Sym3 => "sym3",
            FieldKind::Elastic2 => "elastic2",
            FieldKind::Full2 => "full2",
            FieldKind::Full3 => "full3",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "scalar" => FieldKind::Scalar,
            "vector" => FieldKind::Vector,
            "sym2" => FieldKind::Sym2,
            "sym3" => FieldKind::Sym3,
            "elastic2" => FieldKind::Elastic2,
            "full2" => FieldKind::Full2,
            "full3" => FieldKind::Full3,
            other => return Err(Error::Parse(format!("unknown field kind '{other}'"))),
        })
    }
}

/// A tensor field on a [`Grid2`]: one row-major array per stored component.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid2,
    kind: FieldKind,
    data: Vec<Vec<f64>>,
}

impl GridField {
    pub fn new(grid: Grid2, kind: FieldKind, data: Vec<Vec<f64>>) -> Result<Self> {
        if data.len() != kind.num_components() {
            return Err(Error::ShapeMismatch { expected: kind.num_components(), got: data.len() });
        }
        for comp in &data {
            if comp.len() != grid.len() {
                return Err(Error::ShapeMismatch { expected: grid.len(), got: comp.len() });
            }
            if comp.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("field contains non-finite values".into()));
            }
        }
        Ok(Self { grid, kind, data })
    }

    pub fn zeros(grid: Grid2, kind: FieldKind) -> Self {
        Self { grid, kind, data: vec![vec![0.0; grid.len()]; kind.num_components()] }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    pub fn component_by_name(&self, name: &str) -> Option<&[f64]> {
        let names = self.kind.component_names();
        names.iter().position(|n| n == name).map(|c| self.data[c].as_slice())
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.data
    }

    pub fn expect_kind(&self, kind: FieldKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.to_string(),
                got: self.kind.to_string(),
            });
        }
        Ok(())
    }

    /// Component values at one grid node.
    pub fn at(&self, a: usize, b: usize) -> Vec<f64> {
        let o = self.grid.offset(a, b);
        self.data.iter().map(|c| c[o]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sum_c h^2 sum |f_c|`.
    pub fn l1_norm(&self) -> f64 {
        let h2 = self.grid.spacing().powi(2);
        self.data.iter().flatten().map(|v| v.abs()).sum::<f64>() * h2
    }

    /// Peak magnitude on the outermost ring divided by the global peak.
    pub fn boundary_decay(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.grid.n;
        let mut ring = 0.0f64;
        for b in 0..n {
            for a in 0..n {
                if self.grid.is_ring(a, b) {
                    let o = self.grid.offset(a, b);
                    for c in &self.data {
                        ring = ring.max(c[o].abs());
                    }
                }
            }
        }
        ring / peak
    }

    /// Mean of each component over the outermost ring.
    pub fn ring_means(&self) -> Vec<f64> {
        let n = self.grid.n;
        let mut sums = vec![0.0; self.data.len()];
        let mut count = 0usize;
        for b in 0..n {
            for a in 0..n {
                if self.grid.is_ring(a, b) {
                    let o = self.grid.offset(a, b);
                    for (s, c) in sums.iter_mut().zip(&self.data) {
                        *s += c[o];
                    }
                    count += 1;
                }
            }
        }
        sums.into_iter().map(|s| s / count as f64).collect()
    }

    /// Shifts every component by a constant.
    pub fn shift(&mut self, offsets: &[f64]) {
        for (c, &o) in self.data.iter_mut().zip(offsets) {
            c.iter_mut().for_each(|v| *v -= o);
        }
    }

    pub fn subtract_mean(&mut self) {
        let n = self.grid.len() as f64;
        let means: Vec<f64> = self.data.iter().map(|c| c.iter().sum::<f64>() / n).collect();
        self.shift(&means);
    }

    pub fn scaled(&self, s: f64) -> Self {
        let data = self.data.iter().map(|c| c.iter().map(|v| v * s).collect()).collect();
        Self { data, ..self.clone() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + s * y).collect())
            .collect();
        Ok(Self { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Grid quadrature of the full-index inner product `int <f, g> dx`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        let h2 = self.grid.spacing().powi(2);
        let w = self.kind.component_weights();
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .zip(w)
            .map(|((a, b), w)| w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum::<f64>()
            * h2)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: self.kind.to_string(),
                got: other.kind.to_string(),
            });
        }
        Ok(())
    }
}

/// Polynomial in the local coordinates `r = x - center`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0)
    }

    /// `c * r1^p1 * r2^p2`.
    pub fn monomial(c: f64, p1: u32, p2: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((p1, p2), c);
        }
        Self { terms }
    }

    pub fn plus(mut self, other: &Poly) -> Self {
        for (&k, &c) in &other.terms {
            *self.terms.entry(k).or_insert(0.0) += c;
        }
        self.terms.retain(|_, c| *c != 0.0);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, r: [f64; 2]) -> f64 {
        self.terms.iter().map(|(&(p, q), &c)| c * r[0].powi(p as i32) * r[1].powi(q as i32)).sum()
    }

    fn deriv(&self, axis: usize) -> Self {
        let mut out = BTreeMap::new();
        for (&(p, q), &c) in &self.terms {
            let (e, key) = if axis == 0 { (p, (p.wrapping_sub(1), q)) } else { (q, (p, q.wrapping_sub(1))) };
            if e > 0 {
                *out.entry(key).or_insert(0.0) += c * e as f64;
            }
        }
        Self { terms: out }
    }

    fn times_coord(&self, axis: usize, s: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&(p, q), &c)| (if axis == 0 { (p + 1, q) } else { (p, q + 1) }, c * s))
            .collect();
        Self { terms }
    }
}

/// `P(x - c) * exp(-|x - c|^2 / w^2)`; closed under differentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPoly {
    pub center: [f64; 2],
    pub width: f64,
    pub poly: Poly,
}

impl GaussPoly {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = [x[0] - self.center[0], x[1] - self.center[1]];
        let env = (-(r[0] * r[0] + r[1] * r[1]) / (self.width * self.width)).exp();
        self.poly.eval(r) * env
    }

    pub fn deriv(&self, axis: usize) -> Self {
        let poly = self.poly.deriv(axis).plus(&self.poly.times_coord(axis, -2.0 / self.width.powi(2)));
        Self { poly, ..self.clone() }
    }
}

/// Finite sum of [`GaussPoly`] terms with exact derivatives of any order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalyticScalar {
    terms: Vec<GaussPoly>,
}

impl AnalyticScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn gaussian(center: [f64; 2], width: f64, amplitude: f64) -> Self {
        Self::gauss_poly(center, width, Poly::constant(amplitude))
    }

    pub fn gauss_poly(center: [f64; 2], width: f64, poly: Poly) -> Self {
        Self { terms: vec![GaussPoly { center, width, poly }] }
    }

    pub fn plus(mut self, other: &AnalyticScalar) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| GaussPoly { poly: Poly::default().plus(&t.poly.times_scalar(s)), ..t.clone() })
            .collect();
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.poly.is_zero())
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn deriv(&self, axis: usize) -> Self {
        Self { terms: self.terms.iter().map(|t| t.deriv(axis)).collect() }
    }

    /// Mixed partial `d^{alpha1}_1 d^{alpha2}_2`.
    pub fn partial(&self, alpha: [usize; 2]) -> Self {
        let mut out = self.clone();
        for _ in 0..alpha[0] {
            out = out.deriv(0);
        }
        for _ in 0..alpha[1] {
            out = out.deriv(1);
        }
        out
    }

    pub fn sample(&self, grid: &Grid2) -> Vec<f64> {
        let n = grid.n();
        let mut out = vec![0.0; grid.len()];
        for b in 0..n {
            for a in 0..n {
                out[grid.offset(a, b)] = self.eval(grid.point(a, b));
            }
        }
        out
    }
}

impl Poly {
    fn times_scalar(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|(&k, &c)| (k, c * s)).collect() }
    }
}

/// Samples one analytic scalar per component.
pub fn sample_field(grid: &Grid2, kind: FieldKind, comps: &[AnalyticScalar]) -> Result<GridField> {
    if comps.len() != kind.num_components() {
        return Err(Error::ShapeMismatch { expected: kind.num_components(), got: comps.len() });
    }
    GridField::new(*grid, kind, comps.iter().map(|c| c.sample(grid)).collect())
}

/// Gaussian test field `c_k p_k(x - center) exp(-|x - center|^2 / width^2)`.
///
/// Fails with [`Error::DecayGate`] when the boundary ring carries more than
/// [`DECAY_GATE`] of the peak, since periodization would then corrupt spectra.
pub fn gen_gaussian(
    grid: &Grid2,
    kind: FieldKind,
    center: [f64; 2],
    width: f64,
    weights: &[f64],
    prefactors: Option<&[Poly]>,
) -> Result<GridField> {
    if width.is_nan() || width <= 0.0 {
        return Err(Error::InvalidArgument(format!("width {width} must be positive")));
    }
    let nc = kind.num_components();
    if weights.len() != nc {
        return Err(Error::ShapeMismatch { expected: nc, got: weights.len() });
    }
    if let Some(p) = prefactors {
        if p.len() != nc {
            return Err(Error::ShapeMismatch { expected: nc, got: p.len() });
        }
    }
    let comps: Vec<AnalyticScalar> = (0..nc)
        .map(|k| {
            let poly = prefactors.map_or_else(|| Poly::constant(1.0), |p| p[k].clone());
            AnalyticScalar::gauss_poly(center, width, poly.times_scalar(weights[k]))
        })
        .collect();
    let field = sample_field(grid, kind, &comps)?;
    let ratio = field.boundary_decay();
    if ratio >= DECAY_GATE {
        return Err(Error::DecayGate { ratio, gate: DECAY_GATE });
    }
    Ok(field)
}

/// Exact Hessian `f_ij = d_i d_j v` of an analytic scalar.
pub fn gen_hessian_field(grid: &Grid2, v: &AnalyticScalar) -> GridField {
    let comps = [v.partial([2, 0]), v.partial([1, 1]), v.partial([0, 2])];
    sample_field(grid, FieldKind::Sym2, &comps).expect("three components")
}

/// Cofactor of the Hessian, `(d22 phi, -d12 phi, d11 phi)`; always 2-solenoidal.
pub fn gen_cohessian_field(grid: &Grid2, phi: &AnalyticScalar) -> GridField {
    let comps = [phi.partial([0, 2]), phi.partial([1, 1]).scaled(-1.0), phi.partial([2, 0])];
    sample_field(grid, FieldKind::Sym2, &comps).expect("three components")
}

/// Divergence-free vector field `(d2 psi, -d1 psi)`.
pub fn gen_curl_field(grid: &Grid2, psi: &AnalyticScalar) -> [AnalyticScalar; 2] {
    let _ = grid;
    [psi.deriv(1), psi.deriv(0).scaled(-1.0)]
}

/// Exact nodal values of `Hv + Ku` for analytic `v = (v11, v12, v22)` and `u = (u1, u2)`.
pub fn gen_elastic_potential(
    grid: &Grid2,
    v: &[AnalyticScalar; 3],
    u: &[AnalyticScalar; 2],
) -> GridField {
    let ps = pairs(2);
    let alpha = |(i, j): (usize, usize)| {
        let mut a = [0usize; 2];
        a[i] += 1;
        a[j] += 1;
        a
    };
    // second derivatives d_P v_Q
    let dv = |p: usize, q: usize| v[q].partial(alpha(ps[p]));
    // strain e_P = (d_i u_j + d_j u_i) / 2
    let strain = |p: usize| {
        let (i, j) = ps[p];
        u[j].deriv(i).plus(&u[i].deriv(j)).scaled(0.5)
    };
    let is_diag = |p: usize| ps[p].0 == ps[p].1;
    let mut comps = Vec::new();
    for p in 0..ps.len() {
        for q in p..ps.len() {
            let mut c = dv(p, q).plus(&dv(q, p)).scaled(0.5);
            if is_diag(q) {
                c = c.plus(&strain(p).scaled(0.5));
            }
            if is_diag(p) {
                c = c.plus(&strain(q).scaled(0.5));
            }
            comps.push(c);
        }
    }
    sample_field(grid, FieldKind::Elastic2, &comps).expect("six components")
}

/// Seeded random field whose spectrum lives in `|y| <= rho * y_max`.
///
/// Nyquist bins are always empty and the zero bin is cleared when
/// `mean_zero` is set. The result is scaled to unit peak magnitude.
pub fn gen_random_bandlimited(
    grid: &Grid2,
    kind: FieldKind,
    seed: u64,
    rho: f64,
    mean_zero: bool,
) -> Result<GridField> {
    if !(rho > 0.0 && rho <= 0.5) {
        return Err(Error::InvalidArgument(format!("cutoff fraction {rho} must lie in (0, 1/2]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fft = Fft2::new(grid.n());
    let n = grid.n();
    let cutoff = rho * grid.frequency_max();
    let mut data = Vec::with_capacity(kind.num_components());
    for _ in 0..kind.num_components() {
        let mut buf: Vec<Complex64> =
            (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        fft.forward(&mut buf);
        for b in 0..n {
            for a in 0..n {
                let y = [grid.frequency(a), grid.frequency(b)];
                let keep = !grid.is_nyquist(a)
                    && !grid.is_nyquist(b)
                    && (y[0] * y[0] + y[1] * y[1]).sqrt() <= cutoff
                    && !(mean_zero && a == 0 && b == 0);
                if !keep {
                    buf[grid.offset(a, b)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        fft.inverse(&mut buf);
        let norm = 1.0 / grid.len() as f64;
        data.push(buf.iter().map(|c| c.re * norm).collect::<Vec<f64>>());
    }
    let peak = data.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        data.iter_mut().flatten().for_each(|v| *v /= peak);
    }
    GridField::new(*grid, kind, data)
}

/// Seeded decaying field: each component a random quadratic times a unit-width
/// Gaussian with a random center near the origin.
pub fn gen_random_decaying(grid: &Grid2, kind: FieldKind, seed: u64) -> Result<GridField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps: Vec<AnalyticScalar> = (0..kind.num_components())
        .map(|_| {
            let mut p = Poly::default();
            for e1 in 0..3 {
                for e2 in 0..3 - e1 {
                    p = p.plus(&Poly::monomial(rng.gen_range(-1.0..1.0), e1, e2));
                }
            }
            let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            AnalyticScalar::gauss_poly(c, 1.0, p)
        })
        .collect();
    sample_field(grid, kind, &comps)
}

/// Rectangle-rule integral `h^2 sum f` of every component.
pub fn mean_integral(f: &GridField) -> Vec<f64> {
    let h2 = f.grid().spacing().powi(2);
    f.components().iter().map(|c| c.iter().sum::<f64>() * h2).collect()
}
