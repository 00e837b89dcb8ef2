//! Fractional peridynamic kernel and the discrete nonlocal operator.
//!
//! The kernel is `k(r) = scale * |r|^{-(1+2 alpha)}` for `cutoff <= |r| <= delta`
//! and zero otherwise. Three discretizations of
//! `L u(x) = sigma * integral k(x' - x) (u(x') - u(x)) dx'` over the horizon
//! clipped to the domain are provided:
//!
//! * quadrature: each pair `(h, j)` is weighted by the area of the product
//!   of their control cells that lies in the band `cutoff <= |y - x| <= delta`,
//!   divided by the cell length of `h` (the trapezoid weight away from the
//!   horizon edges, a partial volume at them); self node excluded;
//! * spectral product: `sigma * (F^-1(F(k) F(u)) - beta u)` with the
//!   discrete Chebyshev transform;
//! * collocation: the integral applied exactly (to quadrature precision) to
//!   the degree-`N` interpolant of the nodal values, stored as a dense matrix.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::grid::{Grid, HORIZON_RTOL};
use crate::transform::{ChebTransform, SpectralCoeffs};
use crate::Field;

/// Log-spaced trapezoid intervals used for the tabulated `beta`.
pub const BETA_INTERVALS: usize = 1 << 14;

/// Overall sign applied to `sum k (u_j - u_h)`.
///
/// `Diffusive` (`sigma = +1`) makes `L u ~ C u_xx` for smooth `u`;
/// `AsPrinted` (`sigma = -1`) integrates `u(x) - u(x')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    #[default]
    Diffusive,
    AsPrinted,
}

impl SignConvention {
    pub fn sigma(self) -> f64 {
        match self {
            SignConvention::Diffusive => 1.0,
            SignConvention::AsPrinted => -1.0,
        }
    }
}

impl FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diffusive" => Ok(Self::Diffusive),
            "as-printed" => Ok(Self::AsPrinted),
            other => Err(Error::Config(format!(
                "unknown sign convention '{other}' (expected diffusive | as-printed)"
            ))),
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Diffusive => "diffusive",
            Self::AsPrinted => "as-printed",
        })
    }
}

/// How the regularization length is chosen for a given grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CutoffPolicy {
    /// Smallest gap between neighbouring grid nodes.
    #[default]
    MinSpacing,
    Fixed(f64),
}

impl CutoffPolicy {
    pub fn resolve(self, min_spacing: f64) -> f64 {
        match self {
            CutoffPolicy::MinSpacing => min_spacing,
            CutoffPolicy::Fixed(eps) => eps,
        }
    }
}

/// Parameters of the truncated fractional kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub alpha: f64,
    pub delta: f64,
    pub cutoff: f64,
    /// Multiplicative kernel constant, 1 for the plain fractional kernel.
    pub scale: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64, delta: f64, cutoff: f64) -> Result<Self> {
        let spec = Self {
            alpha,
            delta,
            cutoff,
            scale: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        self.scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "kernel.alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "kernel.delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.cutoff >= 0.0 && self.cutoff < self.delta) {
            return Err(Error::Config(format!(
                "kernel cutoff must satisfy 0 <= cutoff < delta, got {} (delta {})",
                self.cutoff, self.delta
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!(
                "kernel.scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// `1 + 2 alpha`.
    pub fn exponent(&self) -> f64 {
        1.0 + 2.0 * self.alpha
    }

    /// Second moment `integral s^2 k(s) ds` over the punctured horizon.
    ///
    /// For `u = x^2` the continuum operator with the diffusive sign returns
    /// this constant; for smooth `u` it gives `L u ~ (moment / 2) u_xx`.
    pub fn second_moment(&self) -> f64 {
        let p = 2.0 - 2.0 * self.alpha;
        self.scale * 2.0 * (self.delta.powf(p) - self.cutoff.powf(p)) / p
    }

    /// Kernel constant that makes the second moment equal to 2, so the
    /// operator approaches `u_xx` as the horizon shrinks.
    pub fn local_limit_scale(alpha: f64, delta: f64, cutoff: f64) -> f64 {
        let p = 2.0 - 2.0 * alpha;
        p / (delta.powf(p) - cutoff.powf(p))
    }

    fn in_support(&self, r: f64) -> bool {
        r <= self.delta * (1.0 + HORIZON_RTOL) && r >= self.cutoff * (1.0 - HORIZON_RTOL)
    }
}

/// `k(r)`; zero outside `[cutoff, delta]`, error at `r = 0`.
pub fn kernel_value(spec: &KernelSpec, r: f64) -> Result<f64> {
    let r = r.abs();
    if r == 0.0 {
        return Err(Error::Domain(
            "kernel evaluated at zero separation (self-interaction is excluded)".into(),
        ));
    }
    Ok(if spec.in_support(r) {
        spec.scale * r.powf(-spec.exponent())
    } else {
        0.0
    })
}

/// `beta = 2 * integral_{cutoff}^{delta} k(s) ds` by the trapezoid rule in
/// `log s` with `intervals` panels; second order in the panel width.
pub fn compute_beta(spec: &KernelSpec, intervals: usize) -> Result<f64> {
    if spec.cutoff <= 0.0 {
        return Err(Error::Domain(format!(
            "divergent beta: the kernel integral does not exist for alpha = {} without a positive cutoff",
            spec.alpha
        )));
    }
    if intervals == 0 {
        return Err(Error::Config("beta quadrature needs at least one interval".into()));
    }
    if spec.delta <= spec.cutoff {
        return Ok(0.0);
    }
    // s = e^z, ds = s dz: integrand s^{-2 alpha}
    let z0 = spec.cutoff.ln();
    let z1 = spec.delta.ln();
    let hz = (z1 - z0) / intervals as f64;
    let f = |z: f64| (-2.0 * spec.alpha * z).exp();
    let interior: f64 = (1..intervals).map(|i| f(z0 + i as f64 * hz)).sum();
    let integral = hz * (0.5 * (f(z0) + f(z1)) + interior);
    Ok(2.0 * spec.scale * integral)
}

/// Precomputed kernel data on a CGL grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    spec: KernelSpec,
    beta: f64,
    node_weights: Vec<f64>,
    row_start: Vec<usize>,
    row_weights: Vec<Vec<f64>>,
    row_sums: Vec<f64>,
    kernel_samples: Field,
    kernel_coeffs: SpectralCoeffs,
    collocation: Option<Array2<f64>>,
}

impl KernelTable {
    pub fn new(spec: KernelSpec, grid: &Grid, transform: &ChebTransform) -> Result<Self> {
        spec.validate()?;
        check_len(grid.degree(), transform.degree())?;
        let x = grid.nodes();
        let n_nodes = grid.len();
        let (cell_lo, cell_hi) = node_cells(grid);
        let node_weights: Vec<f64> = cell_lo.iter().zip(&cell_hi).map(|(lo, hi)| hi - lo).collect();
        let mut row_start = Vec::with_capacity(n_nodes);
        let mut row_weights = Vec::with_capacity(n_nodes);
        let mut row_sums = Vec::with_capacity(n_nodes);
        for h in 0..n_nodes {
            // neighbours whose cell comes within delta of the cell of h
            let mut lo = h;
            while lo > 0 && cell_lo[lo - 1] - cell_hi[h] < spec.delta {
                lo -= 1;
            }
            let mut hi = h;
            while hi + 1 < n_nodes && cell_lo[h] - cell_hi[hi + 1] < spec.delta {
                hi += 1;
            }
            let mut weights = vec![0.0; hi - lo + 1];
            for j in (lo..=hi).filter(|&j| j != h) {
                let area = band_area(
                    (cell_lo[h], cell_hi[h]),
                    (cell_lo[j], cell_hi[j]),
                    spec.cutoff,
                    spec.delta,
                );
                if area > 0.0 {
                    let r = (x[j] - x[h]).abs();
                    weights[j - lo] = area / node_weights[h] * spec.scale * r.powf(-spec.exponent());
                }
            }
            row_sums.push(weights.iter().sum());
            row_start.push(lo);
            row_weights.push(weights);
        }

        let mid = 0.5 * (grid.interval().0 + grid.interval().1);
        let kernel_samples: Field = x
            .iter()
            .map(|&xh| {
                let r = xh - mid;
                if r == 0.0 {
                    Ok(0.0)
                } else {
                    kernel_value(&spec, r)
                }
            })
            .collect::<Result<_>>()?;
        let kernel_coeffs = transform.forward(&kernel_samples)?;
        let beta = if spec.cutoff > 0.0 {
            compute_beta(&spec, BETA_INTERVALS)?
        } else {
            // without a cutoff the continuum beta diverges; fall back to the
            // discrete row sum at the domain centre
            row_sums[grid.degree() / 2]
        };

        Ok(Self {
            spec,
            beta,
            node_weights,
            row_start,
            row_weights,
            row_sums,
            kernel_samples,
            kernel_coeffs,
            collocation: None,
        })
    }

    /// Adds the collocation matrix for `grid` (the grid the table was built on).
    pub fn with_collocation(mut self, grid: &Grid) -> Result<Self> {
        check_len(self.len(), grid.len())?;
        self.collocation = Some(collocation_matrix(&self.spec, grid)?);
        Ok(self)
    }

    /// `A` with `(L u)_h = sigma * sum_j A_hj u_j` on the interpolant, if built.
    pub fn collocation(&self) -> Option<&Array2<f64>> {
        self.collocation.as_ref()
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.row_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_sums.is_empty()
    }

    /// Nodal trapezoid weights used by the operator and the energy.
    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Discrete `beta_h = sum_j pair_weight(h, j)`.
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// `(j, P_hj)` for every interacting neighbour of `h`.
    pub fn pairs(&self, h: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_start[h];
        self.row_weights[h]
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(move |(k, w)| (lo + k, *w))
    }

    pub fn kernel_samples(&self) -> &[f64] {
        &self.kernel_samples
    }

    pub fn kernel_coeffs(&self) -> &SpectralCoeffs {
        &self.kernel_coeffs
    }
}

/// Control cells `[lo_j, hi_j]` bounded by the midpoints between nodes and
/// by the domain ends; their lengths are the nodal trapezoid weights.
fn node_cells(grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let x = grid.nodes();
    let n = grid.degree();
    let lo = (0..=n).map(|j| if j < n { 0.5 * (x[j] + x[j + 1]) } else { x[n] }).collect();
    let hi = (0..=n).map(|j| if j > 0 { 0.5 * (x[j - 1] + x[j]) } else { x[0] }).collect();
    (lo, hi)
}

/// Area of `[x0, x1] x [y0, y1]` where `cutoff <= |y - x| <= delta`.
///
/// Symmetric in the two cells, which keeps `tau_h P_hj = tau_j P_jh`.
fn band_area(xc: (f64, f64), yc: (f64, f64), cutoff: f64, delta: f64) -> f64 {
    // fixed argument order so both orientations round identically
    let ((x0, x1), (y0, y1)) = if xc.0 <= yc.0 { (xc, yc) } else { (yc, xc) };
    let len = y1 - y0;
    // antiderivative of clamp(t, 0, len)
    let g = |t: f64| {
        if t <= 0.0 {
            0.0
        } else if t <= len {
            0.5 * t * t
        } else {
            len * (t - 0.5 * len)
        }
    };
    // area where y - x <= c
    let below = |c: f64| g(x1 + c - y0) - g(x0 + c - y0);
    let area = (below(delta) - below(cutoff)) + (below(-cutoff) - below(-delta));
    area.max(0.0)
}

/// Quadrature realization: `sigma * sum_j P_hj (u_j - u_h)`.
pub fn apply_l_quadrature(table: &KernelTable, u: &[f64], sign: SignConvention) -> Result<Field> {
    check_len(table.len(), u.len())?;
    let sigma = sign.sigma();
    Ok((0..u.len())
        .map(|h| {
            let lo = table.row_start[h];
            let w = &table.row_weights[h];
            let uh = u[h];
            // difference form: constants give exact zeros
            let acc: f64 = w.iter().zip(&u[lo..lo + w.len()]).map(|(a, b)| a * (b - uh)).sum();
            sigma * acc
        })
        .collect())
}

/// Spectral-product realization: `sigma * (F^-1(F(k) F(u)) - beta u)`.
pub fn apply_l_spectral(
    table: &KernelTable,
    transform: &ChebTransform,
    u: &[f64],
    sign: SignConvention,
) -> Result<Field> {
    check_len(table.len(), u.len())?;
    let uc = transform.forward(u)?;
    let conv = transform.coeff_product_convolve(&table.kernel_coeffs, &uc)?;
    let sigma = sign.sigma();
    Ok(conv
        .iter()
        .zip(u)
        .map(|(c, v)| sigma * (c - table.beta * v))
        .collect())
}

/// Collocation realization: `sigma * A u`; requires
/// [`KernelTable::with_collocation`].
pub fn apply_l_collocation(table: &KernelTable, u: &[f64], sign: SignConvention) -> Result<Field> {
    check_len(table.len(), u.len())?;
    let a = table.collocation.as_ref().ok_or_else(|| {
        Error::Config("collocation operator requested but not assembled".into())
    })?;
    let out: Array1<f64> = a.dot(&ArrayView1::from(u));
    let sigma = sign.sigma();
    Ok(out.iter().map(|v| sigma * v).collect())
}

/// Gauss–Legendre points per panel of the collocation quadrature.
pub const COLLOCATION_POINTS: usize = 10;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // p1 = P_m(z), p2 = P_{m-1}(z)
            let (mut p1, mut p2) = (1.0, 0.0);
            for k in 1..=m {
                let kf = k as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * kf - 1.0) * z * p2 - (kf - 1.0) * p3) / kf;
            }
            dp = mf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature points `(r, weight * k(r))` for `integral_{cutoff}^{reach} f(r) k(r) dr`
/// split at the node distances `breaks` and graded geometrically. The first panel uses `r = p s^5`,
/// which removes the `r^{-2 alpha}` behaviour of `f(r) k(r)` at small `r`.
fn side_rule(spec: &KernelSpec, reach: f64, breaks: &[f64], gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let eps = spec.cutoff;
    if reach <= eps {
        return Vec::new();
    }
    let mut marks: Vec<f64> = breaks.iter().copied().filter(|&d| d > eps && d < reach).collect();
    marks.push(reach);
    // the substituted panel is kept short: the interpolant composed with
    // s^5 has five times its degree. Beyond it panels are graded so none
    // spans more than a factor two in r.
    let inner = (marks[0] / 16.0).max(2.0 * eps).min(marks[0]);
    let mut ends = vec![inner];
    for &m in &marks {
        if m <= inner {
            continue;
        }
        let mut r = 2.0 * ends[ends.len() - 1];
        while r < m {
            ends.push(r);
            r *= 2.0;
        }
        ends.push(m);
    }
    let kval = |r: f64| spec.scale * r.powf(-spec.exponent());
    let mut pts = Vec::with_capacity(ends.len() * gl.0.len());
    let first = ends[0];
    let s0 = (eps / first).powf(0.2);
    for (t, wt) in gl.0.iter().zip(&gl.1) {
        let s = s0 + 0.5 * (1.0 - s0) * (t + 1.0);
        let r = first * s.powi(5);
        let jac = 0.5 * (1.0 - s0) * 5.0 * first * s.powi(4);
        pts.push((r, wt * jac * kval(r)));
    }
    for pair in ends.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        for (t, wt) in gl.0.iter().zip(&gl.1) {
            let r = lo + half * (t + 1.0);
            pts.push((r, wt * half * kval(r)));
        }
    }
    pts
}

fn collocation_matrix(spec: &KernelSpec, grid: &Grid) -> Result<Array2<f64>> {
    spec.validate()?;
    let x = grid.nodes();
    let n = grid.degree();
    let (a, b) = grid.interval();
    let bary: Vec<f64> = (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n { 0.5 * s } else { s }
        })
        .collect();
    let gl = gauss_legendre(COLLOCATION_POINTS);
    let rows: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|h| {
            let xh = x[h];
            let mut row = vec![0.0; n + 1];
            let mut t = vec![0.0; n + 1];
            for dir in [1.0f64, -1.0] {
                let reach = spec.delta.min(if dir > 0.0 { b - xh } else { xh - a });
                let mut breaks: Vec<f64> = x
                    .iter()
                    .map(|&xj| dir * (xj - xh))
                    .filter(|&d| d > 0.0)
                    .collect();
                breaks.sort_by(f64::total_cmp);
                for (r, wk) in side_rule(spec, reach, &breaks, &gl) {
                    // y - x_j formed as (x_h - x_j) + r: near x_h, rounding y
                    // itself would swamp the O(r) part of the interpolant
                    let dr = dir * r;
                    if let Some(j) = x.iter().position(|&xj| (xh - xj) + dr == 0.0) {
                        row[j] += wk;
                        continue;
                    }
                    let mut sum = 0.0;
                    for ((tj, &wj), &xj) in t.iter_mut().zip(&bary).zip(x) {
                        *tj = wj / ((xh - xj) + dr);
                        sum += *tj;
                    }
                    let scale = wk / sum;
                    for (rj, tj) in row.iter_mut().zip(&t) {
                        *rj += scale * tj;
                    }
                }
            }
            // sum_j l_j = 1: the diagonal absorbs -integral k, making constants exact
            row[h] = 0.0;
            row[h] = -row.iter().sum::<f64>();
            row
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n + 1, n + 1), flat).map_err(|e| Error::Domain(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_value_examples() {
        let spec = KernelSpec::new(0.4, 0.2, 0.0).unwrap();
        assert_relative_eq!(kernel_value(&spec, 0.1).unwrap(), 63.0957344480193, max_relative = 1e-12);
        assert_relative_eq!(kernel_value(&spec, -0.1).unwrap(), 63.0957344480193, max_relative = 1e-12);
        assert_eq!(kernel_value(&spec, 0.5).unwrap(), 0.0);
        assert_relative_eq!(kernel_value(&spec, 0.2).unwrap(), 0.2f64.powf(-1.8), max_relative = 1e-14);
        assert!(matches!(kernel_value(&spec, 0.0), Err(Error::Domain(_))));

        let cut = KernelSpec::new(0.4, 0.2, 0.05).unwrap();
        assert_eq!(kernel_value(&cut, 0.01).unwrap(), 0.0);
        assert!(kernel_value(&cut, 0.05).unwrap() > 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::new(0.0, 0.2, 0.0).is_err());
        assert!(KernelSpec::new(1.0, 0.2, 0.0).is_err());
        assert!(KernelSpec::new(0.4, -0.2, 0.0).is_err());
        assert!(KernelSpec::new(0.4, 0.2, 0.2).is_err());
        assert!(KernelSpec::new(0.4, 0.2, -1e-3).is_err());
        assert!(KernelSpec::new(0.4, 0.2, 0.0).unwrap().with_scale(0.0).is_err());
    }

    #[test]
    fn beta_needs_cutoff() {
        let spec = KernelSpec::new(0.4, 0.2, 0.0).unwrap();
        assert!(matches!(compute_beta(&spec, 64), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_vanishes_on_empty_support() {
        let eps = 0.05;
        let spec = KernelSpec::new(0.4, eps * (1.0 + 1e-12), eps).unwrap();
        assert!(compute_beta(&spec, 64).unwrap().abs() < 1e-9);
    }

    #[test]
    fn sign_convention_parsing() {
        assert_eq!("diffusive".parse::<SignConvention>().unwrap(), SignConvention::Diffusive);
        assert_eq!("as-printed".parse::<SignConvention>().unwrap(), SignConvention::AsPrinted);
        assert!("backwards".parse::<SignConvention>().is_err());
        assert_eq!(SignConvention::AsPrinted.to_string(), "as-printed");
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2m_minus_1() {
        let (x, w) = gauss_legendre(COLLOCATION_POINTS);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for p in 0..2 * COLLOCATION_POINTS as i32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn collocation_is_exact_on_quadratics() {
        // for u = x^2 with the full horizon inside the domain, L u = second moment
        let grid = Grid::new(32, -1.0, 1.0).unwrap();
        let spec = KernelSpec::new(0.4, 0.2, 0.0).unwrap();
        let t = ChebTransform::new(32).unwrap();
        let table = KernelTable::new(spec, &grid, &t).unwrap().with_collocation(&grid).unwrap();
        let u: Vec<f64> = grid.nodes().iter().map(|x| x * x).collect();
        let lu = apply_l_collocation(&table, &u, SignConvention::Diffusive).unwrap();
        let m2 = spec.second_moment();
        for (h, x) in grid.nodes().iter().enumerate() {
            if x.abs() < 0.8 - 1e-9 {
                assert_relative_eq!(lu[h], m2, max_relative = 1e-10);
            }
        }
        let ones = apply_l_collocation(&table, &[1.0; 33], SignConvention::Diffusive).unwrap();
        assert!(ones.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn local_limit_scale_normalizes_second_moment() {
        let s = KernelSpec::local_limit_scale(0.4, 0.1, 1e-3);
        let spec = KernelSpec::new(0.4, 0.1, 1e-3).unwrap().with_scale(s).unwrap();
        assert_relative_eq!(spec.second_moment(), 2.0, max_relative = 1e-14);
    }
}
