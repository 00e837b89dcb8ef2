//! Chebyshev–Gauss–Lobatto collocation grid on a physical interval.
//!
//! Nodes are ordered `h = 0..=N` with `x_0 = b` (reference `+1`) and
//! `x_N = a` (reference `-1`), i.e. descending in `x`. Every matrix and
//! field in the crate uses this ordering.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{check_len, Error, Result};
use crate::Field;

/// Relative slack used when testing `|x_h - x_j| <= delta` on floating point nodes.
pub const HORIZON_RTOL: f64 = 1e-12;

/// Reference CGL nodes `cos(pi h / n)` for `h = 0..=n`.
///
/// Evaluated as `sin(pi (n - 2h) / (2n))` so the set is exactly antisymmetric
/// and the midpoint (even `n`) is exactly zero.
pub fn cgl_nodes(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|h| (PI * (nf - 2.0 * h as f64) / (2.0 * nf)).sin())
        .collect()
}

/// Chebyshev collocation differentiation matrix on the reference nodes.
///
/// Off-diagonal entries use the closed form `(c_i/c_j)(-1)^{i+j}/(x_i - x_j)`
/// with the node difference evaluated through a product of sines; the
/// diagonal is the negative row sum of the off-diagonal part.
pub fn cheb_diff_matrix(n: usize) -> Result<Array2<f64>> {
    if n < 1 {
        return Err(Error::Config(format!(
            "differentiation matrix needs degree >= 1, got {n}"
        )));
    }
    let nf = n as f64;
    let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
    let mut d = Array2::<f64>::zeros((n + 1, n + 1));
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i == j {
                continue;
            }
            let diff = 2.0
                * (PI * (i + j) as f64 / (2.0 * nf)).sin()
                * (PI * (j as f64 - i as f64) / (2.0 * nf)).sin();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let entry = c(i) / c(j) * sign / diff;
            d[[i, j]] = entry;
            row_sum += entry;
        }
        d[[i, i]] = -row_sum;
    }
    Ok(d)
}

/// Clenshaw–Curtis weights for the CGL nodes on `[-1, 1]` (unit weight function).
pub fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        w[0] = 2.0;
        return w;
    }
    let end = if n % 2 == 0 {
        1.0 / (nf * nf - 1.0)
    } else {
        1.0 / (nf * nf)
    };
    w[0] = end;
    w[n] = end;
    for (i, wi) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = PI * i as f64 / nf;
        let mut v = 1.0;
        if n % 2 == 0 {
            for k in 1..n / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wi = 2.0 * v / nf;
    }
    w
}

/// Immutable CGL grid with differentiation and quadrature data.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    a: f64,
    b: f64,
    nodes_ref: Vec<f64>,
    nodes: Vec<f64>,
    jacobian: f64,
    deriv: Array2<f64>,
    quad_weights: Vec<f64>,
}

impl Grid {
    /// Builds the degree-`n` grid on `[a, b]`.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid degree must be >= 2, got {n}")));
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Config(format!(
                "degenerate interval [{a}, {b}]: need finite a < b"
            )));
        }
        let nodes_ref = cgl_nodes(n);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut nodes: Vec<f64> = nodes_ref.iter().map(|x| mid + half * x).collect();
        // pin the endpoints exactly
        nodes[0] = b;
        nodes[n] = a;
        let jacobian = 2.0 / (b - a);
        let deriv = cheb_diff_matrix(n)? * jacobian;
        let quad_weights = clenshaw_curtis_weights(n)
            .into_iter()
            .map(|w| w * half)
            .collect();
        Ok(Self {
            n,
            a,
            b,
            nodes_ref,
            nodes,
            jacobian,
            deriv,
            quad_weights,
        })
    }

    /// Polynomial degree `N`; the grid has `N + 1` nodes.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nodes_ref(&self) -> &[f64] {
        &self.nodes_ref
    }

    /// Physical node coordinates.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn jacobian(&self) -> f64 {
        self.jacobian
    }

    /// Differentiation matrix in physical coordinates.
    pub fn deriv_matrix(&self) -> &Array2<f64> {
        &self.deriv
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Nodal trapezoid weights `(x_{j-1} - x_{j+1}) / 2`, halved at the ends.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let x = &self.nodes;
        let n = self.n;
        (0..=n)
            .map(|j| {
                let left = if j < n { x[j] - x[j + 1] } else { 0.0 };
                let right = if j > 0 { x[j - 1] - x[j] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    /// Smallest gap between consecutive nodes.
    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min)
    }

    /// `sum_h quad_weights[h] * f[h]`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        check_len(self.len(), f.len())?;
        Ok(self
            .quad_weights
            .iter()
            .zip(f)
            .map(|(w, v)| w * v)
            .sum())
    }

    /// Applies the differentiation matrix to nodal values.
    ///
    /// Evaluated as `sum_{j != i} d_ij (u_j - u_i)`, which equals `D u`
    /// because the diagonal is the negative off-diagonal row sum, and maps
    /// constants to exactly zero.
    pub fn derivative(&self, u: &[f64]) -> Result<Field> {
        check_len(self.len(), u.len())?;
        Ok(self
            .deriv
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                let ui = u[i];
                row.iter()
                    .zip(u)
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (d, v))| d * (v - ui))
                    .sum()
            })
            .collect())
    }

    /// Indices `j != h` with `|x_h - x_j| <= delta`.
    ///
    /// The nodes are monotone, so the result is a contiguous run with `h`
    /// removed.
    pub fn horizon_indices(&self, h: usize, delta: f64) -> Vec<usize> {
        let xh = self.nodes[h];
        let reach = delta * (1.0 + HORIZON_RTOL);
        let mut lo = h;
        while lo > 0 && (self.nodes[lo - 1] - xh) <= reach {
            lo -= 1;
        }
        let mut hi = h;
        while hi < self.n && (xh - self.nodes[hi + 1]) <= reach {
            hi += 1;
        }
        (lo..=hi).filter(|&j| j != h).collect()
    }

    /// Evaluates the degree-`N` interpolant of `values` at physical point `x`
    /// using the barycentric formula for CGL nodes.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        check_len(self.len(), values.len())?;
        Ok(self.interpolate_unchecked(values, x))
    }

    /// Interpolates `values` onto every point of `xs`.
    pub fn interpolate_many(&self, values: &[f64], xs: &[f64]) -> Result<Field> {
        check_len(self.len(), values.len())?;
        Ok(xs
            .iter()
            .map(|&x| self.interpolate_unchecked(values, x))
            .collect())
    }

    fn interpolate_unchecked(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&xj, &fj)) in self.nodes.iter().zip(values).enumerate() {
            let diff = x - xj;
            if diff == 0.0 {
                return fj;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == self.n {
                w *= 0.5;
            }
            let t = w / diff;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_nodes_degree_four() {
        let g = Grid::new(4, -1.0, 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [1.0, h, 0.0, -h, -1.0];
        for (x, e) in g.nodes_ref().iter().zip(expected) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn linear_differentiation_matrix() {
        let d = cheb_diff_matrix(1).unwrap();
        let expected = [[0.5, -0.5], [0.5, -0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(d[[i, j]], expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn derivative_of_t2() {
        let g = Grid::new(8, -1.0, 1.0).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| 2.0 * x * x - 1.0).collect();
        let du = g.derivative(&u).unwrap();
        for (d, x) in du.iter().zip(g.nodes()) {
            assert_abs_diff_eq!(*d, 4.0 * x, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(Grid::new(1, -1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::new(8, 1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::new(8, 2.0, -1.0), Err(Error::Config(_))));
        assert!(cheb_diff_matrix(0).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::new(8, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(g.integrate(&vec![1.0; 9]).unwrap(), 2.0, epsilon = 1e-14);
        let sq: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        assert_abs_diff_eq!(g.integrate(&sq).unwrap(), 2.0 / 3.0, epsilon = 1e-12);

        let g = Grid::new(32, -1.0, 1.0).unwrap();
        let ex: Vec<f64> = g.nodes().iter().map(|x| x.exp()).collect();
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(g.integrate(&ex).unwrap(), e - 1.0 / e, epsilon = 1e-10);

        assert!(matches!(
            g.integrate(&[1.0, 2.0]),
            Err(Error::Shape { expected: 33, got: 2 })
        ));
    }

    #[test]
    fn horizon_examples() {
        let g = Grid::new(4, -1.0, 1.0).unwrap();
        assert_eq!(g.horizon_indices(2, 0.8), vec![1, 3]);
        assert_eq!(g.horizon_indices(2, 2.0), vec![0, 1, 3, 4]);
        assert_eq!(g.horizon_indices(0, 5.0), vec![1, 2, 3, 4]);
        assert!(g.horizon_indices(2, 0.5).is_empty());
        let g = Grid::new(64, -1.0, 1.0).unwrap();
        assert!(g.horizon_indices(0, 0.5 * g.min_spacing()).is_empty());
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let g = Grid::new(33, -3.0, 2.0).unwrap();
        let s: f64 = g.trapezoid_weights().iter().sum();
        assert_abs_diff_eq!(s, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let g = Grid::new(10, 0.0, 3.0).unwrap();
        let f = |x: f64| x.powi(7) - 2.0 * x.powi(3) + 1.0;
        let vals: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        for x in [0.0, 0.1234, 1.5, 2.99, 3.0] {
            let p = g.interpolate(&vals, x).unwrap();
            assert_abs_diff_eq!(p, f(x), epsilon = 1e-10 * f(x).abs().max(1.0));
        }
    }
}
