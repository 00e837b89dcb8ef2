//! Discrete Chebyshev transform between CGL nodal values and coefficients.
//!
//! The forward map is
//!
//! ```text
//! c_n = (1/gamma_n) * sum_h f(x_h) T_n(x_h) w_h
//! gamma_n = pi (n = 0, N),  pi/2 otherwise
//! w_h     = pi/(2N) (h = 0, N),  pi/N otherwise
//! ```
//!
//! and the inverse is `f(x_h) = sum_n c_n T_n(x_h)`. Since `T_n(x_h) =
//! cos(pi n h / N)` on CGL nodes, both directions are a type-I DCT plus a
//! diagonal rescaling. The direct `O(N^2)` sums are kept as [`forward_direct`]
//! and [`inverse_direct`].

use std::f64::consts::PI;
use std::sync::Arc;

use rustdct::{Dct1, DctPlanner};

use crate::error::{check_len, Error, Result};
use crate::Field;

/// Chebyshev coefficients `c_0..=c_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs(pub Vec<f64>);

impl SpectralCoeffs {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Unit coefficient vector `e_m` of length `n + 1`.
    pub fn unit(n: usize, m: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[m] = 1.0;
        Self(c)
    }
}

/// Fast Chebyshev transform for a fixed degree `N`.
#[derive(Clone)]
pub struct ChebTransform {
    n: usize,
    dct: Arc<dyn Dct1<f64>>,
}

impl std::fmt::Debug for ChebTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChebTransform").field("n", &self.n).finish()
    }
}

impl ChebTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config(format!(
                "Chebyshev transform needs degree >= 1, got {n}"
            )));
        }
        let dct = DctPlanner::new().plan_dct1(n + 1);
        Ok(Self { n, dct })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn forward(&self, f: &[f64]) -> Result<SpectralCoeffs> {
        check_len(self.n + 1, f.len())?;
        let n = self.n;
        let mut buf = f.to_vec();
        self.dct.process_dct1(&mut buf);
        // c_n = pi / (N gamma_n) * DCT1_n
        let inner = 2.0 / n as f64;
        let edge = 1.0 / n as f64;
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= if k == 0 || k == n { edge } else { inner };
        }
        Ok(SpectralCoeffs(buf))
    }

    pub fn inverse(&self, c: &SpectralCoeffs) -> Result<Field> {
        check_len(self.n + 1, c.len())?;
        let n = self.n;
        let mut buf = c.0.clone();
        buf[0] *= 2.0;
        buf[n] *= 2.0;
        self.dct.process_dct1(&mut buf);
        Ok(buf)
    }

    /// Inverse transform of the coefficient-wise product `kc * uc`.
    pub fn coeff_product_convolve(
        &self,
        kc: &SpectralCoeffs,
        uc: &SpectralCoeffs,
    ) -> Result<Field> {
        check_len(self.n + 1, kc.len())?;
        check_len(self.n + 1, uc.len())?;
        let prod = kc.0.iter().zip(&uc.0).map(|(k, u)| k * u).collect();
        self.inverse(&SpectralCoeffs(prod))
    }
}

fn gamma(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        PI
    } else {
        0.5 * PI
    }
}

fn quad_w(n: usize, h: usize) -> f64 {
    if h == 0 || h == n {
        0.5 * PI / n as f64
    } else {
        PI / n as f64
    }
}

/// Direct `O(N^2)` evaluation of the forward transform sums.
pub fn forward_direct(f: &[f64]) -> Result<SpectralCoeffs> {
    if f.len() < 2 {
        return Err(Error::Config("transform needs at least two nodes".into()));
    }
    let n = f.len() - 1;
    let nf = n as f64;
    let coeffs = (0..=n)
        .map(|k| {
            let s: f64 = f
                .iter()
                .enumerate()
                .map(|(h, v)| v * (PI * ((k * h) % (2 * n)) as f64 / nf).cos() * quad_w(n, h))
                .sum();
            s / gamma(n, k)
        })
        .collect();
    Ok(SpectralCoeffs(coeffs))
}

/// Direct `O(N^2)` evaluation of `sum_n c_n T_n(x_h)`.
pub fn inverse_direct(c: &SpectralCoeffs) -> Result<Field> {
    if c.len() < 2 {
        return Err(Error::Config("transform needs at least two nodes".into()));
    }
    let n = c.len() - 1;
    let nf = n as f64;
    Ok((0..=n)
        .map(|h| {
            c.0.iter()
                .enumerate()
                .map(|(k, ck)| ck * (PI * ((k * h) % (2 * n)) as f64 / nf).cos())
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::cgl_nodes;
    use approx::assert_abs_diff_eq;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn chebyshev_polynomial_maps_to_unit_vector() {
        let n = 8;
        let t = ChebTransform::new(n).unwrap();
        let f: Vec<f64> = cgl_nodes(n).iter().map(|x| 4.0 * x * x * x - 3.0 * x).collect();
        let c = t.forward(&f).unwrap();
        assert!(max_diff(&c.0, &SpectralCoeffs::unit(n, 3).0) < 1e-14);

        let ones = vec![1.0; n + 1];
        let c = t.forward(&ones).unwrap();
        assert!(max_diff(&c.0, &SpectralCoeffs::unit(n, 0).0) < 1e-14);
    }

    #[test]
    fn inverse_of_unit_vectors() {
        let n = 12;
        let t = ChebTransform::new(n).unwrap();
        let f = t.inverse(&SpectralCoeffs::unit(n, 0)).unwrap();
        assert!(max_diff(&f, &vec![1.0; n + 1]) < 1e-14);
        let f = t.inverse(&SpectralCoeffs::unit(n, 1)).unwrap();
        assert!(max_diff(&f, &cgl_nodes(n)) < 1e-14);
        // last mode alternates sign on the nodes
        let f = t.inverse(&SpectralCoeffs::unit(n, n)).unwrap();
        for (h, v) in f.iter().enumerate() {
            assert_abs_diff_eq!(*v, if h % 2 == 0 { 1.0 } else { -1.0 }, epsilon = 1e-14);
        }
    }

    #[test]
    fn exp_roundtrip() {
        let n = 40;
        let t = ChebTransform::new(n).unwrap();
        let f: Vec<f64> = cgl_nodes(n).iter().map(|x| x.exp()).collect();
        let back = t.inverse(&t.forward(&f).unwrap()).unwrap();
        assert!(max_diff(&f, &back) < 1e-12);
    }

    #[test]
    fn product_with_zero_or_constant_mode() {
        let n = 16;
        let t = ChebTransform::new(n).unwrap();
        let k: Vec<f64> = cgl_nodes(n).iter().map(|x| (3.0 * x).sin()).collect();
        let kc = t.forward(&k).unwrap();
        let zero = SpectralCoeffs(vec![0.0; n + 1]);
        let out = t.coeff_product_convolve(&zero, &kc).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));

        // a field with only the constant mode picks out kc_0
        let kconst = t.forward(&vec![2.5; n + 1]).unwrap();
        let uc = SpectralCoeffs::unit(n, 0);
        let out = t.coeff_product_convolve(&kconst, &uc).unwrap();
        assert!(max_diff(&out, &vec![2.5; n + 1]) < 1e-14);
    }

    #[test]
    fn shape_errors() {
        let t = ChebTransform::new(8).unwrap();
        assert!(matches!(t.forward(&[1.0; 4]), Err(Error::Shape { .. })));
        assert!(matches!(
            t.inverse(&SpectralCoeffs(vec![0.0; 3])),
            Err(Error::Shape { .. })
        ));
        let c9 = SpectralCoeffs(vec![0.0; 9]);
        let c5 = SpectralCoeffs(vec![0.0; 5]);
        assert!(t.coeff_product_convolve(&c9, &c5).is_err());
        assert!(ChebTransform::new(0).is_err());
    }
}
