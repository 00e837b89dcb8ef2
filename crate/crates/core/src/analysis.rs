//! Energy functional, relative errors and convergence-rate fits.

use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::integrator::State;
use crate::kernel::KernelTable;

/// Terms of the nonlocal Sine-Gordon energy, each reported as a nonnegative
/// magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    /// `1/2 int v^2`
    pub kinetic: f64,
    /// `1/4 int int (u(x) - u(x'))^2 k`
    pub nonlocal: f64,
    /// `int (1 - cos u)`
    pub potential: f64,
}

impl EnergyBreakdown {
    /// Signs exactly as in the literature formula: kinetic - nonlocal - potential.
    pub fn total_printed(&self) -> f64 {
        self.kinetic - self.nonlocal - self.potential
    }

    /// Hamiltonian of the diffusive-sign system: kinetic + nonlocal + potential.
    pub fn total_hamiltonian(&self) -> f64 {
        self.kinetic + self.nonlocal + self.potential
    }
}

fn nonlocal_term(table: &KernelTable, u: &[f64]) -> f64 {
    let w = table.node_weights();
    0.25 * (0..u.len())
        .map(|h| {
            let inner: f64 = table
                .pairs(h)
                .map(|(j, p)| {
                    let d = u[j] - u[h];
                    p * d * d
                })
                .sum();
            w[h] * inner
        })
        .sum::<f64>()
}

fn weighted(weights: &[f64], s: &State) -> (f64, f64) {
    let kinetic = 0.5 * weights.iter().zip(&s.v).map(|(w, v)| w * v * v).sum::<f64>();
    let potential = weights
        .iter()
        .zip(&s.u)
        .map(|(w, u)| w * (1.0 - u.cos()))
        .sum::<f64>();
    (kinetic, potential)
}

/// Discrete energy with every term weighted by the operator's nodal
/// trapezoid weights, so the semi-discrete quadrature system conserves it.
pub fn energy(grid: &Grid, table: &KernelTable, s: &State) -> Result<EnergyBreakdown> {
    check_len(grid.len(), s.u.len())?;
    check_len(grid.len(), s.v.len())?;
    check_len(grid.len(), table.len())?;
    let (kinetic, potential) = weighted(table.node_weights(), s);
    Ok(EnergyBreakdown {
        kinetic,
        nonlocal: nonlocal_term(table, &s.u),
        potential,
    })
}

/// Same energy with the kinetic and potential integrals taken by
/// Clenshaw–Curtis quadrature.
pub fn energy_clenshaw_curtis(grid: &Grid, table: &KernelTable, s: &State) -> Result<EnergyBreakdown> {
    check_len(grid.len(), s.u.len())?;
    check_len(grid.len(), s.v.len())?;
    check_len(grid.len(), table.len())?;
    let (kinetic, potential) = weighted(grid.quad_weights(), s);
    Ok(EnergyBreakdown {
        kinetic,
        nonlocal: nonlocal_term(table, &s.u),
        potential,
    })
}

/// Energy of the classical equation `u_tt = c^2 u_xx - sin u`, with the
/// gradient term `1/2 c^2 int u_x^2` reported in the `nonlocal` slot and all
/// integrals by nodal trapezoid weights.
pub fn energy_classical(grid: &Grid, wave_speed: f64, s: &State) -> Result<EnergyBreakdown> {
    check_len(grid.len(), s.u.len())?;
    check_len(grid.len(), s.v.len())?;
    let w = grid.trapezoid_weights();
    let (kinetic, potential) = weighted(&w, s);
    let du = grid.derivative(&s.u)?;
    let gradient = 0.5 * wave_speed * wave_speed * w.iter().zip(&du).map(|(w, d)| w * d * d).sum::<f64>();
    Ok(EnergyBreakdown {
        kinetic,
        nonlocal: gradient,
        potential,
    })
}

fn squared_sums(u: &[f64], u_ref: &[f64]) -> Result<(f64, f64)> {
    check_len(u_ref.len(), u.len())?;
    if u.is_empty() {
        return Err(Error::ZeroReference);
    }
    // index 0 is skipped: sums run over h = 1..=N
    let num: f64 = u[1..].iter().zip(&u_ref[1..]).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = u_ref[1..].iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num, den))
}

/// `sum_{h>=1} |u_h - u*_h|^2 / sum_{h>=1} |u*_h|^2` (ratio of squared sums,
/// no square root).
pub fn relative_l2_error(u: &[f64], u_ref: &[f64]) -> Result<f64> {
    let (num, den) = squared_sums(u, u_ref)?;
    Ok(num / den)
}

/// Square root of [`relative_l2_error`], the usual relative 2-norm.
pub fn relative_l2_error_sqrt(u: &[f64], u_ref: &[f64]) -> Result<f64> {
    relative_l2_error(u, u_ref).map(f64::sqrt)
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::Config(format!(
            "rate fit needs at least two (resolution, error) pairs, got {}",
            pairs.len()
        )));
    }
    if let Some((n, e)) = pairs.iter().find(|(n, e)| !(*n > 0.0 && *e > 0.0)) {
        return Err(Error::Config(format!(
            "rate fit needs positive data, got ({n}, {e})"
        )));
    }
    Ok(())
}

/// Least-squares fit of `log e = c - rate * log N`; returns `(rate, rms residual)`.
pub fn fit_rate_with_residual(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    check_pairs(pairs)?;
    let pts: Vec<(f64, f64)> = pairs.iter().map(|(n, e)| (n.ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("rate fit needs distinct resolutions".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let resid = (pts
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok((-slope, resid))
}

/// Negated least-squares slope of `log e` against `log N`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<f64> {
    fit_rate_with_residual(pairs).map(|(r, _)| r)
}

/// Two-point rates `log(e_i / e_{i+1}) / log(N_{i+1} / N_i)`.
pub fn pairwise_rates(pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    check_pairs(pairs)?;
    Ok(pairs
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 / w[0].0).ln())
        .collect())
}

/// Errors per resolution with the fitted rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    pub pairwise: Vec<f64>,
    pub rate: f64,
    pub residual: f64,
}

impl ErrorReport {
    pub fn new(resolutions: Vec<usize>, errors: Vec<f64>) -> Result<Self> {
        check_len(resolutions.len(), errors.len())?;
        let pairs: Vec<(f64, f64)> = resolutions
            .iter()
            .zip(&errors)
            .map(|(n, e)| (*n as f64, *e))
            .collect();
        let (rate, residual) = fit_rate_with_residual(&pairs)?;
        let pairwise = pairwise_rates(&pairs)?;
        Ok(Self {
            resolutions,
            errors,
            pairwise,
            rate,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn relative_error_examples() {
        let r = vec![1.0, 2.0, -3.0, 0.5];
        assert_eq!(relative_l2_error(&r, &r).unwrap(), 0.0);
        let twice: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        assert_abs_diff_eq!(relative_l2_error(&twice, &r).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(relative_l2_error_sqrt(&twice, &r).unwrap(), 1.0, epsilon = 1e-15);
        // index 0 does not enter either sum
        let mut shifted = r.clone();
        shifted[0] = 99.0;
        assert_eq!(relative_l2_error(&shifted, &r).unwrap(), 0.0);
        assert!(matches!(
            relative_l2_error(&r, &[5.0, 0.0, 0.0, 0.0]),
            Err(Error::ZeroReference)
        ));
        assert!(relative_l2_error(&r, &[1.0]).is_err());
    }

    #[test]
    fn rate_of_exact_power_law() {
        let pairs: Vec<(f64, f64)> = [100.0, 200.0, 400.0]
            .iter()
            .map(|n: &f64| (*n, 3.0 * n.powi(-2)))
            .collect();
        let (rate, resid) = fit_rate_with_residual(&pairs).unwrap();
        assert_abs_diff_eq!(rate, 2.0, epsilon = 1e-12);
        assert!(resid < 1e-12);
        for r in pairwise_rates(&pairs).unwrap() {
            assert_abs_diff_eq!(r, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_point_rate() {
        let pairs = [(100.0, 2.1336e-3), (200.0, 4.7141e-4)];
        let expected = (2.1336e-3f64 / 4.7141e-4).ln() / 2f64.ln();
        assert_abs_diff_eq!(fit_rate(&pairs).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn rate_errors() {
        assert!(fit_rate(&[(100.0, 1e-3)]).is_err());
        assert!(fit_rate(&[(100.0, 1e-3), (200.0, 0.0)]).is_err());
        assert!(fit_rate(&[(100.0, 1e-3), (100.0, 1e-4)]).is_err());
    }
}
