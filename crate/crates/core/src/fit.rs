//! Least-squares line fits used by the scaling experiments.

use serde::Serialize;

use crate::error::{Error, Result};

/// A fitted line `y = slope * x + intercept` with the root-mean-square
/// residual of the fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Ordinary least squares through `(x, y)` pairs; at least two distinct
/// abscissae and finite data required.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidData(format!(
            "fit needs matching lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidData(format!(
            "fit needs at least 2 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidData(
            "fit data must be finite".to_string(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidData(
            "fit needs at least two distinct x values".to_string(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Fit `log2 y` against `log2 x`; every value must be strictly positive.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let lx = log2_all(xs)?;
    let ly = log2_all(ys)?;
    fit_linear(&lx, &ly)
}

/// Fit `log2 y` against plain `x` (dyadic scaling in an integer index).
pub fn fit_log2_vs_index(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let ly = log2_all(ys)?;
    fit_linear(xs, &ly)
}

fn log2_all(vs: &[f64]) -> Result<Vec<f64>> {
    vs.iter()
        .map(|&v| {
            if v > 0.0 && v.is_finite() {
                Ok(v.log2())
            } else {
                Err(Error::InvalidData(format!(
                    "logarithmic fit needs positive finite values, got {v}"
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_is_recovered_with_zero_residual() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -2.5 * x + 0.75).collect();
        let fit = fit_linear(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, -2.5, max_relative = 1e-14);
        assert_relative_eq!(fit.intercept, 0.75, max_relative = 1e-13);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn power_law_slope_comes_out_of_loglog() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * (*x as f64).powf(1.5)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn dyadic_decay_slope_against_index() {
        let ns = [3.0, 4.0, 5.0];
        let ys: Vec<f64> = ns.iter().map(|n| 7.0 * 2f64.powf(-n)).collect();
        let fit = fit_log2_vs_index(&ns, &ys).unwrap();
        assert_relative_eq!(fit.slope, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(fit_linear(&[1.0], &[2.0]).is_err());
        assert!(fit_linear(&[1.0, 2.0], &[2.0]).is_err());
        assert!(fit_linear(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(fit_linear(&[1.0, 2.0], &[f64::NAN, 3.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[0.0, 3.0]).is_err());
        assert!(fit_loglog(&[-1.0, 2.0], &[1.0, 3.0]).is_err());
    }
}
