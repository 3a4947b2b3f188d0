//! One-dimensional interpolation on increasing abscissae.

use crate::{Error, Result};

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("samples", "abscissae must be strictly increasing"));
    }
    Ok(())
}

fn bracket(x: &[f64], at: f64) -> usize {
    match x.partition_point(|v| *v <= at) {
        0 => 0,
        k if k >= x.len() => x.len() - 2,
        k => k - 1,
    }
}

/// Piecewise-linear interpolant, extended linearly past the ends.
pub fn linear(x: &[f64], y: &[f64], at: &[f64]) -> Result<Vec<f64>> {
    check(x, y)?;
    Ok(at
        .iter()
        .map(|&s| {
            let k = bracket(x, s);
            let w = (s - x[k]) / (x[k + 1] - x[k]);
            y[k] + w * (y[k + 1] - y[k])
        })
        .collect())
}

/// Natural cubic spline through (x, y), extended linearly past the ends
/// with the end slopes.
pub fn natural_spline(x: &[f64], y: &[f64], at: &[f64]) -> Result<Vec<f64>> {
    check(x, y)?;
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives m with m_0 = m_{n-1} = 0; Thomas algorithm.
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for i in 1..k {
            let f = h[i] / diag[i - 1];
            diag[i] -= f * h[i];
            rhs[i] -= f * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    let slope = |i: usize, s: f64| -> f64 {
        let (a, b) = (x[i + 1] - s, s - x[i]);
        (-m[i] * a * a + m[i + 1] * b * b) / (2.0 * h[i]) + (y[i + 1] - y[i]) / h[i] - (m[i + 1] - m[i]) * h[i] / 6.0
    };
    Ok(at
        .iter()
        .map(|&s| {
            if s < x[0] {
                y[0] + slope(0, x[0]) * (s - x[0])
            } else if s > x[n - 1] {
                y[n - 1] + slope(n - 2, x[n - 1]) * (s - x[n - 1])
            } else {
                let i = bracket(x, s);
                let (a, b) = (x[i + 1] - s, s - x[i]);
                m[i] * a * a * a / (6.0 * h[i])
                    + m[i + 1] * b * b * b / (6.0 * h[i])
                    + (y[i] / h[i] - m[i] * h[i] / 6.0) * a
                    + (y[i + 1] / h[i] - m[i + 1] * h[i] / 6.0) * b
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_is_exact_on_lines() {
        let x = [0.0, 1.0, 3.0];
        let y = [1.0, 3.0, 7.0];
        let v = linear(&x, &y, &[-1.0, 0.5, 2.0, 4.0]).unwrap();
        assert_eq!(v, vec![-1.0, 2.0, 5.0, 9.0]);
    }

    #[test]
    fn spline_reproduces_lines_and_knots() {
        let x: Vec<f64> = (0..6).map(|i| 0.5 + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let at = [0.0, 0.5, 1.7, 3.3, 5.5, 6.0];
        for (s, v) in at.iter().zip(natural_spline(&x, &y, &at).unwrap()) {
            assert_relative_eq!(v, 2.0 * s - 1.0, epsilon = 1e-12);
        }
        let yq: Vec<f64> = x.iter().map(|v| (v * 0.7).sin()).collect();
        let knots = natural_spline(&x, &yq, &x).unwrap();
        for (a, b) in knots.iter().zip(&yq) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn spline_is_accurate_for_smooth_data() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 + 0.5) * 15.0 / 40.0).collect();
        let f = |z: f64| (-((z - 7.5) / 3.75).powi(2)).exp();
        let y: Vec<f64> = x.iter().map(|z| f(*z)).collect();
        let at: Vec<f64> = (1..100).map(|i| 0.5 + 14.0 * i as f64 / 100.0).collect();
        for (s, v) in at.iter().zip(natural_spline(&x, &y, &at).unwrap()) {
            assert!((v - f(*s)).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(linear(&[0.0, 0.0], &[1.0, 2.0], &[0.0]).is_err());
        assert!(natural_spline(&[0.0], &[1.0], &[0.0]).is_err());
    }
}
