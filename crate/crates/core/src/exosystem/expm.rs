//! Matrix exponential by balancing, scaling and squaring with a truncated
//! Taylor series.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Target accuracy of the assembled exponential.
const SERIES_TOL: f64 = 1e-13;
/// The scaled matrix has 1-norm at most this value before the series is summed.
const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 64;

pub(crate) fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Parlett–Reinsch balancing with radix 2. Returns `(B, d)` with
/// `B = D⁻¹ A D`, `D = diag(d)`; the scaling is exact in floating point.
pub(crate) fn balance(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    (b, d)
}

/// Computes `e^{A t}`.
///
/// The product `A t` is balanced, scaled by a power of two until its 1-norm is
/// at most one half, summed as a Taylor series and squared back.
pub fn matrix_exp(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "matrix_exp needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !t.is_finite() || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix_exp: non-finite entry".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let (b, d) = balance(&(a * t));
    let norm = one_norm(&b);
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scale = 2f64.powi(squarings);
    let b = b / scale;
    // each squaring can double the relative error of the series
    let tol = (SERIES_TOL / scale).max(f64::EPSILON);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = (&term * &b) / k as f64;
        sum += &term;
        if one_norm(&term) <= tol * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    for i in 0..n {
        for j in 0..n {
            sum[(i, j)] *= d[i] / d[j];
        }
    }
    Ok(sum)
}
