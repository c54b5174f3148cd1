//! Observer gain placement on the dual pair (Ackermann's formula).

use nalgebra::{Complex, DMatrix, DVector};

use super::eig::eigenvalues;
use crate::error::{Error, Result};

const PLACE_TOL: f64 = 1e-8;
/// Relative singular-value floor of the row-normalised observability matrix.
const OBSERVABILITY_TOL: f64 = 1e-10;

/// Monic polynomial with the given roots, highest power first. The roots
/// must be closed under conjugation.
pub(crate) fn poly_from_roots(roots: &[Complex<f64>]) -> Result<Vec<f64>> {
    let mut c = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] -= ck * r;
        }
        c = next;
    }
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if c.iter().any(|z| z.im.abs() > 1e-10 * scale) {
        return Err(Error::InvalidInput(
            "observer poles must be closed under complex conjugation".into(),
        ));
    }
    Ok(c.iter().map(|z| z.re).collect())
}

fn observability(a: &DMatrix<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut o = DMatrix::zeros(n, n);
    let mut row = c.transpose();
    for i in 0..n {
        o.set_row(i, &row);
        row = &row * a;
    }
    o
}

/// Returns `H` with `spec(A + H C / sigma)` equal to `poles`.
pub fn place_observer_gain(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    sigma: f64,
    poles: &[Complex<f64>],
) -> Result<DVector<f64>> {
    let n = a.nrows();
    if !a.is_square() || c.len() != n {
        return Err(Error::InvalidInput("A and C dimensions disagree".into()));
    }
    if poles.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} observer poles, got {}",
            poles.len()
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sound speed {sigma} must be positive")));
    }
    if let Some(p) = poles.iter().find(|p| !(p.re < 0.0) || !p.im.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "observer pole {p} must have negative real part"
        )));
    }

    let o = observability(a, c);
    let mut normed = o.clone();
    for mut row in normed.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let sv = normed.singular_values();
    let smax = sv.max();
    if smax == 0.0 || sv.min() <= OBSERVABILITY_TOL * smax {
        return Err(Error::Unobservable);
    }

    let coeffs = poly_from_roots(poles)?;
    // p(A) by Horner
    let mut pa = DMatrix::<f64>::zeros(n, n);
    for &ck in &coeffs {
        pa = &pa * a + DMatrix::identity(n, n) * ck;
    }
    let mut e_n = DVector::zeros(n);
    e_n[n - 1] = 1.0;
    let q = o.lu().solve(&e_n).ok_or(Error::Unobservable)?;
    let h = -(pa * q) * sigma;

    verify(a, c, sigma, &h, poles)?;
    Ok(h)
}

fn verify(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    sigma: f64,
    h: &DVector<f64>,
    poles: &[Complex<f64>],
) -> Result<()> {
    let closed = a + h * c.transpose() / sigma;
    let mut got = eigenvalues(&closed)?;
    for p in poles {
        let mult = poles.iter().filter(|q| (*q - p).norm() <= 1e-12 * p.norm()).count();
        // a root of multiplicity m moves like eps^(1/m)
        let tol = PLACE_TOL.max(10.0 * f64::EPSILON.powf(1.0 / mult as f64));
        let (idx, err) = got
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - p).norm() / p.norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("one eigenvalue per pole");
        if err > tol {
            return Err(Error::PlacementInaccurate {
                pole: format!("{p}"),
                error: err,
            });
        }
        got.swap_remove(idx);
    }
    Ok(())
}
