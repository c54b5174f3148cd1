//! Characteristic marching for the generic lower-triangle Goursat problem
//!
//! ```text
//! D_x − D_ξ = a(ξ) E,   E_x + E_ξ = b(ξ) D,   0 ≤ ξ ≤ x ≤ 1,
//! D(s, s) = g(s),       E(x, 0) = D(x, 0).
//! ```
//!
//! `D` is integrated along slope −1 lines from the diagonal and `E` along
//! slope +1 lines from the edge, with either quadrature rule of
//! [`Quadrature`].
//! Characteristics of odd index parity start half way between two diagonal
//! nodes; there `g` and `a` are sampled exactly and `E` is averaged.

use crate::error::{Error, Result};

/// Relative sup-norm change that ends the sweeps.
pub(crate) const SWEEP_TOL: f64 = 1e-12;
pub(crate) const MAX_SWEEPS: usize = 200;

/// Coefficient samples at nodes `k h` (`k = 0..=n`) and half nodes
/// `(k + 1/2) h` (`k = 0..n`).
#[derive(Debug, Clone)]
pub(crate) struct Samples {
    pub node: Vec<f64>,
    pub half: Vec<f64>,
}

impl Samples {
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = 1.0 / n as f64;
        Self {
            node: (0..=n).map(|k| f(k as f64 * h)).collect(),
            half: (0..n).map(|k| f((k as f64 + 0.5) * h)).collect(),
        }
    }
}

/// Quadrature rule along the characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Left-endpoint rule: explicit, first order.
    LeftEndpoint,
    /// Right-endpoint rule: implicit in the node itself, first order.
    #[default]
    RightEndpoint,
    /// Composite trapezoid: implicit in the node itself, second order.
    Trapezoid,
}

impl Quadrature {
    /// Weights of the start and end point of one panel.
    fn panel(self) -> (f64, f64) {
        match self {
            Quadrature::LeftEndpoint => (1.0, 0.0),
            Quadrature::RightEndpoint => (0.0, 1.0),
            Quadrature::Trapezoid => (0.5, 0.5),
        }
    }
}

pub(crate) struct LowerProblem<'a> {
    pub n: usize,
    pub rule: Quadrature,
    pub a: &'a Samples,
    pub b: &'a Samples,
    pub g: &'a Samples,
}

pub(crate) struct Solution {
    /// Row-major `(n+1)²` grids indexed `[i * (n + 1) + j]`, `j ≤ i`.
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl LowerProblem<'_> {
    pub fn solve(&self, family: &'static str) -> Result<Solution> {
        let m = self.n + 1;
        let mut d = vec![0.0; m * m];
        let mut e = vec![0.0; m * m];
        let mut deltas = Vec::new();
        for sweep in 1..=MAX_SWEEPS {
            let delta = self.sweep(&mut d, &mut e, family)?;
            deltas.push(delta);
            if delta <= SWEEP_TOL {
                return Ok(Solution { d, e, deltas });
            }
            if !delta.is_finite() {
                return Err(Error::SolverDivergence { family, sweeps: sweep, delta });
            }
        }
        Err(Error::SolverDivergence {
            family,
            sweeps: MAX_SWEEPS,
            delta: *deltas.last().unwrap_or(&f64::NAN),
        })
    }

    /// One Gauss–Seidel pass, row by row. Returns the relative sup-norm change.
    fn sweep(&self, d: &mut [f64], e: &mut [f64], family: &'static str) -> Result<f64> {
        let n = self.n;
        let m = n + 1;
        let h = 1.0 / n as f64;
        let (a, b, g) = (&self.a.node, &self.b.node, &self.g.node);
        let at = |i: usize, j: usize| i * m + j;

        let mut change: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut update = |slot: &mut f64, new: f64| {
            change = change.max((new - *slot).abs());
            scale = scale.max(new.abs());
            *slot = new;
        };

        let (ws, we) = self.rule.panel();
        for i in 0..=n {
            // diagonal: D is data, E follows from the diagonal D values
            update(&mut d[at(i, i)], g[i]);
            let e_diag = if i == 0 {
                d[at(0, 0)]
            } else {
                let mut s = ws * b[0] * d[at(0, 0)] + we * b[i] * d[at(i, i)];
                for k in 1..i {
                    s += b[k] * d[at(k, k)];
                }
                d[at(0, 0)] + h * s
            };
            update(&mut e[at(i, i)], e_diag);

            for j in 0..i {
                // E along (i - j + k, k), k = 0..=j; the k = j term is the node
                let (r_e, w_e) = if j == 0 {
                    (0.0, 1.0)
                } else {
                    let base = i - j;
                    let mut s = ws * b[0] * d[at(base, 0)];
                    for k in 1..j {
                        s += b[k] * d[at(base + k, k)];
                    }
                    (d[at(base, 0)] + h * s, we * h * b[j])
                };

                // D along (q + k, q - k) from the diagonal point q = (i + j)/2
                let (r_d, w_d) = if (i + j) % 2 == 0 {
                    let q = (i + j) / 2;
                    let steps = i - q;
                    let mut s = ws * a[q] * e[at(q, q)];
                    for k in 1..steps {
                        s += a[q - k] * e[at(q + k, q - k)];
                    }
                    (g[q] + h * s, we * h * a[j])
                } else {
                    // a half panel from the diagonal point q + 1/2 comes first
                    let q = (i + j - 1) / 2;
                    let steps = i - q - 1;
                    let e_mid = 0.5 * (e[at(q, q)] + e[at(q + 1, q + 1)]);
                    let head = 0.5 * h * ws * self.a.half[q] * e_mid;
                    if steps == 0 {
                        (self.g.half[q] + head, 0.5 * we * h * a[j])
                    } else {
                        let mut s = (0.5 * we + ws) * a[q] * e[at(q + 1, q)];
                        for k in 1..steps {
                            s += a[q - k] * e[at(q + 1 + k, q - k)];
                        }
                        (self.g.half[q] + head + h * s, we * h * a[j])
                    }
                };

                let (dv, ev) = if j == 0 {
                    let den = 1.0 - w_d;
                    check_den(den, family)?;
                    let dv = r_d / den;
                    (dv, dv)
                } else {
                    let den = 1.0 - w_d * w_e;
                    check_den(den, family)?;
                    let dv = (r_d + w_d * r_e) / den;
                    (dv, r_e + w_e * dv)
                };
                update(&mut d[at(i, j)], dv);
                update(&mut e[at(i, j)], ev);
            }
        }
        Ok(if scale > 0.0 { change / scale } else { change })
    }
}

fn check_den(den: f64, family: &'static str) -> Result<()> {
    if den.abs() < 1e-12 || !den.is_finite() {
        Err(Error::SolverDivergence { family, sweeps: 0, delta: f64::INFINITY })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(n: usize, i: usize, j: usize) -> usize {
        i * (n + 1) + j
    }

    #[test]
    fn constant_data_without_coupling() {
        let n = 10;
        let zero = Samples::from_fn(n, |_| 0.0);
        let g = Samples::from_fn(n, |_| 2.5);
        let sol = LowerProblem { n, rule: Quadrature::Trapezoid, a: &zero, b: &zero, g: &g }.solve("test").unwrap();
        for i in 0..=n {
            for j in 0..=i {
                assert_eq!(sol.d[at(n, i, j)], 2.5);
                assert_eq!(sol.e[at(n, i, j)], 2.5);
            }
        }
        assert_eq!(sol.deltas.len(), 2);
        assert_eq!(sol.deltas[1], 0.0);
    }

    #[test]
    fn linear_data_is_transported_exactly() {
        // a = b = 0: D(x, ξ) = g((x + ξ)/2), E(x, ξ) = D(x - ξ, 0) = g((x - ξ)/2)
        let n = 16;
        let zero = Samples::from_fn(n, |_| 0.0);
        let g = Samples::from_fn(n, |s| 1.0 + 3.0 * s);
        let sol = LowerProblem { n, rule: Quadrature::Trapezoid, a: &zero, b: &zero, g: &g }.solve("test").unwrap();
        let h = 1.0 / n as f64;
        for i in 0..=n {
            for j in 0..=i {
                let (x, xi) = (i as f64 * h, j as f64 * h);
                assert!((sol.d[at(n, i, j)] - (1.0 + 1.5 * (x + xi))).abs() < 1e-13);
                assert!((sol.e[at(n, i, j)] - (1.0 + 1.5 * (x - xi))).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_coupling_matches_closed_form() {
        // E(x, ξ) = e^{(x - ξ)/2} and D(x, ξ) = e^{(x - ξ)/2}
        let errors = |rule| {
        let mut errs = Vec::new();
        for n in [32, 64] {
            let one = Samples::from_fn(n, |_| 1.0);
            let zero = Samples::from_fn(n, |_| 0.0);
            let sol = LowerProblem { n, rule, a: &one, b: &zero, g: &one }.solve("test").unwrap();
            let mut err: f64 = 0.0;
            for i in 0..=n {
                for j in 0..=i {
                    let exact = (0.5 * (i - j) as f64 / n as f64).exp();
                    err = err.max((sol.d[at(n, i, j)] - exact).abs());
                    err = err.max((sol.e[at(n, i, j)] - exact).abs());
                }
            }
            errs.push(err);
        }
        errs
        };
        let trap = errors(Quadrature::Trapezoid);
        assert!(trap[0] < 1e-4, "{trap:?}");
        assert!(trap[1] / trap[0] < 0.3, "{trap:?}");
        for rule in [Quadrature::LeftEndpoint, Quadrature::RightEndpoint] {
            let errs = errors(rule);
            assert!(errs[0] < 2e-2, "{rule:?} {errs:?}");
            let ratio = errs[1] / errs[0];
            assert!((0.4..0.6).contains(&ratio), "{rule:?} {errs:?}");
        }
    }
}
