//! Finite-difference checks of solved kernel grids.

use super::{Family, TriKernel, Triangle};
use crate::pipeline::PipelineParams;

/// Largest absolute central-difference residual of the two transport
/// equations of `family` over the interior nodes of the grid.
pub fn kernel_residual(family: Family, d: &TriKernel, e: &TriKernel, p: &PipelineParams) -> f64 {
    let n = d.n();
    let h = d.step();
    let inv = 0.5 / h;
    let coef: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let (a, b, _) = family.coefficients(p, k as f64 * h);
            (a, b)
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut visit = |i: usize, j: usize, k: usize| {
        let (a, b) = coef[k];
        let dx = (d.get(i + 1, j) - d.get(i - 1, j)) * inv;
        let dxi = (d.get(i, j + 1) - d.get(i, j - 1)) * inv;
        let ex = (e.get(i + 1, j) - e.get(i - 1, j)) * inv;
        let exi = (e.get(i, j + 1) - e.get(i, j - 1)) * inv;
        worst = worst
            .max((dx - dxi - a * e.get(i, j)).abs())
            .max((ex + exi - b * d.get(i, j)).abs());
    };
    match family.triangle() {
        Triangle::Lower => {
            for i in 2..n {
                for j in 1..i {
                    visit(i, j, j);
                }
            }
        }
        Triangle::Upper => {
            for j in 2..n {
                for i in 1..j {
                    visit(i, j, i);
                }
            }
        }
    }
    worst
}

/// Largest mismatch in the diagonal and edge conditions of `family`.
pub fn boundary_defect(family: Family, d: &TriKernel, e: &TriKernel, p: &PipelineParams) -> f64 {
    let n = d.n();
    let h = d.step();
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        let (_, _, g) = family.coefficients(p, k as f64 * h);
        worst = worst.max((d.get(k, k) - g).abs());
        let edge = match family.triangle() {
            Triangle::Lower => (e.get(k, 0) - d.get(k, 0)).abs(),
            Triangle::Upper => (e.get(0, k) - d.get(0, k)).abs(),
        };
        worst = worst.max(edge);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::solve_family;

    fn base() -> PipelineParams {
        PipelineParams::new(0.011, 0.5, 25000.0, 378.0, 289.0, 46.0).unwrap()
    }

    #[test]
    fn zero_solution_has_zero_residual() {
        let p = PipelineParams { lambda_f: 0.0, ..base() };
        for f in Family::ALL {
            let k = solve_family(&p, 12, f).unwrap();
            assert_eq!(kernel_residual(f, &k.d, &k.e, &p), 0.0);
            assert_eq!(boundary_defect(f, &k.d, &k.e, &p), 0.0);
        }
    }

    #[test]
    fn perturbed_node_is_detected() {
        let p = base();
        let n = 40;
        for f in [Family::K21K22, Family::P12P22] {
            let k = solve_family(&p, n, f).unwrap();
            let base = kernel_residual(f, &k.d, &k.e, &p);
            let mut d = k.d.clone();
            let (i, j) = if f.triangle() == Triangle::Lower { (20, 10) } else { (10, 20) };
            d.set(i, j, d.get(i, j) + 1.0);
            let bumped = kernel_residual(f, &d, &k.e, &p);
            assert!(bumped >= n as f64 / 4.0 - base, "{bumped} vs {base}");
        }
    }

    #[test]
    fn solved_kernels_have_exact_boundaries() {
        let p = base();
        for f in Family::ALL {
            let k = solve_family(&p, 30, f).unwrap();
            assert_eq!(boundary_defect(f, &k.d, &k.e, &p), 0.0, "{f:?}");
        }
    }
}
