//! Backstepping and observer kernels on triangular grids, and the gains
//! built from them.
//!
//! Controller kernels live on `0 ≤ ξ ≤ x̄ ≤ 1`, observer kernels on
//! `0 ≤ x̄ ≤ ξ ≤ 1`. All grids share the resolution `N` of the simulation.

mod gains;
mod march;
mod residual;
pub mod transform;

pub use gains::{feedback_gain, observer_gains_known, observer_gains_uncertain, GainSet, GainVariant};
pub use residual::{boundary_defect, kernel_residual};

use std::io::Write;

pub use march::Quadrature;

use march::{LowerProblem, Samples};

use crate::error::{Error, Result};
use crate::pipeline::PipelineParams;

/// Smallest accepted kernel grid.
pub const MIN_GRID: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// `0 ≤ ξ ≤ x̄ ≤ 1`
    Lower,
    /// `0 ≤ x̄ ≤ ξ ≤ 1`
    Upper,
}

/// Samples of one kernel at the nodes `(i h, j h)` of its triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriKernel {
    n: usize,
    triangle: Triangle,
    values: Vec<f64>,
}

impl TriKernel {
    pub(crate) fn from_lower(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), (n + 1) * (n + 1));
        Self { n, triangle: Triangle::Lower, values }
    }

    /// Reflects a lower-triangle grid across the diagonal.
    pub(crate) fn transposed(&self) -> Self {
        let m = self.n + 1;
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                values[j * m + i] = self.values[i * m + j];
            }
        }
        let triangle = match self.triangle {
            Triangle::Lower => Triangle::Upper,
            Triangle::Upper => Triangle::Lower,
        };
        Self { n: self.n, triangle, values }
    }

    pub fn zeros(n: usize, triangle: Triangle) -> Self {
        Self { n, triangle, values: vec![0.0; (n + 1) * (n + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn triangle(&self) -> Triangle {
        self.triangle
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i <= self.n
            && j <= self.n
            && match self.triangle {
                Triangle::Lower => j <= i,
                Triangle::Upper => i <= j,
            }
    }

    /// Value at node `(x̄_i, ξ_j)`; zero off the triangle.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.contains(i, j) {
            self.values[i * (self.n + 1) + j]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.contains(i, j), "node ({i}, {j}) is off the triangle");
        self.values[i * (self.n + 1) + j] = value;
    }

    /// Slice `x̄ = x̄_i`, all `ξ_j` (zero off the triangle).
    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n + 1;
        &self.values[i * m..(i + 1) * m]
    }

    /// Slice `ξ = ξ_j`, all `x̄_i`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..=self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `xbar,xi,value` for every node of the triangle.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xbar", "xi", "value"])?;
        let h = self.step();
        for i in 0..=self.n {
            for j in 0..=self.n {
                if self.contains(i, j) {
                    w.serialize((i as f64 * h, j as f64 * h, self.get(i, j)))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// The four coupled kernel pairs. The first-named kernel carries the
/// diagonal data, the second the edge condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    K21K22,
    K12K11,
    P21P11,
    P12P22,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::K21K22, Family::K12K11, Family::P21P11, Family::P12P22];

    pub fn name(self) -> &'static str {
        match self {
            Family::K21K22 => "K21/K22",
            Family::K12K11 => "K12/K11",
            Family::P21P11 => "P21/P11",
            Family::P12P22 => "P12/P22",
        }
    }

    pub fn triangle(self) -> Triangle {
        match self {
            Family::K21K22 | Family::K12K11 => Triangle::Lower,
            Family::P21P11 | Family::P12P22 => Triangle::Upper,
        }
    }

    /// Coefficients `(a, b, g)` of
    /// `D_x̄ − D_ξ = a E`, `E_x̄ + E_ξ = b D`, `D(s, s) = g(s)` as functions
    /// of the coefficient variable (`ξ` on the lower, `x̄` on the upper
    /// triangle).
    pub(crate) fn coefficients(self, p: &PipelineParams, s: f64) -> (f64, f64, f64) {
        let t = p.transit_time();
        let (m1, m2) = p.mu_unchecked(s);
        let (c1, c2) = (t * m1, t * m2);
        match self {
            Family::K21K22 => (c2, -c1, -0.5 * c2),
            Family::K12K11 => (c1, -c2, -0.5 * c1),
            Family::P21P11 => (-c2, -c1, -0.5 * c2),
            Family::P12P22 => (-c1, -c2, -0.5 * c1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub family: Family,
    /// Relative sup-norm change after each sweep.
    pub deltas: Vec<f64>,
}

impl SolveReport {
    pub fn sweeps(&self) -> usize {
        self.deltas.len()
    }
}

/// Solved kernel pair `(D, E)` of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair {
    pub family: Family,
    pub d: TriKernel,
    pub e: TriKernel,
    pub report: SolveReport,
}

fn check_grid(n: usize) -> Result<()> {
    if n < MIN_GRID {
        return Err(Error::InvalidInput(format!("kernel grid N = {n} is below {MIN_GRID}")));
    }
    Ok(())
}

/// Solves one kernel family on an `N`-interval grid.
///
/// The upper-triangle families are solved through the reflection
/// `(x̄, ξ) ↦ (ξ, x̄)`, which maps them onto the lower-triangle problem with
/// `a ↦ −a`.
pub fn solve_family(p: &PipelineParams, n: usize, family: Family) -> Result<KernelPair> {
    solve_family_with(p, n, family, Quadrature::default())
}

pub fn solve_family_with(
    p: &PipelineParams,
    n: usize,
    family: Family,
    rule: Quadrature,
) -> Result<KernelPair> {
    check_grid(n)?;
    p.validate()?;
    let sign = match family.triangle() {
        Triangle::Lower => 1.0,
        Triangle::Upper => -1.0,
    };
    let a = Samples::from_fn(n, |s| sign * family.coefficients(p, s).0);
    let b = Samples::from_fn(n, |s| family.coefficients(p, s).1);
    let g = Samples::from_fn(n, |s| family.coefficients(p, s).2);
    let sol = LowerProblem { n, rule, a: &a, b: &b, g: &g }.solve(family.name())?;
    let (mut d, mut e) = (TriKernel::from_lower(n, sol.d), TriKernel::from_lower(n, sol.e));
    if family.triangle() == Triangle::Upper {
        d = d.transposed();
        e = e.transposed();
    }
    Ok(KernelPair { family, d, e, report: SolveReport { family, deltas: sol.deltas } })
}

/// All eight kernels on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    pub n: usize,
    pub k11: TriKernel,
    pub k12: TriKernel,
    pub k21: TriKernel,
    pub k22: TriKernel,
    pub p11: TriKernel,
    pub p12: TriKernel,
    pub p21: TriKernel,
    pub p22: TriKernel,
    pub reports: Vec<SolveReport>,
}

impl KernelSet {
    /// Solves the four families concurrently with the default rule.
    pub fn solve(p: &PipelineParams, n: usize) -> Result<Self> {
        Self::solve_with(p, n, Quadrature::default())
    }

    pub fn solve_with(p: &PipelineParams, n: usize, rule: Quadrature) -> Result<Self> {
        check_grid(n)?;
        p.validate()?;
        let pairs: Vec<Result<KernelPair>> = std::thread::scope(|scope| {
            let handles: Vec<_> = Family::ALL
                .iter()
                .map(|&f| scope.spawn(move || solve_family_with(p, n, f, rule)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("kernel solver thread panicked"))
                .collect()
        });
        let mut pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
        let mut next = || pairs.next().expect("four families");
        let k2 = next();
        let k1 = next();
        let p2 = next();
        let p1 = next();
        log::debug!(
            "kernels solved on N = {n}: sweeps {:?}",
            [&k2.report, &k1.report, &p2.report, &p1.report].map(|r| r.sweeps())
        );
        Ok(Self {
            n,
            k21: k2.d,
            k22: k2.e,
            k12: k1.d,
            k11: k1.e,
            p21: p2.d,
            p11: p2.e,
            p12: p1.d,
            p22: p1.e,
            reports: vec![k2.report, k1.report, p2.report, p1.report],
        })
    }

    pub fn get(&self, name: &str) -> Option<&TriKernel> {
        Some(match name {
            "K11" => &self.k11,
            "K12" => &self.k12,
            "K21" => &self.k21,
            "K22" => &self.k22,
            "P11" => &self.p11,
            "P12" => &self.p12,
            "P21" => &self.p21,
            "P22" => &self.p22,
            _ => return None,
        })
    }

    pub fn pair(&self, family: Family) -> (&TriKernel, &TriKernel) {
        match family {
            Family::K21K22 => (&self.k21, &self.k22),
            Family::K12K11 => (&self.k12, &self.k11),
            Family::P21P11 => (&self.p21, &self.p11),
            Family::P12P22 => (&self.p12, &self.p22),
        }
    }

    pub const NAMES: [&'static str; 8] = ["K11", "K12", "K21", "K22", "P11", "P12", "P21", "P22"];
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PipelineParams {
        PipelineParams::new(0.011, 0.5, 25000.0, 378.0, 289.0, 46.0).unwrap()
    }

    #[test]
    fn frictionless_kernels_vanish() {
        let p = PipelineParams { lambda_f: 0.0, ..base() };
        let set = KernelSet::solve(&p, 16).unwrap();
        for name in KernelSet::NAMES {
            assert_eq!(set.get(name).unwrap().max_abs(), 0.0, "{name}");
        }
    }

    #[test]
    fn boundary_conditions_hold_at_nodes() {
        let p = base();
        let n = 40;
        let set = KernelSet::solve(&p, n).unwrap();
        let h = 1.0 / n as f64;
        let c = 0.5 * p.transit_time();
        for i in 0..=n {
            let (m1, m2) = p.mu_coeffs(i as f64 * h).unwrap();
            assert_eq!(set.k21.get(i, i), -c * m2);
            assert_eq!(set.k12.get(i, i), -c * m1);
            assert_eq!(set.p21.get(i, i), -c * m2);
            assert_eq!(set.p12.get(i, i), -c * m1);
            assert_eq!(set.k22.get(i, 0), set.k21.get(i, 0));
            assert_eq!(set.k11.get(i, 0), set.k12.get(i, 0));
            assert_eq!(set.p11.get(0, i), set.p21.get(0, i));
            assert_eq!(set.p22.get(0, i), set.p12.get(0, i));
        }
    }

    #[test]
    fn sweeps_settle_after_one_pass() {
        let set = KernelSet::solve(&base(), 24).unwrap();
        for r in &set.reports {
            assert_eq!(r.sweeps(), 2, "{:?}", r.family);
            assert_eq!(r.deltas[1], 0.0);
        }
    }

    #[test]
    fn observer_kernels_are_reflected_controller_kernels() {
        let set = KernelSet::solve(&base(), 20).unwrap();
        for i in 0..=20 {
            for j in i..=20 {
                assert_eq!(set.p21.get(i, j), set.k21.get(j, i));
                assert_eq!(set.p11.get(i, j), set.k22.get(j, i));
                assert_eq!(set.p12.get(i, j), set.k12.get(j, i));
                assert_eq!(set.p22.get(i, j), set.k11.get(j, i));
            }
        }
    }

    #[test]
    fn off_triangle_reads_zero() {
        let set = KernelSet::solve(&base(), 8).unwrap();
        assert_eq!(set.k21.get(2, 5), 0.0);
        assert_eq!(set.p11.get(5, 2), 0.0);
        assert!(!set.k21.contains(9, 0));
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(KernelSet::solve(&base(), 4), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn csv_export_lists_triangle_nodes() {
        let set = KernelSet::solve(&base(), 8).unwrap();
        let mut buf = Vec::new();
        set.k21.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 45);
        assert!(text.starts_with("xbar,xi,value\n0.0,0.0,"));
    }
}
