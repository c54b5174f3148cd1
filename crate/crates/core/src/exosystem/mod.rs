//! Linear exosystem `Ẋ = AX`, `s = CX` driving the outlet flow fluctuation,
//! the bounded uncertainty `ε(t)` and the small linear-algebra toolkit used
//! by the gains.

mod eig;
mod expm;
mod place;

pub use eig::{eigenvalues, spectral_abscissa};
pub use expm::matrix_exp;
pub use place::place_observer_gain;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Finite-dimensional generator of the outlet flow fluctuation.
#[derive(Debug, Clone, PartialEq)]
pub struct Exosystem {
    a: DMatrix<f64>,
    c: DVector<f64>,
    x0: DVector<f64>,
}

impl Exosystem {
    pub fn new(a: DMatrix<f64>, c: DVector<f64>, x0: DVector<f64>) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::InvalidInput("exosystem dimension must be at least 1".into()));
        }
        if a.nrows() != n || a.ncols() != n || x0.len() != n {
            return Err(Error::InvalidInput(format!(
                "exosystem dimensions disagree: A is {}x{}, C has {}, X0 has {}",
                a.nrows(),
                a.ncols(),
                n,
                x0.len()
            )));
        }
        if a.iter().chain(c.iter()).chain(x0.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("exosystem has a non-finite entry".into()));
        }
        Ok(Self { a, c, x0 })
    }

    /// Harmonic oscillator `A = [[0,1],[-ω²,0]]`, `C = (1,0)`.
    pub fn harmonic(omega: f64, x0: [f64; 2]) -> Result<Self> {
        Self::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -omega * omega, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(x0.to_vec()),
        )
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    /// `s = C X`.
    pub fn output(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "state has {} entries, exosystem has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.c.dot(x))
    }

    /// Transition matrix `e^{A dt}`.
    pub fn flow(&self, dt: f64) -> Result<DMatrix<f64>> {
        matrix_exp(&self.a, dt)
    }

    /// Exact flow `e^{A dt} X`.
    pub fn step(&self, x: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("step size {dt} must be positive")));
        }
        if x.len() != self.dim() {
            return Err(Error::InvalidInput("state dimension mismatch".into()));
        }
        Ok(self.flow(dt)? * x)
    }

    /// `X(t)` from `X0`.
    pub fn state_at(&self, t: f64) -> Result<DVector<f64>> {
        Ok(self.flow(t)? * &self.x0)
    }

    /// Largest imaginary part over `spec(A)`.
    pub fn dominant_frequency(&self) -> Result<f64> {
        Ok(eigenvalues(&self.a)?
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max))
    }

    /// Default observer poles `-(3 + k) ω`, `k = 0..n`, with ω the dominant
    /// frequency of `A`. Falls back to the spectral radius and then to
    /// `fallback_rate` when `A` has no oscillatory mode.
    pub fn default_observer_poles(&self, fallback_rate: f64) -> Result<Vec<Complex<f64>>> {
        let eig = eigenvalues(&self.a)?;
        let mut omega = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if omega == 0.0 {
            omega = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        if omega == 0.0 {
            omega = fallback_rate;
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cannot derive default observer poles (rate {omega})"
            )));
        }
        Ok((0..self.dim())
            .map(|k| Complex::new(-(3.0 + k as f64) * omega, 0.0))
            .collect())
    }

    pub fn place_observer_gain(&self, sigma: f64, poles: &[Complex<f64>]) -> Result<DVector<f64>> {
        place_observer_gain(&self.a, &self.c, sigma, poles)
    }
}

/// Sampled user disturbance: linear interpolation, constant extrapolation,
/// clamped to `[-bound, bound]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    t: Vec<f64>,
    eps: Vec<f64>,
    bound: f64,
}

impl SampledSeries {
    pub fn new(t: Vec<f64>, eps: Vec<f64>, bound: f64) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidInput("custom disturbance series is empty".into()));
        }
        if t.len() != eps.len() {
            return Err(Error::InvalidInput(format!(
                "custom disturbance has {} times but {} values",
                t.len(),
                eps.len()
            )));
        }
        if t.iter().chain(eps.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("custom disturbance has a non-finite sample".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "custom disturbance times must be strictly increasing".into(),
            ));
        }
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::InvalidInput(format!("bound {bound} must be finite and >= 0")));
        }
        Ok(Self { t, eps, bound })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        let raw = if t <= self.t[0] {
            self.eps[0]
        } else if t >= self.t[n - 1] {
            self.eps[n - 1]
        } else {
            let k = self.t.partition_point(|&tk| tk <= t) - 1;
            let f = (t - self.t[k]) / (self.t[k + 1] - self.t[k]);
            self.eps[k] + f * (self.eps[k + 1] - self.eps[k])
        };
        raw.clamp(-self.bound, self.bound)
    }
}

/// Bounded unknown disturbance added to the outlet flow.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Uncertainty {
    #[default]
    None,
    /// `ε = coeff · s³`; `bound` is the declared `M`, if any.
    CubicOfS { coeff: f64, bound: Option<f64> },
    CustomSamples(SampledSeries),
}

impl Uncertainty {
    /// `ε` given the current fluctuation `s` and time `t`.
    pub fn epsilon(&self, s: f64, t: f64) -> f64 {
        match self {
            Uncertainty::None => 0.0,
            Uncertainty::CubicOfS { coeff, .. } => coeff * s * s * s,
            Uncertainty::CustomSamples(series) => series.eval(t),
        }
    }

    /// Declared bound `M`; zero when there is no uncertainty.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Uncertainty::None => Some(0.0),
            Uncertainty::CubicOfS { bound, .. } => *bound,
            Uncertainty::CustomSamples(series) => Some(series.bound),
        }
    }

    /// Multiplies the disturbance by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Uncertainty::None => Uncertainty::None,
            Uncertainty::CubicOfS { coeff, bound } => Uncertainty::CubicOfS {
                coeff: coeff * k,
                bound: bound.map(|b| b * k.abs()),
            },
            Uncertainty::CustomSamples(s) => Uncertainty::CustomSamples(SampledSeries {
                t: s.t.clone(),
                eps: s.eps.iter().map(|e| e * k).collect(),
                bound: s.bound * k.abs(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const PHI_L: f64 = 289.0;

    fn base_exo() -> Exosystem {
        Exosystem::harmonic(2.0 * PI / 21600.0, [0.0, 0.1 * PHI_L / 3600.0]).unwrap()
    }

    fn s_closed(t: f64) -> f64 {
        0.6 * PHI_L / (2.0 * PI) * (2.0 * PI * t / 21600.0).sin()
    }

    #[test]
    fn output_is_a_dot_product() {
        let e = Exosystem::new(
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![2.0, 3.0]),
            DVector::zeros(2),
        )
        .unwrap();
        assert_eq!(e.output(&DVector::from_vec(vec![1.0, 1.0])).unwrap(), 5.0);
        let p = base_exo();
        assert_eq!(p.output(&DVector::from_vec(vec![27.60, 0.0])).unwrap(), 27.60);
        assert_eq!(p.output(p.x0()).unwrap(), 0.0);
        assert!(p.output(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn zero_state_stays_zero() {
        let x = base_exo().step(&DVector::zeros(2), 123.0).unwrap();
        assert_eq!(x, DVector::zeros(2));
    }

    #[test]
    fn quarter_period_reaches_peak() {
        let p = base_exo();
        let x = p.step(p.x0(), 5400.0).unwrap();
        let s = p.output(&x).unwrap();
        let peak = 0.6 * PHI_L / (2.0 * PI);
        assert!((s - peak).abs() / peak < 1e-12);
        assert!((s - 27.598).abs() < 1e-3);
    }

    #[test]
    fn full_period_returns_to_start() {
        let p = base_exo();
        let x = p.step(p.x0(), 21600.0).unwrap();
        assert!((&x - p.x0()).norm() <= 1e-9 * p.x0().norm());
    }

    #[test]
    fn step_matches_closed_form_over_a_day() {
        let p = base_exo();
        let dt = 59.5;
        let phi = p.flow(dt).unwrap();
        let mut x = p.x0().clone();
        let peak = 0.6 * PHI_L / (2.0 * PI);
        for k in 1..=1452 {
            x = &phi * &x;
            let t = k as f64 * dt;
            assert!((p.output(&x).unwrap() - s_closed(t)).abs() <= 1e-9 * peak, "t={t}");
        }
    }

    #[test]
    fn rejects_nonpositive_step_and_bad_dims() {
        let p = base_exo();
        assert!(p.step(p.x0(), 0.0).is_err());
        assert!(Exosystem::new(DMatrix::zeros(2, 2), DVector::zeros(2), DVector::zeros(3)).is_err());
        assert!(Exosystem::new(DMatrix::zeros(0, 0), DVector::zeros(0), DVector::zeros(0)).is_err());
    }

    #[test]
    fn default_poles_use_oscillator_frequency() {
        let p = base_exo();
        let w = 2.0 * PI / 21600.0;
        let poles = p.default_observer_poles(1.0).unwrap();
        assert!((poles[0].re + 3.0 * w).abs() < 1e-15 && (poles[1].re + 4.0 * w).abs() < 1e-15);
        let h = p.place_observer_gain(378.0, &poles).unwrap();
        let closed = p.a() + &h * p.c().transpose() / 378.0;
        assert!(spectral_abscissa(&closed).unwrap() < 0.0);

        let flat = Exosystem::new(DMatrix::zeros(1, 1), DVector::from_vec(vec![1.0]), DVector::zeros(1))
            .unwrap();
        assert_eq!(flat.default_observer_poles(0.5).unwrap(), vec![Complex::new(-1.5, 0.0)]);
    }

    #[test]
    fn epsilon_kinds() {
        assert_eq!(Uncertainty::None.epsilon(27.6, 0.0), 0.0);
        let cubic = Uncertainty::CubicOfS { coeff: 0.001, bound: None };
        assert!((cubic.epsilon(27.60, 0.0) - 21.024576).abs() < 1e-9);
        assert_eq!(cubic.epsilon(0.0, 0.0), 0.0);
        assert_eq!(cubic.epsilon(-2.0, 0.0), -0.008);
        let doubled = cubic.scaled(2.0);
        assert_eq!(doubled.epsilon(10.0, 0.0), 2.0);
    }

    #[test]
    fn custom_series_interpolates_and_clamps() {
        let s = SampledSeries::new(vec![0.0, 10.0, 20.0], vec![0.0, 4.0, -8.0], 5.0).unwrap();
        let u = Uncertainty::CustomSamples(s);
        assert_eq!(u.epsilon(0.0, -3.0), 0.0);
        assert_eq!(u.epsilon(0.0, 5.0), 2.0);
        assert_eq!(u.epsilon(0.0, 15.0), -2.0);
        assert_eq!(u.epsilon(0.0, 19.0), -5.0);
        assert_eq!(u.epsilon(0.0, 100.0), -5.0);
        assert_eq!(u.bound(), Some(5.0));
        assert!(SampledSeries::new(vec![], vec![], 1.0).is_err());
        assert!(SampledSeries::new(vec![0.0, 0.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(SampledSeries::new(vec![0.0], vec![1.0, 2.0], 1.0).is_err());
    }
}
