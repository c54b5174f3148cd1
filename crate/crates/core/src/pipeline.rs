//! Pipe and gas parameters, the steady profile, the linearisation and
//! canonical-form coefficients, and the physical ↔ Riemann coordinate maps.
//!
//! Physical position `x ∈ [0, ℓ]` runs from the inlet to the outlet; the
//! canonical coordinate is `x̄ = (ℓ − x)/ℓ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of a level pipe carrying isothermal gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    /// Darcy–Weisbach friction factor.
    pub lambda_f: f64,
    /// Diameter (m).
    pub diameter: f64,
    /// Length (m).
    pub length: f64,
    /// Isothermal sound speed (m/s).
    pub sound_speed: f64,
    /// Nominal outlet mass flux (kg/m²/s).
    pub phi_l: f64,
    /// Equilibrium inlet density (kg/m³).
    pub u_star: f64,
}

fn positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value, lo: 0.0, hi: f64::INFINITY })
    }
}

fn nonnegative(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value, lo: 0.0, hi: f64::INFINITY })
    }
}

impl PipelineParams {
    /// Validated constructor. Friction and nominal flux may be zero.
    pub fn new(
        lambda_f: f64,
        diameter: f64,
        length: f64,
        sound_speed: f64,
        phi_l: f64,
        u_star: f64,
    ) -> Result<Self> {
        let p = Self { lambda_f, diameter, length, sound_speed, phi_l, u_star };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("lambda_f", self.lambda_f)?;
        positive("diameter", self.diameter)?;
        positive("length", self.length)?;
        positive("sound_speed", self.sound_speed)?;
        nonnegative("phi_l", self.phi_l)?;
        positive("u_star", self.u_star)?;
        let radicand = self.radicand(self.length);
        // a profile that vanishes to rounding at the outlet is not usable
        if !(radicand > 1e-12 * self.u_star * self.u_star) {
            return Err(Error::InfeasibleEquilibrium {
                u_star: self.u_star,
                bound: self.feasibility_bound(),
                radicand,
            });
        }
        Ok(())
    }

    /// `λ φ_L² / (σ² D)`, the slope of `ρ★²` in `x` (with sign flipped).
    pub fn friction_slope(&self) -> f64 {
        self.lambda_f * self.phi_l * self.phi_l / (self.sound_speed * self.sound_speed * self.diameter)
    }

    /// Smallest inlet density that keeps the steady profile real.
    pub fn feasibility_bound(&self) -> f64 {
        (self.friction_slope() * self.length).sqrt()
    }

    /// `U★` minus the feasibility bound.
    pub fn feasibility_margin(&self) -> f64 {
        self.u_star - self.feasibility_bound()
    }

    /// One-way travel time `ℓ/σ`.
    pub fn transit_time(&self) -> f64 {
        self.length / self.sound_speed
    }

    fn radicand(&self, x: f64) -> f64 {
        self.u_star * self.u_star - self.friction_slope() * x
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if (0.0..=self.length).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain { what: "x", value: x, lo: 0.0, hi: self.length })
        }
    }

    fn check_xbar(xbar: f64) -> Result<()> {
        if (0.0..=1.0).contains(&xbar) {
            Ok(())
        } else {
            Err(Error::Domain { what: "xbar", value: xbar, lo: 0.0, hi: 1.0 })
        }
    }

    /// `x = ℓ(1 − x̄)`.
    pub fn physical_x(&self, xbar: f64) -> f64 {
        self.length * (1.0 - xbar)
    }

    /// Steady density `ρ★(x) = sqrt(U★² − λφ_L² x/(σ²D))`.
    pub fn equilibrium_density(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        let radicand = self.radicand(x);
        if !(radicand > 0.0) {
            return Err(Error::InfeasibleEquilibrium {
                u_star: self.u_star,
                bound: self.feasibility_bound(),
                radicand,
            });
        }
        Ok(radicand.sqrt())
    }

    /// Outlet density `ρ★(ℓ)`.
    pub fn outlet_density(&self) -> f64 {
        self.radicand(self.length).sqrt()
    }

    fn rho(&self, x: f64) -> f64 {
        self.radicand(x).sqrt()
    }

    /// `(λ₁, λ₂) = (λφ_L²/(2Dρ★²), λφ_L/(Dρ★))`.
    pub fn lambda_coeffs(&self, x: f64) -> Result<(f64, f64)> {
        let rho = self.equilibrium_density(x)?;
        let l2 = self.lambda_f * self.phi_l / (self.diameter * rho);
        Ok((0.5 * l2 * self.phi_l / rho, l2))
    }

    /// Exponent `2σ(ρ★(x) − ρ★(ℓ))/φ_L` of the Riemann weights. Evaluated in
    /// a form that stays finite as `φ_L → 0`.
    pub fn weight_exponent(&self, x: f64) -> f64 {
        let (rho, rho_l) = (self.rho(x), self.outlet_density());
        2.0 * self.lambda_f * self.phi_l * (self.length - x)
            / (self.sound_speed * self.diameter * (rho + rho_l))
    }

    /// Canonical in-domain coupling `(μ₁(x̄), μ₂(x̄))` in 1/s.
    pub fn mu_coeffs(&self, xbar: f64) -> Result<(f64, f64)> {
        Self::check_xbar(xbar)?;
        Ok(self.mu_unchecked(xbar))
    }

    pub(crate) fn mu_unchecked(&self, xbar: f64) -> (f64, f64) {
        let x = self.physical_x(xbar).clamp(0.0, self.length);
        let rho = self.rho(x);
        let e = if xbar == 0.0 { 0.0 } else { self.weight_exponent(x) };
        let quad = self.lambda_f * self.phi_l * self.phi_l
            / (4.0 * self.sound_speed * self.diameter * rho * rho);
        let lin = self.lambda_f * self.phi_l / (2.0 * self.diameter * rho);
        ((quad - lin) * e.exp(), (quad + lin) * (-e).exp())
    }

    /// Boundary reflection `(r₁, r₂)` at the inlet.
    pub fn reflection_coeffs(&self) -> (f64, f64) {
        let e0 = self.weight_exponent(0.0);
        let amp = (self.u_star / self.outlet_density()).sqrt();
        ((-e0).exp(), amp * (-0.5 * e0).exp())
    }

    /// Factors `(f_v, f_w)` with `v = f_v (δρ/2 − δφ/(2σ))` and
    /// `w = f_w (δρ/2 + δφ/(2σ))` at physical position `x`.
    pub fn riemann_weights(&self, x: f64) -> Result<(f64, f64)> {
        self.check_x(x)?;
        Ok(self.weights_unchecked(x))
    }

    pub(crate) fn weights_unchecked(&self, x: f64) -> (f64, f64) {
        let amp = (self.rho(x) / self.outlet_density()).sqrt();
        let half = if x == self.length { 0.0 } else { 0.5 * self.weight_exponent(x) };
        (amp * half.exp(), amp * (-half).exp())
    }

    /// Physical perturbation `(δρ, δφ)` at `x` to Riemann variables `(v, w)`.
    pub fn to_riemann(&self, drho: f64, dphi: f64, x: f64) -> Result<(f64, f64)> {
        let (fv, fw) = self.riemann_weights(x)?;
        let q = dphi / (2.0 * self.sound_speed);
        Ok((fv * (0.5 * drho - q), fw * (0.5 * drho + q)))
    }

    /// Inverse of [`to_riemann`](Self::to_riemann) at canonical position `x̄`.
    pub fn from_riemann(&self, v: f64, w: f64, xbar: f64) -> Result<(f64, f64)> {
        Self::check_xbar(xbar)?;
        let x = if xbar == 0.0 { self.length } else { self.physical_x(xbar) };
        let (fv, fw) = self.weights_unchecked(x);
        let (a, b) = (v / fv, w / fw);
        Ok((a + b, self.sound_speed * (b - a)))
    }
}
