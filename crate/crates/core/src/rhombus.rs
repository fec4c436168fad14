//! Single rhombus: the double-well potential in the shared junction phase,
//! its flux-detuning gap, a WKB tunneling estimate and the vortex energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default kinetic coefficient: three junctions in series, each with
/// kinetic term ħ²/(16 E_C).
pub const DEFAULT_C_KIN: f64 = 3.0 / 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub e_j: f64,
    pub e_c: f64,
    #[serde(default = "one")]
    pub phi0: f64,
    #[serde(default = "one")]
    pub mu0: f64,
    #[serde(default = "one")]
    pub xi: f64,
    #[serde(default = "default_c_kin")]
    pub c_kin: f64,
}

fn one() -> f64 {
    1.0
}

fn default_c_kin() -> f64 {
    DEFAULT_C_KIN
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            e_j: 1.0,
            e_c: 0.02,
            phi0: 1.0,
            mu0: 1.0,
            xi: 0.01,
            c_kin: DEFAULT_C_KIN,
        }
    }
}

impl PhysicalParams {
    pub fn new(e_j: f64, e_c: f64) -> Result<Self> {
        Self {
            e_j,
            e_c,
            ..Self::default()
        }
        .validated()
    }

    /// Checks positivity and warns outside the phase regime.
    pub fn validated(self) -> Result<Self> {
        for (name, v) in [
            ("E_J", self.e_j),
            ("E_C", self.e_c),
            ("Phi0", self.phi0),
            ("mu0", self.mu0),
            ("xi", self.xi),
            ("c_kin", self.c_kin),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.e_j / self.e_c < 10.0 {
            log::warn!(
                "E_J/E_C = {:.3} < 10: the double-well picture needs E_J ≫ E_C",
                self.e_j / self.e_c
            );
        }
        Ok(self)
    }
}

/// `U(φ) = 4E_J − 3E_J cos(φ/2) + E_J cos(3φ/2)`.
pub fn potential(dphi: f64, p: &PhysicalParams) -> f64 {
    p.e_j * (4.0 - 3.0 * (dphi / 2.0).cos() + (1.5 * dphi).cos())
}

fn potential_derivative(dphi: f64, e_j: f64, eps: f64) -> f64 {
    1.5 * e_j * ((dphi / 2.0).sin() - (PI + eps - 1.5 * dphi).sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningForm {
    #[default]
    Exact,
    FirstOrder,
}

/// Potential with the rhombus flux detuned by `delta_flux` (in Φ₀ units).
pub fn detuned_potential(dphi: f64, delta_flux: f64, p: &PhysicalParams, form: DetuningForm) -> f64 {
    let eps = 2.0 * PI * delta_flux;
    match form {
        DetuningForm::Exact => p.e_j * (4.0 - 3.0 * (dphi / 2.0).cos() - (PI + eps - 1.5 * dphi).cos()),
        DetuningForm::FirstOrder => potential(dphi, p) + p.e_j * (1.5 * dphi).sin() * eps,
    }
}

/// The gap predicted to first order, `2√2·π·E_J·δΦ/Φ₀`.
pub fn linear_gap(delta_flux: f64, p: &PhysicalParams) -> f64 {
    2.0 * 2f64.sqrt() * PI * p.e_j * delta_flux
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhombusSpectrum {
    /// Negative-phase and positive-phase minima.
    pub minima: [f64; 2],
    pub energies: [f64; 2],
    /// `energies[1] − energies[0]`: positive when the positive-phase well
    /// is higher.
    pub gap: f64,
    pub t_tunnel: f64,
    #[serde(rename = "S0")]
    pub s0: f64,
}

/// Bisection on a sign change of `f` in `[a, b]`.
fn bracketed_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < tol {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Local minima of the detuned potential on (−π, π), located as − → +
/// sign changes of the derivative on a grid and refined to ~1e−14.
fn local_minima(delta_flux: f64, p: &PhysicalParams) -> Vec<f64> {
    let eps = 2.0 * PI * delta_flux;
    let n = 4096;
    let grid: Vec<f64> = (0..=n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect();
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (da, db) = (
            potential_derivative(w[0], p.e_j, eps),
            potential_derivative(w[1], p.e_j, eps),
        );
        if da < 0.0 && db >= 0.0 {
            out.push(bracketed_root(|x| potential_derivative(x, p.e_j, eps), w[0], w[1], 1e-15));
        }
    }
    out
}

pub fn find_minima_and_gap(delta_flux: f64, p: &PhysicalParams) -> Result<RhombusSpectrum> {
    if delta_flux.abs() > 0.05 {
        log::warn!("flux detuning {delta_flux} Φ₀ is not small");
    }
    let mins = local_minima(delta_flux, p);
    let (left, right) = match (mins.iter().find(|&&x| x < 0.0), mins.iter().find(|&&x| x > 0.0)) {
        (Some(&l), Some(&r)) if mins.len() == 2 => (l, r),
        _ => return Err(Error::DegenerateWells { delta_flux }),
    };
    let e = |x: f64| detuned_potential(x, delta_flux, p, DetuningForm::Exact);
    let (t_tunnel, s0) = tunneling_between(p, left, right, &e);
    Ok(RhombusSpectrum {
        minima: [left, right],
        energies: [e(left), e(right)],
        gap: e(right) - e(left),
        t_tunnel,
        s0,
    })
}

/// `dΔE/dδΦ` at zero detuning by Richardson extrapolation of symmetric
/// differences.
pub fn gap_slope_at_zero(p: &PhysicalParams) -> Result<f64> {
    let d = |h: f64| -> Result<f64> {
        let plus = find_minima_and_gap(h, p)?.gap;
        let minus = find_minima_and_gap(-h, p)?.gap;
        Ok((plus - minus) / (2.0 * h))
    };
    let h = 1e-3;
    let (d1, d2, d3) = (d(h)?, d(h / 2.0)?, d(h / 4.0)?);
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn tunneling_between(p: &PhysicalParams, a: f64, b: f64, u: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let floor = u(a).max(u(b));
    let integrand = |x: f64| (2.0 * p.c_kin * (u(x) - floor).max(0.0) / p.e_c).sqrt();
    let s0 = simpson(&integrand, a, b, 1e-12);
    ((p.e_j * p.e_c).sqrt() * (-s0).exp(), s0)
}

/// WKB estimate `t̃ ≈ √(E_J E_C)·e^{−S₀}` for the symmetric double well,
/// with `S₀ = ∫ √(2 c_kin (U − U_min)/E_C) dφ` between the minima (ħ = 1).
/// Only the exponent is meaningful; the prefactor is a convention.
pub fn tunneling_estimate(p: &PhysicalParams) -> (f64, f64) {
    let u = |x: f64| potential(x, p);
    tunneling_between(p, -PI / 2.0, PI / 2.0, &u)
}

/// Flip amplitude estimate `r ≈ √(E_J E_C)·e^{−3S₀}`: a flip moves three
/// rhombi at once.
pub fn flip_amplitude_estimate(p: &PhysicalParams) -> f64 {
    let (_, s0) = tunneling_estimate(p);
    (p.e_j * p.e_c).sqrt() * (-3.0 * s0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexEnergy {
    pub lambda: f64,
    #[serde(rename = "E_g")]
    pub e_g: f64,
}

/// Penetration depth `λ² = Φ₀²/(9π²μ₀E_J)` and vortex energy
/// `E_g = Φ₀²/(4πμ₀λ²)·ln(λ/ξ)`.
pub fn vortex_energy(p: &PhysicalParams) -> Result<VortexEnergy> {
    let lambda2 = p.phi0 * p.phi0 / (9.0 * PI * PI * p.mu0 * p.e_j);
    let lambda = lambda2.sqrt();
    if lambda < p.xi {
        return Err(Error::Domain(format!(
            "penetration depth {lambda} is below the site spacing {}; the vortex energy would be negative",
            p.xi
        )));
    }
    let e_g = p.phi0 * p.phi0 / (4.0 * PI * p.mu0 * lambda2) * (lambda / p.xi).ln();
    Ok(VortexEnergy { lambda, e_g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> PhysicalParams {
        PhysicalParams {
            e_j: 1.0,
            e_c: 0.05,
            ..PhysicalParams::default()
        }
    }

    #[test]
    fn potential_values() {
        let p = unit();
        assert_relative_eq!(potential(0.0, &p), 2.0, epsilon = 1e-15);
        assert_relative_eq!(potential(PI / 2.0, &p), 4.0 - 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        for x in [0.3, 1.1, 2.9, 5.0] {
            assert_relative_eq!(potential(x, &p), potential(-x, &p), epsilon = 1e-14);
            assert_relative_eq!(potential(x, &p), potential(x + 4.0 * PI, &p), epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = unit();
        for eps_flux in [0.0, 0.01, -0.03] {
            for x in [-2.0, -0.4, 0.7, 1.9] {
                let h = 1e-6;
                let fd = (detuned_potential(x + h, eps_flux, &p, DetuningForm::Exact)
                    - detuned_potential(x - h, eps_flux, &p, DetuningForm::Exact))
                    / (2.0 * h);
                assert_relative_eq!(potential_derivative(x, 1.0, 2.0 * PI * eps_flux), fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn symmetric_minima() {
        let s = find_minima_and_gap(0.0, &unit()).unwrap();
        assert!((s.minima[0] + PI / 2.0).abs() < 1e-8);
        assert!((s.minima[1] - PI / 2.0).abs() < 1e-8);
        assert!(s.gap.abs() < 1e-12);
    }

    #[test]
    fn detuning_reduces_and_is_odd() {
        let p = unit();
        for x in [-1.0, 0.2, 2.5] {
            assert_relative_eq!(detuned_potential(x, 0.0, &p, DetuningForm::Exact), potential(x, &p), epsilon = 1e-14);
        }
        let a = find_minima_and_gap(0.01, &p).unwrap();
        let b = find_minima_and_gap(-0.01, &p).unwrap();
        assert!(a.gap > 0.0 && b.gap < 0.0);
        assert_relative_eq!(a.gap, -b.gap, epsilon = 1e-12);
        assert!((a.gap - linear_gap(0.01, &p)).abs() / a.gap < 0.05);
    }

    #[test]
    fn first_order_form_error_is_quadratic() {
        let p = unit();
        let dev = |d: f64| {
            (0..200)
                .map(|i| -PI + 2.0 * PI * i as f64 / 200.0)
                .map(|x| {
                    (detuned_potential(x, d, &p, DetuningForm::Exact) - detuned_potential(x, d, &p, DetuningForm::FirstOrder))
                        .abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = dev(0.02) / dev(0.01);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn gap_slope_limit() {
        let p = unit();
        let slope = gap_slope_at_zero(&p).unwrap();
        let want = 2.0 * 2f64.sqrt() * PI * p.e_j / p.phi0;
        assert!((slope - want).abs() / want < 1e-6, "{slope} vs {want}");
    }

    #[test]
    fn large_detuning_merges_wells() {
        assert!(matches!(find_minima_and_gap(0.5, &unit()), Err(Error::DegenerateWells { .. })));
    }

    #[test]
    fn tunneling_suppressed_by_large_ej() {
        let mut last = f64::INFINITY;
        let mut last_s0 = 0.0;
        for e_j in [1.0, 2.0, 4.0, 8.0] {
            let p = PhysicalParams { e_j, ..unit() };
            let (t, s0) = tunneling_estimate(&p);
            assert!(t > 0.0 && t < last && s0 > last_s0);
            last = t;
            last_s0 = s0;
        }
    }

    #[test]
    fn action_scales_as_sqrt_ej_over_ec() {
        let a = tunneling_estimate(&PhysicalParams { e_j: 1.0, e_c: 0.05, ..unit() }).1;
        let b = tunneling_estimate(&PhysicalParams { e_j: 4.0, e_c: 0.05, ..unit() }).1;
        assert_relative_eq!(b / a, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn vortex_energy_closed_form() {
        let p = PhysicalParams { xi: 0.01, ..unit() };
        let v = vortex_energy(&p).unwrap();
        assert_relative_eq!(v.lambda * v.lambda, 1.0 / (9.0 * PI * PI), max_relative = 1e-14);
        assert_relative_eq!(v.e_g, 9.0 * PI / 4.0 * (v.lambda / 0.01).ln(), max_relative = 1e-13);
        let at = vortex_energy(&PhysicalParams { xi: v.lambda, ..p }).unwrap();
        assert_eq!(at.e_g, 0.0);
        assert!(vortex_energy(&PhysicalParams { xi: 1.0, ..p }).is_err());
        let closer = vortex_energy(&PhysicalParams { xi: 0.005, ..p }).unwrap();
        assert!(closer.e_g > v.e_g);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(PhysicalParams::new(0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.01).is_ok());
    }
}
