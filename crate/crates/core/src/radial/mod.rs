//! The radial model on the unit ball: `φ(z) = g(log|z|)` with `g` convex
//! nondecreasing. Sublevel sets are balls, so the Monge-Ampère, capacity and
//! volume distribution functions are explicit in the level radius
//! `s_t = sup{s : g(s) < -t}`:
//!
//! * `μ_φ(φ < -t) = g'_-(s_t)^n`
//! * `Cap(φ < -t) = (log R - s_t)^{-n}`
//! * `Vol(φ < -t) = V_1 e^{2 n s_t}`

mod measure;
mod profile;
mod solved;

pub use measure::RadialMeasure;
pub use profile::{iterlog_shift, RadialProfile, Sublevel, MAX_ITERLOG_DEPTH};
pub use solved::{SolvedProfile, SolvedSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::{self, DistributionFunction, SublevelMeasure};
use crate::quad::{self, QuadratureSpec};
use crate::search;
use crate::weights::{self, Weight};

pub fn ma_distribution(g: &RadialProfile, n: u32) -> DistributionFunction {
    DistributionFunction::sublevel(g, n, SublevelMeasure::Ma)
}

pub fn cap_distribution(g: &RadialProfile, n: u32) -> DistributionFunction {
    DistributionFunction::sublevel(g, n, SublevelMeasure::Cap)
}

/// Capacity of the closed sublevel sets `{φ <= -t}`.
pub fn closed_cap_distribution(g: &RadialProfile, n: u32) -> DistributionFunction {
    DistributionFunction::Sublevel {
        profile: g.clone(),
        n,
        measure: SublevelMeasure::Cap,
        v1: 1.0,
        sublevel: Sublevel::Closed,
    }
}

/// Volume distribution with unit-ball volume `v1`.
pub fn vol_distribution(g: &RadialProfile, n: u32, v1: f64) -> DistributionFunction {
    DistributionFunction::Sublevel { profile: g.clone(), n, measure: SublevelMeasure::Vol, v1, sublevel: Sublevel::Open }
}

/// `E_χ(φ)`: the Luxembourg norm of `-φ` against its own Monge-Ampère measure.
pub fn energy(g: &RadialProfile, w: &Weight, n: u32, spec: &QuadratureSpec) -> Result<f64> {
    check_dimension(n)?;
    orlicz::luxembourg_norm(&ma_distribution(g, n), w, spec)
}

/// `J_χ(φ) = I_{h̃}(-φ)`: the Choquet norm of `-φ` under the capacity transform.
pub fn j_energy(g: &RadialProfile, w: &Weight, n: u32, spec: &QuadratureSpec) -> Result<f64> {
    check_dimension(n)?;
    let wt = weights::tilde(w, n)?;
    orlicz::choquet_norm(&cap_distribution(g, n), &wt, spec)
}

fn check_dimension(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    Ok(())
}

/// Radial Dirichlet problem: the profile with `(dd^c g)^n = μ` and zero
/// boundary values, `g(s) = -∫_s^0 m(σ)^{1/n} dσ`.
pub fn dirichlet_solve(m: &RadialMeasure, n: u32) -> Result<RadialProfile> {
    check_dimension(n)?;
    m.validate()?;
    if m.is_zero() {
        return Ok(RadialProfile::Zero);
    }
    Ok(RadialProfile::Solved(SolvedProfile::new(m.clone(), n)?))
}

/// Maximal convex nondecreasing `g̃ <= 0` on `(-inf, log R]` with `g̃ <= g`
/// on `(-inf, 0]`: `g` up to the contact point, then the support line
/// through `(log R, 0)`.
pub fn subextension(g: &RadialProfile, log_r: f64) -> Result<RadialProfile> {
    g.validate()?;
    if g.log_radius() != 0.0 {
        return Err(Error::invalid("subextension starts from a profile on the unit ball"));
    }
    if !(log_r.is_finite() && log_r > 0.0) {
        return Err(Error::invalid(format!("subextension needs log R > 0, got {log_r}")));
    }
    if matches!(g, RadialProfile::Zero) || g.left_derivative(0.0) == 0.0 {
        return Ok(RadialProfile::Zero);
    }
    // Value at log R of the tangent line at s; nondecreasing in s.
    let tangent_at_edge = |s: f64| g.value(s) + g.left_derivative(s) * (log_r - s);
    let below = |s: f64| tangent_at_edge(s) <= 0.0;
    const FAR: f64 = -1.152_921_504_606_847e18;
    let mut lo = -1.0;
    while !below(lo) {
        lo *= 2.0;
        if lo < FAR {
            // No contact: g is asymptotically steeper than every feasible
            // line; the subextension is the limiting line itself.
            let slope = g.value(FAR) / (FAR - log_r);
            return Ok(RadialProfile::Subext { inner: Box::new(g.clone()), log_r, slope, contact: None });
        }
    }
    let contact = if below(0.0) {
        0.0
    } else {
        let (lo, _) = search::bisect_boundary(below, lo, 0.0, 1e-15, 1e-300);
        lo
    };
    let slope = g.value(contact) / (contact - log_r);
    Ok(RadialProfile::Subext { inner: Box::new(g.clone()), log_r, slope, contact: Some(contact) })
}

/// Named profile families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    IteratedLog { k: u32 },
    Power { alpha: f64 },
    Truncation { m: f64 },
    Exhaustion { j: f64 },
}

/// Builds a family member; `base` is the profile truncated or exhausted.
pub fn family(kind: FamilyKind, base: &RadialProfile) -> Result<RadialProfile> {
    let g = match kind {
        FamilyKind::IteratedLog { k } => RadialProfile::Iterlog { k },
        FamilyKind::Power { alpha } => RadialProfile::Power { alpha },
        FamilyKind::Truncation { m } => RadialProfile::Trunc { m, inner: Box::new(base.clone()) },
        FamilyKind::Exhaustion { j } => {
            if j < 1.0 {
                return Err(Error::invalid(format!("exhaustion index must be >= 1, got {j}")));
            }
            RadialProfile::Exhaust { j, inner: Box::new(base.clone()) }
        }
    };
    g.validate()?;
    Ok(g)
}

/// `∫_{[-inf, log R]} h(-g(s)/λ) dμ(s)` computed in the `s` variable by
/// integration by parts, `∫ m(s) h'(-g(s)/λ) g'(s) / λ ds`. This is an
/// independent route to the layer-cake integral of `t ↦ μ(φ < -t)`.
pub fn stieltjes_integral(
    m: &RadialMeasure,
    g: &RadialProfile,
    w: &Weight,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("scale must be positive"));
    }
    let edge = g.log_radius();
    let integrand = |u: f64| {
        let s = edge - u;
        let mass = m.mass(s);
        let d = g.right_derivative(s);
        if mass == 0.0 || d == 0.0 {
            return 0.0;
        }
        let x = -g.value(s) / lambda;
        let hd = w.derivative(x);
        let v = mass * hd * d / lambda;
        if v.is_finite() {
            v
        } else {
            (mass.ln() + w.ln_derivative(x) + d.ln() - lambda.ln()).exp()
        }
    };
    let mut points: Vec<f64> = g.kinks().into_iter().chain(m.breakpoints()).map(|s| edge - s).collect();
    let low = g.lower_limit();
    points.extend(weights_breaks_in_s(g, w, lambda));
    // A bounded profile that is flat below its first kink contributes nothing there.
    let end = if low.is_finite() {
        match g.kinks().first() {
            Some(&k) if g.left_derivative(k) == 0.0 => edge - k,
            _ => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };
    quad::integrate_half_line(&integrand, &points, end, |_, _| None, spec).map(|i| i.value)
}

/// Points `s` where `h'(-g(s)/λ)` jumps, as distances from the edge.
fn weights_breaks_in_s(g: &RadialProfile, w: &Weight, lambda: f64) -> Vec<f64> {
    let edge = g.log_radius();
    let top = -g.lower_limit() / lambda;
    w.breakpoints(if top.is_finite() { top } else { 1e6 })
        .into_iter()
        .map(|b| edge - g.level_radius(b * lambda, Sublevel::Closed))
        .filter(|u| u.is_finite())
        .collect()
}

/// `∫ (-φ) dμ_φ` two ways: layer cake in `t` and Stieltjes in `s`.
pub fn mass_moment_two_ways(g: &RadialProfile, n: u32, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let id = weights::polynomial(1.0)?;
    let a = orlicz::layercake_integral(&ma_distribution(g, n), &id, 1.0, spec)?;
    let b = stieltjes_integral(&RadialMeasure::Ma { profile: Box::new(g.clone()), n }, g, &id, 1.0, spec)?;
    Ok((a, b))
}
