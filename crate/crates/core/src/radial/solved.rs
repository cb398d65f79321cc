use serde::{Deserialize, Serialize};

use super::measure::RadialMeasure;
use super::profile::Sublevel;
use crate::error::{Error, Result};
use crate::quad::{self, QuadratureSpec};
use crate::search;

/// Knot spacing and left end of the cached antiderivative.
const KNOT_STEP: f64 = 0.05;
const KNOT_FLOOR: f64 = -40.0;

/// `g(s) = -∫_s^0 m(σ)^{1/n} dσ`, the radial solution of `(dd^c g)^n = μ`
/// with zero boundary values, with a cached antiderivative on a knot grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SolvedSpec", into = "SolvedSpec")]
pub struct SolvedProfile {
    measure: RadialMeasure,
    n: u32,
    knots: Vec<f64>,
    /// `cum[i] = ∫_{knots[i]}^0 m^{1/n}`.
    cum: Vec<f64>,
    lower: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolvedSpec {
    pub measure: RadialMeasure,
    pub n: u32,
}

impl TryFrom<SolvedSpec> for SolvedProfile {
    type Error = Error;
    fn try_from(spec: SolvedSpec) -> Result<Self> {
        SolvedProfile::new(spec.measure, spec.n)
    }
}

impl From<SolvedProfile> for SolvedSpec {
    fn from(p: SolvedProfile) -> Self {
        SolvedSpec { measure: p.measure, n: p.n }
    }
}

impl PartialEq for SolvedProfile {
    fn eq(&self, other: &Self) -> bool {
        self.measure == other.measure && self.n == other.n
    }
}

impl SolvedProfile {
    pub fn new(measure: RadialMeasure, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        measure.validate()?;
        let mut knots: Vec<f64> = (0..=((-KNOT_FLOOR / KNOT_STEP).round() as usize))
            .map(|i| KNOT_FLOOR + i as f64 * KNOT_STEP)
            .collect();
        knots.extend(measure.breakpoints().into_iter().filter(|&b| b > KNOT_FLOOR && b < 0.0));
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        *knots.last_mut().expect("non-empty") = 0.0;
        let spec = QuadratureSpec::default().with_rel_tol(1e-13);
        let root = |s: f64| measure.mass(s).powf(1.0 / n as f64);
        let mut cum = vec![0.0; knots.len()];
        for i in (0..knots.len() - 1).rev() {
            let piece = quad::integrate(&root, knots[i], knots[i + 1], &spec)?;
            cum[i] = cum[i + 1] + piece.value;
        }
        let tail = if measure.origin_mass() > 0.0 {
            f64::INFINITY
        } else {
            let shifted = |u: f64| root(KNOT_FLOOR - u);
            let t = quad::integrate_tail(&shifted, 0.0, &spec)?;
            t.value
        };
        let lower = -(cum[0] + tail);
        Ok(SolvedProfile { measure, n, knots, cum, lower })
    }

    pub fn measure(&self) -> &RadialMeasure {
        &self.measure
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn root(&self, s: f64) -> f64 {
        self.measure.mass(s).powf(1.0 / self.n as f64)
    }

    /// `∫_a^b m^{1/n}` inside one knot cell, where the integrand is smooth.
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        quad::gk15(&|s| self.root(s), a, b).0
    }

    pub fn value(&self, s: f64) -> f64 {
        if s >= 0.0 {
            return 0.0;
        }
        if s == f64::NEG_INFINITY {
            return self.lower;
        }
        if s < KNOT_FLOOR {
            let spec = QuadratureSpec::default().with_rel_tol(1e-13);
            let extra = quad::integrate(&|x| self.root(x), s, KNOT_FLOOR, &spec)
                .map(|i| i.value)
                .unwrap_or(f64::NAN);
            return -(self.cum[0] + extra);
        }
        let i = self.knots.partition_point(|&k| k <= s).min(self.knots.len() - 1);
        -(self.cum[i] + self.cell_integral(s, self.knots[i]))
    }

    pub(crate) fn derivative(&self, s: f64, left: bool) -> f64 {
        let m = if left { self.measure.mass_open(s) } else { self.measure.mass(s) };
        m.powf(1.0 / self.n as f64)
    }

    pub fn lower_limit(&self) -> f64 {
        self.lower
    }

    pub fn asymptotic_slope(&self) -> f64 {
        self.measure.origin_mass().powf(1.0 / self.n as f64)
    }

    pub fn kinks(&self) -> Vec<f64> {
        self.measure.atoms().into_iter().map(|(s, _)| s).collect()
    }

    pub fn level_radius(&self, t: f64, kind: Sublevel) -> f64 {
        let target = -t;
        let inside = |v: f64| match kind {
            Sublevel::Open => v < target,
            Sublevel::Closed => v <= target,
        };
        if inside(0.0) {
            return 0.0;
        }
        // Largest knot inside the sublevel set.
        let count = self.cum.partition_point(|&c| inside(-c));
        let (lo, hi) = if count == 0 {
            let mut hi = KNOT_FLOOR;
            let mut lo = 2.0 * KNOT_FLOOR;
            while !inside(self.value(lo)) {
                hi = lo;
                lo *= 2.0;
                if lo < -1e18 {
                    return f64::NEG_INFINITY;
                }
            }
            (lo, hi)
        } else {
            (self.knots[count - 1], self.knots[count.min(self.knots.len() - 1)])
        };
        let (lo, _) = search::bisect_boundary(|s| inside(self.value(s)), lo, hi, 1e-15, 1e-300);
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_density_solves_to_exponential_profile() {
        // m(s) = 2 e^{2s}, n = 1  =>  g(s) = e^{2s} - 1
        let p = SolvedProfile::new(RadialMeasure::Density { scale: 2.0, rate: 2.0 }, 1).unwrap();
        for &s in &[-3.0f64, -1.0, -0.3, -0.01] {
            let exact = (2.0 * s).exp_m1();
            assert!((p.value(s) - exact).abs() < 1e-12, "s={s}");
        }
        assert!((p.lower_limit() + 1.0).abs() < 1e-12);
        let s = p.level_radius(0.5, Sublevel::Open);
        assert!((s - 0.5f64.ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_atom_solves_to_truncated_log() {
        let p = SolvedProfile::new(RadialMeasure::Step { at: -2.0, mass: 1.0 }, 1).unwrap();
        assert!((p.value(-1.0) + 1.0).abs() < 1e-14);
        assert!((p.value(-5.0) + 2.0).abs() < 1e-14);
        assert!((p.lower_limit() + 2.0).abs() < 1e-14);
        assert_eq!(p.kinks(), vec![-2.0]);
    }

    #[test]
    fn origin_mass_is_unbounded() {
        let p = SolvedProfile::new(RadialMeasure::Origin { mass: 1.0 }, 2).unwrap();
        assert_eq!(p.lower_limit(), f64::NEG_INFINITY);
        assert!((p.value(-50.0) + 50.0).abs() < 1e-10);
    }
}
