use serde::{Deserialize, Serialize};

use super::profile::RadialProfile;
use crate::error::{Error, Result};

/// Radial measure on the ball, given by `m(s)`, the mass of the closed ball
/// of radius `e^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialMeasure {
    Zero,
    /// Point mass at the origin.
    Origin { mass: f64 },
    /// Uniform mass on the sphere of radius `e^at`.
    Step { at: f64, mass: f64 },
    /// `m(s) = scale · e^{rate s}`.
    Density { scale: f64, rate: f64 },
    /// Piecewise-linear `m` through `(s, m)` points; a repeated `s` is an
    /// atom. Constant before the first point (origin mass) and after the last.
    Table { points: Vec<[f64; 2]> },
    /// Monge-Ampère measure of a profile, `m(s) = g'_+(s)^n`.
    Ma { profile: Box<RadialProfile>, n: u32 },
    Scaled { inner: Box<RadialMeasure>, factor: f64 },
    Sum { terms: Vec<RadialMeasure> },
}

impl RadialMeasure {
    pub fn validate(&self) -> Result<()> {
        use RadialMeasure as M;
        let nonneg = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be finite and nonnegative, got {v}")))
            }
        };
        match self {
            M::Zero => Ok(()),
            M::Origin { mass } => nonneg(*mass, "origin mass"),
            M::Step { at, mass } => {
                nonneg(*mass, "step mass")?;
                if !(at.is_finite() && *at <= 0.0) {
                    return Err(Error::invalid(format!("step location must be finite and <= 0, got {at}")));
                }
                Ok(())
            }
            M::Density { scale, rate } => {
                nonneg(*scale, "density scale")?;
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("density rate must be positive"));
                }
                Ok(())
            }
            M::Table { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("measure table needs at least one point"));
                }
                for p in points {
                    if !(p[0].is_finite() && p[0] <= 0.0) {
                        return Err(Error::invalid(format!("table location must be finite and <= 0, got {}", p[0])));
                    }
                    nonneg(p[1], "table mass")?;
                }
                for (i, w) in points.windows(2).enumerate() {
                    if w[1][0] < w[0][0] {
                        return Err(Error::invalid(format!("table locations must be sorted (row {})", i + 2)));
                    }
                    if w[1][1] < w[0][1] {
                        return Err(Error::invalid(format!("mass profile must be nondecreasing (row {})", i + 2)));
                    }
                }
                if points.windows(3).any(|w| w[0][0] == w[1][0] && w[1][0] == w[2][0]) {
                    return Err(Error::invalid("a location may appear at most twice"));
                }
                Ok(())
            }
            M::Ma { profile, n } => {
                if *n == 0 {
                    return Err(Error::invalid("dimension must be at least 1"));
                }
                profile.validate()
            }
            M::Scaled { inner, factor } => {
                nonneg(*factor, "measure scale")?;
                inner.validate()
            }
            M::Sum { terms } => terms.iter().try_for_each(|t| t.validate()),
        }
    }

    /// Mass of the closed ball of radius `e^s`.
    pub fn mass(&self, s: f64) -> f64 {
        self.mass_at(s, false)
    }

    /// Mass of the open ball of radius `e^s`.
    pub fn mass_open(&self, s: f64) -> f64 {
        self.mass_at(s, true)
    }

    fn mass_at(&self, s: f64, open: bool) -> f64 {
        use RadialMeasure as M;
        match self {
            M::Zero => 0.0,
            M::Origin { mass } => *mass,
            M::Step { at, mass } => {
                if s > *at || (s == *at && !open) {
                    *mass
                } else {
                    0.0
                }
            }
            M::Density { scale, rate } => {
                if s == f64::NEG_INFINITY {
                    0.0
                } else {
                    scale * (rate * s).exp()
                }
            }
            M::Table { points } => table_mass(points, s, open),
            M::Ma { profile, n } => {
                if s == f64::NEG_INFINITY {
                    return profile.asymptotic_slope().powi(*n as i32);
                }
                let d = if open { profile.left_derivative(s) } else { profile.right_derivative(s) };
                d.powi(*n as i32)
            }
            M::Scaled { inner, factor } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.mass_at(s, open)
                }
            }
            M::Sum { terms } => terms.iter().map(|t| t.mass_at(s, open)).sum(),
        }
    }

    /// Total mass `m(0)`.
    pub fn total(&self) -> f64 {
        self.mass(0.0)
    }

    /// Mass of the origin, `lim_{s -> -inf} m(s)`.
    pub fn origin_mass(&self) -> f64 {
        self.mass(f64::NEG_INFINITY)
    }

    /// Locations of atoms and table nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        use RadialMeasure as M;
        let mut out = match self {
            M::Zero | M::Origin { .. } | M::Density { .. } => Vec::new(),
            M::Step { at, .. } => vec![*at],
            M::Table { points } => points.iter().map(|p| p[0]).collect(),
            M::Ma { profile, .. } => profile.kinks(),
            M::Scaled { inner, .. } => inner.breakpoints(),
            M::Sum { terms } => terms.iter().flat_map(|t| t.breakpoints()).collect(),
        };
        out.retain(|s| s.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Atoms on spheres as `(s, mass)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.breakpoints()
            .into_iter()
            .filter_map(|s| {
                let jump = self.mass(s) - self.mass_open(s);
                (jump > 0.0).then_some((s, jump))
            })
            .collect()
    }

    /// True when the open annulus `lo < log|z| < hi` carries no mass.
    pub fn is_constant_on(&self, lo: f64, hi: f64) -> bool {
        if !(hi > lo) {
            return true;
        }
        self.mass(lo) == self.mass_open(hi)
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0.0
    }

    /// `factor · μ`.
    pub fn scaled(&self, factor: f64) -> RadialMeasure {
        RadialMeasure::Scaled { inner: Box::new(self.clone()), factor }
    }
}

fn table_mass(points: &[[f64; 2]], s: f64, open: bool) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if s < first[0] {
        return first[1];
    }
    if s > last[0] {
        return last[1];
    }
    // Index range of nodes at exactly `s` (at most two: an atom).
    let lo = points.partition_point(|p| p[0] < s);
    let hi = points.partition_point(|p| p[0] <= s);
    if lo < hi {
        // The left limit is the first node value at `s`; the closed value the last.
        return if open { points[lo][1] } else { points[hi - 1][1] };
    }
    let (a, b) = (points[lo - 1], points[lo]);
    a[1] + (b[1] - a[1]) * (s - a[0]) / (b[0] - a[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_atoms_and_interpolation() {
        let m = RadialMeasure::Table { points: vec![[-3.0, 0.0], [-2.0, 0.0], [-2.0, 1.0], [0.0, 2.0]] };
        m.validate().unwrap();
        assert_eq!(m.mass(-2.0), 1.0);
        assert_eq!(m.mass_open(-2.0), 0.0);
        assert_eq!(m.mass(-1.0), 1.5);
        assert_eq!(m.mass_open(-1.0), 1.5);
        assert_eq!(m.atoms(), vec![(-2.0, 1.0)]);
        assert_eq!(m.origin_mass(), 0.0);
        assert!(m.is_constant_on(-3.0, -2.0));
        assert!(!m.is_constant_on(-3.0, -1.0));
    }

    #[test]
    fn table_rejects_decreasing() {
        let m = RadialMeasure::Table { points: vec![[-2.0, 1.0], [-1.0, 0.5]] };
        assert!(m.validate().is_err());
    }

    #[test]
    fn ma_of_truncated_log_is_a_sphere_atom() {
        let g = RadialProfile::Trunc { m: 2.0, inner: Box::new(RadialProfile::Log) };
        let m = RadialMeasure::Ma { profile: Box::new(g), n: 2 };
        assert_eq!(m.atoms(), vec![(-2.0, 1.0)]);
        assert_eq!(m.total(), 1.0);
        assert_eq!(m.origin_mass(), 0.0);
    }

    #[test]
    fn step_is_right_continuous() {
        let m = RadialMeasure::Step { at: -1.0, mass: 3.0 };
        assert_eq!(m.mass(-1.0), 3.0);
        assert_eq!(m.mass_open(-1.0), 0.0);
    }
}
