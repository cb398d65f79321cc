//! Distribution functions and the norms computed from them by layer-cake
//! quadrature: the Luxembourg norm against a measure and the Choquet norm
//! against capacity.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureSpec};
use crate::radial::{RadialMeasure, RadialProfile, Sublevel};
use crate::search;
use crate::weights::Weight;

/// Upward jump bookkeeping for tables: `F` drops by `size` at `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub at: f64,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// Zero beyond the last sample.
    Zero,
    /// `F(t) = F(t_last) e^{-rate (t - t_last)}`.
    Exponential { rate: f64 },
    /// `F(t) = F(t_last) (t / t_last)^{-rate}`.
    Power { rate: f64 },
}

/// Tabulated distribution: linear interpolation of `samples`, constant before
/// the first sample, extended by `tail`, plus the jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr")]
pub struct Table {
    samples: Vec<[f64; 2]>,
    #[serde(default)]
    jumps: Vec<Jump>,
    tail: Tail,
}

#[derive(Deserialize)]
struct TableRepr {
    samples: Vec<[f64; 2]>,
    #[serde(default)]
    jumps: Vec<Jump>,
    tail: Tail,
}

impl TryFrom<TableRepr> for Table {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        Table::new(r.samples, r.jumps, r.tail)
    }
}

impl Table {
    pub fn new(samples: Vec<[f64; 2]>, mut jumps: Vec<Jump>, tail: Tail) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("table needs at least one sample"));
        }
        for w in samples.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return Err(Error::invalid("table sample locations must be strictly increasing"));
            }
            if w[1][1] > w[0][1] {
                return Err(Error::invalid("table values must be nonincreasing"));
            }
        }
        if samples.iter().any(|s| !(s[0].is_finite() && s[0] >= 0.0 && s[1].is_finite() && s[1] >= 0.0)) {
            return Err(Error::invalid("table samples must be finite and nonnegative"));
        }
        if jumps.iter().any(|j| !(j.at.is_finite() && j.at > 0.0 && j.size.is_finite() && j.size >= 0.0)) {
            return Err(Error::invalid("jumps need a positive location and a nonnegative size"));
        }
        match tail {
            Tail::Exponential { rate } | Tail::Power { rate } if !(rate.is_finite() && rate > 0.0) => {
                return Err(Error::invalid("tail rate must be positive"));
            }
            Tail::Power { .. } if samples.last().map(|s| s[0]) == Some(0.0) => {
                return Err(Error::invalid("power tail needs a positive last sample location"));
            }
            _ => {}
        }
        jumps.sort_by(|a, b| a.at.total_cmp(&b.at));
        Ok(Table { samples, jumps, tail })
    }

    fn continuous(&self, t: f64) -> f64 {
        let first = self.samples[0];
        if t <= first[0] {
            return first[1];
        }
        let last = *self.samples.last().expect("non-empty");
        if t >= last[0] {
            return match self.tail {
                Tail::Zero => {
                    if t == last[0] {
                        last[1]
                    } else {
                        0.0
                    }
                }
                Tail::Exponential { rate } => last[1] * (-rate * (t - last[0])).exp(),
                Tail::Power { rate } => last[1] * (t / last[0]).powf(-rate),
            };
        }
        let i = self.samples.partition_point(|s| s[0] <= t) - 1;
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
    }

    fn eval(&self, t: f64) -> f64 {
        let jumps: f64 = self.jumps.iter().filter(|j| t < j.at).map(|j| j.size).sum();
        self.continuous(t) + jumps
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }
}

/// Which measure a profile's sublevel sets are weighed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SublevelMeasure {
    /// Monge-Ampère measure of the profile itself.
    Ma,
    /// Capacity relative to the ball of radius `e^{log_radius}`.
    Cap,
    /// Volume, `v1 · e^{2 n s}` for the ball of radius `e^s`.
    Vol,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn is_open(s: &Sublevel) -> bool {
    *s == Sublevel::Open
}

/// Nonincreasing `F: (0, inf) -> [0, inf]`, right-continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionFunction {
    Zero,
    /// `mass` on `(0, value)`, zero after.
    Atom {
        mass: f64,
        #[serde(with = "crate::jsonf64")]
        value: f64,
    },
    /// `scale · e^{-rate t}`.
    Exponential { scale: f64, rate: f64 },
    /// `scale · t^{-exponent}` on `(0, end)`, zero after.
    Power {
        scale: f64,
        exponent: f64,
        #[serde(with = "crate::jsonf64")]
        end: f64,
    },
    Table(Table),
    /// `t ↦ measure({φ < -t})` (or `<=` for closed sublevels).
    Sublevel {
        profile: RadialProfile,
        n: u32,
        measure: SublevelMeasure,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        v1: f64,
        #[serde(default, skip_serializing_if = "is_open")]
        sublevel: Sublevel,
    },
    /// `t ↦ μ({φ < -t})` for an arbitrary radial measure `μ`.
    Mixed { measure: RadialMeasure, profile: RadialProfile },
    Sum { terms: Vec<DistributionFunction> },
    /// `F(t / factor)`: the distribution of `factor · f`.
    Dilated { inner: Box<DistributionFunction>, factor: f64 },
    /// `factor · F(t)`.
    Scaled { inner: Box<DistributionFunction>, factor: f64 },
    /// `F(t) · 1_{t < at}`.
    Truncated { inner: Box<DistributionFunction>, at: f64 },
}

impl DistributionFunction {
    pub fn sublevel(profile: &RadialProfile, n: u32, measure: SublevelMeasure) -> Self {
        DistributionFunction::Sublevel {
            profile: profile.clone(),
            n,
            measure,
            v1: 1.0,
            sublevel: Sublevel::Open,
        }
    }

    pub fn dilated(&self, factor: f64) -> Self {
        DistributionFunction::Dilated { inner: Box::new(self.clone()), factor }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DistributionFunction::Scaled { inner: Box::new(self.clone()), factor }
    }

    pub fn truncated(&self, at: f64) -> Self {
        DistributionFunction::Truncated { inner: Box::new(self.clone()), at }
    }

    /// Structural checks on parameters.
    pub fn validate(&self) -> Result<()> {
        use DistributionFunction as D;
        let nonneg = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be finite and nonnegative, got {v}")))
            }
        };
        match self {
            D::Zero | D::Table(_) => Ok(()),
            D::Atom { mass, value } => {
                nonneg(*mass, "atom mass")?;
                if value.is_nan() {
                    return Err(Error::invalid("atom value is NaN"));
                }
                Ok(())
            }
            D::Exponential { scale, rate } => {
                nonneg(*scale, "scale")?;
                nonneg(*rate, "rate")
            }
            D::Power { scale, exponent, end } => {
                nonneg(*scale, "scale")?;
                nonneg(*exponent, "exponent")?;
                if !(*end > 0.0) {
                    return Err(Error::invalid("power distribution needs end > 0"));
                }
                Ok(())
            }
            D::Sublevel { profile, n, v1, .. } => {
                if *n == 0 {
                    return Err(Error::invalid("dimension must be at least 1"));
                }
                nonneg(*v1, "v1")?;
                profile.validate()
            }
            D::Mixed { measure, profile } => {
                measure.validate()?;
                profile.validate()
            }
            D::Sum { terms } => terms.iter().try_for_each(|t| t.validate()),
            D::Dilated { inner, factor } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(Error::invalid("dilation factor must be positive"));
                }
                inner.validate()
            }
            D::Scaled { inner, factor } => {
                nonneg(*factor, "scale factor")?;
                inner.validate()
            }
            D::Truncated { inner, at } => {
                if at.is_nan() {
                    return Err(Error::invalid("truncation point is NaN"));
                }
                inner.validate()
            }
        }
    }

    /// `F(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        use DistributionFunction as D;
        match self {
            D::Zero => 0.0,
            D::Atom { mass, value } => {
                if t < *value {
                    *mass
                } else {
                    0.0
                }
            }
            D::Exponential { scale, rate } => scale * (-rate * t).exp(),
            D::Power { scale, exponent, end } => {
                if t < *end {
                    scale * t.powf(-exponent)
                } else {
                    0.0
                }
            }
            D::Table(table) => table.eval(t),
            D::Sublevel { profile, n, measure, v1, sublevel } => {
                let s = profile.level_radius(t, *sublevel);
                if s == f64::NEG_INFINITY {
                    return 0.0;
                }
                match measure {
                    SublevelMeasure::Ma => {
                        let d = match sublevel {
                            Sublevel::Open => profile.left_derivative(s),
                            Sublevel::Closed => profile.right_derivative(s),
                        };
                        d.powi(*n as i32)
                    }
                    SublevelMeasure::Cap => {
                        let gap = profile.log_radius() - s;
                        if gap <= 0.0 {
                            f64::INFINITY
                        } else {
                            gap.powi(-(*n as i32))
                        }
                    }
                    SublevelMeasure::Vol => v1 * (2.0 * *n as f64 * s).exp(),
                }
            }
            D::Mixed { measure, profile } => {
                let s = profile.level_radius(t, Sublevel::Open);
                if s == f64::NEG_INFINITY {
                    // The open sublevel set is empty; the origin carries no
                    // weight unless φ(0) < -t, which the profile rules out.
                    0.0
                } else {
                    measure.mass_open(s)
                }
            }
            D::Sum { terms } => terms.iter().map(|f| f.eval(t)).sum(),
            D::Dilated { inner, factor } => inner.eval(t / factor),
            D::Scaled { inner, factor } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.eval(t)
                }
            }
            D::Truncated { inner, at } => {
                if t < *at {
                    inner.eval(t)
                } else {
                    0.0
                }
            }
        }
    }

    /// `ln F(t)`, accurate where `F(t)` underflows.
    pub fn ln_eval(&self, t: f64) -> f64 {
        use DistributionFunction as D;
        match self {
            D::Exponential { scale, rate } => scale.ln() - rate * t,
            D::Power { scale, exponent, end } if t < *end => scale.ln() - exponent * t.ln(),
            D::Sublevel { profile, n, measure, v1, sublevel } => {
                let s = profile.level_radius(t, *sublevel);
                if s == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                match measure {
                    SublevelMeasure::Ma => {
                        let ln_d = match sublevel {
                            Sublevel::Open => profile.ln_left_derivative(s),
                            Sublevel::Closed => profile.right_derivative(s).ln(),
                        };
                        *n as f64 * ln_d
                    }
                    SublevelMeasure::Cap => -(*n as f64) * (profile.log_radius() - s).ln(),
                    SublevelMeasure::Vol => v1.ln() + 2.0 * *n as f64 * s,
                }
            }
            D::Dilated { inner, factor } => inner.ln_eval(t / factor),
            D::Scaled { inner, factor } => factor.ln() + inner.ln_eval(t),
            D::Truncated { inner, at } if t < *at => inner.ln_eval(t),
            _ => self.eval(t).ln(),
        }
    }

    /// Points in `(0, limit]` where `F` jumps or loses smoothness.
    pub fn breakpoints(&self, limit: f64) -> Vec<f64> {
        use DistributionFunction as D;
        let mut out = match self {
            D::Zero | D::Exponential { .. } => Vec::new(),
            D::Atom { value, .. } => vec![*value],
            D::Power { end, .. } => vec![*end],
            D::Table(table) => {
                let mut v: Vec<f64> = table.samples.iter().map(|s| s[0]).collect();
                v.extend(table.jumps.iter().map(|j| j.at));
                v
            }
            D::Sublevel { profile, .. } => profile.level_breaks(),
            D::Mixed { measure, profile } => {
                let mut v = profile.level_breaks();
                for s in measure.breakpoints() {
                    if s <= profile.log_radius() {
                        v.push(-profile.value(s));
                    }
                }
                v
            }
            D::Sum { terms } => terms.iter().flat_map(|f| f.breakpoints(limit)).collect(),
            D::Dilated { inner, factor } => inner.breakpoints(limit / factor).into_iter().map(|b| b * factor).collect(),
            D::Scaled { inner, .. } => inner.breakpoints(limit),
            D::Truncated { inner, at } => {
                let mut v = inner.breakpoints(limit.min(*at));
                v.push(*at);
                v
            }
        };
        out.retain(|&b| b.is_finite() && b > 0.0 && b <= limit);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Smallest `T` with `F = 0` on `[T, inf)`; `+inf` if none is known.
    pub fn support_end(&self) -> f64 {
        use DistributionFunction as D;
        match self {
            D::Zero => 0.0,
            D::Atom { mass, value } => {
                if *mass == 0.0 {
                    0.0
                } else {
                    value.max(0.0)
                }
            }
            D::Exponential { scale, .. } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            D::Power { scale, end, .. } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    *end
                }
            }
            D::Table(table) => {
                let last = table.samples.last().expect("non-empty");
                let cont = match table.tail {
                    Tail::Zero => {
                        // last sample location, or earlier if the table already hit zero
                        let first_zero = table.samples.iter().find(|s| s[1] == 0.0).map(|s| s[0]);
                        first_zero.unwrap_or(last[0])
                    }
                    _ if last[1] == 0.0 => table.samples.iter().find(|s| s[1] == 0.0).map(|s| s[0]).unwrap_or(0.0),
                    _ => f64::INFINITY,
                };
                table
                    .jumps
                    .iter()
                    .filter(|j| j.size > 0.0)
                    .map(|j| j.at)
                    .fold(cont, f64::max)
            }
            D::Sublevel { profile, .. } | D::Mixed { profile, .. } => (-profile.lower_limit()).max(0.0),
            D::Sum { terms } => terms.iter().map(|f| f.support_end()).fold(0.0, f64::max),
            D::Dilated { inner, factor } => inner.support_end() * factor,
            D::Scaled { inner, factor } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    inner.support_end()
                }
            }
            D::Truncated { inner, at } => inner.support_end().min(at.max(0.0)),
        }
    }

    /// `Some(c)` when `F ≡ c` on the open interval `(a, b)`.
    pub fn constant_on(&self, a: f64, b: f64) -> Option<f64> {
        use DistributionFunction as D;
        if a >= self.support_end() {
            return Some(0.0);
        }
        match self {
            D::Zero => Some(0.0),
            D::Atom { mass, value } => (b <= *value).then_some(*mass),
            D::Exponential { scale, rate } => (*scale == 0.0 || *rate == 0.0).then_some(*scale),
            D::Power { scale, exponent, end } => {
                if *scale == 0.0 || a >= *end {
                    Some(0.0)
                } else if *exponent == 0.0 && b <= *end {
                    Some(*scale)
                } else {
                    None
                }
            }
            D::Table(table) => {
                let crosses_jump = table.jumps.iter().any(|j| j.at > a && j.at < b);
                let first = table.samples[0];
                (!crosses_jump && b <= first[0]).then(|| table.eval(0.5 * (a + b)))
            }
            D::Sublevel { profile, measure: SublevelMeasure::Ma, .. } => {
                if b > self.support_end() {
                    return None;
                }
                // For t in (a, b) the level radius sweeps (lo, hi); F is constant
                // iff the profile is affine there.
                let lo = profile.level_radius(b, Sublevel::Closed);
                let hi = profile.level_radius(a, Sublevel::Open);
                profile.is_affine_on(lo, hi).then(|| self.eval(0.5 * (a + b.min(a + 1.0))))
            }
            D::Mixed { measure, profile } => {
                if b > self.support_end() {
                    return None;
                }
                let lo = profile.level_radius(b, Sublevel::Closed);
                let hi = profile.level_radius(a, Sublevel::Open);
                measure.is_constant_on(lo, hi).then(|| self.eval(0.5 * (a + b.min(a + 1.0))))
            }
            D::Sum { terms } => {
                let mut acc = 0.0;
                for f in terms {
                    acc += f.constant_on(a, b)?;
                }
                Some(acc)
            }
            D::Dilated { inner, factor } => inner.constant_on(a / factor, b / factor),
            D::Scaled { inner, factor } => {
                if *factor == 0.0 {
                    Some(0.0)
                } else {
                    inner.constant_on(a, b).map(|c| factor * c)
                }
            }
            D::Truncated { inner, at } => {
                if a >= *at {
                    Some(0.0)
                } else if b <= *at {
                    inner.constant_on(a, b)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// `F ≡ 0` on `(0, inf)`. Right-continuity and monotonicity reduce this
    /// to `F(0+) = 0`.
    pub fn is_identically_zero(&self) -> bool {
        self.support_end() == 0.0 || self.eval(f64::MIN_POSITIVE) == 0.0
    }

    /// Locations and sizes of the downward jumps of `F` in `(0, limit]`.
    pub fn jump_list(&self, limit: f64) -> Vec<Jump> {
        self.breakpoints(limit)
            .into_iter()
            .filter_map(|b| {
                let left = self.eval(b * (1.0 - 1e-14));
                let right = self.eval(b);
                let size = left - right;
                (size > 1e-9 * left.abs().max(1.0)).then_some(Jump { at: b, size })
            })
            .collect()
    }
}

/// Cap on how far breakpoints are collected for infinite supports.
const BREAKPOINT_HORIZON: f64 = 1.0e6;

fn integrand(f: &DistributionFunction, w: &Weight, lambda: f64, t: f64) -> f64 {
    let ft = f.eval(t);
    let u = t / lambda;
    if ft == 0.0 {
        // `F` may underflow where `h'(t/λ) F(t)` does not.
        let lf = f.ln_eval(t);
        if lf == f64::NEG_INFINITY {
            return 0.0;
        }
        return (w.ln_derivative(u) + lf - lambda.ln()).exp();
    }
    let d = w.derivative(u);
    if d == 0.0 && ft.is_finite() {
        return 0.0;
    }
    let v = d * ft / lambda;
    if v.is_finite() && v > 0.0 && v < 1e300 {
        return v;
    }
    if ft.is_infinite() {
        return f64::INFINITY;
    }
    (w.ln_derivative(u) + f.ln_eval(t) - lambda.ln()).exp()
}

/// `∫_0^∞ (1/λ) h'(t/λ) F(t) dt = ∫ h(|f|/λ) dμ`, `+inf` when divergent.
pub fn layercake_integral(f: &DistributionFunction, w: &Weight, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    layercake_detailed(f, w, lambda, spec).map(|i| i.value)
}

/// Same as [`layercake_integral`] with the quadrature diagnostics.
pub fn layercake_detailed(
    f: &DistributionFunction,
    w: &Weight,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<quad::Integral> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("layer-cake scale must be positive, got {lambda}")));
    }
    let end = f.support_end();
    let horizon = if end.is_finite() { end } else { BREAKPOINT_HORIZON };
    let mut points = f.breakpoints(horizon);
    points.extend(w.breakpoints(horizon / lambda).into_iter().map(|b| b * lambda));
    let g = |t: f64| integrand(f, w, lambda, t);
    let closed = |a: f64, b: f64| {
        let c = f.constant_on(a, b)?;
        if c == 0.0 {
            return Some(0.0);
        }
        if b.is_infinite() {
            return Some(f64::INFINITY);
        }
        // Closed forms need a cheap h; the witness and non-polynomial tilde
        // weights integrate h' numerically anyway.
        match w {
            Weight::Witness { .. } => None,
            Weight::Tilde { base, .. } if !matches!(base.as_ref(), Weight::Poly { .. }) => None,
            _ => Some(c * (w.value(b / lambda) - w.value(a / lambda))),
        }
    };
    let mut result = quad::integrate_half_line(&g, &points, end, closed, spec)?;
    if result.value.is_finite() && end.is_infinite() && w.grows_superexponentially() {
        let lb = far_field_lower_bound(f, w, lambda);
        if lb > result.value * (1.0 + 1e-6) + spec.abs_tol {
            if lb.is_finite() {
                return Err(Error::NonConvergence { partial: result.value, block: lb });
            }
            result.value = f64::INFINITY;
            result.divergence = Some(quad::Divergence::Tail);
        }
    }
    Ok(result)
}

/// Largest of the lower bounds `t (1/λ) h'(t/λ) F(2t)` for `∫_t^{2t}` over
/// `t = λ 2^{k/2}`. The block sweep can settle on a decaying stretch of the
/// integrand before a super-exponential weight overtakes `F`; these bounds
/// only use monotonicity of `h'` and `F`.
fn far_field_lower_bound(f: &DistributionFunction, w: &Weight, lambda: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for k in -8..=80 {
        let u = (k as f64 / 2.0).exp2();
        let t = lambda * u;
        let lf = f.ln_eval(2.0 * t);
        if lf == f64::NEG_INFINITY {
            break;
        }
        let v = u.ln() + w.ln_derivative(u) + lf;
        if v.is_nan() {
            continue;
        }
        best = best.max(v);
    }
    best.exp()
}

/// Outcome of a norm solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSolve {
    #[serde(with = "crate::jsonf64")]
    pub value: f64,
    /// Layer-cake integral at the returned scale (1 when `0 < value < inf`).
    #[serde(with = "crate::jsonf64")]
    pub integral_at_value: f64,
    pub layercake_evaluations: usize,
}

const MAX_DOUBLINGS: u32 = 64;
const MAX_HALVINGS: u32 = 1100;

/// `inf{λ > 0 : ∫ (1/λ) h'(t/λ) F(t) dt <= 1}` with bracketing from `λ = 1`.
pub fn solve_norm(f: &DistributionFunction, w: &Weight, spec: &QuadratureSpec) -> Result<NormSolve> {
    spec.validate()?;
    if f.is_identically_zero() {
        return Ok(NormSolve { value: 0.0, integral_at_value: 0.0, layercake_evaluations: 0 });
    }
    solve_scale(|lam| layercake_integral(f, w, lam, spec))
}

/// `inf{λ > 0 : L(λ) <= 1}` for a nonincreasing `L`, bracketed from `λ = 1`
/// by doubling or halving, then bisected to relative width `1e-14`. The
/// returned value is the upper end of the final bracket.
pub fn solve_scale<L: FnMut(f64) -> Result<f64>>(mut integral: L) -> Result<NormSolve> {
    let evals = RefCell::new(0usize);
    let mut l = |lam: f64| {
        *evals.borrow_mut() += 1;
        integral(lam)
    };
    let at_one = l(1.0)?;
    let (lo, hi, at_hi);
    if at_one > 1.0 {
        let (mut a, mut b) = (1.0, 2.0);
        let mut vb = l(b)?;
        let mut k = 1;
        while vb > 1.0 {
            if k >= MAX_DOUBLINGS {
                return Ok(NormSolve {
                    value: f64::INFINITY,
                    integral_at_value: vb,
                    layercake_evaluations: *evals.borrow(),
                });
            }
            a = b;
            b *= 2.0;
            vb = l(b)?;
            k += 1;
        }
        (lo, hi, at_hi) = (a, b, vb);
    } else {
        let (mut a, mut b) = (0.5, 1.0);
        let mut vb = at_one;
        let mut k = 1;
        loop {
            let va = l(a)?;
            if va > 1.0 {
                break;
            }
            if k >= MAX_HALVINGS || a < 1e-300 {
                return Ok(NormSolve { value: a, integral_at_value: va, layercake_evaluations: *evals.borrow() });
            }
            b = a;
            vb = va;
            a *= 0.5;
            k += 1;
        }
        (lo, hi, at_hi) = (a, b, vb);
    }
    let err = RefCell::new(None);
    let last_hi = RefCell::new(at_hi);
    let (_, hi) = search::bisect_boundary(
        |lam| match l(lam) {
            Ok(v) => {
                if v > 1.0 {
                    true
                } else {
                    *last_hi.borrow_mut() = v;
                    false
                }
            }
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                false
            }
        },
        lo,
        hi,
        1e-14,
        0.0,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let integral_at_value = last_hi.into_inner();
    Ok(NormSolve { value: hi, integral_at_value, layercake_evaluations: evals.into_inner() })
}

/// Luxembourg norm of `f` from its distribution function `F(t) = μ(|f| > t)`.
pub fn luxembourg_norm(f: &DistributionFunction, w: &Weight, spec: &QuadratureSpec) -> Result<f64> {
    solve_norm(f, w, spec).map(|s| s.value)
}

/// Choquet-Orlicz norm `I_h(f)` from `F_cap(t) = Cap(f > t)`. A
/// non-integrable singularity of `h'(t/λ) F_cap(t)` at zero gives `+inf`.
pub fn choquet_norm(f_cap: &DistributionFunction, w: &Weight, spec: &QuadratureSpec) -> Result<f64> {
    solve_norm(f_cap, w, spec).map(|s| s.value)
}

/// `∫_a^∞ F(t) dt`.
pub fn tail_integral(f: &DistributionFunction, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    let a = a.max(0.0);
    let end = f.support_end();
    if a >= end {
        return Ok(0.0);
    }
    let horizon = if end.is_finite() { end } else { BREAKPOINT_HORIZON };
    let points: Vec<f64> = f.breakpoints(horizon).into_iter().filter(|&b| b > a).map(|b| b - a).collect();
    let g = |u: f64| f.eval(a + u);
    let closed = |lo: f64, hi: f64| {
        let c = f.constant_on(a + lo, a + hi)?;
        Some(if c == 0.0 { 0.0 } else { c * (hi - lo) })
    };
    quad::integrate_half_line(&g, &points, end - a, closed, spec).map(|i| i.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{self, tilde};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn exp_dist() -> DistributionFunction {
        DistributionFunction::Exponential { scale: 1.0, rate: 1.0 }
    }

    #[test]
    fn point_mass_layercake() {
        let f = DistributionFunction::Atom { mass: 1.0, value: 3.0 };
        let w = weights::polynomial(2.0).unwrap();
        let v = layercake_integral(&f, &w, 1.0, &spec()).unwrap();
        assert!((v - 4.5).abs() < 1e-14);
    }

    #[test]
    fn exponential_layercake_against_riemann_sum() {
        let w = weights::polynomial(1.0).unwrap();
        let v = layercake_integral(&exp_dist(), &w, 1.0, &spec()).unwrap();
        // midpoint Riemann sum, step 1e-4, truncated at 50
        let step = 1e-4;
        let riemann: f64 = (0..500_000).map(|i| (-(i as f64 + 0.5) * step).exp() * step).sum();
        assert!((v - riemann).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-9);
        let half = layercake_integral(&exp_dist(), &w, 2.0, &spec()).unwrap();
        assert!((half - 0.5).abs() < 1e-9);
    }

    #[test]
    fn atom_luxembourg_norm() {
        let f = DistributionFunction::Atom { mass: 1.0, value: 3.0 };
        let w = weights::polynomial(2.0).unwrap();
        let n = luxembourg_norm(&f, &w, &spec()).unwrap();
        assert!((n - 3.0 / 2f64.sqrt()).abs() < 1e-12, "{n}");
    }

    #[test]
    fn zero_norm() {
        let w = weights::exponential();
        assert_eq!(luxembourg_norm(&DistributionFunction::Zero, &w, &spec()).unwrap(), 0.0);
        let z = DistributionFunction::Atom { mass: 0.0, value: 3.0 };
        assert_eq!(choquet_norm(&z, &w, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn p_norm_of_exponential_distribution() {
        // (∫ p t^{p-1} e^{-t} dt / p)^{1/p} = (Γ(3)/2)^{1/2} = 1 for p = 2
        let w = weights::polynomial(2.0).unwrap();
        let n = luxembourg_norm(&exp_dist(), &w, &spec()).unwrap();
        assert!((n - 1.0).abs() < 1e-9, "{n}");
    }

    #[test]
    fn not_in_space_is_infinite() {
        let f = DistributionFunction::Power { scale: 1.0, exponent: 0.5, end: f64::INFINITY };
        let w = weights::polynomial(1.0).unwrap();
        assert_eq!(luxembourg_norm(&f, &w, &spec()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn choquet_reciprocal_capacity() {
        // F_cap = 1/t on (0, 2), tilde of h(t) = t with n = 1: λ^{-1} h(2/λ) = 1
        let f = DistributionFunction::Power { scale: 1.0, exponent: 1.0, end: 2.0 };
        let w = tilde(&weights::polynomial(1.0).unwrap(), 1).unwrap();
        let n = choquet_norm(&f, &w, &spec()).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-9, "{n}");
        let doubled = choquet_norm(&f.dilated(2.0), &w, &spec()).unwrap();
        assert!((doubled / n - 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_integrable_capacity_singularity() {
        let f = DistributionFunction::Power { scale: 1.0, exponent: 3.0, end: 1.0 };
        let w = tilde(&weights::polynomial(1.0).unwrap(), 1).unwrap();
        assert_eq!(choquet_norm(&f, &w, &spec()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn table_with_jumps() {
        let table = Table::new(
            vec![[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]],
            vec![Jump { at: 1.5, size: 0.5 }],
            Tail::Zero,
        )
        .unwrap();
        let f = DistributionFunction::Table(table);
        assert_eq!(f.eval(0.5), 1.5 + 0.5);
        assert_eq!(f.eval(1.5), 0.5);
        assert_eq!(f.support_end(), 2.0);
        let jumps = f.jump_list(10.0);
        assert_eq!(jumps.len(), 1);
        assert!((jumps[0].size - 0.5).abs() < 1e-9);
        let total = tail_integral(&f, 0.0, &spec()).unwrap();
        assert!((total - (2.0 + 0.75)).abs() < 1e-12, "{total}");
    }

    #[test]
    fn table_rejects_increasing() {
        assert!(Table::new(vec![[0.0, 1.0], [1.0, 2.0]], vec![], Tail::Zero).is_err());
    }

    #[test]
    fn tail_of_exponential() {
        let v = tail_integral(&exp_dist(), 2.0, &spec()).unwrap();
        assert!((v - (-2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_with_infinity() {
        let f = DistributionFunction::Sum {
            terms: vec![
                DistributionFunction::Atom { mass: 1.0, value: f64::INFINITY },
                DistributionFunction::Power { scale: 2.0, exponent: 1.5, end: f64::INFINITY },
            ],
        };
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"inf\""));
        let back: DistributionFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
