use serde::{Deserialize, Serialize};

use super::solved::SolvedProfile;
use crate::error::{Error, Result};
use crate::search;
use crate::weights::iterated_exp;

/// Whether a sublevel set `{φ < -t}` is taken open (strict) or closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sublevel {
    #[default]
    Open,
    Closed,
}

fn log_profile() -> Box<RadialProfile> {
    Box::new(RadialProfile::Log)
}

/// Convex nondecreasing `g` on `(-inf, log_radius]` with `g(log_radius) = 0`,
/// standing for `φ(z) = g(log|z|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    Zero,
    /// `g(s) = s`, i.e. `log|z|`.
    Log,
    /// `g(s) = -L_k(C_k - s)` with `C_1 = 1`, `C_{k+1} = e^{C_k}`.
    Iterlog { k: u32 },
    /// `g(s) = -(-s)^alpha`.
    Power { alpha: f64 },
    /// `g(s) = e^{rate s} - 1`.
    Exp { rate: f64 },
    /// `max(inner, -M)`.
    Trunc {
        #[serde(rename = "M", alias = "m")]
        m: f64,
        #[serde(default = "log_profile")]
        inner: Box<RadialProfile>,
    },
    /// `max(inner, j s)`.
    Exhaust {
        j: f64,
        #[serde(default = "log_profile")]
        inner: Box<RadialProfile>,
    },
    /// `alpha · inner`.
    Scale { alpha: f64, inner: Box<RadialProfile> },
    Sum { terms: Vec<RadialProfile> },
    /// Solution of the radial Dirichlet problem for a given measure.
    Solved(SolvedProfile),
    /// `inner` on `(-inf, contact]`, then the line `slope (s - log_r)`.
    /// `contact = None` means the line alone.
    Subext {
        inner: Box<RadialProfile>,
        log_r: f64,
        slope: f64,
        #[serde(default, with = "crate::jsonf64::option")]
        contact: Option<f64>,
    },
}

/// `C_k` with `C_1 = 1`, `C_{k+1} = e^{C_k}`.
pub fn iterlog_shift(k: u32) -> f64 {
    iterated_exp(k.saturating_sub(1), 1.0)
}

/// Largest supported iterated-log depth (`C_5` overflows).
pub const MAX_ITERLOG_DEPTH: u32 = 4;

/// Search floor for level radii and contact points.
const FAR_LEFT: f64 = -1.152_921_504_606_847e18; // -2^60

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        use RadialProfile as P;
        match self {
            P::Zero | P::Log => Ok(()),
            P::Iterlog { k } => {
                if *k == 0 || *k > MAX_ITERLOG_DEPTH {
                    return Err(Error::invalid(format!(
                        "iterated log depth must be in 1..={MAX_ITERLOG_DEPTH}, got {k}"
                    )));
                }
                Ok(())
            }
            P::Power { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::invalid(format!(
                        "power profile needs alpha in (0, 1], got {alpha} (alpha > 1 is not convex)"
                    )));
                }
                Ok(())
            }
            P::Exp { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("exponential profile needs a positive rate"));
                }
                Ok(())
            }
            P::Trunc { m, inner } => {
                if !(m.is_finite() && *m > 0.0) {
                    return Err(Error::invalid(format!("truncation level must be positive, got {m}")));
                }
                inner.validate_unit()
            }
            P::Exhaust { j, inner } => {
                if !(j.is_finite() && *j > 0.0) {
                    return Err(Error::invalid(format!("exhaustion slope must be positive, got {j}")));
                }
                inner.validate_unit()
            }
            P::Scale { alpha, inner } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::invalid(format!("scale must be positive, got {alpha}")));
                }
                inner.validate()
            }
            P::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::invalid("sum profile needs at least one term"));
                }
                let r = terms[0].log_radius();
                for t in terms {
                    t.validate()?;
                    if t.log_radius() != r {
                        return Err(Error::invalid("summed profiles must live on the same ball"));
                    }
                }
                Ok(())
            }
            P::Solved(solved) => solved.measure().validate(),
            P::Subext { inner, log_r, slope, contact } => {
                inner.validate_unit()?;
                if !(log_r.is_finite() && *log_r > 0.0) {
                    return Err(Error::invalid("subextension radius must satisfy log R > 0"));
                }
                if !(slope.is_finite() && *slope >= 0.0) {
                    return Err(Error::invalid("subextension slope must be nonnegative"));
                }
                if let Some(c) = contact {
                    if !(c.is_finite() && *c <= 0.0) {
                        return Err(Error::invalid("contact point must lie in (-inf, 0]"));
                    }
                }
                Ok(())
            }
        }
    }

    fn validate_unit(&self) -> Result<()> {
        self.validate()?;
        if self.log_radius() != 0.0 {
            return Err(Error::invalid("inner profile must live on the unit ball"));
        }
        Ok(())
    }

    /// `log R` of the ball the profile lives on.
    pub fn log_radius(&self) -> f64 {
        match self {
            RadialProfile::Subext { log_r, .. } => *log_r,
            RadialProfile::Scale { inner, .. } => inner.log_radius(),
            RadialProfile::Sum { terms } => terms.first().map_or(0.0, |t| t.log_radius()),
            _ => 0.0,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        use RadialProfile as P;
        let s = s.min(self.log_radius());
        match self {
            P::Zero => 0.0,
            P::Log => s,
            P::Iterlog { k } => {
                let x = iterlog_shift(*k) - s;
                -(0..*k).fold(x, |acc, _| acc.ln())
            }
            P::Power { alpha } => {
                if *alpha == 1.0 {
                    s
                } else {
                    -(-s).powf(*alpha)
                }
            }
            P::Exp { rate } => (rate * s).exp_m1(),
            P::Trunc { m, inner } => inner.value(s).max(-m),
            P::Exhaust { j, inner } => inner.value(s).max(j * s),
            P::Scale { alpha, inner } => alpha * inner.value(s),
            P::Sum { terms } => terms.iter().map(|t| t.value(s)).sum(),
            P::Solved(solved) => solved.value(s),
            P::Subext { inner, log_r, slope, contact } => match contact {
                Some(c) if s <= *c => inner.value(s),
                _ => slope * (s - log_r),
            },
        }
    }

    /// Left derivative `g'_-(s)`.
    pub fn left_derivative(&self, s: f64) -> f64 {
        self.derivative(s, true)
    }

    /// Right derivative `g'_+(s)`.
    pub fn right_derivative(&self, s: f64) -> f64 {
        self.derivative(s, false)
    }

    fn derivative(&self, s: f64, left: bool) -> f64 {
        use RadialProfile as P;
        match self {
            P::Zero => 0.0,
            P::Log => 1.0,
            P::Iterlog { k } => {
                // d/ds [-L_k(C_k - s)] = Π_{i<k} 1 / L_i(C_k - s)
                let mut x = iterlog_shift(*k) - s;
                let mut d = 1.0;
                for _ in 0..*k {
                    d /= x;
                    x = x.ln();
                }
                d
            }
            P::Power { alpha } => {
                if *alpha == 1.0 {
                    1.0
                } else if s >= 0.0 {
                    f64::INFINITY
                } else {
                    alpha * (-s).powf(alpha - 1.0)
                }
            }
            P::Exp { rate } => rate * (rate * s).exp(),
            P::Trunc { m, inner } => {
                let a = inner.value(s);
                if a > -m {
                    inner.derivative(s, left)
                } else if a < -m || left {
                    0.0
                } else {
                    inner.derivative(s, false)
                }
            }
            P::Exhaust { j, inner } => {
                let a = inner.value(s);
                let b = j * s;
                if a > b {
                    inner.derivative(s, left)
                } else if a < b {
                    *j
                } else if left {
                    inner.derivative(s, true).min(*j)
                } else {
                    inner.derivative(s, false).max(*j)
                }
            }
            P::Scale { alpha, inner } => alpha * inner.derivative(s, left),
            P::Sum { terms } => terms.iter().map(|t| t.derivative(s, left)).sum(),
            P::Solved(solved) => solved.derivative(s, left),
            P::Subext { inner, slope, contact, .. } => match contact {
                Some(c) if s < *c || (s == *c && left) => inner.derivative(s, left),
                _ => *slope,
            },
        }
    }

    /// `ln g'_-(s)`, finite where the derivative underflows.
    pub fn ln_left_derivative(&self, s: f64) -> f64 {
        match self {
            RadialProfile::Iterlog { k } => {
                let mut x = iterlog_shift(*k) - s;
                let mut acc = 0.0;
                for _ in 0..*k {
                    acc -= x.ln();
                    x = x.ln();
                }
                acc
            }
            RadialProfile::Exp { rate } => rate.ln() + rate * s,
            RadialProfile::Scale { alpha, inner } => alpha.ln() + inner.ln_left_derivative(s),
            _ => self.left_derivative(s).ln(),
        }
    }

    /// `g(-inf)`; `-inf` for unbounded profiles.
    pub fn lower_limit(&self) -> f64 {
        use RadialProfile as P;
        match self {
            P::Zero => 0.0,
            P::Log | P::Iterlog { .. } | P::Power { .. } => f64::NEG_INFINITY,
            P::Exp { .. } => -1.0,
            P::Trunc { m, inner } => inner.lower_limit().max(-m),
            P::Exhaust { inner, .. } => inner.lower_limit(),
            P::Scale { alpha, inner } => alpha * inner.lower_limit(),
            P::Sum { terms } => terms.iter().map(|t| t.lower_limit()).sum(),
            P::Solved(solved) => solved.lower_limit(),
            P::Subext { inner, slope, contact, .. } => match contact {
                Some(_) => inner.lower_limit(),
                None if *slope > 0.0 => f64::NEG_INFINITY,
                None => 0.0,
            },
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower_limit().is_finite()
    }

    /// `lim_{s -> -inf} g'(s)`; its `n`-th power is the Monge-Ampère mass of the origin.
    pub fn asymptotic_slope(&self) -> f64 {
        use RadialProfile as P;
        match self {
            P::Zero | P::Iterlog { .. } | P::Exp { .. } => 0.0,
            P::Log => 1.0,
            P::Power { alpha } => {
                if *alpha == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            P::Trunc { m, inner } => {
                if inner.lower_limit() < -m {
                    0.0
                } else {
                    inner.asymptotic_slope()
                }
            }
            P::Exhaust { j, inner } => inner.asymptotic_slope().min(*j),
            P::Scale { alpha, inner } => alpha * inner.asymptotic_slope(),
            P::Sum { terms } => terms.iter().map(|t| t.asymptotic_slope()).sum(),
            P::Solved(solved) => solved.asymptotic_slope(),
            P::Subext { inner, slope, contact, .. } => match contact {
                Some(_) => inner.asymptotic_slope(),
                None => *slope,
            },
        }
    }

    /// `s_t = sup{s : g(s) < -t}` (open) or `sup{s : g(s) <= -t}` (closed);
    /// `-inf` when the sublevel set is empty.
    pub fn level_radius(&self, t: f64, kind: Sublevel) -> f64 {
        use RadialProfile as P;
        let edge = self.log_radius();
        if t < 0.0 || t.is_nan() {
            return edge;
        }
        match self {
            P::Zero => {
                if kind == Sublevel::Closed && t == 0.0 {
                    edge
                } else {
                    f64::NEG_INFINITY
                }
            }
            P::Log => -t,
            P::Iterlog { k } => {
                if *k == 1 {
                    -t.exp_m1()
                } else {
                    iterlog_shift(*k) - iterated_exp(*k, t)
                }
            }
            P::Power { alpha } => -t.powf(1.0 / alpha),
            P::Exp { rate } => {
                if t < 1.0 {
                    (-t).ln_1p() / rate
                } else {
                    f64::NEG_INFINITY
                }
            }
            P::Trunc { m, inner } => {
                let inside = match kind {
                    Sublevel::Open => t < *m,
                    Sublevel::Closed => t <= *m,
                };
                if inside {
                    inner.level_radius(t, kind)
                } else {
                    f64::NEG_INFINITY
                }
            }
            P::Exhaust { j, inner } => inner.level_radius(t, kind).min(-t / j),
            P::Scale { alpha, inner } => inner.level_radius(t / alpha, kind),
            P::Sum { .. } => self.level_radius_by_bisection(t, kind),
            P::Solved(solved) => solved.level_radius(t, kind),
            P::Subext { inner, log_r, slope, contact } => {
                let on_line = *slope > 0.0 && {
                    let contact_value = contact.map_or(f64::NEG_INFINITY, |c| slope * (c - log_r));
                    match kind {
                        Sublevel::Open => -t > contact_value,
                        Sublevel::Closed => -t >= contact_value,
                    }
                };
                if on_line {
                    log_r - t / slope
                } else if contact.is_some() {
                    inner.level_radius(t, kind).min(contact.unwrap_or(0.0))
                } else if kind == Sublevel::Closed && t == 0.0 {
                    edge
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    fn level_radius_by_bisection(&self, t: f64, kind: Sublevel) -> f64 {
        let target = -t;
        let inside = |s: f64| {
            let v = self.value(s);
            match kind {
                Sublevel::Open => v < target,
                Sublevel::Closed => v <= target,
            }
        };
        let edge = self.log_radius();
        if inside(edge) {
            return edge;
        }
        let mut lo = edge - 1.0;
        while !inside(lo) {
            lo = edge + 2.0 * (lo - edge);
            if lo < FAR_LEFT {
                return f64::NEG_INFINITY;
            }
        }
        let (lo, _) = search::bisect_boundary(inside, lo, edge, 1e-15, 1e-300);
        lo
    }

    /// Interior points where `g'` jumps.
    pub fn kinks(&self) -> Vec<f64> {
        use RadialProfile as P;
        let mut out = match self {
            P::Zero | P::Log | P::Iterlog { .. } | P::Power { .. } | P::Exp { .. } => Vec::new(),
            P::Trunc { m, inner } => {
                let s_m = inner.level_radius(*m, Sublevel::Closed);
                let mut v: Vec<f64> = inner.kinks().into_iter().filter(|&k| k > s_m).collect();
                if s_m.is_finite() {
                    v.push(s_m);
                }
                v
            }
            P::Exhaust { j, inner } => {
                let mut v: Vec<f64> = inner
                    .kinks()
                    .into_iter()
                    .filter(|&k| inner.value(k) > j * k)
                    .collect();
                v.extend(crossings(|s| inner.value(s) - j * s));
                v
            }
            P::Scale { inner, .. } => inner.kinks(),
            P::Sum { terms } => terms.iter().flat_map(|t| t.kinks()).collect(),
            P::Solved(solved) => solved.kinks(),
            P::Subext { inner, contact, .. } => match contact {
                Some(c) => {
                    let mut v: Vec<f64> = inner.kinks().into_iter().filter(|k| k < c).collect();
                    if self.left_derivative(*c) != self.right_derivative(*c) {
                        v.push(*c);
                    }
                    v
                }
                None => Vec::new(),
            },
        };
        out.retain(|k| k.is_finite() && *k < self.log_radius());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Values `t` at which the sublevel distributions can jump or kink: the
    /// images `-g(kink)` and `-g(-inf)`.
    pub fn level_breaks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.kinks().into_iter().map(|k| -self.value(k)).collect();
        let low = self.lower_limit();
        if low.is_finite() {
            out.push(-low);
        }
        out.retain(|t| t.is_finite() && *t > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// True when `g` is affine on the open interval `(lo, hi)`.
    pub fn is_affine_on(&self, lo: f64, hi: f64) -> bool {
        use RadialProfile as P;
        if !(hi > lo) {
            return true;
        }
        match self {
            P::Zero | P::Log => true,
            P::Power { alpha } => *alpha == 1.0,
            P::Iterlog { .. } | P::Exp { .. } => false,
            P::Trunc { m, inner } => {
                let s_m = inner.level_radius(*m, Sublevel::Closed);
                hi <= s_m || (lo >= s_m && inner.is_affine_on(lo, hi))
            }
            P::Exhaust { j, inner } => {
                if self.kinks().iter().any(|&k| k > lo && k < hi) {
                    return false;
                }
                let mid = if lo.is_finite() { 0.5 * (lo + hi) } else { hi - 1.0 };
                inner.value(mid) < j * mid || inner.is_affine_on(lo, hi)
            }
            P::Scale { inner, .. } => inner.is_affine_on(lo, hi),
            P::Sum { terms } => terms.iter().all(|t| t.is_affine_on(lo, hi)),
            P::Solved(solved) => solved.measure().is_constant_on(lo, hi),
            P::Subext { inner, contact, .. } => match contact {
                Some(c) => *c <= lo || (hi <= *c && inner.is_affine_on(lo, hi)),
                None => true,
            },
        }
    }

    /// `alpha · g`.
    pub fn scaled(&self, alpha: f64) -> RadialProfile {
        RadialProfile::Scale { alpha, inner: Box::new(self.clone()) }
    }
}

/// Sign changes of `f` on a log-spaced grid of `[-40, 0)`, refined by bisection.
fn crossings<F: Fn(f64) -> f64>(f: F) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..512).map(|i| -40.0 * 10f64.powf(-9.0 * i as f64 / 511.0)).collect();
    grid.push(0.0);
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 && a < 0.0 {
            out.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let pos_left = fa > 0.0;
            let (lo, hi) = search::bisect_boundary(|s| (f(s) > 0.0) == pos_left, a, b, 1e-15, 1e-300);
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trunc(m: f64) -> RadialProfile {
        RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) }
    }

    #[test]
    fn iterlog_one_matches_closed_form() {
        let g = RadialProfile::Iterlog { k: 1 };
        for &s in &[-5.0, -1.0, -0.1] {
            assert!((g.value(s) + (1.0 - s).ln()).abs() < 1e-15);
            let h = 1e-6;
            let fd = (g.value(s + h) - g.value(s - h)) / (2.0 * h);
            assert!((g.left_derivative(s) - fd).abs() < 1e-8);
        }
        assert_eq!(g.value(0.0), 0.0);
        assert!((g.left_derivative(0.0) - 1.0).abs() < 1e-15);
        let s = g.level_radius(2.0, Sublevel::Open);
        assert!((g.value(s) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn iterlog_two_is_normalized() {
        let g = RadialProfile::Iterlog { k: 2 };
        assert!(g.value(0.0).abs() < 1e-15);
        let s = g.level_radius(1.5, Sublevel::Open);
        assert!((g.value(s) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn trunc_level_sets() {
        let g = trunc(2.0);
        assert_eq!(g.level_radius(1.0, Sublevel::Open), -1.0);
        assert_eq!(g.level_radius(2.0, Sublevel::Open), f64::NEG_INFINITY);
        assert_eq!(g.level_radius(2.0, Sublevel::Closed), -2.0);
        assert_eq!(g.kinks(), vec![-2.0]);
        assert_eq!(g.level_breaks(), vec![2.0]);
        assert_eq!(g.left_derivative(-2.0), 0.0);
        assert_eq!(g.right_derivative(-2.0), 1.0);
        assert!(g.is_affine_on(-2.0, 0.0));
        assert!(!g.is_affine_on(-3.0, 0.0));
    }

    #[test]
    fn sum_level_by_bisection() {
        let g = RadialProfile::Sum { terms: vec![trunc(1.0), RadialProfile::Exp { rate: 2.0 }] };
        let s = g.level_radius(0.7, Sublevel::Open);
        assert!((g.value(s) + 0.7).abs() < 1e-12);
        assert_eq!(g.level_radius(2.5, Sublevel::Open), f64::NEG_INFINITY);
    }

    #[test]
    fn exhaustion_crossings() {
        let g = RadialProfile::Exhaust { j: 2.0, inner: Box::new(RadialProfile::Power { alpha: 0.5 }) };
        // -sqrt(-s) = 2 s at s = -1/4
        let k = g.kinks();
        assert_eq!(k.len(), 1);
        assert!((k[0] + 0.25).abs() < 1e-12);
        assert_eq!(g.right_derivative(-0.1), 2.0);
    }

    #[test]
    fn power_rejects_alpha_above_one() {
        assert!(RadialProfile::Power { alpha: 1.5 }.validate().is_err());
        assert!(RadialProfile::Power { alpha: 0.5 }.validate().is_ok());
    }

    #[test]
    fn json_shape() {
        let g: RadialProfile = serde_json::from_str(r#"{"kind":"trunc","M":2}"#).unwrap();
        assert_eq!(g, trunc(2.0));
        let back = serde_json::to_value(&g).unwrap();
        assert_eq!(back["M"], 2.0);
    }
}
