//! Young functions `h` with `h(0) = 0`, `h'(0) = 1`, and the transforms built
//! on them: the capacity transform `h̃(s) = ∫_0^s t^n h'(t) dt`, the Legendre
//! conjugate, the extra-growth weight and the divergence witness weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::{self, DistributionFunction};
use crate::quad::{self, QuadratureSpec};
use crate::search;

/// `e_k(t)`: the exponential iterated `k` times (`e_0(t) = t`).
pub fn iterated_exp(k: u32, t: f64) -> f64 {
    (0..k).fold(t, |x, _| x.exp())
}

/// `L_k(y)`: the logarithm iterated `k` times.
pub fn iterated_ln(k: u32, y: f64) -> f64 {
    (0..k).fold(y, |x, _| x.ln())
}

/// Raw convex increasing generator `H` on `[0, inf)`, before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Linear,
    Exponential,
    IteratedExponential { k: u32 },
    /// `H(t) = Σ c_i t^i`.
    Polynomial { coefficients: Vec<f64> },
}

impl Generator {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Generator::Linear => t,
            Generator::Exponential => t.exp(),
            Generator::IteratedExponential { k } => iterated_exp(*k, t),
            Generator::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Generator::Linear => 1.0,
            Generator::Exponential => t.exp(),
            Generator::IteratedExponential { k } => {
                // d/dt e_k = e_k · e_{k-1} ··· e_1
                let mut x = t;
                let mut prod = 1.0;
                for _ in 0..*k {
                    x = x.exp();
                    prod *= x;
                }
                prod
            }
            Generator::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * t + i as f64 * c),
        }
    }

    pub fn ln_derivative(&self, t: f64) -> f64 {
        match self {
            Generator::Exponential => t,
            Generator::IteratedExponential { k } => {
                let mut x = t;
                let mut sum = 0.0;
                for _ in 0..*k {
                    sum += x;
                    x = x.exp();
                }
                sum
            }
            _ => self.derivative(t).ln(),
        }
    }

    fn inverse(&self, y: f64) -> Option<f64> {
        match self {
            Generator::Linear => Some(y),
            Generator::Exponential => Some(y.ln()),
            Generator::IteratedExponential { k } => Some(iterated_ln(*k, y)),
            Generator::Polynomial { .. } => None,
        }
    }
}

/// Piecewise-constant derivative `h'(t) = slopes[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// the last slope extending to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseRepr")]
pub struct PiecewiseDerivative {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Deserialize)]
struct PiecewiseRepr {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl TryFrom<PiecewiseRepr> for PiecewiseDerivative {
    type Error = Error;
    fn try_from(r: PiecewiseRepr) -> Result<Self> {
        PiecewiseDerivative::new(r.breakpoints, r.slopes)
    }
}

impl PiecewiseDerivative {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != slopes.len() {
            return Err(Error::invalid("piecewise derivative needs one slope per breakpoint"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("breakpoints must be finite and strictly increasing"));
        }
        if slopes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("slopes must be positive and finite"));
        }
        if slopes.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("slopes must be nondecreasing (convexity)"));
        }
        Ok(PiecewiseDerivative { breakpoints, slopes })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn segment(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1)
    }

    fn derivative(&self, t: f64) -> f64 {
        self.slopes[self.segment(t)]
    }

    fn value(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.breakpoints.len() {
            let lo = self.breakpoints[i];
            if t <= lo {
                break;
            }
            let hi = self.breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t);
            acc += self.slopes[i] * (hi - lo);
        }
        acc
    }

    fn inverse(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.breakpoints.len() {
            let lo = self.breakpoints[i];
            let next = self.breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let gain = self.slopes[i] * (next - lo);
            if acc + gain >= y {
                return lo + (y - acc) / self.slopes[i];
            }
            acc += gain;
        }
        f64::INFINITY
    }
}

/// A Young function together with its derivative and inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `h(t) = t^p / p`.
    Poly { p: f64 },
    /// `h(t) = e^t - 1`.
    Exp,
    /// `h(t) = (e_k(t) - e_k(0)) / e_k'(0)`.
    Iterexp { k: u32 },
    /// `h(t) = (H(t) - shift) / scale` for a raw generator `H`.
    Normalized { generator: Generator, shift: f64, scale: f64 },
    Piecewise(PiecewiseDerivative),
    /// `h'(t) = max(1, constant / ε(2^j t))` on `[j, j+1)`.
    Witness { epsilon: Box<DistributionFunction>, constant: f64 },
    /// `h̃(s) = ∫_0^s t^n h'(t) dt`; not normalized (`h̃'(0) = 0`).
    Tilde { base: Box<Weight>, n: u32 },
}

impl Weight {
    /// True when `h'` may outgrow every exponential.
    pub fn grows_superexponentially(&self) -> bool {
        match self {
            Weight::Poly { .. } | Weight::Exp => false,
            Weight::Normalized { generator, .. } => matches!(generator, Generator::IteratedExponential { k } if *k >= 2),
            Weight::Iterexp { k } => *k >= 2,
            Weight::Piecewise(_) | Weight::Witness { .. } => true,
            Weight::Tilde { base, .. } => base.grows_superexponentially(),
        }
    }

    /// Checks the parameters of a deserialized weight.
    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::Poly { p } => polynomial(*p).map(|_| ()),
            Weight::Exp => Ok(()),
            Weight::Iterexp { k } => iterated_exponential(*k).map(|_| ()),
            Weight::Normalized { shift, scale, .. } => {
                if shift.is_finite() && scale.is_finite() && *scale > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("normalized weight needs a finite shift and a positive scale"))
                }
            }
            Weight::Piecewise(pw) => PiecewiseDerivative::new(pw.breakpoints().to_vec(), pw.slopes().to_vec()).map(|_| ()),
            Weight::Witness { epsilon, constant } => {
                if !(constant.is_finite() && *constant > 0.0) {
                    return Err(Error::invalid("witness constant must be positive"));
                }
                epsilon.validate()
            }
            Weight::Tilde { base, n } => {
                if *n == 0 {
                    return Err(Error::invalid("dimension must be at least 1"));
                }
                base.validate()
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Weight::Poly { p } => t.powf(*p) / p,
            Weight::Exp => t.exp_m1(),
            Weight::Iterexp { k } => {
                let (shift, scale) = iterexp_constants(*k);
                (iterated_exp(*k, t) - shift) / scale
            }
            Weight::Normalized { generator, shift, scale } => {
                if matches!(generator, Generator::Exponential) {
                    (t.exp_m1() + (1.0 - shift)) / scale
                } else {
                    (generator.value(t) - shift) / scale
                }
            }
            Weight::Piecewise(pw) => pw.value(t),
            Weight::Witness { .. } => self.integrate_derivative(t),
            Weight::Tilde { base, n } => match base.as_ref() {
                Weight::Poly { p } => t.powf(*n as f64 + p) / (*n as f64 + p),
                _ => self.integrate_derivative(t),
            },
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            Weight::Poly { p } => {
                if *p == 1.0 {
                    1.0
                } else {
                    t.powf(p - 1.0)
                }
            }
            Weight::Exp => t.exp(),
            Weight::Iterexp { k } => {
                let (_, scale) = iterexp_constants(*k);
                Generator::IteratedExponential { k: *k }.derivative(t) / scale
            }
            Weight::Normalized { generator, scale, .. } => generator.derivative(t) / scale,
            Weight::Piecewise(pw) => pw.derivative(t),
            Weight::Witness { epsilon, constant } => {
                let j = t.floor();
                let eps = epsilon.eval(j.exp2() * t);
                if eps <= 0.0 {
                    f64::INFINITY
                } else {
                    (constant / eps).max(1.0)
                }
            }
            Weight::Tilde { base, n } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powi(*n as i32) * base.derivative(t)
                }
            }
        }
    }

    /// `ln h'(t)`, finite where `h'(t)` itself would overflow.
    pub fn ln_derivative(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            Weight::Exp => t,
            Weight::Iterexp { k } => {
                let (_, scale) = iterexp_constants(*k);
                Generator::IteratedExponential { k: *k }.ln_derivative(t) - scale.ln()
            }
            Weight::Normalized { generator, scale, .. } => generator.ln_derivative(t) - scale.ln(),
            Weight::Witness { epsilon, constant } => {
                let j = t.floor();
                (constant.ln() - epsilon.ln_eval(j.exp2() * t)).max(0.0)
            }
            Weight::Tilde { base, n } => *n as f64 * t.ln() + base.ln_derivative(t),
            _ => self.derivative(t).ln(),
        }
    }

    /// `h^{-1}(y)` for `y >= 0`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self {
            Weight::Poly { p } => (p * y).powf(1.0 / p),
            Weight::Exp => y.ln_1p(),
            Weight::Iterexp { k } => {
                let (shift, scale) = iterexp_constants(*k);
                iterated_ln(*k, shift + scale * y)
            }
            Weight::Normalized { generator, shift, scale } => generator
                .inverse(shift + scale * y)
                .unwrap_or_else(|| self.inverse_by_bisection(y)),
            Weight::Piecewise(pw) => pw.inverse(y),
            Weight::Tilde { base, n } => match base.as_ref() {
                Weight::Poly { p } => ((*n as f64 + p) * y).powf(1.0 / (*n as f64 + p)),
                _ => self.inverse_by_bisection(y),
            },
            Weight::Witness { .. } => self.inverse_by_bisection(y),
        }
    }

    /// Points where `h'` jumps, up to `limit`.
    pub fn breakpoints(&self, limit: f64) -> Vec<f64> {
        match self {
            Weight::Piecewise(pw) => pw.breakpoints.iter().copied().filter(|&b| b > 0.0 && b <= limit).collect(),
            Weight::Witness { .. } => {
                let top = limit.min(4096.0).floor() as i64;
                (1..=top).map(|j| j as f64).collect()
            }
            Weight::Tilde { base, .. } => base.breakpoints(limit),
            _ => Vec::new(),
        }
    }

    /// `h'(0)`; equal to 1 for every normalized weight.
    pub fn derivative_at_zero(&self) -> f64 {
        self.derivative(0.0)
    }

    fn integrate_derivative(&self, t: f64) -> f64 {
        let spec = QuadratureSpec::default();
        let mut cuts = vec![0.0];
        cuts.extend(self.breakpoints(t));
        cuts.push(t);
        cuts.dedup();
        let f = |s: f64| self.derivative(s);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            match quad::integrate(&f, w[0], w[1], &spec) {
                Ok(r) => acc += r.value,
                Err(Error::NonConvergence { partial, .. }) => acc += partial,
                Err(_) => return f64::NAN,
            }
            if !acc.is_finite() {
                return f64::INFINITY;
            }
        }
        acc
    }

    fn inverse_by_bisection(&self, y: f64) -> f64 {
        let mut hi = 1.0;
        let mut n = 0;
        while self.value(hi) < y {
            hi *= 2.0;
            n += 1;
            if n > 1100 {
                return f64::INFINITY;
            }
        }
        let (lo, hi) = search::bisect_boundary(|t| self.value(t) < y, 0.0, hi, 1e-15, 1e-300);
        0.5 * (lo + hi)
    }
}

fn iterexp_constants(k: u32) -> (f64, f64) {
    let g = Generator::IteratedExponential { k };
    (g.value(0.0), g.derivative(0.0))
}

/// `h(t) = t^p / p`.
pub fn polynomial(p: f64) -> Result<Weight> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("polynomial weight needs p >= 1, got {p}")));
    }
    Ok(Weight::Poly { p })
}

/// `h(t) = e^t - 1`.
pub fn exponential() -> Weight {
    Weight::Exp
}

/// Normalized `k`-fold iterated exponential, `k >= 1`.
pub fn iterated_exponential(k: u32) -> Result<Weight> {
    if k == 0 {
        return Err(Error::invalid("iterated exponential needs k >= 1"));
    }
    Ok(if k == 1 { Weight::Exp } else { Weight::Iterexp { k } })
}

/// Affine normalization `h = (H - H(0)) / H'(0)` of a raw generator.
pub fn normalize(generator: Generator) -> Result<Weight> {
    let d0 = generator.derivative(0.0);
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::invalid(format!("generator needs 0 < H'(0) < inf, got {d0}")));
    }
    let mut prev = d0;
    for i in 0..=120 {
        let t = 10f64.powf(-6.0 + 0.075 * i as f64);
        let d = generator.derivative(t);
        if d.is_nan() {
            return Err(Error::invalid(format!("generator derivative undefined at t = {t}")));
        }
        if d.is_finite() && d < prev * (1.0 - 1e-12) - 1e-15 {
            return Err(Error::invalid(format!("generator derivative decreases near t = {t}")));
        }
        prev = prev.max(d);
    }
    let shift = generator.value(0.0);
    Ok(Weight::Normalized { generator, shift, scale: d0 })
}

/// The capacity transform `h̃(s) = ∫_0^s t^n h'(t) dt`.
pub fn tilde(w: &Weight, n: u32) -> Result<Weight> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    Ok(Weight::Tilde { base: Box::new(w.clone()), n })
}

/// Legendre conjugate `θ*(s) = sup_{t >= 0} (s t - θ(t))` of a convex superlinear `θ`.
pub fn legendre<F: Fn(f64) -> f64>(theta: F, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::invalid("legendre transform is evaluated at s >= 0"));
    }
    search::concave_sup_on_half_line(|t| s * t - theta(t), 64).map(|(_, v)| v)
}

/// Blocks of the extra-growth construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraGrowth {
    pub weight: Weight,
    /// `N_0 = 0 < N_1 < ...`; `a(t) = q^{-k}` on `[N_k, N_{k+1})`.
    pub block_starts: Vec<f64>,
    pub q: f64,
    pub kappa: f64,
    pub integral: f64,
    pub weighted_integral: f64,
}

const EXTRA_GROWTH_BLOCKS: usize = 64;

/// Builds `h(t) = ∫_0^t a` with `a = q^{-k}` on `[N_k, N_{k+1})`, `κ(1-q) = 1`,
/// such that `∫ a F <= κ ∫ F` while `a -> inf`.
pub fn extra_growth(f: &DistributionFunction, kappa: f64, spec: &QuadratureSpec) -> Result<ExtraGrowth> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("extra growth needs kappa > 1, got {kappa}")));
    }
    let total = orlicz::tail_integral(f, 0.0, spec)?;
    if !total.is_finite() {
        return Err(Error::invalid("distribution function has a non-finite integral"));
    }
    let q = 1.0 - 1.0 / kappa;
    let mut starts = vec![0.0];
    let mut slopes = vec![1.0];
    let mut target = total;
    for k in 0..EXTRA_GROWTH_BLOCKS {
        let prev = starts[k];
        target *= q * q;
        let doubled = 2.0 * prev;
        let next = if doubled > 0.0 && orlicz::tail_integral(f, doubled, spec)? <= target {
            doubled
        } else {
            minimal_tail_point(f, doubled, target, spec)?
        };
        if !(next.is_finite() && next > prev) {
            break;
        }
        starts.push(next);
        slopes.push(q.powi(-(k as i32 + 1)));
    }
    let weight = Weight::Piecewise(PiecewiseDerivative::new(starts.clone(), slopes)?);
    let weighted = orlicz::layercake_integral(f, &weight, 1.0, spec)?;
    let bound = kappa * total;
    if weighted > bound + spec.rel_tol.max(1e-9) * bound.max(1.0) {
        return Err(Error::Contract(format!(
            "extra growth weight integrates to {weighted} > kappa * total = {bound}"
        )));
    }
    Ok(ExtraGrowth {
        weight,
        block_starts: starts,
        q,
        kappa,
        integral: total,
        weighted_integral: weighted,
    })
}

/// Smallest `T >= from` with `∫_T^∞ F <= target`.
fn minimal_tail_point(f: &DistributionFunction, from: f64, target: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut hi = from.max(1.0);
    let mut doublings = 0;
    while orlicz::tail_integral(f, hi, spec)? > target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 {
            return Err(Error::BracketEscaped { doublings });
        }
    }
    let lo = if from > 0.0 { from } else { 0.0 };
    if orlicz::tail_integral(f, lo, spec)? <= target {
        return Ok(lo);
    }
    let mut err = None;
    let (_, hi) = search::bisect_boundary(
        |t| match orlicz::tail_integral(f, t, spec) {
            Ok(v) => v > target,
            Err(e) => {
                err = Some(e);
                false
            }
        },
        lo,
        hi,
        1e-13,
        1e-12,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(hi),
    }
}

/// Witness weight `h'(t) = 1/ε(2^j t)` on `[j, j+1)`, rescaled so `h'(0) = 1`.
///
/// When `ε(0)` is infinite the derivative is floored at 1 instead.
pub fn witness_weight(epsilon: &DistributionFunction) -> Result<Weight> {
    let end = epsilon.support_end();
    if end.is_finite() {
        return Err(Error::BoundedInput { at: end });
    }
    for i in 0..=64 {
        let t = i as f64;
        if epsilon.eval(t) <= 0.0 {
            return Err(Error::BoundedInput { at: t });
        }
    }
    let at_zero = epsilon.eval(0.0);
    let constant = if at_zero.is_finite() { at_zero } else { 1.0 };
    Ok(Weight::Witness { epsilon: Box::new(epsilon.clone()), constant })
}
