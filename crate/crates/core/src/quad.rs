//! Adaptive Gauss-Kronrod quadrature on finite intervals, geometric blocks
//! towards an integrable endpoint singularity at zero, and doubling blocks
//! for the infinite tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits shared by every layer-cake integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of a single interval.
    pub max_depth: u32,
    /// Maximum number of geometric blocks used for a half-line tail or a
    /// neighbourhood of zero before the integral is declared divergent.
    pub max_blocks: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 60,
            max_blocks: 1000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.max_depth < 10 {
            return Err(Error::invalid("quadrature depth must be at least 10"));
        }
        if self.max_blocks < 8 {
            return Err(Error::invalid("quadrature block budget must be at least 8"));
        }
        Ok(())
    }
}

/// Result of a quadrature. `value` is `+inf` when the integral diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub divergence: Option<Divergence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// Non-integrable singularity at the left endpoint zero.
    AtZero,
    /// The tail integral does not settle.
    Tail,
    /// The integrand itself evaluated to `+inf`.
    Overflow,
}

impl Integral {
    fn zero() -> Self {
        Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            divergence: None,
        }
    }

    fn divergent(kind: Divergence, evaluations: usize) -> Self {
        Integral {
            value: f64::INFINITY,
            abs_error: f64::INFINITY,
            evaluations,
            divergence: Some(kind),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.divergence.is_none() && self.value.is_finite()
    }

    fn absorb(&mut self, other: Integral) {
        self.value += other.value;
        self.abs_error += other.abs_error;
        self.evaluations += other.evaluations;
        if self.divergence.is_none() {
            self.divergence = other.divergence;
        }
    }
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights, with the
// embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).abs())
}

/// Panel budget of one adaptive integration.
const MAX_PANELS: usize = 4096;

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// An integrand that evaluates to `+inf` makes the result `+inf` with an
/// overflow divergence flag; a NaN anywhere is a non-convergence error.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    if !(b > a) {
        return Ok(Integral::zero());
    }
    let (value, error) = gk15(f, a, b);
    let mut evaluations = 15;
    if value.is_infinite() && value > 0.0 {
        return Ok(Integral::divergent(Divergence::Overflow, evaluations));
    }
    if value.is_nan() {
        return Err(Error::NonConvergence { partial: f64::NAN, block: b - a });
    }
    let mut panels = vec![Panel { a, b, value, error, depth: 0 }];
    let mut total = value;
    let mut total_err = error;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        // Split the panel carrying the largest error estimate.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty panel list");
        let worst = panels.swap_remove(idx);
        if panels.len() >= MAX_PANELS {
            return Err(Error::NonConvergence { partial: total, block: worst.b - worst.a });
        }
        if worst.depth >= spec.max_depth {
            // Roundoff-level panels cannot be refined further; accept them if
            // their contribution is negligible at double precision.
            if worst.error <= 64.0 * f64::EPSILON * total.abs().max(worst.value.abs()) {
                panels.push(Panel { error: 0.0, ..worst });
                total_err = panels.iter().map(|p| p.error).sum();
                continue;
            }
            return Err(Error::NonConvergence {
                partial: total,
                block: worst.b - worst.a,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(f, worst.a, mid);
        let (rv, re) = gk15(f, mid, worst.b);
        evaluations += 30;
        if (lv + rv).is_infinite() && lv + rv > 0.0 {
            return Ok(Integral::divergent(Divergence::Overflow, evaluations));
        }
        if (lv + rv).is_nan() {
            return Err(Error::NonConvergence {
                partial: total,
                block: worst.b - worst.a,
            });
        }
        total += lv + rv - worst.value;
        panels.push(Panel { a: worst.a, b: mid, value: lv, error: le, depth: worst.depth + 1 });
        panels.push(Panel { a: mid, b: worst.b, value: rv, error: re, depth: worst.depth + 1 });
        total_err = panels.iter().map(|p| p.error).sum();
    }
    // Resum to limit drift from the incremental updates.
    let value: f64 = panels.iter().map(|p| p.value).sum();
    Ok(Integral {
        value,
        abs_error: total_err,
        evaluations,
        divergence: None,
    })
}

/// Tracks geometrically shrinking block contributions. A block is quiet when
/// it is smaller than its predecessor by a definite factor and the geometric
/// remainder it predicts is below tolerance; two quiet blocks in a row end
/// the sweep and the predicted remainder is added.
///
/// A zero block right after a growing one means the integrand left the
/// floating-point range (its factors under- or overflowed), and 64 blocks in
/// a row without geometric decay mean the sum does not settle; both mark the
/// sweep `collapsed` (divergent) instead of converged.
struct BlockSweep {
    previous: Option<f64>,
    quiet: u32,
    remainder: f64,
    growing: bool,
    collapsed: bool,
    /// Consecutive blocks that did not shrink by the quiet factor.
    stalled: u32,
}

/// Consecutive non-shrinking blocks after which a sweep is declared divergent.
const STALL_LIMIT: u32 = 64;

impl BlockSweep {
    fn new() -> Self {
        BlockSweep { previous: None, quiet: 0, remainder: 0.0, growing: false, collapsed: false, stalled: 0 }
    }

    fn done(&mut self, contribution: f64, running: f64, spec: &QuadratureSpec) -> bool {
        let c = contribution.abs();
        let prev = self.previous.replace(c);
        if c == 0.0 && self.growing && prev.is_some_and(|p| p > 0.0) {
            self.collapsed = true;
            return true;
        }
        if c == 0.0 && prev == Some(0.0) {
            self.remainder = 0.0;
            return true;
        }
        let ratio = match prev {
            Some(p) if p > 0.0 => c / p,
            _ => {
                self.quiet = 0;
                return false;
            }
        };
        self.growing = ratio >= 1.0;
        if ratio < 0.99 {
            self.stalled = 0;
        } else {
            self.stalled += 1;
            if self.stalled >= STALL_LIMIT {
                self.collapsed = true;
                return true;
            }
        }
        if ratio < 0.99 {
            let rem = c * ratio / (1.0 - ratio);
            if rem <= spec.rel_tol * running.abs() + f64::MIN_POSITIVE {
                self.quiet += 1;
                self.remainder = contribution.signum() * rem;
                return self.quiet >= 2;
            }
        }
        self.quiet = 0;
        false
    }
}

/// Integrates over `(0, b]` with dyadic blocks `[b/2^{k+1}, b/2^k]`, which
/// resolves integrable singularities at zero and detects non-integrable ones.
pub fn integrate_from_zero<F: Fn(f64) -> f64>(f: &F, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let mut acc = Integral::zero();
    if !(b > 0.0) {
        return Ok(acc);
    }
    let mut hi = b;
    let mut sweep = BlockSweep::new();
    for _ in 0..spec.max_blocks {
        let lo = 0.5 * hi;
        let block = match integrate(f, lo, hi, spec) {
            Ok(block) => block,
            // Blocks were already growing towards zero and the next one
            // no longer resolves: the singularity is not integrable.
            Err(Error::NonConvergence { .. }) if sweep.growing => {
                return Ok(Integral::divergent(Divergence::AtZero, acc.evaluations));
            }
            Err(e) => return Err(e),
        };
        let contribution = block.value;
        acc.absorb(block);
        if acc.divergence.is_some() || !acc.value.is_finite() {
            return Ok(Integral::divergent(Divergence::AtZero, acc.evaluations));
        }
        if sweep.done(contribution, acc.value, spec) {
            if sweep.collapsed {
                return Ok(Integral::divergent(Divergence::AtZero, acc.evaluations));
            }
            acc.value += sweep.remainder;
            return Ok(acc);
        }
        hi = lo;
        if hi < f64::MIN_POSITIVE {
            return Ok(acc);
        }
    }
    Ok(Integral::divergent(Divergence::AtZero, acc.evaluations))
}

/// Integrates over `[a, inf)` with blocks of doubling width, stopping once
/// the block contributions shrink geometrically below the tolerance.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: &F, a: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let mut acc = Integral::zero();
    let mut lo = a;
    let mut width = a.abs().max(1.0);
    let mut sweep = BlockSweep::new();
    for _ in 0..spec.max_blocks {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let block = match integrate(f, lo, hi, spec) {
            Ok(block) => block,
            Err(Error::NonConvergence { .. }) if sweep.growing => {
                return Ok(Integral::divergent(Divergence::Tail, acc.evaluations));
            }
            Err(e) => return Err(e),
        };
        let contribution = block.value;
        acc.absorb(block);
        if acc.divergence.is_some() || !acc.value.is_finite() {
            return Ok(Integral::divergent(Divergence::Tail, acc.evaluations));
        }
        if sweep.done(contribution, acc.value, spec) {
            if sweep.collapsed {
                return Ok(Integral::divergent(Divergence::Tail, acc.evaluations));
            }
            acc.value += sweep.remainder;
            return Ok(acc);
        }
        lo = hi;
        width *= 2.0;
    }
    Ok(Integral::divergent(Divergence::Tail, acc.evaluations))
}

/// Integral over `(0, end)` where `end` may be `+inf`, split at the given
/// interior breakpoints. `constant_on` may report pieces on which the
/// integral is known in closed form.
pub fn integrate_half_line<F, C>(
    f: &F,
    breakpoints: &[f64],
    end: f64,
    closed_form: C,
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
    C: Fn(f64, f64) -> Option<f64>,
{
    spec.validate()?;
    let mut points: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > 0.0 && p < end && p.is_finite())
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    if end.is_finite() {
        points.push(end);
    }
    let mut acc = Integral::zero();
    let mut lo = 0.0;
    for (i, &hi) in points.iter().enumerate() {
        let piece = match closed_form(lo, hi) {
            Some(v) => exact(v),
            None if i == 0 => integrate_from_zero(f, hi, spec)?,
            None => integrate(f, lo, hi, spec)?,
        };
        acc.absorb(piece);
        if acc.divergence.is_some() {
            return Ok(acc_divergent(acc));
        }
        lo = hi;
    }
    if end.is_infinite() {
        let piece = match closed_form(lo, f64::INFINITY) {
            Some(v) => exact(v),
            None if points.is_empty() => {
                let mut head = integrate_from_zero(f, 1.0, spec)?;
                if head.divergence.is_none() {
                    head.absorb(integrate_tail(f, 1.0, spec)?);
                }
                head
            }
            None => integrate_tail(f, lo, spec)?,
        };
        acc.absorb(piece);
    }
    Ok(acc_divergent(acc))
}

fn exact(v: f64) -> Integral {
    if v.is_infinite() && v > 0.0 {
        Integral::divergent(Divergence::Tail, 0)
    } else {
        Integral {
            value: v,
            abs_error: 0.0,
            evaluations: 0,
            divergence: None,
        }
    }
}

fn acc_divergent(acc: Integral) -> Integral {
    match acc.divergence {
        Some(kind) => Integral::divergent(kind, acc.evaluations),
        None => acc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(&|x: f64| x * x * x - 2.0 * x, 0.0, 3.0, &spec()).unwrap();
        assert!((r.value - (81.0 / 4.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_tail(&|x: f64| (-x).exp(), 0.0, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn inverse_sqrt_singularity_at_zero() {
        let r = integrate_from_zero(&|x: f64| 1.0 / x.sqrt(), 1.0, &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn log_divergence_at_zero_is_flagged() {
        let r = integrate_from_zero(&|x: f64| 1.0 / x, 1.0, &spec()).unwrap();
        assert_eq!(r.divergence, Some(Divergence::AtZero));
        assert!(r.value.is_infinite());
    }

    #[test]
    fn growing_tail_is_flagged() {
        let r = integrate_tail(&|x: f64| x.exp(), 0.0, &spec()).unwrap();
        assert_eq!(r.divergence, Some(Divergence::Tail));
    }

    #[test]
    fn flat_tail_is_divergent() {
        let r = integrate_tail(&|_x: f64| 1e-3, 0.0, &spec()).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn half_line_with_jump() {
        // Indicator of [0, 2) times e^{-t}.
        let f = |t: f64| if t < 2.0 { (-t).exp() } else { 0.0 };
        let r = integrate_half_line(&f, &[2.0], 2.0, |_, _| None, &spec()).unwrap();
        assert!((r.value - (1.0 - (-2.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_spec() {
        let bad = QuadratureSpec { max_depth: 3, ..QuadratureSpec::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec { rel_tol: 0.0, ..QuadratureSpec::default() };
        assert!(bad.validate().is_err());
    }
}
