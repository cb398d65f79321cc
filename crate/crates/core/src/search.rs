//! Monotone bisection and derivative-free one-dimensional maximization.

use crate::error::{Error, Result};

/// Locates the boundary of a monotone predicate: given `pred(lo) == true` and
/// `pred(hi) == false`, returns `(lo', hi')` with the same property and
/// `hi' - lo' <= rel * max(|lo'|, |hi'|, floor)`.
pub fn bisect_boundary<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, rel: f64, floor: f64) -> (f64, f64) {
    for _ in 0..2000 {
        let width = (hi - lo).abs();
        let scale = lo.abs().max(hi.abs()).max(floor);
        if width <= rel * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max, evaluations)`; at most `budget` evaluations are spent.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, budget: usize) -> (f64, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a.min(b), a.max(b));
    if budget < 2 || b - a <= tol {
        let x = 0.5 * (a + b);
        return (x, f(x), 1);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut used = 2;
    while b - a > tol && used < budget {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        used += 1;
    }
    if fc >= fd {
        (c, fc, used)
    } else {
        (d, fd, used)
    }
}

/// Maximizes a concave function on `[0, inf)` by bracket doubling from
/// `[0, 1]` followed by ternary search. Fails if the bracket has to double
/// more than `max_doublings` times.
pub fn concave_sup_on_half_line<F: Fn(f64) -> f64>(f: F, max_doublings: u32) -> Result<(f64, f64)> {
    let mut b = 1.0;
    let mut doublings = 0;
    while f(2.0 * b) > f(b) {
        b *= 2.0;
        doublings += 1;
        if doublings > max_doublings {
            return Err(Error::BracketEscaped { doublings });
        }
    }
    let (mut lo, mut hi) = (0.0, 2.0 * b);
    for _ in 0..400 {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x = 0.5 * (lo + hi);
    // Concave maps attain their sup on the bracket; guard against the
    // endpoint zero being the maximizer.
    let (fx, f0) = (f(x), f(0.0));
    Ok(if f0 > fx { (0.0, f0) } else { (x, fx) })
}
