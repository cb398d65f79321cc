//! Values checked against independent oracles: closed forms solved in the
//! test, Riemann sums and finite differences of the raw profile formulas.

use energylab::conjecture::{self, SearchFamily, SeedOrder};
use energylab::orlicz::{self, DistributionFunction};
use energylab::radial::{self, RadialMeasure, RadialProfile};
use energylab::verify;
use energylab::weights::{self, Weight};
use energylab::QuadratureSpec;

fn trunc(m: f64) -> RadialProfile {
    RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) }
}

fn poly(p: f64) -> Weight {
    weights::polynomial(p).unwrap()
}

fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, h: f64) -> f64 {
    let steps = ((b - a) / h).round() as usize;
    (0..steps).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Bisection for the largest `s` with `g(s) < -t`, from raw profile values.
fn level(g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let (mut lo, mut hi) = (-1e30, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < -t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn exponential_tail_against_riemann_sum() {
    let spec = QuadratureSpec::default();
    let f = DistributionFunction::Exponential { scale: 1.0, rate: 1.0 };
    let oracle = midpoint(|t: f64| (-t).exp(), 0.0, 40.0, 1e-4);
    let v = orlicz::layercake_integral(&f, &poly(1.0), 1.0, &spec).unwrap();
    assert!((v - oracle).abs() < 1e-6);
    let half = orlicz::layercake_integral(&f, &poly(1.0), 2.0, &spec).unwrap();
    assert!((half - 0.5).abs() < 1e-12);
    // p = 2: (∫ t² dμ / 2)^{1/2} = (Γ(3)/2)^{1/2} = 1.
    assert!((orlicz::luxembourg_norm(&f, &poly(2.0), &spec).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn atom_norms() {
    let spec = QuadratureSpec::default();
    let atom = DistributionFunction::Atom { mass: 1.0, value: 3.0 };
    assert!((orlicz::layercake_integral(&atom, &poly(2.0), 1.0, &spec).unwrap() - 4.5).abs() < 1e-12);
    let norm = orlicz::luxembourg_norm(&atom, &poly(2.0), &spec).unwrap();
    assert!((norm - 3.0 / 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(orlicz::luxembourg_norm(&DistributionFunction::Zero, &poly(2.0), &spec).unwrap(), 0.0);
}

#[test]
fn capacity_norm_of_truncated_log() {
    let spec = QuadratureSpec::default();
    let f = DistributionFunction::Power { scale: 1.0, exponent: 1.0, end: 2.0 };
    let wt = weights::tilde(&poly(1.0), 1).unwrap();
    let v = orlicz::choquet_norm(&f, &wt, &spec).unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-10);
    let doubled = orlicz::choquet_norm(&f.dilated(2.0), &wt, &spec).unwrap();
    assert!((doubled - 2.0 * v).abs() < 1e-9 * v);
}

/// Energy with `h(t) = t` is `∫_0^∞ F_MA(t) dt`; the oracle derives
/// `F_MA(t) = g'(s_t)^n` from raw values by bisection and central differences.
fn energy_oracle(g: &dyn Fn(f64) -> f64, n: i32, t_max: f64) -> f64 {
    midpoint(
        |t| {
            let s = level(g, t);
            let h = 1e-6 * s.abs().max(1.0);
            let d = (g(s + h) - g(s - h)) / (2.0 * h);
            d.powi(n)
        },
        0.0,
        t_max,
        2e-3,
    )
}

#[test]
fn radial_energies_against_raw_profiles() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    let iterlog = |s: f64| -(1.0 - s).ln();
    for n in 1..=2 {
        let e = radial::energy(&RadialProfile::Iterlog { k: 1 }, &w, n, &spec).unwrap();
        let oracle = energy_oracle(&iterlog, n as i32, 40.0);
        assert!((e - oracle).abs() < 1e-5, "n={n}: {e} vs {oracle}");
        // ∫_0^∞ e^{-nt} dt = 1/n.
        assert!((e - 1.0 / n as f64).abs() < 1e-10);
    }
    let exp2 = |s: f64| (2.0 * s).exp_m1();
    let e = radial::energy(&RadialProfile::Exp { rate: 2.0 }, &w, 1, &spec).unwrap();
    assert!((e - energy_oracle(&exp2, 1, 1.0)).abs() < 1e-5);
}

#[test]
fn scaling_examples() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    let r = verify::check_scaling(&trunc(2.0), &w, 1, 2.0, &spec).unwrap();
    assert!((r.lhs - 8.0).abs() < 1e-10 && (r.rhs - 8.0).abs() < 1e-10 && r.pass);
    let r = verify::check_scaling(&trunc(2.0), &w, 1, 1.0, &spec).unwrap();
    assert_eq!(r.margin, 0.0);
    let r = verify::check_scaling(&trunc(2.0), &w, 1, 0.5, &spec).unwrap();
    assert!((r.lhs - 0.5).abs() < 1e-10 && (r.rhs - 1.0).abs() < 1e-10);
}

#[test]
fn fundamental_and_characterization_examples() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    let r = verify::check_fundamental(&trunc(4.0), &trunc(2.0), &w, 1, &spec).unwrap();
    assert!((r.lhs - 2.0).abs() < 1e-10 && (r.rhs - 16.0).abs() < 1e-10);
    assert!(verify::check_fundamental(&trunc(2.0), &trunc(4.0), &w, 1, &spec).is_err());

    let reports = verify::check_cap_characterization(&RadialProfile::Exp { rate: 2.0 }, &w, 1, &spec).unwrap();
    let j = (2.0 * 2f64.ln()).sqrt();
    assert!((reports[0].lhs - j).abs() < 1e-9 && (reports[0].rhs - 2.0).abs() < 1e-9);
    assert!((reports[1].lhs - 1.0).abs() < 1e-9 && (reports[1].rhs - 2.0 * 2f64.ln()).abs() < 1e-8);
    let zero = verify::check_cap_characterization(&RadialProfile::Zero, &w, 1, &spec).unwrap();
    assert!(zero.iter().all(|r| r.pass && r.lhs == 0.0));
}

#[test]
fn decay_forward_on_phi1() {
    let spec = QuadratureSpec::default();
    let w = weights::exponential();
    let g = RadialProfile::Iterlog { k: 1 };
    let j = radial::j_energy(&g, &w, 1, &spec).unwrap();
    let wt = weights::tilde(&w, 1).unwrap();
    for s in [1.0f64, 2.0, 4.0, 8.0] {
        let cap = 1.0 / s.exp_m1();
        // h̃(x) = ∫_0^x t e^t dt = (x - 1) e^x + 1.
        let x = s / j;
        let tilde = (x - 1.0) * x.exp() + 1.0;
        assert!((wt.value(x) - tilde).abs() < 1e-9 * tilde.max(1.0));
        assert!(cap * tilde <= 1.0 + 1e-9, "s={s}");
    }
    let reports = verify::check_cap_decay(&g, &w, 1, &spec).unwrap();
    assert!(reports[0].pass);
}

#[test]
fn moser_trudinger_examples() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    // Vol/V1 = exp(-2n / Cap^{1/n}) with Cap = 1/2 at s_t = -2, n = 1.
    assert!(((-4f64).exp() - (-2.0 / 0.5f64).exp()).abs() < 1e-15);
    for beta in [1.0, 1.9] {
        let r = verify::check_moser_trudinger(&RadialProfile::Iterlog { k: 1 }, &w, 1, beta, &spec).unwrap();
        assert!(r.pass && r.lhs.is_finite(), "{r:?}");
    }
    let r = verify::check_moser_trudinger(&trunc(2.0), &w, 1, 1.0, &spec).unwrap();
    assert!(r.pass && r.lhs.is_finite());
    let r = verify::check_moser_trudinger(&RadialProfile::Iterlog { k: 1 }, &w, 1, 2.5, &spec).unwrap();
    assert_eq!(r.status, verify::CheckStatus::Reported);
}

#[test]
fn choquet_convexity_examples() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    let two = [trunc(2.0), trunc(2.0)];
    let r = verify::check_choquet_convexity(&two, &[0.5, 0.5], &[0.5, 0.5], &w, 1, &spec).unwrap();
    assert!(r.pass);
    let one = verify::check_choquet_convexity(&[trunc(2.0)], &[1.0], &[1.0], &w, 1, &spec).unwrap();
    assert!(one.pass && one.margin >= 0.0);
    assert!(verify::check_choquet_convexity(&two, &[0.75, 0.5], &[0.5, 0.5], &w, 1, &spec).is_err());
}

#[test]
fn cone_combination_of_equal_atoms() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    let r = verify::check_cone_combination(&vec![trunc(2.0); 8], 2.0, &w, 1, &spec).unwrap();
    // Σ_{j<=8} 4^{-j} max(s, -2) = c max(s, -2): an atom of mass c at value 2c.
    let c: f64 = (1..=8).map(|j| 0.25f64.powi(j)).sum();
    assert!((r.lhs - 2.0 * c * c).abs() < 1e-9, "{}", r.lhs);
    assert!((r.rhs - 16.0).abs() < 1e-9 && r.pass);
}

#[test]
fn extra_growth_blocks() {
    let spec = QuadratureSpec::default();
    let f = DistributionFunction::Exponential { scale: 1.0, rate: 1.0 };
    let eg = weights::extra_growth(&f, 2.0, &spec).unwrap();
    let ln2 = 2f64.ln();
    for (k, want) in [(1, 2.0 * ln2), (2, 4.0 * ln2), (3, 8.0 * ln2)] {
        assert!((eg.block_starts[k] - want).abs() < 1e-9, "N_{k} = {}", eg.block_starts[k]);
    }
    assert!(eg.weighted_integral <= 2.0 * eg.integral + 1e-9);
}

#[test]
fn witness_weight_values() {
    let eps = DistributionFunction::Exponential { scale: 1.0, rate: 1.0 };
    let w = weights::witness_weight(&eps).unwrap();
    assert!((w.derivative(3.0) / 24f64.exp() - 1.0).abs() < 1e-12);
    for j in 0..6 {
        let edge = j as f64 + 1.0;
        assert!(w.derivative(edge - 1e-9) <= w.derivative(edge));
    }
}

#[test]
fn quantitative_bound_on_smooth_pair() {
    let spec = QuadratureSpec::default();
    let w = poly(1.0);
    let psi = RadialProfile::Exp { rate: 2.0 };
    let phi = RadialProfile::Trunc { m: 1.0, inner: Box::new(RadialProfile::Log) };
    let r = conjecture::quantitative_bound_check(&psi, &phi, &w, 1, 1.5, &spec).unwrap();
    // μ_ψ({φ < -t}) = 2 e^{-2t}... only below the truncation: MA(ψ) of the ball
    // of radius e^{-t}, t < 1, is 2 e^{-2t}; so ‖φ‖ = ∫_0^1 2 e^{-2t} dt.
    let oracle = midpoint(|t: f64| 2.0 * (-2.0 * t).exp(), 0.0, 1.0, 1e-5);
    assert!((r.lhs - oracle).abs() < 1e-8, "{} vs {oracle}", r.lhs);
    // max(1.5 E(φ), 4 E(ψ) 1.5 / 0.5) = max(1.5, 12).
    assert!((r.rhs - 12.0).abs() < 1e-8 && r.pass);
}

#[test]
fn kappa_on_atom_is_inverse_ratio() {
    let spec = QuadratureSpec::default();
    let m = RadialMeasure::Step { at: -1.0, mass: 1.0 };
    let w = weights::exponential();
    let fam = SearchFamily::Trunc { lo: 0.5, hi: 4.0 };
    let est = conjecture::kappa_lower_bound(&m, &w, &fam, 30, SeedOrder::Descending, &spec).unwrap();
    // Single atom: λ = v / h^{-1}(1/mass), so the ratio is h^{-1}(1) / h^{-1}(2).
    let want = 2f64.ln() / 3f64.ln();
    assert!(est.trace.iter().all(|s| (s.ratio - want).abs() < 1e-9));
    assert!((est.best_ratio - want).abs() < 1e-9);
}

#[test]
fn coercivity_with_lebesgue_like_density() {
    let spec = QuadratureSpec::default();
    let m = RadialMeasure::Density { scale: 2.0, rate: 2.0 };
    let w = weights::exponential();
    let fam = SearchFamily::Power { lo: 0.2, hi: 0.8 };
    let fit = conjecture::coercivity_fit(&m, &w, 1, &fam, 6, &spec).unwrap();
    assert_eq!(fit.sample_count + fit.skipped, 6);
    assert!(fit.samples.iter().all(|s| s.norm.is_finite()));
    assert!(fit.slope.is_finite() && fit.violations() == 0);
}

#[test]
fn bedford_on_square_root_profile() {
    let spec = QuadratureSpec::default();
    let r = conjecture::bedford_pipeline(&RadialProfile::Power { alpha: 0.5 }, 1, &spec).unwrap();
    assert!(!r.bounded && r.conclusive);
    assert!(r.probes.iter().all(|p| p.t_end <= p.cutoff));
}
