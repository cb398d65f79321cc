//! Empirical searches around Orlicz-norm ratios and coercivity: lower bounds
//! for the half-measure norm ratio, support-line fits of norm against energy,
//! the quantitative subsolution bound and the witness-weight pipeline for
//! unbounded profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::orlicz::{self, DistributionFunction};
use crate::quad::QuadratureSpec;
use crate::radial::{self, RadialMeasure, RadialProfile};
use crate::verify::{label, CheckReport, CheckStatus, Meter};
use crate::weights::{self, Weight};

/// Parametrized profile families searched by the optimizers. Each parameter
/// ranges over `[lo, hi]`; scale-like parameters are searched in log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SearchFamily {
    /// `max(log|z|, -M)`.
    Trunc {
        #[serde(default = "default_m_lo")]
        lo: f64,
        #[serde(default = "default_m_hi")]
        hi: f64,
    },
    /// `-(-log|z|)^α`.
    Power {
        #[serde(default = "default_alpha_lo")]
        lo: f64,
        #[serde(default = "default_alpha_hi")]
        hi: f64,
    },
    /// `max(3 φ_1, j log|z|)` with `φ_1 = -log(1 - log|z|)`.
    Exhaust {
        #[serde(default = "default_j_lo")]
        lo: f64,
        #[serde(default = "default_j_hi")]
        hi: f64,
    },
    /// `max(-(-log|z|)^α, -M)`, two parameters `(α, M)`.
    TruncPower {
        #[serde(default = "default_alpha_lo")]
        alpha_lo: f64,
        #[serde(default = "default_alpha_hi")]
        alpha_hi: f64,
        #[serde(default = "default_m_lo")]
        m_lo: f64,
        #[serde(default = "default_m_hi")]
        m_hi: f64,
    },
    /// A single profile, no parameters.
    Fixed { profile: RadialProfile },
}

fn default_m_lo() -> f64 {
    0.05
}
fn default_m_hi() -> f64 {
    50.0
}
fn default_alpha_lo() -> f64 {
    0.05
}
fn default_alpha_hi() -> f64 {
    0.95
}
fn default_j_lo() -> f64 {
    1.0
}
fn default_j_hi() -> f64 {
    64.0
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn at(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if self.log {
            (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp()
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }
}

impl SearchFamily {
    fn axes(&self) -> Vec<Axis> {
        match *self {
            SearchFamily::Trunc { lo, hi } => vec![Axis { lo, hi, log: true }],
            SearchFamily::Power { lo, hi } => vec![Axis { lo, hi, log: false }],
            SearchFamily::Exhaust { lo, hi } => vec![Axis { lo, hi, log: true }],
            SearchFamily::TruncPower { alpha_lo, alpha_hi, m_lo, m_hi } => vec![
                Axis { lo: alpha_lo, hi: alpha_hi, log: false },
                Axis { lo: m_lo, hi: m_hi, log: true },
            ],
            SearchFamily::Fixed { .. } => vec![],
        }
    }

    pub fn dimension(&self) -> usize {
        self.axes().len()
    }

    pub fn validate(&self) -> Result<()> {
        for a in self.axes() {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo > 0.0 && a.lo <= a.hi) {
                return Err(Error::invalid(format!("family range [{}, {}] must satisfy 0 < lo <= hi", a.lo, a.hi)));
            }
        }
        match self {
            SearchFamily::Power { hi, .. } | SearchFamily::TruncPower { alpha_hi: hi, .. } if *hi >= 1.0 => {
                Err(Error::invalid("power exponents must stay below 1"))
            }
            SearchFamily::Exhaust { lo, .. } if *lo < 1.0 => Err(Error::invalid("exhaustion index must be >= 1")),
            SearchFamily::Fixed { profile } => profile.validate(),
            _ => Ok(()),
        }
    }

    /// Parameters at unit-cube coordinates `u`.
    fn parameters(&self, u: &[f64]) -> Vec<f64> {
        self.axes().iter().zip(u).map(|(a, &x)| a.at(x)).collect()
    }

    /// Family member at the given parameters.
    pub fn member(&self, params: &[f64]) -> Result<RadialProfile> {
        if params.len() != self.dimension() {
            return Err(Error::invalid(format!(
                "family takes {} parameters, got {}",
                self.dimension(),
                params.len()
            )));
        }
        let log = RadialProfile::Log;
        let g = match self {
            SearchFamily::Trunc { .. } => radial::family(radial::FamilyKind::Truncation { m: params[0] }, &log)?,
            SearchFamily::Power { .. } => radial::family(radial::FamilyKind::Power { alpha: params[0] }, &log)?,
            SearchFamily::Exhaust { .. } => {
                let base = RadialProfile::Scale { alpha: 3.0, inner: Box::new(RadialProfile::Iterlog { k: 1 }) };
                radial::family(radial::FamilyKind::Exhaustion { j: params[0] }, &base)?
            }
            SearchFamily::TruncPower { .. } => {
                let base = RadialProfile::Power { alpha: params[0] };
                radial::family(radial::FamilyKind::Truncation { m: params[1] }, &base)?
            }
            SearchFamily::Fixed { profile } => profile.clone(),
        };
        Ok(g)
    }
}

/// Order in which equally good seed points are preferred.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedOrder {
    #[default]
    Ascending,
    Descending,
}

impl std::str::FromStr for SeedOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascending" => Ok(SeedOrder::Ascending),
            "descending" => Ok(SeedOrder::Descending),
            _ => Err(Error::invalid(format!("unknown seed order {s:?} (ascending, descending)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSample {
    pub parameters: Vec<f64>,
    #[serde(with = "crate::jsonf64")]
    pub ratio: f64,
}

/// Best half-measure norm ratio found over a family. A lower bound on the
/// supremum over all finite-energy functions, relative to the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub measure: RadialMeasure,
    pub weight: Weight,
    pub family: SearchFamily,
    #[serde(with = "crate::jsonf64")]
    pub best_ratio: f64,
    pub best_parameters: Vec<f64>,
    pub evaluations: usize,
    /// Set when a ratio fell outside `(0, 1]` or an evaluation failed.
    pub unreliable: bool,
    pub failed_evaluations: usize,
    pub trace: Vec<KappaSample>,
}

enum Ratio {
    Value(f64),
    /// `‖φ‖_μ = 0`: the ratio is undefined.
    Vanishing,
    Infinite,
    Failed,
}

fn mixed(measure: &RadialMeasure, g: &RadialProfile) -> DistributionFunction {
    DistributionFunction::Mixed { measure: measure.clone(), profile: g.clone() }
}

/// `‖φ‖_{L_χ(μ)}`, `φ` radial with profile `g`.
pub fn measure_norm(measure: &RadialMeasure, g: &RadialProfile, w: &Weight, spec: &QuadratureSpec) -> Result<f64> {
    orlicz::luxembourg_norm(&mixed(measure, g), w, spec)
}

/// `‖φ‖_{L_χ(μ/2)} / ‖φ‖_{L_χ(μ)}`.
pub fn kappa_ratio(measure: &RadialMeasure, g: &RadialProfile, w: &Weight, spec: &QuadratureSpec) -> Result<f64> {
    let full = measure_norm(measure, g, w, spec)?;
    let half = measure_norm(&measure.scaled(0.5), g, w, spec)?;
    Ok(half / full)
}

fn ratio_at(measure: &RadialMeasure, family: &SearchFamily, params: &[f64], w: &Weight, spec: &QuadratureSpec) -> Ratio {
    let g = match family.member(params) {
        Ok(g) => g,
        Err(_) => return Ratio::Failed,
    };
    let full = match measure_norm(measure, &g, w, spec) {
        Ok(v) => v,
        Err(_) => return Ratio::Failed,
    };
    if full == 0.0 {
        return Ratio::Vanishing;
    }
    if full.is_infinite() {
        return Ratio::Infinite;
    }
    match measure_norm(&measure.scaled(0.5), &g, w, spec) {
        Ok(half) => Ratio::Value(half / full),
        Err(_) => Ratio::Failed,
    }
}

/// Unit-cube lattice with `k` points per axis, first axis slowest.
fn lattice(dim: usize, k: usize) -> Vec<Vec<f64>> {
    let coord = |i: usize| if k == 1 { 0.5 } else { i as f64 / (k - 1) as f64 };
    let mut points = vec![vec![]];
    for _ in 0..dim {
        points = points
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |i| {
                    let mut q = p.clone();
                    q.push(coord(i));
                    q
                })
            })
            .collect();
    }
    points
}

fn points_per_axis(dim: usize, count: usize) -> usize {
    if dim == 0 {
        return 1;
    }
    ((count.max(1) as f64).powf(1.0 / dim as f64).floor() as usize).max(2)
}

struct Search<'a> {
    measure: &'a RadialMeasure,
    family: &'a SearchFamily,
    w: &'a Weight,
    spec: &'a QuadratureSpec,
    trace: Vec<KappaSample>,
    infinite: Option<Vec<f64>>,
    failed: usize,
    best: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    fn record(&mut self, u: &[f64], r: Ratio) -> f64 {
        let params = self.family.parameters(u);
        let value = match r {
            Ratio::Value(v) => v,
            Ratio::Vanishing => f64::NAN,
            Ratio::Infinite => {
                self.infinite.get_or_insert_with(|| params.clone());
                f64::NAN
            }
            Ratio::Failed => {
                self.failed += 1;
                f64::NAN
            }
        };
        self.trace.push(KappaSample { parameters: params, ratio: value });
        if value.is_finite() && self.best.as_ref().is_none_or(|(b, _)| value > *b) {
            self.best = Some((value, u.to_vec()));
        }
        value
    }

    fn eval(&mut self, u: &[f64]) -> f64 {
        let r = ratio_at(self.measure, self.family, &self.family.parameters(u), self.w, self.spec);
        self.record(u, r)
    }
}

/// Maximizes the half-measure norm ratio over `family` within `budget`
/// ratio evaluations: a lattice scan using half the budget (evaluated
/// concurrently), then coordinate rounds of golden-section refinement
/// around the incumbent with shrinking windows.
pub fn kappa_lower_bound(
    measure: &RadialMeasure,
    w: &Weight,
    family: &SearchFamily,
    budget: usize,
    order: SeedOrder,
    spec: &QuadratureSpec,
) -> Result<KappaEstimate> {
    measure.validate()?;
    family.validate()?;
    if budget == 0 {
        return Err(Error::invalid("budget must be positive"));
    }
    let dim = family.dimension();
    let k = points_per_axis(dim, budget / 2);
    let mut seeds = lattice(dim, k);
    if dim > 0 && seeds.len() > budget {
        seeds.truncate(budget);
    }
    if order == SeedOrder::Descending {
        seeds.reverse();
    }
    let ratios: Vec<Ratio> = seeds
        .par_iter()
        .map(|u| ratio_at(measure, family, &family.parameters(u), w, spec))
        .collect();
    let mut search = Search { measure, family, w, spec, trace: vec![], infinite: None, failed: 0, best: None };
    for (u, r) in seeds.iter().zip(ratios) {
        search.record(u, r);
    }
    let mut remaining = budget.saturating_sub(seeds.len());
    let mut window = if k > 1 { 1.0 / (k - 1) as f64 } else { 0.5 };
    while dim > 0 && remaining >= 4 && search.best.is_some() && window > 1e-12 {
        for axis in 0..dim {
            let chunk = (remaining / dim).clamp(4, 24).min(remaining);
            if chunk < 4 {
                break;
            }
            let centre = search.best.as_ref().expect("incumbent").1.clone();
            let (a, b) = ((centre[axis] - window).max(0.0), (centre[axis] + window).min(1.0));
            let (_, _, used) = crate::search::golden_max(
                |x| {
                    let mut u = centre.clone();
                    u[axis] = x;
                    let v = search.eval(&u);
                    if v.is_finite() {
                        v
                    } else {
                        f64::NEG_INFINITY
                    }
                },
                a,
                b,
                1e-12,
                chunk,
            );
            remaining = remaining.saturating_sub(used);
        }
        window *= 0.5;
    }
    let Some((best_ratio, best_u)) = search.best.clone() else {
        return Err(match search.infinite {
            Some(parameters) => Error::NotInOrliczSpace { parameters },
            None => Error::invalid("every sampled family member has zero norm or failed to evaluate"),
        });
    };
    let out_of_range = search.trace.iter().any(|s| s.ratio.is_finite() && !(s.ratio > 0.0 && s.ratio <= 1.0 + 1e-12));
    Ok(KappaEstimate {
        measure: measure.clone(),
        weight: w.clone(),
        family: family.clone(),
        best_ratio,
        best_parameters: family.parameters(&best_u),
        evaluations: search.trace.len(),
        unreliable: out_of_range || search.failed > 0,
        failed_evaluations: search.failed,
        trace: search.trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivitySample {
    pub parameters: Vec<f64>,
    #[serde(with = "crate::jsonf64")]
    pub energy: f64,
    #[serde(with = "crate::jsonf64")]
    pub norm: f64,
}

/// Support line `‖φ‖_{L_χ(μ)} <= a E_χ(φ) + C` dominating every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityFit {
    pub slope: f64,
    pub intercept: f64,
    pub sample_count: usize,
    /// Smallest gap `a E + C - ‖φ‖` over the samples.
    pub residual: f64,
    /// Members skipped because their energy is infinite.
    pub skipped: usize,
    pub samples: Vec<CoercivitySample>,
}

impl CoercivityFit {
    /// Samples lying above the line beyond a relative `1e-12`.
    pub fn violations(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| {
                let line = self.slope * s.energy + self.intercept;
                s.norm > line + 1e-12 * line.abs().max(1.0)
            })
            .count()
    }
}

/// Least intercept first, then least slope for that intercept.
fn support_line(points: &[(f64, f64)]) -> (f64, f64) {
    let c = points.iter().filter(|(x, _)| *x == 0.0).map(|&(_, y)| y).fold(0.0, f64::max);
    let a = points
        .iter()
        .filter(|(x, _)| *x > 0.0)
        .map(|&(x, y)| (y - c) / x)
        .fold(0.0, f64::max);
    (a, c)
}

/// Samples `(E_χ(φ), ‖φ‖_{L_χ(μ)})` on a lattice of about `samples` family
/// members and fits the support line: least intercept, then least slope.
pub fn coercivity_fit(
    measure: &RadialMeasure,
    w: &Weight,
    n: u32,
    family: &SearchFamily,
    samples: usize,
    spec: &QuadratureSpec,
) -> Result<CoercivityFit> {
    measure.validate()?;
    family.validate()?;
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let dim = family.dimension();
    let mut points = lattice(dim, points_per_axis(dim, samples));
    points.truncate(samples.max(1));
    let evaluated: Vec<Result<Option<CoercivitySample>>> = points
        .par_iter()
        .map(|u| {
            let parameters = family.parameters(u);
            let g = family.member(&parameters)?;
            let energy = radial::energy(&g, w, n, spec)?;
            if !energy.is_finite() {
                return Ok(None);
            }
            let norm = measure_norm(measure, &g, w, spec)?;
            if !norm.is_finite() {
                return Err(Error::NotInOrliczSpace { parameters });
            }
            Ok(Some(CoercivitySample { parameters, energy, norm }))
        })
        .collect();
    let mut kept = vec![];
    let mut skipped = 0;
    for r in evaluated {
        match r? {
            Some(s) => kept.push(s),
            None => skipped += 1,
        }
    }
    let xy: Vec<(f64, f64)> = kept.iter().map(|s| (s.energy, s.norm)).collect();
    let (slope, intercept) = support_line(&xy);
    let residual = xy.iter().map(|&(x, y)| slope * x + intercept - y).fold(f64::INFINITY, f64::min);
    let fit = CoercivityFit { slope, intercept, sample_count: kept.len(), residual, skipped, samples: kept };
    if fit.violations() > 0 {
        return Err(Error::Contract("support line lies below a sample".into()));
    }
    Ok(fit)
}

/// `‖φ‖_{L_χ(MA(ψ))} <= max(a E_χ(φ), 2^{1+1/n} E_χ(ψ) a/(a-1))`, with the
/// norm computed from the joint radial level structure.
pub fn quantitative_bound_check(
    psi: &RadialProfile,
    phi: &RadialProfile,
    w: &Weight,
    n: u32,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<CheckReport> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::invalid(format!("coercivity slope must exceed 1, got {a}")));
    }
    let name = format!("quantitative_bound[{}|{}|{}|a={a}|n={n}]", label(psi), label(phi), label(w));
    let inputs = json!({"psi": psi, "phi": phi, "weight": w, "n": n, "a": a});
    let meter = Meter::new(spec);
    let e_phi = meter.energy(phi, w, n)?;
    let e_psi = meter.energy(psi, w, n)?;
    let measure = RadialMeasure::Ma { profile: Box::new(psi.clone()), n };
    let lhs = meter.norm(&mixed(&measure, phi), w)?;
    let rhs = (a * e_phi).max((1.0 + 1.0 / n as f64).exp2() * e_psi * a / (a - 1.0));
    let note = format!("E(phi) = {e_phi}; E(psi) = {e_psi}");
    Ok(if !(e_phi.is_finite() && e_psi.is_finite()) {
        CheckReport::unasserted(name, inputs, lhs, rhs, CheckStatus::Skipped, meter.diagnostics(format!("{note}; infinite energy")))
    } else {
        CheckReport::asserted(name, inputs, lhs, rhs, meter.diagnostics(note))
    })
}

/// Partial layer-cake integral for the witness weight at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProbe {
    pub lambda: f64,
    /// Level `T(λ)` by which every block past `⌈log2 λ⌉` contributing at
    /// least `h'(0)` forces the partial integral over the threshold.
    pub cutoff: f64,
    /// Lower Riemann sum of `∫_0^{t_end} (1/λ) h'(t/λ) ε(t) dt`.
    #[serde(with = "crate::jsonf64")]
    pub partial: f64,
    pub t_end: f64,
    pub exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEnergy {
    pub weight: Weight,
    #[serde(with = "crate::jsonf64")]
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BedfordReport {
    pub profile: RadialProfile,
    pub n: u32,
    pub bounded: bool,
    /// Energies under the sampled weights (bounded profiles).
    pub energies: Vec<WeightEnergy>,
    pub witness: Option<Weight>,
    pub probes: Vec<DivergenceProbe>,
    /// Bounded: every sampled energy is finite. Unbounded: every probe
    /// exceeded the threshold, so the profile has infinite witness energy.
    pub conclusive: bool,
}

pub const DIVERGENCE_THRESHOLD: f64 = 1e6;
pub const PROBE_SCALES: [f64; 3] = [1.0, 2.0, 4.0];
const RIEMANN_STEP: f64 = 1e-3;
const MAX_PROBE_BLOCKS: usize = 4096;

/// Lower Riemann sum of `∫ h'(u) ε(λ u) du` (the layer cake after `t = λu`)
/// over unit blocks of `u`, stopping once it exceeds the threshold.
fn probe(epsilon: &DistributionFunction, witness: &Weight, lambda: f64) -> DivergenceProbe {
    let first = lambda.log2().ceil().max(0.0);
    let floor = witness.derivative(0.0).max(f64::MIN_POSITIVE);
    let blocks = first + (DIVERGENCE_THRESHOLD / floor).ceil() + 1.0;
    let cutoff = lambda * blocks;
    let cells = (1.0 / RIEMANN_STEP).round() as usize;
    let mut partial = 0.0;
    let mut end = 0.0;
    let last = (blocks as usize).min(MAX_PROBE_BLOCKS);
    'blocks: for j in 0..last {
        for i in 0..cells {
            let u = j as f64 + i as f64 * RIEMANN_STEP;
            let next = j as f64 + (i + 1) as f64 * RIEMANN_STEP;
            // h' is nondecreasing inside a block and ε is nonincreasing.
            partial += RIEMANN_STEP * witness.derivative(u) * epsilon.eval(lambda * next);
            end = lambda * next;
            if partial > DIVERGENCE_THRESHOLD {
                break 'blocks;
            }
        }
    }
    DivergenceProbe { lambda, cutoff, partial, t_end: end, exceeded: partial > DIVERGENCE_THRESHOLD }
}

/// Bounded profiles: energies under four sampled weights. Unbounded
/// profiles: the witness weight built from `ε(t) = MA(ψ)({ψ < -t})` and
/// lower Riemann sums of its layer cake at `λ ∈ {1, 2, 4}`.
pub fn bedford_pipeline(g: &RadialProfile, n: u32, spec: &QuadratureSpec) -> Result<BedfordReport> {
    g.validate()?;
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if g.is_bounded() {
        let sampled = [
            weights::polynomial(1.0)?,
            weights::polynomial(2.0)?,
            weights::exponential(),
            weights::iterated_exponential(2)?,
        ];
        let energies = sampled
            .into_iter()
            .map(|w| Ok(WeightEnergy { energy: radial::energy(g, &w, n, spec)?, weight: w }))
            .collect::<Result<Vec<_>>>()?;
        let conclusive = energies.iter().all(|e| e.energy.is_finite());
        return Ok(BedfordReport { profile: g.clone(), n, bounded: true, energies, witness: None, probes: vec![], conclusive });
    }
    let epsilon = radial::ma_distribution(g, n);
    let witness = weights::witness_weight(&epsilon)?;
    let probes: Vec<DivergenceProbe> = PROBE_SCALES.iter().map(|&l| probe(&epsilon, &witness, l)).collect();
    let conclusive = probes.iter().all(|p| p.exceeded);
    Ok(BedfordReport { profile: g.clone(), n, bounded: false, energies: vec![], witness: Some(witness), probes, conclusive })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trunc(m: f64) -> RadialProfile {
        RadialProfile::Trunc { m, inner: Box::new(RadialProfile::Log) }
    }

    fn atom_measure() -> RadialMeasure {
        RadialMeasure::Ma { profile: Box::new(trunc(2.0)), n: 1 }
    }

    #[test]
    fn polynomial_ratio_is_constant() {
        let spec = QuadratureSpec::default();
        let w = weights::polynomial(2.0).unwrap();
        let fam = SearchFamily::Trunc { lo: 0.05, hi: 50.0 };
        let est = kappa_lower_bound(&atom_measure(), &w, &fam, 60, SeedOrder::Ascending, &spec).unwrap();
        let target = 0.5f64.sqrt();
        assert!((est.best_ratio - target).abs() < 1e-8);
        assert!(est.trace.iter().all(|s| (s.ratio - target).abs() < 1e-8));
        assert!(!est.unreliable);
        assert!(est.evaluations <= 60);
    }

    #[test]
    fn fixed_family_returns_its_point() {
        let spec = QuadratureSpec::default();
        let w = weights::exponential();
        let fam = SearchFamily::Fixed { profile: trunc(1.0) };
        let est = kappa_lower_bound(&atom_measure(), &w, &fam, 10, SeedOrder::Ascending, &spec).unwrap();
        assert_eq!(est.evaluations, 1);
        assert!(est.best_parameters.is_empty());
        // Atom of mass 1 at value 1: ratio h^{-1}(1) / h^{-1}(2).
        let exact = 2f64.ln() / 3f64.ln();
        assert!((est.best_ratio - exact).abs() < 1e-9, "{}", est.best_ratio);
    }

    #[test]
    fn zero_measure_has_no_ratio() {
        let spec = QuadratureSpec::default();
        let w = weights::polynomial(1.0).unwrap();
        let fam = SearchFamily::Trunc { lo: 1.0, hi: 2.0 };
        assert!(kappa_lower_bound(&RadialMeasure::Zero, &w, &fam, 8, SeedOrder::Ascending, &spec).is_err());
        let fit = coercivity_fit(&RadialMeasure::Zero, &w, 1, &fam, 5, &spec).unwrap();
        assert_eq!((fit.slope, fit.intercept), (0.0, 0.0));
    }

    #[test]
    fn support_line_prefers_small_intercept() {
        let (a, c) = support_line(&[(0.0, 1.0), (1.0, 2.0), (2.0, 2.5)]);
        assert_eq!((a, c), (1.0, 1.0));
        assert_eq!(support_line(&[]), (0.0, 0.0));
    }

    #[test]
    fn coercivity_on_atom_measure() {
        let spec = QuadratureSpec::default();
        let w = weights::polynomial(1.0).unwrap();
        let fam = SearchFamily::Trunc { lo: 0.5, hi: 8.0 };
        let fit = coercivity_fit(&atom_measure(), &w, 1, &fam, 9, &spec).unwrap();
        // E = M and the norm is min(M, 2): the line y = x dominates with equality.
        assert!((fit.slope - 1.0).abs() < 1e-9);
        assert_eq!(fit.intercept, 0.0);
        assert_eq!(fit.violations(), 0);
        assert!(fit.residual.abs() < 1e-9);
    }

    #[test]
    fn quantitative_bound_atom_case() {
        let spec = QuadratureSpec::default();
        let w = weights::polynomial(1.0).unwrap();
        let r = quantitative_bound_check(&trunc(2.0), &trunc(2.0), &w, 1, 2.0, &spec).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-9);
        assert!((r.rhs - 16.0).abs() < 1e-9);
        assert!(r.pass);
        let z = quantitative_bound_check(&trunc(2.0), &RadialProfile::Zero, &w, 1, 2.0, &spec).unwrap();
        assert_eq!(z.lhs, 0.0);
    }

    #[test]
    fn bedford_bounded_and_unbounded() {
        let spec = QuadratureSpec::default();
        let b = bedford_pipeline(&trunc(2.0), 1, &spec).unwrap();
        assert!(b.bounded && b.conclusive && b.energies.len() == 4);
        let u = bedford_pipeline(&RadialProfile::Iterlog { k: 1 }, 1, &spec).unwrap();
        assert!(!u.bounded && u.conclusive);
        assert!(u.probes[0].t_end <= 4.0, "{:?}", u.probes[0]);
    }
}
