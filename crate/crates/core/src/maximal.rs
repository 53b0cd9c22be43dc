//! γ-box maximal functions, the weighted sum `M_q`, the restricted
//! non-tangential maximal function, the radial maximal function and
//! empirical weak-(1,1) level-set measurements.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, BoxIndex, DyadicPartition, GammaBox, PolyPoint, StolzCone, TorusGrid, TorusPoint};
use crate::kernel::Params;
use crate::poisson::{poisson_of_measure, AtomicMeasure, Extension, GridFunction};

/// Value reported when an atom sits at the centre and the supremum is infinite.
pub const CENTER_CAP: f64 = 1e15;

/// Default per-axis truncation of the γ sum in `M_q`.
pub const GAMMA_CAP: u32 = 12;

/// Radii of non-tangential samples never exceed `1 - NT_CLAMP`.
pub const NT_CLAMP: f64 = 1e-10;

/// Scales over which the box supremum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleGrid {
    /// Every scale at which an atom enters the box; exact for atomic measures.
    Exact,
    /// `s_max · 2^{-k}` for `k = 0..=levels`.
    Dyadic(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalOptions {
    pub center_cap: f64,
    pub gamma_cap: u32,
    pub scales: ScaleGrid,
}

impl Default for MaximalOptions {
    fn default() -> Self {
        Self {
            center_cap: CENTER_CAP,
            gamma_cap: GAMMA_CAP,
            scales: ScaleGrid::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalValue {
    pub value: f64,
    /// An atom coincides with the centre; `value` is the cap.
    pub capped: bool,
}

/// `M_q μ(ζ)` truncated at `max γ ≤ cap` after folding the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MqValue {
    pub value: f64,
    /// Upper bound for the omitted terms; infinite when an atom shares a
    /// coordinate with the centre.
    pub tail_bound: f64,
    pub capped: bool,
}

fn box_measure_at(gamma: &[u32], s: f64) -> f64 {
    gamma
        .iter()
        .map(|&g| (s * 2f64.powi(g as i32) / (2.0 * PI)).min(1.0))
        .product()
}

/// Smallest scale beyond which the atom at offsets `delta` lies in the box.
fn entry_scale(gamma: &[u32], delta: &[f64]) -> f64 {
    gamma
        .iter()
        .zip(delta)
        .map(|(&g, d)| 2.0 * d.abs() * 0.5f64.powi(g as i32))
        .fold(0.0, f64::max)
}

fn offsets(center: &TorusPoint, p: &TorusPoint) -> Vec<f64> {
    p.angles()
        .iter()
        .zip(center.angles())
        .map(|(a, c)| wrap_angle(a - c))
        .collect()
}

/// `M_γ μ(ζ) = sup |μ|(Q) / m_n(Q)` over γ-boxes centred at `center`.
pub fn m_gamma(
    mu: &AtomicMeasure,
    gamma: &[u32],
    center: &TorusPoint,
    opts: &MaximalOptions,
) -> Result<MaximalValue> {
    m_gamma_upto(mu, gamma, center, GammaBox::max_scale(gamma), opts)
}

/// `M_γ` with the supremum restricted to scales `s ≤ limit`.
pub fn m_gamma_upto(
    mu: &AtomicMeasure,
    gamma: &[u32],
    center: &TorusPoint,
    limit: f64,
    opts: &MaximalOptions,
) -> Result<MaximalValue> {
    if gamma.len() != mu.dim() || center.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: gamma.len().min(center.dim()),
        });
    }
    let smax = GammaBox::max_scale(gamma).min(limit);
    match opts.scales {
        ScaleGrid::Dyadic(levels) => {
            let scales: Vec<f64> = (0..=levels).map(|k| smax * 0.5f64.powi(k as i32)).collect();
            Ok(MaximalValue {
                value: ratio_on_scales(mu, gamma, center, &scales),
                capped: false,
            })
        }
        ScaleGrid::Exact => {
            let mut entries: Vec<(f64, f64)> = Vec::with_capacity(mu.len());
            for (p, w) in mu.atoms() {
                let mass = w.norm();
                if mass == 0.0 {
                    continue;
                }
                let t = entry_scale(gamma, &offsets(center, p));
                if t == 0.0 {
                    return Ok(MaximalValue {
                        value: opts.center_cap,
                        capped: true,
                    });
                }
                if t < smax {
                    entries.push((t, mass));
                }
            }
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut best = ratio_on_scales(mu, gamma, center, &[smax]);
            let mut acc = 0.0;
            for (k, &(t, mass)) in entries.iter().enumerate() {
                acc += mass;
                let last_of_group = entries.get(k + 1).is_none_or(|e| e.0 != t);
                if last_of_group {
                    best = best.max(acc / box_measure_at(gamma, t));
                }
            }
            Ok(MaximalValue {
                value: best,
                capped: false,
            })
        }
    }
}

/// `max_s |μ|(Q_s) / m_n(Q_s)` over the listed scales, each clipped to `s_max`.
pub fn ratio_on_scales(mu: &AtomicMeasure, gamma: &[u32], center: &TorusPoint, scales: &[f64]) -> f64 {
    let smax = GammaBox::max_scale(gamma);
    scales
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| {
            let b = GammaBox {
                gamma: gamma.to_vec(),
                center: center.clone(),
                scale: s.min(smax),
            };
            let mass: f64 = mu
                .atoms()
                .iter()
                .filter(|(p, _)| b.contains(p))
                .map(|(_, w)| w.norm())
                .sum();
            mass / b.measure()
        })
        .fold(0.0, f64::max)
}

/// Multi-indices with `min γ = 0` and `max γ ≤ cap`, in lexicographic order.
fn reduced_gammas(n: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|g: Vec<u32>| {
                (0..=cap).map(move |v| {
                    let mut h = g.clone();
                    h.push(v);
                    h
                })
            })
            .collect();
    }
    out.retain(|g| g.contains(&0));
    out
}

/// `M_q μ(ζ) = Σ_γ q^{|γ|} M_γ μ(ζ)`.
///
/// Boxes of type `γ + c𝟏` are boxes of type `γ`, so the diagonal sums to
/// `(1 - qⁿ)^{-1}` exactly; the remaining sum over `min γ = 0` is cut at
/// `max γ ≤ gamma_cap`.
pub fn m_q(mu: &AtomicMeasure, q: f64, center: &TorusPoint, opts: &MaximalOptions) -> Result<MqValue> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("q = {q} outside (0, 1)")));
    }
    let n = mu.dim();
    let fold = 1.0 / (1.0 - q.powi(n as i32));
    let mut sum = 0.0;
    let mut capped = false;
    for g in reduced_gammas(n, opts.gamma_cap) {
        let m = m_gamma(mu, &g, center, opts)?;
        capped |= m.capped;
        let weight = q.powi(g.iter().sum::<u32>() as i32);
        sum += weight * m.value;
    }
    Ok(MqValue {
        value: fold * sum,
        tail_bound: fold * tail_bound(mu, q, center, opts.gamma_cap),
        capped,
    })
}

fn tail_bound(mu: &AtomicMeasure, q: f64, center: &TorusPoint, cap: u32) -> f64 {
    let n = mu.dim();
    if n == 1 {
        return 0.0;
    }
    let x = q / 2.0;
    let full = (1.0 / (1.0 - x)).powi(n as i32 - 1);
    let head = ((1.0 - x.powi(cap as i32 + 1)) / (1.0 - x)).powi(n as i32 - 1);
    let norm = mu.total_variation();
    if norm == 0.0 {
        return 0.0;
    }
    let mut bound = 0.0;
    for j in 0..n {
        let d = mu
            .atoms()
            .iter()
            .filter(|(_, w)| w.norm() > 0.0)
            .map(|(p, _)| wrap_angle(p.angles()[j] - center.angles()[j]).abs())
            .fold(f64::INFINITY, f64::min);
        if d == 0.0 {
            return f64::INFINITY;
        }
        bound += (PI / d).powi(n as i32);
    }
    norm * bound * (full - head)
}

/// Deterministic Halton point with the first `dims` prime bases.
pub fn halton(index: u64, dims: usize) -> Vec<f64> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    PRIMES[..dims]
        .iter()
        .map(|&b| {
            let (mut i, mut f, mut x) = (index, 1.0, 0.0);
            while i > 0 {
                f /= b as f64;
                x += f * (i % b) as f64;
                i /= b;
            }
            x
        })
        .collect()
}

/// Sample point `index` of the restricted cone: log-uniform depth in
/// `[NT_CLAMP, 1]`, per-axis gaps within a factor `B`, offsets `c_j ∈ [-1, 1]`.
pub fn cone_sample(cone: &StolzCone, index: u64) -> Result<PolyPoint> {
    let n = cone.dim();
    let b = cone
        .restriction
        .ok_or_else(|| Error::InvalidArgument("non-tangential sampling needs a finite B".into()))?;
    let h = halton(index, 2 * n + 1);
    let depth = NT_CLAMP.powf(h[0]);
    let gaps: Vec<f64> = (0..n)
        .map(|j| (depth * b.powf(-h[1 + j])).clamp(NT_CLAMP, 1.0))
        .collect();
    let angles = (0..n)
        .map(|j| cone.vertex.angles()[j] + (2.0 * h[1 + n + j] - 1.0) * cone.aperture * gaps[j])
        .collect();
    PolyPoint::new(gaps.iter().map(|g| 1.0 - g).collect(), angles)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtMaximal {
    /// A lower bound for the supremum over the cone.
    pub value: f64,
    pub witness: PolyPoint,
    pub samples: usize,
}

/// `sup |P_{α,β}[dμ](z)|` over a Halton sample of `S_{A,B}(vertex)`.
pub fn nt_maximal(params: &Params, mu: &AtomicMeasure, cone: &StolzCone, budget: usize) -> Result<NtMaximal> {
    if budget == 0 {
        return Err(Error::InvalidArgument("sample budget must be positive".into()));
    }
    let values: Vec<(f64, PolyPoint)> = (1..=budget as u64)
        .into_par_iter()
        .map(|i| {
            let z = cone_sample(cone, i)?;
            Ok((poisson_of_measure(params, mu, &z)?.norm(), z))
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, PolyPoint::origin(cone.dim()));
    for (v, z) in values {
        if v > best.0 {
            best = (v, z);
        }
    }
    Ok(NtMaximal {
        value: best.0,
        witness: best.1,
        samples: budget,
    })
}

/// `M⁺u(ζ) = max_r |u(r ζ)|` over the ladder, at every node of `centers`.
pub fn radial_maximal(source: &dyn Extension, centers: &TorusGrid, ladder: &[f64]) -> Result<GridFunction> {
    let n = centers.dim();
    let values = (0..centers.len())
        .into_par_iter()
        .map(|flat| {
            let zeta = centers.node(flat);
            let mut best = 0.0f64;
            for &r in ladder {
                let z = PolyPoint::dilate(&vec![r; n], &zeta)?;
                best = best.max(source.eval(&z)?.norm());
            }
            Ok(Complex64::new(best, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(centers.clone(), values)
}

/// Which maximal function a weak-(1,1) experiment measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalKind {
    Gamma(Vec<u32>),
    Q(f64),
    NonTangential {
        params: Params,
        aperture: f64,
        restriction: f64,
        budget: usize,
        /// Constant `C` of the bound `C ‖μ‖ / λ`.
        constant: f64,
    },
}

impl MaximalKind {
    pub fn label(&self) -> String {
        match self {
            MaximalKind::Gamma(g) => format!("gamma{g:?}"),
            MaximalKind::Q(q) => format!("q={q}"),
            MaximalKind::NonTangential { aperture, restriction, .. } => {
                format!("nt(A={aperture},B={restriction})")
            }
        }
    }

    /// Right-hand side of the weak-(1,1) estimate for `‖μ‖ = 1`, `λ = 1`.
    pub fn bound_constant(&self, n: usize) -> f64 {
        let three = 3f64.powi(n as i32);
        match self {
            MaximalKind::Gamma(_) => three,
            MaximalKind::Q(q) => three / (1.0 - q.sqrt()).powi(2 * n as i32),
            MaximalKind::NonTangential { constant, .. } => *constant,
        }
    }
}

/// The maximal function of `mu` at every node of `grid`.
pub fn maximal_on_grid(
    kind: &MaximalKind,
    mu: &AtomicMeasure,
    grid: &TorusGrid,
    opts: &MaximalOptions,
) -> Result<Vec<f64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let c = grid.node(flat);
            match kind {
                MaximalKind::Gamma(g) => m_gamma(mu, g, &c, opts).map(|m| m.value),
                MaximalKind::Q(q) => m_q(mu, *q, &c, opts).map(|m| m.value),
                MaximalKind::NonTangential {
                    params,
                    aperture,
                    restriction,
                    budget,
                    ..
                } => {
                    let cone = StolzCone::new(c, *aperture, Some(*restriction))?;
                    nt_maximal(params, mu, &cone, *budget).map(|m| m.value)
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub lambda: f64,
    pub center: TorusPoint,
}

/// Level-set measures of one maximal function of one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalReport {
    pub kind: String,
    pub total_variation: f64,
    pub lambdas: Vec<f64>,
    pub measures: Vec<f64>,
    pub bounds: Vec<f64>,
    /// Centres in the level set of every violated λ.
    pub witnesses: Vec<Witness>,
}

impl MaximalReport {
    pub fn violations(&self) -> usize {
        self.measures.iter().zip(&self.bounds).filter(|(m, b)| m > b).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,measured,bound\n");
        for ((l, m), b) in self.lambdas.iter().zip(&self.measures).zip(&self.bounds) {
            out.push_str(&format!("{l:?},{m:?},{b:?}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Fraction of grid values strictly above each λ.
pub fn level_set_fractions(values: &[f64], lambdas: &[f64]) -> Vec<f64> {
    lambdas
        .iter()
        .map(|&l| values.iter().filter(|&&v| v > l).count() as f64 / values.len() as f64)
        .collect()
}

/// Level sets of `kind` for `mu` on the centre grid against the bound curve.
pub fn level_set_report(
    kind: &MaximalKind,
    mu: &AtomicMeasure,
    lambdas: &[f64],
    grid: &TorusGrid,
    opts: &MaximalOptions,
) -> Result<MaximalReport> {
    let values = maximal_on_grid(kind, mu, grid, opts)?;
    let norm = mu.total_variation();
    let c = kind.bound_constant(mu.dim());
    let measures = level_set_fractions(&values, lambdas);
    let bounds: Vec<f64> = lambdas.iter().map(|l| c * norm / l).collect();
    let mut witnesses = vec![];
    for (k, &l) in lambdas.iter().enumerate() {
        if measures[k] > bounds[k] {
            for (flat, &v) in values.iter().enumerate() {
                if v > l {
                    witnesses.push(Witness {
                        lambda: l,
                        center: grid.node(flat),
                    });
                }
            }
        }
    }
    Ok(MaximalReport {
        kind: kind.label(),
        total_variation: norm,
        lambdas: lambdas.to_vec(),
        measures,
        bounds,
        witnesses,
    })
}

/// Reports for a batch of measures; fails listing every violation.
pub fn weak11_experiment(
    kind: &MaximalKind,
    measures: &[AtomicMeasure],
    lambdas: &[f64],
    grid: &TorusGrid,
    opts: &MaximalOptions,
) -> Result<Vec<MaximalReport>> {
    if measures.is_empty() {
        return Err(Error::InvalidArgument("weak (1,1) experiment needs a measure".into()));
    }
    let reports = measures
        .iter()
        .map(|mu| level_set_report(kind, mu, lambdas, grid, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut failures = vec![];
    for (trial, rep) in reports.iter().enumerate() {
        for w in &rep.witnesses {
            failures.push(format!("trial {trial}, lambda {}, centre {:?}", w.lambda, w.center.angles()));
        }
    }
    if failures.is_empty() {
        Ok(reports)
    } else {
        Err(Error::BoundViolated(failures.join("; ")))
    }
}

/// Exact `m_1({M_0 μ > λ})` for an atomic measure on the circle.
pub fn level_set_measure_1d(mu: &AtomicMeasure, lambda: f64) -> Result<f64> {
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: mu.dim(),
        });
    }
    let atoms: Vec<(f64, f64)> = mu
        .atoms()
        .iter()
        .filter(|(_, w)| w.norm() > 0.0)
        .map(|(p, w)| (p.angles()[0], w.norm()))
        .collect();
    if atoms.is_empty() {
        return Ok(0.0);
    }
    if mu.total_variation() > lambda {
        return Ok(1.0);
    }
    // work in turns so that arc lengths of dyadic-friendly data stay exact
    let turn = |x: f64| x - x.round();
    let atoms: Vec<(f64, f64)> = atoms.iter().map(|&(a, m)| (turn(a / (2.0 * PI)), m)).collect();
    // distances to every atom are linear between these points
    let mut cuts = vec![-0.5];
    for &(a, _) in &atoms {
        cuts.push(a);
        cuts.push(turn(a + 0.5));
        for &(b, _) in &atoms {
            let mid = 0.5 * (a + b);
            cuts.push(turn(mid));
            cuts.push(turn(mid + 0.5));
        }
    }
    for c in cuts.iter_mut() {
        if *c >= 0.5 {
            *c -= 1.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(0.5);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let dist: Vec<f64> = atoms.iter().map(|(a, _)| turn(mid - a).abs()).collect();
        let (mut prefix, mut suffix) = (0.0f64, 0.0f64);
        for (k, &(a, _)) in atoms.iter().enumerate() {
            let mass: f64 = atoms
                .iter()
                .zip(&dist)
                .filter(|(_, &d)| d <= dist[k])
                .map(|((_, m), _)| m)
                .sum();
            let reach = 0.5 * mass / lambda;
            // d_k grows away from the nearer endpoint; the level set is d_k < reach
            if turn(mid - a) >= 0.0 {
                prefix = prefix.max((reach - turn(lo - a).abs()).clamp(0.0, hi - lo));
            } else {
                suffix = suffix.max((reach - turn(hi - a).abs()).clamp(0.0, hi - lo));
            }
        }
        total += (prefix + suffix).min(hi - lo);
    }
    Ok(total)
}

/// Outcome of the partition bound `|μ|(Q(ε,j)) ≤ (2B)^{n-1} 2^{Σj} Π (1-r_k)κ_k/π · M_j μ(vertex)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub boxes: usize,
    pub occupied: usize,
    /// Largest left/right ratio over occupied boxes with `max j ≤ p_min`.
    pub worst_ratio: f64,
    pub violations: Vec<BoxIndex>,
    /// Boxes with `max j > p_min`, where no admissible `j`-box encloses
    /// `R(j)`, that exceed the bound.
    pub unenclosed: Vec<(BoxIndex, f64)>,
}

pub fn partition_bound_check(
    mu: &AtomicMeasure,
    rvec: &[f64],
    bound: f64,
    vertex: &TorusPoint,
    opts: &MaximalOptions,
) -> Result<PartitionCheck> {
    let part = DyadicPartition::build_at(rvec, bound, vertex.clone())?;
    let n = part.dim();
    let mut mass: HashMap<BoxIndex, f64> = HashMap::new();
    for (p, w) in mu.atoms() {
        *mass.entry(part.locate(p)).or_insert(0.0) += w.norm();
    }
    let mut occupied: Vec<(BoxIndex, f64)> = mass.into_iter().filter(|(_, m)| *m > 0.0).collect();
    occupied.sort_by(|a, b| a.0.cmp(&b.0));
    let lead = (2.0 * bound).powi(n as i32 - 1);
    let pmin = part.axes.iter().map(|a| a.p).min().unwrap_or(0);
    let mut worst = 0.0f64;
    let mut violations = vec![];
    let mut unenclosed = vec![];
    for (idx, m) in &occupied {
        let mj = m_gamma(mu, &idx.j, vertex, opts)?;
        let size: f64 = part
            .axes
            .iter()
            .zip(&idx.j)
            .map(|(a, &j)| 2f64.powi(j as i32) * (1.0 - a.rho) * a.kappa / PI)
            .product();
        let ratio = m / (lead * size * mj.value);
        if idx.j.iter().copied().max().unwrap_or(0) > pmin {
            if ratio > 1.0 + 1e-12 {
                unenclosed.push((idx.clone(), ratio));
            }
            continue;
        }
        worst = worst.max(ratio);
        if ratio > 1.0 + 1e-12 {
            violations.push(idx.clone());
        }
    }
    Ok(PartitionCheck {
        boxes: part.box_count(),
        occupied: occupied.len(),
        worst_ratio: worst,
        violations,
        unenclosed,
    })
}

/// Random atomic measure: uniform angles, weights of modulus in `[0.1, 1]`
/// with uniform phase.
pub fn random_measure<R: Rng>(rng: &mut R, dim: usize, atoms: usize) -> AtomicMeasure {
    let pts = (0..atoms)
        .map(|_| {
            let p = TorusPoint::new((0..dim).map(|_| rng.gen_range(-PI..PI)).collect());
            let w = Complex64::from_polar(rng.gen_range(0.1..=1.0), rng.gen_range(-PI..PI));
            (p, w)
        })
        .collect();
    AtomicMeasure::new(dim, pts).expect("dimensions agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(a: &[f64]) -> TorusPoint {
        TorusPoint::new(a.to_vec())
    }

    #[test]
    fn delta_on_circle_is_pi_over_distance() {
        let mu = AtomicMeasure::dirac(pt(&[0.0]));
        let opts = MaximalOptions::default();
        for &t in &[0.3, -1.1, 2.5, -PI] {
            let m = m_gamma(&mu, &[0], &pt(&[t]), &opts).unwrap();
            assert!((m.value - PI / t.abs()).abs() < 1e-12 * m.value, "{t}: {}", m.value);
        }
        let hit = m_gamma(&mu, &[0], &pt(&[0.0]), &opts).unwrap();
        assert!(hit.capped && hit.value == CENTER_CAP);
    }

    #[test]
    fn exact_sup_dominates_scale_lists() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let opts = MaximalOptions::default();
        for _ in 0..20 {
            let mu = random_measure(&mut rng, 2, 6);
            let c = pt(&[rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]);
            let g = [rng.gen_range(0..3), rng.gen_range(0..3)];
            let exact = m_gamma(&mu, &g, &c, &opts).unwrap().value;
            let smax = GammaBox::max_scale(&g);
            let fine: Vec<f64> = (1..=4000).map(|k| smax * k as f64 / 4000.0).collect();
            let listed = ratio_on_scales(&mu, &g, &c, &fine);
            assert!(listed <= exact * (1.0 + 1e-12));
            // just past each entry scale the listed ratio approaches the sup
            let mut near: Vec<f64> = mu
                .atoms()
                .iter()
                .map(|(p, _)| entry_scale(&g, &offsets(&c, p)) * (1.0 + 1e-9))
                .collect();
            near.push(smax);
            let approx = ratio_on_scales(&mu, &g, &c, &near);
            assert!((approx - exact).abs() <= 1e-6 * exact, "{approx} vs {exact}");
        }
    }

    #[test]
    fn uniform_atoms_give_unit_ratio() {
        let grid = TorusGrid::uniform(2, 64).unwrap();
        let mu = AtomicMeasure::uniform(&grid);
        let opts = MaximalOptions {
            scales: ScaleGrid::Dyadic(3),
            ..Default::default()
        };
        let h = PI / 64.0;
        for g in [[0, 0], [1, 0], [0, 2], [2, 1]] {
            for c in [[h, h], [-1.0 + h, 2.0 + h]] {
                let c = pt(&[c[0] - (c[0] + PI - h).rem_euclid(2.0 * h), c[1] - (c[1] + PI - h).rem_euclid(2.0 * h)]);
                let m = m_gamma(&mu, &g, &c, &opts).unwrap();
                assert!((m.value - 1.0).abs() < 1e-12, "{g:?}: {}", m.value);
            }
        }
    }

    #[test]
    fn homogeneous_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let opts = MaximalOptions::default();
        let mu = random_measure(&mut rng, 2, 5);
        let c = pt(&[0.4, -0.9]);
        let base = m_gamma(&mu, &[1, 0], &c, &opts).unwrap().value;
        let scaled = m_gamma(&mu.scale(Complex64::new(0.0, 2.5)), &[1, 0], &c, &opts).unwrap().value;
        assert!((scaled - 2.5 * base).abs() < 1e-12 * scaled);
        let more = mu.with_atom(pt(&[1.0, 1.0]), Complex64::new(0.3, 0.0)).unwrap();
        assert!(m_gamma(&more, &[1, 0], &c, &opts).unwrap().value >= base);
    }

    #[test]
    fn concentric_boxes_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = MaximalOptions::default();
        for _ in 0..30 {
            let mu = random_measure(&mut rng, 2, 8);
            let c = pt(&[rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]);
            let g1 = [rng.gen_range(0..4u32), rng.gen_range(0..4u32)];
            let g2 = [rng.gen_range(0..4u32), rng.gen_range(0..4u32)];
            let sum = [g1[0] + g2[0], g1[1] + g2[1]];
            // the enclosing γ'-box of scale s 2^{max γ''} must still fit
            let room = GammaBox::max_scale(&g1) * 0.5f64.powi(g2[0].max(g2[1]) as i32);
            let lhs = m_gamma_upto(&mu, &sum, &c, room, &opts).unwrap().value;
            let rhs = 2f64.powi((g2[0] + g2[1]) as i32) * m_gamma(&mu, &g1, &c, &opts).unwrap().value;
            assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn concentric_bound_fails_without_room() {
        let mu = AtomicMeasure::dirac(pt(&[0.5, 2.0]));
        let c = pt(&[0.0, 0.0]);
        let opts = MaximalOptions::default();
        assert!(m_gamma(&mu, &[3, 3], &c, &opts).unwrap().value > 0.0);
        assert_eq!(m_gamma(&mu, &[3, 0], &c, &opts).unwrap().value, 0.0);
    }

    #[test]
    fn mq_of_uniform_is_geometric() {
        let grid = TorusGrid::uniform(1, 256).unwrap();
        let mu = AtomicMeasure::uniform(&grid);
        let opts = MaximalOptions {
            scales: ScaleGrid::Dyadic(4),
            ..Default::default()
        };
        let c = pt(&[PI / 256.0]);
        for q in [0.25, 0.5] {
            let m = m_q(&mu, q, &c, &opts).unwrap();
            assert!((m.value - 1.0 / (1.0 - q)).abs() < 1e-12);
            assert_eq!(m.tail_bound, 0.0);
        }
    }

    #[test]
    fn mq_matches_brute_force() {
        // n = 1, δ at 1, centre at π: every γ-box is an arc
        let mu = AtomicMeasure::dirac(pt(&[0.0]));
        let c = pt(&[-PI]);
        let got = m_q(&mu, 0.5, &c, &MaximalOptions::default()).unwrap();
        let mut brute = 0.0;
        for g in 0..60 {
            let smax = GammaBox::max_scale(&[g]);
            let scales: Vec<f64> = (1..=512).map(|k| smax * k as f64 / 512.0).collect();
            brute += 0.5f64.powi(g as i32) * ratio_on_scales(&mu, &[g], &c, &scales);
        }
        assert!((got.value - brute).abs() < 1e-12, "{} vs {brute}", got.value);
        assert!((got.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mq_tail_bound_covers_a_longer_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu = random_measure(&mut rng, 2, 4);
        let c = pt(&[0.1, 0.2]);
        let short = m_q(&mu, 0.5, &c, &MaximalOptions { gamma_cap: 4, ..Default::default() }).unwrap();
        let long = m_q(&mu, 0.5, &c, &MaximalOptions { gamma_cap: 14, ..Default::default() }).unwrap();
        assert!(long.value >= short.value);
        assert!(long.value - short.value <= short.tail_bound);
    }

    #[test]
    fn level_set_of_delta_is_exact() {
        let mu = AtomicMeasure::dirac(pt(&[0.7]));
        for &l in &[0.5, 1.0, 2.0, 3.7, 10.0, 1000.0] {
            let m = level_set_measure_1d(&mu, l).unwrap();
            assert!((m - (1.0f64).min(1.0 / l)).abs() < 1e-15, "{l}: {m}");
        }
    }

    #[test]
    fn level_set_1d_matches_fine_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mu = random_measure(&mut rng, 1, 5);
        let grid = TorusGrid::uniform(1, 20000).unwrap();
        let vals = maximal_on_grid(&MaximalKind::Gamma(vec![0]), &mu, &grid, &MaximalOptions::default()).unwrap();
        for &l in &[2.0, 5.0, 20.0] {
            let exact = level_set_measure_1d(&mu, l).unwrap();
            let fr = level_set_fractions(&vals, &[l])[0];
            assert!((exact - fr).abs() < 2e-3, "{l}: {exact} vs {fr}");
        }
    }

    #[test]
    fn weak_bound_holds_for_random_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let grid = TorusGrid::uniform(2, 24).unwrap();
        let measures: Vec<_> = (0..4).map(|_| random_measure(&mut rng, 2, 6)).collect();
        let lambdas = [0.5, 5.0, 50.0];
        let opts = MaximalOptions { gamma_cap: 4, ..Default::default() };
        let reps = weak11_experiment(&MaximalKind::Gamma(vec![1, 0]), &measures, &lambdas, &grid, &opts).unwrap();
        for r in &reps {
            assert!(r.measures.windows(2).all(|w| w[0] >= w[1]));
        }
        weak11_experiment(&MaximalKind::Q(0.5), &measures, &lambdas, &grid, &opts).unwrap();
    }

    #[test]
    fn partition_bound_on_built_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let opts = MaximalOptions::default();
        for _ in 0..10 {
            let mu = random_measure(&mut rng, 2, 10);
            let r = [1.0 - 0.01, 1.0 - 0.03];
            let chk = partition_bound_check(&mu, &r, 3.0, &pt(&[0.2, -0.4]), &opts).unwrap();
            assert!(chk.violations.is_empty(), "{:?}", chk);
            assert!(chk.occupied > 0);
        }
    }

    #[test]
    fn partition_bound_fails_for_unenclosed_boxes() {
        let atoms = [
            ([2.9733457772332645, -2.2492634642304785], 0.888196728179678),
            ([-2.949981880786083, -0.5370651536172648], 0.17689958685619206),
            ([1.1006944838803827, -1.8945542939838729], 0.6908810063001034),
            ([2.2748237217681657, 0.9883798487765842], 0.9901927605812648),
            ([-2.2519144537292934, 3.130516836817211], 0.15124612818236555),
            ([-0.07565680747431447, -2.289229734979907], 0.4894064944787),
            ([0.205316875230797, 2.135964055027527], 0.2900265571427467),
            ([2.4463755252226154, 1.0684179092081791], 0.6986580828918788),
            ([2.902065408180005, -2.5746667916664867], 0.38004070268795853),
            ([0.004527241024570028, -2.4080890243037425], 0.7644113367886957),
        ];
        let mu = AtomicMeasure::new(
            2,
            atoms.iter().map(|(a, w)| (pt(a), Complex64::new(*w, 0.0))).collect(),
        )
        .unwrap();
        let chk = partition_bound_check(&mu, &[0.9, 0.8], 2.0, &TorusPoint::one(2), &MaximalOptions::default()).unwrap();
        assert!(chk.violations.is_empty());
        assert_eq!(chk.unenclosed.len(), 1);
        let (idx, ratio) = &chk.unenclosed[0];
        assert_eq!(idx.j, vec![4, 2]);
        assert!(*ratio > 1.05);
    }

    #[test]
    fn partition_bound_with_full_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let opts = MaximalOptions::default();
        for (r, b) in [([0.99, 0.96], 4.0), ([0.9, 0.8], 2.0), ([0.999, 0.992], 8.0)] {
            for _ in 0..40 {
                let mu = random_measure(&mut rng, 2, 10);
                let chk = partition_bound_check(&mu, &r, b, &TorusPoint::one(2), &opts).unwrap();
                assert!(chk.violations.is_empty(), "{r:?}: {:?}", chk.violations);
            }
        }
    }

    #[test]
    fn nt_maximal_of_uniform_is_one() {
        let grid = TorusGrid::uniform(1, 512).unwrap();
        let mu = AtomicMeasure::uniform(&grid);
        let cone = StolzCone::new(pt(&[0.3]), 1.0, Some(1.0)).unwrap();
        // keep the samples where 512 atoms still resolve the kernel
        let got = nt_maximal(&Params::harmonic(1), &mu, &cone, 64).unwrap();
        assert!(got.value >= 1.0 - 1e-12);
        let samples: Vec<f64> = (1..=64)
            .map(|i| cone_sample(&cone, i).unwrap())
            .filter(|z| 1.0 - z.radii()[0] > 0.05)
            .map(|z| poisson_of_measure(&Params::harmonic(1), &mu, &z).unwrap().norm())
            .collect();
        assert!(!samples.is_empty());
        assert!(samples.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn cone_samples_stay_in_cone() {
        let cone = StolzCone::new(pt(&[1.0, -2.0]), 2.0, Some(2.0)).unwrap();
        for i in 1..500 {
            let z = cone_sample(&cone, i).unwrap();
            assert!(cone.contains(&z));
            assert!(z.radii().iter().all(|&r| r <= 1.0 - NT_CLAMP + 1e-16));
        }
    }

    #[test]
    fn radial_maximal_of_constant() {
        let src = (2usize, |_: &PolyPoint| Ok(Complex64::new(0.0, -3.0)));
        let g = TorusGrid::uniform(2, 8).unwrap();
        let m = radial_maximal(&src, &g, &[0.0, 0.5, 0.9]).unwrap();
        assert!(m.values().iter().all(|v| (v.re - 3.0).abs() < 1e-15));
    }
}
