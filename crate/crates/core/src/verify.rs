//! Invariant suites run in dependency order, with a JSON report that
//! depends only on the configuration and seed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{extract_coeffs, phi_ext, synthesize, PureIndex};
use crate::fatou::{fatou_sweep, FatouOptions};
use crate::geometry::{PolyPoint, TorusGrid, TorusPoint};
use crate::kernel::{kernel_mass, residual_order_axis, u_ab, Params};
use crate::maximal::{
    level_set_measure_1d, level_set_report, partition_bound_check, random_measure, MaximalKind, MaximalOptions,
};
use crate::poisson::{
    boundary_convergence, duality_sides, poisson_of_function_with, poisson_of_measure, AtomicMeasure, GridFunction, Route,
};
use crate::special::{gamma, hyp2f1, HypParams};

/// Per-suite tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative error of `Γ(z+1) = zΓ(z)` and of the Gauss sum.
    pub special: f64,
    /// Relative excess of `∫|P|` over `K(α, β)`.
    pub kernel_mass: f64,
    /// Rectangle rule against the closed form of `P[ζ^p ζ̄^q]`.
    pub quadrature: f64,
    /// Richardson-extrapolated residual `|(4L_{h/2} - L_h)/3|`, which
    /// removes the `h²` term of the stencil.
    pub pde_extrapolated: f64,
    pub pde_order_min: f64,
    pub pde_order_max: f64,
    pub duality: f64,
    pub expansion: f64,
    pub convergence: f64,
    /// Slack on `measured ≤ bound` for level sets.
    pub weak11: f64,
    pub partition: f64,
    pub fatou: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            special: 1e-12,
            kernel_mass: 1e-6,
            quadrature: 1e-8,
            pde_extrapolated: 1e-7,
            pde_order_min: 1.7,
            pde_order_max: 2.3,
            duality: 1e-10,
            expansion: 1e-8,
            convergence: 1e-3,
            weak11: 0.0,
            partition: 1e-12,
            fatou: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Cases per randomized suite.
    pub cases: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20240611,
            cases: 20,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub cases: usize,
    pub passes: usize,
    pub worst_error: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.cases == self.passes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.suites.iter().filter(|s| !s.passed()).map(|s| s.suite.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

type Suite = fn(&VerifyConfig, &mut ChaCha8Rng) -> Result<SuiteResult>;

/// Suite names in the order they run.
pub const SUITES: [&str; 11] = [
    "special",
    "kernel_mass",
    "quadrature",
    "pde",
    "duality",
    "expansion",
    "convergence",
    "weak11",
    "level_set",
    "partition",
    "fatou",
];

const RUNNERS: [Suite; 11] = [
    suite_special,
    suite_kernel_mass,
    suite_quadrature,
    suite_pde,
    suite_duality,
    suite_expansion,
    suite_convergence,
    suite_weak11,
    suite_level_set,
    suite_partition,
    suite_fatou,
];

/// Run every suite; each draws from its own stream derived from the seed.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suites = RUNNERS
        .iter()
        .enumerate()
        .map(|(k, run)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            run(cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { suites })
}

/// [`run_verify`] on a dedicated pool of `workers` threads.
pub fn run_verify_with_workers(cfg: &VerifyConfig, workers: usize) -> Result<VerifyReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| run_verify(cfg))
}

fn tally(name: &str, errors: &[(f64, bool)]) -> SuiteResult {
    SuiteResult {
        suite: name.to_string(),
        cases: errors.len(),
        passes: errors.iter().filter(|e| e.1).count(),
        worst_error: errors.iter().map(|e| e.0).fold(0.0, f64::max),
    }
}

/// The three parameter families used throughout: harmonic, real symmetric
/// and complex.
pub fn parameter_family(k: usize, n: usize) -> Params {
    match k % 3 {
        0 => Params::harmonic(n),
        1 => Params::real_symmetric(&vec![0.3; n]).expect("valid"),
        _ => Params::uniform(n, Complex64::new(0.5, 2.0), Complex64::new(0.5, -1.0)).expect("valid"),
    }
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize, rmax: f64) -> PolyPoint {
    PolyPoint::new(
        (0..n).map(|_| rng.gen_range(0.0..rmax)).collect(),
        (0..n).map(|_| rng.gen_range(-PI..PI)).collect(),
    )
    .expect("radius below 1")
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Trigonometric polynomial with random coefficients in the unit square
/// on frequencies `|m_j| ≤ degree`, sampled on `sizes`.
pub fn random_trig<R: Rng>(rng: &mut R, sizes: &[usize], degree: i64) -> GridFunction {
    let n = sizes.len();
    let mut freqs: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        freqs = freqs
            .into_iter()
            .flat_map(|f| {
                (-degree..=degree).map(move |m| {
                    let mut g = f.clone();
                    g.push(m);
                    g
                })
            })
            .collect();
    }
    let terms: Vec<(Vec<i64>, Complex64)> = freqs.into_iter().map(|m| (m, random_complex(rng))).collect();
    let grid = TorusGrid::new(sizes.to_vec()).expect("sizes >= 2");
    GridFunction::from_fn(grid, |z| {
        terms
            .iter()
            .map(|(m, c)| {
                let phase: f64 = m.iter().zip(z.angles()).map(|(&k, a)| k as f64 * a).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    })
}

fn suite_special(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let tol = cfg.tolerances.special;
    let zs: Vec<Complex64> = (0..10 * cfg.cases)
        .map(|_| Complex64::new(rng.gen_range(-8.0..8.0), rng.gen_range(-10.0..10.0)))
        .collect();
    let mut errors: Vec<(f64, bool)> = zs
        .par_iter()
        .map(|&z| {
            let e = match (gamma(z + 1.0), gamma(z)) {
                (Ok(a), Ok(b)) => ((a - z * b) / a).norm(),
                _ => f64::INFINITY,
            };
            (e, e <= tol)
        })
        .collect();
    // Gauss sum at x = 1 against the series at x close to 1 is too slow, so
    // compare with Γ products at terminating parameters
    for k in 0..cfg.cases {
        let a = Complex64::new(-((k % 5) as f64), 0.0);
        let b = Complex64::new(0.3, 0.1 * k as f64);
        let c = Complex64::new(1.7, -0.2);
        let p = HypParams::new(a, b, c)?;
        let lhs = hyp2f1(&p, 1.0)?;
        let rhs = gamma(c)? * gamma(c - a - b)? / (gamma(c - a)? * gamma(c - b)?);
        let e = ((lhs - rhs) / rhs).norm();
        errors.push((e, e <= tol));
    }
    Ok(tally("special", &errors))
}

fn suite_kernel_mass(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let cases: Vec<(Params, PolyPoint)> = (0..cfg.cases)
        .map(|k| {
            let n = 1 + k % 2;
            (parameter_family(k / 2, n), random_point(rng, n, 0.99))
        })
        .collect();
    let errors = cases
        .par_iter()
        .map(|(p, z)| {
            let excess = kernel_mass(p, z)? / p.k_bound() - 1.0;
            Ok((excess.max(0.0), excess <= cfg.tolerances.kernel_mass))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("kernel_mass", &errors))
}

fn random_pure<R: Rng>(rng: &mut R, n: usize, max: i64) -> PureIndex {
    let m: Vec<i64> = (0..n).map(|_| rng.gen_range(-max..=max)).collect();
    PureIndex::from_m(&m)
}

fn suite_quadrature(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let n_grid = 128;
    let cases: Vec<(Params, PureIndex, PolyPoint)> = (0..cfg.cases)
        .map(|k| {
            let n = 1 + k % 2;
            (parameter_family(k, n), random_pure(rng, n, 6), random_point(rng, n, 0.7))
        })
        .collect();
    let errors = cases
        .par_iter()
        .map(|(p, idx, z)| {
            let m = idx.m();
            let grid = TorusGrid::uniform(idx.dim(), n_grid)?;
            let f = GridFunction::from_fn(grid, |zeta| {
                let ph: f64 = m.iter().zip(zeta.angles()).map(|(&k, a)| k as f64 * a).sum();
                Complex64::from_polar(1.0, ph)
            });
            let got = poisson_of_function_with(p, &f, z, Route::Quadrature)?;
            let e = (got - phi_ext(p, idx, z)?).norm();
            Ok((e, e <= cfg.tolerances.quadrature))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("quadrature", &errors))
}

fn suite_pde(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let t = cfg.tolerances;
    let cases: Vec<(Params, PolyPoint, PureIndex, AtomicMeasure)> = (0..cfg.cases)
        .map(|k| {
            let p = parameter_family(k, 2);
            let z = random_point(rng, 2, 0.7);
            let idx = random_pure(rng, 2, 3);
            (p, z, idx, random_atomic(rng, 2, 5))
        })
        .collect();
    let errors = cases
        .par_iter()
        .flat_map(|(p, z, idx, mu)| {
            let coords = z.coords();
            let at = |w: &[Complex64]| PolyPoint::from_coords(w).expect("interior stencil");
            let u = |w: &[Complex64]| -> Complex64 { (0..2).map(|i| u_ab(p.alpha()[i], p.beta()[i], w[i])).product() };
            let phi = |w: &[Complex64]| phi_ext(p, idx, &at(w)).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let pm = |w: &[Complex64]| poisson_of_measure(p, mu, &at(w)).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let objects: [&(dyn Fn(&[Complex64]) -> Complex64 + Sync); 3] = [&u, &phi, &pm];
            let mut out = vec![];
            for f in objects {
                for j in 0..2 {
                    let ro = residual_order_axis(p, j, f, &coords);
                    let e = ro.extrapolated.max(ro.floor);
                    let e = if e.is_nan() { f64::INFINITY } else { e };
                    out.push((e, e < t.pde_extrapolated && ro.order_in(t.pde_order_min, t.pde_order_max)));
                }
            }
            out
        })
        .collect::<Vec<_>>();
    Ok(tally("pde", &errors))
}

fn random_atomic<R: Rng>(rng: &mut R, n: usize, atoms: usize) -> AtomicMeasure {
    random_measure(rng, n, atoms)
}

fn suite_duality(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let params = parameter_family(2, 2);
    let cases: Vec<(AtomicMeasure, AtomicMeasure, Vec<f64>)> = (0..cfg.cases)
        .map(|_| {
            let mu = random_atomic(rng, 2, 5);
            let nu = random_atomic(rng, 2, 5);
            let r = vec![rng.gen_range(0.1..0.95), rng.gen_range(0.1..0.95)];
            (mu, nu, r)
        })
        .collect();
    let errors = cases
        .par_iter()
        .map(|(mu, nu, r)| {
            let (l, rr) = duality_sides(&params, mu, nu, r)?;
            let e = (l - rr).norm() / l.norm().max(1.0);
            Ok((e, e <= cfg.tolerances.duality))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("duality", &errors))
}

fn suite_expansion(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let cases: Vec<(Params, GridFunction, PolyPoint)> = (0..cfg.cases)
        .map(|k| {
            let f = random_trig(rng, &[20, 20], 3);
            (parameter_family(k, 2), f, random_point(rng, 2, 0.8))
        })
        .collect();
    let errors = cases
        .par_iter()
        .map(|(p, f, z)| {
            let coeffs = extract_coeffs(p, f, 12)?;
            let s = synthesize(p, &coeffs, z)?;
            let direct = poisson_of_function_with(p, f, z, Route::Spectral)?;
            let e = (s.value - direct).norm();
            Ok((e, e <= cfg.tolerances.expansion))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("expansion", &errors))
}

/// Smooth test datum `½ cos θ₁ + ¼ sin θ₂` (extended by zero phase in
/// higher dimensions).
pub fn smooth_datum(grid: TorusGrid) -> GridFunction {
    GridFunction::from_fn(grid, |z| {
        let a = z.angles();
        let second = a.get(1).map_or(0.0, |t| 0.25 * t.sin());
        Complex64::new(0.5 * a[0].cos() + second, 0.0)
    })
}

/// Ladder of the norm-convergence suite.
pub const CONVERGENCE_LADDER: [f64; 4] = [0.5, 0.9, 0.99, 0.999];

fn suite_convergence(cfg: &VerifyConfig, _rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let f = smooth_datum(TorusGrid::uniform(2, 16)?);
    let mut errors = vec![];
    for k in 0..2 {
        let params = parameter_family(k, 2);
        for p in [1.0, 2.0, f64::INFINITY] {
            let norms = boundary_convergence(&params, &f, p, &CONVERGENCE_LADDER)?;
            let last = norms[norms.len() - 1];
            let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
            errors.push((last, decreasing && last < cfg.tolerances.convergence));
        }
    }
    Ok(tally("convergence", &errors))
}

fn suite_weak11(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let lambdas: Vec<f64> = (0..7).map(|k| 10f64.powf(-0.5 + 0.5 * k as f64)).collect();
    let opts = MaximalOptions::default();
    let trials = (cfg.cases / 2).max(1);
    let mut cases = vec![];
    for k in 0..trials {
        let n = 1 + k % 2;
        let atoms = 1 + rng.gen_range(0..10);
        let mu = random_atomic(rng, n, atoms);
        let gamma: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        cases.push((mu.clone(), MaximalKind::Gamma(gamma)));
        cases.push((mu, MaximalKind::Q(if k % 2 == 0 { 0.25 } else { 0.5 })));
    }
    let errors = cases
        .par_iter()
        .map(|(mu, kind)| {
            let grid = TorusGrid::uniform(mu.dim(), if mu.dim() == 1 { 512 } else { 32 })?;
            let rep = level_set_report(kind, mu, &lambdas, &grid, &opts)?;
            let worst = rep
                .measures
                .iter()
                .zip(&rep.bounds)
                .map(|(m, b)| m / b)
                .fold(0.0, f64::max);
            let monotone = rep.measures.windows(2).all(|w| w[0] >= w[1]);
            Ok((worst, worst <= 1.0 + cfg.tolerances.weak11 && monotone))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("weak11", &errors))
}

fn suite_level_set(_cfg: &VerifyConfig, _rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mu = AtomicMeasure::dirac(TorusPoint::one(1));
    let errors = (0..13)
        .map(|k| {
            let l = 10f64.powf(-1.0 + 0.25 * k as f64);
            let e = (level_set_measure_1d(&mu, l)? - (1.0f64).min(1.0 / l)).abs();
            Ok((e, e == 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("level_set", &errors))
}

fn suite_partition(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let opts = MaximalOptions::default();
    let cases: Vec<(AtomicMeasure, Vec<f64>, f64)> = (0..cfg.cases)
        .map(|_| {
            let b = [1.0, 2.0, 4.0][rng.gen_range(0..3)];
            let g = 10f64.powf(rng.gen_range(-3.0..-1.0));
            let r = vec![1.0 - g, 1.0 - g * rng.gen_range(1.0..=b)];
            (random_atomic(rng, 2, 10), r, b)
        })
        .collect();
    let errors = cases
        .par_iter()
        .map(|(mu, r, b)| {
            let chk = partition_bound_check(mu, r, *b, &TorusPoint::one(2), &opts)?;
            let e = chk.worst_ratio;
            Ok((e, chk.violations.is_empty() && e <= 1.0 + cfg.tolerances.partition))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally("partition", &errors))
}

fn suite_fatou(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let f = random_trig(rng, &[8, 8], 2);
    let vertices = TorusGrid::uniform(2, 6)?;
    let opts = FatouOptions { paths: 4, ..Default::default() };
    let mut errors = vec![];
    for k in 0..3 {
        let s = fatou_sweep(&parameter_family(k, 2), &f, &vertices, 2.0, Some(2.0), cfg.tolerances.fatou, |_| false, &opts)?;
        errors.push((s.worst_error, s.fraction == 1.0));
    }
    Ok(tally("fatou", &errors))
}
