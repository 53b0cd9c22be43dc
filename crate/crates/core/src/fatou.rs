//! Restricted non-tangential limit scans: values of an extension along
//! approach paths inside `S_{A,B}`, limit estimates with an oscillation
//! proxy over shrinking windows, vertex sweeps and boundary decay fits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{approach_path, ApproachProfile, StolzCone, TorusGrid, TorusPoint};
use crate::kernel::Params;
use crate::maximal::halton;
use crate::poisson::{Extension, FunctionExtension, GridFunction, Route};

/// Share of each path, counted from its end, used for the limit estimate.
pub const TERMINAL_FRACTION: f64 = 0.25;

/// Label attached to scans over full (unrestricted) cones.
pub const NO_GUARANTEE: &str = "no theoretical guarantee";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatouOptions {
    pub paths: usize,
    pub steps: usize,
    pub start_gap: f64,
    pub end_gap: f64,
    /// Oscillation above which a scan is flagged as non-convergent.
    pub threshold: f64,
}

impl Default for FatouOptions {
    fn default() -> Self {
        Self {
            paths: 8,
            steps: 40,
            start_gap: ApproachProfile::DEFAULT_START_GAP,
            end_gap: ApproachProfile::DEFAULT_END_GAP,
            threshold: 1e-3,
        }
    }
}

/// `count` distinct profiles: the radial one first, then Halton offsets
/// in `[-0.95, 0.95]` and depth ratios up to `B` (up to 100 for a full cone).
pub fn default_profiles(n: usize, count: usize, restriction: Option<f64>, opts: &FatouOptions) -> Vec<ApproachProfile> {
    let spread = restriction.unwrap_or(100.0);
    (0..count)
        .map(|i| {
            let p = if i == 0 {
                ApproachProfile::radial(n)
            } else {
                let h = halton(i as u64, 2 * n);
                ApproachProfile::new(
                    h[..n].iter().map(|u| 0.95 * (2.0 * u - 1.0)).collect(),
                    h[n..].iter().map(|u| spread.powf(-u)).collect(),
                )
            };
            p.with_gaps(opts.start_gap, opts.end_gap)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub profile: ApproachProfile,
    /// `max_j (1 - r_j)` at each step.
    pub gaps: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Values along approach paths to one vertex and the derived estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatouScan {
    pub vertex: TorusPoint,
    pub aperture: f64,
    pub restriction: Option<f64>,
    pub traces: Vec<PathTrace>,
    /// Mean of the terminal values of all paths.
    pub estimate: Complex64,
    /// Largest pairwise spread over the terminal window of all paths.
    pub oscillation: f64,
    /// `(window length, spread)` for nested windows, longest first.
    pub omega: Vec<(usize, f64)>,
    pub converged: bool,
    pub note: Option<String>,
}

fn spread(values: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max((a - b).norm());
        }
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        f64::INFINITY
    } else {
        worst
    }
}

fn window_values(traces: &[PathTrace], len: usize) -> Vec<Complex64> {
    traces
        .iter()
        .flat_map(|t| t.values[t.values.len() - len..].iter().copied())
        .collect()
}

impl FatouScan {
    pub fn traces_csv(&self) -> String {
        let mut out = String::from("path,gap,re,im\n");
        for (k, t) in self.traces.iter().enumerate() {
            for (g, v) in t.gaps.iter().zip(&t.values) {
                out.push_str(&format!("{k},{g:?},{:?},{:?}\n", v.re, v.im));
            }
        }
        out
    }
}

/// Scan `source` along explicit profiles inside `cone`.
pub fn rnt_scan(
    source: &dyn Extension,
    cone: &StolzCone,
    profiles: &[ApproachProfile],
    steps: usize,
    threshold: f64,
) -> Result<FatouScan> {
    if profiles.is_empty() {
        return Err(Error::InvalidArgument("no approach profiles".into()));
    }
    if steps < 8 {
        return Err(Error::InvalidArgument(format!("steps = {steps} < 8")));
    }
    let mut traces = Vec::with_capacity(profiles.len());
    for p in profiles {
        let path = approach_path(cone, steps, p)?;
        let mut values = Vec::with_capacity(steps);
        let mut gaps = Vec::with_capacity(steps);
        for z in &path {
            gaps.push(z.max_gap());
            values.push(source.eval(z)?);
        }
        traces.push(PathTrace {
            profile: p.clone(),
            gaps,
            values,
        });
    }
    let terminal = ((steps as f64 * TERMINAL_FRACTION).round() as usize).max(2);
    let mut omega = vec![];
    let mut len = steps / 2;
    while len >= 2 {
        omega.push((len, spread(&window_values(&traces, len))));
        len /= 2;
    }
    let oscillation = spread(&window_values(&traces, terminal));
    let estimate = traces.iter().map(|t| t.values[steps - 1]).sum::<Complex64>() / traces.len() as f64;
    let tightest = omega.last().map(|o| o.1).unwrap_or(oscillation);
    Ok(FatouScan {
        vertex: cone.vertex.clone(),
        aperture: cone.aperture,
        restriction: cone.restriction,
        traces,
        estimate,
        oscillation,
        omega,
        converged: tightest <= threshold && estimate.norm().is_finite(),
        note: cone.restriction.is_none().then(|| NO_GUARANTEE.to_string()),
    })
}

/// Limit estimate of `source` at `vertex` along `opts.paths` default profiles.
pub fn rnt_limit(
    source: &dyn Extension,
    vertex: &TorusPoint,
    aperture: f64,
    restriction: Option<f64>,
    opts: &FatouOptions,
) -> Result<FatouScan> {
    let cone = StolzCone::new(vertex.clone(), aperture, restriction)?;
    let profiles = default_profiles(vertex.dim(), opts.paths, restriction, opts);
    rnt_scan(source, &cone, &profiles, opts.steps, opts.threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub vertex: TorusPoint,
    pub estimate: Complex64,
    pub expected: Complex64,
    pub error: f64,
    pub oscillation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatouSummary {
    pub aperture: f64,
    pub restriction: Option<f64>,
    pub tolerance: f64,
    pub checked: usize,
    pub matched: usize,
    /// `matched / checked`.
    pub fraction: f64,
    pub worst_error: f64,
    pub excluded: Vec<TorusPoint>,
    pub failures: Vec<SweepRecord>,
    pub note: Option<String>,
    /// Every checked vertex, in grid order.
    #[serde(skip)]
    pub records: Vec<SweepRecord>,
}

impl FatouSummary {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Compare limit estimates of `source` with `expected` at every node of
/// `vertices` not rejected by `exclude`.
#[allow(clippy::too_many_arguments)]
pub fn fatou_sweep_with<E, X>(
    source: &dyn Extension,
    expected: E,
    vertices: &TorusGrid,
    aperture: f64,
    restriction: Option<f64>,
    tol: f64,
    exclude: X,
    opts: &FatouOptions,
) -> Result<FatouSummary>
where
    E: Fn(&TorusPoint) -> Complex64 + Sync,
    X: Fn(&TorusPoint) -> bool + Sync,
{
    let outcomes = (0..vertices.len())
        .into_par_iter()
        .map(|flat| {
            let v = vertices.node(flat);
            if exclude(&v) {
                return Ok((v, None));
            }
            let scan = rnt_limit(source, &v, aperture, restriction, opts)?;
            let want = expected(&v);
            Ok((v, Some((scan.estimate, want, scan.oscillation))))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut excluded = vec![];
    let mut failures = vec![];
    let mut records = vec![];
    let (mut checked, mut matched, mut worst) = (0, 0, 0.0f64);
    for (v, out) in outcomes {
        match out {
            None => excluded.push(v),
            Some((est, want, osc)) => {
                checked += 1;
                let err = (est - want).norm();
                worst = worst.max(err);
                let rec = SweepRecord {
                    vertex: v,
                    estimate: est,
                    expected: want,
                    error: err,
                    oscillation: osc,
                };
                if err <= tol {
                    matched += 1;
                } else {
                    failures.push(rec.clone());
                }
                records.push(rec);
            }
        }
    }
    Ok(FatouSummary {
        aperture,
        restriction,
        tolerance: tol,
        checked,
        matched,
        fraction: if checked == 0 { 1.0 } else { matched as f64 / checked as f64 },
        worst_error: worst,
        excluded,
        failures,
        note: restriction.is_none().then(|| NO_GUARANTEE.to_string()),
        records,
    })
}

/// Sweep for `u = P_{α,β}[f]` against the band-limited interpolant of `f`.
#[allow(clippy::too_many_arguments)]
pub fn fatou_sweep<X>(
    params: &Params,
    f: &GridFunction,
    vertices: &TorusGrid,
    aperture: f64,
    restriction: Option<f64>,
    tol: f64,
    exclude: X,
    opts: &FatouOptions,
) -> Result<FatouSummary>
where
    X: Fn(&TorusPoint) -> bool + Sync,
{
    let ext = FunctionExtension::new(params.clone(), f.clone(), Route::Spectral)?;
    fatou_sweep_with(&ext, |v| f.interpolate(v), vertices, aperture, restriction, tol, exclude, opts)
}

/// Least-squares fit of `ln |u| = a + e ln(gap)` along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub gaps: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

/// Decay of `|source|` approaching `vertex` along `profile`, gaps running
/// geometrically from `start_gap` to `end_gap` over `steps` points.
pub fn decay_fit(
    source: &dyn Extension,
    vertex: &TorusPoint,
    aperture: f64,
    restriction: Option<f64>,
    profile: &ApproachProfile,
    steps: usize,
) -> Result<DecayFit> {
    let cone = StolzCone::new(vertex.clone(), aperture, restriction)?;
    let path = approach_path(&cone, steps, profile)?;
    let mut gaps = Vec::with_capacity(steps);
    let mut mags = Vec::with_capacity(steps);
    for z in &path {
        gaps.push(z.max_gap());
        mags.push(source.eval(z)?.norm());
    }
    if mags.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidArgument("decay fit needs finite non-zero values".into()));
    }
    let xs: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let ys: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(DecayFit {
        exponent,
        intercept: my - exponent * mx,
        gaps,
        magnitudes: mags,
    })
}
