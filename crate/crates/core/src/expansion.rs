//! Radial hypergeometric profiles, the building blocks `𝓕_{p,q}(z) z^p z̄^q`,
//! homogeneous components, and coefficient extraction and synthesis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PolyPoint, TorusGrid, TorusPoint};
use crate::kernel::Params;
use crate::poisson::{Extension, GridFunction};
use crate::special::{hyp2f1, HypParams};

/// Threshold on spectral content treated as aliasing.
pub const ALIASING_TOL: f64 = 1e-10;

/// A pure multi-index pair: `p_j q_j = 0` on every axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PureIndex {
    p: Vec<u32>,
    q: Vec<u32>,
}

impl PureIndex {
    pub fn new(p: Vec<u32>, q: Vec<u32>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: q.len(),
            });
        }
        if p.iter().zip(&q).any(|(a, b)| a * b != 0) {
            return Err(Error::NotPure { p, q });
        }
        Ok(Self { p, q })
    }

    /// `p = m⁺`, `q = m⁻`.
    pub fn from_m(m: &[i64]) -> Self {
        Self {
            p: m.iter().map(|&x| x.max(0) as u32).collect(),
            q: m.iter().map(|&x| (-x).max(0) as u32).collect(),
        }
    }

    pub fn p(&self) -> &[u32] {
        &self.p
    }

    pub fn q(&self) -> &[u32] {
        &self.q
    }

    pub fn m(&self) -> Vec<i64> {
        self.p.iter().zip(&self.q).map(|(&a, &b)| a as i64 - b as i64).collect()
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// `|p| + |q|`.
    pub fn total_order(&self) -> u32 {
        self.p.iter().chain(&self.q).sum()
    }
}

/// `F_{p,q}(s) = F(p - β, q - α; p + q + 1; s)` for one axis.
pub fn radial_profile(alpha: Complex64, beta: Complex64, p: u32, q: u32, s: f64) -> Result<Complex64> {
    if p != 0 && q != 0 {
        return Err(Error::NotPure {
            p: vec![p],
            q: vec![q],
        });
    }
    let h = HypParams::new(
        p as f64 - beta,
        q as f64 - alpha,
        Complex64::new((p + q + 1) as f64, 0.0),
    )?;
    hyp2f1(&h, s)
}

/// Fourier multiplier of frequency `m` at radius `r`:
/// `F_{m⁺,m⁻}(r²) / F_{m⁺,m⁻}(1) · r^{|m|}`.
pub fn multiplier(alpha: Complex64, beta: Complex64, m: i64, r: f64) -> Result<Complex64> {
    let (p, q) = (m.max(0) as u32, (-m).max(0) as u32);
    let at_one = radial_profile(alpha, beta, p, q, 1.0)?;
    let at_r = radial_profile(alpha, beta, p, q, r * r)?;
    Ok(at_r / at_one * r.powi(m.unsigned_abs() as i32))
}

fn check_dim(params: &Params, n: usize) -> Result<()> {
    if params.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: n,
        });
    }
    Ok(())
}

/// `𝓕_{p,q}(z) = Π_j F_{p_j,q_j}(|z_j|²)`.
pub fn big_f(params: &Params, idx: &PureIndex, z: &PolyPoint) -> Result<Complex64> {
    check_dim(params, idx.dim())?;
    check_dim(params, z.dim())?;
    (0..idx.dim())
        .map(|j| {
            let r = z.radii()[j];
            radial_profile(params.alpha()[j], params.beta()[j], idx.p[j], idx.q[j], r * r)
        })
        .product()
}

/// `𝓕_{p,q}(𝟏)`.
pub fn big_f_one(params: &Params, idx: &PureIndex) -> Result<Complex64> {
    check_dim(params, idx.dim())?;
    (0..idx.dim())
        .map(|j| radial_profile(params.alpha()[j], params.beta()[j], idx.p[j], idx.q[j], 1.0))
        .product()
}

/// `z^p z̄^q`.
pub fn monomial(idx: &PureIndex, z: &PolyPoint) -> Complex64 {
    (0..idx.dim())
        .map(|j| {
            let k = idx.p[j] as i32 - idx.q[j] as i32;
            Complex64::from_polar(z.radii()[j].powi(k.abs()), k as f64 * z.angles()[j])
        })
        .product()
}

/// `φ_{p,q}(z) = 𝓕_{p,q}(z) z^p z̄^q`.
pub fn phi_pq(params: &Params, idx: &PureIndex, z: &PolyPoint) -> Result<Complex64> {
    Ok(big_f(params, idx, z)? * monomial(idx, z))
}

/// `P_{α,β}[ζ^p ζ̄^q](z) = 𝓕_{p,q}(z) / 𝓕_{p,q}(𝟏) · z^p z̄^q`.
pub fn phi_ext(params: &Params, idx: &PureIndex, z: &PolyPoint) -> Result<Complex64> {
    Ok(phi_pq(params, idx, z)? / big_f_one(params, idx)?)
}

/// Phase spectrum `m ↦ u_m(z)` of `ζ ↦ u(ζ · z)` on a tensor phase grid.
#[derive(Debug, Clone)]
pub struct PhaseSpectrum {
    pub z: PolyPoint,
    pub spectrum: crate::poisson::Spectrum,
    /// Largest coefficient in a Nyquist bin.
    pub aliasing: f64,
}

impl PhaseSpectrum {
    /// `u_m(z)`.
    pub fn component(&self, m: &[i64]) -> Complex64 {
        self.spectrum.coefficient(m)
    }

    pub fn aliased(&self) -> bool {
        self.aliasing > ALIASING_TOL
    }
}

/// Homogeneous components of `u` at `z` from an `M`-point phase FFT.
pub fn phase_spectrum(u: &dyn Extension, z: &PolyPoint, sizes: &[usize]) -> Result<PhaseSpectrum> {
    let grid = TorusGrid::new(sizes.to_vec())?;
    let g = GridFunction::try_from_fn(grid, |zeta| u.eval(&z.rotate(zeta)))?;
    let spectrum = g.spectrum();
    let aliasing = spectrum.nyquist_content();
    if aliasing > ALIASING_TOL {
        log::warn!("phase samples carry {aliasing:e} at the Nyquist band");
    }
    Ok(PhaseSpectrum {
        z: z.clone(),
        spectrum,
        aliasing,
    })
}

/// `u_m(z) = ∫ ζ̄^m u(ζ · z) dm_n(ζ)` at `z = r · phases`.
pub fn homogeneous_component(
    u: &dyn Extension,
    m: &[i64],
    radii: &[f64],
    phases: &TorusPoint,
    sizes: &[usize],
) -> Result<(Complex64, bool)> {
    if m.len() != sizes.len() {
        return Err(Error::DimensionMismatch {
            expected: sizes.len(),
            got: m.len(),
        });
    }
    if let Some((j, _)) = m
        .iter()
        .zip(sizes)
        .enumerate()
        .find(|(_, (&mj, &n))| (n as u64) < 2 * mj.unsigned_abs() + 2)
    {
        return Err(Error::InvalidGrid(format!(
            "phase grid size {} on axis {} too small for |m| = {}",
            sizes[j],
            j + 1,
            m[j].abs()
        )));
    }
    let z = PolyPoint::dilate(radii, phases)?;
    let ps = phase_spectrum(u, &z, sizes)?;
    Ok((ps.component(m), ps.aliased()))
}

/// Coefficients `c_{p,q}` of a finite expansion `Σ c_{p,q} 𝓕_{p,q}(z) z^p z̄^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs {
    pub max_order: u32,
    /// Sorted by total order, then lexicographically.
    pub terms: Vec<(PureIndex, Complex64)>,
    /// Largest boundary coefficient above `max_order` that was dropped.
    pub dropped: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffRow {
    p: Vec<u32>,
    q: Vec<u32>,
    re: f64,
    im: f64,
}

impl ExpansionCoeffs {
    pub fn new(max_order: u32, mut terms: Vec<(PureIndex, Complex64)>) -> Self {
        terms.sort_by(|a, b| (a.0.total_order(), &a.0).cmp(&(b.0.total_order(), &b.0)));
        Self {
            max_order,
            terms,
            dropped: 0.0,
        }
    }

    pub fn get(&self, idx: &PureIndex) -> Complex64 {
        self.terms
            .iter()
            .find(|(i, _)| i == idx)
            .map_or(Complex64::new(0.0, 0.0), |t| t.1)
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<CoeffRow> = self
            .terms
            .iter()
            .map(|(i, c)| CoeffRow {
                p: i.p.clone(),
                q: i.q.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        serde_json::to_string_pretty(&rows).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rows: Vec<CoeffRow> =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let terms = rows
            .into_iter()
            .map(|r| Ok((PureIndex::new(r.p, r.q)?, Complex64::new(r.re, r.im))))
            .collect::<Result<Vec<_>>>()?;
        let max_order = terms.iter().map(|(i, _)| i.total_order()).max().unwrap_or(0);
        Ok(Self::new(max_order, terms))
    }
}

/// `c_{p,q} = φ̂(p - q) / 𝓕_{p,q}(𝟏)` for `|p| + |q| ≤ max_order`.
pub fn extract_coeffs(params: &Params, phi: &GridFunction, max_order: u32) -> Result<ExpansionCoeffs> {
    check_dim(params, phi.dim())?;
    let spec = phi.spectrum();
    let nyq = spec.nyquist_content();
    if nyq > ALIASING_TOL {
        return Err(Error::Aliasing(nyq));
    }
    // coefficients at FFT roundoff level are treated as zero
    let top = spec.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let noise = 1e-14 * top;
    let mut terms = Vec::new();
    let mut dropped: f64 = 0.0;
    for (flat, &c) in spec.coeffs().iter().enumerate() {
        if c.norm() <= noise {
            continue;
        }
        let idx = PureIndex::from_m(&spec.frequencies(flat));
        if idx.total_order() > max_order {
            dropped = dropped.max(c.norm());
            continue;
        }
        terms.push((idx.clone(), c / big_f_one(params, &idx)?));
    }
    let mut out = ExpansionCoeffs::new(max_order, terms);
    out.dropped = dropped;
    Ok(out)
}

/// Value of a finite expansion and a bound on the largest dropped term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synthesis {
    pub value: Complex64,
    /// `K(α, β)` times the largest dropped boundary coefficient.
    pub dropped_bound: f64,
}

pub fn synthesize(params: &Params, coeffs: &ExpansionCoeffs, z: &PolyPoint) -> Result<Synthesis> {
    check_dim(params, z.dim())?;
    let mut value = Complex64::new(0.0, 0.0);
    for (idx, c) in &coeffs.terms {
        value += c * phi_pq(params, idx, z)?;
    }
    Ok(Synthesis {
        value,
        dropped_bound: params.k_bound() * coeffs.dropped,
    })
}

/// Ratios `u_m(z) / (𝓕_{m⁺,m⁻}(z) z^{(m)})` over sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub ratios: Vec<Complex64>,
    /// Points skipped because the denominator was below `1e-8`.
    pub excluded: usize,
    /// `max |ratio - ratio_0|` relative to `max(1, |ratio_0|)`.
    pub spread: f64,
    pub aliased: bool,
}

pub fn representation_ratios(
    params: &Params,
    u: &dyn Extension,
    m: &[i64],
    samples: &[PolyPoint],
    sizes: &[usize],
) -> Result<RatioReport> {
    let idx = PureIndex::from_m(m);
    let mut ratios = Vec::new();
    let mut excluded = 0;
    let mut aliased = false;
    for z in samples {
        let den = phi_pq(params, &idx, z)?;
        if den.norm() <= 1e-8 {
            excluded += 1;
            continue;
        }
        let phases = TorusPoint::new(z.angles().to_vec());
        let (um, a) = homogeneous_component(u, m, z.radii(), &phases, sizes)?;
        aliased |= a;
        ratios.push(um / den);
    }
    let spread = match ratios.first() {
        Some(&r0) => {
            ratios.iter().map(|r| (r - r0).norm()).fold(0.0, f64::max) / r0.norm().max(1.0)
        }
        None => 0.0,
    };
    Ok(RatioReport {
        ratios,
        excluded,
        spread,
        aliased,
    })
}
