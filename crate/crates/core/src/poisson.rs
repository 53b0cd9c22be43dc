//! Poisson integrals of grid data and atomic measures, dilations, the
//! Dirichlet problem, slices and convergence measurements.

use base64::Engine;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::expansion::multiplier;
use crate::fourier;
use crate::geometry::{PolyPoint, TorusGrid, TorusPoint};
use crate::kernel::{check_interior, poisson_kernel, residual_order_axis, v_axis, Params, ResidualOrder};

/// Complex samples on a uniform tensor grid over `𝕋ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(&TorusPoint) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.node(i)))
            .collect();
        Self { grid, values }
    }

    pub fn try_from_fn<F>(grid: TorusGrid, f: F) -> Result<Self>
    where
        F: Fn(&TorusPoint) -> Result<Complex64> + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn sizes(&self) -> &[usize] {
        self.grid.sizes()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.values[self.grid.ravel(idx)]
    }

    /// `Lᵖ(m_n)` norm; `p = ∞` gives the maximum modulus.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let terms: Vec<f64> = self.values.iter().map(|v| v.norm().powf(p)).collect();
        (crate::pairwise_sum(&terms) * self.grid.cell_measure()).powf(1.0 / p)
    }

    /// `∫ f dm_n`.
    pub fn mean(&self) -> Complex64 {
        crate::pairwise_sum_c(&self.values) * self.grid.cell_measure()
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("grids differ".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(other, |a, b| a * b)
    }

    fn combine<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &GridFunction,
        f: F,
    ) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            sizes: self.sizes().to_vec(),
            coeffs: fourier::coefficients(&self.values, self.sizes()),
        }
    }

    /// Value of the band-limited trigonometric interpolant at `zeta`.
    pub fn interpolate(&self, zeta: &TorusPoint) -> Complex64 {
        let vecs: Vec<Vec<Complex64>> = self
            .sizes()
            .iter()
            .zip(zeta.angles())
            .map(|(&n, &t)| fourier::axis_vector(n, t, |_| Complex64::new(1.0, 0.0)))
            .collect();
        fourier::contract(&self.values, self.sizes(), &vecs)
    }

    pub fn to_json(&self, encoding: Encoding) -> Result<String> {
        let values = match encoding {
            Encoding::Base64 => {
                let mut bytes = Vec::with_capacity(16 * self.values.len());
                for v in &self.values {
                    bytes.extend_from_slice(&v.re.to_le_bytes());
                    bytes.extend_from_slice(&v.im.to_le_bytes());
                }
                base64::engine::general_purpose::STANDARD.encode(bytes)
            }
            Encoding::Csv => self
                .values
                .iter()
                .map(|v| format!("{:?},{:?}", v.re, v.im))
                .collect::<Vec<_>>()
                .join("\n"),
        };
        let file = GridFile {
            sizes: self.sizes().to_vec(),
            endianness: Endianness::Little,
            encoding,
            values,
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: GridFile =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let grid = TorusGrid::new(file.sizes)?;
        let values = match file.encoding {
            Encoding::Base64 => {
                let bytes = base64::engine::general_purpose::STANDARD
                    .decode(file.values.trim())
                    .map_err(|e| Error::Serialization(e.to_string()))?;
                if bytes.len() % 16 != 0 {
                    return Err(Error::Serialization("truncated value block".into()));
                }
                let read = |b: &[u8]| {
                    let arr: [u8; 8] = b.try_into().expect("chunk of 8");
                    match file.endianness {
                        Endianness::Little => f64::from_le_bytes(arr),
                        Endianness::Big => f64::from_be_bytes(arr),
                    }
                };
                bytes
                    .chunks_exact(16)
                    .map(|c| Complex64::new(read(&c[..8]), read(&c[8..])))
                    .collect()
            }
            Encoding::Csv => file
                .values
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    let (re, im) = l
                        .split_once(',')
                        .ok_or_else(|| Error::Serialization(format!("bad row {l:?}")))?;
                    let parse = |x: &str| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Serialization(e.to_string()))
                    };
                    Ok(Complex64::new(parse(re)?, parse(im)?))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        GridFunction::new(grid, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Base64,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endianness {
    Little,
    Big,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    sizes: Vec<usize>,
    endianness: Endianness,
    encoding: Encoding,
    values: String,
}

/// Fourier coefficients of a [`GridFunction`] in bin layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    sizes: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f̂(m)`; zero when `m` is outside the grid band.
    pub fn coefficient(&self, m: &[i64]) -> Complex64 {
        let mut flat = 0;
        for (&mj, &n) in m.iter().zip(&self.sizes) {
            match fourier::bin(mj, n) {
                Some(k) => flat = flat * n + k,
                None => return Complex64::new(0.0, 0.0),
            }
        }
        self.coeffs[flat]
    }

    /// Signed frequencies of a flat bin index.
    pub fn frequencies(&self, mut flat: usize) -> Vec<i64> {
        let mut m = vec![0; self.sizes.len()];
        for j in (0..self.sizes.len()).rev() {
            let n = self.sizes[j];
            m[j] = fourier::freq(flat % n, n);
            flat /= n;
        }
        m
    }

    /// Largest coefficient in a Nyquist bin of any axis.
    pub fn nyquist_content(&self) -> f64 {
        (0..self.coeffs.len())
            .filter(|&f| self.on_nyquist(f))
            .map(|f| self.coeffs[f].norm())
            .fold(0.0, f64::max)
    }

    fn on_nyquist(&self, mut flat: usize) -> bool {
        let mut hit = false;
        for &n in self.sizes.iter().rev() {
            hit |= fourier::is_nyquist(flat % n, n);
            flat /= n;
        }
        hit
    }

    /// Largest coefficient with `max_j |m_j| > order`.
    pub fn content_above(&self, order: u32) -> f64 {
        (0..self.coeffs.len())
            .filter(|&f| self.frequencies(f).iter().any(|m| m.unsigned_abs() > order as u64))
            .map(|f| self.coeffs[f].norm())
            .fold(0.0, f64::max)
    }
}

/// A finite complex measure `Σ w_k δ_{ζ_k}` on `𝕋ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<(TorusPoint, Complex64)>,
}

impl AtomicMeasure {
    /// Atoms at identical points are merged, keeping first-seen order.
    pub fn new(dim: usize, atoms: Vec<(TorusPoint, Complex64)>) -> Result<Self> {
        let mut out: Vec<(TorusPoint, Complex64)> = Vec::with_capacity(atoms.len());
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for (p, w) in atoms {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            let key: Vec<u64> = p.angles().iter().map(|a| (a + 0.0).to_bits()).collect();
            match seen.get(&key) {
                Some(&i) => out[i].1 += w,
                None => {
                    seen.insert(key, out.len());
                    out.push((p, w));
                }
            }
        }
        Ok(Self { dim, atoms: out })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, atoms: vec![] }
    }

    pub fn dirac(point: TorusPoint) -> Self {
        Self {
            dim: point.dim(),
            atoms: vec![(point, Complex64::new(1.0, 0.0))],
        }
    }

    /// Unit-mass atoms on every node of `grid`, a discretization of `m_n`.
    pub fn uniform(grid: &TorusGrid) -> Self {
        let w = Complex64::new(grid.cell_measure(), 0.0);
        Self {
            dim: grid.dim(),
            atoms: grid.nodes().map(|p| (p, w)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(TorusPoint, Complex64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `‖μ‖ = Σ |w_k|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w.norm()).sum()
    }

    /// `⟨φ, dμ⟩ = Σ w_k φ(ζ_k)`.
    pub fn pair<F: Fn(&TorusPoint) -> Complex64>(&self, phi: F) -> Complex64 {
        self.atoms.iter().map(|(p, w)| w * phi(p)).sum()
    }

    pub fn scale(&self, c: Complex64) -> AtomicMeasure {
        AtomicMeasure {
            dim: self.dim,
            atoms: self.atoms.iter().map(|(p, w)| (p.clone(), c * w)).collect(),
        }
    }

    pub fn with_atom(&self, point: TorusPoint, w: Complex64) -> Result<AtomicMeasure> {
        let mut atoms = self.atoms.clone();
        atoms.push((point, w));
        AtomicMeasure::new(self.dim, atoms)
    }

    /// Minimum distance (max-coordinate metric) from `zeta` to any atom.
    pub fn distance_to(&self, zeta: &TorusPoint) -> f64 {
        self.atoms
            .iter()
            .map(|(p, _)| p.max_distance(zeta))
            .fold(f64::INFINITY, f64::min)
    }
}

/// How a Poisson integral of grid data is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Rectangle rule `Σ P(z, ζ_i) f(ζ_i) / N`.
    Quadrature,
    /// Exact extension of the band-limited interpolant through the
    /// Fourier multipliers `𝓕_{p,q}(z)/𝓕_{p,q}(𝟏) z^p z̄^q`.
    Spectral,
    /// Quadrature when it is exact to roundoff, spectral otherwise.
    Auto,
}

/// True when the rectangle rule is exact to roundoff: the aliased kernel
/// tail `r_j^{N_j}` is below `e^{-40}` on every axis.
pub fn quadrature_exact(grid: &TorusGrid, z: &PolyPoint) -> bool {
    z.radii()
        .iter()
        .zip(grid.sizes())
        .all(|(&r, &n)| r == 0.0 || n as f64 * -r.ln() >= 40.0)
}

/// True when `1 - r_j ≥ 4 / N_j` on every axis.
pub fn resolves(grid: &TorusGrid, z: &PolyPoint) -> bool {
    z.radii()
        .iter()
        .zip(grid.sizes())
        .all(|(r, &n)| 1.0 - r >= 4.0 / n as f64)
}

fn check_params(params: &Params, n: usize) -> Result<()> {
    if params.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: n,
        });
    }
    Ok(())
}

fn quadrature_vector(params: &Params, axis: usize, n: usize, r: f64, theta: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let psi = 2.0 * PI * k as f64 / n as f64 - PI;
            v_axis(params, axis, r, theta - psi) / n as f64
        })
        .collect()
}

/// Fourier multipliers `λ_m(r)` of one axis for `|m| ≤ N/2`, keyed by `m + N/2`.
fn multipliers(params: &Params, axis: usize, n: usize, r: f64) -> Result<Vec<Complex64>> {
    let h = (n / 2) as i64;
    (-h..=h)
        .map(|m| multiplier(params.alpha()[axis], params.beta()[axis], m, r))
        .collect()
}

fn spectral_vector(lambda: &[Complex64], n: usize, theta: f64) -> Vec<Complex64> {
    let h = (n / 2) as i64;
    fourier::axis_vector(n, theta, |m| lambda[(m + h) as usize])
}

/// `P_{α,β}[f](z)` by the rectangle rule on the grid of `f`.
pub fn poisson_of_function(params: &Params, f: &GridFunction, z: &PolyPoint) -> Result<Complex64> {
    poisson_of_function_with(params, f, z, Route::Quadrature)
}

pub fn poisson_of_function_with(
    params: &Params,
    f: &GridFunction,
    z: &PolyPoint,
    route: Route,
) -> Result<Complex64> {
    check_params(params, f.dim())?;
    check_params(params, z.dim())?;
    check_interior(z)?;
    let ok = resolves(f.grid(), z);
    let route = match route {
        Route::Auto if quadrature_exact(f.grid(), z) => Route::Quadrature,
        Route::Auto => Route::Spectral,
        r => r,
    };
    let vecs = (0..f.dim())
        .map(|j| {
            let (n, r, t) = (f.sizes()[j], z.radii()[j], z.angles()[j]);
            Ok(match route {
                Route::Spectral => spectral_vector(&multipliers(params, j, n, r)?, n, t),
                _ => quadrature_vector(params, j, n, r, t),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if route == Route::Quadrature && !ok {
        log::warn!(
            "grid {:?} too coarse for radii {:?}: kernel width below 4 cells",
            f.sizes(),
            z.radii()
        );
    }
    Ok(fourier::contract(f.values(), f.sizes(), &vecs))
}

/// `P_{α,β}[dμ](z) = Σ w_k P(z, ζ_k)`, exact for atomic `μ`.
pub fn poisson_of_measure(params: &Params, mu: &AtomicMeasure, z: &PolyPoint) -> Result<Complex64> {
    check_params(params, mu.dim())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, w) in mu.atoms() {
        acc += w * poisson_kernel(params, z, p)?;
    }
    Ok(acc)
}

/// Anything that can be evaluated on the polydisc.
pub trait Extension: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, z: &PolyPoint) -> Result<Complex64>;
}

impl<F> Extension for (usize, F)
where
    F: Fn(&PolyPoint) -> Result<Complex64> + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, z: &PolyPoint) -> Result<Complex64> {
        (self.1)(z)
    }
}

/// `P_{α,β}[f]` for grid data `f`, with memoized spectral multipliers.
pub struct FunctionExtension {
    pub params: Params,
    pub data: GridFunction,
    pub route: Route,
    cache: Mutex<HashMap<(usize, u64), std::sync::Arc<Vec<Complex64>>>>,
}

impl FunctionExtension {
    pub fn new(params: Params, data: GridFunction, route: Route) -> Result<Self> {
        check_params(&params, data.dim())?;
        Ok(Self {
            params,
            data,
            route,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn lambda(&self, axis: usize, r: f64) -> Result<std::sync::Arc<Vec<Complex64>>> {
        let key = (axis, r.to_bits());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = std::sync::Arc::new(multipliers(&self.params, axis, self.data.sizes()[axis], r)?);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() > 1 << 16 {
            cache.clear();
        }
        cache.insert(key, v.clone());
        Ok(v)
    }
}

impl Extension for FunctionExtension {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn eval(&self, z: &PolyPoint) -> Result<Complex64> {
        let spectral = match self.route {
            Route::Spectral => true,
            Route::Quadrature => false,
            Route::Auto => !quadrature_exact(self.data.grid(), z),
        };
        if !spectral {
            return poisson_of_function_with(&self.params, &self.data, z, Route::Quadrature);
        }
        check_params(&self.params, z.dim())?;
        check_interior(z)?;
        let vecs = (0..self.dim())
            .map(|j| {
                let n = self.data.sizes()[j];
                Ok(spectral_vector(&self.lambda(j, z.radii()[j])?, n, z.angles()[j]))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(fourier::contract(self.data.values(), self.data.sizes(), &vecs))
    }
}

/// `P_{α,β}[dμ]` for an atomic measure.
pub struct MeasureExtension {
    pub params: Params,
    pub mu: AtomicMeasure,
}

impl Extension for MeasureExtension {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn eval(&self, z: &PolyPoint) -> Result<Complex64> {
        poisson_of_measure(&self.params, &self.mu, z)
    }
}

/// Samples of `u_r(ζ) = u(r · ζ)` on `grid`.
pub fn dilate(source: &dyn Extension, rvec: &[f64], grid: &TorusGrid) -> Result<GridFunction> {
    if rvec.len() != source.dim() || grid.dim() != source.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            got: rvec.len(),
        });
    }
    GridFunction::try_from_fn(grid.clone(), |zeta| {
        source.eval(&PolyPoint::dilate(rvec, zeta)?)
    })
}

/// `(P_{α,β}[f])_r` on the grid of `f`: the spectrum of `f` times the
/// multipliers `Π_j λ_{m_j}(r_j)`, then an inverse FFT.
pub fn dilate_spectral(params: &Params, f: &GridFunction, rvec: &[f64]) -> Result<GridFunction> {
    check_params(params, f.dim())?;
    check_params(params, rvec.len())?;
    let z = PolyPoint::new(rvec.to_vec(), vec![0.0; rvec.len()])?;
    check_interior(&z)?;
    let sizes = f.sizes().to_vec();
    let per_axis = (0..f.dim())
        .map(|j| {
            let n = sizes[j];
            let lam = multipliers(params, j, n, rvec[j])?;
            let h = (n / 2) as i64;
            Ok((0..n)
                .map(|k| {
                    if fourier::is_nyquist(k, n) {
                        0.5 * (lam[0] + lam[(2 * h) as usize])
                    } else {
                        lam[(fourier::freq(k, n) + h) as usize]
                    }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coeffs = fourier::coefficients(f.values(), &sizes);
    for (flat, c) in coeffs.iter_mut().enumerate() {
        let mut rest = flat;
        for j in (0..sizes.len()).rev() {
            *c *= per_axis[j][rest % sizes[j]];
            rest /= sizes[j];
        }
    }
    GridFunction::new(f.grid().clone(), fourier::synthesize(&coeffs, &sizes))
}

/// `|⟨u_r, dν⟩ - ⟨v_r, dμ⟩|` with `u = P_{α,β}[dμ]`, `v = P_{β,α}[dν]`.
pub fn duality_check(
    params: &Params,
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    rvec: &[f64],
) -> Result<f64> {
    let (lhs, rhs) = duality_sides(params, mu, nu, rvec)?;
    Ok((lhs - rhs).norm())
}

/// Both sides of the duality identity.
pub fn duality_sides(
    params: &Params,
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    rvec: &[f64],
) -> Result<(Complex64, Complex64)> {
    let swapped = params.swapped();
    let mut lhs = Complex64::new(0.0, 0.0);
    for (zeta, w) in nu.atoms() {
        lhs += w * poisson_of_measure(params, mu, &PolyPoint::dilate(rvec, zeta)?)?;
    }
    let mut rhs = Complex64::new(0.0, 0.0);
    for (xi, w) in mu.atoms() {
        rhs += w * poisson_of_measure(&swapped, nu, &PolyPoint::dilate(rvec, xi)?)?;
    }
    Ok((lhs, rhs))
}

/// Values of `P_{α,β}[φ]` at `queries`, evaluated in parallel.
pub fn dirichlet_solve(
    params: &Params,
    phi: &GridFunction,
    queries: &[PolyPoint],
) -> Result<Vec<Complex64>> {
    let ext = FunctionExtension::new(params.clone(), phi.clone(), Route::Auto)?;
    queries.par_iter().map(|z| ext.eval(z)).collect()
}

/// Finite-difference residuals of every `L_{α_j,β_j}` applied to `u` at `z`.
pub fn pde_residuals(params: &Params, u: &dyn Extension, z: &PolyPoint) -> Vec<ResidualOrder> {
    let coords = z.coords();
    (0..params.dim())
        .map(|j| {
            residual_order_axis(
                params,
                j,
                |w| {
                    PolyPoint::from_coords(w)
                        .and_then(|p| u.eval(&p))
                        .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                },
                &coords,
            )
        })
        .collect()
}

/// `‖(P[φ])_r - φ‖_p` along a ladder of radii `r𝟏`.
pub fn boundary_convergence(
    params: &Params,
    phi: &GridFunction,
    p: f64,
    ladder: &[f64],
) -> Result<Vec<f64>> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("norm exponent {p} < 1")));
    }
    ladder
        .iter()
        .map(|&r| {
            let ur = dilate_spectral(params, phi, &vec![r; phi.dim()])?;
            Ok(ur.sub(phi)?.norm(p))
        })
        .collect()
}

/// `⟨u_r, φ⟩ = ∫ u(r·ζ) φ(ζ) dm_n(ζ)` for `u = P_{α,β}[dμ]`, computed
/// exactly as `Σ_k w_k P_{β,α}[φ](r · ζ_k)`.
pub fn weak_star_pairing(
    params: &Params,
    mu: &AtomicMeasure,
    phi: &GridFunction,
    rvec: &[f64],
) -> Result<Complex64> {
    let ext = FunctionExtension::new(params.swapped(), phi.clone(), Route::Spectral)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (zeta, w) in mu.atoms() {
        acc += w * ext.eval(&PolyPoint::dilate(rvec, zeta)?)?;
    }
    Ok(acc)
}

/// The limit `⟨φ, dμ⟩` of [`weak_star_pairing`].
pub fn weak_star_limit(mu: &AtomicMeasure, phi: &GridFunction) -> Complex64 {
    mu.pair(|p| phi.interpolate(p))
}

/// How one coordinate is fixed when slicing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Fixing {
    /// `ζ_k = e^{iθ}` on the boundary.
    Boundary(f64),
    /// `z_k = w` inside the disc.
    Interior(Complex64),
}

/// Extension in the retained variables after fixing some coordinates.
pub struct Slice {
    pub retained: Vec<usize>,
    pub extension: FunctionExtension,
}

impl Extension for Slice {
    fn dim(&self) -> usize {
        self.retained.len()
    }

    fn eval(&self, z: &PolyPoint) -> Result<Complex64> {
        self.extension.eval(z)
    }
}

/// Fix the coordinates in `fixed` and return the extension in the others,
/// with parameters restricted to the retained axes.
pub fn slice(params: &Params, data: &GridFunction, fixed: &BTreeMap<usize, Fixing>) -> Result<Slice> {
    check_params(params, data.dim())?;
    if let Some((&axis, _)) = fixed.iter().find(|(&a, _)| a >= data.dim()) {
        return Err(Error::InvalidArgument(format!("axis {} out of range", axis + 1)));
    }
    if fixed.len() >= data.dim() {
        return Err(Error::InvalidArgument("at least one axis must be retained".into()));
    }
    let mut values = data.values().to_vec();
    let mut sizes = data.sizes().to_vec();
    // contract from the highest axis so lower indices stay valid
    for (&axis, fixing) in fixed.iter().rev() {
        let n = sizes[axis];
        let v = match *fixing {
            Fixing::Boundary(t) => fourier::axis_vector(n, t, |_| Complex64::new(1.0, 0.0)),
            Fixing::Interior(w) => {
                let z = PolyPoint::new(vec![w.norm()], vec![w.arg()])?;
                check_interior(&z)?;
                let one = params.restrict(&[axis])?;
                spectral_vector(&multipliers(&one, 0, n, w.norm())?, n, w.arg())
            }
        };
        values = fourier::contract_axis(&values, &sizes, axis, &v);
        sizes.remove(axis);
    }
    let retained: Vec<usize> = (0..data.dim()).filter(|a| !fixed.contains_key(a)).collect();
    let sub = params.restrict(&retained)?;
    let reduced = GridFunction::new(TorusGrid::new(sizes)?, values)?;
    Ok(Slice {
        retained,
        extension: FunctionExtension::new(sub, reduced, Route::Auto)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{phi_ext, PureIndex};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn monomial(grid: &TorusGrid, p: &[u32], q: &[u32]) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |z| {
            z.angles()
                .iter()
                .zip(p.iter().zip(q))
                .map(|(&t, (&a, &b))| Complex64::from_polar(1.0, (a as f64 - b as f64) * t))
                .product()
        })
    }

    #[test]
    fn constant_data_harmonic() {
        let grid = TorusGrid::uniform(2, 128).unwrap();
        let f = GridFunction::constant(grid, c(1.0, 0.0));
        let p = Params::harmonic(2);
        let z = PolyPoint::new(vec![0.3, 0.6], vec![1.0, -2.0]).unwrap();
        assert!((poisson_of_function(&p, &f, &z).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn monomial_extension_matches_closed_form() {
        let params = Params::validate(&[c(0.3, 0.5), c(1.2, 0.0)], &[c(0.1, -0.4), c(-0.3, 0.2)]).unwrap();
        let grid = TorusGrid::uniform(2, 128).unwrap();
        let (p, q) = (vec![1, 0], vec![0, 2]);
        let f = monomial(&grid, &p, &q);
        let idx = PureIndex::new(p, q).unwrap();
        for z in [
            PolyPoint::new(vec![0.4, 0.7], vec![0.3, -1.1]).unwrap(),
            PolyPoint::new(vec![0.8, 0.1], vec![2.9, 0.5]).unwrap(),
        ] {
            let expect = phi_ext(&params, &idx, &z).unwrap();
            let quad = poisson_of_function(&params, &f, &z).unwrap();
            let spec = poisson_of_function_with(&params, &f, &z, Route::Spectral).unwrap();
            assert!((quad - expect).norm() < 1e-8, "{quad} vs {expect}");
            assert!((spec - expect).norm() < 1e-12, "{spec} vs {expect}");
        }
    }

    #[test]
    fn measure_examples() {
        let params = Params::uniform(2, c(0.5, 1.0), c(0.2, 0.0)).unwrap();
        let z = PolyPoint::new(vec![0.5, 0.9], vec![0.2, 0.1]).unwrap();
        assert_eq!(poisson_of_measure(&params, &AtomicMeasure::empty(2), &z).unwrap(), c(0.0, 0.0));
        let one = TorusPoint::one(2);
        let d = AtomicMeasure::dirac(one.clone());
        assert_eq!(
            poisson_of_measure(&params, &d, &z).unwrap(),
            poisson_kernel(&params, &z, &one).unwrap()
        );
    }

    #[test]
    fn atoms_are_merged() {
        let a = TorusPoint::new(vec![0.5]);
        let mu = AtomicMeasure::new(
            1,
            vec![(a.clone(), c(1.0, 0.0)), (TorusPoint::new(vec![1.0]), c(2.0, 0.0)), (a, c(0.0, 3.0))],
        )
        .unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.atoms()[0].1, c(1.0, 3.0));
        assert!((mu.total_variation() - (10f64.sqrt() + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn dilation_examples() {
        let grid = TorusGrid::uniform(1, 128).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |z| c(z.angles()[0].cos(), 0.0));
        let p = Params::harmonic(1);
        let ur = dilate_spectral(&p, &f, &[0.7]).unwrap();
        for (a, b) in ur.values().iter().zip(f.values()) {
            assert!((a - 0.7 * b).norm() < 1e-14);
        }
        let ext = FunctionExtension::new(p.clone(), f.clone(), Route::Quadrature).unwrap();
        let quad = dilate(&ext, &[0.7], &grid).unwrap();
        for (a, b) in quad.values().iter().zip(ur.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let params = Params::uniform(1, c(0.4, 0.3), c(0.2, -0.1)).unwrap();
        let u0 = dilate_spectral(&params, &f, &[0.0]).unwrap();
        let at0 = poisson_of_function(&params, &f, &PolyPoint::origin(1)).unwrap();
        assert!(u0.values().iter().all(|v| (v - at0).norm() < 1e-13));
    }

    #[test]
    fn swap_makes_single_atom_duality_exact() {
        let params = Params::validate(&[c(0.7, -1.0), c(0.1, 0.3)], &[c(-0.2, 0.5), c(1.5, 0.0)]).unwrap();
        let mu = AtomicMeasure::dirac(TorusPoint::new(vec![0.4, -2.0]));
        let nu = AtomicMeasure::dirac(TorusPoint::new(vec![-1.3, 2.2]));
        assert!(duality_check(&params, &mu, &nu, &[0.6, 0.95]).unwrap() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let grid = TorusGrid::new(vec![4, 3]).unwrap();
        let f = GridFunction::from_fn(grid, |z| c(z.angles()[0].sin() / 3.0, z.angles()[1]));
        for enc in [Encoding::Base64, Encoding::Csv] {
            let s = f.to_json(enc).unwrap();
            assert_eq!(GridFunction::from_json(&s).unwrap(), f);
        }
    }

    #[test]
    fn slice_at_origin_averages() {
        let params = Params::validate(&[c(0.3, 0.2), c(0.6, 0.0)], &[c(0.1, 0.0), c(0.2, -0.5)]).unwrap();
        let grid = TorusGrid::uniform(2, 16).unwrap();
        let f = GridFunction::from_fn(grid, |z| {
            let (a, b) = (z.angles()[0], z.angles()[1]);
            Complex64::from_polar(1.0, a) * (1.0 + b.cos()) + c((2.0 * a - b).sin(), 0.0)
        });
        let mut fixed = BTreeMap::new();
        fixed.insert(1, Fixing::Interior(c(0.0, 0.0)));
        let s = slice(&params, &f, &fixed).unwrap();
        let z = PolyPoint::new(vec![0.6], vec![0.4]).unwrap();
        let full = poisson_of_function_with(
            &params,
            &f,
            &PolyPoint::new(vec![0.6, 0.0], vec![0.4, 0.0]).unwrap(),
            Route::Spectral,
        )
        .unwrap();
        assert!((s.eval(&z).unwrap() - full).norm() < 1e-13);
    }
}
