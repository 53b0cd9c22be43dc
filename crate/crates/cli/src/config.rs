use std::path::{Path, PathBuf};

use num_complex::Complex64;
use polyharm::geometry::{PolyPoint, TorusGrid, TorusPoint};
use polyharm::kernel::Params;
use polyharm::maximal::{random_measure, MaximalKind};
use polyharm::poisson::{AtomicMeasure, GridFunction};
use polyharm::verify::{smooth_datum, Tolerances};
use polyharm::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Complex number as it appears in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Cplx {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Cplx> for Complex64 {
    fn from(c: Cplx) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl Cplx {
    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub alpha: Vec<Cplx>,
    pub beta: Vec<Cplx>,
}

impl ParamsConfig {
    pub fn build(&self) -> polyharm::Result<Params> {
        let a: Vec<Complex64> = self.alpha.iter().map(|&c| c.into()).collect();
        let b: Vec<Complex64> = self.beta.iter().map(|&c| c.into()).collect();
        Params::validate(&a, &b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub m: Vec<i64>,
    pub c: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angles: Vec<f64>,
    pub weight: Cplx,
}

/// Boundary data: a function sampled on `grid`, or a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataConfig {
    Constant { value: Cplx },
    /// `Σ c_m ζ^m` over the listed frequencies.
    Trig { terms: Vec<Term> },
    /// `½ cos θ₁ + ¼ sin θ₂`.
    Smooth,
    /// Grid samples written by the library's JSON serializer.
    File { path: PathBuf },
    Atoms { atoms: Vec<Atom> },
    /// `count` atoms drawn from the run seed.
    RandomAtoms { count: usize },
}

impl DataConfig {
    pub fn function(&self, grid: &TorusGrid) -> polyharm::Result<GridFunction> {
        match self {
            DataConfig::Constant { value } => Ok(GridFunction::constant(grid.clone(), (*value).into())),
            DataConfig::Trig { terms } => {
                for t in terms {
                    if t.m.len() != grid.dim() {
                        return Err(Error::DimensionMismatch { expected: grid.dim(), got: t.m.len() });
                    }
                }
                Ok(GridFunction::from_fn(grid.clone(), |z| {
                    terms
                        .iter()
                        .map(|t| {
                            let ph: f64 = t.m.iter().zip(z.angles()).map(|(&k, a)| k as f64 * a).sum();
                            Complex64::from(t.c) * Complex64::from_polar(1.0, ph)
                        })
                        .sum()
                }))
            }
            DataConfig::Smooth => Ok(smooth_datum(grid.clone())),
            DataConfig::File { path } => {
                let s = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                let f = GridFunction::from_json(&s)?;
                if f.dim() != grid.dim() {
                    return Err(Error::DimensionMismatch { expected: grid.dim(), got: f.dim() });
                }
                Ok(f)
            }
            DataConfig::Atoms { .. } | DataConfig::RandomAtoms { .. } => Err(Error::InvalidArgument(
                "this command needs function data, not a measure".into(),
            )),
        }
    }

    pub fn measure(&self, dim: usize, seed: u64) -> polyharm::Result<AtomicMeasure> {
        match self {
            DataConfig::Atoms { atoms } => AtomicMeasure::new(
                dim,
                atoms
                    .iter()
                    .map(|a| (TorusPoint::new(a.angles.clone()), a.weight.into()))
                    .collect(),
            ),
            DataConfig::RandomAtoms { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(random_measure(&mut rng, dim, *count))
            }
            _ => Err(Error::InvalidArgument("this command needs a measure (atoms or random_atoms)".into())),
        }
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, DataConfig::Atoms { .. } | DataConfig::RandomAtoms { .. })
    }
}

/// A query point given by coordinates, or by radii and angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Query {
    Coords { z: Vec<Cplx> },
    Polar { radii: Vec<f64>, angles: Vec<f64> },
}

impl Query {
    pub fn point(&self) -> polyharm::Result<PolyPoint> {
        match self {
            Query::Coords { z } => {
                let c: Vec<Complex64> = z.iter().map(|&w| w.into()).collect();
                PolyPoint::from_coords(&c)
            }
            Query::Polar { radii, angles } => PolyPoint::new(radii.clone(), angles.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalTarget {
    /// `P(z, ζ)` at the configured `zeta`.
    Kernel,
    Poisson,
    /// Truncated homogeneous expansion of the data.
    Expansion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub target: EvalTarget,
    /// Boundary point of the kernel; `𝟏` when absent.
    pub zeta: Option<Vec<f64>>,
    pub queries: Vec<Query>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            target: EvalTarget::Poisson,
            zeta: None,
            queries: vec![Query::Coords { z: vec![Cplx::real(0.5)] }],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    Weak11,
    Convergence,
    Fatou,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub kind: ScanKind,
    /// Radii of the convergence scan.
    pub ladder: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            kind: ScanKind::Convergence,
            ladder: vec![0.5, 0.9, 0.99, 0.999],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpandConfig {
    pub max_order: u32,
    /// Points where the truncated series is summed.
    pub queries: Vec<Query>,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        Self { max_order: 8, queries: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirichletConfig {
    /// Solve on `r · ζ` for each radius and every node of `grid`.
    pub radii: Vec<f64>,
    pub queries: Vec<Query>,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 0.9],
            queries: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximalConfig {
    pub kind: MaximalKind,
    /// Levels λ of the level-set curve.
    pub lambdas: Vec<f64>,
    /// Centres where the maximal function is evaluated.
    pub grid: Vec<usize>,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        Self {
            kind: MaximalKind::Gamma(vec![0]),
            lambdas: (0..13).map(|k| 10f64.powf(-1.0 + 0.25 * k as f64)).collect(),
            grid: vec![512],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FatouConfig {
    /// Vertex grid of the sweep.
    pub vertices: Vec<usize>,
    pub aperture: f64,
    /// `None` scans the full cone.
    pub restriction: Option<f64>,
    pub tolerance: f64,
    pub paths: usize,
    pub steps: usize,
}

impl Default for FatouConfig {
    fn default() -> Self {
        Self {
            vertices: vec![32],
            aperture: 2.0,
            restriction: Some(2.0),
            tolerance: 1e-3,
            paths: 8,
            steps: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyBlock {
    pub cases: usize,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self { cases: polyharm::verify::VerifyConfig::default().cases }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub params: ParamsConfig,
    /// Boundary grid sizes, one per axis.
    pub grid: Vec<usize>,
    pub data: DataConfig,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    pub eval: EvalConfig,
    pub verify: VerifyBlock,
    pub scan: ScanConfig,
    pub expand: ExpandConfig,
    pub dirichlet: DirichletConfig,
    pub maximal: MaximalConfig,
    pub fatou: FatouConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ParamsConfig {
                alpha: vec![Cplx::default()],
                beta: vec![Cplx::default()],
            },
            grid: vec![64],
            data: DataConfig::Constant { value: Cplx::real(1.0) },
            seed: polyharm::verify::VerifyConfig::default().seed,
            tolerances: Tolerances::default(),
            out: PathBuf::from("polyharm-out"),
            eval: EvalConfig::default(),
            verify: VerifyBlock::default(),
            scan: ScanConfig::default(),
            expand: ExpandConfig::default(),
            dirichlet: DirichletConfig::default(),
            maximal: MaximalConfig::default(),
            fatou: FatouConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let s = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&s).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate(&self) -> polyharm::Result<Params> {
        let params = self.params.build()?;
        if self.grid.len() != params.dim() {
            return Err(Error::DimensionMismatch { expected: params.dim(), got: self.grid.len() });
        }
        Ok(params)
    }

    pub fn boundary_grid(&self) -> polyharm::Result<TorusGrid> {
        TorusGrid::new(self.grid.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
