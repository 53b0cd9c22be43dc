//! Points of the polydisc and the torus, tensor grids, Stolz cones,
//! γ-boxes and the dyadic partitions adapted to a radius vector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative slack used by cone-membership comparisons.
const CONE_SLACK: f64 = 1e-12;

/// Reduce an angle into `[-π, π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return exactly 2π for tiny negative inputs
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// A point of the torus `𝕋ⁿ`, stored as angles in `[-π, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    angles: Vec<f64>,
}

impl TorusPoint {
    pub fn new(angles: Vec<f64>) -> Self {
        Self {
            angles: angles.into_iter().map(wrap_angle).collect(),
        }
    }

    /// The point `𝟏 = (1, ..., 1)`.
    pub fn one(n: usize) -> Self {
        Self {
            angles: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn coord(&self, axis: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.angles[axis])
    }

    pub fn coords(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|j| self.coord(j)).collect()
    }

    /// Coordinatewise product `ζ · η`.
    pub fn rotate(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::new(
            self.angles
                .iter()
                .zip(&other.angles)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Largest coordinatewise angular distance to `other`.
    pub fn max_distance(&self, other: &TorusPoint) -> f64 {
        self.angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| wrap_angle(a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A point `z = (r_1 e^{iθ_1}, ..., r_n e^{iθ_n})` of the open polydisc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPoint {
    radii: Vec<f64>,
    angles: Vec<f64>,
}

impl PolyPoint {
    pub fn new(radii: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if radii.len() != angles.len() {
            return Err(Error::DimensionMismatch {
                expected: radii.len(),
                got: angles.len(),
            });
        }
        for (axis, &r) in radii.iter().enumerate() {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::RadiusOutOfRange {
                    axis: axis + 1,
                    radius: r,
                });
            }
        }
        Ok(Self {
            radii,
            angles: angles.into_iter().map(wrap_angle).collect(),
        })
    }

    pub fn from_coords(z: &[Complex64]) -> Result<Self> {
        Self::new(z.iter().map(|w| w.norm()).collect(), z.iter().map(|w| w.arg()).collect())
    }

    /// `r · ζ` for a radius vector and a torus point.
    pub fn dilate(radii: &[f64], zeta: &TorusPoint) -> Result<Self> {
        Self::new(radii.to_vec(), zeta.angles().to_vec())
    }

    pub fn origin(n: usize) -> Self {
        Self {
            radii: vec![0.0; n],
            angles: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn coord(&self, axis: usize) -> Complex64 {
        Complex64::from_polar(self.radii[axis], self.angles[axis])
    }

    pub fn coords(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|j| self.coord(j)).collect()
    }

    /// `ζ · z`.
    pub fn rotate(&self, zeta: &TorusPoint) -> PolyPoint {
        PolyPoint {
            radii: self.radii.clone(),
            angles: self
                .angles
                .iter()
                .zip(zeta.angles())
                .map(|(a, b)| wrap_angle(a + b))
                .collect(),
        }
    }

    /// Replace one coordinate by an interior point of the disc.
    pub fn with_coord(&self, axis: usize, w: Complex64) -> Result<PolyPoint> {
        let mut radii = self.radii.clone();
        let mut angles = self.angles.clone();
        radii[axis] = w.norm();
        angles[axis] = w.arg();
        PolyPoint::new(radii, angles)
    }

    /// `max_j (1 - r_j)`.
    pub fn max_gap(&self) -> f64 {
        self.radii.iter().map(|r| 1.0 - r).fold(0.0, f64::max)
    }
}

/// Uniform tensor grid on `𝕋ⁿ`; node `k` sits at angles `2πk_j/N_j - π`.
///
/// Flat indices are row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    sizes: Vec<usize>,
}

impl TorusGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        if let Some(n) = sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("axis size {n} < 2")));
        }
        Ok(Self { sizes })
    }

    pub fn uniform(n: usize, size: usize) -> Result<Self> {
        Self::new(vec![size; n])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Normalized Haar weight of one cell.
    pub fn cell_measure(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn axis_angle(&self, axis: usize, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.sizes[axis] as f64 - PI
    }

    pub fn axis_angles(&self, axis: usize) -> Vec<f64> {
        (0..self.sizes[axis]).map(|k| self.axis_angle(axis, k)).collect()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = flat % self.sizes[j];
            flat /= self.sizes[j];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn node(&self, flat: usize) -> TorusPoint {
        let idx = self.unravel(flat);
        TorusPoint::new(
            idx.iter()
                .enumerate()
                .map(|(j, &k)| self.axis_angle(j, k))
                .collect(),
        )
    }

    pub fn nodes(&self) -> impl Iterator<Item = TorusPoint> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Stolz cone at `vertex` with aperture `A`; `restriction = Some(B)` gives
/// the restricted cone `S_{A,B}`, `None` the full cone `S_A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StolzCone {
    pub vertex: TorusPoint,
    pub aperture: f64,
    pub restriction: Option<f64>,
}

impl StolzCone {
    pub fn new(vertex: TorusPoint, aperture: f64, restriction: Option<f64>) -> Result<Self> {
        if !(aperture > 0.0 && aperture.is_finite()) {
            return Err(Error::InvalidArgument(format!("aperture {aperture} must be positive")));
        }
        if let Some(b) = restriction {
            if !(b >= 1.0 && b.is_finite()) {
                return Err(Error::InvalidArgument(format!("restriction {b} must be >= 1")));
            }
        }
        Ok(Self {
            vertex,
            aperture,
            restriction,
        })
    }

    pub fn dim(&self) -> usize {
        self.vertex.dim()
    }

    pub fn contains(&self, z: &PolyPoint) -> bool {
        for j in 0..self.dim() {
            let gap = 1.0 - z.radii()[j];
            let offset = wrap_angle(z.angles()[j] - self.vertex.angles()[j]).abs();
            let round = (self.aperture + 4.0) * 4.0 * f64::EPSILON;
            if offset > self.aperture * gap * (1.0 + CONE_SLACK) + round {
                return false;
            }
        }
        match self.restriction {
            None => true,
            Some(b) => {
                let gaps = z.radii().iter().map(|r| 1.0 - r);
                let (lo, hi) = gaps.fold((f64::INFINITY, 0.0f64), |(lo, hi), g| {
                    (lo.min(g), hi.max(g))
                });
                hi <= b * lo * (1.0 + CONE_SLACK) + 2.0 * b * f64::EPSILON
            }
        }
    }
}

/// An approach profile inside a cone: angular offsets
/// `θ_j = ψ_j + c_j A (1 - r_j)` with `|c_j| ≤ 1` and gaps `1 - r_j`
/// proportional to `d_j`, the ladder of gaps `1 - s` running geometrically
/// from `start_gap` to `end_gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachProfile {
    pub offsets: Vec<f64>,
    pub depths: Vec<f64>,
    pub start_gap: f64,
    pub end_gap: f64,
}

impl ApproachProfile {
    pub const DEFAULT_START_GAP: f64 = 0.5;
    pub const DEFAULT_END_GAP: f64 = 1e-9;

    pub fn new(offsets: Vec<f64>, depths: Vec<f64>) -> Self {
        Self {
            offsets,
            depths,
            start_gap: Self::DEFAULT_START_GAP,
            end_gap: Self::DEFAULT_END_GAP,
        }
    }

    pub fn radial(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![1.0; n])
    }

    pub fn with_gaps(mut self, start_gap: f64, end_gap: f64) -> Self {
        self.start_gap = start_gap;
        self.end_gap = end_gap;
        self
    }

    /// Gap ladder `1 - s_k`, geometric and strictly decreasing.
    pub fn gap_ladder(&self, steps: usize) -> Vec<f64> {
        let ratio = (self.end_gap / self.start_gap).powf(1.0 / (steps - 1) as f64);
        (0..steps)
            .map(|k| {
                if k + 1 == steps {
                    self.end_gap
                } else {
                    self.start_gap * ratio.powi(k as i32)
                }
            })
            .collect()
    }

    fn validate(&self, cone: &StolzCone) -> Result<()> {
        let n = cone.dim();
        if self.offsets.len() != n || self.depths.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.offsets.len().min(self.depths.len()),
            });
        }
        if let Some(c) = self.offsets.iter().find(|c| c.abs() > 1.0) {
            return Err(Error::InvalidProfile(format!("angular offset {c} outside [-1, 1]")));
        }
        if self.depths.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidProfile("depths must be positive".into()));
        }
        let hi = self.depths.iter().cloned().fold(0.0, f64::max);
        let lo = self.depths.iter().cloned().fold(f64::INFINITY, f64::min);
        let limit = cone.restriction.unwrap_or(f64::INFINITY);
        if hi / lo > limit {
            return Err(Error::InvalidProfile(format!(
                "depth ratio {} exceeds B = {limit}",
                hi / lo
            )));
        }
        if !(self.start_gap <= 1.0 && self.end_gap > 0.0 && self.end_gap < self.start_gap) {
            return Err(Error::InvalidProfile(format!(
                "gap ladder {} -> {} must decrease inside (0, 1]",
                self.start_gap, self.end_gap
            )));
        }
        Ok(())
    }
}

/// Points of the cone along `profile`, radii increasing strictly to 1.
pub fn approach_path(
    cone: &StolzCone,
    steps: usize,
    profile: &ApproachProfile,
) -> Result<Vec<PolyPoint>> {
    if steps < 2 {
        return Err(Error::InvalidProfile(format!("steps = {steps} < 2")));
    }
    profile.validate(cone)?;
    let dmax = profile.depths.iter().cloned().fold(0.0, f64::max);
    profile
        .gap_ladder(steps)
        .into_iter()
        .map(|gap| {
            let gaps: Vec<f64> = profile.depths.iter().map(|d| d / dmax * gap).collect();
            let angles = gaps
                .iter()
                .zip(&profile.offsets)
                .zip(cone.vertex.angles())
                .map(|((g, c), psi)| psi + c * cone.aperture * g)
                .collect();
            PolyPoint::new(gaps.iter().map(|g| 1.0 - g).collect(), angles)
        })
        .collect()
}

/// A γ-box: a product of half-open arcs centred at `center`, arc `j` of
/// length `min(scale · 2^{γ_j}, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaBox {
    pub gamma: Vec<u32>,
    pub center: TorusPoint,
    pub scale: f64,
}

impl GammaBox {
    /// Largest admissible scale: the longest arc equals `2π`.
    pub fn max_scale(gamma: &[u32]) -> f64 {
        let top = gamma.iter().copied().max().unwrap_or(0);
        2.0 * PI * 0.5f64.powi(top as i32)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.gamma
            .iter()
            .map(|&g| (self.scale * 2f64.powi(g as i32)).min(2.0 * PI))
            .collect()
    }

    /// Normalized Haar measure `m_n(Q)`.
    pub fn measure(&self) -> f64 {
        self.lengths().iter().map(|l| l / (2.0 * PI)).product()
    }

    pub fn contains(&self, zeta: &TorusPoint) -> bool {
        self.lengths()
            .iter()
            .zip(self.center.angles())
            .zip(zeta.angles())
            .all(|((&len, &c), &a)| in_arc(a, c, len))
    }
}

/// Membership of angle `a` in the half-open arc `[c - len/2, c + len/2)`.
pub fn in_arc(a: f64, c: f64, len: f64) -> bool {
    if len >= 2.0 * PI {
        return true;
    }
    (a - (c - 0.5 * len)).rem_euclid(2.0 * PI) < len
}

/// Sign of a half-arc in a one-dimensional partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Dyadic partition `𝒫_ρ` of `𝕋` for one radius `ρ`:
/// `π / ((1-ρ) κ) = 2^p` with `κ ∈ [1, 2)` and breakpoints
/// `x_0 = 0`, `x_j = 2^{j-1} (1-ρ) κ`, `x_{p+1} = π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPartition {
    pub rho: f64,
    pub kappa: f64,
    pub p: u32,
    pub breakpoints: Vec<f64>,
}

impl AxisPartition {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::RadiusOutOfRange { axis: 1, radius: rho });
        }
        let gap = 1.0 - rho;
        let ratio = PI / gap;
        let mut p = ratio.log2().floor() as i32;
        let mut kappa = ratio / 2f64.powi(p);
        // float rule: κ within 1e-12 of 2 belongs to the next p with κ = 1
        if kappa >= 2.0 - 1e-12 {
            p += 1;
            kappa = ratio / 2f64.powi(p);
        }
        if kappa < 1.0 - 1e-12 {
            p -= 1;
            kappa = ratio / 2f64.powi(p);
        }
        let kappa = kappa.clamp(1.0, 2.0 - f64::EPSILON);
        let p = p as u32;
        let mut breakpoints = Vec::with_capacity(p as usize + 2);
        breakpoints.push(0.0);
        for j in 1..=p {
            breakpoints.push(2f64.powi(j as i32 - 1) * gap * kappa);
        }
        breakpoints.push(PI);
        Ok(Self {
            rho,
            kappa,
            p,
            breakpoints,
        })
    }

    /// Number of arcs `2(p + 1)`.
    pub fn arc_count(&self) -> usize {
        2 * (self.p as usize + 1)
    }

    /// `(side, j)` of the arc `I_j^±` containing the offset angle.
    pub fn locate(&self, offset: f64) -> (Side, u32) {
        let t = wrap_angle(offset);
        let (side, x) = if t >= 0.0 { (Side::Plus, t) } else { (Side::Minus, -t) };
        let bp = &self.breakpoints;
        // Plus arcs are [x_j, x_{j+1}), minus arcs are [-x_{j+1}, -x_j)
        let j = match side {
            Side::Plus => bp.partition_point(|&b| b <= x) - 1,
            Side::Minus => bp.partition_point(|&b| b < x) - 1,
        };
        (side, j.min(self.p as usize) as u32)
    }

    /// Angular interval `[lo, hi)` of `I_j^±` relative to the vertex.
    pub fn interval(&self, side: Side, j: u32) -> (f64, f64) {
        let (a, b) = (self.breakpoints[j as usize], self.breakpoints[j as usize + 1]);
        match side {
            Side::Plus => (a, b),
            Side::Minus => (-b, -a),
        }
    }

    /// `m_1(I_j^±)`.
    pub fn arc_measure(&self, j: u32) -> f64 {
        let j = j as usize;
        (self.breakpoints[j + 1] - self.breakpoints[j]) / (2.0 * PI)
    }
}

/// Index of a box `Q(ε, j)` of a product partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxIndex {
    pub signs: Vec<Side>,
    pub j: Vec<u32>,
}

/// Product partition `𝒫_r` of `𝕋ⁿ` around a vertex, for radii obeying
/// `max(1 - r_k) ≤ B min(1 - r_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub vertex: TorusPoint,
    pub axes: Vec<AxisPartition>,
    /// Axes sorted by increasing radius.
    pub order: Vec<usize>,
    pub bound: f64,
    /// Smallest integer `b ≥ 0` with `B ≤ 2^b`.
    pub b: u32,
    /// Offsets making each enclosing box `R(j)` a `(j + ι)`-box.
    pub iota: Vec<u32>,
}

impl DyadicPartition {
    pub fn build(rvec: &[f64], bound: f64) -> Result<Self> {
        Self::build_at(rvec, bound, TorusPoint::one(rvec.len()))
    }

    pub fn build_at(rvec: &[f64], bound: f64, vertex: TorusPoint) -> Result<Self> {
        if rvec.is_empty() {
            return Err(Error::InvalidArgument("empty radius vector".into()));
        }
        if vertex.dim() != rvec.len() {
            return Err(Error::DimensionMismatch {
                expected: rvec.len(),
                got: vertex.dim(),
            });
        }
        if !(bound >= 1.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("B = {bound} must be finite and >= 1")));
        }
        let axes = rvec
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                AxisPartition::new(r).map_err(|_| Error::RadiusOutOfRange {
                    axis: k + 1,
                    radius: r,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let gaps: Vec<f64> = rvec.iter().map(|r| 1.0 - r).collect();
        let hi = gaps.iter().cloned().fold(0.0, f64::max);
        let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi > bound * lo * (1.0 + 1e-12) {
            return Err(Error::RestrictionViolated {
                ratio: hi / lo,
                bound,
            });
        }
        let mut b = 0u32;
        while 2f64.powi(b as i32) < bound {
            b += 1;
        }
        let mut order: Vec<usize> = (0..rvec.len()).collect();
        order.sort_by(|&i, &j| rvec[i].total_cmp(&rvec[j]));
        let pmax = axes.iter().map(|a| a.p).max().unwrap_or(0);
        let iota = axes.iter().map(|a| pmax - a.p).collect();
        Ok(Self {
            vertex,
            axes,
            order,
            bound,
            b,
            iota,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn box_count(&self) -> usize {
        self.axes.iter().map(|a| a.arc_count()).product()
    }

    /// All box indices, in lexicographic order of `(ε, j)` per axis.
    pub fn boxes(&self) -> Vec<BoxIndex> {
        let mut out = vec![BoxIndex {
            signs: vec![],
            j: vec![],
        }];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(out.len() * axis.arc_count());
            for idx in &out {
                for side in [Side::Plus, Side::Minus] {
                    for j in 0..=axis.p {
                        let mut e = idx.clone();
                        e.signs.push(side);
                        e.j.push(j);
                        next.push(e);
                    }
                }
            }
            out = next;
        }
        out
    }

    pub fn locate(&self, zeta: &TorusPoint) -> BoxIndex {
        let (signs, j) = self
            .axes
            .iter()
            .enumerate()
            .map(|(k, a)| a.locate(zeta.angles()[k] - self.vertex.angles()[k]))
            .unzip();
        BoxIndex { signs, j }
    }

    pub fn contains(&self, idx: &BoxIndex, zeta: &TorusPoint) -> bool {
        self.locate(zeta) == *idx
    }

    /// `m_n(Q(ε, j))`.
    pub fn box_measure(&self, idx: &BoxIndex) -> f64 {
        self.axes
            .iter()
            .zip(&idx.j)
            .map(|(a, &j)| a.arc_measure(j))
            .product()
    }

    /// `4^{-n} Π_k 2^{j_k - p_k}`; equals `m_n(Q(ε, j))` when every
    /// `j_k ≥ 1`, and is half the arc measure on axes with `j_k = 0`.
    pub fn dyadic_measure(&self, j: &[u32]) -> f64 {
        self.axes
            .iter()
            .zip(j)
            .map(|(a, &jk)| 0.25 * 2f64.powi(jk as i32 - a.p as i32))
            .product()
    }

    /// The enclosing box `R(j)`: all `θ` with `-x_{j_k+1} ≤ θ_k < x_{j_k+1}`.
    pub fn enclosing_box(&self, j: &[u32]) -> GammaBox {
        let pmax = self.axes.iter().map(|a| a.p).max().unwrap_or(0);
        GammaBox {
            gamma: j.iter().zip(&self.iota).map(|(a, b)| a + b).collect(),
            center: self.vertex.clone(),
            scale: 2.0 * PI * 0.5f64.powi(pmax as i32),
        }
    }
}
