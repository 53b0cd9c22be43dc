//! Parameters, the kernels `u_{α,β}`, `P_{α,β}` and their positive
//! majorants `u_t`, `U_t`, `V_t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Condition, Error, Result};
use crate::geometry::{PolyPoint, TorusPoint};
use crate::special::{gamma, gamma_real, rgamma};

/// Kernel evaluation refuses radii above `1 - NEAR_BOUNDARY`.
pub const NEAR_BOUNDARY: f64 = 1e-12;

fn is_negative_integer(w: Complex64) -> bool {
    w.im == 0.0 && w.re <= -1.0 && w.re.fract() == 0.0
}

/// Validated parameter vectors `α, β ∈ ℂⁿ` with derived constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
    c: Vec<Complex64>,
    t: Vec<f64>,
    k_bound: f64,
    k_ab: f64,
    k_t: f64,
    q: f64,
    c_t: f64,
}

impl Params {
    pub fn validate(alpha: &[Complex64], beta: &[Complex64]) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                got: beta.len(),
            });
        }
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("parameters need at least one axis".into()));
        }
        for (j, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
            let condition = if is_negative_integer(a) {
                Some(Condition::AlphaNegativeInteger)
            } else if is_negative_integer(b) {
                Some(Condition::BetaNegativeInteger)
            } else if !(a.re + b.re > -1.0) {
                Some(Condition::RealPartSum)
            } else {
                None
            };
            if let Some(condition) = condition {
                return Err(Error::ConditionViolated {
                    axis: j + 1,
                    condition,
                });
            }
        }

        let mut c = Vec::with_capacity(alpha.len());
        let mut t = Vec::with_capacity(alpha.len());
        let mut k_bound = 1.0;
        let mut k_ab = 1.0;
        let mut k_t = 1.0;
        let mut imag_gap = 0.0;
        for (&a, &b) in alpha.iter().zip(beta) {
            let one = Complex64::new(1.0, 0.0);
            let cj = gamma(a + one)? * gamma(b + one)? * rgamma(a + b + one);
            let tj = a.re + b.re;
            let ratio = gamma_real(tj + 1.0)? / gamma_real(0.5 * tj + 1.0)?.powi(2);
            k_bound *= cj.norm() * ratio;
            k_ab *= cj.norm();
            k_t /= ratio;
            imag_gap += (a.im - b.im).abs();
            c.push(cj);
            t.push(tj);
        }
        k_bound *= (0.5 * PI * imag_gap).exp();
        let m = t.iter().map(|tj| tj + 1.0).fold(f64::INFINITY, f64::min);
        let q = 2f64.powf(-m);
        let c_t = t.iter().map(|tj| tj + 2.0).sum();
        Ok(Self {
            alpha: alpha.to_vec(),
            beta: beta.to_vec(),
            c,
            t,
            k_bound,
            k_ab,
            k_t,
            q,
            c_t,
        })
    }

    /// Real parameters `α_j = β_j = s_j`.
    pub fn real_symmetric(s: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = s.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::validate(&v, &v)
    }

    /// The same parameters on every axis.
    pub fn uniform(n: usize, alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::validate(&vec![alpha; n], &vec![beta; n])
    }

    /// Classical n-harmonic case `α = β = 0`.
    pub fn harmonic(n: usize) -> Self {
        Self::real_symmetric(&vec![0.0; n]).expect("zero parameters are admissible")
    }

    /// `(β, α)`.
    pub fn swapped(&self) -> Self {
        Self::validate(&self.beta, &self.alpha).expect("swap preserves admissibility")
    }

    /// Parameters of the retained axes.
    pub fn restrict(&self, axes: &[usize]) -> Result<Self> {
        let a: Vec<_> = axes.iter().map(|&j| self.alpha[j]).collect();
        let b: Vec<_> = axes.iter().map(|&j| self.beta[j]).collect();
        Self::validate(&a, &b)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    /// `c_{α_j, β_j}` per axis.
    pub fn c(&self) -> &[Complex64] {
        &self.c
    }

    /// `Π_j c_{α_j, β_j} = P(0, ζ)`.
    pub fn c_product(&self) -> Complex64 {
        self.c.iter().product()
    }

    /// `t_j = Re α_j + Re β_j`.
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    /// The bound `K(α, β)` on `‖P(z, ·)‖_{L¹}`.
    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    /// `Π |c_j|`.
    pub fn k_ab(&self) -> f64 {
        self.k_ab
    }

    /// `Π Γ²(t_j/2 + 1) / Γ(t_j + 1)`.
    pub fn k_t(&self) -> f64 {
        self.k_t
    }

    /// `2^{-min(t_k + 1)}`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `Σ (t_j + 2)`.
    pub fn c_t(&self) -> f64 {
        self.c_t
    }

    /// `min_k (t_k + 1)`.
    pub fn decay_exponent(&self) -> f64 {
        self.t.iter().map(|t| t + 1.0).fold(f64::INFINITY, f64::min)
    }

    pub fn is_real_symmetric(&self) -> bool {
        self.alpha
            .iter()
            .zip(&self.beta)
            .all(|(a, b)| a.im == 0.0 && a == b)
    }
}

/// `ln(1 - r²)` and `1 - r e^{iθ}` as `(ln|w|, arg w)`, accurate for
/// `r → 1` and small `θ`.
fn log_parts(r: f64, theta: f64) -> (f64, f64, f64) {
    let gap = 1.0 - r;
    let ln_mass = (gap * (1.0 + r)).ln();
    let s = (0.5 * theta).sin();
    let re = gap + 2.0 * r * s * s;
    let im = -r * theta.sin();
    (ln_mass, re.hypot(im).ln(), im.atan2(re))
}

/// `u_{α,β}(r e^{iθ})`.
pub fn u_ab_polar(alpha: Complex64, beta: Complex64, r: f64, theta: f64) -> Complex64 {
    let (ln_mass, ln_abs, arg) = log_parts(r, theta);
    let one = Complex64::new(1.0, 0.0);
    let e = (alpha + beta + one) * ln_mass
        - (alpha + beta + 2.0 * one) * ln_abs
        - Complex64::i() * (alpha - beta) * arg;
    e.exp()
}

/// `u_{α,β}(z) = (1-|z|²)^{α+β+1} / ((1-z)^{α+1} (1-z̄)^{β+1})`.
pub fn u_ab(alpha: Complex64, beta: Complex64, z: Complex64) -> Complex64 {
    u_ab_polar(alpha, beta, z.norm(), z.arg())
}

/// `v_{α,β} = c_{α,β} u_{α,β}` on one axis of `params`.
pub fn v_axis(params: &Params, axis: usize, r: f64, theta: f64) -> Complex64 {
    params.c[axis] * u_ab_polar(params.alpha[axis], params.beta[axis], r, theta)
}

pub fn check_interior(z: &PolyPoint) -> Result<()> {
    for (j, &r) in z.radii().iter().enumerate() {
        if r > 1.0 - NEAR_BOUNDARY {
            return Err(Error::NearBoundary { axis: j + 1, radius: r });
        }
    }
    Ok(())
}

fn check_dims(params: &Params, n: usize) -> Result<()> {
    if params.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: n,
        });
    }
    Ok(())
}

/// `P_{α,β}(z, ζ) = Π_j c_j u_{α_j,β_j}(z_j ζ̄_j)`.
pub fn poisson_kernel(params: &Params, z: &PolyPoint, zeta: &TorusPoint) -> Result<Complex64> {
    check_dims(params, z.dim())?;
    check_dims(params, zeta.dim())?;
    check_interior(z)?;
    Ok((0..params.dim())
        .map(|j| v_axis(params, j, z.radii()[j], z.angles()[j] - zeta.angles()[j]))
        .product())
}

/// `u_t(r e^{iθ}) = (1-r²)^{t+1} / |1 - r e^{iθ}|^{t+2}`.
pub fn u_t_polar(t: f64, r: f64, theta: f64) -> f64 {
    let (ln_mass, ln_abs, _) = log_parts(r, theta);
    ((t + 1.0) * ln_mass - (t + 2.0) * ln_abs).exp()
}

/// `v_t = Γ²(t/2+1)/Γ(t+1) · u_t`.
pub fn v_t_polar(t: f64, r: f64, theta: f64) -> Result<f64> {
    let k = gamma_real(0.5 * t + 1.0)?.powi(2) / gamma_real(t + 1.0)?;
    Ok(k * u_t_polar(t, r, theta))
}

/// `U_t(z · ζ̄) = Π_j u_{t_j}(z_j ζ̄_j)`.
pub fn positive_majorant(t: &[f64], z: &PolyPoint, zeta: &TorusPoint) -> Result<f64> {
    if t.len() != z.dim() || t.len() != zeta.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: z.dim().min(zeta.dim()),
        });
    }
    if let Some(&bad) = t.iter().find(|&&tj| !(tj > -1.0)) {
        return Err(Error::InvalidArgument(format!("t = {bad} must exceed -1")));
    }
    check_interior(z)?;
    Ok((0..t.len())
        .map(|j| u_t_polar(t[j], z.radii()[j], z.angles()[j] - zeta.angles()[j]))
        .product())
}

/// The positive kernel `K_t(z, ζ) = V_t(z · ζ̄)`, equal to `P_{t/2, t/2}`.
pub fn positive_kernel(t: &[f64], z: &PolyPoint, zeta: &TorusPoint) -> Result<f64> {
    let u = positive_majorant(t, z, zeta)?;
    let k: f64 = t
        .iter()
        .map(|&tj| Ok(gamma_real(0.5 * tj + 1.0)?.powi(2) / gamma_real(tj + 1.0)?))
        .product::<Result<f64>>()?;
    Ok(k * u)
}

/// The majorant bound `2^{t+1} π^{t+2} (1-r)^{t+1} / |θ|^{t+2}`.
pub fn u_t_decay_bound(t: f64, r: f64, theta: f64) -> f64 {
    2f64.powf(t + 1.0) * PI.powf(t + 2.0) * (1.0 - r).powf(t + 1.0) / theta.abs().powf(t + 2.0)
}

/// Samples per axis for the `L¹` mass sum: at least 512 and enough to
/// resolve a kernel of angular width `1 - r`.
pub fn mass_grid_size(r: f64) -> usize {
    let need = (32.0 / (1.0 - r)).ceil() as usize;
    need.next_power_of_two().max(512)
}

/// Rectangle-rule value of `∫ |P(z, ζ)| dm_n(ζ)`; the integrand factorizes
/// so the sum is a product of one-dimensional sums.
pub fn kernel_mass(params: &Params, z: &PolyPoint) -> Result<f64> {
    check_dims(params, z.dim())?;
    check_interior(z)?;
    Ok((0..params.dim())
        .map(|j| {
            let r = z.radii()[j];
            let n = mass_grid_size(r);
            let terms: Vec<f64> = (0..n)
                .map(|k| {
                    let psi = 2.0 * PI * k as f64 / n as f64 - PI;
                    v_axis(params, j, r, z.angles()[j] - psi).norm()
                })
                .collect();
            crate::pairwise_sum(&terms) / n as f64
        })
        .product())
}

/// Central-difference value of `L_{α,β} f` at `z`:
/// `(1-|z|²) Δf/4 + α z ∂f + β z̄ ∂̄f - αβ f`.
pub fn apply_operator<F>(alpha: Complex64, beta: Complex64, f: F, z: Complex64, h: f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let f0 = f(z);
    let fxp = f(z + h);
    let fxm = f(z - h);
    let fyp = f(z + Complex64::new(0.0, h));
    let fym = f(z - Complex64::new(0.0, h));
    let fx = (fxp - fxm) / (2.0 * h);
    let fy = (fyp - fym) / (2.0 * h);
    let lap = (fxp + fxm + fyp + fym - 4.0 * f0) / (h * h);
    let d = 0.5 * (fx - Complex64::i() * fy);
    let dbar = 0.5 * (fx + Complex64::i() * fy);
    (1.0 - z.norm_sqr()) * 0.25 * lap + alpha * z * d + beta * z.conj() * dbar - alpha * beta * f0
}

/// `L_{α_j,β_j}` acting on the `axis`-th variable of a function on `𝔻ⁿ`.
pub fn apply_operator_axis<F>(params: &Params, axis: usize, f: F, z: &[Complex64], h: f64) -> Complex64
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let base = z.to_vec();
    apply_operator(
        params.alpha[axis],
        params.beta[axis],
        |v| {
            let mut w = base.clone();
            w[axis] = v;
            f(&w)
        },
        z[axis],
        h,
    )
}

/// Step sizes of the convergence-order test.
pub const FD_STEPS: [f64; 3] = [1e-2, 5e-3, 1e-3];

/// Finite-difference residuals at [`FD_STEPS`] and the observed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualOrder {
    pub residuals: [f64; 3],
    /// `None` when the coarse residuals already sit at the roundoff floor.
    pub order: Option<f64>,
    pub floor: f64,
    /// `|(4 L_{h/2} - L_h) / 3|` at `h = 2e-3`, cancelling the `h²` term.
    pub extrapolated: f64,
}

impl ResidualOrder {
    pub fn final_residual(&self) -> f64 {
        self.residuals[2]
    }

    pub fn order_in(&self, lo: f64, hi: f64) -> bool {
        self.order.is_none_or(|o| (lo..=hi).contains(&o))
    }
}

pub fn residual_order<F>(alpha: Complex64, beta: Complex64, f: F, z: Complex64) -> ResidualOrder
where
    F: Fn(Complex64) -> Complex64,
{
    let scale = [0.0, 1.0, -1.0]
        .iter()
        .flat_map(|&dx| [0.0, 1.0, -1.0].map(|dy| f(z + Complex64::new(dx, dy) * FD_STEPS[0]).norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let residuals = FD_STEPS.map(|h| apply_operator(alpha, beta, &f, z, h).norm());
    let coarse = apply_operator(alpha, beta, &f, z, 2.0 * FD_STEPS[2]);
    let fine = apply_operator(alpha, beta, &f, z, FD_STEPS[2]);
    let extrapolated = ((4.0 * fine - coarse) / 3.0).norm();
    let floor = 64.0 * f64::EPSILON * scale / (FD_STEPS[1] * FD_STEPS[1]);
    let order = if residuals[1] > 100.0 * floor {
        Some((residuals[0] / residuals[1]).log2() / (FD_STEPS[0] / FD_STEPS[1]).log2())
    } else {
        None
    };
    ResidualOrder {
        residuals,
        order,
        floor,
        extrapolated,
    }
}

/// [`residual_order`] for the `axis`-th variable of a function on `𝔻ⁿ`.
pub fn residual_order_axis<F>(params: &Params, axis: usize, f: F, z: &[Complex64]) -> ResidualOrder
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let base = z.to_vec();
    residual_order(
        params.alpha[axis],
        params.beta[axis],
        |v| {
            let mut w = base.clone();
            w[axis] = v;
            f(&w)
        },
        z[axis],
    )
}
