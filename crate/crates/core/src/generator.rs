//! Archimedean generators and the built-in families.
//!
//! A generator ψ: [0, ∞) → [0, 1] is continuous and nonincreasing with
//! ψ(0) = 1 and ψ(x) → 0, strictly decreasing until it first reaches zero
//! at x₀ = ψ⁻¹(0) (possibly +∞). Every built-in family has closed-form
//! one-sided derivatives of all orders; at a kink point the left and right
//! derivatives are taken from the neighbouring branches.
//!
//! All generators are immutable after construction and can be shared across
//! threads freely.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numdiff;

/// Absolute tolerance of the numeric inverse.
pub const INVERSE_TOL: f64 = 1e-13;

/// Sentinel for "closed form available at every order".
pub const UNBOUNDED_ORDER: usize = usize::MAX;

/// Which one-sided derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    Clayton,
    Independence,
    LowerBound,
    ReciprocalUniform,
    PowerKink,
    DiscreteRadial,
    PiecewiseQuadratic,
    Custom,
}

impl FamilyId {
    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Clayton => "clayton",
            FamilyId::Independence => "independence",
            FamilyId::LowerBound => "lower_bound",
            FamilyId::ReciprocalUniform => "reciprocal_uniform",
            FamilyId::PowerKink => "power_kink",
            FamilyId::DiscreteRadial => "discrete_radial",
            FamilyId::PiecewiseQuadratic => "piecewise_quadratic",
            FamilyId::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "clayton" => FamilyId::Clayton,
            "independence" => FamilyId::Independence,
            "lower_bound" => FamilyId::LowerBound,
            "reciprocal_uniform" => FamilyId::ReciprocalUniform,
            "power_kink" => FamilyId::PowerKink,
            "discrete_radial" => FamilyId::DiscreteRadial,
            "piecewise_quadratic" => FamilyId::PiecewiseQuadratic,
            "custom" => FamilyId::Custom,
            _ => return None,
        })
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point mass of a radial law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Self {
        Self { location, mass }
    }
}

/// User-supplied generator.
///
/// Only `psi` is required. Missing derivatives fall back to one-sided finite
/// differences and a missing inverse to bisection.
pub trait CustomGenerator: Send + Sync + fmt::Debug {
    fn name(&self) -> &str {
        "custom"
    }

    fn psi(&self, x: f64) -> f64;

    /// `order`-th one-sided derivative, when known in closed form.
    fn derivative(&self, _x: f64, _order: usize, _side: Side) -> Option<f64> {
        None
    }

    /// Highest order for which `derivative` returns `Some`.
    fn max_analytic_order(&self) -> usize {
        0
    }

    fn inverse(&self, _u: f64) -> Option<f64> {
        None
    }

    /// `inf{x : ψ(x) = 0}` if known; `None` means "search for it".
    fn zero_point(&self) -> Option<f64> {
        None
    }

    fn kink_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone)]
enum Family {
    Clayton { theta: f64 },
    Independence,
    LowerBound { d: usize },
    ReciprocalUniform { a: f64, b: f64, d: usize },
    PowerKink { theta: f64 },
    DiscreteRadial { atoms: Arc<[Atom]>, d: usize },
    PiecewiseQuadratic,
    Custom(Arc<dyn CustomGenerator>),
}

/// Family parameters as they appear in a [`GeneratorConfig`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Atom list as `[location, mass]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<[f64; 2]>>,
    /// Success probability of a geometric radial law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Rescaling ψ(x / scale); leaves the copula unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

/// Serialized form of a generator: `{family, params: {...}, d_context}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub family: FamilyId,
    #[serde(default)]
    pub params: FamilyParams,
    pub d_context: usize,
}

impl GeneratorConfig {
    pub fn build(&self) -> Result<Generator> {
        make_family(self.family, &self.params, self.d_context)
    }
}

/// An Archimedean generator ψ.
#[derive(Debug, Clone)]
pub struct Generator {
    family: Family,
    scale: f64,
    d_context: usize,
    /// Kinks in the unscaled coordinate of the family.
    unit_kinks: Vec<f64>,
    kinks: Vec<f64>,
    zero: f64,
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|j| (n - j) as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    falling(n, k) / (1..=k).map(|j| j as f64).product::<f64>()
}

fn neg_pow(t: f64, k: usize) -> f64 {
    let v = t.recip().powi(k as i32);
    if k % 2 == 0 {
        v
    } else {
        -v
    }
}

fn active(y: f64, edge: f64, side: Side) -> bool {
    match side {
        Side::Right => y < edge,
        Side::Left => y <= edge,
    }
}

/// k-th derivative of (1 − y/t)₊^m.
fn trunc_pow_deriv(y: f64, t: f64, m: usize, k: usize, side: Side) -> f64 {
    if !active(y, t, side) || k > m {
        return 0.0;
    }
    falling(m, k) * neg_pow(t, k) * (1.0 - y / t).powi((m - k) as i32)
}

impl Family {
    fn id(&self) -> FamilyId {
        match self {
            Family::Clayton { .. } => FamilyId::Clayton,
            Family::Independence => FamilyId::Independence,
            Family::LowerBound { .. } => FamilyId::LowerBound,
            Family::ReciprocalUniform { .. } => FamilyId::ReciprocalUniform,
            Family::PowerKink { .. } => FamilyId::PowerKink,
            Family::DiscreteRadial { .. } => FamilyId::DiscreteRadial,
            Family::PiecewiseQuadratic => FamilyId::PiecewiseQuadratic,
            Family::Custom(_) => FamilyId::Custom,
        }
    }

    fn zero(&self) -> f64 {
        match self {
            Family::Clayton { theta } if *theta < 0.0 => -1.0 / theta,
            Family::Clayton { .. } | Family::Independence => f64::INFINITY,
            Family::LowerBound { .. } | Family::PowerKink { .. } => 1.0,
            Family::ReciprocalUniform { b, .. } => *b,
            Family::DiscreteRadial { atoms, .. } => atoms
                .iter()
                .map(|a| a.location)
                .fold(0.0, f64::max),
            Family::PiecewiseQuadratic => 0.75,
            Family::Custom(c) => c.zero_point().unwrap_or_else(|| search_zero(|x| c.psi(x))),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k = match self {
            Family::Clayton { theta } if *theta < 0.0 => vec![-1.0 / theta],
            Family::Clayton { .. } | Family::Independence => vec![],
            Family::LowerBound { .. } | Family::PowerKink { .. } => vec![1.0],
            Family::ReciprocalUniform { a, b, .. } => vec![*a, *b],
            Family::DiscreteRadial { atoms, .. } => atoms.iter().map(|a| a.location).collect(),
            Family::PiecewiseQuadratic => vec![0.5, 0.75],
            Family::Custom(c) => c.kink_points(),
        };
        k.retain(|x| x.is_finite() && *x > 0.0);
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    fn max_analytic_order(&self) -> usize {
        match self {
            Family::Custom(c) => c.max_analytic_order(),
            _ => UNBOUNDED_ORDER,
        }
    }

    /// Closed-form `k`-th one-sided derivative at `y ≥ 0` (k = 0 gives ψ).
    /// Returns `None` when no closed form exists (custom generators).
    fn deriv(&self, y: f64, k: usize, side: Side) -> Option<f64> {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Some(match self {
            Family::Independence => sign * (-y).exp(),
            Family::Clayton { theta } => {
                let theta = *theta;
                if theta == 0.0 {
                    return Some(sign * (-y).exp());
                }
                let coef: f64 = (0..k).map(|j| 1.0 + j as f64 * theta).product();
                if theta > 0.0 {
                    sign * coef * (-(1.0 / theta + k as f64) * (theta * y).ln_1p()).exp()
                } else {
                    let alpha = -1.0 / theta;
                    if !active(y, alpha, side) || coef == 0.0 {
                        0.0
                    } else {
                        let expo = alpha - k as f64;
                        let base = 1.0 - y / alpha;
                        let pow = if base <= 0.0 {
                            match expo.partial_cmp(&0.0) {
                                Some(std::cmp::Ordering::Greater) => 0.0,
                                Some(std::cmp::Ordering::Equal) => 1.0,
                                _ => f64::INFINITY,
                            }
                        } else {
                            (expo * (theta * y).ln_1p()).exp()
                        };
                        sign * coef * pow
                    }
                }
            }
            Family::LowerBound { d } => trunc_pow_deriv(y, 1.0, d - 1, k, side),
            Family::DiscreteRadial { atoms, d } => atoms
                .iter()
                .map(|a| a.mass * trunc_pow_deriv(y, a.location, d - 1, k, side))
                .sum(),
            Family::ReciprocalUniform { a, b, d } => reciprocal_uniform_deriv(*a, *b, *d, y, k, side),
            Family::PowerKink { theta } => {
                if !active(y, 1.0, side) {
                    0.0
                } else {
                    let beta = 1.0 / theta;
                    if k == 0 {
                        1.0 - y.powf(beta)
                    } else {
                        let coef: f64 = (0..k).map(|j| beta - j as f64).product();
                        if coef == 0.0 {
                            0.0
                        } else {
                            -coef * y.powf(beta - k as f64)
                        }
                    }
                }
            }
            Family::PiecewiseQuadratic => {
                let c = 1.0 / 7.0;
                if active(y, 0.5, side) {
                    match k {
                        0 => 8.0 * c * y * y - 16.0 * c * y + 1.0,
                        1 => 16.0 * c * (y - 1.0),
                        2 => 16.0 * c,
                        _ => 0.0,
                    }
                } else if active(y, 0.75, side) {
                    match k {
                        0 => 16.0 * c * y * y - 24.0 * c * y + 9.0 * c,
                        1 => 16.0 * c * (2.0 * y - 1.5),
                        2 => 32.0 * c,
                        _ => 0.0,
                    }
                } else {
                    0.0
                }
            }
            Family::Custom(c) => {
                if k == 0 {
                    c.psi(y)
                } else if k <= c.max_analytic_order() {
                    return c.derivative(y, k, side);
                } else {
                    return None;
                }
            }
        })
    }

    fn inverse(&self, u: f64) -> Option<f64> {
        Some(match self {
            Family::Independence => -u.ln(),
            Family::Clayton { theta } => {
                if *theta == 0.0 {
                    -u.ln()
                } else {
                    (-theta * u.ln()).exp_m1() / theta
                }
            }
            Family::LowerBound { d } => 1.0 - u.powf(1.0 / (*d as f64 - 1.0)),
            Family::PowerKink { theta } => (1.0 - u).powf(*theta),
            Family::PiecewiseQuadratic => {
                if u >= 1.0 / 7.0 {
                    1.0 - ((7.0 * u + 1.0) / 8.0).sqrt()
                } else {
                    (3.0 - (7.0 * u).sqrt()) / 4.0
                }
            }
            Family::Custom(c) => return c.inverse(u),
            Family::ReciprocalUniform { .. } | Family::DiscreteRadial { .. } => return None,
        })
    }
}

fn reciprocal_uniform_deriv(a: f64, b: f64, d: usize, y: f64, k: usize, side: Side) -> f64 {
    let scale = a * b / (d as f64 * (b - a));
    if active(y, a, side) {
        // Below a both truncations are inactive and the bracket is a
        // polynomial divisible by y: Σ_{i<d} q_i y^i.
        (k..d)
            .map(|i| {
                let j = i + 1;
                let q = scale
                    * binomial(d, j)
                    * if j % 2 == 0 { 1.0 } else { -1.0 }
                    * (b.powi(-(j as i32)) - a.powi(-(j as i32)));
                q * falling(i, k) * y.powi((i - k) as i32)
            })
            .sum()
    } else if active(y, b, side) {
        // scale · y⁻¹ · (1 − y/b)^d, differentiated by Leibniz' rule.
        (0..=k)
            .map(|j| {
                let inv = neg_pow(1.0, j) * falling(j, j) * y.powi(-(j as i32) - 1);
                binomial(k, j) * inv * trunc_pow_deriv(y, b, d, k - j, side)
            })
            .sum::<f64>()
            * scale
    } else {
        0.0
    }
}

/// Smallest x with ψ(x) = 0, or +∞ if ψ stays positive up to 1e300.
fn search_zero<F: Fn(f64) -> f64>(psi: F) -> f64 {
    let mut hi = 1.0;
    while psi(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while hi - lo > INVERSE_TOL && hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // A generator that only reaches zero through floating-point underflow
    // is strict.
    if psi(lo) < 1e-300 {
        return f64::INFINITY;
    }
    hi
}

/// Bisection for ψ(x) = u with ψ nonincreasing.
fn bisect_inverse<F: Fn(f64) -> f64>(psi: F, u: f64, upper: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = if upper.is_finite() {
        upper
    } else {
        let mut hi = 1.0;
        while psi(hi) >= u {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        hi
    };
    while hi - lo > INVERSE_TOL && hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Generator {
    fn from_family(family: Family, d_context: usize) -> Self {
        let unit_kinks = family.kinks();
        let zero = family.zero();
        Self {
            kinks: unit_kinks.clone(),
            unit_kinks,
            zero,
            family,
            scale: 1.0,
            d_context,
        }
    }

    /// Clayton ψ_θ(x) = (1 + θx)₊^{−1/θ}; θ = 0 is the exact exponential.
    ///
    /// Any finite θ gives a generator; whether it is d-monotone is a separate
    /// question (see [`make_family`] and the monotonicity checker).
    pub fn clayton(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::param("clayton", "theta must be finite"));
        }
        Ok(Self::from_family(Family::Clayton { theta }, 2))
    }

    /// ψ(x) = e^{−x}, generating the independence copula in every dimension.
    pub fn independence() -> Self {
        Self::from_family(Family::Independence, 2)
    }

    /// ψ_d^L(x) = (1 − x)₊^{d−1}.
    pub fn lower_bound(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("lower_bound", format!("d = {d} must be >= 2")));
        }
        Ok(Self::from_family(Family::LowerBound { d }, d))
    }

    /// Williamson d-transform of the reciprocal of a Uniform[1/b, 1/a] law.
    pub fn reciprocal_uniform(a: f64, b: f64, d: usize) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::param(
                "reciprocal_uniform",
                format!("need 0 < a < b < inf, got a = {a}, b = {b}"),
            ));
        }
        if d < 2 {
            return Err(Error::param("reciprocal_uniform", format!("d = {d} must be >= 2")));
        }
        Ok(Self::from_family(Family::ReciprocalUniform { a, b, d }, d))
    }

    /// ψ(x) = (1 − x^{1/θ})₊, convex for θ ≥ 1.
    pub fn power_kink(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::param("power_kink", format!("theta = {theta} must be > 0")));
        }
        Ok(Self::from_family(Family::PowerKink { theta }, 2))
    }

    /// Williamson d-transform of a finite atom list: Σ pᵢ (1 − x/tᵢ)₊^{d−1}.
    pub fn discrete_radial(atoms: &[Atom], d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("discrete_radial", format!("d = {d} must be >= 2")));
        }
        if atoms.is_empty() {
            return Err(Error::param("discrete_radial", "atom list is empty"));
        }
        for a in atoms {
            if !(a.location > 0.0 && a.location.is_finite()) {
                return Err(Error::param(
                    "discrete_radial",
                    format!("atom location {} must be positive and finite", a.location),
                ));
            }
            if !(a.mass > 0.0) {
                return Err(Error::param(
                    "discrete_radial",
                    format!("atom mass {} must be positive", a.mass),
                ));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "discrete_radial",
                format!("atom masses sum to {total}, expected 1"),
            ));
        }
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|x, y| x.location.total_cmp(&y.location));
        Ok(Self::from_family(
            Family::DiscreteRadial {
                atoms: sorted.into(),
                d,
            },
            d,
        ))
    }

    /// Geometric radial law P(R = i) = p(1 − p)^{i−1}, truncated once the
    /// remaining tail drops below 1e−15; the tail is folded into the last atom.
    pub fn geometric(p: f64, d: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param("discrete_radial", format!("p = {p} must lie in (0, 1]")));
        }
        Self::discrete_radial(&geometric_atoms(p), d)
    }

    /// The bivariate generator with three quadratic branches and kinks at
    /// 0.5 and 0.75; 2-monotone but not 3-monotone.
    pub fn piecewise_quadratic() -> Self {
        Self::from_family(Family::PiecewiseQuadratic, 2)
    }

    pub fn custom(inner: Arc<dyn CustomGenerator>, d_context: usize) -> Self {
        Self::from_family(Family::Custom(inner), d_context)
    }

    /// ψ(x / k); generates the same copula as ψ.
    pub fn rescaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::param(self.family.id().name(), format!("scale {k} must be > 0")));
        }
        let mut g = self.clone();
        g.scale *= k;
        g.kinks = g.unit_kinks.iter().map(|t| t * g.scale).collect();
        g.zero = g.family.zero() * g.scale;
        Ok(g)
    }

    /// Same generator with a different declared dimension context.
    pub fn with_d_context(mut self, d: usize) -> Self {
        self.d_context = d;
        self
    }

    pub fn family_id(&self) -> FamilyId {
        self.family.id()
    }

    pub fn d_context(&self) -> usize {
        self.d_context
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Clayton θ, power-kink θ, or `None`.
    pub fn theta(&self) -> Option<f64> {
        match &self.family {
            Family::Clayton { theta } | Family::PowerKink { theta } => Some(*theta),
            _ => None,
        }
    }

    pub fn max_analytic_order(&self) -> usize {
        self.family.max_analytic_order()
    }

    /// Points where some derivative of ψ is discontinuous, ascending.
    pub fn kink_points(&self) -> &[f64] {
        &self.kinks
    }

    /// x₀ = inf{x : ψ(x) = 0}; +∞ for strict generators.
    pub fn zero_point(&self) -> f64 {
        self.zero
    }

    pub fn is_strict(&self) -> bool {
        self.zero.is_infinite()
    }

    fn unit(&self, x: f64) -> f64 {
        let y = x / self.scale;
        if self.scale != 1.0 {
            for &k in &self.unit_kinks {
                if (y - k).abs() <= 8.0 * f64::EPSILON * k {
                    return k;
                }
            }
        }
        y
    }

    /// ψ(x) for x ≥ 0; ψ(+∞) = 0.
    pub fn psi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x.is_infinite() {
            return 0.0;
        }
        let y = self.unit(x);
        match &self.family {
            Family::Custom(c) => c.psi(y),
            f => f.deriv(y, 0, Side::Right).expect("closed form"),
        }
    }

    /// Generalized inverse; ψ⁻¹(0) = x₀ and ψ⁻¹(1) = 0.
    pub fn psi_inv(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        if u <= 0.0 {
            return self.zero;
        }
        let y = match self.family.inverse(u) {
            Some(y) => y,
            None => bisect_inverse(|t| self.psi(t * self.scale), u, self.family.zero()),
        };
        (y * self.scale).max(0.0)
    }

    /// Moves `x` onto a kink point (or x₀) lying within a relative 1e−9.
    ///
    /// Numeric inverses land a few ulps away from kinks, which matters for
    /// anything reading off one-sided derivatives there.
    pub fn snap_to_kink(&self, x: f64) -> f64 {
        let near = |k: f64| (x - k).abs() <= 1e-9 * k.max(1.0);
        if self.zero.is_finite() && near(self.zero) {
            return self.zero;
        }
        self.kinks.iter().copied().find(|&k| near(k)).unwrap_or(x)
    }

    /// One-sided `order`-th derivative at x > 0.
    ///
    /// Closed forms are used up to [`Self::max_analytic_order`]; beyond it,
    /// second-order one-sided finite differences of ψ.
    pub fn psi_deriv(&self, x: f64, order: usize, side: Side) -> Result<f64> {
        if order == 0 {
            return Ok(self.psi(x));
        }
        let y = self.unit(x);
        let value = match self.family.deriv(y, order, side) {
            Some(v) => v / self.scale.powi(order as i32),
            None => return self.psi_deriv_fd(x, order, side),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFiniteDerivative { x, order })
        }
    }

    /// Finite-difference estimate of the derivative, regardless of whether a
    /// closed form exists.
    pub fn psi_deriv_fd(&self, x: f64, order: usize, side: Side) -> Result<f64> {
        let v = numdiff::one_sided_derivative(|t| self.psi(t), x, order, side);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteDerivative { x, order })
        }
    }

    /// Serializable description; `None` for custom generators.
    pub fn config(&self) -> Option<GeneratorConfig> {
        let mut params = FamilyParams::default();
        match &self.family {
            Family::Clayton { theta } | Family::PowerKink { theta } => params.theta = Some(*theta),
            Family::ReciprocalUniform { a, b, .. } => {
                params.a = Some(*a);
                params.b = Some(*b);
            }
            Family::DiscreteRadial { atoms, .. } => {
                params.atoms = Some(atoms.iter().map(|a| [a.location, a.mass]).collect())
            }
            Family::Custom(_) => return None,
            _ => {}
        }
        if self.scale != 1.0 {
            params.scale = Some(self.scale);
        }
        Some(GeneratorConfig {
            family: self.family_id(),
            params,
            d_context: self.d_context,
        })
    }

    /// Short human-readable label such as `clayton(theta=1)`.
    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Clayton { theta } => format!("clayton(theta={theta})"),
            Family::Independence => "independence".to_string(),
            Family::LowerBound { d } => format!("lower_bound(d={d})"),
            Family::ReciprocalUniform { a, b, d } => format!("reciprocal_uniform(a={a},b={b},d={d})"),
            Family::PowerKink { theta } => format!("power_kink(theta={theta})"),
            Family::DiscreteRadial { atoms, d } => format!("discrete_radial({} atoms,d={d})", atoms.len()),
            Family::PiecewiseQuadratic => "piecewise_quadratic".to_string(),
            Family::Custom(c) => c.name().to_string(),
        };
        if self.scale != 1.0 {
            format!("{base}[scale={}]", self.scale)
        } else {
            base
        }
    }
}

pub(crate) fn geometric_atoms(p: f64) -> Vec<Atom> {
    let mut atoms = Vec::new();
    let mut tail = 1.0;
    let mut i = 1;
    loop {
        let mass = p * (1.0 - p).powi(i - 1);
        tail -= mass;
        atoms.push(Atom::new(i as f64, mass));
        if (1.0 - p).powi(i) < 1e-15 || i > 10_000 {
            break;
        }
        i += 1;
    }
    if let Some(last) = atoms.last_mut() {
        last.mass += tail.max(0.0);
    }
    atoms
}

fn need(value: Option<f64>, family: &'static str, name: &str) -> Result<f64> {
    value.ok_or_else(|| Error::param(family, format!("missing parameter {name}")))
}

/// Builds a built-in family and checks that its parameters are admissible
/// at dimension `d_context`.
///
/// Admissible sets: clayton θ ≥ −1/(d−1); reciprocal_uniform 0 < a < b;
/// power_kink θ ≥ 1 with d = 2; piecewise_quadratic d = 2; discrete_radial
/// positive masses summing to one at positive locations.
pub fn make_family(family: FamilyId, params: &FamilyParams, d_context: usize) -> Result<Generator> {
    let name = family.name();
    if d_context < 2 {
        return Err(Error::param(name, format!("d = {d_context} must be >= 2")));
    }
    let g = match family {
        FamilyId::Clayton => {
            let theta = need(params.theta, name, "theta")?;
            let bound = -1.0 / (d_context as f64 - 1.0);
            if theta < bound {
                return Err(Error::param(
                    name,
                    format!("theta = {theta} < -1/(d-1) = {bound} for d = {d_context}"),
                ));
            }
            Generator::clayton(theta)?
        }
        FamilyId::Independence => Generator::independence(),
        FamilyId::LowerBound => Generator::lower_bound(d_context)?,
        FamilyId::ReciprocalUniform => Generator::reciprocal_uniform(
            need(params.a, name, "a")?,
            need(params.b, name, "b")?,
            d_context,
        )?,
        FamilyId::PowerKink => {
            let theta = need(params.theta, name, "theta")?;
            if theta < 1.0 {
                return Err(Error::param(name, format!("theta = {theta} must be >= 1")));
            }
            if d_context != 2 {
                return Err(Error::param(
                    name,
                    format!("only 2-monotone; d = {d_context} must equal 2"),
                ));
            }
            Generator::power_kink(theta)?
        }
        FamilyId::DiscreteRadial => match (&params.atoms, params.p) {
            (Some(atoms), _) => {
                let atoms: Vec<Atom> = atoms.iter().map(|&[t, p]| Atom::new(t, p)).collect();
                Generator::discrete_radial(&atoms, d_context)?
            }
            (None, Some(p)) => Generator::geometric(p, d_context)?,
            (None, None) => return Err(Error::param(name, "need atoms or p")),
        },
        FamilyId::PiecewiseQuadratic => {
            if d_context != 2 {
                return Err(Error::param(
                    name,
                    format!("only 2-monotone; d = {d_context} must equal 2"),
                ));
            }
            Generator::piecewise_quadratic()
        }
        FamilyId::Custom => {
            return Err(Error::param(name, "custom generators cannot be built from parameters"))
        }
    };
    let g = g.with_d_context(d_context);
    match params.scale {
        Some(k) => g.rescaled(k),
        None => Ok(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn ex45() -> Generator {
        Generator::discrete_radial(&[Atom::new(1.0, 2.0 / 3.0), Atom::new(2.0, 1.0 / 3.0)], 2).unwrap()
    }

    #[test]
    fn psi_examples() {
        let lb = Generator::lower_bound(3).unwrap();
        assert!(close(lb.psi(0.5), 0.25, 1e-15));
        let c0 = Generator::clayton(0.0).unwrap();
        assert!(close(c0.psi(1.0), 0.367_879_441_171_442_3, 1e-15));
        assert!(close(ex45().psi(1.0), 1.0 / 6.0, 1e-15));
        assert_eq!(c0.psi(f64::INFINITY), 0.0);
    }

    #[test]
    fn psi_inv_examples() {
        assert_eq!(Generator::lower_bound(4).unwrap().psi_inv(0.0), 1.0);
        assert_eq!(Generator::clayton(0.0).unwrap().psi_inv(0.0), f64::INFINITY);
        assert!(close(Generator::clayton(1.0).unwrap().psi_inv(0.5), 1.0, 1e-15));
        assert!(close(ex45().psi_inv(1.0 / 6.0), 1.0, 1e-12));
        assert_eq!(ex45().psi_inv(0.0), 2.0);
    }

    #[test]
    fn derivative_examples() {
        let c0 = Generator::clayton(0.0).unwrap();
        let v = c0.psi_deriv(1.0, 2, Side::Right).unwrap();
        assert!(close(v, (-1.0f64).exp(), 1e-15));
        let lb = Generator::lower_bound(3).unwrap();
        assert!(close(lb.psi_deriv(0.5, 1, Side::Left).unwrap(), -1.0, 1e-15));
        // −(1/θ) t^{1/θ − 1} at θ = 2, t = 0.25.
        let pk = Generator::power_kink(2.0).unwrap();
        assert!(close(pk.psi_deriv(0.25, 1, Side::Right).unwrap(), -1.0, 1e-14));
    }

    #[test]
    fn one_sided_derivatives_at_kinks() {
        let g = ex45();
        assert!(close(g.psi_deriv(1.0, 1, Side::Left).unwrap(), -5.0 / 6.0, 1e-15));
        assert!(close(g.psi_deriv(1.0, 1, Side::Right).unwrap(), -1.0 / 6.0, 1e-15));
        let lb = Generator::lower_bound(3).unwrap();
        assert!(close(lb.psi_deriv(1.0, 2, Side::Left).unwrap(), 2.0, 1e-15));
        assert_eq!(lb.psi_deriv(1.0, 2, Side::Right).unwrap(), 0.0);
    }

    #[test]
    fn clayton_boundary_divergence_is_reported() {
        // α = 2.5: the third derivative blows up at x = α from the left.
        let g = Generator::clayton(-0.4).unwrap();
        assert!(matches!(
            g.psi_deriv(2.5, 3, Side::Left),
            Err(Error::NonFiniteDerivative { .. })
        ));
        assert_eq!(g.psi_deriv(2.5, 3, Side::Right).unwrap(), 0.0);
    }

    #[test]
    fn make_family_examples() {
        let p = FamilyParams {
            theta: Some(-0.5),
            ..Default::default()
        };
        let g = make_family(FamilyId::Clayton, &p, 3).unwrap();
        for x in [0.1, 0.7, 1.3, 1.9, 2.5] {
            let expected = (1.0 - x / 2.0f64).max(0.0).powi(2);
            assert!(close(g.psi(x), expected, 1e-15));
        }

        let p = FamilyParams {
            a: Some(1.0),
            b: Some(2.0),
            ..Default::default()
        };
        let g = make_family(FamilyId::ReciprocalUniform, &p, 2).unwrap();
        for x in [0.05, 0.5, 0.99, 1.0, 1.5, 1.99, 2.5] {
            let expected = (2.0 / (2.0 * x))
                * ((1.0 - x / 2.0f64).max(0.0).powi(2) - (1.0 - x).max(0.0).powi(2));
            assert!(close(g.psi(x), expected, 1e-14), "x = {x}");
        }

        let p = FamilyParams {
            theta: Some(-1.0),
            ..Default::default()
        };
        let err = make_family(FamilyId::Clayton, &p, 3).unwrap_err();
        assert!(err.to_string().contains("-1/(d-1)"), "{err}");
    }

    #[test]
    fn make_family_rejects_bad_params() {
        let bad = [
            (FamilyId::ReciprocalUniform, FamilyParams { a: Some(2.0), b: Some(1.0), ..Default::default() }, 2),
            (FamilyId::PowerKink, FamilyParams { theta: Some(0.5), ..Default::default() }, 2),
            (FamilyId::PowerKink, FamilyParams { theta: Some(2.0), ..Default::default() }, 3),
            (FamilyId::DiscreteRadial, FamilyParams { atoms: Some(vec![[1.0, 0.5]]), ..Default::default() }, 2),
            (FamilyId::DiscreteRadial, FamilyParams { atoms: Some(vec![[0.0, 1.0]]), ..Default::default() }, 2),
            (FamilyId::PiecewiseQuadratic, FamilyParams::default(), 3),
            (FamilyId::Clayton, FamilyParams::default(), 2),
        ];
        for (family, params, d) in bad {
            assert!(
                matches!(make_family(family, &params, d), Err(Error::InvalidParameter { .. })),
                "{family} {params:?} d={d}"
            );
        }
    }

    #[test]
    fn kinks_and_zero_points() {
        let g = Generator::clayton(-0.25).unwrap();
        assert_eq!(g.kink_points(), &[4.0]);
        assert_eq!(g.zero_point(), 4.0);
        let g = Generator::piecewise_quadratic();
        assert_eq!(g.kink_points(), &[0.5, 0.75]);
        assert_eq!(g.zero_point(), 0.75);
        assert!(Generator::independence().is_strict());
    }

    #[test]
    fn piecewise_quadratic_is_c1() {
        let g = Generator::piecewise_quadratic();
        for k in [0.5, 0.75] {
            let l = g.psi_deriv(k, 1, Side::Left).unwrap();
            let r = g.psi_deriv(k, 1, Side::Right).unwrap();
            assert!(close(l, r, 1e-15), "{k}: {l} vs {r}");
        }
        assert!(close(g.psi(0.5), 1.0 / 7.0, 1e-15));
        for u in [0.9, 0.3, 1.0 / 7.0, 0.05] {
            assert!(close(g.psi(g.psi_inv(u)), u, 1e-14));
        }
    }

    #[test]
    fn rescaling_moves_kinks() {
        let g = Generator::lower_bound(3).unwrap().rescaled(2.0).unwrap();
        assert_eq!(g.kink_points(), &[2.0]);
        assert!(close(g.psi(1.0), 0.25, 1e-15));
        assert!(close(g.psi_deriv(2.0, 2, Side::Left).unwrap(), 0.5, 1e-15));
        assert!(close(g.psi_inv(0.25), 1.0, 1e-14));
    }

    #[test]
    fn geometric_atoms_sum_to_one() {
        let atoms = geometric_atoms(0.3);
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        assert!(close(total, 1.0, 1e-15));
        assert!(close(atoms[0].mass, 0.3, 1e-16));
    }

    #[test]
    fn config_round_trip() {
        let g = Generator::reciprocal_uniform(1.0, 8.0, 2).unwrap();
        let cfg = g.config().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(
            json,
            r#"{"family":"reciprocal_uniform","params":{"a":1.0,"b":8.0},"d_context":2}"#
        );
        let back: GeneratorConfig = serde_json::from_str(&json).unwrap();
        let h = back.build().unwrap();
        assert_eq!(h.psi(1.5), g.psi(1.5));
    }

    #[derive(Debug)]
    struct Exp;
    impl CustomGenerator for Exp {
        fn psi(&self, x: f64) -> f64 {
            (-x).exp()
        }
    }

    #[test]
    fn custom_generator_falls_back_to_numerics() {
        let g = Generator::custom(Arc::new(Exp), 3);
        assert!(g.is_strict());
        assert!(close(g.psi_inv(0.5), 2f64.ln(), 1e-12));
        let d2 = g.psi_deriv(1.0, 2, Side::Right).unwrap();
        assert!(((d2 - (-1.0f64).exp()) / (-1.0f64).exp()).abs() < 1e-5);
        assert!(g.config().is_none());
    }
}
