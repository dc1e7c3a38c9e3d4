//! The Williamson d-transform and its explicit inverse.
//!
//! Forward: 𝔚_d F(x) = E(1 − x/X)₊^{d−1} for x > 0 and 1 − F(0) at x = 0.
//! Inverse: F(x) = 1 − Σ_{k=0}^{d−1} (−1)^k x^k ψ^{(k)}(x) / k!, where the
//! last term uses the right derivative ψ₊^{(d−1)} so that F is
//! right-continuous. Atoms of F sit exactly where ψ^{(d−1)} jumps.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::generator::{Atom, CustomGenerator, FamilyId, Generator, Side};
use crate::quadrature::Quadrature;
use crate::radial::{factorial, ContinuousPart, RadialDistribution};

/// Values of the inverse transform within this distance of [0, 1] are
/// rounding noise and get clamped; anything further is an error.
pub const CLAMP_TOL: f64 = 1e-9;

/// Smallest jump of F treated as an atom.
pub const ATOM_TOL: f64 = 1e-10;

type Pdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A probability density on `[lower, upper]` with optional interior points
/// where it is not smooth.
#[derive(Clone)]
pub struct DensityInput {
    pdf: Pdf,
    pub lower: f64,
    pub upper: f64,
    pub breaks: Vec<f64>,
}

impl fmt::Debug for DensityInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityInput")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("breaks", &self.breaks)
            .finish_non_exhaustive()
    }
}

impl DensityInput {
    pub fn new(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, lower: f64, upper: f64) -> Self {
        Self {
            pdf: Arc::new(pdf),
            lower,
            upper,
            breaks: Vec::new(),
        }
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < self.lower || t > self.upper {
            0.0
        } else {
            (self.pdf)(t)
        }
    }

    fn integrate(&self, q: &Quadrature, from: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        let lo = from.max(self.lower).max(0.0);
        Ok(q.integrate_with_breaks(|t| {
            let p = self.pdf(t);
            if p == 0.0 {
                0.0
            } else {
                p * g(t)
            }
        }, lo, self.upper, &self.breaks)?
            .value)
    }
}

/// A radial law handed to the forward transform.
#[derive(Debug, Clone)]
pub enum RadialInput {
    Atoms(Vec<Atom>),
    Density(DensityInput),
    /// Nonnegative observations, each with mass 1/n.
    Empirical(Vec<f64>),
    Distribution(RadialDistribution),
}

impl RadialInput {
    /// Erlang(d) density tᵈ⁻¹e⁻ᵗ/(d−1)!, whose transform is e⁻ˣ.
    pub fn erlang(d: usize) -> Self {
        let log_norm = factorial(d - 1).ln();
        let shape = (d - 1) as f64;
        RadialInput::Density(DensityInput::new(
            move |t: f64| {
                if t <= 0.0 {
                    0.0
                } else {
                    (shape * t.ln() - t - log_norm).exp()
                }
            },
            0.0,
            f64::INFINITY,
        ))
    }
}

fn transform_quadrature() -> Quadrature {
    Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension d = {d} must be >= 2")));
    }
    Ok(())
}

/// 𝔚_d F(x).
pub fn williamson_transform(input: &RadialInput, d: usize, x: f64) -> Result<f64> {
    check_dimension(d)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!("x = {x} must be >= 0")));
    }
    let m = (d - 1) as i32;
    let kernel = |t: f64| {
        if t <= x {
            0.0
        } else {
            (1.0 - x / t).powi(m)
        }
    };
    match input {
        RadialInput::Atoms(atoms) => Ok(atoms
            .iter()
            .filter(|a| a.location > 0.0)
            .map(|a| a.mass * if x == 0.0 { 1.0 } else { kernel(a.location) })
            .sum()),
        RadialInput::Empirical(sample) => {
            if sample.is_empty() {
                return Err(Error::InvalidInput("empty sample".into()));
            }
            let s: f64 = sample
                .iter()
                .map(|&t| if x == 0.0 { (t > 0.0) as u8 as f64 } else { kernel(t) })
                .sum();
            Ok(s / sample.len() as f64)
        }
        RadialInput::Density(density) => {
            let q = Quadrature::with_tolerance(1e-10, 1e-12);
            if x == 0.0 {
                density.integrate(&q, 0.0, |_| 1.0)
            } else {
                density.integrate(&q, x, kernel)
            }
        }
        RadialInput::Distribution(r) => {
            if x == 0.0 {
                return Ok(1.0 - r.cdf(0.0));
            }
            // Integration by parts: E g(X) = ∫ g′(t) P(X > t) dt.
            let breaks: Vec<f64> = r.atoms().iter().map(|a| a.location).collect();
            let q = Quadrature::with_tolerance(1e-10, 1e-12);
            let est = q.integrate_with_breaks(
                |t| {
                    let tail = 1.0 - r.cdf(t);
                    if tail <= 0.0 {
                        0.0
                    } else {
                        tail * (d - 1) as f64 * (1.0 - x / t).powi(m - 1) * x / (t * t)
                    }
                },
                x,
                r.upper(),
                &breaks,
            )?;
            Ok(est.value)
        }
    }
}

/// Generator obtained as the Williamson transform of a density. Derivatives
/// up to order d come from differentiating under the integral sign.
#[derive(Debug)]
struct DensityTransform {
    density: DensityInput,
    d: usize,
    quad: Quadrature,
}

impl DensityTransform {
    fn eval(&self, x: f64, k: usize) -> f64 {
        let d = self.d;
        let m = d - 1;
        if k == d {
            if x <= 0.0 {
                return f64::NAN;
            }
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            return sign * factorial(m) * x.powi(1 - d as i32) * self.density.pdf(x);
        }
        let coef: f64 = (0..k).map(|j| (m - j) as f64).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let value = self.density.integrate(&self.quad, x, |t| {
            if t <= x {
                return 0.0;
            }
            t.recip().powi(k as i32) * (1.0 - x / t).powi((m - k) as i32)
        });
        value.map(|v| sign * coef * v).unwrap_or(f64::NAN)
    }
}

impl CustomGenerator for DensityTransform {
    fn name(&self) -> &str {
        "williamson_transform"
    }

    fn psi(&self, x: f64) -> f64 {
        self.eval(x, 0)
    }

    fn derivative(&self, x: f64, order: usize, _side: Side) -> Option<f64> {
        (order <= self.d).then(|| self.eval(x, order))
    }

    fn max_analytic_order(&self) -> usize {
        self.d
    }

    fn zero_point(&self) -> Option<f64> {
        Some(self.density.upper)
    }

    fn kink_points(&self) -> Vec<f64> {
        let mut k = self.density.breaks.clone();
        k.push(self.density.lower);
        k
    }
}

/// Generator of a general radial law, evaluated through the forward
/// transform; derivatives fall back to finite differences.
#[derive(Debug)]
struct DistributionTransform {
    r: RadialDistribution,
    d: usize,
}

impl CustomGenerator for DistributionTransform {
    fn name(&self) -> &str {
        "williamson_transform"
    }

    fn psi(&self, x: f64) -> f64 {
        williamson_transform(&RadialInput::Distribution(self.r.clone()), self.d, x).unwrap_or(f64::NAN)
    }

    fn zero_point(&self) -> Option<f64> {
        Some(self.r.upper())
    }

    fn kink_points(&self) -> Vec<f64> {
        self.r.atoms().iter().map(|a| a.location).collect()
    }
}

/// The generator ψ = 𝔚_d F as a [`Generator`].
///
/// Atom lists and samples become `discrete_radial` generators with exact
/// derivatives; densities get quadrature-based derivatives up to order d.
pub fn williamson_generator(input: &RadialInput, d: usize) -> Result<Generator> {
    check_dimension(d)?;
    match input {
        RadialInput::Atoms(atoms) => Generator::discrete_radial(atoms, d),
        RadialInput::Empirical(sample) => {
            if sample.is_empty() || sample.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::InvalidInput(
                    "sample must be non-empty with positive finite values".into(),
                ));
            }
            let mut sorted = sample.clone();
            sorted.sort_by(f64::total_cmp);
            let w = 1.0 / sorted.len() as f64;
            let mut atoms: Vec<Atom> = Vec::new();
            for t in sorted {
                match atoms.last_mut() {
                    Some(a) if a.location == t => a.mass += w,
                    _ => atoms.push(Atom::new(t, w)),
                }
            }
            let total: f64 = atoms.iter().map(|a| a.mass).sum();
            for a in &mut atoms {
                a.mass /= total;
            }
            Generator::discrete_radial(&atoms, d)
        }
        RadialInput::Density(density) => {
            let q = Quadrature::with_tolerance(1e-10, 1e-12);
            let total = density.integrate(&q, 0.0, |_| 1.0)?;
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidInput(format!("density integrates to {total}, expected 1")));
            }
            Ok(Generator::custom(
                Arc::new(DensityTransform {
                    density: density.clone(),
                    d,
                    quad: transform_quadrature(),
                }),
                d,
            ))
        }
        RadialInput::Distribution(r) => {
            if r.continuous_mass() == 0.0 {
                return Generator::discrete_radial(r.atoms(), d);
            }
            Ok(Generator::custom(
                Arc::new(DistributionTransform { r: r.clone(), d }),
                d,
            ))
        }
    }
}

/// 1 − Σ_{k<d} (−1)^k x^k ψ^{(k)}(x)/k!, unclamped. `side` selects the
/// one-sided derivative of order d−1.
fn raw_inverse(g: &Generator, d: usize, x: f64, side: Side) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() || x > g.zero_point() {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    let mut coef = 1.0;
    for k in 0..d {
        let s = if k + 1 == d { side } else { Side::Right };
        let term = coef * g.psi_deriv(x, k, s)?;
        sum += if k % 2 == 0 { term } else { -term };
        coef *= x / (k + 1) as f64;
    }
    Ok(1.0 - sum)
}

fn clamp_cdf(raw: f64, d: usize, x: f64) -> Result<f64> {
    if !(raw >= -CLAMP_TOL && raw <= 1.0 + CLAMP_TOL) {
        return Err(Error::NotDMonotone { d, x, value: raw });
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// F_R(x) = 𝔚_d⁻¹ψ(x), right-continuous.
pub fn inverse_williamson(g: &Generator, d: usize, x: f64) -> Result<f64> {
    check_dimension(d)?;
    clamp_cdf(raw_inverse(g, d, x, Side::Right)?, d, x)
}

/// Left limit F_R(x−).
pub fn inverse_williamson_left(g: &Generator, d: usize, x: f64) -> Result<f64> {
    check_dimension(d)?;
    clamp_cdf(raw_inverse(g, d, x, Side::Left)?, d, x)
}

/// Jump of F_R at `y`: (−1)^{d−1} y^{d−1}/(d−1)! · (ψ₋^{(d−1)} − ψ₊^{(d−1)})(y).
pub fn jump_mass(g: &Generator, d: usize, y: f64) -> Result<f64> {
    check_dimension(d)?;
    if !(y > 0.0) || y.is_infinite() {
        return Ok(0.0);
    }
    let left = g.psi_deriv(y, d - 1, Side::Left)?;
    let right = if y >= g.zero_point() {
        0.0
    } else {
        g.psi_deriv(y, d - 1, Side::Right)?
    };
    let sign = if (d - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut coef = 1.0;
    for k in 1..d {
        coef *= y / k as f64;
    }
    Ok(sign * coef * (left - right))
}

/// Upper end of numeric grids: max(10, 2ψ⁻¹(1e−8)).
pub fn grid_upper(g: &Generator) -> f64 {
    let t = g.psi_inv(1e-8);
    if t.is_finite() {
        f64::max(10.0, 2.0 * t)
    } else {
        10.0
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Heuristic jump search for custom generators without declared kinks:
/// brackets sharp changes of x^{d−1}ψ₊^{(d−1)}(x) and shrinks them to 2e−7.
fn scan_for_jumps(g: &Generator, d: usize, hi: f64) -> Vec<f64> {
    let w = |x: f64| {
        g.psi_deriv(x, d - 1, Side::Right)
            .map(|v| v * x.powi(d as i32 - 1))
            .unwrap_or(f64::NAN)
    };
    let grid = log_grid(1e-6, hi, 2000);
    let mut found = Vec::new();
    for pair in grid.windows(2) {
        let (mut a, mut b) = (pair[0], pair[1]);
        let (mut wa, mut wb) = (w(a), w(b));
        if !((wb - wa).abs() > 1e-6) {
            continue;
        }
        while b - a > 2e-7 {
            let m = 0.5 * (a + b);
            let wm = w(m);
            if (wm - wa).abs() >= (wb - wm).abs() {
                b = m;
                wb = wm;
            } else {
                a = m;
                wa = wm;
            }
        }
        if (wb - wa).abs() > 1e-6 {
            found.push(0.5 * (a + b));
        }
    }
    found
}

#[derive(Debug)]
struct GeneratorPart {
    g: Generator,
    d: usize,
    atoms: Vec<Atom>,
}

impl ContinuousPart for GeneratorPart {
    fn cdf(&self, x: f64) -> f64 {
        let total = match inverse_williamson(&self.g, self.d, x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let jumps: f64 = self
            .atoms
            .iter()
            .take_while(|a| a.location <= x)
            .map(|a| a.mass)
            .sum();
        total - jumps
    }

    fn density(&self, x: f64) -> Option<f64> {
        if self.g.max_analytic_order() < self.d {
            return None;
        }
        if x <= 0.0 || x >= self.g.zero_point() {
            return Some(0.0);
        }
        let v = self.g.psi_deriv(x, self.d, Side::Right).ok()?;
        let sign = if self.d % 2 == 0 { 1.0 } else { -1.0 };
        let mut coef = 1.0;
        for k in 1..self.d {
            coef *= x / k as f64;
        }
        Some(sign * coef * v)
    }
}

/// The radial distribution 𝔚_d⁻¹ψ.
///
/// Atoms are searched at the declared kinks of ψ and at a finite x₀; the
/// resulting CDF is validated for monotonicity on a grid.
pub fn radial_from_generator(g: &Generator, d: usize) -> Result<RadialDistribution> {
    check_dimension(d)?;
    let x0 = g.zero_point();
    let hi = if x0.is_finite() { x0 } else { grid_upper(g) };

    let mut candidates: Vec<f64> = g.kink_points().to_vec();
    if x0.is_finite() {
        candidates.push(x0);
    }
    if g.family_id() == FamilyId::Custom && candidates.is_empty() {
        candidates = scan_for_jumps(g, d, hi);
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut atoms = Vec::new();
    for &c in &candidates {
        if c > x0 {
            continue;
        }
        // The transform pair needs ψ^{(k)} continuous for k ≤ d − 2.
        for k in 1..d - 1 {
            let left = g.psi_deriv(c, k, Side::Left)?;
            let right = if c >= x0 { 0.0 } else { g.psi_deriv(c, k, Side::Right)? };
            let tol = if k <= g.max_analytic_order() { 1e-8 } else { 1e-4 };
            if (left - right).abs() > tol * left.abs().max(1.0) {
                return Err(Error::NotDMonotone { d, x: c, value: left - right });
            }
        }
        let mass = if g.family_id() == FamilyId::Custom && g.max_analytic_order() < d - 1 {
            // Finite differences cannot resolve the jump; compare F across it.
            let h = 1e-7 * c.max(1.0);
            inverse_williamson(g, d, c + h)? - inverse_williamson_left(g, d, (c - h).max(0.0))?
        } else {
            jump_mass(g, d, c)?
        };
        if mass < -CLAMP_TOL {
            return Err(Error::NotDMonotone { d, x: c, value: mass });
        }
        if mass > ATOM_TOL {
            atoms.push(Atom::new(c, mass));
        }
    }

    let mut grid = log_grid(1e-6 * hi.min(1.0), hi, 200);
    for a in &atoms {
        let h = 1e-7 * a.location.max(1.0);
        grid.extend([a.location - h, a.location, a.location + h]);
    }
    grid.retain(|&x| x > 0.0);
    grid.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    for &x in &grid {
        let f = inverse_williamson(g, d, x)?;
        if f < prev - CLAMP_TOL {
            return Err(Error::NotDMonotone { d, x, value: f });
        }
        prev = prev.max(f);
    }

    let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();
    let continuous_mass = (1.0 - atom_mass).max(0.0);
    let part = GeneratorPart {
        g: g.clone(),
        d,
        atoms: atoms.clone(),
    };
    let continuous: Option<Arc<dyn ContinuousPart>> = if continuous_mass > 1e-12 {
        Some(Arc::new(part))
    } else {
        None
    };
    RadialDistribution::from_parts(atoms, continuous, continuous_mass, x0)
}

/// Generalized binomial coefficient α(α−1)···(α−k+1)/k!.
pub fn extended_binomial(alpha: f64, k: usize) -> f64 {
    (0..k).map(|j| (alpha - j as f64) / (j + 1) as f64).product()
}

/// Closed-form radial CDF of the Clayton family in dimension d.
///
/// θ < 0 (α = −1/θ): 1 − Σ_{k<d} C(α,k)(x/α)^k(1 − x/α)^{α−k} on [0, α);
/// θ > 0: 1 − Σ_{k<d} ∏_{j<k}(1 + jθ)/k! · x^k (1 + θx)^{−(1/θ+k)};
/// θ = 0: Erlang(d).
pub fn clayton_radial_cdf(theta: f64, d: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if theta == 0.0 {
        return crate::radial::Erlang { shape: d }.cdf(x);
    }
    let mut sum = 0.0;
    if theta < 0.0 {
        let alpha = -1.0 / theta;
        if x >= alpha {
            return 1.0;
        }
        let r = x / alpha;
        for k in 0..d {
            let c = extended_binomial(alpha, k);
            if c == 0.0 {
                continue;
            }
            sum += c * r.powi(k as i32) * (1.0 - r).powf(alpha - k as f64);
        }
    } else {
        let l = (theta * x).ln_1p();
        let mut coef = 1.0;
        for k in 0..d {
            sum += coef * (k as f64 * x.ln() - (1.0 / theta + k as f64) * l).exp();
            coef *= (1.0 + k as f64 * theta) / (k + 1) as f64;
        }
    }
    1.0 - sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex45_atoms() -> Vec<Atom> {
        vec![Atom::new(1.0, 2.0 / 3.0), Atom::new(2.0, 1.0 / 3.0)]
    }

    #[test]
    fn forward_examples() {
        let atoms = RadialInput::Atoms(ex45_atoms());
        assert!((williamson_transform(&atoms, 2, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let pm = RadialInput::Atoms(vec![Atom::new(1.0, 1.0)]);
        assert_eq!(williamson_transform(&pm, 4, 0.0).unwrap(), 1.0);
        let v = williamson_transform(&RadialInput::erlang(3), 3, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-10, "{v}");
    }

    #[test]
    fn forward_by_parts_matches_direct() {
        let r = RadialDistribution::erlang(3);
        for x in [0.1f64, 1.0, 4.0] {
            let a = williamson_transform(&RadialInput::Distribution(r.clone()), 3, x).unwrap();
            assert!((a - (-x).exp()).abs() < 1e-9, "x = {x}: {a}");
        }
        let pm = RadialInput::Empirical(vec![1.0, 1.0, 2.0]);
        assert!((williamson_transform(&pm, 2, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        for d in 2..6 {
            let g = Generator::lower_bound(d).unwrap();
            assert_eq!(inverse_williamson(&g, d, 0.5).unwrap(), 0.0);
            assert_eq!(inverse_williamson(&g, d, 1.0).unwrap(), 1.0);
        }
        let g = Generator::clayton(0.0).unwrap();
        for x in [0.3f64, 1.0, 2.5, 7.0] {
            let expected = 1.0 - (-x).exp() * (1.0 + x + x * x / 2.0);
            assert!((inverse_williamson(&g, 3, x).unwrap() - expected).abs() < 1e-14);
        }
        let theta = 3.0;
        let g = Generator::power_kink(theta).unwrap();
        for x in [0.1f64, 0.5, 0.9] {
            let expected = (1.0 - 1.0 / theta) * x.powf(1.0 / theta);
            assert!((inverse_williamson(&g, 2, x).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_rejects_non_monotone_generators() {
        let g = Generator::lower_bound(4).unwrap();
        assert!(matches!(
            radial_from_generator(&g, 5),
            Err(Error::NotDMonotone { d: 5, .. })
        ));
    }

    #[test]
    fn radial_examples() {
        let g = Generator::power_kink(3.0).unwrap();
        let r = radial_from_generator(&g, 2).unwrap();
        assert_eq!(r.atoms().len(), 1);
        assert_eq!(r.atoms()[0].location, 1.0);
        assert!((r.atoms()[0].mass - 1.0 / 3.0).abs() < 1e-14);

        let g = Generator::clayton(-0.5).unwrap();
        let r = radial_from_generator(&g, 3).unwrap();
        assert_eq!(r.atoms(), &[Atom::new(2.0, 1.0)]);
        assert_eq!(r.continuous_mass(), 0.0);

        let g = Generator::clayton(0.2).unwrap();
        let r = radial_from_generator(&g, 3).unwrap();
        assert!(r.atoms().is_empty());
        for x in [0.5, 2.0, 9.0] {
            assert!((r.cdf(x) - clayton_radial_cdf(0.2, 3, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_quantile_examples() {
        let r = radial_from_generator(&Generator::clayton(-0.5).unwrap(), 3).unwrap();
        assert_eq!(r.quantile(0.3).unwrap(), 2.0);
        let r = radial_from_generator(&Generator::power_kink(2.0).unwrap(), 2).unwrap();
        assert!((r.quantile(0.25).unwrap() - 0.25).abs() < 1e-11);
    }

    #[test]
    fn ex45_level_masses() {
        let g = Generator::discrete_radial(&ex45_atoms(), 2).unwrap();
        let r = radial_from_generator(&g, 2).unwrap();
        assert_eq!(r.atoms().len(), 2);
        assert!((r.atoms()[0].mass - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.atoms()[1].mass - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn clayton_closed_form_limits() {
        // α = d − 1 collapses to a point mass at d − 1.
        for d in 2..6 {
            let theta = -1.0 / (d as f64 - 1.0);
            assert_eq!(clayton_radial_cdf(theta, d, d as f64 - 1.0 - 1e-9), 0.0);
            assert_eq!(clayton_radial_cdf(theta, d, d as f64 - 1.0), 1.0);
        }
        let e = crate::radial::Erlang { shape: 3 };
        for x in [0.1, 1.0, 3.0, 10.0] {
            assert!((clayton_radial_cdf(1e-6, 3, x) - e.cdf(x)).abs() < 1e-4);
        }
    }

    #[test]
    fn extended_binomial_examples() {
        assert_eq!(extended_binomial(5.0, 2), 10.0);
        assert_eq!(extended_binomial(2.0, 3), 0.0);
        assert!((extended_binomial(0.5, 2) + 0.125).abs() < 1e-16);
    }

    #[test]
    fn erlang_round_trip() {
        let g = williamson_generator(&RadialInput::erlang(3), 3).unwrap();
        for x in [0.05f64, 0.7, 2.0, 6.0] {
            assert!((g.psi(x) - (-x).exp()).abs() < 1e-11);
            let f = inverse_williamson(&g, 3, x).unwrap();
            let e = crate::radial::Erlang { shape: 3 }.cdf(x);
            assert!((f - e).abs() < 1e-8, "x = {x}: {f} vs {e}");
        }
    }

    #[test]
    fn scale_equivariance() {
        let g = Generator::clayton(0.2).unwrap();
        let k = 2.5;
        let r = radial_from_generator(&g, 3).unwrap();
        let rs = radial_from_generator(&g.rescaled(k).unwrap(), 3).unwrap();
        for x in [0.3, 1.0, 4.0] {
            assert!((rs.cdf(k * x) - r.cdf(x)).abs() < 1e-12);
        }
    }

    #[derive(Debug)]
    struct Kinked;
    impl CustomGenerator for Kinked {
        fn psi(&self, x: f64) -> f64 {
            (1.0 - x / 2.0).max(0.0)
        }
    }

    #[test]
    fn custom_generator_atoms_from_zero_point() {
        // (1 − x/2)₊ at d = 2 is a point mass at 2.
        let g = Generator::custom(Arc::new(Kinked), 2);
        let r = radial_from_generator(&g, 2).unwrap();
        assert_eq!(r.atoms().len(), 1);
        assert!((r.atoms()[0].location - 2.0).abs() < 1e-9);
        assert!((r.atoms()[0].mass - 1.0).abs() < 1e-6);
    }
}
