//! Radial laws: an absolutely continuous part plus finitely many atoms.
//!
//! The total CDF is right-continuous with `cdf(0) = 0`. Quantiles are the
//! generalized inverse `inf{x : cdf(x) ≥ u}`; atoms are resolved exactly and
//! the continuous stretches by bisection.

use std::fmt;
use std::sync::Arc;

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::generator::{Atom, Generator, Side};
use crate::quadrature::Quadrature;

/// Absolute tolerance of the quantile bisection (relative above 1).
pub const QUANTILE_TOL: f64 = 1e-12;

/// The absolutely continuous component of a radial law.
pub trait ContinuousPart: Send + Sync + fmt::Debug {
    /// Sub-distribution function: mass of the continuous part on `[0, x]`.
    fn cdf(&self, x: f64) -> f64;

    fn density(&self, _x: f64) -> Option<f64> {
        None
    }
}

/// Erlang(d), the radial law of the independence copula.
#[derive(Debug, Clone, Copy)]
pub struct Erlang {
    pub shape: usize,
}

impl ContinuousPart for Erlang {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..self.shape {
            term *= x / k as f64;
            sum += term;
        }
        let tail = (-x).exp() * sum;
        if tail < 0.5 {
            1.0 - tail
        } else {
            // Small x: the series of the lower tail avoids cancellation.
            let mut term = x.powi(self.shape as i32) / factorial(self.shape);
            let mut acc: f64 = 0.0;
            let mut k = self.shape;
            while term > 1e-18 * acc.max(f64::MIN_POSITIVE) {
                acc += term;
                k += 1;
                term *= x / k as f64;
            }
            (-x).exp() * acc
        }
    }

    fn density(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(0.0);
        }
        Some((-x).exp() * x.powi(self.shape as i32 - 1) / factorial(self.shape - 1))
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// A radial distribution.
#[derive(Debug, Clone)]
pub struct RadialDistribution {
    atoms: Vec<Atom>,
    continuous: Option<Arc<dyn ContinuousPart>>,
    continuous_mass: f64,
    upper: f64,
    table: Option<Arc<QuantileTable>>,
}

impl RadialDistribution {
    /// Assembles a law from its parts. Atoms are sorted by location.
    pub fn from_parts(
        mut atoms: Vec<Atom>,
        continuous: Option<Arc<dyn ContinuousPart>>,
        continuous_mass: f64,
        upper: f64,
    ) -> Result<Self> {
        for a in &atoms {
            if !(a.location > 0.0 && a.location.is_finite() && a.mass > 0.0 && a.mass <= 1.0) {
                return Err(Error::InvalidInput(format!("invalid atom {a:?}")));
            }
        }
        atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
        let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();
        if atom_mass > 1.0 + 1e-9 {
            return Err(Error::InvalidInput(format!("atom masses sum to {atom_mass} > 1")));
        }
        let continuous_mass = continuous_mass.clamp(0.0, 1.0);
        Ok(Self {
            continuous: if continuous_mass > 0.0 { continuous } else { None },
            atoms,
            continuous_mass,
            upper,
            table: None,
        })
    }

    pub fn point_mass(location: f64) -> Result<Self> {
        Self::from_atoms(&[Atom::new(location, 1.0)])
    }

    pub fn from_atoms(atoms: &[Atom]) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("atom masses sum to {total}, expected 1")));
        }
        let upper = atoms.iter().map(|a| a.location).fold(0.0, f64::max);
        Self::from_parts(atoms.to_vec(), None, 0.0, upper)
    }

    pub fn erlang(shape: usize) -> Self {
        Self {
            atoms: Vec::new(),
            continuous: Some(Arc::new(Erlang { shape })),
            continuous_mass: 1.0,
            upper: f64::INFINITY,
            table: None,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous_mass(&self) -> f64 {
        self.continuous_mass
    }

    /// Upper end of the support (x₀ of the generator, possibly +∞).
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    /// Mass of the continuous part on `[0, x]`.
    pub fn continuous_cdf(&self, x: f64) -> f64 {
        match &self.continuous {
            Some(c) if x > 0.0 => c.cdf(x).clamp(0.0, self.continuous_mass),
            _ => 0.0,
        }
    }

    /// Density of the continuous part, when known in closed form.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.continuous {
            Some(c) => c.density(x),
            None => Some(0.0),
        }
    }

    /// Right-continuous total CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        let jumps: f64 = self
            .atoms
            .iter()
            .take_while(|a| a.location <= x)
            .map(|a| a.mass)
            .sum();
        (self.continuous_cdf(x) + jumps).clamp(0.0, 1.0)
    }

    /// Left limit F(x−).
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let at: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location == x)
            .map(|a| a.mass)
            .sum();
        if x > self.upper || (x == self.upper && at == 0.0) {
            return 1.0;
        }
        let jumps: f64 = self
            .atoms
            .iter()
            .take_while(|a| a.location < x)
            .map(|a| a.mass)
            .sum();
        (self.continuous_cdf(x) + jumps).clamp(0.0, 1.0)
    }

    /// Enables memoized quantiles through a monotone cubic table with
    /// `knots` interior knots. Atoms and the tails stay exact.
    pub fn with_quantile_table(mut self, knots: usize) -> Result<Self> {
        self.table = None;
        self.table = Some(Arc::new(QuantileTable::build(&self, knots)?));
        Ok(self)
    }

    pub fn without_quantile_table(mut self) -> Self {
        self.table = None;
        self
    }

    /// `inf{x : cdf(x) ≥ u}` for u ∈ (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidInput(format!("quantile level {u} outside (0, 1)")));
        }
        if let Some(table) = &self.table {
            if let Some(q) = table.lookup(u) {
                return Ok(q);
            }
        }
        self.exact_quantile(u)
    }

    fn exact_quantile(&self, u: f64) -> Result<f64> {
        let mut lo = 0.0;
        let mut hi = self.upper;
        for a in &self.atoms {
            let above = self.cdf(a.location);
            let below = above - a.mass;
            if u > below && u <= above {
                return Ok(a.location);
            }
            if u > above {
                lo = f64::max(lo, a.location);
            } else {
                hi = f64::min(hi, a.location);
            }
        }
        if hi.is_infinite() {
            hi = f64::max(1.0, 2.0 * lo);
            loop {
                let f = self.cdf(hi);
                if f.is_nan() {
                    return Err(Error::Bracket { u });
                }
                if f >= u {
                    break;
                }
                lo = hi;
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::Bracket { u });
                }
            }
        }
        while hi - lo > QUANTILE_TOL * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f = self.cdf(mid);
            if f.is_nan() {
                return Err(Error::Bracket { u });
            }
            if f >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `n` i.i.d. draws by inversion of standard uniforms on (0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            })
            .collect()
    }

    /// E ψ(R), computed deterministically: atoms exactly, and the continuous
    /// part through ∫ F_c(x) (−ψ′(x)) dx over [0, x₀]. For strict generators
    /// the same integral is taken as ∫₀¹ F_c(ψ⁻¹(u)) du, which does not
    /// depend on how slowly ψ decays.
    pub fn expectation_psi(&self, g: &Generator) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * g.psi(a.location)).sum();
        if self.continuous.is_none() {
            return Ok(atoms);
        }
        let mut breaks: Vec<f64> = g.kink_points().to_vec();
        breaks.extend(self.atoms.iter().map(|a| a.location));
        if self.upper.is_finite() {
            breaks.push(self.upper);
        }
        let q = Quadrature::with_tolerance(1e-12, 1e-12);
        let integral = if g.zero_point().is_finite() {
            q.integrate_with_breaks(
                |x| {
                    let slope = g.psi_deriv(x, 1, Side::Right).unwrap_or(f64::NAN);
                    if slope == 0.0 {
                        0.0
                    } else {
                        -slope * self.continuous_cdf(x)
                    }
                },
                0.0,
                g.zero_point(),
                &breaks,
            )?
        } else {
            let mut ubreaks: Vec<f64> = breaks.iter().map(|&x| g.psi(x)).collect();
            ubreaks.sort_by(f64::total_cmp);
            q.integrate_with_breaks(
                |u| {
                    let x = g.psi_inv(u);
                    if x.is_finite() {
                        self.continuous_cdf(x)
                    } else {
                        self.continuous_mass
                    }
                },
                0.0,
                1.0,
                &ubreaks,
            )?
        };
        Ok(atoms + integral.value)
    }
}

/// Memoized quantile function: monotone cubic Hermite interpolation
/// (Fritsch–Carlson slopes) between knots on a uniform u-grid.
#[derive(Debug)]
struct QuantileTable {
    u: Vec<f64>,
    q: Vec<f64>,
    slope: Vec<f64>,
    /// `(F(t−), F(t), t)` for each atom.
    atom_bands: Vec<(f64, f64, f64)>,
}

impl QuantileTable {
    fn build(r: &RadialDistribution, knots: usize) -> Result<Self> {
        if knots < 2 {
            return Err(Error::InvalidInput("quantile table needs at least 2 knots".into()));
        }
        let u: Vec<f64> = (1..=knots).map(|j| j as f64 / (knots + 1) as f64).collect();
        let q = u.iter().map(|&v| r.exact_quantile(v)).collect::<Result<Vec<_>>>()?;
        let secant: Vec<f64> = (0..knots - 1)
            .map(|j| (q[j + 1] - q[j]) / (u[j + 1] - u[j]))
            .collect();
        let mut slope = vec![0.0; knots];
        slope[0] = secant[0];
        slope[knots - 1] = secant[knots - 2];
        for j in 1..knots - 1 {
            slope[j] = if secant[j - 1] * secant[j] <= 0.0 {
                0.0
            } else {
                0.5 * (secant[j - 1] + secant[j])
            };
        }
        for j in 0..knots - 1 {
            if secant[j] == 0.0 {
                slope[j] = 0.0;
                slope[j + 1] = 0.0;
                continue;
            }
            let a = slope[j] / secant[j];
            let b = slope[j + 1] / secant[j];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slope[j] = t * a * secant[j];
                slope[j + 1] = t * b * secant[j];
            }
        }
        let atom_bands = r
            .atoms
            .iter()
            .map(|a| {
                let f = r.cdf(a.location);
                (f - a.mass, f, a.location)
            })
            .collect();
        Ok(Self {
            u,
            q,
            slope,
            atom_bands,
        })
    }

    fn lookup(&self, u: f64) -> Option<f64> {
        for &(lo, hi, t) in &self.atom_bands {
            if u > lo && u <= hi {
                return Some(t);
            }
        }
        let n = self.u.len();
        if u < self.u[0] || u > self.u[n - 1] {
            return None;
        }
        let j = self.u.partition_point(|&v| v <= u).clamp(1, n - 1) - 1;
        let (q0, q1) = (self.q[j], self.q[j + 1]);
        if self.atom_bands.iter().any(|&(_, _, t)| t >= q0 && t <= q1) {
            return None;
        }
        let h = self.u[j + 1] - self.u[j];
        let s = (u - self.u[j]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Some(h00 * q0 + h10 * h * self.slope[j] + h01 * q1 + h11 * h * self.slope[j + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cdf_examples() {
        let pm = RadialDistribution::point_mass(1.0).unwrap();
        assert_eq!(pm.cdf(0.999), 0.0);
        assert_eq!(pm.cdf(1.0), 1.0);
        assert_eq!(pm.cdf_left(1.0), 0.0);
        let e3 = RadialDistribution::erlang(3);
        let expected = 1.0 - (-1.0f64).exp() * 2.5;
        assert!((e3.cdf(1.0) - expected).abs() < 1e-15);
        assert!((e3.cdf(1.0) - 0.080_301_397_071_394_2).abs() < 1e-12);
        assert_eq!(e3.cdf(-1.0), 0.0);
    }

    #[test]
    fn erlang_small_argument_has_no_cancellation() {
        let e3 = RadialDistribution::erlang(3);
        // x³/6 − x⁴/8 + ... at x = 1e-4.
        let x: f64 = 1e-4;
        let series = x.powi(3) / 6.0 - x.powi(4) / 8.0 + x.powi(5) / 20.0;
        assert!(((e3.cdf(x) - series) / series).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let pm = RadialDistribution::point_mass(2.0).unwrap();
        assert_eq!(pm.quantile(0.3).unwrap(), 2.0);
        let e1 = RadialDistribution::erlang(1);
        let q = e1.quantile(1.0 - (-1.0f64).exp()).unwrap();
        assert!((q - 1.0).abs() < 1e-11);
        assert!(pm.quantile(0.0).is_err());
        assert!(pm.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_resolves_atoms_exactly() {
        let r = RadialDistribution::from_atoms(&[Atom::new(1.0, 2.0 / 3.0), Atom::new(2.0, 1.0 / 3.0)])
            .unwrap();
        assert_eq!(r.quantile(0.1).unwrap(), 1.0);
        assert_eq!(r.quantile(2.0 / 3.0).unwrap(), 1.0);
        assert_eq!(r.quantile(0.7).unwrap(), 2.0);
    }

    #[test]
    fn sampling_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pm = RadialDistribution::point_mass(1.0).unwrap();
        assert!(pm.sample(&mut rng, 100).unwrap().iter().all(|&r| r == 1.0));

        let e3 = RadialDistribution::erlang(3);
        let draws = e3.sample(&mut rng, 100_000).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 3.0).abs() < 0.05, "mean {mean}");

        let mix = RadialDistribution::from_atoms(&[Atom::new(1.0, 2.0 / 3.0), Atom::new(2.0, 1.0 / 3.0)])
            .unwrap();
        let draws = mix.sample(&mut rng, 100_000).unwrap();
        let ones = draws.iter().filter(|&&r| r == 1.0).count() as f64 / 1e5;
        assert!((ones - 2.0 / 3.0).abs() < 0.01, "fraction {ones}");
    }

    #[test]
    fn quantile_table_tracks_exact_quantile() {
        let exact = RadialDistribution::erlang(3);
        let table = exact.clone().with_quantile_table(1024).unwrap();
        // Interpolation error measured where it matters for sampling: in
        // probability space.
        for j in 1..1000 {
            let u = j as f64 / 1000.0;
            let b = table.quantile(u).unwrap();
            assert!((exact.cdf(b) - u).abs() <= 1e-5, "u = {u}: F(q) = {}", exact.cdf(b));
        }
    }

    #[test]
    fn quantile_table_keeps_atoms_exact() {
        let r = RadialDistribution::from_atoms(&[Atom::new(1.0, 0.5), Atom::new(3.0, 0.5)])
            .unwrap()
            .with_quantile_table(64)
            .unwrap();
        assert_eq!(r.quantile(0.25).unwrap(), 1.0);
        assert_eq!(r.quantile(0.75).unwrap(), 3.0);
    }

    #[test]
    fn expectation_psi_examples() {
        let lb = Generator::lower_bound(2).unwrap();
        let pm = RadialDistribution::point_mass(1.0).unwrap();
        assert_eq!(pm.expectation_psi(&lb).unwrap(), 0.0);

        let indep = Generator::independence();
        let e2 = RadialDistribution::erlang(2);
        assert!((e2.expectation_psi(&indep).unwrap() - 0.25).abs() < 1e-12);

        let atoms = [Atom::new(1.0, 2.0 / 3.0), Atom::new(2.0, 1.0 / 3.0)];
        let g = Generator::discrete_radial(&atoms, 2).unwrap();
        let r = RadialDistribution::from_atoms(&atoms).unwrap();
        assert!((r.expectation_psi(&g).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }
}
