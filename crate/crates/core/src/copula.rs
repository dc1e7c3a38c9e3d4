//! Functionals of the Archimedean copula C(u) = ψ(ψ⁻¹(u₁) + ··· + ψ⁻¹(u_d)).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{Generator, Side};
use crate::numdiff;
use crate::quadrature::Quadrature;
use crate::radial::RadialDistribution;
use crate::williamson::{jump_mass, radial_from_generator};

/// C(u); d is the length of `u`. Sums saturate at +∞.
pub fn copula_cdf(g: &Generator, u: &[f64]) -> f64 {
    if u.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let s: f64 = u.iter().map(|&v| g.psi_inv(v.min(1.0))).sum();
    g.psi(s)
}

/// W(u) = max(Σuᵢ − d + 1, 0).
pub fn frechet_lower(u: &[f64]) -> f64 {
    (u.iter().sum::<f64>() - u.len() as f64 + 1.0).max(0.0)
}

/// Mass that the function `f` assigns to the box [lo, hi] by
/// inclusion–exclusion over its 2^d corners.
pub fn delta_volume<F: Fn(&[f64]) -> f64>(f: F, lo: &[f64], hi: &[f64]) -> f64 {
    let d = lo.len();
    assert_eq!(d, hi.len(), "box corners must have equal dimension");
    let mut corner = vec![0.0; d];
    let mut total = 0.0;
    for mask in 0u32..(1 << d) {
        let mut lows = 0;
        for j in 0..d {
            if mask & (1 << j) != 0 {
                corner[j] = hi[j];
            } else {
                corner[j] = lo[j];
                lows += 1;
            }
        }
        let v = f(&corner);
        total += if lows % 2 == 0 { v } else { -v };
    }
    total
}

/// Δ-volume of the Fréchet–Hoeffding lower bound W over [lo, hi].
pub fn w_volume(lo: &[f64], hi: &[f64]) -> f64 {
    delta_volume(frechet_lower, lo, hi)
}

/// A density value; `numeric` marks a finite-difference ψ^{(d)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityValue {
    pub value: f64,
    pub numeric: bool,
}

/// Density c(u) = ψ^{(d)}(Σψ⁻¹(uᵢ)) / Πψ′(ψ⁻¹(uᵢ)), available when the
/// radial law has no atoms.
#[derive(Debug, Clone)]
pub struct CopulaDensity {
    g: Generator,
    d: usize,
}

impl CopulaDensity {
    pub fn new(g: &Generator, d: usize) -> Result<Self> {
        let radial = radial_from_generator(g, d)?;
        if let Some(a) = radial.atoms().first() {
            return Err(Error::NoDensity {
                d,
                reason: format!(
                    "radial distribution has an atom of mass {} at {}; the copula has a singular component",
                    a.mass, a.location
                ),
            });
        }
        Ok(Self { g: g.clone(), d })
    }

    pub fn eval(&self, u: &[f64]) -> Result<DensityValue> {
        if u.len() != self.d {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, expected {}",
                u.len(),
                self.d
            )));
        }
        if u.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::InvalidInput("density needs an interior point".into()));
        }
        let g = &self.g;
        let xs: Vec<f64> = u.iter().map(|&v| g.psi_inv(v)).collect();
        let s: f64 = xs.iter().sum();
        let numeric = g.max_analytic_order() < self.d;
        if s >= g.zero_point() {
            return Ok(DensityValue { value: 0.0, numeric });
        }
        let top = if numeric {
            numdiff::one_sided_derivative(
                |t| g.psi_deriv(t, self.d - 1, Side::Right).unwrap_or(f64::NAN),
                s,
                1,
                Side::Right,
            )
        } else {
            g.psi_deriv(s, self.d, Side::Right)?
        };
        let mut bottom = 1.0;
        for &x in &xs {
            bottom *= g.psi_deriv(x, 1, Side::Right)?;
        }
        let value = top / bottom;
        if !value.is_finite() {
            return Err(Error::NonFiniteDerivative { x: s, order: self.d });
        }
        Ok(DensityValue {
            value: value.max(0.0),
            numeric,
        })
    }
}

/// One-shot density evaluation; prefer [`CopulaDensity`] for many points.
pub fn copula_density(g: &Generator, u: &[f64]) -> Result<DensityValue> {
    CopulaDensity::new(g, u.len())?.eval(u)
}

/// P(C(U) = s): mass of the level set {C = s}, nonzero only where
/// ψ^{(d−1)} jumps at ψ⁻¹(s).
pub fn level_set_mass(g: &Generator, d: usize, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("level s = {s} outside [0, 1]")));
    }
    if s == 1.0 {
        return Ok(0.0);
    }
    let y = if s == 0.0 {
        g.zero_point()
    } else {
        g.snap_to_kink(g.psi_inv(s))
    };
    Ok(jump_mass(g, d, y)?.max(0.0))
}

/// The Kendall distribution function K(x) = P(C(U) ≤ x) = P(R ≥ ψ⁻¹(x)).
#[derive(Debug, Clone)]
pub struct KendallFunction {
    g: Generator,
    d: usize,
    radial: RadialDistribution,
    atom_at_zero: f64,
}

impl KendallFunction {
    pub fn new(g: &Generator, d: usize) -> Result<Self> {
        let radial = radial_from_generator(g, d)?;
        let atom_at_zero = level_set_mass(g, d, 0.0)?;
        Ok(Self {
            g: g.clone(),
            d,
            radial,
            atom_at_zero,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn radial(&self) -> &RadialDistribution {
        &self.radial
    }

    /// P(C(U) = 0).
    pub fn atom_at_zero(&self) -> f64 {
        self.atom_at_zero
    }

    fn series(&self, x: f64, side: Side) -> f64 {
        let g = &self.g;
        let d = self.d;
        let y = if x <= 0.0 {
            g.zero_point()
        } else {
            g.snap_to_kink(g.psi_inv(x))
        };
        if y.is_infinite() {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut coef = 1.0;
        for k in 0..d {
            let s = if k + 1 == d { side } else { Side::Right };
            let v = if k + 1 == d && side == Side::Right && y >= g.zero_point() {
                0.0
            } else {
                g.psi_deriv(y, k, s).unwrap_or(f64::NAN)
            };
            let term = coef * v;
            sum += if k % 2 == 0 { term } else { -term };
            coef *= y / (k + 1) as f64;
        }
        sum.clamp(0.0, 1.0)
    }

    /// K(x), right-continuous.
    pub fn eval(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        self.series(x.max(0.0), Side::Left)
    }

    /// K(x−) = P(C(U) < x).
    pub fn eval_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x > 1.0 {
            return 1.0;
        }
        self.series(x, Side::Right)
    }

    /// K(x) through the radial law: 1 − F_R(ψ⁻¹(x)−).
    pub fn eval_via_radial(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        let y = if x <= 0.0 {
            self.g.zero_point()
        } else {
            self.g.snap_to_kink(self.g.psi_inv(x))
        };
        if y.is_infinite() {
            return 0.0;
        }
        1.0 - self.radial.cdf_left(y)
    }
}

/// Kendall's τ of the bivariate copula generated by ψ.
///
/// Reported from 1 − 4∫₀^{x₀} t ψ′(t)² dt and cross-checked against
/// 4 E ψ(R) − 1 with R the radial part at d = 2. For strict generators the
/// integral is taken over u = ψ(t) ∈ (0, 1], where the integrand
/// ψ⁻¹(u) ψ′(ψ⁻¹(u)) stays bounded however slowly ψ decays.
pub fn kendall_tau(g: &Generator) -> Result<f64> {
    let x0 = g.zero_point();
    let q = Quadrature::with_tolerance(1e-13, 1e-13);
    let slope = |t: f64| g.psi_deriv(t, 1, Side::Right).unwrap_or(f64::NAN);
    let integral = if x0.is_finite() {
        q.integrate_with_breaks(
            |t| {
                let s = slope(t);
                if s == 0.0 {
                    0.0
                } else {
                    t * s * s
                }
            },
            0.0,
            x0,
            g.kink_points(),
        )?
        .value
    } else {
        let mut breaks: Vec<f64> = g.kink_points().iter().map(|&k| g.psi(k)).collect();
        breaks.sort_by(f64::total_cmp);
        let v = q.integrate_with_breaks(
            |u| {
                let t = g.psi_inv(u);
                if t.is_infinite() {
                    return 0.0;
                }
                t * slope(t)
            },
            0.0,
            1.0,
            &breaks,
        )?;
        -v.value
    };
    let tau = 1.0 - 4.0 * integral;

    let radial = radial_from_generator(g, 2)?;
    let via_radial = 4.0 * radial.expectation_psi(g)? - 1.0;
    let kinked = g.kink_points().iter().any(|&k| k > 0.0 && k < x0);
    let tol = if kinked { 1e-3 } else { 1e-6 };
    if (tau - via_radial).abs() > tol {
        return Err(Error::Inconsistent {
            quantity: "kendall_tau",
            first: tau,
            second: via_radial,
        });
    }
    Ok(tau)
}

/// Lower bound −1/(2d − 3) on τ of a bivariate margin of a d-dimensional
/// Archimedean copula.
pub fn tau_lower_bound(d: usize) -> f64 {
    -1.0 / (2.0 * d as f64 - 3.0)
}

/// Outcome of the lower-orthant comparison with C_d^L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlodReport {
    pub pass: bool,
    /// max over the grid of C_d^L(u) − C(u).
    pub max_violation: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

/// Checks C_d^L(u) ≤ C(u) + 1e−12 on the grid {j/(res+1)}^d, j = 1..res.
pub fn plod_dominates(g: &Generator, d: usize, resolution: usize) -> Result<PlodReport> {
    if resolution == 0 {
        return Err(Error::InvalidInput("grid resolution must be positive".into()));
    }
    let lower = Generator::lower_bound(d)?;
    let total = resolution.pow(d as u32);
    let point = |mut idx: usize| -> Vec<f64> {
        (0..d)
            .map(|_| {
                let j = idx % resolution + 1;
                idx /= resolution;
                j as f64 / (resolution + 1) as f64
            })
            .collect()
    };
    let (max_violation, worst) = (0..total)
        .into_par_iter()
        .map(|i| {
            let u = point(i);
            (copula_cdf(&lower, &u) - copula_cdf(g, &u), i)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(PlodReport {
        pass: max_violation <= 1e-12,
        max_violation,
        worst_point: point(worst),
        points: total,
    })
}
