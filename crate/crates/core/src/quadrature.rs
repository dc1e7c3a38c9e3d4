//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed by their error estimate and the
//! worst one is bisected until the summed error meets the tolerance. A
//! semi-infinite range `[c, ∞)` is mapped onto `[0, 1)` through
//! `x = c + t / (1 - t)`. The 15 Kronrod nodes are all interior, so
//! integrable endpoint singularities are never evaluated directly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Tolerances and work limit for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy)]
enum Map {
    Finite,
    SemiInfinite(f64),
}

struct Piece {
    map: Map,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval_mapped<F: Fn(f64) -> f64>(f: &F, map: Map, t: f64) -> f64 {
    match map {
        Map::Finite => f(t),
        Map::SemiInfinite(c) => {
            let s = 1.0 - t;
            let y = f(c + t / s);
            if y == 0.0 {
                0.0
            } else {
                y / (s * s)
            }
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, map: Map, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval_mapped(f, map, center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval_mapped(f, map, center - dx);
        let f2 = eval_mapped(f, map, center + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`; `b` may be `+∞`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_with_breaks(f, a, b, &[])
    }

    /// Integrates `f` over `[a, b]`, splitting at the given interior points
    /// (kinks or jumps of the integrand) before adapting.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        if b <= a {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        let mut knots: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&x| x > a && x < b && x.is_finite())
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut edges = Vec::with_capacity(knots.len() + 2);
        edges.push(a);
        edges.extend(knots);
        edges.push(b);

        let mut heap = BinaryHeap::new();
        for w in edges.windows(2) {
            let (map, lo, hi) = if w[1].is_infinite() {
                (Map::SemiInfinite(w[0]), 0.0, 1.0)
            } else {
                (Map::Finite, w[0], w[1])
            };
            let (value, error) = gk15(&f, map, lo, hi);
            heap.push(Piece {
                map,
                lo,
                hi,
                value,
                error,
            });
        }

        loop {
            let (total, err): (f64, f64) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if !total.is_finite() || !err.is_finite() {
                return Err(Error::Quadrature {
                    achieved: f64::NAN,
                    requested: self.abs_tol,
                });
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= target {
                return Ok(Estimate {
                    value: total,
                    error: err,
                });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    achieved: err,
                    requested: target,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                // Interval cannot be split further in floating point.
                let rest: f64 = heap.iter().map(|p| p.error).sum();
                if rest <= target {
                    return Ok(Estimate {
                        value: total,
                        error: err,
                    });
                }
                return Err(Error::Quadrature {
                    achieved: err,
                    requested: target,
                });
            }
            for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
                let (value, error) = gk15(&f, worst.map, lo, hi);
                heap.push(Piece {
                    map: worst.map,
                    lo,
                    hi,
                    value,
                    error,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let est = q.integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0).unwrap();
        assert!((est.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_exponential() {
        let q = Quadrature::default();
        let est = q.integrate(|t| t * (-2.0 * t).exp(), 0.0, f64::INFINITY).unwrap();
        assert!((est.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let q = Quadrature::with_tolerance(1e-12, 1e-12);
        let est = q.integrate(|t| t.powf(-0.5), 0.0, 1.0).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn breaks_handle_kinks() {
        let q = Quadrature::default();
        let est = q
            .integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3])
            .unwrap();
        assert!((est.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn divergent_integral_reports_failure() {
        let q = Quadrature {
            max_intervals: 200,
            ..Quadrature::default()
        };
        assert!(matches!(
            q.integrate(|t| 1.0 / t, 0.0, 1.0),
            Err(Error::Quadrature { .. })
        ));
    }
}
