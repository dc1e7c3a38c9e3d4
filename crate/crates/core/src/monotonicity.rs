//! Grid check of d-monotonicity.
//!
//! ψ is d-monotone iff (−1)^k ψ^{(k)} ≥ 0 for k ≤ d − 2 and
//! g = (−1)^{d−2} ψ^{(d−2)} is nonincreasing and convex. Only derivatives up
//! to order d − 2 are needed, so generators whose higher derivatives do not
//! exist are handled exactly. A recorded violation is definitive; a pass
//! certifies the criterion on the grid only.

use rayon::prelude::*;
use serde::Serialize;

use crate::generator::{Generator, Side};
use crate::williamson::grid_upper;

/// Grid used by [`check_d_monotone_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Extra points placed at and around each kink and x₀.
    pub kink_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// (−1)^k ψ^{(k)}(x) < 0.
    Sign,
    /// (−1)^{d−2} ψ^{(d−2)} increases.
    Increasing,
    /// (−1)^{d−2} ψ^{(d−2)} fails the midpoint convexity test.
    Convexity,
    /// ψ^{(k)} is discontinuous at a kink for some k ≤ d − 2.
    Discontinuity,
    /// A derivative could not be evaluated.
    Evaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub x: f64,
    pub order: usize,
    pub value: f64,
    pub kind: ViolationKind,
}

/// Sign summary for one derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    /// Smallest value of (−1)^k ψ^{(k)} on the grid.
    pub min_signed_value: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub d: usize,
    pub verdict: Verdict,
    /// "definitive" for a failure, "grid" for a pass.
    pub certainty: &'static str,
    pub orders: Vec<OrderSummary>,
    pub nonincreasing: bool,
    pub convex: bool,
    pub first_violation: Option<Violation>,
    pub grid: GridSpec,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub const DEFAULT_POINTS: usize = 512;

/// Checks d-monotonicity on the default grid: 512 log-spaced points from
/// 1e−6·min(1, x₀) to max(10, 2ψ⁻¹(1e−8)), plus each kink and x₀ with
/// offsets ±1e−6·max(1, x).
pub fn check_d_monotone(g: &Generator, d: usize) -> MonotonicityReport {
    check_d_monotone_with(g, d, DEFAULT_POINTS)
}

fn signed(g: &Generator, x: f64, k: usize, side: Side) -> Result<f64, ()> {
    let v = g.psi_deriv(x, k, side).map_err(|_| ())?;
    Ok(if k % 2 == 0 { v } else { -v })
}

pub fn check_d_monotone_with(g: &Generator, d: usize, points: usize) -> MonotonicityReport {
    assert!(d >= 2, "d-monotonicity needs d >= 2");
    let x0 = g.zero_point();
    let x_lo = 1e-6 * x0.min(1.0);
    // The grid runs past x₀: a violation may sit exactly there.
    let x_hi = grid_upper(g).max(if x0.is_finite() { 2.0 * x0 } else { 0.0 });
    let mut special: Vec<f64> = g.kink_points().to_vec();
    if x0.is_finite() {
        special.push(x0);
    }
    let offset = 1e-6;
    let mut xs: Vec<f64> = (0..points)
        .map(|i| (x_lo.ln() + (x_hi / x_lo).ln() * i as f64 / (points - 1) as f64).exp())
        .collect();
    for &c in &special {
        let h = offset * c.max(1.0);
        xs.extend([c - h, c, c + h]);
    }
    xs.retain(|&x| x > 0.0 && x.is_finite());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let grid = GridSpec {
        points: xs.len(),
        x_lo,
        x_hi,
        kink_offset: offset,
    };

    let top = d - 2;
    let mut violations: Vec<Violation> = Vec::new();

    // values[k][i] = (−1)^k ψ^{(k)}(xs[i]).
    let table: Vec<Vec<Result<f64, ()>>> = (0..=top)
        .map(|k| xs.par_iter().map(|&x| signed(g, x, k, Side::Right)).collect())
        .collect();

    let mut orders = Vec::with_capacity(top + 1);
    let mut tolerances = Vec::with_capacity(top + 1);
    for (k, row) in table.iter().enumerate() {
        let scale = row
            .iter()
            .filter_map(|v| v.as_ref().ok())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * scale;
        tolerances.push(tol);
        let mut min_value = f64::INFINITY;
        let mut ok = true;
        for (i, v) in row.iter().enumerate() {
            match v {
                Ok(v) => {
                    min_value = min_value.min(*v);
                    if *v < -tol {
                        ok = false;
                        violations.push(Violation { x: xs[i], order: k, value: *v, kind: ViolationKind::Sign });
                    }
                }
                Err(()) => {
                    ok = false;
                    violations.push(Violation {
                        x: xs[i],
                        order: k,
                        value: f64::NAN,
                        kind: ViolationKind::Evaluation,
                    });
                }
            }
        }
        orders.push(OrderSummary {
            order: k,
            min_signed_value: min_value,
            tolerance: tol,
            ok,
        });
    }

    // Continuity of ψ^{(k)}, k ≤ d − 2, across kinks.
    for &c in &special {
        for k in 0..=top {
            let left = signed(g, c, k, Side::Left);
            let right = if c >= x0 { Ok(0.0) } else { signed(g, c, k, Side::Right) };
            match (left, right) {
                (Ok(l), Ok(r)) => {
                    let tol = if k <= g.max_analytic_order() {
                        tolerances[k]
                    } else {
                        1e-4 * l.abs().max(1.0)
                    };
                    if (l - r).abs() > tol {
                        violations.push(Violation {
                            x: c,
                            order: k,
                            value: l - r,
                            kind: ViolationKind::Discontinuity,
                        });
                    }
                }
                _ => violations.push(Violation {
                    x: c,
                    order: k,
                    value: f64::NAN,
                    kind: ViolationKind::Evaluation,
                }),
            }
        }
    }

    // Monotonicity and midpoint convexity of the top-order function.
    let tol = tolerances[top];
    let top_row: Vec<Option<f64>> = table[top].iter().map(|v| v.ok()).collect();
    let mut nonincreasing = true;
    for i in 0..xs.len() - 1 {
        if let (Some(a), Some(b)) = (top_row[i], top_row[i + 1]) {
            if b > a + tol {
                nonincreasing = false;
                violations.push(Violation {
                    x: xs[i + 1],
                    order: top,
                    value: b - a,
                    kind: ViolationKind::Increasing,
                });
            }
        }
    }
    let mids: Vec<Option<f64>> = (0..xs.len().saturating_sub(2))
        .into_par_iter()
        .map(|i| signed(g, 0.5 * (xs[i] + xs[i + 2]), top, Side::Right).ok())
        .collect();
    let mut convex = true;
    for (i, mid) in mids.iter().enumerate() {
        match (top_row[i], *mid, top_row[i + 2]) {
            (Some(a), Some(m), Some(b)) => {
                let excess = m - 0.5 * (a + b);
                if excess > tol {
                    convex = false;
                    violations.push(Violation {
                        x: 0.5 * (xs[i] + xs[i + 2]),
                        order: top,
                        value: excess,
                        kind: ViolationKind::Convexity,
                    });
                }
            }
            (_, None, _) => violations.push(Violation {
                x: 0.5 * (xs[i] + xs[i + 2]),
                order: top,
                value: f64::NAN,
                kind: ViolationKind::Evaluation,
            }),
            _ => {}
        }
    }

    let first_violation = violations
        .into_iter()
        .min_by(|a, b| a.x.total_cmp(&b.x).then(a.order.cmp(&b.order)));
    let verdict = if first_violation.is_some() { Verdict::Fail } else { Verdict::Pass };
    MonotonicityReport {
        d,
        verdict,
        certainty: if verdict == Verdict::Fail { "definitive" } else { "grid" },
        orders,
        nonincreasing,
        convex,
        first_violation,
        grid,
    }
}

/// Largest d ≤ `d_max` at which ψ passes; 1 if it fails already at d = 2.
///
/// The classes are nested, so a binary search over d is valid.
pub fn max_dimension(g: &Generator, d_max: usize) -> usize {
    let passes = |d: usize| check_d_monotone(g, d).passed();
    if d_max < 2 || !passes(2) {
        return 1;
    }
    if passes(d_max) {
        return d_max;
    }
    let (mut lo, mut hi) = (2, d_max);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clayton_examples() {
        let g = Generator::clayton(-0.3).unwrap();
        assert!(check_d_monotone(&g, 3).passed());
        let rep = check_d_monotone(&g, 5);
        assert!(!rep.passed());
        assert_eq!(rep.certainty, "definitive");
    }

    #[test]
    fn lower_bound_examples() {
        let g = Generator::lower_bound(4).unwrap();
        assert!(check_d_monotone(&g, 4).passed());
        assert!(!check_d_monotone(&g, 5).passed());
    }

    #[test]
    fn piecewise_quadratic_examples() {
        let g = Generator::piecewise_quadratic();
        assert!(check_d_monotone(&g, 2).passed());
        let rep = check_d_monotone(&g, 3);
        assert!(!rep.passed());
        assert!(!rep.convex);
    }

    #[test]
    fn max_dimension_examples() {
        assert_eq!(max_dimension(&Generator::clayton(0.0).unwrap(), 10), 10);
        assert_eq!(max_dimension(&Generator::clayton(-0.25).unwrap(), 10), 5);
        assert_eq!(max_dimension(&Generator::lower_bound(3).unwrap(), 10), 3);
        assert_eq!(max_dimension(&Generator::clayton(-1.5).unwrap(), 10), 1);
    }

    #[test]
    fn report_serializes() {
        let rep = check_d_monotone(&Generator::lower_bound(3).unwrap(), 4);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"verdict\":\"fail\""), "{json}");
    }
}
