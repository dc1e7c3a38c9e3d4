//! One-sided finite differences.

use crate::generator::Side;

/// Finite-difference weights for the `order`-th derivative at `x0` from the
/// given nodes (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    // c[j][k]: weight of node j for derivative k.
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Step used by the fallback: `max(x, 1) · ε^{1/(k+4)}`.
pub fn default_step(x: f64, order: usize) -> f64 {
    x.abs().max(1.0) * f64::EPSILON.powf(1.0 / (order as f64 + 4.0))
}

/// Fourth-order accurate one-sided estimate of the `order`-th derivative of
/// `f` at `x`, sampling only on the requested side of `x`.
///
/// Left stencils are shortened so that no node falls below zero.
pub fn one_sided_derivative<F: Fn(f64) -> f64>(f: F, x: f64, order: usize, side: Side) -> f64 {
    if order == 0 {
        return f(x);
    }
    let points = order + 4;
    let mut h = default_step(x, order);
    let dir = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    if side == Side::Left {
        let reach = (points - 1) as f64;
        if x - reach * h < 0.0 {
            h = x / reach;
        }
    }
    let offsets: Vec<f64> = (0..points).map(|j| dir * j as f64).collect();
    let weights = fornberg_weights(0.0, &offsets, order);
    let sum: f64 = offsets
        .iter()
        .zip(&weights)
        .map(|(&o, &w)| w * f(x + o * h))
        .sum();
    sum / h.powi(order as i32)
}
