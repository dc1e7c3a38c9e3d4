#![allow(dead_code)]

use archimedean::{Atom, Generator};

pub const N: usize = 100_000;

pub fn ex45_atoms() -> Vec<Atom> {
    vec![Atom::new(1.0, 2.0 / 3.0), Atom::new(2.0, 1.0 / 3.0)]
}

/// Built-in generators paired with a dimension at which they are admissible.
pub fn builtins() -> Vec<(Generator, usize)> {
    let mut out = Vec::new();
    for theta in [-0.5, -0.3, 0.0, 0.2, 1.0, 4.0] {
        out.push((Generator::clayton(theta).unwrap(), 3));
    }
    out.push((Generator::clayton(-1.0).unwrap(), 2));
    out.push((Generator::independence(), 4));
    for d in 2..=4 {
        out.push((Generator::lower_bound(d).unwrap(), d));
    }
    out.push((Generator::reciprocal_uniform(1.0, 2.0, 2).unwrap(), 2));
    out.push((Generator::reciprocal_uniform(1.0, 8.0, 3).unwrap(), 3));
    for theta in [1.0, 2.0, 3.0] {
        out.push((Generator::power_kink(theta).unwrap(), 2));
    }
    out.push((Generator::discrete_radial(&ex45_atoms(), 2).unwrap(), 2));
    out.push((Generator::geometric(0.5, 3).unwrap(), 3));
    out.push((Generator::piecewise_quadratic(), 2));
    out
}
