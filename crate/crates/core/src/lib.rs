//! Archimedean copulas through the Williamson d-transform.
//!
//! A d-monotone generator ψ and a radial law F_R on (0, ∞) determine each
//! other; the copula C(u) = ψ(ψ⁻¹(u₁) + ··· + ψ⁻¹(u_d)) is the survival copula
//! of R·S with S uniform on the unit simplex. This crate builds generators,
//! inverts the transform exactly, samples, evaluates copula functionals and
//! runs goodness-of-fit diagnostics.

pub mod copula;
pub mod diagnostics;
pub mod error;
pub mod generator;
pub mod monotonicity;
pub mod numdiff;
pub mod quadrature;
pub mod radial;
pub mod sampling;
pub mod stats;
pub mod williamson;

pub use copula::{copula_cdf, copula_density, kendall_tau, level_set_mass, KendallFunction};
pub use diagnostics::{diagnose, fit_generator, DiagnosticsReport};
pub use monotonicity::{check_d_monotone, max_dimension, MonotonicityReport};
pub use sampling::{sample_copula, sample_copula_seeded, SampleMatrix};

pub use error::{Error, Result};
pub use generator::{
    make_family, Atom, CustomGenerator, FamilyId, FamilyParams, Generator, GeneratorConfig, Side,
};
pub use radial::RadialDistribution;
pub use williamson::{
    inverse_williamson, radial_from_generator, williamson_generator, williamson_transform,
    RadialInput,
};
