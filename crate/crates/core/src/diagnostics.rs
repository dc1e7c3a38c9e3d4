//! Goodness-of-fit diagnostics for a copula sample under a candidate ψ.
//!
//! Under the model, Xᵢ = ψ⁻¹(Uᵢ) is ℓ1-norm symmetric: R = ΣXᵢ follows the
//! radial law 𝔚_d⁻¹ψ, S = X/R is uniform on the simplex, Vⱼ = (1 − Sⱼ)^{d−1}
//! is standard uniform, and R is independent of S. Each property gets one
//! test. Thresholds are empirical cut-offs, not calibrated significance
//! levels.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::copula::KendallFunction;
use crate::error::{Error, Result};
use crate::generator::{make_family, FamilyId, FamilyParams, Generator};
use crate::radial::RadialDistribution;
use crate::sampling::SampleMatrix;
use crate::stats::{kendall_tau, ks_uniform};
use crate::williamson::radial_from_generator;

/// Radial and angular parts of a sample.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub d: usize,
    pub radii: Vec<f64>,
    /// Row-major n × d points on the unit simplex.
    pub angles: Vec<f64>,
    /// Rows dropped because R = 0 or R = +∞.
    pub excluded: usize,
}

impl Decomposition {
    pub fn angle(&self, k: usize) -> &[f64] {
        &self.angles[k * self.d..(k + 1) * self.d]
    }

    /// Vⱼ = (1 − Sⱼ)^{d−1} for coordinate j.
    pub fn v_column(&self, j: usize) -> Vec<f64> {
        let p = self.d as i32 - 1;
        self.angles
            .chunks_exact(self.d)
            .map(|s| (1.0 - s[j]).max(0.0).powi(p))
            .collect()
    }
}

/// Rₖ = Σᵢ ψ⁻¹(Uₖᵢ) and Sₖ = (ψ⁻¹(Uₖ₁), ..., ψ⁻¹(U_kd))/Rₖ.
pub fn radial_angular_decompose(g: &Generator, sample: &SampleMatrix) -> Result<Decomposition> {
    let d = sample.d();
    if d < 2 {
        return Err(Error::InvalidInput("decomposition needs d >= 2".into()));
    }
    let strict = g.is_strict();
    let mut radii = Vec::with_capacity(sample.n());
    let mut angles = Vec::with_capacity(sample.n() * d);
    let mut excluded = 0;
    let mut x = vec![0.0; d];
    for row in sample.rows() {
        for (xi, &u) in x.iter_mut().zip(row) {
            let u = if strict && u <= 0.0 { f64::MIN_POSITIVE } else { u };
            *xi = g.psi_inv(u.clamp(0.0, 1.0));
        }
        let r: f64 = x.iter().sum();
        if !(r > 0.0 && r.is_finite()) {
            excluded += 1;
            continue;
        }
        radii.push(r);
        angles.extend(x.iter().map(|xi| xi / r));
    }
    Ok(Decomposition {
        d,
        radii,
        angles,
        excluded,
    })
}

/// KS distance of each Vⱼ against Uniform(0, 1).
pub fn uniformity_test(dec: &Decomposition) -> Vec<f64> {
    (0..dec.d).map(|j| ks_uniform(&dec.v_column(j))).collect()
}

/// Model versus empirical mass at one atom of the radial law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomCheck {
    pub location: f64,
    pub model_mass: f64,
    pub empirical_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGof {
    pub ks: f64,
    pub atoms: Vec<AtomCheck>,
}

/// KS distance between the empirical law of `radii` and `model`, exact for
/// models with atoms: both one-sided limits are compared at every sample
/// value and every atom. Values within a relative 1e−9 of an atom count as
/// hits on it.
pub fn radial_gof(radii: &[f64], model: &RadialDistribution) -> RadialGof {
    let atoms = model.atoms();
    let mut v: Vec<f64> = radii
        .iter()
        .map(|&r| {
            atoms
                .iter()
                .find(|a| (r - a.location).abs() <= 1e-9 * a.location.max(1.0))
                .map_or(r, |a| a.location)
        })
        .collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;

    let mut points: Vec<f64> = v.clone();
    points.extend(atoms.iter().map(|a| a.location));
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut ks: f64 = 0.0;
    for &p in &points {
        let below = v.partition_point(|&r| r < p) as f64 / n;
        let upto = v.partition_point(|&r| r <= p) as f64 / n;
        ks = ks
            .max((upto - model.cdf(p)).abs())
            .max((below - model.cdf_left(p)).abs());
    }
    let checks = atoms
        .iter()
        .map(|a| {
            let hits = v.iter().filter(|&&r| r == a.location).count();
            AtomCheck {
                location: a.location,
                model_mass: a.mass,
                empirical_mass: hits as f64 / n,
            }
        })
        .collect();
    RadialGof { ks, atoms: checks }
}

/// Kendall's τ between R and each Vⱼ.
pub fn independence_test(dec: &Decomposition) -> Vec<f64> {
    (0..dec.d)
        .map(|j| kendall_tau(&dec.radii, &dec.v_column(j)))
        .collect()
}

/// Empirical Kendall distribution: the CDF of the pseudo-observations
/// Wₖ = #{m ≠ k : U_m < U_k componentwise} / (n − 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalKendall {
    /// Sorted pseudo-observations.
    w: Vec<f64>,
}

impl EmpiricalKendall {
    pub fn pseudo_observations(&self) -> &[f64] {
        &self.w
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.w.partition_point(|&w| w <= x) as f64 / self.w.len() as f64
    }

    pub fn eval_left(&self, x: f64) -> f64 {
        self.w.partition_point(|&w| w < x) as f64 / self.w.len() as f64
    }

    /// Distinct jump points with the value of K̂ there.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.w.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &w) in self.w.iter().enumerate() {
            let value = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == w => last.1 = value,
                _ => out.push((w, value)),
            }
        }
        out
    }

    /// sup_x |K̂(x) − K(x)| over both one-sided limits at each jump.
    pub fn distance_to(&self, k: &KendallFunction) -> f64 {
        let mut prev = 0.0;
        let mut dist: f64 = 0.0;
        for (w, value) in self.steps() {
            dist = dist
                .max((value - k.eval(w)).abs())
                .max((prev - k.eval_left(w)).abs());
            prev = value;
        }
        dist
    }

    /// Two-column CSV `x,K` at the jump points.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,K")?;
        for (x, k) in self.steps() {
            writeln!(w, "{x:?},{k:?}")?;
        }
        w.flush()
    }
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn remove(&mut self, mut i: usize) {
        i += 1;
        while i < self.0.len() {
            self.0[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks < i.
    fn count_below(&self, mut i: usize) -> u64 {
        let mut s = 0u64;
        while i > 0 {
            s += self.0[i] as u64;
            i -= i & i.wrapping_neg();
        }
        s
    }
}

fn dominance_counts_2d(sample: &SampleMatrix) -> Vec<u64> {
    let n = sample.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sample.row(a)[0].total_cmp(&sample.row(b)[0]));
    let mut ys: Vec<f64> = sample.column(1);
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let rank = |y: f64| ys.partition_point(|&v| v < y);

    let mut tree = Fenwick(vec![0; ys.len() + 1]);
    let mut counts = vec![0u64; n];
    let mut i = 0;
    while i < n {
        // Rows tied in the first coordinate never dominate each other.
        let x = sample.row(order[i])[0];
        let mut j = i;
        while j < n && sample.row(order[j])[0] == x {
            j += 1;
        }
        for &k in &order[i..j] {
            counts[k] = tree.count_below(rank(sample.row(k)[1]));
        }
        for &k in &order[i..j] {
            tree.add(rank(sample.row(k)[1]));
        }
        i = j;
    }
    counts
}

/// Divide and conquer over the first coordinate with a Fenwick sweep over
/// the other two: O(n log² n).
fn dominance_counts_3d(sample: &SampleMatrix) -> Vec<u64> {
    let n = sample.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sample.row(a)[0].total_cmp(&sample.row(b)[0]));
    let mut zs = sample.column(2);
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let zrank: Vec<usize> = (0..n).map(|k| zs.partition_point(|&v| v < sample.row(k)[2])).collect();
    let mut tree = Fenwick(vec![0; zs.len() + 1]);
    let mut counts = vec![0u64; n];
    split_counts(sample, &order, &zrank, &mut tree, &mut counts);
    counts
}

fn split_counts(sample: &SampleMatrix, idx: &[usize], zrank: &[usize], tree: &mut Fenwick, counts: &mut [u64]) {
    if idx.len() < 2 {
        return;
    }
    let x = |k: usize| sample.row(k)[0];
    let y = |k: usize| sample.row(k)[1];
    // Cut between distinct first coordinates so ties never cross the cut.
    let mid = idx.len() / 2;
    let xm = x(idx[mid]);
    let lo = idx.partition_point(|&k| x(k) < xm);
    let hi = idx.partition_point(|&k| x(k) <= xm);
    let cut = match (lo > 0, hi < idx.len()) {
        (true, true) => {
            if mid - lo <= hi - mid {
                lo
            } else {
                hi
            }
        }
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => return,
    };
    let (left, right) = idx.split_at(cut);
    split_counts(sample, left, zrank, tree, counts);
    split_counts(sample, right, zrank, tree, counts);

    let mut l = left.to_vec();
    let mut r = right.to_vec();
    l.sort_by(|&a, &b| y(a).total_cmp(&y(b)));
    r.sort_by(|&a, &b| y(a).total_cmp(&y(b)));
    let mut i = 0;
    for &k in &r {
        while i < l.len() && y(l[i]) < y(k) {
            tree.add(zrank[l[i]]);
            i += 1;
        }
        counts[k] += tree.count_below(zrank[k]);
    }
    for &m in &l[..i] {
        tree.remove(zrank[m]);
    }
}

fn dominance_counts_brute(sample: &SampleMatrix) -> Vec<u64> {
    (0..sample.n())
        .into_par_iter()
        .map(|k| {
            let uk = sample.row(k);
            sample
                .rows()
                .filter(|um| um.iter().zip(uk).all(|(a, b)| a < b))
                .count() as u64
        })
        .collect()
}

/// Pseudo-observations and their empirical CDF. O(n log n) for d = 2,
/// O(n log² n) for d = 3, O(n² d) otherwise.
pub fn empirical_kendall(sample: &SampleMatrix) -> Result<EmpiricalKendall> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::InvalidInput("empirical Kendall function needs n >= 2".into()));
    }
    let counts = match sample.d() {
        2 => dominance_counts_2d(sample),
        3 => dominance_counts_3d(sample),
        _ => dominance_counts_brute(sample),
    };
    let mut w: Vec<f64> = counts.into_iter().map(|c| c as f64 / (n - 1) as f64).collect();
    w.sort_by(f64::total_cmp);
    Ok(EmpiricalKendall { w })
}

/// Pass/fail cut-offs for [`diagnose`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub radial_ks: f64,
    pub uniformity_ks: f64,
    pub rank_correlation: f64,
}

impl Thresholds {
    /// KS: max(0.01, 2/√n). Rank correlation: max(0.03, 4σ) with
    /// σ² = 2(2n + 5)/(9n(n − 1)) the null variance of Kendall's τ.
    pub fn for_n(n: usize) -> Self {
        let nf = n.max(2) as f64;
        let ks = f64::max(0.01, 2.0 / nf.sqrt());
        let sigma = (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt();
        Self {
            radial_ks: ks,
            uniformity_ks: ks,
            rank_correlation: f64::max(0.03, 4.0 * sigma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdicts {
    pub radial: bool,
    pub uniformity: bool,
    pub independence: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.radial && self.uniformity && self.independence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub generator: String,
    pub n: usize,
    pub d: usize,
    pub excluded: usize,
    pub radial_ks: f64,
    pub radial_atoms: Vec<AtomCheck>,
    pub uniformity_ks: Vec<f64>,
    pub rank_correlations: Vec<f64>,
    pub max_abs_rank_correlation: f64,
    pub thresholds: Thresholds,
    pub pass: Verdicts,
    /// K̂ on the grid x = 0, 0.01, ..., 1 as `[x, K̂(x)]`.
    pub empirical_kendall: Vec<[f64; 2]>,
}

/// Runs the three model tests and tabulates K̂.
pub fn diagnose(g: &Generator, sample: &SampleMatrix, thresholds: Option<Thresholds>) -> Result<DiagnosticsReport> {
    let d = sample.d();
    let radial = radial_from_generator(g, d)?;
    let dec = radial_angular_decompose(g, sample)?;
    if dec.radii.len() < 2 {
        return Err(Error::InvalidInput("fewer than two usable rows".into()));
    }
    let thresholds = thresholds.unwrap_or_else(|| Thresholds::for_n(dec.radii.len()));
    let gof = radial_gof(&dec.radii, &radial);
    let uniformity = uniformity_test(&dec);
    let taus = independence_test(&dec);
    let max_tau = taus.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let khat = empirical_kendall(sample)?;
    let grid = (0..=100)
        .map(|i| {
            let x = i as f64 / 100.0;
            [x, khat.eval(x)]
        })
        .collect();
    let pass = Verdicts {
        radial: gof.ks <= thresholds.radial_ks,
        uniformity: uniformity.iter().all(|&k| k <= thresholds.uniformity_ks),
        independence: max_tau <= thresholds.rank_correlation,
    };
    Ok(DiagnosticsReport {
        generator: g.label(),
        n: sample.n(),
        d,
        excluded: dec.excluded,
        radial_ks: gof.ks,
        radial_atoms: gof.atoms,
        uniformity_ks: uniformity,
        rank_correlations: taus,
        max_abs_rank_correlation: max_tau,
        thresholds,
        pass,
        empirical_kendall: grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub family: FamilyId,
    /// Name of the fitted parameter.
    pub parameter: &'static str,
    pub value: f64,
    pub distance: f64,
    pub evaluations: usize,
}

/// The free parameter of each fittable family. Reciprocal-uniform copulas
/// depend on b/a only, so a is pinned to 1.
fn family_params(family: FamilyId, value: f64) -> Result<(FamilyParams, &'static str)> {
    let mut p = FamilyParams::default();
    let name = match family {
        FamilyId::Clayton | FamilyId::PowerKink => {
            p.theta = Some(value);
            "theta"
        }
        FamilyId::ReciprocalUniform => {
            p.a = Some(1.0);
            p.b = Some(value);
            "b"
        }
        FamilyId::DiscreteRadial => {
            p.p = Some(value);
            "p"
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "family {family} has no free parameter to fit"
            )))
        }
    };
    Ok((p, name))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimum-distance fit of a one-parameter family: minimizes
/// sup |K̂ − K_θ| over `[lo, hi]` by a 33-point scan followed by a
/// golden-section search down to an interval of width 1e−4.
pub fn fit_generator(family: FamilyId, sample: &SampleMatrix, bounds: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = bounds;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid bounds [{lo}, {hi}]")));
    }
    let d = sample.d();
    let khat = empirical_kendall(sample)?;
    let (_, name) = family_params(family, lo)?;
    let mut evaluations = 0;
    let mut objective = |value: f64| -> Result<f64> {
        evaluations += 1;
        let (params, _) = family_params(family, value)?;
        let g = make_family(family, &params, d)?;
        let k = KendallFunction::new(&g, d)?;
        Ok(khat.distance_to(&k))
    };

    const SCAN: usize = 33;
    let xs: Vec<f64> = (0..SCAN).map(|i| lo + (hi - lo) * i as f64 / (SCAN - 1) as f64).collect();
    let mut fs = Vec::with_capacity(SCAN);
    for &x in &xs {
        fs.push(objective(x)?);
    }
    let (best, _) = fs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &f)| if f < acc.1 { (i, f) } else { acc });
    let spread = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - fs.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-6 {
        return Err(Error::NonIdentifiable { spread });
    }

    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(SCAN - 1)];
    let mut c = b - GOLDEN * (b - a);
    let mut e = a + GOLDEN * (b - a);
    let mut fc = objective(c)?;
    let mut fe = objective(e)?;
    while b - a > 1e-4 {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - GOLDEN * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + GOLDEN * (b - a);
            fe = objective(e)?;
        }
    }
    let mut value = 0.5 * (a + b);
    let mut distance = objective(value)?;
    if fs[best] < distance {
        value = xs[best];
        distance = fs[best];
    }
    Ok(FitResult {
        family,
        parameter: name,
        value,
        distance,
        evaluations,
    })
}
