//! Simulation of the uniform simplex, of Archimedean copulas through their
//! radial representation, and of Clayton copulas through a gamma frailty.
//!
//! Seeded samplers split the rows into fixed chunks of [`CHUNK_ROWS`]; chunk
//! `c` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`. Output is
//! therefore identical for every thread count.

use std::io::{BufRead, Write};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorConfig};
use crate::radial::RadialDistribution;
use crate::williamson::radial_from_generator;

/// Rows per independent random stream.
pub const CHUNK_ROWS: usize = 4096;

/// Provenance of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub algorithm: String,
}

impl SampleMeta {
    pub fn unknown() -> Self {
        Self {
            family: "unknown".into(),
            config: None,
            seed: None,
            algorithm: "external".into(),
        }
    }

    fn for_generator(g: &Generator, seed: Option<u64>, algorithm: &str) -> Self {
        Self {
            family: g.label(),
            config: g.config(),
            seed,
            algorithm: algorithm.into(),
        }
    }
}

/// An n × d matrix of observations stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
    pub meta: SampleMeta,
}

impl SampleMatrix {
    pub fn new(d: usize, values: Vec<f64>, meta: SampleMeta) -> Result<Self> {
        if d == 0 || values.len() % d != 0 {
            return Err(Error::InvalidInput(format!(
                "{} values do not form rows of width {d}",
                values.len()
            )));
        }
        Ok(Self {
            n: values.len() / d,
            d,
            values,
            meta,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("rows have different lengths".into()));
        }
        Self::new(d, rows.concat(), SampleMeta::unknown())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// CSV with header `u1,...,ud`, shortest round-trip floats, LF endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.d).map(|j| format!("u{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for row in self.rows() {
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:?}"));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }

    /// Parses CSV with a single header line.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::InvalidInput(e.to_string()))?,
            None => return Err(Error::InvalidInput("empty CSV".into())),
        };
        let d = header.trim_end_matches('\r').split(',').count();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let before = values.len();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("line {}: cannot parse {field:?}", i + 2))
                })?;
                values.push(v);
            }
            if values.len() - before != d {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected {d} fields, found {}",
                    i + 2,
                    values.len() - before
                )));
            }
        }
        Self::new(d, values, SampleMeta::unknown())
    }
}

/// Uniform point on the unit simplex: exponentials divided by their sum.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut sum = 0.0;
    for s in out.iter_mut() {
        *s = Exp1.sample(rng);
        sum += *s;
    }
    for s in out.iter_mut() {
        *s /= sum;
    }
}

/// Guards ψ⁻¹(U) against +∞ for strict generators.
fn nudge(u: f64, strict: bool) -> f64 {
    if strict && u <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        u
    }
}

fn copula_row<R: Rng + ?Sized>(
    g: &Generator,
    radial: &RadialDistribution,
    rng: &mut R,
    row: &mut [f64],
) -> Result<()> {
    let u: f64 = rng.sample(Open01);
    let r = radial.quantile(u)?;
    sample_simplex(rng, row);
    let strict = g.is_strict();
    for v in row.iter_mut() {
        *v = nudge(g.psi(r * *v), strict);
    }
    Ok(())
}

/// n rows of the copula generated by ψ in dimension d: Uᵢ = ψ(R·Sᵢ).
pub fn sample_copula<R: Rng + ?Sized>(g: &Generator, d: usize, n: usize, rng: &mut R) -> Result<SampleMatrix> {
    let radial = radial_from_generator(g, d)?;
    sample_copula_with(g, &radial, d, n, rng)
}

/// As [`sample_copula`] with a prebuilt radial law.
pub fn sample_copula_with<R: Rng + ?Sized>(
    g: &Generator,
    radial: &RadialDistribution,
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let mut values = vec![0.0; n * d];
    for row in values.chunks_exact_mut(d) {
        copula_row(g, radial, rng, row)?;
    }
    SampleMatrix::new(d, values, SampleMeta::for_generator(g, None, "williamson"))
}

/// ℓ1-norm symmetric vectors R·S.
pub fn sample_l1_symmetric<R: Rng + ?Sized>(
    radial: &RadialDistribution,
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let mut values = vec![0.0; n * d];
    for row in values.chunks_exact_mut(d) {
        let u: f64 = rng.sample(Open01);
        let r = radial.quantile(u)?;
        sample_simplex(rng, row);
        row.iter_mut().for_each(|s| *s *= r);
    }
    let meta = SampleMeta {
        family: "radial".into(),
        config: None,
        seed: None,
        algorithm: "l1_symmetric".into(),
    };
    SampleMatrix::new(d, values, meta)
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension d = {d} must be >= 2")));
    }
    Ok(())
}

fn frailty_row<R: Rng + ?Sized>(theta: f64, gamma: &Gamma<f64>, rng: &mut R, row: &mut [f64]) {
    let w = gamma.sample(rng);
    for v in row.iter_mut() {
        let y: f64 = Exp1.sample(rng);
        let u = (-(1.0 / theta) * (theta * y / w).ln_1p()).exp();
        *v = nudge(u, true);
    }
}

fn frailty_gamma(theta: f64) -> Result<Gamma<f64>> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::param("clayton", format!("frailty sampler needs theta > 0, got {theta}")));
    }
    Gamma::new(1.0 / theta, theta).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Clayton copula through the frailty model: W ~ Gamma(1/θ, θ),
/// Uᵢ = (1 + θYᵢ/W)^{−1/θ} with Yᵢ i.i.d. Exp(1).
pub fn sample_frailty_clayton<R: Rng + ?Sized>(
    theta: f64,
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    check_d(d)?;
    let gamma = frailty_gamma(theta)?;
    let mut values = vec![0.0; n * d];
    for row in values.chunks_exact_mut(d) {
        frailty_row(theta, &gamma, rng, row);
    }
    let g = Generator::clayton(theta)?.with_d_context(d);
    SampleMatrix::new(d, values, SampleMeta::for_generator(&g, None, "frailty"))
}

/// Fills `n` rows chunk by chunk, each chunk on its own stream of `seed`.
fn seeded_rows<F>(n: usize, d: usize, seed: u64, threads: usize, fill: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    let mut values = vec![0.0; n * d];
    let work = |values: &mut Vec<f64>| {
        values
            .par_chunks_mut(CHUNK_ROWS * d)
            .enumerate()
            .try_for_each(|(c, chunk)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                chunk.chunks_exact_mut(d).try_for_each(|row| fill(&mut rng, row))
            })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| work(&mut values))?;
    Ok(values)
}

/// Reproducible [`sample_copula`]: same seed, same bits, any thread count.
pub fn sample_copula_seeded(
    g: &Generator,
    d: usize,
    n: usize,
    seed: u64,
    threads: usize,
) -> Result<SampleMatrix> {
    let radial = radial_from_generator(g, d)?;
    let values = seeded_rows(n, d, seed, threads, |rng, row| copula_row(g, &radial, rng, row))?;
    SampleMatrix::new(d, values, SampleMeta::for_generator(g, Some(seed), "williamson"))
}

/// Reproducible [`sample_frailty_clayton`].
pub fn sample_frailty_clayton_seeded(
    theta: f64,
    d: usize,
    n: usize,
    seed: u64,
    threads: usize,
) -> Result<SampleMatrix> {
    check_d(d)?;
    let gamma = frailty_gamma(theta)?;
    let values = seeded_rows(n, d, seed, threads, |rng, row| {
        frailty_row(theta, &gamma, rng, row);
        Ok(())
    })?;
    let g = Generator::clayton(theta)?.with_d_context(d);
    SampleMatrix::new(d, values, SampleMeta::for_generator(&g, Some(seed), "frailty"))
}
