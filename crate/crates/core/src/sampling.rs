//! Random variate generation for the catalog laws and the stochastic side
//! of the representation theorems.
//!
//! Heavy-tail honesty: the alpha < 1 families have no finite mean, so all
//! statistical validation here is pmf/total-variation based, never
//! moment based. The generator is pinned to ChaCha12; changing it breaks
//! recorded sample artifacts and is a breaking change.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Exp1, Geometric, Poisson, StandardNormal};
use thiserror::Error;

use crate::laws::{LawError, LawSpec};
use crate::operators::GeometricConvention;
use crate::series::TruncatedSeries;

/// Truncation tail mass above which inverse-CDF sampling refuses to run.
pub const TAIL_LIMIT: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(
        "tail mass {tail:e} at order {order} exceeds {limit}; raise the truncation order"
    )]
    TailTooHeavy {
        tail: f64,
        order: usize,
        limit: f64,
    },
    #[error(transparent)]
    Law(#[from] LawError),
}

/// Seeded, streamed RNG: identical `(seed, stream)` yields an identical
/// variate sequence. Streams are independent and safe to run in parallel.
#[derive(Clone, Debug)]
pub struct RngState {
    rng: ChaCha12Rng,
    seed: u64,
    stream: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// One-sided positive stable variate with LT `E[e^{-tS}] = e^{-t^alpha}`,
/// via the uniform-exponential ratio representation evaluated in the log
/// domain. The correctness contract is the Monte Carlo LT check, not the
/// formula itself.
pub fn sample_positive_stable(alpha: f64, rng: &mut RngState) -> Result<f64, SamplingError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SamplingError::Domain {
            name: "alpha",
            value: alpha,
            range: "(0, 1); alpha = 1 is the point mass at 1",
        });
    }
    let u = loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            break r * std::f64::consts::PI;
        }
    };
    let e: f64 = rng.sample(Exp1);
    let log_b = (alpha * (alpha * u).sin().ln()
        + (1.0 - alpha) * ((1.0 - alpha) * u).sin().ln()
        - u.sin().ln())
        / (1.0 - alpha);
    Ok(((log_b - e.ln()) * ((1.0 - alpha) / alpha)).exp())
}

fn draw_poisson(mean: f64, rng: &mut RngState) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean > 1e9 || !mean.is_finite() {
        // Deep in the mixture tail, far beyond any tracked support; the
        // normal approximation keeps counts sane without affecting any
        // pmf-level statistic (float-to-int casts saturate).
        let z: f64 = rng.sample(StandardNormal);
        let v = mean + mean.sqrt() * z;
        return if v.is_nan() || v < 0.0 { 0 } else { v.round() as u64 };
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng).round() as u64
}

fn draw_geometric0(p: f64, rng: &mut RngState) -> u64 {
    Geometric::new(p).expect("p in (0, 1)").sample(rng)
}

enum Route {
    Bernoulli { p: f64 },
    Binomial { n: u64, p: f64 },
    Poisson { lambda: f64 },
    // N ~ Poisson(scale * S_alpha) with scale = lambda^{1/alpha}
    StableMixture { scale: f64, alpha: f64 },
    // W ~ Exp(1), then the stable mixture at rate lambda * W
    ExpStableMixture { lambda: f64, alpha: f64 },
    Geometric0 { p: f64 },
    GeometricShifted { p: f64 },
    InverseCdf { cdf: Vec<f64> },
    Degenerate,
}

/// Prepared sampler for one law. Construction validates the law, picks a
/// route (closed-form, mixture, or inverse-CDF over the series pmf), and
/// fails with [`SamplingError::TailTooHeavy`] when the truncated table
/// would miss more than [`TAIL_LIMIT`] of the mass.
pub struct LawSampler {
    route: Route,
}

impl LawSampler {
    pub fn new(law: &LawSpec, order: usize) -> Result<Self, SamplingError> {
        let route = match *law {
            LawSpec::Bernoulli { p } => Route::Bernoulli { p },
            LawSpec::Binomial { n, p } => Route::Binomial { n: n as u64, p },
            LawSpec::Poisson { lambda } => Route::Poisson { lambda },
            LawSpec::AlphaPoisson { lambda, alpha } => {
                if alpha == 1.0 {
                    Route::Poisson { lambda }
                } else {
                    Route::StableMixture {
                        scale: lambda.powf(1.0 / alpha),
                        alpha,
                    }
                }
            }
            LawSpec::Dml { lambda, alpha } => Route::ExpStableMixture { lambda, alpha },
            LawSpec::Geometric0 { lambda } => Route::Geometric0 {
                p: 1.0 / (1.0 + lambda),
            },
            LawSpec::GeometricShifted { p } => Route::GeometricShifted { p },
            LawSpec::DegenerateAtOne => Route::Degenerate,
            LawSpec::AlphaBernoulli { .. }
            | LawSpec::AlphaBinomial { .. }
            | LawSpec::Dss { .. }
            | LawSpec::Dsml { .. } => {
                let pmf = law.pmf(order)?;
                let tail = pmf.tail_mass.max(0.0);
                if tail > TAIL_LIMIT {
                    return Err(SamplingError::TailTooHeavy {
                        tail,
                        order,
                        limit: TAIL_LIMIT,
                    });
                }
                let mut cdf = Vec::with_capacity(pmf.series.order() + 1);
                let mut acc = 0.0;
                for &c in pmf.series.coeffs() {
                    acc += c;
                    cdf.push(acc);
                }
                Route::InverseCdf { cdf }
            }
        };
        Ok(Self { route })
    }

    /// One variate. Inverse-CDF routes resample any uniform that lands in
    /// the untracked tail instead of clamping it to the last table entry.
    pub fn sample(&self, rng: &mut RngState) -> u64 {
        match &self.route {
            Route::Bernoulli { p } => rng.random_bool(*p) as u64,
            Route::Binomial { n, p } => {
                Binomial::new(*n, *p).expect("validated").sample(rng)
            }
            Route::Poisson { lambda } => draw_poisson(*lambda, rng),
            Route::StableMixture { scale, alpha } => {
                let s = sample_positive_stable(*alpha, rng).expect("validated");
                draw_poisson(scale * s, rng)
            }
            Route::ExpStableMixture { lambda, alpha } => {
                let w: f64 = rng.sample(Exp1);
                if *alpha == 1.0 {
                    draw_poisson(lambda * w, rng)
                } else {
                    let s = sample_positive_stable(*alpha, rng).expect("validated");
                    draw_poisson((lambda * w).powf(1.0 / alpha) * s, rng)
                }
            }
            Route::Geometric0 { p } => draw_geometric0(*p, rng),
            Route::GeometricShifted { p } => 1 + draw_geometric0(*p, rng),
            Route::InverseCdf { cdf } => {
                let tracked = *cdf.last().expect("non-empty");
                loop {
                    let u: f64 = rng.random();
                    if u < tracked {
                        return cdf.partition_point(|&c| c <= u) as u64;
                    }
                }
            }
            Route::Degenerate => 1,
        }
    }
}

/// Draws `count` variates from a fresh sampler.
pub fn sample_many(
    law: &LawSpec,
    count: usize,
    order: usize,
    rng: &mut RngState,
) -> Result<Vec<u64>, SamplingError> {
    let sampler = LawSampler::new(law, order)?;
    Ok((0..count).map(|_| sampler.sample(rng)).collect())
}

/// Binomial thinning of a realized count: each of the `x` units survives
/// independently with probability `c`.
pub fn thin_sample(x: u64, c: f64, rng: &mut RngState) -> Result<u64, SamplingError> {
    if !(0.0..=1.0).contains(&c) {
        return Err(SamplingError::Domain {
            name: "c",
            value: c,
            range: "[0, 1]",
        });
    }
    if x == 0 {
        return Ok(0);
    }
    Ok(Binomial::new(x, c).expect("validated").sample(rng))
}

/// Sum of a geometric number of i.i.d. draws from `sampler`.
pub fn geometric_sum_sample(
    sampler: &LawSampler,
    p: f64,
    convention: GeometricConvention,
    rng: &mut RngState,
) -> Result<u64, SamplingError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SamplingError::Domain {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    let n = match convention {
        GeometricConvention::Shifted => 1 + draw_geometric0(p, rng),
        GeometricConvention::ZeroBased => draw_geometric0(p, rng),
    };
    Ok((0..n).map(|_| sampler.sample(rng)).sum())
}

/// Normalized histogram truncated at `order`; mass beyond it shows up as
/// the series tail.
pub fn empirical_pmf(samples: &[u64], order: usize) -> TruncatedSeries {
    let mut coeffs = vec![0.0; order + 1];
    if samples.is_empty() {
        return TruncatedSeries::new(coeffs).expect("finite");
    }
    let n = samples.len() as f64;
    for &x in samples {
        if (x as usize) <= order {
            coeffs[x as usize] += 1.0;
        }
    }
    for c in &mut coeffs {
        *c /= n;
    }
    TruncatedSeries::new(coeffs).expect("finite")
}

/// Total variation distance between two (sub-)pmfs, with the untracked
/// tails compared as one lumped bin each.
pub fn tv_distance(a: &TruncatedSeries, b: &TruncatedSeries) -> f64 {
    let order = a.order().max(b.order());
    let mut acc = 0.0;
    for k in 0..=order {
        acc += (a.coeff(k) - b.coeff(k)).abs();
    }
    0.5 * acc + 0.5 * (a.tail_mass() - b.tail_mass()).abs()
}
