//! The law catalog: parametric lattice distributions with closed-form PGFs,
//! the LT<->PGF bridge, and pmf extraction through the series module.
//!
//! Every family here arises from a Laplace transform by the substitution
//! `P(s) = phi(1 - s)`. The semi-stable families (DSS, DSML) carry a
//! [`PsiFunction`] exponent `psi(u) = u^alpha (1 - A cos(k log u))` whose
//! scale pair `(a, b)` satisfies `a * b^alpha = 1` by construction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{
    add, binomial_series, exp_series, log_cos_compose, pow_int, reciprocal_series, SeriesError,
    TruncatedSeries, PMF_TOL,
};

#[derive(Debug, Error)]
pub enum LawError {
    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("{family} does not take parameter `{key}`")]
    UnknownParam { family: &'static str, key: String },
    #[error("{family} requires parameter `{key}`")]
    MissingParam { family: &'static str, key: &'static str },
    #[error("parameter `{key}` = {value} must be a positive integer")]
    NotAnInteger { key: &'static str, value: f64 },
    #[error("expected a {expected} handle, got {got}")]
    WrongKind { expected: HandleKind, got: HandleKind },
    #[error("handle normalization violated: {detail}")]
    BadNormalization { detail: String },
    #[error(
        "coefficients violate the pmf invariant at {} indices; worst c_{} = {:e}",
        violations.len(), worst_index, worst_value
    )]
    NotAValidPmf {
        violations: Vec<PmfViolation>,
        worst_index: usize,
        worst_value: f64,
        tail_mass: f64,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One nonnegativity violation found during pmf validation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PmfViolation {
    pub index: usize,
    pub value: f64,
}

/// The semi-stable exponent `psi(u) = u^alpha * (1 - amp * cos(k * log u))`.
///
/// `b` fixes the period: `k = -2*pi / log(b)`, so `psi(u) = a * psi(b*u)`
/// holds identically with `a = b^{-alpha}`. The constraint `a * b^alpha = 1`
/// (and hence `a*b <= 1`) is satisfied by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiFunction {
    alpha: f64,
    amp: f64,
    b: f64,
}

impl PsiFunction {
    pub fn new(alpha: f64, amp: f64, b: f64) -> Result<Self, LawError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(LawError::Domain {
                name: "alpha",
                value: alpha,
                range: "(0, 1]",
            });
        }
        if !(0.0..1.0).contains(&amp) {
            return Err(LawError::Domain {
                name: "A",
                value: amp,
                range: "[0, 1)",
            });
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(LawError::Domain {
                name: "b",
                value: b,
                range: "(0, 1)",
            });
        }
        Ok(Self { alpha, amp, b })
    }

    /// Power-law exponent without the periodic part (`A = 0`); `b` only fixes
    /// the scale pair, the function itself is `u^alpha`.
    pub fn power_law(alpha: f64, b: f64) -> Result<Self, LawError> {
        Self::new(alpha, 0.0, b)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn amp(&self) -> f64 {
        self.amp
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Scale factor `a = b^{-alpha} > 1`.
    pub fn a(&self) -> f64 {
        self.b.powf(-self.alpha)
    }

    /// Period-matching frequency `k = -2*pi / log(b) > 0`.
    pub fn k(&self) -> f64 {
        -2.0 * std::f64::consts::PI / self.b.ln()
    }

    /// `psi(u)` for `u > 0`.
    pub fn eval(&self, u: f64) -> Result<f64, LawError> {
        if u <= 0.0 {
            return Err(LawError::Domain {
                name: "u",
                value: u,
                range: "(0, inf)",
            });
        }
        Ok(u.powf(self.alpha) * (1.0 - self.amp * (self.k() * u.ln()).cos()))
    }

    /// Series of `psi(1 - s)` at the given truncation order.
    pub fn compose_series(&self, order: usize) -> Result<TruncatedSeries, SeriesError> {
        log_cos_compose(self.alpha, self.amp, self.k(), order)
    }
}

/// One lattice law from the catalog, with validated parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LawSpec {
    Bernoulli { p: f64 },
    /// PGF `1 - b(1-s)^alpha`.
    AlphaBernoulli { b: f64, alpha: f64 },
    Binomial { n: u32, p: f64 },
    /// PGF `[1 - b(1-s)^alpha]^n`.
    AlphaBinomial { n: u32, b: f64, alpha: f64 },
    Poisson { lambda: f64 },
    /// PGF `exp{-lambda (1-s)^alpha}`: discrete stable.
    AlphaPoisson { lambda: f64, alpha: f64 },
    /// PGF `1 / (1 + lambda(1-s))`, the geometric law on `{0, 1, ...}`.
    Geometric0 { lambda: f64 },
    /// PGF `p*s / (1 - q*s)` on `{1, 2, ...}`.
    GeometricShifted { p: f64 },
    /// PGF `[1 + lambda(1-s)^alpha]^{-1}`: discrete Mittag-Leffler.
    Dml { lambda: f64, alpha: f64 },
    /// PGF `exp{-psi(1-s)}`: discrete semi-stable.
    Dss { psi: PsiFunction },
    /// PGF `[1 + psi(1-s)]^{-1}`: discrete semi-Mittag-Leffler.
    Dsml { psi: PsiFunction },
    /// PGF `s`: unit mass at 1, the identity for geometric compounding.
    DegenerateAtOne,
}

fn check_prob(name: &'static str, v: f64) -> Result<f64, LawError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(LawError::Domain {
            name,
            value: v,
            range: "(0, 1)",
        })
    }
}

fn check_alpha(v: f64) -> Result<f64, LawError> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(LawError::Domain {
            name: "alpha",
            value: v,
            range: "(0, 1]",
        })
    }
}

fn check_rate(v: f64) -> Result<f64, LawError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(LawError::Domain {
            name: "lambda",
            value: v,
            range: "(0, inf)",
        })
    }
}

impl LawSpec {
    pub fn bernoulli(p: f64) -> Result<Self, LawError> {
        Ok(Self::Bernoulli { p: check_prob("p", p)? })
    }

    pub fn alpha_bernoulli(b: f64, alpha: f64) -> Result<Self, LawError> {
        Ok(Self::AlphaBernoulli {
            b: check_prob("b", b)?,
            alpha: check_alpha(alpha)?,
        })
    }

    pub fn binomial(n: u32, p: f64) -> Result<Self, LawError> {
        if n < 1 {
            return Err(LawError::Domain {
                name: "n",
                value: n as f64,
                range: "[1, ..)",
            });
        }
        Ok(Self::Binomial { n, p: check_prob("p", p)? })
    }

    pub fn alpha_binomial(n: u32, b: f64, alpha: f64) -> Result<Self, LawError> {
        if n < 1 {
            return Err(LawError::Domain {
                name: "n",
                value: n as f64,
                range: "[1, ..)",
            });
        }
        Ok(Self::AlphaBinomial {
            n,
            b: check_prob("b", b)?,
            alpha: check_alpha(alpha)?,
        })
    }

    pub fn poisson(lambda: f64) -> Result<Self, LawError> {
        Ok(Self::Poisson { lambda: check_rate(lambda)? })
    }

    pub fn alpha_poisson(lambda: f64, alpha: f64) -> Result<Self, LawError> {
        Ok(Self::AlphaPoisson {
            lambda: check_rate(lambda)?,
            alpha: check_alpha(alpha)?,
        })
    }

    pub fn geometric0(lambda: f64) -> Result<Self, LawError> {
        Ok(Self::Geometric0 { lambda: check_rate(lambda)? })
    }

    pub fn geometric_shifted(p: f64) -> Result<Self, LawError> {
        Ok(Self::GeometricShifted { p: check_prob("p", p)? })
    }

    pub fn dml(lambda: f64, alpha: f64) -> Result<Self, LawError> {
        Ok(Self::Dml {
            lambda: check_rate(lambda)?,
            alpha: check_alpha(alpha)?,
        })
    }

    pub fn dss(psi: PsiFunction) -> Self {
        Self::Dss { psi }
    }

    pub fn dsml(psi: PsiFunction) -> Self {
        Self::Dsml { psi }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Bernoulli { .. } => "bernoulli",
            Self::AlphaBernoulli { .. } => "alpha-bernoulli",
            Self::Binomial { .. } => "binomial",
            Self::AlphaBinomial { .. } => "alpha-binomial",
            Self::Poisson { .. } => "poisson",
            Self::AlphaPoisson { .. } => "alpha-poisson",
            Self::Geometric0 { .. } => "geometric0",
            Self::GeometricShifted { .. } => "geometric-shifted",
            Self::Dml { .. } => "dml",
            Self::Dss { .. } => "dss",
            Self::Dsml { .. } => "dsml",
            Self::DegenerateAtOne => "degenerate-at-one",
        }
    }

    /// Builds a law from its kebab-case family name and `key=value`
    /// parameters: the grammar shared with the CLI. Unknown keys are
    /// rejected rather than ignored.
    pub fn from_params(family: &str, params: &BTreeMap<String, f64>) -> Result<Self, LawError> {
        fn take(
            params: &BTreeMap<String, f64>,
            family: &'static str,
            key: &'static str,
        ) -> Result<f64, LawError> {
            params
                .get(key)
                .copied()
                .ok_or(LawError::MissingParam { family, key })
        }
        fn take_count(
            params: &BTreeMap<String, f64>,
            family: &'static str,
            key: &'static str,
        ) -> Result<u32, LawError> {
            let v = take(params, family, key)?;
            if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
                return Err(LawError::NotAnInteger { key, value: v });
            }
            Ok(v as u32)
        }
        fn reject_unknown(
            params: &BTreeMap<String, f64>,
            family: &'static str,
            allowed: &[&str],
        ) -> Result<(), LawError> {
            for key in params.keys() {
                if !allowed.contains(&key.as_str()) {
                    return Err(LawError::UnknownParam {
                        family,
                        key: key.clone(),
                    });
                }
            }
            Ok(())
        }

        match family {
            "bernoulli" => {
                reject_unknown(params, "bernoulli", &["p"])?;
                Self::bernoulli(take(params, "bernoulli", "p")?)
            }
            "alpha-bernoulli" => {
                reject_unknown(params, "alpha-bernoulli", &["b", "alpha"])?;
                Self::alpha_bernoulli(
                    take(params, "alpha-bernoulli", "b")?,
                    take(params, "alpha-bernoulli", "alpha")?,
                )
            }
            "binomial" => {
                reject_unknown(params, "binomial", &["n", "p"])?;
                Self::binomial(
                    take_count(params, "binomial", "n")?,
                    take(params, "binomial", "p")?,
                )
            }
            "alpha-binomial" => {
                reject_unknown(params, "alpha-binomial", &["n", "b", "alpha"])?;
                Self::alpha_binomial(
                    take_count(params, "alpha-binomial", "n")?,
                    take(params, "alpha-binomial", "b")?,
                    take(params, "alpha-binomial", "alpha")?,
                )
            }
            "poisson" => {
                reject_unknown(params, "poisson", &["lambda"])?;
                Self::poisson(take(params, "poisson", "lambda")?)
            }
            "alpha-poisson" => {
                reject_unknown(params, "alpha-poisson", &["lambda", "alpha"])?;
                Self::alpha_poisson(
                    take(params, "alpha-poisson", "lambda")?,
                    take(params, "alpha-poisson", "alpha")?,
                )
            }
            "geometric0" => {
                reject_unknown(params, "geometric0", &["lambda"])?;
                Self::geometric0(take(params, "geometric0", "lambda")?)
            }
            "geometric-shifted" => {
                reject_unknown(params, "geometric-shifted", &["p"])?;
                Self::geometric_shifted(take(params, "geometric-shifted", "p")?)
            }
            "dml" => {
                reject_unknown(params, "dml", &["lambda", "alpha"])?;
                Self::dml(
                    take(params, "dml", "lambda")?,
                    take(params, "dml", "alpha")?,
                )
            }
            "dss" | "dsml" => {
                let fam: &'static str = if family == "dss" { "dss" } else { "dsml" };
                reject_unknown(params, fam, &["b", "alpha", "A"])?;
                let psi = PsiFunction::new(
                    take(params, fam, "alpha")?,
                    params.get("A").copied().unwrap_or(0.0),
                    take(params, fam, "b")?,
                )?;
                Ok(if fam == "dss" {
                    Self::dss(psi)
                } else {
                    Self::dsml(psi)
                })
            }
            "degenerate-at-one" => {
                reject_unknown(params, "degenerate-at-one", &[])?;
                Ok(Self::DegenerateAtOne)
            }
            other => Err(LawError::UnknownFamily(other.to_string())),
        }
    }

    /// Closed-form PGF value at `s` in `[0, 1]`.
    pub fn pgf_eval(&self, s: f64) -> Result<f64, LawError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(LawError::Domain {
                name: "s",
                value: s,
                range: "[0, 1]",
            });
        }
        Ok(self.pgf_unchecked(s))
    }

    // Scalar PGF without the domain guard; handles also use this on the
    // affine-substituted arguments that stay inside [0, 1].
    fn pgf_unchecked(&self, s: f64) -> f64 {
        let u = 1.0 - s;
        match *self {
            Self::Bernoulli { p } => 1.0 - p * u,
            Self::AlphaBernoulli { b, alpha } => 1.0 - b * u.powf(alpha),
            Self::Binomial { n, p } => (1.0 - p * u).powi(n as i32),
            Self::AlphaBinomial { n, b, alpha } => (1.0 - b * u.powf(alpha)).powi(n as i32),
            Self::Poisson { lambda } => (-lambda * u).exp(),
            Self::AlphaPoisson { lambda, alpha } => (-lambda * u.powf(alpha)).exp(),
            Self::Geometric0 { lambda } => 1.0 / (1.0 + lambda * u),
            Self::GeometricShifted { p } => p * s / (1.0 - (1.0 - p) * s),
            Self::Dml { lambda, alpha } => 1.0 / (1.0 + lambda * u.powf(alpha)),
            // psi(u) -> 0 as u -> 0+, so both semi-laws normalize at s = 1.
            Self::Dss { psi } => {
                if u == 0.0 {
                    1.0
                } else {
                    (-psi.eval(u).expect("u > 0")).exp()
                }
            }
            Self::Dsml { psi } => {
                if u == 0.0 {
                    1.0
                } else {
                    1.0 / (1.0 + psi.eval(u).expect("u > 0"))
                }
            }
            Self::DegenerateAtOne => s,
        }
    }

    /// Raw pmf coefficients at the given order, without the nonnegativity
    /// check. Membership and validity checks work on this series directly.
    pub fn pmf_series(&self, order: usize) -> Result<TruncatedSeries, LawError> {
        let series = match *self {
            Self::Bernoulli { p } => {
                TruncatedSeries::new(vec![1.0 - p, p])?.resized(order.max(1))
            }
            Self::AlphaBernoulli { b, alpha } => alpha_bernoulli_series(b, alpha, order)?,
            Self::Binomial { n, p } => pow_int(
                &TruncatedSeries::new(vec![1.0 - p, p])?.resized(order.max(1)),
                n,
            ),
            Self::AlphaBinomial { n, b, alpha } => {
                pow_int(&alpha_bernoulli_series(b, alpha, order)?, n)
            }
            Self::Poisson { lambda } => {
                exp_series(&binomial_series(1.0, order)?.scale(-lambda))?
            }
            Self::AlphaPoisson { lambda, alpha } => {
                exp_series(&binomial_series(alpha, order)?.scale(-lambda))?
            }
            Self::Geometric0 { lambda } => reciprocal_series(&add(
                &TruncatedSeries::unit(order),
                &binomial_series(1.0, order)?.scale(lambda),
            ))?,
            Self::GeometricShifted { p } => {
                // p*s / (1 - q*s): reciprocal route shifted up one index
                let mut den = TruncatedSeries::unit(order);
                den = add(
                    &den,
                    &TruncatedSeries::new(vec![0.0, -(1.0 - p)])?.resized(order),
                );
                let inv = reciprocal_series(&den)?;
                let mut c = vec![0.0; order + 1];
                for (k, ck) in c.iter_mut().enumerate().skip(1) {
                    *ck = p * inv.coeff(k - 1);
                }
                TruncatedSeries::new(c)?
            }
            Self::Dml { lambda, alpha } => reciprocal_series(&add(
                &TruncatedSeries::unit(order),
                &binomial_series(alpha, order)?.scale(lambda),
            ))?,
            Self::Dss { psi } => exp_series(&psi.compose_series(order)?.scale(-1.0))?,
            Self::Dsml { psi } => reciprocal_series(&add(
                &TruncatedSeries::unit(order),
                &psi.compose_series(order)?,
            ))?,
            Self::DegenerateAtOne => {
                let mut c = vec![0.0; order.max(1) + 1];
                c[1] = 1.0;
                TruncatedSeries::new(c)?
            }
        };
        Ok(series)
    }

    /// Validated pmf: coefficients in `[-PMF_TOL, 0]` are clamped to zero,
    /// anything lower (or non-finite) is reported as a violation and the
    /// whole extraction fails with [`LawError::NotAValidPmf`].
    pub fn pmf(&self, order: usize) -> Result<Pmf, LawError> {
        let raw = self.pmf_series(order)?;
        let mut violations = Vec::new();
        let mut clamped = Vec::with_capacity(raw.order() + 1);
        for (index, &value) in raw.coeffs().iter().enumerate() {
            if !value.is_finite() || value < -PMF_TOL {
                violations.push(PmfViolation { index, value });
                clamped.push(value);
            } else {
                clamped.push(value.max(0.0));
            }
        }
        if violations.is_empty() {
            let series = TruncatedSeries::new(clamped)?;
            let tail_mass = series.tail_mass();
            Ok(Pmf { series, tail_mass })
        } else {
            let &PmfViolation { index, value } = violations
                .iter()
                .reduce(|worst, v| {
                    if v.value.is_nan() || v.value < worst.value {
                        v
                    } else {
                        worst
                    }
                })
                .expect("non-empty");
            Err(LawError::NotAValidPmf {
                worst_index: index,
                worst_value: value,
                tail_mass: raw.tail_mass(),
                violations,
            })
        }
    }

    /// The law's PGF as an evaluable handle.
    pub fn pgf_handle(&self) -> TransformHandle {
        let law = self.clone();
        TransformHandle {
            kind: HandleKind::Pgf,
            f: Arc::new(move |s| law.pgf_unchecked(s)),
        }
    }
}

fn alpha_bernoulli_series(
    b: f64,
    alpha: f64,
    order: usize,
) -> Result<TruncatedSeries, SeriesError> {
    Ok(add(
        &TruncatedSeries::unit(order),
        &binomial_series(alpha, order)?.scale(-b),
    ))
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family_name())?;
        match *self {
            Self::Bernoulli { p } | Self::GeometricShifted { p } => write!(f, " p={p}"),
            Self::AlphaBernoulli { b, alpha } => write!(f, " b={b} alpha={alpha}"),
            Self::Binomial { n, p } => write!(f, " n={n} p={p}"),
            Self::AlphaBinomial { n, b, alpha } => write!(f, " n={n} b={b} alpha={alpha}"),
            Self::Poisson { lambda } | Self::Geometric0 { lambda } => {
                write!(f, " lambda={lambda}")
            }
            Self::AlphaPoisson { lambda, alpha } | Self::Dml { lambda, alpha } => {
                write!(f, " lambda={lambda} alpha={alpha}")
            }
            Self::Dss { psi } | Self::Dsml { psi } => {
                write!(f, " b={} alpha={} A={}", psi.b(), psi.alpha(), psi.amp())
            }
            Self::DegenerateAtOne => Ok(()),
        }
    }
}

/// Validated pmf extraction result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pmf {
    pub series: TruncatedSeries,
    /// Mass beyond the truncation order: `1 - sum(p_k)`.
    pub tail_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HandleKind {
    Pgf,
    Lt,
}

impl fmt::Display for HandleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pgf => write!(f, "PGF"),
            Self::Lt => write!(f, "LT"),
        }
    }
}

/// An evaluable scalar function standing for a PGF or an LT.
///
/// PGF handles satisfy `f(1) = 1`, LT handles `f(0) = 1`; both are checked
/// at construction.
#[derive(Clone)]
pub struct TransformHandle {
    kind: HandleKind,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TransformHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformHandle")
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl TransformHandle {
    pub fn new_pgf(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, LawError> {
        let at_one = f(1.0);
        if (at_one - 1.0).abs() > 1e-12 {
            return Err(LawError::BadNormalization {
                detail: format!("PGF(1) = {at_one}, expected 1"),
            });
        }
        Ok(Self {
            kind: HandleKind::Pgf,
            f: Arc::new(f),
        })
    }

    pub fn new_lt(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self, LawError> {
        let at_zero = f(0.0);
        if (at_zero - 1.0).abs() > 1e-12 {
            return Err(LawError::BadNormalization {
                detail: format!("LT(0) = {at_zero}, expected 1"),
            });
        }
        Ok(Self {
            kind: HandleKind::Lt,
            f: Arc::new(f),
        })
    }

    pub fn kind(&self) -> HandleKind {
        self.kind
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    fn expect_kind(&self, expected: HandleKind) -> Result<(), LawError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(LawError::WrongKind {
                expected,
                got: self.kind,
            })
        }
    }
}

/// Lemma-level bridge: an LT `phi` becomes the PGF `s -> phi(1 - s)`.
pub fn pgf_from_lt(phi: &TransformHandle) -> Result<TransformHandle, LawError> {
    phi.expect_kind(HandleKind::Lt)?;
    let inner = phi.f.clone();
    Ok(TransformHandle {
        kind: HandleKind::Pgf,
        f: Arc::new(move |s| inner(1.0 - s)),
    })
}

/// Reverse bridge: a PGF `P` yields the candidate LT `s -> P(1 - s)`.
///
/// The result is provisional: `P(1 - s)` is a genuine LT only when it is
/// completely monotone for all `s > 0`, which can fail (the alpha-Bernoulli
/// PGF goes negative past `s = 1/b^{1/alpha}`). Confirm with
/// [`crate::checks::cm_grid_check`].
pub fn lt_from_pgf(p: &TransformHandle) -> Result<TransformHandle, LawError> {
    p.expect_kind(HandleKind::Pgf)?;
    let inner = p.f.clone();
    Ok(TransformHandle {
        kind: HandleKind::Lt,
        f: Arc::new(move |s| inner(1.0 - s)),
    })
}

/// LT of the exponential mixing law: `1 / (1 + lambda s)`.
pub fn lt_exponential(lambda: f64) -> Result<TransformHandle, LawError> {
    check_rate(lambda)?;
    TransformHandle::new_lt(move |s| 1.0 / (1.0 + lambda * s))
}

/// LT of the one-sided stable law: `exp{-lambda s^alpha}`.
pub fn lt_stable(lambda: f64, alpha: f64) -> Result<TransformHandle, LawError> {
    check_rate(lambda)?;
    check_alpha(alpha)?;
    TransformHandle::new_lt(move |s| (-lambda * s.powf(alpha)).exp())
}

/// LT of unit mass at `c`: `exp{-c s}`.
pub fn lt_point_mass(c: f64) -> Result<TransformHandle, LawError> {
    if c < 0.0 {
        return Err(LawError::Domain {
            name: "c",
            value: c,
            range: "[0, inf)",
        });
    }
    TransformHandle::new_lt(move |s| (-c * s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgf_eval_closed_forms() {
        let ap = LawSpec::alpha_poisson(1.0, 1.0).unwrap();
        assert!((ap.pgf_eval(0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let dml = LawSpec::dml(2.0, 0.5).unwrap();
        assert!((dml.pgf_eval(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(ap.pgf_eval(1.2).is_err());
    }

    #[test]
    fn every_family_normalizes_at_one() {
        let psi = PsiFunction::new(0.5, 0.3, 0.25).unwrap();
        let laws = [
            LawSpec::bernoulli(0.3).unwrap(),
            LawSpec::alpha_bernoulli(0.5, 0.5).unwrap(),
            LawSpec::binomial(4, 0.2).unwrap(),
            LawSpec::alpha_binomial(3, 0.4, 0.7).unwrap(),
            LawSpec::poisson(1.5).unwrap(),
            LawSpec::alpha_poisson(1.0, 0.6).unwrap(),
            LawSpec::geometric0(2.0).unwrap(),
            LawSpec::geometric_shifted(0.4).unwrap(),
            LawSpec::dml(1.0, 0.6).unwrap(),
            LawSpec::dss(psi),
            LawSpec::dsml(psi),
            LawSpec::DegenerateAtOne,
        ];
        for law in &laws {
            assert!(
                (law.pgf_eval(1.0).unwrap() - 1.0).abs() < 1e-12,
                "{law} not normalized"
            );
        }
    }

    #[test]
    fn alpha_bernoulli_pmf_hand_values() {
        let law = LawSpec::alpha_bernoulli(0.5, 0.5).unwrap();
        let pmf = law.pmf(3).unwrap();
        let expected = [0.5, 0.25, 0.0625, 0.03125];
        for (k, e) in expected.iter().enumerate() {
            assert!((pmf.series.coeff(k) - e).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn alpha_poisson_reduces_to_poisson() {
        let a = LawSpec::alpha_poisson(1.7, 1.0).unwrap().pmf(48).unwrap();
        let b = LawSpec::poisson(1.7).unwrap().pmf(48).unwrap();
        for k in 0..=48 {
            assert!((a.series.coeff(k) - b.series.coeff(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn dml_alpha_one_is_geometric() {
        let lambda = 2.0;
        let pmf = LawSpec::dml(lambda, 1.0).unwrap().pmf(64).unwrap();
        let p = 1.0 / (1.0 + lambda);
        let q = lambda / (1.0 + lambda);
        for k in 0..=64usize {
            let expected = p * q.powi(k as i32);
            assert!((pmf.series.coeff(k) - expected).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn geometric_shifted_lives_on_positive_integers() {
        let pmf = LawSpec::geometric_shifted(0.4).unwrap().pmf(32).unwrap();
        assert_eq!(pmf.series.coeff(0), 0.0);
        for k in 1..=32usize {
            let expected = 0.4 * 0.6f64.powi(k as i32 - 1);
            assert!((pmf.series.coeff(k) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn alpha_poisson_first_order_ratio() {
        // exp{-lambda(1-s)^alpha} has p_1 / p_0 = lambda * alpha
        let (lambda, alpha) = (0.7, 0.35);
        let pmf = LawSpec::alpha_poisson(lambda, alpha).unwrap().pmf(8).unwrap();
        let ratio = pmf.series.coeff(1) / pmf.series.coeff(0);
        assert!((ratio - lambda * alpha).abs() < 1e-12);
    }

    #[test]
    fn semi_laws_with_amp_zero_match_power_laws() {
        let psi = PsiFunction::power_law(0.6, 0.3).unwrap();
        let dss = LawSpec::dss(psi).pmf_series(128).unwrap();
        let ap = LawSpec::alpha_poisson(1.0, 0.6).unwrap().pmf_series(128).unwrap();
        let dsml = LawSpec::dsml(psi).pmf_series(128).unwrap();
        let dml = LawSpec::dml(1.0, 0.6).unwrap().pmf_series(128).unwrap();
        for k in 0..=128 {
            assert!((dss.coeff(k) - ap.coeff(k)).abs() < 1e-12);
            assert!((dsml.coeff(k) - dml.coeff(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_dss_pmf_is_reported_invalid() {
        // exp{-psi(1-s)} with an oscillating psi is not a pmf here: the
        // extraction must say so rather than clamp.
        let psi = PsiFunction::new(0.5, 0.9, 0.3).unwrap();
        match LawSpec::dss(psi).pmf(128) {
            Err(LawError::NotAValidPmf {
                violations,
                worst_value,
                ..
            }) => {
                assert!(!violations.is_empty());
                assert!(worst_value < -1.0);
            }
            other => panic!("expected NotAValidPmf, got {other:?}"),
        }
    }

    #[test]
    fn eval_agrees_with_pgf_eval_within_tail() {
        let laws = [
            LawSpec::alpha_poisson(1.0, 0.5).unwrap(),
            LawSpec::dml(2.0, 0.7).unwrap(),
            LawSpec::alpha_binomial(5, 0.6, 0.8).unwrap(),
            LawSpec::geometric0(1.0).unwrap(),
        ];
        for law in &laws {
            let pmf = law.pmf(256).unwrap();
            let budget = pmf.tail_mass.abs() + 1e-10;
            for i in 0..=20 {
                let s = i as f64 * 0.05;
                let diff = (pmf.series.eval(s) - law.pgf_eval(s).unwrap()).abs();
                assert!(diff <= budget, "{law} at s={s}: {diff} > {budget}");
            }
        }
    }

    #[test]
    fn psi_functional_equation() {
        let psi = PsiFunction::new(0.5, 0.3, 0.25).unwrap();
        let (a, b) = (psi.a(), psi.b());
        assert!((a * b.powf(psi.alpha()) - 1.0).abs() < 1e-12);
        for i in 1..=40 {
            let u = i as f64 * 0.25;
            let lhs = psi.eval(u).unwrap();
            let rhs = a * psi.eval(b * u).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "u={u}");
        }
        assert!((psi.eval(1.0).unwrap() - 0.7).abs() < 1e-15);
        assert!(psi.eval(0.0).is_err());
    }

    #[test]
    fn bridge_round_trip_is_identity() {
        let phi = lt_exponential(1.0).unwrap();
        let pgf = pgf_from_lt(&phi).unwrap();
        let geo = LawSpec::geometric0(1.0).unwrap();
        let back = lt_from_pgf(&pgf).unwrap();
        for i in 0..=20 {
            let s = i as f64 * 0.05;
            assert!((pgf.eval(s) - geo.pgf_eval(s).unwrap()).abs() < 1e-14);
            assert!((back.eval(s) - phi.eval(s)).abs() < 1e-14);
        }
        assert!(pgf_from_lt(&pgf).is_err());
        assert!(lt_from_pgf(&phi).is_err());
    }

    #[test]
    fn stable_lt_gives_alpha_poisson() {
        let pgf = pgf_from_lt(&lt_stable(1.3, 0.6).unwrap()).unwrap();
        let ap = LawSpec::alpha_poisson(1.3, 0.6).unwrap();
        for i in 0..=10 {
            let s = i as f64 * 0.1;
            assert!((pgf.eval(s) - ap.pgf_eval(s).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn from_params_grammar() {
        let mut kv = BTreeMap::new();
        kv.insert("lambda".to_string(), 1.0);
        kv.insert("alpha".to_string(), 0.7);
        let law = LawSpec::from_params("alpha-poisson", &kv).unwrap();
        assert_eq!(law, LawSpec::alpha_poisson(1.0, 0.7).unwrap());

        kv.insert("bogus".to_string(), 3.0);
        assert!(matches!(
            LawSpec::from_params("alpha-poisson", &kv),
            Err(LawError::UnknownParam { key, .. }) if key == "bogus"
        ));
        assert!(matches!(
            LawSpec::from_params("nope", &BTreeMap::new()),
            Err(LawError::UnknownFamily(_))
        ));
        let mut missing = BTreeMap::new();
        missing.insert("alpha".to_string(), 0.7);
        assert!(matches!(
            LawSpec::from_params("dml", &missing),
            Err(LawError::MissingParam { key: "lambda", .. })
        ));
    }

    #[test]
    fn display_round_trips_family_name() {
        let psi = PsiFunction::new(0.5, 0.4, 0.25).unwrap();
        let law = LawSpec::dsml(psi);
        assert_eq!(law.to_string(), "dsml b=0.25 alpha=0.5 A=0.4");
    }
}
