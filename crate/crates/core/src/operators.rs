//! Structural maps between laws: binomial thinning, n-fold convolution,
//! geometric compounding, Poisson mixing, the self-decomposability quotient,
//! and Bernoulli factorization.
//!
//! Every operator is closed over both representations: scalar transform
//! handles and truncated coefficient series. Identity checks run both routes
//! so that truncation bugs show up against exact scalar math.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{CheckReport, Detail, Location, HANDLE_TOL};
use crate::laws::{pgf_from_lt, HandleKind, LawError, LawSpec, TransformHandle};
use crate::series::{
    add, affine_substitute, mul, pow_int, reciprocal_series, SeriesError, TruncatedSeries,
};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("factorization invalid: {0}")]
    FactorizationInvalid(String),
    #[error("{op} is not defined for family `{family}`")]
    UnsupportedFamily {
        op: &'static str,
        family: &'static str,
    },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn check_open_unit(name: &'static str, v: f64) -> Result<f64, OperatorError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(OperatorError::Domain {
            name,
            value: v,
            range: "(0, 1)",
        })
    }
}

fn expect_pgf(h: &TransformHandle) -> Result<(), OperatorError> {
    if h.kind() == HandleKind::Pgf {
        Ok(())
    } else {
        Err(LawError::WrongKind {
            expected: HandleKind::Pgf,
            got: h.kind(),
        }
        .into())
    }
}

/// Which geometric counting law a compound uses: support `{1, 2, ...}`
/// (`p*P / (1 - q*P)`) or `{0, 1, ...}` (`p / (1 - q*P)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometricConvention {
    Shifted,
    ZeroBased,
}

/// Binomial thinning on the handle route: `s -> P(1 - c + c*s)`.
///
/// This is the lattice replacement for scalar multiplication by `c`.
pub fn thin(p: &TransformHandle, c: f64) -> Result<TransformHandle, OperatorError> {
    check_open_unit("c", c)?;
    expect_pgf(p)?;
    let inner = p.clone();
    Ok(TransformHandle::new_pgf(move |s| {
        inner.eval(1.0 - c + c * s)
    })?)
}

/// Binomial thinning on the series route: composition with `(1-c) + c*s`.
pub fn thin_series(p: &TruncatedSeries, c: f64) -> Result<TruncatedSeries, OperatorError> {
    check_open_unit("c", c)?;
    Ok(affine_substitute(p, c)?)
}

/// PGF (or LT) of the sum of `n` independent copies: pointwise power.
pub fn convolve_n(p: &TransformHandle, n: u32) -> Result<TransformHandle, OperatorError> {
    if n < 1 {
        return Err(OperatorError::Domain {
            name: "n",
            value: n as f64,
            range: "[1, ..)",
        });
    }
    let inner = p.clone();
    let f = move |s: f64| inner.eval(s).powi(n as i32);
    Ok(match p.kind() {
        HandleKind::Pgf => TransformHandle::new_pgf(f)?,
        HandleKind::Lt => TransformHandle::new_lt(f)?,
    })
}

/// Series route of [`convolve_n`].
pub fn convolve_n_series(p: &TruncatedSeries, n: u32) -> Result<TruncatedSeries, OperatorError> {
    if n < 1 {
        return Err(OperatorError::Domain {
            name: "n",
            value: n as f64,
            range: "[1, ..)",
        });
    }
    Ok(pow_int(p, n))
}

/// Geometric compound of i.i.d. `P`-copies with counting probability `p`.
pub fn geometric_compound(
    p_handle: &TransformHandle,
    p: f64,
    convention: GeometricConvention,
) -> Result<TransformHandle, OperatorError> {
    check_open_unit("p", p)?;
    expect_pgf(p_handle)?;
    let q = 1.0 - p;
    let inner = p_handle.clone();
    Ok(match convention {
        GeometricConvention::Shifted => TransformHandle::new_pgf(move |s| {
            let v = inner.eval(s);
            p * v / (1.0 - q * v)
        })?,
        GeometricConvention::ZeroBased => {
            TransformHandle::new_pgf(move |s| p / (1.0 - q * inner.eval(s)))?
        }
    })
}

/// Series route of [`geometric_compound`]. The divisor `1 - q*P` has
/// constant term at least `1 - q > 0`, so the division is well posed.
pub fn geometric_compound_series(
    p_series: &TruncatedSeries,
    p: f64,
    convention: GeometricConvention,
) -> Result<TruncatedSeries, OperatorError> {
    check_open_unit("p", p)?;
    let q = 1.0 - p;
    let den = add(
        &TruncatedSeries::unit(p_series.order()),
        &p_series.scale(-q),
    );
    let inv = reciprocal_series(&den)?;
    Ok(match convention {
        GeometricConvention::Shifted => mul(&p_series.scale(p), &inv),
        GeometricConvention::ZeroBased => inv.scale(p),
    })
}

/// Poisson mixture with mixing-law LT `phi`: the same map as
/// [`pgf_from_lt`], exposed under the name the construction carries. The
/// resulting lattice law is `N ~ Poisson(W)` with `W` distributed per `phi`.
pub fn poisson_mixture(phi: &TransformHandle) -> Result<TransformHandle, OperatorError> {
    Ok(pgf_from_lt(phi)?)
}

/// Candidate self-decomposability component: `P_alpha = P / P(1-alpha+alpha*s)`
/// by series division. The caller decides class-L membership by checking
/// whether the quotient is a valid pmf.
pub fn selfdecomp_quotient(
    p_series: &TruncatedSeries,
    alpha: f64,
) -> Result<TruncatedSeries, OperatorError> {
    check_open_unit("alpha", alpha)?;
    let thinned = affine_substitute(p_series, alpha)?;
    let inv = reciprocal_series(&thinned)?;
    Ok(mul(p_series, &inv))
}

/// Writes `law` as a Bernoulli-thinned compound: returns `(inner, c)` with
/// `thin(inner, c) = law`. Closed per family; the cofactor split follows
/// `a * b = lambda` with `c = b^{1/alpha}`.
pub fn bernoulli_factorize(law: &LawSpec, b: f64) -> Result<(LawSpec, f64), OperatorError> {
    check_open_unit("b", b)?;
    match *law {
        LawSpec::AlphaPoisson { lambda, alpha } => Ok((
            LawSpec::alpha_poisson(lambda / b, alpha)?,
            b.powf(1.0 / alpha),
        )),
        LawSpec::Dml { lambda, alpha } => {
            Ok((LawSpec::dml(lambda / b, alpha)?, b.powf(1.0 / alpha)))
        }
        LawSpec::Poisson { lambda } => Ok((LawSpec::poisson(lambda / b)?, b)),
        LawSpec::Geometric0 { lambda } => Ok((LawSpec::geometric0(lambda / b)?, b)),
        LawSpec::AlphaBernoulli { b: lambda, alpha } => {
            if b <= lambda {
                Err(OperatorError::FactorizationInvalid(format!(
                    "need b > {lambda} so the cofactor {lambda}/b stays below 1, got b = {b}"
                )))
            } else {
                Ok((
                    LawSpec::alpha_bernoulli(b, alpha)?,
                    (lambda / b).powf(1.0 / alpha),
                ))
            }
        }
        ref other => Err(OperatorError::UnsupportedFamily {
            op: "bernoulli_factorize",
            family: other.family_name(),
        }),
    }
}

/// Executable form of "P1 and P2 have the same D-type at c":
/// max over the grid of `|P1(u) - P2(1-c+c*u)|`.
pub fn dtype_equal(
    p1: &TransformHandle,
    p2: &TransformHandle,
    c: f64,
    grid: &[f64],
) -> Result<CheckReport, OperatorError> {
    check_open_unit("c", c)?;
    expect_pgf(p1)?;
    expect_pgf(p2)?;
    let mut residual = 0.0f64;
    let mut worst = grid.first().copied().unwrap_or(0.0);
    for &u in grid {
        let diff = (p1.eval(u) - p2.eval(1.0 - c + c * u)).abs();
        if !diff.is_finite() {
            residual = f64::MAX;
            worst = u;
            break;
        }
        if diff > residual {
            residual = diff;
            worst = u;
        }
    }
    let details = vec![
        Detail::new("c", c),
        Detail::new("gap_at_0", (p1.eval(0.0) - p2.eval(1.0 - c)).abs()),
        Detail::new("gap_at_worst", residual),
    ];
    Ok(CheckReport::new(
        "dtype_equal",
        residual,
        Location::GridPoint(worst),
        HANDLE_TOL,
        details,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::default_grid;

    fn grid_gap(a: &TransformHandle, b: &TransformHandle) -> f64 {
        default_grid()
            .iter()
            .map(|&s| (a.eval(s) - b.eval(s)).abs())
            .fold(0.0, f64::max)
    }

    fn series_gap(a: &TruncatedSeries, b: &TruncatedSeries) -> f64 {
        (0..=a.order().max(b.order()))
            .map(|k| (a.coeff(k) - b.coeff(k)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn thinning_closed_forms() {
        let c = 0.3;
        let poisson = LawSpec::poisson(2.0).unwrap();
        let thinned = thin(&poisson.pgf_handle(), c).unwrap();
        let expected = LawSpec::poisson(2.0 * c).unwrap().pgf_handle();
        assert!(grid_gap(&thinned, &expected) < 1e-12);

        let (lambda, alpha) = (1.5, 0.6);
        let ap = LawSpec::alpha_poisson(lambda, alpha).unwrap();
        let thinned = thin(&ap.pgf_handle(), c).unwrap();
        let expected = LawSpec::alpha_poisson(lambda * c.powf(alpha), alpha)
            .unwrap()
            .pgf_handle();
        assert!(grid_gap(&thinned, &expected) < 1e-12);

        let thinned = thin(&LawSpec::DegenerateAtOne.pgf_handle(), c).unwrap();
        let expected = LawSpec::bernoulli(c).unwrap().pgf_handle();
        assert!(grid_gap(&thinned, &expected) < 1e-15);
    }

    #[test]
    fn thinning_series_route_matches_closed_form() {
        let c = 0.45;
        let pmf = LawSpec::poisson(2.0).unwrap().pmf_series(96).unwrap();
        let thinned = thin_series(&pmf, c).unwrap();
        let expected = LawSpec::poisson(0.9).unwrap().pmf_series(96).unwrap();
        assert!(series_gap(&thinned, &expected) < 1e-13);
    }

    #[test]
    fn thinning_semigroup() {
        let (c1, c2) = (0.7, 0.4);
        let p = LawSpec::dml(1.0, 0.5).unwrap();
        let twice = thin(&thin(&p.pgf_handle(), c1).unwrap(), c2).unwrap();
        let once = thin(&p.pgf_handle(), c1 * c2).unwrap();
        assert!(grid_gap(&twice, &once) < 1e-12);

        let series = p.pmf_series(64).unwrap();
        let twice = thin_series(&thin_series(&series, c1).unwrap(), c2).unwrap();
        let once = thin_series(&series, c1 * c2).unwrap();
        assert!(series_gap(&twice, &once) < 1e-12);
    }

    #[test]
    fn thin_rejects_bad_probability() {
        let p = LawSpec::poisson(1.0).unwrap().pgf_handle();
        assert!(thin(&p, 0.0).is_err());
        assert!(thin(&p, 1.0).is_err());
        assert!(thin(&crate::laws::lt_exponential(1.0).unwrap(), 0.5).is_err());
    }

    #[test]
    fn convolution_closed_forms() {
        let b = LawSpec::bernoulli(0.25).unwrap();
        let summed = convolve_n(&b.pgf_handle(), 5).unwrap();
        let binom = LawSpec::binomial(5, 0.25).unwrap().pgf_handle();
        assert!(grid_gap(&summed, &binom) < 1e-14);

        let ap = LawSpec::alpha_poisson(0.5, 0.7).unwrap();
        let summed = convolve_n(&ap.pgf_handle(), 3).unwrap();
        let expected = LawSpec::alpha_poisson(1.5, 0.7).unwrap().pgf_handle();
        assert!(grid_gap(&summed, &expected) < 1e-13);

        let pmf = b.pmf_series(8).unwrap();
        let series = convolve_n_series(&pmf, 5).unwrap();
        let expected = LawSpec::binomial(5, 0.25).unwrap().pmf_series(8).unwrap();
        assert!(series_gap(&series, &expected) < 1e-15);

        let one = convolve_n(&ap.pgf_handle(), 1).unwrap();
        assert!(grid_gap(&one, &ap.pgf_handle()) < 1e-15);
        assert!(convolve_n(&ap.pgf_handle(), 0).is_err());
    }

    #[test]
    fn geometric_compound_of_degenerate_is_geometric() {
        let p = 0.4;
        let compound = geometric_compound(
            &LawSpec::DegenerateAtOne.pgf_handle(),
            p,
            GeometricConvention::Shifted,
        )
        .unwrap();
        let expected = LawSpec::geometric_shifted(p).unwrap().pgf_handle();
        assert!(grid_gap(&compound, &expected) < 1e-15);

        let series = geometric_compound_series(
            &LawSpec::DegenerateAtOne.pmf_series(64).unwrap(),
            p,
            GeometricConvention::Shifted,
        )
        .unwrap();
        let expected = LawSpec::geometric_shifted(p).unwrap().pmf_series(64).unwrap();
        assert!(series_gap(&series, &expected) < 1e-15);
    }

    #[test]
    fn geometric_compound_two_route_agreement() {
        let base = LawSpec::bernoulli(0.3).unwrap();
        let p = 0.5;
        for convention in [GeometricConvention::Shifted, GeometricConvention::ZeroBased] {
            let handle = geometric_compound(&base.pgf_handle(), p, convention).unwrap();
            let series =
                geometric_compound_series(&base.pmf_series(256).unwrap(), p, convention)
                    .unwrap();
            for &s in &default_grid() {
                assert!(
                    (series.eval(s) - handle.eval(s)).abs() < 1e-14,
                    "{convention:?} at s={s}"
                );
            }
        }
    }

    #[test]
    fn geometric_compound_fixed_point_of_thinned_dml() {
        // geometric(p) sum of D-type copies returns the law when b^alpha = p
        let (lambda, alpha, p) = (1.0, 0.5, 0.25f64);
        let b = p.powf(1.0 / alpha);
        let dml = LawSpec::dml(lambda, alpha).unwrap();
        let thinned = thin(&dml.pgf_handle(), b).unwrap();
        let compound =
            geometric_compound(&thinned, p, GeometricConvention::Shifted).unwrap();
        assert!(grid_gap(&compound, &dml.pgf_handle()) < 1e-13);
    }

    #[test]
    fn geometric_compound_near_one_is_identity() {
        let p = 1.0 - 1e-6;
        let base = LawSpec::poisson(1.0).unwrap().pgf_handle();
        let compound = geometric_compound(&base, p, GeometricConvention::Shifted).unwrap();
        assert!(grid_gap(&compound, &base) < 1e-5);
    }

    #[test]
    fn poisson_mixture_closed_forms() {
        let geo = poisson_mixture(&crate::laws::lt_exponential(1.0).unwrap()).unwrap();
        let expected = LawSpec::geometric0(1.0).unwrap().pgf_handle();
        assert!(grid_gap(&geo, &expected) < 1e-14);

        let poi = poisson_mixture(&crate::laws::lt_point_mass(2.5).unwrap()).unwrap();
        let expected = LawSpec::poisson(2.5).unwrap().pgf_handle();
        assert!(grid_gap(&poi, &expected) < 1e-14);
    }

    #[test]
    fn poisson_mixture_matches_quadrature() {
        // integral of Poisson(w) pmf against the Exp(1) mixing density equals
        // the geometric pmf 2^{-(k+1)}
        let pmf = LawSpec::geometric0(1.0).unwrap().pmf_series(16).unwrap();
        let h = 0.001;
        let steps = 60_000usize;
        for k in 0..=10usize {
            let mut integral = 0.0;
            let log_kfac: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
            let f = |w: f64| {
                if w == 0.0 {
                    if k == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (k as f64 * w.ln() - w - log_kfac - w).exp()
                }
            };
            for i in 0..steps {
                let w0 = i as f64 * h;
                integral += 0.5 * h * (f(w0) + f(w0 + h));
            }
            assert!(
                (integral - pmf.coeff(k)).abs() < 1e-6,
                "k={k}: {integral} vs {}",
                pmf.coeff(k)
            );
        }
    }

    #[test]
    fn selfdecomp_quotient_closed_forms() {
        let (lambda, a) = (1.0, 0.6);
        let alpha = 0.35;
        let p = LawSpec::alpha_poisson(lambda, a).unwrap().pmf_series(128).unwrap();
        let quotient = selfdecomp_quotient(&p, alpha).unwrap();
        let closed = LawSpec::alpha_poisson(lambda * (1.0 - alpha.powf(a)), a).unwrap();
        let expected = closed.pmf_series(128).unwrap();
        // The heavy tail beyond the truncation order smears into high
        // coefficients of the composed series, so exact agreement holds for
        // the early coefficients and the identity is grid-checked overall.
        for k in 0..=16 {
            let gap = (quotient.coeff(k) - expected.coeff(k)).abs();
            assert!(gap < 1e-10, "stable quotient gap {gap:e} at k={k}");
        }
        for i in 0..=16 {
            let s = i as f64 * 0.05;
            let gap = (quotient.eval(s) - closed.pgf_eval(s).unwrap()).abs();
            assert!(gap < 1e-6, "stable quotient eval gap {gap:e} at s={s}");
        }

        let p = LawSpec::poisson(2.0).unwrap().pmf_series(128).unwrap();
        let quotient = selfdecomp_quotient(&p, alpha).unwrap();
        let expected = LawSpec::poisson(2.0 * (1.0 - alpha)).unwrap().pmf_series(128).unwrap();
        let gap = series_gap(&quotient, &expected);
        assert!(gap < 1e-13, "poisson quotient gap {gap:e}");
    }

    #[test]
    fn selfdecomp_rebuilds_the_law() {
        let alpha = 0.5;
        let p = LawSpec::dml(1.0, 0.6).unwrap().pmf_series(128).unwrap();
        let quotient = selfdecomp_quotient(&p, alpha).unwrap();
        let thinned = thin_series(&p, alpha).unwrap();
        assert!(series_gap(&mul(&thinned, &quotient), &p) < 1e-11);
    }

    #[test]
    fn degenerate_is_not_class_l() {
        let alpha = 0.5;
        let p = LawSpec::DegenerateAtOne.pmf_series(16).unwrap();
        let quotient = selfdecomp_quotient(&p, alpha).unwrap();
        let expected = -alpha / ((1.0 - alpha) * (1.0 - alpha));
        assert!((quotient.coeff(2) - expected).abs() < 1e-12);
        assert!(quotient.coeff(2) < 0.0);
    }

    #[test]
    fn factorization_examples() {
        let (inner, c) = bernoulli_factorize(&LawSpec::dml(0.5, 0.5).unwrap(), 0.25).unwrap();
        assert_eq!(inner, LawSpec::dml(2.0, 0.5).unwrap());
        assert!((c - 0.0625).abs() < 1e-15);

        let (inner, c) =
            bernoulli_factorize(&LawSpec::alpha_bernoulli(0.3, 1.0).unwrap(), 0.6).unwrap();
        assert_eq!(inner, LawSpec::alpha_bernoulli(0.6, 1.0).unwrap());
        assert!((c - 0.5).abs() < 1e-15);

        assert!(matches!(
            bernoulli_factorize(&LawSpec::alpha_bernoulli(0.3, 0.5).unwrap(), 0.2),
            Err(OperatorError::FactorizationInvalid(_))
        ));
        assert!(matches!(
            bernoulli_factorize(&LawSpec::bernoulli(0.5).unwrap(), 0.2),
            Err(OperatorError::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn factorization_round_trips() {
        let laws = [
            LawSpec::dml(0.5, 0.5).unwrap(),
            LawSpec::alpha_poisson(0.8, 0.4).unwrap(),
            LawSpec::poisson(1.2).unwrap(),
            LawSpec::geometric0(0.9).unwrap(),
            LawSpec::alpha_bernoulli(0.3, 1.0).unwrap(),
        ];
        for law in &laws {
            let b = 0.6;
            let (inner, c) = bernoulli_factorize(law, b).unwrap();
            let rebuilt = thin(&inner.pgf_handle(), c).unwrap();
            assert!(
                grid_gap(&rebuilt, &law.pgf_handle()) < 1e-12,
                "{law} via b={b}"
            );
        }
    }

    #[test]
    fn dtype_reports() {
        let (lambda, alpha, c) = (1.0, 0.5, 0.3f64);
        let p1 = LawSpec::alpha_poisson(lambda * c.powf(alpha), alpha)
            .unwrap()
            .pgf_handle();
        let p2 = LawSpec::alpha_poisson(lambda, alpha).unwrap().pgf_handle();
        let report = dtype_equal(&p1, &p2, c, &default_grid()).unwrap();
        assert!(report.passed());
        assert!(report.residual < 1e-12);

        let p1 = LawSpec::poisson(1.0).unwrap().pgf_handle();
        let p2 = LawSpec::geometric0(1.0).unwrap().pgf_handle();
        let report = dtype_equal(&p1, &p2, 0.5, &default_grid()).unwrap();
        assert!(!report.passed());
        assert!(report.residual > 0.01);
    }
}
