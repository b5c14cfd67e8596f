//! Truncated formal power series over `f64` coefficients.
//!
//! A series is the coefficient vector `c_0..c_N` of a polynomial in `s`.
//! All transcendental operations (exp, reciprocal, the cosine-of-log
//! composition) use O(N^2) derivative recurrences rather than FFT: orders
//! stay in the hundreds and the recurrences are bit-reproducible.
//!
//! When a series represents a pmf, coefficients are probabilities and
//! `1 - sum(c_k)` is the untracked tail mass. Tail mass is reported, never
//! hidden: downstream checks fold it into their tolerances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default truncation order for pmf extraction.
pub const DEFAULT_ORDER: usize = 256;

/// Coefficients in `[-PMF_TOL, 0]` are treated as rounding noise and clamped
/// to zero; anything below is a genuine nonnegativity violation.
pub const PMF_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("constant term is zero, reciprocal is undefined")]
    SingularConstantTerm,
    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),
}

/// Coefficients `c_0..c_N` of a power series in `s`, truncated at order `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Builds a series from coefficients `c_0..c_N`; rejects empty input and
    /// non-finite entries.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Domain {
                name: "coeffs.len",
                value: 0.0,
                range: "[1, ..)",
            });
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(SeriesError::NonFinite(k));
        }
        Ok(Self { coeffs })
    }

    // Arithmetic results are built without the finiteness scan; operations
    // that can overflow (exp, reciprocal) re-check their own output.
    fn raw(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::raw(vec![0.0; order + 1])
    }

    /// The multiplicative unit `1 + 0*s + ...`.
    pub fn unit(order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = 1.0;
        Self::raw(c)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `s^k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Horner evaluation at `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// Sum of tracked coefficients.
    pub fn tracked_mass(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// `1 - sum(c_k)`: the mass beyond the truncation order when the series
    /// is a pmf.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.tracked_mass()
    }

    /// Smallest coefficient and its index.
    pub fn min_coeff(&self) -> (usize, f64) {
        let mut at = 0;
        let mut min = self.coeffs[0];
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            if c < min || c.is_nan() {
                at = k;
                min = c;
            }
        }
        (at, min)
    }

    pub fn scale(&self, x: f64) -> Self {
        Self::raw(self.coeffs.iter().map(|c| c * x).collect())
    }

    /// Copy truncated or zero-padded to the given order.
    pub fn resized(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, 0.0);
        Self::raw(c)
    }
}

/// Coefficients of `(1 - s)^alpha` by the product recurrence
/// `c_k = c_{k-1} * (k - 1 - alpha) / k`. For `0 < alpha < 1` every
/// coefficient past the constant term is negative.
pub fn binomial_series(alpha: f64, order: usize) -> Result<TruncatedSeries, SeriesError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SeriesError::Domain {
            name: "alpha",
            value: alpha,
            range: "(0, 1]",
        });
    }
    let mut c = vec![0.0; order + 1];
    c[0] = 1.0;
    for k in 1..=order {
        c[k] = c[k - 1] * ((k - 1) as f64 - alpha) / k as f64;
    }
    Ok(TruncatedSeries::raw(c))
}

/// Coefficient-wise sum; the shorter operand is zero-padded.
pub fn add(a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
    let n = a.order().max(b.order());
    let mut c = vec![0.0; n + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = a.coeff(k) + b.coeff(k);
    }
    TruncatedSeries::raw(c)
}

/// Cauchy product truncated at the larger operand order.
pub fn mul(a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
    let n = a.order().max(b.order());
    let mut c = vec![0.0; n + 1];
    for (i, &ai) in a.coeffs().iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (bj, ck) in b.coeffs().iter().zip(c[i..].iter_mut()) {
            *ck += ai * bj;
        }
    }
    TruncatedSeries::raw(c)
}

/// `exp(u(s))` by the derivative recurrence `g' = u' * g`:
/// `k * g_k = sum_{j=1..k} j * u_j * g_{k-j}`, `g_0 = e^{u_0}`.
pub fn exp_series(u: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    let n = u.order();
    let mut g = vec![0.0; n + 1];
    g[0] = u.coeff(0).exp();
    if !g[0].is_finite() {
        return Err(SeriesError::NonFinite(0));
    }
    for k in 1..=n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * u.coeff(j) * g[k - j];
        }
        g[k] = acc / k as f64;
    }
    Ok(TruncatedSeries::raw(g))
}

/// `1 / u(s)` by the division recurrence
/// `g_k = -(1/u_0) * sum_{j=1..k} u_j * g_{k-j}`, `g_0 = 1/u_0`.
///
/// The output is scanned for overflow: the reciprocal of a series whose
/// underlying function has a zero inside the unit disc genuinely has
/// exponentially growing coefficients, and that surfaces here.
pub fn reciprocal_series(u: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    if u.coeff(0) == 0.0 {
        return Err(SeriesError::SingularConstantTerm);
    }
    let n = u.order();
    let inv = 1.0 / u.coeff(0);
    let mut g = vec![0.0; n + 1];
    g[0] = inv;
    for k in 1..=n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += u.coeff(j) * g[k - j];
        }
        g[k] = -inv * acc;
        if !g[k].is_finite() {
            return Err(SeriesError::NonFinite(k));
        }
    }
    Ok(TruncatedSeries::raw(g))
}

/// `a(s)^n` for integer `n >= 1` by repeated squaring at fixed order.
pub fn pow_int(a: &TruncatedSeries, n: u32) -> TruncatedSeries {
    assert!(n >= 1, "pow_int requires n >= 1");
    let mut result = TruncatedSeries::unit(a.order());
    let mut sq = a.clone();
    let mut e = n;
    loop {
        if e & 1 == 1 {
            result = mul(&result, &sq);
        }
        e >>= 1;
        if e == 0 {
            return result;
        }
        sq = mul(&sq, &sq);
    }
}

/// Series of `psi(1 - s) = (1-s)^alpha * (1 - amp * cos(k * log(1-s)))`.
///
/// With `v(s) = log(1-s) = -sum s^m / m`, the cosine and sine of `k*v` obey
/// the coupled recurrences `c' = -k v' s_`, `s_' = k v' c`; the result is the
/// product with `binomial_series(alpha)`.
pub fn log_cos_compose(
    alpha: f64,
    amp: f64,
    k: f64,
    order: usize,
) -> Result<TruncatedSeries, SeriesError> {
    if !(0.0..1.0).contains(&amp) {
        return Err(SeriesError::Domain {
            name: "amp",
            value: amp,
            range: "[0, 1)",
        });
    }
    let binom = binomial_series(alpha, order)?;
    if amp == 0.0 {
        return Ok(binom);
    }
    // j * v_j = -1 for every j >= 1, so the convolutions simplify to sums.
    let mut cos = vec![0.0; order + 1];
    let mut sin = vec![0.0; order + 1];
    cos[0] = 1.0;
    for m in 1..=order {
        let mut sc = 0.0;
        let mut ss = 0.0;
        for j in 1..=m {
            sc += sin[m - j];
            ss += cos[m - j];
        }
        cos[m] = k * sc / m as f64;
        sin[m] = -k * ss / m as f64;
    }
    // 1 - amp * cos(k * log(1-s))
    let mut w: Vec<f64> = cos.iter().map(|c| -amp * c).collect();
    w[0] += 1.0;
    Ok(mul(&binom, &TruncatedSeries::raw(w)))
}

/// Series of `s -> a(1 - c + c*s)`, the PGF substitution behind binomial
/// thinning.
///
/// Implemented as Horner composition with the degree-one polynomial
/// `(1-c) + c*s`: all intermediate products are nonnegative when the input
/// is, and a degree-N input composes to a degree-N output with no truncation
/// loss. The tracked mass is preserved (`sum q_j = sum p_k`), so the caller's
/// tail bound carries over unchanged.
pub fn affine_substitute(a: &TruncatedSeries, c: f64) -> Result<TruncatedSeries, SeriesError> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(SeriesError::Domain {
            name: "c",
            value: c,
            range: "(0, 1]",
        });
    }
    let n = a.order();
    let d = 1.0 - c;
    let mut r = vec![0.0; n + 1];
    r[0] = a.coeff(n);
    for k in (0..n).rev() {
        // r <- r * (d + c*s) + p_k
        for j in (1..=n - k).rev() {
            r[j] = r[j] * d + r[j - 1] * c;
        }
        r[0] = r[0] * d + a.coeff(k);
    }
    Ok(TruncatedSeries::raw(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            assert!(
                (x - y).abs() <= tol,
                "coeff {k}: {x} vs {y} (diff {})",
                (x - y).abs()
            );
        }
    }

    #[test]
    fn binomial_alpha_one_is_linear() {
        let b = binomial_series(1.0, 3).unwrap();
        assert_eq!(b.coeffs(), &[1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn binomial_half() {
        let b = binomial_series(0.5, 3).unwrap();
        assert_close(b.coeffs(), &[1.0, -0.5, -0.125, -0.0625], 1e-15);
    }

    #[test]
    fn binomial_rejects_bad_alpha() {
        assert!(binomial_series(0.0, 4).is_err());
        assert!(binomial_series(1.5, 4).is_err());
    }

    #[test]
    fn binomial_square_telescopes() {
        // (1-s)^{1/2} * (1-s)^{1/2} = 1 - s
        let h = binomial_series(0.5, 8).unwrap();
        let sq = mul(&h, &h);
        let lin = binomial_series(1.0, 8).unwrap();
        assert_close(sq.coeffs(), lin.coeffs(), 1e-14);
    }

    #[test]
    fn add_and_mul_basics() {
        let a = TruncatedSeries::new(vec![1.0, 2.0]).unwrap();
        let b = TruncatedSeries::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(add(&a, &b).coeffs(), &[1.0, 3.0]);
        let one_plus = TruncatedSeries::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(mul(&one_plus, &one_plus).coeffs(), &[1.0, 2.0, 1.0]);
        let u = TruncatedSeries::unit(1);
        assert_eq!(mul(&a, &u).coeffs(), a.coeffs());
    }

    #[test]
    fn exp_of_s_gives_factorials() {
        let mut s = TruncatedSeries::zero(4);
        s = add(&s, &TruncatedSeries::new(vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap());
        let g = exp_series(&s).unwrap();
        assert_close(
            g.coeffs(),
            &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0],
            1e-15,
        );
        let z = exp_series(&TruncatedSeries::zero(4)).unwrap();
        assert_eq!(z.coeffs(), TruncatedSeries::unit(4).coeffs());
    }

    #[test]
    fn exp_recovers_poisson_pmf() {
        let lambda = 1.3;
        let u = binomial_series(1.0, 32).unwrap().scale(-lambda);
        let g = exp_series(&u).unwrap();
        let mut expected = Vec::with_capacity(33);
        let mut term = (-lambda).exp();
        for k in 0..=32usize {
            if k > 0 {
                term *= lambda / k as f64;
            }
            expected.push(term);
        }
        assert_close(g.coeffs(), &expected, 1e-14);
    }

    #[test]
    fn reciprocal_gives_geometric_series() {
        let q = 0.4;
        let u = TruncatedSeries::new(vec![1.0, -q, 0.0, 0.0, 0.0]).unwrap();
        let g = reciprocal_series(&u).unwrap();
        assert_close(g.coeffs(), &[1.0, q, q * q, q * q * q, q * q * q * q], 1e-15);
        assert!(matches!(
            reciprocal_series(&TruncatedSeries::zero(2)),
            Err(SeriesError::SingularConstantTerm)
        ));
    }

    #[test]
    fn reciprocal_is_inverse_under_mul() {
        let u = add(
            &TruncatedSeries::unit(64),
            &binomial_series(0.6, 64).unwrap().scale(0.7),
        );
        let g = reciprocal_series(&u).unwrap();
        let prod = mul(&u, &g);
        let unit = TruncatedSeries::unit(64);
        assert_close(prod.coeffs(), unit.coeffs(), 1e-13);
    }

    #[test]
    fn pow_int_matches_exp_log_route() {
        // log by the derivative recurrence, local to this test
        fn log_series(u: &TruncatedSeries) -> TruncatedSeries {
            let n = u.order();
            let mut g = vec![0.0; n + 1];
            g[0] = u.coeff(0).ln();
            for k in 1..=n {
                let mut acc = k as f64 * u.coeff(k);
                for (j, &gj) in g.iter().enumerate().take(k).skip(1) {
                    acc -= j as f64 * gj * u.coeff(k - j);
                }
                g[k] = acc / (k as f64 * u.coeff(0));
            }
            TruncatedSeries::new(g).unwrap()
        }
        // alpha-Bernoulli PGF series 1 - b(1-s)^alpha
        let p = add(
            &TruncatedSeries::unit(48),
            &binomial_series(0.7, 48).unwrap().scale(-0.4),
        );
        let direct = pow_int(&p, 6);
        let via_exp = exp_series(&log_series(&p).scale(6.0)).unwrap();
        assert_close(direct.coeffs(), via_exp.coeffs(), 1e-12);

        assert_eq!(pow_int(&p, 1).coeffs(), p.coeffs());
        let lin = TruncatedSeries::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(pow_int(&lin, 2).coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn log_cos_compose_amp_zero_is_binomial() {
        let a = log_cos_compose(0.7, 0.0, 3.0, 16).unwrap();
        let b = binomial_series(0.7, 16).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
    }

    #[test]
    fn log_cos_compose_constant_term() {
        let s = log_cos_compose(0.5, 0.3, 4.0, 8).unwrap();
        assert!((s.coeff(0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn log_cos_compose_matches_scalar_psi() {
        // psi(u) = u^alpha (1 - A cos(k log u)) evaluated at u = 1 - s
        let (alpha, amp) = (0.5, 0.3);
        let k = -2.0 * std::f64::consts::PI / 0.25_f64.ln();
        let series = log_cos_compose(alpha, amp, k, DEFAULT_ORDER).unwrap();
        for i in 0..=18 {
            let s = i as f64 * 0.05;
            let u: f64 = 1.0 - s;
            let direct = u.powf(alpha) * (1.0 - amp * (k * u.ln()).cos());
            assert!(
                (series.eval(s) - direct).abs() < 1e-10,
                "s = {s}: {} vs {direct}",
                series.eval(s)
            );
        }
    }

    #[test]
    fn affine_identity_at_c_one() {
        let p = TruncatedSeries::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(affine_substitute(&p, 1.0).unwrap().coeffs(), p.coeffs());
    }

    #[test]
    fn affine_thins_point_mass_to_bernoulli() {
        let degenerate = TruncatedSeries::new(vec![0.0, 1.0]).unwrap();
        let thinned = affine_substitute(&degenerate, 0.3).unwrap();
        assert_close(thinned.coeffs(), &[0.7, 0.3], 1e-15);
    }

    #[test]
    fn affine_thins_poisson_to_poisson() {
        let lambda = 1.0;
        let c = 0.5;
        let pois = |l: f64| {
            exp_series(&binomial_series(1.0, 64).unwrap().scale(-l)).unwrap()
        };
        let thinned = affine_substitute(&pois(lambda), c).unwrap();
        assert_close(thinned.coeffs(), pois(c * lambda).coeffs(), 1e-12);
    }

    #[test]
    fn affine_preserves_tracked_mass() {
        let p = exp_series(&binomial_series(0.6, 128).unwrap().scale(-1.0)).unwrap();
        let q = affine_substitute(&p, 0.37).unwrap();
        assert!((p.tracked_mass() - q.tracked_mass()).abs() < 1e-12);
    }

    #[test]
    fn eval_horner() {
        assert_eq!(TruncatedSeries::unit(5).eval(7.0), 1.0);
        let a = TruncatedSeries::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!((a.eval(0.5) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn eval_poisson_normalizes() {
        let p = exp_series(&binomial_series(1.0, 64).unwrap().scale(-1.0)).unwrap();
        assert!((p.eval(1.0) - 1.0).abs() < 1e-12);
        assert!(p.tail_mass().abs() < 1e-12);
    }

    #[test]
    fn new_rejects_non_finite() {
        assert!(matches!(
            TruncatedSeries::new(vec![1.0, f64::NAN]),
            Err(SeriesError::NonFinite(1))
        ));
        assert!(TruncatedSeries::new(vec![]).is_err());
    }
}
