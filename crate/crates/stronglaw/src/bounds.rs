//! Right-hand sides of the time-uniform concentration inequalities and the
//! boundary curves their suprema are compared against.
//!
//! Conventions shared by every bound here:
//!
//! * `log_{1+eps}(y)` is computed as `ln y / ln(1+eps)`, and the notation
//!   `log^{-eps}_{1+eps}(y)` means `(log_{1+eps}(y))^{-eps}`.
//! * Bounds may exceed one. [`BoundValue::raw`] keeps the raw value (useful
//!   for threshold inversion and monotonicity checks); [`BoundValue::clamped`]
//!   is the probability-scale `min(1, raw)`.
//! * Degenerate iterated-logarithm arguments (`m <= 3` where `log(m/3) <= 0`)
//!   yield `raw = +inf`, i.e. a vacuously true bound, rather than a NaN.
//! * Everything is 64-bit floating point. `exp(-m^{1/q-1/2})` underflows to
//!   zero for large `m`; the addend is then below `1e-300`, which can never
//!   flip a comparison against `2^-j >= 2^-64`, so no log-space path is
//!   needed.

use crate::Error;

/// A bound evaluation: the raw value together with its labeled addends.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundValue {
    /// Sum of the components; may exceed 1 or be +inf.
    pub raw: f64,
    /// Labeled addends, summing to `raw`.
    pub components: Vec<(&'static str, f64)>,
}

impl BoundValue {
    fn new(components: Vec<(&'static str, f64)>) -> Self {
        let raw = components.iter().map(|(_, v)| v).sum();
        Self { raw, components }
    }

    /// The probability-scale value `min(1, max(0, raw))`.
    pub fn clamped(&self) -> f64 {
        clamp(self.raw)
    }
}

/// Clamps a raw bound value into [0, 1]; `+inf` clamps to 1.
pub fn clamp(raw: f64) -> f64 {
    raw.min(1.0).max(0.0)
}

/// Riemann zeta for `s > 1` with relative error below 1e-12.
///
/// Partial sum over the first 64 integers plus the integral tail remainder
/// `N^{1-s}/(s-1)`, refined with Euler–Maclaurin corrections; the first
/// omitted correction term bounds the error at well under 1e-12 uniformly
/// in `s > 1`.
pub fn zeta(s: f64) -> Result<f64, Error> {
    if !(s > 1.0) {
        return Err(Error::ZetaDomain { s });
    }
    const N: u64 = 64;
    // B_{2i} / (2i)! for 2i = 2, 4, ..., 12.
    const COEF: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let nf = N as f64;
    let mut sum = 0.0;
    for k in 1..=N {
        sum += (k as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0);
    sum -= 0.5 * nf.powf(-s);
    // Correction term for B_{2k} is B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}.
    let mut poly = s;
    let mut power = nf.powf(-s - 1.0);
    let n_inv_sq = 1.0 / (nf * nf);
    for (i, c) in COEF.iter().enumerate() {
        sum += c * poly * power;
        let j = 2.0 * i as f64;
        poly *= (s + j + 1.0) * (s + j + 2.0);
        power *= n_inv_sq;
    }
    Ok(sum)
}

/// `c_eps = ((1+eps)^{5/4} + (1+eps)^{3/4}) / sqrt(2)`.
pub fn c_eps(eps: f64) -> f64 {
    assert!(eps > 0.0, "c_eps requires eps > 0");
    let e1 = 1.0 + eps;
    (e1.powf(1.25) + e1.powf(0.75)) / std::f64::consts::SQRT_2
}

/// `ell_eps = log(2 zeta(1+eps) / log(1+eps))`.
pub fn ell_eps(eps: f64) -> f64 {
    assert!(eps > 0.0, "ell_eps requires eps > 0");
    let z = zeta(1.0 + eps).expect("1 + eps > 1");
    (2.0 * z / (1.0 + eps).ln()).ln()
}

/// Parameters of the L^1 strong-law inequality: start index `m >= 1`,
/// deviation level `eps > 0`, truncation exponent `lambda` strictly inside
/// `(0, 1/2)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct L1Params {
    pub m: u64,
    pub eps: f64,
    pub lambda: f64,
}

impl L1Params {
    pub fn new(m: u64, eps: f64, lambda: f64) -> Result<Self, Error> {
        if m < 1 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie strictly inside (0, 1/2), got {lambda}"
            )));
        }
        Ok(Self { m, eps, lambda })
    }
}

/// Parameters of the L^q strong-law inequality; `q` in `[1, 2)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LqParams {
    pub m: u64,
    pub eps: f64,
    pub q: f64,
}

impl LqParams {
    pub fn new(m: u64, eps: f64, q: f64) -> Result<Self, Error> {
        if m < 1 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(1.0..2.0).contains(&q) {
            return Err(Error::QOutOfRange { q });
        }
        Ok(Self { m, eps, q })
    }
}

/// Parameters of the iterated-logarithm inequalities: `m >= 2`, `eps > 0`,
/// `lambda` in `(0, 1/2)`, the variance-proxy root `sigma_bar`, and the true
/// standard deviation `sigma` used when evaluating the truncated second
/// moment. A valid pairing requires `Var <= sigma_bar^2`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LilParams {
    pub m: u64,
    pub eps: f64,
    pub lambda: f64,
    pub sigma_bar: f64,
    pub sigma: f64,
}

impl LilParams {
    pub fn new(m: u64, eps: f64, lambda: f64, sigma_bar: f64, sigma: f64) -> Result<Self, Error> {
        if m < 2 {
            return Err(Error::InvalidParameter("m must be >= 2".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie strictly inside (0, 1/2), got {lambda}"
            )));
        }
        if !(sigma_bar > 0.0) || !(sigma > 0.0) {
            return Err(Error::InvalidParameter(
                "sigma_bar and sigma must be positive".into(),
            ));
        }
        Ok(Self {
            m,
            eps,
            lambda,
            sigma_bar,
            sigma,
        })
    }
}

/// L^1 strong-law bound on `P[sup_{k>=m} |S_k|/k >= eps]`:
/// `262/(eps^2 ∧ 1) * (m^{2 lambda - 1} + U(m^lambda))` where `U` is the
/// truncated first absolute moment.
pub fn l1_bound(p: &L1Params, u: impl Fn(f64) -> f64) -> BoundValue {
    let m = p.m as f64;
    let scale = 262.0 / (p.eps * p.eps).min(1.0);
    let poly = scale * m.powf(2.0 * p.lambda - 1.0);
    let moment = scale * u(m.powf(p.lambda));
    BoundValue::new(vec![("polynomial", poly), ("truncated-moment", moment)])
}

/// Line-crossing bound on `P[sup_k |S_k|/(k+gamma) >= eps + U(x)]`:
/// `8 x^2/(gamma eps^2) + (16/eps^2 + 2) U(x)`.
pub fn line_crossing_bound(eps: f64, gamma: f64, x: f64, u: impl Fn(f64) -> f64) -> BoundValue {
    assert!(gamma > 0.0, "line_crossing_bound requires gamma > 0");
    assert!(eps > 0.0, "line_crossing_bound requires eps > 0");
    let poly = 8.0 * x * x / (gamma * eps * eps);
    let moment = (16.0 / (eps * eps) + 2.0) * u(x);
    BoundValue::new(vec![("line-crossing", poly), ("truncated-moment", moment)])
}

/// L^q strong-law bound on `P[sup_{k>=m} |S_k|/k^{1/q} >= eps]`:
/// `2 exp(-m^{1/q - 1/2})/(2-q) + 451/(eps^2 ∧ 1) * Uq(eps^q m^{1/2 - q/4}/38)`.
pub fn lq_bound(p: &LqParams, uq: impl Fn(f64) -> f64) -> BoundValue {
    let m = p.m as f64;
    let exponential = 2.0 * (-m.powf(1.0 / p.q - 0.5)).exp() / (2.0 - p.q);
    let level = p.eps.powf(p.q) * m.powf(0.5 - 0.25 * p.q) / 38.0;
    let moment = 451.0 / (p.eps * p.eps).min(1.0) * uq(level);
    BoundValue::new(vec![("exponential", exponential), ("truncated-moment", moment)])
}

fn log_base(y: f64, eps: f64) -> f64 {
    y.ln() / (1.0 + eps).ln()
}

/// Stitched addend `(log_{1+eps}(y))^{-eps} / (eps zeta(1+eps))`, or +inf
/// when the log argument is not positive.
fn stitched_addend(y: f64, eps: f64) -> f64 {
    let la = log_base(y, eps);
    if la <= 0.0 {
        f64::INFINITY
    } else {
        la.powf(-eps) / (eps * zeta(1.0 + eps).expect("1 + eps > 1"))
    }
}

/// L^2 iterated-logarithm bound: probability that `|S_k / sigma_bar|` ever
/// exceeds [`lil_boundary`] from `m` on is at most
/// `log^{-eps}_{1+eps}(m/3)/(eps zeta(1+eps))
///  + 262/((eps^2 sigma_bar^4) ∧ 1) (m^{2 lambda - 1} + Ubar2(m^lambda))`.
///
/// `ubar2` is the truncated centered second moment `x -> E[|X^2 - var| 1{.. >= x}]`.
/// For `m <= 3` the stitched addend is +inf and the bound clamps to one.
pub fn lil_bound(p: &LilParams, ubar2: impl Fn(f64) -> f64) -> BoundValue {
    let m = p.m as f64;
    let stitched = stitched_addend(m / 3.0, p.eps);
    let sb2 = p.sigma_bar * p.sigma_bar;
    let scale = 262.0 / (p.eps * p.eps * sb2 * sb2).min(1.0);
    let poly = scale * m.powf(2.0 * p.lambda - 1.0);
    let moment = scale * ubar2(m.powf(p.lambda));
    BoundValue::new(vec![
        ("stitched", stitched),
        ("polynomial", poly),
        ("truncated-moment", moment),
    ])
}

/// Studentized iterated-logarithm bound, with the sample standard deviation
/// in the statistic and constant 786 = 3 * 262:
/// `log^{-eps}_{1+eps}(2m/3)/(eps zeta(1+eps))
///  + 786/(eps^2 ∧ 1) (m^{2 lambda - 1} + Uhat2(m^lambda))`.
///
/// `uhat2` is the truncated normalized second moment of `X^2/var`.
pub fn studentized_lil_bound(p: &LilParams, uhat2: impl Fn(f64) -> f64) -> BoundValue {
    let m = p.m as f64;
    let stitched = stitched_addend(2.0 * m / 3.0, p.eps);
    let scale = 786.0 / (p.eps * p.eps).min(1.0);
    let poly = scale * m.powf(2.0 * p.lambda - 1.0);
    let moment = scale * uhat2(m.powf(p.lambda));
    BoundValue::new(vec![
        ("stitched", stitched),
        ("polynomial", poly),
        ("truncated-moment", moment),
    ])
}

/// The iterated-logarithm threshold `sigma_bar * c_eps *
/// sqrt(k (loglog((1+eps)^2 k) + ell_eps))` that `|S_k|` is compared against.
pub fn lil_boundary(k: u64, eps: f64, sigma_bar: f64) -> Result<f64, Error> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "lil_boundary requires k >= 2, got {k}"
        )));
    }
    if !(eps > 0.0) || !(sigma_bar > 0.0) {
        return Err(Error::InvalidParameter(
            "lil_boundary requires eps > 0 and sigma_bar > 0".into(),
        ));
    }
    let kf = k as f64;
    let inner = ((1.0 + eps) * (1.0 + eps) * kf).ln().ln() + ell_eps(eps);
    let radicand = kf * inner;
    if radicand < 0.0 {
        return Err(Error::BoundaryUndefined { k });
    }
    Ok(sigma_bar * c_eps(eps) * radicand.sqrt())
}

/// Studentized variant: `sigma_hat * c_eps *
/// sqrt((1+2 eps) k (loglog((1+eps)^2 k) + ell_eps))`.
pub fn studentized_lil_boundary(k: u64, eps: f64, sigma_hat: f64) -> Result<f64, Error> {
    if !(sigma_hat >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_hat must be nonnegative, got {sigma_hat}"
        )));
    }
    // Scale-free part shares the fixed-scale radicand check.
    let base = lil_boundary(k, eps, 1.0)?;
    Ok(sigma_hat * (1.0 + 2.0 * eps).sqrt() * base)
}

/// Darling–Robbins boundary `sigma_bar *
/// sqrt(k (2 (1+eps)^2 loglog k + 2 (1+eps) log 2))` for sub-Gaussian sums.
pub fn darling_robbins_boundary(k: u64, eps: f64, sigma_bar: f64) -> Result<f64, Error> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "darling_robbins_boundary requires k >= 3, got {k}"
        )));
    }
    if !(eps > 0.0) || !(sigma_bar > 0.0) {
        return Err(Error::InvalidParameter(
            "darling_robbins_boundary requires eps > 0 and sigma_bar > 0".into(),
        ));
    }
    let kf = k as f64;
    let e1 = 1.0 + eps;
    let radicand = kf * (2.0 * e1 * e1 * kf.ln().ln() + 2.0 * e1 * std::f64::consts::LN_2);
    if radicand < 0.0 {
        return Err(Error::BoundaryUndefined { k });
    }
    Ok(sigma_bar * radicand.sqrt())
}

/// Darling–Robbins crossing bound `log^{-eps}_{1+eps}(m) / eps` for `m >= 2`.
pub fn darling_robbins_bound(m: u64, eps: f64) -> Result<BoundValue, Error> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "darling_robbins_bound requires m >= 2, got {m}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let la = log_base(m as f64, eps);
    let value = if la <= 0.0 {
        f64::INFINITY
    } else {
        la.powf(-eps) / eps
    };
    Ok(BoundValue::new(vec![("stitched", value)]))
}

/// Upper bound on the series `sum_m P_m/m` of strong-law crossing
/// probabilities: `1 + c_q/(e log(2^{1/q - 1/2}))
/// + 2603 log_moment / ((2-q)(eps^2 ∧ 1))` with `c_q = 2/(2-q)`.
///
/// `log_moment` is `E[|X|^q log(38 |X|^q / eps^q + 1)]` as supplied by the
/// `LogMoment` truncated-moment kind.
pub fn baum_katz_series_bound(q: f64, eps: f64, log_moment: f64) -> Result<BoundValue, Error> {
    if !(1.0..2.0).contains(&q) {
        return Err(Error::QOutOfRange { q });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if !(log_moment >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log_moment must be nonnegative, got {log_moment}"
        )));
    }
    let c_q = 2.0 / (2.0 - q);
    let exp_series = c_q / (std::f64::consts::E * (1.0 / q - 0.5) * std::f64::consts::LN_2);
    let moment = 2603.0 * log_moment / ((2.0 - q) * (eps * eps).min(1.0));
    Ok(BoundValue::new(vec![
        ("constant-one", 1.0),
        ("exponential-series", exp_series),
        ("log-moment", moment),
    ]))
}

/// Evaluates one slowly-decaying series `sum_{m=2}^inf f(m)` by a partial sum
/// plus the midpoint integral tail; returns (value, midpoint-rule error bound).
fn series_with_tail(
    cut: u64,
    f: impl Fn(f64) -> f64,
    tail_integral: impl Fn(f64) -> f64,
    derivative_bound: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let mut partial = 0.0;
    for m in 2..=cut {
        partial += f(m as f64);
    }
    let start = cut as f64 + 0.5;
    (partial + tail_integral(start), derivative_bound(start) / 24.0)
}

/// Numerical value of the three series bounding `sum_m P_m/(m log m)` for
/// the iterated-logarithm crossing probabilities, to total absolute error
/// at most `tol`:
///
/// ```text
///   sum_{m>=2} log^eps(1+eps) zeta(1+eps) / (eps m log^{1+eps}(2m/3))
/// + 262/eps^2 [ sum_{m>=2} m^{-4/3}/log m
///             + 3^delta (1 + E[X^2 log^delta(X^2+1)]) sum_{m>=2} 1/(m log^{1+delta} m) ]
/// ```
///
/// Each series is truncated and completed with its integral tail evaluated
/// from the midpoint `M + 1/2`, whose error is controlled by the first
/// derivative of the summand.
pub fn baum_katz_lil_series_bound(
    eps: f64,
    delta: f64,
    log_delta_moment: f64,
    tol: f64,
) -> Result<BoundValue, Error> {
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(
            "eps and delta must be positive".into(),
        ));
    }
    if !(log_delta_moment >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log_delta_moment must be nonnegative, got {log_delta_moment}"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must lie in (0, 1), got {tol}"
        )));
    }

    let a_coeff = (1.0 + eps).ln().powf(eps) * zeta(1.0 + eps)? / eps;
    let poly_coeff = 262.0 / (eps * eps);
    let moment_coeff = poly_coeff * 3f64.powf(delta) * (1.0 + log_delta_moment);

    let mut cut: u64 = 1 << 21;
    loop {
        let (s1, e1) = series_with_tail(
            cut,
            |m| a_coeff / (m * (2.0 * m / 3.0).ln().powf(1.0 + eps)),
            |u| a_coeff * (2.0 * u / 3.0).ln().powf(-eps) / eps,
            |u| a_coeff * (2.0 + eps) / (u * u),
        );
        let (s2_raw, e2_raw) = series_with_tail(
            cut,
            |m| m.powf(-4.0 / 3.0) / m.ln(),
            |u| {
                // substitute v = x^{-1/3}: integral becomes int_0^{u^{-1/3}} dv / (3 ln(1/v)) * 3
                let v0 = u.powf(-1.0 / 3.0);
                crate::quad::adaptive(
                    |v| if v > 0.0 { -1.0 / v.ln() } else { 0.0 },
                    0.0,
                    v0,
                    1e-13,
                )
                .unwrap_or(3.0 * u.powf(-1.0 / 3.0) / u.ln())
            },
            |u| 2.0 * u.powf(-7.0 / 3.0),
        );
        let (s3_raw, e3_raw) = series_with_tail(
            cut,
            |m| 1.0 / (m * m.ln().powf(1.0 + delta)),
            |u| u.ln().powf(-delta) / delta,
            |u| (2.0 + delta) / (u * u),
        );
        let s2 = poly_coeff * s2_raw;
        let s3 = moment_coeff * s3_raw;
        let err = e1 + poly_coeff * e2_raw + moment_coeff * e3_raw + 3e-13;
        if err <= 0.5 * tol || cut >= (1 << 26) {
            if err > tol {
                return Err(Error::InvalidParameter(format!(
                    "tol {tol} unreachable: residual error bound {err:.3e}"
                )));
            }
            return Ok(BoundValue::new(vec![
                ("stitched-series", s1),
                ("polynomial-series", s2),
                ("moment-series", s3),
            ]));
        }
        cut *= 4;
    }
}
