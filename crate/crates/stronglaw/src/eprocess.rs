//! E-processes built by inverting tail bounds into threshold schedules.
//!
//! The construction: for each level `j = 1, 2, ..., J` find the smallest
//! start index `m_j` at which a tail bound evaluated at deviation level
//! `eps = 1/j` drops to `2^-j`. The e-process is then the count of levels
//! whose crossing event has fired:
//!
//! ```text
//!     E_n = sum_j 1{ max_{m_j <= k <= n} statistic_j(k) crossed  and  n >= m_j }
//! ```
//!
//! Summing the per-level crossing probabilities shows `E[E_tau] <= sum_j 2^-j
//! <= 1` at every stopping time, so `E_n` is an e-process; on a path where
//! the law fails it latches every level eventually.
//!
//! Truncating at finite `J` drops nonnegative indicators, and saturating a
//! threshold at the search cap turns its indicator identically zero — both
//! only shrink the process, so validity is preserved exactly. Deep levels of
//! the iterated-logarithm schedules saturate quickly (their bound decays
//! like a fractional power of `log m`); that is expected and valid.

use std::sync::Arc;

use crate::bounds::{self, LqParams};
use crate::dist::{DistributionSpec, TruncatedMomentKind};
use crate::Error;

/// Default number of levels. The tail mass `2^-j` beyond 20 is below 1e-6.
pub const DEFAULT_LEVELS: u32 = 20;

/// Default threshold search cap.
pub const DEFAULT_SEARCH_CAP: u64 = 1 << 62;

/// A tail bound `(m, eps) -> value`, declared nonincreasing in `m` for each
/// fixed `eps`. The declaration is spot-checked at schedule construction and
/// monitored during threshold searches.
pub trait TailBound {
    fn eval(&self, m: u64, eps: f64) -> f64;
    /// Smallest admissible `m` (1 unless the bound needs `m >= 2`).
    fn domain_min(&self) -> u64 {
        1
    }
}

/// An adapted event family `A_k^(eps)`, monotone in `eps`: membership at
/// level `eps2` implies membership at every `eps1 <= eps2`. Membership at
/// step `k` may depend only on the first `k` observations.
pub trait EventLattice: Send + Sync {
    fn member(&self, prefix: &[f64], eps: f64) -> bool;
}

impl<F: Fn(&[f64], f64) -> bool + Send + Sync> EventLattice for F {
    fn member(&self, prefix: &[f64], eps: f64) -> bool {
        self(prefix, eps)
    }
}

/// A threshold: the minimal admissible start index, or saturated at the
/// search cap (its indicator never fires).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Finite(u64),
    Saturated,
}

impl Threshold {
    pub fn finite(&self) -> Option<u64> {
        match *self {
            Threshold::Finite(m) => Some(m),
            Threshold::Saturated => None,
        }
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Finite(m) => write!(f, "{m}"),
            Threshold::Saturated => write!(f, "saturated"),
        }
    }
}

/// Minimal `m <= search_cap` with `bound(m, 1/j) <= 2^-j`, or
/// [`Threshold::Saturated`] when no such `m` exists below the cap.
///
/// Exponential doubling followed by binary search, both valid because the
/// bound is nonincreasing in `m`; observing an increase along the way
/// signals [`Error::CertificateViolated`].
pub fn compute_mj(bound: &dyn TailBound, j: u32, search_cap: u64) -> Result<Threshold, Error> {
    if j < 1 {
        return Err(Error::InvalidParameter("j must be >= 1".into()));
    }
    if search_cap < 2 {
        return Err(Error::InvalidParameter("search_cap must be >= 2".into()));
    }
    let eps = 1.0 / j as f64;
    let target = 0.5f64.powi(j as i32);
    let lo_domain = bound.domain_min();
    if lo_domain > search_cap {
        return Ok(Threshold::Saturated);
    }

    let check = |m: u64| bound.eval(m, eps);
    let mut prev = lo_domain;
    let mut prev_val = check(prev);
    if prev_val <= target {
        return Ok(Threshold::Finite(prev));
    }
    loop {
        let cur = prev.saturating_mul(2).min(search_cap);
        if cur == prev {
            return Ok(Threshold::Saturated);
        }
        let cur_val = check(cur);
        if cur_val > prev_val * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::CertificateViolated { m: cur });
        }
        if cur_val <= target {
            // Invariant: check(hi) <= target < check(lo).
            let (mut lo, mut hi) = (prev, cur);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if check(mid) <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Threshold::Finite(hi));
        }
        prev = cur;
        prev_val = cur_val;
    }
}

fn spot_check_monotone(bound: &dyn TailBound, levels: u32) -> Result<(), Error> {
    let lo = bound.domain_min();
    let probes: [u64; 5] = [16, 256, 4096, 1 << 20, 1 << 40];
    for j in [1, levels.max(2) / 2, levels.max(1)] {
        let eps = 1.0 / j.max(1) as f64;
        let mut prev = bound.eval(lo, eps);
        for &m in probes.iter().filter(|&&m| m > lo) {
            let v = bound.eval(m, eps);
            if v > prev * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::CertificateViolated { m });
            }
            prev = v;
        }
    }
    Ok(())
}

/// Per-level constants of the iterated-logarithm crossing statistic.
#[derive(Debug, Clone, Copy)]
struct LilLevel {
    c: f64,
    ell: f64,
    eta_sq: f64,
}

enum ScheduleKind {
    /// Statistic |S_k| / k^{1/q} at level 1/j.
    SllnQ { q: f64 },
    /// Statistic |S_k / sigma| against the iterated-logarithm boundary.
    Lil { sigma: f64, levels: Vec<LilLevel> },
    /// Statistic |S_k| / (k |X_1|) at level 1/j.
    ScaleInvariant,
    /// Arbitrary adapted event lattice.
    Generic(Arc<dyn EventLattice>),
}

/// An immutable threshold schedule: the e-process kind plus `m_1 ... m_J`.
/// Shareable across replications; per-stream state lives in
/// [`EProcessState`].
pub struct EProcessSchedule {
    kind: ScheduleKind,
    thresholds: Vec<Threshold>,
}

impl EProcessSchedule {
    /// Number of levels J.
    pub fn levels(&self) -> u32 {
        self.thresholds.len() as u32
    }

    /// The thresholds `m_1 ... m_J`.
    pub fn thresholds(&self) -> &[Threshold] {
        &self.thresholds
    }

    /// Hand-built strong-law schedule (used by tests and the generic
    /// equivalence oracle; the inverted builders are the `build_*` fns).
    pub fn slln_with_thresholds(q: f64, thresholds: Vec<Threshold>) -> Result<Self, Error> {
        if !(1.0..2.0).contains(&q) {
            return Err(Error::QOutOfRange { q });
        }
        Ok(Self {
            kind: ScheduleKind::SllnQ { q },
            thresholds,
        })
    }

    /// Hand-built iterated-logarithm schedule at known true scale `sigma`.
    pub fn lil_with_thresholds(sigma: f64, thresholds: Vec<Threshold>) -> Result<Self, Error> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let levels = (1..=thresholds.len() as u32)
            .map(|j| {
                let eps = 1.0 / j as f64;
                LilLevel {
                    c: bounds::c_eps(eps),
                    ell: bounds::ell_eps(eps),
                    eta_sq: (1.0 + eps) * (1.0 + eps),
                }
            })
            .collect();
        Ok(Self {
            kind: ScheduleKind::Lil { sigma, levels },
            thresholds,
        })
    }

    /// Hand-built scale-invariant schedule.
    pub fn scale_invariant_with_thresholds(thresholds: Vec<Threshold>) -> Self {
        Self {
            kind: ScheduleKind::ScaleInvariant,
            thresholds,
        }
    }

    /// Hand-built generic schedule over an event lattice.
    pub fn generic_with_thresholds(
        lattice: Arc<dyn EventLattice>,
        thresholds: Vec<Threshold>,
    ) -> Self {
        Self {
            kind: ScheduleKind::Generic(lattice),
            thresholds,
        }
    }

    fn is_generic(&self) -> bool {
        matches!(self.kind, ScheduleKind::Generic(_))
    }
}

/// The L^q strong-law tail bound `(m, eps) -> lq_bound` for a spec.
pub struct SllnTailBound {
    spec: DistributionSpec,
    q: f64,
}

impl SllnTailBound {
    pub fn new(spec: DistributionSpec, q: f64) -> Result<Self, Error> {
        if !(1.0..2.0).contains(&q) {
            return Err(Error::QOutOfRange { q });
        }
        if spec.abs_moment(q).is_none() {
            return Err(Error::MomentHypothesisViolated(format!(
                "{spec} lacks a finite moment of order {q}"
            )));
        }
        Ok(Self { spec, q })
    }
}

impl TailBound for SllnTailBound {
    fn eval(&self, m: u64, eps: f64) -> f64 {
        let p = LqParams { m, eps, q: self.q };
        bounds::lq_bound(&p, |x| {
            self.spec
                .trunc_moment(TruncatedMomentKind::AbsQ { q: self.q }, x)
                .expect("moment finiteness checked at construction")
        })
        .raw
    }
}

/// The iterated-logarithm tail bound of the e-process construction,
/// instantiated with `(lambda, eps, sigma_bar) = (1/3, 1/j, sigma)`:
///
/// ```text
///   (log_{1+eps}(2m/3))^{-eps} / (eps zeta(1+eps))
/// + 262/((eps^2 sigma^4) ∧ 1) (m^{-1/3} + Ubar(m^{1/3}))
/// ```
///
/// The stitched addend uses `2m/3` (the construction's display), not the
/// `m/3` of the standalone inequality.
pub struct LilTailBound {
    spec: DistributionSpec,
    sigma: f64,
}

impl LilTailBound {
    pub fn new(spec: DistributionSpec, sigma: f64) -> Result<Self, Error> {
        if spec.variance().is_none() {
            return Err(Error::MomentHypothesisViolated(format!(
                "{spec} has infinite variance"
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        Ok(Self { spec, sigma })
    }
}

impl TailBound for LilTailBound {
    fn eval(&self, m: u64, eps: f64) -> f64 {
        let mf = m as f64;
        let la = (2.0 * mf / 3.0).ln() / (1.0 + eps).ln();
        let stitched = if la <= 0.0 {
            f64::INFINITY
        } else {
            la.powf(-eps) / (eps * bounds::zeta(1.0 + eps).expect("1 + eps > 1"))
        };
        let s2 = self.sigma * self.sigma;
        let scale = 262.0 / (eps * eps * s2 * s2).min(1.0);
        let ubar = self
            .spec
            .trunc_moment(TruncatedMomentKind::CenteredSquare, mf.cbrt())
            .expect("variance finiteness checked at construction");
        stitched + scale * (1.0 / mf.cbrt() + ubar)
    }

    fn domain_min(&self) -> u64 {
        2
    }
}

/// The scale-invariant tail bound `262 j^2 (m^{-1/3} + U_{P1}(m^{1/3}))`,
/// where `U_{P1}` is the truncated first moment of the two-point law at
/// b = 1 (1 below level one, 0 above).
pub struct ScaleInvariantTailBound;

impl TailBound for ScaleInvariantTailBound {
    fn eval(&self, m: u64, eps: f64) -> f64 {
        let mf = m as f64;
        let root = mf.cbrt();
        let u_p1 = if root <= 1.0 { 1.0 } else { 0.0 };
        (262.0 / (eps * eps)) * (1.0 / root + u_p1)
    }

    fn domain_min(&self) -> u64 {
        2
    }
}

fn build_thresholds(
    bound: &dyn TailBound,
    levels: u32,
    search_cap: u64,
) -> Result<Vec<Threshold>, Error> {
    if levels < 1 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    spot_check_monotone(bound, levels)?;
    (1..=levels).map(|j| compute_mj(bound, j, search_cap)).collect()
}

/// Strong-law e-process at rate `k^{1/q}`: level `j` arms at the smallest
/// `m` with `lq_bound(m, 1/j) <= 2^-j` and latches once
/// `|S_k|/k^{1/q} >= 1/j` for some `k >= m_j`.
pub fn build_slln_eprocess(
    q: f64,
    spec: DistributionSpec,
    levels: u32,
    search_cap: u64,
) -> Result<EProcessSchedule, Error> {
    let bound = SllnTailBound::new(spec, q)?;
    let thresholds = build_thresholds(&bound, levels, search_cap)?;
    EProcessSchedule::slln_with_thresholds(q, thresholds)
}

/// Iterated-logarithm e-process: level `j` latches once `|S_k / sigma|`
/// crosses the boundary `c_{1/j} sqrt(k (loglog((1+1/j)^2 k) + ell_{1/j}))`
/// for some `k >= m_j`. Deep levels typically saturate.
pub fn build_lil_eprocess(
    spec: DistributionSpec,
    sigma: f64,
    levels: u32,
    search_cap: u64,
) -> Result<EProcessSchedule, Error> {
    let bound = LilTailBound::new(spec, sigma)?;
    let thresholds = build_thresholds(&bound, levels, search_cap)?;
    EProcessSchedule::lil_with_thresholds(sigma, thresholds)
}

/// Scale-free e-process over the two-point family: the statistic
/// `|S_k|/(k |X_1|)` never needs the scale `b`, and the thresholds come
/// from the two-point law at b = 1. In closed form
/// `m_j = ceil((262 j^2 2^j)^3)`.
pub fn build_scale_invariant_eprocess(
    levels: u32,
    search_cap: u64,
) -> Result<EProcessSchedule, Error> {
    let thresholds = build_thresholds(&ScaleInvariantTailBound, levels, search_cap)?;
    Ok(EProcessSchedule::scale_invariant_with_thresholds(thresholds))
}

/// Generic e-process over an adapted event lattice certified by `bound`:
/// level `j` latches once the prefix is a member at level `1/j` for some
/// `k >= m_j`.
pub fn build_generic_eprocess(
    lattice: Arc<dyn EventLattice>,
    bound: &dyn TailBound,
    levels: u32,
    search_cap: u64,
) -> Result<EProcessSchedule, Error> {
    let thresholds = build_thresholds(bound, levels, search_cap)?;
    Ok(EProcessSchedule::generic_with_thresholds(lattice, thresholds))
}

/// Online e-process state for one stream: step counter, running sum, the
/// per-level latches, and (generic kind only) the stored prefix.
///
/// The latch scan is incremental: each step tests only the armed, not yet
/// latched levels against the current statistic, so an update costs O(J).
/// A level latches at the first `k >= m_j` where the statistic crosses and
/// stays latched; the value is the latch count, nondecreasing in `n`.
pub struct EProcessState {
    n: u64,
    sum: f64,
    first_abs: Option<f64>,
    latched: Vec<bool>,
    value: u32,
    prefix: Vec<f64>,
    keep_prefix: bool,
}

impl EProcessState {
    pub fn new(schedule: &EProcessSchedule) -> Self {
        Self {
            n: 0,
            sum: 0.0,
            first_abs: None,
            latched: vec![false; schedule.thresholds.len()],
            value: 0,
            prefix: Vec::new(),
            keep_prefix: schedule.is_generic(),
        }
    }

    /// Steps seen so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Current e-process value `E_n` (the latch count).
    pub fn value(&self) -> u32 {
        self.value
    }

    /// Running sum `S_n`.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// Appends one observation and re-tests the armed levels.
    pub fn update(&mut self, schedule: &EProcessSchedule, x: f64) -> Result<(), Error> {
        if self.first_abs.is_none() {
            if matches!(schedule.kind, ScheduleKind::ScaleInvariant) && x == 0.0 {
                return Err(Error::ScaleInvariantUndefined);
            }
            self.first_abs = Some(x.abs());
        }
        self.n += 1;
        self.sum += x;
        if self.keep_prefix {
            self.prefix.push(x);
        }
        let n = self.n;
        let nf = n as f64;
        let abs_sum = self.sum.abs();

        // Statistic pieces shared across levels.
        let slln_stat = match schedule.kind {
            ScheduleKind::SllnQ { q } => abs_sum / nf.powf(1.0 / q),
            ScheduleKind::ScaleInvariant => {
                abs_sum / (nf * self.first_abs.expect("set on first update"))
            }
            _ => 0.0,
        };

        for (idx, latched) in self.latched.iter_mut().enumerate() {
            if *latched {
                continue;
            }
            let m_j = match schedule.thresholds[idx] {
                Threshold::Finite(m) => m,
                Threshold::Saturated => continue,
            };
            if n < m_j {
                continue;
            }
            let j = (idx + 1) as f64;
            let crossed = match &schedule.kind {
                ScheduleKind::SllnQ { .. } | ScheduleKind::ScaleInvariant => {
                    slln_stat >= 1.0 / j
                }
                ScheduleKind::Lil { sigma, levels } => {
                    let lv = levels[idx];
                    let inner = (lv.eta_sq * nf).ln().ln() + lv.ell;
                    let boundary = lv.c * (nf * inner).sqrt();
                    abs_sum / sigma >= boundary
                }
                ScheduleKind::Generic(lattice) => lattice.member(&self.prefix, 1.0 / j),
            };
            if crossed {
                *latched = true;
                self.value += 1;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FnBound<F: Fn(u64, f64) -> f64>(F, u64);

    impl<F: Fn(u64, f64) -> f64> TailBound for FnBound<F> {
        fn eval(&self, m: u64, eps: f64) -> f64 {
            (self.0)(m, eps)
        }
        fn domain_min(&self) -> u64 {
            self.1
        }
    }

    #[test]
    fn compute_mj_reciprocal() {
        // 1/m drops to 2^-5 first at m = 32.
        let b = FnBound(|m, _| 1.0 / m as f64, 1);
        assert_eq!(compute_mj(&b, 5, 1 << 40).unwrap(), Threshold::Finite(32));
    }

    #[test]
    fn compute_mj_vacuous_bound() {
        let b = FnBound(|_, _| 0.0, 1);
        assert_eq!(compute_mj(&b, 3, 1 << 40).unwrap(), Threshold::Finite(1));
        let b2 = FnBound(|_, _| 0.0, 2);
        assert_eq!(compute_mj(&b2, 3, 1 << 40).unwrap(), Threshold::Finite(2));
    }

    #[test]
    fn compute_mj_matches_brute_force_scan() {
        // 4/(m eps): j = 3 gives target 1/8 and eps = 1/3, so minimal m = 96.
        let b = FnBound(|m, eps| 4.0 / (m as f64 * eps), 1);
        let got = compute_mj(&b, 3, 1 << 40).unwrap();
        let brute = (1..=200)
            .find(|&m| b.eval(m, 1.0 / 3.0) <= 0.125)
            .map(Threshold::Finite)
            .unwrap();
        assert_eq!(got, brute);
        assert_eq!(got, Threshold::Finite(96));
    }

    #[test]
    fn compute_mj_saturates() {
        let b = FnBound(|_, _| 1.0, 1);
        assert_eq!(compute_mj(&b, 1, 1 << 30).unwrap(), Threshold::Saturated);
    }

    #[test]
    fn compute_mj_detects_certificate_violation() {
        let b = FnBound(|m, _| if m > 1000 { 5.0 } else { 1.0 }, 1);
        assert!(matches!(
            compute_mj(&b, 1, 1 << 30),
            Err(Error::CertificateViolated { .. })
        ));
    }

    #[test]
    fn slln_two_point_thresholds_are_the_u_jump() {
        // TwoPoint(1), q = 1: the moment term is 451 j^2 until m^{1/4} > 38j,
        // so m_j = (38j)^4 + 1; the exponential condition is far weaker.
        let spec = DistributionSpec::two_point(1.0).unwrap();
        let sched = build_slln_eprocess(1.0, spec, 4, DEFAULT_SEARCH_CAP).unwrap();
        for (idx, th) in sched.thresholds().iter().enumerate() {
            let j = (idx + 1) as u64;
            let expect = (38 * j).pow(4) + 1;
            assert_eq!(*th, Threshold::Finite(expect), "level {j}");
        }
        // Direct scan around the reported m_1.
        let bound = SllnTailBound::new(spec, 1.0).unwrap();
        for m in 2_085_130..=2_085_136 {
            assert!(bound.eval(m, 1.0) > 0.5, "bound should fail at m={m}");
        }
        assert!(bound.eval(2_085_137, 1.0) <= 0.5);
    }

    #[test]
    fn slln_thresholds_grow_like_38j_to_the_fourth() {
        let spec = DistributionSpec::two_point(1.0).unwrap();
        let sched = build_slln_eprocess(1.0, spec, 6, DEFAULT_SEARCH_CAP).unwrap();
        for (idx, th) in sched.thresholds().iter().enumerate() {
            let j = (idx + 1) as u64;
            let m = th.finite().expect("finite for small j");
            assert!(m > (38 * j).pow(4), "m_{j} below the U-jump");
        }
    }

    #[test]
    fn lil_thresholds_match_direct_scan_and_saturate() {
        let spec = DistributionSpec::gaussian(1.0).unwrap();
        let sched = build_lil_eprocess(spec, 1.0, 4, DEFAULT_SEARCH_CAP).unwrap();
        let bound = LilTailBound::new(spec, 1.0).unwrap();

        // j = 1: minimality against direct evaluation.
        let m1 = sched.thresholds()[0].finite().expect("m_1 finite");
        assert!(bound.eval(m1, 1.0) <= 0.5);
        assert!(bound.eval(m1 - 1, 1.0) > 0.5);
        // The stitched term alone forces m_1 into the hundred-millions.
        assert!(m1 > 100_000_000, "m_1 = {m1}");

        // Deep levels saturate: the stitched addend decays too slowly.
        assert_eq!(sched.thresholds()[3], Threshold::Saturated);

        // Monotone in j while finite.
        let finite: Vec<u64> = sched
            .thresholds()
            .iter()
            .filter_map(|t| t.finite())
            .collect();
        assert!(finite.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn scale_invariant_closed_form() {
        let sched = build_scale_invariant_eprocess(7, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(sched.thresholds()[0], Threshold::Finite(143_877_824));
        for (idx, th) in sched.thresholds().iter().enumerate() {
            let j = (idx + 1) as f64;
            let c = 262.0 * j * j * 2f64.powf(j);
            let exact = c * c * c;
            let m = th.finite().expect("finite for j <= 7") as f64;
            assert!(
                (m - exact.ceil()).abs() <= 1e-12 * exact,
                "level {j}: {m} vs ceil({exact})"
            );
        }
        // Level 8 exceeds the default cap.
        let sched8 = build_scale_invariant_eprocess(8, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(sched8.thresholds()[7], Threshold::Saturated);
    }

    #[test]
    fn zero_stream_never_latches() {
        let sched = EProcessSchedule::slln_with_thresholds(
            1.5,
            vec![Threshold::Finite(1); 5],
        )
        .unwrap();
        let mut st = EProcessState::new(&sched);
        for _ in 0..200 {
            st.update(&sched, 0.0).unwrap();
        }
        assert_eq!(st.value(), 0);
        assert_eq!(st.n(), 200);
    }

    #[test]
    fn constant_drift_latches_every_level() {
        // X == 1 with q > 1: |S_k|/k^{1/q} = k^{1-1/q} crosses every 1/j at
        // k = 1 already, so level j latches exactly at n = m_j.
        let thresholds: Vec<Threshold> = (1..=6).map(|j| Threshold::Finite(1 << j)).collect();
        let sched = EProcessSchedule::slln_with_thresholds(1.5, thresholds).unwrap();
        let mut st = EProcessState::new(&sched);
        for n in 1..=200u64 {
            st.update(&sched, 1.0).unwrap();
            let expect = (1..=6).filter(|&j| (1u64 << j) <= n).count() as u32;
            assert_eq!(st.value(), expect, "at n = {n}");
        }
        assert_eq!(st.value(), 6);
    }

    #[test]
    fn update_matches_brute_force_re_evaluation() {
        // Replay random streams and re-evaluate the defining max-scan sum.
        let spec = DistributionSpec::gaussian(1.0).unwrap();
        let thresholds = vec![
            Threshold::Finite(3),
            Threshold::Finite(10),
            Threshold::Saturated,
            Threshold::Finite(40),
        ];
        let q = 1.2;
        let sched = EProcessSchedule::slln_with_thresholds(q, thresholds.clone()).unwrap();
        for seed in 0..20 {
            let xs = spec.sample_stream(seed, 300);
            let mut st = EProcessState::new(&sched);
            let mut sums = Vec::with_capacity(xs.len());
            let mut s = 0.0;
            for &x in &xs {
                s += x;
                sums.push(s);
            }
            for (n0, &x) in xs.iter().enumerate() {
                st.update(&sched, x).unwrap();
                let n = n0 as u64 + 1;
                let mut brute = 0u32;
                for (idx, th) in thresholds.iter().enumerate() {
                    let Some(m_j) = th.finite() else { continue };
                    if n < m_j {
                        continue;
                    }
                    let level = 1.0 / (idx + 1) as f64;
                    let fired = (m_j..=n).any(|k| {
                        sums[(k - 1) as usize].abs() / (k as f64).powf(1.0 / q) >= level
                    });
                    if fired {
                        brute += 1;
                    }
                }
                assert_eq!(st.value(), brute, "seed {seed} at n = {n}");
            }
        }
    }

    #[test]
    fn replaying_a_stream_is_deterministic() {
        let spec = DistributionSpec::uniform(1.0).unwrap();
        let sched = EProcessSchedule::slln_with_thresholds(
            1.1,
            vec![Threshold::Finite(2), Threshold::Finite(5)],
        )
        .unwrap();
        let xs = spec.sample_stream(5, 100);
        let run = || {
            let mut st = EProcessState::new(&sched);
            let mut trace = Vec::new();
            for &x in &xs {
                st.update(&sched, x).unwrap();
                trace.push(st.value());
            }
            trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn scale_invariant_rejects_zero_first_observation() {
        let sched = EProcessSchedule::scale_invariant_with_thresholds(vec![Threshold::Finite(2)]);
        let mut st = EProcessState::new(&sched);
        assert!(matches!(
            st.update(&sched, 0.0),
            Err(Error::ScaleInvariantUndefined)
        ));
    }

    #[test]
    fn scale_invariant_statistic_is_scale_free() {
        // The same sign pattern at different b latches identically.
        let thresholds = vec![Threshold::Finite(2), Threshold::Finite(8)];
        let sched = EProcessSchedule::scale_invariant_with_thresholds(thresholds.clone());
        let spec = DistributionSpec::two_point(1.0).unwrap();
        let signs = spec.sample_stream(33, 150);
        let trace = |scale: f64| {
            let sched = EProcessSchedule::scale_invariant_with_thresholds(thresholds.clone());
            let mut st = EProcessState::new(&sched);
            let mut out = Vec::new();
            for &s in &signs {
                st.update(&sched, scale * s).unwrap();
                out.push(st.value());
            }
            out
        };
        let _ = sched;
        assert_eq!(trace(1.0), trace(7.5));
    }

    #[test]
    fn generic_always_member_counts_armed_levels() {
        // Always-member lattice with bound 1/m: m_j = 2^j, so the value at n
        // is #{j <= J : 2^j <= n}.
        let bound = FnBound(|m, _| 1.0 / m as f64, 1);
        let lattice = Arc::new(|_: &[f64], _: f64| true);
        let sched = build_generic_eprocess(lattice, &bound, 5, 1 << 40).unwrap();
        for (idx, th) in sched.thresholds().iter().enumerate() {
            assert_eq!(th.finite().unwrap(), 1u64 << (idx + 1));
        }
        let mut st = EProcessState::new(&sched);
        for n in 1..=40u64 {
            st.update(&sched, 0.0).unwrap();
            let expect = (1..=5).filter(|&j| (1u64 << j) <= n).count() as u32;
            assert_eq!(st.value(), expect, "at n = {n}");
        }
    }

    #[test]
    fn generic_never_member_is_identically_zero() {
        let bound = FnBound(|m, _| 1.0 / m as f64, 1);
        let lattice = Arc::new(|_: &[f64], _: f64| false);
        let sched = build_generic_eprocess(lattice, &bound, 5, 1 << 40).unwrap();
        let mut st = EProcessState::new(&sched);
        for _ in 0..100 {
            st.update(&sched, 1.0).unwrap();
        }
        assert_eq!(st.value(), 0);
    }

    #[test]
    fn generic_slln_lattice_reproduces_builder_latch_for_latch() {
        // The strong-law lattice expressed generically matches the dedicated
        // updater on random streams.
        let q = 1.5;
        let spec = DistributionSpec::gaussian(1.0).unwrap();
        let thresholds = vec![
            Threshold::Finite(2),
            Threshold::Finite(6),
            Threshold::Finite(20),
        ];
        let direct = EProcessSchedule::slln_with_thresholds(q, thresholds.clone()).unwrap();
        let lattice = Arc::new(move |prefix: &[f64], eps: f64| {
            let k = prefix.len() as f64;
            let s: f64 = prefix.iter().sum();
            s.abs() / k.powf(1.0 / q) >= eps
        });
        let generic =
            EProcessSchedule::generic_with_thresholds(lattice, thresholds.clone());
        for seed in 0..100 {
            let xs = spec.sample_stream(seed, 120);
            let mut a = EProcessState::new(&direct);
            let mut b = EProcessState::new(&generic);
            for &x in &xs {
                a.update(&direct, x).unwrap();
                b.update(&generic, x).unwrap();
                assert_eq!(a.value(), b.value(), "seed {seed} at n = {}", a.n());
            }
        }
    }

    #[test]
    fn truncating_levels_never_increases_the_value() {
        let spec = DistributionSpec::gaussian(1.0).unwrap();
        let small = EProcessSchedule::slln_with_thresholds(
            1.3,
            (1..=3).map(|j| Threshold::Finite(j * 4)).collect(),
        )
        .unwrap();
        let large = EProcessSchedule::slln_with_thresholds(
            1.3,
            (1..=8).map(|j| Threshold::Finite(j * 4)).collect(),
        )
        .unwrap();
        for seed in 200..220 {
            let xs = spec.sample_stream(seed, 200);
            let mut a = EProcessState::new(&small);
            let mut b = EProcessState::new(&large);
            for &x in &xs {
                a.update(&small, x).unwrap();
                b.update(&large, x).unwrap();
                assert!(a.value() <= b.value());
            }
        }
    }

    #[test]
    fn first_update_bookkeeping() {
        let sched = EProcessSchedule::slln_with_thresholds(1.5, vec![Threshold::Finite(1)])
            .unwrap();
        let mut st = EProcessState::new(&sched);
        st.update(&sched, 3.0).unwrap();
        assert_eq!(st.n(), 1);
        assert!(st.value() <= 1);
    }
}
