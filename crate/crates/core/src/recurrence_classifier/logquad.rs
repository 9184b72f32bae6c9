//! Log-domain quadrature for the criterion integrals.
//!
//! The integrals `int exp{+-I(u)} du` reach magnitudes like `exp(2 u^4)`
//! long before any schedule finishes, so no intermediate value is ever
//! materialized linearly: panels are accumulated with log-sum-exp and all
//! comparisons happen on logs. Panel widths are chosen from the known
//! integrand slope `d/du (+-I) = +-beta(u)/u` so the exponent moves by at
//! most ~0.7 per panel, and each panel is integrated by a trapezoid rule in
//! the log domain, doubling its resolution until stable. Negligible
//! decreasing tails (bounded above by `(b - a) exp(g(a))`) are skipped
//! outright.
//!
//! States are incremental: a criterion schedule extends the same state from
//! `N` to `2N` instead of recomputing from `r0`.

use super::profile::{adaptive_simpson, Envelope, RadialProfile};
use super::ClassifyError;

/// `log(exp(a) + exp(b))` without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(exp(a) - exp(b))` for `a >= b`; `NEG_INFINITY` when they coincide.
pub fn logsubexp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    debug_assert!(a >= b, "logsubexp needs a >= b, got {a} < {b}");
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// The three integrand choices of the outer criterion integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OuterIntegrand {
    /// `exp(-I_upper)`: recurrence integrand (cr1).
    ExpMinusUpper,
    /// `exp(-I_lower)`: transience integrand (cr2).
    ExpMinusLower,
    /// `exp(+I_upper)`: finite-measure integrand (cr4).
    ExpPlusUpper,
}

impl OuterIntegrand {
    pub fn sign(self) -> f64 {
        match self {
            OuterIntegrand::ExpMinusUpper | OuterIntegrand::ExpMinusLower => -1.0,
            OuterIntegrand::ExpPlusUpper => 1.0,
        }
    }

    pub fn envelope(self) -> Envelope {
        match self {
            OuterIntegrand::ExpMinusUpper | OuterIntegrand::ExpPlusUpper => Envelope::Upper,
            OuterIntegrand::ExpMinusLower => Envelope::Lower,
        }
    }
}

/// Margin (in nats) below the running total at which a decreasing tail is
/// declared negligible: e^-46 is under one part in 1e20.
const PRUNE_MARGIN: f64 = 46.0;
/// Target exponent change per panel.
const PANEL_DG: f64 = 0.7;
/// Log-domain stability target for panel refinement.
const PANEL_TOL: f64 = 1e-10;
const MAX_SUBS: usize = 1 << 13;

/// Incrementally extendable log-domain integral `log int_{r0}^u exp(g)` with
/// `g = sign * I`.
#[derive(Clone, Debug)]
pub struct LogIntegralState {
    profile: RadialProfile,
    integrand: OuterIntegrand,
    r0: f64,
    u: f64,
    /// `I(u)` relative to `r0` (raw, before the sign).
    i_u: f64,
    /// Log of the integral accumulated over `[r0, u]`.
    log_sum: f64,
    panels_used: u64,
    panel_budget: u64,
}

impl LogIntegralState {
    pub fn new(
        profile: &RadialProfile,
        integrand: OuterIntegrand,
        r0: f64,
        panel_budget: u64,
    ) -> Result<Self, ClassifyError> {
        if !(r0 > 0.0) {
            return Err(ClassifyError::InvalidInput(format!("r0 must be positive, got {r0}")));
        }
        Ok(LogIntegralState {
            profile: profile.clone(),
            integrand,
            r0,
            u: r0,
            i_u: 0.0,
            log_sum: f64::NEG_INFINITY,
            panels_used: 0,
            panel_budget,
        })
    }

    pub fn frontier(&self) -> f64 {
        self.u
    }

    pub fn log_value(&self) -> f64 {
        self.log_sum
    }

    pub fn panels_used(&self) -> u64 {
        self.panels_used
    }

    fn i_at(&self, r: f64, fallback_from: (f64, f64)) -> Result<f64, ClassifyError> {
        match self.profile.i_closed(self.integrand.envelope(), self.r0, r) {
            Some(v) => Ok(v),
            None => {
                let (from_r, from_i) = fallback_from;
                if r == from_r {
                    return Ok(from_i);
                }
                let env = self.integrand.envelope();
                let prof = &self.profile;
                Ok(from_i + adaptive_simpson(&|x| prof.beta(env, x) / x, from_r, r, 1e-12, 40)?)
            }
        }
    }

    /// True when the integrand keeps decreasing all the way to `n`
    /// (probed at geometric intermediate points; conservative).
    fn decreasing_through(&self, from: f64, n: f64) -> bool {
        let env = self.integrand.envelope();
        let sign = self.integrand.sign();
        let probes = 8;
        (0..=probes).all(|i| {
            let t = i as f64 / probes as f64;
            let x = from * (n / from).powf(t);
            sign * self.profile.beta(env, x) <= 0.0
        })
    }

    /// Extends the integral to the new upper limit and returns its log.
    pub fn extend_to(&mut self, n: f64) -> Result<f64, ClassifyError> {
        if n < self.u {
            return Err(ClassifyError::InvalidInput(format!(
                "cannot extend backwards: frontier {} > requested {}",
                self.u, n
            )));
        }
        let env = self.integrand.envelope();
        let sign = self.integrand.sign();
        while self.u < n {
            let remaining = n - self.u;
            let slope = sign * self.profile.beta(env, self.u) / self.u;

            // a decaying tail whose crude upper bound cannot move the total
            // is skipped in one go
            if slope < 0.0 && self.log_sum > f64::NEG_INFINITY {
                let bound = remaining.ln() + sign * self.i_u;
                if bound < self.log_sum - PRUNE_MARGIN && self.decreasing_through(self.u, n) {
                    self.i_u = self.i_at(n, (self.u, self.i_u))?;
                    self.u = n;
                    break;
                }
            }

            let mut h = 0.5 * self.u;
            if slope != 0.0 && slope.is_finite() {
                h = h.min(PANEL_DG / slope.abs());
            }
            h = h.max(self.u * 4.0 * f64::EPSILON);
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
            }
            let q = if h == remaining { n } else { self.u + h };

            let (panel_log, i_q) = self.panel(self.u, q)?;
            self.log_sum = logaddexp(self.log_sum, panel_log);
            self.i_u = i_q;
            self.u = q;
            self.panels_used += 1;
            if self.panels_used > self.panel_budget {
                return Err(ClassifyError::QuadratureNonConvergence {
                    interval: (self.r0, n),
                    residual: f64::NAN,
                });
            }
        }
        Ok(self.log_sum)
    }

    /// Trapezoid-in-log over `[p, q]` with resolution doubling; returns the
    /// panel's log-integral and `I(q)`.
    fn panel(&self, p: f64, q: f64) -> Result<(f64, f64), ClassifyError> {
        let sign = self.integrand.sign();
        let mut subs = 4usize;
        let mut previous = f64::NAN;
        loop {
            let dx = (q - p) / subs as f64;
            // I at the sub-nodes
            let mut i_nodes = Vec::with_capacity(subs + 1);
            i_nodes.push(self.i_u);
            for j in 1..=subs {
                let x_prev = p + dx * (j - 1) as f64;
                let x = if j == subs { q } else { p + dx * j as f64 };
                let prev = *i_nodes.last().unwrap();
                i_nodes.push(self.i_at(x, (x_prev, prev))?);
            }
            let mut acc = f64::NEG_INFINITY;
            for j in 0..subs {
                let g0 = sign * i_nodes[j];
                let g1 = sign * i_nodes[j + 1];
                acc = logaddexp(acc, dx.ln() + logaddexp(g0, g1) - std::f64::consts::LN_2);
            }
            if (acc - previous).abs() < PANEL_TOL || subs >= MAX_SUBS {
                return Ok((acc, i_nodes[subs]));
            }
            previous = acc;
            subs *= 2;
        }
    }
}

/// One-shot `log int_{r0}^{n} exp(+-I(u)) du`.
pub fn outer_integral_logdomain(
    profile: &RadialProfile,
    integrand: OuterIntegrand,
    r0: f64,
    n: f64,
) -> Result<f64, ClassifyError> {
    if !(n > r0) {
        return Err(ClassifyError::InvalidInput(format!("need n > r0, got r0={r0}, n={n}")));
    }
    let mut state = LogIntegralState::new(profile, integrand, r0, 4_000_000)?;
    state.extend_to(n)
}

/// Log-domain numerator and denominator of the finite-measure quotient
/// `Q(N) = [int_{r0}^N exp(-I_up(s)) (int_{r0}^s exp(I_up(u)) du) ds]
///         / int_{r0}^N exp(-I_lo(u)) du`.
#[derive(Clone, Copy, Debug)]
pub struct Cr5Quotient {
    pub log_numerator: f64,
    pub log_denominator: f64,
}

impl Cr5Quotient {
    pub fn log_quotient(&self) -> f64 {
        self.log_numerator - self.log_denominator
    }
}

/// Incrementally extendable state for the quotient: the inner integral is
/// carried along the sweep as a running log-sum-exp.
#[derive(Clone, Debug)]
pub struct Cr5State {
    profile: RadialProfile,
    r0: f64,
    s: f64,
    i_up: f64,
    /// `log int_{r0}^{s} exp(I_up)`.
    log_inner: f64,
    /// `log` of the numerator accumulated over `[r0, s]`.
    log_num: f64,
    denominator: LogIntegralState,
    panels_used: u64,
    panel_budget: u64,
}

impl Cr5State {
    pub fn new(profile: &RadialProfile, r0: f64, panel_budget: u64) -> Result<Self, ClassifyError> {
        Ok(Cr5State {
            profile: profile.clone(),
            r0,
            s: r0,
            i_up: 0.0,
            log_inner: f64::NEG_INFINITY,
            log_num: f64::NEG_INFINITY,
            denominator: LogIntegralState::new(
                profile,
                OuterIntegrand::ExpMinusLower,
                r0,
                panel_budget,
            )?,
            panels_used: 0,
            panel_budget,
        })
    }

    fn i_up_at(&self, r: f64, fallback_from: (f64, f64)) -> Result<f64, ClassifyError> {
        match self.profile.i_closed(Envelope::Upper, self.r0, r) {
            Some(v) => Ok(v),
            None => {
                let (from_r, from_i) = fallback_from;
                if r == from_r {
                    return Ok(from_i);
                }
                let prof = &self.profile;
                Ok(from_i
                    + adaptive_simpson(&|x| prof.beta(Envelope::Upper, x) / x, from_r, r, 1e-12, 40)?)
            }
        }
    }

    pub fn extend_to(&mut self, n: f64) -> Result<Cr5Quotient, ClassifyError> {
        if n < self.s {
            return Err(ClassifyError::InvalidInput(format!(
                "cannot extend backwards: frontier {} > requested {}",
                self.s, n
            )));
        }
        self.denominator.extend_to(n)?;
        while self.s < n {
            let remaining = n - self.s;
            let slope_scale = self.profile.beta(Envelope::Upper, self.s).abs() / self.s;
            let mut h = 0.5 * self.s;
            if slope_scale > 0.0 && slope_scale.is_finite() {
                h = h.min(PANEL_DG / slope_scale);
            }
            h = h.max(self.s * 4.0 * f64::EPSILON);
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
            }
            let q = if h == remaining { n } else { self.s + h };

            let (panel_num, inner_add, i_q) = self.panel(self.s, q)?;
            self.log_num = logaddexp(self.log_num, panel_num);
            self.log_inner = logaddexp(self.log_inner, inner_add);
            self.i_up = i_q;
            self.s = q;
            self.panels_used += 1;
            if self.panels_used > self.panel_budget {
                return Err(ClassifyError::QuadratureNonConvergence {
                    interval: (self.r0, n),
                    residual: f64::NAN,
                });
            }
        }
        Ok(Cr5Quotient {
            log_numerator: self.log_num,
            log_denominator: self.denominator.log_value(),
        })
    }

    /// Integrates `exp(-I_up(s)) * inner(s)` over `[p, q]` while advancing
    /// the inner integral across the same sub-grid. Returns the panel's
    /// numerator log, the log of `int_p^q exp(I_up)`, and `I_up(q)`.
    fn panel(&self, p: f64, q: f64) -> Result<(f64, f64, f64), ClassifyError> {
        let mut subs = 4usize;
        let mut previous = (f64::NAN, f64::NAN);
        loop {
            let dx = (q - p) / subs as f64;
            let mut i_nodes = Vec::with_capacity(subs + 1);
            i_nodes.push(self.i_up);
            for j in 1..=subs {
                let x_prev = p + dx * (j - 1) as f64;
                let x = if j == subs { q } else { p + dx * j as f64 };
                let prev = *i_nodes.last().unwrap();
                i_nodes.push(self.i_up_at(x, (x_prev, prev))?);
            }
            // running inner integral across the panel plus numerator trapezoid
            let mut inner_partial = f64::NEG_INFINITY;
            let mut num_acc = f64::NEG_INFINITY;
            let mut f_prev = -i_nodes[0] + logaddexp(self.log_inner, inner_partial);
            for j in 0..subs {
                let seg =
                    dx.ln() + logaddexp(i_nodes[j], i_nodes[j + 1]) - std::f64::consts::LN_2;
                inner_partial = logaddexp(inner_partial, seg);
                let f_next = -i_nodes[j + 1] + logaddexp(self.log_inner, inner_partial);
                num_acc = logaddexp(num_acc, dx.ln() + logaddexp(f_prev, f_next) - std::f64::consts::LN_2);
                f_prev = f_next;
            }
            let close = |a: f64, b: f64| {
                (a - b).abs() < PANEL_TOL || (a == f64::NEG_INFINITY && b == f64::NEG_INFINITY)
            };
            if (close(num_acc, previous.0) && close(inner_partial, previous.1)) || subs >= MAX_SUBS
            {
                return Ok((num_acc, inner_partial, i_nodes[subs]));
            }
            previous = (num_acc, inner_partial);
            subs *= 2;
        }
    }
}

/// One-shot quotient evaluation.
pub fn cr5_quotient(
    profile: &RadialProfile,
    r0: f64,
    n: f64,
) -> Result<Cr5Quotient, ClassifyError> {
    if !(r0 > 0.0) || !(n > r0) {
        return Err(ClassifyError::InvalidInput(format!("need 0 < r0 < n, got r0={r0}, n={n}")));
    }
    let mut state = Cr5State::new(profile, r0, 4_000_000)?;
    state.extend_to(n)
}
