//! Criterion evaluation along a geometric schedule of upper limits.
//!
//! No finite computation proves that an integral diverges, so every verdict
//! is an explicitly labeled heuristic over partial integrals evaluated at
//! `N_k = r0 * 2^k`:
//!
//! * a *divergence*-type criterion (cr1) holds when the partial values keep
//!   growing without saturation (last three doubling increments
//!   non-decreasing in the log domain, or the value passes `exp(50)`), and
//!   fails when the relative tail increment over the last doubling drops
//!   below `1e-8`;
//! * a *convergence*-type criterion (cr2, cr4) applies the same two rules
//!   with the roles swapped;
//! * cr5 tracks the trend of the quotient `Q(N)`: it holds when the last
//!   three doublings each grow `Q` by at least the configured ratio, and
//!   fails when `Q` collapses (or shrinks by that ratio three times).
//!
//! The schedule stops at the first doubling that decides the verdict, which
//! keeps the super-exponential envelopes (where partial integrals move by
//! thousands of nats per doubling) affordable.

use serde::{Deserialize, Serialize};

use super::logquad::{logsubexp, Cr5State, LogIntegralState, OuterIntegrand};
use super::profile::RadialProfile;
use super::ClassifyError;

/// The four integral criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Recurrence: `int exp(-I_upper) = inf`.
    Cr1,
    /// Transience: `int exp(-I_lower) < inf`.
    Cr2,
    /// Finite invariant measure (with cr1): `int exp(+I_upper) < inf`.
    Cr4,
    /// No finite invariant measure (with cr1): quotient `Q(N) -> inf`.
    Cr5,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Cr1 => "cr1",
            Criterion::Cr2 => "cr2",
            Criterion::Cr4 => "cr4",
            Criterion::Cr5 => "cr5",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Verdict for one criterion with the partial-integral evidence that
/// produced it. Evidence entries are `(N, log value)`; for cr5 the log
/// value is `log Q(N)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionVerdict {
    #[serde(rename = "name")]
    pub criterion: Criterion,
    pub verdict: Verdict,
    pub evidence: Vec<(f64, f64)>,
    pub r0: f64,
}

/// Tunable thresholds of the verdict heuristics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub r0: f64,
    /// Number of doublings in the `N`-schedule (`N_k = r0 * 2^k`).
    pub max_doublings: u32,
    /// A partial integral beyond `exp(blowup_log)` counts as divergent.
    pub blowup_log: f64,
    /// Relative tail increment below which a partial integral counts as
    /// converged.
    pub tail_rtol: f64,
    /// Per-doubling growth factor of `Q` that counts as growth for cr5.
    pub quotient_growth: f64,
    /// Hard cap on quadrature panels per criterion.
    pub panel_budget: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            r0: 1.0,
            max_doublings: 30,
            blowup_log: 50.0,
            tail_rtol: 1e-8,
            quotient_growth: 1.5,
            panel_budget: 4_000_000,
        }
    }
}

/// Slack for comparing log-domain increments computed by quadrature.
const INCREMENT_SLACK: f64 = 1e-9;

/// Whether the criterion's defining integral must diverge (`true`) or
/// converge (`false`) for the criterion to hold.
fn wants_divergence(criterion: Criterion) -> bool {
    matches!(criterion, Criterion::Cr1)
}

fn integrand_for(criterion: Criterion) -> OuterIntegrand {
    match criterion {
        Criterion::Cr1 => OuterIntegrand::ExpMinusUpper,
        Criterion::Cr2 => OuterIntegrand::ExpMinusLower,
        Criterion::Cr4 => OuterIntegrand::ExpPlusUpper,
        Criterion::Cr5 => unreachable!("cr5 is quotient-based"),
    }
}

/// Growth rule: the last three doubling increments are non-decreasing in
/// the log domain.
fn growing_without_saturation(log_increments: &[f64]) -> bool {
    if log_increments.len() < 3 {
        return false;
    }
    let tail = &log_increments[log_increments.len() - 3..];
    // all three finite and non-decreasing within quadrature slack
    tail.iter().all(|v| v.is_finite() || *v == f64::INFINITY)
        && tail.windows(2).all(|w| w[1] >= w[0] - INCREMENT_SLACK)
}

/// Tail rule: the last doubling added less than `tail_rtol` of the total,
/// relatively.
fn tail_converged(log_values: &[f64], log_increments: &[f64], tail_rtol: f64) -> bool {
    match (log_values.last(), log_increments.last()) {
        (Some(&total), Some(&inc)) => inc - total < tail_rtol.ln(),
        _ => false,
    }
}

/// Evaluates one criterion along the doubling schedule, stopping at the
/// first decisive doubling.
pub fn criterion_verdict(
    profile: &RadialProfile,
    criterion: Criterion,
    config: &ClassifierConfig,
) -> Result<CriterionVerdict, ClassifyError> {
    if criterion == Criterion::Cr5 {
        return cr5_verdict(profile, config);
    }
    let mut state =
        LogIntegralState::new(profile, integrand_for(criterion), config.r0, config.panel_budget)?;
    let mut evidence = Vec::new();
    let mut log_values: Vec<f64> = Vec::new();
    let mut log_increments: Vec<f64> = Vec::new();
    let mut verdict = Verdict::Inconclusive;

    for k in 1..=config.max_doublings {
        let n = config.r0 * f64::powi(2.0, k as i32);
        let log_value = state.extend_to(n)?;
        if let Some(&prev) = log_values.last() {
            log_increments.push(logsubexp(log_value, prev));
        }
        log_values.push(log_value);
        evidence.push((n, log_value));

        let diverging =
            log_value > config.blowup_log || growing_without_saturation(&log_increments);
        let converged = tail_converged(&log_values, &log_increments, config.tail_rtol);
        let decided = match (wants_divergence(criterion), diverging, converged) {
            (true, true, _) => Some(Verdict::Holds),
            (true, _, true) => Some(Verdict::Fails),
            (false, _, true) => Some(Verdict::Holds),
            (false, true, _) => Some(Verdict::Fails),
            _ => None,
        };
        if let Some(v) = decided {
            verdict = v;
            break;
        }
    }
    Ok(CriterionVerdict { criterion, verdict, evidence, r0: config.r0 })
}

fn cr5_verdict(
    profile: &RadialProfile,
    config: &ClassifierConfig,
) -> Result<CriterionVerdict, ClassifyError> {
    let mut state = Cr5State::new(profile, config.r0, config.panel_budget)?;
    let mut evidence = Vec::new();
    let mut log_q: Vec<f64> = Vec::new();
    let mut verdict = Verdict::Inconclusive;
    let growth = config.quotient_growth.ln();

    for k in 1..=config.max_doublings {
        let n = config.r0 * f64::powi(2.0, k as i32);
        let q = state.extend_to(n)?;
        let lq = q.log_quotient();
        log_q.push(lq);
        evidence.push((n, lq));

        let max_seen = log_q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let collapsed = lq < max_seen - 50.0;
        let steps: Vec<f64> = log_q.windows(2).map(|w| w[1] - w[0]).collect();
        let growing = steps.len() >= 3
            && steps[steps.len() - 3..].iter().all(|&s| s >= growth - INCREMENT_SLACK);
        let shrinking = steps.len() >= 3
            && steps[steps.len() - 3..].iter().all(|&s| s <= -growth + INCREMENT_SLACK);
        // a quotient that has flattened out decides nothing and never will;
        // stop before the envelopes make further doublings astronomically
        // expensive
        let stabilized =
            steps.len() >= 3 && steps[steps.len() - 3..].iter().all(|&s| s.abs() <= 0.05);
        let decided = if collapsed || shrinking {
            Some(Verdict::Fails)
        } else if growing {
            Some(Verdict::Holds)
        } else if stabilized {
            Some(Verdict::Inconclusive)
        } else {
            None
        };
        if let Some(v) = decided {
            verdict = v;
            break;
        }
    }
    Ok(CriterionVerdict { criterion: Criterion::Cr5, verdict, evidence, r0: config.r0 })
}

/// Composite classification of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summary {
    Recurrent,
    Transient,
    PositiveRecurrent,
    RecurrentNoFiniteMeasure,
    Inconclusive,
}

impl Summary {
    pub fn is_recurrent(self) -> bool {
        matches!(
            self,
            Summary::Recurrent | Summary::PositiveRecurrent | Summary::RecurrentNoFiniteMeasure
        )
    }

    pub fn describe(self) -> &'static str {
        match self {
            Summary::Recurrent => "recurrent",
            Summary::Transient => "transient",
            Summary::PositiveRecurrent => "positive_recurrent",
            Summary::RecurrentNoFiniteMeasure => "recurrent_no_finite_measure",
            Summary::Inconclusive => "inconclusive",
        }
    }
}

/// Per-criterion verdicts plus their composition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub profile: String,
    pub r0: f64,
    pub criteria: Vec<CriterionVerdict>,
    pub summary: Summary,
    pub notes: String,
}

impl ClassificationReport {
    pub fn verdict(&self, criterion: Criterion) -> Verdict {
        self.criteria
            .iter()
            .find(|c| c.criterion == criterion)
            .map(|c| c.verdict)
            .unwrap_or(Verdict::Inconclusive)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Runs all four criteria and composes the summary:
/// cr1 and cr4 give positive recurrence, cr1 and cr5 give recurrence
/// without a finite invariant measure, cr1 alone gives recurrence, cr2
/// gives transience, anything else is inconclusive.
pub fn classify(
    profile: &RadialProfile,
    config: &ClassifierConfig,
) -> Result<ClassificationReport, ClassifyError> {
    let criteria = vec![
        criterion_verdict(profile, Criterion::Cr1, config)?,
        criterion_verdict(profile, Criterion::Cr2, config)?,
        criterion_verdict(profile, Criterion::Cr4, config)?,
        criterion_verdict(profile, Criterion::Cr5, config)?,
    ];
    let v = |c: Criterion| {
        criteria
            .iter()
            .find(|cv| cv.criterion == c)
            .map(|cv| cv.verdict)
            .unwrap_or(Verdict::Inconclusive)
    };

    let summary = if v(Criterion::Cr1) == Verdict::Holds && v(Criterion::Cr4) == Verdict::Holds {
        Summary::PositiveRecurrent
    } else if v(Criterion::Cr1) == Verdict::Holds && v(Criterion::Cr5) == Verdict::Holds {
        Summary::RecurrentNoFiniteMeasure
    } else if v(Criterion::Cr1) == Verdict::Holds {
        Summary::Recurrent
    } else if v(Criterion::Cr2) == Verdict::Holds {
        Summary::Transient
    } else {
        Summary::Inconclusive
    };

    let mut notes = format!(
        "Verdicts are trend heuristics over partial integrals at r0 = {}; \
         the criteria are existential in r0, so a failure at this r0 does \
         not preclude another choice.",
        config.r0
    );
    if summary == Summary::Inconclusive {
        notes.push_str(
            " None of the integral criteria is decisive for this profile: \
             the recurrence integral converges, the transience integral \
             diverges, and the finite-measure quotient collapses, so the \
             classification stays open.",
        );
    }

    Ok(ClassificationReport {
        profile: profile.name().to_string(),
        r0: config.r0,
        criteria,
        summary,
        notes,
    })
}
