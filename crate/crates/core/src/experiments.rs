//! Seeded Monte Carlo trial runners and the quantitative checks built on
//! them: decision-time distributions, coincidence probabilities, superposition
//! oracle equivalence, and operation-count accounting.
//!
//! Trials are independent: trial `i` derives its own reference system from
//! `(base_seed, i)`, so runs are reproducible bit for bit and may execute in
//! parallel. Aggregation is an ordered reduction over trial indices, so
//! parallelism cannot change any reported number.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::dyadic::DyadicSample;
use crate::hats::{
    decide_double_draw, decide_single_draw, setup_hats, DoubleOutcome, HatId, ProtocolError,
};
use crate::rtw::{self, derive_seed, zero_bit_count, OpCount, ReferenceSystem, SplitMix64};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Argument(#[from] rtw::Error),
    #[error("invalid trial config: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("trial {trial} produced a wrong assignment; the decision scheme must be error-free")]
    WrongAssignment { trial: u64 },
    #[error("superposition mismatch for {context} at clock {clock} ({n_bits} bits)")]
    OracleMismatch {
        n_bits: u32,
        clock: u64,
        context: &'static str,
    },
}

/// Which drawing problem a trial batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// One secret number from one hat.
    Single,
    /// Known numbers `p` and `q`, one removed from each hat.
    Double { p: u64, q: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub n_bits: u32,
    pub trials: u64,
    pub base_seed: u64,
    pub max_clocks: u64,
    pub problem: Problem,
}

impl TrialConfig {
    fn validate(&self) -> Result<ReferenceSystem, ExperimentError> {
        // Constructing a throwaway system validates n_bits and gives us
        // the number range for problem validation.
        let probe = ReferenceSystem::new(self.n_bits, 0)?;
        if self.trials == 0 {
            return Err(ExperimentError::InvalidConfig {
                reason: "trials must be at least 1",
            });
        }
        if self.max_clocks == 0 {
            return Err(ExperimentError::InvalidConfig {
                reason: "max_clocks must be at least 1",
            });
        }
        if let Problem::Double { p, q } = self.problem {
            probe.check_number(p)?;
            probe.check_number(q)?;
            if p == q {
                return Err(ProtocolError::IdenticalNumbers { number: p }.into());
            }
        }
        Ok(probe)
    }

    /// Independent seeds for trial `index`: one for the reference system,
    /// one for trial-level choices.
    fn trial_seeds(&self, index: u64) -> (u64, u64) {
        let trial_seed = derive_seed(self.base_seed, index);
        (derive_seed(trial_seed, 0), derive_seed(trial_seed, 1))
    }
}

/// Decision-time distribution over a trial batch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Histogram {
    buckets: BTreeMap<u64, u64>,
    undecided: u64,
    trials: u64,
}

impl Histogram {
    pub fn record(&mut self, clocks_used: u64) {
        *self.buckets.entry(clocks_used).or_insert(0) += 1;
        self.trials += 1;
    }

    pub fn record_undecided(&mut self) {
        self.undecided += 1;
        self.trials += 1;
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn undecided(&self) -> u64 {
        self.undecided
    }

    pub fn decided(&self) -> u64 {
        self.trials - self.undecided
    }

    pub fn count(&self, clocks: u64) -> u64 {
        self.buckets.get(&clocks).copied().unwrap_or(0)
    }

    /// Fraction of all trials that decided in exactly `clocks` clocks.
    pub fn fraction(&self, clocks: u64) -> f64 {
        self.count(clocks) as f64 / self.trials as f64
    }

    /// Buckets in increasing clock order.
    pub fn buckets(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.buckets.iter().map(|(&clocks, &count)| (clocks, count))
    }

    /// Mean decision time over decided trials.
    pub fn mean_decided(&self) -> Option<f64> {
        if self.decided() == 0 {
            return None;
        }
        let weighted: u64 = self.buckets.iter().map(|(&c, &n)| c * n).sum();
        Some(weighted as f64 / self.decided() as f64)
    }
}

/// Aggregate result of a single-draw trial batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialStats {
    pub trials: u64,
    pub correct: u64,
    pub histogram: Histogram,
}

impl TrialStats {
    pub fn correctness_rate(&self) -> f64 {
        self.correct as f64 / self.trials as f64
    }
}

/// Half-width of the pre-registered acceptance band: three binomial standard
/// deviations of an empirical fraction around probability `p`.
pub fn three_sigma(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Run seeded single-draw trials: fresh reference, random hat, random
/// number, then the one-clock decision. Counts correct identifications.
pub fn run_single_trials(cfg: &TrialConfig) -> Result<TrialStats, ExperimentError> {
    cfg.validate()?;
    if !matches!(cfg.problem, Problem::Single) {
        return Err(ExperimentError::InvalidConfig {
            reason: "run_single_trials requires Problem::Single",
        });
    }
    let outcomes: Vec<(bool, u64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(bool, u64), ExperimentError> {
            let (sys_seed, choice_seed) = cfg.trial_seeds(trial);
            let sys = ReferenceSystem::new(cfg.n_bits, sys_seed)?;
            let mut choices = SplitMix64::new(choice_seed);
            let drawn_from = if choices.next_bool() {
                HatId::Hat1
            } else {
                HatId::Hat2
            };
            let number = choices.next_bits(cfg.n_bits);
            let (mut h1, mut h2) = setup_hats(sys);
            match drawn_from {
                HatId::Hat1 => h1.draw(number)?,
                HatId::Hat2 => h2.draw(number)?,
            }
            let decision = decide_single_draw(&sys, &h1, &h2)?;
            Ok((decision.deficient_hat == drawn_from, decision.clocks_used))
        })
        .collect::<Result<_, _>>()?;

    let mut stats = TrialStats {
        trials: cfg.trials,
        correct: 0,
        histogram: Histogram::default(),
    };
    for (correct, clocks) in outcomes {
        if correct {
            stats.correct += 1;
        }
        stats.histogram.record(clocks);
    }
    Ok(stats)
}

/// Distribution of double-draw decision times. Which hat loses `p` is
/// re-randomized per trial; any wrong assignment aborts the batch since the
/// decision scheme admits none.
pub fn decision_time_histogram(cfg: &TrialConfig) -> Result<Histogram, ExperimentError> {
    cfg.validate()?;
    let Problem::Double { p, q } = cfg.problem else {
        return Err(ExperimentError::InvalidConfig {
            reason: "decision_time_histogram requires Problem::Double",
        });
    };
    let outcomes: Vec<Option<u64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<u64>, ExperimentError> {
            let (sys_seed, choice_seed) = cfg.trial_seeds(trial);
            let sys = ReferenceSystem::new(cfg.n_bits, sys_seed)?;
            let hat1_loses_p = SplitMix64::new(choice_seed).next_bool();
            let (mut h1, mut h2) = setup_hats(sys);
            let (lost1, lost2) = if hat1_loses_p { (p, q) } else { (q, p) };
            h1.draw(lost1)?;
            h2.draw(lost2)?;
            match decide_double_draw(&sys, p, q, &h1, &h2, cfg.max_clocks)? {
                DoubleOutcome::Decided(d) => {
                    if (d.hat1_missing, d.hat2_missing) != (lost1, lost2) {
                        return Err(ExperimentError::WrongAssignment { trial });
                    }
                    Ok(Some(d.clocks_used))
                }
                DoubleOutcome::Undecided { .. } => Ok(None),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut histogram = Histogram::default();
    for outcome in outcomes {
        match outcome {
            Some(clocks) => histogram.record(clocks),
            None => histogram.record_undecided(),
        }
    }
    Ok(histogram)
}

/// Empirical probability that the non-matching difference stays zero over
/// clocks `1..=clocks`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchProbabilityReport {
    pub n_bits: u32,
    pub p: u64,
    pub q: u64,
    pub clocks: u64,
    pub trials_run: u64,
    pub coincidences: u64,
    pub probability: f64,
    /// `2^-clocks` in the equal-zero-count case, exactly 0 otherwise.
    pub analytic: f64,
    /// True when unequal zero-bit counts made simulation unnecessary: the
    /// difference of unequal magnitudes can never vanish.
    pub guarded: bool,
}

/// Measure how often the deficient hat keeps masquerading as the wrong
/// reduction: the fraction of trials where `hat1 - (universe - G_q)` is zero
/// at every clock in `1..=clocks`, with `p` removed from hat 1.
pub fn match_probability(
    n_bits: u32,
    p: u64,
    q: u64,
    clocks: u64,
    trials: u64,
    base_seed: u64,
) -> Result<MatchProbabilityReport, ExperimentError> {
    let probe = ReferenceSystem::new(n_bits, 0)?;
    probe.check_number(p)?;
    probe.check_number(q)?;
    if p == q {
        return Err(ProtocolError::IdenticalNumbers { number: p }.into());
    }
    if trials == 0 || clocks == 0 {
        return Err(ExperimentError::InvalidConfig {
            reason: "trials and clocks must be at least 1",
        });
    }
    let r = zero_bit_count(p, n_bits)?;
    let s = zero_bit_count(q, n_bits)?;
    if r != s {
        // |G_p| = 2^-r differs from |G_q| = 2^-s at every clock, so the
        // difference is never zero; report the exact probability.
        return Ok(MatchProbabilityReport {
            n_bits,
            p,
            q,
            clocks,
            trials_run: 0,
            coincidences: 0,
            probability: 0.0,
            analytic: 0.0,
            guarded: true,
        });
    }

    let cfg = TrialConfig {
        n_bits,
        trials,
        base_seed,
        max_clocks: clocks,
        problem: Problem::Double { p, q },
    };
    let coincidences = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64, ExperimentError> {
            let (sys_seed, _) = cfg.trial_seeds(trial);
            let sys = ReferenceSystem::new(n_bits, sys_seed)?;
            let (mut h1, mut h2) = setup_hats(sys);
            h1.draw(p)?;
            h2.draw(q)?;
            for t in 1..=clocks {
                let reduced_q = &sys.universe_sample(t) - &sys.product_sample(q, t)?;
                if !(&h1.sample_counted(t, &mut OpCount::default()) - &reduced_q).is_zero() {
                    return Ok(0);
                }
            }
            Ok(1)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(MatchProbabilityReport {
        n_bits,
        p,
        q,
        clocks,
        trials_run: trials,
        coincidences,
        probability: coincidences as f64 / trials as f64,
        analytic: 2f64.powi(-(clocks.min(1024) as i32)),
        guarded: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEquivalenceReport {
    pub n_bits: u32,
    pub clocks_checked: u64,
    /// Number removed for the reduced-hat half of the check.
    pub drawn: u64,
}

/// Oracle cap for the equivalence run; one level stricter than the raw
/// oracle so the reduced-hat sweep stays cheap.
pub const EQUIVALENCE_MAX_BITS: u32 = 12;

/// Assert that the factored universe equals the explicit sum of all product
/// strings at every clock, and that a hat with one number drawn equals the
/// sum over the remaining numbers.
pub fn oracle_equivalence(
    n_bits: u32,
    clocks: u64,
    seed: u64,
) -> Result<OracleEquivalenceReport, ExperimentError> {
    if n_bits > EQUIVALENCE_MAX_BITS {
        return Err(rtw::Error::OracleTooWide {
            n_bits,
            max: EQUIVALENCE_MAX_BITS,
        }
        .into());
    }
    let sys = ReferenceSystem::new(n_bits, derive_seed(seed, 0))?;
    let drawn = SplitMix64::new(derive_seed(seed, 1)).next_bits(n_bits);
    let (mut hat, _) = setup_hats(sys);
    hat.draw(drawn)?;
    for t in 0..clocks {
        if sys.universe_sample(t) != sys.universe_sum_oracle(t)? {
            return Err(ExperimentError::OracleMismatch {
                n_bits,
                clock: t,
                context: "universe vs sum of all product strings",
            });
        }
        let mut remaining = DyadicSample::zero(n_bits);
        for number in 0..=sys.max_number() {
            if number != drawn {
                remaining = &remaining + &sys.product_sample(number, t)?;
            }
        }
        if hat.sample_counted(t, &mut OpCount::default()) != remaining {
            return Err(ExperimentError::OracleMismatch {
                n_bits,
                clock: t,
                context: "reduced hat vs sum of remaining product strings",
            });
        }
    }
    Ok(OracleEquivalenceReport {
        n_bits,
        clocks_checked: clocks,
        drawn,
    })
}

/// Instrumented per-clock arithmetic for the three protocol stages, plus the
/// exact-sample word width. Ops scale linearly with the bit count and each
/// op handles a word whose width also grows with the bit count; the product
/// is the quadratic hardware proxy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpCountReport {
    pub n_bits: u32,
    /// One universe evaluation: `N` adds, `N - 1` muls.
    pub universe: OpCount,
    /// Incremental cost of one drawn number at one clock: the product
    /// string plus its subtraction.
    pub draw: OpCount,
    /// One single-draw decision clock on the decider's side: a universe
    /// plus the two hat differences.
    pub decision_clock: OpCount,
    /// Bits needed for the widest sample numerator, `3^N`.
    pub word_bits: u64,
}

impl OpCountReport {
    /// Total per-clock arithmetic across set-up, drawing, and decision.
    pub fn per_clock_arithmetic(&self) -> u64 {
        self.universe.arithmetic() + self.draw.arithmetic() + self.decision_clock.arithmetic()
    }
}

/// Count the arithmetic one protocol clock costs at the given width.
pub fn op_count_report(n_bits: u32) -> Result<OpCountReport, ExperimentError> {
    let sys = ReferenceSystem::new(n_bits, 0x0c0)?;
    let t = 1;

    let mut universe = OpCount::default();
    sys.universe_sample_counted(t, &mut universe);

    let (mut hat, _) = setup_hats(sys);
    hat.draw(1)?;
    let mut hat_ops = OpCount::default();
    hat.sample_counted(t, &mut hat_ops);
    let draw = OpCount {
        adds: hat_ops.adds - universe.adds,
        muls: hat_ops.muls - universe.muls,
        stream_samples: hat_ops.stream_samples - universe.stream_samples,
    };

    let mut decision_clock = OpCount::default();
    sys.universe_sample_counted(t, &mut decision_clock);
    // Two subtractions form the per-hat differences.
    decision_clock.adds += 2;

    Ok(OpCountReport {
        n_bits,
        universe,
        draw,
        decision_clock,
        word_bits: BigUint::from(3u8).pow(n_bits).bits(),
    })
}
