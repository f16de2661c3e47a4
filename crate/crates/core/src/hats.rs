//! Hat setup, draws, and the two decision procedures.
//!
//! A hat starts as the full universe and loses one product string per drawn
//! number. Deciders see hats only as pull-based sample streams plus the
//! shared reference system; nothing about real-time pacing is modeled.

use crate::dyadic::DyadicSample;
use crate::rtw::{self, OpCount, ReferenceSystem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Argument(#[from] rtw::Error),
    #[error("number {number} was already drawn from this hat")]
    DuplicateDraw { number: u64 },
    #[error("the two draw numbers must differ, both are {number}")]
    IdenticalNumbers { number: u64 },
    #[error("both hats match the reference universe: nothing was drawn")]
    NothingDrawn,
    #[error(
        "reference mismatch detected at clock {clock}: streams disagree with the shared system"
    )]
    ReferenceMismatch { clock: u64 },
}

/// Which physical hat a decision names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HatId {
    Hat1,
    Hat2,
}

impl std::fmt::Display for HatId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HatId::Hat1 => write!(f, "hat1"),
            HatId::Hat2 => write!(f, "hat2"),
        }
    }
}

/// Anything a decider can sample clock by clock.
pub trait SampleStream {
    fn sample_at(&self, t: u64) -> DyadicSample;
}

impl<F: Fn(u64) -> DyadicSample> SampleStream for F {
    fn sample_at(&self, t: u64) -> DyadicSample {
        self(t)
    }
}

/// A universe with zero or more numbers removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HatState {
    system: ReferenceSystem,
    removed: Vec<u64>,
}

impl HatState {
    /// A full hat: the intact universe.
    pub fn new(system: ReferenceSystem) -> Self {
        Self {
            system,
            removed: Vec::new(),
        }
    }

    pub fn system(&self) -> &ReferenceSystem {
        &self.system
    }

    pub fn removed(&self) -> &[u64] {
        &self.removed
    }

    /// Take `number` out by subtracting its product string from every
    /// future sample. Each number can be held only once.
    pub fn draw(&mut self, number: u64) -> Result<(), ProtocolError> {
        self.system.check_number(number)?;
        if self.removed.contains(&number) {
            return Err(ProtocolError::DuplicateDraw { number });
        }
        self.removed.push(number);
        Ok(())
    }

    /// Exact sample of the remaining superposition at clock `t`. Zero only
    /// possible at isolated clocks once something has been removed.
    pub fn sample_counted(&self, t: u64, ops: &mut OpCount) -> DyadicSample {
        let mut value = self.system.universe_sample_counted(t, ops);
        for &number in &self.removed {
            let g = self
                .system
                .product_sample_counted(number, t, ops)
                .expect("removed numbers were range-checked at draw time");
            value = &value - &g;
            ops.adds += 1;
        }
        value
    }
}

impl SampleStream for HatState {
    fn sample_at(&self, t: u64) -> DyadicSample {
        self.sample_counted(t, &mut OpCount::default())
    }
}

/// Two identical full hats over one shared reference system.
pub fn setup_hats(system: ReferenceSystem) -> (HatState, HatState) {
    (HatState::new(system), HatState::new(system))
}

/// Outcome of the one-number problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleDecision {
    pub deficient_hat: HatId,
    pub clocks_used: u64,
    /// The nonzero difference that revealed the deficient hat; always a
    /// product-string sample, magnitude `2^-r`.
    pub witness: DyadicSample,
}

/// Outcome of the two-number problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleDecision {
    pub hat1_missing: u64,
    pub hat2_missing: u64,
    pub clocks_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DoubleOutcome {
    Decided(DoubleDecision),
    /// Every tested clock left both differences zero. Only reachable when
    /// the two numbers have equal zero-bit counts.
    Undecided {
        clocks_exhausted: u64,
    },
}

// A stream from a system of a different width cannot share the reference.
fn checked_scale(
    sample: DyadicSample,
    bob: &ReferenceSystem,
    clock: u64,
) -> Result<DyadicSample, ProtocolError> {
    if sample.scale() != bob.n_bits() {
        return Err(ProtocolError::ReferenceMismatch { clock });
    }
    Ok(sample)
}

/// Identify the hat missing a number, given that exactly one number was
/// drawn from one hat.
///
/// The decider regenerates the intact universe and compares it against both
/// hats at clock 1. The deficient hat differs by a product string, which is
/// never zero in the asymmetric scheme, so one clock always suffices. A
/// zero difference marks the intact hat; both comparisons run so that a
/// mismatched reference is detected instead of silently misread.
pub fn decide_single_draw(
    bob: &ReferenceSystem,
    hat1: &impl SampleStream,
    hat2: &impl SampleStream,
) -> Result<SingleDecision, ProtocolError> {
    let t = 1;
    let universe = bob.universe_sample(t);
    let sample1 = checked_scale(hat1.sample_at(t), bob, t)?;
    let sample2 = checked_scale(hat2.sample_at(t), bob, t)?;
    let d1 = &universe - &sample1;
    let d2 = &universe - &sample2;
    match (d1.is_zero(), d2.is_zero()) {
        (true, true) => Err(ProtocolError::NothingDrawn),
        (false, false) => Err(ProtocolError::ReferenceMismatch { clock: t }),
        (true, false) => Ok(SingleDecision {
            deficient_hat: HatId::Hat2,
            clocks_used: t,
            witness: d2,
        }),
        (false, true) => Ok(SingleDecision {
            deficient_hat: HatId::Hat1,
            clocks_used: t,
            witness: d1,
        }),
    }
}

/// Assign the two announced numbers `p` and `q` to the hats they were
/// drawn from.
///
/// Per clock the decider builds its own two reduced universes (universe
/// minus `p`, universe minus `q`) and subtracts each from the first hat's
/// sample. The matching reduction is identically zero; the other difference
/// is the gap between the two product strings, which vanishes at a clock
/// with probability 1/2 when the zero-bit counts agree and never otherwise.
/// The first nonzero difference settles the assignment without error; if
/// every clock up to `max_clocks` is silent the run is inconclusive.
pub fn decide_double_draw(
    bob: &ReferenceSystem,
    p: u64,
    q: u64,
    hat1: &impl SampleStream,
    hat2: &impl SampleStream,
    max_clocks: u64,
) -> Result<DoubleOutcome, ProtocolError> {
    bob.check_number(p)?;
    bob.check_number(q)?;
    if p == q {
        return Err(ProtocolError::IdenticalNumbers { number: p });
    }
    for t in 1..=max_clocks {
        let universe = bob.universe_sample(t);
        let reduced_p = &universe - &bob.product_sample(p, t)?;
        let reduced_q = &universe - &bob.product_sample(q, t)?;
        let sample1 = checked_scale(hat1.sample_at(t), bob, t)?;
        let d_p = &sample1 - &reduced_p;
        let d_q = &sample1 - &reduced_q;
        let (hat1_missing, hat2_missing, cross) = match (d_p.is_zero(), d_q.is_zero()) {
            (true, true) => continue,
            // Hat 1 differs from the p-reduction only: it lost q.
            (false, true) => (q, p, reduced_p),
            (true, false) => (p, q, reduced_q),
            (false, false) => return Err(ProtocolError::ReferenceMismatch { clock: t }),
        };
        // The other hat must hold the complementary reduction.
        let sample2 = checked_scale(hat2.sample_at(t), bob, t)?;
        if &sample2 - &cross != DyadicSample::zero(bob.n_bits()) {
            return Err(ProtocolError::ReferenceMismatch { clock: t });
        }
        return Ok(DoubleOutcome::Decided(DoubleDecision {
            hat1_missing,
            hat2_missing,
            clocks_used: t,
        }));
    }
    Ok(DoubleOutcome::Undecided {
        clocks_exhausted: max_clocks,
    })
}
