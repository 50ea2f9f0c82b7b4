//! Reference generation schemes for the binary two-way family, with
//! closed-form rates and stage parsing.
//!
//! Conventions shared by all schemes (terminal 1 = Alice, terminal 2 =
//! Bob): symbols are bits, indices are 0-based, and every strategy is a
//! deterministic function of the terminal's own received history.
//!
//! * `case_i_naive` (params 0,0,0,1/2): Alice pins x1 = 1 so Bob's
//!   channel is noisy only while he sends 1. Bob starts with 1 and
//!   echoes what he receives until the first 0, which he relays and
//!   then goes silent. Bits received by Bob up to and including the
//!   first 0 count as generated; they are agreed once the 0 has been
//!   relayed (so within a block of n steps the 0 must land by step
//!   n-1).
//! * `case_i_adaptive` (same params): Bob echoes received bits, which
//!   simultaneously relays them to Alice and keeps his channel open; a
//!   received 0 is relayed and the next step restarts the echo with 1.
//!   A run of N coin flips plus the relay step forms a stage of N+1
//!   steps carrying N agreed bits. Labels take the first B = floor(.58 n)
//!   agreed bits; fewer than B agreed yields the error label.
//! * `case_ii` (params 1/2,1/2,0,1/2): Bob pins x2 = 0 which makes his
//!   receive channel noiseless while Alice receives fresh fair bits;
//!   Alice relays each received bit the following step. Labels are
//!   Alice's first n-1 received bits and Bob's last n-1 received bits.
//! * `case_iii_v1` (params 0,1/2,0,1/2): 2-step cycles. Alice sends 1
//!   to draw a fair bit, then relays it through Bob's noiseless
//!   receive channel (Bob always sends 0). One agreed bit per cycle.
//! * `case_iii_v2` (same params): 3-step cycles. Both send 1 and each
//!   draws a fair bit; Alice relays hers while Bob opens his receive
//!   channel with 0; then roles swap. Two agreed bits per cycle.
//! * `case_iv` (params 0,0,q1,q2): Alice pins x1 = 0; Bob feeds back
//!   y2 with delay two (x2 starts 0,0). Alice reads Bob's outputs
//!   noiselessly, so phi = y1[2..] equals psi = y2[..n-2]; the agreed
//!   sequence is a two-state chain whose per-step entropy is
//!   markov2_entropy_rate(q1,q2).

use crate::channel::{BscTwoWayParams, ChannelError, RdChannel};
use crate::infomeasures::{markov2_entropy_rate, plugin_conditional_entropy, MeasureError};
use crate::simulator::{CrOutcome, Label, SessionTrace, Strategy, Symbol};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const PARAM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("unknown protocol id {0:?}")]
    UnknownId(String),
    #[error("{id} requires channel parameters (p1,p2,q1,q2) = {expected}, got ({got:?})")]
    ParamMismatch {
        id: ProtocolId,
        expected: &'static str,
        got: (f64, f64, f64, f64),
    },
    #[error("block length {n} incompatible with {id}: {reason}")]
    BadBlockLength {
        id: ProtocolId,
        n: usize,
        reason: &'static str,
    },
    #[error("trace does not parse as a {id} trace: {detail}")]
    TraceMismatch { id: ProtocolId, detail: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProtocolId {
    CaseINaive,
    CaseIAdaptive,
    CaseII,
    CaseIIIV1,
    CaseIIIV2,
    CaseIV,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 6] = [
        ProtocolId::CaseINaive,
        ProtocolId::CaseIAdaptive,
        ProtocolId::CaseII,
        ProtocolId::CaseIIIV1,
        ProtocolId::CaseIIIV2,
        ProtocolId::CaseIV,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolId::CaseINaive => "case_i_naive",
            ProtocolId::CaseIAdaptive => "case_i_adaptive",
            ProtocolId::CaseII => "case_ii",
            ProtocolId::CaseIIIV1 => "case_iii_v1",
            ProtocolId::CaseIIIV2 => "case_iii_v2",
            ProtocolId::CaseIV => "case_iv",
        }
    }

    /// The fixed channel parameters the scheme is designed for, or
    /// `None` when the scheme takes free parameters (`case_iv`).
    pub fn canonical_params(&self) -> Option<BscTwoWayParams> {
        let p = |p1, p2, q1, q2| BscTwoWayParams::new(p1, p2, q1, q2).unwrap();
        match self {
            ProtocolId::CaseINaive | ProtocolId::CaseIAdaptive => Some(p(0.0, 0.0, 0.0, 0.5)),
            ProtocolId::CaseII => Some(p(0.5, 0.5, 0.0, 0.5)),
            ProtocolId::CaseIIIV1 | ProtocolId::CaseIIIV2 => Some(p(0.0, 0.5, 0.0, 0.5)),
            ProtocolId::CaseIV => None,
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ProtocolError::UnknownId(s.to_string()))
    }
}

/// A scheme bound to its channel parameters and block length, with the
/// derived bit budget B (labels live in [1 : 2^B]).
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub id: ProtocolId,
    pub params: BscTwoWayParams,
    pub n: usize,
    bit_budget: usize,
}

impl ProtocolSpec {
    pub fn new(
        id: ProtocolId,
        params: BscTwoWayParams,
        n: usize,
    ) -> Result<Self, ProtocolError> {
        let got = (params.p1, params.p2, params.q1, params.q2);
        let close = |a: f64, b: f64| (a - b).abs() <= PARAM_TOL;
        let expected: &'static str = match id {
            ProtocolId::CaseINaive | ProtocolId::CaseIAdaptive => "(0, 0, 0, 1/2)",
            ProtocolId::CaseII => "(1/2, 1/2, 0, 1/2)",
            ProtocolId::CaseIIIV1 | ProtocolId::CaseIIIV2 => "(0, 1/2, 0, 1/2)",
            ProtocolId::CaseIV => "(0, 0, q1, q2)",
        };
        let ok = match id {
            ProtocolId::CaseIV => close(params.p1, 0.0) && close(params.p2, 0.0),
            _ => {
                let want = id.canonical_params().unwrap();
                close(params.p1, want.p1)
                    && close(params.p2, want.p2)
                    && close(params.q1, want.q1)
                    && close(params.q2, want.q2)
            }
        };
        if !ok {
            return Err(ProtocolError::ParamMismatch { id, expected, got });
        }
        let err = |reason| ProtocolError::BadBlockLength { id, n, reason };
        let bit_budget = match id {
            ProtocolId::CaseINaive => {
                if n < 1 {
                    return Err(err("need at least one step"));
                }
                n - 1
            }
            ProtocolId::CaseIAdaptive => {
                if n < 2 {
                    return Err(err("need at least one generate step plus one relay step"));
                }
                58 * n / 100
            }
            ProtocolId::CaseII => {
                if n < 2 {
                    return Err(err("need at least one generate step plus one relay step"));
                }
                n - 1
            }
            ProtocolId::CaseIIIV1 => {
                if n < 2 || n % 2 != 0 {
                    return Err(err("block length must be a positive multiple of 2"));
                }
                n / 2
            }
            ProtocolId::CaseIIIV2 => {
                if n < 3 || n % 3 != 0 {
                    return Err(err("block length must be a positive multiple of 3"));
                }
                2 * n / 3
            }
            ProtocolId::CaseIV => {
                if n < 3 {
                    return Err(err("need at least three steps for the delay-2 feedback"));
                }
                n - 2
            }
        };
        Ok(Self {
            id,
            params,
            n,
            bit_budget,
        })
    }

    /// Number of label bits B; the label set is [1 : 2^B].
    pub fn bit_budget(&self) -> usize {
        self.bit_budget
    }

    /// K = 2^B when it fits in u128.
    pub fn label_space(&self) -> Option<u128> {
        (self.bit_budget <= 127).then(|| 1u128 << self.bit_budget)
    }

    /// The channel instance this scheme is designed for.
    pub fn channel(&self) -> RdChannel {
        RdChannel::from_bsc_params(self.params)
    }

    /// Build a fresh strategy pair for one session.
    pub fn build(&self) -> (Box<dyn Strategy>, Box<dyn Strategy>) {
        let n = self.n;
        let b = self.bit_budget;
        match self.id {
            ProtocolId::CaseINaive => (
                Box::new(ConstantSender::new(1, NaiveAliceFinalizer { n, b })),
                Box::new(NaiveBob::new(n, b)),
            ),
            ProtocolId::CaseIAdaptive => (
                Box::new(ConstantSender::new(1, AdaptiveAliceFinalizer { n, b })),
                Box::new(AdaptiveBob::new(n, b)),
            ),
            ProtocolId::CaseII => (
                Box::new(CaseIIAlice::new(n)),
                Box::new(ConstantSender::new(0, CaseIIBobFinalizer { n })),
            ),
            ProtocolId::CaseIIIV1 => (
                Box::new(CaseIIIV1Alice::new(n)),
                Box::new(ConstantSender::new(0, CaseIIIV1BobFinalizer { n })),
            ),
            ProtocolId::CaseIIIV2 => (
                Box::new(CaseIIIV2Alice::new(n)),
                Box::new(CaseIIIV2Bob::new(n)),
            ),
            ProtocolId::CaseIV => (
                Box::new(ConstantSender::new(0, CaseIVAliceFinalizer { n })),
                Box::new(CaseIVBob::new(n)),
            ),
        }
    }

    /// Closed-form rate of the scheme in bits per step: the truncated
    /// geometric mean for the naive scheme, the stage-ratio limit for
    /// the adaptive one, (n-1)/n, 1/2, 2/3, and the feedback-chain
    /// entropy rate scaled by (n-2)/n.
    pub fn theoretical_rate(&self) -> Result<f64, ProtocolError> {
        let n = self.n as f64;
        Ok(match self.id {
            ProtocolId::CaseINaive => naive_expected_bits(self.n) / n,
            ProtocolId::CaseIAdaptive => adaptive_stage_rate_limit(),
            ProtocolId::CaseII => (n - 1.0) / n,
            ProtocolId::CaseIIIV1 => 0.5,
            ProtocolId::CaseIIIV2 => 2.0 / 3.0,
            ProtocolId::CaseIV => {
                markov2_entropy_rate(self.params.q1, self.params.q2)? * (n - 2.0) / n
            }
        })
    }
}

/// Truncated mean sum_{i=1..n} i 2^-i of bits generated by the naive
/// scheme in n steps.
pub fn naive_expected_bits(n: usize) -> f64 {
    let mut total = 0.0;
    let mut pow = 1.0;
    for i in 1..=n {
        pow *= 0.5;
        let term = i as f64 * pow;
        total += term;
        if term < 1e-18 {
            break;
        }
    }
    total
}

/// Partial sum of sum_{j>=1} j/(j+1) 2^-j after `terms` terms.
pub fn adaptive_stage_rate_partial_sum(terms: usize) -> f64 {
    let mut total = 0.0;
    let mut pow = 1.0;
    for j in 1..=terms {
        pow *= 0.5;
        total += j as f64 / (j as f64 + 1.0) * pow;
    }
    total
}

/// The stage-ratio limit of the adaptive scheme, summed to machine
/// precision.
pub fn adaptive_stage_rate_limit() -> f64 {
    let mut total = 0.0;
    let mut pow = 1.0;
    for j in 1..200 {
        pow *= 0.5;
        let term = j as f64 / (j as f64 + 1.0) * pow;
        total += term;
        if term < f64::EPSILON * total {
            break;
        }
    }
    total
}

// ---------------------------------------------------------------------
// Strategy building blocks
// ---------------------------------------------------------------------

trait Finalizer: Send {
    fn label(&self, received: &[Symbol]) -> Label;
}

/// Emits one constant symbol every step; the label is delegated.
struct ConstantSender<F: Finalizer> {
    symbol: Symbol,
    finalizer: F,
}

impl<F: Finalizer> ConstantSender<F> {
    fn new(symbol: Symbol, finalizer: F) -> Self {
        Self { symbol, finalizer }
    }
}

impl<F: Finalizer> Strategy for ConstantSender<F> {
    fn next_input(&mut self, _last: Option<Symbol>) -> Symbol {
        self.symbol
    }
    fn finalize(&self, received: &[Symbol]) -> Label {
        self.finalizer.label(received)
    }
}

fn padded_label(mut bits: Vec<u8>, budget: usize) -> Label {
    bits.resize(budget, 0);
    Label::from_bits(&bits)
}

// -- case i, naive ------------------------------------------------------

/// Bob: start with 1, echo until the first received 0 has been echoed,
/// then send 0 forever.
struct NaiveBob {
    relayed_zero: bool,
    n: usize,
    b: usize,
}

impl NaiveBob {
    fn new(n: usize, b: usize) -> Self {
        Self {
            relayed_zero: false,
            n,
            b,
        }
    }
}

impl Strategy for NaiveBob {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        match last {
            None => 1,
            Some(_) if self.relayed_zero => 0,
            Some(bit) => {
                if bit == 0 {
                    self.relayed_zero = true;
                }
                bit
            }
        }
    }

    fn finalize(&self, received: &[Symbol]) -> Label {
        // Bits y2[0..=m] where m is the first zero; agreed only if the
        // zero could be relayed within the block (m <= n-2).
        match received.iter().position(|&b| b == 0) {
            Some(m) if m + 1 <= self.n - 1 => {
                padded_label(received[..=m].to_vec(), self.b)
            }
            _ => Label::Error,
        }
    }
}

struct NaiveAliceFinalizer {
    n: usize,
    b: usize,
}

impl Finalizer for NaiveAliceFinalizer {
    fn label(&self, received: &[Symbol]) -> Label {
        // Alice reads Bob's inputs directly (y1 = x2); the echoed
        // stream y1[1..=r] equals Bob's bits once the relayed zero
        // arrives at position r.
        match received.iter().skip(1).position(|&b| b == 0) {
            Some(off) => {
                let r = off + 1;
                debug_assert!(r <= self.n - 1);
                padded_label(received[1..=r].to_vec(), self.b)
            }
            None => Label::Error,
        }
    }
}

/// Bits generated by a naive-scheme session: the position (1-based) of
/// the first 0 Bob received, or 0 if none arrived within the block.
pub fn naive_bits_generated(trace: &SessionTrace) -> usize {
    trace.y2.iter().position(|&b| b == 0).map_or(0, |m| m + 1)
}

// -- case i, adaptive ---------------------------------------------------

/// Bob: echo while collecting; after echoing a 0 restart with 1.
struct AdaptiveBob {
    last_sent: Symbol,
    started: bool,
    n: usize,
    b: usize,
}

impl AdaptiveBob {
    fn new(n: usize, b: usize) -> Self {
        Self {
            last_sent: 1,
            started: false,
            n,
            b,
        }
    }
}

impl Strategy for AdaptiveBob {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        let out = match last {
            None => 1,
            Some(bit) => {
                if self.last_sent == 1 {
                    bit
                } else {
                    1
                }
            }
        };
        self.started = true;
        self.last_sent = out;
        out
    }

    fn finalize(&self, received: &[Symbol]) -> Label {
        let bits = adaptive_bits_from_y2(received, self.n);
        if bits.len() < self.b {
            Label::Error
        } else {
            Label::from_bits(&bits[..self.b])
        }
    }
}

/// Agreed bits seen from Bob's side: fresh bits arrive while his
/// channel is open (the step after an open step stays open iff the bit
/// was 1; the step after a relay step reopens); a bit collected at the
/// final step cannot be relayed and is dropped.
fn adaptive_bits_from_y2(y2: &[Symbol], n: usize) -> Vec<u8> {
    let mut bits = Vec::new();
    let mut open = true;
    for j in 0..n {
        if open && j + 1 <= n - 1 {
            bits.push(y2[j]);
        }
        open = if open { y2[j] == 1 } else { true };
    }
    bits
}

struct AdaptiveAliceFinalizer {
    n: usize,
    b: usize,
}

impl Finalizer for AdaptiveAliceFinalizer {
    fn label(&self, received: &[Symbol]) -> Label {
        // y1 mirrors Bob's inputs exactly; a step was open iff Bob sent
        // 1, and the bit he collected there is what he sends next.
        let mut bits = Vec::new();
        for j in 0..self.n - 1 {
            if received[j] == 1 {
                bits.push(received[j + 1]);
            }
        }
        if bits.len() < self.b {
            Label::Error
        } else {
            Label::from_bits(&bits[..self.b])
        }
    }
}

// -- case ii -------------------------------------------------------------

/// Alice: fixed first input, then relay the previously received bit.
struct CaseIIAlice {
    n: usize,
}

impl CaseIIAlice {
    fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Strategy for CaseIIAlice {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        last.unwrap_or(0)
    }
    fn finalize(&self, received: &[Symbol]) -> Label {
        Label::from_bits(&received[..self.n - 1])
    }
}

struct CaseIIBobFinalizer {
    n: usize,
}

impl Finalizer for CaseIIBobFinalizer {
    fn label(&self, received: &[Symbol]) -> Label {
        Label::from_bits(&received[1..self.n])
    }
}

// -- case iii, v1 ---------------------------------------------------------

/// Alice: generate on even steps (send 1), relay on odd steps.
struct CaseIIIV1Alice {
    step: usize,
    pending: Symbol,
    n: usize,
}

impl CaseIIIV1Alice {
    fn new(n: usize) -> Self {
        Self {
            step: 0,
            pending: 0,
            n,
        }
    }
}

impl Strategy for CaseIIIV1Alice {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        let j = self.step;
        self.step += 1;
        if j % 2 == 0 {
            1
        } else {
            self.pending = last.unwrap_or(0);
            self.pending
        }
    }
    fn finalize(&self, received: &[Symbol]) -> Label {
        let bits: Vec<u8> = (0..self.n).step_by(2).map(|j| received[j]).collect();
        Label::from_bits(&bits)
    }
}

struct CaseIIIV1BobFinalizer {
    n: usize,
}

impl Finalizer for CaseIIIV1BobFinalizer {
    fn label(&self, received: &[Symbol]) -> Label {
        let bits: Vec<u8> = (1..self.n).step_by(2).map(|j| received[j]).collect();
        Label::from_bits(&bits)
    }
}

// -- case iii, v2 ---------------------------------------------------------

/// Alice: per 3-step cycle, generate (send 1), relay own bit, open the
/// lane (send 0).
struct CaseIIIV2Alice {
    step: usize,
    own_bit: Symbol,
    n: usize,
}

impl CaseIIIV2Alice {
    fn new(n: usize) -> Self {
        Self {
            step: 0,
            own_bit: 0,
            n,
        }
    }
}

impl Strategy for CaseIIIV2Alice {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        let j = self.step;
        self.step += 1;
        match j % 3 {
            0 => 1,
            1 => {
                self.own_bit = last.unwrap_or(0);
                self.own_bit
            }
            _ => 0,
        }
    }
    fn finalize(&self, received: &[Symbol]) -> Label {
        let mut bits = Vec::with_capacity(2 * self.n / 3);
        for c in (0..self.n).step_by(3) {
            bits.push(received[c]); // own generated bit
            bits.push(received[c + 2]); // partner's relayed bit
        }
        Label::from_bits(&bits)
    }
}

/// Bob: per cycle, generate (send 1), open the lane (send 0) while
/// remembering his bit, then relay it.
struct CaseIIIV2Bob {
    step: usize,
    own_bit: Symbol,
    n: usize,
}

impl CaseIIIV2Bob {
    fn new(n: usize) -> Self {
        Self {
            step: 0,
            own_bit: 0,
            n,
        }
    }
}

impl Strategy for CaseIIIV2Bob {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        let j = self.step;
        self.step += 1;
        match j % 3 {
            0 => 1,
            1 => {
                self.own_bit = last.unwrap_or(0);
                0
            }
            _ => self.own_bit,
        }
    }
    fn finalize(&self, received: &[Symbol]) -> Label {
        let mut bits = Vec::with_capacity(2 * self.n / 3);
        for c in (0..self.n).step_by(3) {
            bits.push(received[c + 1]); // partner's relayed bit
            bits.push(received[c]); // own generated bit
        }
        Label::from_bits(&bits)
    }
}

// -- case iv ---------------------------------------------------------------

struct CaseIVAliceFinalizer {
    n: usize,
}

impl Finalizer for CaseIVAliceFinalizer {
    fn label(&self, received: &[Symbol]) -> Label {
        Label::from_bits(&received[2..self.n])
    }
}

/// Bob: feed back his received symbol with delay two (first two inputs
/// are 0).
struct CaseIVBob {
    prev: Option<Symbol>,
    prev2: Option<Symbol>,
    n: usize,
}

impl CaseIVBob {
    fn new(n: usize) -> Self {
        Self {
            prev: None,
            prev2: None,
            n,
        }
    }
}

impl Strategy for CaseIVBob {
    fn next_input(&mut self, last: Option<Symbol>) -> Symbol {
        self.prev2 = self.prev;
        self.prev = last;
        self.prev2.unwrap_or(0)
    }
    fn finalize(&self, received: &[Symbol]) -> Label {
        Label::from_bits(&received[..self.n - 2])
    }
}

/// The agreed bit sequence of a case_iv session (Bob's view).
pub fn case_iv_agreed_bits(trace: &SessionTrace) -> &[Symbol] {
    &trace.y2[..trace.n - 2]
}

// ---------------------------------------------------------------------
// Stage parsing and empirical rates
// ---------------------------------------------------------------------

/// One completed stage of the adaptive scheme: `length` = N+1 steps of
/// which `bits` = N carried agreed bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage_index: usize,
    pub length: usize,
    pub bits: usize,
}

impl StageRecord {
    pub fn z(&self) -> f64 {
        self.bits as f64 / self.length as f64
    }
}

/// Parse adaptive-scheme traces into completed stages and return them
/// with the empirical mean of N/(N+1). Incomplete trailing stages are
/// dropped. Traces whose inputs are inconsistent with the echo/restart
/// rule are rejected.
pub fn stage_statistics(
    traces: &[SessionTrace],
) -> Result<(Vec<StageRecord>, f64), ProtocolError> {
    let id = ProtocolId::CaseIAdaptive;
    let mut records = Vec::new();
    for trace in traces {
        let n = trace.n;
        // Verify the trace against the echo/restart rule.
        let mut expected: Symbol = 1;
        for j in 0..n {
            if trace.x2[j] != expected {
                return Err(ProtocolError::TraceMismatch {
                    id,
                    detail: format!(
                        "input x2[{j}] = {} but the echo rule requires {expected}",
                        trace.x2[j]
                    ),
                });
            }
            expected = if trace.x2[j] == 1 { trace.y2[j] } else { 1 };
        }
        let mut start = 0usize;
        let mut j = 0usize;
        while j < n {
            if trace.y2[j] == 0 {
                // Stage completes only if the relay step fits.
                if j + 1 <= n - 1 {
                    records.push(StageRecord {
                        stage_index: records.len(),
                        length: j - start + 2,
                        bits: j - start + 1,
                    });
                }
                j += 2; // skip the relay step
                start = j;
            } else {
                j += 1;
            }
        }
    }
    let mean = if records.is_empty() {
        0.0
    } else {
        records.iter().map(StageRecord::z).sum::<f64>() / records.len() as f64
    };
    Ok((records, mean))
}

/// Write stage records as CSV with columns stage_index, N, Z.
pub fn write_stages_csv<W: std::io::Write>(
    mut w: W,
    records: &[StageRecord],
) -> std::io::Result<()> {
    writeln!(w, "stage_index,N,Z")?;
    for r in records {
        writeln!(w, "{},{},{}", r.stage_index, r.bits, r.z())?;
    }
    Ok(())
}

/// An empirical rate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_err: f64,
}

fn mean_se(values: &[f64]) -> RateEstimate {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
    RateEstimate {
        mean,
        std_err: (var / m).sqrt(),
    }
}

/// Empirical bits-per-step of a batch of sessions, measured the way
/// each scheme accounts for its randomness: generated-bit count for the
/// naive scheme, the per-stage ratio for the adaptive one, agreed label
/// bits for the fixed-length schemes, and the plug-in entropy of the
/// agreed sequence for the feedback scheme.
pub fn empirical_rate(
    spec: &ProtocolSpec,
    traces: &[SessionTrace],
    outcomes: &[CrOutcome],
) -> Result<RateEstimate, ProtocolError> {
    let n = spec.n as f64;
    match spec.id {
        ProtocolId::CaseINaive => {
            let rates: Vec<f64> = traces
                .iter()
                .map(|t| naive_bits_generated(t) as f64 / n)
                .collect();
            Ok(mean_se(&rates))
        }
        ProtocolId::CaseIAdaptive => {
            let (records, _) = stage_statistics(traces)?;
            let zs: Vec<f64> = records.iter().map(StageRecord::z).collect();
            Ok(mean_se(&zs))
        }
        ProtocolId::CaseII | ProtocolId::CaseIIIV1 | ProtocolId::CaseIIIV2 => {
            let sessions = outcomes.len() as f64;
            let agreed = outcomes
                .iter()
                .filter(|o| !o.phi.is_error() && o.phi == o.psi)
                .count() as f64;
            let p = agreed / sessions;
            let per_session = spec.bit_budget as f64 / n;
            Ok(RateEstimate {
                mean: p * per_session,
                std_err: per_session * (p * (1.0 - p) / sessions).sqrt(),
            })
        }
        ProtocolId::CaseIV => {
            let per_trace: Vec<f64> = traces
                .iter()
                .map(|t| {
                    plugin_conditional_entropy(case_iv_agreed_bits(t), 2) * (n - 2.0) / n
                })
                .collect();
            Ok(mean_se(&per_trace))
        }
    }
}
