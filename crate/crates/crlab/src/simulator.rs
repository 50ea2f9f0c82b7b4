//! Deterministic interactive strategies run over a channel for a block
//! of steps, label extraction, and empirical statistics for the
//! near-uniform agreement criterion plus its entropy-inequality audit.

use crate::channel::{ChannelError, RdChannel};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use thiserror::Error;

pub type Symbol = u8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("terminal {terminal} emitted symbol {symbol} outside its alphabet of size {alphabet} at step {step}")]
    ProtocolViolation {
        terminal: u8,
        step: usize,
        symbol: usize,
        alphabet: usize,
    },
    #[error("session must run for at least one step")]
    EmptySession,
    #[error("no outcomes to evaluate")]
    NoOutcomes,
    #[error("label space size must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("malformed outcome dump at line {line}: {detail}")]
    DumpFormat { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A common-randomness label: an index into [1:K] or the error symbol.
/// Values are held 0-based; labels wider than 127 bits keep their raw
/// digit string instead.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Error,
    Value(u128),
    Wide(Box<[u8]>),
}

impl Label {
    /// Pack a big-endian digit string of bits into a label.
    pub fn from_bits(bits: &[u8]) -> Label {
        if bits.len() <= 127 {
            let mut v: u128 = 0;
            for &b in bits {
                v = (v << 1) | u128::from(b & 1);
            }
            Label::Value(v)
        } else {
            Label::Wide(bits.into())
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Label::Error)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Error => write!(f, "e"),
            // 1-based index, matching the label set [1:K].
            Label::Value(v) => write!(f, "{}", v + 1),
            Label::Wide(bits) => {
                write!(f, "s:")?;
                for b in bits.iter() {
                    write!(f, "{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "e" {
            return Ok(Label::Error);
        }
        if let Some(rest) = s.strip_prefix("s:") {
            let bits: Result<Vec<u8>, _> = rest
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or(()))
                .collect();
            return bits
                .map(|b| Label::Wide(b.into()))
                .map_err(|_| format!("bad digit string {s:?}"));
        }
        let idx: u128 = s.parse().map_err(|_| format!("bad label {s:?}"))?;
        if idx == 0 {
            return Err("label indices are 1-based".into());
        }
        Ok(Label::Value(idx - 1))
    }
}

/// A deterministic causal transmission strategy for one terminal: the
/// next input depends only on the terminal's own received history, and
/// the final label only on the full received block. Instances carry
/// per-session state; create a fresh pair per session.
pub trait Strategy: Send {
    /// Emit the next input symbol. `last_received` is the output
    /// observed in the previous step (`None` on the first step).
    fn next_input(&mut self, last_received: Option<Symbol>) -> Symbol;

    /// Map the full received block to a label.
    fn finalize(&self, received: &[Symbol]) -> Label;
}

/// Input/output sequences of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTrace {
    pub n: usize,
    pub x1: Vec<Symbol>,
    pub x2: Vec<Symbol>,
    pub y1: Vec<Symbol>,
    pub y2: Vec<Symbol>,
}

/// The pair of labels computed at the end of a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrOutcome {
    pub phi: Label,
    pub psi: Label,
}

/// Fixed per-session stream derivation: sessions of one run are seeded
/// by mixing the master seed with the session index, so serial and
/// parallel execution see identical streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream used by one session.
pub fn session_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Run one n-step session: at each step both terminals emit inputs
/// determined by their own past outputs, the channel samples the output
/// pair, and at the end each finalizer maps its received block to a
/// label.
pub fn run_session(
    ch: &RdChannel,
    s1: &mut dyn Strategy,
    s2: &mut dyn Strategy,
    n: usize,
    seed: u64,
) -> Result<(SessionTrace, CrOutcome), SimError> {
    if n == 0 {
        return Err(SimError::EmptySession);
    }
    let mut rng = session_rng(seed);
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    for k in 1..=n {
        let a = s1.next_input(y1.last().copied());
        let b = s2.next_input(y2.last().copied());
        if usize::from(a) >= ch.nx1() {
            return Err(SimError::ProtocolViolation {
                terminal: 1,
                step: k,
                symbol: a.into(),
                alphabet: ch.nx1(),
            });
        }
        if usize::from(b) >= ch.nx2() {
            return Err(SimError::ProtocolViolation {
                terminal: 2,
                step: k,
                symbol: b.into(),
                alphabet: ch.nx2(),
            });
        }
        let (o1, o2) = ch.step(a.into(), b.into(), &mut rng)?;
        x1.push(a);
        x2.push(b);
        y1.push(o1);
        y2.push(o2);
    }
    let phi = s1.finalize(&y1);
    let psi = s2.finalize(&y2);
    Ok((SessionTrace { n, x1, x2, y1, y2 }, CrOutcome { phi, psi }))
}

/// Run independent sessions (in parallel) and map each to a summary
/// value; results are ordered by session index regardless of schedule.
pub fn run_many_map<T, F, M>(
    ch: &RdChannel,
    factory: F,
    n: usize,
    sessions: usize,
    master_seed: u64,
    map: M,
) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn() -> (Box<dyn Strategy>, Box<dyn Strategy>) + Sync,
    M: Fn(usize, &SessionTrace, &CrOutcome) -> T + Sync,
{
    (0..sessions)
        .into_par_iter()
        .map(|i| {
            let (mut s1, mut s2) = factory();
            let (trace, outcome) = run_session(
                ch,
                s1.as_mut(),
                s2.as_mut(),
                n,
                derive_seed(master_seed, i as u64),
            )?;
            Ok(map(i, &trace, &outcome))
        })
        .collect()
}

/// Run independent sessions and keep only the outcomes.
pub fn run_many<F>(
    ch: &RdChannel,
    factory: F,
    n: usize,
    sessions: usize,
    master_seed: u64,
) -> Result<Vec<CrOutcome>, SimError>
where
    F: Fn() -> (Box<dyn Strategy>, Box<dyn Strategy>) + Sync,
{
    run_many_map(ch, factory, n, sessions, master_seed, |_, _, o| o.clone())
}

fn u128_string<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Empirical session statistics against the near-uniform agreement
/// criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CrStats {
    #[serde(serialize_with = "u128_string")]
    pub k: u128,
    pub n: usize,
    pub sessions: usize,
    /// Empirical Pr{phi = psi != e}.
    pub agree_prob: f64,
    /// Tightest lambda for which the per-label uniformity band and the
    /// disagreement bound hold on the empirical distribution.
    pub lambda_hat: f64,
    /// log2(K) / n, in bits per step.
    pub rate: f64,
    /// Counts per agreed label, ordered by label.
    pub label_histogram: Vec<(Label, u64)>,
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Evaluate outcomes against label space size `k`: empirical agreement
/// probability, the tightest empirical uniformity deviation, and the
/// nominal rate log2(k)/n.
pub fn evaluate(outcomes: &[CrOutcome], k: u128, n: usize) -> Result<CrStats, SimError> {
    if outcomes.is_empty() {
        return Err(SimError::NoOutcomes);
    }
    if k == 0 {
        return Err(SimError::InvalidK);
    }
    let sessions = outcomes.len();
    let mut hist: BTreeMap<Label, u64> = BTreeMap::new();
    let mut agreed = 0u64;
    for o in outcomes {
        if !o.phi.is_error() && o.phi == o.psi {
            agreed += 1;
            *hist.entry(o.phi.clone()).or_insert(0) += 1;
        }
    }
    let kf = k as f64;
    let total = sessions as f64;
    let agree_prob = agreed as f64 / total;
    let max_p = hist.values().copied().max().unwrap_or(0) as f64 / total;
    let distinct = hist.len() as u128;
    let min_p = if distinct < k {
        0.0
    } else {
        hist.values().copied().min().unwrap_or(0) as f64 / total
    };
    let lambda_hat = (kf * max_p - 1.0)
        .max(1.0 - kf * min_p)
        .max(1.0 - agree_prob);
    Ok(CrStats {
        k,
        n,
        sessions,
        agree_prob,
        lambda_hat,
        rate: kf.log2() / n as f64,
        label_histogram: hist.into_iter().collect(),
    })
}

/// One entropy inequality checked by the audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// True when lhs <= rhs (fano) or lhs >= rhs (the entropy lower
    /// bounds), within numerical slack.
    pub pass: bool,
}

/// Result of checking the Fano and uniformity entropy inequalities on
/// an empirical outcome distribution at a claimed lambda.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub lambda: f64,
    pub log2_k: f64,
    pub h_phi: f64,
    pub h_psi: f64,
    pub h_joint: f64,
    pub h_phi_given_psi: f64,
    pub h_psi_given_phi: f64,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl Serialize for AuditReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AuditReport", 9)?;
        st.serialize_field("lambda", &self.lambda)?;
        st.serialize_field("log2_k", &self.log2_k)?;
        st.serialize_field("h_phi", &self.h_phi)?;
        st.serialize_field("h_psi", &self.h_psi)?;
        st.serialize_field("h_joint", &self.h_joint)?;
        st.serialize_field("h_phi_given_psi", &self.h_phi_given_psi)?;
        st.serialize_field("h_psi_given_phi", &self.h_psi_given_phi)?;
        st.serialize_field("checks", &self.checks)?;
        st.serialize_field("all_pass", &self.all_pass())?;
        st.end()
    }
}

const AUDIT_SLACK: f64 = 1e-9;

/// Check the three entropy inequalities implied by near-uniform
/// agreement at level `lambda` on the empirical label distribution:
/// conditional entropies bounded by 1 + lambda log2 K, joint entropy at
/// least (1-lambda) log2 K - 1, and each marginal at least
/// (1-2 lambda) log2 K - 2.
pub fn converse_audit(
    outcomes: &[CrOutcome],
    k: u128,
    lambda: f64,
) -> Result<AuditReport, SimError> {
    if outcomes.is_empty() {
        return Err(SimError::NoOutcomes);
    }
    if k == 0 {
        return Err(SimError::InvalidK);
    }
    let total = outcomes.len() as f64;
    let mut joint: BTreeMap<(&Label, &Label), u64> = BTreeMap::new();
    let mut phi_m: BTreeMap<&Label, u64> = BTreeMap::new();
    let mut psi_m: BTreeMap<&Label, u64> = BTreeMap::new();
    for o in outcomes {
        *joint.entry((&o.phi, &o.psi)).or_insert(0) += 1;
        *phi_m.entry(&o.phi).or_insert(0) += 1;
        *psi_m.entry(&o.psi).or_insert(0) += 1;
    }
    let ent = |counts: &[u64]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total;
                -p * p.log2()
            })
            .sum()
    };
    let h_joint = ent(&joint.values().copied().collect::<Vec<_>>());
    let h_phi = ent(&phi_m.values().copied().collect::<Vec<_>>());
    let h_psi = ent(&psi_m.values().copied().collect::<Vec<_>>());
    let h_phi_given_psi = (h_joint - h_psi).max(0.0);
    let h_psi_given_phi = (h_joint - h_phi).max(0.0);
    let log2_k = (k as f64).log2();

    let fano_lhs = h_psi_given_phi.max(h_phi_given_psi);
    let fano_rhs = 1.0 + lambda * log2_k;
    let joint_rhs = (1.0 - lambda) * log2_k - 1.0;
    let marg_lhs = h_phi.min(h_psi);
    let marg_rhs = (1.0 - 2.0 * lambda) * log2_k - 2.0;
    let checks = vec![
        AuditCheck {
            name: "fano_conditional_entropy",
            lhs: fano_lhs,
            rhs: fano_rhs,
            pass: fano_lhs <= fano_rhs + AUDIT_SLACK,
        },
        AuditCheck {
            name: "joint_entropy_lower_bound",
            lhs: h_joint,
            rhs: joint_rhs,
            pass: h_joint >= joint_rhs - AUDIT_SLACK,
        },
        AuditCheck {
            name: "marginal_entropy_lower_bound",
            lhs: marg_lhs,
            rhs: marg_rhs,
            pass: marg_lhs >= marg_rhs - AUDIT_SLACK,
        },
    ];
    Ok(AuditReport {
        lambda,
        log2_k,
        h_phi,
        h_psi,
        h_joint,
        h_phi_given_psi,
        h_psi_given_phi,
        checks,
    })
}

/// Write outcomes as CSV with columns session_id, phi, psi.
pub fn write_outcomes_csv<W: Write>(mut w: W, outcomes: &[CrOutcome]) -> std::io::Result<()> {
    writeln!(w, "session_id,phi,psi")?;
    for (i, o) in outcomes.iter().enumerate() {
        writeln!(w, "{i},{},{}", o.phi, o.psi)?;
    }
    Ok(())
}

/// Read an outcome dump written by [`write_outcomes_csv`].
pub fn read_outcomes_csv<R: BufRead>(r: R) -> Result<Vec<CrOutcome>, SimError> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "session_id,phi,psi" {
                return Err(SimError::DumpFormat {
                    line: 1,
                    detail: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let (_, phi, psi) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(SimError::DumpFormat {
                    line: lineno + 1,
                    detail: "expected three comma-separated fields".into(),
                })
            }
        };
        let parse = |s: &str| {
            Label::from_str(s.trim()).map_err(|detail| SimError::DumpFormat {
                line: lineno + 1,
                detail,
            })
        };
        out.push(CrOutcome {
            phi: parse(phi)?,
            psi: parse(psi)?,
        });
    }
    if out.is_empty() {
        return Err(SimError::DumpFormat {
            line: 0,
            detail: "dump contains no outcomes".into(),
        });
    }
    Ok(out)
}
