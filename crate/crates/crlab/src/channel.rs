//! Two-way channels whose output pair law factors as
//! p(y1|x1,x2) * p(y2|x1,x2), stored as dense conditional kernels over
//! tiny finite alphabets, plus the four-parameter binary family used by
//! the reference generation schemes.

use crate::bounds::AuxDist;
use crate::infomeasures::{JointTable, MeasureError, MASS_TOL};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("parameter {name} = {value} outside [0, 1/2]")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("invalid channel kernels:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("kernel shape error: {0}")]
    KernelShape(String),
    #[error("terminal {terminal} input symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange {
        terminal: u8,
        symbol: usize,
        alphabet: usize,
    },
    #[error("auxiliary distribution is over input alphabets ({aux_nx1}, {aux_nx2}) but channel has ({nx1}, {nx2})")]
    AuxMismatch {
        aux_nx1: usize,
        aux_nx2: usize,
        nx1: usize,
        nx2: usize,
    },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Which conditional kernel a validation violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelId {
    W1,
    W2,
}

/// One conditional row that fails the probability-vector invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kernel: KernelId,
    pub x1: usize,
    pub x2: usize,
    pub detail: String,
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| {
            format!(
                "  {:?} row (x1={}, x2={}): {}",
                v.kernel, v.x1, v.x2, v.detail
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Crossover probabilities of the binary two-way family: the forward
/// output copies the partner input through a BSC whose flip probability
/// is selected by the sender's own input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BscTwoWayParams {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl BscTwoWayParams {
    pub fn new(p1: f64, p2: f64, q1: f64, q2: f64) -> Result<Self, ChannelError> {
        for (name, value) in [("p1", p1), ("p2", p2), ("q1", q1), ("q2", q2)] {
            if !(0.0..=0.5).contains(&value) {
                return Err(ChannelError::ParamOutOfRange { name, value });
            }
        }
        Ok(Self { p1, p2, q1, q2 })
    }
}

/// A two-way channel with conditionally independent outputs: kernels
/// w1 = p(y1|x1,x2) and w2 = p(y2|x1,x2) stored dense, indexed
/// (x1, x2, y). Immutable after construction and safe to share across
/// threads; sampling takes a caller-supplied random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RdChannel {
    nx1: usize,
    nx2: usize,
    ny1: usize,
    ny2: usize,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl RdChannel {
    /// Build from dense kernels, validating and exactly renormalizing
    /// every conditional row. Rows further than [`MASS_TOL`] from a
    /// probability vector are reported per (x1, x2) index.
    pub fn from_kernels(
        nx1: usize,
        nx2: usize,
        ny1: usize,
        ny2: usize,
        w1: Vec<f64>,
        w2: Vec<f64>,
    ) -> Result<Self, ChannelError> {
        if nx1 == 0 || nx2 == 0 || ny1 == 0 || ny2 == 0 {
            return Err(ChannelError::KernelShape(
                "alphabet sizes must be at least 1".into(),
            ));
        }
        if w1.len() != nx1 * nx2 * ny1 {
            return Err(ChannelError::KernelShape(format!(
                "w1 has {} entries, expected {}",
                w1.len(),
                nx1 * nx2 * ny1
            )));
        }
        if w2.len() != nx1 * nx2 * ny2 {
            return Err(ChannelError::KernelShape(format!(
                "w2 has {} entries, expected {}",
                w2.len(),
                nx1 * nx2 * ny2
            )));
        }
        let mut ch = Self {
            nx1,
            nx2,
            ny1,
            ny2,
            w1,
            w2,
        };
        let violations = ch.validate();
        if !violations.is_empty() {
            return Err(ChannelError::Invalid(violations));
        }
        for (w, ny) in [(&mut ch.w1, ny1), (&mut ch.w2, ny2)] {
            for row in w.chunks_mut(ny) {
                let sum: f64 = row.iter().map(|p| p.max(0.0)).sum();
                for p in row {
                    *p = p.max(0.0) / sum;
                }
            }
        }
        Ok(ch)
    }

    /// The binary family: y1 copies x2 through BSC(p1) when x1 = 0 and
    /// BSC(p2) when x1 = 1; y2 copies x1 through BSC(q1) when x2 = 0
    /// and BSC(q2) when x2 = 1.
    pub fn from_bsc_params(params: BscTwoWayParams) -> Self {
        let mut w1 = vec![0.0; 8];
        let mut w2 = vec![0.0; 8];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                let flip1 = if x1 == 0 { params.p1 } else { params.p2 };
                let flip2 = if x2 == 0 { params.q1 } else { params.q2 };
                for y in 0..2usize {
                    w1[(x1 * 2 + x2) * 2 + y] = if y == x2 { 1.0 - flip1 } else { flip1 };
                    w2[(x1 * 2 + x2) * 2 + y] = if y == x1 { 1.0 - flip2 } else { flip2 };
                }
            }
        }
        Self {
            nx1: 2,
            nx2: 2,
            ny1: 2,
            ny2: 2,
            w1,
            w2,
        }
    }

    pub fn nx1(&self) -> usize {
        self.nx1
    }
    pub fn nx2(&self) -> usize {
        self.nx2
    }
    pub fn ny1(&self) -> usize {
        self.ny1
    }
    pub fn ny2(&self) -> usize {
        self.ny2
    }

    /// Conditional row p(y1 | x1, x2).
    pub fn w1_row(&self, x1: usize, x2: usize) -> &[f64] {
        let base = (x1 * self.nx2 + x2) * self.ny1;
        &self.w1[base..base + self.ny1]
    }

    /// Conditional row p(y2 | x1, x2).
    pub fn w2_row(&self, x1: usize, x2: usize) -> &[f64] {
        let base = (x1 * self.nx2 + x2) * self.ny2;
        &self.w2[base..base + self.ny2]
    }

    /// Report every conditional row that is not a probability vector
    /// within [`MASS_TOL`]. Empty result means the channel is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (kernel, w, ny) in [(KernelId::W1, &self.w1, self.ny1), (KernelId::W2, &self.w2, self.ny2)]
        {
            for x1 in 0..self.nx1 {
                for x2 in 0..self.nx2 {
                    let base = (x1 * self.nx2 + x2) * ny;
                    let row = &w[base..base + ny];
                    if let Some((y, &v)) = row
                        .iter()
                        .enumerate()
                        .find(|(_, &v)| v < -MASS_TOL || !v.is_finite())
                    {
                        out.push(Violation {
                            kernel,
                            x1,
                            x2,
                            detail: format!("entry {v} at output symbol {y} is negative"),
                        });
                        continue;
                    }
                    let sum: f64 = row.iter().map(|p| p.max(0.0)).sum();
                    if (sum - 1.0).abs() > MASS_TOL {
                        out.push(Violation {
                            kernel,
                            x1,
                            x2,
                            detail: format!("row sums to {sum}, expected 1"),
                        });
                    }
                }
            }
        }
        out
    }

    /// True iff w1 does not depend on x1 and w2 does not depend on x2,
    /// comparing conditional rows in L-infinity up to `tol`. This is the
    /// stricter factorization p(y1|x2) p(y2|x1).
    pub fn is_decomposing(&self, tol: f64) -> bool {
        for x2 in 0..self.nx2 {
            let base = self.w1_row(0, x2);
            for x1 in 1..self.nx1 {
                let row = self.w1_row(x1, x2);
                if linf(base, row) > tol {
                    return false;
                }
            }
        }
        for x1 in 0..self.nx1 {
            let base = self.w2_row(x1, 0);
            for x2 in 1..self.nx2 {
                let row = self.w2_row(x1, x2);
                if linf(base, row) > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Sample one channel use: y1 ~ w1(.|x1,x2) and y2 ~ w2(.|x1,x2),
    /// drawn independently from the given stream.
    pub fn step<R: Rng + ?Sized>(
        &self,
        x1: usize,
        x2: usize,
        rng: &mut R,
    ) -> Result<(u8, u8), ChannelError> {
        if x1 >= self.nx1 {
            return Err(ChannelError::SymbolOutOfRange {
                terminal: 1,
                symbol: x1,
                alphabet: self.nx1,
            });
        }
        if x2 >= self.nx2 {
            return Err(ChannelError::SymbolOutOfRange {
                terminal: 2,
                symbol: x2,
                alphabet: self.nx2,
            });
        }
        let y1 = sample_row(self.w1_row(x1, x2), rng);
        let y2 = sample_row(self.w2_row(x1, x2), rng);
        Ok((y1, y2))
    }

    /// Recover the binary-family parameters if this channel is exactly
    /// (within `tol`) an instance of [`RdChannel::from_bsc_params`].
    pub fn as_bsc_params(&self, tol: f64) -> Option<BscTwoWayParams> {
        if (self.nx1, self.nx2, self.ny1, self.ny2) != (2, 2, 2, 2) {
            return None;
        }
        let p1 = self.w1_row(0, 0)[1];
        let p2 = self.w1_row(1, 0)[1];
        let q1 = self.w2_row(0, 0)[1];
        let q2 = self.w2_row(0, 1)[1];
        let params = BscTwoWayParams::new(p1, p2, q1, q2).ok()?;
        let candidate = Self::from_bsc_params(params);
        let close = linf(&self.w1, &candidate.w1) <= tol && linf(&self.w2, &candidate.w2) <= tol;
        close.then_some(params)
    }

    /// Joint law over (u, v, x1, x2, y1, y2) induced by an auxiliary
    /// distribution p(u,v) p(x1|u) p(x2|v) feeding this channel.
    pub fn induced_joint(&self, aux: &AuxDist) -> Result<JointTable, ChannelError> {
        if aux.nx1() != self.nx1 || aux.nx2() != self.nx2 {
            return Err(ChannelError::AuxMismatch {
                aux_nx1: aux.nx1(),
                aux_nx2: aux.nx2(),
                nx1: self.nx1,
                nx2: self.nx2,
            });
        }
        let (nu, nv) = (aux.nu(), aux.nv());
        let dims = vec![nu, nv, self.nx1, self.nx2, self.ny1, self.ny2];
        let mut entries = Vec::with_capacity(dims.iter().product());
        for u in 0..nu {
            for v in 0..nv {
                let puv = aux.puv(u, v);
                for x1 in 0..self.nx1 {
                    let px1 = aux.px1_given_u(u, x1);
                    for x2 in 0..self.nx2 {
                        let px2 = aux.px2_given_v(v, x2);
                        let base = puv * px1 * px2;
                        let w1 = self.w1_row(x1, x2);
                        let w2 = self.w2_row(x1, x2);
                        for &a in w1 {
                            for &b in w2 {
                                entries.push(base * a * b);
                            }
                        }
                    }
                }
            }
        }
        Ok(JointTable::new(dims, entries)?)
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> u8 {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (y, &p) in row.iter().enumerate() {
        acc += p;
        if r < acc {
            return y as u8;
        }
    }
    (row.len() - 1) as u8
}

/// On-disk channel description: either the binary family parameters or
/// explicit kernels as nested arrays indexed [x1][x2][y].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSpec {
    Bsc(BscTwoWayParams),
    Kernels {
        w1: Vec<Vec<Vec<f64>>>,
        w2: Vec<Vec<Vec<f64>>>,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<RdChannel, ChannelError> {
        match self {
            ChannelSpec::Bsc(params) => {
                let params = BscTwoWayParams::new(params.p1, params.p2, params.q1, params.q2)?;
                Ok(RdChannel::from_bsc_params(params))
            }
            ChannelSpec::Kernels { w1, w2 } => {
                let (nx1, nx2, ny1, flat1) = flatten_kernel(w1, "w1")?;
                let (nx1b, nx2b, ny2, flat2) = flatten_kernel(w2, "w2")?;
                if nx1 != nx1b || nx2 != nx2b {
                    return Err(ChannelError::KernelShape(format!(
                        "w1 is over inputs ({nx1}, {nx2}) but w2 over ({nx1b}, {nx2b})"
                    )));
                }
                RdChannel::from_kernels(nx1, nx2, ny1, ny2, flat1, flat2)
            }
        }
    }
}

fn flatten_kernel(
    k: &[Vec<Vec<f64>>],
    name: &str,
) -> Result<(usize, usize, usize, Vec<f64>), ChannelError> {
    let nx1 = k.len();
    if nx1 == 0 {
        return Err(ChannelError::KernelShape(format!("{name} is empty")));
    }
    let nx2 = k[0].len();
    let ny = k.first().and_then(|r| r.first()).map_or(0, |r| r.len());
    let mut flat = Vec::with_capacity(nx1 * nx2 * ny);
    for (i, by_x2) in k.iter().enumerate() {
        if by_x2.len() != nx2 {
            return Err(ChannelError::KernelShape(format!(
                "{name}[{i}] has {} x2-rows, expected {nx2}",
                by_x2.len()
            )));
        }
        for (j, row) in by_x2.iter().enumerate() {
            if row.len() != ny {
                return Err(ChannelError::KernelShape(format!(
                    "{name}[{i}][{j}] has {} outputs, expected {ny}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
    }
    Ok((nx1, nx2, ny, flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::AuxDist;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn bsc(p1: f64, p2: f64, q1: f64, q2: f64) -> RdChannel {
        RdChannel::from_bsc_params(BscTwoWayParams::new(p1, p2, q1, q2).unwrap())
    }

    #[test]
    fn bsc_params_range_checked() {
        assert!(BscTwoWayParams::new(0.0, 0.0, 0.0, 0.6).is_err());
        assert!(BscTwoWayParams::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(BscTwoWayParams::new(0.5, 0.5, 0.5, 0.5).is_ok());
    }

    #[test]
    fn deterministic_channel_rows() {
        let ch = bsc(0.0, 0.0, 0.0, 0.0);
        assert!(ch.validate().is_empty());
        // y1 = x2 and y2 = x1 with probability one.
        for x1 in 0..2 {
            for x2 in 0..2 {
                assert_eq!(ch.w1_row(x1, x2)[x2], 1.0);
                assert_eq!(ch.w2_row(x1, x2)[x1], 1.0);
            }
        }
    }

    #[test]
    fn all_half_channel_uniform() {
        let ch = bsc(0.5, 0.5, 0.5, 0.5);
        for x1 in 0..2 {
            for x2 in 0..2 {
                assert_eq!(ch.w1_row(x1, x2), &[0.5, 0.5]);
                assert_eq!(ch.w2_row(x1, x2), &[0.5, 0.5]);
            }
        }
    }

    #[test]
    fn case_i_channel_shape() {
        // p1 = p2 = q1 = 0, q2 = 1/2: y1 copies x2 always; y2 copies x1
        // when x2 = 0 and is uniform when x2 = 1.
        let ch = bsc(0.0, 0.0, 0.0, 0.5);
        for x1 in 0..2 {
            for x2 in 0..2 {
                assert_eq!(ch.w1_row(x1, x2)[x2], 1.0);
            }
            assert_eq!(ch.w2_row(x1, 0)[x1], 1.0);
            assert_eq!(ch.w2_row(x1, 1), &[0.5, 0.5]);
        }
    }

    #[test]
    fn validate_reports_bad_rows() {
        let mut w1 = vec![0.0; 8];
        let w2 = vec![0.5; 8];
        // Row (0,0) sums to 1.2; row (1,1) has a negative entry.
        w1[0] = 0.6;
        w1[1] = 0.6;
        w1[2] = 1.0;
        w1[4] = 1.0;
        w1[6] = 1.5;
        w1[7] = -0.5;
        let err = RdChannel::from_kernels(2, 2, 2, 2, w1, w2).unwrap_err();
        match err {
            ChannelError::Invalid(v) => {
                assert_eq!(v.len(), 2);
                assert_eq!((v[0].x1, v[0].x2), (0, 0));
                assert_eq!((v[1].x1, v[1].x2), (1, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn near_valid_rows_renormalized() {
        let mut w1 = vec![0.0; 8];
        for i in 0..4 {
            w1[2 * i] = 0.5;
            w1[2 * i + 1] = 0.5 + 1e-12;
        }
        let w2 = vec![0.5; 8];
        let ch = RdChannel::from_kernels(2, 2, 2, 2, w1, w2).unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                let s: f64 = ch.w1_row(x1, x2).iter().sum();
                assert_eq!(s, 1.0);
            }
        }
    }

    #[test]
    fn decomposing_detection() {
        // (p, p, q, q) family decomposes for all p, q.
        assert!(bsc(0.3, 0.3, 0.1, 0.1).is_decomposing(1e-9));
        assert!(bsc(0.0, 0.0, 0.25, 0.25).is_decomposing(1e-9));
        // The narrative channels do not: w2 depends on x2.
        assert!(!bsc(0.0, 0.0, 0.0, 0.5).is_decomposing(1e-9));
        assert!(!bsc(0.5, 0.5, 0.0, 0.5).is_decomposing(1e-9));
        assert!(!bsc(0.0, 0.5, 0.0, 0.5).is_decomposing(1e-9));
    }

    #[test]
    fn step_deterministic_channel() {
        let ch = bsc(0.0, 0.0, 0.0, 0.0);
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..32 {
            let (y1, y2) = ch.step(1, 0, &mut rng).unwrap();
            assert_eq!((y1, y2), (0, 1));
        }
        assert!(ch.step(2, 0, &mut rng).is_err());
        assert!(ch.step(0, 5, &mut rng).is_err());
    }

    #[test]
    fn step_empirical_frequencies_match_rows() {
        let ch = bsc(0.0, 0.0, 0.0, 0.5);
        let mut rng = StdRng::seed_from_u64(7);
        let n = 100_000;
        // Case-i channel with x2 = 1: y2 should be uniform.
        let mut ones = 0u32;
        for _ in 0..n {
            let (_, y2) = ch.step(0, 1, &mut rng).unwrap();
            ones += u32::from(y2 == 1);
        }
        let freq = f64::from(ones) / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "empirical {freq}");
    }

    #[test]
    fn step_frequencies_all_input_pairs() {
        let ch = bsc(0.1, 0.3, 0.2, 0.4);
        let mut rng = StdRng::seed_from_u64(11);
        let n = 100_000usize;
        let band = 4.0 * (0.25 / n as f64).sqrt();
        for x1 in 0..2 {
            for x2 in 0..2 {
                let mut c1 = [0u32; 2];
                let mut c2 = [0u32; 2];
                for _ in 0..n {
                    let (y1, y2) = ch.step(x1, x2, &mut rng).unwrap();
                    c1[y1 as usize] += 1;
                    c2[y2 as usize] += 1;
                }
                for y in 0..2 {
                    let f1 = f64::from(c1[y]) / n as f64;
                    let f2 = f64::from(c2[y]) / n as f64;
                    assert!((f1 - ch.w1_row(x1, x2)[y]).abs() < band);
                    assert!((f2 - ch.w2_row(x1, x2)[y]).abs() < band);
                }
            }
        }
    }

    #[test]
    fn induced_joint_singleton_aux_deterministic_channel() {
        let ch = bsc(0.0, 0.0, 0.0, 0.0);
        let aux = AuxDist::singleton_uniform_inputs(2, 2);
        let j = ch.induced_joint(&aux).unwrap();
        // Four equiprobable atoms (one per input pair), outputs pinned.
        let nonzero: Vec<f64> = j.entries().iter().copied().filter(|&p| p > 0.0).collect();
        assert_eq!(nonzero.len(), 4);
        for p in nonzero {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn induced_joint_reproduces_aux_marginal_and_rd_factorization() {
        let ch = bsc(0.5, 0.5, 0.0, 0.5);
        let aux = AuxDist::random(3, 2, 2, 2, 99);
        let j = ch.induced_joint(&aux).unwrap();
        // Marginal over (u, v, x1, x2) is p(u,v) p(x1|u) p(x2|v).
        let m = j.marginal(&[0, 1, 2, 3]).unwrap();
        for u in 0..3 {
            for v in 0..2 {
                for x1 in 0..2 {
                    for x2 in 0..2 {
                        let want =
                            aux.puv(u, v) * aux.px1_given_u(u, x1) * aux.px2_given_v(v, x2);
                        assert_abs_diff_eq!(m.get(&[u, v, x1, x2]), want, epsilon = 1e-12);
                    }
                }
            }
        }
        // p(y1, y2 | x1, x2) factorizes into w1 * w2 exactly.
        let mx = j.marginal(&[2, 3]).unwrap();
        let mxy = j.marginal(&[2, 3, 4, 5]).unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                let px = mx.get(&[x1, x2]);
                if px < 1e-14 {
                    continue;
                }
                for y1 in 0..2 {
                    for y2 in 0..2 {
                        let cond = mxy.get(&[x1, x2, y1, y2]) / px;
                        let want = ch.w1_row(x1, x2)[y1] * ch.w2_row(x1, x2)[y2];
                        assert_abs_diff_eq!(cond, want, epsilon = 1e-11);
                    }
                }
            }
        }
        // Marginal of y1 under the case-ii channel is uniform.
        let my1 = j.marginal(&[4]).unwrap();
        assert_abs_diff_eq!(my1.get(&[0]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn channel_spec_roundtrip() {
        let spec: ChannelSpec =
            serde_json::from_str(r#"{"bsc": {"p1": 0.0, "p2": 0.0, "q1": 0.0, "q2": 0.5}}"#)
                .unwrap();
        let ch = spec.build().unwrap();
        assert_eq!(ch, bsc(0.0, 0.0, 0.0, 0.5));

        let spec: ChannelSpec = serde_json::from_str(
            r#"{"kernels": {"w1": [[[1.0,0.0],[0.0,1.0]],[[1.0,0.0],[0.0,1.0]]],
                             "w2": [[[1.0,0.0],[1.0,0.0]],[[0.0,1.0],[0.0,1.0]]]}}"#,
        )
        .unwrap();
        let ch = spec.build().unwrap();
        assert_eq!(ch, bsc(0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn as_bsc_params_roundtrip() {
        let params = BscTwoWayParams::new(0.1, 0.2, 0.3, 0.4).unwrap();
        let ch = RdChannel::from_bsc_params(params);
        let got = ch.as_bsc_params(1e-12).unwrap();
        assert_eq!(got, params);
        // A non-BSC-structured kernel is rejected.
        let w1 = vec![0.7, 0.3, 0.4, 0.6, 0.2, 0.8, 0.9, 0.1];
        let w2 = vec![0.5; 8];
        let ch = RdChannel::from_kernels(2, 2, 2, 2, w1, w2).unwrap();
        assert!(ch.as_bsc_params(1e-9).is_none());
    }
}
