//! Exact information measures on finite distributions.
//!
//! Everything here is computed in bits (base-2 logarithms) with the
//! convention 0·log 0 = 0. Distributions are validated on construction:
//! total mass must be 1 within [`MASS_TOL`] (then renormalized exactly),
//! entries must be nonnegative within the same tolerance.

use thiserror::Error;

/// Tolerance for distribution validity: mass may deviate from 1 and
/// entries may undershoot 0 by at most this much before a hard error.
pub const MASS_TOL: f64 = 1e-9;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("entry {value} at index {index} is negative")]
    NegativeEntry { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within {MASS_TOL}")]
    MassMismatch { sum: f64 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("axis {0} appears in more than one axis set")]
    OverlappingAxes(usize),
    #[error("axis {axis} out of range for a table with {ndim} axes")]
    AxisOutOfRange { axis: usize, ndim: usize },
    #[error("table has {got} entries but dims require {want}")]
    EntryCountMismatch { got: usize, want: usize },
    #[error("chain parameter {0} outside [0, 1/2]")]
    ChainParamOutOfRange(f64),
    #[error("dims must be nonempty with nonzero sizes")]
    EmptyDims,
}

fn check_and_renormalize(entries: &mut [f64]) -> Result<(), MeasureError> {
    let mut sum = 0.0;
    for (i, e) in entries.iter().enumerate() {
        if *e < -MASS_TOL || !e.is_finite() {
            return Err(MeasureError::NegativeEntry {
                index: i,
                value: *e,
            });
        }
        sum += e.max(0.0);
    }
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(MeasureError::MassMismatch { sum });
    }
    for e in entries.iter_mut() {
        *e = e.max(0.0) / sum;
    }
    Ok(())
}

/// A validated probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    pub fn new(entries: Vec<f64>) -> Result<Self, MeasureError> {
        let mut entries = entries;
        check_and_renormalize(&mut entries)?;
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// All mass on one symbol.
    pub fn point(n: usize, at: usize) -> Self {
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        Self(v)
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A validated joint probability table over a tuple of finite alphabets,
/// stored dense in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    dims: Vec<usize>,
    entries: Vec<f64>,
}

impl JointTable {
    pub fn new(dims: Vec<usize>, entries: Vec<f64>) -> Result<Self, MeasureError> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(MeasureError::EmptyDims);
        }
        let want: usize = dims.iter().product();
        if entries.len() != want {
            return Err(MeasureError::EntryCountMismatch {
                got: entries.len(),
                want,
            });
        }
        let mut entries = entries;
        check_and_renormalize(&mut entries)?;
        Ok(Self { dims, entries })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Probability at a multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.flat_index(idx)]
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (i, &d) in self.dims.iter().enumerate() {
            debug_assert!(idx[i] < d);
            flat = flat * d + idx[i];
        }
        flat
    }

    fn check_axes(&self, axes: &[usize]) -> Result<(), MeasureError> {
        for &a in axes {
            if a >= self.dims.len() {
                return Err(MeasureError::AxisOutOfRange {
                    axis: a,
                    ndim: self.dims.len(),
                });
            }
        }
        Ok(())
    }

    /// Marginal distribution over the given axes (in the given order).
    /// An empty axis list yields the scalar table holding total mass 1.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointTable, MeasureError> {
        self.check_axes(axes)?;
        let out_dims: Vec<usize> = if axes.is_empty() {
            vec![1]
        } else {
            axes.iter().map(|&a| self.dims[a]).collect()
        };
        let out_len: usize = out_dims.iter().product();
        let mut out = vec![0.0; out_len];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, &p) in self.entries.iter().enumerate() {
            unravel(flat, &self.dims, &mut idx);
            let mut o = 0usize;
            for &a in axes {
                o = o * self.dims[a] + idx[a];
            }
            out[o] += p;
        }
        Ok(JointTable {
            dims: out_dims,
            entries: out,
        })
    }

    /// Shannon entropy of the full table, in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.entries)
    }

    /// Entropy of the marginal over `axes`, in bits.
    pub fn marginal_entropy(&self, axes: &[usize]) -> Result<f64, MeasureError> {
        Ok(self.marginal(axes)?.entropy())
    }
}

fn unravel(mut flat: usize, dims: &[usize], idx: &mut [usize]) {
    for a in (0..dims.len()).rev() {
        idx[a] = flat % dims[a];
        flat /= dims[a];
    }
}

fn entropy_of(entries: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in entries {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Shannon entropy H(p) = -sum p log2 p, in bits.
pub fn entropy(p: &ProbVec) -> f64 {
    entropy_of(p.entries())
}

/// Binary entropy h(p) = -p log2 p - (1-p) log2 (1-p).
pub fn binary_entropy(p: f64) -> Result<f64, MeasureError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(MeasureError::ProbabilityOutOfRange(p));
    }
    Ok(entropy_of(&[p, 1.0 - p]))
}

fn ensure_disjoint(sets: &[&[usize]]) -> Result<(), MeasureError> {
    let mut seen = std::collections::HashSet::new();
    for set in sets {
        for &a in *set {
            if !seen.insert(a) {
                return Err(MeasureError::OverlappingAxes(a));
            }
        }
    }
    Ok(())
}

/// Conditional entropy H(target | given) = H(target, given) - H(given), in bits.
pub fn cond_entropy(
    joint: &JointTable,
    target_axes: &[usize],
    given_axes: &[usize],
) -> Result<f64, MeasureError> {
    ensure_disjoint(&[target_axes, given_axes])?;
    let mut both: Vec<usize> = target_axes.to_vec();
    both.extend_from_slice(given_axes);
    Ok(joint.marginal_entropy(&both)? - joint.marginal_entropy(given_axes)?)
}

/// Conditional mutual information I(A;B|C) = H(A|C) - H(A|B,C), in bits.
/// Mathematically nonnegative; tiny negative values from floating-point
/// cancellation are clamped to 0.
pub fn cond_mutual_info(
    joint: &JointTable,
    a_axes: &[usize],
    b_axes: &[usize],
    c_axes: &[usize],
) -> Result<f64, MeasureError> {
    ensure_disjoint(&[a_axes, b_axes, c_axes])?;
    let mut ac: Vec<usize> = a_axes.to_vec();
    ac.extend_from_slice(c_axes);
    let mut bc: Vec<usize> = b_axes.to_vec();
    bc.extend_from_slice(c_axes);
    let mut abc: Vec<usize> = a_axes.to_vec();
    abc.extend_from_slice(b_axes);
    abc.extend_from_slice(c_axes);
    let v = joint.marginal_entropy(&ac)? + joint.marginal_entropy(&bc)?
        - joint.marginal_entropy(&abc)?
        - joint.marginal_entropy(c_axes)?;
    debug_assert!(v > -MASS_TOL, "CMI {v} below numerical slack");
    Ok(v.max(0.0))
}

/// Entropy rate, in bits per step, of the two-state Markov chain with
/// transition rows (1-q1, q1) from state 0 and (1-q2, q2) from state 1.
///
/// The rate is pi0*h(q1) + pi1*h(q2) at the stationary law
/// pi0 = (1-q2)/(1-q2+q1), pi1 = q1/(1-q2+q1). With q1 = q2 = 0 the
/// chain is absorbed in state 0 and the rate is 0.
pub fn markov2_entropy_rate(q1: f64, q2: f64) -> Result<f64, MeasureError> {
    for q in [q1, q2] {
        if !(0.0..=0.5).contains(&q) {
            return Err(MeasureError::ChainParamOutOfRange(q));
        }
    }
    let denom = 1.0 - q2 + q1;
    let pi0 = (1.0 - q2) / denom;
    let pi1 = q1 / denom;
    Ok(pi0 * binary_entropy(q1)? + pi1 * binary_entropy(q2)?)
}

/// Plug-in estimate of the conditional entropy H(X_t | X_{t-lag}) of a
/// symbol sequence, in bits. This is the empirical entropy rate of a
/// `lag`-dependent stationary source.
pub fn plugin_conditional_entropy(seq: &[u8], lag: usize) -> f64 {
    if seq.len() <= lag || lag == 0 {
        return 0.0;
    }
    let nsym = seq.iter().copied().max().unwrap() as usize + 1;
    let mut pair = vec![0u64; nsym * nsym];
    for t in lag..seq.len() {
        pair[seq[t - lag] as usize * nsym + seq[t] as usize] += 1;
    }
    let total = (seq.len() - lag) as f64;
    let mut h = 0.0;
    for prev in 0..nsym {
        let row = &pair[prev * nsym..(prev + 1) * nsym];
        let row_total: u64 = row.iter().sum();
        if row_total == 0 {
            continue;
        }
        let p_prev = row_total as f64 / total;
        let mut h_row = 0.0;
        for &c in row {
            if c > 0 {
                let p = c as f64 / row_total as f64;
                h_row -= p * p.log2();
            }
        }
        h += p_prev * h_row;
    }
    h
}

/// log2 of e; exposed for converting natural-log based quantities.
pub fn log2e() -> f64 {
    LOG2_E
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn entropy_basic_values() {
        let p = ProbVec::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(entropy(&p), 1.0, epsilon = 1e-12);
        let p = ProbVec::new(vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(entropy(&p), 0.0, epsilon = 1e-12);
        let p = ProbVec::new(vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(entropy(&p), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn binary_entropy_values() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(binary_entropy(0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            binary_entropy(0.25).unwrap(),
            0.811_278_124_459_132_8,
            epsilon = 1e-12
        );
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(ProbVec::new(vec![0.6, 0.6]).is_err());
        assert!(ProbVec::new(vec![-0.1, 1.1]).is_err());
        // Within tolerance: accepted and renormalized to exact mass 1.
        let p = ProbVec::new(vec![0.5, 0.5 + 1e-12]).unwrap();
        let s: f64 = p.entries().iter().sum();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn cond_entropy_independent_and_copy() {
        // Independent uniform bits: H(A|B) = 1.
        let j = JointTable::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(cond_entropy(&j, &[0], &[1]).unwrap(), 1.0, epsilon = 1e-12);
        // A = B uniform: H(A|B) = 0.
        let j = JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(cond_entropy(&j, &[0], &[1]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cond_entropy_bsc() {
        // A = B xor Bern(0.25), B uniform: H(A|B) = h(0.25).
        // Order (A, B): p(a,b) = 0.5 * (a==b ? 0.75 : 0.25).
        let j = JointTable::new(vec![2, 2], vec![0.375, 0.125, 0.125, 0.375]).unwrap();
        assert_abs_diff_eq!(
            cond_entropy(&j, &[0], &[1]).unwrap(),
            0.811_278_124_459_132_8,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cond_entropy_rejects_overlap() {
        let j = JointTable::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(matches!(
            cond_entropy(&j, &[0], &[0]),
            Err(MeasureError::OverlappingAxes(0))
        ));
    }

    #[test]
    fn cmi_values() {
        // A independent of B given C (all independent uniform): 0.
        let j = JointTable::new(vec![2, 2, 2], vec![0.125; 8]).unwrap();
        assert_abs_diff_eq!(
            cond_mutual_info(&j, &[0], &[1], &[2]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // A = B uniform, C constant: 1.
        let j = JointTable::new(vec![2, 2, 1], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(
            cond_mutual_info(&j, &[0], &[1], &[2]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cmi_gated_identity_channel() {
        // Axes (X1, Y2, X2): Y2 = X1 when X2 = 0, uniform when X2 = 1;
        // X1, X2 uniform independent. I(X1;Y2|X2) = 0.5.
        let mut entries = vec![0.0; 8];
        for x1 in 0..2 {
            for y2 in 0..2 {
                for x2 in 0..2 {
                    let p_y2 = if x2 == 0 {
                        if y2 == x1 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        0.5
                    };
                    entries[x1 * 4 + y2 * 2 + x2] = 0.25 * p_y2;
                }
            }
        }
        let j = JointTable::new(vec![2, 2, 2], entries).unwrap();
        assert_abs_diff_eq!(
            cond_mutual_info(&j, &[0], &[1], &[2]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn markov2_rate_values() {
        // q1 = q2 = q reduces to h(q).
        assert_abs_diff_eq!(
            markov2_entropy_rate(0.3, 0.3).unwrap(),
            binary_entropy(0.3).unwrap(),
            epsilon = 1e-12
        );
        // Absorbing state 0.
        assert_abs_diff_eq!(markov2_entropy_rate(0.0, 0.4).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(markov2_entropy_rate(0.0, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        // pi = (2/3, 1/3), rate = (2/3) h(0.25) + 1/3.
        assert_abs_diff_eq!(
            markov2_entropy_rate(0.25, 0.5).unwrap(),
            2.0 / 3.0 * binary_entropy(0.25).unwrap() + 1.0 / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            markov2_entropy_rate(0.25, 0.5).unwrap(),
            0.874_185_416_306_088_5,
            epsilon = 1e-9
        );
        assert!(markov2_entropy_rate(0.6, 0.1).is_err());
        assert!(markov2_entropy_rate(0.1, -0.01).is_err());
    }

    #[test]
    fn markov2_rate_matches_simulated_plugin_entropy() {
        let (q1, q2) = (0.25, 0.5);
        let mut rng = StdRng::seed_from_u64(42);
        let n = 1_000_000;
        let mut seq = Vec::with_capacity(n);
        let mut state = 0u8;
        for _ in 0..n {
            let q = if state == 0 { q1 } else { q2 };
            state = if rng.random::<f64>() < q { 1 } else { 0 };
            seq.push(state);
        }
        let plugin = plugin_conditional_entropy(&seq, 1);
        let exact = markov2_entropy_rate(q1, q2).unwrap();
        assert!(
            (plugin - exact).abs() < 5e-3,
            "plugin {plugin} vs exact {exact}"
        );
    }

    fn arb_dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-4..1.0f64, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn entropy_bounded_by_log_size(v in arb_dist(6)) {
            let p = ProbVec::new(v).unwrap();
            let h = entropy(&p);
            prop_assert!(h >= -1e-12);
            prop_assert!(h <= (6f64).log2() + 1e-9);
        }

        #[test]
        fn chain_rule_holds(v in arb_dist(24)) {
            let j = JointTable::new(vec![4, 6], v).unwrap();
            let h_ab = j.entropy();
            let h_b = j.marginal_entropy(&[1]).unwrap();
            let h_a_given_b = cond_entropy(&j, &[0], &[1]).unwrap();
            prop_assert!((h_ab - (h_b + h_a_given_b)).abs() < 1e-9);
            // Conditioning cannot raise entropy above the marginal.
            let h_a = j.marginal_entropy(&[0]).unwrap();
            prop_assert!(h_a_given_b <= h_a + 1e-9);
        }

        #[test]
        fn cmi_nonnegative_and_symmetric(v in arb_dist(27)) {
            let j = JointTable::new(vec![3, 3, 3], v).unwrap();
            let ab = cond_mutual_info(&j, &[0], &[1], &[2]).unwrap();
            let ba = cond_mutual_info(&j, &[1], &[0], &[2]).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-9);
        }

        #[test]
        fn uniform_maximizes_entropy(n in 2usize..8) {
            let p = ProbVec::uniform(n);
            prop_assert!((entropy(&p) - (n as f64).log2()).abs() < 1e-9);
        }
    }
}
