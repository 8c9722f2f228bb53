//! Exact leakage of `n` conditionally i.i.d. observations, aggregated over
//! type classes (empirical distributions) of the output sequence.
//!
//! Every sequence in a type class has the same conditional probability under
//! each input, so sums over the `|Y|^n` sequences collapse into sums over the
//! `C(n+|Y|-1, |Y|-1)` types weighted by the class cardinality.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::logspace::{log2_prob, weighted_log, LogSumExp2};
use crate::measures::{kl_bits, shannon_entropy};
use crate::prob::{Channel, Distribution, LeakageOrder, Scenario};

/// Default cap on the number of types a single enumeration may visit.
pub const DEFAULT_MAX_TYPES: u64 = 10_000_000;

/// `log2(k!)` via the log-gamma function.
pub fn log2_factorial(k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0) / LN_2
    }
}

/// `log2(n! / prod(counts!))`.
pub fn log2_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let v = log2_factorial(n) - counts.iter().map(|&c| log2_factorial(c)).sum::<f64>();
    v.max(0.0)
}

/// Number of types of length `n` over `m` symbols, `C(n+m-1, m-1)`.
/// Saturates at `u128::MAX`.
pub fn count_types(n: usize, m: usize) -> u128 {
    if m == 0 {
        return 0;
    }
    let k = (m - 1).min(n) as u128;
    let top = (n + m - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (top - i) / (i + 1) stays exact because c is C(top, i)
        c = match c.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// An empirical distribution of a length-`n` sequence, stored as counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClass {
    counts: Vec<usize>,
    n: usize,
    log2_cardinality: f64,
}

impl TypeClass {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 || counts.is_empty() {
            return Err(Error::InvalidTypeSpace { n, m: counts.len() });
        }
        let log2_cardinality = log2_multinomial(&counts);
        Ok(Self {
            counts,
            n,
            log2_cardinality,
        })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `log2 |T(P)|`, the log of the number of sequences in the class.
    pub fn log2_cardinality(&self) -> f64 {
        self.log2_cardinality
    }

    /// The empirical distribution `counts / n`.
    pub fn distribution(&self) -> Distribution {
        let n = self.n as f64;
        Distribution::from_normalized(self.counts.iter().map(|&c| c as f64 / n).collect())
    }
}

/// Walks all count vectors over `m` symbols summing to `n`, starting from
/// `(n, 0, ..., 0)` and ending at `(0, ..., 0, n)` in lexicographically
/// descending order.
#[derive(Debug, Clone)]
pub struct TypeWalker {
    counts: Vec<usize>,
    started: bool,
}

impl TypeWalker {
    fn new(n: usize, m: usize) -> Self {
        let mut counts = vec![0; m];
        counts[0] = n;
        Self {
            counts,
            started: false,
        }
    }

    /// Advances to the next type; `None` after the last one.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if !self.started {
            self.started = true;
            return Some(&self.counts);
        }
        let m = self.counts.len();
        let i = (0..m.saturating_sub(1))
            .rev()
            .find(|&i| self.counts[i] > 0)?;
        let tail: usize = self.counts[i + 1..].iter().sum();
        self.counts[i] -= 1;
        for c in &mut self.counts[i + 1..] {
            *c = 0;
        }
        self.counts[i + 1] = tail + 1;
        Some(&self.counts)
    }
}

/// Type-class computations with a configurable enumeration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Composer {
    pub max_types: u64,
}

impl Default for Composer {
    fn default() -> Self {
        Self {
            max_types: DEFAULT_MAX_TYPES,
        }
    }
}

impl Composer {
    pub fn with_max_types(max_types: u64) -> Self {
        Self { max_types }
    }

    /// Checks the type count for `(n, m)` against the cap and returns a walker.
    pub fn walker(&self, n: usize, m: usize) -> Result<TypeWalker> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidTypeSpace { n, m });
        }
        let count = count_types(n, m);
        if count > self.max_types as u128 {
            return Err(Error::TooManyTypes {
                count,
                limit: self.max_types,
            });
        }
        Ok(TypeWalker::new(n, m))
    }

    pub fn enumerate_types(&self, n: usize, m: usize) -> Result<Vec<TypeClass>> {
        let mut walker = self.walker(n, m)?;
        let mut out = Vec::with_capacity(count_types(n, m) as usize);
        while let Some(c) = walker.advance() {
            out.push(TypeClass {
                counts: c.to_vec(),
                n,
                log2_cardinality: log2_multinomial(c),
            });
        }
        Ok(out)
    }

    /// `I_alpha^S(X; Y^n)` for `n` observations drawn i.i.d. from the channel row of `X`.
    pub fn composed_sibson_mi(
        &self,
        scenario: &Scenario,
        order: LeakageOrder,
        n: usize,
    ) -> Result<f64> {
        let channel = scenario.channel();
        let mut walker = self.walker(n, channel.output_size())?;
        let log_rows = log_rows(channel);
        let log_prior: Vec<f64> = scenario
            .prior()
            .probs()
            .iter()
            .map(|&q| log2_prob(q))
            .collect();
        let mut seq_log = vec![0.0; channel.input_size()];
        let mut scratch = vec![0.0; channel.input_size()];

        let value = match order {
            LeakageOrder::Infinity => {
                let mut acc = LogSumExp2::new();
                while let Some(counts) = walker.advance() {
                    sequence_log_probs(counts, &log_rows, &mut seq_log);
                    let best = seq_log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    acc.push(log2_multinomial(counts) + best);
                }
                acc.value()
            }
            o if o.is_shannon() => {
                // -H(X|Y^n) summed over types, with 0 log 0 = 0
                let mut neg_cond = 0.0;
                while let Some(counts) = walker.advance() {
                    sequence_log_probs(counts, &log_rows, &mut seq_log);
                    let card = log2_multinomial(counts);
                    let mut joint = LogSumExp2::new();
                    for ((s, lq), a) in seq_log.iter().zip(&log_prior).zip(scratch.iter_mut()) {
                        *a = card + s + lq;
                        joint.push(*a);
                    }
                    let total = joint.value();
                    if total == f64::NEG_INFINITY {
                        continue;
                    }
                    for &a in &scratch {
                        if a > f64::NEG_INFINITY {
                            neg_cond += a.exp2() * (a - total);
                        }
                    }
                }
                shannon_entropy(scenario.prior()) + neg_cond
            }
            LeakageOrder::Finite(alpha) => {
                let mut acc = LogSumExp2::new();
                while let Some(counts) = walker.advance() {
                    sequence_log_probs(counts, &log_rows, &mut seq_log);
                    let mut inner = LogSumExp2::new();
                    for (s, lq) in seq_log.iter().zip(&log_prior) {
                        inner.push(lq + alpha * s);
                    }
                    acc.push(log2_multinomial(counts) + inner.value() / alpha);
                }
                alpha / (alpha - 1.0) * acc.value()
            }
        };
        Ok(value.max(0.0))
    }

    /// Minimum over length-`n` types `P` of the divergence from `P` to its
    /// second-closest channel row.
    pub fn d_n_star(&self, channel: &Channel, n: usize) -> Result<DnStarResult> {
        if channel.input_size() < 2 {
            return Err(Error::SingleRowChannel);
        }
        let m = channel.output_size();
        let mut walker = self.walker(n, m)?;
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut p = vec![0.0; m];
        while let Some(counts) = walker.advance() {
            for (pi, &c) in p.iter_mut().zip(counts) {
                *pi = c as f64 / n as f64;
            }
            let v = second_smallest_divergence(&p, channel);
            match &best {
                Some((b, _)) if v >= *b => {}
                _ => best = Some((v, counts.to_vec())),
            }
        }
        let (value, counts) = best.expect("type walker yields at least one type");
        Ok(DnStarResult {
            value,
            minimizer: TypeClass::new(counts)?,
        })
    }
}

/// Enumerates all types of length `n` over `m` symbols under the default cap.
pub fn enumerate_types(n: usize, m: usize) -> Result<Vec<TypeClass>> {
    Composer::default().enumerate_types(n, m)
}

/// See [`Composer::composed_sibson_mi`].
pub fn composed_sibson_mi(scenario: &Scenario, order: LeakageOrder, n: usize) -> Result<f64> {
    Composer::default().composed_sibson_mi(scenario, order, n)
}

/// See [`Composer::d_n_star`].
pub fn d_n_star(channel: &Channel, n: usize) -> Result<DnStarResult> {
    Composer::default().d_n_star(channel, n)
}

/// `log2 Q(T(P) | x)`: probability that `n` draws from `row` land in the type class.
pub fn log_type_class_prob(t: &TypeClass, row: &Distribution) -> Result<f64> {
    if t.counts.len() != row.alphabet_size() {
        return Err(Error::AlphabetMismatch(t.counts.len(), row.alphabet_size()));
    }
    let seq: f64 = t
        .counts
        .iter()
        .zip(row.probs())
        .map(|(&c, &p)| weighted_log(c as f64, log2_prob(p)))
        .sum();
    Ok(t.log2_cardinality + seq)
}

/// Inputs ordered by `D(P || Q_x)` ascending, ties by input index, infinite
/// divergences last. Position `k-1` holds the `k`-th closest row.
pub fn rank_rows_by_divergence(p: &Distribution, channel: &Channel) -> Result<Vec<usize>> {
    if p.alphabet_size() != channel.output_size() {
        return Err(Error::AlphabetMismatch(
            p.alphabet_size(),
            channel.output_size(),
        ));
    }
    let div: Vec<f64> = channel
        .rows()
        .iter()
        .map(|r| kl_bits(p.probs(), r.probs()))
        .collect();
    let mut order: Vec<usize> = (0..div.len()).collect();
    order.sort_by(|&a, &b| div[a].total_cmp(&div[b]));
    Ok(order)
}

/// The finite-`n` exponent surrogate and the first type attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct DnStarResult {
    pub value: f64,
    pub minimizer: TypeClass,
}

pub(crate) fn second_smallest_divergence(p: &[f64], channel: &Channel) -> f64 {
    let (mut first, mut second) = (f64::INFINITY, f64::INFINITY);
    for row in channel.rows() {
        let d = kl_bits(p, row.probs());
        if d < first {
            second = first;
            first = d;
        } else if d < second {
            second = d;
        }
    }
    second
}

fn log_rows(channel: &Channel) -> Vec<Vec<f64>> {
    channel
        .rows()
        .iter()
        .map(|r| r.probs().iter().map(|&p| log2_prob(p)).collect())
        .collect()
}

/// Per-input log-probability of any single sequence with the given counts.
fn sequence_log_probs(counts: &[usize], log_rows: &[Vec<f64>], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(log_rows) {
        *o = counts
            .iter()
            .zip(row)
            .map(|(&c, &lp)| weighted_log(c as f64, lp))
            .sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{renyi_entropy, sibson_mi};

    fn counts(types: &[TypeClass]) -> Vec<Vec<usize>> {
        types.iter().map(|t| t.counts().to_vec()).collect()
    }

    fn exact_log2_multinomial(c: &[usize]) -> f64 {
        // exact integer arithmetic: n! / prod c! as u128, safe for n <= 30
        let fact = |k: usize| (1..=k as u128).product::<u128>();
        let n: usize = c.iter().sum();
        let mut v = fact(n);
        for &k in c {
            v /= fact(k);
        }
        (v as f64).log2()
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            counts(&enumerate_types(2, 2).unwrap()),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(
            counts(&enumerate_types(1, 3).unwrap()),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
        assert_eq!(enumerate_types(3, 3).unwrap().len(), 10);
        assert_eq!(count_types(3, 3), 10);
        assert!(matches!(
            enumerate_types(0, 2),
            Err(Error::InvalidTypeSpace { .. })
        ));
        let one = enumerate_types(5, 1).unwrap();
        assert_eq!(counts(&one), vec![vec![5]]);
    }

    #[test]
    fn enumeration_is_lexicographically_descending_and_complete() {
        for (n, m) in [(4, 3), (6, 4), (3, 5)] {
            let types = counts(&enumerate_types(n, m).unwrap());
            assert_eq!(types.len() as u128, count_types(n, m));
            for w in types.windows(2) {
                assert!(w[0] > w[1]);
            }
            assert!(types.iter().all(|c| c.iter().sum::<usize>() == n));
        }
    }

    #[test]
    fn type_guard() {
        let small = Composer::with_max_types(9);
        assert_eq!(
            small.enumerate_types(3, 3).unwrap_err(),
            Error::TooManyTypes {
                count: 10,
                limit: 9
            }
        );
        assert!(matches!(
            enumerate_types(1000, 4),
            Err(Error::TooManyTypes { .. })
        ));
        assert_eq!(count_types(5000, 200), u128::MAX);
    }

    #[test]
    fn cardinality_matches_exact_integers() {
        for n in 1..=30 {
            for t in enumerate_types(n, 3).unwrap() {
                let exact = exact_log2_multinomial(t.counts());
                assert!(
                    (t.log2_cardinality() - exact).abs() < 1e-9,
                    "{:?}",
                    t.counts()
                );
            }
        }
    }

    #[test]
    fn type_probability_examples() {
        let t = TypeClass::new(vec![1, 1]).unwrap();
        let half = Distribution::uniform(2).unwrap();
        assert!((log_type_class_prob(&t, &half).unwrap() + 1.0).abs() < 1e-12);
        let t = TypeClass::new(vec![2, 0]).unwrap();
        let row = Distribution::from_weights(&[0.75, 0.25]).unwrap();
        let v = log_type_class_prob(&t, &row).unwrap();
        assert!((v - 2.0 * 0.75_f64.log2()).abs() < 1e-12);
        assert!((v + 0.830075).abs() < 1e-6);
        let t = TypeClass::new(vec![0, 2]).unwrap();
        let point = Distribution::point_mass(2, 0).unwrap();
        assert_eq!(log_type_class_prob(&t, &point).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn type_probability_identity_with_entropy_and_divergence() {
        let row = Distribution::from_weights(&[0.2, 0.5, 0.3]).unwrap();
        for t in enumerate_types(7, 3).unwrap() {
            let p = t.distribution();
            let via_identity = t.log2_cardinality()
                - 7.0 * (kl_bits(p.probs(), row.probs()) + shannon_entropy(&p));
            assert!((log_type_class_prob(&t, &row).unwrap() - via_identity).abs() < 1e-9);
        }
    }

    #[test]
    fn type_probabilities_sum_to_one() {
        let row = Distribution::from_weights(&[0.1, 0.6, 0.3]).unwrap();
        let total: f64 = enumerate_types(12, 3)
            .unwrap()
            .iter()
            .map(|t| log_type_class_prob(t, &row).unwrap().exp2())
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    fn bsc(prior: &[f64]) -> Scenario {
        Scenario::new(
            Distribution::from_weights(prior).unwrap(),
            Channel::binary_symmetric(0.25).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn composed_single_observation_matches_sibson() {
        let s = Scenario::new(
            Distribution::from_weights(&[0.2, 0.5, 0.3]).unwrap(),
            Channel::from_rows(&[[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]]).unwrap(),
        )
        .unwrap();
        for order in [
            LeakageOrder::SHANNON,
            LeakageOrder::Finite(1.7),
            LeakageOrder::Finite(4.0),
            LeakageOrder::Infinity,
        ] {
            let a = composed_sibson_mi(&s, order, 1).unwrap();
            let b = sibson_mi(&s, order);
            assert!((a - b).abs() < 1e-12, "{order}: {a} vs {b}");
        }
    }

    #[test]
    fn identity_channel_saturates_ceiling() {
        let prior = Distribution::from_weights(&[0.5, 0.3, 0.2]).unwrap();
        let s = Scenario::new(prior.clone(), Channel::identity(3).unwrap()).unwrap();
        for n in [1, 2, 5] {
            for order in [
                LeakageOrder::SHANNON,
                LeakageOrder::Finite(2.0),
                LeakageOrder::Infinity,
            ] {
                let v = composed_sibson_mi(&s, order, n).unwrap();
                let ceiling = renyi_entropy(&prior, order.ceiling_order());
                assert!((v - ceiling).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bsc_two_observations_shannon() {
        // brute force over the four sequences: I = H(Y^2) - 2 H(0.25)
        let p = [0.75_f64, 0.25];
        let mut hy = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let py = 0.5 * p[a] * p[b] + 0.5 * p[1 - a] * p[1 - b];
                hy -= py * py.log2();
            }
        }
        let h = -(0.75_f64 * 0.75_f64.log2() + 0.25 * 0.25_f64.log2());
        let oracle = hy - 2.0 * h;
        let v = composed_sibson_mi(&bsc(&[0.5, 0.5]), LeakageOrder::SHANNON, 2).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 0.331878).abs() < 1e-6);
    }

    #[test]
    fn rank_examples() {
        let c = Channel::binary_symmetric(0.25).unwrap();
        let rank = |p: &[f64]| {
            rank_rows_by_divergence(&Distribution::from_weights(p).unwrap(), &c).unwrap()
        };
        assert_eq!(rank(&[0.5, 0.5]), vec![0, 1]);
        assert_eq!(rank(&[1.0, 0.0]), vec![0, 1]);
        assert_eq!(rank(&[0.0, 1.0]), vec![1, 0]);
        let c = Channel::from_rows(&[[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]]).unwrap();
        assert_eq!(
            rank_rows_by_divergence(&Distribution::uniform(2).unwrap(), &c).unwrap(),
            vec![1, 0, 2]
        );
    }

    #[test]
    fn d_n_star_examples() {
        let c = Channel::binary_symmetric(0.25).unwrap();
        let r = d_n_star(&c, 2).unwrap();
        assert!((r.value - kl_bits(&[0.5, 0.5], &[0.25, 0.75])).abs() < 1e-12);
        assert_eq!(r.minimizer.counts(), &[1, 1]);
        let r = d_n_star(&c, 1).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert_eq!(r.minimizer.counts(), &[1, 0]);
        let single = Channel::from_rows(&[[0.5, 0.5]]).unwrap();
        assert_eq!(d_n_star(&single, 3), Err(Error::SingleRowChannel));
    }

    #[test]
    fn d_n_star_all_infinite() {
        // disjoint rows: every type is infinitely far from at least one row
        let c = Channel::identity(2).unwrap();
        let r = d_n_star(&c, 3).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        assert_eq!(r.minimizer.counts(), &[3, 0]);
    }
}
