//! Single-observation information measures, all in bits.

use crate::error::{Error, Result};
use crate::logspace::{log2_prob, log2_sum_exp2, LogSumExp2};
use crate::prob::{Distribution, LeakageOrder, Scenario, SHANNON_BAND};

/// Shannon entropy `-sum p log2 p`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &Distribution) -> f64 {
    entropy_bits(p.probs())
}

pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum();
    h.max(0.0)
}

/// Relative entropy `D(p || q)` in bits; `+inf` when `p` charges a symbol `q` does not.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::AlphabetMismatch(
            p.alphabet_size(),
            q.alphabet_size(),
        ));
    }
    Ok(kl_bits(p.probs(), q.probs()))
}

pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            d += pi * (pi / qi).log2();
        }
    }
    d.max(0.0)
}

/// Rényi entropy of the given order.
///
/// Order 0 is the log of the support size and orders within `1e-8` of one
/// use the Shannon entropy; +inf gives the min-entropy.
///
/// Panics if `order` is negative or NaN.
pub fn renyi_entropy(p: &Distribution, order: f64) -> f64 {
    assert!(order >= 0.0, "Rényi order must be nonnegative, got {order}");
    if order == 0.0 {
        return (p.support_size() as f64).log2();
    }
    if (order - 1.0).abs() < SHANNON_BAND {
        return shannon_entropy(p);
    }
    if order.is_infinite() {
        let max = p.probs().iter().copied().fold(0.0, f64::max);
        return -max.log2();
    }
    let terms: Vec<f64> = p
        .probs()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| order * v.log2())
        .collect();
    let h = log2_sum_exp2(&terms) / (1.0 - order);
    h.max(0.0)
}

/// Logs of `p1^lambda p2^(1-lambda)` on the common support, plus the support mask.
struct TiltFamily {
    support: Vec<usize>,
    log_p1: Vec<f64>,
    log_p2: Vec<f64>,
    size: usize,
}

impl TiltFamily {
    fn new(p1: &Distribution, p2: &Distribution) -> Result<Self> {
        if p1.alphabet_size() != p2.alphabet_size() {
            return Err(Error::AlphabetMismatch(
                p1.alphabet_size(),
                p2.alphabet_size(),
            ));
        }
        let support: Vec<usize> = (0..p1.alphabet_size())
            .filter(|&i| p1[i] > 0.0 && p2[i] > 0.0)
            .collect();
        let log_p1 = support.iter().map(|&i| p1[i].log2()).collect();
        let log_p2 = support.iter().map(|&i| p2[i].log2()).collect();
        Ok(Self {
            support,
            log_p1,
            log_p2,
            size: p1.alphabet_size(),
        })
    }

    fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    fn log_weights(&self, lambda: f64) -> Vec<f64> {
        self.log_p1
            .iter()
            .zip(&self.log_p2)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect()
    }

    /// `log2 sum p1^lambda p2^(1-lambda)`.
    fn log_normalizer(&self, lambda: f64) -> f64 {
        log2_sum_exp2(&self.log_weights(lambda))
    }

    /// Tilted probabilities on the common support.
    fn tilted(&self, lambda: f64) -> Vec<f64> {
        let w = self.log_weights(lambda);
        let z = log2_sum_exp2(&w);
        w.iter().map(|v| (v - z).exp2()).collect()
    }

    /// `E_{P_lambda}[log2 p1 - log2 p2] = D(P_lambda || p2) - D(P_lambda || p1)`;
    /// nondecreasing in lambda.
    fn divergence_difference(&self, lambda: f64) -> f64 {
        self.tilted(lambda)
            .iter()
            .zip(self.log_p1.iter().zip(&self.log_p2))
            .map(|(p, (a, b))| p * (a - b))
            .sum()
    }

    fn embed(&self, on_support: Vec<f64>) -> Distribution {
        let mut full = vec![0.0; self.size];
        for (&i, p) in self.support.iter().zip(on_support) {
            full[i] = p;
        }
        Distribution::from_normalized(full)
    }
}

/// The normalized geometric interpolation `p1^lambda p2^(1-lambda) / Z`.
pub fn tilted_distribution(
    p1: &Distribution,
    p2: &Distribution,
    lambda: f64,
) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidLambda(lambda));
    }
    let fam = TiltFamily::new(p1, p2)?;
    if lambda == 1.0 {
        return Ok(p1.clone());
    }
    if lambda == 0.0 {
        return Ok(p2.clone());
    }
    if fam.is_empty() {
        return Err(Error::DisjointSupport);
    }
    Ok(fam.embed(fam.tilted(lambda)))
}

/// Chernoff information between two distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffResult {
    /// Bits; `+inf` for disjoint supports.
    pub value: f64,
    /// Maximizing tilt; `None` when the supports are disjoint.
    pub lambda_star: Option<f64>,
    /// `P_{lambda*}`; `None` when the supports are disjoint.
    pub tilted: Option<Distribution>,
    /// The supremum sits at `lambda = 0` or `1` without equalizing the two
    /// divergences. Only possible under partial support overlap.
    pub at_endpoint: bool,
}

const BISECTION_WIDTH: f64 = 1e-15;

/// Chernoff information `max_lambda -log2 sum p1^lambda p2^(1-lambda)`.
///
/// The objective is concave in lambda with derivative
/// `D(P_lambda||p1) - D(P_lambda||p2)`, which is monotone; the maximizer is
/// located by bisecting that difference. Sums run over the common support.
pub fn chernoff_information(p1: &Distribution, p2: &Distribution) -> Result<ChernoffResult> {
    let fam = TiltFamily::new(p1, p2)?;
    if fam.is_empty() {
        return Ok(ChernoffResult {
            value: f64::INFINITY,
            lambda_star: None,
            tilted: None,
            at_endpoint: false,
        });
    }

    let g0 = fam.divergence_difference(0.0);
    let g1 = fam.divergence_difference(1.0);
    let (lambda, at_endpoint) = if g0 >= 0.0 && g1 <= 0.0 {
        // identical on the common support: every tilt is optimal
        (0.5, false)
    } else if g0 >= 0.0 {
        (0.0, g0 > 0.0)
    } else if g1 <= 0.0 {
        (1.0, g1 < 0.0)
    } else {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > BISECTION_WIDTH {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = fam.divergence_difference(mid);
            if g == 0.0 {
                lo = mid;
                hi = mid;
                break;
            } else if g < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi), false)
    };

    let value = (-fam.log_normalizer(lambda)).max(0.0);
    Ok(ChernoffResult {
        value,
        lambda_star: Some(lambda),
        tilted: Some(fam.embed(fam.tilted(lambda))),
        at_endpoint,
    })
}

/// Sibson mutual information of the given order, in bits.
///
/// Finite orders above one are evaluated in log space so that very large
/// orders cannot overflow. Order one gives Shannon mutual information and
/// infinity gives maximal leakage.
pub fn sibson_mi(scenario: &Scenario, order: LeakageOrder) -> f64 {
    let channel = scenario.channel();
    let prior = scenario.prior().probs();
    let value = match order {
        LeakageOrder::Infinity => {
            let total: f64 = (0..channel.output_size())
                .map(|y| {
                    channel
                        .rows()
                        .iter()
                        .zip(prior)
                        .filter(|(_, &q)| q > 0.0)
                        .map(|(row, _)| row[y])
                        .fold(0.0, f64::max)
                })
                .sum();
            total.log2()
        }
        o if o.is_shannon() => shannon_mi(scenario),
        LeakageOrder::Finite(alpha) => {
            let log_prior: Vec<f64> = prior.iter().map(|&q| log2_prob(q)).collect();
            let mut outer = LogSumExp2::new();
            let mut inner_terms = Vec::with_capacity(prior.len());
            for y in 0..channel.output_size() {
                inner_terms.clear();
                inner_terms.extend(
                    channel
                        .rows()
                        .iter()
                        .zip(&log_prior)
                        .map(|(row, &lq)| lq + alpha * log2_prob(row[y])),
                );
                outer.push(log2_sum_exp2(&inner_terms) / alpha);
            }
            alpha / (alpha - 1.0) * outer.value()
        }
    };
    value.max(0.0)
}

fn shannon_mi(scenario: &Scenario) -> f64 {
    let channel = scenario.channel();
    let prior = scenario.prior().probs();
    let output: Vec<f64> = (0..channel.output_size())
        .map(|y| {
            channel
                .rows()
                .iter()
                .zip(prior)
                .map(|(r, q)| q * r[y])
                .sum()
        })
        .collect();
    let mut mi = 0.0;
    for (row, &q) in channel.rows().iter().zip(prior) {
        for (&w, &py) in row.probs().iter().zip(&output) {
            if q > 0.0 && w > 0.0 {
                mi += q * w * (w / py).log2();
            }
        }
    }
    mi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Channel;

    fn d(p: &[f64]) -> Distribution {
        Distribution::from_weights(p).unwrap()
    }

    fn bsc_uniform() -> Scenario {
        Scenario::new(
            Distribution::uniform(2).unwrap(),
            Channel::binary_symmetric(0.25).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&d(&[0.5, 0.5])), 1.0);
        assert_eq!(shannon_entropy(&d(&[1.0, 0.0])), 0.0);
        let expected = 0.25 * 2.0 + 0.75 * (4.0_f64 / 3.0).log2();
        assert!((shannon_entropy(&d(&[0.25, 0.75])) - expected).abs() < 1e-15);
        assert!((expected - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn kl_examples() {
        let p = d(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let v = kl_divergence(&d(&[0.5, 0.5]), &d(&[0.25, 0.75])).unwrap();
        let expected = 0.5 + 0.5 * (2.0_f64 / 3.0).log2();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.207519).abs() < 1e-6);
        assert_eq!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        assert_eq!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])),
            Err(Error::AlphabetMismatch(2, 3))
        );
    }

    #[test]
    fn renyi_examples() {
        let u4 = Distribution::uniform(4).unwrap();
        assert!((renyi_entropy(&u4, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(renyi_entropy(&d(&[0.5, 0.5, 0.0]), 0.0), 1.0);
        // 2 log2(sqrt(0.7) + sqrt(0.3))
        let oracle = 2.0 * (0.7_f64.sqrt() + 0.3_f64.sqrt()).log2();
        let h = renyi_entropy(&d(&[0.7, 0.3]), 0.5);
        assert!((h - oracle).abs() < 1e-14);
        assert!((h - 0.938485).abs() < 1e-6);
    }

    #[test]
    fn renyi_orders_near_one_and_infinity() {
        let p = d(&[0.2, 0.5, 0.3]);
        let h1 = shannon_entropy(&p);
        assert_eq!(renyi_entropy(&p, 1.0 + 1e-9), h1);
        assert!((renyi_entropy(&p, 1.0 + 1e-6) - h1).abs() < 1e-5);
        assert!((renyi_entropy(&p, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((renyi_entropy(&p, 1e6) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn tilted_examples() {
        let p1 = d(&[0.25, 0.75]);
        let p2 = d(&[0.75, 0.25]);
        assert_eq!(tilted_distribution(&p1, &p2, 1.0).unwrap(), p1);
        assert_eq!(tilted_distribution(&p1, &p2, 0.0).unwrap(), p2);
        let mid = tilted_distribution(&p1, &p2, 0.5).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-15 && (mid[1] - 0.5).abs() < 1e-15);
        assert_eq!(
            tilted_distribution(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), 0.5),
            Err(Error::DisjointSupport)
        );
        assert_eq!(
            tilted_distribution(&p1, &p2, 1.5),
            Err(Error::InvalidLambda(1.5))
        );
    }

    #[test]
    fn chernoff_symmetric_pair() {
        let r = chernoff_information(&d(&[0.25, 0.75]), &d(&[0.75, 0.25])).unwrap();
        let oracle = kl_bits(&[0.5, 0.5], &[0.25, 0.75]);
        assert!((r.value - oracle).abs() < 1e-12);
        assert!((r.value - 0.207519).abs() < 1e-6);
        assert!((r.lambda_star.unwrap() - 0.5).abs() < 1e-6);
        let t = r.tilted.unwrap();
        assert!((t[0] - 0.5).abs() < 1e-9);
        assert!(!r.at_endpoint);
    }

    #[test]
    fn chernoff_degenerate_cases() {
        let p = d(&[0.2, 0.3, 0.5]);
        let r = chernoff_information(&p, &p).unwrap();
        assert_eq!(r.value, 0.0);
        let r = chernoff_information(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        assert!(r.lambda_star.is_none() && r.tilted.is_none());
    }

    #[test]
    fn chernoff_partial_overlap_reaches_endpoint() {
        // common support {1}: the supremum sits at lambda = 1, value -log2 p1(1)
        let p1 = d(&[0.5, 0.5, 0.0]);
        let p2 = d(&[0.0, 0.9, 0.1]);
        let r = chernoff_information(&p1, &p2).unwrap();
        let lambda = r.lambda_star.unwrap();
        let expected = -(0.5_f64.powf(lambda) * 0.9_f64.powf(1.0 - lambda)).log2();
        assert!((r.value - expected).abs() < 1e-12);
        assert!(r.at_endpoint);
        // brute-force scan never beats the reported value
        for k in 0..=1000 {
            let l = k as f64 / 1000.0;
            let f = -(0.5_f64.powf(l) * 0.9_f64.powf(1.0 - l)).log2();
            assert!(f <= r.value + 1e-12);
        }
    }

    #[test]
    fn chernoff_residual_on_skewed_pair() {
        let p1 = d(&[0.05, 0.15, 0.8]);
        let p2 = d(&[0.6, 0.3, 0.1]);
        let r = chernoff_information(&p1, &p2).unwrap();
        let t = r.tilted.unwrap();
        let d1 = kl_divergence(&t, &p1).unwrap();
        let d2 = kl_divergence(&t, &p2).unwrap();
        assert!((d1 - d2).abs() <= 1e-9);
        assert!((d1 - r.value).abs() <= 1e-9);
        // grid oracle for the maximum
        let best = (0..=10_000)
            .map(|k| {
                let l = k as f64 / 10_000.0;
                -(0..3)
                    .map(|i| p1[i].powf(l) * p2[i].powf(1.0 - l))
                    .sum::<f64>()
                    .log2()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(r.value >= best - 1e-12 && r.value - best < 1e-7);
    }

    #[test]
    fn sibson_examples() {
        let s = bsc_uniform();
        let inf = sibson_mi(&s, LeakageOrder::Infinity);
        assert!((inf - 1.5_f64.log2()).abs() < 1e-15);
        assert!((inf - 0.584963).abs() < 1e-6);
        let one = sibson_mi(&s, LeakageOrder::SHANNON);
        let oracle = 1.0 - shannon_entropy(&d(&[0.25, 0.75]));
        assert!((one - oracle).abs() < 1e-15);
        assert!((one - 0.188722).abs() < 1e-6);

        let id = Scenario::new(
            Distribution::uniform(4).unwrap(),
            Channel::identity(4).unwrap(),
        )
        .unwrap();
        assert!((sibson_mi(&id, LeakageOrder::Infinity) - 2.0).abs() < 1e-15);
        assert!((sibson_mi(&id, LeakageOrder::Finite(3.0)) - 2.0).abs() < 1e-12);

        let product = Scenario::new(
            d(&[0.2, 0.3, 0.5]),
            Channel::from_rows(&[[0.1, 0.9]; 3]).unwrap(),
        )
        .unwrap();
        for o in [1.0, 1.5, 2.0, 100.0] {
            assert!(sibson_mi(&product, LeakageOrder::Finite(o)).abs() < 1e-12);
        }
        assert!(sibson_mi(&product, LeakageOrder::Infinity).abs() < 1e-12);
    }

    #[test]
    fn sibson_finite_order_matches_direct_formula() {
        let s = Scenario::new(
            d(&[0.2, 0.5, 0.3]),
            Channel::from_rows(&[[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]]).unwrap(),
        )
        .unwrap();
        let alpha: f64 = 2.5;
        let c = s.channel();
        let direct: f64 = (0..3)
            .map(|y| {
                (0..3)
                    .map(|x| s.prior()[x] * c.row(x)[y].powf(alpha))
                    .sum::<f64>()
                    .powf(1.0 / alpha)
            })
            .sum::<f64>()
            .log2()
            * alpha
            / (alpha - 1.0);
        assert!((sibson_mi(&s, LeakageOrder::Finite(alpha)) - direct).abs() < 1e-13);
        // huge orders stay finite
        let big = sibson_mi(&s, LeakageOrder::Finite(1e6));
        assert!((big - sibson_mi(&s, LeakageOrder::Infinity)).abs() < 1e-5);
    }
}
