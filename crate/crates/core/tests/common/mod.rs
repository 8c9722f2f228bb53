//! Test-only helpers: seeded random scenarios and a brute-force oracle that
//! sums over every output sequence instead of over type classes.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sibson_leakage::{Channel, Distribution, LeakageOrder, Scenario};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random full-support probability vector with every entry >= `floor`.
pub fn random_probs(rng: &mut ChaCha8Rng, m: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let spread = 1.0 - floor * m as f64;
    w.iter().map(|v| floor + spread * v / total).collect()
}

pub fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize, floor: f64) -> Channel {
    let rows: Vec<Vec<f64>> = (0..rows).map(|_| random_probs(rng, cols, floor)).collect();
    Channel::from_rows(&rows).unwrap()
}

/// Random scenario with |X| and |Y| drawn from `2..=max_x` and `2..=max_y`.
pub fn random_scenario(rng: &mut ChaCha8Rng, max_x: usize, max_y: usize) -> Scenario {
    let nx = rng.gen_range(2..=max_x);
    let ny = rng.gen_range(2..=max_y);
    let prior = Distribution::from_weights(&random_probs(rng, nx, 0.02)).unwrap();
    Scenario::new(prior, random_channel(rng, nx, ny, 0.01)).unwrap()
}

pub fn bsc_scenario(prior: &[f64]) -> Scenario {
    Scenario::new(
        Distribution::from_weights(prior).unwrap(),
        Channel::binary_symmetric(0.25).unwrap(),
    )
    .unwrap()
}

/// Conditional probability of every length-`n` sequence under each input,
/// by direct products over the sequence.
fn sequence_probs(channel: &Channel, n: usize) -> Vec<Vec<f64>> {
    let m = channel.output_size();
    let total = m.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut seq = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            seq.push(c % m);
            c /= m;
        }
        out.push(
            channel
                .rows()
                .iter()
                .map(|row| seq.iter().map(|&y| row[y]).product())
                .collect(),
        );
    }
    out
}

/// `I_alpha^S(X; Y^n)` by summing over all `|Y|^n` sequences.
pub fn brute_force_composed(s: &Scenario, order: LeakageOrder, n: usize) -> f64 {
    let prior = s.prior().probs();
    let seqs = sequence_probs(s.channel(), n);
    match order {
        LeakageOrder::Infinity => seqs
            .iter()
            .map(|q| q.iter().copied().fold(0.0, f64::max))
            .sum::<f64>()
            .log2(),
        LeakageOrder::Finite(a) if (a - 1.0).abs() < 1e-8 => {
            let mut mi = 0.0;
            for q in &seqs {
                let py: f64 = q.iter().zip(prior).map(|(a, b)| a * b).sum();
                for (&qx, &px) in q.iter().zip(prior) {
                    if qx > 0.0 {
                        mi += px * qx * (qx / py).log2();
                    }
                }
            }
            mi
        }
        LeakageOrder::Finite(a) => {
            let total: f64 = seqs
                .iter()
                .map(|q| {
                    q.iter()
                        .zip(prior)
                        .map(|(qx, px)| px * qx.powf(a))
                        .sum::<f64>()
                        .powf(1.0 / a)
                })
                .sum();
            a / (a - 1.0) * total.log2()
        }
    }
}

pub const ORDERS: [LeakageOrder; 3] = [
    LeakageOrder::Finite(1.0),
    LeakageOrder::Finite(2.0),
    LeakageOrder::Infinity,
];
