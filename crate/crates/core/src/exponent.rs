//! Convergence exponent of composed leakage: pairwise Chernoff minimum, the
//! second-closest-row divergence infimum over the simplex, gap sweeps and
//! regression fits of the observed decay rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::composition::{second_smallest_divergence, Composer};
use crate::error::{Error, Result};
use crate::measures::{chernoff_information, renyi_entropy, ChernoffResult};
use crate::prob::{Channel, Distribution, LeakageOrder, Scenario};
use crate::simplex;

/// Pairwise Chernoff values closer than this are treated as ties.
const TIE_TOL: f64 = 1e-12;

/// Smallest Chernoff information over all unordered pairs of channel rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseChernoff {
    pub value: f64,
    pub pair: (usize, usize),
    pub chernoff: ChernoffResult,
}

pub fn min_pairwise_chernoff(channel: &Channel) -> Result<PairwiseChernoff> {
    let rows = channel.rows();
    if rows.len() < 2 {
        return Err(Error::SingleRowChannel);
    }
    let mut best: Option<PairwiseChernoff> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let c = chernoff_information(&rows[i], &rows[j])?;
            let better = match &best {
                None => true,
                Some(b) => c.value < b.value - TIE_TOL,
            };
            if better {
                best = Some(PairwiseChernoff {
                    value: c.value,
                    pair: (i, j),
                    chernoff: c,
                });
            }
        }
    }
    Ok(best.expect("at least one pair"))
}

/// Search settings for [`lemma1_infimum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfimumSearch {
    /// Denominator of the grid of seed points.
    pub grid_k: usize,
    /// Nelder–Mead iterations per seed.
    pub refine_iters: usize,
    /// Extra uniformly random seeds.
    pub restarts: usize,
    pub seed: u64,
}

impl InfimumSearch {
    pub fn for_outputs(outputs: usize) -> Self {
        Self {
            grid_k: default_grid_k(outputs),
            refine_iters: 200,
            restarts: 8,
            seed: 0x5eed,
        }
    }
}

/// Grid denominator that keeps the seed count in the low thousands.
pub fn default_grid_k(outputs: usize) -> usize {
    match outputs {
        0..=3 => 40,
        4 => 15,
        5 => 8,
        6 => 6,
        _ => 3,
    }
}

/// Approximate minimizer of `D(P || Q_{x2(P)})` over the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMinimum {
    pub value: f64,
    pub argmin: Distribution,
}

/// Approximates `inf_P D(P || Q_{x2(P)})`, where `x2(P)` is the row second
/// closest to `P` in relative entropy.
///
/// Seeds are every grid point with denominator `grid_k`, the equalizing tilt
/// of every pair of rows, and a few random points. Each seed is refined by a
/// local search and the best `(value, seed index)` wins. The pairwise tilted
/// seeds make the result never exceed the pairwise Chernoff minimum.
pub fn lemma1_infimum(
    channel: &Channel,
    grid_k: usize,
    refine_iters: usize,
) -> Result<SimplexMinimum> {
    let mut search = InfimumSearch::for_outputs(channel.output_size());
    search.grid_k = grid_k;
    search.refine_iters = refine_iters;
    lemma1_infimum_with(channel, &search)
}

pub fn lemma1_infimum_with(channel: &Channel, search: &InfimumSearch) -> Result<SimplexMinimum> {
    let rows = channel.rows();
    if rows.len() < 2 {
        return Err(Error::SingleRowChannel);
    }
    let m = channel.output_size();

    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if let Some(t) = chernoff_information(&rows[i], &rows[j])?.tilted {
                seeds.push(t.probs().to_vec());
            }
        }
    }
    if search.grid_k > 0 {
        let k = search.grid_k as f64;
        let mut walker = Composer::default().walker(search.grid_k, m)?;
        while let Some(c) = walker.advance() {
            seeds.push(c.iter().map(|&v| v as f64 / k).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for _ in 0..search.restarts {
        // exponential spacings give a uniform point on the simplex
        let w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        seeds.push(w.iter().map(|v| v / total).collect());
    }

    let objective = |p: &[f64]| second_smallest_divergence(p, channel);
    let (value, _, argmin) = seeds
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (v, p) = simplex::minimize(objective, s, search.refine_iters, 0.5);
            (v, i, p)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one seed");

    let argmin = Distribution::from_weights(&argmin)?;
    Ok(SimplexMinimum { value, argmin })
}

/// Both sides of the equality between the simplex infimum and the pairwise
/// Chernoff minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub infimum_value: f64,
    pub argmin_distribution: Distribution,
    pub pairwise_min: f64,
    pub argmin_pair: (usize, usize),
    pub gap: f64,
    pub tol: f64,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.gap <= self.tol
    }
}

pub fn verify_lemma1(channel: &Channel, tol: f64) -> Result<Lemma1Report> {
    verify_lemma1_with(
        channel,
        tol,
        &InfimumSearch::for_outputs(channel.output_size()),
    )
}

pub fn verify_lemma1_with(
    channel: &Channel,
    tol: f64,
    search: &InfimumSearch,
) -> Result<Lemma1Report> {
    let pairwise = min_pairwise_chernoff(channel)?;
    let inf = lemma1_infimum_with(channel, search)?;
    let gap = if inf.value == pairwise.value {
        0.0
    } else {
        (inf.value - pairwise.value).abs()
    };
    Ok(Lemma1Report {
        infimum_value: inf.value,
        argmin_distribution: inf.argmin,
        pairwise_min: pairwise.value,
        argmin_pair: pairwise.pair,
        gap,
        tol,
    })
}

/// Composed leakage and its distance to the limiting Rényi entropy at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub n: usize,
    pub leakage: f64,
    pub gap: f64,
}

/// `H_{1/alpha}(X) - I_alpha^S(X; Y^n)` for each requested `n`, clamped at zero.
pub fn gap_series(
    scenario: &Scenario,
    order: LeakageOrder,
    n_values: &[usize],
) -> Result<Vec<GapPoint>> {
    gap_series_with(&Composer::default(), scenario, order, n_values)
}

pub fn gap_series_with(
    composer: &Composer,
    scenario: &Scenario,
    order: LeakageOrder,
    n_values: &[usize],
) -> Result<Vec<GapPoint>> {
    if n_values.first() == Some(&0) {
        return Err(Error::InvalidSweep("n must be positive".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSweep(
            "n values must be strictly ascending".into(),
        ));
    }
    let ceiling = renyi_entropy(scenario.prior(), order.ceiling_order());
    n_values
        .par_iter()
        .map(|&n| {
            let leakage = composer.composed_sibson_mi(scenario, order, n)?;
            Ok(GapPoint {
                n,
                leakage,
                gap: (ceiling - leakage).max(0.0),
            })
        })
        .collect()
}

/// Least-squares fit of `-log2(gap)` against `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    /// Decay rate in bits per observation.
    pub slope: f64,
    pub intercept: f64,
    pub max_abs_residual: f64,
    pub n_range: (usize, usize),
    pub points_used: usize,
}

pub const MIN_FIT_POINTS: usize = 5;
pub const DEFAULT_GAP_FLOOR: f64 = 1e-12;
pub const DEFAULT_FIT_N_MIN: usize = 40;

/// Which points of a series enter the regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub n_min: usize,
    pub n_max: usize,
    /// Gaps at or below this are dropped as floating-point noise.
    pub gap_floor: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            n_min: DEFAULT_FIT_N_MIN,
            n_max: usize::MAX,
            gap_floor: DEFAULT_GAP_FLOOR,
        }
    }
}

impl FitWindow {
    pub fn all() -> Self {
        Self {
            n_min: 0,
            ..Self::default()
        }
    }
}

/// Fits every point of the series whose gap clears the default floor.
pub fn fit_exponent(series: &[(usize, f64)]) -> Result<ExponentFit> {
    fit_exponent_with(series, &FitWindow::all())
}

pub fn fit_exponent_with(series: &[(usize, f64)], window: &FitWindow) -> Result<ExponentFit> {
    let in_window: Vec<(usize, f64)> = series
        .iter()
        .copied()
        .filter(|&(n, _)| n >= window.n_min && n <= window.n_max)
        .collect();
    let points: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|&&(_, g)| g > window.gap_floor && g.is_finite())
        .map(|&(n, g)| (n as f64, -g.log2()))
        .collect();
    if points.is_empty() && !in_window.is_empty() {
        return Err(Error::AllGapsUnderflow {
            floor: window.gap_floor,
        });
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            found: points.len(),
        });
    }

    let k = points.len() as f64;
    let mean_n = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_n).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_n) * (p.1 - mean_y)).sum();
    if sxx <= 0.0 {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            found: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_n;
    let max_abs_residual = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    let n_lo = points.iter().map(|p| p.0 as usize).min().unwrap_or(0);
    let n_hi = points.iter().map(|p| p.0 as usize).max().unwrap_or(0);
    Ok(ExponentFit {
        slope,
        intercept,
        max_abs_residual,
        n_range: (n_lo, n_hi),
        points_used: points.len(),
    })
}
