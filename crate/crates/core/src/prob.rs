//! Validated probability objects: distributions, channels, scenarios, and
//! the row-equivalence quotient of a scenario.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of an already-normalized vector.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Normalizes nonnegative weights into a distribution.
    ///
    /// Vectors whose sum is within [`NORMALIZATION_TOL`] of one are kept
    /// bit-for-bit; anything else is divided by its sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::from_weights_checked(weights).map(|(d, _)| d)
    }

    /// Like [`Distribution::from_weights`], also returning the original total
    /// mass when the input had to be rescaled.
    pub fn from_weights_checked(weights: &[f64]) -> Result<(Self, Option<f64>)> {
        if weights.is_empty() {
            return Err(Error::EmptyAlphabet { row: None });
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { row: None, index });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight {
                    row: None,
                    index,
                    value: w,
                });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotalMass { row: None });
        }
        if (total - 1.0).abs() <= NORMALIZATION_TOL {
            return Ok((
                Self {
                    probs: weights.to_vec(),
                },
                None,
            ));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Ok((Self { probs }, Some(total)))
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet { row: None });
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    /// Point mass on `index`.
    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        if index >= size {
            return Err(Error::AlphabetMismatch(index + 1, size));
        }
        let mut probs = vec![0.0; size];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    /// Wraps a vector that is known to be normalized (internal constructions only).
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(!probs.is_empty());
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// A row-stochastic matrix; row `x` is the output distribution given input `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Distribution>,
}

impl Channel {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows_checked(rows).map(|(c, _)| c)
    }

    /// Builds a channel, also listing `(row, original mass)` for every row
    /// that needed renormalization.
    pub fn from_rows_checked<R: AsRef<[f64]>>(rows: &[R]) -> Result<(Self, Vec<(usize, f64)>)> {
        let first = rows.first().ok_or(Error::EmptyChannel)?;
        let width = first.as_ref().len();
        let mut out = Vec::with_capacity(rows.len());
        let mut corrected = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::RaggedRows {
                    row: r,
                    expected: width,
                    found: row.len(),
                });
            }
            let (dist, fix) = Distribution::from_weights_checked(row).map_err(|e| e.in_row(r))?;
            if let Some(total) = fix {
                corrected.push((r, total));
            }
            out.push(dist);
        }
        Ok((Self { rows: out }, corrected))
    }

    pub fn from_distributions(rows: Vec<Distribution>) -> Result<Self> {
        let width = rows.first().ok_or(Error::EmptyChannel)?.alphabet_size();
        if let Some((r, d)) = rows
            .iter()
            .enumerate()
            .find(|(_, d)| d.alphabet_size() != width)
        {
            return Err(Error::RaggedRows {
                row: r,
                expected: width,
                found: d.alphabet_size(),
            });
        }
        Ok(Self { rows })
    }

    /// The noiseless channel on `size` symbols.
    pub fn identity(size: usize) -> Result<Self> {
        (0..size)
            .map(|i| Distribution::point_mass(size, i))
            .collect::<Result<Vec<_>>>()
            .and_then(Self::from_distributions)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn binary_symmetric(p: f64) -> Result<Self> {
        Self::from_rows(&[[1.0 - p, p], [p, 1.0 - p]])
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].alphabet_size()
    }

    /// True when no two rows are within `row_tol` of each other in max-norm.
    pub fn has_unique_rows(&self, row_tol: f64) -> bool {
        self.rows.iter().enumerate().all(|(i, a)| {
            self.rows[i + 1..]
                .iter()
                .all(|b| a.max_abs_diff(b) > row_tol)
        })
    }
}

/// A prior over inputs together with a channel; the unit every analysis runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    prior: Distribution,
    channel: Channel,
    x_labels: Option<Vec<String>>,
    y_labels: Option<Vec<String>>,
}

impl Scenario {
    /// Pairs a prior with a channel. The prior must give every input positive mass.
    pub fn new(prior: Distribution, channel: Channel) -> Result<Self> {
        if prior.alphabet_size() != channel.input_size() {
            return Err(Error::PriorChannelMismatch {
                prior: prior.alphabet_size(),
                rows: channel.input_size(),
            });
        }
        if let Some(index) = prior.probs().iter().position(|&p| p <= 0.0) {
            return Err(Error::PriorNotFullSupport { index });
        }
        Ok(Self {
            prior,
            channel,
            x_labels: None,
            y_labels: None,
        })
    }

    pub fn with_labels(
        mut self,
        x_labels: Option<Vec<String>>,
        y_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(l) = &x_labels {
            if l.len() != self.channel.input_size() {
                return Err(Error::LabelCountMismatch {
                    what: "x",
                    expected: self.channel.input_size(),
                    found: l.len(),
                });
            }
        }
        if let Some(l) = &y_labels {
            if l.len() != self.channel.output_size() {
                return Err(Error::LabelCountMismatch {
                    what: "y",
                    expected: self.channel.output_size(),
                    found: l.len(),
                });
            }
        }
        self.x_labels = x_labels;
        self.y_labels = y_labels;
        Ok(self)
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn x_labels(&self) -> Option<&[String]> {
        self.x_labels.as_deref()
    }

    pub fn y_labels(&self) -> Option<&[String]> {
        self.y_labels.as_deref()
    }
}

/// Order of Sibson mutual information: a finite `alpha >= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeakageOrder {
    Finite(f64),
    Infinity,
}

/// Orders this close to one are evaluated as Shannon mutual information.
pub const SHANNON_BAND: f64 = 1e-8;

impl LeakageOrder {
    pub const SHANNON: LeakageOrder = LeakageOrder::Finite(1.0);

    pub fn finite(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha >= 1.0 {
            Ok(LeakageOrder::Finite(alpha))
        } else {
            Err(Error::InvalidOrder(alpha.to_string()))
        }
    }

    pub fn is_shannon(&self) -> bool {
        matches!(self, LeakageOrder::Finite(a) if (a - 1.0).abs() < SHANNON_BAND)
    }

    /// The Rényi order `1/alpha` whose entropy of the prior caps the leakage.
    pub fn ceiling_order(&self) -> f64 {
        match *self {
            LeakageOrder::Finite(a) => 1.0 / a,
            LeakageOrder::Infinity => 0.0,
        }
    }
}

impl FromStr for LeakageOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(LeakageOrder::Infinity),
            _ => {}
        }
        let alpha: f64 = t.parse().map_err(|_| Error::InvalidOrder(s.to_string()))?;
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::InvalidOrder(s.to_string()));
        }
        Ok(LeakageOrder::Finite(alpha))
    }
}

impl fmt::Display for LeakageOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeakageOrder::Finite(a) => write!(f, "{a}"),
            LeakageOrder::Infinity => f.write_str("inf"),
        }
    }
}

/// Result of merging inputs with identical channel rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub scenario: Scenario,
    /// Class index of every original input.
    pub mapping: Vec<usize>,
}

impl Quotient {
    pub fn merged(&self) -> bool {
        self.scenario.channel().input_size() < self.mapping.len()
    }
}

/// Groups inputs whose rows agree within `row_tol` (max-norm) into classes.
///
/// Each class is represented by its first member in input order and receives
/// the summed prior mass of its members. A row joins the first existing class
/// whose representative it matches, so representatives are pairwise farther
/// apart than `row_tol` and the operation is idempotent.
pub fn quotient_channel(scenario: &Scenario, row_tol: f64) -> Result<Quotient> {
    if !row_tol.is_finite() || row_tol < 0.0 {
        return Err(Error::InvalidTolerance(row_tol));
    }
    let channel = scenario.channel();
    let mut reps: Vec<usize> = Vec::new();
    let mut mass: Vec<f64> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut mapping = Vec::with_capacity(channel.input_size());

    for (x, row) in channel.rows().iter().enumerate() {
        let class = reps
            .iter()
            .position(|&r| channel.row(r).max_abs_diff(row) <= row_tol);
        let class = match class {
            Some(c) => c,
            None => {
                reps.push(x);
                mass.push(0.0);
                members.push(Vec::new());
                reps.len() - 1
            }
        };
        mass[class] += scenario.prior()[x];
        members[class].push(x);
        mapping.push(class);
    }

    if reps.len() == channel.input_size() {
        return Ok(Quotient {
            scenario: scenario.clone(),
            mapping,
        });
    }

    let rows = reps.iter().map(|&r| channel.row(r).clone()).collect();
    let prior = Distribution::from_weights(&mass)?;
    let x_labels = scenario.x_labels().map(|labels| {
        members
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&x| labels[x].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect()
    });
    let quotient = Scenario::new(prior, Channel::from_distributions(rows)?)?
        .with_labels(x_labels, scenario.y_labels().map(<[String]>::to_vec))?;
    Ok(Quotient {
        scenario: quotient,
        mapping,
    })
}
