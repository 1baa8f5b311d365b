//! Seeded Monte Carlo simulation of the game's micro-foundations.
//!
//! Rebel resources `R` are drawn with CDF `Z` and the foreign actor's
//! material benefit `B` with CDF `1 - W`, both by inverse transform. Conflicts
//! are won by the side with more resources after damage (ties split evenly);
//! an intervention hands the win to the rebels.
//!
//! Samples are generated in fixed chunks of [`CHUNK`]; chunk `i` uses stream
//! `i` of a ChaCha8 generator keyed by the seed. Per-chunk statistics are
//! merged in chunk order, so estimates depend only on `(seed, n)` and never on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{Direction, MonotoneFunction};
use crate::game::{Action, ActionProfile, Model};

pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    model: Model,
    n_samples: u64,
    seed: u64,
    profile: ActionProfile,
}

impl SimConfig {
    pub fn new(model: Model, n_samples: u64, seed: u64, profile: ActionProfile) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::ParameterDomain {
                name: "n",
                value: 0.0,
                reason: "need at least one sample",
            });
        }
        if model.z().direction() != Direction::Increasing || model.z().inverse(0.5).is_err() {
            return Err(Error::SamplingUnsupported("Z must be an invertible increasing CDF"));
        }
        if model.w().direction() != Direction::Decreasing || model.w().inverse(0.5).is_err() {
            return Err(Error::SamplingUnsupported("W must be invertible and decreasing"));
        }
        Ok(Self {
            model,
            n_samples,
            seed,
            profile,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn profile(&self) -> ActionProfile {
        self.profile
    }

    pub fn with_profile(&self, profile: ActionProfile) -> Self {
        Self {
            profile,
            ..self.clone()
        }
    }

    fn chunks(&self) -> impl IndexedParallelIterator<Item = (u64, u64)> + '_ {
        let count = usize::try_from(self.n_samples.div_ceil(CHUNK)).expect("chunk count fits usize");
        (0..count).into_par_iter().map(move |i| {
            let i = i as u64;
            let len = CHUNK.min(self.n_samples - i * CHUNK);
            (i, len)
        })
    }

    fn stream(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl SimEstimate {
    /// `(mean - expected) / std_error`; `None` when the standard error is
    /// zero and the mean differs from `expected`.
    pub fn z_score(&self, expected: f64) -> Option<f64> {
        let diff = self.mean - expected;
        if self.std_error > 0.0 {
            Some(diff / self.std_error)
        } else if diff == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn within(&self, expected: f64, sigmas: f64) -> bool {
        (self.mean - expected).abs() <= sigmas * self.std_error
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    sum: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        self.sum += x;
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Moments {
            n,
            mean,
            m2,
            sum: self.sum + other.sum,
        }
    }

    fn estimate(&self) -> SimEstimate {
        let std_error = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        SimEstimate {
            mean: self.mean,
            std_error,
            n: self.n,
        }
    }
}

/// Draws `n` per-sample statistic vectors and reduces them chunk by chunk.
fn accumulate<const K: usize, F>(cfg: &SimConfig, sample: F) -> [Moments; K]
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    let partials: Vec<[Moments; K]> = cfg
        .chunks()
        .map(|(i, len)| {
            let mut rng = cfg.stream(i);
            let mut acc = [Moments::default(); K];
            for _ in 0..len {
                for (m, x) in acc.iter_mut().zip(sample(&mut rng)) {
                    m.push(x);
                }
            }
            acc
        })
        .collect();
    partials.into_iter().fold([Moments::default(); K], |acc, p| {
        let mut out = acc;
        for (o, q) in out.iter_mut().zip(p) {
            *o = o.merge(q);
        }
        out
    })
}

fn draw_rebel_resources(model: &Model, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    model
        .z()
        .inverse(u)
        .expect("Z invertible on [0, 1), checked in SimConfig::new")
}

/// One simulated play of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub r: f64,
    pub intervened: bool,
    pub gov_wins: bool,
    pub gov_payoff: f64,
    pub reb_payoff: f64,
}

fn simulate_one(model: &Model, profile: ActionProfile, rng: &mut ChaCha8Rng) -> SampleOutcome {
    let (g, l, phi) = (model.g(), model.l(), model.phi());
    let r = draw_rebel_resources(model, rng);
    let gov_attacks = profile.gov == Action::Attack;
    let reb_attacks = profile.reb == Action::Attack;

    // F only moves after a government attack
    let intervened = gov_attacks && {
        let exogenous = rng.random::<f64>() < phi;
        let v: f64 = rng.random();
        let benefit = model
            .w()
            .inverse(1.0 - v)
            .expect("W invertible on (0, 1], checked in SimConfig::new");
        exogenous || benefit > g
    };

    let gov_wins = if intervened {
        false
    } else {
        let gov_eff = if reb_attacks { g - l } else { g };
        let reb_eff = if gov_attacks { r - l } else { r };
        if gov_eff > reb_eff {
            true
        } else if gov_eff < reb_eff {
            false
        } else {
            rng.random::<bool>()
        }
    };

    let cost = if profile.any_attack() { model.c() } else { 0.0 };
    let win = if gov_wins { 1.0 } else { 0.0 };
    SampleOutcome {
        r,
        intervened,
        gov_wins,
        gov_payoff: win - cost,
        reb_payoff: -win - cost,
    }
}

/// Inverse-transform draws of the rebels' resources, in sample order.
pub fn sample_rebel_resources(cfg: &SimConfig) -> Vec<f64> {
    let parts: Vec<Vec<f64>> = cfg
        .chunks()
        .map(|(i, len)| {
            let mut rng = cfg.stream(i);
            (0..len).map(|_| draw_rebel_resources(&cfg.model, &mut rng)).collect()
        })
        .collect();
    parts.concat()
}

/// Frequency of `effective > R`, counting exact ties as one half.
pub fn estimate_win_prob(cfg: &SimConfig, effective: f64) -> SimEstimate {
    let [m] = accumulate(cfg, |rng| {
        let r = draw_rebel_resources(&cfg.model, rng);
        let x = if effective > r {
            1.0
        } else if effective == r {
            0.5
        } else {
            0.0
        };
        [x]
    });
    m.estimate()
}

/// Frequency of foreign intervention under the configured profile. Zero
/// for profiles in which the government keeps the peace.
pub fn estimate_intervention_prob(cfg: &SimConfig) -> SimEstimate {
    simulate(cfg).intervention
}

/// Mean realized payoffs `(government, rebels)`.
pub fn estimate_payoffs(cfg: &SimConfig) -> (SimEstimate, SimEstimate) {
    let s = simulate(cfg);
    (s.gov_payoff, s.reb_payoff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    pub gov_payoff: SimEstimate,
    pub reb_payoff: SimEstimate,
    pub intervention: SimEstimate,
    pub interventions: u64,
    pub gov_win: SimEstimate,
}

pub fn simulate(cfg: &SimConfig) -> SimSummary {
    let [gov, reb, inter, win] = accumulate(cfg, |rng| {
        let o = simulate_one(&cfg.model, cfg.profile, rng);
        [
            o.gov_payoff,
            o.reb_payoff,
            f64::from(u8::from(o.intervened)),
            f64::from(u8::from(o.gov_wins)),
        ]
    });
    SimSummary {
        gov_payoff: gov.estimate(),
        reb_payoff: reb.estimate(),
        intervention: inter.estimate(),
        interventions: inter.sum as u64,
        gov_win: win.estimate(),
    }
}

/// Every simulated play, in sample order; same draws as [`simulate`].
pub fn raw_samples(cfg: &SimConfig) -> Vec<SampleOutcome> {
    let parts: Vec<Vec<SampleOutcome>> = cfg
        .chunks()
        .map(|(i, len)| {
            let mut rng = cfg.stream(i);
            (0..len)
                .map(|_| simulate_one(&cfg.model, cfg.profile, &mut rng))
                .collect()
        })
        .collect();
    parts.concat()
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: MonotoneFunction + ?Sized>(samples: &[f64], cdf: &F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf.eval(x);
            let above = (i as f64 + 1.0) / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}
