//! Event-level sampling of the heralded experiment.
//!
//! Each heralded event is first assigned a provenance: with probability
//! `e_dc` the herald came from a dark count and the atoms are in the fully
//! mixed state, otherwise they carry the swapped Werner state. The four-way
//! outcome is then drawn from the readout model's joint distribution.
//!
//! Randomness is split into independent ChaCha streams keyed by
//! `(seed, replica, setting, block)`, so the result does not depend on how
//! many threads execute the blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chsh::{
    correlator, delta_s_coefficient, s_from_counts, s_from_distributions, ChshSettings,
    DeviationForm, SettingCounts,
};
use crate::detection::{DetectionModel, JointDistribution};
use crate::error::{Error, Result};
use crate::quantum_state::{Visibility, WernerState};
use crate::swap_chain::HeraldStats;

/// Events per RNG stream.
const BLOCK: u64 = 1 << 16;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream addressed by `path` under `seed`.
fn stream_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |acc, &p| {
        mix64(
            acc ^ p
                .wrapping_add(0x9e37_79b9_7f4a_7c15)
                .wrapping_mul(0xd6e8_feb8_6659_fd93),
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationPlan {
    pub seed: u64,
    pub n_events: u64,
    pub settings: ChshSettings,
    /// State conditioned on a true herald.
    pub state: WernerState,
    pub detection: DetectionModel,
    /// When present, heralds are dark-count induced with probability `e_dc`.
    pub herald: Option<HeraldStats>,
    /// Events per CHSH setting, in CHSH order.
    pub allocation: [u64; 4],
}

impl SimulationPlan {
    /// Plan with the events split as evenly as possible; any remainder goes
    /// to the first settings.
    pub fn new(
        seed: u64,
        n_events: u64,
        settings: ChshSettings,
        state: WernerState,
        detection: DetectionModel,
    ) -> Self {
        let base = n_events / 4;
        let rem = n_events % 4;
        let allocation = std::array::from_fn(|i| base + u64::from((i as u64) < rem));
        SimulationPlan {
            seed,
            n_events,
            settings,
            state,
            detection,
            herald: None,
            allocation,
        }
    }

    pub fn with_herald(mut self, herald: HeraldStats) -> Self {
        self.herald = Some(herald);
        self
    }

    pub fn with_allocation(mut self, allocation: [u64; 4]) -> Self {
        self.allocation = allocation;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.allocation.iter().sum::<u64>() != self.n_events {
            return Err(Error::Config(format!(
                "allocation {:?} does not sum to n_events = {}",
                self.allocation, self.n_events
            )));
        }
        if self.allocation.contains(&0) {
            return Err(Error::Config(format!(
                "every setting needs at least one event, allocation is {:?}",
                self.allocation
            )));
        }
        self.settings.validate()?;
        self.detection.validate()?;
        Ok(())
    }

    fn dark_weight(&self) -> f64 {
        self.herald.map_or(0.0, |h| h.e_dc)
    }

    fn true_and_dark_distributions(&self) -> Result<[(JointDistribution, JointDistribution); 4]> {
        let mixed = WernerState::new(Visibility::ZERO, self.state.target);
        let truth = self.settings.distributions(&self.detection, &self.state)?;
        let dark = self.settings.distributions(&self.detection, &mixed)?;
        Ok(std::array::from_fn(|i| (truth[i], dark[i])))
    }

    /// Per-setting outcome distribution averaged over herald provenance.
    pub fn expected_distributions(&self) -> Result<[JointDistribution; 4]> {
        let w = self.dark_weight();
        Ok(self
            .true_and_dark_distributions()?
            .map(|(t, d)| t.mix(&d, w)))
    }

    pub fn analytic_s(&self) -> Result<f64> {
        Ok(s_from_distributions(&self.expected_distributions()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationReport {
    pub counts: [SettingCounts; 4],
    pub s_empirical: f64,
    /// Plug-in standard error of `s_empirical`, `sqrt(sum (1 - E_i^2) / N_s,i)`.
    pub s_standard_error: f64,
    pub dark_events: u64,
    pub dark_fraction_empirical: f64,
}

/// Cumulative outcome thresholds in the order uu, ud, du, dd.
fn cumulative(d: &JointDistribution) -> [f64; 3] {
    [d.p_uu, d.p_uu + d.p_ud, d.p_uu + d.p_ud + d.p_du]
}

#[derive(Clone, Copy)]
struct Block {
    setting: usize,
    index: u64,
    len: u64,
}

fn run_block(
    seed: u64,
    block: Block,
    dark_weight: f64,
    truth: &[f64; 3],
    dark: &[f64; 3],
) -> (SettingCounts, u64) {
    let mut rng =
        ChaCha8Rng::seed_from_u64(stream_seed(seed, &[block.setting as u64, block.index]));
    let mut counts = SettingCounts::default();
    let mut dark_events = 0;
    for _ in 0..block.len {
        let is_dark = dark_weight > 0.0 && rng.random::<f64>() < dark_weight;
        let cdf = if is_dark {
            dark_events += 1;
            dark
        } else {
            truth
        };
        let u: f64 = rng.random();
        if u < cdf[0] {
            counts.n_uu += 1;
        } else if u < cdf[1] {
            counts.n_ud += 1;
        } else if u < cdf[2] {
            counts.n_du += 1;
        } else {
            counts.n_dd += 1;
        }
    }
    (counts, dark_events)
}

/// Samples every heralded event of the plan.
///
/// Work is spread over the current rayon pool; see [`with_workers`].
pub fn simulate(plan: &SimulationPlan) -> Result<SimulationReport> {
    plan.validate()?;
    let dists = plan.true_and_dark_distributions()?;
    let cdfs: Vec<([f64; 3], [f64; 3])> = dists
        .iter()
        .map(|(t, d)| (cumulative(t), cumulative(d)))
        .collect();
    let dark_weight = plan.dark_weight();

    let blocks: Vec<Block> = plan
        .allocation
        .iter()
        .enumerate()
        .flat_map(|(setting, &n)| {
            (0..n.div_ceil(BLOCK)).map(move |index| Block {
                setting,
                index,
                len: BLOCK.min(n - index * BLOCK),
            })
        })
        .collect();

    let results: Vec<(usize, SettingCounts, u64)> = blocks
        .par_iter()
        .map(|&b| {
            let (truth, dark) = &cdfs[b.setting];
            let (c, d) = run_block(plan.seed, b, dark_weight, truth, dark);
            (b.setting, c, d)
        })
        .collect();

    let mut counts = [SettingCounts::default(); 4];
    let mut dark_events = 0;
    for (setting, c, d) in &results {
        counts[*setting].add(c);
        dark_events += d;
    }

    let mut variance = 0.0;
    for c in &counts {
        let e = correlator(c)?;
        variance += (1.0 - e * e) / c.n_s() as f64;
    }

    Ok(SimulationReport {
        counts,
        s_empirical: s_from_counts(&counts)?,
        s_standard_error: variance.sqrt(),
        dark_events,
        dark_fraction_empirical: dark_events as f64 / plan.n_events as f64,
    })
}

/// Spread of `S` over independent replicas, with the analytic predictions it
/// is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSummary {
    pub n_replicas: usize,
    pub n_events: u64,
    pub s_analytic: f64,
    pub s_mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub s_std: f64,
    pub dark_fraction_mean: f64,
    pub predicted_reference: f64,
    pub predicted_binomial: f64,
    pub predicted_correlator: f64,
    pub replicas: Vec<SimulationReport>,
}

impl ScatterSummary {
    pub fn ratio_to_reference(&self) -> f64 {
        self.s_std / self.predicted_reference
    }

    pub fn ratio_to_binomial(&self) -> f64 {
        self.s_std / self.predicted_binomial
    }

    pub fn ratio_to_correlator(&self) -> f64 {
        self.s_std / self.predicted_correlator
    }

    /// Standard error of `s_mean`.
    pub fn mean_standard_error(&self) -> f64 {
        self.s_std / (self.n_replicas as f64).sqrt()
    }
}

pub fn replicate(plan: &SimulationPlan, n_replicas: usize) -> Result<ScatterSummary> {
    if n_replicas < 2 {
        return Err(Error::Config(format!(
            "need at least 2 replicas, got {n_replicas}"
        )));
    }
    plan.validate()?;

    let replicas: Vec<SimulationReport> = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| simulate(&plan.with_seed(stream_seed(plan.seed, &[u64::MAX, r]))))
        .collect::<Result<_>>()?;

    let n = n_replicas as f64;
    let s_mean = replicas.iter().map(|r| r.s_empirical).sum::<f64>() / n;
    let s_var = replicas
        .iter()
        .map(|r| (r.s_empirical - s_mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let dark_fraction_mean = replicas
        .iter()
        .map(|r| r.dark_fraction_empirical)
        .sum::<f64>()
        / n;

    let expected = plan.expected_distributions()?;
    let sqrt_n = (plan.n_events as f64).sqrt();
    let predicted = |form| delta_s_coefficient(&expected, form) / sqrt_n;

    Ok(ScatterSummary {
        n_replicas,
        n_events: plan.n_events,
        s_analytic: s_from_distributions(&expected),
        s_mean,
        s_std: s_var.sqrt(),
        dark_fraction_mean,
        predicted_reference: predicted(DeviationForm::Reference),
        predicted_binomial: predicted(DeviationForm::Binomial),
        predicted_correlator: predicted(DeviationForm::Correlator),
        replicas,
    })
}

/// Runs `f` on a dedicated pool of `workers` threads (0 picks rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
