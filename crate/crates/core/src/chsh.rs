//! CHSH parameter, its statistical uncertainty and the number of heralded
//! events needed for a k-sigma violation.
//!
//! Settings are ordered `(a, b), (a', b), (a, b'), (a', b')` and
//!
//! ```text
//! S = |E(a, b) + E(a', b)| + |E(a, b') - E(a', b')|
//! ```
//!
//! evaluated branch-free from the four correlators. The closed forms below
//! hold for the default angles only.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::detection::{DetectionModel, JointDistribution};
use crate::error::{check_probability, check_range, Error, Result};
use crate::quantum_state::{AnalysisSetting, Visibility, WernerState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl Default for ChshSettings {
    fn default() -> Self {
        ChshSettings {
            alpha: 0.0,
            alpha_prime: 45.0,
            beta: 22.5,
            beta_prime: -22.5,
        }
    }
}

impl ChshSettings {
    /// Each party needs two different analysis directions (modulo 180 degrees).
    pub fn validate(&self) -> Result<()> {
        for (a, b) in [(self.alpha, self.alpha_prime), (self.beta, self.beta_prime)] {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::Config(format!(
                    "analysis angles must be finite, got {a} and {b}"
                )));
            }
            let d = (a - b).rem_euclid(180.0);
            if d < 1e-9 || 180.0 - d < 1e-9 {
                return Err(Error::Config(format!(
                    "analysis directions {a} and {b} degrees coincide modulo 180"
                )));
            }
        }
        Ok(())
    }

    /// The four settings in CHSH order.
    pub fn settings(&self) -> [AnalysisSetting; 4] {
        [
            AnalysisSetting::new(self.alpha, self.beta),
            AnalysisSetting::new(self.alpha_prime, self.beta),
            AnalysisSetting::new(self.alpha, self.beta_prime),
            AnalysisSetting::new(self.alpha_prime, self.beta_prime),
        ]
    }

    pub fn distributions(
        &self,
        detection: &DetectionModel,
        state: &WernerState,
    ) -> Result<[JointDistribution; 4]> {
        let [s0, s1, s2, s3] = self.settings();
        Ok([
            detection.joint(state, &s0)?,
            detection.joint(state, &s1)?,
            detection.joint(state, &s2)?,
            detection.joint(state, &s3)?,
        ])
    }
}

/// Event counts at one setting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SettingCounts {
    pub n_uu: u64,
    pub n_ud: u64,
    pub n_du: u64,
    pub n_dd: u64,
}

impl SettingCounts {
    pub fn n_s(&self) -> u64 {
        self.n_uu + self.n_ud + self.n_du + self.n_dd
    }

    pub fn add(&mut self, other: &SettingCounts) {
        self.n_uu += other.n_uu;
        self.n_ud += other.n_ud;
        self.n_du += other.n_du;
        self.n_dd += other.n_dd;
    }
}

/// `E = 2 (N_uu + N_dd) / N_s - 1`.
pub fn correlator(counts: &SettingCounts) -> Result<f64> {
    let n_s = counts.n_s();
    if n_s == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(2.0 * (counts.n_uu + counts.n_dd) as f64 / n_s as f64 - 1.0)
}

pub fn s_from_correlators(e: [f64; 4]) -> f64 {
    (e[0] + e[1]).abs() + (e[2] - e[3]).abs()
}

pub fn s_from_distributions(dists: &[JointDistribution; 4]) -> f64 {
    s_from_correlators(dists.map(|d| d.correlation()))
}

pub fn s_from_counts(counts: &[SettingCounts; 4]) -> Result<f64> {
    Ok(s_from_correlators([
        correlator(&counts[0])?,
        correlator(&counts[1])?,
        correlator(&counts[2])?,
        correlator(&counts[3])?,
    ]))
}

pub fn s_fluorescence_closed(v: f64, a_det: f64) -> Result<f64> {
    let v = Visibility::new(v)?.value();
    let a = check_range("a_det", "accuracy", a_det, 0.5, 1.0)?;
    Ok(2.0 * SQRT_2 * v * (2.0 * a - 1.0).powi(2))
}

/// Smallest `p_d` for which the ionization closed form coincides with the
/// correlator evaluation, given `V' = V (2 a_ST - 1)^2`.
///
/// Below it `E(a, b) + E(a', b)` turns positive and the absolute value in
/// `S` no longer resolves with the assumed sign.
pub fn ionization_closed_form_threshold(v_observable: f64) -> f64 {
    let q = 2f64.powf(0.25);
    q / (v_observable.sqrt() + q)
}

pub fn s_ionization_closed(v: f64, a_st: f64, p_d: f64) -> Result<f64> {
    let v = Visibility::new(v)?.value();
    let a = check_range("a_st", "accuracy", a_st, 0.5, 1.0)?;
    let p_d = check_probability("p_d", p_d)?;
    let v_obs = v * (2.0 * a - 1.0).powi(2);
    let threshold = ionization_closed_form_threshold(v_obs);
    if p_d < threshold {
        return Err(Error::OutsideValidity { p_d, threshold });
    }
    Ok(2.0 * SQRT_2 * v_obs * p_d * p_d - 2.0 * (1.0 - p_d).powi(2))
}

/// Standard-deviation model for a single outcome count `N_x` out of `N_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationForm {
    /// `sqrt(N_s p^2 (1 - p))`, the form behind the reference event counts.
    #[default]
    Reference,
    /// `sqrt(N_s p (1 - p))`, the binomial standard deviation of a count.
    Binomial,
    /// Exact variance of the correlator estimate, `4 q (1 - q) / N_s` with
    /// `q = p_uu + p_dd`. Accounts for the anticorrelation of `N_uu` and `N_dd`.
    Correlator,
}

impl DeviationForm {
    /// `N_s * Var(E)` at one setting.
    fn scaled_correlator_variance(self, d: &JointDistribution) -> f64 {
        match self {
            DeviationForm::Reference => {
                4.0 * (d.p_uu * d.p_uu * (1.0 - d.p_uu) + d.p_dd * d.p_dd * (1.0 - d.p_dd))
            }
            DeviationForm::Binomial => 4.0 * (d.p_uu * (1.0 - d.p_uu) + d.p_dd * (1.0 - d.p_dd)),
            DeviationForm::Correlator => {
                let q = d.p_uu + d.p_dd;
                4.0 * q * (1.0 - q)
            }
        }
    }
}

/// `sqrt(N) * Delta S` for `N` events split equally over the four settings.
pub fn delta_s_coefficient(dists: &[JointDistribution; 4], form: DeviationForm) -> f64 {
    // Var(S) = sum_i Var(E_i) with N_s = N / 4.
    let sum: f64 = dists
        .iter()
        .map(|d| form.scaled_correlator_variance(d))
        .sum();
    (4.0 * sum).sqrt()
}

fn check_allocation(n_total: u64) -> Result<()> {
    if n_total == 0 || !n_total.is_multiple_of(4) {
        return Err(Error::Allocation(n_total));
    }
    Ok(())
}

pub fn delta_s(dists: &[JointDistribution; 4], n_total: u64, form: DeviationForm) -> Result<f64> {
    check_allocation(n_total)?;
    Ok(delta_s_coefficient(dists, form) / (n_total as f64).sqrt())
}

/// Closed-form `Delta S` for symmetric fluorescence readout at the default
/// angles, as a function of the observable visibility `V (2 a_det - 1)^2`.
pub fn delta_s_fluorescence_closed(v_observable: f64, n_total: u64) -> Result<f64> {
    check_allocation(n_total)?;
    let x = v_observable / SQRT_2;
    let bracket = 3.0 * (1.0 - x).powi(2) * (3.0 + x) + (1.0 + x).powi(2) * (3.0 - x);
    Ok(bracket.sqrt() / (SQRT_2 * (n_total as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceQuery {
    /// Number of standard deviations.
    pub k: f64,
    pub detection: DetectionModel,
    pub state: WernerState,
    pub settings: ChshSettings,
    pub deviation: DeviationForm,
}

impl SignificanceQuery {
    pub fn new(k: f64, detection: DetectionModel, state: WernerState) -> Self {
        SignificanceQuery {
            k,
            detection,
            state,
            settings: ChshSettings::default(),
            deviation: DeviationForm::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredEvents {
    pub s: f64,
    /// `sqrt(N) * Delta S`.
    pub delta_s_coefficient: f64,
    /// Real-valued solution of `(S - 2) sqrt(N) / coefficient = k`.
    pub exact: f64,
    /// `exact` rounded up to a multiple of four.
    pub events: u64,
}

impl RequiredEvents {
    pub fn significance_at(&self, n_total: u64) -> f64 {
        (self.s - 2.0) * (n_total as f64).sqrt() / self.delta_s_coefficient
    }
}

pub fn required_events(query: &SignificanceQuery) -> Result<RequiredEvents> {
    if !(query.k.is_finite() && query.k > 0.0) {
        return Err(Error::out_of_range(
            "k",
            "significance",
            query.k,
            0.0,
            f64::INFINITY,
        ));
    }
    query.settings.validate()?;
    let dists = query
        .settings
        .distributions(&query.detection, &query.state)?;
    let s = s_from_distributions(&dists);
    if s <= 2.0 {
        return Err(Error::NoViolation { s });
    }
    let delta_s_coefficient = delta_s_coefficient(&dists, query.deviation);
    let exact = (query.k * delta_s_coefficient / (s - 2.0)).powi(2);
    let mut out = RequiredEvents {
        s,
        delta_s_coefficient,
        exact,
        events: ((exact / 4.0).ceil() as u64).max(1) * 4,
    };
    // ceil() can land one block short when `exact` sits on a multiple of four.
    while out.significance_at(out.events) < query.k {
        out.events += 4;
    }
    Ok(out)
}
