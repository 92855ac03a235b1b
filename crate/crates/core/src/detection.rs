//! Atomic readout models.
//!
//! Both models start from a STIRAP transfer that maps the chosen analysis
//! direction onto a hyperfine level with accuracy `a_ST`.
//!
//! *Fluorescence* (state-selective removal plus photon counting) is a
//! symmetric channel: each particle's outcome is reported correctly with
//! probability `a_det`. The correlator shrinks by `(2 a_det - 1)^2`.
//!
//! *Ionization* reports "up" only if a fragment is detected. Missing the
//! fragments (probability `1 - p_d`) turns an "up" into a "down", never the
//! reverse, so the channel is asymmetric:
//!
//! ```text
//! p_uu = p_d^2 / 4 * (1 - V' c)
//! p_dd = (2 - p_d)^2 / 4 * (1 - p_d^2 / (2 - p_d)^2 * V' c)
//! p_ud = p_du = (p_d (2 - p_d) + p_d^2 V' c) / 4
//! ```
//!
//! with `V' = V (2 a_ST - 1)^2` and `c = cos 2(beta - alpha)`. The off-diagonal
//! entries come from normalization and the exchange symmetry of the channel.
//! Dark counts of the fragment detectors are neglected.

use crate::error::{check_probability, check_range, Result};
use crate::quantum_state::{AnalysisSetting, WernerState};

pub use crate::quantum_state::JointDistribution;

fn check_accuracy(name: &str, a: f64) -> Result<f64> {
    check_range(name, "accuracy", a, 0.5, 1.0)
}

/// Correlator contraction of a symmetric readout channel with accuracy `a`.
fn symmetric_contraction(a: f64) -> f64 {
    let c = 2.0 * a - 1.0;
    c * c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluorescenceModel {
    pub a_stirap: f64,
    pub a_hf: f64,
    /// Composite readout accuracy; taken as given, not derived from the other two.
    pub a_det: f64,
}

impl FluorescenceModel {
    pub fn validate(&self) -> Result<()> {
        check_accuracy("fluorescence.a_stirap", self.a_stirap)?;
        check_accuracy("fluorescence.a_hf", self.a_hf)?;
        check_accuracy("fluorescence.a_det", self.a_det)?;
        Ok(())
    }

    /// Two independent symmetric stages: correct if both or neither flip.
    pub fn symmetric_composition(a_stirap: f64, a_hf: f64) -> f64 {
        a_stirap * a_hf + (1.0 - a_stirap) * (1.0 - a_hf)
    }

    /// Correct only if both stages succeed.
    pub fn product_composition(a_stirap: f64, a_hf: f64) -> f64 {
        a_stirap * a_hf
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonizationModel {
    pub a_stirap: f64,
    pub p_ionize: f64,
    /// Electron detector efficiency.
    pub p_e: f64,
    /// Ion detector efficiency.
    pub p_ion: f64,
    /// Combined ionization-and-detection probability, when it is specified
    /// directly instead of being composed from the three fields above.
    pub p_d: Option<f64>,
}

impl IonizationModel {
    pub fn validate(&self) -> Result<()> {
        check_accuracy("ionization.a_stirap", self.a_stirap)?;
        check_probability("ionization.p_ionize", self.p_ionize)?;
        check_probability("ionization.p_e", self.p_e)?;
        check_probability("ionization.p_ion", self.p_ion)?;
        if let Some(p_d) = self.p_d {
            check_probability("ionization.p_d", p_d)?;
        }
        Ok(())
    }

    /// `p_d`: the explicit value if set, otherwise `p_ionize * p_det(p_e, p_ion)`.
    pub fn effective_p_d(&self) -> Result<f64> {
        match self.p_d {
            Some(p_d) => check_probability("ionization.p_d", p_d),
            None => effective_p_d(self.p_ionize, self.p_e, self.p_ion),
        }
    }
}

/// Probability that at least one of electron or ion is registered.
pub fn fragment_detection_efficiency(p_e: f64, p_ion: f64) -> Result<f64> {
    let p_e = check_probability("p_e", p_e)?;
    let p_ion = check_probability("p_ion", p_ion)?;
    Ok(1.0 - (1.0 - p_e) * (1.0 - p_ion))
}

pub fn effective_p_d(p_ionize: f64, p_e: f64, p_ion: f64) -> Result<f64> {
    let p_ionize = check_probability("p_ionize", p_ionize)?;
    Ok(p_ionize * fragment_detection_efficiency(p_e, p_ion)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionModel {
    Fluorescence(FluorescenceModel),
    Ionization(IonizationModel),
}

impl DetectionModel {
    pub fn name(&self) -> &'static str {
        match self {
            DetectionModel::Fluorescence(_) => "fluorescence",
            DetectionModel::Ionization(_) => "ionization",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DetectionModel::Fluorescence(m) => m.validate(),
            DetectionModel::Ionization(m) => m.validate(),
        }
    }

    pub fn joint(
        &self,
        state: &WernerState,
        setting: &AnalysisSetting,
    ) -> Result<JointDistribution> {
        match self {
            DetectionModel::Fluorescence(m) => fluorescence_joint(state, m, setting),
            DetectionModel::Ionization(m) => ionization_joint(state, m, setting),
        }
    }
}

pub fn fluorescence_joint(
    state: &WernerState,
    model: &FluorescenceModel,
    setting: &AnalysisSetting,
) -> Result<JointDistribution> {
    state.require_singlet()?;
    let a_det = check_accuracy("a_det", model.a_det)?;
    let observable = state.visibility.value() * symmetric_contraction(a_det);
    Ok(JointDistribution::from_correlation(
        -observable * setting.fringe_cosine(),
    ))
}

pub fn ionization_joint(
    state: &WernerState,
    model: &IonizationModel,
    setting: &AnalysisSetting,
) -> Result<JointDistribution> {
    state.require_singlet()?;
    let a_st = check_accuracy("a_stirap", model.a_stirap)?;
    let p_d = model.effective_p_d()?;
    let fringe = state.visibility.value() * symmetric_contraction(a_st) * setting.fringe_cosine();

    let p2 = p_d * p_d;
    let miss = 2.0 - p_d;
    let p_uu = p2 / 4.0 * (1.0 - fringe);
    let p_dd = miss * miss / 4.0 - p2 / 4.0 * fringe;
    let p_cross = (p_d * miss + p2 * fringe) / 4.0;
    Ok(JointDistribution {
        p_uu,
        p_ud: p_cross,
        p_du: p_cross,
        p_dd,
    })
}
