//! Werner-state algebra.
//!
//! Every state in this crate has the form
//!
//! ```text
//! rho = V |Psi><Psi| + (1 - V) 1/4
//! ```
//!
//! with `|Psi>` one of the two Bell states `Psi+` / `Psi-`. The visibility `V`
//! (together with the Bell-state label) is a sufficient statistic for every
//! quantity computed downstream, so the 4x4 density matrix is never built.
//!
//! Joint outcome probabilities for spin analysis along directions `alpha` and
//! `beta` (angles given in terms of light polarization, so a physical rotation
//! of `2(beta - alpha)` on the Bloch sphere) are
//!
//! ```text
//! Psi-:  p_uu = p_dd = (1 - V cos 2(beta - alpha)) / 4
//!        p_ud = p_du = (1 + V cos 2(beta - alpha)) / 4
//! ```
//!
//! and the sign of the cosine flips for `Psi+`. The anti-diagonal entries
//! follow from normalization plus the exchange symmetry of the Werner state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, check_range, Error, Result};

/// Fringe contrast of a Werner state, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Visibility(f64);

impl Visibility {
    pub const ONE: Visibility = Visibility(1.0);
    pub const ZERO: Visibility = Visibility(0.0);

    pub fn new(v: f64) -> Result<Self> {
        check_range("visibility", "visibility", v, 0.0, 1.0).map(Visibility)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `F = 1/4 + 3V/4`.
    pub fn to_fidelity(self) -> Fidelity {
        Fidelity(0.25 + 0.75 * self.0)
    }
}

/// Overlap of a Werner state with its target Bell state, in `[1/4, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fidelity(f64);

impl Fidelity {
    pub fn new(f: f64) -> Result<Self> {
        check_range("fidelity", "fidelity", f, 0.25, 1.0).map(Fidelity)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `V = (4F - 1) / 3`.
    pub fn to_visibility(self) -> Visibility {
        // (4F - 1)/3 can land a few ulps outside [0, 1] at the endpoints.
        Visibility(((4.0 * self.0 - 1.0) / 3.0).clamp(0.0, 1.0))
    }
}

pub fn visibility_to_fidelity(v: f64) -> Result<Fidelity> {
    Ok(Visibility::new(v)?.to_fidelity())
}

pub fn fidelity_to_visibility(f: f64) -> Result<Visibility> {
    Ok(Fidelity::new(f)?.to_visibility())
}

/// Mixing with the fully mixed state: `rho -> (1 - e) rho + e 1/4`.
pub trait Depolarize: Sized {
    fn depolarize(self, e: f64) -> Result<Self>;
}

impl Depolarize for Visibility {
    fn depolarize(self, e: f64) -> Result<Self> {
        let e = check_probability("error probability", e)?;
        Ok(Visibility((1.0 - e) * self.0))
    }
}

impl Depolarize for Fidelity {
    fn depolarize(self, e: f64) -> Result<Self> {
        let e = check_probability("error probability", e)?;
        Ok(Fidelity((1.0 - e) * self.0 + 0.25 * e))
    }
}

impl Depolarize for WernerState {
    fn depolarize(self, e: f64) -> Result<Self> {
        Ok(WernerState {
            visibility: self.visibility.depolarize(e)?,
            target: self.target,
        })
    }
}

/// Free-function form of [`Depolarize::depolarize`].
pub fn apply_depolarizing_error<T: Depolarize>(state: T, e: f64) -> Result<T> {
    state.depolarize(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    /// `(|down,up> + |up,down>) / sqrt 2`
    PsiPlus,
    /// `(|down,up> - |up,down>) / sqrt 2`
    PsiMinus,
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BellState::PsiPlus => f.write_str("Psi+"),
            BellState::PsiMinus => f.write_str("Psi-"),
        }
    }
}

impl BellState {
    /// Sign `s` in `E(alpha, beta) = s * V * cos 2(beta - alpha)`.
    fn correlation_sign(self) -> f64 {
        match self {
            BellState::PsiPlus => 1.0,
            BellState::PsiMinus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerState {
    pub visibility: Visibility,
    pub target: BellState,
}

impl WernerState {
    pub fn new(visibility: Visibility, target: BellState) -> Self {
        WernerState { visibility, target }
    }

    pub fn singlet(v: f64) -> Result<Self> {
        Ok(WernerState::new(Visibility::new(v)?, BellState::PsiMinus))
    }

    pub fn fidelity(&self) -> Fidelity {
        self.visibility.to_fidelity()
    }

    pub(crate) fn require_singlet(&self) -> Result<()> {
        match self.target {
            BellState::PsiMinus => Ok(()),
            got => Err(Error::UnsupportedState {
                expected: BellState::PsiMinus,
                got,
            }),
        }
    }
}

/// Pair of analysis directions, in degrees of light polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSetting {
    pub alpha_deg: f64,
    pub beta_deg: f64,
}

impl AnalysisSetting {
    pub fn new(alpha_deg: f64, beta_deg: f64) -> Self {
        AnalysisSetting {
            alpha_deg,
            beta_deg,
        }
    }

    /// `cos 2(beta - alpha)`. Periodic in the angle difference with period 180 degrees.
    pub fn fringe_cosine(&self) -> f64 {
        let diff = (self.beta_deg - self.alpha_deg).rem_euclid(180.0);
        (2.0 * diff).to_radians().cos()
    }
}

/// Probabilities of the four outcome pairs `(particle 1, particle 2)` at one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
}

impl JointDistribution {
    pub const UNIFORM: JointDistribution = JointDistribution {
        p_uu: 0.25,
        p_ud: 0.25,
        p_du: 0.25,
        p_dd: 0.25,
    };

    /// Distribution of an exchange-symmetric state whose correlator is `correlation`.
    pub(crate) fn from_correlation(correlation: f64) -> Self {
        let same = (1.0 + correlation) / 4.0;
        let diff = (1.0 - correlation) / 4.0;
        JointDistribution {
            p_uu: same,
            p_ud: diff,
            p_du: diff,
            p_dd: same,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_uu, self.p_ud, self.p_du, self.p_dd]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// Expectation value of the product of the two +-1 outcomes.
    pub fn correlation(&self) -> f64 {
        2.0 * (self.p_uu + self.p_dd) - 1.0
    }

    /// Convex mixture `(1 - w) self + w other`.
    pub fn mix(&self, other: &JointDistribution, w: f64) -> JointDistribution {
        let a = self.as_array();
        let b = other.as_array();
        let m = |i: usize| (1.0 - w) * a[i] + w * b[i];
        JointDistribution {
            p_uu: m(0),
            p_ud: m(1),
            p_du: m(2),
            p_dd: m(3),
        }
    }
}

/// Outcome distribution of a Werner state analysed with perfect detectors.
pub fn ideal_joint_distribution(
    state: &WernerState,
    setting: &AnalysisSetting,
) -> JointDistribution {
    let correlation =
        state.target.correlation_sign() * state.visibility.value() * setting.fringe_cosine();
    JointDistribution::from_correlation(correlation)
}
