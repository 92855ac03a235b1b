//! Error budget from atom-photon emission to the heralded atom-atom state.
//!
//! The chain is
//!
//! 1. atom-photon visibility `V_ap = (1 - e_exc)(1 - e_pol)`;
//! 2. swapping two such pairs and projecting the photons on one Bell state,
//!    `F_swap = (1 - e_bsm)(1/4 + 3/4 V_ap^2) + e_bsm/4`;
//! 3. contamination by heralds made of one true photon plus a detector dark
//!    count, treated as a further depolarizing error of weight `e_dc`;
//! 4. conversion back to visibility.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_probability, check_range, Error, Result};
use crate::quantum_state::{BellState, Depolarize, Fidelity, Visibility, WernerState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    /// Excited-state preparation error.
    pub e_exc: f64,
    /// Residual polarization error in the fiber.
    pub e_pol: f64,
    /// Two-photon interference mismatch in the Bell-state measurement.
    pub e_bsm: f64,
}

impl ErrorBudget {
    pub fn validate(&self) -> Result<()> {
        check_probability("budget.e_exc", self.e_exc)?;
        check_probability("budget.e_pol", self.e_pol)?;
        check_probability("budget.e_bsm", self.e_bsm)?;
        Ok(())
    }
}

/// Photon arrival probabilities and the coincidence detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    /// Probability that the photon from trap 1 is detected at the beamsplitter.
    pub eta1: f64,
    pub eta2: f64,
    /// Dark counts per second, per detector.
    pub r_dc: f64,
    /// Coincidence window in seconds.
    pub delta_t: f64,
}

impl LinkModel {
    pub fn validate(&self) -> Result<()> {
        check_probability("link.eta1", self.eta1)?;
        check_probability("link.eta2", self.eta2)?;
        check_non_negative("link.r_dc", "rate", self.r_dc)?;
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            return Err(Error::out_of_range(
                "link.delta_t",
                "duration",
                self.delta_t,
                f64::MIN_POSITIVE,
                f64::INFINITY,
            ));
        }
        Ok(())
    }
}

/// How the wrong-herald fraction is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DarkFraction {
    /// `p_dark / (p_true + p_dark)`: share of wrong events among all heralds.
    #[default]
    OfTotal,
    /// `p_dark / p_true`.
    OfTrue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldStats {
    /// True two-photon coincidence per attempt.
    pub p_true: f64,
    /// One photon plus one dark count inside the window.
    pub p_dark: f64,
    /// Two dark counts inside the window. Reported, not folded into `e_dc`.
    pub p_double_dark: f64,
    /// Wrong-herald fraction used as the depolarizing weight.
    pub e_dc: f64,
}

impl HeraldStats {
    /// Probability that an attempt is heralded at all (true or dark-assisted).
    pub fn p_herald(&self) -> f64 {
        self.p_true + self.p_dark
    }
}

pub fn atom_photon_visibility(budget: &ErrorBudget) -> Result<Visibility> {
    budget.validate()?;
    Visibility::new((1.0 - budget.e_exc) * (1.0 - budget.e_pol))
}

/// Fidelity of the swapped atom-atom state with the heralded Bell state,
/// before dark-count contamination.
pub fn swap_fidelity(v_at_ph: Visibility, e_bsm: f64) -> Result<Fidelity> {
    let e_bsm = check_probability("e_bsm", e_bsm)?;
    let v2 = v_at_ph.value() * v_at_ph.value();
    Fidelity::new((1.0 - e_bsm) * (0.25 + 0.75 * v2) + 0.25 * e_bsm)
}

pub fn herald_stats(link: &LinkModel) -> Result<HeraldStats> {
    herald_stats_with(link, DarkFraction::OfTotal)
}

pub fn herald_stats_with(link: &LinkModel, convention: DarkFraction) -> Result<HeraldStats> {
    link.validate()?;
    // Only one of the four photonic Bell states is detected.
    let p_true = link.eta1 * link.eta2 / 4.0;
    let p_dc_window = link.r_dc * link.delta_t;
    let p_dark = (link.eta1 + link.eta2) * p_dc_window;
    let p_double_dark = p_dc_window * p_dc_window;

    let e_dc = match convention {
        DarkFraction::OfTotal => {
            if p_true + p_dark <= 0.0 {
                return Err(Error::Degenerate("no heralds: p_true + p_dark = 0"));
            }
            p_dark / (p_true + p_dark)
        }
        DarkFraction::OfTrue => {
            if p_true <= 0.0 {
                return Err(Error::Degenerate("no true heralds: p_true = 0"));
            }
            check_range("e_dc", "probability", p_dark / p_true, 0.0, 1.0)?
        }
    };

    Ok(HeraldStats {
        p_true,
        p_dark,
        p_double_dark,
        e_dc,
    })
}

/// Every intermediate of the chain, for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainWaypoints {
    pub v_at_ph: Visibility,
    pub swap_fidelity: Fidelity,
    pub herald: HeraldStats,
    pub f_at_at: Fidelity,
    pub v_at_at: Visibility,
}

impl ChainWaypoints {
    /// State conditioned on a true herald, i.e. before dark-count mixing.
    pub fn swapped_state(&self) -> WernerState {
        WernerState::new(self.swap_fidelity.to_visibility(), BellState::PsiMinus)
    }

    pub fn atom_atom_state(&self) -> WernerState {
        WernerState::new(self.v_at_at, BellState::PsiMinus)
    }
}

pub fn evaluate_chain(
    budget: &ErrorBudget,
    link: &LinkModel,
    convention: DarkFraction,
) -> Result<ChainWaypoints> {
    let v_at_ph = atom_photon_visibility(budget)?;
    let swap_fidelity = swap_fidelity(v_at_ph, budget.e_bsm)?;
    let herald = herald_stats_with(link, convention)?;
    let f_at_at = swap_fidelity.depolarize(herald.e_dc)?;
    Ok(ChainWaypoints {
        v_at_ph,
        swap_fidelity,
        herald,
        f_at_at,
        v_at_at: f_at_at.to_visibility(),
    })
}

/// Heralded atom-atom state (target `Psi-`).
pub fn atom_atom_state(budget: &ErrorBudget, link: &LinkModel) -> Result<WernerState> {
    Ok(evaluate_chain(budget, link, DarkFraction::OfTotal)?.atom_atom_state())
}
