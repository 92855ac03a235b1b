//! Repetition rate, measurement time and the locality condition.
//!
//! All quantities are SI: seconds, meters, events per second.

use crate::error::{check_non_negative, check_probability, check_range, Error, Result};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleModel {
    /// Optical pumping plus excitation.
    pub prep_time: f64,
    /// Cooling time averaged over the preparation cycles it serves.
    pub cooling_amortized: f64,
    /// Fiber from each trap to the Bell-state analyzer.
    pub fiber_length: f64,
    /// Signal speed in the fiber as a fraction of `c`.
    pub fiber_index_factor: f64,
    /// Probability that trap 1 holds an atom.
    pub occupancy_1: f64,
    pub occupancy_2: f64,
}

impl CycleModel {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("cycle.prep_time", "duration", self.prep_time)?;
        check_non_negative(
            "cycle.cooling_amortized",
            "duration",
            self.cooling_amortized,
        )?;
        check_non_negative("cycle.fiber_length", "length", self.fiber_length)?;
        if !(self.fiber_index_factor > 0.0 && self.fiber_index_factor <= 1.0) {
            return Err(Error::out_of_range(
                "cycle.fiber_index_factor",
                "speed fraction",
                self.fiber_index_factor,
                f64::MIN_POSITIVE,
                1.0,
            ));
        }
        check_probability("cycle.occupancy_1", self.occupancy_1)?;
        check_probability("cycle.occupancy_2", self.occupancy_2)?;
        Ok(())
    }

    /// Photon out to the analyzer and the herald signal back.
    pub fn round_trip(&self) -> f64 {
        2.0 * self.fiber_length / (self.fiber_index_factor * SPEED_OF_LIGHT)
    }
}

/// Components of the atomic state detection, each in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionTimeline {
    pub basis_choice: f64,
    pub stirap: f64,
    pub decoherence_or_ionization: f64,
    pub fragment_flight: f64,
}

impl DetectionTimeline {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("timeline.basis_choice", "duration", self.basis_choice)?;
        check_non_negative("timeline.stirap", "duration", self.stirap)?;
        check_non_negative(
            "timeline.decoherence_or_ionization",
            "duration",
            self.decoherence_or_ionization,
        )?;
        check_non_negative("timeline.fragment_flight", "duration", self.fragment_flight)?;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.basis_choice + self.stirap + self.decoherence_or_ionization + self.fragment_flight
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    /// Heralded atom-atom events per effective attempt.
    pub herald_probability: f64,
    pub events_needed: u64,
    /// A second detected photonic Bell state doubles the herald rate.
    pub second_bell_state: bool,
}

pub fn cycle_time(model: &CycleModel) -> Result<f64> {
    model.validate()?;
    Ok(model.prep_time + model.cooling_amortized + model.round_trip())
}

/// Attempts per second with both traps loaded.
pub fn effective_rate(model: &CycleModel) -> Result<f64> {
    let t = cycle_time(model)?;
    if t <= 0.0 {
        return Err(Error::Degenerate("cycle time is zero"));
    }
    Ok(model.occupancy_1 * model.occupancy_2 / t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementTime {
    pub seconds: f64,
}

impl MeasurementTime {
    pub fn days(&self) -> f64 {
        self.seconds / SECONDS_PER_DAY
    }

    pub fn minutes(&self) -> f64 {
        self.seconds / 60.0
    }
}

pub fn measurement_time(plan: &RunPlan, rate: f64) -> Result<MeasurementTime> {
    check_range(
        "herald_probability",
        "probability",
        plan.herald_probability,
        0.0,
        1.0,
    )?;
    if plan.herald_probability <= 0.0 {
        return Err(Error::Degenerate("herald probability is zero"));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Degenerate("event rate must be positive"));
    }
    if plan.events_needed == 0 {
        return Err(Error::Config("events_needed must be at least 1".into()));
    }
    let mut seconds = plan.events_needed as f64 / (rate * plan.herald_probability);
    if plan.second_bell_state {
        seconds /= 2.0;
    }
    Ok(MeasurementTime { seconds })
}

/// Light travel time over `distance` minus the detection duration.
/// Positive means both detections finish before a signal can cross.
pub fn locality_margin(timeline: &DetectionTimeline, distance: f64) -> Result<f64> {
    timeline.validate()?;
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::out_of_range(
            "distance",
            "length",
            distance,
            f64::MIN_POSITIVE,
            f64::INFINITY,
        ));
    }
    Ok(distance / SPEED_OF_LIGHT - timeline.total())
}
