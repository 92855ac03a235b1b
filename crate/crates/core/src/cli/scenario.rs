//! Scenario documents.
//!
//! A scenario is a sectioned TOML document. Every key is optional and
//! defaults to the reference experiment; keys carry their unit in the name
//! (`delta_t_ns`, `fiber_length_m`, ...). Unknown sections or keys are
//! rejected. See the README for the full schema.

use serde::{Deserialize, Serialize};

use crate::chsh::{ChshSettings, DeviationForm};
use crate::detection::{DetectionModel, FluorescenceModel, IonizationModel};
use crate::error::{Error, Result};
use crate::quantum_state::{Visibility, WernerState};
use crate::schedule::{CycleModel, DetectionTimeline};
use crate::swap_chain::{evaluate_chain, ChainWaypoints, DarkFraction, ErrorBudget, LinkModel};

const NS: f64 = 1e-9;
const US: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub e_exc: f64,
    pub e_pol: f64,
    pub e_bsm: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        BudgetSection {
            e_exc: 0.005,
            e_pol: 0.01,
            e_bsm: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub eta1: f64,
    pub eta2: f64,
    pub r_dc_per_s: f64,
    pub delta_t_ns: f64,
    pub dark_fraction: DarkFraction,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            eta1: 1.3e-3 * 0.6,
            eta2: 2.0e-3 * 0.6,
            r_dc_per_s: 50.0,
            delta_t_ns: 40.0,
            dark_fraction: DarkFraction::OfTotal,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSection {
    /// Replaces the error-budget result for the atom-atom visibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_at_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DetectionKind {
    #[default]
    Fluorescence,
    Ionization,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub model: DetectionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluorescenceSection {
    pub a_stirap: f64,
    pub a_hf: f64,
    pub a_det: f64,
}

impl Default for FluorescenceSection {
    fn default() -> Self {
        FluorescenceSection {
            a_stirap: 0.9725,
            a_hf: 0.978,
            a_det: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IonizationSection {
    pub a_stirap: f64,
    pub p_ionize: f64,
    pub p_e: f64,
    pub p_ion: f64,
    /// Combined efficiency. `None` (written `"composed"`) composes it from
    /// the three above.
    #[serde(with = "p_d_field")]
    pub p_d: Option<f64>,
}

impl Default for IonizationSection {
    fn default() -> Self {
        IonizationSection {
            a_stirap: 0.9725,
            p_ionize: 0.99,
            p_e: 0.85,
            p_ion: 0.65,
            p_d: Some(0.95),
        }
    }
}

mod p_d_field {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    const COMPOSED: &str = "composed";

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str(COMPOSED),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Word(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Some(x)),
            Raw::Word(w) if w == COMPOSED => Ok(None),
            Raw::Word(w) => Err(D::Error::custom(format!(
                "p_d must be a number or \"{COMPOSED}\", got \"{w}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChshSection {
    pub alpha_deg: f64,
    pub alpha_prime_deg: f64,
    pub beta_deg: f64,
    pub beta_prime_deg: f64,
    /// Total events (all four settings) at which Delta S is reported.
    pub n_total: u64,
    pub deviation: DeviationForm,
}

impl Default for ChshSection {
    fn default() -> Self {
        let s = ChshSettings::default();
        ChshSection {
            alpha_deg: s.alpha,
            alpha_prime_deg: s.alpha_prime,
            beta_deg: s.beta,
            beta_prime_deg: s.beta_prime,
            n_total: 2600,
            deviation: DeviationForm::Reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignificanceSection {
    pub k: f64,
}

impl Default for SignificanceSection {
    fn default() -> Self {
        SignificanceSection { k: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSection {
    pub prep_time_us: f64,
    pub cooling_amortized_us: f64,
    pub fiber_length_m: f64,
    pub fiber_index_factor: f64,
    pub occupancy_1: f64,
    pub occupancy_2: f64,
    pub second_bell_state: bool,
}

impl Default for CycleSection {
    fn default() -> Self {
        CycleSection {
            prep_time_us: 5.0,
            // 200 us of cooling every 20 cycles.
            cooling_amortized_us: 200.0 / 20.0,
            fiber_length_m: 200.0,
            fiber_index_factor: 2.0 / 3.0,
            occupancy_1: 0.5,
            occupancy_2: 0.5,
            second_bell_state: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimelineSection {
    pub basis_choice_ns: f64,
    pub stirap_ns: f64,
    pub decoherence_ns: f64,
    pub fragment_flight_ns: f64,
    pub station_distance_m: f64,
}

impl Default for TimelineSection {
    fn default() -> Self {
        TimelineSection {
            basis_choice_ns: 100.0,
            stirap_ns: 120.0,
            decoherence_ns: 200.0,
            fragment_flight_ns: 500.0,
            station_distance_m: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub seed: u64,
    pub n_events: u64,
    pub replicas: usize,
    /// Mix dark-count heralds into the sampled events.
    pub dark_heralds: bool,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            seed: 20090101,
            n_events: 100_000,
            replicas: 200,
            dark_heralds: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub budget: BudgetSection,
    pub link: LinkSection,
    pub state: StateSection,
    pub detection: DetectionSection,
    pub fluorescence: FluorescenceSection,
    pub ionization: IonizationSection,
    pub chsh: ChshSection,
    pub significance: SignificanceSection,
    pub cycle: CycleSection,
    pub timeline: TimelineSection,
    pub montecarlo: MonteCarloSection,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_with_overrides::<&str>(text, &[])
}

/// Parses `text`, applies `section.key=value` overrides, then validates.
pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Scenario> {
    let config_err = |e: toml::de::Error| Error::Config(format!("scenario: {e}"));
    // Deserializing the text directly keeps line/column information in errors.
    let mut scenario: Scenario = toml::from_str(text).map_err(config_err)?;
    if !overrides.is_empty() {
        let mut table: toml::Table = text.parse().map_err(config_err)?;
        for o in overrides {
            apply_override(&mut table, o.as_ref())?;
        }
        scenario = table.try_into().map_err(config_err)?;
    }
    scenario.validate()?;
    Ok(scenario)
}

/// Sets `section.key` in a document table. The value is read as a TOML
/// value if possible, else as a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::Config(format!(
            "override `{assignment}` is not of the form section.key=value"
        ))
    })?;
    let (section, key) = path.trim().split_once('.').ok_or_else(|| {
        Error::Config(format!(
            "override key `{}` must be section.key",
            path.trim()
        ))
    })?;
    let value = parse_value(raw.trim());
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(Error::Config(format!("`{section}` is not a section"))),
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl Scenario {
    /// Back to document form. Re-parsing the output yields `self`.
    pub fn to_document(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.error_budget().validate()?;
        self.link_model().validate()?;
        if let Some(v) = self.state.v_at_at {
            Visibility::new(v)
                .map_err(|_| Error::out_of_range("state.v_at_at", "visibility", v, 0.0, 1.0))?;
        }
        self.fluorescence_model().validate()?;
        self.ionization_model().validate()?;
        self.chsh_settings().validate()?;
        if self.chsh.n_total == 0 || !self.chsh.n_total.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "chsh.n_total = {} must be a positive multiple of 4",
                self.chsh.n_total
            )));
        }
        let k = self.significance.k;
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::out_of_range(
                "significance.k",
                "significance",
                k,
                0.0,
                f64::INFINITY,
            ));
        }
        self.cycle_model().validate()?;
        self.detection_timeline().validate()?;
        let d = self.timeline.station_distance_m;
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::out_of_range(
                "timeline.station_distance_m",
                "length",
                d,
                0.0,
                f64::INFINITY,
            ));
        }
        if self.montecarlo.n_events < 4 {
            return Err(Error::Config(
                "montecarlo.n_events must be at least 4".into(),
            ));
        }
        if self.montecarlo.replicas < 2 {
            return Err(Error::Config(
                "montecarlo.replicas must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn error_budget(&self) -> ErrorBudget {
        ErrorBudget {
            e_exc: self.budget.e_exc,
            e_pol: self.budget.e_pol,
            e_bsm: self.budget.e_bsm,
        }
    }

    pub fn link_model(&self) -> LinkModel {
        LinkModel {
            eta1: self.link.eta1,
            eta2: self.link.eta2,
            r_dc: self.link.r_dc_per_s,
            delta_t: self.link.delta_t_ns * NS,
        }
    }

    pub fn chain(&self) -> Result<ChainWaypoints> {
        evaluate_chain(
            &self.error_budget(),
            &self.link_model(),
            self.link.dark_fraction,
        )
    }

    /// Heralded atom-atom state: the override if set, else the chain result.
    pub fn atom_atom_state(&self) -> Result<WernerState> {
        match self.state.v_at_at {
            Some(v) => WernerState::singlet(v),
            None => Ok(self.chain()?.atom_atom_state()),
        }
    }

    pub fn fluorescence_model(&self) -> FluorescenceModel {
        FluorescenceModel {
            a_stirap: self.fluorescence.a_stirap,
            a_hf: self.fluorescence.a_hf,
            a_det: self.fluorescence.a_det,
        }
    }

    pub fn ionization_model(&self) -> IonizationModel {
        IonizationModel {
            a_stirap: self.ionization.a_stirap,
            p_ionize: self.ionization.p_ionize,
            p_e: self.ionization.p_e,
            p_ion: self.ionization.p_ion,
            p_d: self.ionization.p_d,
        }
    }

    pub fn detection_model(&self, kind: DetectionKind) -> DetectionModel {
        match kind {
            DetectionKind::Fluorescence => DetectionModel::Fluorescence(self.fluorescence_model()),
            DetectionKind::Ionization => DetectionModel::Ionization(self.ionization_model()),
        }
    }

    pub fn selected_detection(&self) -> DetectionModel {
        self.detection_model(self.detection.model)
    }

    pub fn chsh_settings(&self) -> ChshSettings {
        ChshSettings {
            alpha: self.chsh.alpha_deg,
            alpha_prime: self.chsh.alpha_prime_deg,
            beta: self.chsh.beta_deg,
            beta_prime: self.chsh.beta_prime_deg,
        }
    }

    pub fn cycle_model(&self) -> CycleModel {
        CycleModel {
            prep_time: self.cycle.prep_time_us * US,
            cooling_amortized: self.cycle.cooling_amortized_us * US,
            fiber_length: self.cycle.fiber_length_m,
            fiber_index_factor: self.cycle.fiber_index_factor,
            occupancy_1: self.cycle.occupancy_1,
            occupancy_2: self.cycle.occupancy_2,
        }
    }

    pub fn detection_timeline(&self) -> DetectionTimeline {
        DetectionTimeline {
            basis_choice: self.timeline.basis_choice_ns * NS,
            stirap: self.timeline.stirap_ns * NS,
            decoherence_or_ionization: self.timeline.decoherence_ns * NS,
            fragment_flight: self.timeline.fragment_flight_ns * NS,
        }
    }
}
