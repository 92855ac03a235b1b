//! Report builders behind each subcommand.

use crate::chsh::{
    delta_s, required_events, s_fluorescence_closed, s_from_distributions, s_ionization_closed,
    DeviationForm, RequiredEvents, SignificanceQuery,
};
use crate::detection::{effective_p_d, DetectionModel};
use crate::error::{Error, Result};
use crate::montecarlo::{replicate, simulate, SimulationPlan};
use crate::quantum_state::WernerState;
use crate::schedule::{
    cycle_time, effective_rate, locality_margin, measurement_time, RunPlan, SPEED_OF_LIGHT,
};
use crate::swap_chain::{herald_stats_with, DarkFraction};

use super::format::{sig9, Document, Section};
use super::scenario::{DetectionKind, Scenario};
use super::sweep::{run_sweep, sweep_document, SweepSpec, SweepVariable};

const KINDS: [DetectionKind; 2] = [DetectionKind::Fluorescence, DetectionKind::Ionization];

fn kind_name(kind: DetectionKind) -> &'static str {
    match kind {
        DetectionKind::Fluorescence => "fluorescence",
        DetectionKind::Ionization => "ionization",
    }
}

struct Reference {
    s: &'static str,
    v_observable: &'static str,
    events: &'static str,
}

fn reference(kind: DetectionKind) -> Reference {
    match kind {
        DetectionKind::Fluorescence => Reference {
            s: "2.12",
            v_observable: "0.749",
            events: "2600",
        },
        DetectionKind::Ionization => Reference {
            s: "2.10",
            v_observable: "0.826",
            events: "3470",
        },
    }
}

fn query(scenario: &Scenario, kind: DetectionKind, state: WernerState) -> SignificanceQuery {
    SignificanceQuery {
        k: scenario.significance.k,
        detection: scenario.detection_model(kind),
        state,
        settings: scenario.chsh_settings(),
        deviation: scenario.chsh.deviation,
    }
}

/// Required events for `kind`, or `None` when `S <= 2`.
fn required_or_none(scenario: &Scenario, kind: DetectionKind) -> Result<Option<RequiredEvents>> {
    match required_events(&query(scenario, kind, scenario.atom_atom_state()?)) {
        Ok(r) => Ok(Some(r)),
        Err(Error::NoViolation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_budget(scenario: &Scenario) -> Result<Document> {
    let chain = scenario.chain()?;
    let h = chain.herald;

    let mut emission = Section::new("atom-photon");
    emission.num_ref("V_at-ph", chain.v_at_ph.value(), "", "0.985");

    let mut swap = Section::new("entanglement swapping");
    swap.num_ref("F_swap", chain.swap_fidelity.value(), "", "0.956")
        .num("V_swap", chain.swap_fidelity.to_visibility().value(), "");

    let mut herald = Section::new("heralding");
    herald
        .num_ref("p_true", h.p_true, "per attempt", "2.34e-7")
        .num_ref("p_dark", h.p_dark, "per attempt", "3.96e-9")
        .num_ref("p_double_dark", h.p_double_dark, "per attempt", "4e-12");
    let of_total = herald_stats_with(&scenario.link_model(), DarkFraction::OfTotal)?.e_dc;
    herald.num_ref("e_dc (p_dark / (p_true + p_dark))", of_total, "", "0.0168");
    match herald_stats_with(&scenario.link_model(), DarkFraction::OfTrue) {
        Ok(of_true) => herald.num_ref("e_dc (p_dark / p_true)", of_true.e_dc, "", "0.0168"),
        Err(_) => herald.text("e_dc (p_dark / p_true)", "undefined"),
    };
    herald.text(
        "e_dc applied",
        match scenario.link.dark_fraction {
            DarkFraction::OfTotal => "of_total",
            DarkFraction::OfTrue => "of_true",
        },
    );

    let mut result = Section::new("atom-atom");
    result
        .num_ref("F_at-at", chain.f_at_at.value(), "", "0.944")
        .num_ref("V_at-at", chain.v_at_at.value(), "", "0.925");
    if let Some(v) = scenario.state.v_at_at {
        result.num("V_at-at override", v, "");
    }

    Ok(Document::sections(vec![emission, swap, herald, result]))
}

fn chsh_section(scenario: &Scenario, kind: DetectionKind) -> Result<Section> {
    let state = scenario.atom_atom_state()?;
    let v = state.visibility.value();
    let detection = scenario.detection_model(kind);
    let settings = scenario.chsh_settings();
    let dists = settings.distributions(&detection, &state)?;
    let s = s_from_distributions(&dists);
    let refs = reference(kind);
    let n_total = scenario.chsh.n_total;

    let mut sec = Section::new(format!("{} readout", kind_name(kind)));
    sec.num("V_at-at", v, "");
    let closed = match detection {
        DetectionModel::Fluorescence(m) => {
            sec.num("a_det", m.a_det, "");
            sec.num_ref(
                "observable visibility V(2a_det-1)^2",
                v * (2.0 * m.a_det - 1.0).powi(2),
                "",
                refs.v_observable,
            );
            s_fluorescence_closed(v, m.a_det)
        }
        DetectionModel::Ionization(m) => {
            let p_d = m.effective_p_d()?;
            sec.num("a_ST", m.a_stirap, "")
                .num("p_d", p_d, "")
                .num(
                    "p_ionize * p_det(p_e, p_ion)",
                    effective_p_d(m.p_ionize, m.p_e, m.p_ion)?,
                    "",
                )
                .num_ref(
                    "V_at-at(2a_ST-1)^2",
                    v * (2.0 * m.a_stirap - 1.0).powi(2),
                    "",
                    refs.v_observable,
                );
            s_ionization_closed(v, m.a_stirap, p_d)
        }
    };
    sec.num_ref("S (correlators)", s, "", refs.s);
    match closed {
        Ok(c) => sec.num_ref("S (closed form)", c, "", refs.s),
        Err(e) => sec.text("S (closed form)", format!("n/a: {e}")),
    };

    let deviation = scenario.chsh.deviation;
    let ds = delta_s(&dists, n_total, deviation)?;
    sec.num(
        format!("Delta S at N = {n_total} ({})", deviation_name(deviation)),
        ds,
        "",
    )
    .num(
        format!("(S - 2) / Delta S at N = {n_total}"),
        (s - 2.0) / ds,
        "sigma",
    );
    if deviation != DeviationForm::Binomial {
        sec.num(
            format!("Delta S at N = {n_total} (binomial)"),
            delta_s(&dists, n_total, DeviationForm::Binomial)?,
            "",
        );
    }
    match required_or_none(scenario, kind)? {
        Some(r) => {
            sec.push(
                format!("required N for k = {}", sig9(scenario.significance.k)),
                r.events.to_string(),
                "events",
                Some(refs.events),
            );
        }
        None => {
            sec.push(
                format!("required N for k = {}", sig9(scenario.significance.k)),
                "none (S <= 2)".into(),
                "",
                Some(refs.events),
            );
        }
    }
    Ok(sec)
}

fn deviation_name(d: DeviationForm) -> &'static str {
    match d {
        DeviationForm::Reference => "reference",
        DeviationForm::Binomial => "binomial",
        DeviationForm::Correlator => "correlator",
    }
}

pub fn run_chsh(scenario: &Scenario) -> Result<Document> {
    let sections = KINDS
        .iter()
        .map(|&k| chsh_section(scenario, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Document::sections(sections))
}

/// Required events for the selected readout. Fails with
/// [`Error::NoViolation`] when `S <= 2`.
pub fn run_required_events(scenario: &Scenario) -> Result<Document> {
    let kind = scenario.detection.model;
    let r = required_events(&query(scenario, kind, scenario.atom_atom_state()?))?;
    let refs = reference(kind);
    let mut sec = Section::new(format!("required events ({})", kind_name(kind)));
    sec.num("k", scenario.significance.k, "sigma")
        .num_ref("S", r.s, "", refs.s)
        .num("sqrt(N) * Delta S", r.delta_s_coefficient, "")
        .num("N (exact)", r.exact, "events")
        .push("N", r.events.to_string(), "events", Some(refs.events));
    Ok(Document::sections(vec![sec]))
}

pub fn run_schedule(scenario: &Scenario) -> Result<Document> {
    let cycle = scenario.cycle_model();
    let t_cycle = cycle_time(&cycle)?;
    let full = crate::schedule::CycleModel {
        occupancy_1: 1.0,
        occupancy_2: 1.0,
        ..cycle
    };
    let rate = effective_rate(&cycle)?;
    let herald = scenario.chain()?.herald;

    let mut rates = Section::new("repetition");
    rates
        .num("fiber round trip", cycle.round_trip() * 1e6, "us")
        .num_ref("cycle time", t_cycle * 1e6, "us", "17 us")
        .num_ref(
            "repetition rate",
            effective_rate(&full)? / 1e3,
            "kHz",
            "58.8 kHz",
        )
        .num("duty cycle", cycle.occupancy_1 * cycle.occupancy_2, "")
        .num_ref("effective rate", rate / 1e3, "kHz", "14.7 kHz");

    let single = measurement_time(
        &RunPlan {
            herald_probability: herald.p_true,
            events_needed: 1,
            second_bell_state: scenario.cycle.second_bell_state,
        },
        rate,
    )?;
    let mut time = Section::new("measurement time");
    time.num_ref(
        "herald probability",
        herald.p_true,
        "per attempt",
        "2.34e-7",
    )
    .num_ref(
        "time per atom-atom event",
        single.minutes(),
        "min",
        "~5 min",
    )
    .text(
        "second Bell state detected",
        if scenario.cycle.second_bell_state {
            "yes"
        } else {
            "no"
        },
    );
    for kind in KINDS {
        let refs = reference(kind);
        match required_or_none(scenario, kind)? {
            Some(r) => {
                let total = measurement_time(
                    &RunPlan {
                        herald_probability: herald.p_true,
                        events_needed: r.events,
                        second_bell_state: scenario.cycle.second_bell_state,
                    },
                    rate,
                )?;
                time.push(
                    format!("events needed ({})", kind_name(kind)),
                    r.events.to_string(),
                    "events",
                    Some(refs.events),
                );
                time.num_ref(
                    format!("total time ({})", kind_name(kind)),
                    total.days(),
                    "days",
                    "9 to 12 days",
                );
            }
            None => {
                time.text(
                    format!("events needed ({})", kind_name(kind)),
                    "none (S <= 2)",
                );
            }
        }
    }

    let timeline = scenario.detection_timeline();
    let distance = scenario.timeline.station_distance_m;
    let margin = locality_margin(&timeline, distance)?;
    let mut locality = Section::new("locality");
    locality
        .num_ref(
            "detection duration",
            timeline.total() * 1e9,
            "ns",
            "< 1000 ns",
        )
        .num_ref("station separation", distance, "m", "300 m")
        .num("light travel time", distance / SPEED_OF_LIGHT * 1e9, "ns")
        .num("margin", margin * 1e9, "ns")
        .text(
            "space-like separated",
            if margin > 0.0 { "yes" } else { "no" },
        );

    Ok(Document::sections(vec![rates, time, locality]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloOptions {
    pub n_events: u64,
    pub replicas: usize,
    pub seed: u64,
}

impl MonteCarloOptions {
    pub fn from_scenario(s: &Scenario) -> Self {
        MonteCarloOptions {
            n_events: s.montecarlo.n_events,
            replicas: s.montecarlo.replicas,
            seed: s.montecarlo.seed,
        }
    }
}

/// Sampling plan for the selected readout.
///
/// With dark heralds enabled the sampled state is the swapped state and the
/// dark-count fraction is realized event by event; otherwise the already
/// contaminated atom-atom state is sampled directly.
pub fn montecarlo_plan(scenario: &Scenario, opts: &MonteCarloOptions) -> Result<SimulationPlan> {
    let detection = scenario.selected_detection();
    let settings = scenario.chsh_settings();
    let plan = match scenario.state.v_at_at {
        Some(v) => SimulationPlan::new(
            opts.seed,
            opts.n_events,
            settings,
            WernerState::singlet(v)?,
            detection,
        ),
        None => {
            let chain = scenario.chain()?;
            if scenario.montecarlo.dark_heralds {
                SimulationPlan::new(
                    opts.seed,
                    opts.n_events,
                    settings,
                    chain.swapped_state(),
                    detection,
                )
                .with_herald(chain.herald)
            } else {
                SimulationPlan::new(
                    opts.seed,
                    opts.n_events,
                    settings,
                    chain.atom_atom_state(),
                    detection,
                )
            }
        }
    };
    plan.validate()?;
    Ok(plan)
}

pub fn run_montecarlo(scenario: &Scenario, opts: &MonteCarloOptions) -> Result<Document> {
    let plan = montecarlo_plan(scenario, opts)?;
    let expected = plan.expected_distributions()?;
    let run = simulate(&plan)?;

    let mut head = Section::new("plan");
    head.text("readout", plan.detection.name())
        .text("seed", opts.seed.to_string())
        .text("events", opts.n_events.to_string())
        .text("replicas", opts.replicas.to_string())
        .num("sampled V", plan.state.visibility.value(), "")
        .num("e_dc", plan.herald.map_or(0.0, |h| h.e_dc), "");

    let mut single = Section::new("single run: analytic vs empirical");
    for (i, (setting, counts)) in plan.settings.settings().iter().zip(&run.counts).enumerate() {
        let label = format!("({}, {})", sig9(setting.alpha_deg), sig9(setting.beta_deg));
        let n = counts.n_s() as f64;
        let d = expected[i];
        let freq = [counts.n_uu, counts.n_ud, counts.n_du, counts.n_dd].map(|c| c as f64 / n);
        for (name, p, f) in [
            ("p_uu", d.p_uu, freq[0]),
            ("p_ud", d.p_ud, freq[1]),
            ("p_du", d.p_du, freq[2]),
            ("p_dd", d.p_dd, freq[3]),
        ] {
            single.push(
                format!("{label} {name} analytic / empirical"),
                format!("{} / {}", sig9(p), sig9(f)),
                "",
                None,
            );
        }
        single.push(
            format!("{label} E analytic / empirical"),
            format!(
                "{} / {}",
                sig9(d.correlation()),
                sig9(crate::chsh::correlator(counts)?)
            ),
            "",
            None,
        );
    }
    let s_analytic = s_from_distributions(&expected);
    single
        .num("S analytic", s_analytic, "")
        .num("S empirical", run.s_empirical, "")
        .num("standard error", run.s_standard_error, "")
        .num(
            "(S_emp - S_an) / standard error",
            (run.s_empirical - s_analytic) / run.s_standard_error,
            "",
        )
        .num("dark fraction empirical", run.dark_fraction_empirical, "");

    let mut sections = vec![head, single];
    let summary = replicate(&plan, opts.replicas)?;
    let mut rep = Section::new("replica scatter");
    rep.num("mean S", summary.s_mean, "")
        .num("std S", summary.s_std, "")
        .num(
            "predicted Delta S (reference)",
            summary.predicted_reference,
            "",
        )
        .num(
            "predicted Delta S (binomial)",
            summary.predicted_binomial,
            "",
        )
        .num(
            "predicted Delta S (correlator)",
            summary.predicted_correlator,
            "",
        )
        .num("std / reference", summary.ratio_to_reference(), "")
        .num("std / binomial", summary.ratio_to_binomial(), "")
        .num("std / correlator", summary.ratio_to_correlator(), "")
        .num("mean dark fraction", summary.dark_fraction_mean, "");
    sections.push(rep);
    Ok(Document::sections(sections))
}

/// Default sweeps: observable visibility under fluorescence readout, and `p_d` under ionization readout.
pub fn default_sweeps(scenario: &Scenario) -> [SweepSpec; 2] {
    [
        SweepSpec {
            variable: SweepVariable::ObservableVisibility,
            lo: 0.72,
            hi: 0.95,
            steps: 231,
            fixed: scenario.clone(),
        },
        SweepSpec {
            variable: SweepVariable::PD,
            lo: 0.85,
            hi: 1.0,
            steps: 151,
            fixed: scenario.clone(),
        },
    ]
}

pub fn run_report(scenario: &Scenario, opts: &MonteCarloOptions) -> Result<Document> {
    let mut doc = run_budget(scenario)?;
    doc.append(run_chsh(scenario)?);
    doc.append(run_schedule(scenario)?);
    for spec in default_sweeps(scenario) {
        let rows = run_sweep(&spec)?;
        doc.append(sweep_document(&spec, &rows));
    }
    doc.append(run_montecarlo(scenario, opts)?);
    Ok(doc)
}
