//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p bell-feasibility --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use bell_feasibility::chsh::{
    required_events, s_fluorescence_closed, s_from_distributions, s_ionization_closed,
    ChshSettings, DeviationForm, SignificanceQuery,
};
use bell_feasibility::cli::commands::{
    default_sweeps, montecarlo_plan, run_montecarlo, MonteCarloOptions,
};
use bell_feasibility::cli::format::OutputFormat;
use bell_feasibility::cli::scenario::{parse_scenario, parse_with_overrides, Scenario};
use bell_feasibility::cli::sweep::{run_sweep, sweep_document, SweepRow};
use bell_feasibility::detection::{
    fluorescence_joint, ionization_joint, DetectionModel, FluorescenceModel, IonizationModel,
};
use bell_feasibility::montecarlo::{replicate, simulate, with_workers, SimulationPlan};
use bell_feasibility::quantum_state::{AnalysisSetting, WernerState};
use bell_feasibility::schedule::{
    cycle_time, effective_rate, locality_margin, measurement_time, RunPlan,
};
use bell_feasibility::swap_chain::DarkFraction;

#[derive(Default)]
struct Criterion {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Criterion {
    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// Records `name = got` and checks `lo <= got <= hi`.
    fn within(&mut self, name: &str, got: f64, lo: f64, hi: f64) {
        self.note(format!("{name}={got:.6}"));
        self.check(
            (lo..=hi).contains(&got),
            format!("{name}={got} outside [{lo}, {hi}]"),
        );
    }

    fn near(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.within(name, got, want - tol, want + tol);
    }

    fn relative(&mut self, name: &str, got: f64, want: f64, rel: f64) {
        self.note(format!("{name}={got:.6e}"));
        let ok = ((got - want) / want).abs() <= rel;
        self.check(ok, format!("{name}={got:e} not within {rel} of {want:e}"));
    }
}

fn flr(a_det: f64) -> DetectionModel {
    DetectionModel::Fluorescence(FluorescenceModel {
        a_stirap: 1.0,
        a_hf: 1.0,
        a_det,
    })
}

fn ion(a_stirap: f64, p_d: f64) -> DetectionModel {
    DetectionModel::Ionization(IonizationModel {
        a_stirap,
        p_ionize: 1.0,
        p_e: 1.0,
        p_ion: 1.0,
        p_d: Some(p_d),
    })
}

fn query(v: f64, detection: DetectionModel) -> SignificanceQuery {
    SignificanceQuery {
        k: 3.0,
        detection,
        state: WernerState::singlet(v).unwrap(),
        settings: ChshSettings::default(),
        deviation: DeviationForm::Reference,
    }
}

fn error_budget_chain(c: &mut Criterion) {
    let scenario = Scenario::default();
    let w = scenario.chain().unwrap();
    c.near("V_at-ph", w.v_at_ph.value(), 0.985, 0.0005);
    c.near("F_swap", w.swap_fidelity.value(), 0.956, 0.001);
    c.relative("p_true", w.herald.p_true, 2.34e-7, 0.01);
    c.relative("p_dark", w.herald.p_dark, 3.96e-9, 0.01);
    c.within("F_at-at", w.f_at_at.value(), 0.943, 0.945);
    c.within("V_at-at", w.v_at_at.value(), 0.924, 0.927);

    let mut alt = scenario.clone();
    alt.link.dark_fraction = DarkFraction::OfTrue;
    let w = alt.chain().unwrap();
    c.within("F_at-at(of_true)", w.f_at_at.value(), 0.943, 0.945);
    c.within("V_at-at(of_true)", w.v_at_at.value(), 0.924, 0.927);
}

fn chsh_closed_forms(c: &mut Criterion) {
    c.near(
        "S_flr",
        s_fluorescence_closed(0.925, 0.95).unwrap(),
        2.119,
        0.002,
    );
    c.near(
        "S_ion",
        s_ionization_closed(0.925, 0.9725, 0.95).unwrap(),
        2.104,
        0.003,
    );
}

fn required_event_counts(c: &mut Criterion) {
    let f = required_events(&query(0.749, flr(1.0))).unwrap();
    c.note(format!(
        "fluorescence N={} (exact {:.1})",
        f.events, f.exact
    ));
    c.check(
        (2590..=2610).contains(&f.events),
        format!("fluorescence N={} outside [2590, 2610]", f.events),
    );

    let i = required_events(&query(0.826, ion(1.0, 0.95))).unwrap();
    c.note(format!("ionization N={} (exact {:.1})", i.events, i.exact));
    c.check(
        (3435..=3505).contains(&i.events),
        format!("ionization N={} outside [3435, 3505]", i.events),
    );

    let i = required_events(&query(0.925, ion(0.9725, 0.95))).unwrap();
    c.note(format!(
        "ionization at V=0.925, a_ST=0.9725: N={}",
        i.events
    ));
    c.check(
        (3435..=3505).contains(&i.events),
        format!(
            "ionization (V=0.925, a_ST=0.9725) N={} outside [3435, 3505]",
            i.events
        ),
    );
}

/// Violation rows have strictly decreasing exact N and non-increasing
/// rounded N; no-violation rows, if any, come first.
fn check_monotone(c: &mut Criterion, name: &str, rows: &[SweepRow]) {
    let first_ok = rows
        .iter()
        .position(|r| r.required.is_some())
        .unwrap_or(rows.len());
    let prefix = rows[first_ok..].iter().all(|r| r.required.is_some());
    c.check(
        prefix,
        format!("{name}: no-violation rows are not a prefix"),
    );
    let req: Vec<(f64, u64)> = rows[first_ok..].iter().filter_map(|r| r.required).collect();
    let strict = req.windows(2).all(|w| w[1].0 < w[0].0);
    let non_increasing = req.windows(2).all(|w| w[1].1 <= w[0].1);
    c.check(strict, format!("{name}: n_exact not strictly decreasing"));
    c.check(non_increasing, format!("{name}: required_events increases"));
    c.check(
        req.first().map(|a| a.1) > req.last().map(|b| b.1),
        format!("{name}: required_events is flat"),
    );
    c.note(format!(
        "{name}: {} rows, {} without violation",
        rows.len(),
        first_ok
    ));
}

fn row_at(rows: &[SweepRow], x: f64) -> Option<&SweepRow> {
    rows.iter().find(|r| (r.value - x).abs() < 1e-9)
}

fn sweep_reproduction(c: &mut Criterion) {
    let scenario = parse_with_overrides("", &["state.v_at_at=0.925"]).unwrap();
    let [by_visibility, by_p_d] = default_sweeps(&scenario);
    c.check(
        by_visibility.lo == 0.72 && by_visibility.hi == 0.95,
        "visibility sweep range is not [0.72, 0.95]",
    );
    c.check(
        by_p_d.lo == 0.85 && by_p_d.hi == 1.0,
        "p_d sweep range is not [0.85, 1.0]",
    );

    let rows_v = run_sweep(&by_visibility).unwrap();
    let rows_p = run_sweep(&by_p_d).unwrap();
    check_monotone(c, "visibility sweep", &rows_v);
    check_monotone(c, "p_d sweep", &rows_p);
    c.check(
        rows_v.iter().all(|r| r.required.is_some()),
        "visibility sweep has rows without violation",
    );

    let csv = sweep_document(&by_visibility, &rows_v).render(OutputFormat::Csv);
    c.check(
        csv.lines().count() == rows_v.len() + 1,
        "visibility sweep CSV row count",
    );

    match row_at(&rows_v, 0.749).and_then(|r| r.required) {
        Some((_, n)) => {
            c.note(format!("visibility sweep N(0.749)={n}"));
            c.check(
                (2590..=2610).contains(&n),
                format!("visibility sweep N(0.749)={n} outside [2590, 2610]"),
            );
        }
        None => c.check(false, "visibility sweep has no violating row at 0.749"),
    }
    match row_at(&rows_p, 0.95).and_then(|r| r.required) {
        Some((_, n)) => {
            c.note(format!("p_d sweep N(0.95)={n}"));
            c.check(
                (3435..=3505).contains(&n),
                format!("p_d sweep N(0.95)={n} outside [3435, 3505]"),
            );
        }
        None => c.check(false, "p_d sweep has no violating row at 0.95"),
    }
}

fn schedule_arithmetic(c: &mut Criterion) {
    let scenario = Scenario::default();
    let cycle = scenario.cycle_model();
    c.near("cycle_us", cycle_time(&cycle).unwrap() * 1e6, 17.0, 0.05);
    let mut full = cycle;
    full.occupancy_1 = 1.0;
    full.occupancy_2 = 1.0;
    c.near("rate_kHz", effective_rate(&full).unwrap() / 1e3, 58.8, 0.05);
    let rate = effective_rate(&cycle).unwrap();
    c.near("effective_kHz", rate / 1e3, 14.7, 0.05);

    let herald = scenario.chain().unwrap().herald.p_true;
    let time = |events: u64, second: bool| {
        measurement_time(
            &RunPlan {
                herald_probability: herald,
                events_needed: events,
                second_bell_state: second,
            },
            rate,
        )
        .unwrap()
    };
    c.near("per_event_s", time(1, false).seconds, 290.0, 5.0);
    c.near("days(2600)", time(2600, false).days(), 8.7, 0.05);
    c.near("days(3470)", time(3470, false).days(), 11.7, 0.05);
    for n in [1, 2600, 3470] {
        let ratio = time(n, true).seconds / time(n, false).seconds;
        c.check(
            (ratio - 0.5).abs() < 1e-12,
            format!("second Bell state ratio {ratio} for N={n}"),
        );
    }
}

fn locality(c: &mut Criterion) {
    let timeline = Scenario::default().detection_timeline();
    let at_300 = locality_margin(&timeline, 300.0).unwrap();
    let at_200 = locality_margin(&timeline, 200.0).unwrap();
    c.note(format!(
        "margin(300 m)={:.1} ns, margin(200 m)={:.1} ns",
        at_300 * 1e9,
        at_200 * 1e9
    ));
    c.check(at_300 > 0.0, "300 m is not space-like separated");
    c.check(at_200 < 0.0, "200 m is space-like separated");
}

fn oracle_equivalence(c: &mut Criterion) {
    let start = Instant::now();
    let alpha = 3.0;
    let (mut worst_a, mut worst_b, mut worst_c) = (0.0f64, 0.0f64, 0.0f64);
    let mut points = 0;
    for v in common::grid(0.0, 1.0, 10) {
        let state = WernerState::singlet(v).unwrap();
        for a in common::grid(0.5, 1.0, 10) {
            for p_d in common::grid(0.0, 1.0, 10) {
                for delta in common::grid(0.0, 165.0, 12) {
                    let setting = AnalysisSetting::new(alpha, alpha + delta);
                    let ion_model = IonizationModel {
                        a_stirap: a,
                        p_ionize: 1.0,
                        p_e: 1.0,
                        p_ion: 1.0,
                        p_d: Some(p_d),
                    };
                    let got = ionization_joint(&state, &ion_model, &setting).unwrap();
                    let want = common::ionization(v, a, p_d, alpha, alpha + delta);
                    for (g, w) in got.as_array().iter().zip(want) {
                        worst_a = worst_a.max((g - w).abs());
                    }
                    let flr_model = FluorescenceModel {
                        a_stirap: 1.0,
                        a_hf: 1.0,
                        a_det: a,
                    };
                    let f = fluorescence_joint(&state, &flr_model, &setting).unwrap();
                    worst_c = worst_c
                        .max((got.total() - 1.0).abs())
                        .max((f.total() - 1.0).abs());
                    points += 1;
                }
                let settings = ChshSettings::default();
                if let Ok(closed) = s_ionization_closed(v, a, p_d) {
                    let route = s_from_distributions(
                        &settings.distributions(&ion(a, p_d), &state).unwrap(),
                    );
                    worst_b = worst_b.max((closed - route).abs());
                }
            }
            let route = s_from_distributions(
                &ChshSettings::default()
                    .distributions(&flr(a), &state)
                    .unwrap(),
            );
            worst_b = worst_b.max((s_fluorescence_closed(v, a).unwrap() - route).abs());
        }
    }
    c.note(format!(
        "{points} grid points: max |ion - oracle|={worst_a:.1e}, max |closed - route|={worst_b:.1e}, max |sum - 1|={worst_c:.1e}"
    ));
    c.check(points == 12_000, format!("grid has {points} points"));
    c.check(
        worst_a <= 1e-12,
        "(a) ionization differs from channel enumeration",
    );
    c.check(
        worst_b <= 1e-12,
        "(b) closed form differs from correlator route",
    );
    c.check(worst_c <= 1e-12, "(c) distribution not normalized");
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 60.0, format!("took {secs:.1} s"));
}

fn monte_carlo_validation(c: &mut Criterion) {
    let start = Instant::now();
    with_workers(1, || {
        let opts = MonteCarloOptions {
            n_events: 1_000_000,
            replicas: 2,
            seed: 2024,
        };
        for model in ["fluorescence", "ionization"] {
            let scenario = parse_with_overrides("", &[format!("detection.model={model}")]).unwrap();
            let plan = montecarlo_plan(&scenario, &opts).unwrap();
            let analytic = plan.analytic_s().unwrap();
            let run = simulate(&plan).unwrap();
            let z = (run.s_empirical - analytic) / run.s_standard_error;
            c.note(format!(
                "{model}: S={:.4} vs {analytic:.4} (z={z:+.2})",
                run.s_empirical
            ));
            c.check(
                z.abs() < 5.0,
                format!("{model}: empirical S is {z:.2} SE from analytic"),
            );
        }

        let scatter = |n_events: u64| {
            let plan = SimulationPlan::new(
                77,
                n_events,
                ChshSettings::default(),
                WernerState::singlet(0.749).unwrap(),
                flr(1.0),
            );
            replicate(&plan, 2000).unwrap()
        };
        let small = scatter(2600);
        let large = scatter(10400);
        c.note(format!(
            "N=2600: std={:.4}, reference={:.4} (ratio {:.3}), binomial={:.4} (ratio {:.3}), correlator={:.4} (ratio {:.3})",
            small.s_std,
            small.predicted_reference,
            small.ratio_to_reference(),
            small.predicted_binomial,
            small.ratio_to_binomial(),
            small.predicted_correlator,
            small.ratio_to_correlator(),
        ));
        let ratios = [small.ratio_to_reference(), small.ratio_to_binomial()];
        c.check(
            ratios.iter().all(|r| r.is_finite() && *r > 0.0),
            "scatter ratios not computed",
        );
        let scaling = small.s_std / large.s_std;
        c.note(format!("std(2600)/std(10400)={scaling:.3}"));
        c.check(
            (1.8..=2.2).contains(&scaling),
            format!("1/sqrt(N) scaling ratio {scaling}"),
        );
    });
    let secs = start.elapsed().as_secs_f64();
    c.note(format!("{secs:.1} s single-threaded"));
    c.check(secs < 600.0, format!("took {secs:.1} s"));
}

fn determinism(c: &mut Criterion) {
    let scenario = Scenario::default();
    let opts = MonteCarloOptions {
        n_events: 200_000,
        replicas: 16,
        seed: 31337,
    };
    let render = |workers| {
        with_workers(workers, || run_montecarlo(&scenario, &opts))
            .unwrap()
            .render(OutputFormat::Text)
    };
    let one = render(1);
    let four = render(4);
    c.check(
        one.as_bytes() == four.as_bytes(),
        "report differs between 1 and 4 workers",
    );
    c.note(format!(
        "{} report bytes identical across 1 and 4 workers",
        one.len()
    ));

    let custom = parse_with_overrides(
        "[cycle]\nfiber_length_m = 300\n",
        &[
            "state.v_at_at=0.9",
            "ionization.p_d=composed",
            "chsh.deviation=binomial",
            "detection.model=ionization",
        ],
    )
    .unwrap();
    for s in [Scenario::default(), custom] {
        let doc = s.to_document().unwrap();
        let back = parse_scenario(&doc).unwrap();
        c.check(back == s, "parse(emit(s)) != s");
        c.check(back.to_document().unwrap() == doc, "emit is not stable");
    }
}

type Check = fn(&mut Criterion);

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("error-budget chain", error_budget_chain),
        ("CHSH closed forms", chsh_closed_forms),
        ("required events", required_event_counts),
        ("sweep reproduction", sweep_reproduction),
        ("schedule arithmetic", schedule_arithmetic),
        ("locality check", locality),
        ("oracle equivalence", oracle_equivalence),
        ("Monte Carlo validation", monte_carlo_validation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let mut c = Criterion::default();
        run(&mut c);
        let status = if c.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{status} {} {name}: {}", i + 1, c.notes.join("; "));
        for f in &c.failures {
            println!("     {f}");
        }
        failed += usize::from(!c.failures.is_empty());
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
