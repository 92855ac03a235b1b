//! One-dimensional parameter sweeps of the required event count.
//!
//! CSV columns, in order:
//!
//! | column                | meaning                                                  |
//! |-----------------------|----------------------------------------------------------|
//! | `variable`            | swept variable name                                      |
//! | `value`               | swept value                                              |
//! | `s`                   | CHSH value from the four correlators                     |
//! | `delta_s_coefficient` | `sqrt(N) * Delta S`                                      |
//! | `n_exact`             | real-valued event count for a k-sigma violation          |
//! | `required_events`     | `n_exact` rounded up to a multiple of four               |
//! | `status`              | `ok`, or `no_violation` when `S <= 2` (last two empty)   |

use std::fmt;
use std::str::FromStr;

use crate::chsh::{delta_s_coefficient, required_events, s_from_distributions, SignificanceQuery};
use crate::detection::{DetectionModel, FluorescenceModel};
use crate::error::{Error, Result};
use crate::quantum_state::WernerState;

use super::format::{sig9, Block, Document};
use super::scenario::{parse_with_overrides, DetectionKind, Scenario};

pub const CSV_HEADER: [&str; 7] = [
    "variable",
    "value",
    "s",
    "delta_s_coefficient",
    "n_exact",
    "required_events",
    "status",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepVariable {
    /// `V (2 a_det - 1)^2` under fluorescence readout.
    ObservableVisibility,
    /// Combined ionization-and-detection probability under ionization readout.
    PD,
    /// Any scalar scenario key, as `section.key`.
    Field(String),
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observable_visibility" => Ok(SweepVariable::ObservableVisibility),
            "p_d" => Ok(SweepVariable::PD),
            other if other.contains('.') => Ok(SweepVariable::Field(other.to_string())),
            other => Err(Error::Config(format!(
                "unknown sweep variable `{other}`; use observable_visibility, p_d or section.key"
            ))),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepVariable::ObservableVisibility => f.write_str("observable_visibility"),
            SweepVariable::PD => f.write_str("p_d"),
            SweepVariable::Field(k) => f.write_str(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub fixed: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub s: f64,
    pub delta_s_coefficient: f64,
    /// `(n_exact, required_events)`; `None` when there is no violation.
    pub required: Option<(f64, u64)>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Config(format!(
                "sweep range [{}, {}] must be finite with lo < hi",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::Config(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        // Resolving both endpoints checks the variable and its range.
        self.point(self.lo)?;
        self.point(self.hi)?;
        Ok(())
    }

    /// Endpoint-inclusive grid.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect()
    }

    fn point(&self, value: f64) -> Result<(Scenario, DetectionModel, WernerState)> {
        match &self.variable {
            SweepVariable::ObservableVisibility => {
                let state = WernerState::singlet(value)?;
                let readout = DetectionModel::Fluorescence(FluorescenceModel {
                    a_stirap: 1.0,
                    a_hf: 1.0,
                    a_det: 1.0,
                });
                Ok((self.fixed.clone(), readout, state))
            }
            SweepVariable::PD => {
                let mut scenario = self.fixed.clone();
                scenario.ionization.p_d = Some(value);
                scenario.validate()?;
                let readout = scenario.detection_model(DetectionKind::Ionization);
                let state = scenario.atom_atom_state()?;
                Ok((scenario, readout, state))
            }
            SweepVariable::Field(key) => {
                let doc = self.fixed.to_document()?;
                let scenario = parse_with_overrides(&doc, &[format!("{key}={value:?}")])?;
                let readout = scenario.selected_detection();
                let state = scenario.atom_atom_state()?;
                Ok((scenario, readout, state))
            }
        }
    }

    fn row(&self, value: f64) -> Result<SweepRow> {
        let (scenario, detection, state) = self.point(value)?;
        let settings = scenario.chsh_settings();
        let dists = settings.distributions(&detection, &state)?;
        let s = s_from_distributions(&dists);
        let coefficient = delta_s_coefficient(&dists, scenario.chsh.deviation);
        let required = if s > 2.0 {
            let r = required_events(&SignificanceQuery {
                k: scenario.significance.k,
                detection,
                state,
                settings,
                deviation: scenario.chsh.deviation,
            })?;
            Some((r.exact, r.events))
        } else {
            None
        };
        Ok(SweepRow {
            value,
            s,
            delta_s_coefficient: coefficient,
            required,
        })
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.values().into_iter().map(|v| spec.row(v)).collect()
}

pub fn sweep_document(spec: &SweepSpec, rows: &[SweepRow]) -> Document {
    let name = spec.variable.to_string();
    let table_rows = rows
        .iter()
        .map(|r| {
            let (n_exact, events, status) = match r.required {
                Some((exact, events)) => (sig9(exact), events.to_string(), "ok"),
                None => (String::new(), String::new(), "no_violation"),
            };
            vec![
                name.clone(),
                sig9(r.value),
                sig9(r.s),
                sig9(r.delta_s_coefficient),
                n_exact,
                events,
                status.to_string(),
            ]
        })
        .collect();
    Document {
        blocks: vec![Block::Table {
            header: CSV_HEADER.iter().map(|h| h.to_string()).collect(),
            rows: table_rows,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::format::OutputFormat;

    fn spec(variable: SweepVariable, lo: f64, hi: f64, steps: usize) -> SweepSpec {
        SweepSpec {
            variable,
            lo,
            hi,
            steps,
            fixed: Scenario::default(),
        }
    }

    #[test]
    fn two_steps_are_the_endpoints() {
        let s = spec(SweepVariable::ObservableVisibility, 0.8, 0.9, 2);
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value, 0.8);
        assert_eq!(rows[1].value, 0.9);
    }

    #[test]
    fn invalid_specs() {
        assert!(run_sweep(&spec(SweepVariable::ObservableVisibility, 0.9, 0.8, 5)).is_err());
        assert!(run_sweep(&spec(SweepVariable::ObservableVisibility, 0.8, 0.9, 1)).is_err());
        assert!(run_sweep(&spec(SweepVariable::ObservableVisibility, 0.8, 1.2, 3)).is_err());
        assert!(run_sweep(&spec(
            SweepVariable::Field("budget.nope".into()),
            0.0,
            0.1,
            3
        ))
        .is_err());
        assert!("bogus".parse::<SweepVariable>().is_err());
    }

    #[test]
    fn no_violation_rows_are_flagged() {
        let rows = run_sweep(&spec(SweepVariable::PD, 0.85, 1.0, 16)).unwrap();
        assert!(rows[0].required.is_none());
        assert!(rows.last().unwrap().required.is_some());
        let csv = sweep_document(&spec(SweepVariable::PD, 0.85, 1.0, 16), &rows)
            .render(OutputFormat::Csv);
        assert!(csv
            .starts_with("variable,value,s,delta_s_coefficient,n_exact,required_events,status\n"));
        assert!(csv.contains(",,no_violation\n"));
        assert_eq!(csv.lines().count(), 17);
    }

    #[test]
    fn field_sweep() {
        let rows = run_sweep(&spec(
            SweepVariable::Field("budget.e_bsm".into()),
            0.0,
            0.05,
            5,
        ))
        .unwrap();
        let n: Vec<u64> = rows.iter().map(|r| r.required.unwrap().1).collect();
        assert!(n.windows(2).all(|w| w[0] < w[1]), "{n:?}");
    }
}
