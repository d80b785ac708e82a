//! Registry of checks. Each check builds its inputs from the run
//! configuration, measures nets on the ε grid and compares the measured
//! slopes, constants and sets against fixed expectations.

mod checks;
pub mod oracle;
mod report;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{read_reports, render_csv, suite_json, write_atomic, SuiteReport};

use crate::asymptotics::{DecayClass, DecayEstimate, EpsGrid, EpsNet};
use crate::config::Config;
use crate::functionals::{Context, CORPUS_VERSION};
use crate::mollifier::{Mollifier, MollifierError, MollifierParams};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("mollifier build failed: {0}")]
    Mollifier(#[from] MollifierError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

pub(crate) type CheckError = Box<dyn std::error::Error + Send + Sync>;
pub(crate) type CheckResult = Result<(), CheckError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    SlopeAtLeast { bound: f64 },
    SlopeEquals { slope: f64, tol: f64 },
    Negligible,
    NonNegligible,
    ConstantEquals { value: f64, rel_tol: f64 },
    SetEquals { points: Vec<f64>, radius: f64 },
    /// A structural property that is either observed or not.
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measured {
    Estimate { class: DecayClass, slope: Option<f64>, residual: Option<f64>, below_envelope: bool },
    Constant { value: f64 },
    Set { points: Vec<f64> },
    Flag { value: bool, detail: String },
}

impl Measured {
    pub fn from_estimate(e: &DecayEstimate) -> Measured {
        Measured::Estimate { class: e.class, slope: e.slope, residual: e.residual, below_envelope: e.below_envelope }
    }
}

/// Verdict as a pure function of what was measured and what was expected.
pub fn judge(expected: &Expectation, measured: &Measured) -> bool {
    use Expectation as E;
    match (expected, measured) {
        (E::SlopeAtLeast { bound }, Measured::Estimate { class, .. }) => {
            class.order_lower_bound().is_some_and(|b| b >= *bound)
        }
        (E::SlopeEquals { slope, tol }, Measured::Estimate { class: DecayClass::Order(a), .. }) => {
            (a - slope).abs() <= *tol
        }
        (E::Negligible, Measured::Estimate { class, below_envelope, .. }) => negligible(class, *below_envelope),
        (E::NonNegligible, Measured::Estimate { class, below_envelope, .. }) => !negligible(class, *below_envelope),
        (E::ConstantEquals { value, rel_tol }, Measured::Constant { value: v }) => {
            (v - value).abs() <= rel_tol * value.abs()
        }
        (E::SetEquals { points, radius }, Measured::Set { points: got }) => {
            got.len() == points.len() && points.iter().zip(got).all(|(a, b)| (a - b).abs() <= *radius)
        }
        (E::Holds, Measured::Flag { value, .. }) => *value,
        _ => false,
    }
}

fn negligible(class: &DecayClass, below_envelope: bool) -> bool {
    class.is_negligible_class() || (*class == DecayClass::Ambiguous && below_envelope)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub label: String,
    pub expected: Expectation,
    pub measured: Measured,
    pub pass: bool,
}

/// Plot data for one assertion: `log2 eps` against `log2 |x_eps|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub log2_eps: Vec<f64>,
    pub log2_magnitude: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    /// The statement being tested, in one line.
    pub claim: String,
    /// What is constructed and measured.
    pub statement: String,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    pub error: Option<String>,
    pub eps_grid: EpsGrid,
    /// Wall time; left empty unless timings were requested so that reports
    /// replay byte for byte.
    pub runtime_ms: Option<u64>,
    pub corpus_version: String,
    pub notes: Vec<String>,
    pub series: Vec<Series>,
}

/// Everything a check may use: the evaluation context and the mollifiers.
pub struct Env {
    pub config: Config,
    pub ctx: Context,
    pub phi: Arc<Mollifier>,
    skewed: OnceLock<Result<Arc<Mollifier>, String>>,
    pub timings: bool,
}

impl Env {
    pub fn new(config: Config) -> Result<Env, VerifyError> {
        config.validate()?;
        let phi = Mollifier::build(config.mollifier.clone())?;
        Ok(Env { ctx: config.context(), config, phi, skewed: OnceLock::new(), timings: false })
    }

    pub fn with_timings(mut self, on: bool) -> Env {
        self.timings = on;
        self
    }

    /// A certified mollifier with an odd spectral part, so that its square
    /// has a nonzero first moment.
    pub fn phi_skewed(&self) -> Result<Arc<Mollifier>, CheckError> {
        let r = self.skewed.get_or_init(|| {
            let p = MollifierParams { skew: 1.0, ..self.config.mollifier.clone() };
            Mollifier::build(p).map_err(|e| e.to_string())
        });
        r.clone().map_err(|e| e.into())
    }
}

/// Collects assertions, series and notes while a check runs.
pub struct Recorder<'a> {
    pub env: &'a Env,
    assertions: Vec<Assertion>,
    series: Vec<Series>,
    notes: Vec<String>,
}

impl<'a> Recorder<'a> {
    fn new(env: &'a Env) -> Self {
        Recorder { env, assertions: Vec::new(), series: Vec::new(), notes: Vec::new() }
    }

    pub fn ctx(&self) -> &Context {
        &self.env.ctx
    }

    fn push(&mut self, label: String, expected: Expectation, measured: Measured) -> bool {
        let pass = judge(&expected, &measured);
        self.assertions.push(Assertion { label, expected, measured, pass });
        pass
    }

    fn trace(&mut self, label: &str, net: &EpsNet) {
        let log2_eps = net.grid.log2_values();
        self.series.push(Series { label: label.into(), log2_eps, log2_magnitude: net.log2_magnitudes() });
    }

    fn estimate(&mut self, label: &str, net: &EpsNet) -> Result<DecayEstimate, CheckError> {
        self.trace(label, net);
        Ok(net.estimate(&self.env.ctx.asym)?)
    }

    pub fn slope_at_least(&mut self, label: impl Into<String>, net: &EpsNet, bound: f64) -> Result<bool, CheckError> {
        let label = label.into();
        let e = self.estimate(&label, net)?;
        Ok(self.push(label, Expectation::SlopeAtLeast { bound }, Measured::from_estimate(&e)))
    }

    /// Same, for an estimate produced elsewhere.
    pub fn estimate_at_least(&mut self, label: impl Into<String>, e: &DecayEstimate, bound: f64) -> bool {
        self.push(label.into(), Expectation::SlopeAtLeast { bound }, Measured::from_estimate(e))
    }

    pub fn slope_equals(&mut self, label: impl Into<String>, net: &EpsNet, slope: f64, tol: f64) -> Result<bool, CheckError> {
        let label = label.into();
        let e = self.estimate(&label, net)?;
        Ok(self.push(label, Expectation::SlopeEquals { slope, tol }, Measured::from_estimate(&e)))
    }

    pub fn negligible(&mut self, label: impl Into<String>, net: &EpsNet) -> Result<bool, CheckError> {
        let label = label.into();
        let e = self.estimate(&label, net)?;
        Ok(self.push(label, Expectation::Negligible, Measured::from_estimate(&e)))
    }

    pub fn non_negligible(&mut self, label: impl Into<String>, net: &EpsNet) -> Result<bool, CheckError> {
        let label = label.into();
        let e = self.estimate(&label, net)?;
        Ok(self.push(label, Expectation::NonNegligible, Measured::from_estimate(&e)))
    }

    /// Leading constant `x_eps / eps^a` averaged over the tail.
    pub fn constant_equals(&mut self, label: impl Into<String>, net: &EpsNet, a: f64, value: f64, rel_tol: f64) -> bool {
        let c = net.leading_constant(a);
        self.push(label.into(), Expectation::ConstantEquals { value, rel_tol }, Measured::Constant { value: c })
    }

    pub fn set_equals(&mut self, label: impl Into<String>, got: Vec<f64>, points: Vec<f64>, radius: f64) -> bool {
        self.push(label.into(), Expectation::SetEquals { points, radius }, Measured::Set { points: got })
    }

    pub fn holds(&mut self, label: impl Into<String>, value: bool, detail: impl Into<String>) -> bool {
        self.push(label.into(), Expectation::Holds, Measured::Flag { value, detail: detail.into() })
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

pub(crate) type CheckFn = fn(&mut Recorder) -> CheckResult;

pub struct CheckSpec {
    pub id: &'static str,
    pub claim: &'static str,
    pub statement: &'static str,
    pub(crate) run: CheckFn,
}

pub fn registry() -> &'static [CheckSpec] {
    checks::REGISTRY
}

pub fn check_ids() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

fn execute(spec: &CheckSpec, env: &Env) -> CheckReport {
    let start = Instant::now();
    let mut rec = Recorder::new(env);
    let outcome = catch_unwind(AssertUnwindSafe(|| (spec.run)(&mut rec)));
    let error = match outcome {
        Ok(Ok(())) => None,
        Ok(Err(e)) => Some(e.to_string()),
        Err(p) => Some(format!("panicked: {}", panic_message(p))),
    };
    let pass = error.is_none() && !rec.assertions.is_empty() && rec.assertions.iter().all(|a| a.pass);
    CheckReport {
        check_id: spec.id.into(),
        claim: spec.claim.into(),
        statement: spec.statement.into(),
        assertions: rec.assertions,
        pass,
        error,
        eps_grid: env.ctx.grid.clone(),
        runtime_ms: env.timings.then(|| start.elapsed().as_millis() as u64),
        corpus_version: CORPUS_VERSION.into(),
        notes: rec.notes,
        series: rec.series,
    }
}

pub fn run_check(id: &str, env: &Env) -> Result<CheckReport, VerifyError> {
    let spec = registry().iter().find(|c| c.id == id).ok_or_else(|| VerifyError::UnknownCheck(id.into()))?;
    Ok(execute(spec, env))
}

/// Resolve a suite filter: `all`, or a comma-separated list of ids, where
/// a trailing `*` matches by prefix. The result is in registry order.
pub fn select(filter: &str) -> Result<Vec<&'static CheckSpec>, VerifyError> {
    let reg = registry();
    let mut keep = vec![false; reg.len()];
    for tok in filter.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if tok == "all" {
            keep.iter_mut().for_each(|k| *k = true);
            continue;
        }
        let hits: Vec<usize> = match tok.strip_suffix('*') {
            Some(p) => (0..reg.len()).filter(|&i| reg[i].id.starts_with(p)).collect(),
            None => (0..reg.len()).filter(|&i| reg[i].id == tok).collect(),
        };
        if hits.is_empty() {
            return Err(VerifyError::UnknownCheck(tok.into()));
        }
        hits.into_iter().for_each(|i| keep[i] = true);
    }
    Ok(reg.iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect())
}

/// Run the selected checks on up to `jobs` threads; the reports come back
/// in registry order.
pub fn run_suite(filter: &str, env: &Env, jobs: usize) -> Result<Vec<CheckReport>, VerifyError> {
    let specs = select(filter)?;
    let jobs = jobs.max(1).min(specs.len().max(1));
    if jobs == 1 {
        return Ok(specs.iter().map(|s| execute(s, env)).collect());
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<OnceLock<CheckReport>> = specs.iter().map(|_| OnceLock::new()).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= specs.len() {
                    break;
                }
                let _ = slots[i].set(execute(specs[i], env));
            });
        }
    });
    Ok(slots.into_iter().map(|s| s.into_inner().expect("every slot is filled")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judging() {
        let est = |c, s| Measured::Estimate { class: c, slope: s, residual: Some(0.0), below_envelope: false };
        assert!(judge(&Expectation::SlopeAtLeast { bound: 2.0 }, &est(DecayClass::Order(2.01), None)));
        assert!(judge(&Expectation::SlopeAtLeast { bound: 2.0 }, &est(DecayClass::IdenticallyZero, None)));
        assert!(!judge(&Expectation::SlopeAtLeast { bound: 2.0 }, &est(DecayClass::Ambiguous, None)));
        assert!(judge(&Expectation::SlopeEquals { slope: -1.0, tol: 0.1 }, &est(DecayClass::Order(-0.95), None)));
        assert!(!judge(&Expectation::SlopeEquals { slope: -1.0, tol: 0.1 }, &est(DecayClass::BeyondOrder(10.0), None)));
        assert!(judge(&Expectation::Negligible, &est(DecayClass::BeyondOrder(10.0), None)));
        let amb = Measured::Estimate { class: DecayClass::Ambiguous, slope: None, residual: None, below_envelope: true };
        assert!(judge(&Expectation::Negligible, &amb));
        assert!(!judge(&Expectation::NonNegligible, &amb));
        assert!(judge(&Expectation::ConstantEquals { value: -0.6, rel_tol: 0.05 }, &Measured::Constant { value: -0.62 }));
        let set = Measured::Set { points: vec![0.7004] };
        assert!(judge(&Expectation::SetEquals { points: vec![0.7], radius: 1e-3 }, &set));
        assert!(!judge(&Expectation::SetEquals { points: vec![], radius: 1e-3 }, &set));
        assert!(!judge(&Expectation::Holds, &set));
    }

    #[test]
    fn selection() {
        assert_eq!(select("all").unwrap().len(), registry().len());
        let p = select("P-*").unwrap();
        assert!(p.iter().all(|c| c.id.starts_with("P-")));
        let two = select("P-density,T-delta-kernel").unwrap();
        assert_eq!(two[0].id, "T-delta-kernel");
        assert!(matches!(select("nope"), Err(VerifyError::UnknownCheck(_))));
        let ids = check_ids();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert!(ids.len() >= 24);
    }
}
