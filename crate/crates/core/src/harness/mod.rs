//! Seeded randomized verification of the inequalities, with reports that
//! record every failing instance so it can be regenerated from the seed.

pub mod checks;
pub mod config;
pub mod eval;
pub mod instance;
pub mod scan;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{check_alpha_inclusion, inclusion_alpha, InclusionBranch, InclusionCheck};
pub use config::{Rho, TheoremId, TrialConfig};
pub use eval::{LinkResult, Outcome};
pub use instance::{random_instance, Instance};
pub use scan::{alpha_grid, scan_rho_bar_n, scan_rho_n, scan_rho_tilde_n, AlphaCurve, CurveVerdict, ScanConfig};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub outcome: Outcome,
    /// Smallest margin over the non-exploratory links.
    pub min_margin: Option<f64>,
    pub links: Vec<LinkResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<AlphaCurve>,
}

/// A failing (or, for exploratory links, noteworthy) trial with everything
/// needed to rerun it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub seed: u64,
    pub trial: u64,
    pub instance: Instance,
    pub links: Vec<LinkResult>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// No violation, but some trial was inconclusive or errored.
    Inconclusive,
    Fail,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub inconclusive: usize,
    pub errors: usize,
    pub violations: usize,
    pub findings: usize,
    pub min_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: TheoremId,
    pub config: TrialConfig,
    pub rhos: Vec<Rho>,
    pub status: Status,
    pub summary: Summary,
    pub trials: Vec<TrialRecord>,
    pub counterexamples: Vec<Counterexample>,
    /// Exploratory hits (numerical radius with weights summing above one).
    pub findings: Vec<Counterexample>,
    /// Kept out of the serialized report so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

fn min_margin<'a>(links: impl Iterator<Item = &'a LinkResult>) -> Option<f64> {
    links.map(|l| l.margin).fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.min(m))))
}

fn evaluate(theorem: TheoremId, cfg: &TrialConfig, rhos: &[Rho], index: u64) -> (Option<Instance>, TrialRecord) {
    let mut record = TrialRecord {
        index,
        outcome: Outcome::Error,
        min_margin: None,
        links: Vec::new(),
        error: None,
        curves: Vec::new(),
    };
    let inst = match random_instance(theorem, cfg, index) {
        Ok(inst) => inst,
        Err(e) => {
            record.error = Some(e.to_string());
            return (None, record);
        }
    };
    match checks::run_checks(theorem, &inst, cfg, rhos) {
        Ok((links, curves)) => {
            record.outcome = links
                .iter()
                .filter(|l| !l.soft)
                .fold(Outcome::Pass, |acc, l| acc.worst(l.outcome));
            record.min_margin = min_margin(links.iter().filter(|l| !l.soft));
            record.links = links;
            record.curves = curves;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    (Some(inst), record)
}

/// Regenerates and rechecks trial `index` of a run.
pub fn run_trial(theorem: TheoremId, cfg: &TrialConfig, index: u64) -> Result<(Instance, TrialRecord)> {
    cfg.validate()?;
    let rhos = cfg.rhos_for(theorem)?;
    let (inst, rec) = evaluate(theorem, cfg, &rhos, index);
    match inst {
        Some(inst) => Ok((inst, rec)),
        None => random_instance(theorem, cfg, index).map(|i| (i, rec)),
    }
}

/// Runs `cfg.trials` seeded trials of `theorem`. Trials run in parallel and
/// are collected by index, so the report does not depend on thread count.
pub fn verify(theorem: TheoremId, cfg: &TrialConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let rhos = cfg.rhos_for(theorem)?;
    let start = Instant::now();
    let results: Vec<(Option<Instance>, TrialRecord)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| evaluate(theorem, cfg, &rhos, i))
        .collect();

    let mut summary = Summary { trials: results.len(), ..Default::default() };
    let mut counterexamples = Vec::new();
    let mut findings = Vec::new();
    let mut trials = Vec::with_capacity(results.len());
    for (inst, rec) in results {
        match rec.outcome {
            Outcome::Pass => summary.passed += 1,
            Outcome::Inconclusive => summary.inconclusive += 1,
            Outcome::Error => summary.errors += 1,
            Outcome::Violation => summary.violations += 1,
        }
        if let Some(m) = rec.min_margin {
            summary.min_margin = Some(summary.min_margin.map_or(m, |a: f64| a.min(m)));
        }
        if let Some(inst) = inst {
            let failing: Vec<LinkResult> = rec
                .links
                .iter()
                .filter(|l| !l.soft && l.outcome == Outcome::Violation)
                .cloned()
                .collect();
            let soft: Vec<LinkResult> = rec
                .links
                .iter()
                .filter(|l| l.soft && l.outcome == Outcome::Violation)
                .cloned()
                .collect();
            if !soft.is_empty() {
                summary.findings += 1;
                findings.push(Counterexample { seed: cfg.seed, trial: rec.index, instance: inst.clone(), links: soft });
            }
            if !failing.is_empty() {
                counterexamples.push(Counterexample { seed: cfg.seed, trial: rec.index, instance: inst, links: failing });
            }
        }
        trials.push(rec);
    }
    let status = if summary.violations > 0 {
        Status::Fail
    } else if summary.inconclusive + summary.errors > 0 {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(VerificationReport {
        theorem,
        config: cfg.clone(),
        rhos,
        status,
        summary,
        trials,
        counterexamples,
        findings,
        wall_time: start.elapsed(),
    })
}
