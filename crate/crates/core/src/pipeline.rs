//! End-to-end mapping: decompose, stage assignment, splitters, DFFs, checks.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::decompose::{decompose, DecomposeError, MappingConfig, SfqNetwork};
use crate::dff::{insert_dffs, DffError, DffResult};
use crate::netlist::{Network, ValidationReport};
use crate::phase::{assign_stages, PhaseError, PhaseResult, StageAssignment};
use crate::report::{count_jjs, gate_counts, throughput_factor, CostError, DffSummary, MappingReport};
use crate::solver::SolveStatus;
use crate::splitter::{insert_splitter_trees, SplitterPlan};
use crate::verify::verify_timing;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Dff(#[from] DffError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Result of one mapping run.
#[derive(Debug, Clone)]
pub struct MappedCircuit {
    /// Final network with splitters and DFFs.
    pub sfq: SfqNetwork,
    pub stages: StageAssignment,
    /// Network after decomposition, before fanout legalization.
    pub decomposed: SfqNetwork,
    pub phase: PhaseResult,
    pub splitters: SplitterPlan,
    pub dff: DffResult,
    pub validation: ValidationReport,
    pub jj_count: u64,
    /// Wall time per pipeline step, in run order.
    pub timings: Vec<(&'static str, Duration)>,
}

impl MappedCircuit {
    pub fn dff_count(&self) -> usize {
        self.dff.dff_count()
    }

    /// Worst solver status over the phase solve and every path solve.
    pub fn status(&self) -> SolveStatus {
        self.phase.status.worst(self.dff.status)
    }

    pub fn report(&self, cfg: &MappingConfig, with_timings: bool) -> MappingReport {
        let mut statuses = BTreeMap::new();
        for s in &self.dff.stats {
            *statuses.entry(s.status.name().to_string()).or_insert(0) += 1;
        }
        MappingReport {
            circuit: self.sfq.net.name().to_string(),
            phases: cfg.n,
            objective_mode: cfg.objective.name().to_string(),
            or_style: cfg.or_style.name().to_string(),
            spacing: cfg.spacing.name().to_string(),
            seed: cfg.seed,
            gate_counts: gate_counts(&self.sfq.net),
            dff_count: self.dff_count(),
            splitter_count: self.splitters.splitter_count(),
            jj_count: self.jj_count,
            epoch_depth: self.stages.output_epoch(&self.sfq),
            throughput_factor: throughput_factor(cfg.n),
            phase_status: self.phase.status.name().to_string(),
            phase_objective: self.phase.objective,
            phase_nodes: self.phase.stats.nodes,
            dff: DffSummary {
                paths: self.dff.paths.len(),
                sites: self.dff.stats.iter().map(|s| s.sites).sum(),
                statuses,
                status: self.dff.status.name().to_string(),
            },
            verified: self.validation.ok(),
            violations: self.validation.violations.len(),
            timings_ms: with_timings.then(|| {
                self.timings
                    .iter()
                    .map(|(k, d)| (k.to_string(), d.as_millis() as u64))
                    .collect()
            }),
        }
    }
}

/// Runs the whole flow on a logic network.
pub fn map_network(net: &Network, cfg: &MappingConfig) -> Result<MappedCircuit, PipelineError> {
    let mut timings = Vec::new();
    let mut t = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, t.elapsed()));
        t = Instant::now();
    };
    let decomposed = decompose(net, cfg.or_style)?;
    lap("decompose", &mut timings);
    let phase = assign_stages(&decomposed, cfg)?;
    lap("phase", &mut timings);
    let (split, split_stages, splitters) = insert_splitter_trees(&decomposed, &phase.stages);
    lap("splitters", &mut timings);
    let dff = insert_dffs(&split, &split_stages, cfg)?;
    lap("dff", &mut timings);
    let validation = verify_timing(&dff.sfq, &dff.stages);
    lap("verify", &mut timings);
    let jj_count = count_jjs(&dff.sfq.net, &cfg.cost_table)?;
    Ok(MappedCircuit {
        sfq: dff.sfq.clone(),
        stages: dff.stages.clone(),
        decomposed,
        phase,
        splitters,
        dff,
        validation,
        jj_count,
        timings,
    })
}
