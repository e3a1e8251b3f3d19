use std::time::Instant;

use rayon::prelude::*;

use ukadf_core::artifact::{ArtifactMetadata, PretrainedArtifact};
use ukadf_core::data::DemandMatrix;
use ukadf_core::train::{self, prepare, sweep_plan, sweep_point, RunConfig, RunResult, SweepResult};

use crate::Result;

pub fn run_pretrain(
    data: &DemandMatrix,
    cfg: &RunConfig,
    metadata: ArtifactMetadata,
) -> Result<(PretrainedArtifact, RunResult)> {
    let start = Instant::now();
    let (artifact, mut result) = train::run_pretrain(data, cfg, metadata)?;
    result.elapsed = Some(start.elapsed());
    Ok((artifact, result))
}

pub fn run_adapt(data: &DemandMatrix, artifact: &PretrainedArtifact, cfg: &RunConfig) -> Result<RunResult> {
    let start = Instant::now();
    let mut result = train::run_adapt(data, artifact, cfg)?;
    result.elapsed = Some(start.elapsed());
    Ok(result)
}

pub fn run_variant(data: &DemandMatrix, cfg: &RunConfig, artifact: Option<&PretrainedArtifact>) -> Result<RunResult> {
    let start = Instant::now();
    let mut result = train::run_variant(data, cfg, artifact)?;
    result.elapsed = Some(start.elapsed());
    Ok(result)
}

/// The adaptation sweep with grid cells dispatched across the rayon pool.
/// Results are in grid order and identical to the sequential sweep.
pub fn sweep_parallel(
    data: &DemandMatrix,
    artifact: &PretrainedArtifact,
    cfg: &RunConfig,
    gammas: &[f64],
    betas: &[f64],
) -> Result<SweepResult> {
    let plan = sweep_plan(cfg, gammas, betas)?;
    let prepared = prepare(data, cfg)?;
    let points = plan
        .into_par_iter()
        .map(|cell| {
            let start = Instant::now();
            let mut p = sweep_point(&prepared, artifact, cfg, cell)?;
            p.result.elapsed = Some(start.elapsed());
            Ok(p)
        })
        .collect::<Result<Vec<_>, ukadf_core::Error>>()?;
    Ok(SweepResult::from_points(points)?)
}
