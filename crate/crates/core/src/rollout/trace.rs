//! Episode traces: a header plus one record per control step, stored as
//! JSON lines so runs can be streamed, diffed, and re-evaluated offline.

use super::RolloutError;
use crate::phase::GaitConfig;
use crate::reward::{RewardBreakdown, RewardInput, Suite};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Everything needed to reproduce or interpret an episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeHeader {
    pub seed: u64,
    pub gait: GaitConfig,
    pub suite: Suite,
    pub episode_length: usize,
    pub control_dt: f64,
    pub physics_substep: f64,
    pub initial_time: f64,
    /// Label of the terrain the episode ran on, if any.
    pub terrain_tag: Option<String>,
}

/// One control step of a rollout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub time: f64,
    /// Base pose: x, y, z, yaw.
    pub base: [f64; 4],
    /// Absolute terrain heights under the sampling footprint, row-major.
    pub heightmap: Vec<f64>,
    pub input: RewardInput,
    pub breakdown: RewardBreakdown,
    pub terminated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutTrace {
    pub header: EpisodeHeader,
    pub steps: Vec<TraceStep>,
    /// True when the episode ended by leaving the terrain rather than by
    /// termination or running out its length.
    pub truncated: bool,
}

impl RolloutTrace {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.breakdown.total).sum()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), RolloutError> {
        #[derive(Serialize)]
        struct HeaderLine<'a> {
            header: &'a EpisodeHeader,
            truncated: bool,
            steps: usize,
        }
        let header = serde_json::to_string(&HeaderLine {
            header: &self.header,
            truncated: self.truncated,
            steps: self.steps.len(),
        })?;
        writeln!(w, "{header}")?;
        for step in &self.steps {
            let line = serde_json::to_string(step)?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, RolloutError> {
        #[derive(Deserialize)]
        struct HeaderLine {
            header: EpisodeHeader,
            truncated: bool,
            steps: usize,
        }
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| RolloutError::TraceFormat("empty trace".into()))??;
        let head: HeaderLine = serde_json::from_str(&first)
            .map_err(|e| RolloutError::TraceFormat(format!("header line: {e}")))?;
        let mut steps = Vec::with_capacity(head.steps);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let step: TraceStep = serde_json::from_str(&line)
                .map_err(|e| RolloutError::TraceFormat(format!("step line {}: {e}", i + 1)))?;
            steps.push(step);
        }
        if steps.len() != head.steps {
            return Err(RolloutError::TraceFormat(format!(
                "header promises {} steps, file holds {}",
                head.steps,
                steps.len()
            )));
        }
        Ok(Self {
            header: head.header,
            steps,
            truncated: head.truncated,
        })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), RolloutError> {
        let file = File::create(path)?;
        self.write_jsonl(BufWriter::new(file))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, RolloutError> {
        let file = File::open(path)?;
        Self::read_jsonl(BufReader::new(file))
    }
}

/// Load every `*.jsonl` trace in a directory, in filename order.
pub fn read_trace_dir<P: AsRef<Path>>(dir: P) -> Result<Vec<RolloutTrace>, RolloutError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(RolloutTrace::load).collect()
}
