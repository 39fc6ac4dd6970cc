//! Per-iteration solve traces shared by the descent solvers and OGDA.

use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Converged,
    IterationCapReached,
}

/// One row of a trace. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub epoch: usize,
    pub delta_i: f64,
    /// Absent for OGDA.
    pub rho_i: Option<f64>,
    /// Step size; OGDA records its learning rate here.
    pub epsilon: f64,
    #[serde(rename = "V_before")]
    pub v_before: f64,
    #[serde(rename = "V_after")]
    pub v_after: f64,
    /// Absent for OGDA.
    pub gamma: Option<f64>,
    pub row_set: usize,
    pub col_set: usize,
}

/// Provenance that is not part of the per-iteration data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub solver: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    /// Informational only; excluded from every comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub metadata: TraceMetadata,
    pub iterations: Vec<IterationRecord>,
    pub outcome: Outcome,
    /// Set when a heuristic run was cut short for lack of progress.
    pub stalled: bool,
    pub initial_gap: f64,
    pub final_gap: f64,
}

impl SolveTrace {
    pub fn new(solver: impl Into<String>, initial_gap: f64) -> Self {
        Self {
            metadata: TraceMetadata {
                solver: solver.into(),
                ..TraceMetadata::default()
            },
            iterations: Vec::new(),
            outcome: Outcome::IterationCapReached,
            stalled: false,
            initial_gap,
            final_gap: initial_gap,
        }
    }

    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }

    pub fn push(&mut self, record: IterationRecord) {
        self.final_gap = record.v_after;
        self.iterations.push(record);
    }

    /// Gap sequence `V_0, V_1, ...` including the starting point.
    pub fn gaps(&self) -> Vec<f64> {
        std::iter::once(self.initial_gap)
            .chain(self.iterations.iter().map(|r| r.v_after))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut writer = csv::Writer::from_writer(out);
        if self.iterations.is_empty() {
            writer.write_record([
                "t", "epoch", "delta_i", "rho_i", "epsilon", "V_before", "V_after", "gamma",
                "row_set", "col_set",
            ])?;
        }
        for record in &self.iterations {
            writer.serialize(record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: usize) -> IterationRecord {
        IterationRecord {
            t,
            epoch: 1,
            delta_i: 0.5,
            rho_i: Some(0.25),
            epsilon: 0.125,
            v_before: 1.0,
            v_after: 0.5,
            gamma: Some(-1.0),
            row_set: 1,
            col_set: 2,
        }
    }

    #[test]
    fn csv_layout() {
        let mut trace = SolveTrace::new("plain", 1.0);
        assert_eq!(
            trace.to_csv_string(),
            "t,epoch,delta_i,rho_i,epsilon,V_before,V_after,gamma,row_set,col_set\n"
        );
        trace.push(record(0));
        let mut ogda = record(1);
        ogda.rho_i = None;
        ogda.gamma = None;
        trace.push(ogda);
        assert_eq!(
            trace.to_csv_string(),
            "t,epoch,delta_i,rho_i,epsilon,V_before,V_after,gamma,row_set,col_set\n\
             0,1,0.5,0.25,0.125,1.0,0.5,-1.0,1,2\n\
             1,1,0.5,,0.125,1.0,0.5,,1,2\n"
        );
    }

    #[test]
    fn json_round_trip() {
        let mut trace = SolveTrace::new("plain", 1.0);
        trace.push(record(0));
        trace.outcome = Outcome::Converged;
        let back: SolveTrace = serde_json::from_str(&trace.to_json()).unwrap();
        assert_eq!(back, trace);
        assert_eq!(back.gaps(), vec![1.0, 0.5]);
    }
}
