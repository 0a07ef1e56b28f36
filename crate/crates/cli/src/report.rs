//! Structured outputs: `report.json` (deterministic for a fixed config and
//! seed), `partition.json`, `sweep.csv`, and a `meta.json` sidecar that
//! carries the wall-clock timestamp so the main report stays byte-stable.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use fraclt_core::covering::CoveringPartition;
use fraclt_core::report::InequalityReport;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub command: String,
    pub config: C,
    pub quadrature_order: usize,
    pub seed: u64,
    pub results: R,
    pub verdicts: Vec<InequalityReport>,
    pub all_satisfied: bool,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(
        command: &str,
        config: C,
        quadrature_order: usize,
        seed: u64,
        results: R,
        verdicts: Vec<InequalityReport>,
    ) -> Self {
        let all_satisfied = verdicts.iter().all(|v| v.satisfied);
        Report {
            command: command.to_string(),
            config,
            quadrature_order,
            seed,
            results,
            verdicts,
            all_satisfied,
        }
    }

    /// Write `report.json` plus the `meta.json` timestamp sidecar.
    /// Returns the report path.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        let path = out_dir.join("report.json");
        let body = serde_json::to_string_pretty(self)?;
        fs::write(&path, body + "\n")?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        let meta = serde_json::json!({ "written_unix_seconds": stamp.as_secs() });
        fs::write(out_dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(path)
    }
}

/// Leaf/family export of a covering partition.
#[derive(Debug, Serialize)]
pub struct PartitionExport {
    pub dim: usize,
    pub k: u32,
    pub lambda: f64,
    pub root_center: Vec<f64>,
    pub root_side: f64,
    pub leaves: Vec<LeafExport>,
    pub families: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct LeafExport {
    pub center: Vec<f64>,
    pub side: f64,
    pub depth: u32,
    pub mass: f64,
}

impl PartitionExport {
    pub fn from_partition(p: &CoveringPartition) -> Self {
        PartitionExport {
            dim: p.dim(),
            k: p.k,
            lambda: p.lambda,
            root_center: p.root.center.clone(),
            root_side: p.root.side,
            leaves: p
                .leaves
                .iter()
                .map(|l| LeafExport {
                    center: l.cube.center.clone(),
                    side: l.cube.side,
                    depth: l.cube.depth,
                    mass: l.mass,
                })
                .collect(),
            families: p.families.iter().map(|f| f.members.clone()).collect(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir)?;
        let path = out_dir.join("partition.json");
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }
}

/// Flat sweep rows for plotting.
pub fn write_sweep_csv(
    out_dir: &Path,
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("sweep.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    writer.flush()?;
    Ok(path)
}
