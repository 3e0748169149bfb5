//! Runs a suite and writes traces, the summary table and a hash manifest.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fic_core::metrics::{summarize, summary_row, SUMMARY_HEADER};
use fic_core::{run_simulation, ExperimentSpec};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

struct Outcome {
    trace_csv: Option<String>,
    row: String,
    failure: Option<String>,
}

fn run_one(spec: &ExperimentSpec) -> Outcome {
    let result = run_simulation(spec).and_then(|tr| summarize(&tr, spec).map(|s| (tr, s)));
    match result {
        Ok((tr, summary)) => Outcome { trace_csv: Some(tr.to_csv()), row: summary_row(spec, &Ok(summary)), failure: None },
        Err(e) => {
            let msg = e.to_string();
            Outcome { trace_csv: None, row: summary_row(spec, &Err(msg.clone())), failure: Some(msg) }
        }
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    files: Vec<ManifestEntry>,
    failed_runs: Vec<String>,
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).with_context(|| format!("writing {name}"))?;
    Ok(())
}

/// What a suite run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub written: Vec<PathBuf>,
    /// `(experiment name, error message)` for every run that did not complete.
    pub failures: Vec<(String, String)>,
}

/// Runs `specs` on `jobs` worker threads (0 = all cores) and writes the results
/// into `out_dir`. Output bytes do not depend on `jobs`.
pub fn run_suite(specs: &[ExperimentSpec], out_dir: &Path, jobs: usize) -> Result<SuiteReport> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let outcomes: Vec<Outcome> = pool.install(|| specs.par_iter().map(run_one).collect());

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut failures = Vec::new();
    for (spec, out) in specs.iter().zip(outcomes) {
        summary.push_str(&out.row);
        summary.push('\n');
        if let Some(csv) = out.trace_csv {
            files.push((format!("{}_trace.csv", spec.name), csv.into_bytes()));
        }
        if let Some(msg) = out.failure {
            failures.push((spec.name.clone(), msg));
        }
    }
    files.push((SUMMARY_FILE.to_string(), summary.into_bytes()));

    let manifest = Manifest {
        files: files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                path: name.clone(),
                bytes: bytes.len(),
                sha256: format!("{:x}", Sha256::digest(bytes)),
            })
            .collect(),
        failed_runs: failures.iter().map(|(n, _)| n.clone()).collect(),
    };
    let mut manifest_json = serde_json::to_vec_pretty(&manifest)?;
    manifest_json.push(b'\n');
    files.push((MANIFEST_FILE.to_string(), manifest_json));

    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        write_atomic(out_dir, name, bytes)?;
        written.push(out_dir.join(name));
    }
    Ok(SuiteReport { written, failures })
}
