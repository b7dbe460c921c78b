#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const STAGES: [&[&str]; 9] = [
    &["synth"],
    &["ingest"],
    &["classify"],
    &["build-series"],
    &["market"],
    &["analyze", "all"],
    &["train"],
    &["evaluate"],
    &["predict"],
];

/// A scratch directory holding a config file, driven through the binary.
pub struct Project {
    pub dir: tempfile::TempDir,
}

impl Project {
    pub fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("config.json"), config).unwrap();
        Project { dir }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_emostock"))
            .arg("--config")
            .arg(self.path("config.json"))
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    pub fn run_ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "`emostock {}` failed with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    pub fn run_pipeline(&self, synth_args: &[&str]) {
        for stage in STAGES {
            let mut args = stage.to_vec();
            if stage[0] == "synth" {
                args.extend_from_slice(synth_args);
            }
            self.run_ok(&args);
        }
    }

    pub fn read(&self, rel: &str) -> String {
        std::fs::read_to_string(self.path(rel)).unwrap()
    }

    pub fn json(&self, rel: &str) -> serde_json::Value {
        serde_json::from_str(&self.read(rel)).unwrap()
    }
}

/// Every file below `root`, keyed by its path relative to `root`.
pub fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Rows of a CSV file as header → value maps.
pub fn csv_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

/// Config that trains the selected-emotion SVM on the planted features
/// only, next to the default model kinds.
pub fn planted_config(emotion: &str, lag: usize) -> String {
    format!(
        r#"{{
  "training": {{
    "models": ["svm_es"],
    "features": {{"close": [{{"source": "{emotion}", "lag": {lag}}}]}}
  }}
}}"#
    )
}

/// Outcome of one planted-signal pipeline run.
pub struct PlantedOutcome {
    pub planted_p: f64,
    pub spurious: usize,
    pub non_implied: usize,
    pub holdout: f64,
    /// Share of the most frequent class in the holdout set.
    pub majority: f64,
}

pub fn planted_run(coupling: f64, seed: u64) -> (Project, PlantedOutcome) {
    let p = Project::new(&planted_config("disgust", 2));
    let seed = seed.to_string();
    let coupling = coupling.to_string();
    for stage in STAGES {
        let mut args = stage.to_vec();
        if stage[0] == "synth" {
            args.extend_from_slice(&["--coupling", &coupling]);
        }
        args.extend_from_slice(&["--seed", &seed]);
        p.run_ok(&args);
    }
    let truth = p.json("out/synth/ground_truth.json");
    let implied: Vec<(String, u64, String)> = truth["implied_cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c[0].as_str().unwrap().to_string(),
                c[1].as_u64().unwrap(),
                c[2].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let granger = csv_rows(&p.read("out/analysis/granger.csv"));
    let key = |r: &BTreeMap<String, String>| (r["emotion"].clone(), r["lag"].parse::<u64>().unwrap(), r["target"].clone());
    let planted_p = granger
        .iter()
        .find(|r| key(r) == ("disgust".to_string(), 2, "close".to_string()))
        .map(|r| r["p_value"].parse::<f64>().unwrap())
        .unwrap();
    let others: Vec<_> = granger.iter().filter(|r| !implied.contains(&key(r))).collect();
    let spurious = others.iter().filter(|r| r["significant"] == "true").count();

    let eval = p.json("out/reports/eval.json");
    let close = eval
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["target"] == "close" && r["model"] == "svm_es")
        .unwrap();
    let confusion: Vec<Vec<u64>> = serde_json::from_value(close["confusion"].clone()).unwrap();
    let total: u64 = confusion.iter().flatten().sum();
    let majority = confusion.iter().map(|row| row.iter().sum::<u64>()).max().unwrap() as f64 / total as f64;
    let outcome = PlantedOutcome {
        planted_p,
        spurious,
        non_implied: others.len(),
        holdout: close["accuracy"].as_f64().unwrap(),
        majority,
    };
    (p, outcome)
}
