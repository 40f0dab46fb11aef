use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::{GenerationParams, HttpSettings, RetryPolicy};
use crate::corpus::{DatasetDescriptor, DatasetName};
use crate::labeling::LabelPolicy;
use crate::prompting::PromptConfig;

use super::RunError;

/// One corpus to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    #[serde(flatten)]
    pub descriptor: DatasetDescriptor,
    pub path: PathBuf,
    /// Check the loaded counts against the full original distribution.
    #[serde(default)]
    pub published_counts: bool,
}

impl DatasetEntry {
    pub fn new(descriptor: DatasetDescriptor, path: impl Into<PathBuf>) -> Self {
        Self {
            descriptor,
            path: path.into(),
            published_counts: false,
        }
    }

    /// The descriptor with published counts applied when requested.
    pub fn effective_descriptor(&self) -> DatasetDescriptor {
        if self.published_counts {
            self.descriptor.clone().with_published_counts()
        } else {
            self.descriptor.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockSettings {
    /// Fixed answers, cycled in call order.
    pub answers: Option<Vec<String>>,
    /// Answer every pair with its gold relation.
    pub oracle: bool,
    /// Pick among these per prompt, seeded by the run seed.
    pub random: Option<Vec<String>>,
    /// Latency to report instead of the measured one.
    pub latency_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    Http(HttpSettings),
    Mock(MockSettings),
    /// Replay cache; with `record` set, misses go to that backend and are
    /// appended to the cache.
    Replay {
        cache: PathBuf,
        #[serde(default)]
        record: Option<Box<BackendConfig>>,
    },
}

fn default_concurrency() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub datasets: Vec<DatasetEntry>,
    /// Prompt config file; the bundled default when absent.
    #[serde(default)]
    pub prompt_config: Option<PathBuf>,
    pub backend: BackendConfig,
    #[serde(default)]
    pub generation: GenerationParams,
    #[serde(default)]
    pub label_policy: LabelPolicy,
    #[serde(default = "default_concurrency")]
    pub concurrency_limit: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| RunError::Config(vec![format!("{}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut self.datasets {
            fix(&mut d.path);
        }
        if let Some(p) = &mut self.prompt_config {
            fix(p);
        }
        fix(&mut self.output_dir);
        let mut backend = Some(&mut self.backend);
        while let Some(BackendConfig::Replay { cache, record }) = backend {
            fix(cache);
            backend = record.as_deref_mut();
        }
    }

    pub fn load_prompt_config(&self) -> Result<PromptConfig, RunError> {
        match &self.prompt_config {
            Some(p) => PromptConfig::from_path(p).map_err(RunError::Prompt),
            None => Ok(PromptConfig::default()),
        }
    }

    /// Every problem found, empty when the config is usable.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.datasets.is_empty() {
            problems.push("no datasets configured".to_owned());
        }
        if self.concurrency_limit < 1 {
            problems.push("concurrency_limit must be at least 1".to_owned());
        }
        for d in &self.datasets {
            if let Err(e) = d.descriptor.check_format() {
                problems.push(e.to_string());
            }
            if !d.path.exists() {
                problems.push(format!("{}: {} does not exist", d.descriptor.name, d.path.display()));
            }
            if d.published_counts && d.descriptor.name == DatasetName::Generic {
                problems.push("generic datasets have no published counts".to_owned());
            }
        }
        match self.load_prompt_config() {
            Ok(p) => problems.extend(p.validate().iter().map(|v| format!("prompt config: {v}"))),
            Err(e) => problems.push(e.to_string()),
        }
        if let Err(e) = self.generation.validate() {
            problems.push(format!("generation: {e}"));
        }
        if self.retry.attempts < 1 {
            problems.push("retry.attempts must be at least 1".to_owned());
        }
        if self.output_dir.exists() && !self.output_dir.is_dir() {
            problems.push(format!("{} is not a directory", self.output_dir.display()));
        } else if !self.output_dir.exists() {
            let existing = self.output_dir.ancestors().find(|p| p.exists());
            if existing.is_some_and(|p| !p.is_dir()) {
                problems.push(format!("cannot create {}", self.output_dir.display()));
            }
        } else if fs::metadata(&self.output_dir).is_ok_and(|m| m.permissions().readonly()) {
            problems.push(format!("{} is not writable", self.output_dir.display()));
        }
        validate_backend(&self.backend, &mut problems);
        problems
    }
}

fn validate_backend(backend: &BackendConfig, problems: &mut Vec<String>) {
    match backend {
        BackendConfig::Http(s) => {
            if s.base_url.trim().is_empty() {
                problems.push("backend.base_url is empty".to_owned());
            }
            if s.model.trim().is_empty() {
                problems.push("backend.model is empty".to_owned());
            }
            if !s.timeout_seconds.is_finite() || s.timeout_seconds <= 0.0 {
                problems.push("backend.timeout_seconds must be positive".to_owned());
            }
        }
        BackendConfig::Mock(m) => {
            let modes = usize::from(m.answers.is_some()) + usize::from(m.oracle) + usize::from(m.random.is_some());
            if modes != 1 {
                problems.push("mock backend needs exactly one of answers, oracle, random".to_owned());
            }
            if m.answers.as_ref().is_some_and(Vec::is_empty) || m.random.as_ref().is_some_and(Vec::is_empty) {
                problems.push("mock answer list is empty".to_owned());
            }
            if m.latency_seconds.is_some_and(|l| l.is_nan() || l < 0.0) {
                problems.push("mock latency must be non-negative".to_owned());
            }
        }
        BackendConfig::Replay { cache, record } => match record {
            Some(inner) => {
                if matches!(**inner, BackendConfig::Replay { .. }) {
                    problems.push("replay cannot record from another replay backend".to_owned());
                }
                validate_backend(inner, problems);
            }
            None if !cache.is_file() => {
                problems.push(format!("replay cache {} does not exist", cache.display()));
            }
            None => {}
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "datasets": [{"name": "kialo", "path": "kialo.jsonl"}],
                "backend": {"kind": "mock", "answers": ["support"]},
                "output_dir": "out"
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.concurrency_limit, 4);
        assert_eq!(cfg.label_policy, LabelPolicy::Ignore);
        assert_eq!(cfg.generation, GenerationParams::default());
        assert_eq!(cfg.datasets[0].descriptor.name, DatasetName::Kialo);
    }

    #[test]
    fn nested_replay_paths_are_resolved() {
        let mut cfg: RunConfig = serde_json::from_str(
            r#"{
                "datasets": [{"name": "essays", "format": "brat", "path": "essays", "published_counts": true}],
                "backend": {"kind": "replay", "cache": "c.jsonl",
                            "record": {"kind": "http", "base_url": "http://x/v1", "model": "m"}},
                "output_dir": "out"
            }"#,
        )
        .unwrap();
        cfg.resolve_paths(Path::new("/base"));
        assert_eq!(cfg.datasets[0].path, Path::new("/base/essays"));
        assert_eq!(cfg.output_dir, Path::new("/base/out"));
        let BackendConfig::Replay { cache, .. } = &cfg.backend else { panic!() };
        assert_eq!(cache, Path::new("/base/c.jsonl"));
        assert_eq!(cfg.datasets[0].effective_descriptor().expected_support, Some(4841));
    }

    #[test]
    fn validation_collects_problems() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "datasets": [{"name": "kialo", "format": "brat", "path": "/definitely/missing"}],
                "backend": {"kind": "mock"},
                "concurrency_limit": 0,
                "generation": {"max_new_tokens": 0},
                "output_dir": "/definitely/missing/out"
            }"#,
        )
        .unwrap();
        let problems = cfg.validate();
        assert!(problems.len() >= 5, "{problems:#?}");
        assert!(problems.iter().any(|p| p.contains("concurrency_limit")));
        assert!(problems.iter().any(|p| p.contains("exactly one")));
    }
}
