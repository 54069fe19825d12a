use std::fmt::Write as _;
use std::path::Path;

use super::config::ExperimentConfig;
use crate::error::Result;

/// Plain-text record of a run: configuration, seeds, version and timings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub kind: String,
    pub version: String,
    pub config: Vec<(String, String)>,
    pub master_seed: u64,
    pub trial_seeds: Vec<u64>,
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            kind: config.kind.to_string(),
            version: format!("s2mri {}", env!("CARGO_PKG_VERSION")),
            config: config.snapshot(),
            master_seed: config.seed,
            trial_seeds: (0..config.trials).map(|t| config.trial_seed(t)).collect(),
            timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# run manifest");
        let _ = writeln!(s, "experiment = {}", self.kind);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let seeds: Vec<String> = self.trial_seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "trial_seeds = {}", seeds.join(","));
        let _ = writeln!(s, "\n[config]");
        for (k, v) in &self.config {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "\n[timings_seconds]");
        for (k, v) in &self.timings {
            let _ = writeln!(s, "{k} = {v:.3}");
        }
        let _ = writeln!(s, "\n[outputs]");
        for o in &self.outputs {
            let _ = writeln!(s, "{o}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("manifest.txt"), self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn config_section_reparses() {
        let cfg = ExperimentConfig::defaults(ExperimentKind::VaryingChirp);
        let text = RunManifest::new(&cfg).render();
        let section = text
            .split("[config]")
            .nth(1)
            .unwrap()
            .split("\n[")
            .next()
            .unwrap();
        assert_eq!(
            ExperimentConfig::parse(ExperimentKind::VaryingChirp, section).unwrap(),
            cfg
        );
        assert!(text.contains("trial_seeds = 1,2,3,4,5"));
    }
}
