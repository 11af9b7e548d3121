use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::hilbert::{make_spectrum, HilbertVector, Spectrum, SpectrumFamily};
use crate::sampler::SamplerKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    MeanRate,
    SgdRate,
    Recursion,
    Lemmas,
    AsConvergence,
    Assumption3,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MeanRate => "mean-rate",
            Experiment::SgdRate => "sgd-rate",
            Experiment::Recursion => "recursion",
            Experiment::Lemmas => "lemmas",
            Experiment::AsConvergence => "as-convergence",
            Experiment::Assumption3 => "assumption3",
        }
    }
}

/// A step size given as a number or as one of the rules `"1/M"`, `"2/M"`
/// (`M = Σλ_i`) and `"1/(K1+1)"` (`K_1 = d`, the number of modes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSize {
    Value(f64),
    Rule(String),
}

impl StepSize {
    pub fn resolve(&self, spectrum: &Spectrum) -> Result<f64> {
        match self {
            StepSize::Value(g) => Ok(*g),
            StepSize::Rule(rule) => match rule.replace(' ', "").as_str() {
                "1/M" => Ok(1.0 / spectrum.trace()),
                "2/M" => Ok(2.0 / spectrum.trace()),
                "1/(K1+1)" => Ok(1.0 / (spectrum.k_sum(1.0) + 1.0)),
                other => Err(Error::invalid(format!(
                    "unknown step-size rule '{other}' (expected a number, \"1/M\", \"2/M\" or \"1/(K1+1)\")"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub d: usize,
    #[serde(flatten)]
    pub family: SpectrumFamily,
}

/// Initial vector: `θ_i = i^{-s}` or a single basis vector (1-based index).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theta0Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
}

impl Theta0Config {
    pub fn build(&self, d: usize) -> Result<HilbertVector> {
        match (self.s, self.basis) {
            (Some(_), Some(_)) => Err(Error::invalid("theta0: give either s or basis, not both")),
            (None, Some(i)) if i == 0 || i > d => Err(Error::invalid(format!(
                "theta0.basis must be in 1..={d}, got {i}"
            ))),
            (None, Some(i)) => Ok(HilbertVector::basis(d, i - 1)),
            (Some(s), None) if !(s > 0.0) => Err(Error::invalid(format!("theta0.s must be > 0, got {s}"))),
            (Some(s), None) => Ok(HilbertVector::power_law(d, s)),
            (None, None) => Err(Error::invalid("theta0 needs s or basis")),
        }
    }
}

/// Tolerances and experiment-specific knobs, the `[check]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Rate window `[n_min, n_max]`.
    pub window: [f64; 2],
    /// Norm index whose decay is fitted.
    pub kappa: f64,
    /// Expected exponent for the mean iterate; derived from the regularity
    /// of θ(0) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_exponent: Option<f64>,
    pub tolerance: f64,
    pub bound_betas: Vec<f64>,
    pub probe_betas: Vec<f64>,
    pub probe_n_max: usize,
    /// `"power"` (`t_n = n^ε`) or `"log-power"` (`t_n = (ln n)^{1+ε}`).
    pub probe_sequence: String,
    pub probe_eps: f64,
    pub beta_target: f64,
    pub slack: f64,
    /// Index of the `φ_β` series that must be non-increasing.
    pub monotone_beta: f64,
    pub monotone_se: f64,
    pub jensen_se: f64,
    pub mc_se: f64,
    pub assumption3_se: f64,
    pub exact_rel: f64,
    pub n_samples: usize,
    pub n_probes: usize,
    /// Samplers whose moment chain the lemma suite checks.
    pub samplers: Vec<SamplerKind>,
    pub decay_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub martingale_sampler: Option<SamplerKind>,
    pub martingale_replicas: usize,
    pub martingale_steps: Vec<usize>,
    pub grid_size: usize,
    pub n_terms: usize,
    pub holder_random: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            window: [100.0, 10_000.0],
            kappa: 0.0,
            expect_exponent: None,
            tolerance: 0.15,
            bound_betas: vec![0.5, 1.0, 1.4],
            probe_betas: vec![1.0, 2.0],
            probe_n_max: 100_000,
            probe_sequence: "power".into(),
            probe_eps: 0.1,
            beta_target: 1.0,
            slack: 0.15,
            monotone_beta: 1.0,
            monotone_se: 2.0,
            jensen_se: 4.0,
            mc_se: 3.0,
            assumption3_se: 4.0,
            exact_rel: 1e-10,
            n_samples: 100_000,
            n_probes: 32,
            samplers: vec![SamplerKind::CoordinateBounded, SamplerKind::GammaSym, SamplerKind::Gff],
            decay_factor: 1e-3,
            martingale_sampler: None,
            martingale_replicas: 10_000,
            martingale_steps: vec![1, 10, 100],
            grid_size: 100_000,
            n_terms: 100_000,
            holder_random: 1000,
        }
    }
}

/// The config file as written; unset keys take experiment defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    seed: Option<u64>,
    out: Option<PathBuf>,
    spectrum: Option<SpectrumConfig>,
    theta0: Option<Theta0Config>,
    sampler: Option<SamplerKind>,
    gamma: Option<StepSize>,
    n_steps: Option<usize>,
    n_replicas: Option<usize>,
    betas: Option<Vec<f64>>,
    #[serde(default)]
    check: CheckConfig,
}

/// Fully resolved configuration, echoed into the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub sampler: SamplerKind,
    pub gamma: StepSize,
    pub n_steps: usize,
    pub n_replicas: usize,
    pub betas: Vec<f64>,
    pub spectrum: SpectrumConfig,
    pub theta0: Theta0Config,
    pub check: CheckConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub replicas: Option<usize>,
    pub steps: Option<usize>,
}

fn power_law(c: f64, d: usize) -> SpectrumConfig {
    SpectrumConfig {
        d,
        family: SpectrumFamily::PowerLaw { c, p: 2.0 },
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::invalid(format!("config parse error: {e}")))?;
        Ok(Self::resolve(raw))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::InvalidParameter(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn resolve(raw: RawConfig) -> Self {
        use Experiment::*;
        use SamplerKind::*;
        let e = raw.experiment;
        let (spectrum, sampler, gamma, n_steps, n_replicas, betas) = match e {
            MeanRate => (power_law(0.4, 5000), GammaSym, StepSize::Value(1.0), 10_000, 1, vec![0.0]),
            SgdRate => (
                power_law(0.4, 100),
                GammaSym,
                StepSize::Rule("1/(K1+1)".into()),
                10_000,
                100,
                vec![0.0, 1.0],
            ),
            Recursion => (power_law(0.4, 200), Gff, StepSize::Value(0.5), 1, 1, vec![0.0]),
            Lemmas => (power_law(0.4, 100), GammaSym, StepSize::Value(1.0), 1, 1, vec![0.3, 0.45]),
            AsConvergence => (
                power_law(0.4, 20),
                CoordinateBounded,
                StepSize::Rule("2/M".into()),
                100_000,
                50,
                vec![0.0],
            ),
            Assumption3 => (power_law(0.4, 100), GammaSym, StepSize::Value(1.0), 1, 1, vec![0.3, 0.45]),
        };
        ExperimentConfig {
            experiment: e,
            seed: raw.seed.unwrap_or(0),
            out: raw.out,
            sampler: raw.sampler.unwrap_or(sampler),
            gamma: raw.gamma.unwrap_or(gamma),
            n_steps: raw.n_steps.unwrap_or(n_steps),
            n_replicas: raw.n_replicas.unwrap_or(n_replicas),
            betas: raw.betas.unwrap_or(betas),
            spectrum: raw.spectrum.unwrap_or(spectrum),
            theta0: raw.theta0.unwrap_or(Theta0Config { s: Some(2.0), basis: None }),
            check: raw.check,
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(r) = o.replicas {
            self.n_replicas = r;
        }
        if let Some(n) = o.steps {
            self.n_steps = n;
        }
    }

    pub fn build_spectrum(&self) -> Result<Spectrum> {
        make_spectrum(self.spectrum.family.clone(), self.spectrum.d)
    }

    pub fn build_theta0(&self) -> Result<HilbertVector> {
        self.theta0.build(self.spectrum.d)
    }

    /// Checks every numeric precondition before any work starts.
    pub fn validate(&self) -> Result<f64> {
        let spectrum = self.build_spectrum()?;
        self.build_theta0()?;
        let gamma = self.gamma.resolve(&spectrum)?;
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!("step size must satisfy γ > 0, got γ = {gamma}")));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be >= 1"));
        }
        if self.n_replicas == 0 {
            return Err(Error::invalid("n_replicas must be >= 1"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("betas must be a non-empty list of finite numbers"));
        }
        let [lo, hi] = self.check.window;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::invalid(format!("check.window must satisfy 0 < n_min < n_max, got [{lo}, {hi}]")));
        }
        match self.check.probe_sequence.as_str() {
            "power" | "log-power" => {}
            other => {
                return Err(Error::invalid(format!(
                    "check.probe_sequence must be \"power\" or \"log-power\", got '{other}'"
                )))
            }
        }
        Ok(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let c = ExperimentConfig::from_toml("experiment = \"mean-rate\"").unwrap();
        assert_eq!(c.spectrum.d, 5000);
        assert_eq!(c.gamma, StepSize::Value(1.0));
        assert_eq!(c.validate().unwrap(), 1.0);
    }

    #[test]
    fn step_size_rules() {
        let c = ExperimentConfig::from_toml("experiment = \"sgd-rate\"\n[spectrum]\nd = 10\nfamily = \"power-law\"\nc = 0.4\np = 2.0\n").unwrap();
        assert_eq!(c.validate().unwrap(), 1.0 / 11.0);
        let c = ExperimentConfig::from_toml("experiment = \"as-convergence\"\ngamma = \"3/M\"").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn negative_gamma_is_rejected() {
        let c = ExperimentConfig::from_toml("experiment = \"mean-rate\"\ngamma = -1.0").unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("γ > 0"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = ExperimentConfig::from_toml("experiment = \"mean-rate\"\ngamma = = 1").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"lemmas\"\nbogus = 1").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut c = ExperimentConfig::from_toml("experiment = \"sgd-rate\"\nseed = 3").unwrap();
        c.apply(&Overrides { seed: Some(9), replicas: Some(4), steps: Some(50), out: None });
        assert_eq!((c.seed, c.n_replicas, c.n_steps), (9, 4, 50));
    }
}
