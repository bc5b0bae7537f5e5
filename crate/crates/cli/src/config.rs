//! TOML run configuration and its mapping onto machine settings.

use anyhow::{bail, Context, Result};
use mpcc_core::analytic::{self, CloneParameter, FidelityReport, QubitDistribution};
use mpcc_core::detectors::DetectorModel;
use mpcc_core::experiments::{ClonerKind, PipelineConfig};
use mpcc_core::optics::{mu_optimal, PdbsConfig, SpdcConfig};
use mpcc_core::quad;
use serde::{Deserialize, Serialize};

/// Cloner selection: a named rule or a fixed second Legendre moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClonerConfig {
    Name(String),
    SecondMoment { a2: f64 },
}

/// One `fidelity` run. Unknown keys are parse errors; missing keys take the
/// optimal operating point with a photon-counting detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub cloner: ClonerConfig,
    pub gamma_squared: f64,
    pub phi: f64,
    pub order: u8,
    pub mu: f64,
    pub nu: f64,
    pub detector: String,
    pub eta: f64,
    pub zeta: f64,
    pub quadrature_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cloner: ClonerConfig::Name("mpcc".into()),
            gamma_squared: 0.01,
            phi: 0.0,
            order: 3,
            mu: mu_optimal(),
            nu: 1.0 - mu_optimal(),
            detector: "counter".into(),
            eta: 1.0,
            zeta: 1e-6,
            quadrature_points: 64,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid run configuration")
    }

    pub fn cloner_kind(&self) -> Result<ClonerKind> {
        match &self.cloner {
            ClonerConfig::Name(name) => match name.as_str() {
                "uc" => Ok(ClonerKind::Universal),
                "pcc" => Ok(ClonerKind::PhaseCovariant),
                "mpcc" => Ok(ClonerKind::MirrorAdaptive),
                other => bail!("unknown cloner {other:?}; expected uc, pcc, mpcc, or {{ a2 = ... }}"),
            },
            ClonerConfig::SecondMoment { a2 } => Ok(ClonerKind::FixedA2(*a2)),
        }
    }

    pub fn detector_model(&self) -> Result<DetectorModel> {
        match self.detector.as_str() {
            "perfect" => Ok(DetectorModel::perfect()),
            "counter" => Ok(DetectorModel::single_photon_counter(self.eta, self.zeta)?),
            "onoff" => Ok(DetectorModel::on_off(self.eta, self.zeta)?),
            other => bail!("unknown detector {other:?}; expected perfect, counter, or onoff"),
        }
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            spdc: SpdcConfig::new(self.gamma_squared, self.phi, self.order)?,
            pdbs: PdbsConfig::new(self.mu, self.nu)?,
            cloner: self.cloner_kind()?,
            detector: self.detector_model()?,
        })
    }
}

fn ideal_acceptance(p: &CloneParameter, mu: f64) -> f64 {
    (1.0 - 2.0 * mu).powi(2) / (2.0 * p.lambda() * p.lambda())
}

/// Closed-form figures of merit for the configured cloner at the configured
/// splitter, taking nu = 1 - mu (the regime where the formulas hold; the
/// simulated column is authoritative elsewhere).
pub fn analytic_report(config: &RunConfig) -> Result<FidelityReport> {
    let report = match config.cloner_kind()? {
        ClonerKind::Universal => {
            let p = CloneParameter::universal();
            let f = analytic::average_fidelity(&QubitDistribution::Universal, |_| p)?;
            FidelityReport::new(f, f, ideal_acceptance(&p, config.mu))
        }
        ClonerKind::PhaseCovariant => {
            let p = CloneParameter::equatorial();
            let f = analytic::average_fidelity(&QubitDistribution::PhaseCovariant, |_| p)?;
            FidelityReport::new(f, f, ideal_acceptance(&p, config.mu))
        }
        ClonerKind::MirrorAdaptive => {
            let f = analytic::average_fidelity(
                &QubitDistribution::Universal,
                analytic::lambda_from_theta,
            )?;
            let mean_inv = quad::adaptive(
                |u: f64| {
                    let p = analytic::lambda_from_theta(u.clamp(-1.0, 1.0).acos());
                    0.5 / (2.0 * p.lambda() * p.lambda())
                },
                -1.0,
                1.0,
                1e-9,
            )?;
            let mu = config.mu;
            FidelityReport::new(f, f, (1.0 - 2.0 * mu).powi(2) * mean_inv)
        }
        ClonerKind::FixedA2(a2) => {
            let p = analytic::lambda_from_a2(a2)?;
            let cos2 = (2.0 * a2 + 1.0) / 3.0;
            let theta = cos2.max(0.0).sqrt().acos();
            let f = analytic::average_fidelity(&QubitDistribution::Mirror(theta), |_| p)?;
            FidelityReport::new(f, f, ideal_acceptance(&p, config.mu))
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = RunConfig::default();
        let text = toml::to_string_pretty(&config).unwrap();
        let parsed = RunConfig::parse(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("margarine = 7").is_err());
    }

    #[test]
    fn cloner_forms_parse() {
        let named = RunConfig::parse("cloner = \"uc\"").unwrap();
        assert_eq!(named.cloner_kind().unwrap(), ClonerKind::Universal);
        let moment = RunConfig::parse("cloner = { a2 = -0.5 }").unwrap();
        assert_eq!(moment.cloner_kind().unwrap(), ClonerKind::FixedA2(-0.5));
        let bogus = RunConfig::parse("cloner = \"telecloner\"").unwrap();
        assert!(bogus.cloner_kind().is_err());
    }

    #[test]
    fn analytic_headline_values() {
        let mut config = RunConfig::default();
        let mpcc = analytic_report(&config).unwrap();
        assert!((mpcc.f_avg - 0.8594442723176612).abs() < 1e-6);
        assert!((mpcc.p_success - 0.2596364487341332).abs() < 1e-6);
        config.cloner = ClonerConfig::Name("uc".into());
        assert!((analytic_report(&config).unwrap().f_avg - 5.0 / 6.0).abs() < 1e-9);
        config.cloner = ClonerConfig::Name("pcc".into());
        assert!((analytic_report(&config).unwrap().f_avg - 0.8535533905932738).abs() < 1e-12);
    }

    #[test]
    fn second_moment_matches_equatorial_bitwise() {
        let mut config = RunConfig::default();
        config.cloner = ClonerConfig::Name("pcc".into());
        let pcc = analytic_report(&config).unwrap();
        config.cloner = ClonerConfig::SecondMoment { a2: -0.5 };
        let fixed = analytic_report(&config).unwrap();
        assert_eq!(pcc.f_avg.to_bits(), fixed.f_avg.to_bits());
        assert_eq!(pcc.p_success.to_bits(), fixed.p_success.to_bits());
    }
}
