//! Detector models (perfect, single-photon counter, ON/OFF), their POVMs,
//! polarization-basis analysis, and coincidence bookkeeping.
//!
//! All effects are diagonal in photon number. A detector is characterized by
//! quantum efficiency eta and dark-count rate zeta:
//!   no-click    Pi_0[m] = e^{-zeta} (1-eta)^m
//!   one-click   Pi_1[m] = e^{-zeta} (zeta (1-eta)^m + eta m (1-eta)^{m-1})
//!   click       1 - Pi_0[m]
//!
//! Coincidence extraction follows the hardware counting logic: an accepted
//! event needs the trigger arm, the herald, a photon-number gate on each
//! output mode, and exactly one analysis arm firing per output mode. The
//! silent-arm factors differ per detector family (see `exclusive_one_weight`)
//! and reduce to exact projectors for perfect detectors.

use crate::analytic::{FidelityReport, InputQubit};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, ModeLabel, ModeTransform, SpatialMode};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Perfect,
    SinglePhotonCounter,
    OnOff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    kind: DetectorKind,
    eta: f64,
    zeta: f64,
}

impl DetectorModel {
    pub fn perfect() -> Self {
        DetectorModel { kind: DetectorKind::Perfect, eta: 1.0, zeta: 0.0 }
    }

    pub fn single_photon_counter(eta: f64, zeta: f64) -> Result<Self> {
        Self::checked(DetectorKind::SinglePhotonCounter, eta, zeta)
    }

    pub fn on_off(eta: f64, zeta: f64) -> Result<Self> {
        Self::checked(DetectorKind::OnOff, eta, zeta)
    }

    fn checked(kind: DetectorKind, eta: f64, zeta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain { param: "eta", value: eta, allowed: "[0, 1]" });
        }
        if !zeta.is_finite() || zeta < 0.0 {
            return Err(Error::Domain { param: "zeta", value: zeta, allowed: ">= 0" });
        }
        Ok(DetectorModel { kind, eta, zeta })
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// No-click effect eigenvalue at photon number `m`.
    pub fn zero_weight(&self, m: u32) -> f64 {
        match self.kind {
            DetectorKind::Perfect => {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => (-self.zeta).exp() * (1.0 - self.eta).powi(m as i32),
        }
    }

    /// "Registered one photon" eigenvalue: the one-click effect for
    /// counters, the click effect for ON/OFF, an exact projector when
    /// perfect.
    pub fn one_weight(&self, m: u32) -> f64 {
        match self.kind {
            DetectorKind::Perfect => {
                if m == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            DetectorKind::SinglePhotonCounter => {
                let q = 1.0 - self.eta;
                let detect = if m >= 1 {
                    self.eta * m as f64 * q.powi(m as i32 - 1)
                } else {
                    0.0
                };
                (-self.zeta).exp() * (self.zeta * q.powi(m as i32) + detect)
            }
            DetectorKind::OnOff => self.click_weight(m),
        }
    }

    /// Click effect 1 - Pi_0[m].
    pub fn click_weight(&self, m: u32) -> f64 {
        1.0 - self.zero_weight(m)
    }

    /// Probability that all `m` photons escape detection: (1-eta)^m, with
    /// no dark-count factor.
    pub fn survival_weight(&self, m: u32) -> f64 {
        (1.0 - self.eta).powi(m as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmOutcome {
    Zero,
    One,
    Many,
    AtLeastOne,
}

/// Diagonal effect: `weights[m]` is the eigenvalue at photon number m.
#[derive(Debug, Clone)]
pub struct PovmElement {
    pub outcome: PovmOutcome,
    pub weights: Vec<f64>,
}

/// Three-outcome POVM {zero, one, many} of a single-photon counter,
/// truncated at `n_max` photons. Completeness holds exactly per level.
pub fn spc_povm(d: &DetectorModel, n_max: u32) -> Result<Vec<PovmElement>> {
    if d.kind != DetectorKind::SinglePhotonCounter {
        return Err(Error::InvalidDetectorModel {
            expected: "single_photon_counter",
            got: format!("{:?}", d.kind),
        });
    }
    let zero: Vec<f64> = (0..=n_max).map(|m| d.zero_weight(m)).collect();
    let one: Vec<f64> = (0..=n_max).map(|m| d.one_weight(m)).collect();
    let many: Vec<f64> = zero
        .iter()
        .zip(&one)
        .map(|(&z, &o)| 1.0 - z - o)
        .collect();
    Ok(vec![
        PovmElement { outcome: PovmOutcome::Zero, weights: zero },
        PovmElement { outcome: PovmOutcome::One, weights: one },
        PovmElement { outcome: PovmOutcome::Many, weights: many },
    ])
}

/// Two-outcome POVM {zero, at_least_one} of an ON/OFF detector.
pub fn onoff_povm(d: &DetectorModel, n_max: u32) -> Result<Vec<PovmElement>> {
    if d.kind != DetectorKind::OnOff {
        return Err(Error::InvalidDetectorModel {
            expected: "on_off",
            got: format!("{:?}", d.kind),
        });
    }
    let zero: Vec<f64> = (0..=n_max).map(|m| d.zero_weight(m)).collect();
    let click: Vec<f64> = zero.iter().map(|&z| 1.0 - z).collect();
    Ok(vec![
        PovmElement { outcome: PovmOutcome::Zero, weights: zero },
        PovmElement { outcome: PovmOutcome::AtLeastOne, weights: click },
    ])
}

/// Polarization rotation sending the input qubit to H and its orthogonal
/// state to V, applied to each listed spatial mode.
pub fn analysis_rotation(q: &InputQubit, modes: &[SpatialMode]) -> ModeTransform {
    let a = Complex64::new(q.alpha(), 0.0);
    let b = q.beta();
    let zero = Complex64::new(0.0, 0.0);
    let mut inputs: Vec<ModeLabel> = Vec::new();
    let mut matrix = vec![vec![zero; 2 * modes.len()]; 2 * modes.len()];
    for (k, &mode) in modes.iter().enumerate() {
        inputs.push(mode.h());
        inputs.push(mode.v());
        let base = 2 * k;
        matrix[base][base] = a.conj();
        matrix[base + 1][base] = -b;
        matrix[base][base + 1] = b.conj();
        matrix[base + 1][base + 1] = a;
    }
    ModeTransform::new(inputs.clone(), inputs, matrix)
        .expect("analysis rotation is unitary for unit-norm qubits")
}

/// Probability that the designated arm registers one photon while the
/// sibling arm stays silent, given `fired` photons on the designated arm
/// and `silent` on the sibling.
///
/// Counters pair the one-click effect with sibling photon survival; ON/OFF
/// detectors decompose exhaustively over sibling outcomes and split
/// both-click ties evenly between the two arms. Perfect detectors reduce to
/// exact projectors.
pub(crate) fn exclusive_one_weight(d: &DetectorModel, fired: u32, silent: u32) -> f64 {
    match d.kind() {
        DetectorKind::Perfect => {
            if fired == 1 && silent == 0 {
                1.0
            } else {
                0.0
            }
        }
        DetectorKind::SinglePhotonCounter => d.one_weight(fired) * d.survival_weight(silent),
        DetectorKind::OnOff => {
            d.click_weight(fired) * d.zero_weight(silent)
                + 0.5 * d.click_weight(fired) * d.click_weight(silent)
        }
    }
}

/// Photon-number gate on one output mode's total occupation.
pub(crate) fn gate_weight(d: &DetectorModel, total: u32) -> f64 {
    match d.kind() {
        DetectorKind::Perfect => {
            if total == 1 {
                1.0
            } else {
                0.0
            }
        }
        DetectorKind::SinglePhotonCounter => d.one_weight(total),
        DetectorKind::OnOff => d.click_weight(total),
    }
}

/// Joint single-mode outcome probabilities after rotating the analysis
/// basis so the input qubit maps to H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmProbabilities {
    /// Designated (input-state) arm fires, sibling silent.
    pub designated_alone: f64,
    /// Orthogonal-state arm fires, sibling silent.
    pub orthogonal_alone: f64,
    /// Designated arm one-photon effect, sibling unconstrained.
    pub designated_total: f64,
    pub orthogonal_total: f64,
}

/// Rotates `mode` into the qubit basis of `q` and evaluates both analysis
/// arms of detector `d`.
pub fn measure_in_basis(
    rho: &DensityOperator,
    mode: SpatialMode,
    q: &InputQubit,
    d: &DetectorModel,
) -> Result<ArmProbabilities> {
    let rotated = rho.apply_mode_transform(&analysis_rotation(q, &[mode]))?;
    let mut out = ArmProbabilities {
        designated_alone: 0.0,
        orthogonal_alone: 0.0,
        designated_total: 0.0,
        orthogonal_total: 0.0,
    };
    for (ket, p) in rotated.diagonal() {
        let h = ket.occupation(mode.h()) as u32;
        let v = ket.occupation(mode.v()) as u32;
        out.designated_alone += p * exclusive_one_weight(d, h, v);
        out.orthogonal_alone += p * exclusive_one_weight(d, v, h);
        out.designated_total += p * d.one_weight(h);
        out.orthogonal_total += p * d.one_weight(v);
    }
    Ok(out)
}

/// Joint two-clone coincidence probabilities. Index 1 means the arm
/// matching the input state fired, 0 the orthogonal arm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoincidenceTable {
    pub c00: f64,
    pub c01: f64,
    pub c10: f64,
    pub c11: f64,
}

impl CoincidenceTable {
    pub fn total(&self) -> f64 {
        self.c00 + self.c01 + self.c10 + self.c11
    }
}

/// Evaluates the four analysis coincidences on the two clone modes of
/// `rho_out`, including the per-mode photon-number gate.
pub fn coincidences(
    rho_out: &DensityOperator,
    q: &InputQubit,
    d: &DetectorModel,
) -> Result<CoincidenceTable> {
    let rotation = analysis_rotation(q, &[SpatialMode::Clone1, SpatialMode::Clone2]);
    let rotated = rho_out.apply_mode_transform(&rotation)?;
    let mut t = CoincidenceTable::default();
    for (ket, p) in rotated.diagonal() {
        let h1 = ket.occupation(SpatialMode::Clone1.h()) as u32;
        let v1 = ket.occupation(SpatialMode::Clone1.v()) as u32;
        let h2 = ket.occupation(SpatialMode::Clone2.h()) as u32;
        let v2 = ket.occupation(SpatialMode::Clone2.v()) as u32;
        let gated = p * gate_weight(d, h1 + v1) * gate_weight(d, h2 + v2);
        if gated == 0.0 {
            continue;
        }
        let one1 = exclusive_one_weight(d, h1, v1);
        let zero1 = exclusive_one_weight(d, v1, h1);
        let one2 = exclusive_one_weight(d, h2, v2);
        let zero2 = exclusive_one_weight(d, v2, h2);
        t.c11 += gated * one1 * one2;
        t.c10 += gated * one1 * zero2;
        t.c01 += gated * zero1 * one2;
        t.c00 += gated * zero1 * zero2;
    }
    Ok(t)
}

/// Clone fidelities estimated from one coincidence table.
pub fn fidelities_from_coincidences(t: &CoincidenceTable) -> Result<FidelityReport> {
    let p = t.total();
    if p <= 0.0 {
        return Err(Error::BlockedConfiguration);
    }
    Ok(FidelityReport::new(
        (t.c11 + t.c10) / p,
        (t.c11 + t.c01) / p,
        p,
    ))
}
