//! Photonic cloning pipeline: down-conversion source, input preparation,
//! the polarization-dependent beam splitter, and the feedforward stage.
//!
//! Rail layout: rail 0 drives the feedforward trigger, rail 0' the herald,
//! rail 1 carries the entangled partner, rail 2 the state to be cloned.
//! The beam splitter sends rails 1,2 to 1',2'; after feedforward those are
//! relabeled 1'',2'' and hold the clones.
//!
//! The source ket is kept to third order in the pump amplitude gamma. All
//! multi-photon kets are normalized Fock states; the printed coefficients
//! are taken as the amplitudes on those kets and the overall normalization
//! is computed numerically.

use crate::analytic::{CloneParameter, InputQubit};
use crate::detectors::DetectorModel;
use crate::error::{Error, Result};
use crate::fock::{
    Caps, DensityOperator, DiagonalOperator, FockBasisState, ModeLabel, ModeTransform,
    Polarization, PureState, SpatialMode,
};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Down-conversion source settings. `order` is the highest power of gamma
/// retained in the emitted ket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcConfig {
    gamma: f64,
    phi: f64,
    order: u8,
}

impl SpdcConfig {
    pub fn new(gamma_squared: f64, phi: f64, order: u8) -> Result<Self> {
        if !(gamma_squared > 0.0 && gamma_squared <= 0.1) {
            return Err(Error::Domain {
                param: "gamma_squared",
                value: gamma_squared,
                allowed: "(0, 0.1]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::Domain { param: "phi", value: phi, allowed: "finite" });
        }
        if order != 2 && order != 3 {
            return Err(Error::Domain {
                param: "order",
                value: order as f64,
                allowed: "{2, 3}",
            });
        }
        Ok(SpdcConfig { gamma: gamma_squared.sqrt(), phi, order })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_squared(&self) -> f64 {
        self.gamma * self.gamma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Smallest caps under which the full pipeline (source, preparation,
    /// beam splitter, analysis rotation) runs without truncation errors.
    pub fn recommended_caps(&self) -> Caps {
        match self.order {
            2 => Caps::new(2, 6),
            _ => Caps::new(3, 6),
        }
    }
}

/// Beam-splitter transmittances for horizontal (`mu`) and vertical (`nu`)
/// polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdbsConfig {
    mu: f64,
    nu: f64,
}

/// Horizontal transmittance of the symmetric working point, (1 - 1/sqrt 3)/2.
pub fn mu_optimal() -> f64 {
    0.5 * (1.0 - 1.0 / 3f64.sqrt())
}

impl PdbsConfig {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        for (name, value) in [("mu", mu), ("nu", nu)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Domain { param: name, value, allowed: "[0, 1]" });
            }
        }
        Ok(PdbsConfig { mu, nu })
    }

    /// Working point at which both clones receive equal fidelity.
    pub fn optimal() -> Self {
        let mu = mu_optimal();
        PdbsConfig { mu, nu: 1.0 - mu }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Feedforward attenuation. `kappa` is the single-photon amplitude
/// transmittance applied to the polarization matching the trigger outcome;
/// negative values realize the attenuation combined with a half-wave flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedforwardConfig {
    kappa: f64,
}

impl FeedforwardConfig {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa.abs() > 1.0 {
            return Err(Error::Domain { param: "kappa", value: kappa, allowed: "[-1, 1]" });
        }
        Ok(FeedforwardConfig { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Attenuation that realizes a target clone parameter at the given beam
/// splitter: kappa = lambda_bar (1 - 2 mu) / (lambda sqrt(2 mu nu)).
///
/// Errors with `InfeasibleConfiguration` when the required attenuation
/// exceeds unit magnitude or the splitter fully reflects one polarization
/// while attenuation is still needed.
pub fn kappa_for(p: &CloneParameter, cfg: &PdbsConfig) -> Result<f64> {
    let lb = p.lambda_bar();
    if lb == 0.0 {
        return Ok(0.0);
    }
    let denom = p.lambda() * (2.0 * cfg.mu() * cfg.nu()).sqrt();
    if denom == 0.0 {
        return Err(Error::InfeasibleConfiguration { kappa: f64::INFINITY });
    }
    let kappa = lb * (1.0 - 2.0 * cfg.mu()) / denom;
    if kappa.abs() > 1.0 + 1e-12 {
        return Err(Error::InfeasibleConfiguration { kappa });
    }
    Ok(kappa.clamp(-1.0, 1.0))
}

/// Like `kappa_for`, but clamps out-of-range values to [-1, 1] and reports
/// the clamp instead of failing. Used by parameter sweeps.
pub fn kappa_clamped(p: &CloneParameter, cfg: &PdbsConfig) -> (f64, bool) {
    let lb = p.lambda_bar();
    if lb == 0.0 {
        return (0.0, false);
    }
    let denom = p.lambda() * (2.0 * cfg.mu() * cfg.nu()).sqrt();
    let raw = if denom == 0.0 {
        (lb * (1.0 - 2.0 * cfg.mu())).signum() * f64::INFINITY
    } else {
        lb * (1.0 - 2.0 * cfg.mu()) / denom
    };
    if raw.abs() > 1.0 {
        (raw.clamp(-1.0, 1.0), true)
    } else {
        (raw, false)
    }
}

/// Source ket up to `cfg.order` in gamma, numerically normalized.
///
/// The order-limited photon-pair expansion: at gamma^2 one pair lands on
/// rails 0,1 in the polarization-entangled combination while a second pair
/// marks rails 0',2; at gamma^3 the same structure appears with doubled
/// occupation plus a four-term correction spread over rails 0 and 1.
pub fn spdc_state(cfg: &SpdcConfig, caps: Caps) -> Result<PureState> {
    let c0 = SpatialMode::Control;
    let her = SpatialMode::Herald;
    let r1 = SpatialMode::Input1;
    let r2 = SpatialMode::Input2;
    let g2 = Complex64::from_polar(cfg.gamma_squared(), 2.0 * cfg.phi());
    let g3 = Complex64::from_polar(cfg.gamma_squared() * cfg.gamma(), 3.0 * cfg.phi());
    let half = Complex64::new(0.5, 0.0);
    let inv_rt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    let mut terms: Vec<(FockBasisState, Complex64)> = vec![
        (
            FockBasisState::from_occupations([(c0.h(), 1), (r1.v(), 1), (her.h(), 1), (r2.h(), 1)]),
            g2 * inv_rt2,
        ),
        (
            FockBasisState::from_occupations([(c0.v(), 1), (r1.h(), 1), (her.h(), 1), (r2.h(), 1)]),
            g2 * inv_rt2,
        ),
    ];
    if cfg.order >= 3 {
        terms.extend([
            (
                FockBasisState::from_occupations([
                    (c0.h(), 1),
                    (r1.v(), 1),
                    (her.h(), 2),
                    (r2.h(), 2),
                ]),
                g3 * inv_rt2,
            ),
            (
                FockBasisState::from_occupations([
                    (c0.v(), 1),
                    (r1.h(), 1),
                    (her.h(), 2),
                    (r2.h(), 2),
                ]),
                g3 * inv_rt2,
            ),
            (
                FockBasisState::from_occupations([
                    (c0.h(), 1),
                    (c0.v(), 1),
                    (her.h(), 1),
                    (r2.h(), 1),
                ]),
                g3 * half,
            ),
            (
                FockBasisState::from_occupations([
                    (r1.h(), 1),
                    (r1.v(), 1),
                    (her.h(), 1),
                    (r2.h(), 1),
                ]),
                g3 * half,
            ),
            (
                FockBasisState::from_occupations([
                    (c0.h(), 2),
                    (r1.v(), 2),
                    (her.h(), 1),
                    (r2.h(), 1),
                ]),
                g3 * half,
            ),
            (
                FockBasisState::from_occupations([
                    (c0.v(), 2),
                    (r1.h(), 2),
                    (her.h(), 1),
                    (r2.h(), 1),
                ]),
                g3 * half,
            ),
        ]);
    }
    PureState::from_amplitudes(terms, caps)?.normalized()
}

/// Rotates the rail-2 polarization so H is replaced by the input qubit and
/// V by its orthogonal complement.
pub fn prepare_input(state: &PureState, q: &InputQubit) -> Result<PureState> {
    let a = Complex64::new(q.alpha(), 0.0);
    let b = q.beta();
    let r2 = SpatialMode::Input2;
    let t = ModeTransform::new(
        vec![r2.h(), r2.v()],
        vec![r2.h(), r2.v()],
        vec![vec![a, -b.conj()], vec![b, a.conj()]],
    )?;
    state.apply_mode_transform(&t)
}

/// Polarization-dependent beam splitter across rails 1,2 -> 1',2'.
/// H transmits with amplitude sqrt(mu), V with sqrt(nu); the two
/// polarizations pick up opposite reflection sign conventions.
pub fn pdbs(cfg: &PdbsConfig) -> Result<ModeTransform> {
    let tm = (1.0 - cfg.mu).sqrt();
    let rm = cfg.mu.sqrt();
    let tn = (1.0 - cfg.nu).sqrt();
    let rn = cfg.nu.sqrt();
    let c = |x: f64| Complex64::new(x, 0.0);
    let zero = c(0.0);
    let r1 = SpatialMode::Input1;
    let r2 = SpatialMode::Input2;
    let m1 = SpatialMode::Mixed1;
    let m2 = SpatialMode::Mixed2;
    ModeTransform::new(
        vec![r1.h(), r2.h(), r1.v(), r2.v()],
        vec![m1.h(), m2.h(), m1.v(), m2.v()],
        vec![
            vec![c(tm), c(rm), zero, zero],
            vec![c(-rm), c(tm), zero, zero],
            vec![zero, zero, c(tn), c(rn)],
            vec![zero, zero, c(rn), c(-tn)],
        ],
    )
}

/// Number-diagonal attenuation of one polarization across rails 1',2':
/// kappa per horizontal photon, -kappa per vertical photon.
pub fn damping_operator(cfg: &FeedforwardConfig, pol: Polarization) -> DiagonalOperator {
    let kappa = cfg.kappa;
    let (l1, l2, base): (ModeLabel, ModeLabel, f64) = match pol {
        Polarization::H => (SpatialMode::Mixed1.h(), SpatialMode::Mixed2.h(), kappa),
        Polarization::V => (SpatialMode::Mixed1.v(), SpatialMode::Mixed2.v(), -kappa),
    };
    DiagonalOperator::new(move |ket| {
        let n = ket.occupation(l1) as i32 + ket.occupation(l2) as i32;
        Complex64::new(base.powi(n), 0.0)
    })
}

/// One trigger/herald occupation pattern together with the (sub-normalized)
/// rail-1',2' state conditioned on it.
#[derive(Debug, Clone)]
pub struct ConditionalGroup {
    /// Occupations outside rails 1',2' (trigger rail 0 and herald rail 0').
    pub trigger: FockBasisState,
    /// Conditional state on rails 1',2'; its squared norm is the pattern's
    /// probability weight.
    pub state: PureState,
}

impl ConditionalGroup {
    pub fn control_h(&self) -> u32 {
        self.trigger.occupation(SpatialMode::Control.h()) as u32
    }

    pub fn control_v(&self) -> u32 {
        self.trigger.occupation(SpatialMode::Control.v()) as u32
    }

    pub fn herald_total(&self) -> u32 {
        self.trigger.spatial_total(SpatialMode::Herald)
    }
}

/// Splits a post-beam-splitter state by trigger/herald occupation pattern.
/// The squared norms of the group states sum to the input's squared norm.
pub fn conditional_groups(psi: &PureState) -> Vec<ConditionalGroup> {
    let keep = [SpatialMode::Mixed1, SpatialMode::Mixed2];
    let mut buckets: BTreeMap<FockBasisState, Vec<(FockBasisState, Complex64)>> = BTreeMap::new();
    for (ket, amp) in psi.amplitudes() {
        let (mixed, rest) = ket.split_by_spatial(&keep);
        buckets.entry(rest).or_default().push((mixed, amp));
    }
    buckets
        .into_iter()
        .map(|(trigger, amps)| ConditionalGroup {
            trigger,
            state: PureState::from_amplitudes(amps, psi.caps())
                .expect("group kets inherit the parent state's caps"),
        })
        .collect()
}

/// Relabels the post-feedforward rails 1',2' to the clone rails 1'',2''.
pub fn clone_relabel(s: SpatialMode) -> SpatialMode {
    match s {
        SpatialMode::Mixed1 => SpatialMode::Clone1,
        SpatialMode::Mixed2 => SpatialMode::Clone2,
        other => other,
    }
}

/// Feedforward stage: conditions on a one-photon trigger on rail 0 (H or V,
/// the other arm silent) and a one-photon herald on rail 0', applies the
/// matching polarization damping, and traces out rails 0,0'.
///
/// The returned operator lives on the clone rails 1'',2'' and is
/// sub-normalized; its trace is the acceptance probability of this stage.
pub fn feedforward_output(
    psi_prime: &PureState,
    ff: &FeedforwardConfig,
    trigger: &DetectorModel,
    herald: &DetectorModel,
) -> Result<DensityOperator> {
    let damp_h = damping_operator(ff, Polarization::H);
    let damp_v = damping_operator(ff, Polarization::V);
    let mut rho = DensityOperator::empty(psi_prime.caps());
    for group in conditional_groups(psi_prime) {
        let n0h = group.control_h();
        let n0v = group.control_v();
        let w_herald = herald.one_weight(group.herald_total());
        if w_herald == 0.0 {
            continue;
        }
        let w_h = trigger.one_weight(n0h) * trigger.zero_weight(n0v) * w_herald;
        let w_v = trigger.one_weight(n0v) * trigger.zero_weight(n0h) * w_herald;
        if w_h > 0.0 {
            let damped = damp_h.apply_to_state(&group.state).relabeled(clone_relabel)?;
            rho.add_pure_scaled(&damped, w_h);
        }
        if w_v > 0.0 {
            let damped = damp_v.apply_to_state(&group.state).relabeled(clone_relabel)?;
            rho.add_pure_scaled(&damped, w_v);
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn ket(pairs: impl IntoIterator<Item = (ModeLabel, u8)>) -> FockBasisState {
        FockBasisState::from_occupations(pairs)
    }

    #[test]
    fn order_two_source_is_the_normalized_pair_term() {
        let cfg = SpdcConfig::new(0.01, 0.7, 2).unwrap();
        let psi = spdc_state(&cfg, cfg.recommended_caps()).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < EPS);
        let k1 = ket([
            (SpatialMode::Control.h(), 1),
            (SpatialMode::Input1.v(), 1),
            (SpatialMode::Herald.h(), 1),
            (SpatialMode::Input2.h(), 1),
        ]);
        let k2 = ket([
            (SpatialMode::Control.v(), 1),
            (SpatialMode::Input1.h(), 1),
            (SpatialMode::Herald.h(), 1),
            (SpatialMode::Input2.h(), 1),
        ]);
        let a1 = psi.amplitude(&k1);
        let a2 = psi.amplitude(&k2);
        assert!((a1.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < EPS);
        assert!((a1 - a2).norm() < EPS);
        assert_eq!(psi.amplitudes().count(), 2);
    }

    #[test]
    fn third_order_amplitude_ratios() {
        let cfg = SpdcConfig::new(0.01, 0.0, 3).unwrap();
        let psi = spdc_state(&cfg, cfg.recommended_caps()).unwrap();
        let pair = psi.amplitude(&ket([
            (SpatialMode::Control.h(), 1),
            (SpatialMode::Input1.v(), 1),
            (SpatialMode::Herald.h(), 1),
            (SpatialMode::Input2.h(), 1),
        ]));
        let double = psi.amplitude(&ket([
            (SpatialMode::Control.h(), 1),
            (SpatialMode::Input1.v(), 1),
            (SpatialMode::Herald.h(), 2),
            (SpatialMode::Input2.h(), 2),
        ]));
        let corr = psi.amplitude(&ket([
            (SpatialMode::Control.h(), 1),
            (SpatialMode::Control.v(), 1),
            (SpatialMode::Herald.h(), 1),
            (SpatialMode::Input2.h(), 1),
        ]));
        // Doubled-occupation term scales by one extra gamma; correction kets
        // carry gamma/2 relative to the pair term's 1/sqrt(2).
        assert!((double.norm() / pair.norm() - 0.1).abs() < 1e-10);
        assert!((corr.norm() / pair.norm() - 0.1 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert_eq!(psi.amplitudes().count(), 8);
    }

    #[test]
    fn pump_phase_only_rotates_amplitudes() {
        let caps = Caps::new(3, 6);
        let flat = spdc_state(&SpdcConfig::new(0.04, 0.0, 3).unwrap(), caps).unwrap();
        let turned = spdc_state(&SpdcConfig::new(0.04, 1.3, 3).unwrap(), caps).unwrap();
        for (ket, amp) in flat.amplitudes() {
            assert!((turned.amplitude(ket).norm() - amp.norm()).abs() < EPS);
        }
    }

    #[test]
    fn source_config_validation() {
        assert!(SpdcConfig::new(0.2, 0.0, 2).is_err());
        assert!(SpdcConfig::new(0.0, 0.0, 2).is_err());
        assert!(SpdcConfig::new(0.01, 0.0, 4).is_err());
        let cfg = SpdcConfig::new(0.01, 0.0, 3).unwrap();
        assert!((cfg.gamma() - 0.1).abs() < EPS);
    }

    #[test]
    fn input_preparation_on_a_bare_two_photon_state() {
        let caps = Caps::new(2, 6);
        let two_h = PureState::vacuum(caps)
            .create(SpatialMode::Input2.h())
            .unwrap()
            .create(SpatialMode::Input2.h())
            .unwrap()
            .normalized()
            .unwrap();
        let q = InputQubit::new(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let out = prepare_input(&two_h, &q).unwrap();
        let a = q.alpha();
        let b = q.beta();
        let hh = out.amplitude(&ket([(SpatialMode::Input2.h(), 2)]));
        let hv = out.amplitude(&ket([
            (SpatialMode::Input2.h(), 1),
            (SpatialMode::Input2.v(), 1),
        ]));
        let vv = out.amplitude(&ket([(SpatialMode::Input2.v(), 2)]));
        assert!((hh - Complex64::new(a * a, 0.0)).norm() < EPS);
        assert!((hv - b * a * 2f64.sqrt()).norm() < EPS);
        assert!((vv - b * b).norm() < EPS);
        assert!((out.norm_sqr() - 1.0).abs() < EPS);
    }

    #[test]
    fn input_preparation_at_pole_is_identity() {
        let cfg = SpdcConfig::new(0.01, 0.0, 3).unwrap();
        let psi = spdc_state(&cfg, cfg.recommended_caps()).unwrap();
        let out = prepare_input(&psi, &InputQubit::polar(0.0).unwrap()).unwrap();
        for (ket, amp) in psi.amplitudes() {
            assert!((out.amplitude(ket) - amp).norm() < EPS);
        }
    }

    #[test]
    fn splitter_working_point_identities() {
        let cfg = PdbsConfig::optimal();
        let third = 1.0 / 3f64.sqrt();
        assert!((1.0 - 2.0 * cfg.mu() - third).abs() < EPS);
        assert!((2.0 * cfg.nu() - 1.0 - third).abs() < EPS);
        assert!(((2.0 * cfg.mu() * cfg.nu()).sqrt() - third).abs() < EPS);
    }

    #[test]
    fn balanced_splitter_cancels_coincident_pair() {
        let caps = Caps::new(2, 6);
        let pair = PureState::vacuum(caps)
            .create(SpatialMode::Input1.h())
            .unwrap()
            .create(SpatialMode::Input2.h())
            .unwrap();
        let t = pdbs(&PdbsConfig::new(0.5, 0.5).unwrap()).unwrap();
        let out = pair.apply_mode_transform(&t).unwrap();
        let split = ket([(SpatialMode::Mixed1.h(), 1), (SpatialMode::Mixed2.h(), 1)]);
        assert_eq!(out.amplitude(&split), Complex64::new(0.0, 0.0));
        let bunched = out.amplitude(&ket([(SpatialMode::Mixed1.h(), 2)]));
        assert!((bunched.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < EPS);
    }

    #[test]
    fn damping_factors() {
        let ff = FeedforwardConfig::new(0.5).unwrap();
        let d_h = damping_operator(&ff, Polarization::H);
        let d_v = damping_operator(&ff, Polarization::V);
        let two_h = ket([(SpatialMode::Mixed1.h(), 1), (SpatialMode::Mixed2.h(), 1)]);
        let two_v = ket([(SpatialMode::Mixed2.v(), 2)]);
        assert!((d_h.factor(&two_h) - Complex64::new(0.25, 0.0)).norm() < EPS);
        assert!((d_v.factor(&two_v) - Complex64::new(0.25, 0.0)).norm() < EPS);
        let one_v = ket([(SpatialMode::Mixed1.v(), 1)]);
        assert!((d_v.factor(&one_v) - Complex64::new(-0.5, 0.0)).norm() < EPS);
        assert!((d_h.factor(&two_v) - Complex64::new(1.0, 0.0)).norm() < EPS);
    }

    #[test]
    fn attenuation_reference_points() {
        let optimal = PdbsConfig::optimal();
        let universal = CloneParameter::universal();
        let k = kappa_for(&universal, &optimal).unwrap();
        assert!((k - universal.lambda_bar() / universal.lambda()).abs() < EPS);

        let trivial = CloneParameter::new(1.0).unwrap();
        assert_eq!(kappa_for(&trivial, &optimal).unwrap(), 0.0);

        let equatorial = CloneParameter::equatorial();
        assert!((kappa_for(&equatorial, &optimal).unwrap() - 1.0).abs() < EPS);

        let narrow = PdbsConfig::new(0.0045, 0.9955).unwrap();
        let strong = CloneParameter::new(0.99).unwrap();
        match kappa_for(&strong, &narrow) {
            Err(Error::InfeasibleConfiguration { kappa }) => assert!(kappa.abs() > 1.0),
            other => panic!("expected infeasible, got {other:?}"),
        }
        let (clamped, flagged) = kappa_clamped(&strong, &narrow);
        assert!(flagged);
        assert!((clamped.abs() - 1.0).abs() < EPS);

        let blocked = PdbsConfig::new(0.0, 1.0).unwrap();
        assert!(matches!(
            kappa_for(&equatorial, &blocked),
            Err(Error::InfeasibleConfiguration { .. })
        ));
    }

    #[test]
    fn conditional_groups_partition_the_norm() {
        let cfg = SpdcConfig::new(0.01, 0.0, 3).unwrap();
        let caps = cfg.recommended_caps();
        let psi = spdc_state(&cfg, caps).unwrap();
        let psi = prepare_input(&psi, &InputQubit::new(1.1, 0.4).unwrap()).unwrap();
        let psi = psi
            .apply_mode_transform(&pdbs(&PdbsConfig::optimal()).unwrap())
            .unwrap();
        let groups = conditional_groups(&psi);
        let total: f64 = groups.iter().map(|g| g.state.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for g in &groups {
            assert_eq!(g.trigger.restricted_to(&[SpatialMode::Mixed1, SpatialMode::Mixed2]),
                FockBasisState::vacuum());
        }
    }

    #[test]
    fn feedforward_output_is_a_clone_rail_operator() {
        let cfg = SpdcConfig::new(0.01, 0.0, 2).unwrap();
        let caps = cfg.recommended_caps();
        let psi = spdc_state(&cfg, caps).unwrap();
        let psi = prepare_input(&psi, &InputQubit::new(0.8, 0.0).unwrap()).unwrap();
        let pdbs_cfg = PdbsConfig::optimal();
        let psi = psi.apply_mode_transform(&pdbs(&pdbs_cfg).unwrap()).unwrap();
        let p = CloneParameter::equatorial();
        let ff = FeedforwardConfig::new(kappa_for(&p, &pdbs_cfg).unwrap()).unwrap();
        let perfect = DetectorModel::perfect();
        let rho = feedforward_output(&psi, &ff, &perfect, &perfect).unwrap();

        let trace = rho.trace();
        assert!(trace > 0.0 && trace < 1.0, "trace {trace}");
        assert!(rho.is_hermitian_within(1e-12));
        assert!(rho.smallest_eigenvalue() > -1e-10);
        for (ket, _) in rho.diagonal() {
            for (label, _) in ket.occupations() {
                assert!(
                    matches!(label.spatial, SpatialMode::Clone1 | SpatialMode::Clone2),
                    "unexpected rail {label}"
                );
            }
        }
    }
}
