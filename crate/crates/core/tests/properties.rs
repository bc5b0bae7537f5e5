//! Randomized invariants of the engine: norm preservation, POVM
//! completeness, physicality of the output state, and the symmetries
//! the closed forms promise.

use mpcc_core::analytic::{self, CloneParameter, InputQubit};
use mpcc_core::detectors::{onoff_povm, spc_povm, DetectorModel};
use mpcc_core::experiments::{run_point, ClonerKind, PipelineConfig};
use mpcc_core::fock::{Caps, FockBasisState, PureState, SpatialMode};
use mpcc_core::optics::{
    self, FeedforwardConfig, PdbsConfig, SpdcConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn adaptive_pipeline(mu: f64) -> PipelineConfig {
    PipelineConfig {
        spdc: SpdcConfig::new(0.01, 0.3, 2).unwrap(),
        pdbs: PdbsConfig::new(mu, 1.0 - mu).unwrap(),
        cloner: ClonerKind::MirrorAdaptive,
        detector: DetectorModel::perfect(),
    }
}

/// Dual-rail kets with photons only on the splitter's input rails.
fn splitter_input_basis() -> Vec<FockBasisState> {
    let labels = [
        SpatialMode::Input1.h(),
        SpatialMode::Input1.v(),
        SpatialMode::Input2.h(),
        SpatialMode::Input2.v(),
    ];
    let mut kets: Vec<FockBasisState> =
        labels.iter().map(|&l| FockBasisState::from_occupations([(l, 1)])).collect();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i..] {
            let n = if a == b { vec![(a, 2)] } else { vec![(a, 1), (b, 1)] };
            kets.push(FockBasisState::from_occupations(n));
        }
    }
    kets
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splitter_preserves_norm(
        mu in 0.0f64..=1.0,
        nu in 0.0f64..=1.0,
        re in prop::collection::vec(-1.0f64..1.0, 14),
        im in prop::collection::vec(-1.0f64..1.0, 14),
    ) {
        let kets = splitter_input_basis();
        let amps = kets
            .into_iter()
            .zip(re.iter().zip(&im))
            .map(|(k, (&r, &i))| (k, Complex64::new(r, i)));
        let state = PureState::from_amplitudes(amps, Caps::new(2, 6)).unwrap();
        prop_assume!(state.norm_sqr() > 1e-6);
        let state = state.normalized().unwrap();
        let splitter = optics::pdbs(&PdbsConfig::new(mu, nu).unwrap()).unwrap();
        let out = state.apply_mode_transform(&splitter).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn povm_elements_sum_to_identity(eta in 0.0f64..=1.0, zeta in 0.0f64..0.5) {
        let counter = DetectorModel::single_photon_counter(eta, zeta).unwrap();
        let onoff = DetectorModel::on_off(eta, zeta).unwrap();
        for povm in [spc_povm(&counter, 6).unwrap(), onoff_povm(&onoff, 6).unwrap()] {
            for m in 0..=6usize {
                let total: f64 = povm.iter().map(|e| e.weights[m]).sum();
                prop_assert!((total - 1.0).abs() < 1e-12, "m = {m}: sum {total}");
            }
        }
    }

    #[test]
    fn conditioned_output_is_a_physical_state(
        theta in 0.05f64..3.09,
        delta in 0.0f64..(2.0 * PI),
        mu in 0.25f64..0.75,
    ) {
        let cfg = adaptive_pipeline(mu);
        let q = InputQubit::new(theta, delta).unwrap();
        let p = cfg.cloner.clone_parameter(theta).unwrap();
        let (kappa, _) = optics::kappa_clamped(&p, &cfg.pdbs);
        let source = optics::spdc_state(&cfg.spdc, cfg.caps()).unwrap();
        let prepared = optics::prepare_input(&source, &q).unwrap();
        let splitter = optics::pdbs(&cfg.pdbs).unwrap();
        let mixed = prepared.apply_mode_transform(&splitter).unwrap();
        let rho = optics::feedforward_output(
            &mixed,
            &FeedforwardConfig::new(kappa).unwrap(),
            &cfg.detector,
            &cfg.detector,
        )
        .unwrap();
        prop_assert!(rho.max_hermiticity_violation() < 1e-10);
        prop_assert!(rho.smallest_eigenvalue() > -1e-10);
        let trace = rho.trace();
        prop_assert!(trace.is_finite() && trace >= 0.0 && trace <= 1.0 + 1e-12);
    }

    #[test]
    fn fidelity_is_independent_of_azimuth(
        theta in 0.1f64..3.0,
        d1 in 0.0f64..(2.0 * PI),
        d2 in 0.0f64..(2.0 * PI),
    ) {
        let cfg = adaptive_pipeline(optics::mu_optimal());
        let a = run_point(&cfg, &InputQubit::new(theta, d1).unwrap()).unwrap();
        let b = run_point(&cfg, &InputQubit::new(theta, d2).unwrap()).unwrap();
        prop_assert!((a.f1 - b.f1).abs() < 1e-9);
        prop_assert!((a.f2 - b.f2).abs() < 1e-9);
        prop_assert!((a.p_success - b.p_success).abs() < 1e-9);
    }

    #[test]
    fn fidelity_is_mirror_symmetric(theta in 0.05f64..1.55) {
        let cfg = adaptive_pipeline(optics::mu_optimal());
        let upper = run_point(&cfg, &InputQubit::new(theta, 0.9).unwrap()).unwrap();
        let lower = run_point(&cfg, &InputQubit::new(PI - theta, 0.9).unwrap()).unwrap();
        prop_assert!((upper.f_avg - lower.f_avg).abs() < 1e-9);
        prop_assert!((upper.p_success - lower.p_success).abs() < 1e-9);
    }

    #[test]
    fn symmetric_splitter_gives_equal_clones(
        mu in 0.25f64..0.75,
        theta in 0.05f64..3.09,
    ) {
        let cfg = adaptive_pipeline(mu);
        let p = cfg.cloner.clone_parameter(theta).unwrap();
        prop_assume!(optics::kappa_for(&p, &cfg.pdbs).is_ok());
        let report = run_point(&cfg, &InputQubit::new(theta, 1.3).unwrap()).unwrap();
        prop_assert!((report.f1 - report.f2).abs() < 1e-6);
    }

    #[test]
    fn universal_fidelity_is_flat(theta in 0.0f64..=PI) {
        let f = analytic::single_copy_fidelity(theta, &CloneParameter::universal());
        prop_assert!((f - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_stay_in_physical_ranges(
        theta in 0.0f64..=PI,
        lambda in FRAC_1_SQRT_2..=1.0,
    ) {
        let p = CloneParameter::new(lambda).unwrap();
        let f = analytic::single_copy_fidelity(theta, &p);
        prop_assert!((0.5..=1.0 + 1e-12).contains(&f));
        let s = analytic::success_probability_ideal(&p);
        prop_assert!((1.0 / 6.0 - 1e-12..=1.0 / 3.0 + 1e-12).contains(&s));
    }
}
