//! Closed-form layer: the cloning isometry, its fidelity laws, and the
//! input-distribution machinery (Legendre moments, sphere averages).
//!
//! Everything here is an independent oracle for the photonic simulation in
//! [`crate::optics`]: no Fock-space code is used.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Amplitude pair (Λ, Λ̄) of the cloning isometry, Λ² + Λ̄² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneParameter {
    lambda: f64,
    lambda_bar: f64,
}

impl CloneParameter {
    /// Accepts Λ in [1/√2, 1] (up to 1e-12 slack for values produced by
    /// upstream arithmetic).
    pub fn new(lambda: f64) -> Result<Self> {
        if !(FRAC_1_SQRT_2 - 1e-12..=1.0 + 1e-12).contains(&lambda) {
            return Err(Error::Domain {
                param: "lambda",
                value: lambda,
                allowed: "[1/sqrt(2), 1]",
            });
        }
        let lambda = lambda.clamp(FRAC_1_SQRT_2, 1.0);
        Ok(CloneParameter {
            lambda,
            lambda_bar: (1.0 - lambda * lambda).max(0.0).sqrt(),
        })
    }

    /// Λ = √(2/3): the symmetric universal cloner.
    pub fn universal() -> Self {
        CloneParameter::new((2.0f64 / 3.0).sqrt()).expect("in range")
    }

    /// Λ = 1/√2: optimal for equatorial inputs.
    pub fn equatorial() -> Self {
        CloneParameter::new(FRAC_1_SQRT_2).expect("in range")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_bar(&self) -> f64 {
        self.lambda_bar
    }
}

/// Bloch-sphere input qubit alpha|0> + beta|1>, alpha = cos(theta/2),
/// beta = e^{i delta} sin(theta/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputQubit {
    theta: f64,
    delta: f64,
}

impl InputQubit {
    pub fn new(theta: f64, delta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain {
                param: "theta",
                value: theta,
                allowed: "[0, pi]",
            });
        }
        Ok(InputQubit { theta, delta: delta.rem_euclid(2.0 * PI) })
    }

    pub fn polar(theta: f64) -> Result<Self> {
        InputQubit::new(theta, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar((self.theta / 2.0).sin(), self.delta)
    }
}

/// Axially symmetric input-state distribution on the Bloch sphere.
///
/// `Custom` densities are per solid angle, as a function of theta, and are
/// assumed normalized: 2 pi * integral of g over d(cos theta) = 1.
#[derive(Clone)]
pub enum QubitDistribution {
    Universal,
    PhaseCovariant,
    /// Equal-weight pair of circles at theta and pi - theta.
    Mirror(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for QubitDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QubitDistribution::Universal => f.write_str("Universal"),
            QubitDistribution::PhaseCovariant => f.write_str("PhaseCovariant"),
            QubitDistribution::Mirror(t) => write!(f, "Mirror({t})"),
            QubitDistribution::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// P(θ) = 2 − 4cos²θ + 3cos⁴θ. Range [2/3, 2] over [0, π].
pub fn p_poly(theta: f64) -> f64 {
    let c2 = theta.cos().powi(2);
    2.0 - 4.0 * c2 + 3.0 * c2 * c2
}

/// Optimal Λ for the mirror pair {θ, π−θ}: √(1/2 + cos²θ / (2√P(θ))).
pub fn lambda_from_theta(theta: f64) -> CloneParameter {
    let c2 = theta.cos().powi(2);
    let lambda = (0.5 + c2 / (2.0 * p_poly(theta).sqrt())).sqrt();
    CloneParameter::new(lambda).expect("formula stays in [1/sqrt2, 1]")
}

/// Optimal Λ from the second Legendre moment of the input distribution.
/// Valid for a₂ in [−1/2, 1]; outside, the radicand goes negative.
pub fn lambda_from_a2(a2: f64) -> Result<CloneParameter> {
    if !(-0.5..=1.0).contains(&a2) {
        return Err(Error::Domain {
            param: "a2",
            value: a2,
            allowed: "[-1/2, 1]",
        });
    }
    let denom = 3.0 * (3.0 + 4.0 * a2 * a2 - 4.0 * a2);
    let radicand = (1.0 - 8.0 * (1.0 - a2) * (1.0 - a2) / denom).max(0.0);
    CloneParameter::new((0.5 + 0.5 * radicand.sqrt()).sqrt())
}

/// Legendre moments a_n = <P_n(cos theta)> of the distribution, n = 0..=n_max.
///
/// Point-supported distributions are evaluated analytically; `Custom`
/// densities are integrated adaptively to 1e-10 absolute.
pub fn legendre_coefficients(dist: &QubitDistribution, n_max: usize) -> Result<Vec<f64>> {
    if n_max < 2 {
        return Err(Error::Domain {
            param: "n_max",
            value: n_max as f64,
            allowed: ">= 2",
        });
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let a_n = match dist {
            QubitDistribution::Universal => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            QubitDistribution::PhaseCovariant => quad::legendre_p(n, 0.0),
            QubitDistribution::Mirror(theta) => {
                let c = theta.cos();
                0.5 * (quad::legendre_p(n, c) + quad::legendre_p(n, -c))
            }
            QubitDistribution::Custom(g) => {
                let g = Arc::clone(g);
                2.0 * PI
                    * quad::adaptive(
                        move |u: f64| g(u.clamp(-1.0, 1.0).acos()) * quad::legendre_p(n, u),
                        -1.0,
                        1.0,
                        1e-10,
                    )?
            }
        };
        out.push(a_n);
    }
    Ok(out)
}

/// Pure state of (clone 1, clone 2, ancilla), amplitudes indexed by
/// q1*4 + q2*2 + anc in the computational basis.
#[derive(Debug, Clone, Copy)]
pub struct ThreeQubitState {
    amps: [Complex64; 8],
}

impl ThreeQubitState {
    pub fn amplitudes(&self) -> &[Complex64; 8] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Reduced 2x2 density matrix of one subsystem (0 = clone 1,
    /// 1 = clone 2, 2 = ancilla).
    pub fn single_qubit_density(&self, which: usize) -> [[Complex64; 2]; 2] {
        assert!(which < 3, "subsystem index out of range");
        let shift = 2 - which;
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, ai) in self.amps.iter().enumerate() {
            for (j, aj) in self.amps.iter().enumerate() {
                let (bi, bj) = ((i >> shift) & 1, (j >> shift) & 1);
                // Environment = the remaining two bits; must match.
                if i & !(1 << shift) == j & !(1 << shift) {
                    rho[bi][bj] += ai * aj.conj();
                }
            }
        }
        rho
    }

    /// <psi_in| rho_which |psi_in>.
    pub fn clone_fidelity(&self, which: usize, q: &InputQubit) -> f64 {
        let rho = self.single_qubit_density(which);
        let a = Complex64::new(q.alpha(), 0.0);
        let b = q.beta();
        let f = a.conj() * rho[0][0] * a
            + a.conj() * rho[0][1] * b
            + b.conj() * rho[1][0] * a
            + b.conj() * rho[1][1] * b;
        f.re
    }
}

/// Applies the cloning isometry to the input qubit:
/// |0> -> Λ|00>|0> + Λ̄|ψ+>|1>, |1> -> Λ|11>|1> + Λ̄|ψ+>|0>.
pub fn ideal_clone(q: &InputQubit, p: &CloneParameter) -> ThreeQubitState {
    let mut amps = [Complex64::new(0.0, 0.0); 8];
    let l = Complex64::new(p.lambda(), 0.0);
    let lb = Complex64::new(p.lambda_bar() * FRAC_1_SQRT_2, 0.0);
    let a = Complex64::new(q.alpha(), 0.0);
    let b = q.beta();
    amps[0b000] += a * l;
    amps[0b011] += a * lb;
    amps[0b101] += a * lb;
    amps[0b111] += b * l;
    amps[0b010] += b * lb;
    amps[0b100] += b * lb;
    ThreeQubitState { amps }
}

/// Single-copy fidelity F = (1+Λ²)/2 − (Λ/2)(Λ − Λ̄√2) sin²θ. Both clones
/// share this value.
pub fn single_copy_fidelity(theta: f64, p: &CloneParameter) -> f64 {
    let l = p.lambda();
    let lb = p.lambda_bar();
    let s2 = theta.sin().powi(2);
    (1.0 + l * l) / 2.0 - 0.5 * l * (l - lb * 2.0f64.sqrt()) * s2
}

/// Fidelity averaged over the input distribution, with Λ chosen per θ by
/// `lambda_rule`. Quadrature (where needed) is adaptive to 1e-6 absolute.
pub fn average_fidelity(
    dist: &QubitDistribution,
    lambda_rule: impl Fn(f64) -> CloneParameter,
) -> Result<f64> {
    match dist {
        QubitDistribution::Universal => quad::adaptive(
            |u: f64| {
                let theta = u.clamp(-1.0, 1.0).acos();
                0.5 * single_copy_fidelity(theta, &lambda_rule(theta))
            },
            -1.0,
            1.0,
            1e-6,
        ),
        QubitDistribution::PhaseCovariant => {
            let theta = PI / 2.0;
            Ok(single_copy_fidelity(theta, &lambda_rule(theta)))
        }
        QubitDistribution::Mirror(theta) => {
            let t = *theta;
            let f1 = single_copy_fidelity(t, &lambda_rule(t));
            let f2 = single_copy_fidelity(PI - t, &lambda_rule(PI - t));
            Ok(0.5 * (f1 + f2))
        }
        QubitDistribution::Custom(g) => {
            let g = Arc::clone(g);
            quad::adaptive(
                move |u: f64| {
                    let theta = u.clamp(-1.0, 1.0).acos();
                    2.0 * PI * g(theta) * single_copy_fidelity(theta, &lambda_rule(theta))
                },
                -1.0,
                1.0,
                1e-6,
            )
        }
    }
}

/// Post-selection probability of the ideal machine, 1/(6Λ²).
pub fn success_probability_ideal(p: &CloneParameter) -> f64 {
    1.0 / (6.0 * p.lambda() * p.lambda())
}

/// Figures of merit of one cloning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub f1: f64,
    pub f2: f64,
    pub f_avg: f64,
    pub p_success: f64,
}

impl FidelityReport {
    pub fn new(f1: f64, f2: f64, p_success: f64) -> Self {
        FidelityReport { f1, f2, f_avg: 0.5 * (f1 + f2), p_success }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn p_poly_reference_points() {
        assert!((p_poly(0.0) - 1.0).abs() < 1e-14);
        assert!((p_poly(PI / 2.0) - 2.0).abs() < 1e-14);
        assert!((p_poly(PI / 3.0) - 1.1875).abs() < 1e-14);
    }

    #[test]
    fn lambda_from_theta_reference_points() {
        assert!((lambda_from_theta(PI / 2.0).lambda() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((lambda_from_theta(0.0).lambda() - 1.0).abs() < 1e-14);
        assert!((lambda_from_theta(PI / 3.0).lambda() - 0.78400).abs() < 1e-4);
    }

    #[test]
    fn lambda_from_theta_is_mirror_symmetric() {
        for i in 0..=40 {
            let theta = PI * i as f64 / 40.0;
            let a = lambda_from_theta(theta).lambda();
            let b = lambda_from_theta(PI - theta).lambda();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_from_a2_endpoints() {
        assert!((lambda_from_a2(0.0).unwrap().lambda() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((lambda_from_a2(-0.5).unwrap().lambda() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((lambda_from_a2(1.0).unwrap().lambda() - 1.0).abs() < 1e-12);
        assert!(matches!(lambda_from_a2(-0.51), Err(Error::Domain { .. })));
        assert!(matches!(lambda_from_a2(1.01), Err(Error::Domain { .. })));
    }

    #[test]
    fn lambda_routes_agree_on_theta_grid() {
        // a2 of the mirror pair at theta is P2(cos theta).
        for i in 0..50 {
            let theta = PI * (i as f64 + 0.5) / 50.0;
            let a2 = quad::legendre_p(2, theta.cos());
            let via_a2 = lambda_from_a2(a2).unwrap().lambda();
            let via_theta = lambda_from_theta(theta).lambda();
            assert!(
                (via_a2 - via_theta).abs() < 1e-9,
                "theta={theta}: {via_a2} vs {via_theta}"
            );
        }
    }

    #[test]
    fn legendre_coefficients_of_point_distributions() {
        let u = legendre_coefficients(&QubitDistribution::Universal, 4).unwrap();
        assert_eq!(u[0], 1.0);
        assert_eq!(u[1], 0.0);
        assert_eq!(u[2], 0.0);

        let pc = legendre_coefficients(&QubitDistribution::PhaseCovariant, 2).unwrap();
        assert!((pc[2] + 0.5).abs() < 1e-14);

        let m = legendre_coefficients(&QubitDistribution::Mirror(PI / 3.0), 2).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-14);
        assert!(m[1].abs() < 1e-14, "mirror distributions have a1 = 0");
        assert!((m[2] + 0.125).abs() < 1e-14);
    }

    #[test]
    fn legendre_coefficients_of_uniform_custom_density() {
        let dist = QubitDistribution::Custom(Arc::new(|_theta| 1.0 / (4.0 * PI)));
        let a = legendre_coefficients(&dist, 3).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-9);
        assert!(a[1].abs() < 1e-9);
        assert!(a[2].abs() < 1e-9);
    }

    #[test]
    fn legendre_coefficients_rejects_small_n_max() {
        assert!(matches!(
            legendre_coefficients(&QubitDistribution::Universal, 1),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn ideal_clone_of_pole_state() {
        let p = CloneParameter::new(0.8).unwrap();
        let q = InputQubit::polar(0.0).unwrap();
        let s = ideal_clone(&q, &p);
        let lb = p.lambda_bar() * FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0b000].re - 0.8).abs() < 1e-14);
        assert!((s.amplitudes()[0b011].re - lb).abs() < 1e-14);
        assert!((s.amplitudes()[0b101].re - lb).abs() < 1e-14);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_clone_is_an_isometry() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let q = InputQubit::new(
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
            )
            .unwrap();
            let p = CloneParameter::new(rng.gen_range(FRAC_1_SQRT_2..1.0)).unwrap();
            let s = ideal_clone(&q, &p);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clone_fidelity_matches_closed_form_for_random_azimuth() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let theta = rng.gen_range(0.0..PI);
            let delta = rng.gen_range(0.0..2.0 * PI);
            let p = CloneParameter::new(rng.gen_range(FRAC_1_SQRT_2..1.0)).unwrap();
            let q = InputQubit::new(theta, delta).unwrap();
            let s = ideal_clone(&q, &p);
            let want = single_copy_fidelity(theta, &p);
            for which in 0..2 {
                let got = s.clone_fidelity(which, &q);
                assert!(
                    (got - want).abs() < 1e-10,
                    "theta={theta} delta={delta} clone {which}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn equatorial_fidelity_value() {
        let f = single_copy_fidelity(PI / 2.0, &CloneParameter::equatorial());
        assert!((f - 0.8535533905932738).abs() < 1e-12);
    }

    #[test]
    fn universal_parameter_gives_flat_fidelity() {
        let p = CloneParameter::universal();
        for i in 0..=20 {
            let theta = PI * i as f64 / 20.0;
            assert!((single_copy_fidelity(theta, &p) - 5.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn headline_averages() {
        let uc = average_fidelity(&QubitDistribution::Universal, |_| {
            CloneParameter::universal()
        })
        .unwrap();
        assert!((uc - 5.0 / 6.0).abs() < 1e-9);

        let pcc = average_fidelity(&QubitDistribution::PhaseCovariant, |_| {
            CloneParameter::equatorial()
        })
        .unwrap();
        assert!((pcc - 0.8535533905932738).abs() < 1e-12);

        let adaptive =
            average_fidelity(&QubitDistribution::Universal, lambda_from_theta).unwrap();
        assert!(
            (adaptive - 0.8594442723176612).abs() < 1e-6,
            "got {adaptive}"
        );
    }

    #[test]
    fn mirror_average_equals_point_fidelity() {
        let theta = 1.1;
        let f = average_fidelity(&QubitDistribution::Mirror(theta), lambda_from_theta).unwrap();
        let direct = single_copy_fidelity(theta, &lambda_from_theta(theta));
        assert!((f - direct).abs() < 1e-12);
    }

    #[test]
    fn custom_uniform_density_matches_builtin_universal() {
        let dist = QubitDistribution::Custom(Arc::new(|_theta| 1.0 / (4.0 * PI)));
        let a = average_fidelity(&dist, lambda_from_theta).unwrap();
        let b = average_fidelity(&QubitDistribution::Universal, lambda_from_theta).unwrap();
        assert!((a - b).abs() < 2e-6);
    }

    #[test]
    fn success_probability_reference_points() {
        assert!((success_probability_ideal(&CloneParameter::new(1.0).unwrap()) - 1.0 / 6.0)
            .abs()
            < 1e-14);
        assert!(
            (success_probability_ideal(&CloneParameter::equatorial()) - 1.0 / 3.0).abs() < 1e-14
        );
        assert!(
            (success_probability_ideal(&CloneParameter::universal()) - 0.25).abs() < 1e-14
        );
    }

    #[test]
    fn clone_parameter_rejects_out_of_range() {
        assert!(matches!(CloneParameter::new(0.5), Err(Error::Domain { .. })));
        assert!(matches!(CloneParameter::new(1.2), Err(Error::Domain { .. })));
        assert!(matches!(InputQubit::new(-0.1, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(InputQubit::new(3.5, 0.0), Err(Error::Domain { .. })));
    }
}
