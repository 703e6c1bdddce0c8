use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relequil::central_config::{align_to_axes, solve_cc, CentralConfiguration, SolverOptions};
use relequil::conserved::{evaluate_integrals, noether_drift, relative_equilibrium_phase_point};
use relequil::nbody::{MassSystem, PhasePoint};
use relequil::presets::Preset;
use relequil::rotating_frame::FrameMode;

#[test]
fn integrals_drift_below_1e_8_over_unit_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [3, 4] {
        let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        let sys = MassSystem::new(&masses, 4).unwrap();
        // Bodies spread on a ring so no close approach happens within unit time.
        let q = DVector::from_fn(4 * n, |k, _| {
            let (i, a) = (k / 4, k % 4);
            let phase = std::f64::consts::TAU * i as f64 / n as f64;
            match a {
                0 => phase.cos(),
                1 => phase.sin(),
                _ => rng.random_range(-0.2..0.2),
            }
        });
        let p = DVector::from_fn(4 * n, |_, _| rng.random_range(-0.1..0.1));
        let x = PhasePoint::new(q, p).unwrap();
        let drift = noether_drift(&sys, &x, 1.0, 1e-4).unwrap();
        assert!(drift.max() < 1e-8, "n = {n}: {drift:?}");
    }
}

#[test]
fn relative_equilibrium_keeps_its_integrals() {
    let sys = MassSystem::equal(4, 4).unwrap();
    let cc = solve_cc(&sys, &Preset::Tetrahedron.seed(4).unwrap(), &SolverOptions::default()).unwrap();
    let cc = CentralConfiguration::from_configuration(&sys, &align_to_axes(&sys, &cc.q).unwrap(), 1e-9).unwrap();
    let x = relative_equilibrium_phase_point(&cc, FrameMode::Double4).unwrap();
    let drift = noether_drift(&sys, &x, 1.0, 1e-4).unwrap();
    assert!(drift.max() < 1e-8, "{drift:?}");
}

#[test]
fn zero_momentum_point_has_zero_angular_momenta() {
    let sys = MassSystem::equal(3, 4).unwrap();
    let q = Preset::Lagrange.seed(4).unwrap();
    let x = PhasePoint::new(q.clone(), DVector::zeros(12)).unwrap();
    let ints = evaluate_integrals(&sys, &x).unwrap();
    assert!(ints.angular.iter().all(|w| *w == 0.0));
    assert!((ints.energy + sys.potential(&q).unwrap()).abs() < 1e-15);
}
