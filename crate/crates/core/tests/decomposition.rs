use relequil::central_config::{align_to_axes, solve_cc, CentralConfiguration, Geometry, SolverOptions};
use relequil::nbody::MassSystem;
use relequil::presets::Preset;
use relequil::rotating_frame::{linearize, FrameMode};
use relequil::symplectic::decompose;

fn aligned(preset: Preset, masses: &[f64], d: usize) -> CentralConfiguration {
    let sys = MassSystem::new(masses, d).unwrap();
    let cc = solve_cc(&sys, &preset.seed(d).unwrap(), &SolverOptions::default()).unwrap();
    CentralConfiguration::from_configuration(&sys, &align_to_axes(&sys, &cc.q).unwrap(), 1e-9).unwrap()
}

fn modes(cc: &CentralConfiguration) -> Vec<FrameMode> {
    match (cc.dim(), cc.geometry) {
        (2, _) => vec![FrameMode::Planar2],
        (_, Geometry::SpatialNonplanar) => vec![FrameMode::Double4],
        _ => vec![FrameMode::Double4, FrameMode::Simple4],
    }
}

#[test]
fn every_block_is_invariant_for_every_preset_and_mode() {
    for preset in Preset::ALL {
        for d in [2, 4] {
            if d < preset.min_ambient() {
                continue;
            }
            let unequal: Vec<f64> = (1..=preset.bodies()).map(|i| i as f64).collect();
            for masses in [preset.equal_masses(), unequal] {
                let cc = aligned(preset, &masses, d);
                for mode in modes(&cc) {
                    let split = decompose(&linearize(&cc, mode).unwrap()).unwrap();
                    let c = &split.checks;
                    let tag = format!("{} d={d} {masses:?} {}", preset.name(), mode.as_str());
                    assert!(c.invariance.iter().all(|r| *r < 1e-12), "{tag}: {:?}", c.invariance);
                    assert!(c.a_orthogonality < 1e-10 && c.a_commutation < 1e-10, "{tag}");
                    assert!(c.spectrum_union_hausdorff < 1e-7, "{tag}: {}", c.spectrum_union_hausdorff);
                    assert_eq!(split.dim(), split.case.e3_dim(cc.n()), "{tag}");
                    assert!(c.e1_form_deviation < 1e-9 && c.e2_form_deviation < 1e-9, "{tag}");
                    let b3 = &split.b3;
                    assert!((b3 - b3.transpose()).amax() < 1e-12 * b3.amax().max(1.0), "{tag}");
                }
            }
        }
    }
}

#[test]
fn simple_mode_rejects_a_spatial_configuration() {
    let cc = aligned(Preset::Tetrahedron, &[1.0; 4], 4);
    let err = linearize(&cc, FrameMode::Simple4).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}
