use std::f64::consts::FRAC_PI_2;

use jjarray::code::build_code;
use jjarray::gates::{end_to_end_gate, CoefficientSource, GateRequest, TuningParams};
use jjarray::presets::Preset;
use jjarray::spectra::{HoleSpin, SolveOptions};
use jjarray::Error;

const PARAMS: TuningParams = TuningParams { r: 1.0, e_g: 4.0, delta_e: 0.04, t_tunnel: 0.1 };

#[test]
fn measured_charge_tunneling_flips_the_hole_spin() {
    let code = build_code(&Preset::Star.build()).unwrap();
    let flip = GateRequest::Rotation { hole: 0, theta: 0.0, phi: FRAC_PI_2, gamma: 0.0 };
    let out = end_to_end_gate(&code, &PARAMS, flip, CoefficientSource::Ed, &SolveOptions::default()).unwrap();
    let check = out.state_check.unwrap();
    assert_eq!(check.initial, vec![HoleSpin::Up]);
    assert_eq!(check.final_, vec![HoleSpin::Down]);
    assert!(check.overlap > 1.0 - 1e-9);
    assert_eq!(out.provenance.coefficients.len(), 1);
}

#[test]
fn formula_cnot_on_two_holes() {
    let code = build_code(&Preset::DoubleStar.build()).unwrap();
    let req = GateRequest::Cnot { control: 0, target: 1 };
    let out = end_to_end_gate(&code, &PARAMS, req, CoefficientSource::Formula, &SolveOptions::default()).unwrap();
    assert!(out.schedule.achieved_fidelity > 1.0 - 1e-9);
    assert!(out.schedule.steps.iter().all(|s| s.duration >= 0.0));
    assert_eq!(out.provenance.source, CoefficientSource::Formula);
}

#[test]
fn unknown_hole_is_an_index_error() {
    let code = build_code(&Preset::Star.build()).unwrap();
    let req = GateRequest::Rotation { hole: 3, theta: 0.1, phi: 0.0, gamma: 0.0 };
    let err = end_to_end_gate(&code, &PARAMS, req, CoefficientSource::Formula, &SolveOptions::default()).unwrap_err();
    assert!(matches!(err, Error::UnknownHole { hole: 3, count: 1 }));
}
