#![allow(clippy::needless_range_loop)]

//! Plant-and-recover: fixtures built so the full h-vector condition has an
//! exact polynomial solution; the least-squares probe must find it.

use hmx_core::expr::Poly;
use hmx_core::hvector::{search_h_vector, SearchSample};
use hmx_core::tensor::{t2, t3};
use hmx_core::verify::{mock_fixture_explicit, FixtureParams};

/// Builds exact-condition fixtures at a row of base points with
/// `m(x) = (0, c₂(x), c₃(x))` for planted degree-1 polynomials, so the
/// condition `L C^h_ij c_h = ρ h_ij` is solved exactly by `c = m(x)` at
/// `ρ = ρ_fix`.
fn planted_samples(rho_fix: f64) -> (Vec<SearchSample>, Vec<Poly>) {
    let c2 = Poly::constant(0.3).plus(Poly::linear(0, 0.1));
    let c3 = Poly::constant(0.4).plus(Poly::linear(1, -0.05));
    let g = t2(3, |i, j| if i == j { 1.0 } else { 0.0 });
    let mut samples = Vec::new();
    for k in 0..12 {
        // generic scatter (not collinear, so affine fields are pinned)
        let t = k as f64;
        let x = vec![
            (0.7 * t).sin() * 0.8,
            (1.3 * t + 0.4).cos() * 0.6,
            (0.4 * t * t + 0.1).sin() * 0.5,
        ];
        let m = [0.0, c2.eval(&x), c3.eval(&x)];
        let params = FixtureParams {
            n: 3,
            big_l: 2.0,
            rho: rho_fix,
            tau: 2.0,
            seed: 0,
        };
        let fix = mock_fixture_explicit(&params, g.clone(), &[2.0, 0.0, 0.0], &m).unwrap();
        let cartan_mixed = t3(3, |i, j, kk| {
            (0..3)
                .map(|r| fix.g_inv.get(i, r) * fix.cartan.get(r, j, kk))
                .sum()
        });
        samples.push(SearchSample {
            x,
            big_l: fix.big_l,
            h: fix.h.clone(),
            cartan_mixed,
        });
    }
    (samples, vec![Poly::zero(), c2, c3])
}

#[test]
fn search_recovers_the_planted_field() {
    let rho_fix = 0.1;
    let (samples, planted) = planted_samples(rho_fix);
    // single-point grid at the planted scalar: coefficients must come back
    let out = search_h_vector(&samples, 1, &[rho_fix]).unwrap();
    assert!(out.best_residual < 1e-8, "residual {}", out.best_residual);
    assert_eq!(out.best_rho0, rho_fix);
    let probes = [
        vec![0.0, 0.0, 0.0],
        vec![0.7, -0.4, 0.3],
        vec![-0.5, 0.9, -0.1],
    ];
    for x in &probes {
        for i in 0..3 {
            let got = out.best_field.c[i].eval(x);
            let want = planted[i].eval(x);
            assert!(
                (got - want).abs() < 1e-8,
                "component {i} at {x:?}: got {got}, want {want}"
            );
        }
    }
}

#[test]
fn search_residual_scales_linearly_in_rho_on_planted_data() {
    // the ansatz is exact for every ρ₀ (c rescales), so the whole residual
    // curve sits at numerical zero
    let (samples, _) = planted_samples(0.1);
    let out = search_h_vector(&samples, 1, &[0.05, 0.1, 0.4]).unwrap();
    for (rho0, rms) in &out.residual_curve {
        assert!(*rms < 1e-8, "rms {rms} at ρ₀ = {rho0}");
    }
}
