use proptest::prelude::*;

use softbec::spectral::luttinger_sy_levels_below;
use softbec::thermo::bose::{density_at_gap, single_level_chemical_potential, solve_ground_gap};
use softbec::thermo::critical::{critical_density_both, AnalyticLsIds};
use softbec::thermo::ids::analytic_ids_ls;
use softbec::thermo::{empirical_ids, ThermoState};
use softbec::{clipped_gaps, sample_configuration, Spectrum};

#[test]
fn ensemble_ids_matches_closed_form() {
    let l = 2000.0;
    let energies = [0.2, 0.5, 1.0, 2.0];
    let spectra: Vec<Spectrum> = (0..200)
        .map(|s| {
            let c = sample_configuration(1.0, l, s).unwrap();
            luttinger_sy_levels_below(&clipped_gaps(&c), 2.5)
        })
        .collect();
    let ids = empirical_ids(&spectra, l, &energies).unwrap();
    for (&e, &v) in energies.iter().zip(&ids.values) {
        let exact = analytic_ids_ls(1.0, e);
        // boundary gaps and finite L bias the estimate by O(1/L)
        assert!((v / exact - 1.0).abs() < 0.05, "E = {e}: {v} vs {exact}");
    }
}

#[test]
fn critical_density_falls_with_beta() {
    let ids = AnalyticLsIds { rate: 1.0 };
    let mut prev = f64::INFINITY;
    for beta in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let c = critical_density_both(&ids, beta, 1e-6).unwrap();
        assert!(c.adaptive < prev);
        prev = c.adaptive;
    }
}

proptest! {
    #[test]
    fn chemical_potential_residual(
        levels in prop::collection::vec(1e-4f64..5.0, 1..60),
        rho in 0.01f64..20.0,
        beta in 0.1f64..10.0,
        l in 1.0f64..500.0,
    ) {
        let spec = Spectrum::from_levels(levels, l).unwrap();
        let st = ThermoState::solve(&spec, rho, beta, l, 1e-10).unwrap();
        prop_assert!(st.residual().abs() <= 1e-10);
        prop_assert!(st.chemical_potential < spec.eigenvalues[0]);
        prop_assert!(st.occupations.windows(2).all(|w| w[0] >= w[1]));
        let g = solve_ground_gap(&spec, rho, beta, l, 1e-10).unwrap();
        prop_assert!((density_at_gap(&spec.eigenvalues, g, beta, l) - rho).abs() <= 1e-10);
    }

    #[test]
    fn single_level_closed_form(e in 0.0f64..10.0, rho in 0.01f64..10.0, beta in 0.1f64..10.0, l in 1.0f64..1000.0) {
        let spec = Spectrum::from_levels(vec![e], l).unwrap();
        let st = ThermoState::solve(&spec, rho, beta, l, 1e-12).unwrap();
        let exact = single_level_chemical_potential(e, rho, beta, l);
        prop_assert!((st.chemical_potential - exact).abs() <= 1e-10);
    }
}
