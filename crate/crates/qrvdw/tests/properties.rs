use proptest::prelude::*;

use qrvdw::atom::{load_system, TransitionLine};
use qrvdw::closed_form::{energy_adiabatic, energy_far_field, energy_full, excitation_probability, magnitude_scale};
use qrvdw::contour::{evaluate_causal, evaluate_prescription, Prescription};
use qrvdw::geometry::{make_tensors, trace, DipoleContractions};
use qrvdw::scan::{scan, EnergyUnit, Grid, ScanSpec, Variable};
use qrvdw::units::C;
use qrvdw::{Method, PairSystem, SeparationGeometry};

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0).prop_filter("non-degenerate", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-2)
}

prop_compose! {
    fn system()(
        nu_a in 8000.0f64..20000.0,
        ratio in 0.005f64..0.09,
        above in any::<bool>(),
        mu in (0.5f64..5.0, 0.5f64..5.0),
        dirs in prop::option::of((direction(), direction())),
        r_dir in direction(),
        x in 0.5f64..300.0,
    ) -> PairSystem {
        let (da, db) = match dirs {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let nu_b = nu_a * if above { 1.0 + ratio } else { 1.0 - ratio };
        let a = TransitionLine::new(nu_a, mu.0, 0.0, da).unwrap();
        let b = TransitionLine::new(nu_b, mu.1, 0.0, db).unwrap();
        let geom = SeparationGeometry::along(x / a.k, r_dir).unwrap();
        PairSystem::new(a, vec![b], geom).unwrap()
    }
}

fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tensor_traces_and_relation(r_dir in direction()) {
        let t = make_tensors(&SeparationGeometry::along(1e-6, r_dir).unwrap()).unwrap();
        prop_assert!((trace(&t.alpha) - 2.0).abs() < 1e-14);
        prop_assert!(trace(&t.beta).abs() < 1e-14);
        // β = α − 2R̂R̂, so α − β is rank one with trace 2
        let rr = t.alpha.iter().zip(&t.beta).map(|(ra, rb)| [0, 1, 2].map(|j| 0.5 * (ra[j] - rb[j]))).collect::<Vec<_>>();
        for i in 0..3 {
            for j in 0..3 {
                let want = rr[i][i] * rr[j][j];
                prop_assert!((rr[i][j] * rr[i][j] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fixed_contractions_are_rank_one(r_dir in direction(), a in direction(), b in direction(), mu in 0.1f64..10.0) {
        let t = make_tensors(&SeparationGeometry::along(1e-6, r_dir).unwrap()).unwrap();
        let s = DipoleContractions::fixed(mu, &a, 1.0, &b, &t).unwrap();
        prop_assert!(s.s_aa >= 0.0 && s.s_bb >= 0.0);
        prop_assert!((s.s_ab * s.s_ab - s.s_aa * s.s_bb).abs() <= 1e-12 * (s.s_aa * s.s_bb).max(1e-300));
    }

    /// Averaging fixed contractions over a basis for each dipole reproduces
    /// the isotropic average exactly, since `Σ_i e_i e_iᵀ = 1`.
    #[test]
    fn basis_average_is_isotropic(r_dir in direction(), mu_a in 0.1f64..10.0, mu_b in 0.1f64..10.0) {
        let t = make_tensors(&SeparationGeometry::along(1e-6, r_dir).unwrap()).unwrap();
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
        for ea in &e {
            for eb in &e {
                let s = DipoleContractions::fixed(mu_a, ea, mu_b, eb, &t).unwrap();
                aa += s.s_aa / 9.0;
                ab += s.s_ab / 9.0;
                bb += s.s_bb / 9.0;
            }
        }
        let iso = DipoleContractions::isotropic(mu_a, mu_b);
        let m = (mu_a * mu_b).powi(2);
        prop_assert!(close(aa, iso.s_aa, 1e-13, m));
        prop_assert!(close(ab, iso.s_ab, 1e-13, m));
        prop_assert!(close(bb, iso.s_bb, 1e-13, m));
    }

    #[test]
    fn nothing_before_the_front(sys in system(), f in 0.0f64..=1.0) {
        let t = f * 2.0 * sys.r() / C;
        prop_assert_eq!(energy_full(&sys, t).unwrap().value, 0.0);
        prop_assert_eq!(evaluate_causal(&sys, t).unwrap().value, 0.0);
        prop_assert_eq!(excitation_probability(&sys, f * sys.r() / C).unwrap(), 0.0);
    }

    #[test]
    fn residues_match_closed_form(sys in system(), f in 0.0f64..1.0) {
        let t = 2.0 * sys.r() / C + f * 50.0 / sys.detunings[0].abs();
        let scale = magnitude_scale(&sys).unwrap();
        let a = energy_full(&sys, t).unwrap().value;
        let b = evaluate_causal(&sys, t).unwrap().value;
        prop_assert!(close(a, b, 1e-11, scale), "{a} {b} {scale}");
        let ad = evaluate_prescription(&sys, t, Prescription::Adiabatic).unwrap().value;
        prop_assert!(close(ad, energy_adiabatic(&sys).unwrap().value, 1e-11, scale));
    }

    /// Stationary P.V. is the mean of the adiabatic and pt1995 prescriptions.
    #[test]
    fn stationary_is_mean_of_neighbours(sys in system()) {
        let scale = magnitude_scale(&sys).unwrap();
        let p = |p| evaluate_prescription(&sys, 0.0, p).unwrap().value;
        let (sp, ad, pt) = (p(Prescription::StationaryPv), p(Prescription::Adiabatic), p(Prescription::Pt1995));
        prop_assert!(close(sp, 0.5 * (ad + pt), 1e-12, scale));
    }

    #[test]
    fn probability_is_bounded(sys in system(), f in 0.0f64..100.0) {
        let p = excitation_probability(&sys, f * sys.r() / C).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn scaled_energy_ignores_dipole_magnitudes(sys in system(), f in 0.0f64..1.0, k in 0.2f64..5.0) {
        let t = 2.0 * sys.r() / C + f * 20.0 / sys.detunings[0].abs();
        let mut other = sys.clone();
        other.atom_a.mu *= k;
        other.atom_b_lines[0].mu /= 0.5 * k;
        let a = energy_full(&sys, t).unwrap();
        let b = energy_full(&other, t).unwrap();
        prop_assert!((a.value_scaled - b.value_scaled).abs() <= 1e-12 * a.value_scaled.abs().max(1e-300));
    }

    #[test]
    fn factorized_far_field_is_exact(sys in system(), f in 0.0f64..1.0) {
        prop_assume!(sys.atom_a.k * sys.r() >= 10.0);
        let t = 2.0 * sys.r() / C + f * 20.0 / sys.detunings[0].abs();
        let ff = energy_far_field(&sys, t).unwrap();
        let s = ff.factorized.abs().max(ff.direct_equal_amplitude.abs()).max(1e-300);
        prop_assert!((ff.factorized - ff.direct_equal_amplitude).abs() <= 1e-9 * s);
    }

    #[test]
    fn config_round_trip(sys in system()) {
        let back = load_system(&sys.to_json()).unwrap();
        prop_assert_eq!(back.hash(), sys.hash());
        let t = 3.0 * sys.r() / C;
        let (a, b) = (energy_full(&back, t).unwrap().value, energy_full(&sys, t).unwrap().value);
        prop_assert!(close(a, b, 1e-9, magnitude_scale(&sys).unwrap()), "{a} {b}");
    }

    #[test]
    fn grid_is_monotone(lo in 0.1f64..100.0, span in 1e-3f64..100.0, n in 2usize..500) {
        let g = Grid::parse(&format!("{lo}:{}:{n}", lo + span)).unwrap();
        let v = g.values();
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], lo);
        prop_assert_eq!(v[n - 1], lo + span);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn scans_are_deterministic() {
    let sys = load_system(include_str!("../../../systems/fig3_rb_k.json")).unwrap();
    let spec = ScanSpec {
        variable: Variable::T,
        grid: Grid::parse("0:10:301").unwrap(),
        fixed: 30.0,
        methods: vec![Method::ClosedForm, Method::Contour(Prescription::Causal), Method::Adiabatic],
        per_line: true,
        unit: EnergyUnit::Scaled,
        id: "det".into(),
    };
    let a = scan(&sys, &spec).unwrap();
    let b = scan(&sys, &spec).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_json(), b.to_json());
}
