use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qrvdw::atom::load_system;
use qrvdw::atom::TransitionLine;
use qrvdw::closed_form::{energy_full, magnitude_scale};
use qrvdw::contour::Order;
use qrvdw::contour::{residue_integral_poly, Pole, TermMask};
use qrvdw::expo::{kernel, ExpRational};
use qrvdw::geometry::Tensor;
use qrvdw::quadrature::{
    energy_quadrature, energy_quadrature_with, kernel_pv, pv_integral_1d, QuadratureConfig, TailMethod,
};
use qrvdw::units::C;
use qrvdw::{PairSystem, SeparationGeometry};

fn pair(x: f64) -> PairSystem {
    let a = TransitionLine::new(12578.95, 1.0, 0.0, None).unwrap();
    let b = TransitionLine::new(12985.17, 1.0, 0.0, None).unwrap();
    let r = x / a.k;
    PairSystem::new(a, vec![b], SeparationGeometry::new([0.0, 0.0, r]).unwrap()).unwrap()
}

#[test]
fn kernels_match_residues_at_random_points() {
    let mut rng = StdRng::seed_from_u64(3);
    let cfg = QuadratureConfig::default();
    for _ in 0..50 {
        let k0 = rng.gen_range(1e6..3e7);
        let x0 = rng.gen_range(0.5..100.0);
        let r = x0 / k0;
        for t in Tensor::BOTH {
            let got = kernel_pv(t, k0, r, &cfg).unwrap();
            // same integral in u = kR: k³ kernel(u)/(u − x0) picks up R⁻³
            let want = residue_integral_poly(&kernel(t), &[Pole::on_axis(x0)]).unwrap() / r.powi(3);
            assert!((got - want).norm() <= 1e-6 * want.norm(), "{t:?} x0={x0}: {got} {want}");
        }
    }
}

#[test]
fn halving_the_excision_is_invisible() {
    let base = QuadratureConfig::default();
    let half = QuadratureConfig { epsilon_fraction: 0.5 * base.epsilon_fraction, ..base };
    for x0 in [0.7, 5.0, 60.0] {
        for t in Tensor::BOTH {
            let f = ExpRational { num: kernel(t), poles: vec![x0] };
            let a = pv_integral_1d(&f, &base).unwrap();
            let b = pv_integral_1d(&f, &half).unwrap();
            assert!((a - b).norm() <= base.rel_tol * a.norm(), "{x0} {t:?}: {a} {b}");
        }
    }
}

#[test]
fn tail_methods_agree_on_the_energy() {
    let rot = QuadratureConfig::default();
    let win = QuadratureConfig { tail_method: TailMethod::WindowExtrapolation, max_panels: 200_000, ..rot };
    let s = pair(12.0);
    let t = 3.0 * s.r() / C;
    let mask = TermMask::without_mixed();
    let a = energy_quadrature_with(&s, t, Order::default(), mask, &rot).unwrap().value;
    let b = energy_quadrature_with(&s, t, Order::default(), mask, &win).unwrap().value;
    assert!((a - b).abs() <= 3.0 * rot.rel_tol.max(1e-9) * a.abs(), "{a} {b}");
}

/// With only the uncoupled A–A term kept, the energy is a product of two
/// single principal values.
#[test]
fn single_pole_term_is_a_product() {
    let cfg = QuadratureConfig::default();
    let s = pair(7.5);
    let ch = s.channel(0).unwrap();
    let mask = TermMask { aa: true, bb_cos: false, mixed_k: false, mixed_k_prime: false };
    let got = energy_quadrature_with(&s, 4.0 * s.r() / C, Order::default(), mask, &cfg).unwrap().value;
    let q: Vec<C64> = Tensor::BOTH
        .iter()
        .map(|&t| pv_integral_1d(&ExpRational { num: kernel(t), poles: vec![ch.x_a()] }, &cfg).unwrap())
        .collect();
    let mut v = C64::new(0.0, 0.0);
    for (i, x) in Tensor::BOTH.iter().enumerate() {
        for (j, y) in Tensor::BOTH.iter().enumerate() {
            v += ch.s.get(*x, *y) * q[i] * q[j];
        }
    }
    let want = (v * ch.prefactor / (PI * PI * ch.r.powi(6))).re;
    assert!((got - want).abs() <= 1e-12 * want.abs(), "{got} {want}");
}

#[test]
fn near_field_energy_matches_closed_form() {
    let cfg = QuadratureConfig::default();
    let s = pair(3.0);
    let d = s.detunings[0].abs();
    for f in [0.01, 0.3, 1.0, 7.0] {
        let t = 2.0 * s.r() / C + f / d;
        let a = energy_full(&s, t).unwrap().value;
        let b = energy_quadrature(&s, t, &cfg).unwrap().value;
        assert!((a - b).abs() <= 1e-4 * a.abs(), "{f}: {a} {b}");
    }
}

/// A distance whose pole lands where the mirrored window used to lose every
/// digit near `t = 0`; the adaptive rule then evaluated at the pole itself.
#[test]
fn window_near_the_pole_stays_finite() {
    let s = load_system(include_str!("../../../systems/fig3_rb_k.json")).unwrap().with_distance(30.0 * 1e-6).unwrap();
    let t = 14.343434343434343e-12;
    let q = energy_quadrature(&s, t, &QuadratureConfig::default()).unwrap().value;
    let cf = energy_full(&s, t).unwrap().value;
    let scale = magnitude_scale(&s).unwrap();
    assert!((q - cf).abs() < 1e-8 * scale, "{q} vs {cf}");
}
