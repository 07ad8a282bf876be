use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qca_core::automata::cell_period;
use qca_core::deformed::{default_deformation, deformed_boost, EnergyMomentum};
use qca_core::dispersive::{compare_evolutions, dispersive_evolve, DispersiveModel};
use qca_core::maxwell::{evolve_mode, photon_dispersion_with, relativistic_axis, TransverseField};
use qca_core::packets::{make_packet, LatticeState, ModeTable, MomentumGrid, PacketSpec, Representation};
use qca_core::pheno::{unit_convert, Dimension, PlanckQuantity, UnitSystem};
use qca_core::scattering::{evolve_with_potential, PotentialProfile};
use qca_core::spectral::{
    dirac1d_velocity, group_velocity, interpolating_hamiltonian, reexponentiation_error, Branch,
};
use qca_core::zitter::decompose_trajectory;
use qca_core::{AutomatonSpec, Chirality, Model, QcaError, WaveVector};

const MODELS: [Model; 6] = [Model::Weyl1d, Model::Weyl2d, Model::Weyl3d, Model::Dirac1d, Model::Dirac2d, Model::Dirac3d];

fn model() -> impl Strategy<Value = Model> {
    prop::sample::select(MODELS.to_vec())
}

fn chirality() -> impl Strategy<Value = Chirality> {
    prop_oneof![Just(Chirality::Minus), Just(Chirality::Plus)]
}

fn automaton() -> impl Strategy<Value = AutomatonSpec> {
    (model(), chirality(), 0.0..1.0f64).prop_map(|(m, c, mass)| {
        let mass = if m.is_dirac() { mass } else { 0.0 };
        AutomatonSpec::new(m, c, mass).unwrap()
    })
}

/// A wave vector anywhere in `[−2P, 2P]^dim`, beyond the first cell.
fn wave_vector(dim: usize) -> impl Strategy<Value = WaveVector> {
    let p = 2.0 * cell_period(dim);
    prop::collection::vec(-p..p, dim).prop_map(|v| WaveVector::new(&v).unwrap())
}

fn automaton_and_k() -> impl Strategy<Value = (AutomatonSpec, WaveVector)> {
    automaton().prop_flat_map(|a| {
        let dim = a.dim();
        (Just(a), wave_vector(dim))
    })
}

fn grid_for(dim: usize) -> MomentumGrid {
    MomentumGrid::new(dim, [64, 16, 8][dim - 1]).unwrap()
}

/// Automaton, a small grid and random position-space amplitudes on it.
fn random_state() -> impl Strategy<Value = (AutomatonSpec, LatticeState)> {
    automaton().prop_flat_map(|a| {
        let grid = grid_for(a.dim());
        let len = grid.len() * a.internal_dim();
        let internal = a.internal_dim();
        (Just(a), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)).prop_map(move |(a, v)| {
            let amps = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
            let mut s = LatticeState::from_amplitudes(grid, internal, Representation::Position, amps).unwrap();
            s.normalize();
            (a, s)
        })
    })
}

fn distance(a: &LatticeState, b: &LatticeState) -> f64 {
    let b = b.in_representation(a.representation());
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn rodrigues(v: [f64; 3], a: [f64; 3], theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    let d = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
    let x = [a[1] * v[2] - a[2] * v[1], a[2] * v[0] - a[0] * v[2], a[0] * v[1] - a[1] * v[0]];
    std::array::from_fn(|i| v[i] * c + x[i] * s + a[i] * d * (1.0 - c))
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(th, ph)| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
}

/// Relative distance between the automaton evolution of a random transverse
/// field and a free rotation about the small-`k` axis by `phase`.
fn free_rotation_error(dir: [f64; 3], scale: f64, c: Chirality, f: &[f64], phase: f64) -> f64 {
    let k: [f64; 3] = dir.map(|x| x * scale);
    let mode = photon_dispersion_with(&WaveVector::new(&k).unwrap(), c).unwrap();
    let f0 = TransverseField::projected(std::array::from_fn(|i| C64::new(f[i], f[i + 3])), mode).unwrap();
    if f0.magnitude() < 1e-3 {
        return 0.0;
    }
    // free angular velocity is |k|/√3
    let ft = evolve_mode(&f0, phase * 3f64.sqrt() / scale);
    let ax = relativistic_axis(dir, c);
    let re = rodrigues(f0.f.map(|z| z.re), ax, phase);
    let im = rodrigues(f0.f.map(|z| z.im), ax, phase);
    (0..3).map(|i| (ft.f[i] - C64::new(re[i], im[i])).norm_sqr()).sum::<f64>().sqrt() / f0.magnitude()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coin_is_unitary((a, k) in automaton_and_k()) {
        let coin = a.coin(&k).unwrap();
        prop_assert!(coin.unitarity_residual() < 1e-12);
    }

    #[test]
    fn symbol_satisfies_normalization((a, k) in automaton_and_k()) {
        let s = a.symbol(&k).unwrap();
        let t = s.weyl.n_tilde_norm();
        prop_assert!((s.weyl.d * s.weyl.d + t * t - 1.0).abs() < 1e-12);
        prop_assert!((s.cos_omega().powi(2) + s.sin_omega().powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weyl_coins_have_unit_determinant(dim in 2usize..=3, c in chirality(), seed in prop::collection::vec(-20.0..20.0f64, 3)) {
        let a = AutomatonSpec::new([Model::Weyl2d, Model::Weyl3d][dim - 2], c, 0.0).unwrap();
        let k = WaveVector::new(&seed[..dim]).unwrap();
        prop_assert!((a.coin(&k).unwrap().determinant() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn symbol_is_periodic((a, k) in automaton_and_k(), axis in 0usize..3, turns in -2i32..=2) {
        let axis = axis % a.dim();
        let shifted = k.shifted(axis, turns as f64 * cell_period(a.dim()));
        let u = a.coin(&k).unwrap().matrix;
        let v = a.coin(&shifted).unwrap().matrix;
        prop_assert!((&u - &v).norm() < 1e-11);
    }

    #[test]
    fn hamiltonian_reexponentiates((a, k) in automaton_and_k()) {
        let coin = a.coin(&k).unwrap();
        let h = interpolating_hamiltonian(&coin).unwrap();
        prop_assert!(h.hermiticity_residual() < 1e-12);
        prop_assert!(reexponentiation_error(&h, &coin) < 1e-10);
    }

    #[test]
    fn dirac1d_velocity_matches_finite_differences(m in 0.01..0.95f64, k in -3.1..3.1f64) {
        let a = AutomatonSpec::dirac(1, m).unwrap();
        let v = group_velocity(&a, &WaveVector::d1(k)).unwrap()[0];
        prop_assert!((v - dirac1d_velocity(m, k)).abs() < 1e-8, "{} vs {}", v, dirac1d_velocity(m, k));
    }

    // the envelope must stay clear of the cone tip at k = 0
    #[test]
    fn weyl1d_dispersive_overlap_is_exact(k0 in prop_oneof![-2.0..-0.3f64, 0.3..2.0f64], sigma in 0.02..0.05f64, t in 0i64..400) {
        let a = AutomatonSpec::weyl(1);
        let spec = PacketSpec::particle(WaveVector::d1(k0), sigma);
        let grid = MomentumGrid::new(1, 1024).unwrap();
        let c = compare_evolutions(&a, &spec, &grid, &[t]).unwrap();
        prop_assert!(c[0].overlap >= 1.0 - 1e-10, "{:?}", c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_conserves_norm((a, s) in random_state(), t in -50i64..50) {
        let table = ModeTable::new(s.grid(), &a).unwrap();
        let out = table.evolve(&s, t).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_commutes_with_translation((a, s) in random_state(), t in 0i64..30, shift in prop::collection::vec(-20i64..20, 3)) {
        let shift = &shift[..a.dim()];
        let table = ModeTable::new(s.grid(), &a).unwrap();
        let lhs = table.evolve(&s.translated(shift).unwrap(), t).unwrap();
        let rhs = table.evolve(&s, t).unwrap().translated(shift).unwrap();
        prop_assert!(distance(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn branch_projection_commutes_with_evolution((a, s) in random_state(), t in 0i64..30, particle in any::<bool>()) {
        let b = if particle { Branch::Particle } else { Branch::Antiparticle };
        let table = ModeTable::new(s.grid(), &a).unwrap();
        let lhs = table.project(&table.evolve(&s, t).unwrap(), b).unwrap();
        let rhs = table.evolve(&table.project(&s, b).unwrap(), t).unwrap();
        prop_assert!(distance(&lhs, &rhs) < 1e-12);
        let split = table.split(&s).unwrap();
        prop_assert!((split.plus.norm_sqr() + split.minus.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dispersive_evolution_keeps_unit_norm(m in 0.0..0.6f64, k0 in -1.5..1.5f64, sigma in 0.02..0.2f64, t in -300i64..300) {
        let a = AutomatonSpec::dirac(1, m).unwrap();
        let grid = MomentumGrid::new(1, 1024).unwrap();
        let s = make_packet(&PacketSpec::particle(WaveVector::d1(k0), sigma), &grid, &a).unwrap();
        let model = DispersiveModel::new(&a, &WaveVector::d1(k0), Branch::Particle).unwrap();
        let out = dispersive_evolve(&s, t, &model).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zitter_decomposition_identity(m in 0.05..0.5f64, k0 in -0.5..0.5f64, theta in 0.0..PI, phase in 0.0..2.0 * PI) {
        let a = AutomatonSpec::dirac(1, m).unwrap();
        let grid = MomentumGrid::new(1, 2048).unwrap();
        let mut spec = PacketSpec::particle(WaveVector::d1(k0), 0.05);
        spec.c_plus = C64::new((theta / 2.0).cos(), 0.0);
        spec.c_minus = C64::from_polar((theta / 2.0).sin(), phase);
        let d = decompose_trajectory(&spec, &a, &grid, 60).unwrap();
        prop_assert!(d.identity_residual() < 1e-9);
    }

    #[test]
    fn potential_walk_is_unitary_and_causal(
        m in 0.0..1.0f64,
        phases in prop::collection::vec(-10.0..10.0f64, 128),
        start in 0usize..96,
        width in 1usize..16,
        amps in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 32),
        t in 1usize..40,
    ) {
        let a = AutomatonSpec::dirac(1, m).unwrap();
        let profile = PotentialProfile::custom(phases).unwrap();
        let grid = MomentumGrid::new(1, 128).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 256];
        for (i, (re, im)) in amps.iter().enumerate().take(2 * width) {
            let (c, x) = (i % 2, start + i / 2);
            v[c * 128 + x] = C64::new(*re, *im);
        }
        let mut s = LatticeState::from_amplitudes(grid, 2, Representation::Position, v).unwrap();
        prop_assume!(s.norm_sqr() > 0.0);
        s.normalize();
        let out = evolve_with_potential(&s, &profile, &a, t).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        let (lo, hi) = (start as i64 - t as i64, (start + width - 1 + t) as i64);
        for x in 0..128i64 {
            let inside = (lo..=hi).any(|y| y.rem_euclid(128) == x);
            if !inside {
                for c in 0..2 {
                    prop_assert_eq!(out.get(c, x as usize), C64::new(0.0, 0.0), "site {} outside [{}, {}]", x, lo, hi);
                }
            }
        }
    }

    #[test]
    fn maxwell_field_is_transverse_with_constant_magnitude(
        k in prop::collection::vec(-3.0..3.0f64, 3),
        c in chirality(),
        f in prop::collection::vec(-1.0..1.0f64, 6),
        t in 0.0..1e4f64,
    ) {
        let k = WaveVector::new(&k).unwrap();
        let mode = photon_dispersion_with(&k, c).unwrap();
        prop_assume!(mode.omega > 1e-6);
        let f0 = TransverseField::projected(std::array::from_fn(|i| C64::new(f[i], f[i + 3])), mode).unwrap();
        prop_assume!(f0.magnitude() > 1e-3);
        let ft = evolve_mode(&f0, t);
        prop_assert!(ft.transversality_residual() < 1e-12 * f0.magnitude());
        prop_assert!((ft.magnitude() / f0.magnitude() - 1.0).abs() < 1e-12);
        let period = evolve_mode(&f0, 2.0 * PI / mode.omega);
        let back: f64 = (0..3).map(|i| (period.f[i] - f0.f[i]).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(back < 1e-12 * f0.magnitude());
    }

    #[test]
    fn maxwell_relativistic_limit_on_axes(
        axis in 0usize..3,
        sign in prop_oneof![Just(1.0), Just(-1.0)],
        scale in 1e-8..1e-4f64,
        c in chirality(),
        f in prop::collection::vec(-1.0..1.0f64, 6),
        phase in 0.1..6.0f64,
    ) {
        let dir: [f64; 3] = std::array::from_fn(|i| if i == axis { sign } else { 0.0 });
        prop_assert!(free_rotation_error(dir, scale, c, &f, phase) < 1e-6);
    }

    #[test]
    fn maxwell_relativistic_limit_any_direction(
        dir in unit_vector(),
        scale in 1e-8..2e-6f64,
        c in chirality(),
        f in prop::collection::vec(-1.0..1.0f64, 6),
        phase in 0.1..1.0f64,
    ) {
        prop_assert!(free_rotation_error(dir, scale, c, &f, phase) < 1e-6);
    }

    #[test]
    fn deformed_boost_stays_on_shell(m in 0.01..0.9f64, k in -0.6..0.6f64, bi in 0usize..6) {
        let beta = [0.1, -0.1, 0.5, -0.5, 0.9, -0.9][bi];
        let map = default_deformation(m).unwrap();
        match deformed_boost(beta, &EnergyMomentum::on_shell_at(m, k), &map) {
            Ok(q) => prop_assert!(q.on_shell_residual() < 1e-12),
            Err(QcaError::OutOfDomain { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn deformed_boosts_compose(m in 0.05..0.9f64, k in -0.3..0.3f64, b1 in -0.5..0.5f64, b2 in -0.5..0.5f64) {
        let map = default_deformation(m).unwrap();
        let p = EnergyMomentum::on_shell_at(m, k);
        let two = deformed_boost(b1, &p, &map).and_then(|q| deformed_boost(b2, &q, &map));
        let one = deformed_boost((b1 + b2) / (1.0 + b1 * b2), &p, &map);
        if let (Ok(two), Ok(one)) = (two, one) {
            prop_assert!((two.omega - one.omega).abs() < 1e-12 && (two.k - one.k).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_conversion_round_trips(exp in -40.0..40.0f64, d in 0usize..4) {
        let dim = [Dimension::Length, Dimension::Time, Dimension::Mass, Dimension::Wavevector][d];
        let q = PlanckQuantity::planck(10f64.powf(exp), dim);
        let back = unit_convert(&unit_convert(&q, UnitSystem::Si), UnitSystem::Planck);
        prop_assert_eq!(back.system, UnitSystem::Planck);
        prop_assert!((back.value / q.value - 1.0).abs() < 1e-14);
    }
}
