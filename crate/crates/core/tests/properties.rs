//! Property tests over randomized inputs.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use warpdisp::exponents::AdmissiblePair;
use warpdisp::hypotheses::{check_exp_theorem, check_poly_theorem, check_potential_h, check_tau_conditions, BuiltinPotential, CheckGrid};
use warpdisp::norms::{
    l2_on_m, lq_on_m, lq_on_rn, quotient_for_datum, spacetime_norm, AdaptiveSettings, Modulation,
};
use warpdisp::resolvent::{smallest_eigenvalue, weighted_resolvent_norm, DiscreteOperator};
use warpdisp::solver::{solve_linear, CnStepper, LinearProblem, RadialField, Representation, TimeGrid};
use warpdisp::{Grid, WarpProfile};

use common::rel;

fn profile_strategy() -> impl Strategy<Value = WarpProfile> {
    prop_oneof![
        Just(WarpProfile::euclidean()),
        (0.3f64..2.0).prop_map(|a| WarpProfile::hyperbolic(a).unwrap()),
        (0.05f64..2.0, 0.0f64..0.5).prop_map(|(a, b)| WarpProfile::odd_polynomial(vec![a, b]).unwrap()),
        (1.2f64..3.0, 0.5f64..2.0).prop_map(|(m, r0)| WarpProfile::power_tail(m, r0).unwrap()),
    ]
}

fn random_field(grid: Grid, n: usize, seed: &[(f64, f64)]) -> RadialField {
    RadialField::from_fn(grid, n, Representation::UOnM, |r| {
        let k = ((r / grid.r_max()) * (seed.len() - 1) as f64).round() as usize;
        let (a, b) = seed[k];
        Complex64::new(a, b) * (-r * r / 6.0).exp()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_round_trip_and_interpolation(
        dim in 2.2f64..12.0,
        s1 in 0.0f64..=1.0,
        s2 in 0.0f64..=1.0,
        theta in 0.0f64..=1.0,
    ) {
        let upper = AdmissiblePair::q_upper(dim);
        let a = AdmissiblePair::from_q(2.0 + s1 * (upper - 2.0), dim).unwrap();
        let b = AdmissiblePair::from_q(2.0 + s2 * (upper - 2.0), dim).unwrap();
        prop_assert_eq!(a.q, 2.0 + s1 * (upper - 2.0));
        prop_assert!(a.admissibility_defect() <= 1e-12);
        let inv_p = theta / a.p + (1.0 - theta) / b.p;
        let inv_q = theta / a.q + (1.0 - theta) / b.q;
        prop_assert!((2.0 * inv_p + dim * inv_q - dim / 2.0).abs() <= 1e-12);
        let mid = AdmissiblePair::from_q(1.0 / inv_q, dim).unwrap();
        prop_assert!((1.0 / mid.p - inv_p).abs() <= 1e-12);
    }

    #[test]
    fn q_minus_v_is_centrifugal(profile in profile_strategy(), n in 3usize..7, r in 0.05f64..50.0) {
        let c = (n as f64 - 1.0) * (n as f64 - 3.0) / 4.0;
        let q = profile.q_at(n, r);
        let v = profile.v_at(n, r);
        prop_assert!(((q - v) - c / (r * r)).abs() <= 1e-12 * q.abs().max(c / (r * r)).max(1.0));
    }

    #[test]
    fn sigma_log_derivative_two_ways(profile in profile_strategy(), n in 3usize..6, r in 0.1f64..10.0) {
        let direct = profile.sigma_prime(n, r) / profile.tau_sigma(n, r).unwrap().sigma;
        let formula = profile.sigma_log_derivative(n, r);
        prop_assert!(rel(direct, formula) <= 1e-10 || (direct - formula).abs() <= 1e-12);
    }

    #[test]
    fn duality_identity(
        profile in profile_strategy(),
        n in 3usize..6,
        seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
    ) {
        let grid = Grid::new(8.0, 300).unwrap();
        let field = random_field(grid, n, &seed);
        for q in [2.0, 3.0, 6.0] {
            let weight_exp = (n as f64 - 1.0) / 2.0 * (1.0 - 2.0 / q);
            let lhs = lq_on_m(&field, &profile, q, weight_exp);
            let rhs = lq_on_rn(&field, &profile, q);
            prop_assert!(rel(lhs, rhs) <= 1e-10, "q = {q}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn holder_step(
        profile in profile_strategy(),
        n in 3usize..6,
        extra in 0.1f64..5.0,
        seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
    ) {
        let nf = n as f64;
        let d = nf + extra;
        let grid = Grid::new(8.0, 300).unwrap();
        let field = random_field(grid, n, &seed);
        let ones = RadialField::from_fn(grid, n, Representation::UOnM, |_| Complex64::new(1.0, 0.0));
        // σ^{−1/n} = (φ/r)^{(n−1)/(2n)}
        let k = (nf - 1.0) / (2.0 * nf);
        let lhs = lq_on_m(&field, &profile, 2.0 * d / (d - 2.0), 0.0);
        let a = lq_on_m(&field, &profile, 2.0 * nf / (nf - 2.0), k);
        let b = lq_on_m(&ones, &profile, nf * d / (d - nf), -k);
        prop_assert!(lhs <= a * b * (1.0 + 1e-12), "{lhs} > {a} * {b}");
    }

    #[test]
    fn resolvent_adjoint_and_shift(
        beta in -3.0f64..3.0,
        lambda in -2.0f64..10.0,
        eps in 0.05f64..1.0,
        depth in -0.2f64..2.0,
    ) {
        let grid = Grid::new(30.0, 300).unwrap();
        let op = DiscreteOperator::from_potential_fn(|r| depth / (1.0 + r * r), grid, 3);
        let a = weighted_resolvent_norm(&op, lambda, eps).unwrap();
        let b = weighted_resolvent_norm(&op, lambda, -eps).unwrap();
        prop_assert!(rel(a.norm, b.norm) <= 1e-10);
        let shifted = DiscreteOperator::from_potential_fn(|r| depth / (1.0 + r * r) + beta, grid, 3);
        let c = weighted_resolvent_norm(&shifted, lambda + beta, eps).unwrap();
        prop_assert!(rel(a.norm, c.norm) <= 1e-10, "{} vs {}", a.norm, c.norm);
        let gap = smallest_eigenvalue(&shifted) - smallest_eigenvalue(&op);
        prop_assert!((gap - beta).abs() <= 1e-8 * (1.0 + op.spectral_bounds().1));
    }

    #[test]
    fn potential_delta0_is_monotone(beta in -0.24f64..3.0, slack in 0.0f64..1.0) {
        let grid = CheckGrid::new(1e-2, 1e3, 400).unwrap();
        let reports = check_potential_h(&BuiltinPotential::InverseBracket { beta }, 3, &grid);
        let d0 = reports.delta0();
        if reports.holds_with(d0) {
            prop_assert!(reports.holds_with(d0 * slack));
        }
    }

    #[test]
    fn time_reversal(profile in profile_strategy(), steps in 10usize..200, width in 0.5f64..2.0) {
        let grid = Grid::new(20.0, 400).unwrap();
        let op = LinearProblem::new(&profile, 3, grid).operator().unwrap();
        let u0 = RadialField::gaussian(grid, 3, &profile, width, 1.0, Representation::WHalfline);
        let forward = CnStepper::new(&op, 1e-2).unwrap();
        let backward = CnStepper::new(&op, -1e-2).unwrap();
        let mut w = u0.values.clone();
        let mut scratch = Vec::new();
        for _ in 0..steps {
            forward.step(&mut w, &mut scratch, None);
        }
        for _ in 0..steps {
            backward.step(&mut w, &mut scratch, None);
        }
        let err: f64 = w.iter().zip(&u0.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = u0.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-9 * size);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn quotient_stable_under_refinement(width_exp in -2i32..=2, chirp in 0.0f64..2.0) {
        let p = WarpProfile::hyperbolic(1.0).unwrap();
        let pair = AdmissiblePair::from_q(6.0, 3.0).unwrap();
        let width = 2f64.powi(width_exp);
        let coarse = AdaptiveSettings::default();
        let fine = AdaptiveSettings {
            h_times_k: coarse.h_times_k / 2.0,
            dt_times_k2: coarse.dt_times_k2 / 2.0,
            ..coarse
        };
        let a = quotient_for_datum(&p, 3, pair, true, width, chirp, Modulation::Linear, coarse).unwrap();
        let b = quotient_for_datum(&p, 3, pair, true, width, chirp, Modulation::Linear, fine).unwrap();
        prop_assert!(rel(a.report.quotient, b.report.quotient) <= 0.05,
            "{} vs {}", a.report.quotient, b.report.quotient);
    }
}

#[test]
fn hypothesis_margins_stable_under_refinement() {
    let grid = CheckGrid::new(1e-2, 1e3, 1000).unwrap();
    let profiles = [
        WarpProfile::euclidean(),
        WarpProfile::hyperbolic(1.0).unwrap(),
        WarpProfile::odd_polynomial(vec![1.0]).unwrap(),
        WarpProfile::power_tail(2.0, 1.0).unwrap(),
    ];
    let reports = |p: &WarpProfile, g: &CheckGrid| {
        let mut out = check_tau_conditions(p, 3, 0.0, g).unwrap().to_vec();
        out.extend(check_potential_h(&BuiltinPotential::Manifold { profile: p.clone(), n: 3, c0: 0.0 }, 3, g).into_vec());
        if let Ok((a, b)) = check_poly_theorem(p, 3, g, None) {
            out.extend([a, b]);
        }
        if let Ok((a, b)) = check_exp_theorem(p, 3, g, None) {
            out.extend([a, b]);
        }
        out
    };
    for p in &profiles {
        let coarse = reports(p, &grid);
        let fine = reports(p, &grid.refined());
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            let scale = a.worst_margin.abs().max(1e-12);
            assert!(
                (a.worst_margin - b.worst_margin).abs() <= 0.05 * scale,
                "{}: {:?} {} vs {}",
                p.label(),
                a.condition_id,
                a.worst_margin,
                b.worst_margin
            );
        }
    }
}

#[test]
fn power_law_tails_give_effective_dimension() {
    for (n, m) in [(3usize, 1.5), (3, 2.0), (4, 2.5), (5, 3.0)] {
        let p = WarpProfile::power_tail(m, 1.0).unwrap();
        let (_, poly) = check_poly_theorem(&p, n, &CheckGrid::standard(), None).unwrap();
        let big_n = poly.extracted.n_eff.unwrap();
        assert!((big_n - (m * (n as f64 - 1.0) + 1.0)).abs() <= 0.05, "n = {n}, m = {m}: N = {big_n}");
    }
}

#[test]
fn endpoint_pair_is_sup_of_mass() {
    let p = WarpProfile::hyperbolic(1.0).unwrap();
    let grid = Grid::new(20.0, 400).unwrap();
    let u0 = RadialField::gaussian(grid, 3, &p, 1.0, 1.0, Representation::UOnM);
    let times = TimeGrid::uniform(1.0, 64, &grid);
    let traj = solve_linear(&p, 3, &u0, None, &times, None, Representation::UOnM).unwrap();
    let pair = AdmissiblePair::from_q(2.0, 3.0).unwrap();
    let rep = spacetime_norm(&traj, &p, pair, false).unwrap();
    let sup = traj.snapshots.iter().map(|s| l2_on_m(s, &p)).fold(0.0, f64::max);
    assert!(rel(rep.value, sup) <= 1e-12, "{} vs {sup}", rep.value);
}
