use approx::assert_relative_eq;
use proptest::prelude::*;
use signorini_core::exact::{full_contact, qpoly, regular32, regular32_angle, ExactSolution};
use signorini_core::freeboundary::{
    classifications_from_csv, classifications_to_csv, coincidence_density, coincidence_set, ClassificationRow,
    ThresholdPolicy, Verdict,
};
use signorini_core::functionals::{
    frequency, frequency_limit, profile, FrequencyProfile, ProfileRow, WeissParams,
};
use signorini_core::grid::{make_grid, BallSpec, GridFunction};
use signorini_core::rescale::blowup;
use signorini_core::solver::{solve_signorini, BoundaryData, SolveOptions};

fn params() -> WeissParams {
    WeissParams::new(2, 1.9, 1.5, 4.0, 1.0).unwrap()
}

proptest! {
    #[test]
    fn exact_members_are_homogeneous(
        lambda in 0.05..3.0f64,
        x in -1.0..1.0f64,
        y in -1.0..1.0f64,
        z in -1.0..1.0f64,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let cases = [
            (regular32_angle(3, 1.3, angle).unwrap(), 1.5),
            (qpoly(3, 2, &[1.0, 0.5, 0.0]).unwrap(), 2.0),
            (qpoly(2, 2, &[1.0]).unwrap(), 2.0),
        ];
        for (sol, kappa) in cases {
            let p: Vec<f64> = [x, y, z][..sol.dim()].to_vec();
            let q: Vec<f64> = p.iter().map(|v| v * lambda).collect();
            let lhs = sol.evaluate(&q);
            let rhs = lambda.powf(kappa) * sol.evaluate(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1e-300));
        }
    }

    #[test]
    fn exact_names_round_trip(a in 0.1..5.0f64, deg in -180.0..180.0f64) {
        let sol = regular32_angle(3, a, deg.to_radians()).unwrap();
        let back = ExactSolution::parse(&sol.to_string(), 3).unwrap();
        let p = [0.3, -0.2, 0.1];
        prop_assert!((back.evaluate(&p) - sol.evaluate(&p)).abs() < 1e-12);
    }

    #[test]
    fn exact_name_parser_never_panics(s in ".{0,40}") {
        let _ = ExactSolution::parse(&s, 2);
        let _ = ExactSolution::parse(&s, 3);
    }

    #[test]
    fn verdicts_round_trip(k in 1u32..20, x in 0.0..10.0f64, which in 0usize..4) {
        let v = [Verdict::Regular, Verdict::Singular(2 * k), Verdict::Other(x), Verdict::Unresolved][which];
        prop_assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
    }

    #[test]
    fn classification_csv_round_trip(
        rows in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0usize..4, 0.0..5.0f64, any::<bool>()), 0..6)
    ) {
        let rows: Vec<ClassificationRow> = rows
            .into_iter()
            .map(|(x, y, v, n, nan)| ClassificationRow {
                point: vec![x, y, 0.0],
                verdict: [Verdict::Regular, Verdict::Singular(2), Verdict::Other(n), Verdict::Unresolved][v],
                nhat_limit: n,
                quality: y.abs(),
                density: x.abs(),
                residual: if nan { f64::NAN } else { n / 7.0 },
            })
            .collect();
        let csv = classifications_to_csv(3, &rows);
        let back = classifications_from_csv(&csv).unwrap();
        prop_assert_eq!(classifications_to_csv(3, &back), csv);
    }

    #[test]
    fn profile_csv_round_trip(
        rows in prop::collection::vec((0.01..1.0f64, 0.0..10.0f64, any::<bool>()), 1..8)
    ) {
        let mut rows: Vec<ProfileRow> = rows
            .into_iter()
            .map(|(r, v, degenerate)| ProfileRow {
                r,
                h: v,
                d: v * r,
                n: r,
                ntilde: if degenerate { f64::NAN } else { v },
                nhat: v.min(4.0),
                weiss: vec![v - 1.0, f64::NAN],
                m: vec![v.sqrt(), 0.5],
                degenerate,
            })
            .collect();
        rows.sort_by(|a, b| a.r.total_cmp(&b.r));
        let p = FrequencyProfile { kappas: vec![1.5, 2.0], rows };
        let csv = p.to_csv();
        let back = FrequencyProfile::from_csv(&csv).unwrap();
        prop_assert_eq!(back.to_csv(), csv);
    }

    #[test]
    fn frequency_is_scale_invariant(c in 0.1..10.0f64, r in 0.15..0.5f64) {
        let g = make_grid(2, 65, 1.0).unwrap();
        let u = regular32(2, 1.0, &[1.0]).unwrap().sample(&g).unwrap();
        let v = GridFunction::from_values(g, u.values().iter().map(|x| c * x).collect()).unwrap();
        let ball = BallSpec::origin(2, r).unwrap();
        let (a, b) = (frequency(&u, &ball).unwrap(), frequency(&v, &ball).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn exact_frequencies_are_constant() {
    let g = make_grid(2, 257, 1.0).unwrap();
    for (sol, target) in [
        (regular32(2, 1.0, &[1.0]).unwrap(), 1.5),
        (qpoly(2, 2, &[1.0]).unwrap(), 2.0),
    ] {
        let u = sol.sample(&g).unwrap();
        for r in [0.1, 0.2, 0.3, 0.4] {
            let n = frequency(&u, &BallSpec::origin(2, r).unwrap()).unwrap();
            assert!((n - target).abs() < 0.02, "{sol}: N({r}) = {n}");
        }
    }
}

#[test]
fn singular_limit_is_two() {
    let g = make_grid(2, 513, 1.0).unwrap();
    let u = qpoly(2, 2, &[1.0]).unwrap().sample(&g).unwrap();
    let l = frequency_limit(&u, &[0.0, 0.0], &params()).unwrap();
    assert!((l.value - 2.0).abs() < 0.02, "{l:?}");
}

#[test]
fn densities_of_library_members() {
    let g = make_grid(2, 129, 1.0).unwrap();
    let reg = regular32(2, 1.0, &[1.0]).unwrap().sample(&g).unwrap();
    let fb = coincidence_set(&reg, ThresholdPolicy::default());
    assert_relative_eq!(coincidence_density(&fb, &[0.0, 0.0], 0.3).unwrap(), 0.5, epsilon = 0.02);
    let full = full_contact(2, 1.0).unwrap().sample(&g).unwrap();
    let fb = coincidence_set(&full, ThresholdPolicy::default());
    assert_eq!(coincidence_density(&fb, &[0.1, 0.0], 0.3).unwrap(), 1.0);
    assert!(fb.gamma_points().is_empty());
}

#[test]
fn degenerate_rows_below_four_cells() {
    let g = make_grid(2, 129, 1.0).unwrap();
    let h = g.spacing();
    let u = regular32(2, 1.0, &[1.0]).unwrap().sample(&g).unwrap();
    let p = profile(&u, &[0.0, 0.0], &[h, 2.0 * h, 8.0 * h], &params(), &[1.5]).unwrap();
    assert!(p.rows[0].degenerate && p.rows[1].degenerate);
    assert!(!p.rows[2].degenerate);
    assert!((p.rows[2].n - 1.5).abs() < 0.05);
}

#[test]
fn blowup_at_solved_regular_point_settles() {
    let g = make_grid(2, 257, 1.0).unwrap();
    let bd = BoundaryData::from_exact(&g, &regular32(2, 1.0, &[1.0]).unwrap()).unwrap();
    let (u, _) = solve_signorini(&g, &bd, &SolveOptions::default()).unwrap();
    let center = coincidence_set(&u, ThresholdPolicy::default())
        .nearest_gamma(&[0.0, 0.0])
        .unwrap()
        .to_vec();
    let ladder = [0.4, 0.2, 0.1];
    let res = blowup(&u, &center, 1.5, &ladder, &params(), 65).unwrap();
    assert_eq!(res.rotation_metrics.len(), 2);
    assert!(res.rotation_metrics.iter().all(|m| m.is_finite()));
    // the exact profile is a fixed point up to the gauge factor
    let samples = signorini_core::rescale::SphereSamples::from_field(res.limit_estimate());
    let fit = signorini_core::rescale::fit_regular_profile(&samples).unwrap();
    assert!(fit.residual < 0.01, "{fit:?}");
}
