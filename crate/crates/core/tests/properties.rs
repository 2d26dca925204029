use fplr::cliio::{curves_to_csv, parse_curves, ModelFile};
use fplr::fplm::FplmPath;
use fplr::kernelreg::DistanceMatrix;
use fplr::simstudy::{dependent_shift, sample_t, SeriesBasis};
use fplr::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const G: usize = 21;

fn grid() -> Grid {
    Grid::unit(G).unwrap()
}

fn curve() -> impl Strategy<Value = Curve> {
    prop::collection::vec(-5.0..5.0f64, G).prop_map(|v| Curve::new(grid(), v).unwrap())
}

fn curves(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Curve>> {
    prop::collection::vec(curve(), n)
}

fn dataset(n: std::ops::Range<usize>) -> impl Strategy<Value = FunctionalDataset> {
    n.prop_flat_map(|n| {
        (
            prop::collection::vec(curve(), n),
            prop::collection::vec(curve(), n),
            prop::collection::vec(-10.0..10.0f64, n),
        )
    })
    .prop_map(|(x, t, y)| FunctionalDataset::new(x, t, y).unwrap())
}

fn kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::Quadratic),
        Just(KernelSpec::Uniform),
        Just(KernelSpec::Triangular)
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn curves_close(a: &Curve, b: &Curve, tol: f64) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| close(*x, *y, tol))
}

#[test]
fn fourier_orthonormal_at_default_grid() {
    let g = Grid::unit(201).unwrap();
    for j in 1..=10 {
        for k in 1..=10 {
            let ip = inner_product(
                &fourier_basis(j, &g).unwrap(),
                &fourier_basis(k, &g).unwrap(),
            )
            .unwrap();
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((ip - want).abs() <= 1e-4, "<phi{j}, phi{k}> = {ip}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn inner_product_is_bilinear(f in curve(), g in curve(), h in curve(), a in -3.0..3.0f64) {
        let lhs = inner_product(&f.scale(a).add(&g).unwrap(), &h).unwrap();
        let rhs = a * inner_product(&f, &h).unwrap() + inner_product(&g, &h).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn cauchy_schwarz(f in curve(), g in curve()) {
        let ip = inner_product(&f, &g).unwrap();
        prop_assert!(ip.abs() <= l2_norm(&f) * l2_norm(&g) + 1e-12);
    }

    #[test]
    fn distance_axioms(f in curve(), g in curve()) {
        prop_assert_eq!(l2_distance(&f, &g).unwrap(), l2_distance(&g, &f).unwrap());
        prop_assert_eq!(l2_distance(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn weight_rows_are_stochastic(t in curves(2..12), scale in 0.05..5.0f64, k in kernel()) {
        let h = scale * median_bandwidth(&t).unwrap();
        let w = training_weight_matrix(&t, h, k).unwrap();
        for i in 0..t.len() {
            let row = w.row(i);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn support_grows_with_bandwidth(t in curves(2..10), h1 in 0.1..10.0f64, dh in 0.0..10.0f64, k in kernel()) {
        let small = training_weight_matrix(&t, h1, k).unwrap();
        let large = training_weight_matrix(&t, h1 + dh, k).unwrap();
        for i in 0..t.len() {
            for j in 0..t.len() {
                if small.get(i, j) > 0.0 {
                    prop_assert!(large.get(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn nw_reproduces_constants(t in curves(2..10), q in curve(), c in -100.0..100.0f64, k in kernel()) {
        let h = 2.0 * pairwise_distances(&t).unwrap().max_distance() + l2_distance(&q, &t[0]).unwrap() + 1.0;
        let v = nw_regress(&t, &vec![c; t.len()], &q, h, k).unwrap();
        prop_assert!(close(v, c, 1e-14));
    }

    #[test]
    fn tiny_bandwidth_residuals_vanish(t in curves(2..10), y in prop::collection::vec(-5.0..5.0f64, 10)) {
        let d = pairwise_distances(&t).unwrap();
        let h = d.min_positive().unwrap() * 0.5;
        let w = WeightMatrix::from_distances(&d, h, KernelSpec::Quadratic).unwrap();
        let r = residualize_scalar(&w, &y[..t.len()]).unwrap();
        prop_assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn uniform_huge_bandwidth_centers(x in curves(2..10), t in curves(10..11), y in prop::collection::vec(-5.0..5.0f64, 10)) {
        let n = x.len();
        let t = &t[..n];
        let y = &y[..n];
        let h = pairwise_distances(t).unwrap().max_distance() * 2.0 + 1.0;
        let w = training_weight_matrix(t, h, KernelSpec::Uniform).unwrap();
        let mean = y.iter().sum::<f64>() / n as f64;
        for (r, yi) in residualize_scalar(&w, y).unwrap().iter().zip(y) {
            prop_assert!(close(*r, yi - mean, 1e-13));
        }
        let xr = residualize_curves(&w, &x).unwrap();
        for k in 0..G {
            let m = x.iter().map(|c| c.values()[k]).sum::<f64>() / n as f64;
            for (c, orig) in xr.iter().zip(&x) {
                prop_assert!(close(c.values()[k], orig.values()[k] - m, 1e-13));
            }
        }
    }

    #[test]
    fn eigensystem_consistency(x in curves(2..15)) {
        let sys = EigenSystem::decompose(&x, x.len()).unwrap();
        let n = x.len() as f64;
        let scale = sys.eigenvalues().first().copied().unwrap_or(0.0).max(1.0);
        let stored = sys.len().min(sys.rank());
        for j in 0..stored {
            for k in 0..stored {
                let pj = &sys.eigenfunctions()[j];
                let pk = &sys.eigenfunctions()[k];
                let ip = inner_product(pj, pk).unwrap();
                let delta = if j == k { 1.0 } else { 0.0 };
                prop_assert!((ip - delta).abs() <= 1e-8);
                let s: f64 = x
                    .iter()
                    .map(|c| inner_product(c, pj).unwrap() * inner_product(c, pk).unwrap())
                    .sum::<f64>() / n;
                prop_assert!((s - sys.eigenvalues()[j] * delta).abs() <= 1e-8 * scale);
            }
        }
        let trace: f64 = x.iter().map(|c| l2_norm(c).powi(2)).sum::<f64>() / n;
        let lam: f64 = sys.eigenvalues().iter().sum();
        prop_assert!((trace - lam).abs() <= 1e-8 * scale);
        prop_assert!(sys.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(sys.eigenvalues().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn slope_is_sign_invariant(d in dataset(6..14), mult in 0.5..4.0f64, flip in 0usize..3) {
        let dist = pairwise_distances(d.t()).unwrap();
        let h = mult * dist.median().unwrap();
        let path = FplmPath::new(&d, &dist, h, KernelSpec::Quadratic, 3).unwrap();
        prop_assume!(path.eigensystem().rank() >= 3);
        let base = path.model(3).unwrap();
        let flipped = path.model_with(&path.eigensystem().with_flipped_sign(flip), 3).unwrap();
        prop_assert!(curves_close(&base.b_hat, &flipped.b_hat, 1e-12));
    }

    #[test]
    fn uniform_huge_bandwidth_matches_flm(d in dataset(5..12), m in 1usize..4) {
        let h = pairwise_distances(d.t()).unwrap().max_distance() * 2.0 + 1.0;
        let cfg = FitConfig::new(m, Bandwidth::Absolute(h), KernelSpec::Uniform);
        let fplm = fit_fplm(&d, &cfg);
        let flm = fit_flm(d.x(), d.y(), m);
        match (fplm, flm) {
            (Ok(a), Ok(b)) => prop_assert!(curves_close(&a.b_hat, &b.b_hat, 1e-10)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "outcomes differ: {:?} vs {:?}", a.err(), b.err()),
        }
    }

    #[test]
    fn tiny_bandwidth_interpolates(d in dataset(3..12), m in 1usize..3) {
        let dist = pairwise_distances(d.t()).unwrap();
        let h = dist.min_positive().unwrap() * 0.5;
        let model = fit_fplm(&d, &FitConfig::new(m, Bandwidth::Absolute(h), KernelSpec::Quadratic)).unwrap();
        for i in 0..d.len() {
            prop_assert_eq!(model.predict(&d.x()[i], &d.t()[i]).unwrap(), d.y()[i]);
        }
    }

    #[test]
    fn coefficients_are_nested(d in dataset(6..14), mult in 0.5..4.0f64) {
        let dist = pairwise_distances(d.t()).unwrap();
        let h = mult * dist.median().unwrap();
        let path = FplmPath::new(&d, &dist, h, KernelSpec::Quadratic, 4).unwrap();
        let rank = path.eigensystem().rank().min(4);
        for m in 1..rank {
            let small = path.model(m).unwrap();
            let large = path.model(m + 1).unwrap();
            prop_assert_eq!(&small.coefficients[..], &large.coefficients[..m]);
        }
    }

    #[test]
    fn fit_is_linear_in_y(d in dataset(6..14), mult in 0.5..4.0f64) {
        let cfg = FitConfig::new(2, Bandwidth::Multiplier(mult), KernelSpec::Quadratic);
        let Ok(one) = fit_fplm(&d, &cfg) else { return Ok(()); };
        let doubled: Vec<f64> = d.y().iter().map(|v| 2.0 * v).collect();
        let d2 = FunctionalDataset::new(d.x().to_vec(), d.t().to_vec(), doubled).unwrap();
        let two = fit_fplm(&d2, &cfg).unwrap();
        prop_assert!(curves_close(&one.b_hat.scale(2.0), &two.b_hat, 1e-10));
        for (a, b) in one.partial_residuals.iter().zip(&two.partial_residuals) {
            prop_assert!(close(2.0 * a, *b, 1e-10));
        }
    }

    #[test]
    fn xi_drives_t(seed in any::<u64>()) {
        let g = Grid::unit(51).unwrap();
        let basis = SeriesBasis::new(&g, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, xi) = basis.sample_x(&mut rng);
        prop_assert_eq!(&x, &basis.x_from_scores(&xi));
        let t = sample_t(&mut rng, &g, xi[0], xi[1], true).unwrap();
        let (a, d) = dependent_shift(xi[0], xi[1]);
        prop_assert!((t.values()[0] - d).abs() <= 1e-15);
        // T(1) − T(0) = sin ω + a − π with sin ω ∈ [−1, 1].
        let slope = t.values()[50] - t.values()[0] - (a - std::f64::consts::PI);
        prop_assert!(slope.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn curve_csv_round_trips(c in curves(0..6)) {
        let text = curves_to_csv(&grid(), &c).unwrap();
        let (g, back) = parse_curves(&text).unwrap();
        prop_assert_eq!(g, grid());
        prop_assert_eq!(back, c);
    }

    #[test]
    fn model_file_round_trips(d in dataset(5..10), probe_x in curve(), probe_t in curve()) {
        let cfg = FitConfig::new(1, Bandwidth::Multiplier(3.0), KernelSpec::Triangular);
        let model = fit_fplm(&d, &cfg).unwrap();
        let text = ModelFile::from_model(&model).to_json();
        let back = ModelFile::from_json_str(&text).unwrap().to_model().unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(
            back.predict(&probe_x, &probe_t).ok(),
            model.predict(&probe_x, &probe_t).ok()
        );
    }

    #[test]
    fn curve_parser_never_panics(s in "[0-9eE.,+\\- \n]{0,200}") {
        let _ = parse_curves(&s);
    }

    #[test]
    fn json_parsers_never_panic(s in ".{0,200}") {
        let _ = fplr::cliio::Manifest::from_json_str(&s);
        let _ = ModelFile::from_json_str(&s);
    }

    #[test]
    fn median_matches_sorted_definition(t in curves(2..12)) {
        let d: DistanceMatrix = pairwise_distances(&t).unwrap();
        let mut v = d.upper_triangle();
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let want = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
        prop_assert_eq!(d.median().unwrap(), want);
    }
}
