use proptest::prelude::*;
use qgallager::bounds::{binomial_tail, erasure_e0, renyi_lower_bound_check};
use qgallager::channel::{apply_to_b, random_channel};
use qgallager::divergence::{hockey_stick, renyi_divergence, RenyiOrder};
use qgallager::exponent::{g_function, k_lambda, SParam};
use qgallager::io::{parse_operator, OperatorFile};
use qgallager::linalg::{
    eig_hermitian, matrix_power, partial_trace, positive_part, random_bipartite_density, random_density,
    random_hermitian, Bipartite, CMatrix, Psd, Subsystem,
};

fn order() -> impl Strategy<Value = RenyiOrder> {
    (1.01f64..=2.0).prop_map(|l| RenyiOrder::new(l).unwrap())
}

fn through(ch: &qgallager::channel::QuantumChannel, x: &Psd) -> Psd {
    let b = Bipartite::new(1, x.dim(), x.as_hermitian().clone()).unwrap();
    Psd::new(apply_to_b(ch, &b).unwrap().into_op()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstructs(d in 1usize..=12, seed: u64) {
        let h = random_hermitian(d, seed);
        let spec = eig_hermitian(&h);
        let err = spec.reconstruct().sub(&h).unwrap().frobenius_norm() / h.frobenius_norm().max(1e-300);
        prop_assert!(err <= 1e-9);
        let u = &spec.eigenvectors;
        let gram = u.adjoint() * u - CMatrix::identity(d, d);
        prop_assert!(gram.norm() <= 1e-10);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn jordan_parts(d in 1usize..=8, seed: u64) {
        let h = random_hermitian(d, seed);
        let plus = positive_part(&h);
        let minus = positive_part(&h.scale(-1.0));
        let rebuilt = plus.sub(&minus).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&h) <= 1e-10);
        let product = plus.matrix() * minus.matrix();
        prop_assert!(product.norm() <= 1e-9);
    }

    #[test]
    fn power_semigroup(d in 1usize..=6, seed: u64, s in -0.5f64..1.5, t in -0.5f64..1.5) {
        let p = random_density(d, seed).into_psd();
        let lhs = matrix_power(&p, s).matrix() * matrix_power(&p, t).matrix();
        let rhs = matrix_power(&p, s + t);
        let scale = rhs.frobenius_norm().max(1.0);
        prop_assert!((lhs - rhs.matrix()).norm() <= 1e-8 * scale);
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving(da in 1usize..=3, db in 1usize..=3, s1: u64, s2: u64, a in -2.0f64..2.0) {
        let x = random_bipartite_density(da, db, s1);
        let y = random_bipartite_density(da, db, s2);
        let combo = Bipartite::new(da, db, x.op().add(&y.op().scale(a)).unwrap()).unwrap();
        for which in [Subsystem::A, Subsystem::B] {
            let lhs = partial_trace(&combo, which).unwrap();
            let rhs = partial_trace(&x, which).unwrap().add(&partial_trace(&y, which).unwrap().scale(a)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
            prop_assert!((lhs.trace() - combo.op().trace()).abs() <= 1e-12);
        }
    }

    #[test]
    fn renyi_data_processing(seed: u64, d_out in 1usize..=3, env in 1usize..=3, ord in order()) {
        let rho = random_density(2, seed).into_psd();
        let sigma = random_density(2, seed ^ 0x5555).into_psd();
        let ch = random_channel(2, d_out, env.max(2usize.div_ceil(d_out)), seed.wrapping_add(1)).unwrap();
        let before = renyi_divergence(&rho, &sigma, ord).unwrap();
        let after = renyi_divergence(&through(&ch, &rho), &through(&ch, &sigma), ord).unwrap();
        prop_assert!(after <= before + 1e-9);
        prop_assert!(before >= -1e-12);
    }

    #[test]
    fn hockey_data_processing(seed: u64, gamma in 1.0f64..6.0) {
        let rho = random_density(3, seed).into_psd();
        let sigma = random_density(3, seed ^ 0xAAAA).into_psd();
        let ch = random_channel(3, 2, 2, seed.wrapping_add(7)).unwrap();
        let before = hockey_stick(&rho, &sigma, gamma).unwrap();
        let after = hockey_stick(&through(&ch, &rho), &through(&ch, &sigma), gamma).unwrap();
        prop_assert!(after <= before + 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&before));
    }

    #[test]
    fn k_lambda_data_processing(seed: u64, ord in order()) {
        let rho = random_bipartite_density(2, 3, seed);
        let ch = random_channel(3, 2, 2, seed.wrapping_add(3)).unwrap();
        let out = apply_to_b(&ch, &rho).unwrap();
        prop_assert!(k_lambda(&out, ord) <= k_lambda(&rho, ord) + 1e-9);
    }

    #[test]
    fn k_lambda_within_entropic_range(seed: u64, ord in order(), da in 1usize..=3, db in 1usize..=3) {
        // Conditional Renyi entropy −K_λ lies in [−ln min(d_A, d_B), ln d_A].
        let rho = random_bipartite_density(da, db, seed);
        let k = k_lambda(&rho, ord);
        prop_assert!(k >= -(da as f64).ln() - 1e-9);
        prop_assert!(k <= (da.min(db) as f64).ln() + 1e-9);
    }

    #[test]
    fn shifted_g_nondecreasing(seed: u64, da in 2usize..=3, db in 2usize..=3) {
        let rho = random_bipartite_density(da, db, seed);
        let ln_da = (da as f64).ln();
        let vals: Vec<f64> = (0..=32)
            .map(|k| {
                let s = (-0.5 + k as f64 / 64.0).min(0.0);
                g_function(&rho, SParam::new(s).unwrap()) + (s + 1.0) * ln_da
            })
            .collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] - w[0] >= -1e-9);
        }
    }

    #[test]
    fn erasure_e0_concave_in_s(p in 0.0f64..=1.0, d in 2usize..=5, s in -0.49f64..-0.01) {
        let h = 0.005;
        let f = |x: f64| erasure_e0(p, d, SParam::new(x).unwrap());
        prop_assert!(f(s - h) + f(s + h) - 2.0 * f(s) <= 1e-12);
    }

    #[test]
    fn binomial_tail_is_a_cdf(n in 1usize..200, p in 0.0f64..=1.0) {
        let mut prev = 0.0;
        for m in 0..=n {
            let t = binomial_tail(n, m, p).unwrap();
            prop_assert!(t >= prev - 1e-12 && t <= 1.0);
            prev = t;
        }
        prop_assert!((prev - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn renyi_lower_bound_never_negative(n in 1usize..50, rate in 0.0f64..2.0, u in 0.0f64..=1.0, ord in order()) {
        let floor = (-(n as f64) * rate).exp();
        let f = (floor + (1.0 - floor) * u).clamp(floor, 1.0);
        prop_assume!(f > 0.0);
        prop_assert!(renyi_lower_bound_check(f, n, rate, ord).unwrap() >= -1e-10);
    }

    #[test]
    fn operator_json_round_trip(entries in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 8)) {
        let m = CMatrix::from_fn(2, 2, |i, j| {
            let k = 2 * (2 * i + j);
            num_complex::Complex64::new(entries[k], entries[k + 1])
        });
        let file = OperatorFile::new(vec![2], m).unwrap();
        let back = parse_operator(&file.to_json().unwrap()).unwrap();
        for (a, b) in back.matrix.iter().zip(file.matrix.iter()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}

