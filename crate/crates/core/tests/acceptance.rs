//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured runtime (run with `--nocapture` to see them). Exact domains
//! assert exact replay; the float quaternion domain asserts the stated
//! tolerances.

use commlab::canonical::{sylvester_solve, tri_zero_trace_commutator, ScalarPoly};
use commlab::cert;
use commlab::error::AlgebraError;
use commlab::factor::{
    find_regularizing_lambda, q_gt_n_recursion, skew_commutators_sl, sl_difference,
    two_commutators_field, two_commutators_quaternion, waring_split_2x2, PartTag,
};
use commlab::freealg::{parse_poly, FreePoly};
use commlab::imagelab::{
    self, p_commutator_set_check, sum_length_profile, sweep_m2f2, FiniteRing, FiniteRingSpec,
    PCommVerdict, SweepSummary,
};
use commlab::matrix::{commutator, dieudonne_value, sl_test, Matrix};
use commlab::scalar::{quat_diff_unit_norms, Scalar, ScalarDomain};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::OnceLock;
use std::time::Instant;

fn gf(p: u64) -> ScalarDomain {
    ScalarDomain::prime_field(p).unwrap()
}

fn report(criterion: usize, name: &str, started: Instant, limit_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion {criterion:2} [{name}]: PASS ({detail}, {elapsed:.2}s)");
    assert!(
        elapsed <= limit_s,
        "criterion {criterion} exceeded its {limit_s}s budget: {elapsed:.2}s"
    );
}

static SWEEP: OnceLock<SweepSummary> = OnceLock::new();

fn sweep() -> &'static SweepSummary {
    SWEEP.get_or_init(|| sweep_m2f2(2, 3).expect("sweep runs"))
}

#[test]
fn criterion_01_m2f2_exceptional_sweep() {
    let t0 = Instant::now();
    let summary = sweep();
    assert_eq!(summary.total_polys, (1 << 15) - 1);
    assert_eq!(
        summary.square_refutations, 0,
        "a third outcome would refute the square-span dichotomy"
    );
    // every verdict is one of the two branches (or the hypothesis fails)
    assert_eq!(
        summary.central_valued + summary.full_ring + summary.exceptional_gf4,
        summary.total_polys
    );
    // when the exceptional branch is hit it equals the displayed 4-set
    // element-for-element (that exact set comparison is what the classifier
    // performs); the witnesses record which polynomials land there
    assert_eq!(summary.exceptional_gf4, summary.gf4_witnesses.len());
    report(
        1,
        "m2f2-square-span-dichotomy",
        t0,
        60.0,
        &format!(
            "{} polys: {} central, {} full ring, {} exceptional",
            summary.total_polys, summary.central_valued, summary.full_ring, summary.exceptional_gf4
        ),
    );
}

#[test]
fn criterion_02_m2f2_additive_classification() {
    let t0 = Instant::now();
    let summary = sweep();
    assert_eq!(summary.additive_refutations, 0, "no third outcome");
    assert_eq!(
        summary.contains_commutators
            + summary.additive_exceptional_offdiag
            + summary.additive_exceptional_gf4
            + summary.central_valued,
        summary.total_polys
    );
    report(
        2,
        "m2f2-additive-classification",
        t0,
        60.0,
        &format!(
            "{} commutator-span, {} + {} exceptional",
            summary.contains_commutators,
            summary.additive_exceptional_offdiag,
            summary.additive_exceptional_gf4
        ),
    );
}

#[test]
fn criterion_03_two_commutators_field() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x03);
    let mut count = 0usize;
    for (n, q) in [(2usize, 3u64), (3, 5), (4, 7)] {
        let domain = gf(q);
        for trial in 0..200u64 {
            let a = Matrix::random_gf(&mut rng, domain, n);
            let cert = two_commutators_field(&a, trial).unwrap();
            // exact replay
            assert_eq!(cert.replay_value().unwrap(), a);
            // first factor invertible
            assert_eq!(cert.parts[0].tag, PartTag::Commutator);
            assert!(cert.parts[0].value().unwrap().is_invertible());
            count += 1;
        }
    }
    report(3, "two-commutators-field", t0, 30.0, &format!("{count} exact replays"));
}

#[test]
fn criterion_04_two_commutators_quaternion() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x04);
    let mut worst = 0.0f64;
    for n in 2..=4usize {
        for trial in 0..100u64 {
            let a = Matrix::random_quat_f64(&mut rng, n);
            let cert = two_commutators_quaternion(&a, trial).unwrap();
            let residual = cert.replay_value().unwrap().relative_residual(&a);
            assert!(residual <= 1e-6, "n={n} trial={trial} residual={residual}");
            assert!(cert.parts[0].value().unwrap().is_invertible());
            worst = worst.max(residual);
        }
    }
    report(
        4,
        "two-commutators-quaternion",
        t0,
        60.0,
        &format!("300 replays, worst residual {worst:.2e}"),
    );
}

#[test]
fn criterion_05_q_gt_n_recursion() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x05);
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let a = Matrix::random_quat_f64(&mut rng, 3);
        let cert = q_gt_n_recursion(&a, trial).unwrap();
        let residual = cert.replay_value().unwrap().relative_residual(&a);
        assert!(residual <= 1e-6, "trial={trial} residual={residual}");
        worst = worst.max(residual);
    }
    // the two displayed block-bracket identities, expanded exactly over
    // rational quaternions
    let d = ScalarDomain::QuaternionRational;
    let mut checked = 0usize;
    while checked < 100 {
        let e1 = Matrix::random_quat_rat(&mut rng, 2, 2);
        let e2 = Matrix::random_quat_rat(&mut rng, 2, 2);
        let e3 = Matrix::random_quat_rat(&mut rng, 2, 2);
        let e4 = Matrix::random_quat_rat(&mut rng, 2, 2);
        let di = Scalar::quat_rat_i64(0, 1, 0, 0);
        let dj = Scalar::quat_rat_i64(0, 0, 1, 0);
        // first display: [diag(d1, E1), diag(d2, E2)] = [d1,d2] (+) [E1,E2]
        let xf = Matrix::scalar_matrix(1, &di).direct_sum(&e1).unwrap();
        let yf = Matrix::scalar_matrix(1, &dj).direct_sum(&e2).unwrap();
        let lhs = commutator(&xf, &yf).unwrap();
        let rhs = Matrix::scalar_matrix(1, &commlab::scalar::bracket(&di, &dj))
            .direct_sum(&commutator(&e1, &e2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        // second display: [diag(lambda, E3), [[0, beta],[gamma, E4]]] has
        // corner blocks (lambda - E3)-coupled and trailing block [E3, E4]
        let Ok(lambda) = find_regularizing_lambda(&e3) else {
            continue;
        };
        let shifted = e3.sub(&Matrix::scalar_matrix(2, &lambda)).unwrap();
        let Ok(shift_inv) = shifted.inverse() else {
            continue;
        };
        let b_row = Matrix::random_quat_rat(&mut rng, 2, 2).submatrix(0, 0, 1, 2);
        let c_col = Matrix::random_quat_rat(&mut rng, 2, 2).submatrix(0, 0, 2, 1);
        let dq = commlab::scalar::bracket(&di, &dj); // 2k
        let beta = b_row
            .scale_left(&dq.inv().unwrap())
            .mul(&shift_inv)
            .unwrap()
            .neg();
        let gamma = shift_inv.mul(&c_col).unwrap();
        let xs = Matrix::scalar_matrix(1, &lambda).direct_sum(&e3).unwrap();
        let mut ys = Matrix::zeros(d, 3, 3);
        ys.set_block(0, 1, &beta);
        ys.set_block(1, 0, &gamma);
        ys.set_block(1, 1, &e4);
        let lhs = commutator(&xs, &ys).unwrap();
        let mut expect = Matrix::zeros(d, 3, 3);
        expect.set_block(0, 1, &b_row.scale_left(&dq.inv().unwrap()));
        expect.set_block(1, 0, &shifted.mul(&gamma).unwrap());
        expect.set_block(1, 1, &commutator(&e3, &e4).unwrap());
        assert_eq!(lhs, expect, "second displayed identity");
        checked += 1;
    }
    report(
        5,
        "q-gt-n-recursion",
        t0,
        30.0,
        &format!("50 replays (worst {worst:.2e}), 100 exact block identities"),
    );
}

#[test]
fn criterion_06_regularizing_lambda_boundary() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x06);
    let mut successes = 0usize;
    // q > n: the search always succeeds
    for (n, q) in [(2usize, 3u64), (2, 5), (3, 5), (3, 7), (4, 7), (2, 7)] {
        let domain = gf(q);
        for _ in 0..167 {
            let a = Matrix::random_gf(&mut rng, domain, n);
            let lambda = find_regularizing_lambda(&a).unwrap();
            let shifted = a
                .sub(&Matrix::scalar_matrix(n, &lambda))
                .unwrap();
            assert!(shifted.is_invertible());
            successes += 1;
        }
    }
    assert!(successes >= 1000);
    // the companion counterexample: g(x) = x^q - x over GF(q), n = q
    for q in [2u64, 3] {
        let domain = gf(q);
        let n = q as usize;
        let mut c = Matrix::zeros(domain, n, n);
        for i in 1..n {
            c[(i, i - 1)] = Scalar::one(domain);
        }
        // companion of x^q - x: last column holds -a_0..-a_{q-1} with a_1 = -1
        c[(1, n - 1)] = &c[(1, n - 1)] + &Scalar::one(domain);
        match find_regularizing_lambda(&c) {
            Err(AlgebraError::NoLambda(count)) => assert_eq!(count, q as usize),
            other => panic!("expected NoLambda, got {other:?}"),
        }
        // -- every shift is singular
        for v in 0..q {
            let lambda = Scalar::from_i64(domain, v as i64);
            let shifted = c.sub(&Matrix::scalar_matrix(n, &lambda)).unwrap();
            assert!(!shifted.is_invertible());
        }
    }
    report(
        6,
        "regularizing-lambda-boundary",
        t0,
        10.0,
        &format!("{successes} successes, 2 counterexamples"),
    );
}

#[test]
fn criterion_07_tri_zero_trace_commutator() {
    let t0 = Instant::now();
    let mut exhaustive = 0usize;
    // exhaustive zero-trace upper triangular families
    for (n, p) in [(2usize, 2u64), (2, 3), (3, 2)] {
        let domain = gf(p);
        let slots = n * (n + 1) / 2;
        let total = (p as usize).pow(slots as u32);
        for code in 0..total {
            let mut t = Matrix::zeros(domain, n, n);
            let mut v = code;
            for i in 0..n {
                for j in i..n {
                    t[(i, j)] = Scalar::from_i64(domain, (v % p as usize) as i64);
                    v /= p as usize;
                }
            }
            if !t.trace().unwrap().is_zero() {
                continue;
            }
            let (x, y) = tri_zero_trace_commutator(&t).unwrap();
            assert_eq!(commutator(&x, &y).unwrap(), t);
            exhaustive += 1;
        }
    }
    // 1000 random rational instances, sizes 2..6
    let mut rng = StdRng::seed_from_u64(0x07);
    let q = ScalarDomain::Rational;
    for trial in 0..1000 {
        let n = 2 + (trial % 5);
        let mut t = Matrix::zeros(q, n, n);
        let mut diag_sum = Scalar::zero(q);
        for i in 0..n {
            for j in i..n {
                t[(i, j)] = Scalar::from_i64(q, rng.random_range(-5..=5));
            }
            if i < n - 1 {
                diag_sum = &diag_sum + &t[(i, i)];
            }
        }
        t[(n - 1, n - 1)] = -&diag_sum;
        let (x, y) = tri_zero_trace_commutator(&t).unwrap();
        assert_eq!(commutator(&x, &y).unwrap(), t);
    }
    report(
        7,
        "tri-zero-trace-commutator",
        t0,
        20.0,
        &format!("{exhaustive} exhaustive + 1000 random exact replays"),
    );
}

/// Dense linear-system oracle for AX - XB = C over a field.
fn sylvester_dense_oracle(a: &Matrix, b: &Matrix, c: &Matrix) -> Option<Matrix> {
    let d = a.domain();
    let n = a.rows();
    let m = b.rows();
    let mut rows = vec![vec![Scalar::zero(d); n * m]; n * m];
    for i in 0..n {
        for j in 0..m {
            let row = i * m + j;
            for k in 0..n {
                rows[row][k * m + j] = &rows[row][k * m + j] + &a[(i, k)];
            }
            for k in 0..m {
                rows[row][i * m + k] = &rows[row][i * m + k] - &b[(k, j)];
            }
        }
    }
    let lhs = Matrix::from_rows(d, rows).unwrap();
    let rhs_rows: Vec<Vec<Scalar>> = (0..n * m).map(|t| vec![c[(t / m, t % m)].clone()]).collect();
    let rhs = Matrix::from_rows(d, rhs_rows).unwrap();
    let x = lhs.solve_right(&rhs)?;
    let mut out = Matrix::zeros(d, n, m);
    for i in 0..n {
        for j in 0..m {
            out[(i, j)] = x[(i * m + j, 0)].clone();
        }
    }
    Some(out)
}

fn charpoly_2x2(a: &Matrix) -> ScalarPoly {
    let tr = a.trace().unwrap();
    let det = a.determinant().unwrap();
    ScalarPoly::new(vec![det, -&tr, Scalar::one(a.domain())]).unwrap()
}

#[test]
fn criterion_08_sylvester_matches_dense_oracle() {
    let t0 = Instant::now();
    let domain = gf(3);
    let ring = FiniteRing::new(FiniteRingSpec::new(2, 3).unwrap()).unwrap();
    let mut exhaustive = 0usize;
    // exhaustive over all (A, B) pairs of M2(GF(3)) admitting p = charpoly(A)
    // with p(B) invertible; C fixed to a spread of representatives
    let c_reps: Vec<Matrix> = [0u32, 1, 5, 80, 33]
        .iter()
        .map(|&id| ring.to_matrix(id))
        .collect();
    for a_id in 0..81u32 {
        let a = ring.to_matrix(a_id);
        let p = charpoly_2x2(&a);
        for b_id in 0..81u32 {
            let b = ring.to_matrix(b_id);
            if !p.eval_matrix(&b).unwrap().is_invertible() {
                continue;
            }
            for c in &c_reps {
                let x = sylvester_solve(&a, &b, c, &p).unwrap();
                let lhs = a.mul(&x).unwrap().sub(&x.mul(&b).unwrap()).unwrap();
                assert_eq!(&lhs, c);
                let oracle = sylvester_dense_oracle(&a, &b, c).unwrap();
                assert_eq!(x, oracle);
                exhaustive += 1;
            }
        }
    }
    // 500 random rational instances
    let q = ScalarDomain::Rational;
    let mut rng = StdRng::seed_from_u64(0x08);
    let mut random_checked = 0usize;
    while random_checked < 500 {
        let a = Matrix::random_rational(&mut rng, 2, 3);
        let b = Matrix::random_rational(&mut rng, 2, 3);
        let c = Matrix::random_rational(&mut rng, 2, 3);
        let p = charpoly_2x2(&a);
        if !p.eval_matrix(&b).unwrap().is_invertible() {
            continue;
        }
        let x = sylvester_solve(&a, &b, &c, &p).unwrap();
        let lhs = a.mul(&x).unwrap().sub(&x.mul(&b).unwrap()).unwrap();
        assert_eq!(lhs, c);
        let oracle = sylvester_dense_oracle(&a, &b, &c).unwrap();
        assert_eq!(x, oracle);
        random_checked += 1;
        let _ = q;
    }
    report(
        8,
        "sylvester-dense-oracle",
        t0,
        20.0,
        &format!("{exhaustive} exhaustive + 500 random exact matches"),
    );
}

#[test]
fn criterion_09_quat_diff_unit_norms() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x09);
    let rand_quat = |rng: &mut StdRng, scale: f64| {
        Scalar::quat_f64(
            rng.random_range(-1.0..1.0) * scale,
            rng.random_range(-1.0..1.0) * scale,
            rng.random_range(-1.0..1.0) * scale,
            rng.random_range(-1.0..1.0) * scale,
        )
    };
    let mut inside = 0usize;
    while inside < 10_000 {
        let q = rand_quat(&mut rng, 1.0);
        if q.norm_f64().sqrt() > 2.0 {
            continue;
        }
        let (u, v) = quat_diff_unit_norms(&q).unwrap();
        assert!((u.norm_f64() - 1.0).abs() <= 1e-10);
        assert!((v.norm_f64() - 1.0).abs() <= 1e-10);
        assert!((&(&u - &v) - &q).norm_f64().sqrt() <= 1e-10);
        inside += 1;
    }
    let mut outside = 0usize;
    while outside < 1000 {
        let q = rand_quat(&mut rng, 4.0);
        if q.norm_f64().sqrt() <= 2.0 + 1e-6 {
            continue;
        }
        assert!(matches!(
            quat_diff_unit_norms(&q),
            Err(AlgebraError::NormTooLarge { .. })
        ));
        outside += 1;
    }
    report(9, "quat-diff-unit-norms", t0, 5.0, "10000 inside + 1000 boundary");
}

fn random_sl(rng: &mut StdRng, n: usize) -> Matrix {
    loop {
        let a = Matrix::random_quat_f64(rng, n);
        if !a.is_invertible() {
            continue;
        }
        let v = dieudonne_value(&a).unwrap();
        if v < 1e-3 {
            continue;
        }
        let scale = Scalar::quat_f64(1.0 / v.powf(1.0 / n as f64), 0.0, 0.0, 0.0);
        let b = a.scale_left(&scale);
        if sl_test(&b).unwrap() {
            return b;
        }
    }
}

#[test]
fn criterion_10_skew_commutators() {
    let t0 = Instant::now();
    let domain = ScalarDomain::quaternion_float();
    // canned central cases reproduce the displayed commutators exactly
    let i2 = Matrix::scalar_matrix(2, &Scalar::quat_unit(domain, 1));
    let j2 = Matrix::scalar_matrix(2, &Scalar::quat_unit(domain, 2));
    let cert = skew_commutators_sl(&Matrix::identity(domain, 2), 0).unwrap();
    assert_eq!(cert.parts[0].operands[0], i2);
    assert_eq!(cert.parts[0].operands[1], i2);
    let cert = skew_commutators_sl(&Matrix::identity(domain, 2).neg(), 0).unwrap();
    assert_eq!(cert.parts[0].operands[0], i2);
    assert_eq!(cert.parts[0].operands[1], j2);
    // random SL matrices
    let mut rng = StdRng::seed_from_u64(0x10);
    let mut worst = 0.0f64;
    for n in 2..=4usize {
        for trial in 0..34u64 {
            let a = random_sl(&mut rng, n);
            let cert = skew_commutators_sl(&a, trial).unwrap();
            let residual = cert.replay_value().unwrap().relative_residual(&a);
            assert!(residual <= 1e-6, "n={n} residual {residual}");
            worst = worst.max(residual);
            for part in &cert.parts {
                for z in &part.operands {
                    let sq = z.pow(2).unwrap();
                    let target = Matrix::identity(domain, n).neg();
                    let err = sq.residual(&target);
                    assert!(err <= 1e-7 * sq.max_norm().max(1.0), "operand square {err}");
                }
            }
        }
    }
    report(
        10,
        "skew-commutators-sl",
        t0,
        60.0,
        &format!("102 SL replays, worst residual {worst:.2e}"),
    );
}

#[test]
fn criterion_11_sl_difference() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x11);
    // exact over Q and GF(7)
    for trial in 0..250u64 {
        let a = Matrix::random_rational(&mut rng, 2 + (trial % 2) as usize, 4);
        let cert = sl_difference(&a, trial).unwrap();
        assert_eq!(cert.replay_value().unwrap(), a);
        for part in &cert.parts {
            assert!(part.value().unwrap().determinant().unwrap().is_one());
        }
    }
    let d7 = gf(7);
    for trial in 0..250u64 {
        let a = Matrix::random_gf(&mut rng, d7, 3);
        let cert = sl_difference(&a, trial).unwrap();
        assert_eq!(cert.replay_value().unwrap(), a);
        for part in &cert.parts {
            assert!(part.value().unwrap().determinant().unwrap().is_one());
        }
    }
    // float quaternions
    let mut worst = 0.0f64;
    for n in 2..=3usize {
        for trial in 0..50u64 {
            let a = Matrix::random_quat_f64(&mut rng, n);
            let cert = sl_difference(&a, trial).unwrap();
            let residual = cert.replay_value().unwrap().relative_residual(&a);
            assert!(residual <= 1e-8, "difference residual {residual}");
            for part in &cert.parts {
                let v = dieudonne_value(&part.value().unwrap()).unwrap();
                assert!((v - 1.0).abs() <= 1e-7, "dieudonne {v}");
                worst = worst.max((v - 1.0).abs());
            }
        }
    }
    report(
        11,
        "sl-difference",
        t0,
        30.0,
        &format!("500 exact + 100 float (worst dieudonne error {worst:.2e})"),
    );
}

#[test]
fn criterion_12_polynomial_commutator_spans() {
    let t0 = Instant::now();
    let polys: Vec<(&str, Vec<i64>)> = vec![
        ("x^2", vec![0, 0, 1]),
        ("x^3", vec![0, 0, 0, 1]),
        ("x^2+x", vec![0, 1, 1]),
    ];
    for p in [3u64, 5] {
        let spec = FiniteRingSpec::new(2, p).unwrap();
        for (name, coeffs) in &polys {
            let r = p_commutator_set_check(coeffs, &spec).unwrap();
            assert_eq!(
                r.verdict,
                PCommVerdict::Equal,
                "p = {name} on 2x2@{p}: {:?}",
                r.verdict
            );
        }
    }
    // on M2(GF(2)) each lands in a branch of the dichotomy
    let spec2 = FiniteRingSpec::new(2, 2).unwrap();
    let mut branches = Vec::new();
    for (name, coeffs) in &polys {
        let r = p_commutator_set_check(coeffs, &spec2).unwrap();
        assert_ne!(r.verdict, PCommVerdict::Refutation, "p = {name}");
        branches.push(format!("{name}: {:?}", r.verdict));
    }
    report(
        12,
        "polynomial-commutator-spans",
        t0,
        60.0,
        &branches.join(", "),
    );
}

#[test]
fn criterion_13_sum_length_profile() {
    let t0 = Instant::now();
    let spec = FiniteRingSpec::new(2, 3).unwrap();
    let ring = FiniteRing::new(spec).unwrap();
    let commutators = imagelab::commutator_set(&ring);
    let (reaches, minimal_n) = sum_length_profile(&ring, &commutators, 2);
    assert!(reaches, "sums of products of two commutators fill M2(GF(3))");
    assert!(minimal_n >= 1 && minimal_n <= 81);
    report(
        13,
        "sum-length-profile",
        t0,
        30.0,
        &format!("reaches the ring with minimal N = {minimal_n}"),
    );
}

#[test]
fn criterion_14_tilde_equivalence_corpus() {
    let t0 = Instant::now();
    let spec = FiniteRingSpec::new(2, 2).unwrap();
    let domain = gf(2);
    let mut rng = StdRng::seed_from_u64(0x14);
    let mut corpus: Vec<FreePoly> = vec![
        parse_poly("x1*x2", domain).unwrap(),
        parse_poly("x1*x2 - x2*x1", domain).unwrap(),
        parse_poly("x2^2*x1*x3^2*x1 - x3*x1*x2^2*x3", domain).unwrap(),
    ];
    while corpus.len() < 50 {
        // random polynomial: up to 3 variables, up to 4 terms, degree <= 4
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..=4) {
            let len = rng.random_range(1..=4);
            let word: Vec<u32> = (0..len).map(|_| rng.random_range(1..=3)).collect();
            terms.push((Scalar::one(domain), word));
        }
        let f = FreePoly::from_terms(domain, terms).unwrap();
        if !f.is_zero() {
            corpus.push(f);
        }
    }
    for f in &corpus {
        let outcome = imagelab::tilde_equivalence_check(f, &spec).unwrap();
        assert!(
            outcome.is_ok(),
            "membership equivalence failed for {f} at {outcome:?}"
        );
    }
    report(
        14,
        "tilde-equivalence",
        t0,
        60.0,
        &format!("{} polynomials, all exhaustively equivalent", corpus.len()),
    );
}

#[test]
fn criterion_15_waring_split_2x2() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x15);
    for _ in 0..500 {
        let a = Matrix::random_quat_rat(&mut rng, 2, 3);
        let split = waring_split_2x2(&a).unwrap();
        assert_eq!(split.certificate.replay_value().unwrap(), a);
    }
    let d7 = gf(7);
    for _ in 0..500 {
        let a = Matrix::random_gf(&mut rng, d7, 2);
        let split = waring_split_2x2(&a).unwrap();
        assert_eq!(split.certificate.replay_value().unwrap(), a);
    }
    report(15, "waring-split-2x2", t0, 10.0, "1000 exact replays");
}

#[test]
fn criterion_16_certificate_round_trip() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x16);
    let mut files = Vec::new();
    // representatives from criteria 3, 4, 5, 10, 11, 15
    let a = Matrix::random_gf(&mut rng, gf(5), 3);
    files.push(cert::factorization_to_file(
        &two_commutators_field(&a, 1).unwrap(),
        1e-12,
    ));
    let a = Matrix::random_quat_f64(&mut rng, 3);
    files.push(cert::factorization_to_file(
        &two_commutators_quaternion(&a, 1).unwrap(),
        1e-6,
    ));
    let a = Matrix::random_quat_f64(&mut rng, 3);
    files.push(cert::factorization_to_file(
        &q_gt_n_recursion(&a, 1).unwrap(),
        1e-6,
    ));
    let a = random_sl(&mut rng, 2);
    files.push(cert::factorization_to_file(
        &skew_commutators_sl(&a, 1).unwrap(),
        1e-6,
    ));
    let a = Matrix::random_rational(&mut rng, 2, 3);
    files.push(cert::factorization_to_file(
        &sl_difference(&a, 1).unwrap(),
        1e-12,
    ));
    let a = Matrix::random_quat_rat(&mut rng, 2, 2);
    files.push(cert::factorization_to_file(
        &waring_split_2x2(&a).unwrap().certificate,
        1e-12,
    ));
    for file in &files {
        let json = cert::to_json(file);
        let parsed = cert::from_json(&json).unwrap();
        cert::replay_file(&parsed).unwrap();
        // tampering: perturb the first operand entry of the first part
        let mut bad = parsed.clone();
        let parts = bad.parts.as_mut().unwrap();
        let entry = &mut parts[0].operands[0][0][0];
        *entry = if entry.starts_with('9') {
            "8".to_string()
        } else {
            "9".to_string()
        };
        assert!(
            cert::replay_file(&bad).is_err(),
            "tampered {} certificate must fail",
            file.kind
        );
    }
    report(
        16,
        "certificate-round-trip",
        t0,
        10.0,
        &format!("{} certificates verified, all tampers detected", files.len()),
    );
}
