use super::*;
use crate::coset::EdcpParams;
use crate::rng::seeded;
use crate::statevec::DensityOperator;

fn challenger(n: usize, q: u64, r: u64, s: &[u64], seed: u64) -> Challenger {
    let params = EdcpParams::with_smallest_prime(n, q, r).unwrap();
    Challenger::with_secret(params, ZqVector::new(q, s.to_vec()), seed).unwrap()
}

fn phase(q: u64, label: &[u64], value: u64) -> PhaseState {
    PhaseState {
        label: ZqVector::new(q, label.to_vec()),
        value,
        issuer: 0,
    }
}

/// Σ_{j<2} |j⟩|x + js⟩, QFT on the second register, project onto y.
fn dense_phase_oracle(q: u64, s: u64, x: u64, y: u64) -> StateVector<f64> {
    let space = IndexSpace::new(vec![2, q as usize]).unwrap();
    let mut amps = vec![Complex::new(0.0, 0.0); space.dim()];
    for j in 0..2 {
        amps[space.encode(&[j as usize, ((x + j * s) % q) as usize])] = Complex::new(1.0, 0.0);
    }
    let st = StateVector::normalized(space, amps)
        .unwrap()
        .qft(1, Direction::Forward)
        .unwrap();
    let sp = st.space().clone();
    let (_, post) = st.project(|i| sp.digit(i, 1) as u64, y).unwrap();
    post.discard_register(1).unwrap()
}

#[test]
fn phase_state_matches_dense_pipeline() {
    let mut ch = challenger(1, 4, 2, &[1], 5);
    let mut rng = seeded(1);
    let mut seen = 0;
    for _ in 0..200 {
        let ps = edcp_to_phase(&mut ch, &mut rng).unwrap();
        let y = ps.label().get(0);
        let oracle = dense_phase_oracle(4, 1, 3, y);
        assert!(
            ps.to_dense().unwrap().equal_up_to_phase(&oracle, 1e-12),
            "y = {y}"
        );
        if y == 2 {
            seen += 1;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let minus = StateVector::new(
                IndexSpace::new(vec![2]).unwrap(),
                vec![Complex::new(h, 0.0), Complex::new(-h, 0.0)],
            )
            .unwrap();
            assert!(ps.to_dense().unwrap().equal_up_to_phase(&minus, 1e-12));
        }
    }
    assert!(seen > 0);
}

#[test]
fn phase_labels_uniform_and_zero_secret() {
    let q = 8;
    let trials = 10_000;
    let mut ch = challenger(1, q, 4, &[0], 2);
    let mut rng = seeded(3);
    let mut counts = vec![0usize; q as usize];
    for _ in 0..trials {
        let ps = edcp_to_phase(&mut ch, &mut rng).unwrap();
        assert_eq!(ps.value(), 0);
        counts[ps.label().get(0) as usize] += 1;
    }
    let tv: f64 = counts
        .iter()
        .map(|&c| (c as f64 / trials as f64 - 1.0 / q as f64).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 4.0 / (trials as f64).sqrt(), "tv {tv}");
}

#[test]
fn sieve_examples() {
    let mut rng = seeded(4);
    loop {
        let (ok, out) = sieve_combine(phase(8, &[5], 3), phase(8, &[3], 1), &mut rng).unwrap();
        if ok {
            assert_eq!(out.label().get(0), 2);
            assert_eq!(out.value(), 2);
            break;
        }
        assert_eq!(out.label().get(0), 0);
    }
    loop {
        let (ok, out) = sieve_combine(phase(8, &[4], 6), phase(8, &[4], 6), &mut rng).unwrap();
        if ok {
            let plus = phase(8, &[0], 0).to_dense().unwrap();
            assert!(out.to_dense().unwrap().equal_up_to_phase(&plus, 1e-12));
            break;
        }
    }
}

#[test]
fn sieve_rate_and_dense_agreement() {
    let trials = 10_000;
    let mut succ = 0;
    let mut rng = seeded(9);
    let mut rng_sym = seeded(10);
    let mut rng_dense = seeded(10);
    for _ in 0..trials {
        let a = phase(8, &[rng.gen_range(0..8)], rng.gen_range(0..8));
        let b = phase(8, &[rng.gen_range(0..8)], rng.gen_range(0..8));
        let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
        let diff = a.label().sub(b.label());
        let (ok, out) = sieve_combine(a, b, &mut rng_sym).unwrap();
        let (dok, dout) = sieve_combine_dense(&da, &db, &mut rng_dense).unwrap();
        assert_eq!(ok, dok);
        assert!(out.to_dense().unwrap().equal_up_to_phase(&dout, 1e-12));
        if ok {
            assert_eq!(out.label(), &diff);
            succ += 1;
        }
    }
    let f = succ as f64 / trials as f64;
    assert!((f - 0.5).abs() <= 0.015, "rate {f}");
}

#[test]
fn sieve_rejects_mixed_sources() {
    let mut rng = seeded(0);
    let mut b = phase(8, &[1], 0);
    b.issuer = 1;
    assert!(sieve_combine(phase(8, &[1], 0), b, &mut rng).is_err());
    assert!(sieve_combine(phase(8, &[1], 0), phase(4, &[1], 0), &mut rng).is_err());
}

fn dense_candidate(labels: &[u64], q: u64, v: u64) -> StateVector<f64> {
    let states: Vec<PhaseState> = labels.iter().map(|&y| phase(q, &[y], v * y % q)).collect();
    let mut joint = states[0].to_dense().unwrap();
    for s in &states[1..] {
        joint = joint.tensor(&s.to_dense().unwrap()).unwrap();
    }
    joint
}

/// (1/q) Σ_v ⟨ψ_v|E_v|ψ_v⟩ from the dense POVM.
fn dense_success(labels: &[u64], q: u64) -> f64 {
    let povm = pgm_povm_dense(labels, q).unwrap();
    (0..q)
        .map(|v| {
            let rho = DensityOperator::pure(&dense_candidate(labels, q, v)).unwrap();
            rho.expectation(&povm[v as usize]).re
        })
        .sum::<f64>()
        / q as f64
}

#[test]
fn pgm_closed_form_examples() {
    assert!((pgm_success_probability(&[1, 1], 2) - 1.0).abs() < 1e-12);
    assert!((dense_success(&[1, 1], 2) - 1.0).abs() < 1e-9);
    for q in [2, 5, 8] {
        assert!((pgm_success_probability(&[0, 0, 0], q) - 1.0 / q as f64).abs() < 1e-12);
        assert!((dense_success(&[0, 0, 0], q) - 1.0 / q as f64).abs() < 1e-9);
    }
}

#[test]
fn pgm_average_success_q5_t4() {
    let mut rng = seeded(12);
    let mut total = 0.0;
    for _ in 0..100 {
        let labels: Vec<u64> = (0..4).map(|_| rng.gen_range(1..5)).collect();
        let closed = pgm_success_probability(&labels, 5);
        let dense = dense_success(&labels, 5);
        assert!(
            (closed - dense).abs() < 1e-8,
            "{labels:?}: {closed} vs {dense}"
        );
        total += dense;
    }
    assert!(total / 100.0 >= 0.25, "{}", total / 100.0);
}

#[test]
fn pgm_povm_is_complete() {
    for (labels, q) in [
        (vec![1, 3, 2], 5u64),
        (vec![0, 0], 3),
        (vec![1, 2, 4, 7], 16),
    ] {
        let povm = pgm_povm_dense(&labels, q).unwrap();
        let d = 1usize << labels.len();
        for i in 0..d {
            for j in 0..d {
                let s: Complex<f64> = povm.iter().map(|e| e[i * d + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn pgm_distribution_matches_dense_povm() {
    let (labels, q) = ([1u64, 3, 2, 4], 5u64);
    let povm = pgm_povm_dense(&labels, q).unwrap();
    for s in 0..q {
        let psi = dense_candidate(&labels, q, s);
        let fast = pgm_distribution(&psi, &labels, q);
        let rho = DensityOperator::pure(&psi).unwrap();
        for v in 0..q as usize {
            assert!((fast[v] - rho.expectation(&povm[v]).re).abs() < 1e-9);
        }
    }
}

#[test]
fn pgm_recover_guards() {
    let mut rng = seeded(1);
    let many: Vec<_> = (0..15).map(|_| phase(4, &[0, 1], 0)).collect();
    assert!(matches!(
        pgm_recover(&many, 1, &mut rng),
        Err(Error::DimensionCap { .. })
    ));
    assert!(pgm_recover(&many[..3], 0, &mut rng).is_err());
    assert!(pgm_recover(&[], 0, &mut rng).is_err());
}

#[test]
fn kuperberg_single_coordinate() {
    let mut rng = seeded(21);
    let mut ok = 0;
    for t in 0..20 {
        let mut ch = challenger(1, 16, 2, &[11], t);
        let rep =
            kuperberg_recover(&mut ch, 0, 1, kuperberg_pool_exponent(1, 16, 1), &mut rng).unwrap();
        assert!(rep.survivors.is_empty());
        ok += (rep.recovered == 11) as usize;
    }
    assert!(ok >= 10, "{ok}/20");
}

#[test]
fn kuperberg_n2_q16() {
    let mut rng = seeded(22);
    let ell = kuperberg_pool_exponent(2, 16, 1);
    let mut ok = 0;
    let runs = 20;
    for t in 0..runs {
        let s = [rng.gen_range(0..16), rng.gen_range(0..16)];
        let mut ch = challenger(2, 16, 2, &s, 100 + t);
        let rep = kuperberg_recover(&mut ch, 1, 1, ell, &mut rng).unwrap();
        assert_eq!(rep.survivors.len(), 1);
        assert!(rep.survivors[0] * 8 >= rep.pool);
        assert!(rep.samples as f64 <= 16.0 * 16f64.powf(ell));
        assert_eq!(rep.correct, rep.recovered == s[1]);
        ok += rep.correct as usize;
    }
    assert!(ok * 2 >= runs as usize, "{ok}/{runs}");
}

#[test]
fn kuperberg_exhausts_small_pool() {
    let mut rng = seeded(2);
    let mut ch = challenger(2, 16, 2, &[1, 2], 0);
    assert!(matches!(
        kuperberg_recover(&mut ch, 1, 1, 0.5, &mut rng),
        Err(Error::PoolExhausted { .. })
    ));
}

#[test]
fn fourier_attack_examples() {
    let mut rng = seeded(30);
    let mut ch = challenger(1, 4, 4, &[3], 1);
    assert_eq!(
        fourier_attack_r_eq_q(&mut ch, &mut rng)
            .unwrap()
            .secret
            .get(0),
        3
    );
    let mut ch = challenger(2, 5, 5, &[0, 0], 1);
    assert!(fourier_attack_r_eq_q(&mut ch, &mut rng)
        .unwrap()
        .secret
        .is_zero());
    let mut ch = challenger(1, 8, 4, &[3], 1);
    assert!(matches!(
        fourier_attack_r_eq_q(&mut ch, &mut rng),
        Err(Error::BadParams(_))
    ));
}

#[test]
fn fourier_attack_n2_q5() {
    let mut rng = seeded(31);
    let runs = 1000;
    let mut ok = 0;
    for t in 0..runs {
        let s = [rng.gen_range(0..5), rng.gen_range(0..5)];
        let mut ch = challenger(2, 5, 5, &s, t);
        let rep = fourier_attack_r_eq_q(&mut ch, &mut rng).unwrap();
        assert_eq!(rep.secret.coords(), &s);
        ok += (rep.samples <= 8) as usize;
    }
    assert!(ok as f64 >= 0.99 * runs as f64, "{ok}/{runs}");
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sieve_labels_are_sum_or_difference(q in 2u64..32, y1 in 0u64..32, y2 in 0u64..32, v1 in 0u64..32, v2 in 0u64..32, seed: u64) {
            let (a, b) = (phase(q, &[y1, 1], v1 % q), phase(q, &[y2, 3], v2 % q));
            let (ok, out) = sieve_combine(a.clone(), b.clone(), &mut seeded(seed)).unwrap();
            let want = if ok { a.label().sub(b.label()) } else { a.label().add(b.label()) };
            prop_assert_eq!(out.label(), &want);
            let value = if ok { (a.value() + q - b.value()) % q } else { (a.value() + b.value()) % q };
            prop_assert_eq!(out.value(), value);
        }

        #[test]
        fn pgm_success_between_uniform_and_one(q in 2u64..12, labels in proptest::collection::vec(0u64..12, 1..8)) {
            let labels: Vec<u64> = labels.into_iter().map(|y| y % q).collect();
            let p = pgm_success_probability(&labels, q);
            prop_assert!(p >= 1.0 / q as f64 - 1e-12 && p <= 1.0 + 1e-12);
        }
    }
}
