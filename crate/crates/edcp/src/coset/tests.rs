use super::dense::DenseCoset;
use super::program::{compare_engines, run_symbolic, sample_dense_tree, Op};
use super::*;
use crate::rng::seeded;
use crate::statevec::DensityOperator;
use proptest::prelude::*;

fn params(n: usize, q: u64, r: u64) -> EdcpParams {
    EdcpParams::with_smallest_prime(n, q, r).unwrap()
}

fn fixed(n: usize, q: u64, r: u64, s: &[u64], x: &[u64], t: Option<u64>) -> CosetState {
    let p = params(n, q, r);
    let mut ch = Challenger::with_secret(p, ZqVector::new(q, s.to_vec()), 1).unwrap();
    ch.sample_with_offset(ZqVector::new(q, x.to_vec()), t)
        .unwrap()
}

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

#[test]
fn small_dense_image() {
    let st = fixed(1, 4, 2, &[3], &[1], None);
    let v = st.to_dense::<f64>().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // index = j·4 + y
    let mut want = vec![c(0.0); 8];
    want[1] = c(h);
    want[4] = c(h);
    for (a, b) in v.amps().iter().zip(&want) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn absent_phase_is_zero_phase() {
    let a = fixed(2, 9, 5, &[4, 7], &[1, 2], None);
    let b = fixed(2, 9, 5, &[4, 7], &[1, 2], Some(0));
    assert_eq!(a.support(), b.support());
    assert_eq!(a.phase_modulus(), b.phase_modulus());
    assert_eq!(a.phase_slope(), b.phase_slope());
    assert_eq!(a.to_dense::<f64>().unwrap(), b.to_dense::<f64>().unwrap());
}

#[test]
fn sign_phase_amplitudes() {
    let st = fixed(1, 4, 2, &[1], &[0], Some(1));
    let v = st.to_dense::<f64>().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((v.amp(0) - c(h)).norm() < 1e-12);
    assert!((v.amp(4 + 1) - c(-h)).norm() < 1e-12);
    assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn fresh_samples_are_normalized() {
    let mut ch = Challenger::new(params(2, 8, 6), 3);
    for t in 0..2 {
        let st = ch.sample(Some(t)).unwrap();
        assert!((st.to_dense::<f64>().unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }
}

fn success_probability(w: u64, target: u64) -> f64 {
    let st = fixed(1, 16, w, &[5], &[3], None);
    st.reduce_r_branches(target)
        .unwrap()
        .iter()
        .filter(|b| CosetState::reduce_succeeded(w, target, b.outcome))
        .map(|b| b.probability)
        .sum()
}

#[test]
fn reduce_examples() {
    assert_eq!(success_probability(4, 2), 1.0);
    assert!((success_probability(4, 3) - 0.75).abs() < 1e-15);
    let st = fixed(1, 16, 7, &[5], &[3], Some(1));
    let before = st.to_dense::<f64>().unwrap();
    let (ok, after) = st.reduce_r(7, &mut seeded(0)).unwrap();
    assert!(ok);
    assert_eq!(after.to_dense::<f64>().unwrap(), before);
}

#[test]
fn reduce_success_at_least_half() {
    for w in 2..=16 {
        for target in 1..=w {
            let exact = (w / target * target) as f64 / w as f64;
            let got = success_probability(w, target);
            // indicator branch keeps target/w
            let want = if 2 * target > w {
                target as f64 / w as f64
            } else {
                exact
            };
            assert!((got - want).abs() < 1e-12, "w={w} target={target}");
            assert!(got >= 0.5);
        }
    }
}

#[test]
fn reduce_output_is_fresh_sample_of_target_width() {
    let st = fixed(1, 8, 8, &[3], &[2], None);
    for b in st.reduce_r_branches(3).unwrap() {
        if !CosetState::reduce_succeeded(8, 3, b.outcome) {
            continue;
        }
        let out = b.state.unwrap();
        assert_eq!(out.width(), 3);
        assert_eq!(out.support(), Progression::full(3));
        // offset absorbs the shift: y(j) = x + (j + 3a)s
        let x2 = (2 + 3 * 3 * b.outcome) % 8;
        assert_eq!(out.offset().coords(), &[x2]);
    }
}

#[test]
fn project_examples() {
    let st = fixed(1, 4, 4, &[1], &[0], None);
    let level0 = st.project_branches(1).unwrap();
    assert_eq!(level0.len(), 1);
    assert_eq!(
        level0[0].state.as_ref().unwrap().support(),
        Progression::full(4)
    );

    let bs = st.project_branches(2).unwrap();
    assert_eq!(bs.len(), 2);
    for (cls, b) in bs.iter().enumerate() {
        assert_eq!(b.outcome, cls as u64);
        assert_eq!(b.probability, 0.5);
        let s = b.state.as_ref().unwrap().support();
        assert_eq!((s.stride, s.base, s.count), (2, cls as u64, 2));
    }

    // p^k ≥ r leaves a single basis state
    for b in st.project_branches(4).unwrap() {
        let v = b.state.unwrap().to_dense::<f64>().unwrap();
        assert_eq!(v.amps().iter().filter(|a| a.norm() > 0.0).count(), 1);
    }
}

#[test]
fn hybrid_counts() {
    let st = fixed(1, 9, 8, &[2], &[0], None);
    let bs = st.project_branches(3).unwrap();
    let counts: Vec<u64> = bs
        .iter()
        .map(|b| b.state.as_ref().unwrap().support().count)
        .collect();
    assert_eq!(counts, vec![3, 3, 2]);
    for b in &bs {
        let v = b.state.as_ref().unwrap().to_dense::<f64>().unwrap();
        let m = b.state.as_ref().unwrap().support().count as usize;
        assert_eq!(v.amps().iter().filter(|a| a.norm() > 0.0).count(), m);
    }
}

#[test]
fn phase_examples() {
    let st = fixed(1, 8, 4, &[3], &[1], None);
    let before = st.to_dense::<f64>().unwrap();
    let st = st.adversary_phase(&LinearForm::on_j(8, 0, 1)).unwrap();
    assert!(st
        .to_dense::<f64>()
        .unwrap()
        .equal_up_to_phase(&before, 1e-12));

    // encryption phase ω_p^{tj} read at modulus 8
    let st = st.adversary_phase(&LinearForm::on_j(2, 1, 1)).unwrap();
    assert_eq!((st.phase_modulus(), st.phase_slope()), (2, 1));

    // ω_8^{y − 3j} is constant on the coset
    let st = fixed(1, 8, 4, &[3], &[1], Some(1));
    let before = st.to_dense::<f64>().unwrap();
    let st = st.adversary_phase(&LinearForm::new(8, 5, vec![1])).unwrap();
    assert_eq!((st.phase_modulus(), st.phase_slope()), (2, 1));
    assert!(st
        .to_dense::<f64>()
        .unwrap()
        .equal_up_to_phase(&before, 1e-12));
}

#[test]
fn phase_modulus_cap() {
    let st = fixed(1, 4, 2, &[1], &[0], None);
    let err = st.adversary_phase(&LinearForm::on_j(9, 1, 1)).unwrap_err();
    assert!(matches!(err, Error::IncompatiblePhaseModulus { .. }));
    let st = fixed(1, 4, 2, &[1], &[0], None);
    // y-dependent phase needs M | c·q
    let err = st
        .adversary_phase(&LinearForm::new(8, 0, vec![1]))
        .unwrap_err();
    assert!(matches!(err, Error::IncompatiblePhaseModulus { .. }));
}

#[test]
fn measure_full_example() {
    let st = fixed(1, 4, 2, &[3], &[1], None);
    let mut dist = st.full_distribution();
    dist.sort_by_key(|d| d.0);
    assert_eq!(dist, vec![(1, 0.5), (4, 0.5)]);
    let mut rng = seeded(9);
    for _ in 0..50 {
        let st = fixed(1, 4, 2, &[3], &[1], None);
        let (j, y) = st.measure_full(&mut rng).unwrap();
        assert!((j, y.get(0)) == (0, 1) || (j, y.get(0)) == (1, 0));
    }
}

#[test]
fn measure_full_uniform() {
    let mut ch = Challenger::new(params(1, 16, 16), 4);
    let mut rng = seeded(5);
    let trials = 10_000;
    let mut hist = [0usize; 16];
    for _ in 0..trials {
        let (j, _) = ch.sample(None).unwrap().measure_full(&mut rng).unwrap();
        hist[j as usize] += 1;
    }
    let tol = 4.0 / (trials as f64).sqrt();
    for h in hist {
        assert!((h as f64 / trials as f64 - 1.0 / 16.0).abs() < tol);
    }
}

/// ρ_{s,r} entry-wise: (1/(r q^n))·[y − j s = y' − j' s].
fn coset_ensemble_oracle(q: u64, n: usize, r: u64, s: &[u64]) -> DensityOperator<f64> {
    let space = IndexSpace::edcp(r, q, n).unwrap();
    let d = space.dim();
    let qn = d / r as usize;
    let sv = ZqVector::new(q, s.to_vec());
    let key = |idx: usize| {
        let j = (idx / qn) as u64;
        ZqVector::from_index(q, n, idx % qn).add_scaled(&sv, q - j % q)
    };
    let mut m = vec![c(0.0); d * d];
    let w = 1.0 / (r as f64 * qn as f64);
    for a in 0..d {
        for b in 0..d {
            if key(a) == key(b) {
                m[a * d + b] = c(w);
            }
        }
    }
    DensityOperator::from_matrix(space, m).unwrap()
}

#[test]
fn fresh_ensemble_matches_coset_density() {
    for (n, q, r, s) in [
        (1usize, 4u64, 2u64, vec![3u64]),
        (1, 9, 5, vec![4]),
        (2, 4, 3, vec![1, 2]),
    ] {
        let qn = (q as usize).pow(n as u32);
        let members: Vec<(f64, StateVector<f64>)> = (0..qn)
            .map(|i| {
                let x = ZqVector::from_index(q, n, i);
                let st = fixed(n, q, r, &s, x.coords(), None);
                (1.0 / qn as f64, st.to_dense().unwrap())
            })
            .collect();
        let rho = DensityOperator::from_ensemble(&members).unwrap();
        let oracle = coset_ensemble_oracle(q, n, r, &s);
        assert!(rho.trace_distance(&oracle).unwrap() < 1e-9);
    }
}

#[test]
fn fourier_measurement_product_form() {
    let st = fixed(1, 8, 4, &[3], &[5], None);
    for b in st.fourier_branches().unwrap() {
        let u = b.outcome;
        let out = b.state.unwrap();
        assert_eq!(
            out.phase_slope() * (8 / out.phase_modulus()) % 8,
            (3 * u) % 8
        );
        assert!(out.first_register().is_ok());
    }
}

#[test]
fn first_register_refuses_entangled() {
    let st = fixed(1, 8, 4, &[3], &[5], None);
    assert!(st.first_register().is_err());
}

#[test]
fn records_round_trip() {
    let st = fixed(2, 9, 5, &[4, 7], &[1, 2], Some(2));
    let rec = st.to_record(Role::Full);
    let back = CosetState::from_record(rec).unwrap();
    assert_eq!(back, st);

    let view = st.to_record(Role::AdversaryView);
    assert!(view.effective_secret.is_none() && view.offset.is_none());
    assert!(CosetState::from_record(view).is_err());
}

#[test]
fn engines_agree_on_fixed_programs() {
    let programs: Vec<(usize, u64, u64, Vec<Op>)> = vec![
        (
            1,
            4,
            4,
            vec![Op::ReduceR(3), Op::ProjectJ(2), Op::MeasureFull],
        ),
        (
            1,
            8,
            8,
            vec![
                Op::ProjectJ(2),
                Op::Phase(LinearForm::new(8, 1, vec![2])),
                Op::QftFirst(Direction::Inverse),
            ],
        ),
        (
            2,
            4,
            4,
            vec![
                Op::FourierSecond,
                Op::Phase(LinearForm::on_j(4, 1, 2)),
                Op::QftFirst(Direction::Forward),
            ],
        ),
        (
            1,
            9,
            9,
            vec![
                Op::ReduceR(4),
                Op::Measure(LinearForm::new(3, 1, vec![1])),
                Op::MeasureSecond,
            ],
        ),
        (
            2,
            6,
            5,
            vec![
                Op::Subtract(ZqVector::new(6, vec![1, 5])),
                Op::ProjectJ(3),
                Op::MeasureFull,
            ],
        ),
    ];
    for (n, q, r, ops) in programs {
        let s: Vec<u64> = (0..n as u64).map(|i| (2 * i + 3) % q).collect();
        let x: Vec<u64> = (0..n as u64).map(|i| (i + 1) % q).collect();
        let st = fixed(n, q, r, &s, &x, Some(1));
        let dense = DenseCoset::from_symbolic(&st).unwrap();
        let cmp = compare_engines(&st, &dense, &ops).unwrap();
        assert!(cmp.tv < 1e-9, "{ops:?}: tv {}", cmp.tv);
        assert!(
            cmp.max_state_error < 1e-9,
            "{ops:?}: err {}",
            cmp.max_state_error
        );
    }
}

#[test]
fn coupled_transcripts_match() {
    let ops = vec![
        Op::ReduceR(6),
        Op::ProjectJ(2),
        Op::FourierSecond,
        Op::QftFirst(Direction::Inverse),
    ];
    let (n, q, r) = (1, 8, 8);
    let fresh = || fixed(n, q, r, &[5], &[2], Some(1));
    let st = fresh();
    let cmp = compare_engines(&st, &DenseCoset::from_symbolic(&st).unwrap(), &ops).unwrap();
    let mut mismatches = 0;
    for seed in 0..500 {
        let (a, _) = run_symbolic(fresh(), &ops, &mut seeded(seed)).unwrap();
        let b = sample_dense_tree(&cmp.dense_tree, &mut seeded(seed));
        mismatches += usize::from(a != b);
    }
    assert!(mismatches < 20, "{mismatches}");
}

#[test]
fn faulty_dense_engine_is_detected() {
    // a real phase (p = 2) would make the sign fault invisible
    let st = fixed(1, 9, 9, &[4], &[1], Some(1));
    let dense = DenseCoset::from_symbolic(&st)
        .unwrap()
        .with_fault(dense::Fault::QftSign);
    let ops = [Op::FourierSecond, Op::QftFirst(Direction::Forward)];
    let cmp = compare_engines(&st, &dense, &ops).unwrap();
    assert!(cmp.tv > 1e-3);
}

proptest! {
    #[test]
    fn hybrid_level_residues(seed in 0u64..1000, r in 2u64..=9, k in 0u32..3) {
        let pk = 3u64.pow(k);
        let mut ch = Challenger::new(params(1, 9, r), seed);
        let st = ch.sample(None).unwrap();
        let (cls, out) = st.project_j_mod(pk, &mut seeded(seed)).unwrap();
        prop_assert!(cls < pk);
        let sup = out.support();
        prop_assert!(sup.count <= r.div_ceil(pk));
        for i in 0..sup.count {
            prop_assert_eq!(sup.at(i) % pk, cls);
            prop_assert!(sup.at(i) < r);
        }
    }

    #[test]
    fn branch_probabilities_sum_to_one(seed in 0u64..1000, m in 1u64..10, a in 0u64..9, c0 in 0u64..9) {
        let mut ch = Challenger::new(params(1, 9, 9), seed);
        let st = ch.sample(Some(seed % 3)).unwrap();
        let form = LinearForm::new(3, a, vec![c0]);
        let total: f64 = st.linear_branches(&form).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let total: f64 = st.project_branches(m).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
