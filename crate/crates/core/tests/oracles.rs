use omega_lab::acceptance::{accept_up, accept_up_bruteforce, accept_up_matexp, cycle_from, suffix_profile, Label, UpWord};
use omega_lab::fixtures;
use omega_lab::hoa::{complete, emit_hoa, parse_hoa, validate_dba};
use omega_lab::sampling::{ClassTarget, Sampler};
use omega_lab::Dba;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn words_up_to(alphabet: u32, max_len: usize, min_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u32>> = vec![vec![]];
    for len in 0..=max_len {
        if len >= min_len {
            out.extend(layer.iter().cloned());
        }
        layer = layer
            .iter()
            .flat_map(|w| (0..alphabet).map(move |s| {
                let mut w = w.clone();
                w.push(s);
                w
            }))
            .collect();
    }
    out
}

fn three_way(d: &Dba, w: &UpWord) -> Label {
    let a = accept_up(d, w);
    assert_eq!(a, accept_up_matexp(d, w), "matexp disagrees on {w:?}");
    assert_eq!(a, accept_up_bruteforce(d, w), "brute force disagrees on {w:?}");
    a
}

fn random_word(d: &Dba, rng: &mut ChaCha8Rng, max_encoded: usize) -> UpWord {
    let n = rng.gen_range(2..=max_encoded);
    let k = rng.gen_range(1..n);
    let sym = d.alphabet().assignments() as u32;
    let u = (0..k - 1).map(|_| rng.gen_range(0..sym)).collect();
    let v = (0..n - k).map(|_| rng.gen_range(0..sym)).collect();
    UpWord::new(u, v)
}

#[test]
fn exhaustive_small_words_one_prop_fixtures() {
    let us = words_up_to(2, 3, 0);
    let vs = words_up_to(2, 3, 1);
    let mut checked = 0;
    for (name, d) in fixtures::fixtures() {
        if d.prop_count() != 1 {
            continue;
        }
        for u in &us {
            for v in &vs {
                three_way(&d, &UpWord::new(u.clone(), v.clone()));
                checked += 1;
            }
        }
        assert!(checked > 0, "{name}");
    }
    // 15 prefixes × 14 periods × 7 one-prop fixtures
    assert_eq!(checked, 15 * 14 * 7);
}

#[test]
fn random_words_every_fixture() {
    for (i, (_, d)) in fixtures::fixtures().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let sampler = Sampler::new(&d, 100).unwrap();
        let mut accepted = 0;
        for j in 0..10_000 {
            let w = if j % 2 == 0 {
                random_word(&d, &mut rng, 512)
            } else {
                let n = rng.gen_range(2..=512);
                let t = if j % 4 == 1 { ClassTarget::Accept } else { ClassTarget::Reject };
                match sampler.sample_sequence(n, t, &mut rng) {
                    Ok(r) => r.word(),
                    Err(_) => random_word(&d, &mut rng, 512),
                }
            };
            if three_way(&d, &w).is_accept() {
                accepted += 1;
            }
        }
        assert!(accepted > 0);
    }
}

#[test]
fn rotation_and_pumping() {
    for (i, (_, d)) in fixtures::fixtures().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + i as u64);
        for _ in 0..2000 {
            let w = random_word(&d, &mut rng, 40);
            let base = accept_up(&d, &w);
            if w.u.is_empty() {
                let mut rot = w.v.clone();
                rot.rotate_left(1);
                assert_eq!(base, accept_up(&d, &UpWord::new(vec![w.v[0]], rot)));
            }
            let vv = [w.v.clone(), w.v.clone()].concat();
            assert_eq!(base, accept_up(&d, &UpWord::new(w.u.clone(), vv)));
            let uv = [w.u.clone(), w.v.clone()].concat();
            assert_eq!(base, accept_up(&d, &UpWord::new(uv, w.v.clone())));
        }
    }
}

#[test]
fn cycle_entered_within_state_count() {
    let d = fixtures::cycle(32);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let w = random_word(&d, &mut rng, 64);
        let p = suffix_profile(&d, &w.v);
        let c = cycle_from(&p, d.run_prefix(&w.u));
        assert!(c.entry + c.period <= d.n_states());
    }
}

#[test]
fn fig1_language_facts() {
    let d = fixtures::fig1();
    let ab = 0b11;
    assert_eq!(three_way(&d, &UpWord::new(vec![], vec![ab])), Label::Accept);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let mut w = random_word(&d, &mut rng, 128);
        // force a = 0 on the first symbol
        let first = if w.u.is_empty() { &mut w.v[0] } else { &mut w.u[0] };
        *first &= !1;
        assert_eq!(three_way(&d, &w), Label::Reject);
    }
}

/// `G a` with the rejecting sink left out: `!a` has no transition.
const PARTIAL_G_A: &str = "HOA: v1
States: 2
Start: 0
AP: 1 \"a\"
Acceptance: 1 Inf(0)
--BODY--
State: 0 {0}
[0] 1
State: 1 {0}
[0] 0
--END--
";

fn partial_accepts(d: &Dba, w: &UpWord) -> Option<Label> {
    let mut q = d.initial();
    for &s in &w.u {
        q = d.try_step(q, s)?;
    }
    let n = d.n_states();
    let mut hit = false;
    for copy in 0..2 * n + 2 {
        let mut seen = d.is_accepting(q);
        for &s in &w.v {
            q = d.try_step(q, s)?;
            seen |= d.is_accepting(q);
        }
        if copy > n {
            hit |= seen;
        }
    }
    Some(Label::from_bool(hit))
}

#[test]
fn completion_preserves_acceptance() {
    let partial = validate_dba(&parse_hoa(PARTIAL_G_A).unwrap()).unwrap();
    assert!(!partial.is_complete());
    let full = complete(&partial);
    assert_eq!(full.n_states(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut inside, mut fell) = (0, 0);
    for _ in 0..5000 {
        let mut w = random_word(&full, &mut rng, 12);
        if rng.gen_bool(0.5) {
            w.u.iter_mut().chain(w.v.iter_mut()).for_each(|s| *s = 1);
        }
        match partial_accepts(&partial, &w) {
            Some(l) => {
                inside += 1;
                assert_eq!(three_way(&full, &w), l);
            }
            None => {
                fell += 1;
                assert_eq!(three_way(&full, &w), Label::Reject);
            }
        }
    }
    assert!(inside > 100 && fell > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emit_parse_is_idempotent(
        props in 1usize..=3,
        n in 1usize..=6,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let acc: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.4)).collect();
        let names = (0..props).map(|i| format!("p{i}")).collect();
        let d = Dba::from_fn(names, n, 0, &acc, |_, _| rng.gen_range(0..n as u32));
        let text = emit_hoa(&d);
        let back = validate_dba(&parse_hoa(&text).unwrap()).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(emit_hoa(&back), text);
    }
}
