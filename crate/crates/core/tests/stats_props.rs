use omega_lab::experiment::{pearson, Category};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[test]
fn categories_partition_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bins = [(0.999, 1.0), (0.98, 0.999), (0.95, 0.98), (0.90, 0.95), (0.0, 0.90)];
    for _ in 0..1_000_000 {
        let x: f64 = rng.gen();
        let c = Category::from_accuracy(x);
        let hits: Vec<usize> = bins
            .iter()
            .enumerate()
            .filter(|(i, (lo, hi))| if *i == 0 { x > *lo && x <= *hi } else { x >= *lo && x < *hi })
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hits.len(), 1, "{x}");
        assert_eq!(Category::ALL[hits[0]], c, "{x}");
    }
}

proptest! {
    #[test]
    fn pearson_affine_invariance(
        xs in prop::collection::vec(-1e3f64..1e3, 3..40),
        a in 0.01f64..100.0,
        b in -1e3f64..1e3,
        neg in any::<bool>(),
    ) {
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        let a = if neg { -a } else { a };
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let r = pearson(&xs, &ys).unwrap();
        prop_assert!((r.r - a.signum()).abs() < 1e-12, "{}", r.r);
    }

    #[test]
    fn pearson_p_matches_students_t(
        pairs in prop::collection::vec((-10f64..10.0, -10f64..10.0), 4..60),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let Ok(res) = pearson(&x, &y) else { return Ok(()) };
        prop_assume!(res.r.abs() < 0.999_999);
        let df = (res.n - 2) as f64;
        let t = res.r * (df / (1.0 - res.r * res.r)).sqrt();
        let want = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t.abs()));
        prop_assert!((res.p - want).abs() < 1e-9, "{} vs {}", res.p, want);
        prop_assert!((0.0..=1.0).contains(&res.p));
    }
}
