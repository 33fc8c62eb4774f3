use hdseg::{BufferConfig, BufferSelection, Error, LossStore, SelectionScope};
use proptest::prelude::*;

/// Top-`m` indices by (loss desc, index asc) via a full stable sort.
fn reference_hard(losses: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..losses.len()).collect();
    idx.sort_by(|&a, &b| losses[b].total_cmp(&losses[a]));
    let mut top = idx[..m].to_vec();
    top.sort_unstable();
    top
}

fn loss_vec() -> impl Strategy<Value = Vec<f64>> {
    // small value alphabet forces plenty of ties
    proptest::collection::vec(prop_oneof![0.0f64..2.0, (0u8..4).prop_map(|v| v as f64 * 0.5)], 0..400)
}

fn ratio() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(5.0), Just(10.0), Just(20.0), Just(50.0), Just(100.0), 0.1f64..100.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn selection_matches_oracle(losses in loss_vec(), k in ratio(), seed in any::<u64>(), epoch in 0u64..20) {
        let n = losses.len();
        let store = LossStore::from_losses(losses.clone()).unwrap();
        let cfg = BufferConfig::new(k, seed);
        let sel = store.select(&cfg, epoch).unwrap();

        let hard_n = (n as f64 * k / 200.0).floor() as usize;
        let total = (n as f64 * k / 100.0).floor() as usize;
        prop_assert_eq!(cfg.sizes(n), (hard_n, total - hard_n));
        prop_assert_eq!(sel.hard.len(), hard_n);
        prop_assert_eq!(sel.random.len(), total - hard_n);
        prop_assert_eq!(&sel.hard, &reference_hard(&losses, hard_n));

        let merged = sel.merged();
        prop_assert_eq!(merged.len(), total);
        prop_assert!(merged.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(sel.random.iter().all(|i| *i < n && !sel.hard.contains(i)));
        if k == 100.0 {
            prop_assert_eq!(merged, (0..n).collect::<Vec<_>>());
        }

        // same inputs, same selection
        prop_assert_eq!(&sel, &store.select(&cfg, epoch).unwrap());
    }

    #[test]
    fn record_losses_only_touches_buffer(losses in loss_vec(), seed in any::<u64>(), fresh in 0.0f64..2.0) {
        let mut store = LossStore::from_losses(losses.clone()).unwrap();
        let sel = store.select(&BufferConfig::new(20.0, seed), 1).unwrap();
        let updates: Vec<(usize, f64)> = sel.merged().into_iter().map(|i| (i, fresh)).collect();
        store.record_losses(&sel, &updates).unwrap();
        for (i, (&now, &was)) in store.losses().iter().zip(&losses).enumerate() {
            if sel.contains(i) {
                prop_assert_eq!(now, fresh);
            } else {
                prop_assert_eq!(now, was);
            }
        }
    }

    #[test]
    fn batch_scope_selects_within_each_batch(losses in proptest::collection::vec(0.0f64..2.0, 1..300), b in 1usize..80, seed in any::<u64>()) {
        let store = LossStore::from_losses(losses.clone()).unwrap();
        let mut cfg = BufferConfig::new(20.0, seed);
        cfg.scope = SelectionScope::Batch;
        let ranges: Vec<_> = (0..losses.len()).step_by(b).map(|s| s..(s + b).min(losses.len())).collect();
        let sel = store.select_batches(&cfg, 3, &ranges).unwrap();
        let mut expect_hard = Vec::new();
        for r in &ranges {
            let (h, _) = cfg.sizes(r.len());
            let local = reference_hard(&losses[r.clone()], h);
            expect_hard.extend(local.into_iter().map(|i| i + r.start));
        }
        let mut got = sel.hard.clone();
        got.sort_unstable();
        expect_hard.sort_unstable();
        prop_assert_eq!(got, expect_hard);
    }
}

#[test]
fn random_half_is_uniform_over_complement() {
    // N=20, k=20: 2 hard points, 2 random points from the 18 others.
    let losses: Vec<f64> = (0..20).map(|i| if i == 4 || i == 11 { 1.5 } else { 0.1 }).collect();
    let store = LossStore::from_losses(losses).unwrap();
    let cfg = BufferConfig::new(20.0, 99);
    let draws = 10_000u64;
    let mut counts = [0u64; 20];
    for epoch in 0..draws {
        let sel = store.select(&cfg, epoch).unwrap();
        assert_eq!(sel.hard, vec![4, 11]);
        assert_eq!(sel.random.len(), 2);
        for &i in &sel.random {
            counts[i] += 1;
        }
    }
    let p = 2.0 / 18.0;
    let mean = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        if i == 4 || i == 11 {
            assert_eq!(c, 0);
        } else {
            assert!(
                (c as f64 - mean).abs() <= 3.0 * sigma,
                "index {i} drawn {c} times, expected {mean:.0} ± {:.0}",
                3.0 * sigma
            );
        }
    }
}

#[test]
fn losses_persist_across_epochs() {
    let losses = vec![0.0, 0.3, 0.0, 1.2, 0.7, 0.0, 0.9, 0.2, 0.0, 0.5];
    let mut store = LossStore::from_losses(losses.clone()).unwrap();
    let cfg = BufferConfig::new(40.0, 5);
    let sel = store.select(&cfg, 1).unwrap();
    assert_eq!(sel.hard, vec![3, 6]);
    let updates: Vec<(usize, f64)> = sel.merged().into_iter().map(|i| (i, 0.0)).collect();
    store.record_losses(&sel, &updates).unwrap();
    for i in (0..10).filter(|&i| !sel.contains(i)) {
        assert_eq!(store.losses()[i], losses[i]);
    }
    // the formerly hardest points drop out of the next hard half
    let next = store.select(&cfg, 2).unwrap();
    assert!(!next.hard.contains(&3) && !next.hard.contains(&6));
}

#[test]
fn selection_errors() {
    let store = LossStore::new(5);
    assert!(matches!(store.select(&BufferConfig::new(5.0, 0), 0), Err(Error::Uninitialized)));

    let mut store = LossStore::from_losses(vec![0.1; 10]).unwrap();
    for k in [0.0, -1.0, 100.5, f64::NAN] {
        assert!(matches!(store.select(&BufferConfig::new(k, 0), 0), Err(Error::Config(_))), "k={k}");
    }
    let sel = BufferSelection { hard: vec![1], random: vec![] };
    assert!(matches!(store.record_losses(&sel, &[(2, 0.0)]), Err(Error::Contract(_))));
    assert!(matches!(store.record_losses(&sel, &[(1, f64::NAN)]), Err(Error::Contract(_))));
    assert!(matches!(store.record_losses(&sel, &[(1, 0.2), (3, 0.2)]), Err(Error::Contract(_))));
    assert_eq!(store.losses()[1], 0.1);
    assert!(LossStore::from_losses(vec![-0.5]).is_err());
}
