use std::collections::HashMap;

use pdvoice_core::FeatureMatrix;
use pdvoice_learn::mrmr::{mrmr_rank, quantile_bins, target_codes, QUANTILES};
use pdvoice_learn::sffs::{evaluate_subset, sffs, SffsParams};
use pdvoice_learn::{Learner, Mode, Objective, TreeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(cols: &[Vec<f64>]) -> FeatureMatrix {
    let n = cols[0].len();
    FeatureMatrix {
        columns: (0..cols.len()).map(|j| format!("f{j}")).collect(),
        subjects: (0..n).map(|i| format!("s{i}")).collect(),
        values: (0..n)
            .map(|i| cols.iter().map(|c| Some(c[i])).collect())
            .collect(),
        target: None,
    }
}

fn some(y: &[f64]) -> Vec<Option<f64>> {
    y.iter().map(|&v| Some(v)).collect()
}

/// Plug-in MI from a hash-map contingency table.
fn mi_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ma: HashMap<usize, f64> = HashMap::new();
    let mut mb: HashMap<usize, f64> = HashMap::new();
    for (&u, &v) in a.iter().zip(b) {
        *joint.entry((u, v)).or_default() += 1.0;
        *ma.entry(u).or_default() += 1.0;
        *mb.entry(v).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|(&(u, v), &c)| c / n * (c * n / (ma[&u] * mb[&v])).ln())
        .sum()
}

/// Greedy mRMR recomputed from scratch at every step over all candidates.
fn mrmr_oracle(cols: &[Vec<f64>], y: &[f64], k: usize) -> Vec<usize> {
    let codes: Vec<Vec<usize>> = cols
        .iter()
        .map(|c| quantile_bins(&some(c), QUANTILES))
        .collect();
    let t = target_codes(y, QUANTILES);
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for j in 0..cols.len() {
            if chosen.contains(&j) {
                continue;
            }
            let rel = mi_oracle(&codes[j], &t);
            let red = if chosen.is_empty() {
                0.0
            } else {
                chosen
                    .iter()
                    .map(|&s| mi_oracle(&codes[j], &codes[s]))
                    .sum::<f64>()
                    / chosen.len() as f64
            };
            if rel - red > best.1 + 1e-12 {
                best = (j, rel - red);
            }
        }
        chosen.push(best.0);
    }
    chosen
}

fn uniform(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
}

#[test]
fn mrmr_puts_target_copy_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let y: Vec<f64> = uniform(80, &mut rng);
    let cols = vec![
        uniform(80, &mut rng),
        uniform(80, &mut rng),
        y.clone(),
        uniform(80, &mut rng),
    ];
    let rank = mrmr_rank(&matrix(&cols), &some(&y), 4).unwrap();
    assert_eq!(rank[0], 2);
    let mut sorted = rank.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![0, 1, 2, 3]);
}

#[test]
fn mrmr_penalizes_duplicates() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 200;
    let a = uniform(n, &mut rng);
    let b = uniform(n, &mut rng);
    let y: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a + 0.8 * b).collect();
    let cols = vec![
        a.clone(),
        a.clone(),
        b.clone(),
        uniform(n, &mut rng),
        uniform(n, &mut rng),
    ];
    let rank = mrmr_rank(&matrix(&cols), &some(&y), 5).unwrap();
    assert_eq!(rank, mrmr_oracle(&cols, &y, 5));
    assert_eq!(rank[0], 0);
    let dup = rank.iter().position(|&j| j == 1).unwrap();
    let indep = rank.iter().position(|&j| j == 2).unwrap();
    assert!(indep < dup, "{rank:?}");
}

#[test]
fn mrmr_matches_greedy_oracle_on_random_sets() {
    for seed in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 60;
        let base: Vec<Vec<f64>> = (0..3).map(|_| uniform(n, &mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| base[0][i] - 0.5 * base[1][i] + 0.2 * base[2][i])
            .collect();
        let mut cols = base.clone();
        for _ in 0..5 {
            let w = uniform(3, &mut rng);
            let noise = uniform(n, &mut rng);
            cols.push(
                (0..n)
                    .map(|i| w[0] * base[0][i] + w[1] * base[1][i] + w[2] * noise[i])
                    .collect(),
            );
        }
        let rank = mrmr_rank(&matrix(&cols), &some(&y), cols.len()).unwrap();
        assert_eq!(rank, mrmr_oracle(&cols, &y, cols.len()), "seed {seed}");
    }
}

#[test]
fn mrmr_invariant_to_monotone_transform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 90;
    let cols: Vec<Vec<f64>> = (0..6).map(|_| uniform(n, &mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|i| cols[1][i] * 2.0 + cols[4][i]).collect();
    let mut warped = cols.clone();
    warped[1] = warped[1].iter().map(|v| (5.0 * v).exp()).collect();
    warped[4] = warped[4].iter().map(|v| -1.0 / (1.0 + v)).collect();
    let a = mrmr_rank(&matrix(&cols), &some(&y), 6).unwrap();
    let b = mrmr_rank(&matrix(&warped), &some(&y), 6).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mrmr_rejects_constant_target() {
    let cols = vec![vec![1.0, 2.0, 3.0, 4.0]];
    assert!(mrmr_rank(&matrix(&cols), &some(&[1.0; 4]), 1).is_err());
    assert!(mrmr_rank(&matrix(&cols), &some(&[1.0, 2.0, 3.0, 4.0]), 2).is_err());
}

fn cart() -> Learner {
    Learner::Cart(TreeParams::new(Mode::Classification))
}

/// Two classes on a jittered XOR grid plus two noise features.
fn xor_set(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 48;
    let (mut a, mut b, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let (qa, qb) = (i % 2, (i / 2) % 2);
        a.push(qa as f64 + rng.random_range(0.05..0.45));
        b.push(qb as f64 + rng.random_range(0.05..0.45));
        y.push((qa ^ qb) as f64);
    }
    let cols = vec![uniform(n, &mut rng), a, uniform(n, &mut rng), b];
    (cols, y)
}

fn subsets(p: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << p)).map(move |mask| (0..p).filter(|j| mask & (1 << j) != 0).collect())
}

#[test]
fn sffs_recovers_xor_pair_and_matches_exhaustive_search() {
    let (cols, y) = xor_set(7);
    let m = matrix(&cols);
    let t = some(&y);
    let best = subsets(4)
        .map(|s| evaluate_subset(&m, &s, &t, &cart(), Objective::Tss).0)
        .fold(f64::NEG_INFINITY, f64::max);
    let r = sffs(
        &m,
        &[0, 1, 2, 3],
        &t,
        &cart(),
        Objective::Tss,
        &SffsParams::default(),
    )
    .unwrap();
    assert_eq!(r.objective, best);
    assert!(
        r.indices.contains(&1) && r.indices.contains(&3),
        "{:?}",
        r.selected
    );
    assert!(r.objective > 1.9);
}

#[test]
fn sffs_single_perfect_feature() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 40;
    let y: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    let sep: Vec<f64> = y
        .iter()
        .map(|c| c * 2.0 + rng.random_range(0.0..1.0))
        .collect();
    let cols = vec![
        uniform(n, &mut rng),
        uniform(n, &mut rng),
        sep,
        uniform(n, &mut rng),
    ];
    let r = sffs(
        &matrix(&cols),
        &[0, 1, 2, 3],
        &some(&y),
        &cart(),
        Objective::Tss,
        &SffsParams::default(),
    )
    .unwrap();
    assert_eq!(r.selected, vec!["f2".to_string()]);
    assert_eq!(r.objective, 2.0);
}

#[test]
fn sffs_beats_best_single_feature() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(50 + seed);
        let n = 36;
        let cols: Vec<Vec<f64>> = (0..6).map(|_| uniform(n, &mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| cols[0][i] * 10.0 + cols[3][i] * 5.0)
            .collect();
        let learner = Learner::Cart(TreeParams::new(Mode::Regression));
        let m = matrix(&cols);
        let t = some(&y);
        let single = (0..6)
            .map(|j| evaluate_subset(&m, &[j], &t, &learner, Objective::NegMae).0)
            .fold(f64::NEG_INFINITY, f64::max);
        let r = sffs(
            &m,
            &[0, 1, 2, 3, 4, 5],
            &t,
            &learner,
            Objective::NegMae,
            &SffsParams::default(),
        )
        .unwrap();
        assert!(r.objective >= single);
        let mut names = r.selected.clone();
        names.dedup();
        assert_eq!(names.len(), r.selected.len());
    }
}

/// Plain forward selection with the same patience rule.
fn sfs_oracle(
    m: &FeatureMatrix,
    t: &[Option<f64>],
    learner: &Learner,
    patience: usize,
) -> (f64, Vec<usize>) {
    let p = m.n_cols();
    let mut current: Vec<usize> = Vec::new();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut stale = 0;
    while current.len() < p && stale < patience {
        let mut pick = (usize::MAX, f64::NEG_INFINITY);
        for j in 0..p {
            if current.contains(&j) {
                continue;
            }
            let mut s = current.clone();
            s.push(j);
            let v = evaluate_subset(m, &s, t, learner, Objective::NegMae).0;
            if pick.0 == usize::MAX || v > pick.1 {
                pick = (j, v);
            }
        }
        current.push(pick.0);
        if pick.1 > best.0 {
            best = (pick.1, current.clone());
            stale = 0;
        } else {
            stale += 1;
        }
    }
    best
}

#[test]
fn without_floating_sffs_is_forward_selection() {
    let learner = Learner::Cart(TreeParams::new(Mode::Regression));
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(70 + seed);
        let n = 30;
        let cols: Vec<Vec<f64>> = (0..5).map(|_| uniform(n, &mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| (cols[1][i] - cols[2][i]).abs() + 0.1 * cols[4][i])
            .collect();
        let m = matrix(&cols);
        let t = some(&y);
        let params = SffsParams {
            floating: false,
            ..SffsParams::default()
        };
        let r = sffs(
            &m,
            &[0, 1, 2, 3, 4],
            &t,
            &learner,
            Objective::NegMae,
            &params,
        )
        .unwrap();
        let (v, s) = sfs_oracle(&m, &t, &learner, 3);
        assert_eq!(r.objective, v);
        assert_eq!(r.indices, s);
    }
}

#[test]
fn missing_values_drop_rows_per_subset() {
    let mut cols = vec![vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![1.0; 6]];
    cols[0][2] = 0.5;
    let mut m = matrix(&cols);
    m.values[3][1] = None;
    let t = some(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let (_, dropped) = evaluate_subset(&m, &[0], &t, &cart(), Objective::Tss);
    assert_eq!(dropped, 0);
    let (_, dropped) = evaluate_subset(&m, &[0, 1], &t, &cart(), Objective::Tss);
    assert_eq!(dropped, 1);
}
