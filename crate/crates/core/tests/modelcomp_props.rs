use msbench_core::modelcomp::{
    average_ranks, compare, friedman_test, holm_correct, render_cd_svg, wilcoxon_signed_rank,
    Direction, ScoreMatrix, WilcoxonMethod,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-sided p from all 2^n sign flips of the absolute differences.
fn enumerate_p(d: &[f64]) -> f64 {
    let nz: Vec<f64> = d.iter().copied().filter(|&x| x != 0.0).collect();
    let n = nz.len();
    let abs: Vec<f64> = nz.iter().map(|x| x.abs()).collect();
    let rank = |i: usize| -> f64 {
        let less = abs.iter().filter(|&&y| y < abs[i]).count() as f64;
        let eq = abs.iter().filter(|&&y| y == abs[i]).count() as f64;
        less + (eq + 1.0) / 2.0
    };
    let ranks: Vec<f64> = (0..n).map(rank).collect();
    let observed: f64 = (0..n).filter(|&i| nz[i] > 0.0).map(|i| ranks[i]).sum();
    let (mut lo, mut hi) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            lo += 1;
        }
        if w >= observed - 1e-9 {
            hi += 1;
        }
    }
    (2.0 * lo.min(hi) as f64 / (1u64 << n) as f64).min(1.0)
}

#[test]
fn exact_wilcoxon_matches_sign_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..100 {
        let n = rng.gen_range(1..=12);
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let mag = if case % 2 == 0 { rng.gen_range(1..5) as f64 } else { rng.gen::<f64>() };
                if rng.gen_bool(0.5) { mag } else { -mag }
            })
            .collect();
        let r = wilcoxon_signed_rank(&d, &vec![0.0; n]).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert!((r.p - enumerate_p(&d)).abs() < 1e-12, "case {case}: {d:?}");
    }
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..6, 2usize..10).prop_flat_map(|(k, n)| {
        proptest::collection::vec(proptest::collection::vec(0u8..5, k), n)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect())
    })
}

fn build(rows: &[Vec<f64>]) -> ScoreMatrix {
    let k = rows[0].len();
    ScoreMatrix::new(
        (0..k).map(|j| format!("m{j}")).collect(),
        rows.iter()
            .enumerate()
            .map(|(i, r)| (format!("c{i}"), r.iter().map(|&x| Some(x)).collect()))
            .collect(),
        Direction::HigherBetter,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn rank_sum_and_monotone_invariance(rows in matrix_strategy()) {
        let m = build(&rows);
        let k = m.k() as f64;
        let r = average_ranks(&m);
        prop_assert!((r.iter().sum::<f64>() - k * (k + 1.0) / 2.0).abs() < 1e-9);
        prop_assert!(r.iter().all(|&x| (1.0..=k).contains(&x)));
        let transformed: Vec<Vec<f64>> = rows.iter().map(|row| row.iter().map(|x| (x * 0.7).exp() + 3.0).collect()).collect();
        let t = build(&transformed);
        prop_assert_eq!(average_ranks(&t), r);
        prop_assert_eq!(friedman_test(&t).unwrap(), friedman_test(&m).unwrap());
        // Signed ranks depend on difference magnitudes, so the Wilcoxon p is
        // only invariant under increasing affine maps.
        let affine: Vec<Vec<f64>> = rows.iter().map(|row| row.iter().map(|x| 2.5 * x - 1.0).collect()).collect();
        let a = build(&affine);
        let col = |mm: &ScoreMatrix, j: usize| mm.scores.iter().map(|row| row[j]).collect::<Vec<_>>();
        prop_assert_eq!(
            wilcoxon_signed_rank(&col(&m, 0), &col(&m, 1)).unwrap().p,
            wilcoxon_signed_rank(&col(&a, 0), &col(&a, 1)).unwrap().p
        );
    }

    #[test]
    fn holm_between_bonferroni_and_raw(p in proptest::collection::vec(0.0f64..0.2, 1..12)) {
        let alpha = 0.05;
        let m = p.len() as f64;
        for (pi, d) in p.iter().zip(holm_correct(&p, alpha)) {
            if *pi <= alpha / m {
                prop_assert!(d.rejected);
            }
            if d.rejected {
                prop_assert!(*pi <= alpha);
            }
        }
    }

    #[test]
    fn cliques_cover_every_model(rows in matrix_strategy()) {
        let m = build(&rows);
        let report = compare(&m, 0.05).unwrap();
        for name in &m.models {
            prop_assert!(report.cliques.iter().any(|c| c.contains(name)));
        }
        let svg = render_cd_svg(&report);
        prop_assert_eq!(svg.matches("class=\"clique\"").count(), report.cliques.len());
    }
}

#[test]
fn friedman_hand_matrix_reports_eight() {
    let rows = vec![vec![0.9, 0.5, 0.1]; 4];
    let r = compare(&build(&rows), 0.05).unwrap();
    let f = r.friedman.unwrap();
    assert!((f.statistic - 8.0).abs() < 1e-12);
    assert!((10f64.powf(f.log10_p) - 0.0183).abs() < 1e-4);
    assert_eq!(r.average_ranks, vec![1.0, 2.0, 3.0]);
}
