//! Cross-module invariants that exercise the public API end to end.

use chanapprox::bounds::{self, delta_i_direct};
use chanapprox::gen::{grid_channel, random_channel};
use chanapprox::{degrade, greedy_merge, greedy_split, par, upgrade};

#[test]
fn binary_grid_merge_follows_inverse_square_law() {
    let joint = grid_channel(2, 2048).expect("grid");
    let view = joint.binary_view().expect("binary");
    let points: Vec<(f64, f64)> = [8usize, 16, 32, 64, 128]
        .iter()
        .map(|&l| {
            let out = greedy_merge(&view, l).expect("merge");
            (l as f64, out.delta_i)
        })
        .collect();
    let slope = bounds::loglog_slope(&points).unwrap();
    assert!(
        (-2.3..=-1.7).contains(&slope),
        "merge loss slope {slope} outside [-2.3, -1.7]"
    );
}

#[test]
fn split_and_merge_cost_sums_match_recomputation() {
    let checks = par::map_range(40, |i| {
        let n = 32 + (i * 11) % 200;
        let l = 2 + i % 10;
        let joint = random_channel(2, n, 0xC057 + i as u64);
        let view = joint.binary_view().expect("binary");
        let up = greedy_split(&view, l).expect("split");
        let down = greedy_merge(&view, l).expect("merge");
        ((up.cost_sum - up.delta_i).abs(), (down.cost_sum - down.delta_i).abs())
    });
    for (i, (up_err, down_err)) in checks.into_iter().enumerate() {
        assert!(up_err < 1e-10, "seed {i}: split accounting drift {up_err}");
        assert!(down_err < 1e-10, "seed {i}: merge accounting drift {down_err}");
    }
}

#[test]
fn reported_deltas_match_independent_summation() {
    for i in 0..10u64 {
        let joint = random_channel(2, 120, 0xD147 + i);
        let view = joint.binary_view().expect("binary");
        let up = greedy_split(&view, 6).expect("split");
        assert!(
            (delta_i_direct(&joint, &up.pstar) - up.delta_i).abs() < 1e-10,
            "upgrade delta disagrees with direct summation at seed {i}"
        );
        let down = greedy_merge(&view, 6).expect("merge");
        assert!(
            (delta_i_direct(&joint, &down.pxz) - down.delta_i).abs() < 1e-10,
            "degrade delta disagrees with direct summation at seed {i}"
        );
    }
}

#[test]
fn onehot_upgrade_preserves_input_marginal() {
    for (q, seed) in [(3usize, 1u64), (4, 2), (5, 3)] {
        let joint = random_channel(q, 90, seed);
        let res = upgrade(&joint, 1 << (q - 1)).expect("upgrade");
        let before = joint.input_marginal();
        let after = res.pstar.input_marginal();
        for (x, (a, b)) in before.iter().zip(&after).enumerate() {
            assert!(
                (a - b).abs() < 1e-10,
                "q {q}: input marginal moved at letter {x}: {a} vs {b}"
            );
        }
        assert!((res.pstar.total() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn onehot_degrade_never_gains_and_upgrade_never_loses() {
    let cases: Vec<(usize, u64)> = (0..12).map(|i| (3 + i % 3, 0xAB + i as u64)).collect();
    let results = par::map_collect(&cases, |&(q, seed)| {
        let joint = random_channel(q, 64, seed);
        let l = 1 << (q - 1);
        let up = upgrade(&joint, l).expect("upgrade").delta_i;
        let down = degrade(&joint, l).expect("degrade").delta_i;
        (up, down)
    });
    for (i, (up, down)) in results.into_iter().enumerate() {
        assert!(up >= -1e-10, "case {i}: upgrade lost information ({up})");
        assert!(down >= -1e-12, "case {i}: degrade gained information ({down})");
    }
}

#[test]
fn sweep_deltas_shrink_with_generous_budgets() {
    // not monotone step for step in general, but a 16x budget increase must
    // help on a rich channel
    let joint = grid_channel(3, 60).expect("grid");
    let coarse = degrade(&joint, 4).expect("degrade").delta_i;
    let fine = degrade(&joint, 64).expect("degrade").delta_i;
    assert!(fine < coarse, "fine {fine} not below coarse {coarse}");
    let coarse_up = upgrade(&joint, 4).expect("upgrade").delta_i;
    let fine_up = upgrade(&joint, 64).expect("upgrade").delta_i;
    assert!(fine_up < coarse_up);
}
