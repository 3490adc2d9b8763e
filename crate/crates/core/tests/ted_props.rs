use fsukit::assignment::{linear_sum_assignment, CostMatrix};
use fsukit::reward::{f_act, reward_mixed, RewardConfig};
use fsukit::schema::{FsuEntry, FunctionType, Schema};
use fsukit::ted::ted;
use fsukit::tree::{build_tree, Policy, TreeNode};
use fsukit_testkit::{brute_force_assignment, brute_force_ted, random_fsu_tree, shuffle_unordered, synth};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(seed: u64) -> (Vec<Vec<f64>>, usize, usize) {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(0..=7);
    let cols = rng.random_range(0..=7);
    let m = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0..20u32) as f64).collect())
        .collect();
    (m, rows, cols)
}

fn solve(m: &[Vec<f64>], rows: usize, cols: usize) -> f64 {
    let data = m.iter().flatten().copied().collect();
    linear_sum_assignment(&CostMatrix::new(rows, cols, data).unwrap()).min_sum
}

proptest! {
    #[test]
    fn assignment_matches_exhaustive_search(seed in any::<u64>()) {
        let (m, r, c) = matrix(seed);
        prop_assert_eq!(solve(&m, r, c), brute_force_assignment(&m, r, c));
    }

    #[test]
    fn assignment_shift_and_transpose(seed in any::<u64>(), shift in 0u32..50) {
        let (m, r, c) = matrix(seed);
        let base = CostMatrix::new(r, c, m.iter().flatten().copied().collect()).unwrap();
        let a = linear_sum_assignment(&base);
        let shifted: Vec<Vec<f64>> = m.iter().map(|row| row.iter().map(|x| x + shift as f64).collect()).collect();
        let s = CostMatrix::new(r, c, shifted.iter().flatten().copied().collect()).unwrap();
        let b = linear_sum_assignment(&s);
        prop_assert_eq!(b.min_sum, a.min_sum + shift as f64 * r.min(c) as f64);
        let pairing_under_shift: f64 = a.pairs.iter().map(|&(i, j)| s.get(i, j)).sum();
        prop_assert_eq!(pairing_under_shift, b.min_sum);
        prop_assert_eq!(linear_sum_assignment(&base.transpose()).min_sum, a.min_sum);
    }

    #[test]
    fn ted_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_fsu_tree(&mut rng, 8);
        let b = random_fsu_tree(&mut rng, 8);
        prop_assert_eq!(ted(&a, &b), brute_force_ted(&a, &b), "\n{}\n{}", a.dump(), b.dump());
    }

    #[test]
    fn ted_is_symmetric_and_zero_on_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_fsu_tree(&mut rng, 12);
        let b = random_fsu_tree(&mut rng, 12);
        prop_assert_eq!(ted(&a, &b), ted(&b, &a));
        prop_assert_eq!(ted(&a, &a), 0);
        if ted(&a, &b) == 0 {
            prop_assert_eq!(a.canonical(), b.canonical());
        }
    }

    #[test]
    fn ted_ignores_unordered_child_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_fsu_tree(&mut rng, 12);
        let b = random_fsu_tree(&mut rng, 12);
        let a2 = shuffle_unordered(&a, &mut rng);
        prop_assert_eq!(ted(&a2, &b), ted(&a, &b));
        prop_assert_eq!(ted(&a2, &a), 0);
    }

    #[test]
    fn shuffled_entries_keep_the_reward(seed in any::<u64>()) {
        let schema = Schema::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = synth::random_decomposition(&mut rng, schema);
        let mut pred = synth::random_decomposition(&mut rng, schema);
        let cfg = RewardConfig::default();
        let before = reward_mixed(&synth::identity_response(&pred), &gt, &cfg);
        for g in pred.groups.iter_mut().filter(|g| !g.function.is_ordered()) {
            g.entries.shuffle(&mut rng);
            g.reindex();
        }
        let after = reward_mixed(&synth::identity_response(&pred), &gt, &cfg);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn tree_ignores_attr_insertion_order(seed in any::<u64>()) {
        let schema = Schema::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = synth::random_decomposition(&mut rng, schema);
        let mut e = d.clone();
        for g in &mut e.groups {
            for entry in &mut g.entries {
                let mut pairs: Vec<_> = std::mem::take(&mut entry.attrs).into_iter().collect();
                pairs.reverse();
                entry.attrs.extend(pairs);
            }
        }
        prop_assert_eq!(build_tree(&d), build_tree(&e));
    }

    #[test]
    fn reward_is_bounded_and_non_increasing(x in 0u64..200, y in 0u64..200) {
        let cfg = RewardConfig::default();
        let (fx, fy) = (f_act(x as f64, &cfg), f_act(y as f64, &cfg));
        prop_assert!((0.0..=0.5).contains(&fx));
        if x <= y {
            prop_assert!(fx >= fy);
        }
    }
}

#[test]
fn trees_satisfy_structural_invariants() {
    fn check(n: &TreeNode) {
        assert_eq!(n.is_leaf(), n.value().is_some());
        assert_eq!(n.is_leaf(), n.children().is_empty());
        assert_eq!(n.size(), 1 + n.children().iter().map(TreeNode::size).sum::<usize>());
        if !n.is_leaf() {
            let lane_group = n.name() == FunctionType::Lane.info_label() && n.children().iter().all(|c| c.name() == n.name());
            let expected = if lane_group && n.policy() == Policy::Ordered { Policy::Ordered } else { Policy::Unordered };
            assert_eq!(n.policy(), expected, "{}", n.dump());
        }
        n.children().iter().for_each(check);
    }
    for a in synth::annotations(300, 11) {
        let t = build_tree(&a.gt);
        check(&t);
        if let Some(g) = a.gt.group(FunctionType::Lane) {
            let node = t.children().iter().find(|c| c.name() == "Lane Information" && !c.is_leaf()).unwrap();
            assert_eq!(node.policy(), Policy::Ordered);
            assert_eq!(node.children().len(), g.entries.len());
        }
    }
}

#[test]
fn lane_swap_changes_distance() {
    let schema = Schema::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut gt = synth::decomposition(&mut rng, schema, FunctionType::Lane);
    gt.groups.truncate(1);
    let g = &mut gt.groups[0];
    g.entries.clear();
    g.push(FsuEntry::new(FunctionType::Lane, 0).with("Turn", "Turn Left").with("Speed", "60"));
    g.push(FsuEntry::new(FunctionType::Lane, 0).with("Turn", "Go Straight").with("Speed", "80"));
    let mut swapped = gt.clone();
    swapped.groups[0].entries.swap(0, 1);
    swapped.groups[0].reindex();
    assert!(ted(&build_tree(&swapped), &build_tree(&gt)) > 0);
}
