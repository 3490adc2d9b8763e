//! Reference oracles and fixture generators for the fsukit test suites.
//!
//! The oracles here are deliberately naive: they enumerate instead of
//! optimizing, and share no code with the library under test.

pub mod fixtures;
pub mod synth;

use fsukit::tree::{Policy, TreeNode};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// All injections of `0..k` into `0..n` (k <= n), as vectors of targets.
pub fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn extend(k: usize, n: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                extend(k, n, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(k, n, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// Exhaustive minimum over every matching of the smaller side into the
/// larger one.
pub fn brute_force_assignment(m: &[Vec<f64>], rows: usize, cols: usize) -> f64 {
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows <= cols {
        injections(rows, cols)
            .iter()
            .map(|p| p.iter().enumerate().map(|(r, &c)| m[r][c]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    } else {
        injections(cols, rows)
            .iter()
            .map(|p| p.iter().enumerate().map(|(c, &r)| m[r][c]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

fn count_nodes(n: &TreeNode) -> u64 {
    1 + n.children().iter().map(count_nodes).sum::<u64>()
}

/// Edit distance by exhaustive child alignment: every injection at
/// unordered nodes, index alignment where both nodes are ordered.
pub fn brute_force_ted(a: &TreeNode, b: &TreeNode) -> u64 {
    let a_leaf = a.children().is_empty() && a.value().is_some();
    let b_leaf = b.children().is_empty() && b.value().is_some();
    if a_leaf && b_leaf {
        return if a.name() != b.name() {
            2
        } else if a.value() != b.value() {
            1
        } else {
            0
        };
    }
    if a_leaf {
        return count_nodes(b) + 1;
    }
    if b_leaf {
        return count_nodes(a) + 1;
    }
    let rename = u64::from(a.name() != b.name());
    let xs = a.children();
    let ys = b.children();
    let drop = |n: &TreeNode| count_nodes(n) + 1;
    if a.policy() == Policy::Ordered && b.policy() == Policy::Ordered {
        let k = xs.len().min(ys.len());
        let paired: u64 = (0..k).map(|i| brute_force_ted(&xs[i], &ys[i])).sum();
        let rest: u64 = xs[k..].iter().chain(&ys[k..]).map(drop).sum();
        return rename + paired + rest;
    }
    let (small, large, flip) = if xs.len() <= ys.len() { (xs, ys, false) } else { (ys, xs, true) };
    let mut best = u64::MAX;
    for p in injections(small.len(), large.len()) {
        let mut cost = 0;
        let mut hit = vec![false; large.len()];
        for (i, &j) in p.iter().enumerate() {
            hit[j] = true;
            cost += if flip {
                brute_force_ted(&large[j], &small[i])
            } else {
                brute_force_ted(&small[i], &large[j])
            };
        }
        cost += large.iter().zip(&hit).filter(|(_, h)| !**h).map(|(n, _)| drop(n)).sum::<u64>();
        best = best.min(cost);
    }
    rename + best
}

const LEAF_NAMES: [&str; 4] = ["Turn", "Speed", "Destination", "Direction"];
const LEAF_VALUES: [&str; 3] = ["Go Straight", "60", "Fulong Rd"];

fn random_leaf(rng: &mut impl Rng) -> TreeNode {
    TreeNode::leaf(
        *LEAF_NAMES.choose(rng).unwrap(),
        *LEAF_VALUES.choose(rng).unwrap(),
    )
}

/// A random tree shaped like an FSU tree (root, top-level leaves, group
/// nodes, entry nodes, attribute leaves) with at most `max_nodes` nodes.
/// Names and values come from small pools so that equal and near-equal
/// subtrees are common.
pub fn random_fsu_tree(rng: &mut impl Rng, max_nodes: usize) -> TreeNode {
    assert!(max_nodes >= 1);
    let mut budget = max_nodes - 1;
    let mut children = Vec::new();
    while budget > 0 && rng.random_bool(0.8) {
        let pick = rng.random_range(0..3);
        if pick == 0 || budget < 3 {
            children.push(random_leaf(rng));
            budget -= 1;
            continue;
        }
        // Group node with one or more entries.
        budget -= 1;
        let (label, policy) = if rng.random_bool(0.5) {
            ("Lane Information", Policy::Ordered)
        } else {
            ("Direction Information", Policy::Unordered)
        };
        let mut entries = Vec::new();
        while budget >= 2 && (entries.is_empty() || rng.random_bool(0.5)) {
            budget -= 1;
            let mut leaves = vec![random_leaf(rng)];
            budget -= 1;
            while budget > 0 && rng.random_bool(0.4) {
                leaves.push(random_leaf(rng));
                budget -= 1;
            }
            entries.push(TreeNode::internal(label, Policy::Unordered, leaves));
        }
        children.push(TreeNode::internal(label, policy, entries));
    }
    TreeNode::internal("sign", Policy::Unordered, children)
}

/// Copy of `t` with the children of every unordered node shuffled.
pub fn shuffle_unordered(t: &TreeNode, rng: &mut impl Rng) -> TreeNode {
    if t.is_leaf() {
        return t.clone();
    }
    let mut children: Vec<TreeNode> = t.children().iter().map(|c| shuffle_unordered(c, rng)).collect();
    if t.policy() == Policy::Unordered {
        children.shuffle(rng);
    }
    t.with_children(children)
}
