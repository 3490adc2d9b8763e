//! Tree edit distance between FSU trees.
//!
//! Leaf pairs cost 0 (equal), 1 (same name, other value) or 2 (other name).
//! A leaf against an internal node costs the internal node's size plus one.
//! Internal pairs pay 1 for a name change plus the cost of their child
//! alignment: positional when both nodes are ordered, otherwise a minimum
//! cost assignment. Children left without a partner cost size plus one.

use crate::assignment::{linear_sum_assignment, CostMatrix};
use crate::tree::{Policy, TreeNode};

/// Cost of inserting or deleting a whole subtree.
pub fn subtree_edit_cost(n: &TreeNode) -> u64 {
    n.size() as u64 + 1
}

pub fn ted(a: &TreeNode, b: &TreeNode) -> u64 {
    match (a.is_leaf(), b.is_leaf()) {
        (true, true) => {
            if a.name() != b.name() {
                2
            } else if a.value() != b.value() {
                1
            } else {
                0
            }
        }
        (true, false) => subtree_edit_cost(b),
        (false, true) => subtree_edit_cost(a),
        (false, false) => {
            let rename = u64::from(a.name() != b.name());
            let ordered = a.policy() == Policy::Ordered && b.policy() == Policy::Ordered;
            rename
                + if ordered {
                    ordered_children(a.children(), b.children())
                } else {
                    unordered_children(a.children(), b.children())
                }
        }
    }
}

fn ordered_children(xs: &[TreeNode], ys: &[TreeNode]) -> u64 {
    let paired: u64 = xs.iter().zip(ys).map(|(x, y)| ted(x, y)).sum();
    let k = xs.len().min(ys.len());
    let surplus: u64 = xs[k..]
        .iter()
        .chain(&ys[k..])
        .map(subtree_edit_cost)
        .sum();
    paired + surplus
}

/// The assignment is solved on costs shifted by each child's insert or
/// delete price, so the choice of which children stay unmatched is
/// optimized together with the matched pairs.
fn unordered_children(xs: &[TreeNode], ys: &[TreeNode]) -> u64 {
    if xs.is_empty() || ys.is_empty() {
        return xs.iter().chain(ys).map(subtree_edit_cost).sum();
    }
    let del: Vec<u64> = xs.iter().map(subtree_edit_cost).collect();
    let ins: Vec<u64> = ys.iter().map(subtree_edit_cost).collect();
    let pair: Vec<Vec<u64>> = xs
        .iter()
        .map(|x| ys.iter().map(|y| ted(x, y)).collect())
        .collect();
    // Keeps every shifted entry nonnegative.
    let offset = del.iter().max().unwrap() + ins.iter().max().unwrap();
    let shifted = CostMatrix::from_fn(xs.len(), ys.len(), |i, j| {
        (pair[i][j] + offset - del[i] - ins[j]) as f64
    })
    .expect("integer costs are finite and nonnegative");
    let solution = linear_sum_assignment(&shifted);

    let mut row_used = vec![false; xs.len()];
    let mut col_used = vec![false; ys.len()];
    let mut total = 0;
    for &(i, j) in &solution.pairs {
        row_used[i] = true;
        col_used[j] = true;
        total += pair[i][j];
    }
    total += (0..xs.len()).filter(|&i| !row_used[i]).map(|i| del[i]).sum::<u64>();
    total += (0..ys.len()).filter(|&j| !col_used[j]).map(|j| ins[j]).sum::<u64>();
    total
}
