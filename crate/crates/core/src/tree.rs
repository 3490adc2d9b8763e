//! Tree form of a decomposition, as consumed by the edit distance.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::schema::{BinaryGlobal, SignDecomposition, FUNCTION_TYPE_KEY, OTHER_GLOBAL_KEY};

pub const ROOT_NAME: &str = "sign";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Ordered,
    Unordered,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Ordered => "ordered",
            Policy::Unordered => "unordered",
        }
    }
}

/// A leaf carries a value and no children; an internal node carries
/// children and no value. Construct through [`TreeNode::leaf`] and
/// [`TreeNode::internal`] so the cached size stays correct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeNode {
    name: String,
    value: Option<String>,
    children: Vec<TreeNode>,
    policy: Policy,
    size: usize,
}

impl TreeNode {
    pub fn leaf(name: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: Some(value.into()),
            children: Vec::new(),
            policy: Policy::Unordered,
            size: 1,
        }
    }

    /// An internal node. With no children this is a bare root (size 1),
    /// which is the only childless node without a value.
    pub fn internal(name: impl Into<String>, policy: Policy, children: Vec<TreeNode>) -> Self {
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        Self {
            name: name.into(),
            value: None,
            children,
            policy,
            size,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self) -> Option<&str> {
        self.value.as_deref()
    }

    pub fn children(&self) -> &[TreeNode] {
        &self.children
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_leaf(&self) -> bool {
        self.value.is_some()
    }

    /// Copy with the children of every unordered node sorted, so trees equal
    /// up to unordered permutation compare equal.
    pub fn canonical(&self) -> TreeNode {
        let mut children: Vec<TreeNode> = self.children.iter().map(TreeNode::canonical).collect();
        if self.policy == Policy::Unordered {
            children.sort_by_cached_key(|c| c.dump());
        }
        TreeNode {
            children,
            ..self.clone()
        }
    }

    /// Replaces the children, recomputing the size.
    pub fn with_children(&self, children: Vec<TreeNode>) -> TreeNode {
        TreeNode::internal(self.name.clone(), self.policy, children)
    }

    /// One line per node: indentation, then depth, name, value (`-` for
    /// internal nodes), policy and size, tab separated.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_into(0, &mut out);
        out
    }

    fn dump_into(&self, depth: usize, out: &mut String) {
        let _ = writeln!(
            out,
            "{}{depth}\t{}\t{}\t{}\t{}",
            "  ".repeat(depth),
            self.name,
            self.value.as_deref().unwrap_or("-"),
            self.policy.as_str(),
            self.size
        );
        for c in &self.children {
            c.dump_into(depth + 1, out);
        }
    }
}

pub fn subtree_size(n: &TreeNode) -> usize {
    1 + n.children.iter().map(subtree_size).sum::<usize>()
}

pub fn build_tree(d: &SignDecomposition) -> TreeNode {
    let mut children = Vec::new();
    for key in BinaryGlobal::ALL {
        if let Some(v) = d.globals.get(key) {
            children.push(TreeNode::leaf(key.key(), v));
        }
    }
    if let Some(v) = d.globals.other_global_info() {
        children.push(TreeNode::leaf(OTHER_GLOBAL_KEY, v.canonical_text()));
    }
    if let Some(ft) = d.function_type_text() {
        children.push(TreeNode::leaf(FUNCTION_TYPE_KEY, ft));
    }
    for group in &d.groups {
        if let Some(n) = group.declared_count {
            children.push(TreeNode::leaf(group.function.count_label(), n.to_string()));
        }
    }
    for group in &d.groups {
        if group.entries.is_empty() {
            continue;
        }
        let label = group.function.info_label();
        let entries = group
            .entries
            .iter()
            .map(|e| {
                if e.attrs.is_empty() {
                    TreeNode::leaf(label.clone(), "")
                } else {
                    let leaves = e
                        .attrs
                        .iter()
                        .map(|(k, v)| TreeNode::leaf(k.clone(), v.canonical_text()))
                        .collect();
                    TreeNode::internal(label.clone(), Policy::Unordered, leaves)
                }
            })
            .collect();
        let policy = if group.function.is_ordered() {
            Policy::Ordered
        } else {
            Policy::Unordered
        };
        children.push(TreeNode::internal(label, policy, entries));
    }
    for (k, v) in &d.extras {
        children.push(TreeNode::leaf(k.clone(), v.canonical_text()));
    }
    TreeNode::internal(ROOT_NAME, Policy::Unordered, children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{AttrValue, FsuEntry, FunctionType};

    #[test]
    fn empty_decomposition_is_bare_root() {
        let t = build_tree(&SignDecomposition::new());
        assert_eq!(t.size(), 1);
        assert_eq!(subtree_size(&t), 1);
        assert!(!t.is_leaf());
    }

    #[test]
    fn two_leaf_children() {
        let n = TreeNode::internal("x", Policy::Unordered, vec![TreeNode::leaf("a", "1"), TreeNode::leaf("b", "2")]);
        assert_eq!(n.size(), 3);
        assert_eq!(subtree_size(&TreeNode::leaf("a", "1")), 1);
    }

    #[test]
    fn lists_collapse_to_one_leaf() {
        let mut d = SignDecomposition::new();
        d.group_or_insert(FunctionType::Direction).push(
            FsuEntry::new(FunctionType::Direction, 0)
                .with("Destination", AttrValue::list(["The Bund", "Haining Road"])),
        );
        let t = build_tree(&d);
        let group = t.children().last().unwrap();
        let leaf = &group.children()[0].children()[0];
        assert_eq!(leaf.value(), Some("The Bund, Haining Road"));
    }

    #[test]
    fn lane_group_is_ordered() {
        let mut d = SignDecomposition::new();
        for f in [FunctionType::Lane, FunctionType::Notice] {
            d.group_or_insert(f)
                .push(FsuEntry::new(f, 0).with("Speed", AttrValue::scalar("60")));
        }
        let t = build_tree(&d);
        let policies: Vec<(&str, Policy)> = t
            .children()
            .iter()
            .filter(|c| !c.is_leaf())
            .map(|c| (c.name(), c.policy()))
            .collect();
        assert_eq!(
            policies,
            vec![
                ("Lane Information", Policy::Ordered),
                ("Notice Information", Policy::Unordered)
            ]
        );
    }

    #[test]
    fn canonical_ignores_unordered_child_order() {
        let a = TreeNode::internal("r", Policy::Unordered, vec![TreeNode::leaf("a", "1"), TreeNode::leaf("b", "2")]);
        let b = TreeNode::internal("r", Policy::Unordered, vec![TreeNode::leaf("b", "2"), TreeNode::leaf("a", "1")]);
        assert_ne!(a, b);
        assert_eq!(a.canonical(), b.canonical());
        let c = TreeNode::internal("r", Policy::Ordered, a.children().to_vec());
        let d = TreeNode::internal("r", Policy::Ordered, b.children().to_vec());
        assert_ne!(c.canonical(), d.canonical());
    }

    #[test]
    fn dump_format() {
        let n = TreeNode::internal("r", Policy::Ordered, vec![TreeNode::leaf("a", "1")]);
        assert_eq!(n.dump(), "0\tr\t-\tordered\t2\n  1\ta\t1\tunordered\t1\n");
    }
}
