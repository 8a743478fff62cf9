//! Small reference topologies used throughout the docs and tests.

use crate::topology::{build_tree, LogicalTree};

/// Three leaves, two internal links: `O -> 4 -> {5 -> {1, 2}, 3}`.
pub fn fig1() -> LogicalTree {
    build_tree(
        &[("4", "O"), ("5", "4"), ("3", "4"), ("1", "5"), ("2", "5")],
        "O",
    )
    .expect("fixture is a valid tree")
}

/// Top link whose three children carry 2, 3 and 3 leaves; `n = 12`, `m = 8`.
pub fn fig2() -> LogicalTree {
    let mut edges = vec![("a", "O")];
    edges.extend([("b", "a"), ("c", "a"), ("d", "a")]);
    edges.extend([("b1", "b"), ("b2", "b")]);
    edges.extend([("c1", "c"), ("c2", "c"), ("c3", "c")]);
    edges.extend([("d1", "d"), ("d2", "d"), ("d3", "d")]);
    build_tree(&edges, "O").expect("fixture is a valid tree")
}

/// A single local complex: the top link above `m` leaves.
pub fn star(m: usize) -> LogicalTree {
    let mut edges = vec![("c".to_owned(), "O".to_owned())];
    edges.extend((1..=m).map(|j| (format!("l{j}"), "c".to_owned())));
    build_tree(&edges, "O").expect("fixture is a valid tree")
}
