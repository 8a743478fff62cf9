//! Logical trees, canonical labelling and the path/link measurement matrix.
//!
//! Nodes are identified by their canonical label. The root is [`ROOT`] (`0`);
//! every other node `k` in `1..=n` also names the link `(f(k), k)` above it.
//! Leaves take labels `1..=m` from left to right, internal nodes continue at
//! `m + 1` in preorder starting with the child of the root. Path `j` ends at
//! leaf `j`, so leaf labels double as path labels.
//!
//! Dense vectors over links or paths (`x`, `y`) are indexed by `label - 1`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Canonical label of the root node.
pub const ROOT: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogicalTree {
    father: Vec<usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    leaf_range: Vec<(usize, usize)>,
    preorder: Vec<usize>,
    aliases: Vec<String>,
    leaves: usize,
    height: usize,
}

impl LogicalTree {
    /// Relabels an already validated rooted tree given as raw child lists.
    fn from_raw(children: &[Vec<usize>], root: usize, names: &[String]) -> Self {
        let top = children[root][0];

        // Raw preorder from the root's child, children in stored order.
        let mut order = Vec::with_capacity(children.len() - 1);
        let mut stack = vec![top];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(children[v].iter().rev().copied());
        }

        let leaves = order.iter().filter(|&&v| children[v].is_empty()).count();
        let mut label = vec![usize::MAX; children.len()];
        label[root] = ROOT;
        let (mut next_leaf, mut next_internal) = (1, leaves + 1);
        for &v in &order {
            if children[v].is_empty() {
                label[v] = next_leaf;
                next_leaf += 1;
            } else {
                label[v] = next_internal;
                next_internal += 1;
            }
        }

        let n = order.len();
        let mut father = vec![ROOT; n + 1];
        let mut kids = vec![Vec::new(); n + 1];
        let mut aliases = vec![String::new(); n + 1];
        aliases[ROOT] = names[root].clone();
        kids[ROOT].push(label[top]);
        for &v in &order {
            let lv = label[v];
            aliases[lv] = names[v].clone();
            for &c in &children[v] {
                father[label[c]] = lv;
                kids[lv].push(label[c]);
            }
        }

        let preorder: Vec<usize> = order.iter().map(|&v| label[v]).collect();
        let mut depth = vec![0; n + 1];
        for &k in &preorder {
            depth[k] = depth[father[k]] + 1;
        }
        let height = depth.iter().copied().max().unwrap_or(0);

        let mut leaf_range = vec![(0, 0); n + 1];
        for &k in preorder.iter().rev() {
            leaf_range[k] = if kids[k].is_empty() {
                (k, k)
            } else {
                let first = *kids[k].first().unwrap();
                let last = *kids[k].last().unwrap();
                (leaf_range[first].0, leaf_range[last].1)
            };
        }
        leaf_range[ROOT] = leaf_range[label[top]];

        Self {
            father,
            children: kids,
            depth,
            leaf_range,
            preorder,
            aliases,
            leaves,
            height,
        }
    }

    /// Number of links (equivalently, non-root nodes).
    pub fn n(&self) -> usize {
        self.father.len() - 1
    }

    /// Number of leaves, which is also the number of paths.
    pub fn m(&self) -> usize {
        self.leaves
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Father of a non-root node.
    pub fn father(&self, k: usize) -> usize {
        self.father[k]
    }

    pub fn children(&self, k: usize) -> &[usize] {
        &self.children[k]
    }

    pub fn depth(&self, k: usize) -> usize {
        self.depth[k]
    }

    pub fn is_leaf(&self, k: usize) -> bool {
        k != ROOT && k <= self.leaves
    }

    pub fn is_internal(&self, k: usize) -> bool {
        k > self.leaves && k <= self.n()
    }

    /// The unique link adjacent to the root.
    pub fn top_link(&self) -> usize {
        self.children[ROOT][0]
    }

    /// Labels of the internal nodes, `m + 1 ..= n`.
    pub fn internal_nodes(&self) -> std::ops::RangeInclusive<usize> {
        self.leaves + 1..=self.n()
    }

    /// Leaves (paths) below node `k`; always a contiguous label range.
    pub fn leaf_range(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        let (lo, hi) = self.leaf_range[k];
        lo..=hi
    }

    /// Non-root nodes in preorder, each node before its descendants.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Non-root nodes with every node after its descendants.
    pub fn postorder(&self) -> impl Iterator<Item = usize> + '_ {
        self.preorder.iter().rev().copied()
    }

    /// Nodes at depth `level`, in canonical label order.
    pub fn level(&self, level: usize) -> Vec<usize> {
        let mut nodes: Vec<usize> = (1..=self.n())
            .filter(|&k| self.depth[k] == level)
            .collect();
        nodes.sort_unstable();
        nodes
    }

    /// Links on the root-to-leaf path `j`, from the leaf upwards.
    pub fn path(&self, j: usize) -> Vec<usize> {
        let mut links = Vec::with_capacity(self.depth[j]);
        let mut k = j;
        while k != ROOT {
            links.push(k);
            k = self.father[k];
        }
        links
    }

    /// User-supplied identifier of a node.
    pub fn alias(&self, k: usize) -> &str {
        &self.aliases[k]
    }

    /// Canonical label of a user-supplied identifier.
    pub fn label_of(&self, alias: &str) -> Option<usize> {
        self.aliases.iter().position(|a| a == alias)
    }

    /// Shape summary, e.g. `n=13 m=9 H=3 degrees=[3,3,3,3]`.
    pub fn describe(&self) -> String {
        let degrees: Vec<String> = self
            .internal_nodes()
            .map(|i| self.children[i].len().to_string())
            .collect();
        format!(
            "n={} m={} H={} degrees=[{}]",
            self.n(),
            self.m(),
            self.height,
            degrees.join(",")
        )
    }

    pub fn measurement_matrix(&self) -> MeasurementMatrix {
        measurement_matrix(self)
    }

    /// Serializes to the topology text format using canonical labels.
    ///
    /// Edges are written in preorder so that re-reading the file reproduces
    /// the same child order and therefore the same labelling.
    pub fn to_topology_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# logical tree: {}", self.describe());
        let _ = writeln!(out, "root {ROOT}");
        for &k in &self.preorder {
            let _ = writeln!(out, "{} {}", k, self.father[k]);
        }
        for k in 0..=self.n() {
            let _ = writeln!(out, "# alias {} {}", k, self.aliases[k]);
        }
        out
    }
}

/// Builds a tree from `(child, parent)` edges and applies canonical labels.
///
/// Children are ordered left to right by their first appearance in `edges`.
pub fn build_tree<S: AsRef<str>>(edges: &[(S, S)], root: &str) -> Result<LogicalTree> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut intern = |id: &str, names: &mut Vec<String>| -> usize {
        *index.entry(id.to_owned()).or_insert_with(|| {
            names.push(id.to_owned());
            names.len() - 1
        })
    };

    let root_idx = intern(root, &mut names);
    let mut parent_of: Vec<Option<usize>> = vec![None];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    for (child, parent) in edges {
        let c = intern(child.as_ref(), &mut names);
        let p = intern(parent.as_ref(), &mut names);
        let len = names.len();
        parent_of.resize(len, None);
        children.resize(len, Vec::new());
        if parent_of[c].is_some() {
            return Err(Error::MultipleParents(names[c].clone()));
        }
        parent_of[c] = Some(p);
        children[p].push(c);
    }

    // Connectivity and acyclicity.
    let mut reached = vec![false; names.len()];
    reached[root_idx] = true;
    let mut stack = vec![root_idx];
    while let Some(v) = stack.pop() {
        for &c in &children[v] {
            if !reached[c] {
                reached[c] = true;
                stack.push(c);
            }
        }
    }
    let unreached = (0..names.len()).filter(|&v| !reached[v] || v == root_idx);
    for start in unreached {
        if start == root_idx && parent_of[root_idx].is_none() {
            continue;
        }
        let mut seen = vec![false; names.len()];
        let mut v = start;
        loop {
            if seen[v] {
                return Err(Error::CycleDetected(names[v].clone()));
            }
            seen[v] = true;
            match parent_of[v] {
                Some(p) => v = p,
                None => return Err(Error::DisconnectedInput(names[start].clone())),
            }
        }
    }

    if children[root_idx].len() != 1 {
        return Err(Error::DegreeViolation {
            node: names[root_idx].clone(),
            reason: format!("root must have exactly one child, has {}", children[root_idx].len()),
        });
    }
    let top = children[root_idx][0];
    if children[top].is_empty() {
        return Err(Error::DegreeViolation {
            node: names[top].clone(),
            reason: "the child of the root must branch (tree needs at least two leaves)".into(),
        });
    }
    for (v, kids) in children.iter().enumerate() {
        if v != root_idx && kids.len() == 1 {
            return Err(Error::DegreeViolation {
                node: names[v].clone(),
                reason: "internal node with a single child".into(),
            });
        }
    }

    Ok(LogicalTree::from_raw(&children, root_idx, &names))
}

/// Reads the topology text format: `root <id>` followed by `<child> <parent>`
/// lines. `#` starts a comment.
pub fn parse_topology(text: &str) -> Result<LogicalTree> {
    let mut root: Option<String> = None;
    let mut edges: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: &str| Error::Parse {
            line: lineno + 1,
            msg: msg.to_owned(),
        };
        match fields.as_slice() {
            ["root", id] => {
                if root.is_some() {
                    return Err(err("duplicate `root` line"));
                }
                root = Some((*id).to_owned());
            }
            [child, parent] if root.is_some() => {
                edges.push(((*child).to_owned(), (*parent).to_owned()))
            }
            [_, _] => return Err(err("expected `root <id>` before any edge")),
            _ => return Err(err("expected `<child-id> <parent-id>`")),
        }
    }
    let root = root.ok_or(Error::Parse {
        line: 0,
        msg: "missing `root <id>` line".into(),
    })?;
    build_tree(&edges, &root)
}

/// Binary path/link incidence matrix, stored as per-path link lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurementMatrix {
    m: usize,
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl MeasurementMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Links on path `j` in ascending label order.
    pub fn row(&self, j: usize) -> &[usize] {
        &self.rows[j - 1]
    }

    pub fn get(&self, j: usize, k: usize) -> bool {
        self.rows[j - 1].binary_search(&k).is_ok()
    }

    /// Paths crossing link `k`, ascending.
    pub fn column(&self, k: usize) -> Vec<usize> {
        (1..=self.m).filter(|&j| self.get(j, k)).collect()
    }

    /// Dense `m x n` 0/1 view.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.n];
                for &k in row {
                    dense[k - 1] = 1;
                }
                dense
            })
            .collect()
    }

    /// `A x` for a dense link vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&k| x[k - 1]).sum())
            .collect()
    }

    /// Recovers the father map from column containment: the father of link
    /// `k` is the link whose path set is the smallest strict superset of the
    /// paths of `k`, or the root if there is none.
    pub fn fathers_from_columns(&self) -> Vec<usize> {
        let cols: Vec<Vec<usize>> = (1..=self.n).map(|k| self.column(k)).collect();
        let mut father = vec![ROOT; self.n + 1];
        for k in 1..=self.n {
            let mut best: Option<(usize, usize)> = None;
            for p in 1..=self.n {
                let (ck, cp) = (&cols[k - 1], &cols[p - 1]);
                let strict_superset =
                    cp.len() > ck.len() && ck.iter().all(|j| cp.binary_search(j).is_ok());
                if strict_superset && best.is_none_or(|(_, size)| cp.len() < size) {
                    best = Some((p, cp.len()));
                }
            }
            father[k] = best.map_or(ROOT, |(p, _)| p);
        }
        father
    }
}

pub fn measurement_matrix(tree: &LogicalTree) -> MeasurementMatrix {
    let rows = (1..=tree.m())
        .map(|j| {
            let mut links = tree.path(j);
            links.sort_unstable();
            links
        })
        .collect();
    MeasurementMatrix {
        m: tree.m(),
        n: tree.n(),
        rows,
    }
}

fn raw_names(count: usize) -> Vec<String> {
    (0..count)
        .map(|v| if v == 0 { "O".to_owned() } else { format!("v{v}") })
        .collect()
}

/// Root, one top link, then a complete `c`-ary tree: `n = (c^H - 1)/(c - 1)`
/// links and `m = c^(H-1)` leaves.
pub fn gen_regular_tree(branching: usize, height: usize) -> Result<LogicalTree> {
    if branching < 2 || height < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "regular tree needs branching >= 2 and height >= 2, got c={branching} H={height}"
        )));
    }
    let links = (branching.pow(height as u32) - 1) / (branching - 1);
    let mut children = vec![Vec::new(); links + 1];
    children[0].push(1);
    let mut frontier = vec![1];
    let mut next = 2;
    for _ in 1..height {
        let mut below = Vec::with_capacity(frontier.len() * branching);
        for &v in &frontier {
            for _ in 0..branching {
                children[v].push(next);
                below.push(next);
                next += 1;
            }
        }
        frontier = below;
    }
    Ok(LogicalTree::from_raw(&children, 0, &raw_names(links + 1)))
}

/// Random tree with exactly `leaves` leaves. Starting from the top link, a
/// uniformly chosen leaf is split into `d` children with `d` uniform on
/// `[2, max_branching]`, clipped so the leaf count is never exceeded.
pub fn gen_random_tree(leaves: usize, max_branching: usize, seed: u64) -> Result<LogicalTree> {
    if leaves < 2 || max_branching < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "random tree needs m >= 2 and max branching >= 2, got m={leaves}, max={max_branching}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(&mut rng, leaves, |rng, room| {
        rng.random_range(2..=max_branching.min(room + 1))
    })
}

/// Random tree in which every internal node has exactly `branching`
/// children: `internal` splits give `m = (c - 1) * internal + 1` leaves and
/// `n = m + internal` links.
pub fn gen_random_full_tree(branching: usize, internal: usize, seed: u64) -> Result<LogicalTree> {
    if branching < 2 || internal < 1 {
        return Err(Error::ParameterOutOfRange(format!(
            "full tree needs branching >= 2 and at least one internal node, got c={branching}, internal={internal}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(&mut rng, (branching - 1) * internal + 1, |_, _| branching)
}

fn grow<F>(rng: &mut ChaCha8Rng, leaves: usize, mut degree: F) -> Result<LogicalTree>
where
    F: FnMut(&mut ChaCha8Rng, usize) -> usize,
{
    let mut children: Vec<Vec<usize>> = vec![vec![1], Vec::new()];
    let mut frontier = vec![1usize];
    let mut leaf_count = 1;
    let mut first = true;
    while leaf_count < leaves {
        let pick = if first { 0 } else { rng.random_range(0..frontier.len()) };
        first = false;
        let v = frontier.swap_remove(pick);
        let d = degree(rng, leaves - leaf_count);
        for _ in 0..d {
            let c = children.len();
            children.push(Vec::new());
            children[v].push(c);
            frontier.push(c);
        }
        leaf_count += d - 1;
    }
    let count = children.len();
    Ok(LogicalTree::from_raw(&children, 0, &raw_names(count)))
}

/// Resolves shorthand tree specs:
///
/// * `ternary:13`, `binary:7`, ... &mdash; complete trees by link count
/// * `ternary:25` &mdash; the 25-link, 17-leaf ternary census tree
/// * `regular:<c>:<H>`
/// * `random:<m>:<max-branching>:<seed>`
/// * `full:<c>:<internal>:<seed>`
pub fn tree_from_spec(spec: &str) -> Result<LogicalTree> {
    let bad = || Error::ParameterOutOfRange(format!("unrecognised tree spec `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    match parts.as_slice() {
        ["ternary", "25"] => ternary_census_tree(),
        [kind @ ("binary" | "ternary" | "quaternary"), links] => {
            let c = match *kind {
                "binary" => 2,
                "ternary" => 3,
                _ => 4,
            };
            let links = num(links)?;
            let mut size = 1;
            let mut height = 1;
            while size < links {
                size = size * c + 1;
                height += 1;
            }
            if size != links || height < 2 {
                return Err(Error::ParameterOutOfRange(format!(
                    "no complete {kind} tree has {links} links"
                )));
            }
            gen_regular_tree(c, height)
        }
        ["regular", c, h] => gen_regular_tree(num(c)?, num(h)?),
        ["random", m, b, seed] => gen_random_tree(num(m)?, num(b)?, num(seed)? as u64),
        ["full", c, i, seed] => gen_random_full_tree(num(c)?, num(i)?, num(seed)? as u64),
        _ => Err(bad()),
    }
}

/// Ternary tree with 25 links and 17 leaves: the complete height-3 ternary
/// tree with leaves 1, 4, 7 and 9 (one per second-level subtree, plus the
/// last) each split into three.
pub fn ternary_census_tree() -> Result<LogicalTree> {
    let base = gen_regular_tree(3, 3)?;
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut next = base.n() + 1;
    for &k in base.preorder() {
        edges.push((k.to_string(), base.father(k).to_string()));
        if [1, 4, 7, 9].contains(&k) {
            for _ in 0..3 {
                edges.push((next.to_string(), k.to_string()));
                next += 1;
            }
        }
    }
    build_tree(&edges, "0")
}

/// Draws `k` distinct links uniformly, in ascending order.
pub(crate) fn sample_links<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut links = rand::seq::index::sample(rng, n, k)
        .into_iter()
        .map(|i| i + 1)
        .collect::<Vec<_>>();
    links.sort_unstable();
    links
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fig1;

    #[test]
    fn fig1_labels_and_matrix() {
        let t = fig1();
        assert_eq!((t.n(), t.m(), t.height()), (5, 3, 3));
        assert_eq!(t.top_link(), 4);
        assert_eq!(t.children(4), &[5, 3]);
        assert_eq!(t.children(5), &[1, 2]);
        assert_eq!(t.internal_nodes().collect::<Vec<_>>(), vec![4, 5]);
        let dense = t.measurement_matrix().dense();
        assert_eq!(
            dense,
            vec![
                vec![1, 0, 0, 1, 1],
                vec![0, 1, 0, 1, 1],
                vec![0, 0, 1, 1, 0]
            ]
        );
    }

    #[test]
    fn user_ids_are_relabelled() {
        let t = build_tree(&[("a", "r"), ("b", "a"), ("c", "a")], "r").unwrap();
        assert_eq!(t.label_of("b"), Some(1));
        assert_eq!(t.label_of("c"), Some(2));
        assert_eq!(t.label_of("a"), Some(3));
        assert_eq!(t.alias(ROOT), "r");
        assert_eq!(t.measurement_matrix().dense(), vec![vec![1, 0, 1], vec![0, 1, 1]]);
    }

    #[test]
    fn degree_and_structure_errors() {
        let unary = build_tree(&[("a", "r"), ("b", "a"), ("c", "b"), ("d", "b")], "r");
        assert!(matches!(unary, Err(Error::DegreeViolation { .. })));
        let pair = build_tree(&[("a", "r"), ("b", "r")], "r");
        assert!(matches!(pair, Err(Error::DegreeViolation { .. })));
        let single = build_tree(&[("a", "r")], "r");
        assert!(matches!(single, Err(Error::DegreeViolation { .. })));
        let cycle = build_tree(
            &[("a", "r"), ("b", "a"), ("c", "a"), ("x", "y"), ("y", "x")],
            "r",
        );
        assert!(matches!(cycle, Err(Error::CycleDetected(_))));
        let island = build_tree(&[("a", "r"), ("b", "a"), ("c", "a"), ("x", "y"), ("z", "y")], "r");
        assert!(matches!(island, Err(Error::DisconnectedInput(_))));
        let twice = build_tree(&[("a", "r"), ("b", "a"), ("b", "r")], "r");
        assert!(matches!(twice, Err(Error::MultipleParents(_))));
        let rooted_loop = build_tree(&[("a", "r"), ("b", "a"), ("r", "a")], "r");
        assert!(matches!(rooted_loop, Err(Error::CycleDetected(_))));
    }

    #[test]
    fn regular_tree_sizes() {
        let t = gen_regular_tree(3, 3).unwrap();
        assert_eq!((t.n(), t.m()), (13, 9));
        let t = gen_regular_tree(2, 2).unwrap();
        assert_eq!((t.n(), t.m()), (3, 2));
        let t = gen_regular_tree(3, 4).unwrap();
        assert_eq!((t.n(), t.m()), (40, 27));
        assert!(gen_regular_tree(1, 3).is_err());
        assert!(gen_regular_tree(3, 1).is_err());
    }

    #[test]
    fn ternary_13_rows_and_columns() {
        let t = gen_regular_tree(3, 3).unwrap();
        let a = t.measurement_matrix();
        for j in 1..=t.m() {
            assert_eq!(a.row(j).len(), 3);
        }
        for i in t.internal_nodes() {
            assert_eq!(a.column(i).len(), t.leaf_range(i).count());
        }
    }

    #[test]
    fn random_trees() {
        let t = gen_random_tree(2, 5, 9).unwrap();
        assert_eq!((t.n(), t.m()), (3, 2));
        assert_eq!(gen_random_tree(12, 4, 3).unwrap(), gen_random_tree(12, 4, 3).unwrap());
        for seed in 0..20 {
            let t = gen_random_tree(17, 3, seed).unwrap();
            assert_eq!(t.m(), 17);
            assert!(t.internal_nodes().all(|i| (2..=3).contains(&t.children(i).len())));
        }
        let t = gen_random_full_tree(3, 8, 1).unwrap();
        assert_eq!((t.n(), t.m()), (25, 17));
        assert!(gen_random_tree(1, 3, 0).is_err());
    }

    #[test]
    fn census_tree_shape() {
        let t = ternary_census_tree().unwrap();
        assert_eq!((t.n(), t.m()), (25, 17));
        assert!(t.internal_nodes().all(|i| t.children(i).len() == 3));
        assert_eq!(tree_from_spec("ternary:13").unwrap().n(), 13);
        assert_eq!(tree_from_spec("binary:7").unwrap().m(), 4);
        assert!(tree_from_spec("ternary:12").is_err());
        assert!(tree_from_spec("hexagonal").is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = gen_random_tree(11, 4, 77).unwrap();
        let text = t.to_topology_text();
        let back = parse_topology(&text).unwrap();
        assert_eq!(back.measurement_matrix(), t.measurement_matrix());
        assert_eq!(back.preorder(), t.preorder());

        let src = "# fig 1\nroot O\n4 O\n5 4   # inner\n3 4\n1 5\n2 5\n";
        assert_eq!(parse_topology(src).unwrap(), fig1());
        assert!(matches!(parse_topology("4 O\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_topology("root O\n4 O 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn fathers_from_columns_matches() {
        for seed in 0..10 {
            let t = gen_random_tree(9, 4, seed).unwrap();
            let f = t.measurement_matrix().fathers_from_columns();
            for k in 1..=t.n() {
                assert_eq!(f[k], t.father(k));
            }
        }
    }
}
