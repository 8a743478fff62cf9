//! Exact-observation solver: the upstate move, the bottom-up UpSparse pass,
//! its closed form, and the per-complex diagnostics for uniqueness of the
//! sparsest solution and exact recovery.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::lossmodel::{is_feasible, l0, l1, receiver_solution, TOL};
use crate::topology::{LogicalTree, ROOT};

/// Configuration of the local complex centred on an internal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    /// At least one child link is lossless; no loss can be pulled up.
    Up,
    /// The link above is lossless and every child link is lossy.
    Down,
    /// Every incident link is lossy.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexState {
    pub node: usize,
    pub state: State,
    /// Smallest child link loss.
    pub delta: f64,
    /// Child links with loss `<= TOL`.
    pub lossless_children: usize,
    /// Child links attaining `delta`.
    pub min_multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub x: Vec<f64>,
    pub l0: usize,
    pub l1: f64,
    pub states: Vec<ComplexState>,
    pub unique_sparsest: bool,
    pub recovery_condition: bool,
}

impl SolutionReport {
    pub fn new(tree: &LogicalTree, x: Vec<f64>) -> Self {
        Self {
            l0: l0(&x),
            l1: l1(&x),
            states: classify_complexes(tree, &x),
            unique_sparsest: unique_sparsest(tree, &x),
            recovery_condition: recovery_condition(tree, &x),
            x,
        }
    }

    /// Lossy links, ascending.
    pub fn support(&self) -> Vec<usize> {
        support(&self.x)
    }
}

pub(crate) fn support(x: &[f64]) -> Vec<usize> {
    (1..=x.len()).filter(|&k| x[k - 1] > TOL).collect()
}

/// Moves the complex at `i` into its upstate in place: the smallest child
/// loss `delta` is removed from every child and added to link `i`. Returns
/// `delta`.
pub fn put_in_upstate(tree: &LogicalTree, i: usize, x: &mut [f64]) -> Result<f64> {
    if !tree.is_internal(i) {
        return Err(Error::NotInternal(i));
    }
    check_len("link vector", tree.n(), x.len())?;
    let delta = tree
        .children(i)
        .iter()
        .map(|&c| x[c - 1])
        .fold(f64::INFINITY, f64::min);
    if delta > 0.0 {
        x[i - 1] += delta;
        for &c in tree.children(i) {
            x[c - 1] -= delta;
        }
    }
    Ok(delta)
}

/// Runs UpSparse from `start` (the receiver solution when `None`): levels
/// `H-1` down to `1`, each level in label order.
pub fn upsparse(tree: &LogicalTree, y: &[f64], start: Option<&[f64]>) -> Result<SolutionReport> {
    check_len("path observation", tree.m(), y.len())?;
    let mut x = match start {
        Some(x0) => {
            if !is_feasible(tree, x0, y, TOL) {
                return Err(Error::InfeasibleStart);
            }
            x0.to_vec()
        }
        None => receiver_solution(tree, y)?,
    };
    for level in (1..tree.height()).rev() {
        for i in tree.level(level) {
            if tree.is_internal(i) {
                put_in_upstate(tree, i, &mut x)?;
            }
        }
    }
    Ok(SolutionReport::new(tree, x))
}

/// `gamma_i = min { y_j : j in R(i) }` for every node; `gamma[ROOT]` covers
/// all paths.
pub fn subtree_minima(tree: &LogicalTree, y: &[f64]) -> Vec<f64> {
    let mut gamma = vec![f64::INFINITY; tree.n() + 1];
    for k in tree.postorder() {
        gamma[k] = if tree.is_leaf(k) {
            y[k - 1]
        } else {
            tree.children(k)
                .iter()
                .map(|&c| gamma[c])
                .fold(f64::INFINITY, f64::min)
        };
    }
    gamma[ROOT] = gamma[tree.top_link()];
    gamma
}

/// Closed form of the UpSparse output: `x_i = gamma_i - gamma_f(i)`, with
/// `x = gamma` on the top link.
pub fn closed_form(tree: &LogicalTree, y: &[f64]) -> Result<Vec<f64>> {
    check_len("path observation", tree.m(), y.len())?;
    if let Some(j) = y.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::OutOfDomain {
            index: j,
            value: y[j],
            domain: "[0, inf)",
        });
    }
    let gamma = subtree_minima(tree, y);
    Ok((1..=tree.n())
        .map(|k| {
            let f = tree.father(k);
            if f == ROOT {
                gamma[k]
            } else {
                gamma[k] - gamma[f]
            }
        })
        .collect())
}

/// Production path: closed-form solution with diagnostics.
pub fn solve(tree: &LogicalTree, y: &[f64]) -> Result<SolutionReport> {
    Ok(SolutionReport::new(tree, closed_form(tree, y)?))
}

pub fn classify_complexes(tree: &LogicalTree, x: &[f64]) -> Vec<ComplexState> {
    tree.internal_nodes()
        .map(|i| {
            let kids = tree.children(i);
            let delta = kids.iter().map(|&c| x[c - 1]).fold(f64::INFINITY, f64::min);
            let lossless_children = kids.iter().filter(|&&c| x[c - 1] <= TOL).count();
            let min_multiplicity = kids.iter().filter(|&&c| x[c - 1] <= delta + TOL).count();
            let state = if lossless_children > 0 {
                State::Up
            } else if x[i - 1] <= TOL {
                State::Down
            } else {
                State::Mixed
            };
            ComplexState {
                node: i,
                state,
                delta,
                lossless_children,
                min_multiplicity,
            }
        })
        .collect()
}

/// Per-complex unique sparsity of an UpSparse output: every internal link is
/// either lossless or has at least two lossless child links.
pub fn unique_sparsest(tree: &LogicalTree, x: &[f64]) -> bool {
    tree.internal_nodes().all(|i| {
        x[i - 1] <= TOL
            || tree
                .children(i)
                .iter()
                .filter(|&&c| x[c - 1] <= TOL)
                .count()
                >= 2
    })
}

/// Every internal node has a lossless child link. When this holds for the
/// true loss vector, UpSparse recovers it exactly.
pub fn recovery_condition(tree: &LogicalTree, x: &[f64]) -> bool {
    tree.internal_nodes()
        .all(|i| tree.children(i).iter().any(|&c| x[c - 1] <= TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lossmodel::forward;
    use crate::fixtures::{fig1, fig2, star};
    use crate::topology::gen_regular_tree;

    #[test]
    fn upstate_move_on_y234() {
        let t = star(3);
        let mut x = vec![2.0, 3.0, 4.0, 0.0];
        let before = l1(&x);
        let delta = put_in_upstate(&t, 4, &mut x).unwrap();
        assert_eq!(delta, 2.0);
        assert_eq!(x, vec![0.0, 1.0, 2.0, 2.0]);
        assert_eq!(before - l1(&x), 2.0 * delta);
        assert_eq!(put_in_upstate(&t, 4, &mut x).unwrap(), 0.0);
        assert_eq!(x, vec![0.0, 1.0, 2.0, 2.0]);
        assert!(matches!(put_in_upstate(&t, 1, &mut x), Err(Error::NotInternal(1))));
    }

    #[test]
    fn fig1_solution() {
        let t = fig1();
        let y = [2.0, 3.0, 4.0];
        let r = upsparse(&t, &y, None).unwrap();
        assert_eq!(r.x, vec![0.0, 1.0, 2.0, 2.0, 0.0]);
        assert_eq!((r.l0, r.l1), (3, 5.0));
        assert_eq!(closed_form(&t, &y).unwrap(), r.x);
        assert!(r.states.iter().all(|s| s.state == State::Up));
        assert!(r.recovery_condition);
        assert!(!r.unique_sparsest);
        assert_eq!(upsparse(&t, &[0.0; 3], None).unwrap().x, vec![0.0; 5]);
        let bad = [1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(matches!(upsparse(&t, &y, Some(&bad)), Err(Error::InfeasibleStart)));
    }

    #[test]
    fn shared_loss_moves_to_top_link() {
        let t = fig2();
        assert_eq!((t.n(), t.m()), (12, 8));
        let y = vec![0.3; 8];
        let r = solve(&t, &y).unwrap();
        assert_eq!(r.support(), vec![t.top_link()]);
        assert_eq!(r.l0, 1);

        // Pushing the top loss into b, c, d gives 3 lossy links; receiver gives 8.
        let mut x = vec![0.0; t.n()];
        for k in t.children(t.top_link()) {
            x[k - 1] = 0.3;
        }
        let y3 = forward(&t, &x).unwrap();
        assert!(is_feasible(&t, &x, &y, TOL) && y3 == y);
        assert_eq!(l0(&x), 3);
        let mut x = x;
        put_in_upstate(&t, t.top_link(), &mut x).unwrap();
        assert_eq!(l0(&x), 1);
        let recv = receiver_solution(&t, &y).unwrap();
        assert_eq!(l0(&recv), 8);
        assert!(!recovery_condition(&t, &recv));
    }

    #[test]
    fn complex_states_and_uniqueness() {
        let t = star(3);
        let down = classify_complexes(&t, &[2.0, 3.0, 4.0, 0.0]);
        assert_eq!(down[0].state, State::Down);
        assert_eq!((down[0].delta, down[0].min_multiplicity), (2.0, 1));
        let mixed = classify_complexes(&t, &[1.0, 2.0, 3.0, 1.0]);
        assert_eq!(mixed[0].state, State::Mixed);

        // One lossless child under a lossy link: the downstate has equal sparsity.
        assert!(!unique_sparsest(&t, &[0.0, 1.0, 2.0, 2.0]));
        assert!(unique_sparsest(&t, &[0.0, 0.0, 2.0, 2.0]));
        assert!(unique_sparsest(&t, &[0.0; 4]));

        // Receiver solution on a height-2 tree: every complex is in downstate.
        let r = classify_complexes(&t, &receiver_solution(&t, &[1.0, 2.0, 3.0]).unwrap());
        assert!(r.iter().all(|s| s.state == State::Down));
    }

    #[test]
    fn coupled_complexes() {
        // Lower complex (node 5) in downstate, upper complex (node 4) in
        // upstate through the lossless link 5.
        let t = fig1();
        let x = [1.0, 2.0, 1.0, 0.5, 0.0];
        let y = forward(&t, &x).unwrap();
        let mut moved = x.to_vec();
        put_in_upstate(&t, 5, &mut moved).unwrap();
        assert_eq!(l0(&moved), l0(&x));
        assert!(is_feasible(&t, &moved, &y, TOL));
        // The upper complex is no longer minimally sparse.
        let upper = classify_complexes(&t, &moved)[0];
        assert_eq!(upper.state, State::Mixed);
        assert_eq!(upper.min_multiplicity, 2);
        put_in_upstate(&t, 4, &mut moved).unwrap();
        assert_eq!(l0(&moved), 2);
        assert_eq!(solve(&t, &y).unwrap().x, moved);
    }

    #[test]
    fn ternary_small_k_is_unique() {
        let t = gen_regular_tree(3, 3).unwrap();
        for a in 1..=t.n() {
            for b in a + 1..=t.n() {
                let mut x = vec![0.0; t.n()];
                x[a - 1] = 0.05;
                x[b - 1] = 0.07;
                let y = forward(&t, &x).unwrap();
                let r = solve(&t, &y).unwrap();
                assert!(r.unique_sparsest, "links {a},{b}");
            }
        }
    }
}
