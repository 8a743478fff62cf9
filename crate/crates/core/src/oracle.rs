//! Brute-force checks that do not share code paths with the solvers:
//! exhaustive support enumeration for the sparsest solution, a uniqueness
//! census over random loss placements, feasible-space sampling for `l1`,
//! a grid search over interval observations, and the adversarial pair
//! construction showing non-uniqueness above a degree bound.

use rand::Rng;
use serde::Serialize;

use crate::baselines::{binarize, scfs};
use crate::error::{check_len, Error, Result};
use crate::lossmodel::{addloss_value, forward, is_feasible, l0, l1, sample_feasible, TOL};
use crate::noiseless::{solve, support};
use crate::noisy::{IntervalObservation, NoisySolution, Objective, Upper};
use crate::par::map_range;
use crate::rng::substream;
use crate::topology::{sample_links, LogicalTree};

/// Default cap on `n` for exhaustive enumeration.
pub const ENUMERATION_LIMIT: usize = 26;

/// Feasibility tolerance for restricted systems (residual and sign).
pub const RESTRICTED_TOL: f64 = 1e-7;

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseSolution {
    pub support: Vec<usize>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationResult {
    pub k_star: usize,
    pub solutions: Vec<SparseSolution>,
    pub unique: bool,
    /// Supports of size `k_star` whose restricted system is consistent but
    /// rank-deficient. A strictly positive solution on such a support could
    /// be slid along the null space to a smaller support, so none of them
    /// can hold a sparsest solution; they are listed for inspection only.
    pub rank_deficient: Vec<Vec<usize>>,
    pub supports_checked: usize,
}

enum Restricted {
    Solved(Vec<f64>),
    Deficient,
    Inconsistent,
}

/// Solves the dense system `a x = y` by Gaussian elimination with partial
/// pivoting.
fn solve_restricted(a: &[Vec<f64>], y: &[f64], tol: f64) -> Restricted {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(y)
        .map(|(r, &v)| {
            let mut r = r.clone();
            r.push(v);
            r
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(cols);
    let mut deficient = false;
    for c in 0..cols {
        let best = (pivot_row..rows).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()));
        let Some(p) = best.filter(|&p| m[p][c].abs() > PIVOT_EPS) else {
            deficient = true;
            continue;
        };
        m.swap(pivot_row, p);
        for r in pivot_row + 1..rows {
            let f = m[r][c] / m[pivot_row][c];
            if f != 0.0 {
                for k in c..=cols {
                    m[r][k] -= f * m[pivot_row][k];
                }
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|r| r[cols].abs() > tol) {
        return Restricted::Inconsistent;
    }
    if deficient {
        return Restricted::Deficient;
    }
    let mut x = vec![0.0; cols];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let s: f64 = (c + 1..cols).map(|k| m[r][k] * x[k]).sum();
        x[c] = (m[r][cols] - s) / m[r][c];
    }
    // Verify against the original system rather than the reduced one.
    let residual = a
        .iter()
        .zip(y)
        .map(|(r, &v)| (r.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - v).abs())
        .fold(0.0, f64::max);
    if residual > tol {
        Restricted::Inconsistent
    } else {
        Restricted::Solved(x)
    }
}

/// Visits every `k`-subset of `items` in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    if k > items.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut chosen = vec![0; k];
    loop {
        for (c, &i) in chosen.iter_mut().zip(&idx) {
            *c = items[i];
        }
        f(&chosen);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + items.len() - k) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

pub fn sparsest_enumerate(tree: &LogicalTree, y: &[f64], k_max: usize, tol: f64) -> Result<EnumerationResult> {
    sparsest_enumerate_with_limit(tree, y, k_max, tol, ENUMERATION_LIMIT)
}

/// Scans supports of size `0, 1, 2, ...` and stops at the first size with a
/// non-negative solution.
///
/// Links on a path observed as lossless are excluded up front, and a support
/// is only solved if its links reach every lossy path.
pub fn sparsest_enumerate_with_limit(
    tree: &LogicalTree,
    y: &[f64],
    k_max: usize,
    tol: f64,
    limit: usize,
) -> Result<EnumerationResult> {
    let (n, m) = (tree.n(), tree.m());
    if n > limit {
        return Err(Error::InstanceTooLarge { n, limit });
    }
    check_len("path observation", m, y.len())?;
    if k_max > m {
        return Err(Error::ParameterOutOfRange(format!("k_max = {k_max} exceeds m = {m}")));
    }
    let lossy: Vec<usize> = (1..=m).filter(|&j| y[j - 1] > tol).collect();
    let is_lossy_path = |j: usize| y[j - 1] > tol;
    let candidates: Vec<usize> = (1..=n)
        .filter(|&k| tree.leaf_range(k).all(is_lossy_path))
        .collect();
    let mut row_of = vec![usize::MAX; m + 1];
    for (r, &j) in lossy.iter().enumerate() {
        row_of[j] = r;
    }
    let rhs: Vec<f64> = lossy.iter().map(|&j| y[j - 1]).collect();

    let mut checked = 0;
    for k in 0..=k_max {
        let mut solutions: Vec<SparseSolution> = Vec::new();
        let mut rank_deficient = Vec::new();
        for_each_subset(&candidates, k, |s| {
            let mut covered = vec![false; lossy.len()];
            for &link in s {
                for j in tree.leaf_range(link) {
                    covered[row_of[j]] = true;
                }
            }
            if !covered.iter().all(|&c| c) {
                return;
            }
            checked += 1;
            let a: Vec<Vec<f64>> = lossy
                .iter()
                .map(|&j| s.iter().map(|&link| f64::from(u8::from(tree.leaf_range(link).contains(&j)))).collect())
                .collect();
            match solve_restricted(&a, &rhs, tol) {
                Restricted::Solved(xs) if xs.iter().all(|&v| v >= -tol) => {
                    let mut x = vec![0.0; n];
                    for (&link, &v) in s.iter().zip(&xs) {
                        x[link - 1] = v;
                    }
                    let dup = solutions.iter().any(|o| {
                        o.x.iter().zip(&x).all(|(p, q)| (p - q).abs() <= tol)
                    });
                    if !dup {
                        solutions.push(SparseSolution { support: s.to_vec(), x });
                    }
                }
                Restricted::Deficient => rank_deficient.push(s.to_vec()),
                _ => {}
            }
        });
        if !solutions.is_empty() {
            return Ok(EnumerationResult {
                k_star: k,
                unique: solutions.len() == 1,
                solutions,
                rank_deficient,
                supports_checked: checked,
            });
        }
    }
    Err(Error::Infeasible(format!("no non-negative solution with at most {k_max} lossy links")))
}

/// How loss placements are chosen in a census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// `trials` independent uniform draws of `K` links.
    Random,
    /// Every `K`-subset of links once; `trials` is ignored.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusConfig {
    pub k: usize,
    /// Per-link loss probability range.
    pub loss_range: (f64, f64),
    pub trials: usize,
    pub seed: u64,
    pub placement: Placement,
}

impl CensusConfig {
    pub fn new(k: usize, trials: usize, seed: u64) -> Self {
        Self {
            k,
            loss_range: (0.01, 0.10),
            trials,
            seed,
            placement: Placement::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusResult {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub p_unique: f64,
    /// Fraction of trials where UpSparse returns the true loss vector.
    pub p_l1_recovers_true: f64,
    /// Fraction of trials where SCFS returns exactly the true lossy links.
    pub p_scfs_exact: f64,
    /// Fraction where the enumerated sparsity equals the solver's `l0`.
    pub p_l0_agrees: f64,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    unique: bool,
    recovered: bool,
    scfs_exact: bool,
    l0_agrees: bool,
}

fn census_trial(tree: &LogicalTree, links: &[usize], rng: &mut impl Rng, range: (f64, f64)) -> Result<TrialOutcome> {
    let mut x = vec![0.0; tree.n()];
    for &k in links {
        x[k - 1] = addloss_value(rng.random_range(range.0..=range.1));
    }
    let y = forward(tree, &x)?;
    let oracle = sparsest_enumerate(tree, &y, tree.m(), RESTRICTED_TOL)?;
    let sol = solve(tree, &y)?;
    let recovered = sol.x.iter().zip(&x).all(|(p, q)| (p - q).abs() <= TOL);
    let blamed = scfs(tree, &binarize(&y, TOL)?)?;
    Ok(TrialOutcome {
        unique: oracle.unique,
        recovered,
        scfs_exact: blamed == support(&x),
        l0_agrees: oracle.k_star == sol.l0,
    })
}

/// Fraction of random `K`-sparse loss vectors whose sparsest explanation is
/// unique, alongside UpSparse and SCFS exact-recovery rates on the same
/// trials.
pub fn uniqueness_census(tree: &LogicalTree, cfg: &CensusConfig) -> Result<CensusResult> {
    let (n, m) = (tree.n(), tree.m());
    if cfg.k > m {
        return Err(Error::ParameterOutOfRange(format!("K = {} exceeds m = {m}", cfg.k)));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge { n, limit: ENUMERATION_LIMIT });
    }
    let (lo, hi) = cfg.loss_range;
    if !(0.0 < lo && lo <= hi && hi < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("loss range [{lo}, {hi}]")));
    }
    let k = cfg.k;
    let placements: Vec<Vec<usize>> = match cfg.placement {
        Placement::Random => Vec::new(),
        Placement::Exhaustive => {
            let all: Vec<usize> = (1..=n).collect();
            let mut out = Vec::new();
            for_each_subset(&all, k, |s| out.push(s.to_vec()));
            out
        }
    };
    let trials = match cfg.placement {
        Placement::Random => cfg.trials,
        Placement::Exhaustive => placements.len(),
    };
    if trials == 0 {
        return Err(Error::ParameterOutOfRange("census needs at least one trial".into()));
    }
    let outcomes = map_range(trials, |t| {
        let mut rng = substream(cfg.seed, &[k as u64, t as u64]);
        let links = match cfg.placement {
            Placement::Random => sample_links(&mut rng, n, k),
            Placement::Exhaustive => placements[t].clone(),
        };
        census_trial(tree, &links, &mut rng, cfg.loss_range)
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let frac = |f: fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / trials as f64;
    Ok(CensusResult {
        n,
        m,
        k,
        trials,
        seed: cfg.seed,
        p_unique: frac(|o| o.unique),
        p_l1_recovers_true: frac(|o| o.recovered),
        p_scfs_exact: frac(|o| o.scfs_exact),
        p_l0_agrees: frac(|o| o.l0_agrees),
    })
}

pub const CENSUS_CSV_HEADER: &str = "tree,n,m,K,trials,p_unique,p_l1_recovers_true,seed";

pub fn census_csv_row(tree_name: &str, r: &CensusResult) -> String {
    format!(
        "{tree_name},{},{},{},{},{:.6},{:.6},{}",
        r.n, r.m, r.k, r.trials, r.p_unique, r.p_l1_recovers_true, r.seed
    )
}

/// `true` iff no sampled feasible solution has smaller `l1` than `x_star`,
/// and every sample that differs from it has strictly larger `l1`.
pub fn l1_sampling_check(tree: &LogicalTree, y: &[f64], x_star: &[f64], samples: usize, seed: u64) -> Result<bool> {
    if !is_feasible(tree, x_star, y, TOL) {
        return Err(Error::Infeasible("candidate does not reproduce the observation".into()));
    }
    let best = l1(x_star);
    let mut rng = substream(seed, &[0x11]);
    for s in 0..samples {
        // Alternate between interior draws and draws pinned to faces.
        let boundary = if s % 2 == 0 { 0.0 } else { 0.5 };
        let xs = sample_feasible(tree, y, boundary, &mut rng);
        let far = xs.iter().zip(x_star).any(|(p, q)| (p - q).abs() > TOL);
        let v = l1(&xs);
        if v + 1e-12 < best || (far && v <= best) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A full-column-rank support with a precomputed left inverse, so that a
/// candidate solution for any `y` costs one small matrix product.
struct VertexSolver {
    links: Vec<usize>,
    /// Paths whose rows form an invertible square block of `A_S`.
    rows: Vec<usize>,
    inverse: Vec<Vec<f64>>,
}

fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    let mut inv: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= PIVOT_EPS {
            return None;
        }
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c];
        for k in 0..d {
            a[c][k] /= piv;
            inv[c][k] /= piv;
        }
        for r in 0..d {
            if r != c && a[r][c] != 0.0 {
                let f = a[r][c];
                for k in 0..d {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    Some(inv)
}

fn vertex_solvers(tree: &LogicalTree) -> Vec<VertexSolver> {
    let (n, m) = (tree.n(), tree.m());
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let links: Vec<usize> = (1..=n).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        if links.len() > m {
            continue;
        }
        // Greedy row selection by elimination.
        let full: Vec<Vec<f64>> = (1..=m)
            .map(|j| links.iter().map(|&k| f64::from(u8::from(tree.leaf_range(k).contains(&j)))).collect())
            .collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut rows = Vec::new();
        for (j, row) in full.iter().enumerate() {
            let mut reduced = row.clone();
            for b in &basis {
                let lead = b.iter().position(|v| v.abs() > PIVOT_EPS).expect("basis rows are non-zero");
                let f = reduced[lead] / b[lead];
                if f != 0.0 {
                    for (r, &bv) in reduced.iter_mut().zip(b) {
                        *r -= f * bv;
                    }
                }
            }
            if reduced.iter().any(|v| v.abs() > PIVOT_EPS) {
                basis.push(reduced);
                rows.push(j + 1);
            }
        }
        if rows.len() < links.len() {
            continue;
        }
        let square: Vec<Vec<f64>> = rows.iter().map(|&j| full[j - 1].clone()).collect();
        if let Some(inverse) = invert(square) {
            out.push(VertexSolver { links, rows, inverse });
        }
    }
    out
}

/// Smallest `l0` and smallest `l1` over the non-negative basic solutions of
/// `A x = y`. Both minima are attained at such vertices.
fn vertex_minima(tree: &LogicalTree, solvers: &[VertexSolver], y: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = if y.iter().all(|&v| v.abs() <= RESTRICTED_TOL) {
        Some((0, 0.0))
    } else {
        None
    };
    let mut x = vec![0.0; tree.n()];
    'next: for s in solvers {
        let xs: Vec<f64> = s
            .inverse
            .iter()
            .map(|r| r.iter().zip(&s.rows).map(|(a, &j)| a * y[j - 1]).sum())
            .collect();
        if xs.iter().any(|&v| v < -RESTRICTED_TOL) {
            continue;
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        for (&k, &v) in s.links.iter().zip(&xs) {
            x[k - 1] = v;
        }
        for j in 1..=tree.m() {
            let sum: f64 = tree.path(j).iter().map(|&k| x[k - 1]).sum();
            if (sum - y[j - 1]).abs() > RESTRICTED_TOL {
                continue 'next;
            }
        }
        let (a, b) = (l0(&x), xs.iter().map(|v| v.max(0.0)).sum::<f64>());
        best = Some(match best {
            None => (a, b),
            Some((p, q)) => (p.min(a), q.min(b)),
        });
    }
    best
}

/// `l0` and `l1` minima over all non-negative solutions, by vertex
/// enumeration. Intended for small trees.
pub fn min_vertex_enumerate(tree: &LogicalTree, y: &[f64]) -> Result<(usize, f64)> {
    const LIMIT: usize = 16;
    if tree.n() > LIMIT {
        return Err(Error::InstanceTooLarge { n: tree.n(), limit: LIMIT });
    }
    check_len("path observation", tree.m(), y.len())?;
    vertex_minima(tree, &vertex_solvers(tree), y)
        .ok_or_else(|| Error::Infeasible("no non-negative solution".into()))
}

pub const GRID_LIMIT: usize = 10;

/// Slack allowed on `l1` comparisons in the grid search.
pub const GRID_L1_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub points: usize,
    pub grid_best_l0: usize,
    pub grid_best_l1: f64,
    pub candidate_l0: usize,
    pub candidate_l1: f64,
    pub passed: bool,
}

/// Discretises every interval (unbounded ends capped at the largest finite
/// bound plus the largest lower end) and checks that no grid observation
/// admits a sparser (`MinL0`, `MinL1AmongMinL0`) or lower-`l1` (`MinL1`)
/// solution than the candidate.
pub fn noisy_grid_check(
    tree: &LogicalTree,
    obs: &IntervalObservation,
    candidate: &NoisySolution,
    grid_steps: usize,
) -> Result<GridReport> {
    if tree.n() > GRID_LIMIT {
        return Err(Error::InstanceTooLarge { n: tree.n(), limit: GRID_LIMIT });
    }
    check_len("interval observation", tree.m(), obs.len())?;
    if grid_steps < 2 {
        return Err(Error::ParameterOutOfRange("grid needs at least two steps".into()));
    }
    let max_finite = obs.hi().iter().filter_map(|h| h.finite()).fold(0.0, f64::max);
    let max_lo = obs.lo().iter().copied().fold(0.0, f64::max);
    let cap = max_finite + max_lo;
    let axes: Vec<Vec<f64>> = obs
        .lo()
        .iter()
        .zip(obs.hi())
        .map(|(&lo, &hi)| {
            let top = match hi {
                Upper::Finite(v) => v.min(cap),
                Upper::Unbounded => cap,
            };
            if top <= lo {
                vec![lo]
            } else {
                (0..grid_steps).map(|s| lo + (top - lo) * s as f64 / (grid_steps - 1) as f64).collect()
            }
        })
        .collect();
    let solvers = vertex_solvers(tree);
    let m = tree.m();
    let mut idx = vec![0usize; m];
    let mut y = vec![0.0; m];
    let (mut best0, mut best1, mut points) = (usize::MAX, f64::INFINITY, 0);
    loop {
        for j in 0..m {
            y[j] = axes[j][idx[j]];
        }
        if let Some((a, b)) = vertex_minima(tree, &solvers, &y) {
            best0 = best0.min(a);
            best1 = best1.min(b);
        }
        points += 1;
        let Some(pos) = (0..m).find(|&j| idx[j] + 1 < axes[j].len()) else {
            break;
        };
        idx[pos] += 1;
        idx[..pos].iter_mut().for_each(|v| *v = 0);
    }
    let passed = match candidate.mode {
        Objective::MinL0 | Objective::MinL1AmongMinL0 => best0 >= candidate.l0,
        Objective::MinL1 => best1 >= candidate.l1 - GRID_L1_TOL,
    };
    Ok(GridReport {
        points,
        grid_best_l0: best0,
        grid_best_l1: best1,
        candidate_l0: candidate.l0,
        candidate_l1: candidate.l1,
        passed,
    })
}

/// Two non-negative loss vectors with identical path observations, built at
/// a branch node. Values are stored as integer multiples of `w` so equality
/// of the observations can be checked exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguousPair {
    pub w: f64,
    pub u_units: Vec<u32>,
    pub v_units: Vec<u32>,
}

impl AmbiguousPair {
    pub fn u(&self) -> Vec<f64> {
        self.u_units.iter().map(|&c| f64::from(c) * self.w).collect()
    }

    pub fn v(&self) -> Vec<f64> {
        self.v_units.iter().map(|&c| f64::from(c) * self.w).collect()
    }

    /// Path sums of `u` and `v` in units of `w`.
    pub fn path_units(&self, tree: &LogicalTree) -> (Vec<u32>, Vec<u32>) {
        let sums = |units: &[u32]| (1..=tree.m()).map(|j| tree.path(j).iter().map(|&k| units[k - 1]).sum()).collect();
        (sums(&self.u_units), sums(&self.v_units))
    }
}

/// At internal node `i` with `g` children: `u` puts `w` on the father link
/// and on the first `K - 1` children; `v` puts `2w` on those children and
/// `w` on the remaining ones. Requires `g <= K <= g + 1`.
pub fn ambiguous_pair(tree: &LogicalTree, i: usize, k: usize, w: f64) -> Result<AmbiguousPair> {
    if !tree.is_internal(i) {
        return Err(Error::NotBranchNode(i));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("w must be positive, got {w}")));
    }
    let kids = tree.children(i);
    let g_out = kids.len();
    let g_in = 1;
    if k < g_out.max(g_in) {
        return Err(Error::KTooSmall { k, min: g_out.max(g_in) });
    }
    if k - g_in > g_out {
        return Err(Error::KTooLarge { k, max: g_out + g_in });
    }
    let mut u = vec![0u32; tree.n()];
    let mut v = vec![0u32; tree.n()];
    u[i - 1] = 1;
    for (pos, &c) in kids.iter().enumerate() {
        if pos < k - g_in {
            u[c - 1] = 1;
            v[c - 1] = 2;
        } else {
            v[c - 1] = 1;
        }
    }
    Ok(AmbiguousPair { w, u_units: u, v_units: v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fig1, fig2, star};
    use crate::lossmodel::receiver_solution;
    use crate::noisy::upsparse_plus;
    use crate::topology::{gen_random_tree, gen_regular_tree};

    #[test]
    fn subsets_in_order() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 2, 3, 4], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![1, 2]);
        assert_eq!(seen[5], vec![3, 4]);
        let mut empty = 0;
        for_each_subset(&[1, 2], 0, |s| {
            assert!(s.is_empty());
            empty += 1;
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn enumerate_fig1() {
        let r = sparsest_enumerate(&fig1(), &[2.0, 3.0, 4.0], 3, RESTRICTED_TOL).unwrap();
        assert_eq!(r.k_star, 3);
        // Link 4 has a single lossless child, so its loss can be pushed
        // down onto links 5 and 3 at equal sparsity, and further down to
        // the receivers.
        assert!(!r.unique);
        let xs: Vec<&Vec<f64>> = r.solutions.iter().map(|s| &s.x).collect();
        assert_eq!(xs.len(), 3);
        assert!(xs.contains(&&vec![2.0, 3.0, 4.0, 0.0, 0.0]));
        assert!(xs.contains(&&vec![0.0, 1.0, 2.0, 2.0, 0.0]));
        assert!(xs.contains(&&vec![0.0, 1.0, 4.0, 0.0, 2.0]));
        let z = sparsest_enumerate(&fig1(), &[0.0; 3], 3, RESTRICTED_TOL).unwrap();
        assert_eq!((z.k_star, z.unique), (0, true));
    }

    #[test]
    fn enumerate_fig2_equal_paths() {
        let t = fig2();
        let r = sparsest_enumerate(&t, &[0.2; 8], 8, RESTRICTED_TOL).unwrap();
        assert_eq!((r.k_star, r.unique), (1, true));
        assert_eq!(r.solutions[0].support, vec![t.top_link()]);
    }

    #[test]
    fn enumerate_detects_ties() {
        // One lossless child under a lossy link: two sparsest explanations.
        let t = star(3);
        let r = sparsest_enumerate(&t, &[1.0, 2.0, 2.0], 3, RESTRICTED_TOL).unwrap();
        assert_eq!(r.k_star, 3);
        assert!(!r.unique);
        assert_eq!(r.solutions.len(), 2);
        assert!(sparsest_enumerate(&gen_regular_tree(3, 3).unwrap(), &[0.1; 9], 1, 1e-7).is_ok());
        let big = gen_regular_tree(3, 4).unwrap();
        assert!(matches!(
            sparsest_enumerate(&big, &vec![0.1; big.m()], 1, 1e-7),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn census_small_k_is_unique() {
        let t = gen_regular_tree(3, 3).unwrap();
        for k in 1..=2 {
            let r = uniqueness_census(&t, &CensusConfig::new(k, 100, 5)).unwrap();
            assert_eq!(r.p_unique, 1.0);
            assert_eq!(r.p_l0_agrees, 1.0);
        }
        let cfg = CensusConfig {
            placement: Placement::Exhaustive,
            ..CensusConfig::new(2, 0, 5)
        };
        let r = uniqueness_census(&t, &cfg).unwrap();
        assert_eq!((r.trials, r.p_unique), (78, 1.0));
        let again = uniqueness_census(&t, &CensusConfig::new(3, 50, 9)).unwrap();
        assert_eq!(again, uniqueness_census(&t, &CensusConfig::new(3, 50, 9)).unwrap());
        assert_eq!(census_csv_row("ternary:13", &r).split(',').count(), CENSUS_CSV_HEADER.split(',').count());
    }

    #[test]
    fn l1_sampling() {
        let t = fig2();
        let y = vec![0.3; 8];
        let star_x = solve(&t, &y).unwrap().x;
        assert!(l1_sampling_check(&t, &y, &star_x, 1000, 3).unwrap());
        let recv = receiver_solution(&t, &y).unwrap();
        assert!(!l1_sampling_check(&t, &y, &recv, 1000, 3).unwrap());
        assert!(l1_sampling_check(&t, &[0.0; 8], &[0.0; 12], 10, 3).unwrap());
        assert!(l1_sampling_check(&t, &y, &[0.0; 12], 10, 3).is_err());
    }

    #[test]
    fn vertex_minima_match_solver() {
        for seed in 0..20 {
            let t = gen_random_tree(4, 3, seed).unwrap();
            let mut rng = substream(seed, &[1]);
            let y: Vec<f64> = (0..t.m()).map(|_| rng.random_range(0.0..1.0)).collect();
            let (a, b) = min_vertex_enumerate(&t, &y).unwrap();
            let s = solve(&t, &y).unwrap();
            assert_eq!(a, s.l0);
            assert!((b - s.l1).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_checks_on_local_complexes() {
        let t = star(3);
        let b = IntervalObservation::new(vec![0.0, 3.0, 5.0], vec![Upper::Finite(2.0), Upper::Unbounded, Upper::Unbounded]).unwrap();
        let c0 = upsparse_plus(&t, &b, Objective::MinL0).unwrap();
        assert_eq!(c0.l0, 2);
        assert!(noisy_grid_check(&t, &b, &c0, 9).unwrap().passed);
        let d = IntervalObservation::new(vec![1.0, 3.0, 5.0], vec![Upper::Finite(4.0), Upper::Finite(4.0), Upper::Finite(6.0)]).unwrap();
        let c1 = upsparse_plus(&t, &d, Objective::MinL1).unwrap();
        assert_eq!(c1.l1, 5.0);
        let rep = noisy_grid_check(&t, &d, &c1, 9).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.grid_best_l1, 5.0);

        // Degenerate intervals: the grid is the exact observation.
        let exact = IntervalObservation::exact(&[2.0, 3.0, 4.0]).unwrap();
        let f = fig1();
        let c = upsparse_plus(&f, &exact, Objective::MinL0).unwrap();
        let rep = noisy_grid_check(&f, &exact, &c, 9).unwrap();
        assert_eq!((rep.points, rep.grid_best_l0, rep.passed), (1, 3, true));
    }

    #[test]
    fn ambiguous_pairs() {
        let b = gen_regular_tree(2, 3).unwrap();
        let i = b.top_link();
        let p = ambiguous_pair(&b, i, 2, 0.1).unwrap();
        let (pu, pv) = p.path_units(&b);
        assert_eq!(pu, pv);
        assert_eq!(p.u_units.iter().filter(|&&c| c > 0).count(), 2);
        assert_eq!(p.u_units[i - 1], 1);
        let ternary = gen_regular_tree(3, 3).unwrap();
        let p = ambiguous_pair(&ternary, ternary.top_link(), 3, 0.05).unwrap();
        let (pu, pv) = p.path_units(&ternary);
        assert_eq!(pu, pv);
        assert_eq!(l0(&p.u()), 3);
        assert!(l0(&p.v()) <= 3);
        let fu = forward(&ternary, &p.u()).unwrap();
        let fv = forward(&ternary, &p.v()).unwrap();
        assert!(fu.iter().zip(&fv).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(matches!(ambiguous_pair(&ternary, ternary.top_link(), 2, 0.1), Err(Error::KTooSmall { .. })));
        assert!(matches!(ambiguous_pair(&ternary, ternary.top_link(), 5, 0.1), Err(Error::KTooLarge { .. })));
        assert!(matches!(ambiguous_pair(&ternary, 1, 3, 0.1), Err(Error::NotBranchNode(1))));
    }
}
