//! Interval observations: each path loss is only known to lie in
//! `[y_lo, y_hi]`, and any vector inside that box is an admissible
//! observation.
//!
//! The local analysis works on a single complex (one internal link above a
//! set of children) parameterised by the internal link loss `x`; the global
//! solver runs a top-down pass driven by the subtree statistics `z^u`, `z^l`
//! and `z^L`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, Error, Result};
use crate::lossmodel::{l0, l1, TOL};
use crate::topology::{LogicalTree, ROOT};

/// Upper end of an observation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    Unbounded,
}

impl Upper {
    pub fn finite(self) -> Option<f64> {
        match self {
            Upper::Finite(v) => Some(v),
            Upper::Unbounded => None,
        }
    }

    pub fn min(self, other: Upper) -> Upper {
        match (self, other) {
            (Upper::Finite(a), Upper::Finite(b)) => Upper::Finite(a.min(b)),
            (Upper::Finite(a), Upper::Unbounded) | (Upper::Unbounded, Upper::Finite(a)) => {
                Upper::Finite(a)
            }
            (Upper::Unbounded, Upper::Unbounded) => Upper::Unbounded,
        }
    }

    /// Total order against a finite value; `Unbounded` exceeds everything.
    pub fn cmp_value(self, v: f64) -> Ordering {
        match self {
            Upper::Finite(a) => a.total_cmp(&v),
            Upper::Unbounded => Ordering::Greater,
        }
    }

    /// `v <= self`.
    pub fn admits(self, v: f64) -> bool {
        self.cmp_value(v) != Ordering::Less
    }

    /// `min(self, v)` as a finite value.
    pub fn clamp(self, v: f64) -> f64 {
        match self {
            Upper::Finite(a) => a.min(v),
            Upper::Unbounded => v,
        }
    }
}

impl fmt::Display for Upper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upper::Finite(v) => write!(f, "{v}"),
            Upper::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for Upper {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Upper::Finite(v) => s.serialize_f64(*v),
            Upper::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Upper {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Upper::Finite(v)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "Infinity" | "unbounded") => {
                Ok(Upper::Unbounded)
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Per-path intervals `[lo_j, hi_j]` in addloss units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalObservation {
    lo: Vec<f64>,
    hi: Vec<Upper>,
}

#[derive(Serialize, Deserialize)]
struct IntervalRecord {
    path: usize,
    lo: f64,
    hi: Upper,
}

impl IntervalObservation {
    pub fn new(lo: Vec<f64>, hi: Vec<Upper>) -> Result<Self> {
        check_len("interval upper ends", lo.len(), hi.len())?;
        for (j, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            let ok = l.is_finite() && l >= 0.0 && h.admits(l) && h.finite().is_none_or(f64::is_finite);
            if !ok {
                return Err(Error::InvalidInterval {
                    path: j + 1,
                    lo: l,
                    hi: h.finite().unwrap_or(f64::INFINITY),
                });
            }
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate intervals `[y_j, y_j]`.
    pub fn exact(y: &[f64]) -> Result<Self> {
        Self::new(y.to_vec(), y.iter().map(|&v| Upper::Finite(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[Upper] {
        &self.hi
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        y.len() == self.len()
            && y.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&l, &h))| v >= l - tol && h.admits(v - tol))
    }

    /// Reads `[{"path": j, "lo": v, "hi": v | "inf"}, ...]` with 1-based paths.
    pub fn from_json(text: &str, m: usize) -> Result<Self> {
        let records: Vec<IntervalRecord> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let mut lo = vec![f64::NAN; m];
        let mut hi = vec![Upper::Unbounded; m];
        for r in &records {
            if r.path == 0 || r.path > m || !lo[r.path - 1].is_nan() {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("path {} is out of range or repeated", r.path),
                });
            }
            lo[r.path - 1] = r.lo;
            hi[r.path - 1] = r.hi;
        }
        if let Some(j) = lo.iter().position(|v| v.is_nan()) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("no interval for path {}", j + 1),
            });
        }
        Self::new(lo, hi)
    }

    pub fn to_json(&self) -> String {
        let records: Vec<IntervalRecord> = (0..self.len())
            .map(|j| IntervalRecord {
                path: j + 1,
                lo: self.lo[j],
                hi: self.hi[j],
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("intervals serialize")
    }

    fn min_upper(&self) -> Upper {
        self.hi.iter().fold(Upper::Unbounded, |a, &b| a.min(b))
    }

    fn min_lower(&self) -> f64 {
        self.lo.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max_lower(&self) -> f64 {
        self.lo.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of lower ends strictly above `x`: the lossy child links of the
    /// Glocal solution at `x`.
    fn lossy_above(&self, x: f64) -> usize {
        self.lo.iter().filter(|&&l| l > x).count()
    }
}

/// Optimal values of the internal link loss in a local complex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimalSet {
    Point { x: f64 },
    Interval { lo: f64, hi: Upper },
    /// `{point} U [lo, hi]`.
    PointAndInterval { point: f64, lo: f64, hi: Upper },
}

impl OptimalSet {
    fn span(lo: f64, hi: Upper) -> Self {
        if hi.cmp_value(lo) == Ordering::Equal {
            OptimalSet::Point { x: lo }
        } else {
            OptimalSet::Interval { lo, hi }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            OptimalSet::Point { x: p } => x == p,
            OptimalSet::Interval { lo, hi } => x >= lo && hi.admits(x),
            OptimalSet::PointAndInterval { point, lo, hi } => x == point || (x >= lo && hi.admits(x)),
        }
    }

    pub fn is_unique(&self) -> bool {
        matches!(self, OptimalSet::Point { .. })
    }
}

/// Glocal solution `[ [lo_1 - x]^+, ..., [lo_m - x]^+, x ]` of a single
/// complex whose children observe `obs`; the last entry is the internal link.
pub fn glocal_family(obs: &IntervalObservation, x: f64) -> Result<Vec<f64>> {
    let (lo, hi) = (obs.min_lower(), obs.min_upper());
    if !(x >= lo && hi.admits(x)) {
        return Err(Error::XOutOfRange {
            x,
            lo,
            hi: hi.finite().unwrap_or(f64::INFINITY),
        });
    }
    let mut sol: Vec<f64> = obs.lo.iter().map(|&l| (l - x).max(0.0)).collect();
    sol.push(x);
    Ok(sol)
}

/// Child observations realised by the Glocal solution at `x`.
pub fn glocal_realized(obs: &IntervalObservation, x: f64) -> Vec<f64> {
    obs.lo.iter().map(|&l| l.max(x)).collect()
}

/// `l1` of the Glocal solution at `x`.
pub fn glocal_l1(obs: &IntervalObservation, x: f64) -> f64 {
    x + obs.lo.iter().map(|&l| (l - x).max(0.0)).sum::<f64>()
}

/// `l0` of the Glocal solution at `x`.
pub fn glocal_l0(obs: &IntervalObservation, x: f64) -> usize {
    obs.lossy_above(x) + usize::from(x > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalL0 {
    /// Which of the four sparsity cases applies (1-4).
    pub case: u8,
    pub set: OptimalSet,
    pub l0: usize,
    /// Representative: the largest `l1`-minimal point of `set`.
    pub x: f64,
    /// Case 3 only: `x = 0` is an equally sparse alternative to `x`.
    pub alternate_at_zero: bool,
    /// `y^L = max { lo_j : lo_j <= min_j hi_j }`.
    pub y_big_l: f64,
    pub tie_break: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalL1 {
    pub set: OptimalSet,
    pub l1: f64,
    /// `y^U = min { max_j lo_j, min_j hi_j }`; also the representative.
    pub x: f64,
    pub tie_break: &'static str,
}

fn check_complex(obs: &IntervalObservation) -> Result<()> {
    if obs.len() < 2 {
        return Err(Error::ParameterOutOfRange(
            "a local complex needs at least two child paths".into(),
        ));
    }
    Ok(())
}

/// `y^L`: the largest lower end not above the smallest upper end.
pub fn y_big_l(obs: &IntervalObservation) -> f64 {
    let hi = obs.min_upper();
    obs.lo
        .iter()
        .copied()
        .filter(|&l| hi.admits(l))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `y^U = min { max lo, min hi }`.
pub fn y_big_u(obs: &IntervalObservation) -> f64 {
    obs.min_upper().clamp(obs.max_lower())
}

/// Minimum-sparsity internal loss of a local complex.
///
/// The case split uses counts of lower ends strictly above a point, so ties
/// among the lower ends are handled without special cases: Case 3 is
/// `k(0) = k(y^L) + 1`, Case 4 is `k(0) > k(y^L) + 1`.
pub fn local_min_l0(obs: &IntervalObservation) -> Result<LocalL0> {
    check_complex(obs)?;
    let hi = obs.min_upper();
    let yl = y_big_l(obs);
    let k0 = obs.lossy_above(0.0);
    let k_yl = obs.lossy_above(yl);
    let interval = OptimalSet::span(yl, hi);

    let (case, set, l0, alternate_at_zero) = if obs.min_lower() > 0.0 {
        (1, interval, k_yl + 1, false)
    } else if yl == 0.0 {
        (2, OptimalSet::Point { x: 0.0 }, k0, false)
    } else if k0 == k_yl + 1 {
        let set = OptimalSet::PointAndInterval { point: 0.0, lo: yl, hi };
        (3, set, k0, true)
    } else {
        (4, interval, k_yl + 1, false)
    };
    let x = match set {
        OptimalSet::Point { x } => x,
        _ => best_l1_within(obs, yl, hi),
    };
    Ok(LocalL0 {
        case,
        set,
        l0,
        x,
        alternate_at_zero,
        y_big_l: yl,
        tie_break: "largest",
    })
}

/// Largest `l1`-minimiser of the Glocal family restricted to `[lo, hi]`.
fn best_l1_within(obs: &IntervalObservation, lo: f64, hi: Upper) -> f64 {
    // l1 slopes down until y^U and is flat or rising afterwards.
    hi.clamp(y_big_u(obs)).max(lo)
}

/// Minimum-`l1` internal loss of a local complex.
pub fn local_min_l1(obs: &IntervalObservation) -> Result<LocalL1> {
    check_complex(obs)?;
    let yu = y_big_u(obs);
    let mut sorted = obs.lo.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let second = sorted[1];
    let set = if yu < second {
        OptimalSet::Point { x: yu }
    } else {
        OptimalSet::span(second, Upper::Finite(yu))
    };
    Ok(LocalL1 {
        set,
        l1: glocal_l1(obs, yu),
        x: yu,
        tie_break: "largest",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalJoint {
    pub set: OptimalSet,
    pub x: f64,
    pub l0: usize,
    pub l1: f64,
}

/// Minimum `l1` among the minimum-`l0` internal losses of a complex.
pub fn local_min_l1_among_l0(obs: &IntervalObservation) -> Result<LocalJoint> {
    let sparse = local_min_l0(obs)?;
    let dense = local_min_l1(obs)?;
    let restrict = |lo: f64, hi: Upper| -> OptimalSet {
        // Intersect [lo, hi] with the l1-optimal set; fall back to the
        // nearest end when they are disjoint.
        let (a, b) = match dense.set {
            OptimalSet::Point { x } => (x, x),
            OptimalSet::Interval { lo, hi } => (lo, hi.finite().unwrap_or(f64::INFINITY)),
            OptimalSet::PointAndInterval { .. } => unreachable!("l1 optimum is an interval"),
        };
        let from = a.max(lo);
        let to = hi.clamp(b);
        if from <= to {
            OptimalSet::span(from, Upper::Finite(to))
        } else {
            OptimalSet::Point { x: best_l1_within(obs, lo, hi) }
        }
    };
    let set = match sparse.set {
        OptimalSet::Point { x } => OptimalSet::Point { x },
        OptimalSet::Interval { lo, hi } => restrict(lo, hi),
        OptimalSet::PointAndInterval { point, lo, hi } => {
            let part = restrict(lo, hi);
            let at_part = glocal_l1(obs, sparse.x);
            let at_point = glocal_l1(obs, point);
            match at_point.total_cmp(&at_part) {
                Ordering::Less => OptimalSet::Point { x: point },
                Ordering::Greater => part,
                Ordering::Equal => match part {
                    OptimalSet::Point { x } => OptimalSet::PointAndInterval {
                        point,
                        lo: x,
                        hi: Upper::Finite(x),
                    },
                    OptimalSet::Interval { lo, hi } => {
                        OptimalSet::PointAndInterval { point, lo, hi }
                    }
                    other => other,
                },
            }
        }
    };
    let x = match set {
        OptimalSet::Point { x } => x,
        OptimalSet::Interval { hi, .. } | OptimalSet::PointAndInterval { hi, .. } => {
            hi.finite().expect("l1-restricted sets are bounded")
        }
    };
    Ok(LocalJoint {
        set,
        x,
        l0: glocal_l0(obs, x),
        l1: glocal_l1(obs, x),
    })
}

/// Subtree statistics, indexed by node label (`ROOT` covers every path).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZStats {
    /// `z^u_i = min { hi_j : j in R(i) }`.
    pub upper: Vec<Upper>,
    /// `z^l_i = max { lo_j : j in R(i) }`.
    pub lower_max: Vec<f64>,
    /// `z^L_i = max { lo_j : j in R(i), lo_j <= z^u_i }`.
    pub big_l: Vec<f64>,
}

/// Bottom-up computation of `z^u`, `z^l` and `z^L`. Each node keeps the
/// sorted multiset of lower ends below it, merged from its children, so that
/// `z^L` is a binary search once `z^u` is known.
pub fn z_stats(tree: &LogicalTree, obs: &IntervalObservation) -> Result<ZStats> {
    check_len("interval observation", tree.m(), obs.len())?;
    let n = tree.n();
    let mut upper = vec![Upper::Unbounded; n + 1];
    let mut lower_max = vec![0.0; n + 1];
    let mut big_l = vec![0.0; n + 1];
    let mut sorted: Vec<Vec<f64>> = vec![Vec::new(); n + 1];

    for k in tree.postorder() {
        if tree.is_leaf(k) {
            upper[k] = obs.hi[k - 1];
            sorted[k] = vec![obs.lo[k - 1]];
        } else {
            let mut merged: Vec<f64> = Vec::new();
            let mut up = Upper::Unbounded;
            for &c in tree.children(k) {
                up = up.min(upper[c]);
                merged = merge_sorted(&merged, &sorted[c]);
                // Children are done with their multisets.
                sorted[c] = Vec::new();
            }
            upper[k] = up;
            sorted[k] = merged;
        }
        let set = &sorted[k];
        lower_max[k] = *set.last().expect("subtrees contain a leaf");
        let below = set.partition_point(|&l| upper[k].admits(l));
        big_l[k] = set[below - 1];
    }
    let top = tree.top_link();
    upper[ROOT] = upper[top];
    lower_max[ROOT] = lower_max[top];
    big_l[ROOT] = big_l[top];
    Ok(ZStats {
        upper,
        lower_max,
        big_l,
    })
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Threshold `z^L`: minimal `l0`.
    MinL0,
    /// Threshold `min { z^l, z^u }`: minimal `l1`.
    MinL1,
    /// `MinL0` with internal losses raised to `z^u` where that keeps
    /// sparsity: minimal `l1` among minimal-`l0` solutions.
    #[serde(rename = "min-l1-among-l0")]
    MinL1AmongMinL0,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::MinL0, Objective::MinL1, Objective::MinL1AmongMinL0];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MinL0 => "min-l0",
            Objective::MinL1 => "min-l1",
            Objective::MinL1AmongMinL0 => "min-l1-among-l0",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::ParameterOutOfRange(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisySolution {
    pub x: Vec<f64>,
    /// Realised path observation `A x`, inside the intervals.
    pub y: Vec<f64>,
    /// Loss of the path from the root to each node (`z[ROOT] = 0`).
    pub z: Vec<f64>,
    pub mode: Objective,
    pub l0: usize,
    pub l1: f64,
}

/// Top-down pass: `x_i = [t_i - z_f(i)]^+`, `z_i = z_f(i) + x_i` with the
/// per-node threshold `t_i` chosen by `mode`.
pub fn upsparse_plus(tree: &LogicalTree, obs: &IntervalObservation, mode: Objective) -> Result<NoisySolution> {
    let stats = z_stats(tree, obs)?;
    let n = tree.n();
    let mut x = vec![0.0; n];
    let mut z = vec![0.0_f64; n + 1];
    for &i in tree.preorder() {
        let above = z[tree.father(i)];
        let threshold = match mode {
            Objective::MinL0 | Objective::MinL1AmongMinL0 => stats.big_l[i],
            Objective::MinL1 => stats.upper[i].clamp(stats.lower_max[i]),
        };
        // z_i = max(z_f, t_i) keeps every z a copy of an input bound.
        let mut zi = above.max(threshold);
        if mode == Objective::MinL1AmongMinL0 && zi > above {
            if let Upper::Finite(u) = stats.upper[i] {
                if u < stats.lower_max[i] {
                    zi = u;
                }
            }
        }
        z[i] = zi;
        x[i - 1] = zi - above;
    }
    let y = z[1..=tree.m()].to_vec();
    Ok(NoisySolution {
        l0: l0(&x),
        l1: l1(&x),
        x,
        y,
        z,
        mode,
    })
}

/// `x` is non-negative and its path sums fall inside the intervals.
pub fn is_interval_feasible(tree: &LogicalTree, obs: &IntervalObservation, x: &[f64]) -> bool {
    match crate::lossmodel::forward(tree, x) {
        Ok(y) => x.iter().all(|&v| v >= -TOL) && obs.contains(&y, TOL),
        Err(_) => false,
    }
}
