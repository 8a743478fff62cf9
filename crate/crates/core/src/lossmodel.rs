//! Addloss transform, forward model `y = A x` and the formal solution family.
//!
//! Link loss probabilities `b` become additive link quantities through
//! `x = -ln(1 - b)`; path addloss is then the sum of link addloss along the
//! path. All functions take vectors indexed by `label - 1`.

use rand::Rng;
use serde::Deserialize;

use crate::error::{check_len, Error, Result};
use crate::topology::LogicalTree;

/// Shared classification threshold: a value is lossy iff it exceeds `TOL`.
pub const TOL: f64 = 1e-9;

/// `-ln(1 - b)` for a single probability in `[0, 1)`.
pub fn addloss_value(b: f64) -> f64 {
    -(-b).ln_1p()
}

/// `1 - exp(-x)` for a single addloss value.
pub fn inverse_addloss_value(x: f64) -> f64 {
    -(-x).exp_m1()
}

pub fn addloss(b: &[f64]) -> Result<Vec<f64>> {
    b.iter()
        .enumerate()
        .map(|(index, &v)| {
            if (0.0..1.0).contains(&v) {
                Ok(addloss_value(v))
            } else {
                Err(Error::OutOfDomain {
                    index,
                    value: v,
                    domain: "[0, 1)",
                })
            }
        })
        .collect()
}

pub fn inverse_addloss(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(index, &v)| {
            if v >= 0.0 && !v.is_nan() {
                Ok(inverse_addloss_value(v))
            } else {
                Err(Error::OutOfDomain {
                    index,
                    value: v,
                    domain: "[0, inf)",
                })
            }
        })
        .collect()
}

/// Cumulative loss from the root down to every node (`s[0]` is the root).
pub(crate) fn path_sums(tree: &LogicalTree, x: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; tree.n() + 1];
    for &k in tree.preorder() {
        sums[k] = sums[tree.father(k)] + x[k - 1];
    }
    sums
}

/// `y_j = sum of x_k over the links on path j`.
pub fn forward(tree: &LogicalTree, x: &[f64]) -> Result<Vec<f64>> {
    check_len("link vector", tree.n(), x.len())?;
    let sums = path_sums(tree, x);
    Ok(sums[1..=tree.m()].to_vec())
}

/// All loss on receiver links: `x_R = y`, `x_I = 0`.
pub fn receiver_solution(tree: &LogicalTree, y: &[f64]) -> Result<Vec<f64>> {
    check_len("path observation", tree.m(), y.len())?;
    let mut x = vec![0.0; tree.n()];
    x[..tree.m()].copy_from_slice(y);
    Ok(x)
}

/// `x_R = y - A_I x_I` for given internal values `x_internal` (labels
/// `m+1..=n`, in that order). Fails if any receiver value drops below `-TOL`.
pub fn general_solution(tree: &LogicalTree, x_internal: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (tree.m(), tree.n());
    check_len("internal link vector", n - m, x_internal.len())?;
    check_len("path observation", m, y.len())?;
    if let Some(i) = x_internal.iter().position(|&v| v < 0.0) {
        return Err(Error::OutOfDomain {
            index: m + i,
            value: x_internal[i],
            domain: "[0, inf)",
        });
    }
    let mut x = vec![0.0; n];
    x[m..].copy_from_slice(x_internal);
    let sums = path_sums(tree, &x);
    for j in 1..=m {
        // sums[j] only holds internal contributions since x_j is still zero.
        let v = y[j - 1] - sums[j];
        if v < -TOL {
            return Err(Error::Infeasible(format!(
                "receiver link {j} would carry {v:.3e}"
            )));
        }
        x[j - 1] = v.max(0.0);
    }
    Ok(x)
}

pub fn is_feasible(tree: &LogicalTree, x: &[f64], y: &[f64], tol: f64) -> bool {
    if x.len() != tree.n() || y.len() != tree.m() {
        return false;
    }
    if x.iter().any(|&v| v.is_nan() || v < -tol) {
        return false;
    }
    let sums = path_sums(tree, x);
    (1..=tree.m()).all(|j| (sums[j] - y[j - 1]).abs() <= tol)
}

/// Number of lossy entries (`> TOL`).
pub fn l0(x: &[f64]) -> usize {
    x.iter().filter(|&&v| v > TOL).count()
}

pub fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Samples a feasible solution by choosing internal links top-down, each
/// uniform on its conditional range `[0, min y over the subtree - loss above]`.
/// With probability `boundary` a coordinate is instead pinned to one end of
/// its range, which reaches the sparse faces of the polytope.
pub fn sample_feasible<R: Rng>(tree: &LogicalTree, y: &[f64], boundary: f64, rng: &mut R) -> Vec<f64> {
    let n = tree.n();
    let mut gamma = vec![f64::INFINITY; n + 1];
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
    let mut x = vec![0.0; n];
    let mut above = vec![0.0; n + 1];
    for &k in tree.preorder() {
        let base = above[tree.father(k)];
        if tree.is_internal(k) {
            let room = (gamma[k] - base).max(0.0);
            let v = if rng.random_bool(boundary) {
                if rng.random_bool(0.5) { 0.0 } else { room }
            } else {
                rng.random_range(0.0..=room)
            };
            x[k - 1] = v;
            above[k] = base + v;
        } else {
            x[k - 1] = (y[k - 1] - base).max(0.0);
        }
    }
    x
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonObservation {
    Plain(Vec<f64>),
    Tagged {
        #[serde(default)]
        scale: Scale,
        y: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Addloss,
    Probability,
}

/// Reads a path observation file and returns addloss values.
///
/// Accepted forms: a JSON array, a JSON object `{"scale": ..., "y": [...]}`,
/// or text with an optional `scale: addloss|probability` header followed by
/// `y <j> <value>` lines.
pub fn parse_observation(text: &str, m: usize) -> Result<Vec<f64>> {
    let trimmed = text.trim_start();
    let (scale, values) = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let parsed: JsonObservation = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        match parsed {
            JsonObservation::Plain(y) => (Scale::Addloss, y),
            JsonObservation::Tagged { scale, y } => (scale, y),
        }
    } else {
        parse_text_observation(text, m)?
    };
    check_len("path observation", m, values.len())?;
    match scale {
        Scale::Addloss => {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                return Err(Error::OutOfDomain {
                    index,
                    value,
                    domain: "[0, inf)",
                });
            }
            Ok(values)
        }
        Scale::Probability => addloss(&values),
    }
}

fn parse_text_observation(text: &str, m: usize) -> Result<(Scale, Vec<f64>)> {
    let mut scale = Scale::Addloss;
    let mut values = vec![f64::NAN; m];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        if let Some(rest) = line.strip_prefix("scale:") {
            scale = match rest.trim() {
                "addloss" => Scale::Addloss,
                "probability" => Scale::Probability,
                other => return Err(err(format!("unknown scale `{other}`"))),
            };
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let ["y", j, v] = fields.as_slice() else {
            return Err(err("expected `y <path> <value>`".into()));
        };
        let j: usize = j.parse().map_err(|_| err(format!("bad path index `{j}`")))?;
        let v: f64 = v.parse().map_err(|_| err(format!("bad value `{v}`")))?;
        if j == 0 || j > m {
            return Err(err(format!("path {j} outside 1..={m}")));
        }
        values[j - 1] = v;
    }
    if let Some(j) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Parse {
            line: 0,
            msg: format!("no value for path {}", j + 1),
        });
    }
    Ok((scale, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fig1;
    use crate::topology::gen_random_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn addloss_values() {
        assert_eq!(addloss(&[0.0]).unwrap(), vec![0.0]);
        assert!((addloss_value(0.1) - 0.105_360_515_657_826_3).abs() < 1e-15);
        assert!((inverse_addloss_value(2f64.ln()) - 0.5).abs() < 1e-15);
        assert!(addloss(&[1.0]).is_err());
        assert!(addloss(&[-0.1]).is_err());
        assert!(inverse_addloss(&[-1e-3]).is_err());
        for i in 0..1000 {
            let b = i as f64 / 1000.0;
            assert!((inverse_addloss_value(addloss_value(b)) - b).abs() < 1e-12);
            assert!(addloss_value(b + 1e-4) > addloss_value(b));
        }
    }

    #[test]
    fn forward_fig1() {
        let t = fig1();
        assert_eq!(forward(&t, &[0.0, 1.0, 2.0, 2.0, 0.0]).unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(forward(&t, &[0.0; 5]).unwrap(), vec![0.0; 3]);
        assert!(forward(&t, &[0.0; 4]).is_err());
    }

    #[test]
    fn receiver_and_general_solutions() {
        let t = fig1();
        let y = [2.0, 3.0, 4.0];
        let r = receiver_solution(&t, &y).unwrap();
        assert_eq!(r, vec![2.0, 3.0, 4.0, 0.0, 0.0]);
        assert_eq!(forward(&t, &r).unwrap(), y);
        assert!(is_feasible(&t, &r, &y, TOL));
        assert_eq!(l0(&r), 3);
        assert_eq!(general_solution(&t, &[2.0, 0.0], &y).unwrap(), vec![0.0, 1.0, 2.0, 2.0, 0.0]);
        assert_eq!(general_solution(&t, &[0.0, 0.0], &y).unwrap(), r);
        assert!(matches!(general_solution(&t, &[3.0, 0.0], &y), Err(Error::Infeasible(_))));
        let mut bad = r.clone();
        bad[0] = -10.0 * TOL;
        bad[1] += 10.0 * TOL;
        assert!(!is_feasible(&t, &bad, &y, TOL));
    }

    #[test]
    fn sampled_points_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..30 {
            let t = gen_random_tree(8, 3, seed).unwrap();
            let y: Vec<f64> = (0..t.m()).map(|_| rng.random_range(0.0..0.3)).collect();
            for _ in 0..20 {
                let x = sample_feasible(&t, &y, 0.3, &mut rng);
                assert!(is_feasible(&t, &x, &y, 1e-12));
                let xi = &x[t.m()..];
                let g = general_solution(&t, xi, &y).unwrap();
                let back = forward(&t, &g).unwrap();
                assert!(back.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn observation_formats() {
        assert_eq!(parse_observation("[2, 3, 4]", 3).unwrap(), vec![2.0, 3.0, 4.0]);
        let p = parse_observation(r#"{"scale": "probability", "y": [0.5, 0, 0]}"#, 3).unwrap();
        assert!((p[0] - 2f64.ln()).abs() < 1e-15);
        let text = "scale: addloss\ny 2 3\ny 1 2 # first\ny 3 4\n";
        assert_eq!(parse_observation(text, 3).unwrap(), vec![2.0, 3.0, 4.0]);
        assert!(parse_observation("y 1 2\ny 2 3\n", 3).is_err());
        assert!(parse_observation("[1, 2]", 3).is_err());
        assert!(parse_observation("[1, -2, 0]", 3).is_err());
        assert!(parse_observation("scale: probability\ny 1 1.5\n", 1).is_err());
    }
}
