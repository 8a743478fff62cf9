//! Browser bindings. Every export takes and returns JSON text so the page
//! needs no generated type glue; failures come back as `{"error": "..."}`.

use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use losstree::fixtures;
use losstree::lossmodel::parse_observation;
use losstree::noiseless::solve;
use losstree::noisy::{glocal_l0, glocal_l1, local_min_l0, local_min_l1, local_min_l1_among_l0, IntervalObservation, Upper};
use losstree::oracle::{uniqueness_census, CensusConfig};
use losstree::topology::{parse_topology, tree_from_spec};
use losstree::LogicalTree;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn load_tree(src: &str) -> Result<LogicalTree, String> {
    let src = src.trim();
    match src {
        "fig1" => Ok(fixtures::fig1()),
        "fig2" => Ok(fixtures::fig2()),
        _ if src.contains('\n') || src.starts_with("root") => parse_topology(src).map_err(|e| e.to_string()),
        _ => tree_from_spec(src).map_err(|e| e.to_string()),
    }
}

#[derive(Serialize)]
struct Layout {
    father: Vec<usize>,
    depth: Vec<usize>,
    aliases: Vec<String>,
    /// Horizontal position in `[0, 1]`: leaves evenly spaced, internal
    /// nodes centred over their leaf range.
    pos: Vec<f64>,
}

fn layout(t: &LogicalTree) -> Layout {
    let m = t.m() as f64;
    let pos = (0..=t.n())
        .map(|k| {
            let r = t.leaf_range(k);
            ((*r.start() + *r.end()) as f64 / 2.0 - 0.5) / m
        })
        .collect();
    Layout {
        father: (0..=t.n()).map(|k| if k == 0 { 0 } else { t.father(k) }).collect(),
        depth: (0..=t.n()).map(|k| t.depth(k)).collect(),
        aliases: (0..=t.n()).map(|k| t.alias(k).to_owned()).collect(),
        pos,
    }
}

/// Solves exact path observations on a tree given as shorthand or topology text.
#[wasm_bindgen]
pub fn solve_tree(tree: &str, y: &str) -> String {
    respond((|| {
        let t = load_tree(tree)?;
        let y = parse_observation(y, t.m()).map_err(|e| e.to_string())?;
        let report = solve(&t, &y).map_err(|e| e.to_string())?;
        Ok(json!({ "tree": layout(&t), "report": report, "y": y }))
    })())
}

/// `l0` and `l1` of the one-complex solution family over a grid of the
/// internal loss, with the optimal sets. `hi` entries may be `"inf"`.
#[wasm_bindgen]
pub fn local_complex(lo: &str, hi: &str, samples: usize) -> String {
    respond((|| {
        let lo: Vec<f64> = serde_json::from_str(lo).map_err(|e| format!("lower ends: {e}"))?;
        let hi: Vec<Upper> = serde_json::from_str(hi).map_err(|e| format!("upper ends: {e}"))?;
        let obs = IntervalObservation::new(lo, hi).map_err(|e| e.to_string())?;
        let s = local_min_l0(&obs).map_err(|e| e.to_string())?;
        let d = local_min_l1(&obs).map_err(|e| e.to_string())?;
        let j = local_min_l1_among_l0(&obs).map_err(|e| e.to_string())?;
        let start = obs.lo().iter().copied().fold(f64::INFINITY, f64::min);
        let max_lo = obs.lo().iter().copied().fold(0.0, f64::max);
        let end = obs.hi().iter().fold(Upper::Unbounded, |a, &b| a.min(b)).clamp(max_lo * 1.25 + 1.0);
        let steps = samples.clamp(2, 2000);
        let curve: Vec<Value> = (0..steps)
            .map(|i| {
                let x = start + (end - start) * i as f64 / (steps - 1) as f64;
                json!([x, glocal_l0(&obs, x), glocal_l1(&obs, x)])
            })
            .collect();
        Ok(json!({ "range": [start, end], "curve": curve, "min_l0": s, "min_l1": d, "joint": j }))
    })())
}

/// Uniqueness census at one sparsity level.
#[wasm_bindgen]
pub fn census(tree: &str, k: usize, trials: usize, seed: u32) -> String {
    respond((|| {
        let t = load_tree(tree)?;
        let r = uniqueness_census(&t, &CensusConfig::new(k, trials.clamp(1, 2000), u64::from(seed))).map_err(|e| e.to_string())?;
        Ok(json!(r))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn solve_fig1() {
        let v = parse(&solve_tree("fig1", "[2, 3, 4]"));
        assert_eq!(v["report"]["x"], json!([0.0, 1.0, 2.0, 2.0, 0.0]));
        assert_eq!(v["tree"]["father"][5], 4);
        let text = parse(&solve_tree("root O\n4 O\n5 4\n3 4\n1 5\n2 5\n", "[1, 1, 1]"));
        assert_eq!(text["report"]["l0"], 1);
        assert!(parse(&solve_tree("fig1", "[1]"))["error"].is_string());
    }

    #[test]
    fn local_complex_curves() {
        let v = parse(&local_complex("[1, 3, 5]", r#"[6, "inf", "inf"]"#, 51));
        assert_eq!(v["joint"]["set"], json!({"kind": "point", "x": 5.0}));
        assert_eq!(v["curve"].as_array().unwrap().len(), 51);
        assert_eq!(v["range"][0], 1.0);
        assert!(parse(&local_complex("[1]", "[2]", 5))["error"].is_string());
    }

    #[test]
    fn census_runs() {
        let v = parse(&census("ternary:13", 2, 50, 1));
        assert_eq!(v["p_unique"], 1.0);
    }
}
