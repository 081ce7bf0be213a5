//! Built-in example frameworks and the JSON file format.
//!
//! ```json
//! { "dimension": 2,
//!   "vertices": [[0, 0], [1, 0], [0.5, 1]],
//!   "edges": [[1, 2], [1, 3], [2, 3]],
//!   "labels": [1, 1, -1],
//!   "pinned": [1, 2] }
//! ```
//!
//! Vertex and coordinate indices are 1-based. `labels` (1 cable, 0 bar,
//! -1 strut) and `pinned` are optional.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, Framework};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameworkJson {
    dimension: usize,
    vertices: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pinned: Option<Vec<usize>>,
}

pub fn from_json_str(s: &str) -> Result<Framework> {
    let raw: FrameworkJson = serde_json::from_str(s)?;
    let mut edges = Vec::with_capacity(raw.edges.len());
    for (k, &[i, j]) in raw.edges.iter().enumerate() {
        if i == 0 || j == 0 {
            return Err(Error::InvalidFramework(format!(
                "edges[{k}] = [{i}, {j}]: indices are 1-based"
            )));
        }
        edges.push((i - 1, j - 1));
    }
    let mut f = Framework::new(raw.dimension, &raw.vertices, edges)?;
    if let Some(labels) = raw.labels {
        let parsed = labels
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                EdgeLabel::from_sign(l).ok_or_else(|| {
                    Error::InvalidFramework(format!("labels[{k}] = {l}: expected -1, 0 or 1"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        f = f.with_labels(parsed)?;
    }
    if let Some(pinned) = raw.pinned {
        if let Some(k) = pinned.iter().position(|&c| c == 0) {
            return Err(Error::InvalidFramework(format!("pinned[{k}] = 0: indices are 1-based")));
        }
        f = f.with_pinned(pinned.iter().map(|c| c - 1).collect())?;
    }
    Ok(f)
}

pub fn to_json_string(f: &Framework) -> String {
    let raw = FrameworkJson {
        dimension: f.dim(),
        vertices: f.vertices(),
        edges: f.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        labels: f.labels().map(|l| l.iter().map(|x| x.sign() as i64).collect()),
        pinned: f.pinned().map(|p| p.iter().map(|c| c + 1).collect()),
    };
    serde_json::to_string_pretty(&raw).expect("framework serializes")
}

pub fn load(path: impl AsRef<Path>) -> Result<Framework> {
    from_json_str(&std::fs::read_to_string(path)?)
}

pub fn save(path: impl AsRef<Path>, f: &Framework) -> Result<()> {
    std::fs::write(path, to_json_string(f) + "\n")?;
    Ok(())
}

/// Names accepted by [`generate`], with a one-line description each.
pub const ENTRIES: &[(&str, &str)] = &[
    ("example_a", "planar 6-vertex framework, prestress stable but not first-order rigid"),
    ("square", "unit square with one diagonal"),
    ("tetrahedron", "regular tetrahedron, unit edges"),
    ("octahedron", "regular octahedron, unit edges"),
    ("example_h", "planar 6-vertex, 9-edge framework with one flex and one stress"),
    ("k34_heptagon", "K(3,4) on the vertices of a regular heptagon"),
    ("snelson_x", "unit square tensegrity: cable sides, strut diagonals"),
    ("cable_triangle", "triangle of three cables"),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|(n, _)| *n)
}

fn one_based(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    edges.iter().map(|&(i, j)| (i - 1, j - 1)).collect()
}

pub fn generate(name: &str) -> Result<Framework> {
    match name {
        "example_a" => Framework::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 1.0],
                vec![0.5, 0.5],
                vec![1.0 / 3.0, 0.0],
                vec![2.0 / 3.0, 0.0],
            ],
            one_based(&[(1, 3), (2, 3), (1, 4), (2, 4), (3, 4), (1, 5), (2, 6), (5, 6)]),
        ),
        "square" => square(),
        "tetrahedron" => {
            let s = 8f64.sqrt();
            let v: Vec<Vec<f64>> = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
                .iter()
                .map(|p| p.iter().map(|x| x / s).collect())
                .collect();
            Framework::new(3, &v, complete_edges(4, |_, _| true))
        }
        "octahedron" => {
            let h = 0.5f64.sqrt();
            let mut v = Vec::new();
            for a in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut p = vec![0.0; 3];
                    p[a] = sign * h;
                    v.push(p);
                }
            }
            // Vertices 2k and 2k+1 are antipodal.
            Framework::new(3, &v, complete_edges(6, |i, j| i / 2 != j / 2))
        }
        "example_h" => Framework::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![0.0, 2.0],
                vec![1.0, 1.0],
                vec![3.0, 1.0],
                vec![4.0, 2.0],
                vec![4.0, 0.0],
            ],
            one_based(&[(1, 2), (1, 3), (2, 3), (3, 4), (2, 5), (4, 5), (1, 6), (4, 6), (5, 6)]),
        ),
        "k34_heptagon" => {
            let v: Vec<Vec<f64>> = (0..7)
                .map(|k| {
                    let th = TAU * k as f64 / 7.0;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            let edges = (0..3).flat_map(|i| (3..7).map(move |j| (i, j))).collect();
            Framework::new(2, &v, edges)
        }
        "snelson_x" => Framework::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            one_based(&[(1, 2), (2, 3), (3, 4), (1, 4), (1, 3), (2, 4)]),
        )?
        .with_labels(vec![
            EdgeLabel::Cable,
            EdgeLabel::Cable,
            EdgeLabel::Cable,
            EdgeLabel::Cable,
            EdgeLabel::Strut,
            EdgeLabel::Strut,
        ]),
        "cable_triangle" => Framework::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.75f64.sqrt()]],
            one_based(&[(1, 2), (1, 3), (2, 3)]),
        )?
        .with_labels(vec![EdgeLabel::Cable; 3]),
        other => Err(Error::UnknownCorpusEntry(other.to_string())),
    }
}

fn square() -> Result<Framework> {
    Framework::new(
        2,
        &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
        one_based(&[(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)]),
    )
}

fn complete_edges(n: usize, keep: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| keep(i, j))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_generates() {
        for name in names() {
            let f = generate(name).unwrap();
            assert!(f.n_edges() > 0, "{name}");
        }
        assert!(matches!(generate("nope"), Err(Error::UnknownCorpusEntry(_))));
    }

    #[test]
    fn solids_have_unit_edges() {
        for name in ["tetrahedron", "octahedron"] {
            let f = generate(name).unwrap();
            for l in f.edge_lengths() {
                assert!((l - 1.0).abs() < 1e-15, "{name}: {l}");
            }
        }
        assert_eq!(generate("octahedron").unwrap().n_edges(), 12);
    }

    #[test]
    fn json_round_trip_is_exact() {
        for name in names() {
            let f = generate(name).unwrap();
            let back = from_json_str(&to_json_string(&f)).unwrap();
            assert_eq!(f, back, "{name}");
        }
    }

    #[test]
    fn json_uses_one_based_indices() {
        let f = from_json_str(r#"{"dimension":1,"vertices":[[0],[1]],"edges":[[1,2]],"pinned":[1]}"#).unwrap();
        assert_eq!(f.edges(), &[(0, 1)]);
        assert_eq!(f.pinned(), Some(&[0usize][..]));
    }

    #[test]
    fn json_errors_name_the_field() {
        let e = from_json_str(r#"{"dimension":2,"vertices":[[0,0],[1,0]]}"#).unwrap_err();
        assert!(e.to_string().contains("edges"), "{e}");
        let e = from_json_str(r#"{"dimension":2,"vertices":[[0,0],[1,0]],"edges":[[0,1]]}"#).unwrap_err();
        assert!(e.to_string().contains("edges[0]"), "{e}");
        let e = from_json_str(r#"{"dimension":2,"vertices":[[0,0],[1,0]],"edges":[[1,2]],"labels":[2]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("labels[0]"), "{e}");
    }
}
