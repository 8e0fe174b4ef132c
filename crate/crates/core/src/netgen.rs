//! Periodic embeddings of the crystal built from an embedding of the base graph.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BaseGraph, ThetaMap};

pub const DEFAULT_ARC_SAMPLES: usize = 33;

/// Polyline in `R^K` parametrized by normalized arc length on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    points: Vec<Vec<f64>>,
    /// Cumulative normalized length at each point.
    knots: Vec<f64>,
}

impl Curve {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("a curve needs at least two points".into()));
        }
        let k = points[0].len();
        if points.iter().any(|p| p.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: points.iter().map(Vec::len).find(|&l| l != k).unwrap_or(k),
            });
        }
        let mut acc = vec![0.0];
        for w in points.windows(2) {
            acc.push(acc.last().unwrap() + dist(&w[0], &w[1]));
        }
        let total = *acc.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("a curve needs positive length".into()));
        }
        let knots = acc.iter().map(|a| a / total).collect();
        Ok(Curve { points, knots })
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().unwrap()
    }

    pub fn at(&self, s: f64) -> Vec<f64> {
        let s = s.clamp(0.0, 1.0);
        if s >= 1.0 {
            return self.end().to_vec();
        }
        let i = self.knots.partition_point(|&k| k <= s).clamp(1, self.knots.len() - 1);
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        let w = if k1 > k0 { (s - k0) / (k1 - k0) } else { 0.0 };
        self.points[i - 1]
            .iter()
            .zip(&self.points[i])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `{"vertices": {id: coords}, "edges": {id: [[...], ...]}}`
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub vertices: HashMap<String, Vec<f64>>,
    #[serde(default)]
    pub edges: HashMap<String, Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseEmbedding {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// One curve per positive edge.
    pub arcs: Vec<Curve>,
}

impl BaseEmbedding {
    pub fn new(g: &BaseGraph, vertices: Vec<Vec<f64>>, arcs: Vec<Curve>) -> Result<Self> {
        if vertices.len() != g.n_vertices() {
            return Err(Error::DimensionMismatch {
                expected: g.n_vertices(),
                got: vertices.len(),
            });
        }
        if arcs.len() != g.n_positive() {
            return Err(Error::DimensionMismatch {
                expected: g.n_positive(),
                got: arcs.len(),
            });
        }
        let dim = vertices.first().map_or(0, Vec::len);
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        for (i, c) in arcs.iter().enumerate() {
            let d = 2 * i;
            if c.start().len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.start().len(),
                });
            }
            if dist(c.start(), &vertices[g.origin(d)]) > 1e-12 || dist(c.end(), &vertices[g.terminus(d)]) > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "arc of `{}` does not join its endpoint images",
                    g.edge_id(d)
                )));
            }
        }
        Ok(BaseEmbedding { dim, vertices, arcs })
    }

    /// Vertex coordinates are required; missing edge curves become straight
    /// segments.
    pub fn from_spec(g: &BaseGraph, spec: &EmbeddingSpec) -> Result<Self> {
        let vertices = (0..g.n_vertices())
            .map(|v| {
                spec.vertices
                    .get(g.vertex_id(v))
                    .cloned()
                    .ok_or_else(|| Error::UnknownVertex(g.vertex_id(v).to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        for id in spec.edges.keys() {
            let d = g.edge(id)?;
            if d % 2 == 1 {
                return Err(Error::InvalidParameter(format!("curves are given on positive edges, got `{id}`")));
            }
        }
        let arcs = (0..g.n_positive())
            .map(|i| {
                let d = 2 * i;
                match spec.edges.get(g.edge_id(d)) {
                    Some(pts) => Curve::new(pts.clone()),
                    None => Curve::new(vec![vertices[g.origin(d)].clone(), vertices[g.terminus(d)].clone()]),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, vertices, arcs)
    }

    pub fn from_json(g: &BaseGraph, json: &str) -> Result<Self> {
        let spec: EmbeddingSpec = serde_json::from_str(json)?;
        Self::from_spec(g, &spec)
    }

    /// Planar layout: vertices on the unit circle, parallel edges bent apart,
    /// loops drawn as small circles pointing away from the center.
    pub fn auto_layout(g: &BaseGraph) -> Self {
        let n = g.n_vertices();
        let vertices: Vec<Vec<f64>> = (0..n)
            .map(|v| {
                if n == 1 {
                    vec![0.0, 0.0]
                } else {
                    let th = 2.0 * std::f64::consts::PI * v as f64 / n as f64;
                    vec![th.cos(), th.sin()]
                }
            })
            .collect();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let arcs = (0..g.n_positive())
            .map(|i| {
                let d = 2 * i;
                let (o, t) = (g.origin(d), g.terminus(d));
                let key = (o.min(t), o.max(t));
                let k = *seen.entry(key).and_modify(|c| *c += 1).or_insert(0);
                let pts = if o == t {
                    loop_points(&vertices[o], k)
                } else {
                    bent_points(&vertices[o], &vertices[t], k, o > t)
                };
                Curve::new(pts).expect("layout curves are nondegenerate")
            })
            .collect();
        BaseEmbedding {
            dim: 2,
            vertices,
            arcs,
        }
    }

    /// Image of a directed edge at `s`, reversed edges run backwards.
    pub fn arc_point(&self, d: usize, s: f64) -> Vec<f64> {
        let c = &self.arcs[d / 2];
        if d % 2 == 0 {
            c.at(s)
        } else {
            c.at(1.0 - s)
        }
    }
}

const CURVE_POINTS: usize = 24;

fn loop_points(center: &[f64], k: usize) -> Vec<Vec<f64>> {
    let norm = (center[0] * center[0] + center[1] * center[1]).sqrt();
    let out = if norm > 0.0 {
        [center[0] / norm, center[1] / norm]
    } else {
        [1.0, 0.0]
    };
    // rotate successive loops around the vertex
    let phi = (out[1].atan2(out[0])) + k as f64 * std::f64::consts::FRAC_PI_2;
    let r = 0.25;
    let c = [center[0] + r * phi.cos(), center[1] + r * phi.sin()];
    (0..=CURVE_POINTS)
        .map(|j| {
            if j == 0 || j == CURVE_POINTS {
                return center.to_vec();
            }
            let th = phi + std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / CURVE_POINTS as f64;
            vec![c[0] + r * th.cos(), c[1] + r * th.sin()]
        })
        .collect()
}

fn bent_points(a: &[f64], b: &[f64], k: usize, flip: bool) -> Vec<Vec<f64>> {
    if k == 0 {
        return vec![a.to_vec(), b.to_vec()];
    }
    // alternate sides: +1, -1, +2, -2, ...
    let mag = ((k + 1) / 2) as f64 * 0.3;
    let mut side = if k % 2 == 1 { 1.0 } else { -1.0 };
    if flip {
        side = -side;
    }
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let ctrl = [
        0.5 * (a[0] + b[0]) - side * mag * dy,
        0.5 * (a[1] + b[1]) + side * mag * dx,
    ];
    (0..=CURVE_POINTS)
        .map(|j| {
            let s = j as f64 / CURVE_POINTS as f64;
            let (w0, w1, w2) = ((1.0 - s) * (1.0 - s), 2.0 * s * (1.0 - s), s * s);
            if j == 0 {
                a.to_vec()
            } else if j == CURVE_POINTS {
                b.to_vec()
            } else {
                vec![w0 * a[0] + w1 * ctrl[0] + w2 * b[0], w0 * a[1] + w1 * ctrl[1] + w2 * b[1]]
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexImage {
    pub base: String,
    pub h: Vec<i64>,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcImage {
    pub edge: String,
    pub h: Vec<i64>,
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkWindow {
    pub dimension: usize,
    pub window: i64,
    pub vertices: Vec<VertexImage>,
    pub arcs: Vec<ArcImage>,
    /// Least and greatest arc length in the window.
    pub length_bounds: [f64; 2],
}

fn lattice_points(b: usize, w: i64) -> Vec<Vec<i64>> {
    let side = (2 * w + 1) as usize;
    (0..side.pow(b as u32))
        .map(|mut c| {
            (0..b)
                .map(|_| {
                    let x = (c % side) as i64 - w;
                    c /= side;
                    x
                })
                .collect()
        })
        .collect()
}

fn polyline_length(pts: &[Vec<f64>]) -> f64 {
    pts.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Lifts the base embedding to every period `h` with `|h|∞ <= w` in `R^{K+b}`.
pub fn embed_crystal(g: &BaseGraph, be: &BaseEmbedding, tm: &ThetaMap, w: usize, samples: usize) -> NetworkWindow {
    let b = tm.betti;
    let samples = samples.max(2);
    let hs = lattice_points(b, w as i64);
    let lift = |x: &[f64], h: &[f64]| -> Vec<f64> { x.iter().chain(h).copied().collect() };
    let mut vertices = Vec::new();
    for h in &hs {
        let hf: Vec<f64> = h.iter().map(|&c| c as f64).collect();
        for v in 0..g.n_vertices() {
            vertices.push(VertexImage {
                base: g.vertex_id(v).to_string(),
                h: h.clone(),
                coords: lift(&be.vertices[v], &hf),
            });
        }
    }
    let mut arcs = Vec::new();
    for h in &hs {
        for i in 0..g.n_positive() {
            let d = 2 * i;
            let th = tm.theta(d);
            let pts = (0..samples)
                .map(|k| {
                    let s = k as f64 / (samples - 1) as f64;
                    let shift: Vec<f64> = h.iter().zip(th).map(|(&a, &t)| a as f64 + s * t as f64).collect();
                    if k + 1 == samples {
                        // land exactly on the terminal vertex image
                        let end: Vec<f64> = h.iter().zip(th).map(|(&a, &t)| (a + t) as f64).collect();
                        lift(be.arcs[i].end(), &end)
                    } else {
                        lift(&be.arc_point(d, s), &shift)
                    }
                })
                .collect();
            arcs.push(ArcImage {
                edge: g.edge_id(d).to_string(),
                h: h.clone(),
                samples: pts,
            });
        }
    }
    let lengths = arcs.iter().map(|a| polyline_length(&a.samples));
    let length_bounds = lengths.fold([f64::INFINITY, 0.0], |acc, l| [acc[0].min(l), acc[1].max(l)]);
    NetworkWindow {
        dimension: be.dim + b,
        window: w as i64,
        vertices,
        arcs,
        length_bounds,
    }
}

/// Whether arcs over the same base edge all have the same length.
pub fn orbit_length_check(nw: &NetworkWindow) -> bool {
    let mut first: HashMap<&str, f64> = HashMap::new();
    nw.arcs.iter().all(|a| {
        let l = polyline_length(&a.samples);
        let l0 = *first.entry(a.edge.as_str()).or_insert(l);
        (l - l0).abs() <= 1e-9
    })
}

impl NetworkWindow {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("window serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{bouquet, honeycomb};

    #[test]
    fn bouquet_window_vertices() {
        let g = bouquet();
        let tm = ThetaMap::of(&g);
        let be = BaseEmbedding::auto_layout(&g);
        let nw = embed_crystal(&g, &be, &tm, 1, DEFAULT_ARC_SAMPLES);
        assert_eq!(nw.vertices.len(), 9);
        assert_eq!(nw.dimension, 4);
        assert!(nw.vertices.iter().all(|v| v.coords[..2] == [0.0, 0.0]));
        assert!(orbit_length_check(&nw));
        assert!(nw.length_bounds[0] > 0.0);
    }

    #[test]
    fn honeycomb_arcs_join_lifted_vertices() {
        let g = honeycomb();
        let tm = ThetaMap::of(&g);
        let json = r#"{"vertices":{"x1":[0,0],"x2":[1,0]},"edges":{"e1":[[0,0],[0.5,0.5],[1,0]],"e2":[[0,0],[0.5,-0.5],[1,0]]}}"#;
        let be = BaseEmbedding::from_json(&g, json).unwrap();
        let nw = embed_crystal(&g, &be, &tm, 1, 5);
        let e1 = g.edge("e1").unwrap();
        let shift = tm.theta(e1).to_vec();
        for a in nw.arcs.iter().filter(|a| a.edge == "e1") {
            let start = nw.vertices.iter().find(|v| v.base == "x1" && v.h == a.h).unwrap();
            let th: Vec<i64> = a.h.iter().zip(&shift).map(|(x, y)| x + y).collect();
            assert_eq!(a.samples[0], start.coords);
            if let Some(end) = nw.vertices.iter().find(|v| v.base == "x2" && v.h == th) {
                assert_eq!(*a.samples.last().unwrap(), end.coords);
            }
        }
        assert!(orbit_length_check(&nw));
    }

    #[test]
    fn perturbed_window_fails_orbit_check() {
        let g = honeycomb();
        let tm = ThetaMap::of(&g);
        let mut nw = embed_crystal(&g, &BaseEmbedding::auto_layout(&g), &tm, 1, 9);
        nw.arcs[4].samples[3][0] += 0.1;
        assert!(!orbit_length_check(&nw));
        let w0 = embed_crystal(&g, &BaseEmbedding::auto_layout(&g), &tm, 0, 9);
        assert_eq!(w0.vertices.len(), 2);
        assert!(orbit_length_check(&w0));
    }

    #[test]
    fn rejects_detached_curves() {
        let g = honeycomb();
        let json = r#"{"vertices":{"x1":[0,0],"x2":[1,0]},"edges":{"e1":[[0,1],[1,0]]}}"#;
        assert!(BaseEmbedding::from_json(&g, json).is_err());
        let json = r#"{"vertices":{"x1":[0,0]}}"#;
        assert!(BaseEmbedding::from_json(&g, json).is_err());
    }

    #[test]
    fn curve_parametrization() {
        let c = Curve::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(c.at(0.25), vec![1.0, 0.0]);
        assert_eq!(c.at(1.0), vec![1.0, 3.0]);
        assert!(Curve::new(vec![vec![0.0]]).is_err());
    }
}
