//! The maximal Abelian covering graph `V₀ × Z^b`, generated on demand.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{reversed, BaseGraph, Path, ThetaMap};

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrystalVertex {
    pub base: usize,
    pub h: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CrystalEdge {
    pub base_edge: usize,
    pub h: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedPath {
    pub start: CrystalVertex,
    pub edges: Vec<CrystalEdge>,
}

pub(crate) fn add(h: &[i64], t: &[i64]) -> Vec<i64> {
    h.iter().zip(t).map(|(a, b)| a + b).collect()
}

pub(crate) fn sub(h: &[i64], t: &[i64]) -> Vec<i64> {
    h.iter().zip(t).map(|(a, b)| a - b).collect()
}

/// Read-only view of the crystal over a base graph.
#[derive(Debug, Clone, Copy)]
pub struct Crystal<'a> {
    pub graph: &'a BaseGraph,
    pub theta: &'a ThetaMap,
    pub node_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableNormEstimate {
    pub estimate: f64,
    /// `d(0, 2^k h) / 2^k` for `2^k <= n_max`, nonincreasing.
    pub dyadic: Vec<f64>,
}

impl<'a> Crystal<'a> {
    pub fn new(graph: &'a BaseGraph, theta: &'a ThetaMap) -> Self {
        Crystal {
            graph,
            theta,
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn origin(&self, e: &CrystalEdge) -> CrystalVertex {
        CrystalVertex {
            base: self.graph.origin(e.base_edge),
            h: e.h.clone(),
        }
    }

    pub fn terminus(&self, e: &CrystalEdge) -> CrystalVertex {
        CrystalVertex {
            base: self.graph.terminus(e.base_edge),
            h: add(&e.h, self.theta.theta(e.base_edge)),
        }
    }

    pub fn reverse(&self, e: &CrystalEdge) -> CrystalEdge {
        CrystalEdge {
            base_edge: reversed(e.base_edge),
            h: add(&e.h, self.theta.theta(e.base_edge)),
        }
    }

    pub fn lift_path(&self, p: &Path, h: &[i64]) -> Result<LiftedPath> {
        if h.len() != self.theta.betti {
            return Err(Error::DimensionMismatch {
                expected: self.theta.betti,
                got: h.len(),
            });
        }
        let start_base = p.edges.first().map_or(self.graph.root(), |&d| self.graph.origin(d));
        let mut cur = h.to_vec();
        let mut edges = Vec::with_capacity(p.len());
        for &d in &p.edges {
            let next = add(&cur, self.theta.theta(d));
            edges.push(CrystalEdge { base_edge: d, h: cur });
            cur = next;
        }
        Ok(LiftedPath {
            start: CrystalVertex {
                base: start_base,
                h: h.to_vec(),
            },
            edges,
        })
    }

    pub fn lifted_terminus(&self, lp: &LiftedPath) -> CrystalVertex {
        lp.edges.last().map_or(lp.start.clone(), |e| self.terminus(e))
    }

    pub fn project(&self, lp: &LiftedPath) -> Path {
        Path {
            edges: lp.edges.iter().map(|e| e.base_edge).collect(),
        }
    }

    pub fn neighbors<'s>(&'s self, v: &'s CrystalVertex) -> impl Iterator<Item = CrystalVertex> + 's {
        self.graph.outgoing(v.base).iter().map(move |&d| CrystalVertex {
            base: self.graph.terminus(d),
            h: add(&v.h, self.theta.theta(d)),
        })
    }

    /// Breadth-first graph distance; fails once more than `node_cap` vertices
    /// have been discovered.
    pub fn graph_distance(&self, a: &CrystalVertex, b: &CrystalVertex) -> Result<usize> {
        if a == b {
            return Ok(0);
        }
        let mut dist: HashMap<CrystalVertex, usize> = HashMap::new();
        dist.insert(a.clone(), 0);
        let mut queue = VecDeque::from([a.clone()]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            for w in self.neighbors(&v) {
                if dist.contains_key(&w) {
                    continue;
                }
                if &w == b {
                    return Ok(dv + 1);
                }
                dist.insert(w.clone(), dv + 1);
                if dist.len() > self.node_cap {
                    return Err(Error::BudgetExceeded(format!(
                        "crystal BFS discovered more than {} vertices",
                        self.node_cap
                    )));
                }
                queue.push_back(w);
            }
        }
        Err(Error::Unreachable(format!("{b:?}")))
    }

    /// `d_O(0, h)` measured from the root vertex.
    pub fn distance_from_origin(&self, h: &[i64]) -> Result<usize> {
        let root = self.graph.root();
        self.graph_distance(
            &CrystalVertex {
                base: root,
                h: vec![0; h.len()],
            },
            &CrystalVertex {
                base: root,
                h: h.to_vec(),
            },
        )
    }

    pub fn metric_invariance_check(&self, x0: usize, h: &[i64], h_bar: &[i64]) -> Result<bool> {
        let direct = self.graph_distance(
            &CrystalVertex { base: x0, h: h.to_vec() },
            &CrystalVertex {
                base: x0,
                h: h_bar.to_vec(),
            },
        )?;
        let shifted = self.graph_distance(
            &CrystalVertex {
                base: x0,
                h: vec![0; h.len()],
            },
            &CrystalVertex {
                base: x0,
                h: sub(h_bar, h),
            },
        )?;
        Ok(direct == shifted)
    }

    pub fn stable_norm_estimate(&self, h: &[i64], n_max: u64) -> Result<StableNormEstimate> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        let scaled = |n: u64| -> Vec<i64> { h.iter().map(|x| x * n as i64).collect() };
        let estimate = self.distance_from_origin(&scaled(n_max))? as f64 / n_max as f64;
        let mut dyadic = Vec::new();
        let mut n = 1u64;
        while n <= n_max {
            dyadic.push(self.distance_from_origin(&scaled(n))? as f64 / n as f64);
            n *= 2;
        }
        Ok(StableNormEstimate { estimate, dyadic })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{bouquet, honeycomb};

    #[test]
    fn honeycomb_lifts() {
        let g = honeycomb();
        let tm = ThetaMap::of(&g);
        let c = Crystal::new(&g, &tm);
        let p = g.path_from_ids(&["e1", "e0.rev"]).unwrap();
        let lp = c.lift_path(&p, &[0, 0]).unwrap();
        assert_eq!(c.lifted_terminus(&lp), CrystalVertex { base: 0, h: vec![1, 0] });
        assert_eq!(c.project(&lp), p);
        let a = CrystalVertex { base: 0, h: vec![0, 0] };
        let b = CrystalVertex { base: 1, h: vec![0, 0] };
        assert_eq!(c.graph_distance(&a, &b).unwrap(), 1);
    }

    #[test]
    fn bouquet_lattice_metric() {
        let g = bouquet();
        let tm = ThetaMap::of(&g);
        let c = Crystal::new(&g, &tm);
        let p = g.path_from_ids(&["f1", "f2"]).unwrap();
        let lp = c.lift_path(&p, &[3, 3]).unwrap();
        assert_eq!(c.lifted_terminus(&lp).h, vec![4, 4]);
        assert_eq!(c.distance_from_origin(&[2, 1]).unwrap(), 3);
        assert!(c.metric_invariance_check(0, &[1, 0], &[3, 1]).unwrap());
        let est = c.stable_norm_estimate(&[1, 1], 8).unwrap();
        assert_eq!(est.estimate, 2.0);
        assert_eq!(est.dyadic, vec![2.0, 2.0, 2.0, 2.0]);
        assert_eq!(c.stable_norm_estimate(&[0, 0], 4).unwrap().estimate, 0.0);
    }

    #[test]
    fn empty_lift_stays_put() {
        let g = bouquet();
        let tm = ThetaMap::of(&g);
        let c = Crystal::new(&g, &tm);
        let lp = c.lift_path(&Path::default(), &[2, -1]).unwrap();
        assert_eq!(c.lifted_terminus(&lp), lp.start);
        assert!(c.lift_path(&Path::default(), &[1]).is_err());
    }

    #[test]
    fn node_cap_is_enforced() {
        let g = bouquet();
        let tm = ThetaMap::of(&g);
        let c = Crystal::new(&g, &tm).with_node_cap(50);
        assert!(matches!(
            c.distance_from_origin(&[20, 20]),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
