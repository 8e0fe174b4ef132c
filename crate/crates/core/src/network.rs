//! A base graph together with its homology coordinates and edge profiles.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{BaseGraph, GraphSpec, ThetaMap};
use crate::hamiltonian::{parse_hamiltonians, EdgeHamiltonianModel, HamiltonianSpec};
use crate::profile::{EdgeProfile, Orientation, DEFAULT_SAMPLES};

#[derive(Debug, Clone)]
pub struct Network {
    pub graph: BaseGraph,
    pub theta: ThetaMap,
    /// One profile per positive edge.
    pub profiles: Vec<EdgeProfile>,
    /// `max_e a_e`.
    pub a0: f64,
}

impl Network {
    pub fn new(graph: BaseGraph, models: Vec<EdgeHamiltonianModel>) -> Result<Self> {
        Self::with_samples(graph, models, DEFAULT_SAMPLES)
    }

    pub fn with_samples(graph: BaseGraph, models: Vec<EdgeHamiltonianModel>, samples: usize) -> Result<Self> {
        if models.len() != graph.n_positive() {
            return Err(Error::DimensionMismatch {
                expected: graph.n_positive(),
                got: models.len(),
            });
        }
        let theta = ThetaMap::of(&graph);
        let profiles: Vec<EdgeProfile> = models
            .into_iter()
            .map(|m| EdgeProfile::with_samples(m, samples))
            .collect();
        let a0 = profiles.iter().map(|p| p.a_e).fold(f64::NEG_INFINITY, f64::max);
        Ok(Network {
            graph,
            theta,
            profiles,
            a0,
        })
    }

    /// Same model on every edge.
    pub fn uniform(graph: BaseGraph, model: EdgeHamiltonianModel) -> Result<Self> {
        let models = vec![model; graph.n_positive()];
        Self::new(graph, models)
    }

    /// Resolves edge specs (with an optional `"*"` default) in declaration order.
    pub fn from_specs(graph: BaseGraph, specs: &[HamiltonianSpec], samples: usize) -> Result<Self> {
        let mut by_edge = HashMap::new();
        let mut default = None;
        for s in specs {
            if s.edge == "*" {
                default = Some(&s.model);
                continue;
            }
            let d = graph.edge(&s.edge)?;
            if d % 2 == 1 {
                return Err(Error::InvalidModel(format!(
                    "models are attached to positive edges, got `{}`",
                    s.edge
                )));
            }
            if by_edge.insert(d / 2, &s.model).is_some() {
                return Err(Error::DuplicateEdgeId(s.edge.clone()));
            }
        }
        let models = (0..graph.n_positive())
            .map(|i| {
                by_edge
                    .get(&i)
                    .copied()
                    .or(default)
                    .ok_or_else(|| Error::MissingHamiltonian(graph.edge_id(2 * i).to_string()))?
                    .build()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_samples(graph, models, samples)
    }

    pub fn from_json(graph_json: &str, hamiltonians_json: &str) -> Result<Self> {
        let graph = BaseGraph::build(&GraphSpec::from_json(graph_json)?)?;
        Self::from_specs(graph, &parse_hamiltonians(hamiltonians_json)?, DEFAULT_SAMPLES)
    }

    pub fn betti(&self) -> usize {
        self.theta.betti
    }

    pub fn profile(&self, d: usize) -> &EdgeProfile {
        &self.profiles[d / 2]
    }

    pub fn a_e(&self, d: usize) -> f64 {
        self.profiles[d / 2].a_e
    }

    /// `σ(d, a)` for a directed edge, `a` clamped to `[a_e, ∞)`.
    #[inline]
    pub fn sigma(&self, d: usize, a: f64) -> f64 {
        self.profiles[d / 2].sigma_at(Orientation::of(d), a)
    }

    /// `σ(·, a)` on every directed edge.
    pub fn sigmas(&self, a: f64) -> Vec<f64> {
        (0..self.graph.n_directed()).map(|d| self.sigma(d, a)).collect()
    }

    /// `min` over edges incident to `z` of `𝓛(e, 0) = -a_e`.
    pub fn flux_limiter(&self, z: usize) -> f64 {
        self.graph
            .incident(z)
            .map(|d| -self.a_e(d))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether every edge model has a constant fiber minimum.
    pub fn fiber_minima_constant(&self) -> Vec<bool> {
        self.profiles.iter().map(|p| p.fiber_min_constant).collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::graph::fixtures::{bouquet, honeycomb, spec};
    use crate::hamiltonian::{QuadraticModel, TrigPoly};

    pub fn free() -> EdgeHamiltonianModel {
        EdgeHamiltonianModel::Quadratic(QuadraticModel::free(TrigPoly::default()))
    }

    pub fn cosine(amplitude: f64) -> EdgeHamiltonianModel {
        EdgeHamiltonianModel::Quadratic(QuadraticModel::free(TrigPoly {
            cos: vec![-amplitude],
            ..Default::default()
        }))
    }

    pub fn free_bouquet() -> Network {
        Network::uniform(bouquet(), free()).unwrap()
    }

    pub fn free_honeycomb() -> Network {
        Network::uniform(honeycomb(), free()).unwrap()
    }

    /// Honeycomb with a cosine potential on `e0` only.
    pub fn cosine_honeycomb() -> Network {
        Network::new(honeycomb(), vec![cosine(1.0), free(), free()]).unwrap()
    }

    pub fn triangle_with_loop() -> Network {
        let g = BaseGraph::build(&spec(
            &["a", "b", "c"],
            &[("ab", "a", "b"), ("bc", "b", "c"), ("ca", "c", "a"), ("l", "b", "b")],
        ))
        .unwrap();
        Network::new(g, vec![free(), cosine(0.5), free(), cosine(1.0)]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::graph::fixtures::honeycomb;

    #[test]
    fn flux_limiters() {
        let n = free_honeycomb();
        assert_eq!(n.flux_limiter(0), 0.0);
        let n = cosine_honeycomb();
        assert!((n.flux_limiter(0) + 1.0).abs() < 1e-12);
        assert!((n.a0 - 1.0).abs() < 1e-12);
        let t = triangle_with_loop();
        assert!((t.flux_limiter(1) + 1.0).abs() < 1e-12);
        assert_eq!(t.flux_limiter(0), 0.0);
        assert!((t.flux_limiter(2) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn specs_with_default_and_missing() {
        let g = r#"{"vertices":["x1","x2"],"edges":[{"id":"e0","from":"x1","to":"x2"},{"id":"e1","from":"x1","to":"x2"},{"id":"e2","from":"x1","to":"x2"}]}"#;
        let h = r#"[{"edge":"e0","family":"quadratic","potential":{"cos":[-1]}},{"edge":"*","family":"quadratic"}]"#;
        let n = Network::from_json(g, h).unwrap();
        assert_eq!(n.betti(), 2);
        assert_eq!(n.fiber_minima_constant(), vec![false, true, true]);
        let missing = r#"[{"edge":"e0","family":"quadratic"}]"#;
        assert_eq!(
            Network::from_json(g, missing).unwrap_err(),
            Error::MissingHamiltonian("e1".into())
        );
        let reversed = r#"[{"edge":"e0.rev","family":"quadratic"},{"edge":"*","family":"quadratic"}]"#;
        assert!(matches!(Network::from_json(g, reversed), Err(Error::InvalidModel(_))));
        assert!(matches!(Network::new(honeycomb(), vec![free()]), Err(Error::DimensionMismatch { .. })));
    }
}
