//! Cached per-edge kernels: critical value `a_e`, the averaged momentum
//! `σ(e, a)`, its inverse `𝓗(e, ·)` and the discrete Lagrangian `𝓛(e, ·)`.

use crate::error::{Error, Result};
use crate::hamiltonian::{quadratic_root, ConvexRow, EdgeHamiltonianModel};
use crate::numerics::{bisect_increasing, golden_max, golden_max_right, simpson_rule};

pub const DEFAULT_SAMPLES: usize = 257;
pub const ROOT_TOL: f64 = 1e-10;
pub const FENCHEL_TOL: f64 = 1e-9;

/// Direction of travel along a positive edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Backward,
}

impl Orientation {
    pub fn of(d: usize) -> Self {
        if d & 1 == 0 {
            Orientation::Forward
        } else {
            Orientation::Backward
        }
    }
}

#[derive(Debug, Clone)]
enum NodeFibers {
    Quadratic { kappa: f64, drift: Vec<f64>, potential: Vec<f64> },
    Tabulated { rows: Vec<ConvexRow>, mirrored: Vec<ConvexRow> },
}

#[derive(Debug, Clone)]
pub struct EdgeProfile {
    pub model: EdgeHamiltonianModel,
    pub a_e: f64,
    /// Whether `s ↦ min_ρ H(s, ρ)` is constant on the sample grid.
    pub fiber_min_constant: bool,
    weights: Vec<f64>,
    fibers: NodeFibers,
    b_forward: f64,
    b_backward: f64,
}

impl EdgeProfile {
    pub fn new(model: EdgeHamiltonianModel) -> Self {
        Self::with_samples(model, DEFAULT_SAMPLES)
    }

    pub fn with_samples(model: EdgeHamiltonianModel, samples: usize) -> Self {
        let (nodes, weights) = simpson_rule(samples);
        let fibers = match &model {
            EdgeHamiltonianModel::Quadratic(q) => NodeFibers::Quadratic {
                kappa: q.kappa,
                drift: nodes.iter().map(|&s| q.drift.eval(s)).collect(),
                potential: nodes.iter().map(|&s| q.potential.eval(s)).collect(),
            },
            EdgeHamiltonianModel::Tabulated(t) => {
                let rows: Vec<ConvexRow> = nodes.iter().map(|&s| t.row(s)).collect();
                let mirrored = rows.iter().map(ConvexRow::reflected).collect();
                NodeFibers::Tabulated { rows, mirrored }
            }
        };
        let mins: Vec<f64> = nodes.iter().map(|&s| model.fiber_min(s).1).collect();
        let (k, &grid_max) = mins
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let lo = nodes[k.saturating_sub(1)];
        let hi = nodes[(k + 1).min(nodes.len() - 1)];
        let refined = golden_max(|s| model.fiber_min(s).1, lo, hi, 1e-12).value;
        let a_e = grid_max.max(refined);
        let spread = mins.iter().fold(0.0f64, |m, v| m.max((v - grid_max).abs()));
        let mut p = EdgeProfile {
            model,
            a_e,
            fiber_min_constant: spread <= 1e-9 * (1.0 + grid_max.abs()),
            weights,
            fibers,
            b_forward: 0.0,
            b_backward: 0.0,
        };
        p.b_forward = p.sigma_unchecked(Orientation::Forward, a_e);
        p.b_backward = p.sigma_unchecked(Orientation::Backward, a_e);
        p
    }

    /// `σ(e, a_e)` for the given orientation, the left end of the domain of `𝓗`.
    pub fn b(&self, o: Orientation) -> f64 {
        match o {
            Orientation::Forward => self.b_forward,
            Orientation::Backward => self.b_backward,
        }
    }

    /// Largest momentum on the level `a` at arc parameter `s` of the oriented edge.
    pub fn sigma_plus(&self, o: Orientation, a: f64, s: f64) -> Result<f64> {
        match o {
            Orientation::Forward => self.model.upper_root(s, a),
            Orientation::Backward => self.model.lower_root(1.0 - s, a).map(|r| -r),
        }
    }

    fn sigma_unchecked(&self, o: Orientation, a: f64) -> f64 {
        // the Simpson nodes are symmetric under s ↦ 1 - s with equal weights,
        // so the reversed edge reads the same nodes through the lower root
        let sign = match o {
            Orientation::Forward => 1.0,
            Orientation::Backward => -1.0,
        };
        match &self.fibers {
            NodeFibers::Quadratic { kappa, drift, potential } => {
                let mut acc = 0.0;
                for i in 0..self.weights.len() {
                    let r = quadratic_root(*kappa, drift[i], potential[i], a, sign)
                        .unwrap_or(-drift[i] / kappa);
                    acc += self.weights[i] * r;
                }
                sign * acc
            }
            NodeFibers::Tabulated { rows, mirrored } => {
                let rows = if sign > 0.0 { rows } else { mirrored };
                let mut acc = 0.0;
                for (w, row) in self.weights.iter().zip(rows) {
                    let r = row.upper_root(a).unwrap_or_else(|| row.min().0);
                    acc += w * r;
                }
                acc
            }
        }
    }

    /// `σ(e, a)` for `a >= a_e`.
    pub fn sigma(&self, o: Orientation, a: f64) -> Result<f64> {
        if a < self.a_e - 1e-12 * (1.0 + a.abs()) {
            return Err(Error::LevelBelowMinimum {
                level: a,
                minimum: self.a_e,
                s: f64::NAN,
            });
        }
        Ok(self.sigma_unchecked(o, a.max(self.a_e)))
    }

    /// Caller guarantees `a >= a_e` (clamped otherwise).
    #[inline]
    pub fn sigma_at(&self, o: Orientation, a: f64) -> f64 {
        self.sigma_unchecked(o, a.max(self.a_e))
    }

    /// Inverse of `σ(e, ·)` on `[b_e, ∞)`.
    pub fn discrete_hamiltonian(&self, o: Orientation, rho: f64) -> Result<f64> {
        let b = self.b(o);
        if rho < b - 1e-12 * (1.0 + b.abs()) {
            return Err(Error::DomainError { value: rho, lower: b });
        }
        if rho <= b {
            return Ok(self.a_e);
        }
        let f = |a: f64| self.sigma_at(o, a);
        let hi = crate::numerics::expand_upper(self.a_e, 1.0, 200, |a| f(a) >= rho)
            .ok_or_else(|| Error::ConvergenceFailure(format!("no level reaches momentum {rho}")))?;
        Ok(bisect_increasing(f, rho, self.a_e, hi, ROOT_TOL))
    }

    /// `sup_{ρ >= b_e} ρλ - 𝓗(e, ρ)`, by golden-section search in `ρ`.
    pub fn discrete_lagrangian(&self, o: Orientation, lambda: f64) -> Result<f64> {
        if lambda < 0.0 {
            return Err(Error::DomainError { value: lambda, lower: 0.0 });
        }
        if lambda == 0.0 {
            return Ok(-self.a_e);
        }
        let b = self.b(o);
        let m = golden_max_right(
            |rho| rho * lambda - self.discrete_hamiltonian(o, rho).unwrap_or(f64::INFINITY),
            b,
            1.0,
            FENCHEL_TOL,
        );
        Ok(m.value)
    }

    /// `sup_{a >= a_e} λσ(e, a) - a`; equal to `𝓛(e, λ)` and much cheaper.
    pub fn lagrangian_by_levels(&self, o: Orientation, lambda: f64) -> f64 {
        self.level_maximizer(o, lambda).1
    }

    /// Maximizing level and value of `λσ(e, a) - a`.
    pub fn level_maximizer(&self, o: Orientation, lambda: f64) -> (f64, f64) {
        if lambda <= 0.0 {
            return (self.a_e, -self.a_e);
        }
        let m = golden_max_right(
            |a| lambda * self.sigma_at(o, a) - a,
            self.a_e,
            1.0,
            1e-11 * (1.0 + self.a_e.abs()),
        );
        (m.arg, m.value)
    }

    /// Minimal action to cross the edge in time `T`, namely `T·𝓛(e, 1/T)`.
    pub fn edge_action(&self, o: Orientation, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
        }
        Ok(t * self.discrete_lagrangian(o, 1.0 / t)?)
    }
}
