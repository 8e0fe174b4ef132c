//! Per-edge Hamiltonian models `H_e(s, ρ)` on positive edges.
//!
//! Two families are supported: `κρ²/2 + b(s)ρ + V(s)` with trigonometric
//! polynomial drift and potential, and tabulated samples interpolated
//! piecewise linearly in `s` and convexly in `ρ`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack when comparing a level with a fiber minimum.
const LEVEL_SLACK: f64 = 1e-9;
/// Floor on the curvature of the quadratic tails of tabulated rows.
const TAIL_CURVATURE_FLOOR: f64 = 1e-3;

/// `c + Σ_k cos_k cos(2πks) + sin_k sin(2πks)`, `k = 1, 2, ...`
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct TrigPoly {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
    #[serde(default, rename = "const")]
    pub constant: f64,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            constant: c,
            ..Default::default()
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let mut v = self.constant;
        for (k, c) in self.cos.iter().enumerate() {
            v += c * (2.0 * PI * (k + 1) as f64 * s).cos();
        }
        for (k, c) in self.sin.iter().enumerate() {
            v += c * (2.0 * PI * (k + 1) as f64 * s).sin();
        }
        v
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.cos.iter().chain(&self.sin).all(|c| c.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub kappa: f64,
    pub drift: TrigPoly,
    pub potential: TrigPoly,
}

impl QuadraticModel {
    pub fn new(kappa: f64, drift: TrigPoly, potential: TrigPoly) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidModel(format!("kappa must be positive, got {kappa}")));
        }
        if !drift.is_finite() || !potential.is_finite() {
            return Err(Error::InvalidModel("non-finite coefficient".into()));
        }
        Ok(QuadraticModel {
            kappa,
            drift,
            potential,
        })
    }

    /// `ρ²/2 + V(s)`.
    pub fn free(potential: TrigPoly) -> Self {
        QuadraticModel {
            kappa: 1.0,
            drift: TrigPoly::default(),
            potential,
        }
    }
}

/// Convex piecewise-linear function of `ρ` on a grid, continued by quadratic
/// tails that match the end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRow {
    rho: Arc<[f64]>,
    vals: Vec<f64>,
    c_left: f64,
    c_right: f64,
}

impl ConvexRow {
    fn slope(&self, j: usize) -> f64 {
        (self.vals[j + 1] - self.vals[j]) / (self.rho[j + 1] - self.rho[j])
    }

    fn last(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn value(&self, r: f64) -> f64 {
        let n = self.last();
        if r < self.rho[0] {
            let x = r - self.rho[0];
            return self.vals[0] + self.slope(0) * x + 0.5 * self.c_left * x * x;
        }
        if r > self.rho[n] {
            let x = r - self.rho[n];
            return self.vals[n] + self.slope(n - 1) * x + 0.5 * self.c_right * x * x;
        }
        let j = match self.rho.binary_search_by(|p| p.partial_cmp(&r).unwrap()) {
            Ok(j) => return self.vals[j],
            Err(j) => j - 1,
        };
        let w = (r - self.rho[j]) / (self.rho[j + 1] - self.rho[j]);
        (1.0 - w) * self.vals[j] + w * self.vals[j + 1]
    }

    /// Minimizer and minimum value.
    pub fn min(&self) -> (f64, f64) {
        let n = self.last();
        let m0 = self.slope(0);
        if m0 > 0.0 {
            return (self.rho[0] - m0 / self.c_left, self.vals[0] - m0 * m0 / (2.0 * self.c_left));
        }
        let mn = self.slope(n - 1);
        if mn < 0.0 {
            return (self.rho[n] - mn / self.c_right, self.vals[n] - mn * mn / (2.0 * self.c_right));
        }
        let j = (0..=n)
            .min_by(|&a, &b| self.vals[a].partial_cmp(&self.vals[b]).unwrap())
            .unwrap();
        (self.rho[j], self.vals[j])
    }

    /// Largest `ρ` with value `a`.
    pub fn upper_root(&self, a: f64) -> Option<f64> {
        let (arg, min) = self.min();
        if a < min - LEVEL_SLACK * (1.0 + a.abs()) {
            return None;
        }
        if a <= min {
            return Some(arg);
        }
        let n = self.last();
        if a >= self.vals[n] || arg >= self.rho[n] {
            let m = self.slope(n - 1);
            let c = self.c_right;
            let disc = (m * m + 2.0 * c * (a - self.vals[n])).max(0.0);
            return Some(self.rho[n] + (-m + disc.sqrt()) / c);
        }
        // the level is crossed on the grid, right of the minimizer
        let mut j = n;
        while j > 0 && self.vals[j - 1] > a {
            j -= 1;
        }
        if j == 0 {
            // only in the left tail
            let m = self.slope(0);
            let c = self.c_left;
            let disc = (m * m - 2.0 * c * (self.vals[0] - a)).max(0.0);
            return Some(self.rho[0] + (-m + disc.sqrt()) / c);
        }
        let (lo, hi) = (self.vals[j - 1], self.vals[j]);
        let w = (a - lo) / (hi - lo);
        Some(self.rho[j - 1] + w * (self.rho[j] - self.rho[j - 1]))
    }

    /// Mirror image `ρ ↦ -ρ`.
    pub fn reflected(&self) -> ConvexRow {
        let rho: Vec<f64> = self.rho.iter().rev().map(|r| -r).collect();
        ConvexRow {
            rho: rho.into(),
            vals: self.vals.iter().rev().copied().collect(),
            c_left: self.c_right,
            c_right: self.c_left,
        }
    }

    pub fn lower_root(&self, a: f64) -> Option<f64> {
        self.reflected().upper_root(a).map(|r| -r)
    }

    fn blend(&self, other: &ConvexRow, w: f64) -> ConvexRow {
        ConvexRow {
            rho: self.rho.clone(),
            vals: self
                .vals
                .iter()
                .zip(&other.vals)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect(),
            c_left: (1.0 - w) * self.c_left + w * other.c_left,
            c_right: (1.0 - w) * self.c_right + w * other.c_right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    s_grid: Vec<f64>,
    rows: Vec<ConvexRow>,
}

impl TabulatedModel {
    /// `values[i][j] = H(s_grid[i], rho_grid[j])`.
    pub fn new(s_grid: Vec<f64>, rho_grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if s_grid.len() < 2 || rho_grid.len() < 3 {
            return Err(Error::InvalidModel(
                "tabulated model needs at least 2 s-samples and 3 rho-samples".into(),
            ));
        }
        let increasing = |g: &[f64]| g.windows(2).all(|w| w[1] > w[0]) && g.iter().all(|x| x.is_finite());
        if !increasing(&s_grid) || !increasing(&rho_grid) {
            return Err(Error::InvalidModel("grids must be finite and strictly increasing".into()));
        }
        if s_grid[0].abs() > 1e-12 || (s_grid[s_grid.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel("s_grid must span [0, 1]".into()));
        }
        if values.len() != s_grid.len() || values.iter().any(|r| r.len() != rho_grid.len()) {
            return Err(Error::InvalidModel("values must have shape |s_grid| x |rho_grid|".into()));
        }
        let rho: Arc<[f64]> = rho_grid.into();
        let mut rows = Vec::with_capacity(values.len());
        for (s, vals) in s_grid.iter().zip(values) {
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel("non-finite sample".into()));
            }
            let slopes: Vec<f64> = (0..vals.len() - 1)
                .map(|j| (vals[j + 1] - vals[j]) / (rho[j + 1] - rho[j]))
                .collect();
            let scale = slopes.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if slopes.windows(2).any(|w| w[1] < w[0] - 1e-12 * scale) {
                return Err(Error::NonConvexModel { s: *s });
            }
            let n = rho.len() - 1;
            let curv = |j: usize| (slopes[j + 1] - slopes[j]) / (0.5 * (rho[j + 2] - rho[j]));
            rows.push(ConvexRow {
                rho: rho.clone(),
                vals,
                c_left: curv(0).max(TAIL_CURVATURE_FLOOR),
                c_right: curv(n - 2).max(TAIL_CURVATURE_FLOOR),
            });
        }
        Ok(TabulatedModel { s_grid, rows })
    }

    /// Interpolated fiber at arc parameter `s`.
    pub fn row(&self, s: f64) -> ConvexRow {
        let s = s.clamp(0.0, 1.0);
        let i = match self.s_grid.binary_search_by(|p| p.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.rows[i].clone(),
            Err(i) => i - 1,
        };
        let w = (s - self.s_grid[i]) / (self.s_grid[i + 1] - self.s_grid[i]);
        self.rows[i].blend(&self.rows[i + 1], w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeHamiltonianModel {
    Quadratic(QuadraticModel),
    Tabulated(TabulatedModel),
}

impl EdgeHamiltonianModel {
    pub fn value(&self, s: f64, rho: f64) -> f64 {
        match self {
            Self::Quadratic(q) => {
                0.5 * q.kappa * rho * rho + q.drift.eval(s) * rho + q.potential.eval(s)
            }
            Self::Tabulated(t) => t.row(s).value(rho),
        }
    }

    /// Minimizer in `ρ` and the fiber minimum at `s`.
    pub fn fiber_min(&self, s: f64) -> (f64, f64) {
        match self {
            Self::Quadratic(q) => {
                let b = q.drift.eval(s);
                (-b / q.kappa, q.potential.eval(s) - b * b / (2.0 * q.kappa))
            }
            Self::Tabulated(t) => t.row(s).min(),
        }
    }

    pub fn upper_root(&self, s: f64, a: f64) -> Result<f64> {
        match self {
            Self::Quadratic(q) => quadratic_root(q.kappa, q.drift.eval(s), q.potential.eval(s), a, 1.0)
                .ok_or_else(|| self.below(s, a)),
            Self::Tabulated(t) => t.row(s).upper_root(a).ok_or_else(|| self.below(s, a)),
        }
    }

    pub fn lower_root(&self, s: f64, a: f64) -> Result<f64> {
        match self {
            Self::Quadratic(q) => quadratic_root(q.kappa, q.drift.eval(s), q.potential.eval(s), a, -1.0)
                .ok_or_else(|| self.below(s, a)),
            Self::Tabulated(t) => t.row(s).lower_root(a).ok_or_else(|| self.below(s, a)),
        }
    }

    fn below(&self, s: f64, a: f64) -> Error {
        Error::LevelBelowMinimum {
            level: a,
            minimum: self.fiber_min(s).1,
            s,
        }
    }

    /// The same model plus a constant.
    pub fn shifted(&self, c: f64) -> Self {
        match self {
            Self::Quadratic(q) => {
                let mut q = q.clone();
                q.potential.constant += c;
                Self::Quadratic(q)
            }
            Self::Tabulated(t) => {
                let mut t = t.clone();
                for row in &mut t.rows {
                    for v in &mut row.vals {
                        *v += c;
                    }
                }
                Self::Tabulated(t)
            }
        }
    }
}

/// Root of `κρ²/2 + bρ + v = a` on the side given by `sign` (+1 largest).
#[inline]
pub(crate) fn quadratic_root(kappa: f64, b: f64, v: f64, a: f64, sign: f64) -> Option<f64> {
    let disc = b * b - 2.0 * kappa * (v - a);
    if disc < 0.0 {
        let min = v - b * b / (2.0 * kappa);
        if a < min - LEVEL_SLACK * (1.0 + a.abs()) {
            return None;
        }
        return Some(-b / kappa);
    }
    Some((-b + sign * disc.sqrt()) / kappa)
}

/// JSON description of one edge model; `"edge": "*"` sets a default.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HamiltonianSpec {
    pub edge: String,
    #[serde(flatten)]
    pub model: ModelSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Quadratic {
        #[serde(default = "unit")]
        kappa: f64,
        #[serde(default)]
        potential: TrigPoly,
        #[serde(default)]
        drift: TrigPoly,
    },
    Tabulated {
        s_grid: Vec<f64>,
        rho_grid: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

fn unit() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self) -> Result<EdgeHamiltonianModel> {
        match self {
            ModelSpec::Quadratic {
                kappa,
                potential,
                drift,
            } => Ok(EdgeHamiltonianModel::Quadratic(QuadraticModel::new(
                *kappa,
                drift.clone(),
                potential.clone(),
            )?)),
            ModelSpec::Tabulated {
                s_grid,
                rho_grid,
                values,
            } => Ok(EdgeHamiltonianModel::Tabulated(TabulatedModel::new(
                s_grid.clone(),
                rho_grid.clone(),
                values.clone(),
            )?)),
        }
    }
}

pub fn parse_hamiltonians(text: &str) -> Result<Vec<HamiltonianSpec>> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine() -> EdgeHamiltonianModel {
        EdgeHamiltonianModel::Quadratic(QuadraticModel::free(TrigPoly {
            cos: vec![-1.0],
            ..Default::default()
        }))
    }

    fn tabulated_free() -> TabulatedModel {
        let rho: Vec<f64> = (-40..=40).map(|j| j as f64 * 0.1).collect();
        let row: Vec<f64> = rho.iter().map(|r| 0.5 * r * r).collect();
        TabulatedModel::new(vec![0.0, 1.0], rho, vec![row.clone(), row]).unwrap()
    }

    #[test]
    fn quadratic_roots_and_minimum() {
        let m = cosine();
        assert!((m.upper_root(0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((m.lower_root(0.0, 1.0).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(m.fiber_min(0.5), (0.0, 1.0));
        assert!(matches!(m.upper_root(0.5, 0.5), Err(Error::LevelBelowMinimum { .. })));
        let d = EdgeHamiltonianModel::Quadratic(
            QuadraticModel::new(2.0, TrigPoly::constant(1.0), TrigPoly::constant(0.5)).unwrap(),
        );
        let r = d.upper_root(0.3, 3.0).unwrap();
        assert!((d.value(0.3, r) - 3.0).abs() < 1e-12);
        assert!(r > d.fiber_min(0.3).0);
    }

    #[test]
    fn tabulated_matches_quadratic_on_grid_range() {
        let t = EdgeHamiltonianModel::Tabulated(tabulated_free());
        let r = t.upper_root(0.4, 2.0).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let l = t.lower_root(0.4, 2.0).unwrap();
        assert!((l + 2.0).abs() < 1e-12);
        assert_eq!(t.fiber_min(0.7), (0.0, 0.0));
        // beyond the grid the quadratic tail takes over
        let far = t.upper_root(0.0, 12.5).unwrap();
        assert!((t.value(0.0, far) - 12.5).abs() < 1e-9);
        assert!(far > 4.0);
    }

    #[test]
    fn tabulated_shifted_minimum_in_tail() {
        let rho = vec![0.0, 1.0, 2.0];
        let vals = vec![1.0, 2.0, 4.0];
        let t = TabulatedModel::new(vec![0.0, 1.0], rho, vec![vals.clone(), vals]).unwrap();
        let row = t.row(0.5);
        let (arg, min) = row.min();
        assert!(arg < 0.0);
        assert!((row.value(arg) - min).abs() < 1e-12);
        let up = row.upper_root(min + 0.01).unwrap();
        assert!((row.value(up) - (min + 0.01)).abs() < 1e-9 && up > arg);
        let lo = row.lower_root(min + 0.01).unwrap();
        assert!((row.value(lo) - (min + 0.01)).abs() < 1e-9 && lo < arg);
        let mid = row.upper_root(1.5).unwrap();
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_samples_rejected() {
        let e = TabulatedModel::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0, 1.0, 4.0], vec![0.0, 2.0, 3.0], vec![0.0, 1.0, 4.0]],
        )
        .unwrap_err();
        assert_eq!(e, Error::NonConvexModel { s: 0.5 });
    }

    #[test]
    fn json_round_trip() {
        let text = r#"[{"edge":"e0","family":"quadratic","kappa":1.0,"potential":{"cos":[-1.0],"const":0.0}},
                      {"edge":"*","family":"tabulated","s_grid":[0,1],"rho_grid":[-1,0,1],"values":[[1,0,1],[1,0,1]]}]"#;
        let specs = parse_hamiltonians(text).unwrap();
        assert_eq!(specs.len(), 2);
        assert!(matches!(specs[0].model.build().unwrap(), EdgeHamiltonianModel::Quadratic(_)));
        assert!(matches!(specs[1].model.build().unwrap(), EdgeHamiltonianModel::Tabulated(_)));
        assert!(parse_hamiltonians("[{\"edge\":1}]").is_err());
        let bad = ModelSpec::Quadratic {
            kappa: -1.0,
            potential: TrigPoly::default(),
            drift: TrigPoly::default(),
        };
        assert!(matches!(bad.build(), Err(Error::InvalidModel(_))));
    }
}
