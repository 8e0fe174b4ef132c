//! Rescaled solutions at crystal vertices, the limit Hopf–Lax solution, and
//! the convergence experiment comparing the two.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::{scan_cycles, CycleScan};
use crate::crystal::CrystalVertex;
use crate::error::{Error, Result};
use crate::mather::beta_by_flux;
use crate::network::Network;

/// Initial datum `g: R^b → R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialDatum {
    Constant { value: f64 },
    /// `⟨p, x⟩`
    Linear { p: Vec<f64> },
    /// `c ‖x‖₁`
    Cone { c: f64 },
    /// `min_i v_i + L ‖x - x_i‖₂`, the largest `L`-Lipschitz function below the samples.
    Tabulated {
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
        lipschitz: f64,
    },
}

impl InitialDatum {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { p } => p.iter().zip(x).map(|(a, b)| a * b).sum(),
            Self::Cone { c } => c * x.iter().map(|v| v.abs()).sum::<f64>(),
            Self::Tabulated {
                points,
                values,
                lipschitz,
            } => points
                .iter()
                .zip(values)
                .map(|(pt, v)| v + lipschitz * euclid(pt, x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Lipschitz constant for the Euclidean norm on `R^b`.
    pub fn lipschitz(&self, b: usize) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Linear { p } => p.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Self::Cone { c } => c.abs() * (b as f64).sqrt(),
            Self::Tabulated { lipschitz, .. } => *lipschitz,
        }
    }

    fn check(&self, b: usize) -> Result<()> {
        let bad = match self {
            Self::Linear { p } => p.len() != b,
            Self::Tabulated { points, values, .. } => {
                points.len() != values.len() || points.is_empty() || points.iter().any(|p| p.len() != b)
            }
            _ => false,
        };
        if bad {
            return Err(Error::InvalidParameter(format!(
                "initial datum does not live on R^{b}"
            )));
        }
        Ok(())
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Search radius in the limit variable; derived from the datum when `None`.
    pub radius: Option<f64>,
    /// Geometric levels in the dual grid.
    pub grid_points: usize,
    /// Absolute tolerance on the dual maximization.
    pub tol: f64,
    /// Cap on shortest-path sweeps spent refining the dual levels.
    pub max_refinements: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            radius: None,
            grid_points: 64,
            tol: 1e-9,
            max_refinements: 400,
        }
    }
}

/// Unit directions probed when bounding minimizers.
fn directions(b: usize) -> Vec<Vec<f64>> {
    match b {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16)
            .map(|k| {
                let th = k as f64 * std::f64::consts::PI / 8.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..b {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; b];
                    v[i] = s;
                    out.push(v);
                }
            }
            let norm = 1.0 / (b as f64).sqrt();
            for code in 0..(1usize << b) {
                out.push((0..b).map(|i| if code >> i & 1 == 1 { norm } else { -norm }).collect());
            }
            out
        }
    }
}

/// Radius in the limit variable beyond which `g(h₀) + tβ((h - h₀)/t)`
/// exceeds its value at `h₀ = h`, from the Lipschitz bound of `g` and the
/// growth of β along sampled directions.
pub fn search_radius(net: &Network, g: &InitialDatum, t: f64) -> Result<f64> {
    let b = net.betti();
    let l = g.lipschitz(b);
    let dirs = directions(b);
    let ok = |r: f64| {
        dirs.iter().all(|u| {
            let v: Vec<f64> = u.iter().map(|x| x * r).collect();
            beta_by_flux(net, &v) - l * r + net.a0 >= 0.25
        })
    };
    let mut r = 0.5;
    let mut doublings = 0;
    while !ok(r) {
        r *= 2.0;
        doublings += 1;
        if doublings > 40 {
            return Err(Error::RadiusExhausted(r * t));
        }
    }
    if doublings > 0 {
        let (mut lo, mut hi) = (0.5 * r, r);
        for _ in 0..12 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        r = hi;
    }
    Ok(r * t)
}

/// Vertices `(x, h)` of the crystal with `|h - center|∞ <= radius`.
struct LatticeBox {
    radius: i64,
    side: usize,
    cells: usize,
    center: Vec<i64>,
    /// CSR adjacency: outgoing `(directed edge, neighbor)` per state.
    offsets: Vec<u32>,
    targets: Vec<(u32, u32)>,
    n_vertices: usize,
}

impl LatticeBox {
    fn new(net: &Network, center: &[i64], radius: i64) -> Result<Self> {
        let b = net.betti();
        let side = (2 * radius + 1) as usize;
        let cells = side
            .checked_pow(b as u32)
            .filter(|c| c * net.graph.n_vertices() < (u32::MAX / 4) as usize)
            .ok_or_else(|| Error::BudgetExceeded(format!("lattice box of radius {radius}")))?;
        let nv = net.graph.n_vertices();
        let mut lb = LatticeBox {
            radius,
            side,
            cells,
            center: center.to_vec(),
            offsets: Vec::with_capacity(nv * cells + 1),
            targets: Vec::new(),
            n_vertices: nv,
        };
        lb.offsets.push(0);
        let mut rel = vec![0i64; b];
        for v in 0..nv {
            for cell in 0..cells {
                lb.decode_into(cell, &mut rel);
                for &d in net.graph.outgoing(v) {
                    let th = net.theta.theta(d);
                    if let Some(nc) = lb.encode_shift(&rel, th) {
                        lb.targets.push((d as u32, (net.graph.terminus(d) * cells + nc) as u32));
                    }
                }
                lb.offsets.push(lb.targets.len() as u32);
            }
        }
        Ok(lb)
    }

    fn n_states(&self) -> usize {
        self.n_vertices * self.cells
    }

    fn decode_into(&self, mut cell: usize, out: &mut [i64]) {
        for x in out.iter_mut() {
            *x = (cell % self.side) as i64 - self.radius;
            cell /= self.side;
        }
    }

    fn encode_shift(&self, rel: &[i64], shift: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (r, s) in rel.iter().zip(shift).rev() {
            let c = r + s;
            if c.abs() > self.radius {
                return None;
            }
            idx = idx * self.side + (c + self.radius) as usize;
        }
        Some(idx)
    }

    fn state(&self, z: &CrystalVertex) -> Option<usize> {
        let rel: Vec<i64> = z.h.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let zero = vec![0; rel.len()];
        self.encode_shift(&rel, &zero).map(|c| z.base * self.cells + c)
    }

    fn vertex(&self, s: usize) -> CrystalVertex {
        let mut rel = vec![0; self.center.len()];
        self.decode_into(s % self.cells, &mut rel);
        CrystalVertex {
            base: s / self.cells,
            h: rel.iter().zip(&self.center).map(|(r, c)| r + c).collect(),
        }
    }

    /// Lattice distance of a state from the center, in the sup norm.
    fn depth(&self, s: usize) -> i64 {
        let mut rel = vec![0; self.center.len()];
        self.decode_into(s % self.cells, &mut rel);
        rel.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `Ψ_a(z₀ → target)` for every state of the box: least `σ(·, a)`-length of
/// a path inside the box. Reduced costs from base-graph potentials keep the
/// edge weights nonnegative for Dijkstra.
fn distances_to(net: &Network, lb: &LatticeBox, target: usize, a: f64) -> Vec<f64> {
    let w = net.sigmas(a);
    let pot = match scan_cycles(&net.graph, &w) {
        CycleScan::Potentials(p) => p,
        CycleScan::Negative { .. } => vec![0.0; net.graph.n_vertices()],
    };
    let n = lb.n_states();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[target] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem(0.0, target as u32));
    while let Some(HeapItem(dw, s)) = heap.pop() {
        let s = s as usize;
        if done[s] {
            continue;
        }
        done[s] = true;
        let vs = s / lb.cells;
        let (lo, hi) = (lb.offsets[s] as usize, lb.offsets[s + 1] as usize);
        for &(d, u) in &lb.targets[lo..hi] {
            // edge d goes s → u, so its reversal goes u → s
            let u = u as usize;
            if done[u] {
                continue;
            }
            let r = (d ^ 1) as usize;
            let vu = u / lb.cells;
            let reduced = (w[r] + pot[vu] - pot[vs]).max(0.0);
            let c = dw + reduced;
            if c < dist[u] {
                dist[u] = c;
                heap.push(HeapItem(c, u as u32));
            }
        }
    }
    let pz = pot[target / lb.cells];
    for (s, d) in dist.iter_mut().enumerate() {
        if d.is_finite() {
            *d += pz - pot[s / lb.cells];
        }
    }
    dist
}

/// Samples `(a, F(a))` of a concave function, sorted by `a`.
#[derive(Debug, Clone, Default)]
struct ConcaveSamples {
    pts: Vec<(f64, f64)>,
}

impl ConcaveSamples {
    fn insert(&mut self, a: f64, v: f64) {
        let k = self.pts.partition_point(|p| p.0 < a);
        if self.pts.get(k).map_or(false, |p| p.0 == a) {
            return;
        }
        self.pts.insert(k, (a, v));
    }

    fn argmax(&self) -> usize {
        (0..self.pts.len())
            .max_by(|&i, &j| self.pts[i].1.total_cmp(&self.pts[j].1))
            .unwrap()
    }

    fn lower(&self) -> f64 {
        self.pts[self.argmax()].1
    }

    /// Upper bound on `sup F` from concavity (secant extensions).
    fn upper(&self) -> f64 {
        let k = self.argmax();
        let p = &self.pts;
        let n = p.len();
        let line = |i: usize, j: usize, x: f64| p[i].1 + (p[j].1 - p[i].1) / (p[j].0 - p[i].0) * (x - p[i].0);
        let mut best = p[k].1;
        // interval left of the maximum
        if k >= 1 {
            let (x0, x1) = (p[k - 1].0, p[k].0);
            let right_line = |x: f64| if k + 1 < n { line(k, k + 1, x) } else { f64::INFINITY };
            let left_line = |x: f64| if k >= 2 { line(k - 2, k - 1, x) } else { f64::INFINITY };
            best = best.max(envelope_max(x0, x1, left_line, right_line, p[k - 1].1.max(p[k].1)));
        }
        if k + 1 < n {
            let (x0, x1) = (p[k].0, p[k + 1].0);
            let left_line = |x: f64| if k >= 1 { line(k - 1, k, x) } else { f64::INFINITY };
            let right_line = |x: f64| if k + 2 < n { line(k + 1, k + 2, x) } else { f64::INFINITY };
            best = best.max(envelope_max(x0, x1, left_line, right_line, p[k].1.max(p[k + 1].1)));
        }
        best
    }

    fn bracket(&self) -> (f64, f64, f64) {
        let k = self.argmax();
        let n = self.pts.len();
        (
            self.pts[k.saturating_sub(1)].0,
            self.pts[k].0,
            self.pts[(k + 1).min(n - 1)].0,
        )
    }
}

/// Max over `[x0, x1]` of `min(l1, l2)` with `l1` nondecreasing-extension
/// from the left and `l2` from the right; infinite lines are ignored.
fn envelope_max<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(x0: f64, x1: f64, l1: F, l2: G, floor: f64) -> f64 {
    let at = |x: f64| l1(x).min(l2(x));
    let (a0, a1) = (at(x0), at(x1));
    let mut best = a0.max(a1);
    let (u0, u1, v0, v1) = (l1(x0), l1(x1), l2(x0), l2(x1));
    if u0.is_finite() && v0.is_finite() {
        // crossing point of the two lines
        let du = (u1 - u0) / (x1 - x0);
        let dv = (v1 - v0) / (x1 - x0);
        if (du - dv).abs() > 0.0 {
            let x = x0 + (v0 - u0) / (du - dv);
            if x > x0 && x < x1 {
                best = best.max(at(x));
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        // no information on one side: fall back to the sampled endpoints
        floor.max(if a0.is_finite() { a0 } else { f64::NEG_INFINITY }).max(if a1.is_finite() { a1 } else { f64::NEG_INFINITY })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSolution {
    pub value: f64,
    /// Starting vertex realizing the minimum.
    pub argmin: CrystalVertex,
    /// Half-width of the lattice box searched.
    pub lattice_radius: i64,
    /// Remaining gap between the lower and upper bounds of the minimum.
    pub gap: f64,
}

/// `u_ε(z, t) = min_{z₀} g(ε π₂(z₀)) + ε Φ̂(z₀, z, t/ε)` over starting vertices
/// in a lattice box around `z`, enlarged once if the minimizer reaches its
/// boundary.
pub fn epsilon_solution(
    net: &Network,
    g: &InitialDatum,
    z: &CrystalVertex,
    t: f64,
    eps: f64,
    opts: &SolverOptions,
) -> Result<EpsilonSolution> {
    if !(t > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter("t and eps must be positive".into()));
    }
    if net.betti() == 0 {
        return Err(Error::InvalidParameter("the base graph has no cycles".into()));
    }
    g.check(net.betti())?;
    if z.h.len() != net.betti() {
        return Err(Error::DimensionMismatch {
            expected: net.betti(),
            got: z.h.len(),
        });
    }
    let r = match opts.radius {
        Some(r) => r,
        None => search_radius(net, g, t)?,
    };
    let mut lattice = (r / eps).ceil() as i64 + 1;
    for attempt in 0..2 {
        let sol = solve_in_box(net, g, z, t, eps, lattice, opts)?;
        let lb_depth = sol.1;
        if lb_depth < lattice - 1 {
            return Ok(sol.0);
        }
        if attempt == 0 {
            lattice *= 2;
        }
    }
    Err(Error::RadiusExhausted(lattice as f64 * eps))
}

fn solve_in_box(
    net: &Network,
    g: &InitialDatum,
    z: &CrystalVertex,
    t: f64,
    eps: f64,
    lattice: i64,
    opts: &SolverOptions,
) -> Result<(EpsilonSolution, i64)> {
    let lb = LatticeBox::new(net, &z.h, lattice)?;
    let target = lb.state(z).ok_or_else(|| Error::UnknownVertex(format!("{z:?}")))?;
    let n = lb.n_states();
    let big_t = t / eps;
    let datum: Vec<f64> = (0..n)
        .map(|s| {
            let v = lb.vertex(s);
            let x: Vec<f64> = v.h.iter().map(|&c| c as f64 * eps).collect();
            g.eval(&x)
        })
        .collect();

    // upper level where every slope of Ψ is below T/4
    let mut span = 1.0;
    let mut found = false;
    for _ in 0..60 {
        let a = net.a0 + span;
        let da = 1e-3 * span;
        let d1 = distances_to(net, &lb, target, a);
        let d2 = distances_to(net, &lb, target, a + da);
        let max_slope = d1
            .iter()
            .zip(&d2)
            .filter(|(x, _)| x.is_finite())
            .map(|(x, y)| (y - x) / da)
            .fold(0.0f64, f64::max);
        if max_slope < 0.25 * big_t {
            found = true;
            break;
        }
        span *= 2.0;
    }
    if !found {
        return Err(Error::ConvergenceFailure("no upper level for the dual search".into()));
    }
    let m = opts.grid_points.max(2);
    let lo = 1e-6f64.min(0.5 * span);
    let mut levels = vec![net.a0];
    levels.extend((0..m).map(|k| net.a0 + lo * (span / lo).powf(k as f64 / (m - 1) as f64)));

    let mut samples: Vec<ConcaveSamples> = vec![ConcaveSamples::default(); n];
    for &a in &levels {
        let d = distances_to(net, &lb, target, a);
        for (s, smp) in samples.iter_mut().enumerate() {
            if d[s].is_finite() {
                smp.pts.push((a, d[s] - a * big_t));
            }
        }
    }
    // prune with the concavity bounds
    let reach: Vec<usize> = (0..n).filter(|&s| !samples[s].pts.is_empty()).collect();
    let bound = |s: usize, smp: &ConcaveSamples| (datum[s] + eps * smp.lower(), datum[s] + eps * smp.upper());
    let best_upper = reach
        .iter()
        .map(|&s| bound(s, &samples[s]).1)
        .fold(f64::INFINITY, f64::min);
    let mut alive: Vec<usize> = reach
        .into_iter()
        .filter(|&s| bound(s, &samples[s]).0 <= best_upper + 1e-12)
        .collect();
    let mut sweeps = 0;
    loop {
        let (lower_min, mut best_s) = (f64::INFINITY, alive[0]);
        let mut lower_min = lower_min;
        let mut upper_min = f64::INFINITY;
        for &s in &alive {
            let (l, u) = bound(s, &samples[s]);
            if l < lower_min {
                lower_min = l;
                best_s = s;
            }
            upper_min = upper_min.min(u);
        }
        let gap = upper_min - lower_min;
        if gap <= opts.tol * (1.0 + lower_min.abs()) || sweeps >= opts.max_refinements {
            // report the best attained value
            let (value, arg) = alive
                .iter()
                .map(|&s| (bound(s, &samples[s]).0, s))
                .fold((f64::INFINITY, best_s), |acc, x| if x.0 < acc.0 { x } else { acc });
            return Ok((
                EpsilonSolution {
                    value,
                    argmin: lb.vertex(arg),
                    lattice_radius: lattice,
                    gap: gap.max(0.0),
                },
                lb.depth(arg),
            ));
        }
        // refine the candidate whose bracket is widest in value among the
        // ones that could still be the minimizer
        let pick = alive
            .iter()
            .copied()
            .filter(|&s| {
                let (l, u) = bound(s, &samples[s]);
                l <= upper_min && u - l > opts.tol * (1.0 + l.abs())
            })
            .min_by(|&x, &y| bound(x, &samples[x]).0.total_cmp(&bound(y, &samples[y]).0))
            .unwrap_or(best_s);
        let (left, mid, right) = samples[pick].bracket();
        for a in [0.5 * (left + mid), 0.5 * (mid + right)] {
            if a <= left || a >= right || a == mid {
                continue;
            }
            let d = distances_to(net, &lb, target, a);
            sweeps += 1;
            for &s in &alive {
                samples[s].insert(a, d[s] - a * big_t);
            }
        }
        if left == mid && mid == right {
            sweeps = opts.max_refinements;
        }
        alive.retain(|&s| bound(s, &samples[s]).0 <= upper_min + 1e-12);
    }
}

/// Hopf–Lax value `inf_{h₀} g(h₀) + tβ((h - h₀)/t)`, by a grid search over
/// a box around `h` that zooms onto the best node.
pub fn limit_solution(net: &Network, g: &InitialDatum, h: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    g.check(net.betti())?;
    let b = net.betti();
    let mut half = search_radius(net, g, t)?;
    let mut center = h.to_vec();
    let objective = |h0: &[f64]| -> f64 {
        let v: Vec<f64> = h.iter().zip(h0).map(|(x, y)| (x - y) / t).collect();
        g.eval(h0) + t * beta_by_flux(net, &v)
    };
    let per_axis = 11usize;
    let mut best = (objective(h), h.to_vec());
    while half > 1e-5 {
        let step = 2.0 * half / (per_axis - 1) as f64;
        for code in 0..per_axis.pow(b as u32) {
            let mut c = code;
            let h0: Vec<f64> = center
                .iter()
                .map(|x| {
                    let i = c % per_axis;
                    c /= per_axis;
                    x - half + i as f64 * step
                })
                .collect();
            let v = objective(&h0);
            if v < best.0 {
                best = (v, h0);
            }
        }
        center = best.1.clone();
        half = 2.0 * step;
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    /// Sample points `(h, t)`.
    pub points: Vec<(Vec<f64>, f64)>,
    /// Strictly decreasing scales.
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub eps: f64,
    pub h: Vec<f64>,
    pub t: f64,
    pub u_eps: f64,
    pub u_limit: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub sup_error_per_eps: Vec<f64>,
}

impl ConvergenceReport {
    pub fn csv(&self) -> String {
        let b = self.rows.first().map_or(0, |r| r.h.len());
        let mut out = String::from("eps");
        for i in 1..=b {
            out.push_str(&format!(",h{i}"));
        }
        out.push_str(",t,u_eps,u_limit,abs_error\n");
        for r in &self.rows {
            out.push_str(&format!("{}", r.eps));
            for v in &r.h {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{},{:.10},{:.10},{:.10}\n", r.t, r.u_eps, r.u_limit, r.abs_error));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::json!({ "sup_error_per_eps": self.sup_error_per_eps }).to_string()
    }
}

/// For each scale and sample point, compares `u_ε` at the crystal vertex over
/// the root whose rescaled lattice component is nearest `h` with the limit
/// solution at `h`.
pub fn convergence_experiment(
    net: &Network,
    g: &InitialDatum,
    grid: &ExperimentGrid,
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    if grid.eps.windows(2).any(|w| w[1] >= w[0]) || grid.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eps list must be positive and strictly decreasing".into()));
    }
    if grid.points.iter().any(|(h, t)| !(*t > 0.0) || h.len() != net.betti()) {
        return Err(Error::InvalidParameter("sample points need t > 0 and h in R^b".into()));
    }
    let limits: Vec<f64> = grid
        .points
        .par_iter()
        .map(|(h, t)| limit_solution(net, g, h, *t))
        .collect::<Result<_>>()?;
    let root = net.graph.root();
    let items: Vec<(usize, usize)> = (0..grid.eps.len())
        .flat_map(|i| (0..grid.points.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<ReportRow> = items
        .par_iter()
        .map(|&(i, j)| {
            let eps = grid.eps[i];
            let (h, t) = &grid.points[j];
            let z = CrystalVertex {
                base: root,
                h: h.iter().map(|x| (x / eps).round() as i64).collect(),
            };
            let u = epsilon_solution(net, g, &z, *t, eps, opts)?.value;
            Ok(ReportRow {
                eps,
                h: h.clone(),
                t: *t,
                u_eps: u,
                u_limit: limits[j],
                abs_error: (u - limits[j]).abs(),
            })
        })
        .collect::<Result<_>>()?;
    let sup_error_per_eps = grid
        .eps
        .iter()
        .map(|&e| {
            rows.iter()
                .filter(|r| r.eps == e)
                .map(|r| r.abs_error)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ConvergenceReport {
        rows,
        sup_error_per_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::effective_hamiltonian;
    use crate::network::fixtures::*;

    #[test]
    fn datum_evaluation() {
        let g = InitialDatum::Cone { c: 2.0 };
        assert_eq!(g.eval(&[1.0, -0.5]), 3.0);
        let tab = InitialDatum::Tabulated {
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            values: vec![0.0, -1.0],
            lipschitz: 2.0,
        };
        assert_eq!(tab.eval(&[1.0, 0.0]), -1.0);
        assert_eq!(tab.eval(&[0.0, 0.0]), 0.0);
        assert!(tab.check(3).is_err());
    }

    #[test]
    fn zero_datum_free_bouquet() {
        let n = free_bouquet();
        let g = InitialDatum::Constant { value: 0.0 };
        let z = CrystalVertex { base: 0, h: vec![2, -1] };
        let s = epsilon_solution(&n, &g, &z, 1.0, 0.25, &SolverOptions::default()).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!(limit_solution(&n, &g, &[0.5, -0.25], 1.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn linear_datum_matches_hopf_lax() {
        let n = free_bouquet();
        let p = vec![1.0, -0.5];
        let g = InitialDatum::Linear { p: p.clone() };
        let h = [0.5, 0.25];
        let exact = 0.5 * 1.0 - 0.5 * 0.25 - 1.0 * effective_hamiltonian(&n, &p).unwrap();
        assert!((limit_solution(&n, &g, &h, 1.0).unwrap() - exact).abs() < 1e-4);
        let z = CrystalVertex { base: 0, h: vec![4, 2] };
        let s = epsilon_solution(&n, &g, &z, 1.0, 0.125, &SolverOptions::default()).unwrap();
        assert!((s.value - exact).abs() < 1e-2, "{} vs {exact}", s.value);
    }

    #[test]
    fn concave_bounds_bracket_the_maximum() {
        let mut c = ConcaveSamples::default();
        for a in [0.0, 0.5, 1.0, 2.0, 4.0] {
            c.insert(a, -(a - 1.3f64).powi(2));
        }
        assert!(c.lower() <= 0.0 && c.upper() >= 0.0);
        assert!(c.upper() - c.lower() < 1.0);
    }
}
