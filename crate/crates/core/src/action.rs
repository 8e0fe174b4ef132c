//! Discrete minimal action between vertices of the crystal and its large-time
//! behavior.

use crate::crystal::{sub, CrystalVertex};
use crate::error::{Error, Result};
use crate::graph::Path;
use crate::mather::{beta, BetaOptions};
use crate::network::Network;
use crate::numerics::{golden_max, golden_max_right};

/// `max_{a >= floor} Σ_e n_e σ(e, a) - aT` for edge multiplicities `counts`.
pub fn counted_action(net: &Network, counts: &[(usize, f64)], floor: f64, t: f64) -> f64 {
    golden_max_right(
        |a| counts.iter().map(|&(d, n)| n * net.sigma(d, a)).sum::<f64>() - a * t,
        floor,
        1.0,
        1e-12 * (1.0 + floor.abs()),
    )
    .value
}

/// Least action of traversing `support` in total time `T`, pauses included.
pub fn path_action(net: &Network, support: &Path, t: f64) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::InvalidParameter("support must be nonempty".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let floor = support
        .edges
        .iter()
        .map(|&d| net.a_e(d))
        .fold(f64::NEG_INFINITY, f64::max);
    let counts: Vec<(usize, f64)> = support.edges.iter().map(|&d| (d, 1.0)).collect();
    Ok(counted_action(net, &counts, floor, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionQuery {
    pub x: usize,
    pub y: usize,
    pub t: f64,
    pub h: Vec<i64>,
    /// Rotation box half-width; defaults to `|h|∞ + 2`.
    pub box_radius: Option<i64>,
    /// Edge-count cap; defaults to `6 (|h|₁ + |V₀|)`.
    pub edge_cap: Option<usize>,
    /// Number of geometric levels in the dual grid.
    pub grid_points: usize,
}

impl ActionQuery {
    pub fn new(x: usize, y: usize, t: f64, h: Vec<i64>) -> Self {
        ActionQuery {
            x,
            y,
            t,
            h,
            box_radius: None,
            edge_cap: None,
            grid_points: 64,
        }
    }

    fn radius(&self) -> i64 {
        self.box_radius
            .unwrap_or_else(|| self.h.iter().map(|v| v.abs()).max().unwrap_or(0) + 2)
    }

    fn cap(&self, net: &Network) -> usize {
        self.edge_cap.unwrap_or_else(|| {
            6 * (self.h.iter().map(|v| v.unsigned_abs() as usize).sum::<usize>() + net.graph.n_vertices())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionResult {
    pub value: f64,
    /// Maximizing level of the dual problem.
    pub level: f64,
    /// Whether the edge-count cap still changed distances on the last layer.
    pub cap_binding: bool,
}

/// Lifted states `(v, h)` with `|h|∞ <= r`, as a flat transition list.
struct BoxGraph {
    n_states: usize,
    start: usize,
    target: usize,
    /// `(from, to, directed edge)`.
    transitions: Vec<(u32, u32, u32)>,
}

impl BoxGraph {
    fn new(net: &Network, x: usize, y: usize, h: &[i64], r: i64) -> Result<Self> {
        let b = net.betti();
        if h.len() != b {
            return Err(Error::DimensionMismatch { expected: b, got: h.len() });
        }
        if h.iter().any(|v| v.abs() > r) {
            return Err(Error::InvalidParameter(format!(
                "rotation {h:?} lies outside the box of radius {r}"
            )));
        }
        let side = (2 * r + 1) as usize;
        let cells = side.pow(b as u32);
        let encode = |hv: &[i64]| -> Option<usize> {
            let mut idx = 0usize;
            for &c in hv.iter().rev() {
                if c.abs() > r {
                    return None;
                }
                idx = idx * side + (c + r) as usize;
            }
            Some(idx)
        };
        let decode = |mut idx: usize| -> Vec<i64> {
            (0..b)
                .map(|_| {
                    let c = (idx % side) as i64 - r;
                    idx /= side;
                    c
                })
                .collect()
        };
        let n_states = net.graph.n_vertices() * cells;
        if n_states > u32::MAX as usize / 2 {
            return Err(Error::BudgetExceeded(format!("{n_states} lifted states")));
        }
        let mut transitions = Vec::new();
        for cell in 0..cells {
            let hv = decode(cell);
            for v in 0..net.graph.n_vertices() {
                for &d in net.graph.outgoing(v) {
                    let nh: Vec<i64> = hv.iter().zip(net.theta.theta(d)).map(|(a, t)| a + t).collect();
                    if let Some(nc) = encode(&nh) {
                        let to = net.graph.terminus(d) * cells + nc;
                        transitions.push(((v * cells + cell) as u32, to as u32, d as u32));
                    }
                }
            }
        }
        let zero = vec![0; b];
        Ok(BoxGraph {
            n_states,
            start: x * cells + encode(&zero).unwrap(),
            target: y * cells + encode(h).unwrap(),
            transitions,
        })
    }

    /// Least `Σ σ(e, a)` over lifted paths with at most `cap` edges, and
    /// whether the last layer still improved anything.
    fn distance(&self, weights: &[f64], cap: usize) -> (f64, bool) {
        let mut dist = vec![f64::INFINITY; self.n_states];
        dist[self.start] = 0.0;
        let mut next = dist.clone();
        let mut changed = true;
        for _ in 0..cap {
            changed = false;
            for &(f, t, d) in &self.transitions {
                let df = dist[f as usize];
                if df == f64::INFINITY {
                    continue;
                }
                let c = df + weights[d as usize];
                if c < next[t as usize] - 1e-14 * (1.0 + c.abs()) {
                    next[t as usize] = c;
                    changed = true;
                }
            }
            dist.copy_from_slice(&next);
            if !changed {
                break;
            }
        }
        (dist[self.target], changed)
    }
}

/// Dual minimal action `max_{a >= a₀} Ψ_a(x, y, h) - aT`, where `Ψ_a` is the
/// least `σ(·, a)`-length of a lifted path from `(x, 0)` to `(y, h)`.
pub fn min_action(net: &Network, q: &ActionQuery) -> Result<ActionResult> {
    if !(q.t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {}", q.t)));
    }
    let bg = BoxGraph::new(net, q.x, q.y, &q.h, q.radius())?;
    let cap = q.cap(net);
    let mut binding = false;
    let mut psi = |a: f64| -> Result<f64> {
        let (d, still) = bg.distance(&net.sigmas(a), cap);
        binding |= still;
        if d == f64::INFINITY {
            return Err(Error::Unreachable(format!(
                "no lifted path with at most {cap} edges reaches rotation {:?}",
                q.h
            )));
        }
        Ok(d)
    };
    let (value, level) = dual_maximize(net.a0, q.t, q.grid_points, &mut psi)?;
    Ok(ActionResult {
        value,
        level,
        cap_binding: binding,
    })
}

/// Maximizes `Ψ(a) - aT` over `a >= a0` for concave nondecreasing `Ψ`: an
/// upper level where the slope is below `T/4`, a geometric grid anchored at
/// `a0` itself, then golden-section refinement between grid neighbors.
pub(crate) fn dual_maximize<F>(a0: f64, t: f64, grid_points: usize, psi: &mut F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut span = 1.0;
    let mut found = false;
    for _ in 0..80 {
        let a = a0 + span;
        let da = 1e-3 * span;
        let slope = (psi(a + da)? - psi(a)?) / da;
        if slope < 0.25 * t {
            found = true;
            break;
        }
        span *= 2.0;
    }
    if !found {
        return Err(Error::ConvergenceFailure("no upper level for the dual search".into()));
    }
    let n = grid_points.max(2);
    let lo = 1e-6f64.min(0.5 * span);
    let mut grid = vec![a0];
    grid.extend((0..n).map(|k| a0 + lo * (span / lo).powf(k as f64 / (n - 1) as f64)));
    let mut vals = Vec::with_capacity(grid.len());
    for &a in &grid {
        vals.push(psi(a)? - a * t);
    }
    let k = (0..grid.len())
        .max_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap())
        .unwrap();
    let left = grid[k.saturating_sub(1)];
    let right = grid[(k + 1).min(grid.len() - 1)];
    let mut failure = None;
    let refined = golden_max(
        |a| match psi(a) {
            Ok(v) => v - a * t,
            Err(e) => {
                failure = Some(e);
                f64::NEG_INFINITY
            }
        },
        left,
        right,
        1e-10 * (1.0 + right.abs()),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if refined.value >= vals[k] {
        Ok((refined.value, refined.arg))
    } else {
        Ok((vals[k], grid[k]))
    }
}

/// Exact minimal action within an edge-count cap, by enumerating the edge
/// multiplicities of Euler trails from `x` to `y` with rotation `h`. Pauses
/// may be taken on any edge incident to a visited vertex.
pub fn min_action_exact_oracle(net: &Network, q: &ActionQuery, cap: usize) -> Result<f64> {
    let g = &net.graph;
    if g.n_positive() > 4 || cap > 10 {
        return Err(Error::BudgetExceeded(format!(
            "exact oracle is limited to 4 positive edges and 10 steps (got {} and {cap})",
            g.n_positive()
        )));
    }
    if !(q.t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {}", q.t)));
    }
    if q.h.len() != net.betti() {
        return Err(Error::DimensionMismatch {
            expected: net.betti(),
            got: q.h.len(),
        });
    }
    let nd = g.n_directed();
    let mut counts = vec![0usize; nd];
    let mut best = f64::INFINITY;
    loop {
        if let Some(v) = trail_value(net, q, &counts) {
            best = best.min(v);
        }
        // next multiplicity vector with total at most `cap`
        let mut i = 0;
        loop {
            if i == nd {
                return if best.is_finite() {
                    Ok(best)
                } else {
                    Err(Error::Unreachable(format!("no trail within {cap} edges")))
                };
            }
            counts[i] += 1;
            if counts.iter().sum::<usize>() <= cap {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

fn trail_value(net: &Network, q: &ActionQuery, counts: &[usize]) -> Option<f64> {
    let g = &net.graph;
    let nv = g.n_vertices();
    let mut rot = vec![0i64; net.betti()];
    let mut balance = vec![0i64; nv];
    for (d, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (r, t) in rot.iter_mut().zip(net.theta.theta(d)) {
            *r += c as i64 * t;
        }
        balance[g.origin(d)] += c as i64;
        balance[g.terminus(d)] -= c as i64;
    }
    if rot != q.h {
        return None;
    }
    for (v, &bal) in balance.iter().enumerate() {
        let want = (v == q.x) as i64 - (v == q.y) as i64;
        if bal != want {
            return None;
        }
    }
    // used edges must form one weakly connected piece containing x
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut visited = vec![false; nv];
    visited[q.x] = true;
    for (d, &c) in counts.iter().enumerate() {
        if c > 0 {
            let (a, b) = (find(&mut parent, g.origin(d)), find(&mut parent, g.terminus(d)));
            parent[a] = b;
            visited[g.origin(d)] = true;
            visited[g.terminus(d)] = true;
        }
    }
    let root = find(&mut parent, q.x);
    for v in 0..nv {
        if visited[v] && find(&mut parent, v) != root {
            return None;
        }
    }
    let floor = (0..g.n_directed())
        .filter(|&d| visited[g.origin(d)])
        .map(|d| net.a_e(d))
        .fold(f64::NEG_INFINITY, f64::max);
    let used: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d, c as f64))
        .collect();
    Some(counted_action(net, &used, floor, q.t))
}

/// Minimal action between two crystal vertices: only the difference of
/// their lattice components matters.
pub fn network_min_action(net: &Network, z1: &CrystalVertex, z2: &CrystalVertex, t: f64) -> Result<ActionResult> {
    min_action(net, &ActionQuery::new(z1.base, z2.base, t, sub(&z2.h, &z1.h)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsRow {
    pub t: f64,
    pub h: Vec<i64>,
    pub phi_over_t: f64,
    pub beta: f64,
    pub deviation: f64,
}

/// `|Φ̂(x, y, T; ⌊T·dir⌋)/T - β(⌊T·dir⌋/T)|` along a list of times.
pub fn asymptotics_scan(
    net: &Network,
    x: usize,
    y: usize,
    direction: &[f64],
    times: &[f64],
    beta_opts: &BetaOptions,
) -> Result<Vec<AsymptoticsRow>> {
    times
        .iter()
        .map(|&t| {
            let h: Vec<i64> = direction.iter().map(|c| (c * t).floor() as i64).collect();
            let phi = min_action(net, &ActionQuery::new(x, y, t, h.clone()))?.value;
            let rot: Vec<f64> = h.iter().map(|&v| v as f64 / t).collect();
            let b = beta(net, &rot, beta_opts)?;
            Ok(AsymptoticsRow {
                t,
                h,
                phi_over_t: phi / t,
                beta: b,
                deviation: (phi / t - b).abs(),
            })
        })
        .collect()
}

pub fn asymptotics_csv(rows: &[AsymptoticsRow]) -> String {
    let b = rows.first().map_or(0, |r| r.h.len());
    let mut out = String::from("T");
    for i in 1..=b {
        out.push_str(&format!(",h{i}"));
    }
    out.push_str(",phi_over_T,beta,deviation\n");
    for r in rows {
        out.push_str(&format!("{}", r.t));
        for v in &r.h {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{:.12},{:.12},{:.12}\n", r.phi_over_t, r.beta, r.deviation));
    }
    out
}
