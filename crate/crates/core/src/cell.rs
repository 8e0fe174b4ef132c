//! Cell problems on the base graph and the effective Hamiltonian.

use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::network::Network;
use crate::numerics::expand_upper;

pub const DEFAULT_TOL: f64 = 1e-8;

/// Relaxations smaller than this are ignored, so that cycles of weight
/// zero up to rounding are not reported as negative.
const RELAX_EPS: f64 = 1e-13;

/// Outcome of the Bellman–Ford pass over a weighted base graph.
#[derive(Debug, Clone, PartialEq)]
pub enum CycleScan {
    /// Weight of some negative cycle together with its directed edges.
    Negative { weight: f64, cycle: Vec<usize> },
    /// No negative cycle; shortest-path potentials from a virtual source.
    Potentials(Vec<f64>),
}

pub fn scan_cycles(g: &BaseGraph, w: &[f64]) -> CycleScan {
    let n = g.n_vertices();
    let mut dist = vec![0.0; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut last_updated = None;
    for _ in 0..n {
        last_updated = None;
        for (d, &wd) in w.iter().enumerate() {
            let (o, t) = (g.origin(d), g.terminus(d));
            let cand = dist[o] + wd;
            if cand < dist[t] - RELAX_EPS * (1.0 + dist[t].abs()) {
                dist[t] = cand;
                pred[t] = Some(d);
                last_updated = Some(t);
            }
        }
        if last_updated.is_none() {
            return CycleScan::Potentials(dist);
        }
    }
    let Some(mut v) = last_updated else {
        return CycleScan::Potentials(dist);
    };
    // step back n times to land on the cycle
    for _ in 0..n {
        v = g.origin(pred[v].expect("updated vertex has a predecessor"));
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let d = pred[v].expect("cycle vertex has a predecessor");
        cycle.push(d);
        v = g.origin(d);
        if v == start {
            break;
        }
    }
    cycle.reverse();
    let weight = cycle.iter().map(|&d| w[d]).sum();
    CycleScan::Negative { weight, cycle }
}

/// Minimum weight over all cycles of the base graph, or the weight of a
/// negative cycle when one exists (so only the sign is exact then).
pub fn min_cycle_weight_of(g: &BaseGraph, w: &[f64]) -> f64 {
    match scan_cycles(g, w) {
        CycleScan::Negative { weight, .. } => weight.min(-f64::MIN_POSITIVE),
        CycleScan::Potentials(_) => {
            let n = g.n_vertices();
            let mut dist = vec![vec![f64::INFINITY; n]; n];
            for (v, row) in dist.iter_mut().enumerate() {
                row[v] = 0.0;
            }
            for (d, &wd) in w.iter().enumerate() {
                let (o, t) = (g.origin(d), g.terminus(d));
                if wd < dist[o][t] {
                    dist[o][t] = wd;
                }
            }
            for k in 0..n {
                for i in 0..n {
                    let dik = dist[i][k];
                    if dik == f64::INFINITY {
                        continue;
                    }
                    for j in 0..n {
                        let c = dik + dist[k][j];
                        if c < dist[i][j] {
                            dist[i][j] = c;
                        }
                    }
                }
            }
            w.iter()
                .enumerate()
                .map(|(d, wd)| wd + dist[g.terminus(d)][g.origin(d)])
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// `σ(e, a) - ⟨p, θ(e)⟩` on every directed edge.
pub fn cell_weights(net: &Network, p: &[f64], a: f64) -> Vec<f64> {
    (0..net.graph.n_directed())
        .map(|d| {
            let tilt: f64 = net.theta.theta(d).iter().zip(p).map(|(t, x)| *t as f64 * x).sum();
            net.sigma(d, a) - tilt
        })
        .collect()
}

pub fn min_cycle_weight(net: &Network, p: &[f64], a: f64) -> Result<f64> {
    check_dim(net, p)?;
    if a < net.a0 - 1e-12 * (1.0 + a.abs()) {
        return Err(Error::DomainError {
            value: a,
            lower: net.a0,
        });
    }
    Ok(min_cycle_weight_of(&net.graph, &cell_weights(net, p, a)))
}

fn check_dim(net: &Network, p: &[f64]) -> Result<()> {
    if p.len() != net.betti() {
        return Err(Error::DimensionMismatch {
            expected: net.betti(),
            got: p.len(),
        });
    }
    Ok(())
}

fn nonnegative(net: &Network, p: &[f64], a: f64) -> bool {
    matches!(scan_cycles(&net.graph, &cell_weights(net, p, a)), CycleScan::Potentials(_))
}

/// `H̄(p)`: the least `a >= a₀` at which every cycle has nonnegative
/// tilted weight.
pub fn effective_hamiltonian(net: &Network, p: &[f64]) -> Result<f64> {
    effective_hamiltonian_tol(net, p, DEFAULT_TOL)
}

pub fn effective_hamiltonian_tol(net: &Network, p: &[f64], tol: f64) -> Result<f64> {
    check_dim(net, p)?;
    let a0 = net.a0;
    if nonnegative(net, p, a0) {
        return Ok(a0);
    }
    let mut hi = expand_upper(a0, 1.0, 200, |a| nonnegative(net, p, a))
        .ok_or_else(|| Error::ConvergenceFailure("no level makes all cycles nonnegative".into()))?;
    let mut lo = if hi - a0 > 1.0 { a0 + 0.5 * (hi - a0) } else { a0 };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if nonnegative(net, p, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn convexity_probe(net: &Network, p1: &[f64], p2: &[f64], tol: f64) -> Result<bool> {
    let mid: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| 0.5 * (a + b)).collect();
    let hm = effective_hamiltonian(net, &mid)?;
    let h1 = effective_hamiltonian(net, p1)?;
    let h2 = effective_hamiltonian(net, p2)?;
    Ok(hm <= 0.5 * (h1 + h2) + tol)
}
