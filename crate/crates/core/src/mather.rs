//! Mather's β function: conjugate of the effective Hamiltonian, a closed-flux
//! formula, and a closed-flow descent oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cell::effective_hamiltonian;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::numerics::{golden_max_right, nested_golden_max};
use crate::profile::{EdgeProfile, Orientation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOptions {
    /// Initial half-width of the momentum box.
    pub search_box: f64,
    /// How many times the box may double before giving up.
    pub max_expansions: usize,
    /// Golden-section tolerance in each momentum coordinate.
    pub tol: f64,
}

impl Default for BetaOptions {
    fn default() -> Self {
        BetaOptions {
            search_box: 4.0,
            max_expansions: 12,
            tol: 1e-6,
        }
    }
}

/// `sup_p ⟨p, h⟩ - H̄(p)` with the maximizer.
pub fn beta_with_argmax(net: &Network, h: &[f64], opts: &BetaOptions) -> Result<(f64, Vec<f64>)> {
    if h.len() != net.betti() {
        return Err(Error::DimensionMismatch {
            expected: net.betti(),
            got: h.len(),
        });
    }
    if !(opts.search_box > 0.0) {
        return Err(Error::InvalidParameter("search box must be positive".into()));
    }
    let b = net.betti();
    let mut half = opts.search_box;
    let mut failure = None;
    let mut objective = |p: &[f64]| -> f64 {
        let dot: f64 = p.iter().zip(h).map(|(x, y)| x * y).sum();
        match effective_hamiltonian(net, p) {
            Ok(v) => dot - v,
            Err(e) => {
                failure = Some(e);
                f64::NEG_INFINITY
            }
        }
    };
    for _ in 0..=opts.max_expansions {
        let lower = vec![-half; b];
        let upper = vec![half; b];
        let (arg, value) = nested_golden_max(&mut objective, &lower, &upper, opts.tol);
        let margin = half - 10.0 * opts.tol;
        if arg.iter().all(|x| x.abs() < margin) {
            return match failure {
                Some(e) => Err(e),
                None => Ok((value, arg)),
            };
        }
        half *= 2.0;
    }
    Err(Error::BoxExpansionLimit(half))
}

pub fn beta(net: &Network, h: &[f64], opts: &BetaOptions) -> Result<f64> {
    beta_with_argmax(net, h, opts).map(|r| r.0)
}

/// Net flux per positive edge of the closed flow with rotation vector `h`.
///
/// Closed fluxes form the cycle space, on which θ is an isomorphism, so the
/// net flux is determined by `h`.
pub fn net_flux(net: &Network, h: &[f64]) -> Vec<f64> {
    let m = net.graph.n_positive();
    let mut g = vec![0.0; m];
    for (j, &hj) in h.iter().enumerate() {
        for (x, &c) in g.iter_mut().zip(net.theta.circuit(j)) {
            *x += hj * c as f64;
        }
    }
    g
}

/// Directed fluxes with no back-and-forth excess.
fn directed_flux(g: &[f64]) -> Vec<f64> {
    g.iter().flat_map(|&x| [x.max(0.0), (-x).max(0.0)]).collect()
}

/// `max_{a >= a₀} Σ_e f_e σ(e, a) - a`: the least action of a unit-time
/// closed flow with directed fluxes `f`, optimized over time fractions.
pub fn allocation_value(net: &Network, flux: &[f64]) -> (f64, f64) {
    let m = golden_max_right(
        |a| {
            flux.iter()
                .enumerate()
                .filter(|(_, f)| **f != 0.0)
                .map(|(d, f)| f * net.sigma(d, a))
                .sum::<f64>()
                - a
        },
        net.a0,
        1.0,
        1e-12 * (1.0 + net.a0.abs()),
    );
    (m.value, m.arg)
}

/// β through its closed-flow characterization with the optimal time
/// allocation in closed form; a fast path for repeated evaluation.
pub fn beta_by_flux(net: &Network, h: &[f64]) -> f64 {
    allocation_value(net, &directed_flux(&net_flux(net, h))).0
}

/// Tabulated `(a, σ(e, a))` on a grid refined near `a_e`, for fast
/// evaluation of `𝓛` and its gradient inside descent loops. Immutable after
/// construction, so concurrent reads are safe.
#[derive(Debug, Clone)]
pub struct LagrangianTable {
    levels: Vec<f64>,
    sigmas: Vec<f64>,
    /// `Δa / Δσ` per grid interval, nondecreasing.
    breaks: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianSample {
    pub value: f64,
    pub level: f64,
    pub sigma: f64,
}

impl LagrangianTable {
    pub fn new(p: &EdgeProfile, o: Orientation, span: f64, n: usize) -> Self {
        let levels: Vec<f64> = (0..=n)
            .map(|k| {
                let x = k as f64 / n as f64;
                p.a_e + span * x * x
            })
            .collect();
        let sigmas: Vec<f64> = levels.iter().map(|&a| p.sigma_at(o, a)).collect();
        let breaks = (0..n)
            .map(|k| {
                let ds = sigmas[k + 1] - sigmas[k];
                if ds > 0.0 {
                    (levels[k + 1] - levels[k]) / ds
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        LagrangianTable {
            levels,
            sigmas,
            breaks,
        }
    }

    /// `𝓛(λ)` with the maximizing level and its momentum.
    pub fn eval(&self, lambda: f64) -> LagrangianSample {
        let k = self.breaks.partition_point(|&r| r <= lambda);
        LagrangianSample {
            value: lambda * self.sigmas[k] - self.levels[k],
            level: self.levels[k],
            sigma: self.sigmas[k],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFlow {
    /// Time fraction per directed edge.
    pub lambda: Vec<f64>,
    /// Flux per directed edge.
    pub flux: Vec<f64>,
}

impl ClosedFlow {
    pub fn rotation_vector(&self, net: &Network) -> Vec<f64> {
        let mut r = vec![0.0; net.betti()];
        for (d, f) in self.flux.iter().enumerate() {
            for (x, &t) in r.iter_mut().zip(net.theta.theta(d)) {
                *x += f * t as f64;
            }
        }
        r
    }

    /// Largest violation of flux conservation over vertices.
    pub fn conservation_defect(&self, net: &Network) -> f64 {
        let mut balance = vec![0.0; net.graph.n_vertices()];
        for (d, f) in self.flux.iter().enumerate() {
            balance[net.graph.origin(d)] -= f;
            balance[net.graph.terminus(d)] += f;
        }
        balance.iter().fold(0.0f64, |m, b| m.max(b.abs()))
    }

    /// `Σ λ_e 𝓛(e, f_e / λ_e)` with exact edge Lagrangians.
    pub fn action(&self, net: &Network) -> f64 {
        let mut total = 0.0;
        for (d, (&l, &f)) in self.lambda.iter().zip(&self.flux).enumerate() {
            if l <= 0.0 {
                if f > 0.0 {
                    return f64::INFINITY;
                }
                continue;
            }
            total += l * net.profile(d).lagrangian_by_levels(Orientation::of(d), f / l);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOracleOptions {
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
    /// Step size at iteration `k` is `step / √k`.
    pub step: f64,
    pub max_edges: usize,
}

impl Default for FlowOracleOptions {
    fn default() -> Self {
        FlowOracleOptions {
            seed: 0,
            restarts: 10,
            iterations: 50_000,
            step: 0.1,
            max_edges: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOracleReport {
    /// Best action found (descent, then exact time allocation).
    pub value: f64,
    /// Exact action of the best descent iterate alone.
    pub descent_value: f64,
    pub flow: ClosedFlow,
}

/// Minimizes the action over closed flows with rotation vector `h` by
/// mirror descent on time fractions and projected subgradient steps on the
/// back-and-forth flux, followed by an exact time allocation for the best
/// flux found.
pub fn beta_flow_oracle(net: &Network, h: &[f64], opts: &FlowOracleOptions) -> Result<FlowOracleReport> {
    let m = net.graph.n_positive();
    if m > opts.max_edges {
        return Err(Error::InvalidParameter(format!(
            "flow oracle is limited to {} positive edges, graph has {m}",
            opts.max_edges
        )));
    }
    if h.len() != net.betti() {
        return Err(Error::DimensionMismatch {
            expected: net.betti(),
            got: h.len(),
        });
    }
    let g = net_flux(net, h);
    let span = 200.0 + g.iter().fold(0.0f64, |s, x| s.max(x * x));
    let tables: Vec<LagrangianTable> = (0..2 * m)
        .map(|d| LagrangianTable::new(net.profile(d), Orientation::of(d), span, 4096))
        .collect();
    let n = 2 * m;
    let flux_of = |t: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|d| {
                let base = if d % 2 == 0 { g[d / 2].max(0.0) } else { (-g[d / 2]).max(0.0) };
                base + t[d / 2]
            })
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let mut lambda: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= total);
        let mut t: Vec<f64> = (0..m).map(|_| 0.5 * rng.gen::<f64>()).collect();
        for k in 1..=opts.iterations {
            let flux = flux_of(&t);
            let mut value = 0.0;
            let mut grad_l = vec![0.0; n];
            let mut grad_t = vec![0.0; m];
            for d in 0..n {
                let s = tables[d].eval(flux[d] / lambda[d]);
                value += lambda[d] * s.value;
                grad_l[d] = -s.level;
                grad_t[d / 2] += s.sigma;
            }
            if best.as_ref().map_or(true, |b| value < b.0) {
                best = Some((value, lambda.clone(), t.clone()));
            }
            let eta = opts.step / (k as f64).sqrt();
            let shift = grad_l.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            for (l, gl) in lambda.iter_mut().zip(&grad_l) {
                *l *= (-eta * (gl - shift)).exp();
                *l = l.max(1e-300);
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            for (ti, gt) in t.iter_mut().zip(&grad_t) {
                *ti = (*ti - eta * gt).max(0.0);
            }
        }
    }
    let (_, lambda, t) = best.ok_or_else(|| Error::ConvergenceFailure("no iterate".into()))?;
    let flow = ClosedFlow {
        lambda,
        flux: flux_of(&t),
    };
    let descent_value = flow.action(net);
    let (allocated, _) = allocation_value(net, &flow.flux);
    if !descent_value.is_finite() && !allocated.is_finite() {
        return Err(Error::ConvergenceFailure(format!(
            "flow oracle diverged for h = {h:?}"
        )));
    }
    Ok(FlowOracleReport {
        value: descent_value.min(allocated),
        descent_value,
        flow,
    })
}

/// `|⟨p, h⟩ - H̄(p) - β(h)| <= tol`.
pub fn conjugate_pair_check(net: &Network, p: &[f64], h: &[f64], tol: f64) -> Result<bool> {
    let dot: f64 = p.iter().zip(h).map(|(x, y)| x * y).sum();
    let alpha = effective_hamiltonian(net, p)?;
    let b = beta(net, h, &BetaOptions::default())?;
    Ok((dot - alpha - b).abs() <= tol)
}

/// Recovers `H̄(p)` as `max ⟨p, h⟩ - β(h)` over a small stencil of rotation
/// vectors around the numerical gradient of `H̄` at `p`. Returns
/// `(H̄(p), recovered)`.
pub fn conjugation_round_trip(net: &Network, p: &[f64], opts: &BetaOptions) -> Result<(f64, f64)> {
    let alpha = effective_hamiltonian(net, p)?;
    let b = net.betti();
    let delta = 1e-4;
    let mut grad = vec![0.0; b];
    for i in 0..b {
        let mut up = p.to_vec();
        let mut down = p.to_vec();
        up[i] += delta;
        down[i] -= delta;
        grad[i] = (effective_hamiltonian(net, &up)? - effective_hamiltonian(net, &down)?) / (2.0 * delta);
    }
    let step = 1e-2;
    let mut recovered = f64::NEG_INFINITY;
    for code in 0..3usize.pow(b as u32) {
        let mut h = grad.clone();
        let mut c = code;
        for x in h.iter_mut() {
            *x += step * ((c % 3) as f64 - 1.0);
            c /= 3;
        }
        let dot: f64 = p.iter().zip(&h).map(|(x, y)| x * y).sum();
        recovered = recovered.max(dot - beta(net, &h, opts)?);
    }
    Ok((alpha, recovered))
}
