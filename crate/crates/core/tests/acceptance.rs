//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the summary is always printed.

mod common;

use std::time::{Duration, Instant};

use common::*;
use hjnet::action::{asymptotics_scan, min_action, min_action_exact_oracle, ActionQuery};
use hjnet::cell::{convexity_probe, effective_hamiltonian};
use hjnet::crystal::{Crystal, CrystalEdge, CrystalVertex};
use hjnet::graph::{BaseGraph, ThetaMap};
use hjnet::hamiltonian::{EdgeHamiltonianModel, QuadraticModel, TrigPoly};
use hjnet::homogenize::{convergence_experiment, ExperimentGrid, InitialDatum, SolverOptions};
use hjnet::mather::{beta, beta_flow_oracle, conjugation_round_trip, BetaOptions, FlowOracleOptions};
use hjnet::profile::{EdgeProfile, Orientation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn c1_homology() -> Outcome {
    let g = BaseGraph::from_json(HONEYCOMB).map_err(|e| e.to_string())?;
    let tm = ThetaMap::of(&g);
    check(g.betti() == 2, format!("honeycomb betti {}", g.betti()))?;
    let expected: [(&str, [i64; 2]); 6] = [
        ("e0", [0, 0]),
        ("e1", [1, 0]),
        ("e2", [0, 1]),
        ("e0.rev", [0, 0]),
        ("e1.rev", [-1, 0]),
        ("e2.rev", [0, -1]),
    ];
    for (id, th) in expected {
        let d = g.edge(id).unwrap();
        check(tm.theta(d) == th, format!("θ({id}) = {:?}", tm.theta(d)))?;
    }
    let b = BaseGraph::from_json(BOUQUET).unwrap();
    check(b.betti() == 2, format!("bouquet betti {}", b.betti()))?;
    Ok("θ table exact".into())
}

fn c2_edge_closed_forms() -> Outcome {
    let free = EdgeProfile::new(EdgeHamiltonianModel::Quadratic(QuadraticModel::free(TrigPoly::default())));
    let f = Orientation::Forward;
    let err = |e: hjnet::Error| e.to_string();
    let rows = [
        ("a_e", free.a_e, 0.0, 1e-6),
        ("σ(e,2)", free.sigma(f, 2.0).map_err(err)?, 2.0, 1e-6),
        ("𝓗(e,2)", free.discrete_hamiltonian(f, 2.0).map_err(err)?, 2.0, 1e-6),
        ("𝓛(e,3)", free.discrete_lagrangian(f, 3.0).map_err(err)?, 4.5, 1e-6),
        ("ĉ_z", free_honeycomb().flux_limiter(0), 0.0, 1e-6),
    ];
    let cosine = EdgeProfile::new(EdgeHamiltonianModel::Quadratic(QuadraticModel::free(TrigPoly {
        cos: vec![-1.0],
        ..Default::default()
    })));
    let pot = cosine.sigma(f, 1.0).map_err(err)?;
    for (name, got, want, tol) in rows {
        check((got - want).abs() <= tol, format!("{name} = {got}, expected {want}"))?;
    }
    let want = 4.0 / std::f64::consts::PI;
    check((pot - want).abs() <= 1e-5, format!("σ(e,1) = {pot}, expected 4/π"))?;
    Ok(format!("potential σ error {:.1e}", (pot - want).abs()))
}

/// Least action of `∫ q²/2 + cos(2πs) dt` over grid curves from 0 to 1 on
/// `[0, 1]` in time `t`, with `n` space cells and `2√n` time steps, so the
/// velocity quantum `ds/dt` shrinks under refinement.
fn grid_dp(t: f64, n: usize) -> f64 {
    let steps = (2.0 * (n as f64).sqrt()).ceil() as usize;
    let ds = 1.0 / n as f64;
    let dt = t / steps as f64;
    let mut cur = vec![f64::INFINITY; n + 1];
    cur[0] = 0.0;
    let pot: Vec<f64> = (0..=2 * n)
        .map(|k| (2.0 * std::f64::consts::PI * k as f64 * ds * 0.5).cos())
        .collect();
    for _ in 0..steps {
        let mut next = vec![f64::INFINITY; n + 1];
        for (i, &ci) in cur.iter().enumerate() {
            if !ci.is_finite() {
                continue;
            }
            for (j, nj) in next.iter_mut().enumerate() {
                let q = (j as f64 - i as f64) * ds / dt;
                // potential at the midpoint of the step
                let c = ci + dt * (0.5 * q * q + pot[i + j]);
                if c < *nj {
                    *nj = c;
                }
            }
        }
        cur = next;
    }
    cur[n]
}

fn c3_single_edge_action() -> Outcome {
    let p = EdgeProfile::new(EdgeHamiltonianModel::Quadratic(QuadraticModel::free(TrigPoly {
        cos: vec![-1.0],
        ..Default::default()
    })));
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let ours = p.edge_action(Orientation::Forward, t).map_err(|e| e.to_string())?;
        let mut prev = grid_dp(t, 41);
        let mut stable = None;
        for n in [81, 161, 321, 641, 1281] {
            let v = grid_dp(t, n);
            if (v - prev).abs() <= 0.005 * v.abs().max(1e-3) {
                stable = Some((v, n));
                break;
            }
            prev = v;
        }
        let (dp, n) = stable.ok_or_else(|| format!("grid DP did not stabilize at T={t}"))?;
        let rel = (ours - dp).abs() / dp.abs().max(1e-12);
        worst = worst.max(rel);
        check(rel <= 0.02, format!("T={t}: T·𝓛 = {ours}, grid DP = {dp}"))?;
        detail.push(format!("T={t}: {ours:.4} vs {dp:.4} (n={n})"));
    }
    Ok(format!("{}; worst {:.2}%", detail.join(", "), 100.0 * worst))
}

fn c4_effective_hamiltonian() -> Outcome {
    let n = free_bouquet();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let want = p.iter().map(|x: &f64| x * x / 2.0).fold(0.0, f64::max);
        let got = effective_hamiltonian(&n, &p).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        check((got - want).abs() <= 1e-5, format!("H̄({p:?}) = {got}, expected {want}"))?;
    }
    for (name, net) in all_models() {
        let h0 = effective_hamiltonian(&net, &vec![0.0; net.betti()]).unwrap();
        check((h0 - net.a0).abs() <= 1e-6, format!("{name}: H̄(0) = {h0}, a₀ = {}", net.a0))?;
    }
    let models = all_models();
    for k in 0..100 {
        let net = &models[k % models.len()].1;
        let b = net.betti();
        let p1: Vec<f64> = (0..b).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let p2: Vec<f64> = (0..b).map(|_| rng.gen_range(-4.0..4.0)).collect();
        check(
            convexity_probe(net, &p1, &p2, 1e-7).unwrap(),
            format!("midpoint convexity fails at {p1:?}, {p2:?}"),
        )?;
    }
    Ok(format!("closed-form error {worst:.1e}, 100 convexity probes"))
}

fn c5_mather() -> Outcome {
    let n = free_bouquet();
    let opts = BetaOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let h: [f64; 2] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let want = (h[0].abs() + h[1].abs()).powi(2) / 2.0;
        let got = beta(&n, &h, &opts).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        check((got - want).abs() <= 1e-4, format!("β({h:?}) = {got}, expected {want}"))?;
    }
    for (name, net) in all_models() {
        let b0 = beta(&net, &vec![0.0; net.betti()], &opts).unwrap();
        check((b0 + net.a0).abs() <= 1e-6, format!("{name}: β(0) = {b0}, a₀ = {}", net.a0))?;
    }
    let mut oracle_gap: f64 = 0.0;
    let fo = FlowOracleOptions::default();
    for (name, net) in all_models() {
        for h in [[0.5, 0.0], [0.3, -0.6], [1.0, 1.0]] {
            let b = beta(&net, &h, &opts).unwrap();
            let o = beta_flow_oracle(&net, &h, &fo).map_err(|e| e.to_string())?.value;
            oracle_gap = oracle_gap.max((b - o).abs());
            check((b - o).abs() <= 1e-3, format!("{name}: β({h:?}) = {b}, flow oracle {o}"))?;
        }
    }
    let mut trip: f64 = 0.0;
    for (name, net) in all_models() {
        for p in [[1.5, -0.5], [0.2, 2.5]] {
            let (hbar, back) = conjugation_round_trip(&net, &p, &opts).map_err(|e| e.to_string())?;
            trip = trip.max((hbar - back).abs());
            check((hbar - back).abs() <= 1e-3, format!("{name}: H̄({p:?}) = {hbar}, β* = {back}"))?;
        }
    }
    Ok(format!(
        "closed form {worst:.1e}, flow oracle {oracle_gap:.1e}, round trip {trip:.1e}"
    ))
}

fn c6_asymptotics() -> Outcome {
    let opts = BetaOptions::default();
    let n = free_bouquet();
    let r = asymptotics_scan(&n, 0, 0, &[0.5, 0.0], &[8.0], &opts).map_err(|e| e.to_string())?;
    check(r[0].h == [4, 0], format!("lattice target {:?}", r[0].h))?;
    check(r[0].deviation <= 1e-6, format!("bouquet deviation {}", r[0].deviation))?;
    let net = cosine_honeycomb();
    let times = [8.0, 16.0, 32.0, 64.0];
    let rows = asymptotics_scan(&net, 0, 1, &[0.25, 0.125], &times, &opts).map_err(|e| e.to_string())?;
    let dev: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    check(dev[3] <= 0.05, format!("deviation at T=64 is {}", dev[3]))?;
    check(
        dev.windows(2).all(|w| w[1] <= w[0] + 1e-3),
        format!("deviations {dev:?} increase"),
    )?;
    Ok(format!(
        "bouquet {:.1e}; honeycomb {}",
        r[0].deviation,
        dev.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(" ")
    ))
}

fn c7_homogenization() -> Outcome {
    let opts = SolverOptions::default();
    let eps = vec![0.25, 0.125, 0.0625, 0.03125];
    let zero = InitialDatum::Constant { value: 0.0 };
    for net in [free_bouquet(), cosine_honeycomb()] {
        let grid = ExperimentGrid {
            points: vec![(vec![0.0, 0.0], 1.0), (vec![0.5, -0.25], 0.5)],
            eps: eps.clone(),
        };
        let r = convergence_experiment(&net, &zero, &grid, &opts).map_err(|e| e.to_string())?;
        for row in &r.rows {
            check(
                (row.u_eps + net.a0 * row.t).abs() <= 1e-6 && row.abs_error <= 1e-6,
                format!("g ≡ 0: u_ε = {}, u = {} at t = {}", row.u_eps, row.u_limit, row.t),
            )?;
        }
    }
    let linear = InitialDatum::Linear { p: vec![1.0, -0.5] };
    let grid = ExperimentGrid {
        points: vec![(vec![0.5, 0.25], 1.0), (vec![-0.25, 0.75], 0.5), (vec![0.0, 0.0], 1.0)],
        eps: vec![0.0625],
    };
    let r = convergence_experiment(&free_bouquet(), &linear, &grid, &opts).map_err(|e| e.to_string())?;
    let lin = r.sup_error_per_eps[0];
    check(lin < 1e-2, format!("linear datum sup error {lin} at ε = 1/16"))?;
    let cone = InitialDatum::Cone { c: 4.0 };
    let grid = ExperimentGrid {
        points: vec![
            (vec![0.0, 0.0], 1.0),
            (vec![0.5, -0.25], 1.0),
            (vec![-0.75, 0.5], 0.5),
            (vec![0.25, 0.25], 0.5),
        ],
        eps,
    };
    let r = convergence_experiment(&cosine_honeycomb(), &cone, &grid, &opts).map_err(|e| e.to_string())?;
    let sup = &r.sup_error_per_eps;
    check(
        sup.windows(2).all(|w| w[1] < w[0]),
        format!("cone sup errors {sup:?} not strictly decreasing"),
    )?;
    Ok(format!(
        "linear {lin:.1e}; cone {}",
        sup.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>().join(" > ")
    ))
}

fn c8_crystal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..100 {
        let g = random_graph(&mut rng, 4, 4);
        let tm = ThetaMap::of(&g);
        let c = Crystal::new(&g, &tm);
        let b = tm.betti;
        let h: Vec<i64> = (0..b).map(|_| rng.gen_range(-3..=3)).collect();
        for d in 0..g.n_directed() {
            let e = CrystalEdge { base_edge: d, h: h.clone() };
            let r = c.reverse(&e);
            check(c.reverse(&r) == e && r != e, format!("instance {k}: reversal of {e:?}"))?;
            check(c.terminus(&e) == c.origin(&r), format!("instance {k}: terminus law at {e:?}"))?;
            let th = tm.theta(d);
            let want = CrystalVertex {
                base: g.terminus(d),
                h: h.iter().zip(th).map(|(a, t)| a + t).collect(),
            };
            check(c.terminus(&e) == want, format!("instance {k}: terminus of {e:?}"))?;
            check(c.origin(&e) != c.terminus(&e), format!("instance {k}: self-loop at {e:?}"))?;
        }
        if b > 0 {
            let x0 = rng.gen_range(0..g.n_vertices());
            let hb: Vec<i64> = (0..b).map(|_| rng.gen_range(-3..=3)).collect();
            check(
                c.metric_invariance_check(x0, &h, &hb).map_err(|e| e.to_string())?,
                format!("instance {k}: translation invariance"),
            )?;
        }
    }
    let g = BaseGraph::from_json(BOUQUET).unwrap();
    let tm = ThetaMap::of(&g);
    let c = Crystal::new(&g, &tm);
    let d = c.distance_from_origin(&[2, 1]).map_err(|e| e.to_string())?;
    check(d == 3, format!("d_O(0, (2,1)) = {d}"))?;
    let s = c.stable_norm_estimate(&[1, 1], 16).map_err(|e| e.to_string())?;
    check((s.estimate - 2.0).abs() <= 1e-9, format!("stable norm estimate {}", s.estimate))?;
    Ok("100 random instances".into())
}

fn c9_dual_bound() -> Outcome {
    let times = [2.0, 4.0, 8.0, 16.0];
    let instances: Vec<(&str, hjnet::Network, &str, &str, Vec<i64>)> = vec![
        ("cosine honeycomb x1→x1", cosine_honeycomb(), "x1", "x1", vec![1, 0]),
        ("cosine honeycomb x1→x2", cosine_honeycomb(), "x1", "x2", vec![0, -1]),
        ("free bouquet", free_bouquet(), "v", "v", vec![1, 1]),
        ("triangle from the loop", triangle_loop(), "b", "b", vec![0, 0]),
        ("stiff spoke a→a", stiff_spoke_triangle(), "a", "a", vec![0, 0]),
        ("stiff spoke a→c", stiff_spoke_triangle(), "a", "c", vec![0, 0]),
    ];
    let mut report = Vec::new();
    for (name, net, x, y, h) in instances {
        let (x, y) = (net.graph.vertex(x).unwrap(), net.graph.vertex(y).unwrap());
        let mut gaps = Vec::new();
        for t in times {
            let q = ActionQuery::new(x, y, t, h.clone());
            let dual = min_action(&net, &q).map_err(|e| e.to_string())?.value;
            let exact = min_action_exact_oracle(&net, &q, 8).map_err(|e| e.to_string())?;
            check(
                dual <= exact + 1e-9,
                format!("{name}, T={t}: dual {dual} above exact {exact}"),
            )?;
            gaps.push(exact - dual);
        }
        let c = gaps.iter().cloned().fold(0.0, f64::max);
        let spread = c - gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        check(
            spread <= 1e-3 || spread <= 0.1 * c,
            format!("{name}: gap varies over T: {gaps:?}"),
        )?;
        report.push(format!("{name} C={c:.3}"));
    }
    Ok(report.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("1 homology", c1_homology, Duration::from_secs(1)),
        ("2 edge closed forms", c2_edge_closed_forms, Duration::from_secs(1)),
        ("3 single-edge action vs grid DP", c3_single_edge_action, Duration::from_secs(30)),
        ("4 effective Hamiltonian", c4_effective_hamiltonian, Duration::from_secs(30)),
        ("5 Mather duality", c5_mather, Duration::from_secs(120)),
        ("6 action asymptotics", c6_asymptotics, Duration::from_secs(300)),
        ("7 homogenization experiment", c7_homogenization, Duration::from_secs(600)),
        ("8 crystal metric", c8_crystal, Duration::from_secs(60)),
        ("9 dual bound audit", c9_dual_bound, Duration::from_secs(120)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let over = took > budget;
        match (&outcome, over) {
            (Ok(detail), false) => println!("PASS criterion {name}: {detail} [{took:.2?}]"),
            (Ok(detail), true) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} but took {took:.2?} (budget {budget:?})")
            }
            (Err(why), _) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{took:.2?}]")
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
