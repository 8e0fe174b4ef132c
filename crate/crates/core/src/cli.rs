//! Command-line front end.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::action::{asymptotics_csv, asymptotics_scan, min_action, min_action_exact_oracle, ActionQuery};
use crate::cell::effective_hamiltonian_tol;
use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::hamiltonian::parse_hamiltonians;
use crate::homogenize::{convergence_experiment, ExperimentGrid, InitialDatum, SolverOptions};
use crate::mather::{beta, beta_flow_oracle, BetaOptions, FlowOracleOptions};
use crate::netgen::{embed_crystal, BaseEmbedding, DEFAULT_ARC_SAMPLES};
use crate::network::Network;
use crate::profile::DEFAULT_SAMPLES;

#[derive(Debug, Parser)]
#[command(name = "hjnet", version, about = "Hamilton-Jacobi homogenization on periodic networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file with default values for any flag (keys use underscores).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base graph JSON.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Edge Hamiltonian JSON.
    #[arg(long, global = true)]
    pub hamiltonians: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Simpson samples per edge.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// JSON instead of plain text where both exist.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First Betti number of the base graph
    Betti,
    /// Homology coordinates of every directed edge
    Theta,
    /// Effective Hamiltonian at momenta or on a grid
    EffectiveHamiltonian(HbarArgs),
    /// Mather's beta at rotation vectors
    Beta(BetaArgs),
    /// Minimal action between lifted vertices
    Action(ActionArgs),
    /// Large-time scan of action/T against beta
    Asymptotics(AsymptoticsArgs),
    /// Rescaled solutions against the limit solution
    Homogenize(HomogenizeArgs),
    /// Export a window of the periodic network embedding
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
pub struct HbarArgs {
    /// Momentum as comma-separated components; repeatable.
    #[arg(long = "p")]
    pub p: Vec<String>,
    /// Uniform grid `lo,hi,n` in every coordinate.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    /// Rotation vector; repeatable.
    #[arg(long = "h")]
    pub h: Vec<String>,
    #[arg(long)]
    pub search_box: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also report the closed-flow oracle value.
    #[arg(long)]
    pub flow_oracle: bool,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ActionArgs {
    #[arg(long)]
    pub from: Option<String>,
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long = "t")]
    pub t: Option<f64>,
    /// Lattice displacement.
    #[arg(long = "h")]
    pub h: Option<String>,
    #[arg(long)]
    pub box_radius: Option<i64>,
    #[arg(long)]
    pub edge_cap: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Also run the exhaustive oracle with this multiplicity cap.
    #[arg(long)]
    pub exact_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long)]
    pub from: Option<String>,
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long)]
    pub direction: Option<String>,
    #[arg(long)]
    pub times: Option<String>,
}

#[derive(Debug, Args)]
pub struct HomogenizeArgs {
    /// Initial datum as JSON, e.g. `{"kind":"cone","c":4}`.
    #[arg(long)]
    pub datum: Option<String>,
    /// Sample point `h1,...,hb,t`; repeatable.
    #[arg(long)]
    pub point: Vec<String>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Search radius in the limit variable.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Where to write the JSON summary.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Base embedding JSON; a planar layout is generated when absent.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub arc_samples: Option<usize>,
}

/// Failure with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Io(_) | Error::InvalidParameter(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

struct Config(serde_json::Map<String, Value>, PathBuf);

impl Config {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            None => Ok(Config(Default::default(), PathBuf::new())),
            Some(p) => match serde_json::from_str(&read(p)?)? {
                Value::Object(m) => Ok(Config(m, p.parent().map(PathBuf::from).unwrap_or_default())),
                _ => Err(Error::Parse("config must be a JSON object".into())),
            },
        }
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key `{key}`: {e}"))),
        }
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Paths from the config file are relative to its directory.
    fn path(&self, flag: &Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        if flag.is_some() {
            return Ok(flag.clone());
        }
        Ok(self.get::<PathBuf>(key)?.map(|p| self.1.join(p)))
    }
}

fn read(p: &PathBuf) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("not a number: `{x}`")))
        })
        .collect()
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidParameter(format!("not an integer: `{x}`")))
        })
        .collect()
}

/// Vectors from repeated flags, or from a config array of arrays.
fn vectors(flags: &[String], cfg: &Config, key: &str) -> Result<Vec<Vec<f64>>> {
    if !flags.is_empty() {
        return flags.iter().map(|s| parse_list(s)).collect();
    }
    Ok(cfg.get(key)?.unwrap_or_default())
}

fn require<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("missing `--{}`", name.replace('_', "-"))))
}

fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn header(prefix: &str, b: usize) -> String {
    (1..=b).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

struct Context {
    cfg: Config,
    graph: Option<PathBuf>,
    hamiltonians: Option<PathBuf>,
    seed: u64,
    samples: usize,
    json: bool,
}

impl Context {
    fn graph(&self) -> Result<BaseGraph> {
        BaseGraph::from_json(&read(&require(self.graph.clone(), "graph")?)?)
    }

    fn network(&self) -> Result<Network> {
        let graph = self.graph()?;
        let specs = parse_hamiltonians(&read(&require(self.hamiltonians.clone(), "hamiltonians")?)?)?;
        Network::from_specs(graph, &specs, self.samples)
    }
}

/// Runs a parsed command line and returns the text it produces.
pub fn execute(cli: &Cli) -> std::result::Result<String, CliError> {
    let cfg = Config::load(cli.global.config.as_ref())?;
    let threads: Option<usize> = cfg.pick(cli.global.threads, "threads")?;
    let ctx = Context {
        graph: cfg.path(&cli.global.graph, "graph")?,
        hamiltonians: cfg.path(&cli.global.hamiltonians, "hamiltonians")?,
        seed: cfg.pick(cli.global.seed, "seed")?.unwrap_or(0),
        samples: cfg.pick(cli.global.samples, "samples")?.unwrap_or(DEFAULT_SAMPLES),
        json: cli.global.json || cfg.get("json")?.unwrap_or(false),
        cfg,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError {
            code: 1,
            message: e.to_string(),
        })?;
    let text = pool.install(|| dispatch(&cli.command, &ctx))?;
    let out = ctx.cfg.path(&cli.global.out, "out")?;
    match out {
        Some(p) => {
            fs::write(&p, &text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn dispatch(cmd: &Command, ctx: &Context) -> Result<String> {
    match cmd {
        Command::Betti => {
            let g = ctx.graph()?;
            Ok(if ctx.json {
                format!(
                    "{}\n",
                    serde_json::json!({"betti": g.betti(), "vertices": g.n_vertices(), "edges": g.n_positive()})
                )
            } else {
                format!("{}\n", g.betti())
            })
        }
        Command::Theta => cmd_theta(ctx),
        Command::EffectiveHamiltonian(a) => cmd_hbar(a, ctx),
        Command::Beta(a) => cmd_beta(a, ctx),
        Command::Action(a) => cmd_action(a, ctx),
        Command::Asymptotics(a) => cmd_asymptotics(a, ctx),
        Command::Homogenize(a) => cmd_homogenize(a, ctx),
        Command::Embed(a) => cmd_embed(a, ctx),
    }
}

fn cmd_theta(ctx: &Context) -> Result<String> {
    let g = ctx.graph()?;
    let tm = crate::graph::ThetaMap::of(&g);
    if ctx.json {
        let rows: serde_json::Map<String, Value> = (0..g.n_positive())
            .map(|i| (g.edge_id(2 * i).to_string(), serde_json::json!(tm.theta(2 * i))))
            .collect();
        let tree: Vec<&str> = tm.tree.positive_edges().iter().map(|&d| g.edge_id(d)).collect();
        return Ok(format!(
            "{}\n",
            serde_json::json!({"betti": tm.betti, "root": g.vertex_id(g.root()), "tree": tree, "theta": rows})
        ));
    }
    let mut out = format!("edge,tree,{}\n", header("theta", tm.betti));
    for i in 0..g.n_positive() {
        let d = 2 * i;
        let th: Vec<String> = tm.theta(d).iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{},{},{}\n", g.edge_id(d), tm.tree.contains(d), th.join(",")));
    }
    Ok(out)
}

fn cmd_hbar(a: &HbarArgs, ctx: &Context) -> Result<String> {
    let net = ctx.network()?;
    let b = net.betti();
    let tol = ctx.cfg.pick(a.tol, "tol")?.unwrap_or(crate::cell::DEFAULT_TOL);
    let mut ps = vectors(&a.p, &ctx.cfg, "p")?;
    let grid: Option<String> = ctx.cfg.pick(a.grid.clone(), "grid")?;
    if let Some(spec) = grid {
        let v = parse_list(&spec)?;
        if v.len() != 3 || v[2] < 1.0 {
            return Err(Error::InvalidParameter("grid is `lo,hi,n`".into()));
        }
        let n = v[2] as usize;
        let step = if n > 1 { (v[1] - v[0]) / (n - 1) as f64 } else { 0.0 };
        for code in 0..n.pow(b as u32) {
            let mut c = code;
            let mut p = vec![0.0; b];
            // last coordinate varies fastest
            for x in p.iter_mut().rev() {
                *x = v[0] + (c % n) as f64 * step;
                c /= n;
            }
            ps.push(p);
        }
    }
    if ps.is_empty() {
        return Err(Error::InvalidParameter("give `--p` or `--grid`".into()));
    }
    let values: Vec<f64> = ps
        .par_iter()
        .map(|p| effective_hamiltonian_tol(&net, p, tol))
        .collect::<Result<_>>()?;
    let mut out = format!("{},H_bar\n", header("p", b));
    for (p, v) in ps.iter().zip(values) {
        out.push_str(&format!("{},{v:.10}\n", fmt_row(p)));
    }
    Ok(out)
}

fn cmd_beta(a: &BetaArgs, ctx: &Context) -> Result<String> {
    let net = ctx.network()?;
    let mut opts = BetaOptions::default();
    if let Some(s) = ctx.cfg.pick(a.search_box, "search_box")? {
        opts.search_box = s;
    }
    if let Some(t) = ctx.cfg.pick(a.tol, "tol")? {
        opts.tol = t;
    }
    let flow = a.flow_oracle || ctx.cfg.get("flow_oracle")?.unwrap_or(false);
    let mut fo = FlowOracleOptions {
        seed: ctx.seed,
        ..Default::default()
    };
    if let Some(i) = ctx.cfg.pick(a.iterations, "iterations")? {
        fo.iterations = i;
    }
    if let Some(r) = ctx.cfg.pick(a.restarts, "restarts")? {
        fo.restarts = r;
    }
    let hs = vectors(&a.h, &ctx.cfg, "h")?;
    if hs.is_empty() {
        return Err(Error::InvalidParameter("give at least one `--h`".into()));
    }
    let rows: Vec<(f64, Option<f64>)> = hs
        .par_iter()
        .map(|h| {
            let v = beta(&net, h, &opts)?;
            let o = if flow {
                Some(beta_flow_oracle(&net, h, &fo)?.value)
            } else {
                None
            };
            Ok((v, o))
        })
        .collect::<Result<_>>()?;
    let mut out = format!("{},beta", header("h", net.betti()));
    out.push_str(if flow { ",flow_oracle\n" } else { "\n" });
    for (h, (v, o)) in hs.iter().zip(rows) {
        out.push_str(&format!("{},{v:.10}", fmt_row(h)));
        match o {
            Some(o) => out.push_str(&format!(",{o:.10}\n")),
            None => out.push('\n'),
        }
    }
    Ok(out)
}

fn cmd_action(a: &ActionArgs, ctx: &Context) -> Result<String> {
    let net = ctx.network()?;
    let g = &net.graph;
    let x = g.vertex(&require(ctx.cfg.pick(a.from.clone(), "from")?, "from")?)?;
    let y = g.vertex(&require(ctx.cfg.pick(a.to.clone(), "to")?, "to")?)?;
    let t = require(ctx.cfg.pick(a.t, "t")?, "t")?;
    let h = match &a.h {
        Some(s) => parse_ints(s)?,
        None => ctx.cfg.get("h")?.unwrap_or_else(|| vec![0; net.betti()]),
    };
    let mut q = ActionQuery::new(x, y, t, h.clone());
    q.box_radius = ctx.cfg.pick(a.box_radius, "box_radius")?;
    q.edge_cap = ctx.cfg.pick(a.edge_cap, "edge_cap")?;
    if let Some(n) = ctx.cfg.pick(a.grid_points, "grid_points")? {
        q.grid_points = n;
    }
    let r = min_action(&net, &q)?;
    let exact_cap: Option<usize> = ctx.cfg.pick(a.exact_cap, "exact_cap")?;
    let mut out = format!("from,to,T,{},phi_hat,level,cap_binding", header("h", net.betti()));
    out.push_str(if exact_cap.is_some() { ",exact\n" } else { "\n" });
    let hs: Vec<String> = h.iter().map(|v| v.to_string()).collect();
    out.push_str(&format!(
        "{},{},{t},{},{:.10},{:.10},{}",
        g.vertex_id(x),
        g.vertex_id(y),
        hs.join(","),
        r.value,
        r.level,
        r.cap_binding
    ));
    match exact_cap {
        Some(cap) => out.push_str(&format!(",{:.10}\n", min_action_exact_oracle(&net, &q, cap)?)),
        None => out.push('\n'),
    }
    Ok(out)
}

fn cmd_asymptotics(a: &AsymptoticsArgs, ctx: &Context) -> Result<String> {
    let net = ctx.network()?;
    let g = &net.graph;
    let root = g.vertex_id(g.root()).to_string();
    let x = g.vertex(&ctx.cfg.pick(a.from.clone(), "from")?.unwrap_or_else(|| root.clone()))?;
    let y = g.vertex(&ctx.cfg.pick(a.to.clone(), "to")?.unwrap_or(root))?;
    let direction = match &a.direction {
        Some(s) => parse_list(s)?,
        None => require(ctx.cfg.get("direction")?, "direction")?,
    };
    let times = match &a.times {
        Some(s) => parse_list(s)?,
        None => ctx.cfg.get("times")?.unwrap_or_else(|| vec![8.0, 16.0, 32.0, 64.0]),
    };
    let rows = asymptotics_scan(&net, x, y, &direction, &times, &BetaOptions::default())?;
    Ok(asymptotics_csv(&rows))
}

fn cmd_homogenize(a: &HomogenizeArgs, ctx: &Context) -> Result<String> {
    let net = ctx.network()?;
    let datum: InitialDatum = match &a.datum {
        Some(s) => serde_json::from_str(s)?,
        None => require(ctx.cfg.get("datum")?, "datum")?,
    };
    let points: Vec<(Vec<f64>, f64)> = vectors(&a.point, &ctx.cfg, "points")?
        .into_iter()
        .map(|mut v| {
            let t = v.pop().unwrap_or(f64::NAN);
            (v, t)
        })
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidParameter("give at least one `--point`".into()));
    }
    let eps = match &a.eps {
        Some(s) => parse_list(s)?,
        None => ctx.cfg.get("eps")?.unwrap_or_else(|| vec![0.25, 0.125, 0.0625, 0.03125]),
    };
    let mut opts = SolverOptions {
        radius: ctx.cfg.pick(a.radius, "radius")?,
        ..Default::default()
    };
    if let Some(t) = ctx.cfg.pick(a.tol, "tol")? {
        opts.tol = t;
    }
    let report = convergence_experiment(&net, &datum, &ExperimentGrid { points, eps }, &opts)?;
    if let Some(p) = ctx.cfg.path(&a.summary, "summary")? {
        fs::write(&p, report.summary_json()).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(report.csv())
}

fn cmd_embed(a: &EmbedArgs, ctx: &Context) -> Result<String> {
    let g = ctx.graph()?;
    let tm = crate::graph::ThetaMap::of(&g);
    let be = match ctx.cfg.path(&a.embedding, "embedding")? {
        Some(p) => BaseEmbedding::from_json(&g, &read(&p)?)?,
        None => BaseEmbedding::auto_layout(&g),
    };
    let w = ctx.cfg.pick(a.window, "window")?.unwrap_or(1);
    let samples = ctx.cfg.pick(a.arc_samples, "arc_samples")?.unwrap_or(DEFAULT_ARC_SAMPLES);
    Ok(format!("{}\n", embed_crystal(&g, &be, &tm, w, samples).to_json()))
}

/// Parses `args`, runs, prints; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
