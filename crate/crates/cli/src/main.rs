// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `hypunif`: generate spaces, measure hyperbolicity, build Busemann fields
//! and conformal deformations, and verify the resulting inequalities.
//!
//! Exit status is 0 when every check passes or is inconclusive, 1 when any
//! check fails and 2 for bad input or configuration.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hypunif::busemann::{busemann_field, validate_ray};
use hypunif::generate::{generate, GeneratorSpec};
use hypunif::hyperbolicity::{delta_four_point, rips_kappa, Method, EXACT_DELTA_CUTOFF};
use hypunif::io::{checks_csv, load_space, to_json_string, Instance};
use hypunif::uniformize::{constants_ledger, ConformalDeformation};
use hypunif::verify::{run_suite, DeltaMode, Verdict, VerifyConfig, DEFAULT_DELTA_SAMPLES};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "hypunif", version, about = "Uniformization of Gromov hyperbolic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every sampling decision
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Space document to read
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,

    /// Where to write the result; stdout when absent
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated space document
    Generate(GenerateArgs),
    /// Four-point δ and the Rips constant
    Analyze(AnalyzeArgs),
    /// Ray diagnostics and the Busemann field
    Boundary(FieldArgs),
    /// Deformed edge lengths and the constants ledger
    Uniformize(UniformizeArgs),
    /// Run the verification suite
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Path,
    #[value(alias = "tree")]
    BaryTree,
    #[value(alias = "tessellation", alias = "disk")]
    TessellationDisk,
    Grid,
    Jittered,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Base family wrapped by `jittered`
    #[arg(long, value_enum)]
    base: Option<Kind>,
    /// Half-length of a path
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Branching of a tree
    #[arg(long, default_value_t = 2)]
    b: usize,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 7)]
    p: usize,
    #[arg(long, default_value_t = 3)]
    q: usize,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 10)]
    width: usize,
    #[arg(long, default_value_t = 10)]
    height: usize,
    /// Pieces per edge for `jittered`
    #[arg(long, default_value_t = 4)]
    subdivide: usize,
    /// Relative length jitter for `jittered`
    #[arg(long, default_value_t = 0.02)]
    amplitude: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaArg {
    Auto,
    Exact,
    Sampled,
}

impl From<DeltaArg> for DeltaMode {
    fn from(d: DeltaArg) -> Self {
        match d {
            DeltaArg::Auto => DeltaMode::Auto,
            DeltaArg::Exact => DeltaMode::Exact,
            DeltaArg::Sampled => DeltaMode::Sampled,
        }
    }
}

#[derive(Args)]
struct DeltaArgs {
    /// How δ is computed; `auto` is exact up to 200 vertices
    #[arg(long, value_enum, default_value_t = DeltaArg::Auto)]
    delta: DeltaArg,
    /// Quadruples drawn when δ is sampled
    #[arg(long, default_value_t = DEFAULT_DELTA_SAMPLES)]
    samples: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    delta: DeltaArgs,
    #[arg(long, default_value_t = 1.0 / 14.0)]
    h: f64,
}

#[derive(Args)]
struct FieldArgs {
    /// Ray standing for ω; the first ray of the document by default
    #[arg(long)]
    ray: Option<String>,
    #[arg(long)]
    basepoint: Option<String>,
}

#[derive(Args)]
struct EpsilonArgs {
    #[arg(long, conflicts_with = "auto_epsilon")]
    epsilon: Option<f64>,
    /// Use the largest admissible ε (the default)
    #[arg(long)]
    auto_epsilon: bool,
    #[arg(long, default_value_t = 1.0 / 14.0)]
    h: f64,
}

#[derive(Args)]
struct UniformizeArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    epsilon: EpsilonArgs,
    #[command(flatten)]
    delta: DeltaArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    epsilon: EpsilonArgs,
    #[command(flatten)]
    delta: DeltaArgs,
    #[arg(long, default_value_t = hypunif::sampling::DEFAULT_PAIR_BUDGET)]
    pair_budget: usize,
    /// Most h-short arcs enumerated per pair
    #[arg(long, default_value_t = hypunif::space::DEFAULT_MAX_ARCS)]
    max_arcs: usize,
    /// Comma-separated subset of checks
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
}

fn kind_spec(kind: Kind, a: &GenerateArgs, seed: u64) -> Result<GeneratorSpec> {
    Ok(match kind {
        Kind::Path => GeneratorSpec::Path { n: a.n },
        Kind::BaryTree => GeneratorSpec::BaryTree { b: a.b, depth: a.depth },
        Kind::TessellationDisk => GeneratorSpec::TessellationDisk { p: a.p, q: a.q, layers: a.layers },
        Kind::Grid => GeneratorSpec::Grid { width: a.width, height: a.height },
        Kind::Jittered => {
            let base = match a.base {
                None => bail!("--kind jittered needs --base"),
                Some(Kind::Jittered) => bail!("--base cannot itself be jittered"),
                Some(base) => kind_spec(base, a, seed)?,
            };
            GeneratorSpec::Jittered { base: Box::new(base), subdivide: a.subdivide, amplitude: a.amplitude, seed }
        }
    })
}

fn input(cli: &Cli) -> Result<Instance> {
    let path = cli.input.as_ref().context("this command needs --input")?;
    load_space(path).with_context(|| format!("cannot load {}", path.display()))
}

fn json_only(cli: &Cli) -> Result<()> {
    if cli.format == Format::Csv {
        bail!("csv output is only available for verify");
    }
    Ok(())
}

fn method(space_len: usize, d: DeltaArg) -> Method {
    match d {
        DeltaArg::Exact => Method::Exact,
        DeltaArg::Sampled => Method::Sampled,
        DeltaArg::Auto if space_len <= EXACT_DELTA_CUTOFF => Method::Exact,
        DeltaArg::Auto => Method::Sampled,
    }
}

fn ids(inst: &Instance, vs: &[usize]) -> Value {
    vs.iter().map(|&v| Value::String(inst.space.id(v).to_string())).collect()
}

fn omega_and_base<'a>(inst: &'a Instance, f: &FieldArgs) -> Result<(&'a hypunif::BoundaryRay, usize)> {
    let ray = match &f.ray {
        Some(name) => inst.ray(name).with_context(|| format!("no ray named \"{name}\""))?,
        None => inst.rays.first().context("the space designates no rays")?,
    };
    let o = match &f.basepoint {
        Some(id) => inst.space.vertex(id).with_context(|| format!("unknown basepoint \"{id}\""))?,
        None => inst.basepoint,
    };
    Ok((ray, o))
}

/// Runs the command, returning the text to emit and whether any check failed.
fn run(cli: &Cli) -> Result<(String, bool)> {
    match &cli.command {
        Command::Generate(a) => {
            json_only(cli)?;
            let doc = generate(&kind_spec(a.kind, a, cli.seed)?)?;
            Ok((to_json_string(&doc)?, false))
        }
        Command::Analyze(a) => {
            json_only(cli)?;
            let inst = input(cli)?;
            let est = delta_four_point(&inst.space, method(inst.space.len(), a.delta.delta), a.delta.samples, cli.seed);
            let out = json!({
                "delta": est.delta,
                "kappa": rips_kappa(est.delta, a.h),
                "h": a.h,
                "method": est.method,
                "worst_quadruple": ids(&inst, &est.worst_quadruple),
                "quadruples_checked": est.quadruples_checked,
            });
            Ok((to_json_string(&out)?, false))
        }
        Command::Boundary(f) => {
            json_only(cli)?;
            let inst = input(cli)?;
            let (omega, o) = omega_and_base(&inst, f)?;
            let rays = inst.rays.iter().map(|r| validate_ray(&inst.space, r, o)).collect::<hypunif::Result<Vec<_>>>()?;
            let field = busemann_field(&inst.space, omega, o)?;
            let values: Map<String, Value> = (0..inst.space.len()).map(|v| (inst.space.id(v).to_string(), json!(field.value(v)))).collect();
            let out = json!({
                "basepoint": inst.space.id(o),
                "omega": omega.name,
                "rays": rays,
                "anchor_error": field.anchor_error,
                "field": values,
            });
            Ok((to_json_string(&out)?, false))
        }
        Command::Uniformize(a) => {
            json_only(cli)?;
            let inst = input(cli)?;
            let (omega, o) = omega_and_base(&inst, &a.field)?;
            let field = busemann_field(&inst.space, omega, o)?;
            let est = delta_four_point(&inst.space, method(inst.space.len(), a.delta.delta), a.delta.samples, cli.seed);
            let h = a.epsilon.h;
            let ledger = constants_ledger(est.delta, rips_kappa(est.delta, h), h, a.epsilon.epsilon)?;
            let d = ConformalDeformation::new(&inst.space, &field, ledger.epsilon)?;
            let edges: Vec<Value> = inst
                .space
                .edges()
                .iter()
                .zip(&d.edge_weights)
                .map(|(e, &w)| json!([inst.space.id(e.u), inst.space.id(e.v), w]))
                .collect();
            let out = json!({ "basepoint": inst.space.id(o), "omega": omega.name, "edges": edges, "ledger": ledger });
            Ok((to_json_string(&out)?, false))
        }
        Command::Verify(a) => {
            let inst = input(cli)?;
            let config = VerifyConfig {
                ray: a.field.ray.clone(),
                basepoint: a.field.basepoint.clone(),
                h: a.epsilon.h,
                epsilon: a.epsilon.epsilon,
                seed: cli.seed,
                pair_budget: a.pair_budget,
                max_arcs: a.max_arcs,
                delta_mode: a.delta.delta.into(),
                delta_samples: a.delta.samples,
                checks: a.checks.clone(),
            };
            let report = run_suite(&inst, &config)?;
            let failed = report.checks.iter().any(|c| c.holds == Verdict::Fail);
            let text = match cli.format {
                Format::Json => to_json_string(&report)?,
                Format::Csv => checks_csv(&report.checks)?,
            };
            Ok((text, failed))
        }
    }
}

/// Runs the command and writes its output, returning the exit status.
fn execute(cli: &Cli) -> u8 {
    let outcome = run(cli).and_then(|(text, failed)| {
        match &cli.output {
            Some(path) => fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(failed)
    });
    match outcome {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("TOOL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // advisory; a pool that is already up keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    ExitCode::from(execute(&cli))
}
