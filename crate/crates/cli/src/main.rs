use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use annulus_cli::render::{box_csv, svg_from_csv, BoxRow};
use annulus_dyn::annulus::{basin_report, birkhoff_rotation, classify_basin, Basin, Direction, Power};
use annulus_dyn::conley::{
    attractor_pairs, chain_classes, default_eps, lyapunov, subdivision_graph, transition_graph_with, BoxDigraph,
    ChainClasses, GraphOptions, Grid, DEFAULT_SEED,
};
use annulus_dyn::constructions::horseshoe::{self, horseshoe_heteroclinic_chain, horseshoe_symbolic_point};
use annulus_dyn::constructions::HorseshoeCore;
use annulus_dyn::mapspec::{MapSpecDoc, ParamDoc, Tolerances, Variant, SCHEMA_VERSION};
use annulus_dyn::periodic::{
    chain_dynamical_index, find_fixed_points_of_power, fixed_point_index, square_loop, Continued,
};
use annulus_dyn::rotation::{
    atkinson_small_sums, atkinson_small_sums_exact, power_rotation_check, prime_end_rotation_estimate,
    rotation_interval_of_class, rotation_of_periodic, rotation_of_periodic_exact, End, LIFT_TOL,
};
use annulus_dyn::{AnnulusMapSpec, AnnulusPoint, Error, LiftMap, LiftPoint, Rect};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "annulus", version, about = "Annulus maps with attractor-repellor ends: orbits, chain classes, rotation numbers")]
struct Cli {
    /// Seed for the random sample points inside each grid box.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a map-spec document.
    #[command(subcommand)]
    Example(ExampleCmd),
    /// Iterate a point forward or backward.
    Orbit(OrbitArgs),
    /// Look for escape through either end.
    Basin(BasinArgs),
    /// Grid chain classes as a CSV box table and an SVG raster.
    Chain(ChainArgs),
    /// Complete Lyapunov function and attractor lattice on the grid.
    Lyapunov(LyapunovArgs),
    /// Rotation numbers.
    #[command(subcommand)]
    Rot(RotCmd),
    /// Search for periodic points of rotation number p/q.
    Periodic(PeriodicArgs),
    /// Fixed point index of T^-p o h^q around a square.
    Index(IndexArgs),
    /// Exact horseshoe oracles.
    Oracle(OracleArgs),
}

#[derive(Subcommand, Debug)]
enum ExampleCmd {
    /// Build a map spec from parameters.
    Build(BuildArgs),
}

#[derive(Subcommand, Debug)]
enum RotCmd {
    /// Rotation number p/q of a periodic point.
    Periodic(RotPeriodicArgs),
    /// Rotation interval of a grid chain class.
    Interval(IntervalArgs),
    /// Compare the rotation interval under h and h^q.
    Power(PowerArgs),
    /// Times n at which the angular sum returns within eps.
    Atkinson(AtkinsonArgs),
    /// Rotation numbers seen from the two ends.
    PrimeEnd(PrimeEndArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VariantArg {
    PaperExample,
    Horseshoe,
    Rigid,
}

#[derive(Args, Debug, Serialize)]
struct MapArgs {
    /// Map-spec JSON file (overrides the parameter flags).
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Rotation number of the upper end (or the rigid angle): "p/q" or a decimal.
    #[arg(long)]
    alpha: Option<String>,
    /// Rotation number of the lower end.
    #[arg(long)]
    beta: Option<String>,
    /// Vertical drop of the rigid translation.
    #[arg(long)]
    drop: Option<f64>,
    /// Truncation tolerance of Denjoy lifts.
    #[arg(long)]
    denjoy_tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OrbitArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long)]
    backward: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BasinArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 14.0, allow_hyphen_values = true)]
    t_hi: f64,
    #[arg(long, default_value_t = -14.0, allow_hyphen_values = true)]
    t_lo: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Window "x_lo,x_hi,t_lo,t_hi" (default: R for the horseshoe, [0,1]x[-16,16] otherwise).
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    window: Option<Rect>,
    #[arg(long, default_value_t = 8)]
    depth: u32,
    /// "auto" (two box diameters) or a radius.
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Start on this coarser grid and refine only around recurrent boxes.
    #[arg(long)]
    coarse_depth: Option<u32>,
    /// Points "x,t" whose classes are reported (the horseshoe adds a and b).
    #[arg(long = "mark", value_parser = parse_point, allow_hyphen_values = true)]
    marks: Vec<LiftPoint>,
}

#[derive(Args, Debug, Serialize)]
struct ChainArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LyapunovArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct RotPeriodicArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Horseshoe itinerary, evaluated exactly.
    #[arg(long, conflicts_with = "point")]
    word: Option<String>,
    /// Periodic point "x,t" of the map.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: Option<LiftPoint>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct IntervalArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PowerArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 2)]
    q: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct AtkinsonArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Horseshoe itinerary; its exact periodic point is used.
    #[arg(long, conflicts_with = "point")]
    word: Option<String>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: Option<LiftPoint>,
    #[arg(long)]
    p: Option<i64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PrimeEndArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PeriodicArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, allow_hyphen_values = true)]
    p: i64,
    #[arg(long)]
    q: usize,
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    window: Option<Rect>,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct IndexArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    center: LiftPoint,
    #[arg(long, default_value_t = 0.01)]
    radius: f64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    p: i64,
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    /// Binary itinerary through (R0, R1).
    #[arg(long, required_unless_present = "heteroclinic")]
    word: Option<String>,
    /// Emit the a -> b -> a chain at this tolerance with its dynamical index.
    #[arg(long)]
    heteroclinic: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with an exit code attached.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::NearRational { .. } | Error::AmbiguousLift { .. } => EXIT_CONFIG,
            Error::NoCandidates | Error::NotInBasin { .. } => EXIT_PARTIAL,
            _ => EXIT_NUMERIC,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_CONFIG, error }
    }
}

type Run<T = ()> = Result<T, Failure>;

fn config_error(msg: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_CONFIG, error: anyhow!("{msg}") }
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("not a number: {x:?}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v = parse_floats(s, 4)?;
    if !(v[0] < v[1] && v[2] < v[3]) {
        return Err("window needs x_lo < x_hi and t_lo < t_hi".into());
    }
    Ok(Rect::new(v[0], v[1], v[2], v[3]))
}

fn parse_point(s: &str) -> Result<LiftPoint, String> {
    let v = parse_floats(s, 2)?;
    Ok(LiftPoint::new(v[0], v[1]))
}

impl MapArgs {
    fn resolve(&self, default: VariantArg) -> Run<AnnulusMapSpec> {
        if let Some(path) = &self.map {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(AnnulusMapSpec::from_json(&text)?);
        }
        let param = |s: &Option<String>, fallback: &str| ParamDoc { value: s.clone().unwrap_or(fallback.into()), kind: None };
        let variant = self.variant.unwrap_or(default);
        let mut tolerances = Tolerances::default();
        if let Some(tol) = self.denjoy_tol {
            tolerances.denjoy = tol;
        }
        let doc = match variant {
            VariantArg::PaperExample => MapSpecDoc {
                schema_version: SCHEMA_VERSION,
                variant: Variant::PaperExample,
                alpha: Some(param(&self.alpha, "1/3")),
                beta: Some(param(&self.beta, "0.41421356237309515")),
                drop: None,
                tolerances,
            },
            VariantArg::Horseshoe => MapSpecDoc {
                schema_version: SCHEMA_VERSION,
                variant: Variant::HorseshoeCore,
                alpha: None,
                beta: None,
                drop: None,
                tolerances,
            },
            VariantArg::Rigid => MapSpecDoc {
                schema_version: SCHEMA_VERSION,
                variant: Variant::RigidTranslation,
                alpha: Some(param(&self.alpha, "0")),
                beta: None,
                drop: Some(self.drop.unwrap_or(0.0)),
                tolerances,
            },
        };
        Ok(AnnulusMapSpec::from_doc(&doc)?)
    }
}

/// Everything needed to reproduce a run.
struct RunContext<'a> {
    command: &'a str,
    args: Value,
    seed: u64,
    map: Option<&'a AnnulusMapSpec>,
}

impl RunContext<'_> {
    fn config(&self) -> Value {
        json!({
            "command": self.command,
            "args": self.args,
            "seed": self.seed,
            "map": self.map.map(|m| serde_json::to_value(m.to_doc()).expect("map spec serializes")),
        })
    }

    fn emit(&self, out: &Option<PathBuf>, result: Value) -> Run {
        let doc = json!({ "config": self.config(), "result": result });
        write_text(out, &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))
    }
}

fn write_text(path: &Option<PathBuf>, text: &str) -> Run {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Run {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn default_window(spec: &AnnulusMapSpec) -> Rect {
    if spec.is_horseshoe() {
        horseshoe::R
    } else {
        Rect::new(0.0, 1.0, -16.0, 16.0)
    }
}

struct GridRun {
    spec: AnnulusMapSpec,
    dg: BoxDigraph,
    cc: ChainClasses,
    marks: Vec<LiftPoint>,
}

impl GridArgs {
    fn build(&self, seed: u64) -> Run<GridRun> {
        let spec = self.map.resolve(VariantArg::Horseshoe)?;
        let window = self.window.unwrap_or_else(|| default_window(&spec));
        let grid = Grid::new(window, self.depth)?;
        let eps = match self.eps.as_str() {
            "auto" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| config_error(format!("--eps must be \"auto\" or a number, got {s:?}")))?;
                if !(v > 0.0) {
                    return Err(config_error("--eps must be positive"));
                }
                Some(v)
            }
        };
        let (dg, cc) = match (self.coarse_depth, eps) {
            (Some(_), Some(_)) => return Err(config_error("--coarse-depth scales eps with the grid; use --eps auto")),
            (Some(c), None) => {
                if c > self.depth {
                    return Err(config_error("--coarse-depth exceeds --depth"));
                }
                subdivision_graph(&spec, &grid, c, 2.0, seed)?
            }
            (None, eps) => {
                let opts = GraphOptions::new(eps.unwrap_or_else(|| default_eps(&grid))).with_seed(seed);
                let dg = transition_graph_with(&spec, &grid, &opts, None)?;
                let cc = chain_classes(&dg);
                (dg, cc)
            }
        };
        let mut marks = self.marks.clone();
        if spec.is_horseshoe() {
            marks.extend([horseshoe::A, horseshoe::B]);
        }
        Ok(GridRun { spec, dg, cc, marks })
    }
}

impl GridRun {
    fn rows(&self, values: Option<&[f64]>) -> Vec<BoxRow> {
        let grid = self.dg.grid();
        (0..self.dg.node_count())
            .map(|v| {
                let b = self.dg.box_of_node(v);
                let (ix, it) = grid.coords(b);
                let r = grid.rect(b);
                let class = self.cc.class_of(v);
                BoxRow {
                    grid_box: b,
                    ix,
                    it,
                    x_lo: r.x_lo,
                    x_hi: r.x_hi,
                    t_lo: r.t_lo,
                    t_hi: r.t_hi,
                    class,
                    recurrent: self.cc.get(class).recurrent,
                    lyapunov: values.map(|vals| vals[v]),
                }
            })
            .collect()
    }

    fn mark_report(&self) -> Vec<Value> {
        self.marks
            .iter()
            .map(|&p| {
                let node = self.dg.node_of_point(p);
                json!({
                    "point": p,
                    "box": node.map(|v| self.dg.box_of_node(v)),
                    "class": node.map(|v| self.cc.class_of(v)),
                })
            })
            .collect()
    }

    /// The class of the first mark if it is recurrent, else the largest recurrent class.
    fn focus_class(&self) -> Run<usize> {
        let marked = self
            .marks
            .first()
            .and_then(|&p| self.dg.node_of_point(p))
            .map(|v| self.cc.class_of(v))
            .filter(|&c| self.cc.get(c).recurrent);
        marked
            .or_else(|| self.cc.largest_recurrent().map(|c| c.id))
            .ok_or(Failure { code: EXIT_PARTIAL, error: anyhow!("no recurrent class on this grid") })
    }

    fn summary(&self) -> Value {
        let recurrent: Vec<Value> =
            self.cc.recurrent().map(|c| json!({ "class": c.id, "boxes": c.nodes.len() })).collect();
        json!({
            "depth": self.dg.grid().depth(),
            "eps": self.dg.eps(),
            "box_diameter": self.dg.grid().box_diameter(),
            "boxes": self.dg.node_count(),
            "edges": self.dg.edge_count(),
            "classes": self.cc.len(),
            "recurrent_classes": recurrent,
            "marks": self.mark_report(),
        })
    }
}

fn write_table(ctx: &RunContext, rows: &[BoxRow], csv: &Option<PathBuf>, svg: &Option<PathBuf>) -> Run {
    let text = box_csv(&ctx.config().to_string(), rows);
    if let Some(p) = csv {
        write_file(p, &text)?;
    }
    if let Some(p) = svg {
        write_file(p, &svg_from_csv(&text)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("annulus: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn args_value<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn run(cli: &Cli) -> Run<u8> {
    let seed = cli.seed;
    match &cli.command {
        Command::Example(ExampleCmd::Build(a)) => {
            let spec = a.map.resolve(VariantArg::PaperExample)?;
            write_text(&a.out, &(spec.to_json() + "\n"))?;
            Ok(0)
        }
        Command::Orbit(a) => {
            let spec = a.map.resolve(VariantArg::PaperExample)?;
            let ctx = RunContext { command: "orbit", args: args_value(a), seed, map: Some(&spec) };
            let mut y = AnnulusPoint::new(a.theta, a.t).lift();
            let mut points = vec![y];
            let mut stopped = None;
            for k in 0..a.n {
                let next = if a.backward { spec.inverse(y) } else { spec.eval(y) };
                match next {
                    Ok(z) => {
                        y = z;
                        points.push(y);
                    }
                    Err(e) => {
                        stopped = Some(json!({ "step": k, "reason": e.to_string() }));
                        break;
                    }
                }
            }
            let direction = if a.backward { Direction::Backward } else { Direction::Forward };
            let rot = if a.n > 0 { birkhoff_rotation(&spec, points[0], a.n, direction).ok() } else { None };
            let code = if stopped.is_some() { EXIT_PARTIAL } else { 0 };
            ctx.emit(&a.out, json!({ "points": points, "stopped": stopped, "rotation_average": rot }))?;
            Ok(code)
        }
        Command::Basin(a) => {
            let spec = a.map.resolve(VariantArg::PaperExample)?;
            let ctx = RunContext { command: "basin", args: args_value(a), seed, map: Some(&spec) };
            let p = AnnulusPoint::new(a.theta, a.t);
            let basin = classify_basin(&spec, p, a.t_hi, a.t_lo, a.max_iter)?;
            let report = basin_report(&spec, p, a.t_hi, a.t_lo, a.max_iter)?;
            ctx.emit(&a.out, json!({ "basin": basin, "escapes": report }))?;
            Ok(if basin == Basin::Undetermined { EXIT_PARTIAL } else { 0 })
        }
        Command::Chain(a) => {
            let g = a.grid.build(seed)?;
            let ctx = RunContext { command: "chain", args: args_value(a), seed, map: Some(&g.spec) };
            write_table(&ctx, &g.rows(None), &a.csv, &a.svg)?;
            ctx.emit(&a.out, g.summary())?;
            Ok(0)
        }
        Command::Lyapunov(a) => {
            let g = a.grid.build(seed)?;
            let ctx = RunContext { command: "lyapunov", args: args_value(a), seed, map: Some(&g.spec) };
            let l = lyapunov(&g.dg, &g.cc);
            let lat = attractor_pairs(&g.dg, &g.cc);
            write_table(&ctx, &g.rows(Some(&l.values)), &a.csv, &a.svg)?;
            let plateaus: Vec<Value> = l
                .plateaus
                .iter()
                .map(|p| {
                    json!({
                        "class": p.class,
                        "value": p.level.value(),
                        "ternary_numerator": p.level.numerator.to_string(),
                        "ternary_digits": p.level.digits,
                        "cantor": p.level.is_cantor(),
                    })
                })
                .collect();
            let result = json!({
                "grid": g.summary(),
                "cross_edges": l.cross_edge_count(&g.dg, &g.cc),
                "violations": l.violations(&g.dg, &g.cc).len(),
                "plateaus": plateaus,
                "attractors": {
                    "pairs": lat.pairs.len(),
                    "complete": lat.complete,
                    "identity_holds": lat.identity_holds,
                },
            });
            ctx.emit(&a.out, result)?;
            Ok(if lat.complete { 0 } else { EXIT_PARTIAL })
        }
        Command::Rot(cmd) => run_rot(cmd, seed),
        Command::Periodic(a) => {
            if a.q == 0 || !(a.tol > 0.0) {
                return Err(config_error("need --q >= 1 and --tol > 0"));
            }
            let spec = a.map.resolve(VariantArg::Horseshoe)?;
            let ctx = RunContext { command: "periodic", args: args_value(a), seed, map: Some(&spec) };
            let window = a.window.unwrap_or_else(|| default_window(&spec));
            match find_fixed_points_of_power(&spec, a.q, a.p, window, a.depth, a.tol) {
                Ok(orbits) => {
                    let list: Vec<Value> = orbits
                        .iter()
                        .map(|o| {
                            let rot = rotation_of_periodic(&spec, o.point, o.q, LIFT_TOL).ok();
                            json!({
                                "point": o.point,
                                "residual": o.residual,
                                "index": o.index,
                                "rotation": rot.map(|r| r.to_string()),
                            })
                        })
                        .collect();
                    ctx.emit(&a.out, Value::Array(list))?;
                    Ok(0)
                }
                Err(Error::NoCandidates) => {
                    ctx.emit(&a.out, json!([]))?;
                    eprintln!("annulus: {}", Error::NoCandidates);
                    Ok(EXIT_PARTIAL)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Index(a) => {
            if a.q == 0 || !(a.radius > 0.0) {
                return Err(config_error("need --q >= 1 and --radius > 0"));
            }
            let spec = a.map.resolve(VariantArg::Horseshoe)?;
            let ctx = RunContext { command: "index", args: args_value(a), seed, map: Some(&spec) };
            let g = Power::new(&spec, a.q, a.p);
            let index = fixed_point_index(&Continued::new(&g, a.center), &square_loop(a.center, a.radius), a.samples)?;
            ctx.emit(&a.out, json!({ "index": index }))?;
            Ok(0)
        }
        Command::Oracle(a) => {
            let ctx = RunContext { command: "oracle", args: args_value(a), seed, map: None };
            let mut result = serde_json::Map::new();
            if let Some(word) = &a.word {
                let s = horseshoe_symbolic_point(word)?;
                let rot = rotation_of_periodic_exact(&s.point, s.q)?;
                result.insert(
                    "periodic_point".into(),
                    json!({
                        "word": word,
                        "x": s.point.x.to_string(),
                        "t": s.point.t.to_string(),
                        "approx": s.point.to_f64(),
                        "p": s.p,
                        "q": s.q,
                        "rotation": rot.to_string(),
                    }),
                );
            }
            if let Some(eps) = a.heteroclinic {
                let chain = horseshoe_heteroclinic_chain(eps)?;
                let (i, j) = chain_dynamical_index(&HorseshoeCore, &chain, eps)?;
                result.insert("heteroclinic_chain".into(), json!({ "eps": eps, "points": chain, "index": [i, j] }));
            }
            ctx.emit(&a.out, Value::Object(result))?;
            Ok(0)
        }
    }
}

fn run_rot(cmd: &RotCmd, seed: u64) -> Run<u8> {
    match cmd {
        RotCmd::Periodic(a) => {
            let spec = a.map.resolve(VariantArg::Horseshoe)?;
            let ctx = RunContext { command: "rot periodic", args: args_value(a), seed, map: Some(&spec) };
            let rot = match (&a.word, a.point) {
                (Some(w), _) => {
                    let s = horseshoe_symbolic_point(w)?;
                    rotation_of_periodic_exact(&s.point, s.q)?
                }
                (None, Some(p)) => {
                    let q = a.q.ok_or_else(|| config_error("--point needs --q"))?;
                    rotation_of_periodic(&spec, p, q, LIFT_TOL)?
                }
                (None, None) => return Err(config_error("give --word or --point with --q")),
            };
            ctx.emit(&a.out, json!({ "p": rot.p, "q": rot.q, "rotation": rot.to_string(), "value": rot.value() }))?;
            Ok(0)
        }
        RotCmd::Interval(a) => {
            let g = a.grid.build(seed)?;
            let ctx = RunContext { command: "rot interval", args: args_value(a), seed, map: Some(&g.spec) };
            let class = g.focus_class()?;
            let iv = rotation_interval_of_class(&g.dg, g.cc.get(class))?;
            ctx.emit(&a.out, json!({ "class": class, "interval": iv, "grid": g.summary() }))?;
            Ok(0)
        }
        RotCmd::Power(a) => {
            if a.q == 0 {
                return Err(config_error("--q must be at least 1"));
            }
            let g = a.grid.build(seed)?;
            let ctx = RunContext { command: "rot power", args: args_value(a), seed, map: Some(&g.spec) };
            let class = g.focus_class()?;
            let report = power_rotation_check(&g.spec, &g.dg, g.cc.get(class), a.q)?;
            let code = if report.power.is_some() { 0 } else { EXIT_PARTIAL };
            ctx.emit(&a.out, json!({ "class": class, "report": report }))?;
            Ok(code)
        }
        RotCmd::Atkinson(a) => {
            if !(a.eps > 0.0) {
                return Err(config_error("--eps must be positive"));
            }
            let spec = a.map.resolve(VariantArg::Horseshoe)?;
            let ctx = RunContext { command: "rot atkinson", args: args_value(a), seed, map: Some(&spec) };
            let (hits, p, q) = match (&a.word, a.point) {
                (Some(w), _) => {
                    let s = horseshoe_symbolic_point(w)?;
                    (atkinson_small_sums_exact(&s.point, s.p, s.q, a.eps, a.n)?, s.p, s.q)
                }
                (None, Some(pt)) => {
                    let (p, q) = a.p.zip(a.q).ok_or_else(|| config_error("--point needs --p and --q"))?;
                    (atkinson_small_sums(&spec, pt, p, q, a.eps, a.n)?, p, q)
                }
                (None, None) => return Err(config_error("give --word or --point with --p and --q")),
            };
            let all = hits.len() as u64 == a.n;
            ctx.emit(&a.out, json!({ "p": p, "q": q, "count": hits.len(), "all": all, "first": hits.iter().take(20).collect::<Vec<_>>() }))?;
            Ok(0)
        }
        RotCmd::PrimeEnd(a) => {
            if a.n == 0 {
                return Err(config_error("--n must be positive"));
            }
            let spec = a.map.resolve(VariantArg::PaperExample)?;
            let ctx = RunContext { command: "rot prime-end", args: args_value(a), seed, map: Some(&spec) };
            let seed_point = AnnulusPoint::new(a.theta, a.t);
            let mut out = serde_json::Map::new();
            let mut partial = false;
            for end in [End::Plus, End::Minus] {
                match prime_end_rotation_estimate(&spec, seed_point, a.n, end) {
                    Ok(v) => {
                        out.insert(end.name().into(), json!(v));
                    }
                    Err(e @ Error::NotInBasin { .. }) => {
                        partial = true;
                        eprintln!("annulus: {e}");
                        out.insert(end.name().into(), Value::Null);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            ctx.emit(&a.out, Value::Object(out))?;
            Ok(if partial { EXIT_PARTIAL } else { 0 })
        }
    }
}
