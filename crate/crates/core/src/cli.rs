//   Copyright 2026 relu-dissect developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success |
//! | 1  | unreadable or invalid input file, or unusable input values |
//! | 2  | conversion (or other numerical) failure |
//! | 3  | `plot-grid` on a PWA whose input dimension is not 2 |
//! | 4  | `simulate` trajectory left the domain |
//! | 5  | a `verify` or `count` check failed |
//! | 64 | invalid command-line usage |
//!
//! Machine-readable results go to stdout (or `--out`), logs to stderr.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::Error;
use crate::network::{random_network, Network};
use crate::polyhedra::DEFAULT_GEOM_TOL;
use crate::pwa::{box_domain, convert_traced, ConvertOptions, PwaFunction, DEFAULT_BOX};
use crate::verify::{
    check_continuity, check_equivalence, check_partition, count_report, DEFAULT_CONTINUITY_PAIRS,
    DEFAULT_CONTINUITY_TOL, DEFAULT_EQUIVALENCE_TOL, DEFAULT_SAMPLES, DEFAULT_SEED,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONVERSION: i32 = 2;
pub const EXIT_NOT_2D: i32 = 3;
pub const EXIT_LEFT_DOMAIN: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;
pub const EXIT_USAGE: i32 = 64;

pub const WORKERS_ENV: &str = "RELU_DISSECT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "relu-dissect", version, about = "Exact piecewise-affine form of ReLU networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a network into its PWA representation.
    Convert {
        #[arg(long)]
        network: PathBuf,
        /// Half width B of the domain box [-B, B]^d.
        #[arg(long = "box", default_value_t = DEFAULT_BOX)]
        box_half_width: f64,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Geometric tolerance on inscribed-ball radii.
        #[arg(long, default_value_t = DEFAULT_GEOM_TOL)]
        tol: f64,
        #[arg(long)]
        remove_redundant: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a PWA file against its network (equivalence, partition, continuity).
    Verify {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        pwa: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Equivalence tolerance.
        #[arg(long, default_value_t = DEFAULT_EQUIVALENCE_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_CONTINUITY_TOL)]
        continuity_tol: f64,
        #[arg(long, default_value_t = DEFAULT_CONTINUITY_PAIRS)]
        pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Region counts per ReLU node against the arrangement bound.
    Count {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        pwa: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a PWA file, optionally pruned or as a readable table.
    Export {
        #[arg(long)]
        pwa: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Json)]
        format: ExportFormat,
        #[arg(long)]
        remove_redundant: bool,
        #[arg(long, default_value_t = DEFAULT_GEOM_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one output and the region index on a grid over a 2-D domain.
    PlotGrid {
        #[arg(long)]
        pwa: PathBuf,
        #[arg(long, default_value_t = 0)]
        output_index: usize,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate dx/dt = pwa(x) with fixed-step RK4.
    Simulate {
        #[arg(long)]
        pwa: PathBuf,
        /// Initial state, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert random networks and record region counts and timings.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "5")]
        widths: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        depths: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long = "box", default_value_t = DEFAULT_BOX)]
        box_half_width: f64,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Json,
    Table,
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn input_err(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn conversion_err(e: Error) -> Failure {
    Failure::new(EXIT_CONVERSION, e.to_string())
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

pub fn load_network(path: &Path) -> std::result::Result<Network, Failure> {
    Network::from_json_str(&read(path)?).map_err(input_err(path))
}

pub fn load_pwa(path: &Path) -> std::result::Result<PwaFunction, Failure> {
    PwaFunction::from_json_str(&read(path)?).map_err(input_err(path))
}

fn emit(out: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(EXIT_INPUT, format!("cannot write output: {e}"));
    match out {
        Some(p) => fs::write(p, text).map_err(io),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io)?;
            stdout.flush().map_err(io)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cmd: Command) -> CmdResult {
    match cmd {
        Command::Convert { network, box_half_width, workers, tol, remove_redundant, out } => {
            cmd_convert(&network, box_half_width, workers, tol, remove_redundant, out.as_deref())
        }
        Command::Verify { network, pwa, samples, seed, tol, continuity_tol, pairs, out } => {
            cmd_verify(&network, &pwa, samples, seed, tol, continuity_tol, pairs, out.as_deref())
        }
        Command::Count { network, pwa, out } => cmd_count(&network, &pwa, out.as_deref()),
        Command::Export { pwa, format, remove_redundant, tol, out } => {
            cmd_export(&pwa, format, remove_redundant, tol, out.as_deref())
        }
        Command::PlotGrid { pwa, output_index, resolution, out } => {
            cmd_plot_grid(&pwa, output_index, resolution, out.as_deref())
        }
        Command::Simulate { pwa, x0, dt, steps, out } => cmd_simulate(&pwa, &x0, dt, steps, out.as_deref()),
        Command::Bench { dims, widths, depths, trials, seed, box_half_width, workers, out } => {
            cmd_bench(&dims, &widths, &depths, trials, seed, box_half_width, workers, out.as_deref())
        }
    }
}

fn worker_label(workers: Option<usize>) -> usize {
    workers.unwrap_or_else(rayon::current_num_threads)
}

pub fn cmd_convert(
    network: &Path,
    box_half_width: f64,
    workers: Option<usize>,
    tol: f64,
    remove_redundant: bool,
    out: Option<&Path>,
) -> CmdResult {
    let net = load_network(network)?;
    if !(box_half_width > 0.0 && box_half_width.is_finite()) {
        return Err(Failure::new(EXIT_INPUT, "--box must be positive and finite"));
    }
    let domain = box_domain(net.input_dim(), box_half_width).map_err(conversion_err)?;
    let opts = ConvertOptions { geom_tol: tol, workers, remove_redundant, ..Default::default() };
    let start = Instant::now();
    let (pwa, trace) = convert_traced(&net, &domain, &opts).map_err(conversion_err)?;
    let elapsed = start.elapsed().as_secs_f64();
    for (k, t) in trace.iter().enumerate() {
        info!("relu node {k}: width {}, {} regions", t.width, t.regions_after);
    }
    info!("{} regions in {elapsed:.3} s with {} workers", pwa.region_count(), worker_label(workers));
    emit(out, &pwa.to_json_string())?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_verify(
    network: &Path,
    pwa_path: &Path,
    samples: usize,
    seed: u64,
    tol: f64,
    continuity_tol: f64,
    pairs: usize,
    out: Option<&Path>,
) -> CmdResult {
    let net = load_network(network)?;
    let pwa = load_pwa(pwa_path)?;
    let bad = |e: Error| Failure::new(EXIT_INPUT, e.to_string());
    let eq = check_equivalence(&net, &pwa, samples, seed, tol).map_err(bad)?;
    let part = check_partition(&pwa, samples, seed, DEFAULT_GEOM_TOL).map_err(bad)?;
    let cont = check_continuity(&pwa, pairs, seed, continuity_tol).map_err(bad)?;
    let pass = eq.pass && part.pass && cont.pass;
    let report = json!({
        "pass": pass,
        "seed": seed,
        "equivalence": eq,
        "partition": part,
        "continuity": cont,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")))?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_count(network: &Path, pwa_path: &Path, out: Option<&Path>) -> CmdResult {
    let net = load_network(network)?;
    let pwa = load_pwa(pwa_path)?;
    let report = count_report(&net, &pwa).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")))?;
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Readable listing: pattern, affine matrix and constraints per region.
pub fn format_table(pwa: &PwaFunction) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} regions, {} -> {}", pwa.region_count(), pwa.input_dim, pwa.output_dim);
    for (k, r) in pwa.regions.iter().enumerate() {
        let _ = writeln!(s, "region {k}  pattern ({})", r.pattern);
        let _ = writeln!(s, "  P =");
        for row in r.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
            let _ = writeln!(s, "    [{}]", cells.join(" "));
        }
        let _ = writeln!(s, "  H =");
        for row in r.region.to_matrix() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
            let _ = writeln!(s, "    [{}]", cells.join(" "));
        }
    }
    s
}

pub fn cmd_export(
    pwa_path: &Path,
    format: ExportFormat,
    remove_redundant: bool,
    tol: f64,
    out: Option<&Path>,
) -> CmdResult {
    let mut pwa = load_pwa(pwa_path)?;
    if remove_redundant {
        for r in &mut pwa.regions {
            r.region = r.region.remove_redundant(tol).map_err(conversion_err)?;
        }
    }
    let text = match format {
        ExportFormat::Json => pwa.to_json_string(),
        ExportFormat::Table => format_table(&pwa),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

pub fn cmd_plot_grid(pwa_path: &Path, output_index: usize, resolution: usize, out: Option<&Path>) -> CmdResult {
    let pwa = load_pwa(pwa_path)?;
    if pwa.input_dim != 2 {
        return Err(Failure::new(EXIT_NOT_2D, format!("plot-grid needs a 2-D input, got {}", pwa.input_dim)));
    }
    if output_index >= pwa.output_dim {
        return Err(Failure::new(
            EXIT_INPUT,
            format!("output index {output_index} out of range for {} outputs", pwa.output_dim),
        ));
    }
    if resolution < 2 {
        return Err(Failure::new(EXIT_INPUT, "--resolution must be at least 2"));
    }
    let (lo, hi) = pwa.domain.bounding_box().map_err(conversion_err)?;
    let axis = |k: usize, i: usize| lo[k] + (hi[k] - lo[k]) * i as f64 / (resolution - 1) as f64;
    let mut csv = String::from("x1,x2,y,region_index\n");
    for i in 0..resolution {
        for j in 0..resolution {
            let x = [axis(0, i), axis(1, j)];
            let k = match pwa.region_of(&x, DEFAULT_GEOM_TOL) {
                Ok(k) => k,
                // grid node outside a non-box domain
                Err(Error::OutsideDomain) => continue,
                Err(e) => return Err(conversion_err(e)),
            };
            let y = pwa.regions[k].apply(&x)[output_index];
            let _ = writeln!(csv, "{},{},{},{}", x[0], x[1], y, k);
        }
    }
    emit(out, &csv)?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate(pwa_path: &Path, x0: &[f64], dt: f64, steps: usize, out: Option<&Path>) -> CmdResult {
    let pwa = load_pwa(pwa_path)?;
    if pwa.output_dim != pwa.input_dim {
        return Err(Failure::new(
            EXIT_INPUT,
            format!("vector field needs output_dim = input_dim, got {} and {}", pwa.output_dim, pwa.input_dim),
        ));
    }
    if x0.len() != pwa.input_dim {
        return Err(Failure::new(EXIT_INPUT, format!("--x0 needs {} values", pwa.input_dim)));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Failure::new(EXIT_INPUT, "--dt must be positive"));
    }
    let d = pwa.input_dim;
    let mut csv = String::from("t");
    for i in 0..d {
        let _ = write!(csv, ",x{}", i + 1);
    }
    csv.push_str(",region_index\n");
    let row = |csv: &mut String, t: f64, x: &[f64], k: usize| {
        let _ = write!(csv, "{t}");
        for v in x {
            let _ = write!(csv, ",{v}");
        }
        let _ = writeln!(csv, ",{k}");
    };
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let left = |csv: &str, t: f64| -> CmdResult {
        emit(out, csv)?;
        Err(Failure::new(EXIT_LEFT_DOMAIN, format!("trajectory left the domain at t = {t}")))
    };
    let Ok(k0) = pwa.region_of(&x, DEFAULT_GEOM_TOL) else {
        return left(&csv, t);
    };
    row(&mut csv, t, &x, k0);
    for step in 1..=steps {
        match rk4_step(&pwa, &x, dt) {
            Some(next) => x = next,
            None => return left(&csv, t),
        }
        t = step as f64 * dt;
        let Ok(k) = pwa.region_of(&x, DEFAULT_GEOM_TOL) else {
            return left(&csv, t);
        };
        row(&mut csv, t, &x, k);
    }
    emit(out, &csv)?;
    Ok(EXIT_OK)
}

/// One classic Runge–Kutta step; `None` if a stage leaves the domain.
pub fn rk4_step(pwa: &PwaFunction, x: &[f64], dt: f64) -> Option<Vec<f64>> {
    let f = |p: &[f64]| pwa.eval(p, DEFAULT_GEOM_TOL).ok();
    let axpy = |a: f64, v: &[f64]| -> Vec<f64> { x.iter().zip(v).map(|(x, v)| x + a * v).collect() };
    let k1 = f(x)?;
    let k2 = f(&axpy(dt / 2.0, &k1))?;
    let k3 = f(&axpy(dt / 2.0, &k2))?;
    let k4 = f(&axpy(dt, &k3))?;
    Some((0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// One row of the benchmark CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dim: usize,
    pub widths: Vec<usize>,
    pub region_count: usize,
    pub wall_time: f64,
    pub workers: usize,
}

pub fn bench_csv_header() -> &'static str {
    "d,widths,region_count,wall_time,workers"
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let widths = if self.widths.is_empty() {
            "none".to_string()
        } else {
            self.widths.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
        };
        format!("{},{},{},{:.6},{}", self.dim, widths, self.region_count, self.wall_time, self.workers)
    }
}

/// Converts `trials` random networks per (dimension, width, depth)
/// combination. Network weights are standard normal, biases uniform(-1, 1),
/// each hidden layer is followed by a ReLU and the output is scalar.
pub fn run_bench(
    dims: &[usize],
    widths: &[usize],
    depths: &[usize],
    trials: usize,
    seed: u64,
    box_half_width: f64,
    workers: Option<usize>,
) -> crate::error::Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &d in dims {
        for &depth in depths {
            for &w in widths {
                for _ in 0..trials {
                    let hidden = vec![w; depth];
                    let net = random_network(&mut rng, d, &hidden, 1);
                    let domain = box_domain(d, box_half_width)?;
                    let opts = ConvertOptions { workers, ..Default::default() };
                    let start = Instant::now();
                    let (pwa, _) = convert_traced(&net, &domain, &opts)?;
                    let wall_time = start.elapsed().as_secs_f64();
                    rows.push(BenchRow {
                        dim: d,
                        widths: hidden,
                        region_count: pwa.region_count(),
                        wall_time,
                        workers: worker_label(workers),
                    });
                }
                if depth == 0 {
                    // width is irrelevant without hidden layers
                    break;
                }
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bench(
    dims: &[usize],
    widths: &[usize],
    depths: &[usize],
    trials: usize,
    seed: u64,
    box_half_width: f64,
    workers: Option<usize>,
    out: Option<&Path>,
) -> CmdResult {
    if dims.contains(&0) || widths.contains(&0) {
        return Err(Failure::new(EXIT_INPUT, "dimensions and widths must be positive"));
    }
    let rows = run_bench(dims, widths, depths, trials, seed, box_half_width, workers).map_err(conversion_err)?;
    let mut csv = format!("{}\n", bench_csv_header());
    for r in &rows {
        info!("d={} widths={:?}: {} regions in {:.3} s", r.dim, r.widths, r.region_count, r.wall_time);
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    emit(out, &csv)?;
    Ok(EXIT_OK)
}
