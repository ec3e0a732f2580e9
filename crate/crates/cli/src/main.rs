use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use cpmilp::bench::{self, BenchArgs, Graph};
use cpmilp::linearize::{linearize_model, Linearized};
use cpmilp::milp::{format_number, write_lp_string};
use cpmilp::model::Model;
use cpmilp::modelfile::{parse_model_file, write_model};
use cpmilp::solver::{enumerate_all, write_solution_file, Backend, EmbeddedBackend, ExternalBackend, Solution, SolveParams, Status};

#[derive(Parser)]
#[command(name = "cpmilp", version, about = "Compile CP models to MILP and solve them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linearize a model file and solve it.
    Solve {
        file: PathBuf,
        /// `embedded`, or `cmd:<template>` where the template may use {lp} and {sol}.
        #[arg(long, default_value = "embedded")]
        backend: String,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// List up to N feasible assignments instead of optimizing.
        #[arg(long, value_name = "N")]
        all_solutions: Option<usize>,
        /// Write the full MILP solution (every variable) to this file.
        #[arg(long, value_name = "FILE")]
        write_sol: Option<PathBuf>,
    },
    /// Linearize a model file and write it in LP format.
    Export {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build a benchmark model (sudoku, maxcut, santa, magic) and solve it.
    Bench {
        name: String,
        /// Size: grid side, vertex count, number of kids or square side.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Max-Cut edge list with `u v w` lines and 0-based vertices.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        time_limit: Option<f64>,
        /// Also write the model file.
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { file, backend, time_limit, all_solutions, write_sol } => {
            let model = parse_model_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let params = params(time_limit)?;
            match all_solutions {
                Some(cap) => enumerate(&model, cap, &params),
                None => solve(&model, &backend, &params, write_sol.as_deref()),
            }
        }
        Command::Export { file, output } => {
            let model = parse_model_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let lin = linearize_model(&model)?;
            let text = write_lp_string(&lin.program);
            fs::write(&output, &text).with_context(|| format!("writing {}", output.display()))?;
            let st = lin.program.stats();
            println!("wrote {} ({} vars, {} constraints)", output.display(), st.vars(), st.rows());
            Ok(0)
        }
        Command::Bench { name, n, seed, graph, time_limit, save } => {
            let model = match graph {
                Some(path) if name == "maxcut" => bench::maxcut(&read_graph(&path)?),
                Some(_) => bail!("--graph only applies to maxcut"),
                None => bench::build(&name, BenchArgs { n, seed })?,
            };
            if let Some(path) = save {
                fs::write(&path, write_model(&model)).with_context(|| format!("writing {}", path.display()))?;
            }
            solve(&model, "embedded", &params(time_limit)?, None)
        }
    }
}

fn params(time_limit: Option<f64>) -> Result<SolveParams> {
    let mut p = SolveParams::default();
    if let Some(t) = time_limit {
        if !(t >= 0.0 && t.is_finite()) {
            bail!("time limit must be a non-negative number of seconds");
        }
        p = p.with_time_limit(t);
    }
    Ok(p)
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Graph::parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

fn backend(spec: &str) -> Result<Box<dyn Backend>> {
    if spec == "embedded" {
        return Ok(Box::new(EmbeddedBackend));
    }
    match spec.strip_prefix("cmd:") {
        Some(cmd) if !cmd.trim().is_empty() => Ok(Box::new(ExternalBackend::new(cmd))),
        _ => bail!("unknown backend {spec:?} (expected embedded or cmd:<command>)"),
    }
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Optimal | Status::Feasible | Status::EnumerationComplete => 0,
        Status::Infeasible => 2,
        Status::TimeLimit => 3,
    }
}

fn solve(model: &Model, backend_spec: &str, params: &SolveParams, write_sol: Option<&Path>) -> Result<u8> {
    let backend = backend(backend_spec)?;
    let start = Instant::now();
    let lin = linearize_model(model)?;
    let sol = backend.solve(&lin.program, params)?;
    if let Some(path) = write_sol {
        fs::write(path, write_solution_file(&lin.program, &sol)).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("status: {:?}", sol.status);
    if let Some(obj) = sol.objective_value {
        println!("objective: {}", format_number(obj));
    }
    if let Some(x) = &sol.assignment {
        print_assignment(model, &lin, x);
    }
    print_stats(&lin, &sol, start);
    Ok(exit_code(sol.status))
}

fn enumerate(model: &Model, cap: usize, params: &SolveParams) -> Result<u8> {
    let start = Instant::now();
    let lin = linearize_model(model)?;
    let all = enumerate_all(&lin.program, cap, params)?;
    for (k, x) in all.solutions.iter().enumerate() {
        let values = lin.project(x);
        let line: Vec<String> =
            model.vars().iter().zip(&values).map(|(v, &x)| format!("{}={}", v.name, format_number(x))).collect();
        println!("solution {}: {}", k + 1, line.join(" "));
    }
    let status = if all.timed_out {
        Status::TimeLimit
    } else if all.solutions.is_empty() {
        Status::Infeasible
    } else {
        Status::EnumerationComplete
    };
    println!("status: {status:?}");
    let more = if all.cap_exceeded { " (more exist)" } else { "" };
    println!("solutions: {}{more}", all.solutions.len());
    let st = lin.program.stats();
    println!(
        "stats: {} vars, {} constraints, {} nodes, {:.3} s",
        st.vars(),
        st.rows(),
        all.nodes,
        start.elapsed().as_secs_f64()
    );
    Ok(exit_code(status))
}

fn print_assignment(model: &Model, lin: &Linearized, x: &[f64]) {
    let values = lin.project(x);
    if let Some(grid) = grid(model, &values) {
        for row in grid {
            println!("{row}");
        }
        return;
    }
    for (v, &x) in model.vars().iter().zip(&values) {
        println!("{} = {}", v.name, format_number(x));
    }
}

/// Renders models whose variables are exactly `<p>{r}_{c}` over an n×n grid
/// for a common alphabetic prefix `p`.
fn grid(model: &Model, values: &[f64]) -> Option<Vec<String>> {
    let n = (2..=16).find(|n| n * n == model.num_vars())?;
    let first = &model.vars()[0].name;
    let prefix = &first[..first.find(|c: char| c.is_ascii_digit())?];
    if prefix.is_empty() {
        return None;
    }
    let mut cells = vec![String::new(); n * n];
    for (v, &x) in model.vars().iter().zip(values) {
        let (r, c) = v.name.strip_prefix(prefix)?.split_once('_')?;
        let (r, c): (usize, usize) = (r.parse().ok()?, c.parse().ok()?);
        if r >= n || c >= n || !cells[r * n + c].is_empty() {
            return None;
        }
        cells[r * n + c] = format_number(x);
    }
    Some(cells.chunks(n).map(|row| row.join(" ")).collect())
}

fn print_stats(lin: &Linearized, sol: &Solution, start: Instant) {
    let st = lin.program.stats();
    println!(
        "stats: {} vars ({} binary, {} integer, {} continuous), {} constraints, {} nonzeros, {} nodes, {:.3} s",
        st.vars(),
        st.binaries,
        st.integers,
        st.continuous,
        st.rows(),
        st.nonzeros,
        sol.nodes,
        start.elapsed().as_secs_f64()
    );
    if sol.underdetermined {
        println!("note: some continuous values were not pinned by the constraints; a representative was chosen");
    }
}
