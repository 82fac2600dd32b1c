//! `mbd`: diagnose problem files, run simulated or interactive diagnosis
//! sessions, generate random problems, and benchmark the search strategies.

mod dpifile;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mbd_core::{
    cost_adjust, generate_random_dpi, hbf_hs, hs_tree, rbf_hs, run_session, select_probe_ent,
    select_probe_spl, Cost, CostMode, CostModel, Dpi, GenBackend, GeneratorParams, HbfConfig,
    HsTreeConfig, Ld, RbfConfig, SearchResult, Selector, Session, SessionConfig,
    SwitchCriterion, DEFAULT_ADJUSTMENT,
};

use dpifile::DpiFile;

#[derive(Parser)]
#[command(name = "mbd", about = "Model-based diagnosis engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Hstree,
    Rbfhs,
    Hbfhs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Mincard,
    Maxprob,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SelectorArg {
    Spl,
    Ent,
}

#[derive(Subcommand)]
enum Command {
    /// Compute minimal diagnoses for a problem file
    Diagnose(DiagnoseArgs),
    /// Run a diagnosis session, simulated or interactive
    Sequential(SequentialArgs),
    /// Write a random problem file
    Gen(GenArgs),
    /// Run the benchmark grid and write a CSV report
    Bench(BenchArgs),
}

#[derive(Args)]
struct DiagnoseArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Rbfhs)]
    algo: Algo,
    /// Number of leading diagnoses, or "all"
    #[arg(long, default_value = "all")]
    ld: String,
    #[arg(long, value_enum, default_value_t = Mode::Mincard)]
    mode: Mode,
    /// Switch criterion for hbfhs: nodecount:N or memfrac:F (fraction of a
    /// node budget sized to the problem)
    #[arg(long)]
    switch: Option<String>,
    /// Append a metrics row to this CSV file
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct SequentialArgs {
    file: PathBuf,
    /// Comma-separated component names of the assumed actual diagnosis
    #[arg(long, conflicts_with = "interactive")]
    actual: Option<String>,
    /// Answer probes interactively on stdin (y = healthy, n = faulty)
    #[arg(long)]
    interactive: bool,
    #[arg(long, value_enum, default_value_t = SelectorArg::Ent)]
    selector: SelectorArg,
    #[arg(long, value_enum, default_value_t = Mode::Maxprob)]
    mode: Mode,
    /// Leading diagnoses computed per iteration
    #[arg(long, default_value_t = 6)]
    ld: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    components: usize,
    #[arg(long, default_value_t = 4)]
    conflicts: usize,
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    #[arg(long, default_value_t = 4)]
    max_size: usize,
    #[arg(long, default_value = "explicit")]
    backend: String,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of random scenarios
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Comma-separated component counts cycled across scenarios
    #[arg(long, default_value = "10,20,30")]
    sizes: String,
    #[arg(long, value_delimiter = ',', default_values = ["hstree", "rbfhs", "hbfhs"])]
    algos: Vec<Algo>,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Sequential(args) => cmd_sequential(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn parse_ld(s: &str) -> Result<Ld> {
    if s.eq_ignore_ascii_case("all") {
        Ok(Ld::All)
    } else {
        let n: usize = s.parse().context("--ld expects a number or \"all\"")?;
        if n == 0 {
            bail!("--ld must be at least 1");
        }
        Ok(Ld::Limit(n))
    }
}

fn parse_switch(s: Option<&str>, k: usize) -> Result<SwitchCriterion> {
    let Some(s) = s else {
        // default: switch once the open queue outgrows the component count
        return Ok(SwitchCriterion::NodeCount(4 * k as u64));
    };
    if let Some(n) = s.strip_prefix("nodecount:") {
        return Ok(SwitchCriterion::NodeCount(n.parse().context("nodecount wants an integer")?));
    }
    if let Some(f) = s.strip_prefix("memfrac:") {
        let frac: f64 = f.parse().context("memfrac wants a fraction")?;
        if !(0.0..=1.0).contains(&frac) {
            bail!("memfrac must lie in [0, 1]");
        }
        return Ok(SwitchCriterion::MemoryFraction { frac, budget: 4 * k as u64 });
    }
    bail!("--switch expects nodecount:N or memfrac:F");
}

/// Cost model for the requested mode; probabilities at or above 0.5 are
/// scaled down so the search cost stays strictly anti-monotonic.
fn cost_model(mode: Mode, pr: Option<&[f64]>, k: usize) -> Result<CostModel> {
    match mode {
        Mode::Mincard => Ok(CostModel::min_card(k)),
        Mode::Maxprob => {
            let pr = pr.context("maxprob mode needs probabilities in the problem file")?;
            match CostModel::max_prob(pr) {
                Ok(m) => Ok(m),
                Err(_) => {
                    let adjusted = cost_adjust(pr, DEFAULT_ADJUSTMENT)?;
                    Ok(CostModel::max_prob(&adjusted)?)
                }
            }
        }
    }
}

fn run_algo(algo: Algo, dpi: &Dpi, model: &CostModel, ld: Ld, switch: Option<&str>) -> Result<SearchResult> {
    Ok(match algo {
        Algo::Hstree => hs_tree(dpi, model, ld, &HsTreeConfig::default()),
        Algo::Rbfhs => rbf_hs(dpi, model, ld, &RbfConfig::default()),
        Algo::Hbfhs => {
            let criterion = parse_switch(switch, dpi.k_size())?;
            hbf_hs(dpi, model, ld, &HbfConfig { criterion, duplicate_check: false, trace: false })
        }
    })
}

const METRICS_HEADER: &str = "file,algo,ld,mode,time_ms,nodes_generated,nodes_explored,peak_stored_nodes,conflicts_computed,conflicts_reused,consistency_checks\n";

fn cmd_diagnose(args: DiagnoseArgs) -> Result<i32> {
    if args.switch.is_some() && !matches!(args.algo, Algo::Hbfhs) {
        bail!("--switch only applies to --algo hbfhs");
    }
    let file = DpiFile::load(&args.file)?;
    let (dpi, pr) = file.to_dpi()?;
    let ld = parse_ld(&args.ld)?;
    let model = cost_model(args.mode, pr.as_deref(), dpi.k_size())?;
    let result = run_algo(args.algo, &dpi, &model, ld, args.switch.as_deref())?;

    for d in &result.diagnoses {
        let cost = match d.cost {
            Cost::Finite(v) if model.mode == CostMode::MaxProb => format!("{:.6}", v.exp()),
            Cost::Finite(v) => format!("{}", -v as i64),
            Cost::NegInf => "-inf".to_string(),
        };
        println!("{}\t{}", dpi.display_set(&d.members), cost);
    }

    if let Some(path) = &args.metrics {
        let mut out = String::new();
        if !path.exists() {
            out.push_str(METRICS_HEADER);
        }
        let m = &result.metrics;
        out.push_str(&format!(
            "{},{:?},{},{:?},{:.3},{},{},{},{},{},{}\n",
            args.file.display(),
            args.algo,
            args.ld,
            args.mode,
            m.wall_time.as_secs_f64() * 1e3,
            m.nodes_generated,
            m.nodes_explored,
            m.peak_stored_nodes,
            m.conflicts_computed,
            m.conflicts_reused,
            m.consistency_checks,
        ));
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        f.write_all(out.as_bytes())?;
    }

    Ok(if result.diagnoses.is_empty() { 2 } else { 0 })
}

fn cmd_sequential(args: SequentialArgs) -> Result<i32> {
    let file = DpiFile::load(&args.file)?;
    let (dpi, pr) = file.to_dpi()?;
    let k = dpi.k_size();
    // sessions always rank probabilistically for the entropy selector;
    // without probabilities every component is treated alike
    let pr = pr.unwrap_or_else(|| vec![0.3; k]);
    let selector = match args.selector {
        SelectorArg::Spl => Selector::Spl,
        SelectorArg::Ent => Selector::Ent,
    };
    let mode = match args.mode {
        Mode::Mincard => CostMode::MinCard,
        Mode::Maxprob => CostMode::MaxProb,
    };
    let config = SessionConfig { selector, mode, ld: args.ld };

    if args.interactive {
        return interactive_session(dpi, pr, &config);
    }
    let actual: BTreeSet<String> = args
        .actual
        .context("--actual or --interactive is required")?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let result = run_session(&dpi, &pr, &actual, &config)?;
    for probe in &result.probes {
        println!(
            "probe {} -> {}",
            probe.component,
            if probe.healthy { "healthy" } else { "faulty" }
        );
    }
    let isolated: Vec<String> = result.isolated.iter().cloned().collect();
    println!("{}", isolated.join(","));
    Ok(0)
}

/// Same protocol as the simulated session, but probe answers come from stdin.
fn interactive_session(dpi: Dpi, pr: Vec<f64>, config: &SessionConfig) -> Result<i32> {
    let mut session = Session::new(dpi, pr)?;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        let model = match config.mode {
            CostMode::MinCard => CostModel::min_card(session.dpi.k_size()),
            CostMode::MaxProb => cost_model(Mode::Maxprob, Some(&session.pr), 0)?,
        };
        let leading =
            rbf_hs(&session.dpi, &model, Ld::Limit(config.ld), &RbfConfig::default())
                .diagnosis_sets();
        if leading.len() <= 1 {
            let mut isolated = session.confirmed.clone();
            if let Some(last) = leading.first() {
                isolated.extend(last.iter().map(|c| session.dpi.name_of(*c).to_string()));
            }
            let isolated: Vec<String> = isolated.into_iter().collect();
            println!("{}", isolated.join(","));
            return Ok(0);
        }
        let k = session.dpi.k_size();
        let target = match config.selector {
            Selector::Spl => select_probe_spl(k, &leading),
            Selector::Ent => select_probe_ent(k, &leading, &session.pr),
        }
        .context("no discriminating probe exists")?;
        let name = session.dpi.name_of(target).to_string();
        println!("is {name} healthy? [y/n]");
        std::io::stdout().flush()?;
        let answer = loop {
            let line = lines.next().context("stdin closed mid-session")??;
            match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => break true,
                "n" | "no" => break false,
                _ => println!("please answer y or n"),
            }
        };
        println!("probe {} -> {}", name, if answer { "healthy" } else { "faulty" });
        session.apply_answer(target, answer)?;
    }
}

fn gen_params(args: &GenArgs) -> Result<GeneratorParams> {
    let backend = match args.backend.as_str() {
        "explicit" => GenBackend::Explicit,
        "cnf" => GenBackend::Cnf,
        other => bail!("unknown backend {other:?} (expected explicit or cnf)"),
    };
    Ok(GeneratorParams {
        seed: args.seed,
        components: args.components,
        conflict_count: args.conflicts,
        conflict_size: (args.min_size, args.max_size),
        pr_range: (0.05, 0.45),
        backend,
    })
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let params = gen_params(&args)?;
    let generated = generate_random_dpi(&params)?;
    let file = DpiFile::from_dpi(&generated.dpi, Some(&generated.pr));
    let json = file.to_json()?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(0)
}

const BENCH_HEADER: &str = "scenario,algorithm,ld,mode,selector,time_ms,peak_nodes,conflicts_computed\n";

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| s.trim().parse().context("--sizes expects comma-separated integers"))
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        bail!("--sizes must name at least one component count");
    }

    let mut csv = String::from(BENCH_HEADER);
    for seed in 0..args.seeds {
        let components = sizes[seed as usize % sizes.len()];
        let params = GeneratorParams {
            seed,
            components,
            conflict_count: 4 + (seed % 3) as usize,
            conflict_size: (2, 5),
            pr_range: (0.05, 0.45),
            backend: GenBackend::Explicit,
        };
        let g = generate_random_dpi(&params)?;
        let scenario = format!("s{seed}-k{components}");

        for mode in [Mode::Mincard, Mode::Maxprob] {
            let model = cost_model(mode, Some(&g.pr), g.dpi.k_size())?;
            let mode_mem = match mode {
                Mode::Mincard => CostMode::MinCard,
                Mode::Maxprob => CostMode::MaxProb,
            };
            for &ld in &[2usize, 6, 10, 20] {
                let mut peaks: Vec<(Algo, usize, f64)> = Vec::new();
                for &algo in &args.algos {
                    let r = run_algo(algo, &g.dpi, &model, Ld::Limit(ld), None)?;
                    let ms = r.metrics.wall_time.as_secs_f64() * 1e3;
                    csv.push_str(&format!(
                        "{scenario},{algo:?},{ld},{mode:?},-,{ms:.3},{},{}\n",
                        r.metrics.peak_stored_nodes, r.metrics.conflicts_computed,
                    ));
                    peaks.push((algo, r.metrics.peak_stored_nodes, ms));
                }
                let tree = peaks.iter().find(|(a, ..)| matches!(a, Algo::Hstree));
                let rec = peaks.iter().find(|(a, ..)| matches!(a, Algo::Rbfhs));
                if let (Some((_, tp, tt)), Some((_, rp, rt))) = (tree, rec) {
                    println!(
                        "{scenario} ld={ld} mode={mode:?}: memory factor {:.2}, time factor {:.2}",
                        *tp as f64 / (*rp).max(1) as f64,
                        tt / rt.max(1e-9),
                    );
                }
                for selector in [Selector::Spl, Selector::Ent] {
                    // one simulated session per grid cell; the actual fault
                    // is the best diagnosis of the instance
                    let best = rbf_hs(&g.dpi, &model, Ld::Limit(1), &RbfConfig::default());
                    let Some(d) = best.diagnoses.first() else { continue };
                    let actual: BTreeSet<String> =
                        d.members.iter().map(|c| g.dpi.name_of(*c).to_string()).collect();
                    let config = SessionConfig { selector, mode: mode_mem, ld };
                    let session = run_session(&g.dpi, &g.pr, &actual, &config)?;
                    csv.push_str(&format!(
                        "{scenario},session,{ld},{mode:?},{selector:?},{:.3},{},{}\n",
                        session.metrics.wall_time.as_secs_f64() * 1e3,
                        session.metrics.peak_stored_nodes,
                        session.metrics.conflicts_computed,
                    ));
                }
            }
        }
    }
    std::fs::write(&args.out, csv)?;
    println!("wrote {}", args.out.display());
    Ok(0)
}
