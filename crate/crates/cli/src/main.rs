use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use risoran::e2::{RanEmulator, RanOptions, RisController, TcpTransport};
use risoran::harness::{
    build_trace, run_coverage, run_mobility, summarize_grid, summarize_trace, CoverageGrid, EventRecord,
    ExperimentTrace, MobilityOptions, Summary, TransportKind,
};
use risoran::phy::{array_factor, beam_metrics, default_cut};
use risoran::scenario::{Scenario, ScenarioConfig};
use risoran::xapp::{Algorithm, XappEndpoint};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "risoran", version, about = "RIS-assisted mmWave link and O-RAN control-loop experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// RIS codebook generation.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
    /// Coverage maps with and without the RIS.
    Coverage {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Closed-loop mobility runs.
    Mobility {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Summarize a trace or coverage CSV.
    Summarize {
        input: PathBuf,
        /// Event log from a standalone xApp to merge into a trace.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one endpoint as its own process over TCP.
    Serve {
        role: Role,
        #[command(flatten)]
        common: Common,
        /// Give up connecting to a peer after this many seconds.
        #[arg(long, default_value_t = 30)]
        connect_timeout_s: u64,
    },
}

#[derive(Subcommand)]
enum CodebookAction {
    Build {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum RunAction {
    Run {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    Ris,
    Ran,
    Xapp,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Neighbor,
    Trend,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Memory,
    Tcp,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file, or a preset name (indoor, outdoor).
    #[arg(long, default_value = "outdoor")]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "memory")]
    transport: TransportArg,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    /// RIS codebook step in degrees.
    #[arg(long)]
    ris_step: Option<f64>,
    #[arg(long)]
    report_interval_ms: Option<u64>,
    /// Reports between UE-beam probe cycles; 0 keeps the UE beam fixed.
    #[arg(long)]
    ue_adapt_period: Option<usize>,
    /// Keep the UE at its first waypoint.
    #[arg(long)]
    static_ue: bool,
}

impl Common {
    fn scenario_config(&self) -> Result<ScenarioConfig> {
        let mut c = ScenarioConfig::resolve(&self.config)?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(a) = self.algorithm {
            c.xapp.algorithm = match a {
                AlgorithmArg::Neighbor => Algorithm::NeighborScan,
                AlgorithmArg::Trend => Algorithm::TrendTriggered,
                AlgorithmArg::None => Algorithm::Disabled,
            };
        }
        if let Some(s) = self.ris_step {
            c.xapp.ris_step_deg = s;
        }
        if let Some(ms) = self.report_interval_ms {
            c.ran.report_interval_ms = ms;
        }
        if let Some(p) = self.ue_adapt_period {
            c.xapp.ue_adapt_period = p;
        }
        Ok(c)
    }

    fn scenario(&self) -> Result<Scenario> {
        Ok(self.scenario_config()?.build()?)
    }

    /// Builds the scenario and records the effective config next to the outputs.
    fn prepare(&self) -> Result<(Scenario, PathBuf)> {
        let sc = self.scenario()?;
        let dir = self.out_dir()?;
        fs::write(dir.join("scenario.toml"), sc.config.to_toml_string()?)?;
        Ok((sc, dir))
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn ran_options(&self) -> RanOptions {
        RanOptions {
            static_ue: self.static_ue,
        }
    }
}

fn write_json(path: &Path, value: &Summary) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn codebook_build(common: &Common) -> Result<()> {
    let (sc, dir) = common.prepare()?;
    let cb = &sc.codebook;
    cb.write_to(fs::File::create(dir.join("codebook.risc"))?)?;
    let grid = default_cut();
    let mut table = fs::File::create(dir.join("codebook.csv"))?;
    writeln!(table, "index,angle_deg,peak_angle_deg,hpbw_deg,sll_db,quantization_lobe_db")?;
    for cw in cb.codewords() {
        let m = beam_metrics(&array_factor(cb.aperture(), cw, cb.incident(), &grid)?, cw.steering.reflected)?;
        writeln!(
            table,
            "{},{},{},{},{},{}",
            cw.index,
            cb.angle_of(cw.index),
            m.peak_angle,
            m.hpbw_deg,
            m.sll_db,
            m.quantization_lobe_db
        )?;
    }
    println!("{} codewords -> {}", cb.len(), dir.display());
    Ok(())
}

fn coverage_run(common: &Common) -> Result<()> {
    let (sc, dir) = common.prepare()?;
    let grid = run_coverage(&sc)?;
    grid.save(&dir.join("coverage.csv"))?;
    let s = summarize_grid(&grid)?;
    write_json(&dir.join("coverage_summary.json"), &Summary::Grid(s.clone()))?;
    println!(
        "{} cells, mean gain {:.2} dB, {:.0}% >= 10 dB -> {}",
        s.cells,
        s.mean_gain_db,
        100.0 * s.fraction_gain_at_least_10db,
        dir.display()
    );
    Ok(())
}

fn mobility_run(common: &Common) -> Result<()> {
    let (sc, dir) = common.prepare()?;
    let transport = match common.transport {
        TransportArg::Memory => TransportKind::Memory,
        TransportArg::Tcp => TransportKind::Tcp,
    };
    let run = run_mobility(
        &sc,
        MobilityOptions {
            transport,
            ran: common.ran_options(),
        },
    )?;
    run.trace.save(&dir.join("trace.csv"))?;
    EventRecord::save_all(&EventRecord::from_logged(&run.events), &dir.join("events.csv"))?;
    if !run.trace.is_empty() {
        let s = summarize_trace(&run.trace)?;
        write_json(&dir.join("summary.json"), &Summary::Trace(s.clone()))?;
        println!(
            "{} reports, mean RSRP {:.2} dBm, {} detaches, {} RIS commands -> {}",
            s.rows,
            s.mean_rsrp_dbm,
            s.detach_count,
            s.ris_command_count,
            dir.display()
        );
    }
    match run.error {
        Some(e) => Err(format!("run aborted, partial trace kept: {e}").into()),
        None => Ok(()),
    }
}

fn summarize(input: &Path, events: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let mut header = String::new();
    BufReader::new(fs::File::open(input)?).read_line(&mut header)?;
    let summary = match header.trim_end() {
        h if h == ExperimentTrace::HEADER => {
            let mut trace = ExperimentTrace::load(input)?;
            if let Some(e) = events {
                trace.merge_events(&EventRecord::load_all(e)?);
            }
            Summary::Trace(summarize_trace(&trace)?)
        }
        h if h == CoverageGrid::HEADER => Summary::Grid(summarize_grid(&CoverageGrid::load(input)?)?),
        _ => return Err(format!("{} is neither a trace nor a coverage grid", input.display()).into()),
    };
    match out {
        Some(p) => write_json(p, &summary),
        None => match writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&summary)?) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn connect_retry(addr: impl ToSocketAddrs + Copy, timeout: Duration) -> Result<TcpTransport> {
    let start = Instant::now();
    loop {
        match TcpTransport::connect(addr) {
            Ok(t) => return Ok(t),
            Err(e) if start.elapsed() >= timeout => return Err(e.into()),
            Err(_) => std::thread::sleep(Duration::from_millis(50)),
        }
    }
}

fn serve(role: Role, common: &Common, timeout: Duration) -> Result<()> {
    let sc = common.scenario()?;
    let ports = &sc.config.ports;
    let host = ports.host.as_str();
    match role {
        Role::Ris => {
            let listener = TcpListener::bind((host, ports.ris))?;
            log::info!("RIS controller listening on {}", listener.local_addr()?);
            let mut link = TcpTransport::accept(&listener)?;
            let mut c = RisController::new(sc.codebook.clone(), sc.xapp.initial_ris_index)?;
            c.serve(&mut link)?;
            println!("RIS controller applied {} commands", c.applied_count());
        }
        Role::Xapp => {
            let mut ris = connect_retry((host, ports.ris), timeout)?;
            let listener = TcpListener::bind((host, ports.e2))?;
            log::info!("xApp listening for the RAN on {}", listener.local_addr()?);
            let mut e2 = TcpTransport::accept(&listener)?;
            let mut x = XappEndpoint::new(sc.xapp.clone())?;
            let r = x.run(&mut e2, &mut ris);
            let records = EventRecord::from_logged(x.events());
            if common.out.is_some() {
                EventRecord::save_all(&records, &common.out_dir()?.join("events.csv"))?;
            }
            r?;
            println!("xApp logged {} events", records.len());
        }
        Role::Ran => {
            let mut link = connect_retry((host, ports.e2), timeout)?;
            let mut ran = RanEmulator::new(&sc, common.ran_options())?;
            let r = ran.run(&mut link);
            drop(link);
            let trace = build_trace(&sc.codebook, ran.samples(), &[]);
            if common.out.is_some() {
                trace.save(&common.out_dir()?.join("trace.csv"))?;
            }
            r?;
            println!("RAN sent {} reports", trace.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Codebook {
            action: CodebookAction::Build { common },
        } => codebook_build(common),
        Command::Coverage {
            action: RunAction::Run { common },
        } => coverage_run(common),
        Command::Mobility {
            action: RunAction::Run { common },
        } => mobility_run(common),
        Command::Summarize { input, events, out } => summarize(input, events.as_deref(), out.as_deref()),
        Command::Serve {
            role,
            common,
            connect_timeout_s,
        } => serve(*role, common, Duration::from_secs(*connect_timeout_s)),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
