use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pnc_marc::channel::FadingProfile;
use pnc_marc::experiments::config::{parse_complex, parse_config, parse_snr_list};
use pnc_marc::experiments::equiv::check_equivalence;
use pnc_marc::experiments::report::{curve_to_csv, emit_csv, emit_plot_script, metadata, version_string};
use pnc_marc::experiments::scenario::{reproduce, Scenario};
use pnc_marc::experiments::{run_sweep, DecoderKind, ExperimentError, SweepSpec};
use pnc_marc::netcode::{check_exclusive_law, MapKind};
use pnc_marc::numerics::Complex;
use pnc_marc::scheme::{
    check_full_rank_condition, check_hr_orthogonal, fast_route, weight_matrices, SchemeConstants,
    FULL_RANK_TOL, HR_TOL,
};
use pnc_marc::signal::SignalSet;

#[derive(Parser)]
#[command(name = "pnc-marc", version, about = "PNC decoders and SEP simulation for the two-user MARC")]
struct Cli {
    /// Worker threads for Monte Carlo runs (0 = rayon default).
    #[arg(long, global = true, env = "PNC_MARC_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an SEP curve and write it as CSV.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a matplotlib script that plots the CSV.
        #[arg(long, requires = "out")]
        plot: Option<PathBuf>,
    },
    /// Run the algebraic checks on the configured constants and maps.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Compare the fast decoder with the exhaustive decoder frame by frame.
    Equiv {
        #[command(flatten)]
        spec: SpecArgs,
        /// Frames per SNR point.
        #[arg(long, default_value_t = 25_000)]
        frames: u64,
    },
    /// PNC against the CFNC baseline for a fading preset (or `all`).
    Reproduce {
        scenario: String,
        #[command(flatten)]
        spec: SpecArgs,
        /// Directory for CSVs and plot scripts.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print a Latin square as a text grid.
    Latin {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value = "modulo")]
        map: MapKind,
        #[arg(long)]
        transpose: bool,
    },
}

#[derive(Clone, Debug)]
struct SnrList(Vec<f64>);

fn parse_snr_arg(v: &str) -> Result<SnrList, String> {
    parse_snr_list(v).map(SnrList)
}

/// Sweep parameters. Precedence: built-in defaults, then `--config`, then flags.
#[derive(Args, Clone, Default)]
struct SpecArgs {
    /// key = value file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma list or start:step:stop, in dB.
    #[arg(long, value_parser = parse_snr_arg, allow_hyphen_values = true)]
    snr_db: Option<SnrList>,
    #[arg(long)]
    trials: Option<u64>,
    /// Early stop per point after this many joint errors (0 disables).
    #[arg(long)]
    max_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    map: Option<MapKind>,
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// equal, sr-strong or rd-strong.
    #[arg(long)]
    profile: Option<Scenario>,
    #[arg(long, allow_hyphen_values = true)]
    var_ar_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    var_br_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    var_ad_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    var_bd_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    var_rd_db: Option<f64>,
    /// Complex constants as re,im.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a: Option<Complex>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    b: Option<Complex>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    c: Option<Complex>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    d: Option<Complex>,
    /// CFNC combining coefficient, re,im.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    theta: Option<Complex>,
    #[arg(long)]
    log_weight: Option<f64>,
}

impl SpecArgs {
    fn resolve(&self) -> Result<SweepSpec, ExperimentError> {
        let spec = self.build()?;
        spec.validate()?;
        Ok(spec)
    }

    /// Like [`SpecArgs::resolve`] but without the sweep-level validation.
    fn build(&self) -> Result<SweepSpec, ExperimentError> {
        let mut spec = SweepSpec::example_default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                path: path.display().to_string(),
                source,
            })?;
            spec = parse_config(&text, spec)?;
        }
        if let Some(SnrList(v)) = &self.snr_db {
            spec.snr_points_db = v.clone();
        }
        if let Some(v) = self.trials {
            spec.trials_per_point = v;
        }
        if let Some(v) = self.max_errors {
            spec.max_errors = (v > 0).then_some(v);
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.m {
            spec.m = v;
        }
        if let Some(v) = self.map {
            spec.map = v;
        }
        if let Some(v) = self.decoder {
            spec.decoder = v;
        }
        if let Some(v) = self.theta {
            spec.theta = v;
        }
        if let Some(v) = self.log_weight {
            spec.log_weight = v;
        }
        if let Some(p) = self.profile {
            spec.profile = p.profile();
        }
        let mut db = spec.profile.to_db();
        for (slot, v) in db
            .iter_mut()
            .zip([self.var_ar_db, self.var_br_db, self.var_ad_db, self.var_bd_db, self.var_rd_db])
        {
            if let Some(v) = v {
                *slot = v;
            }
        }
        spec.profile = FadingProfile::from_db(db[0], db[1], db[2], db[3], db[4])?;
        let k = &spec.constants;
        spec.constants = SchemeConstants::new(
            self.a.unwrap_or(k.a()),
            self.b.unwrap_or(k.b()),
            self.c.unwrap_or(k.c()),
            self.d.unwrap_or(k.d()),
            1.0,
        )?;
        Ok(spec)
    }
}

fn cmd_sweep(spec: &SweepSpec, out: Option<&Path>, plot: Option<&Path>) -> Result<(), ExperimentError> {
    let curve = run_sweep(spec)?;
    let meta = metadata(spec);
    match out {
        Some(path) => {
            emit_csv(&curve, &meta, path)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", curve_to_csv(&curve, &meta)),
    }
    if let (Some(plot), Some(out)) = (plot, out) {
        // The script resolves the CSV relative to its own directory.
        let dir = plot.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let csv_name = match (dir.canonicalize(), out.canonicalize()) {
            (Ok(d), Ok(abs)) => abs
                .strip_prefix(&d)
                .map(|p| p.display().to_string())
                .unwrap_or_else(|_| abs.display().to_string()),
            _ => out.display().to_string(),
        };
        emit_plot_script(
            &[(spec.decoder.name().to_string(), csv_name)],
            &format!("{}-PSK, {} decoder", spec.m, spec.decoder),
            plot,
        )?;
        eprintln!("wrote {}", plot.display());
    }
    Ok(())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

fn cmd_verify(spec: &SweepSpec) -> Result<bool, ExperimentError> {
    let mut all_ok = true;
    for kind in [MapKind::Modulo, MapKind::Xor] {
        let sq = kind.build(spec.m)?;
        let ok = check_exclusive_law(&sq.rows());
        all_ok &= ok;
        println!("exclusive law, {} map, M={}: {}", kind.name(), spec.m, mark(ok));
    }
    let s = SignalSet::psk(spec.m)?;
    let k = &spec.constants;
    let full_rank = check_full_rank_condition(k, &s, FULL_RANK_TOL);
    println!(
        "full-rank condition, {}-PSK, a={} b={} c={} d={}: {}",
        spec.m,
        k.a(),
        k.b(),
        k.c(),
        k.d(),
        mark(full_rank)
    );
    let w = weight_matrices(k);
    let hr_a = check_hr_orthogonal(&w.w_a, &w.w_r, HR_TOL).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
    let hr_b = check_hr_orthogonal(&w.w_b, &w.w_r, HR_TOL).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
    println!("H-R orthogonal (W_A, W_R): {}", mark(hr_a));
    println!("H-R orthogonal (W_B, W_R): {}", mark(hr_b));
    match fast_route(k) {
        Some(route) => println!("fast decoder route: {route:?}"),
        None => println!("fast decoder route: none"),
    }
    Ok(all_ok && full_rank)
}

fn cmd_equiv(spec: &SweepSpec, frames: u64) -> Result<bool, ExperimentError> {
    let r = check_equivalence(spec, frames)?;
    println!(
        "frames {}  pair mismatches {}  branch mismatches {}",
        r.frames, r.pair_mismatches, r.branch_mismatches
    );
    if r.frames > 0 {
        println!(
            "evaluations per frame: fast {}  exhaustive {}",
            r.fast_evaluations / r.frames,
            r.exhaustive_evaluations / r.frames
        );
    }
    if let Some(m) = r.first_mismatch {
        println!(
            "first mismatch at {} dB, trial {}: fast {:?} exhaustive {:?}",
            m.snr_db, m.trial, m.fast, m.exhaustive
        );
    }
    Ok(r.identical())
}

fn cmd_reproduce(which: &str, spec: &SweepSpec, out_dir: Option<&Path>) -> Result<(), ExperimentError> {
    let scenarios: Vec<Scenario> = if which.eq_ignore_ascii_case("all") {
        Scenario::ALL.to_vec()
    } else {
        vec![which.parse().map_err(ExperimentError::InvalidSpec)?]
    };
    for s in scenarios {
        let report = reproduce(s, spec, out_dir)?;
        print!("{}", report.summary());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, ExperimentError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| ExperimentError::InvalidSpec(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Sweep { spec, out, plot } => {
            cmd_sweep(&spec.resolve()?, out.as_deref(), plot.as_deref())?;
            Ok(true)
        }
        Command::Verify { spec } => cmd_verify(&spec.build()?),
        Command::Equiv { spec, frames } => {
            let mut spec = spec.resolve()?;
            spec.decoder = DecoderKind::Fast;
            cmd_equiv(&spec, frames)
        }
        Command::Reproduce { scenario, spec, out_dir } => {
            cmd_reproduce(&scenario, &spec.resolve()?, out_dir.as_deref())?;
            Ok(true)
        }
        Command::Latin { m, map, transpose } => {
            let sq = map.build(m)?;
            let sq = if transpose { sq.transpose() } else { sq };
            print!("{}", sq.to_text());
            println!("exclusive law: {}", mark(check_exclusive_law(&sq.rows())));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}: error: {e}", version_string());
            ExitCode::from(2)
        }
    }
}
