use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use mband_core::allocator::sweep_csv;
use mband_core::architectures::{metrics_csv, radar_csv};
use mband_core::channel::{read_channels, write_channels};
use mband_core::{
    build_se_table, builtin_indoor, builtin_outdoor, comparison_specs, evaluate, optimize, sweep,
    synth_generate, AllocationProblem, AvailabilityMask, ScenarioConfig, SeTable, SizeLadder,
    SnrConfig, SubbandPlan,
};

#[derive(Parser)]
#[command(name = "mband", version, about = "Multi-band MIMO antenna allocation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic multi-frequency channels.
    GenChannels(GenChannels),
    /// Average spectral efficiency per (MIMO size, subband) from a channel file.
    BuildTable(BuildTable),
    /// Best antenna allocation for one budget.
    Optimize(Optimize),
    /// Best allocations over a range of budgets, as stacked CSV.
    Sweep(Sweep),
    /// Compare the four front-end architectures and emit radar data.
    Compare(Compare),
    /// Write a builtin spectral-efficiency table as CSV.
    ExportBuiltin(ExportBuiltin),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Scenario {
    Indoor,
    Outdoor,
}

#[derive(Args)]
struct GenChannels {
    /// Scenario preset.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<Scenario>,
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the receive array size of the preset or config.
    #[arg(long)]
    rx: Option<usize>,
    /// Override the transmit array size of the preset or config.
    #[arg(long)]
    tx: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildTable {
    #[arg(long)]
    channels: PathBuf,
    /// Per-antenna SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: f64,
    /// `linear:<max>` or `square:<max side>`.
    #[arg(long, default_value = "linear:9", value_parser = parse_ladder)]
    ladder: LadderSpec,
    /// Keep the transmit side at this many antennas; the ladder then sizes
    /// only the receive side.
    #[arg(long)]
    fixed_tx: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TableSource {
    /// SE table CSV.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    table: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<Scenario>,
    /// Relabel a CSV table's rows with this ladder's size names.
    #[arg(long, requires = "table", value_parser = parse_ladder)]
    ladder: Option<LadderSpec>,
}

#[derive(Args)]
struct MaskArgs {
    /// Comma-separated subband frequencies (GHz) that are available.
    #[arg(long, value_delimiter = ',', conflicts_with = "exclude")]
    only: Option<Vec<f64>>,
    /// Comma-separated subband frequencies (GHz) that are unavailable.
    #[arg(long, value_delimiter = ',')]
    exclude: Option<Vec<f64>>,
}

#[derive(Args)]
struct Optimize {
    #[command(flatten)]
    source: TableSource,
    #[command(flatten)]
    mask: MaskArgs,
    #[arg(long)]
    budget: u32,
    /// JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    #[command(flatten)]
    source: TableSource,
    #[command(flatten)]
    mask: MaskArgs,
    /// `start:end[:step]`, inclusive.
    #[arg(long, default_value = "0:45", value_parser = parse_range)]
    budgets: BudgetRange,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Compare {
    #[command(flatten)]
    source: TableSource,
    #[command(flatten)]
    mask: MaskArgs,
    /// Half width of every subband in GHz.
    #[arg(long, default_value_t = mband_core::model::DEFAULT_HALF_WIDTH_GHZ)]
    half_width: f64,
    /// Raw metrics CSV.
    #[arg(long)]
    out: PathBuf,
    /// Radar coordinates CSV; defaults to `<out stem>.radar.csv`.
    #[arg(long)]
    radar_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportBuiltin {
    #[arg(long)]
    which: Scenario,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "kind", content = "max", rename_all = "lowercase")]
enum LadderSpec {
    Linear(u32),
    Square(u32),
}

impl LadderSpec {
    fn build(self) -> SizeLadder {
        match self {
            LadderSpec::Linear(n) => SizeLadder::linear(n),
            LadderSpec::Square(n) => SizeLadder::square(n),
        }
    }
}

fn parse_ladder(s: &str) -> Result<LadderSpec, String> {
    let (kind, max) = s
        .split_once(':')
        .ok_or_else(|| format!("expected linear:<max> or square:<max>, got '{s}'"))?;
    let max: u32 = max.parse().map_err(|_| format!("bad ladder size '{max}'"))?;
    if max == 0 {
        return Err("ladder size must be positive".into());
    }
    match kind {
        "linear" => Ok(LadderSpec::Linear(max)),
        "square" => Ok(LadderSpec::Square(max)),
        _ => Err(format!("unknown ladder kind '{kind}'")),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
struct BudgetRange {
    start: u32,
    end: u32,
    step: u32,
}

impl BudgetRange {
    fn budgets(self) -> Vec<u32> {
        (self.start..=self.end).step_by(self.step as usize).collect()
    }
}

fn parse_range(s: &str) -> Result<BudgetRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.parse::<u32>().map_err(|_| format!("bad budget '{p}'"));
    let (start, end, step) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(format!("expected start:end[:step], got '{s}'")),
    };
    if step == 0 || start > end {
        return Err(format!("empty budget range '{s}'"));
    }
    Ok(BudgetRange { start, end, step })
}

/// Provenance record written next to every output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_digest: String,
    seed: Option<u64>,
    tool_version: String,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
}

/// Collects the inputs of one run; the digest covers parameters and the
/// bytes of every input file, not the output locations.
struct Run {
    command: &'static str,
    hasher: Sha256,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
}

impl Run {
    fn new(command: &'static str, params: serde_json::Value) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(params.to_string().as_bytes());
        Run {
            command,
            hasher,
            seed: None,
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        Ok(bytes)
    }

    fn write_output(&mut self, path: &Path, contents: &[u8]) -> Result<()> {
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn finish(self, manifest_path: &Path) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            config_digest: hex::encode(self.hasher.finalize()),
            seed: self.seed,
            tool_version: format!("mband {}", env!("CARGO_PKG_VERSION")),
            outputs: self.outputs,
            notes: self.notes,
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(manifest_path, text)
            .with_context(|| format!("writing {}", manifest_path.display()))
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn load_table(run: &mut Run, source: &TableSource) -> Result<SeTable> {
    if let Some(which) = source.builtin {
        return Ok(match which {
            Scenario::Indoor => builtin_indoor(),
            Scenario::Outdoor => builtin_outdoor(),
        });
    }
    let path = source.table.as_ref().expect("clap enforces a table source");
    let bytes = run.read_input(path)?;
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let table = SeTable::from_csv(&text, path.display().to_string())
        .with_context(|| format!("parsing {}", path.display()))?;
    match source.ladder {
        Some(spec) => Ok(table.relabeled(spec.build())?),
        None => Ok(table),
    }
}

fn column(table: &SeTable, f: f64) -> Result<u32> {
    table
        .column_of(f)
        .map(|c| c as u32)
        .ok_or_else(|| anyhow!("no subband at {f} GHz; table has {:?}", table.subband_centers()))
}

fn build_mask(table: &SeTable, args: &MaskArgs) -> Result<AvailabilityMask> {
    let n = table.num_subbands();
    if let Some(only) = &args.only {
        let ids = only.iter().map(|&f| column(table, f)).collect::<Result<Vec<_>>>()?;
        return Ok(AvailabilityMask::only(n, &ids));
    }
    let mut flags = vec![true; n];
    for &f in args.exclude.iter().flatten() {
        flags[column(table, f)? as usize] = false;
    }
    Ok(AvailabilityMask::from_flags(&flags))
}

fn source_params(source: &TableSource, mask: &MaskArgs) -> serde_json::Value {
    json!({
        "table": source.table.is_some(),
        "builtin": source.builtin,
        "ladder": source.ladder,
        "only": mask.only,
        "exclude": mask.exclude,
    })
}

fn gen_channels(args: GenChannels) -> Result<()> {
    let mut run = Run::new(
        "gen-channels",
        json!({ "preset": args.preset, "seed": args.seed, "rx": args.rx, "tx": args.tx }),
    );
    let mut cfg = match (&args.preset, &args.config) {
        (Some(Scenario::Indoor), _) => ScenarioConfig::indoor(),
        (Some(Scenario::Outdoor), _) => ScenarioConfig::outdoor(),
        (None, Some(path)) => {
            let bytes = run.read_input(path)?;
            let text = String::from_utf8(bytes)
                .with_context(|| format!("{} is not UTF-8", path.display()))?;
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?
        }
        (None, None) => unreachable!("clap requires a preset or config"),
    };
    if let Some(rx) = args.rx {
        cfg.rx_antennas = rx;
    }
    if let Some(tx) = args.tx {
        cfg.tx_antennas = tx;
    }
    let set = synth_generate(&cfg, args.seed).context("invalid scenario")?;
    let mut buf = Vec::new();
    write_channels(&set, &mut buf)?;
    run.seed = Some(args.seed);
    run.notes.push(format!(
        "{} records, {} users, {}x{} arrays",
        set.len(),
        cfg.num_users,
        cfg.rx_antennas,
        cfg.tx_antennas
    ));
    run.write_output(&args.out, &buf)?;
    run.finish(&manifest_path(&args.out))
}

fn build_table(args: BuildTable) -> Result<()> {
    let mut run = Run::new(
        "build-table",
        json!({ "snr_db": args.snr_db, "ladder": args.ladder, "fixed_tx": args.fixed_tx }),
    );
    let bytes = run.read_input(&args.channels)?;
    let set = read_channels(bytes.as_slice())
        .with_context(|| format!("parsing {}", args.channels.display()))?;
    let ladder = args.ladder.build();
    let sizes = match args.fixed_tx {
        Some(tx) => ladder.fixed_tx_sizes(tx),
        None => ladder.symmetric_sizes(),
    };
    let snr = SnrConfig::from_db(args.snr_db)?;
    let table = build_se_table(&set, &ladder, &sizes, snr)?;
    run.notes.push(format!("rho = {:e} per antenna", snr.rho()));
    run.write_output(&args.out, table.to_csv().as_bytes())?;
    run.finish(&manifest_path(&args.out))
}

fn optimize_cmd(args: Optimize) -> Result<()> {
    let mut params = source_params(&args.source, &args.mask);
    params["budget"] = json!(args.budget);
    let mut run = Run::new("optimize", params);
    let table = load_table(&mut run, &args.source)?;
    let mask = build_mask(&table, &args.mask)?;
    let problem = AllocationProblem::new(&table, args.budget, mask.clone())?;
    let result = optimize(&problem);
    let text = serde_json::to_string_pretty(&result.to_json(&table, args.budget, &mask))? + "\n";
    match &args.out {
        Some(out) => {
            run.write_output(out, text.as_bytes())?;
            run.finish(&manifest_path(out))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep_cmd(args: Sweep) -> Result<()> {
    let mut params = source_params(&args.source, &args.mask);
    params["budgets"] = json!(args.budgets);
    let mut run = Run::new("sweep", params);
    let table = load_table(&mut run, &args.source)?;
    let mask = build_mask(&table, &args.mask)?;
    let budgets = args.budgets.budgets();
    let results = sweep(&table, &budgets, &mask)?;
    run.write_output(&args.out, sweep_csv(&table, &budgets, &results).as_bytes())?;
    run.finish(&manifest_path(&args.out))
}

fn compare_cmd(args: Compare) -> Result<()> {
    let mut params = source_params(&args.source, &args.mask);
    params["half_width"] = json!(args.half_width);
    let mut run = Run::new("compare", params);
    let table = load_table(&mut run, &args.source)?;
    let mask = build_mask(&table, &args.mask)?;
    let plan = SubbandPlan::from_centers(table.subband_centers(), args.half_width)?;
    let specs = comparison_specs(&plan)?;
    let largest = specs.iter().map(|s| s.total_antennas()).max().unwrap_or(0);
    let max_cost = table.ladder().max_cost();
    if max_cost < mband_core::architectures::ARRAY_ANTENNAS {
        run.notes.push(format!(
            "ladder truncated: table tops out at {} ({} antennas) while arrays hold up to {} per subband",
            table.ladder().label(table.ladder().len() - 1),
            max_cost,
            mband_core::architectures::ARRAY_ANTENNAS
        ));
    } else {
        run.notes.push(format!("ladder covers full arrays (max cost {max_cost}, {largest} antennas total)"));
    }
    let metrics = specs
        .iter()
        .map(|s| evaluate(s, &plan, &table, &mask))
        .collect::<Result<Vec<_>, _>>()?;
    let radar_out = args.radar_out.clone().unwrap_or_else(|| {
        let stem = args.out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        args.out.with_file_name(format!("{stem}.radar.csv"))
    });
    if radar_out == args.out {
        bail!("radar output would overwrite the metrics output");
    }
    run.write_output(&args.out, metrics_csv(&metrics).as_bytes())?;
    run.write_output(&radar_out, radar_csv(&metrics)?.as_bytes())?;
    run.finish(&manifest_path(&args.out))
}

fn export_builtin(args: ExportBuiltin) -> Result<()> {
    let mut run = Run::new("export-builtin", json!({ "which": args.which }));
    let table = match args.which {
        Scenario::Indoor => builtin_indoor(),
        Scenario::Outdoor => builtin_outdoor(),
    };
    run.write_output(&args.out, table.to_csv().as_bytes())?;
    run.finish(&manifest_path(&args.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenChannels(a) => gen_channels(a),
        Command::BuildTable(a) => build_table(a),
        Command::Optimize(a) => optimize_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::ExportBuiltin(a) => export_builtin(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
