//! Argument handling for the `pnc-sim` binary.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use pnc_core::algebra::{Alphabet, AlphabetSpec};
use pnc_core::channel::ChannelModel;
use pnc_core::harness::{
    config_hash, csv_string, format_decimal, verify, write_csv, write_sidecar, CodeSpec, HarnessError, Modulation, Scheme,
    Simulation, SimulationConfig, SweepResult,
};
use pnc_core::ldpc::CheckUpdate;
use pnc_core::pnc::{
    build_superimposed_set, detect_ambiguity, effective_min_distance, select_coefficients_for_set, CoefficientStrategy,
    NcRule, MERGE_TOLERANCE,
};

#[derive(Parser, Debug)]
#[command(name = "pnc-sim", version, about = "Channel-coded physical-layer network coding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo BER/FER sweep of one relay receiver.
    Run(Box<RunArgs>),
    /// Superimposed constellation and ambiguity report as CSV.
    InspectConstellation(InspectArgs),
    /// Oracle and property checks on toy instances.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModKind {
    Psk,
    Pam,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChannelKind {
    Awgn,
    BlockRayleigh,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UpdateKind {
    Direct,
    Fft,
    Ems,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyKind {
    Selected,
    AllPairs,
}

#[derive(Args, Debug)]
struct ModArgs {
    #[arg(long = "mod", value_enum, default_value = "psk")]
    modulation: ModKind,
    /// Constellation order.
    #[arg(long = "M", default_value_t = 8)]
    m: usize,
    /// Phase offset of user 1's PSK constellation.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rotation_a: f64,
    /// Phase offset of user 2's PSK constellation [default: pi/M].
    #[arg(long, allow_negative_numbers = true)]
    rotation_b: Option<f64>,
    /// Comma-separated gaps between neighbouring PAM points of user 1.
    #[arg(long, value_delimiter = ',')]
    spacings_a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    spacings_b: Option<Vec<f64>>,
}

impl ModArgs {
    fn modulation(&self) -> Modulation {
        let m = self.m;
        match self.modulation {
            ModKind::Psk => Modulation::Psk {
                m,
                rotation_a: self.rotation_a,
                rotation_b: self.rotation_b.unwrap_or(PI / m.max(1) as f64),
            },
            ModKind::Pam => {
                let uniform = vec![1.0; m.saturating_sub(1)];
                Modulation::Pam {
                    m,
                    spacings_a: self.spacings_a.clone().unwrap_or_else(|| uniform.clone()),
                    spacings_b: self.spacings_b.clone().unwrap_or(uniform),
                }
            }
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// xor-cd, iter-xor-cd, mud-xor, nc-cd, cd-nc or mud-nc.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    #[command(flatten)]
    modulation: ModArgs,
    /// Code length in code symbols [default: twice the information length].
    #[arg(long)]
    code_n: Option<usize>,
    /// Information length in code symbols [default: 204 information bits].
    #[arg(long)]
    code_k: Option<usize>,
    /// Column weight [default: 3 for binary codes, 2 otherwise].
    #[arg(long)]
    dv: Option<usize>,
    /// Row weight [default: dv * n / (n - k)].
    #[arg(long)]
    dc: Option<usize>,
    /// Code alphabet, e.g. gf8 or z4 [default: GF(2) for bit-interleaved
    /// schemes, GF(M) otherwise].
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long, default_value_t = 1)]
    code_seed: u64,
    #[arg(long, value_enum, default_value = "awgn")]
    channel: ChannelKind,
    /// Fading blocks per codeword.
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// SNR grid in dB as start:stop:step (inclusive), or a single value.
    #[arg(long, default_value = "0:10:1", allow_hyphen_values = true)]
    snr: String,
    #[arg(long, default_value_t = 30)]
    min_frame_errors: u64,
    #[arg(long, default_value_t = 10_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 6)]
    outer_iters: usize,
    #[arg(long, default_value_t = 25)]
    inner_iters: usize,
    #[arg(long, default_value_t = 150)]
    max_iters: usize,
    #[arg(long, value_enum, default_value = "direct")]
    check_update: UpdateKind,
    /// EMS list size [default: alphabet size].
    #[arg(long)]
    nm: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    ems_offset: f64,
    /// Weight of new check messages, 1 disables damping.
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    /// Coefficient search order for NC-CD.
    #[arg(long, value_enum, default_value = "selected")]
    nc_strategy: StrategyKind,
    /// Extrinsic-exchange rounds of MUD-XOR, 0 for one decode per user.
    #[arg(long, default_value_t = 3)]
    mud_rounds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Result CSV [default: stdout]. A `.json` sidecar with the resolved
    /// configuration is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write 0 in the seconds column so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Drop channel noise.
    #[arg(long)]
    noiseless: bool,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[command(flatten)]
    modulation: ModArgs,
    /// Gain of user 2 relative to user 1 as magnitude,phase.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1.0, 0.0], allow_negative_numbers = true)]
    gain_b: Vec<f64>,
    /// Alphabet for the coefficient search [default: GF(M) when M is a power
    /// of two, Z_M otherwise].
    #[arg(long)]
    alphabet: Option<String>,
    /// Set CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ambiguity report CSV [default: stderr].
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Directory for scratch files [default: a temporary directory].
    #[arg(long)]
    scratch: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

/// `start:stop:step` with an inclusive stop, or one number.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad SNR '{s}': {e}"));
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) || stop < start {
                return Err(format!("SNR grid '{text}' needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // round to kill drift from repeated addition
            Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
        }
        _ => Err(format!("SNR grid '{text}' is not start:stop:step")),
    }
}

fn parse_alphabet(text: &str) -> Result<AlphabetSpec, HarnessError> {
    AlphabetSpec::parse(text).map_err(|e| HarnessError::Config(e.to_string()))
}

fn default_alphabet(m: usize) -> Result<AlphabetSpec, HarnessError> {
    let spec = if m.is_power_of_two() { AlphabetSpec::gf(m.trailing_zeros() as u8) } else { AlphabetSpec::ring(m) };
    spec.map_err(|e| HarnessError::Config(e.to_string()))
}

fn build_config(a: &RunArgs) -> Result<SimulationConfig, HarnessError> {
    let modulation = a.modulation.modulation();
    let m = modulation.order();
    if !m.is_power_of_two() || m < 2 {
        return Err(HarnessError::Config(format!("constellation order {m} is not a power of two")));
    }
    let alphabet = match &a.alphabet {
        Some(s) => parse_alphabet(s)?,
        None if a.scheme.is_binary() => AlphabetSpec::binary(),
        None => default_alphabet(m)?,
    };
    let bits_per_code_symbol = alphabet.size().trailing_zeros().max(1) as usize;
    let k = a.code_k.unwrap_or(204usize.div_ceil(bits_per_code_symbol));
    let n = a.code_n.unwrap_or(2 * k);
    if k == 0 || n <= k {
        return Err(HarnessError::Config(format!("need 0 < k < n, got n={n}, k={k}")));
    }
    let dv = a.dv.unwrap_or(if alphabet.is_binary() { 3 } else { 2 });
    let dc = match a.dc {
        Some(dc) => dc,
        None if (dv * n).is_multiple_of(n - k) => dv * n / (n - k),
        None => return Err(HarnessError::Config(format!("dv*n = {} is not a multiple of n-k = {}; pass --dc", dv * n, n - k))),
    };
    let channel = match a.channel {
        ChannelKind::Awgn => ChannelModel::Awgn,
        ChannelKind::BlockRayleigh => ChannelModel::BlockRayleigh { blocks: a.blocks },
    };
    let code = CodeSpec { n, k, dv, dc, alphabet, seed: a.code_seed };
    let mut c = SimulationConfig::new(a.scheme, modulation, code, channel);
    c.snr_grid = parse_snr_grid(&a.snr).map_err(HarnessError::Config)?;
    c.stopping.min_frame_errors = a.min_frame_errors;
    c.stopping.max_frames = a.max_frames;
    c.outer_iters = a.outer_iters;
    c.inner_iters = a.inner_iters;
    c.decoder.max_iter = a.max_iters;
    c.decoder.damping = a.damping;
    c.decoder.ems_offset = a.ems_offset;
    let message_q = if a.scheme == Scheme::CdNc { alphabet.size().pow(2) } else { alphabet.size() };
    c.decoder.check_update = match a.check_update {
        UpdateKind::Direct => CheckUpdate::Direct,
        UpdateKind::Fft => CheckUpdate::Fft,
        UpdateKind::Ems => CheckUpdate::Ems { list_size: a.nm.unwrap_or(message_q) },
    };
    c.mud_rounds = a.mud_rounds;
    c.nc_strategy = match a.nc_strategy {
        StrategyKind::Selected => CoefficientStrategy::Selected,
        StrategyKind::AllPairs => CoefficientStrategy::AllPairs,
    };
    c.master_seed = a.seed;
    c.noiseless = a.noiseless;
    c.record_timing = !a.no_timing;
    Ok(c)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn run(a: &RunArgs) -> Result<(), HarnessError> {
    let config = build_config(a)?;
    let sim = Simulation::with_threads(config.clone(), a.threads)?;
    let mut points = Vec::new();
    for &snr in &config.snr_grid {
        let p = sim.run_point(snr)?;
        eprintln!(
            "{} dB: {} frames, {} frame errors, BER {}, FER {}",
            format_decimal(snr),
            p.frames,
            p.frame_errors,
            format_decimal(p.ber),
            format_decimal(p.fer)
        );
        points.push(p);
    }
    let result = SweepResult { config_hash: config_hash(&config), master_seed: config.master_seed, points };
    match &a.out {
        Some(path) => {
            write_csv(&result, path)?;
            write_sidecar(&config, &result, &sidecar_path(path))
        }
        None => {
            print!("{}", csv_string(&result));
            Ok(())
        }
    }
}

fn write_or(path: Option<&Path>, text: &str, stdout: bool) -> Result<(), HarnessError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| HarnessError::Io { path: p.to_path_buf(), source }),
        None if stdout => {
            print!("{text}");
            Ok(())
        }
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn inspect(a: &InspectArgs) -> Result<(), HarnessError> {
    let modulation = a.modulation.modulation();
    let (ca, cb) = modulation.constellations()?;
    let one = Complex64::new(1.0, 0.0);
    let h2 = Complex64::from_polar(a.gain_b[0], a.gain_b[1]);
    let set = build_superimposed_set(&ca, &cb, one, h2, MERGE_TOLERANCE).map_err(|e| HarnessError::Config(e.to_string()))?;
    let spec = match &a.alphabet {
        Some(s) => parse_alphabet(s)?,
        None => default_alphabet(modulation.order())?,
    };
    if spec.size() != modulation.order() {
        return Err(HarnessError::Config(format!("{spec} does not match {}-point constellations", modulation.order())));
    }
    let selected = select_coefficients_for_set(&set, &Alphabet::shared(spec));
    write_or(a.out.as_deref(), &set.to_csv(&NcRule::BitXor), true)?;
    let mut report = String::from("rule,points,unique_pair,exclusive,ambiguous_entries,effective_min_distance\n");
    for (name, rule) in [("xor".to_string(), NcRule::BitXor), (format!("linear {selected}"), NcRule::Linear(selected.clone()))] {
        let r = detect_ambiguity(&set, &rule);
        report.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            set.entries().len(),
            r.unique_pair,
            r.is_exclusive,
            r.ambiguous_entries.len(),
            format_decimal(effective_min_distance(&set, &rule))
        ));
    }
    write_or(a.report.as_deref(), &report, false)
}

fn verify_cmd(a: &VerifyArgs) -> Result<bool, HarnessError> {
    let tmp;
    let dir = match &a.scratch {
        Some(d) => d.as_path(),
        None => {
            tmp = tempfile::tempdir().map_err(|e| HarnessError::Runtime(e.to_string()))?;
            tmp.path()
        }
    };
    let mut ok = true;
    for r in verify::toy_suite(dir) {
        println!("{r}");
        let _ = std::io::stdout().flush();
        ok &= r.passed;
    }
    Ok(ok)
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status: 0 on success, 2 for usage or configuration errors, 1 for
/// runtime failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::InspectConstellation(a) => inspect(a).map(|_| true),
        Command::Verify(a) => verify_cmd(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
