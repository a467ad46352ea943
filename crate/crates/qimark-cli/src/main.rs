//! Command-line front end: learn codebooks, embed, extract, attack, and
//! evaluate.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error. Diagnostics go to
//! stderr; requested output (metrics, bits, tables) goes to stdout unless an
//! output path is given.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use qimark::codebook::empirical_p1;
use qimark::message::{bits_from_messages, messages_from_bits, random_biased_bits};
use qimark::metrics::{EvalRecord, EVAL_CSV_HEADER};
use qimark::pipeline::{
    embed_bits_into_plane, extract_bits_from_plane, extract_messages_from_plane,
    learn_from_planes, EmbedSetup,
};
use qimark::plane::write_atomic;
use qimark::{
    Band, BandSelector, CosetTable64, ImagePlane, KeyFile, LatticeKind, LatticeSpec64,
    NoiseChannel, NoiseKind, Permutation, Scheme64, SchemeKind,
};

#[derive(Parser)]
#[command(name = "qimark", version, about = "Lattice-coset QIM image watermarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct LatticeArgs {
    /// Fine lattice: z, a2, d4, e8
    #[arg(long, default_value = "a2")]
    lattice: String,
    /// Dimension for the z lattice (fixed for a2/d4/e8)
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Nesting ratio between coarse and fine lattices
    #[arg(long, default_value_t = 4)]
    alpha: u32,
    /// Scale multiplying the fine generator. Quantization cells must dwarf
    /// pixel-rounding noise for blind extraction to survive the image path.
    #[arg(long, default_value_t = 8.0)]
    delta: f64,
    /// Boundary offset for md/camd (default 1e-3 * d_min)
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Clone)]
struct PayloadArgs {
    /// Zig-zag band to embed into
    #[arg(long, default_value = "low")]
    band: String,
    /// Messages per block
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// RNG seed for synthetic messages and noise
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of bit 0 for synthetic messages
    #[arg(long, default_value_t = 0.9)]
    p0: f64,
    /// Read message bits from a file of 0/1 characters instead
    #[arg(long)]
    bits: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a content-aware codebook from an image corpus
    Learn {
        /// Input images (binary PGM)
        images: Vec<PathBuf>,
        /// Where to write the key sidecar
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Embed a watermark into an image
    Embed {
        input: PathBuf,
        output: PathBuf,
        /// Embedding scheme: qim, ca, md, camd
        #[arg(long, default_value = "qim")]
        scheme: String,
        /// Codebook key (required for ca/camd, ignored otherwise)
        #[arg(long)]
        key: Option<PathBuf>,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Blind-extract watermark bits from an image
    Extract {
        input: PathBuf,
        /// Write bits here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "qim")]
        scheme: String,
        #[arg(long)]
        key: Option<PathBuf>,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        payload: PayloadArgs,
    },
    /// Apply a noise attack to an image
    Attack {
        input: PathBuf,
        output: PathBuf,
        /// Noise kind: gaussian, salt, pepper, salt-pepper, speckle
        #[arg(long, default_value = "gaussian")]
        noise: String,
        /// Standard deviation for gaussian/speckle
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Hit probability for salt/pepper/salt-pepper
        #[arg(long, default_value_t = 0.05)]
        prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep schemes x lattices x bands x k over a corpus and emit CSV
    Evaluate {
        images: Vec<PathBuf>,
        /// Write the CSV table here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated lattices to sweep
        #[arg(long, default_value = "a2")]
        lattices: String,
        /// Comma-separated bands to sweep
        #[arg(long, default_value = "low,mid,high")]
        bands: String,
        /// Comma-separated messages-per-block values
        #[arg(long, default_value = "1")]
        ks: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        alpha: u32,
        #[arg(long, default_value_t = 8.0)]
        delta: f64,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        p0: f64,
    },
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<qimark::Error> for CliError {
    fn from(e: qimark::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn usage<S: Into<String>>(msg: S) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Learn { images, key, lattice, payload } => cmd_learn(images, key, lattice, payload),
        Command::Embed { input, output, scheme, key, lattice, payload } => {
            cmd_embed(input, output, scheme, key, lattice, payload)
        }
        Command::Extract { input, out, scheme, key, lattice, payload } => {
            cmd_extract(input, out, scheme, key, lattice, payload)
        }
        Command::Attack { input, output, noise, sigma, prob, seed } => {
            cmd_attack(input, output, noise, sigma, prob, seed)
        }
        Command::Evaluate { images, out, lattices, bands, ks, dim, alpha, delta, epsilon, seed, p0 } => {
            cmd_evaluate(images, out, lattices, bands, ks, dim, alpha, delta, epsilon, seed, p0)
        }
    }
}

fn parse_lattice(args: &LatticeArgs) -> Result<(LatticeSpec64, CosetTable64), CliError> {
    let kind = LatticeKind::parse(&args.lattice)
        .ok_or_else(|| usage(format!("unknown lattice {:?} (use z, a2, d4, e8)", args.lattice)))?;
    let dim = kind.fixed_dimension().unwrap_or(args.dim);
    let spec = LatticeSpec64::new(kind, dim, args.alpha, args.delta)
        .map_err(|e| usage(e.to_string()))?;
    let table = CosetTable64::build(&spec)?;
    Ok((spec, table))
}

fn parse_band(payload: &PayloadArgs) -> Result<BandSelector, CliError> {
    let band = Band::parse(&payload.band)
        .ok_or_else(|| usage(format!("unknown band {:?} (use low, mid, high, full)", payload.band)))?;
    Ok(BandSelector::new(band, payload.k))
}

fn parse_scheme(name: &str, epsilon: Option<f64>) -> Result<Scheme64, CliError> {
    let kind = SchemeKind::parse(name)
        .ok_or_else(|| usage(format!("unknown scheme {name:?} (use qim, ca, md, camd)")))?;
    Ok(Scheme64 { kind, epsilon })
}

/// Loads a plane, center-cropping to 8-aligned dimensions when necessary.
fn load_plane(path: &PathBuf) -> Result<ImagePlane, CliError> {
    let plane = ImagePlane::load_pgm(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    match plane.center_crop_to_blocks()? {
        Some(cropped) => {
            eprintln!(
                "note: {} is {}x{}; center-cropped to {}x{}",
                path.display(),
                plane.width(),
                plane.height(),
                cropped.width(),
                cropped.height()
            );
            Ok(cropped)
        }
        None => Ok(plane),
    }
}

fn read_bits_file(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut bits = Vec::new();
    for ch in text.chars() {
        match ch {
            '0' => bits.push(0),
            '1' => bits.push(1),
            c if c.is_whitespace() => {}
            c => {
                return Err(CliError::Data(format!(
                    "{}: invalid bit character {c:?}",
                    path.display()
                )))
            }
        }
    }
    Ok(bits)
}

/// Per-image message seed so every scheme in a sweep sees identical bits.
fn image_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn bits_for_image(
    payload: &PayloadArgs,
    file_bits: Option<&[u8]>,
    consumed: &mut usize,
    index: usize,
    nbits: usize,
) -> Result<Vec<u8>, CliError> {
    match file_bits {
        Some(all) => {
            if *consumed + nbits > all.len() {
                return Err(CliError::Data(format!(
                    "insufficient bits: need {nbits} more at offset {consumed}, file has {}",
                    all.len()
                )));
            }
            let slice = all[*consumed..*consumed + nbits].to_vec();
            *consumed += nbits;
            Ok(slice)
        }
        None => {
            let mut rng = ChaCha12Rng::seed_from_u64(image_seed(payload.seed, index));
            Ok(random_biased_bits(nbits, payload.p0, &mut rng))
        }
    }
}

fn cmd_learn(
    images: Vec<PathBuf>,
    key_path: PathBuf,
    lattice: LatticeArgs,
    payload: PayloadArgs,
) -> Result<(), CliError> {
    if images.is_empty() {
        return Err(usage("learn needs at least one image"));
    }
    let (spec, table) = parse_lattice(&lattice)?;
    let selector = parse_band(&payload)?;
    selector.validate(spec.dimension())?;

    let file_bits = payload.bits.as_ref().map(read_bits_file).transpose()?;
    let mut consumed = 0usize;
    let mut planes = Vec::new();
    let mut messages = Vec::new();
    let probe = EmbedSetup {
        spec: &spec,
        table: &table,
        scheme: Scheme64::new(SchemeKind::Qim),
        gamma: None,
        selector,
    };
    for (idx, path) in images.iter().enumerate() {
        let plane = load_plane(path)?;
        let nbits = probe.bit_capacity(&plane)?;
        let bits = bits_for_image(&payload, file_bits.as_deref(), &mut consumed, idx, nbits)?;
        let count = probe.message_capacity(&plane)?;
        messages.extend(messages_from_bits(&bits, spec.alpha(), spec.dimension(), count)?);
        planes.push(plane);
    }

    let learned = learn_from_planes(&spec, &table, &selector, &planes, &messages)?;
    if table.len() <= 16 {
        eprintln!("adjacency matrix W (rows = nearest coset, cols = message):");
        for row in learned.source.rows() {
            eprintln!("  {row:?}");
        }
        eprintln!("gamma = {:?} (weight {})", learned.gamma.as_slice(), learned.total_weight);
    }
    let p1 = empirical_p1(&learned.source, &learned.gamma)?;
    eprintln!(
        "learned over {} carriers: P1 = {:.4} (identity baseline {:.4})",
        learned.source.total(),
        p1,
        empirical_p1(&learned.source, &Permutation::identity(table.len()))?
    );

    let key = KeyFile::new(
        spec.kind(),
        spec.alpha(),
        spec.dimension(),
        lattice.delta,
        lattice.epsilon.unwrap_or(1e-3 * spec.d_min()),
        learned.gamma,
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    key.save(&key_path)?;
    eprintln!("key written to {}", key_path.display());
    Ok(())
}

/// Resolves spec/table/gamma, preferring the key file's parameters when the
/// scheme needs one (the key defines the codebook the detector must share).
fn resolve_config(
    scheme: &Scheme64,
    key_path: Option<&PathBuf>,
    lattice: &LatticeArgs,
) -> Result<(LatticeSpec64, CosetTable64, Option<Permutation>, Option<f64>), CliError> {
    if scheme.kind.uses_key() {
        let path = key_path.ok_or_else(|| usage("scheme requires --key"))?;
        let key =
            KeyFile::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let spec = key.lattice_spec::<f64>()?;
        let table = key.coset_table::<f64>()?;
        let gamma = key.gamma.clone();
        Ok((spec, table, Some(gamma), Some(key.epsilon)))
    } else {
        let (spec, table) = parse_lattice(lattice)?;
        Ok((spec, table, None, None))
    }
}

fn cmd_embed(
    input: PathBuf,
    output: PathBuf,
    scheme_name: String,
    key: Option<PathBuf>,
    lattice: LatticeArgs,
    payload: PayloadArgs,
) -> Result<(), CliError> {
    let mut scheme = parse_scheme(&scheme_name, lattice.epsilon)?;
    let (spec, table, gamma, key_epsilon) = resolve_config(&scheme, key.as_ref(), &lattice)?;
    if scheme.epsilon.is_none() {
        scheme.epsilon = key_epsilon;
    }
    let selector = parse_band(&payload)?;
    let setup = EmbedSetup {
        spec: &spec,
        table: &table,
        scheme,
        gamma: gamma.as_ref(),
        selector,
    };
    let plane = load_plane(&input)?;
    let nbits = setup.bit_capacity(&plane)?;
    let file_bits = payload.bits.as_ref().map(read_bits_file).transpose()?;
    let mut consumed = 0usize;
    let bits = bits_for_image(&payload, file_bits.as_deref(), &mut consumed, 0, nbits)?;

    let outcome = embed_bits_into_plane(&setup, &plane, &bits)?;
    outcome.plane.save_pgm(&output)?;
    println!("{}", outcome.frequency.to_line());
    println!("{}", outcome.spatial.to_line());
    eprintln!("embedded {nbits} bits into {}", output.display());
    Ok(())
}

fn cmd_extract(
    input: PathBuf,
    out: Option<PathBuf>,
    scheme_name: String,
    key: Option<PathBuf>,
    lattice: LatticeArgs,
    payload: PayloadArgs,
) -> Result<(), CliError> {
    let scheme = parse_scheme(&scheme_name, lattice.epsilon)?;
    let (spec, table, gamma, _) = resolve_config(&scheme, key.as_ref(), &lattice)?;
    let selector = parse_band(&payload)?;
    let setup = EmbedSetup {
        spec: &spec,
        table: &table,
        scheme,
        gamma: gamma.as_ref(),
        selector,
    };
    let plane = load_plane(&input)?;
    let bits = extract_bits_from_plane(&setup, &plane)?;
    let mut text = String::with_capacity(bits.len() + 1);
    for b in &bits {
        text.push(if *b == 0 { '0' } else { '1' });
    }
    text.push('\n');
    match out {
        Some(path) => {
            write_atomic(&path, text.as_bytes())?;
            eprintln!("{} bits written to {}", bits.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_attack(
    input: PathBuf,
    output: PathBuf,
    noise: String,
    sigma: f64,
    prob: f64,
    seed: u64,
) -> Result<(), CliError> {
    if sigma < 0.0 {
        return Err(usage("--sigma must be nonnegative"));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(usage("--prob must lie in [0, 1]"));
    }
    let kind = match noise.as_str() {
        "gaussian" | "awgn" => NoiseKind::Awgn { sigma },
        "salt" => NoiseKind::Salt { p: prob },
        "pepper" => NoiseKind::Pepper { p: prob },
        "salt-pepper" | "saltpepper" => NoiseKind::SaltPepper { p: prob },
        "speckle" => NoiseKind::Speckle { sigma },
        other => return Err(usage(format!("unknown noise {other:?}"))),
    };
    let plane = ImagePlane::load_pgm(&input)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let attacked = NoiseChannel::new(kind, seed).apply_to_plane(&plane);
    attacked.save_pgm(&output)?;
    eprintln!("{} attack written to {}", kind.name(), output.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    images: Vec<PathBuf>,
    out: Option<PathBuf>,
    lattices: String,
    bands: String,
    ks: String,
    dim: usize,
    alpha: u32,
    delta: f64,
    epsilon: Option<f64>,
    seed: u64,
    p0: f64,
) -> Result<(), CliError> {
    if images.is_empty() {
        return Err(usage("evaluate needs at least one image"));
    }
    let planes: Vec<ImagePlane> = images.iter().map(load_plane).collect::<Result<_, _>>()?;

    let lattice_list: Vec<&str> = lattices.split(',').map(str::trim).collect();
    let band_list: Vec<Band> = bands
        .split(',')
        .map(|s| Band::parse(s.trim()).ok_or_else(|| usage(format!("unknown band {s:?}"))))
        .collect::<Result<_, _>>()?;
    let k_list: Vec<usize> = ks
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| usage(format!("bad k value {s:?}"))))
        .collect::<Result<_, _>>()?;

    let mut csv = String::from(EVAL_CSV_HEADER);
    csv.push('\n');
    for lattice_name in &lattice_list {
        let args = LatticeArgs {
            lattice: lattice_name.to_string(),
            dim,
            alpha,
            delta,
            epsilon,
        };
        let (spec, table) = parse_lattice(&args)?;
        for &band in &band_list {
            for &k in &k_list {
                let selector = BandSelector::new(band, k);
                selector.validate(spec.dimension())?;
                for kind in SchemeKind::all() {
                    let record =
                        evaluate_combo(&spec, &table, selector, kind, epsilon, &planes, seed, p0)?;
                    let _ = writeln!(csv, "{}", record.to_csv_row());
                }
            }
        }
    }
    match out {
        Some(path) => {
            write_atomic(&path, csv.as_bytes())?;
            eprintln!("table written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate_combo(
    spec: &LatticeSpec64,
    table: &CosetTable64,
    selector: BandSelector,
    kind: SchemeKind,
    epsilon: Option<f64>,
    planes: &[ImagePlane],
    seed: u64,
    p0: f64,
) -> Result<EvalRecord, CliError> {
    let scheme = Scheme64 { kind, epsilon };
    let payload = PayloadArgs {
        band: selector.band.name().to_string(),
        k: selector.k,
        seed,
        p0,
        bits: None,
    };

    // per-image messages, identical across schemes
    let probe = EmbedSetup {
        spec,
        table,
        scheme: Scheme64::new(SchemeKind::Qim),
        gamma: None,
        selector,
    };
    let mut per_image_messages = Vec::new();
    for (idx, plane) in planes.iter().enumerate() {
        let nbits = probe.bit_capacity(plane)?;
        let bits = bits_for_image(&payload, None, &mut 0, idx, nbits)?;
        let count = probe.message_capacity(plane)?;
        per_image_messages.push(messages_from_bits(&bits, spec.alpha(), spec.dimension(), count)?);
    }

    // content-aware schemes learn from the same corpus and message stream
    let gamma = if kind.uses_key() {
        let all_messages: Vec<_> = per_image_messages.iter().flatten().cloned().collect();
        let learned = learn_from_planes(spec, table, &selector, planes, &all_messages)?;
        Some(learned.gamma)
    } else {
        None
    };

    let setup = EmbedSetup {
        spec,
        table,
        scheme,
        gamma: gamma.as_ref(),
        selector,
    };
    let mut mse_freq = 0.0;
    let mut mse_spatial = 0.0;
    let mut psnr_sum = 0.0;
    let mut prd_sum = 0.0;
    let mut ssim_sum = 0.0;
    let mut wrong = 0usize;
    let mut total_msgs = 0usize;
    for (plane, messages) in planes.iter().zip(&per_image_messages) {
        let bits = bits_from_messages(messages, spec.alpha())?;
        let outcome = embed_bits_into_plane(&setup, plane, &bits)?;
        mse_freq += outcome.frequency.mse;
        mse_spatial += outcome.spatial.mse;
        psnr_sum += outcome.spatial.psnr;
        prd_sum += outcome.spatial.prd;
        ssim_sum += outcome.spatial.ssim;
        let detected = extract_messages_from_plane(&setup, &outcome.plane)?;
        wrong += detected.iter().zip(messages).filter(|(a, b)| a != b).count();
        total_msgs += messages.len();
    }
    let n = planes.len() as f64;
    Ok(EvalRecord {
        scheme: kind,
        lattice: spec.kind().name(),
        band: selector.band.name(),
        k: selector.k,
        mse_freq: mse_freq / n,
        mse_spatial: mse_spatial / n,
        psnr: psnr_sum / n,
        prd: prd_sum / n,
        ssim: ssim_sum / n,
        ser: wrong as f64 / total_msgs as f64,
    })
}
