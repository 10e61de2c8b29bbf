//! Command-line frontend: every library operation behind one subcommand,
//! with JSON or CSV output that is byte-identical across reruns.

use clap::{Parser, Subcommand, ValueEnum};
use rug::Complex;

use ptheta::report::{
    self, AsymView, CensusRow, CountRow, EvalRow, MonodromyView, NamedValue, ProbeView,
    SeparationView, SpectralRow, TrajectoryView, ZeroRow,
};
use ptheta::{
    annulus_census, asymptotic_residuals, build_loop, check_strong_separation, compose,
    complex_spectral_pair, confirm_positive_indices, count_in_disk, dense_zero_probe,
    density_sweep, differential_residual, evaluate, evaluate_dq, evaluate_dz, find_double_zero,
    functional_residual, monodromy, real_spectrum_negative, real_spectrum_positive,
    real_zeros_in_interval, refine_zero, smoothness_identity_residual, spectral_points_in_disk,
    track_zero, verify_smoothness, zeros_in_disk, DensityBranch, Error, LoopKind, ParamQ,
    Precision, QPath, SpectralPoint,
};

#[derive(Parser)]
#[command(
    name = "ptheta",
    version,
    about = "Partial theta toolkit: certified evaluation, zeros, double-zero spectra, monodromy, zero densities"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Working mantissa bits (overrides the PTHETA_PREC_BITS environment variable)
    #[arg(long, global = true)]
    prec_bits: Option<u32>,
    /// Absolute series truncation target
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Positive,
    Negative,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the function or one of its derivatives at a point
    Eval {
        /// Parameter q, |q| < 1, as re or re+imi
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// Argument z as re or re+imi
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Order of the z-derivative (0, 1, or 2)
        #[arg(long, default_value_t = 0)]
        dz: u32,
        /// Evaluate the q-derivative instead
        #[arg(long, conflicts_with = "dz")]
        dq: bool,
        /// Also print the functional-equation and differential-identity residuals
        #[arg(long)]
        residuals: bool,
    },
    /// Zeros in a disk or real interval, censuses, counts, seed polishing
    Zeros {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// List zeros with |z| < RADIUS
        #[arg(long, value_name = "RADIUS")]
        disk: Option<f64>,
        /// List real zeros in [LO, HI) (real q only)
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        interval: Option<Vec<f64>>,
        /// Census of annulus number K between consecutive circle radii
        #[arg(long, value_name = "K")]
        annulus: Option<i64>,
        /// Newton-polish a zero from this seed
        #[arg(long, value_name = "Z0", allow_hyphen_values = true)]
        refine: Option<String>,
        /// Print only the multiplicity-weighted count
        #[arg(long)]
        count_only: bool,
    },
    /// Verify that annuli N..=K_MAX each hold exactly one simple zero
    Separation {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        k_max: i64,
    },
    /// Double-zero parameters: real chains, the complex pair, disk searches
    Spectrum {
        /// Real chain to compute (with --k-max)
        #[arg(long, value_enum)]
        branch: Option<BranchArg>,
        #[arg(long)]
        k_max: Option<u32>,
        /// Locate the conjugate off-axis pair closest to the origin
        #[arg(long)]
        complex_pair: bool,
        /// All spectral points with |q| <= RADIUS
        #[arg(long, value_name = "RADIUS")]
        disk: Option<f64>,
        /// Newton-polish a double zero from seeds Q0, Y0
        #[arg(long, num_args = 2, value_names = ["Q0", "Y0"], allow_hyphen_values = true)]
        refine_double: Option<Vec<String>>,
        /// Cross-check chain indices against annulus disk counts (positive branch)
        #[arg(long)]
        confirm: bool,
        /// Print per-index smoothness diagnostics instead of the point table
        #[arg(long)]
        smoothness: bool,
    },
    /// Measured-versus-predicted large-index laws along a real chain
    Asymptotics {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        k_max: u32,
        /// Drop rows with index below this
        #[arg(long, default_value_t = 1)]
        k_min: u32,
    },
    /// Track one zero along a standard parameter loop
    Track {
        /// Loop: gamma:K, delta:K, eta+, or eta-
        #[arg(long, allow_hyphen_values = true)]
        kind: String,
        /// Base point on (0, 0.2078...)
        #[arg(long)]
        a: f64,
        /// Radius of the circle around the target spectral number (0 = default)
        #[arg(long, default_value_t = 0.0)]
        loop_eps: f64,
        /// Radius of the bypasses around intermediate spectral numbers (0 = default)
        #[arg(long, default_value_t = 0.0)]
        loop_eps_prime: f64,
        /// Zero to track, as re or re+imi
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
    },
    /// Permutation of labeled zeros after a composed parameter loop
    Monodromy {
        /// Comma-separated loops, e.g. gamma:1,eta+,delta:1,eta-
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        kinds: Vec<String>,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        loop_eps: f64,
        #[arg(long, default_value_t = 0.0)]
        loop_eps_prime: f64,
        /// Track the COUNT innermost zeros, labeled xi1, xi2, ... outward
        #[arg(long, conflicts_with = "zero")]
        count: Option<usize>,
        /// Track this zero (repeatable; labeled xi1, xi2, ... in given order)
        #[arg(long, allow_hyphen_values = true)]
        zero: Vec<String>,
        /// Include full trajectories in JSON output
        #[arg(long)]
        trajectories: bool,
    },
    /// Real-zero counts against the limiting density over a parameter grid
    Density {
        #[arg(long, value_enum)]
        branch: BranchArg,
        /// Window size: zeros are counted out to magnitude A
        #[arg(long)]
        a: f64,
        /// Comma-separated parameter grid, e.g. 0.9,0.95,0.99
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
    },
    /// Denseness ladder from double zero K: rungs, bracketed zeros, gap bound
    DenseProbe {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        a: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    let prec = build_precision(&cli)?;
    let fmt = cli.format;
    match cli.cmd {
        Cmd::Eval { q, z, dz, dq, residuals } => cmd_eval(&q, &z, dz, dq, residuals, &prec, fmt),
        Cmd::Zeros { q, disk, interval, annulus, refine, count_only } => {
            cmd_zeros(&q, disk, interval, annulus, refine, count_only, &prec, fmt)
        }
        Cmd::Separation { q, n, k_max } => {
            let q = parse_param(&q)?;
            let rep = check_strong_separation(&q, n, k_max, &prec)?;
            let view = SeparationView::from(&rep);
            Ok(match fmt {
                Format::Json => report::to_json(&view),
                Format::Csv => report::to_csv(&view.per_annulus),
            })
        }
        Cmd::Spectrum { branch, k_max, complex_pair, disk, refine_double, confirm, smoothness } => {
            cmd_spectrum(branch, k_max, complex_pair, disk, refine_double, confirm, smoothness, &prec, fmt)
        }
        Cmd::Asymptotics { branch, k_max, k_min } => {
            let points = match branch {
                BranchArg::Positive => real_spectrum_positive(k_max, &prec)?,
                BranchArg::Negative => real_spectrum_negative(k_max, &prec)?,
            };
            let rep = asymptotic_residuals(&points)?;
            let mut view = AsymView::from(&rep);
            view.rows.retain(|r| r.k >= k_min);
            Ok(match fmt {
                Format::Json => report::to_json(&view),
                Format::Csv => report::to_csv(&view.rows),
            })
        }
        Cmd::Track { kind, a, loop_eps, loop_eps_prime, z0 } => {
            let path = build_loop(parse_loop_kind(&kind)?, a, loop_eps, loop_eps_prime, &prec)?;
            let z0 = parse_cplx_value(&z0, &prec)?;
            let traj = track_zero(&path, &z0, &prec)?;
            let view = TrajectoryView::new("xi", &traj);
            Ok(match fmt {
                Format::Json => report::to_json(&view),
                Format::Csv => report::to_csv(&view.samples),
            })
        }
        Cmd::Monodromy { kinds, a, loop_eps, loop_eps_prime, count, zero, trajectories } => {
            cmd_monodromy(&kinds, a, loop_eps, loop_eps_prime, count, &zero, trajectories, &prec, fmt)
        }
        Cmd::Density { branch, a, q } => {
            let b = match branch {
                BranchArg::Positive => DensityBranch::Positive,
                BranchArg::Negative => DensityBranch::Negative,
            };
            let reports = density_sweep(b, a, &q, &prec)?;
            let rows: Vec<report::DensityRow> = reports.iter().map(report::DensityRow::from).collect();
            Ok(match fmt {
                Format::Json => report::to_json(&rows),
                Format::Csv => report::to_csv(&rows),
            })
        }
        Cmd::DenseProbe { k, branch, a } => {
            let b = match branch {
                BranchArg::Positive => DensityBranch::Positive,
                BranchArg::Negative => DensityBranch::Negative,
            };
            let probe = dense_zero_probe(k, b, a, &prec)?;
            let view = ProbeView::from(&probe);
            Ok(match fmt {
                Format::Json => report::to_json(&view),
                Format::Csv => report::to_csv(&view.rungs),
            })
        }
    }
}

fn build_precision(cli: &Cli) -> Result<Precision, Error> {
    let mut bits = 53u32;
    if let Ok(s) = std::env::var("PTHETA_PREC_BITS") {
        bits = s.trim().parse().map_err(|_| {
            Error::InvalidParam(format!("PTHETA_PREC_BITS = {s:?} is not a bit count"))
        })?;
    }
    if let Some(b) = cli.prec_bits {
        bits = b;
    }
    let eps = cli.eps.unwrap_or(1e-12);
    Precision::new(bits, eps)
}

/// Parse `re`, `imi`, or `re+imi` (exponents allowed, as in 1e-3-2.5e-4i).
fn parse_complex(s: &str) -> Result<(f64, f64), Error> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || {
        Error::InvalidParam(format!(
            "cannot parse {s:?} as a complex number; use forms like 1.5, -2i, 0.3+0.1i"
        ))
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'I']) else {
        return Ok((t.parse().map_err(|_| bad())?, 0.0));
    };
    let b = body.as_bytes();
    let mut split = None;
    for i in (1..b.len()).rev() {
        if (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().map_err(|_| bad())?;
            let im: f64 = match &body[i..] {
                "+" => 1.0,
                "-" => -1.0,
                m => m.parse().map_err(|_| bad())?,
            };
            Ok((re, im))
        }
        None => {
            let im: f64 = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                m => m.parse().map_err(|_| bad())?,
            };
            Ok((0.0, im))
        }
    }
}

fn parse_param(s: &str) -> Result<ParamQ, Error> {
    let (re, im) = parse_complex(s)?;
    ParamQ::complex(re, im)
}

fn parse_cplx_value(s: &str, prec: &Precision) -> Result<Complex, Error> {
    let (re, im) = parse_complex(s)?;
    Ok(Complex::with_val(prec.mantissa_bits.max(64), (re, im)))
}

fn parse_loop_kind(s: &str) -> Result<LoopKind, Error> {
    let t = s.trim();
    let bad = || {
        Error::InvalidParam(format!(
            "unknown loop {t:?}; expected gamma:K, delta:K, eta+, or eta-"
        ))
    };
    if t.eq_ignore_ascii_case("eta+") {
        return Ok(LoopKind::EtaPlus);
    }
    if t.eq_ignore_ascii_case("eta-") {
        return Ok(LoopKind::EtaMinus);
    }
    let (name, idx) = t.split_once(':').ok_or_else(bad)?;
    let k: u32 = idx.parse().map_err(|_| bad())?;
    if k == 0 {
        return Err(bad());
    }
    match name.to_ascii_lowercase().as_str() {
        "gamma" => Ok(LoopKind::Gamma(k)),
        "delta" => Ok(LoopKind::Delta(k)),
        _ => Err(bad()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    q: &str,
    z: &str,
    dz: u32,
    dq: bool,
    residuals: bool,
    prec: &Precision,
    fmt: Format,
) -> Result<String, Error> {
    let qp = parse_param(q)?;
    let (zre, zim) = parse_complex(z)?;
    let zv = Complex::with_val(prec.mantissa_bits.max(64), (zre, zim));
    let qpair = (qp.re_f64(), qp.im_f64());
    let mut rows: Vec<EvalRow> = Vec::new();
    if dq {
        let r = evaluate_dq(&qp, &zv, prec)?;
        rows.push(EvalRow::new("theta_dq", qpair, (zre, zim), &r));
    } else {
        let name = match dz {
            0 => "theta",
            1 => "theta_dz",
            2 => "theta_dzz",
            _ => return Err(Error::InvalidParam(format!("dz order {dz} not supported"))),
        };
        let r = if dz == 0 { evaluate(&qp, &zv, prec)? } else { evaluate_dz(&qp, &zv, dz, prec)? };
        rows.push(EvalRow::new(name, qpair, (zre, zim), &r));
    }
    if residuals {
        let fr = functional_residual(&qp, &zv, prec)?.to_f64();
        let dr = differential_residual(&qp, &zv, prec)?.to_f64();
        for (name, v) in [("functional_residual", fr), ("differential_residual", dr)] {
            rows.push(EvalRow {
                quantity: name,
                q_re: qpair.0,
                q_im: qpair.1,
                z_re: zre,
                z_im: zim,
                re: v,
                im: 0.0,
                tail_bound: 0.0,
                terms_used: 0,
            });
        }
    }
    Ok(match fmt {
        Format::Json => report::to_json(&rows),
        Format::Csv => report::to_csv(&rows),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_zeros(
    q: &str,
    disk: Option<f64>,
    interval: Option<Vec<f64>>,
    annulus: Option<i64>,
    refine: Option<String>,
    count_only: bool,
    prec: &Precision,
    fmt: Format,
) -> Result<String, Error> {
    let qp = parse_param(q)?;
    let modes =
        disk.is_some() as u8 + interval.is_some() as u8 + annulus.is_some() as u8 + refine.is_some() as u8;
    if modes != 1 {
        return Err(Error::InvalidParam(
            "choose exactly one of --disk, --interval, --annulus, --refine".into(),
        ));
    }
    if let Some(r) = disk {
        if count_only {
            let n = count_in_disk(&qp, r, prec)?;
            let rows = vec![CountRow { label: format!("disk_{r}"), count: n }];
            return Ok(emit(&rows, fmt));
        }
        let recs = zeros_in_disk(&qp, r, prec)?;
        let rows: Vec<ZeroRow> = recs.iter().map(ZeroRow::from).collect();
        return Ok(emit(&rows, fmt));
    }
    if let Some(bounds) = interval {
        let (lo, hi) = (bounds[0], bounds[1]);
        let recs = real_zeros_in_interval(&qp, lo, hi, prec)?;
        if count_only {
            let n: i64 = recs.iter().map(|r| r.multiplicity as i64).sum();
            let rows = vec![CountRow { label: format!("interval_{lo}_{hi}"), count: n }];
            return Ok(emit(&rows, fmt));
        }
        let rows: Vec<ZeroRow> = recs.iter().map(ZeroRow::from).collect();
        return Ok(emit(&rows, fmt));
    }
    if let Some(k) = annulus {
        let c = annulus_census(&qp, k, prec)?;
        let rows = vec![CensusRow::from(&c)];
        return Ok(emit(&rows, fmt));
    }
    let seed = refine.expect("mode checked above");
    let z0 = parse_cplx_value(&seed, prec)?;
    let rec = refine_zero(&qp, &z0, prec)?;
    let rows = vec![ZeroRow::from(&rec)];
    Ok(emit(&rows, fmt))
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    branch: Option<BranchArg>,
    k_max: Option<u32>,
    complex_pair: bool,
    disk: Option<f64>,
    refine_double: Option<Vec<String>>,
    confirm: bool,
    smoothness: bool,
    prec: &Precision,
    fmt: Format,
) -> Result<String, Error> {
    let modes = complex_pair as u8
        + disk.is_some() as u8
        + refine_double.is_some() as u8
        + branch.is_some() as u8;
    if modes != 1 {
        return Err(Error::InvalidParam(
            "choose exactly one of --branch, --complex-pair, --disk, --refine-double".into(),
        ));
    }
    let points: Vec<SpectralPoint> = if complex_pair {
        let (hi, lo) = complex_spectral_pair(prec)?;
        vec![hi, lo]
    } else if let Some(r) = disk {
        spectral_points_in_disk(r, prec)?
    } else if let Some(seeds) = refine_double {
        let q0 = parse_param(&seeds[0])?;
        let z0 = parse_cplx_value(&seeds[1], prec)?;
        vec![find_double_zero(&q0, &z0, prec)?]
    } else {
        let k = k_max.ok_or_else(|| Error::InvalidParam("--branch needs --k-max".into()))?;
        match branch.expect("mode checked above") {
            BranchArg::Positive => real_spectrum_positive(k, prec)?,
            BranchArg::Negative => real_spectrum_negative(k, prec)?,
        }
    };
    if confirm {
        confirm_positive_indices(&points, prec)?;
    }
    if smoothness {
        let mut rows: Vec<NamedValue> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let tag = p.index.map(|k| k.to_string()).unwrap_or_else(|| format!("pt{i}"));
            let g = verify_smoothness(p, prec)?;
            rows.push(NamedValue { name: format!("gradient_norm_{tag}"), value: g.to_f64() });
            let r = smoothness_identity_residual(p, prec)?;
            rows.push(NamedValue { name: format!("identity_residual_{tag}"), value: r });
        }
        return Ok(emit(&rows, fmt));
    }
    let rows: Vec<SpectralRow> = points.iter().map(SpectralRow::from).collect();
    Ok(emit(&rows, fmt))
}

#[allow(clippy::too_many_arguments)]
fn cmd_monodromy(
    kinds: &[String],
    a: f64,
    loop_eps: f64,
    loop_eps_prime: f64,
    count: Option<usize>,
    zero: &[String],
    trajectories: bool,
    prec: &Precision,
    fmt: Format,
) -> Result<String, Error> {
    if kinds.is_empty() {
        return Err(Error::InvalidParam("no loops given".into()));
    }
    let mut paths: Vec<QPath> = Vec::with_capacity(kinds.len());
    for k in kinds {
        paths.push(build_loop(parse_loop_kind(k)?, a, loop_eps, loop_eps_prime, prec)?);
    }
    let path = if paths.len() == 1 { paths.pop().expect("nonempty") } else { compose(&paths)? };

    let labels: Vec<(String, Complex)> = if let Some(n) = count {
        if n == 0 {
            return Err(Error::InvalidParam("--count must be positive".into()));
        }
        let qp = ParamQ::real(a)?;
        let r = a.powf(-(n as f64 + 0.5));
        let mut recs = zeros_in_disk(&qp, r, prec)?;
        recs.sort_by(|x, y| {
            ptheta::num::abs_f64(&x.z)
                .partial_cmp(&ptheta::num::abs_f64(&y.z))
                .expect("finite zeros")
        });
        if recs.len() < n {
            return Err(Error::InvalidParam(format!(
                "found only {} zeros within radius {r:.3e}",
                recs.len()
            )));
        }
        recs.truncate(n);
        recs.into_iter().enumerate().map(|(i, rec)| (format!("xi{}", i + 1), rec.z)).collect()
    } else {
        if zero.is_empty() {
            return Err(Error::InvalidParam("give --count N or at least one --zero".into()));
        }
        let mut out = Vec::with_capacity(zero.len());
        for (i, s) in zero.iter().enumerate() {
            out.push((format!("xi{}", i + 1), parse_cplx_value(s, prec)?));
        }
        out
    };

    let res = monodromy(&path, &labels, prec)?;
    let view = MonodromyView::new(&res, trajectories);
    Ok(match fmt {
        Format::Json => report::to_json(&view),
        Format::Csv => report::to_csv(&view.permutation),
    })
}

fn emit<T: report::CsvTable + serde::Serialize>(rows: &[T], fmt: Format) -> String {
    match fmt {
        Format::Json => report::to_json(&rows),
        Format::Csv => report::to_csv(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms_parse() {
        assert_eq!(parse_complex("0.3+0.1i").unwrap(), (0.3, 0.1));
        assert_eq!(parse_complex("-0.2-0.35i").unwrap(), (-0.2, -0.35));
        assert_eq!(parse_complex("-8i").unwrap(), (0.0, -8.0));
        assert_eq!(parse_complex("0.5").unwrap(), (0.5, 0.0));
        assert_eq!(parse_complex("1e+3-2e-4i").unwrap(), (1000.0, -2e-4));
        assert_eq!(parse_complex("-i").unwrap(), (0.0, -1.0));
        assert_eq!(parse_complex(" 1 + 2 i ").unwrap(), (1.0, 2.0));
        assert!(parse_complex("")
            .and(parse_complex("abc"))
            .and(parse_complex("1+2j"))
            .is_err());
    }

    #[test]
    fn loop_names_parse() {
        assert!(matches!(parse_loop_kind("gamma:3"), Ok(LoopKind::Gamma(3))));
        assert!(matches!(parse_loop_kind("delta:1"), Ok(LoopKind::Delta(1))));
        assert!(matches!(parse_loop_kind("eta+"), Ok(LoopKind::EtaPlus)));
        assert!(matches!(parse_loop_kind("ETA-"), Ok(LoopKind::EtaMinus)));
        assert!(parse_loop_kind("gamma:0").is_err());
        assert!(parse_loop_kind("sigma:1").is_err());
    }

    #[test]
    fn cli_parses_a_full_command_line() {
        let cli = Cli::try_parse_from([
            "ptheta",
            "--format",
            "csv",
            "monodromy",
            "--kinds",
            "gamma:1,eta+,delta:1,eta-",
            "--a",
            "0.1",
            "--count",
            "4",
        ])
        .unwrap();
        assert!(matches!(cli.format, Format::Csv));
        match cli.cmd {
            Cmd::Monodromy { kinds, count, .. } => {
                assert_eq!(kinds.len(), 4);
                assert_eq!(count, Some(4));
            }
            _ => panic!("wrong subcommand"),
        }
    }
}
