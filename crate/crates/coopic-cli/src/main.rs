//! Command-line front end: every computation in the toolkit behind a
//! scriptable, deterministic interface. Exact quantities print as
//! rationals, Gaussian quantities with 9 significant digits. Identical
//! invocations produce byte-identical output; the only randomness is the
//! codec simulator's message draw, which is seeded (default 0).

use std::fs;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};

use coopic::capacity::{
    gaussian_cog_bounds_with, gaussian_sum_inner_outer_with, u_cog, DEFAULT_GRID_DENSITY,
};
use coopic::region::{
    closed_form_sum_virtual, fourier_motzkin_guarded, max_weighted_rate, virtual_constraints_cog,
    virtual_constraints_sym, with_total_rates, DEFAULT_FM_GUARD,
};
use coopic::{
    emit_figure_data, fmt_rat, gap_margins_csv, gap_report_json, ifc_cog_v, ldm_cog_capacity,
    ldm_sum_capacity, maximize_over_delta, optimal_sym_plan, rat, rint, run_halfduplex_sim,
    sym_plan_at, verify_gaps_with, Beta, CogSweep, Delta, DeltaOptResult, Error, FigureSweep,
    GapConstants, GapGrid, GaussCogParams, GaussSymParams, LdmCogParams, LdmParams, LdmSymParams,
    MessageAllocation, Rat, RateVar, Result, SumSweep, COG_MARGIN_NAMES, SYM_MARGIN_NAMES,
};

#[derive(Parser)]
#[command(
    name = "coopic",
    version,
    about = "Capacity toolkit for interference channels with half-duplex source cooperation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact sum capacity of the symmetric bit-level channel.
    LdmSum { n_d: u32, n_i: u32, n_c: u32 },
    /// Exact secondary capacity of the cognitive bit-level channel.
    LdmCog { n1: u32, n2: u32, a1: u32, a2: u32, beta: u32 },
    /// Gaussian symmetric sum-rate bounds with their gap margins.
    GaussSum {
        snr: f64,
        inr: f64,
        cnr: f64,
        /// Interference phase in radians (defaults to 0 with a note).
        #[arg(long)]
        theta: Option<f64>,
        /// Points in the schedule-search grid.
        #[arg(long, default_value_t = DEFAULT_GRID_DENSITY)]
        grid_density: usize,
        /// Exit nonzero if any margin is negative.
        #[arg(long)]
        strict: bool,
    },
    /// Gaussian cognitive bounds at primary back-off r0.
    Cog {
        snr1: f64,
        snr2: f64,
        inr1: f64,
        inr2: f64,
        cnr: f64,
        /// Interference phase in radians (defaults to 0 with a note).
        #[arg(long)]
        theta: Option<f64>,
        /// Primary back-off in bits; the lower bound is asserted for r0 >= 7.
        #[arg(long, default_value_t = 7.0)]
        r0: f64,
        /// Points in the schedule-search grid.
        #[arg(long, default_value_t = DEFAULT_GRID_DENSITY)]
        grid_density: usize,
        /// Exit nonzero if any margin is negative.
        #[arg(long)]
        strict: bool,
    },
    /// Plan a bit-level code, simulate it, and verify the rate exactly.
    CodecSim {
        n_d: u32,
        n_i: u32,
        n_c: u32,
        /// Schedule ratio as p/q or inf; must attain the sum capacity.
        /// Defaults to the planner's own optimal point.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 16)]
        blocks: u64,
        /// Message seed. Unseeded runs use 0 and stay deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-check the rate-region closed forms against exact LP and
    /// projection over a range of channels and pipe rates.
    FmCheck {
        /// Largest gain exponent swept.
        #[arg(long, default_value_t = 4)]
        max: u32,
        /// Abort elimination once this many inequalities accumulate.
        #[arg(long, default_value_t = DEFAULT_FM_GUARD)]
        fm_guard: usize,
    },
    /// Emit a degree-of-freedom sweep table.
    Gdof {
        kind: GdofKind,
        /// key=range file overriding the default sweep.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        /// Treat unit interference as phase-aligned (symmetric sweep only).
        #[arg(long)]
        aligned: bool,
    },
    /// Certify the constant-gap sandwiches over a gain grid.
    VerifyGaps {
        /// key=range grid file; omitted means the default grid.
        grid: Option<PathBuf>,
        #[arg(long)]
        grid_density: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table format for --out, or for stdout when --out is absent.
        #[arg(long, value_enum)]
        format: Option<OutFormat>,
        /// Exit nonzero when the report lists violations.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum GdofKind {
    Sum,
    Cog,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(1);
        }
    }
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::LdmSum { n_d, n_i, n_c } => {
            let r = ldm_sum_capacity(&LdmSymParams::new(n_d, n_i, n_c));
            print_opt_result(&r, 'l');
            Ok(0)
        }
        Cmd::LdmCog { n1, n2, a1, a2, beta } => {
            let r = ldm_cog_capacity(&LdmCogParams::new(n1, n2, a1, a2, beta))?;
            print_opt_result(&r, 'v');
            Ok(0)
        }
        Cmd::GaussSum { snr, inr, cnr, theta, grid_density, strict } => {
            cmd_gauss_sum(snr, inr, cnr, theta, grid_density, strict)
        }
        Cmd::Cog { snr1, snr2, inr1, inr2, cnr, theta, r0, grid_density, strict } => {
            cmd_cog(snr1, snr2, inr1, inr2, cnr, theta, r0, grid_density, strict)
        }
        Cmd::CodecSim { n_d, n_i, n_c, delta, blocks, seed } => {
            cmd_codec_sim(n_d, n_i, n_c, delta, blocks, seed)
        }
        Cmd::FmCheck { max, fm_guard } => cmd_fm_check(max, fm_guard),
        Cmd::Gdof { kind, sweep, out, format, aligned } => {
            cmd_gdof(kind, sweep, out, format, aligned)
        }
        Cmd::VerifyGaps { grid, grid_density, out, format, strict } => {
            cmd_verify_gaps(grid, grid_density, out, format, strict)
        }
    }
}

/// 9 significant digits, the fixed precision for all Gaussian reals.
fn g9(x: f64) -> String {
    format!("{x:.8e}")
}

fn capacity_line(r: &DeltaOptResult) -> String {
    if r.value.is_zero() {
        "0".into()
    } else if r.any_delta {
        format!("{} (δ*: any)", fmt_rat(&r.value))
    } else {
        format!("{} (δ*={})", fmt_rat(&r.value), r.delta_star)
    }
}

fn print_opt_result(r: &DeltaOptResult, bound_prefix: char) {
    println!("{}", capacity_line(r));
    if !r.value.is_zero() {
        let names: Vec<String> =
            r.active.iter().map(|i| format!("{bound_prefix}{}", i + 1)).collect();
        println!("active: {}", names.join(", "));
    }
}

fn print_theta(theta: Option<f64>) -> f64 {
    match theta {
        Some(t) => {
            println!("theta: {}", g9(t));
            t
        }
        None => {
            println!("theta: 0 (not given; using 0)");
            0.0
        }
    }
}

const SLACK_TOL: f64 = 1e-6;

fn print_margins(names: &[&str], values: &[Option<f64>]) -> usize {
    println!("margins:");
    let mut bad = 0;
    for (name, v) in names.iter().zip(values) {
        match v {
            Some(x) => {
                println!("  {name}: {}", g9(*x));
                if *x < -SLACK_TOL {
                    bad += 1;
                }
            }
            None => println!("  {name}: n/a"),
        }
    }
    if bad > 0 {
        println!("margin violations: {bad}");
    }
    bad
}

fn cmd_gauss_sum(
    snr: f64,
    inr: f64,
    cnr: f64,
    theta: Option<f64>,
    density: usize,
    strict: bool,
) -> Result<i32> {
    let t = print_theta(theta);
    let p = GaussSymParams::new(snr, inr, cnr, t)?;
    let b = gaussian_sum_inner_outer_with(&p, density);
    println!("region: {}", b.region);
    println!("cooperation: {}", if b.cooperation { "on" } else { "off" });
    println!("c_bar: {} (δ*={})", g9(b.c_bar), g9(b.c_bar_delta));
    println!("c_bar_ldm: {}", g9(b.c_bar_ldm));
    match b.achievable_delta {
        Some(d) => println!("achievable: {} (δ={})", g9(b.achievable), g9(d)),
        None => println!("achievable: {}", g9(b.achievable)),
    }
    println!("outer: {}", g9(b.outer));
    let c = GapConstants::default();
    let margins = [
        Some(b.outer - b.achievable),
        Some(b.achievable - (b.c_bar - c.sym_inner)),
        Some((b.c_bar + c.sym_outer) - b.outer),
        Some((b.c_bar_ldm + c.sym_ldm_over) - b.c_bar),
        Some(b.achievable - (b.c_bar_ldm - c.sym_ldm_under)),
    ];
    let bad = print_margins(&SYM_MARGIN_NAMES, &margins);
    Ok(if strict && bad > 0 { 2 } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_cog(
    snr1: f64,
    snr2: f64,
    inr1: f64,
    inr2: f64,
    cnr: f64,
    theta: Option<f64>,
    r0: f64,
    density: usize,
    strict: bool,
) -> Result<i32> {
    let t = print_theta(theta);
    let p = GaussCogParams::new(snr1, snr2, inr1, inr2, cnr, t, r0)?;
    let b = gaussian_cog_bounds_with(&p, density);
    let (delta_star, _) = maximize_over_delta(
        |d| u_cog(&p, d).into_iter().fold(f64::INFINITY, f64::min),
        density,
    );
    println!("r0: {}", g9(r0));
    println!("cooperation: {}", if b.cooperation { "on" } else { "off" });
    println!("c_bar_r0: {} (δ*={})", g9(b.c_bar_r0), g9(delta_star));
    match b.lower {
        Some(l) => println!("lower: {}", g9(l)),
        None => println!("lower: not asserted (R0<7)"),
    }
    println!("ldm_link: {}", g9(b.ldm_link));
    let c = GapConstants::default();
    let margins = [
        b.lower.map(|l| b.c_bar_r0 - l),
        b.lower.map(|l| l - (b.c_bar_r0 - c.cog_inner - 2.0 * r0)),
        Some((b.ldm_link + c.cog_link + 2.0 * r0) - b.c_bar_r0),
    ];
    let bad = print_margins(&COG_MARGIN_NAMES, &margins);
    Ok(if strict && bad > 0 { 2 } else { 0 })
}

fn cmd_codec_sim(
    n_d: u32,
    n_i: u32,
    n_c: u32,
    delta: Option<String>,
    blocks: u64,
    seed: Option<u64>,
) -> Result<i32> {
    if blocks == 0 {
        return Err(Error::InvalidParam("blocks must be at least 1".into()));
    }
    let p = LdmSymParams::new(n_d, n_i, n_c);
    let plan = match &delta {
        Some(s) => sym_plan_at(&p, &s.parse::<Delta>()?)?,
        None => optimal_sym_plan(&p)?,
    };
    if let Some(s) = seed {
        println!("seed: {s}");
    }
    println!("channel: ({n_d},{n_i},{n_c})");
    println!("capacity: {}", fmt_rat(&plan.sum));
    println!("plan: δ={}, {} slots per block", plan.delta, plan.schedule.total_slots());
    let res = run_halfduplex_sim(
        &LdmParams::Sym(p),
        &plan.schedule,
        &MessageAllocation::Sym(plan.alloc.clone()),
        blocks,
        seed.unwrap_or(0),
    )?;
    println!("blocks: {}", res.blocks);
    println!("tuples: {}, errors: {}", res.tuples, res.errors);
    println!("r1: {}, r2: {}", fmt_rat(&res.r1), fmt_rat(&res.r2));
    let want = plan.expected_sum(blocks);
    println!("sum rate: {} (expected {})", fmt_rat(&res.sum), fmt_rat(&want));
    if res.errors > 0 {
        return Err(Error::Inconsistent(format!("{} decode errors", res.errors)));
    }
    if res.sum != want {
        return Err(Error::Inconsistent(
            "simulated sum rate diverged from the plan".into(),
        ));
    }
    Ok(0)
}

fn cmd_fm_check(max: u32, guard: usize) -> Result<i32> {
    use RateVar::*;
    let mut cases: u64 = 0;
    let pipes: Vec<Rat> = (0..=(2 * max as i64)).map(|k| rat(k, 2)).collect();
    let zero = [rint(0)];
    for n_d in 0..=max {
        for n_i in 0..=max {
            if n_d == n_i {
                continue;
            }
            let p = LdmSymParams::new(n_d, n_i, 0);
            // The closed form pins the source-to-destination pipe to zero
            // on channels where interference is the weaker path.
            let sds: &[Rat] = if n_i > n_d { &pipes } else { &zero };
            for ss in &pipes {
                for sd in sds {
                    let poly = virtual_constraints_sym(&p, ss, sd);
                    let obj: Vec<(RateVar, Rat)> =
                        poly.vars.iter().map(|&v| (v, Rat::one())).collect();
                    let lp = max_weighted_rate(&poly, &obj)?;
                    let cf = closed_form_sum_virtual(n_d, n_i, ss, sd)?;
                    if lp != cf {
                        return Err(Error::Inconsistent(format!(
                            "sum-rate identity failed at ({n_d},{n_i}) ss={} sd={}: LP {} vs closed form {}",
                            fmt_rat(ss),
                            fmt_rat(sd),
                            fmt_rat(&lp),
                            fmt_rat(&cf),
                        )));
                    }
                    // Projection is the slow route; spot-check it on the
                    // integral pipe settings.
                    if ss.is_integer() && sd.is_integer() {
                        let lifted = with_total_rates(poly);
                        let proj = fourier_motzkin_guarded(
                            &lifted,
                            &[W1, U1, V1, V1p, W2, U2, V2, V2p],
                            guard,
                        )?;
                        let fm = max_weighted_rate(
                            &proj,
                            &[(R1, Rat::one()), (R2, Rat::one())],
                        )?;
                        if fm != cf {
                            return Err(Error::Inconsistent(format!(
                                "projection identity failed at ({n_d},{n_i}) ss={} sd={}: projection {} vs closed form {}",
                                fmt_rat(ss),
                                fmt_rat(sd),
                                fmt_rat(&fm),
                                fmt_rat(&cf),
                            )));
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    let bps = [rint(0), rat(1, 2), rint(1), rat(3, 2), rint(2)];
    for n1 in 0..=max {
        for n2 in 0..=max {
            for a1 in 0..=max {
                for a2 in 0..=max {
                    let v = ifc_cog_v(n1, n2, a1, a2);
                    for bp in &bps {
                        let p = LdmCogParams::new(n1, n2, a1, a2, 0);
                        let mut poly = virtual_constraints_cog(&p, bp);
                        poly.add_eq(
                            &[(W1, Rat::one()), (U1, Rat::one()), (V1, Rat::one())],
                            rint(n1 as i64),
                        );
                        let got =
                            max_weighted_rate(&poly, &[(W2, Rat::one()), (U2, Rat::one())])?;
                        let want = [rint(v[0]), rint(v[1]) + bp, rint(v[2]), rint(v[3]) + bp]
                            .into_iter()
                            .min()
                            .unwrap();
                        if got != want {
                            return Err(Error::Inconsistent(format!(
                                "pinned-primary identity failed at ({n1},{n2},{a1},{a2}) bp={}: LP {} vs min-v {}",
                                fmt_rat(bp),
                                fmt_rat(&got),
                                fmt_rat(&want),
                            )));
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    println!("all closed-form identities hold ({cases} cases)");
    Ok(0)
}

fn cmd_gdof(
    kind: GdofKind,
    sweep: Option<PathBuf>,
    out: Option<PathBuf>,
    format: OutFormat,
    aligned: bool,
) -> Result<i32> {
    let fig = match kind {
        GdofKind::Sum => {
            let mut sw = SumSweep { aligned, ..SumSweep::default() };
            if let Some(path) = &sweep {
                apply_sum_sweep(&mut sw, &read_text(path)?)?;
            }
            FigureSweep::Sum(sw)
        }
        GdofKind::Cog => {
            if aligned {
                return Err(Error::InvalidParam(
                    "--aligned only applies to the symmetric sweep".into(),
                ));
            }
            let mut sw = CogSweep::default();
            if let Some(path) = &sweep {
                apply_cog_sweep(&mut sw, &read_text(path)?)?;
            }
            FigureSweep::Cog(sw)
        }
    };
    let kind_str = match kind {
        GdofKind::Sum => "sum_gdof",
        GdofKind::Cog => "cog_gdof",
    };
    let csv = emit_figure_data(kind_str, &fig)?;
    let rows = csv.lines().count().saturating_sub(1);
    let doc = match format {
        OutFormat::Csv => csv,
        OutFormat::Json => figure_csv_to_json(kind_str, &csv),
    };
    match out {
        Some(path) => {
            fs::write(&path, doc)?;
            if let FigureSweep::Cog(c) = &fig {
                println!("note: n2={}, alpha2={} held fixed", fmt_rat(&c.n2), fmt_rat(&c.alpha2));
            }
            println!("wrote {} ({rows} rows)", path.display());
        }
        None => print!("{doc}"),
    }
    Ok(0)
}

fn cmd_verify_gaps(
    grid: Option<PathBuf>,
    density: Option<usize>,
    out: Option<PathBuf>,
    format: Option<OutFormat>,
    strict: bool,
) -> Result<i32> {
    let g = match &grid {
        Some(path) => parse_gap_grid(&read_text(path)?)?,
        None => GapGrid::default(),
    };
    let report = verify_gaps_with(&g, &GapConstants::default(), density.unwrap_or(DEFAULT_GRID_DENSITY))?;
    let render = |f: OutFormat| match f {
        OutFormat::Csv => gap_margins_csv(&report),
        OutFormat::Json => gap_report_json(&report),
    };
    match (&out, format) {
        (Some(path), f) => {
            fs::write(path, render(f.unwrap_or(OutFormat::Csv)))?;
            print_gap_summary(&report);
            println!("wrote {}", path.display());
        }
        (None, Some(f)) => print!("{}", render(f)),
        (None, None) => print_gap_summary(&report),
    }
    Ok(if strict && !report.violations.is_empty() { 2 } else { 0 })
}

fn print_gap_summary(report: &coopic::GapReport) {
    println!("grid: {}", report.grid);
    println!("max gap: {} bits", g9(report.max_gap));
    println!("violations: {}", report.violations.len());
    for v in &report.violations {
        println!(
            "violation: {}[{}] {} slack={} at {}",
            v.family,
            v.index,
            v.margin,
            g9(v.slack),
            v.context
        );
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidParam(format!("cannot read {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// key=range files. Lines are `key = value`; `#` starts a comment. Values
// are comma lists whose items are scalars, arithmetic ranges a:step:b
// (inclusive), or geometric ranges a:xF:b for gain grids.

fn kv_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidParam(format!(
                "line {}: expected key = value, got {line:?}",
                ln + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad number: {s:?}")))?;
    if !x.is_finite() {
        return Err(Error::InvalidParam(format!("number not finite: {s:?}")));
    }
    Ok(x)
}

const RANGE_CAP: usize = 100_000;

fn parse_f64_list(v: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for piece in v.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let parts: Vec<&str> = piece.split(':').collect();
        match parts.len() {
            1 => out.push(parse_f64(piece)?),
            3 => {
                let a = parse_f64(parts[0])?;
                let b = parse_f64(parts[2])?;
                let step = parts[1].trim();
                if let Some(f) = step.strip_prefix('x') {
                    let f = parse_f64(f)?;
                    if !(f > 0.0) || f == 1.0 || !(a > 0.0) {
                        return Err(Error::InvalidParam(format!(
                            "geometric range needs positive start and factor != 1: {piece:?}"
                        )));
                    }
                    let up = f > 1.0;
                    let mut x = a;
                    while (up && x <= b * (1.0 + 1e-9)) || (!up && x >= b * (1.0 - 1e-9)) {
                        out.push(x);
                        x *= f;
                        if out.len() > RANGE_CAP {
                            return Err(Error::InvalidParam(format!("range too long: {piece:?}")));
                        }
                    }
                } else {
                    let s = parse_f64(step)?;
                    if s == 0.0 || (b - a) * s < 0.0 {
                        return Err(Error::InvalidParam(format!(
                            "range step does not reach the end: {piece:?}"
                        )));
                    }
                    let span = (b - a).abs();
                    let mut k = 0usize;
                    loop {
                        let x = a + s * k as f64;
                        if (x - a).abs() > span * (1.0 + 1e-9) + 1e-12 {
                            break;
                        }
                        out.push(x);
                        k += 1;
                        if out.len() > RANGE_CAP {
                            return Err(Error::InvalidParam(format!("range too long: {piece:?}")));
                        }
                    }
                }
            }
            _ => {
                return Err(Error::InvalidParam(format!(
                    "expected scalar, a:step:b, or a:xF:b, got {piece:?}"
                )))
            }
        }
    }
    Ok(out)
}

fn parse_rat(s: &str) -> Result<Rat> {
    match s.trim().parse::<Delta>()? {
        Delta::Finite(r) => Ok(r),
        Delta::Infinity => Err(Error::InvalidParam(format!("finite value required: {s:?}"))),
    }
}

fn parse_rat_list(v: &str) -> Result<Vec<Rat>> {
    let mut out = Vec::new();
    for piece in v.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let parts: Vec<&str> = piece.split(':').collect();
        match parts.len() {
            1 => out.push(parse_rat(piece)?),
            3 => {
                let a = parse_rat(parts[0])?;
                let s = parse_rat(parts[1])?;
                let b = parse_rat(parts[2])?;
                if s.is_zero() || b < a {
                    return Err(Error::InvalidParam(format!(
                        "range step does not reach the end: {piece:?}"
                    )));
                }
                let mut x = a;
                while x <= b {
                    out.push(x.clone());
                    x += s.clone();
                    if out.len() > RANGE_CAP {
                        return Err(Error::InvalidParam(format!("range too long: {piece:?}")));
                    }
                }
            }
            _ => {
                return Err(Error::InvalidParam(format!(
                    "expected scalar or a:step:b, got {piece:?}"
                )))
            }
        }
    }
    Ok(out)
}

fn parse_beta_list(v: &str) -> Result<Vec<Beta>> {
    let mut out = Vec::new();
    for piece in v.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        if piece.contains(':') {
            out.extend(parse_rat_list(piece)?.into_iter().map(Beta::Finite));
        } else {
            out.push(piece.parse::<Beta>()?);
        }
    }
    Ok(out)
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::InvalidParam(format!("expected true or false, got {other:?}"))),
    }
}

fn expect_single_rat(v: &str, key: &str) -> Result<Rat> {
    let list = parse_rat_list(v)?;
    if list.len() != 1 {
        return Err(Error::InvalidParam(format!("{key} takes a single value")));
    }
    Ok(list.into_iter().next().unwrap())
}

fn apply_sum_sweep(sw: &mut SumSweep, text: &str) -> Result<()> {
    for (k, v) in kv_lines(text)? {
        match k.as_str() {
            "alpha" => sw.alphas = parse_rat_list(&v)?,
            "beta" => sw.betas = parse_beta_list(&v)?,
            "aligned" => sw.aligned = parse_bool(&v)?,
            _ => {
                return Err(Error::InvalidParam(format!("unknown sweep key: {k}")));
            }
        }
    }
    Ok(())
}

fn apply_cog_sweep(sw: &mut CogSweep, text: &str) -> Result<()> {
    for (k, v) in kv_lines(text)? {
        match k.as_str() {
            "n2" => sw.n2 = expect_single_rat(&v, "n2")?,
            "alpha2" => sw.alpha2 = expect_single_rat(&v, "alpha2")?,
            "alpha1" => sw.alpha1s = parse_rat_list(&v)?,
            "beta" => sw.betas = parse_beta_list(&v)?,
            _ => {
                return Err(Error::InvalidParam(format!("unknown sweep key: {k}")));
            }
        }
    }
    Ok(())
}

fn parse_gap_grid(text: &str) -> Result<GapGrid> {
    let mut g = GapGrid {
        snr: vec![],
        inr: vec![],
        cnr: vec![],
        theta: vec![],
        cog_gain: vec![],
        r0: vec![],
    };
    for (k, v) in kv_lines(text)? {
        let list = parse_f64_list(&v)?;
        match k.as_str() {
            "snr" => g.snr = list,
            "inr" => g.inr = list,
            "cnr" => g.cnr = list,
            "theta" => g.theta = list,
            "cog_gain" => g.cog_gain = list,
            "r0" => g.r0 = list,
            _ => {
                return Err(Error::InvalidParam(format!("unknown grid key: {k}")));
            }
        }
    }
    Ok(g)
}

/// The figure CSVs carry only digits, slashes, dots and `inf`, so the
/// JSON mirror can quote fields verbatim.
fn figure_csv_to_json(kind: &str, csv: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rows: Vec<&str> = lines.collect();
    let mut s = String::new();
    s.push_str("{\n  \"schema_version\": 1,\n");
    s.push_str(&format!("  \"kind\": \"{kind}\",\n"));
    s.push_str("  \"rows\": [\n");
    for (i, line) in rows.iter().enumerate() {
        let fields = line.split(',');
        let obj: Vec<String> = header
            .iter()
            .zip(fields)
            .map(|(h, f)| format!("\"{h}\": \"{f}\""))
            .collect();
        let sep = if i + 1 < rows.len() { "," } else { "" };
        s.push_str(&format!("    {{{}}}{sep}\n", obj.join(", ")));
    }
    s.push_str("  ]\n}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_lists_cover_scalars_and_both_range_kinds() {
        assert_eq!(parse_f64_list("1, 2.5, 1e3").unwrap(), vec![1.0, 2.5, 1000.0]);
        assert_eq!(parse_f64_list("0:0.5:2").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(
            parse_f64_list("1:x10:1e4").unwrap(),
            vec![1.0, 10.0, 100.0, 1000.0, 10000.0]
        );
        assert_eq!(parse_f64_list("4:x0.5:1").unwrap(), vec![4.0, 2.0, 1.0]);
        assert!(parse_f64_list("1:0:2").is_err());
        assert!(parse_f64_list("1:x1:2").is_err());
        assert!(parse_f64_list("nan").is_err());
        assert!(parse_f64_list("1:2").is_err());
    }

    #[test]
    fn rational_ranges_are_exact() {
        let got = parse_rat_list("0:1/4:1").unwrap();
        assert_eq!(got, vec![rint(0), rat(1, 4), rat(1, 2), rat(3, 4), rint(1)]);
        // 301 exact hundredths, the default figure resolution.
        assert_eq!(parse_rat_list("0:1/100:3").unwrap().len(), 301);
        assert!(parse_rat_list("1:1/2:1/4").is_err());
        assert!(parse_rat_list("inf").is_err());
    }

    #[test]
    fn beta_lists_admit_the_broadcast_limit() {
        let got = parse_beta_list("0, 16/5, inf").unwrap();
        assert_eq!(got, vec![Beta::zero(), Beta::finite(16, 5), Beta::Infinite]);
        assert_eq!(parse_beta_list("0:1:2").unwrap().len(), 3);
    }

    #[test]
    fn kv_lines_strip_comments_and_blanks() {
        let text = "# grid\n snr = 1, 10 # decades\n\ntheta=0\n";
        let got = kv_lines(text).unwrap();
        assert_eq!(
            got,
            vec![("snr".into(), "1, 10".into()), ("theta".into(), "0".into())]
        );
        assert!(kv_lines("snr 1 2").is_err());
    }

    #[test]
    fn capacity_lines_match_the_pinned_forms() {
        let zero = DeltaOptResult {
            value: rint(0),
            delta_star: Delta::Infinity,
            active: vec![0],
            any_delta: true,
        };
        assert_eq!(capacity_line(&zero), "0");
        let any = DeltaOptResult { value: rint(2), any_delta: true, ..zero.clone() };
        assert_eq!(capacity_line(&any), "2 (δ*: any)");
        let pinned = DeltaOptResult {
            value: rat(24, 5),
            delta_star: Delta::Finite(rat(1, 2)),
            active: vec![1, 2],
            any_delta: false,
        };
        assert_eq!(capacity_line(&pinned), "24/5 (δ*=1/2)");
        let inf = DeltaOptResult { delta_star: Delta::Infinity, ..pinned };
        assert_eq!(capacity_line(&inf), "24/5 (δ*=∞)");
    }

    #[test]
    fn figure_json_mirrors_the_csv() {
        let csv = "alpha,beta,d\n0,0,2\n1/2,16/5,27/16\n";
        let json = figure_csv_to_json("sum_gdof", csv);
        assert!(json.starts_with("{\n  \"schema_version\": 1,\n"));
        assert!(json.contains("\"kind\": \"sum_gdof\""));
        assert!(json.contains("{\"alpha\": \"1/2\", \"beta\": \"16/5\", \"d\": \"27/16\"}"));
        // exactly one comma-separated row boundary
        assert!(json.contains("\"2\"},\n"));
    }
}
