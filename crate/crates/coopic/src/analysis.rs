//! Degrees of freedom in the infinite-gain limit, constant-gap
//! certification sweeps, and the tabular data behind the figures.
//!
//! The degree-of-freedom computations are exact: substituting normalized
//! exponents into the Gaussian bound families turns every bound into a
//! linear-fractional function of the schedule ratio, so the max-min is a
//! crossing-point enumeration on rationals, not a float search. The
//! numeric extrapolation at large but finite gains survives only as a
//! cross-check in the tests.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::capacity::{
    gaussian_cog_bounds_with, gaussian_sum_inner_outer_with, FracBound, FracFamily,
    DEFAULT_GRID_DENSITY,
};
use crate::{
    fmt_rat, rat, rint, Delta, DeltaOptResult, Error, GaussCogParams, GaussSymParams, Rat, Result,
};

// ---------------------------------------------------------------------------
// The cooperation-link exponent.

/// Cooperation-link exponent β. `Infinite` dominates every max it enters,
/// so the bounds containing it stop binding and the family degenerates to
/// its broadcast reading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Beta {
    Finite(Rat),
    Infinite,
}

impl Beta {
    pub fn finite(p: i64, q: i64) -> Beta {
        Beta::Finite(rat(p, q))
    }

    pub fn zero() -> Beta {
        Beta::Finite(Rat::zero())
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(r) => write!(f, "{}", fmt_rat(r)),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Beta> {
        // Same grammar as the schedule ratio: nonnegative p/q or inf.
        Ok(match s.parse::<Delta>()? {
            Delta::Finite(r) => Beta::Finite(r),
            Delta::Infinity => Beta::Infinite,
        })
    }
}

fn max2(a: &Rat, b: &Rat) -> Rat {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

fn max3(a: &Rat, b: &Rat, c: &Rat) -> Rat {
    max2(&max2(a, b), c)
}

fn pos(r: &Rat) -> Rat {
    if r.is_positive() {
        r.clone()
    } else {
        Rat::zero()
    }
}

// ---------------------------------------------------------------------------
// Symmetric degrees of freedom.

/// Sum degree of freedom of the symmetric channel at interference
/// exponent α and cooperation exponent β.
///
/// Each Gaussian sum-rate bound normalizes to a linear-fractional
/// function of δ with denominator δ + 2; the result is the exact max-min
/// over δ ∈ [0, ∞]. At α = 1 the value depends on whether the four link
/// coefficients are phase-aligned (the cut-set matrix loses rank), so the
/// flag is mandatory exactly there.
pub fn gdof_sum(alpha: &Rat, beta: &Beta, aligned: Option<bool>) -> Result<DeltaOptResult> {
    if alpha.is_negative() {
        return Err(Error::InvalidParam("interference exponent must be >= 0".into()));
    }
    if let Beta::Finite(b) = beta {
        if b.is_negative() {
            return Err(Error::InvalidParam("cooperation exponent must be >= 0".into()));
        }
    }
    let one = Rat::one();
    let aligned = if *alpha == one {
        match aligned {
            Some(f) => f,
            None => {
                return Err(Error::InvalidParam(
                    "the degree of freedom is two-valued at unit interference exponent; \
                     an explicit alignment flag is required"
                        .into(),
                ))
            }
        }
    } else {
        false
    };

    let m1a = max2(&one, alpha); // max(1, α)
    let two = rint(2);
    // Numerator slopes and constants over the shared denominator δ + 2.
    // The beamforming bound's quadratic term collapses to a single power
    // of the direct gain when the links are aligned at α = 1.
    let q4 = if aligned { one.clone() } else { &two * &m1a };
    let b4 = FracBound::new(q4, &two * &m1a);
    let (bounds, kept): (Vec<FracBound>, Vec<usize>) = match beta {
        Beta::Finite(b) => {
            let m1b = max2(&one, b);
            let m1ab = max3(&one, alpha, b);
            let b1 = FracBound::new(two.clone(), &two * &m1b);
            let b2 = FracBound::new(max2(&(&two - alpha), alpha), &one + &m1ab);
            let b3 =
                FracBound::new(&two * &max2(alpha, &(&one - alpha)), &two * &m1ab);
            (vec![b1, b2, b3, b4], vec![0, 1, 2, 3])
        }
        // Infinite β: every bound holding the cooperation gain is vacuous
        // at finite δ, leaving the broadcast cap alone.
        Beta::Infinite => (vec![b4], vec![3]),
    };
    let mut r = FracFamily::symmetric(bounds).optimize();
    r.active = r.active.into_iter().map(|i| kept[i]).collect();
    Ok(r)
}

// ---------------------------------------------------------------------------
// Cognitive degrees of freedom.

/// The four secondary-rate caps at full primary rate, on normalized
/// exponents with the primary direct exponent pinned to 1.
fn cog_v_hat(n2: &Rat, a1: &Rat, a2: &Rat) -> [Rat; 4] {
    let one = Rat::one();
    let v1 = n2.clone();
    let v2 = max2(n2, a2) - a2.min(&one).clone();
    let v3 = pos(&(a1 - &one)) + pos(&(n2 - a1));
    let v4 = pos(&(a1 - &one)) - a2.min(&one).clone() + max2(&(n2 - a1), a2);
    [v1, v2, v3, v4]
}

/// Degree of freedom of the secondary user at full primary rate, with the
/// primary direct exponent normalized to 1.
///
/// For β = ∞ the optimum is the uniform limit of the finite-β optima: the
/// listening phase shrinks to nothing while still conveying the message,
/// so the value is the interference-only min of the two listening-free
/// caps at δ = 0.
pub fn gdof_cog(n2: &Rat, alpha1: &Rat, alpha2: &Rat, beta: &Beta) -> Result<DeltaOptResult> {
    for (name, r) in [("n2", n2), ("alpha1", alpha1), ("alpha2", alpha2)] {
        if r.is_negative() {
            return Err(Error::InvalidParam(format!("{name} must be >= 0")));
        }
    }
    let v = cog_v_hat(n2, alpha1, alpha2);
    match beta {
        Beta::Finite(b) => {
            if b.is_negative() {
                return Err(Error::InvalidParam("beta must be >= 0".into()));
            }
            let g = max3(b, alpha2, &Rat::one()) - Rat::one();
            let fam = FracFamily::cognitive(vec![
                FracBound::new(Rat::zero(), v[0].clone()),
                FracBound::new(g.clone(), v[1].clone()),
                FracBound::new(Rat::zero(), v[2].clone()),
                FracBound::new(g, v[3].clone()),
            ]);
            Ok(fam.optimize())
        }
        Beta::Infinite => {
            let value = v[0].clone().min(v[2].clone());
            let active = (0..4).step_by(2).filter(|&i| v[i] == value).collect();
            let any_delta = value.is_zero();
            Ok(DeltaOptResult { value, delta_star: Delta::zero(), active, any_delta })
        }
    }
}

// ---------------------------------------------------------------------------
// Figure samples.

/// One sample of a degree-of-freedom curve.
#[derive(Clone, Debug)]
pub enum GdofPoint {
    Sum { alpha: Rat, beta: Beta, aligned: bool, d: Rat },
    Cog { n2: Rat, alpha1: Rat, alpha2: Rat, beta: Beta, d: Rat },
}

impl GdofPoint {
    /// Range check: nonnegative, below the broadcast cap 2 max(1, α) for
    /// the symmetric curve and below the secondary's own link for the
    /// cognitive one.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            GdofPoint::Sum { alpha, d, .. } => {
                !d.is_negative() && *d <= rint(2) * max2(&Rat::one(), alpha)
            }
            GdofPoint::Cog { n2, d, .. } => !d.is_negative() && d <= n2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Inconsistent(format!("degree of freedom out of range: {self:?}")))
        }
    }
}

/// Sweep behind the symmetric figure: d against α, one curve per β.
#[derive(Clone, Debug)]
pub struct SumSweep {
    pub alphas: Vec<Rat>,
    pub betas: Vec<Beta>,
    pub aligned: bool,
}

impl Default for SumSweep {
    fn default() -> SumSweep {
        SumSweep {
            alphas: (0..=300).map(|k| rat(k, 100)).collect(),
            betas: default_betas(),
            aligned: false,
        }
    }
}

/// Sweep behind the cognitive figure: d against α1 at fixed n2 and α2,
/// one curve per β.
#[derive(Clone, Debug)]
pub struct CogSweep {
    pub n2: Rat,
    pub alpha2: Rat,
    pub alpha1s: Vec<Rat>,
    pub betas: Vec<Beta>,
}

impl Default for CogSweep {
    fn default() -> CogSweep {
        CogSweep {
            n2: rat(3, 2),
            alpha2: rat(1, 2),
            alpha1s: (0..=300).map(|k| rat(k, 100)).collect(),
            betas: default_betas(),
        }
    }
}

/// Default β legend: off, the threshold where listening starts to pay,
/// one strictly profitable finite value, and the broadcast limit.
pub fn default_betas() -> Vec<Beta> {
    vec![Beta::zero(), Beta::finite(1, 1), Beta::finite(16, 5), Beta::Infinite]
}

/// Sweep specification for [`emit_figure_data`].
#[derive(Clone, Debug)]
pub enum FigureSweep {
    Sum(SumSweep),
    Cog(CogSweep),
    Margins(GapGrid),
}

/// Render one figure's data as comma-separated text with a fixed header.
/// Kinds: `sum_gdof` (alpha,beta,d), `cog_gdof` (alpha1,beta,d) and
/// `gap_margins` (one row per certified grid point). Rows are emitted
/// curve-major in the order the sweep lists them.
pub fn emit_figure_data(kind: &str, sweep: &FigureSweep) -> Result<String> {
    match (kind, sweep) {
        ("sum_gdof", FigureSweep::Sum(s)) => {
            let mut out = String::from("alpha,beta,d\n");
            for beta in &s.betas {
                for alpha in &s.alphas {
                    let r = gdof_sum(alpha, beta, Some(s.aligned))?;
                    let p = GdofPoint::Sum {
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        aligned: s.aligned,
                        d: r.value.clone(),
                    };
                    p.validate()?;
                    out.push_str(&format!("{},{},{}\n", fmt_rat(alpha), beta, fmt_rat(&r.value)));
                }
            }
            Ok(out)
        }
        ("cog_gdof", FigureSweep::Cog(s)) => {
            let mut out = String::from("alpha1,beta,d\n");
            for beta in &s.betas {
                for a1 in &s.alpha1s {
                    let r = gdof_cog(&s.n2, a1, &s.alpha2, beta)?;
                    let p = GdofPoint::Cog {
                        n2: s.n2.clone(),
                        alpha1: a1.clone(),
                        alpha2: s.alpha2.clone(),
                        beta: beta.clone(),
                        d: r.value.clone(),
                    };
                    p.validate()?;
                    out.push_str(&format!("{},{},{}\n", fmt_rat(a1), beta, fmt_rat(&r.value)));
                }
            }
            Ok(out)
        }
        ("gap_margins", FigureSweep::Margins(grid)) => {
            let report = verify_gaps(grid)?;
            Ok(gap_margins_csv(&report))
        }
        ("sum_gdof" | "cog_gdof" | "gap_margins", _) => Err(Error::InvalidParam(format!(
            "sweep specification does not match figure kind {kind}"
        ))),
        _ => Err(Error::InvalidParam(format!("unknown figure kind: {kind}"))),
    }
}

// ---------------------------------------------------------------------------
// Constant-gap certification.

/// The certified distances. Every field is the additive constant of one
/// sandwich inequality; tests corrupt them to prove the margins are live.
#[derive(Clone, Copy, Debug)]
pub struct GapConstants {
    /// Envelope minus this lower-bounds the scheme rate.
    pub sym_inner: f64,
    /// Converse sits at most this far above the envelope.
    pub sym_outer: f64,
    /// Envelope exceeds its bit-level shadow by at most this.
    pub sym_ldm_over: f64,
    /// Scheme rate drops below the shadow by at most this.
    pub sym_ldm_under: f64,
    /// Cognitive envelope minus this and twice the back-off lower-bounds
    /// the scheme rate.
    pub cog_inner: f64,
    /// Cognitive envelope stays below its shadow plus this and twice the
    /// back-off.
    pub cog_link: f64,
}

impl Default for GapConstants {
    fn default() -> GapConstants {
        GapConstants {
            sym_inner: 17.0,
            sym_outer: 7.0,
            sym_ldm_over: 10.0,
            sym_ldm_under: 7.0,
            cog_inner: 23.0,
            cog_link: 13.0,
        }
    }
}

/// Cartesian evaluation grid. The symmetric family walks
/// snr × inr × cnr × theta; the cognitive family walks all five gains
/// independently over `cog_gain` with phase 0 and back-off `r0`. Either
/// family may be empty, not both.
#[derive(Clone, Debug)]
pub struct GapGrid {
    pub snr: Vec<f64>,
    pub inr: Vec<f64>,
    pub cnr: Vec<f64>,
    pub theta: Vec<f64>,
    pub cog_gain: Vec<f64>,
    pub r0: Vec<f64>,
}

impl Default for GapGrid {
    fn default() -> GapGrid {
        let decades = |n: i32| (0..=n).map(|k| 10f64.powi(k)).collect::<Vec<_>>();
        GapGrid {
            snr: decades(8),
            inr: decades(8),
            cnr: decades(8),
            theta: vec![
                0.0,
                std::f64::consts::FRAC_PI_4,
                std::f64::consts::FRAC_PI_2,
                std::f64::consts::PI,
            ],
            cog_gain: vec![1.0, 1e2, 1e4, 1e6],
            r0: vec![7.0, 10.0],
        }
    }
}

impl GapGrid {
    /// A grid with no cognitive half.
    pub fn sym_only(snr: Vec<f64>, inr: Vec<f64>, cnr: Vec<f64>, theta: Vec<f64>) -> GapGrid {
        GapGrid { snr, inr, cnr, theta, cog_gain: vec![], r0: vec![] }
    }

    pub fn sym_len(&self) -> usize {
        self.snr.len() * self.inr.len() * self.cnr.len() * self.theta.len()
    }

    pub fn cog_len(&self) -> usize {
        self.cog_gain.len().pow(5) * self.r0.len()
    }

    fn sym_point(&self, i: usize) -> GaussSymParams {
        let (nc, nt) = (self.cnr.len(), self.theta.len());
        let theta = self.theta[i % nt];
        let cnr = self.cnr[(i / nt) % nc];
        let inr = self.inr[(i / (nt * nc)) % self.inr.len()];
        let snr = self.snr[i / (nt * nc * self.inr.len())];
        GaussSymParams { snr, inr, cnr, theta }
    }

    fn cog_point(&self, i: usize) -> GaussCogParams {
        let g = &self.cog_gain;
        let n = g.len();
        let r0 = self.r0[i % self.r0.len()];
        let mut j = i / self.r0.len();
        let mut gains = [0.0; 5];
        for slot in gains.iter_mut().rev() {
            *slot = g[j % n];
            j /= n;
        }
        let [snr1, snr2, inr1, inr2, cnr] = gains;
        GaussCogParams { snr1, snr2, inr1, inr2, cnr, theta: 0.0, r0 }
    }
}

pub const SYM_MARGIN_NAMES: [&str; 5] =
    ["achievable_le_outer", "inner_gap", "outer_gap", "shadow_over", "shadow_under"];
pub const COG_MARGIN_NAMES: [&str; 3] = ["lower_le_envelope", "inner_gap", "shadow_link"];

/// Slack below this is a violation; above is numeric noise.
const SLACK_TOL: f64 = 1e-6;

/// One certified symmetric grid point. Margins are slacks: the inequality
/// holds iff the entry is nonnegative.
#[derive(Clone, Debug, Serialize)]
pub struct SymGapPoint {
    pub snr: f64,
    pub inr: f64,
    pub cnr: f64,
    pub theta: f64,
    pub c_bar: f64,
    pub c_bar_ldm: f64,
    pub achievable: f64,
    pub outer: f64,
    pub region: u8,
    pub cooperation: bool,
    pub margins: [f64; 5],
}

/// One certified cognitive grid point. The lower bound and its two
/// margins are asserted only when the back-off is at least 7.
#[derive(Clone, Debug, Serialize)]
pub struct CogGapPoint {
    pub snr1: f64,
    pub snr2: f64,
    pub inr1: f64,
    pub inr2: f64,
    pub cnr: f64,
    pub r0: f64,
    pub c_bar_r0: f64,
    pub lower: Option<f64>,
    pub ldm_link: f64,
    pub cooperation: bool,
    pub margins: [Option<f64>; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct GapViolation {
    pub family: String,
    /// Index of the offending point in grid order.
    pub index: usize,
    pub margin: String,
    pub slack: f64,
    pub context: String,
}

/// Everything one certification run observed: the full per-point tables,
/// the violations (data, not errors), and the largest distance from the
/// scheme to its envelope.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub grid: String,
    pub sym: Vec<SymGapPoint>,
    pub cog: Vec<CogGapPoint>,
    pub violations: Vec<GapViolation>,
    pub max_gap: f64,
}

fn sym_gap_point(p: &GaussSymParams, c: &GapConstants, density: usize) -> SymGapPoint {
    let b = gaussian_sum_inner_outer_with(p, density);
    let margins = [
        b.outer - b.achievable,
        b.achievable - (b.c_bar - c.sym_inner),
        (b.c_bar + c.sym_outer) - b.outer,
        (b.c_bar_ldm + c.sym_ldm_over) - b.c_bar,
        b.achievable - (b.c_bar_ldm - c.sym_ldm_under),
    ];
    SymGapPoint {
        snr: p.snr,
        inr: p.inr,
        cnr: p.cnr,
        theta: p.theta,
        c_bar: b.c_bar,
        c_bar_ldm: b.c_bar_ldm,
        achievable: b.achievable,
        outer: b.outer,
        region: b.region,
        cooperation: b.cooperation,
        margins,
    }
}

fn cog_gap_point(p: &GaussCogParams, c: &GapConstants, density: usize) -> CogGapPoint {
    let b = gaussian_cog_bounds_with(p, density);
    let margins = [
        b.lower.map(|l| b.c_bar_r0 - l),
        b.lower.map(|l| l - (b.c_bar_r0 - c.cog_inner - 2.0 * p.r0)),
        Some((b.ldm_link + c.cog_link + 2.0 * p.r0) - b.c_bar_r0),
    ];
    CogGapPoint {
        snr1: p.snr1,
        snr2: p.snr2,
        inr1: p.inr1,
        inr2: p.inr2,
        cnr: p.cnr,
        r0: p.r0,
        c_bar_r0: b.c_bar_r0,
        lower: b.lower,
        ldm_link: b.ldm_link,
        cooperation: b.cooperation,
        margins,
    }
}

/// Evaluate `point` at every index below `len` on all available cores and
/// return the results in index order. Points are independent; merging by
/// index keeps the outcome identical to the sequential run.
fn parallel_points<T: Send, F: Fn(usize) -> T + Sync>(len: usize, point: F) -> Vec<T> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(len.max(1));
    if workers <= 1 {
        return (0..len).map(point).collect();
    }
    let mut strides: Vec<Vec<(usize, T)>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let point = &point;
                scope.spawn(move || {
                    (w..len).step_by(workers).map(|i| (i, point(i))).collect::<Vec<_>>()
                })
            })
            .collect();
        strides = handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect();
    });
    let mut slots: Vec<Option<T>> = (0..len).map(|_| None).collect();
    for stride in strides {
        for (i, v) in stride {
            slots[i] = Some(v);
        }
    }
    slots.into_iter().map(|s| s.expect("grid index missed")).collect()
}

/// Certify every sandwich inequality over the default grid and constants.
pub fn verify_gaps(grid: &GapGrid) -> Result<GapReport> {
    verify_gaps_with(grid, &GapConstants::default(), DEFAULT_GRID_DENSITY)
}

/// Certify every sandwich inequality over `grid`, with the gap constants
/// and the δ-search density spelled out. Violations are recorded in the
/// report, never raised as errors.
pub fn verify_gaps_with(
    grid: &GapGrid,
    consts: &GapConstants,
    density: usize,
) -> Result<GapReport> {
    let (n_sym, n_cog) = (grid.sym_len(), grid.cog_len());
    if n_sym == 0 && n_cog == 0 {
        return Err(Error::InvalidParam("empty certification grid".into()));
    }
    let sym = parallel_points(n_sym, |i| sym_gap_point(&grid.sym_point(i), consts, density));
    let cog = parallel_points(n_cog, |i| cog_gap_point(&grid.cog_point(i), consts, density));

    let mut violations = Vec::new();
    let mut max_gap = f64::NEG_INFINITY;
    for (i, pt) in sym.iter().enumerate() {
        max_gap = max_gap.max(pt.c_bar - pt.achievable);
        for (m, slack) in pt.margins.iter().enumerate() {
            if *slack < -SLACK_TOL {
                violations.push(GapViolation {
                    family: "sym".into(),
                    index: i,
                    margin: SYM_MARGIN_NAMES[m].into(),
                    slack: *slack,
                    context: format!(
                        "snr={:e} inr={:e} cnr={:e} theta={}",
                        pt.snr, pt.inr, pt.cnr, pt.theta
                    ),
                });
            }
        }
    }
    for (i, pt) in cog.iter().enumerate() {
        if let Some(l) = pt.lower {
            max_gap = max_gap.max(pt.c_bar_r0 - l);
        }
        for (m, slack) in pt.margins.iter().enumerate() {
            let Some(slack) = slack else { continue };
            if *slack < -SLACK_TOL {
                violations.push(GapViolation {
                    family: "cog".into(),
                    index: i,
                    margin: COG_MARGIN_NAMES[m].into(),
                    slack: *slack,
                    context: format!(
                        "snr1={:e} snr2={:e} inr1={:e} inr2={:e} cnr={:e} r0={}",
                        pt.snr1, pt.snr2, pt.inr1, pt.inr2, pt.cnr, pt.r0
                    ),
                });
            }
        }
    }
    if max_gap == f64::NEG_INFINITY {
        max_gap = 0.0;
    }
    Ok(GapReport {
        grid: format!("sym {n_sym} points, cog {n_cog} points"),
        sym,
        cog,
        violations,
        max_gap,
    })
}

// ---------------------------------------------------------------------------
// Report rendering.

/// Nine significant digits, scientific; enough to reproduce every f64
/// comparison made here without printing noise digits.
fn g9(x: f64) -> String {
    format!("{:.8e}", x)
}

fn g9_opt(x: Option<f64>) -> String {
    x.map(g9).unwrap_or_default()
}

/// The per-point margin table. One row per certified point, symmetric
/// rows first; cells that do not apply to a family stay empty.
pub fn gap_margins_csv(r: &GapReport) -> String {
    let mut out = String::from(
        "family,snr,inr,cnr,theta,snr2,inr2,r0,c_bar,c_bar_ldm,achievable,outer,\
         margin1,margin2,margin3,margin4,margin5\n",
    );
    for p in &r.sym {
        out.push_str(&format!(
            "sym,{},{},{},{},,,,{},{},{},{},{},{},{},{},{}\n",
            g9(p.snr),
            g9(p.inr),
            g9(p.cnr),
            g9(p.theta),
            g9(p.c_bar),
            g9(p.c_bar_ldm),
            g9(p.achievable),
            g9(p.outer),
            g9(p.margins[0]),
            g9(p.margins[1]),
            g9(p.margins[2]),
            g9(p.margins[3]),
            g9(p.margins[4]),
        ));
    }
    for p in &r.cog {
        out.push_str(&format!(
            "cog,{},{},{},,{},{},{},{},{},{},,{},{},{},,\n",
            g9(p.snr1),
            g9(p.inr1),
            g9(p.cnr),
            g9(p.snr2),
            g9(p.inr2),
            g9(p.r0),
            g9(p.c_bar_r0),
            g9(p.ldm_link),
            g9_opt(p.lower),
            g9_opt(p.margins[0]),
            g9_opt(p.margins[1]),
            g9_opt(p.margins[2]),
        ));
    }
    out
}

/// JSON mirror of a report. The schema version changes only with the
/// field layout.
pub fn gap_report_json(r: &GapReport) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        schema_version: u32,
        grid: &'a str,
        max_gap: f64,
        violations: &'a [GapViolation],
        sym: &'a [SymGapPoint],
        cog: &'a [CogGapPoint],
    }
    serde_json::to_string_pretty(&Doc {
        schema_version: 1,
        grid: &r.grid,
        max_gap: r.max_gap,
        violations: &r.violations,
        sym: &r.sym,
        cog: &r.cog,
    })
    .expect("report serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{maximize_over_delta, u_sym};
    use num_traits::ToPrimitive;

    fn dsum(alpha: &Rat, beta: &Beta) -> Rat {
        gdof_sum(alpha, beta, Some(false)).unwrap().value
    }

    #[test]
    fn interference_free_links_get_full_rate() {
        let r = gdof_sum(&rint(0), &Beta::zero(), None).unwrap();
        assert_eq!(r.value, rint(2));
        assert_eq!(r.delta_star, Delta::Infinity);
    }

    #[test]
    fn aligned_unit_interference_collapses_to_one() {
        for beta in [Beta::zero(), Beta::finite(16, 5), Beta::Infinite] {
            let r = gdof_sum(&rint(1), &beta, Some(true)).unwrap();
            assert_eq!(r.value, rint(1), "beta {beta}");
        }
        // Flat in δ when the cooperation gain is off.
        assert!(gdof_sum(&rint(1), &Beta::zero(), Some(true)).unwrap().any_delta);
    }

    #[test]
    fn unit_interference_needs_the_alignment_flag() {
        assert!(matches!(
            gdof_sum(&rint(1), &Beta::zero(), None),
            Err(Error::InvalidParam(_))
        ));
        // Away from α = 1 the flag is irrelevant.
        assert_eq!(
            gdof_sum(&rat(1, 2), &Beta::zero(), None).unwrap().value,
            gdof_sum(&rat(1, 2), &Beta::zero(), Some(true)).unwrap().value
        );
    }

    #[test]
    fn weak_cooperation_is_wasted() {
        let base = dsum(&rat(1, 2), &Beta::zero());
        assert_eq!(base, rint(1));
        assert_eq!(dsum(&rat(1, 2), &Beta::finite(1, 1)), base);
        assert_eq!(dsum(&rat(1, 2), &Beta::finite(3, 4)), base);
    }

    #[test]
    fn strong_cooperation_beats_the_plain_channel() {
        // Triple crossing of the rising beamforming cap with the falling
        // listening bounds: d = 2 - 1/β in the weak-interference regime.
        assert_eq!(dsum(&rat(1, 2), &Beta::finite(16, 5)), rat(27, 16));
        let r = gdof_sum(&rint(1), &Beta::finite(16, 5), Some(false)).unwrap();
        assert_eq!(r.value, rat(32, 21));
        assert_eq!(r.delta_star, Delta::finite(11, 5));
        assert!(r.value > dsum(&rint(1), &Beta::zero()) + rat(1, 20));
    }

    #[test]
    fn broadcast_limit_doubles_the_strongest_link() {
        let r = gdof_sum(&rint(2), &Beta::Infinite, None).unwrap();
        assert_eq!(r.value, rint(4));
        assert_eq!(r.delta_star, Delta::Infinity);
        assert_eq!(r.active, vec![3]);
        assert_eq!(gdof_sum(&rat(1, 2), &Beta::Infinite, None).unwrap().value, rint(2));
    }

    #[test]
    fn continuous_at_unit_interference_when_not_aligned() {
        for beta in [Beta::zero(), Beta::finite(2, 1), Beta::finite(16, 5)] {
            let at = dsum(&rint(1), &beta);
            let below = dsum(&rat(99, 100), &beta);
            let above = dsum(&rat(101, 100), &beta);
            let tol = rat(5, 100);
            assert!((at.clone() - below).abs() < tol, "beta {beta}");
            assert!((at - above).abs() < tol, "beta {beta}");
        }
    }

    #[test]
    fn monotone_in_cooperation_and_saturating() {
        for alpha in [rat(1, 4), rint(1), rat(3, 2), rat(5, 2)] {
            let cap = gdof_sum(&alpha, &Beta::Infinite, Some(false)).unwrap().value;
            let mut prev = Rat::zero();
            for b in [rint(0), rat(1, 2), rint(1), rint(2), rat(16, 5), rint(5), rint(10)] {
                let v = dsum(&alpha, &Beta::Finite(b.clone()));
                assert!(v >= prev, "alpha {alpha} beta {b}");
                assert!(v <= cap, "alpha {alpha} beta {b}");
                prev = v;
            }
            // The broadcast value is the asymptote.
            let far = dsum(&alpha, &Beta::Finite(rint(10_000)));
            assert!(cap.clone() - far < rat(1, 100), "alpha {alpha}");
        }
    }

    #[test]
    fn gdof_matches_the_large_gain_limit() {
        // 50 exponent pairs in hundredths, gains at SNR = 10^40. The
        // exponents keep clear of pairwise ties (where a finite-gain log
        // of a sum picks up a whole extra bit) and of β ≤ 1 (where the
        // optimum runs off the numeric δ grid). The gain has to be this
        // large: doubled-power terms inside the logs tilt each bound's
        // slope in δ by ~1/lg SNR, and the flattest crossing in this set
        // needs that tilt below 0.02 per unit to stay interior. Phase is
        // fixed off-axis to keep the quadratic term full rank.
        let alphas = [15i64, 35, 55, 78, 122, 144, 166, 188, 214, 236];
        let betas = [172i64, 225, 263, 341, 500];
        let snr: f64 = 1e40;
        let lg_snr = snr.log2();
        for a in alphas {
            for b in betas {
                let d = dsum(&rat(a, 100), &Beta::finite(b, 100)).to_f64().unwrap();
                let p = GaussSymParams::new(
                    snr,
                    snr.powf(a as f64 / 100.0),
                    snr.powf(b as f64 / 100.0),
                    std::f64::consts::FRAC_PI_2,
                )
                .unwrap();
                let (_, c_bar) = maximize_over_delta(
                    |t| u_sym(&p, t).into_iter().fold(f64::INFINITY, f64::min),
                    512,
                );
                let err = (d - c_bar / lg_snr).abs();
                assert!(err <= 0.02, "alpha {a} beta {b}: {d} vs {}", c_bar / lg_snr);
            }
        }
    }

    #[test]
    fn degrees_stay_inside_their_caps() {
        for ka in 0..=12 {
            let alpha = rat(ka, 4);
            let cap = rint(2) * max2(&Rat::one(), &alpha);
            for beta in [Beta::zero(), Beta::finite(2, 1), Beta::finite(7, 2), Beta::Infinite] {
                let d = gdof_sum(&alpha, &beta, Some(false)).unwrap().value;
                assert!(!d.is_negative() && d <= cap, "alpha {alpha} beta {beta}");
            }
        }
    }

    #[test]
    fn cog_degrees_match_the_closed_form_regions() {
        // Interference nested between the two direct links kills the
        // secondary even with an unbounded cooperation gain.
        let r = gdof_cog(&rat(4, 5), &rat(9, 10), &rat(3, 10), &Beta::Infinite).unwrap();
        assert_eq!(r.value, rint(0));
        assert!(r.any_delta);
        // Interference-free secondary keeps its full link.
        for beta in [Beta::zero(), Beta::finite(2, 1), Beta::Infinite] {
            let r = gdof_cog(&rint(1), &rint(0), &rint(0), &beta).unwrap();
            assert_eq!(r.value, rint(1));
            assert!(r.delta_star.is_zero());
        }
    }

    #[test]
    fn cog_weak_cooperation_equals_none() {
        for (n2, a1, a2) in [(rat(3, 2), rat(1, 2), rat(1, 2)), (rint(2), rint(3), rint(2)), (rat(1, 2), rat(1, 4), rat(5, 4))] {
            let base = gdof_cog(&n2, &a1, &a2, &Beta::zero()).unwrap().value;
            let thresh = max2(&Rat::one(), &a2);
            for b in [rat(1, 2), rint(1), thresh.clone()] {
                if b <= thresh {
                    let v = gdof_cog(&n2, &a1, &a2, &Beta::Finite(b)).unwrap().value;
                    assert_eq!(v, base);
                }
            }
        }
    }

    #[test]
    fn cog_infinite_beta_is_the_finite_limit() {
        for (n2, a1, a2) in [(rat(3, 2), rint(0), rat(1, 2)), (rint(2), rat(5, 4), rint(1)), (rint(3), rat(7, 2), rat(1, 3))] {
            let lim = gdof_cog(&n2, &a1, &a2, &Beta::Infinite).unwrap().value;
            let far = gdof_cog(&n2, &a1, &a2, &Beta::Finite(rint(1 << 20))).unwrap().value;
            assert!(lim.clone() - far.clone() < rat(1, 1000));
            assert!(far <= lim);
            assert!(lim <= n2);
        }
    }

    #[test]
    fn region_one_point_certifies_without_cooperation() {
        let grid = GapGrid::sym_only(vec![1e4], vec![1e2], vec![0.5], vec![0.0]);
        let r = verify_gaps_with(&grid, &GapConstants::default(), 128).unwrap();
        assert_eq!(r.sym.len(), 1);
        assert!(!r.sym[0].cooperation);
        assert_eq!(r.sym[0].region, 1);
        assert!(r.violations.is_empty());
        assert!(r.max_gap <= GapConstants::default().sym_inner);
    }

    #[test]
    fn corrupted_constant_is_caught() {
        let grid = GapGrid::sym_only(vec![1e4], vec![1e2], vec![1e6], vec![0.0]);
        let honest = verify_gaps_with(&grid, &GapConstants::default(), 128).unwrap();
        assert!(honest.violations.is_empty());
        let broken = GapConstants { sym_inner: 1.0, ..Default::default() };
        let r = verify_gaps_with(&grid, &broken, 128).unwrap();
        assert!(!r.violations.is_empty());
        assert_eq!(r.violations[0].margin, "inner_gap");
        assert!(r.violations[0].slack < 0.0);
    }

    #[test]
    fn cognitive_grid_records_margins() {
        let grid = GapGrid {
            snr: vec![],
            inr: vec![],
            cnr: vec![],
            theta: vec![],
            cog_gain: vec![1e2, 1e4],
            r0: vec![5.0, 8.0],
        };
        let r = verify_gaps_with(&grid, &GapConstants::default(), 128).unwrap();
        assert_eq!(r.cog.len(), 64);
        assert!(r.violations.is_empty());
        for p in &r.cog {
            if p.r0 < 7.0 {
                assert!(p.lower.is_none());
                assert!(p.margins[0].is_none() && p.margins[1].is_none());
            } else {
                assert!(p.lower.is_some());
            }
            assert!(p.margins[2].is_some());
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        let grid = GapGrid::sym_only(vec![], vec![], vec![], vec![]);
        assert!(verify_gaps_with(&grid, &GapConstants::default(), 64).is_err());
    }

    #[test]
    fn figure_tables_have_fixed_headers() {
        let sweep = FigureSweep::Sum(SumSweep {
            alphas: vec![rint(0), rat(1, 2), rint(1)],
            betas: vec![Beta::zero(), Beta::finite(16, 5)],
            aligned: false,
        });
        let t = emit_figure_data("sum_gdof", &sweep).unwrap();
        let mut lines = t.lines();
        assert_eq!(lines.next(), Some("alpha,beta,d"));
        assert_eq!(t.lines().count(), 1 + 6);
        assert!(t.contains("1/2,16/5,27/16"));

        let sweep = FigureSweep::Cog(CogSweep {
            n2: rat(3, 2),
            alpha2: rat(1, 2),
            alpha1s: vec![rint(0)],
            betas: vec![Beta::finite(16, 5), Beta::Infinite],
        });
        let t = emit_figure_data("cog_gdof", &sweep).unwrap();
        assert_eq!(t.lines().next(), Some("alpha1,beta,d"));
        assert!(t.contains("0,16/5,11/9"));
        assert!(t.contains("0,inf,3/2"));
    }

    #[test]
    fn empty_sweep_emits_only_the_header() {
        let sweep = FigureSweep::Sum(SumSweep { alphas: vec![], betas: vec![], aligned: false });
        assert_eq!(emit_figure_data("sum_gdof", &sweep).unwrap(), "alpha,beta,d\n");
    }

    #[test]
    fn unknown_or_mismatched_kinds_are_errors() {
        let sweep = FigureSweep::Sum(SumSweep::default());
        assert!(matches!(
            emit_figure_data("sum_dgof", &sweep),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            emit_figure_data("cog_gdof", &sweep),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn margin_table_and_json_mirror_share_the_report() {
        let grid = GapGrid::sym_only(vec![1e4], vec![1e2], vec![1e6], vec![0.0]);
        let r = verify_gaps_with(&grid, &GapConstants::default(), 128).unwrap();
        let csv = gap_margins_csv(&r);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("family,snr,inr,cnr,theta,"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("sym,1.00000000e4,"));
        assert_eq!(csv.lines().count(), 2);

        let json = gap_report_json(&r);
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"max_gap\""));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["schema_version"], 1);
        assert_eq!(parsed["sym"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn beta_round_trips_through_text() {
        assert_eq!("16/5".parse::<Beta>().unwrap(), Beta::finite(16, 5));
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
        assert_eq!(Beta::finite(16, 5).to_string(), "16/5");
        assert_eq!(Beta::Infinite.to_string(), "inf");
        assert!("-2".parse::<Beta>().is_err());
    }
}
