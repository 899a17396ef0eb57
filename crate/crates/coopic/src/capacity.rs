//! Closed-form capacity quantities for both channel families, exact where
//! the model is exact (bit-level) and floating point where it is not
//! (Gaussian), plus the schedule-ratio optimizers behind every `max_δ`.
//!
//! Exact quantities are max-mins of linear-fractional functions of the
//! schedule ratio and are optimized by crossing-point enumeration.
//! Gaussian quantities mix logs of the gains and are optimized on a dense
//! logarithmic grid with golden-section refinement.

use num_traits::{One, Signed, Zero};

use crate::ldm::{LdmCogParams, LdmSymParams};
use crate::{rint, Delta, Error, Rat, Result};

// ---------------------------------------------------------------------------
// Exact max-min over the schedule ratio.

/// One bound `(a δ + b) / (c δ + d)`; the denominator `(c, d)` is shared by
/// the whole family (`(1, 2)` for the symmetric schedule, `(1, 1)` for the
/// cognitive one).
#[derive(Clone, Debug)]
pub struct FracBound {
    pub num_slope: Rat,
    pub num_const: Rat,
}

impl FracBound {
    pub fn new(num_slope: Rat, num_const: Rat) -> FracBound {
        FracBound { num_slope, num_const }
    }

    pub fn of_ints(a: i64, b: i64) -> FracBound {
        FracBound::new(rint(a), rint(b))
    }
}

#[derive(Clone, Debug)]
pub struct FracFamily {
    pub bounds: Vec<FracBound>,
    den_slope: Rat,
    den_const: Rat,
}

/// Outcome of a `max_δ min(bounds)` optimization.
#[derive(Clone, Debug)]
pub struct DeltaOptResult {
    pub value: Rat,
    pub delta_star: Delta,
    /// Bound indices attaining the minimum at `delta_star`.
    pub active: Vec<usize>,
    /// True when the min is the same for every δ in [0, ∞].
    pub any_delta: bool,
}

impl FracFamily {
    pub fn symmetric(bounds: Vec<FracBound>) -> FracFamily {
        FracFamily { bounds, den_slope: Rat::one(), den_const: rint(2) }
    }

    pub fn cognitive(bounds: Vec<FracBound>) -> FracFamily {
        FracFamily { bounds, den_slope: Rat::one(), den_const: Rat::one() }
    }

    /// min over the family at a finite δ ≥ 0.
    pub fn eval(&self, delta: &Rat) -> Rat {
        assert!(!delta.is_negative());
        let den = &self.den_slope * delta + &self.den_const;
        self.bounds
            .iter()
            .map(|b| (&b.num_slope * delta + &b.num_const) / &den)
            .min()
            .expect("empty bound family")
    }

    /// min over the family in the δ → ∞ limit.
    pub fn eval_inf(&self) -> Rat {
        self.bounds
            .iter()
            .map(|b| &b.num_slope / &self.den_slope)
            .min()
            .expect("empty bound family")
    }

    pub fn eval_delta(&self, delta: &Delta) -> Rat {
        match delta {
            Delta::Finite(d) => self.eval(d),
            Delta::Infinity => self.eval_inf(),
        }
    }

    fn active_at(&self, delta: &Delta, value: &Rat) -> Vec<usize> {
        match delta {
            Delta::Finite(d) => {
                let den = &self.den_slope * d + &self.den_const;
                self.bounds
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| &((&b.num_slope * d + &b.num_const) / &den) == value)
                    .map(|(i, _)| i)
                    .collect()
            }
            Delta::Infinity => self
                .bounds
                .iter()
                .enumerate()
                .filter(|(_, b)| &(&b.num_slope / &self.den_slope) == value)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    /// Candidate δ where the max of the min can sit: both endpoints and
    /// every positive pairwise crossing. With a common positive
    /// denominator, two bounds cross where their numerators do.
    pub fn candidates(&self) -> Vec<Delta> {
        let mut out = vec![Delta::zero(), Delta::Infinity];
        for i in 0..self.bounds.len() {
            for j in i + 1..self.bounds.len() {
                let da = &self.bounds[i].num_slope - &self.bounds[j].num_slope;
                let db = &self.bounds[j].num_const - &self.bounds[i].num_const;
                if da.is_zero() {
                    continue;
                }
                let d = db / da;
                if d.is_positive() {
                    out.push(Delta::Finite(d));
                }
            }
        }
        out
    }

    /// Exact `max_δ min(bounds)` over δ ∈ [0, ∞]. Every bound is monotone
    /// in δ, so the min is quasiconcave and its maximum sits at an
    /// endpoint or a pairwise crossing. Ties prefer the smallest δ, with
    /// ∞ last.
    pub fn optimize(&self) -> DeltaOptResult {
        let mut best: Option<(Rat, Delta)> = None;
        for cand in self.candidates() {
            let v = self.eval_delta(&cand);
            let replace = match &best {
                None => true,
                Some((bv, bd)) => {
                    v > *bv || (v == *bv && delta_key(&cand) < delta_key(bd))
                }
            };
            if replace {
                best = Some((v, cand));
            }
        }
        let (value, delta_star) = best.expect("empty candidate set");
        let any_delta =
            self.eval(&Rat::zero()) == value && self.eval_inf() == value;
        let active = self.active_at(&delta_star, &value);
        DeltaOptResult { value, delta_star, active, any_delta }
    }

    /// Every candidate δ attaining the optimum, smallest first, plus a few
    /// interior rationals when the maximizers form an interval (the min is
    /// quasiconcave, so anything between two maximizers is one too).
    pub fn maximizers(&self) -> Vec<Delta> {
        let opt = self.optimize();
        let mut hits: Vec<Delta> = self
            .candidates()
            .into_iter()
            .filter(|d| self.eval_delta(d) == opt.value)
            .collect();
        hits.sort_by_key(delta_key);
        hits.dedup();
        let finite: Vec<Rat> = hits
            .iter()
            .filter_map(|d| match d {
                Delta::Finite(r) => Some(r.clone()),
                Delta::Infinity => None,
            })
            .collect();
        let mut extra: Vec<Delta> = Vec::new();
        if let (Some(lo), Some(hi)) = (finite.first(), finite.last()) {
            if lo < hi {
                // Mediant and the integers strictly inside the interval.
                let med = (lo + hi) / rint(2);
                extra.push(Delta::Finite(med));
                let mut k = lo.ceil().to_integer();
                while Rat::from_integer(k.clone()) <= *hi {
                    let r = Rat::from_integer(k.clone());
                    if r >= *lo {
                        extra.push(Delta::Finite(r));
                    }
                    k += 1;
                }
            }
        }
        if hits.contains(&Delta::Infinity) && !finite.is_empty() {
            // Open-ended optimal interval: also try the next few integers.
            if let Some(lo) = finite.last() {
                let base = lo.ceil().to_integer();
                for k in 1..=2 {
                    extra.push(Delta::Finite(Rat::from_integer(base.clone() + k)));
                }
            }
        }
        for e in extra {
            if self.eval_delta(&e) == opt.value && !hits.contains(&e) {
                hits.push(e);
            }
        }
        hits.sort_by_key(delta_key);
        hits.dedup();
        hits
    }
}

/// Ordering key: finite deltas ascending, ∞ last.
fn delta_key(d: &Delta) -> (bool, Rat) {
    match d {
        Delta::Finite(r) => (false, r.clone()),
        Delta::Infinity => (true, Rat::zero()),
    }
}

// ---------------------------------------------------------------------------
// Bit-level closed forms.

/// The four sum-rate bounds of the symmetric bit-level channel as
/// functions of δ. The last bound degenerates to the constant `n_d` when
/// the direct and interference gains tie.
pub fn ldm_sum_family(p: &LdmSymParams) -> FracFamily {
    let nd = p.n_d as i64;
    let ni = p.n_i as i64;
    let nc = p.n_c as i64;
    let m3 = nd.max(ni).max(nc);
    let l1 = FracBound::of_ints(2 * nd, 2 * nd.max(nc));
    let l2 = FracBound::of_ints((2 * nd - ni).max(ni), nd + m3);
    let l3 = FracBound::of_ints(2 * ni.max(nd - ni), 2 * m3);
    let l4 = if nd == ni {
        FracBound::of_ints(nd, 2 * nd)
    } else {
        FracBound::of_ints(2 * nd.max(ni), 2 * nd.max(ni))
    };
    FracFamily::symmetric(vec![l1, l2, l3, l4])
}

/// Exact sum capacity of the symmetric bit-level channel with half-duplex
/// cooperation: `max_δ min(l1..l4)`.
pub fn ldm_sum_capacity(p: &LdmSymParams) -> DeltaOptResult {
    ldm_sum_family(p).optimize()
}

/// The four cognitive rate bounds evaluated at full primary rate.
pub fn ifc_cog_v(n1: u32, n2: u32, a1: u32, a2: u32) -> [i64; 4] {
    let (n1, n2, a1, a2) = (n1 as i64, n2 as i64, a1 as i64, a2 as i64);
    let v1 = n2;
    let v2 = n2.max(a2) - a2.min(n1);
    let v3 = (a1 - n1).max(0) + (n2 - a1).max(0);
    let v4 = (a1 - n1).max(0) - a2.min(n1) + (n2 - a1).max(a2);
    [v1, v2, v3, v4]
}

/// Best secondary rate on the plain interference channel when the primary
/// holds its full rate `n1`.
pub fn ifc_cog_capacity(n1: u32, n2: u32, a1: u32, a2: u32) -> i64 {
    *ifc_cog_v(n1, n2, a1, a2).iter().min().unwrap()
}

/// Cognitive capacity of the bit-level channel, computed two independent
/// ways and cross-checked:
///
/// * directly, as `max_δ (1/(1+δ)) min(v1, v2 + δg, v3, v4 + δg)` with
///   `g = max(β, α2, n1) − n1`,
/// * via the listening-time reading: either cooperation cannot beat the
///   interference-channel value, or the optimum sits where the rising
///   bounds meet the flat ones, at `δ0 = (A − B)/g` with `A = v1 ∧ v3`,
///   `B = v2 ∧ v4`.
pub fn ldm_cog_capacity(p: &LdmCogParams) -> Result<DeltaOptResult> {
    let v = ifc_cog_v(p.n1, p.n2, p.a1, p.a2);
    let g = (p.beta as i64).max(p.a2 as i64).max(p.n1 as i64) - p.n1 as i64;
    let family = FracFamily::cognitive(vec![
        FracBound::of_ints(0, v[0]),
        FracBound::of_ints(g, v[1]),
        FracBound::of_ints(0, v[2]),
        FracBound::of_ints(g, v[3]),
    ]);
    let direct = family.optimize();

    let a = rint(v[0].min(v[2]));
    let b = rint(v[1].min(v[3]));
    let g = rint(g);
    let c_ifc = rint(*v.iter().min().unwrap());
    let (value, delta_star) = if b >= a || g <= b {
        (c_ifc, Delta::zero())
    } else {
        let d0 = (&a - &b) / &g;
        (&a / (Rat::one() + &d0), Delta::Finite(d0))
    };

    if value != direct.value {
        return Err(Error::Inconsistent(format!(
            "listening-time reading gives {} but the direct optimization gives {}",
            crate::fmt_rat(&value),
            crate::fmt_rat(&direct.value)
        )));
    }
    let active = family.active_at(&delta_star, &value);
    Ok(DeltaOptResult {
        value,
        delta_star,
        active,
        any_delta: direct.any_delta,
    })
}

// ---------------------------------------------------------------------------
// Gaussian parameter bundles.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussSymParams {
    pub snr: f64,
    pub inr: f64,
    pub cnr: f64,
    /// Net phase of the four links; only `cos θ` matters.
    pub theta: f64,
}

impl GaussSymParams {
    pub fn new(snr: f64, inr: f64, cnr: f64, theta: f64) -> Result<GaussSymParams> {
        if !(snr > 0.0 && inr > 0.0 && cnr > 0.0)
            || !snr.is_finite()
            || !inr.is_finite()
            || !cnr.is_finite()
            || !theta.is_finite()
        {
            return Err(Error::InvalidParam(
                "gains must be positive finite reals".into(),
            ));
        }
        Ok(GaussSymParams { snr, inr, cnr, theta })
    }

    /// Bit-level shadow of the gains.
    pub fn exponents(&self) -> (i64, i64, i64) {
        (exp_of(self.snr), exp_of(self.inr), exp_of(self.cnr))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussCogParams {
    pub snr1: f64,
    pub snr2: f64,
    pub inr1: f64,
    pub inr2: f64,
    pub cnr: f64,
    pub theta: f64,
    /// Allowed back-off of the primary from its interference-free rate.
    pub r0: f64,
}

impl GaussCogParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        snr1: f64,
        snr2: f64,
        inr1: f64,
        inr2: f64,
        cnr: f64,
        theta: f64,
        r0: f64,
    ) -> Result<GaussCogParams> {
        let gains = [snr1, snr2, inr1, inr2, cnr];
        if gains.iter().any(|g| !(*g > 0.0) || !g.is_finite())
            || !theta.is_finite()
            || !(r0 >= 0.0)
        {
            return Err(Error::InvalidParam(
                "gains must be positive finite, r0 nonnegative".into(),
            ));
        }
        Ok(GaussCogParams { snr1, snr2, inr1, inr2, cnr, theta, r0 })
    }

    pub fn exponents(&self) -> (i64, i64, i64, i64, i64) {
        (
            exp_of(self.snr1),
            exp_of(self.snr2),
            exp_of(self.inr1),
            exp_of(self.inr2),
            exp_of(self.cnr),
        )
    }
}

fn exp_of(x: f64) -> i64 {
    (x.log2().floor() as i64).max(0)
}

fn lg(x: f64) -> f64 {
    x.log2()
}

/// Per-mode average transmit powers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSplit {
    pub p1a: f64,
    pub p1b: f64,
    pub p2a: f64,
    pub p2c: f64,
}

impl PowerSplit {
    /// Largest admissible powers for the symmetric schedule at ratio δ.
    pub fn sym_max(delta: f64) -> PowerSplit {
        PowerSplit {
            p1a: (2.0 + delta) / delta,
            p1b: 2.0 + delta,
            p2a: (2.0 + delta) / delta,
            p2c: 2.0 + delta,
        }
    }

    /// (δ p_a + p_b)/(2+δ) ≤ 1 for both users.
    pub fn admissible_sym(&self, delta: f64) -> bool {
        let ok = |pa: f64, pb: f64| (delta * pa + pb) / (2.0 + delta) <= 1.0 + 1e-12;
        self.p1a >= 0.0
            && self.p1b >= 0.0
            && self.p2a >= 0.0
            && self.p2c >= 0.0
            && ok(self.p1a, self.p1b)
            && ok(self.p2a, self.p2c)
    }
}

/// Rate excess from concentrating unit average power into the mode-A
/// fraction of the schedule: (δ/(2+δ))·lg((2+δ)/δ). As t·lg(1/t) with
/// t = δ/(2+δ) it never exceeds lg(e)/e bits, which is what lets the
/// boosted-power converse trade the schedule for a constant.
pub fn mode_a_power_excess(d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    d / (2.0 + d) * lg((2.0 + d) / d)
}

/// The listening-slot analogue at power 2+δ: (1/(2+δ))·lg(2+δ).
pub fn listen_power_excess(d: f64) -> f64 {
    lg(2.0 + d) / (2.0 + d)
}

// ---------------------------------------------------------------------------
// Numeric optimization over δ.

pub const DEFAULT_GRID_DENSITY: usize = 512;
const DELTA_LOG_MIN: f64 = -10.0;
const DELTA_LOG_MAX: f64 = 10.0;

/// Maximize a continuous function of δ on a dense logarithmic grid over
/// [2^-10, 2^10], then refine around the best grid point by golden
/// section. Not proof of global optimality; the grid is the guarantee.
pub fn maximize_over_delta<F: Fn(f64) -> f64>(f: F, grid_density: usize) -> (f64, f64) {
    let n = grid_density.max(2);
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let mut ts: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let t = DELTA_LOG_MIN + (DELTA_LOG_MAX - DELTA_LOG_MIN) * i as f64 / (n - 1) as f64;
        ts.push(t);
        let v = f(t.exp2());
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = ts[best_i.saturating_sub(1)];
    let hi = ts[(best_i + 1).min(n - 1)];
    let (t_star, v_star) = golden_max(|t| f(t.exp2()), lo, hi, 1e-7);
    if v_star > best_v {
        (t_star.exp2(), v_star)
    } else {
        (ts[best_i].exp2(), best_v)
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

// ---------------------------------------------------------------------------
// Symmetric Gaussian bounds.

/// The four sum-rate upper bounds at schedule ratio δ.
pub fn u_sym(p: &GaussSymParams, d: f64) -> [f64; 4] {
    let (x, y, z) = (p.snr, p.inr, p.cnr);
    let quad = x * x + y * y - 2.0 * x * y * p.theta.cos();
    let u1 = 2.0 / (2.0 + d) * (d * lg(1.0 + x) + lg(1.0 + x + z));
    let u2 = 1.0 / (2.0 + d)
        * (d * lg(1.0 + 2.0 * x + 2.0 * y)
            + lg(1.0 + x)
            + lg(1.0 + x + y + z)
            + d * lg(1.0 + x / (1.0 + y)));
    let u3 = 2.0 / (2.0 + d)
        * (d * lg(1.0 + y + (2.0 * x + y) / (1.0 + y)).max(lg(1.0 + 2.0 * y))
            + lg(1.0 + x + y + z));
    let u4 = 1.0 / (2.0 + d)
        * (d * lg(1.0 + 4.0 * x + 4.0 * y + quad) + 2.0 * lg(1.0 + x + y));
    [u1, u2, u3, u4]
}

fn min4(v: [f64; 4]) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

/// The bit-level shadow of the sum-rate bounds, kept as explicit functions
/// of δ; the last entry stays Gaussian because the bit-level model cannot
/// see channel phase.
pub fn u_sym_ldm(p: &GaussSymParams, d: f64) -> [f64; 5] {
    let (nd, ni, nc) = p.exponents();
    let (nd, ni, nc) = (nd as f64, ni as f64, nc as f64);
    let m3 = nd.max(ni).max(nc);
    let u1p = 2.0 / (2.0 + d) * (d * nd + nd.max(nc));
    let u2p = 1.0 / (2.0 + d) * (d * (2.0 * nd - ni).max(ni) + nd + m3);
    let u3p = 2.0 / (2.0 + d) * (d * ni.max(nd - ni) + m3);
    let u4p = 2.0 * (1.0 + d) / (2.0 + d) * nd.max(ni);
    let u4 = u_sym(p, d)[3];
    [u1p - 6.0, u2p - 4.0, u3p, u4p - 4.0, u4 - 10.0]
}

/// min(Cut, Z, V, Cut') at ratio δ under an explicit power split.
pub fn outer_sym_at(p: &GaussSymParams, d: f64, s: &PowerSplit) -> f64 {
    let (x, y, z) = (p.snr, p.inr, p.cnr);
    let quad = x * x + y * y - 2.0 * x * y * p.theta.cos();
    let cut = (d * lg(1.0 + x * s.p1a)
        + d * lg(1.0 + x * s.p2a)
        + lg(1.0 + (x + z) * s.p1b)
        + lg(1.0 + (x + z) * s.p2c))
        / (2.0 + d);
    let zb = (d * lg(1.0 + 2.0 * x * s.p1a + 2.0 * y * s.p2a)
        + lg(1.0 + x * s.p1b)
        + lg(1.0 + (x + y + z) * s.p2c)
        + d * lg(1.0 + x * s.p2a / (1.0 + y * s.p2a)))
        / (2.0 + d);
    let vb = (d * lg(1.0 + y * s.p2a + (2.0 * x * s.p1a + y * s.p2a) / (1.0 + y * s.p1a))
        + lg(1.0 + (x + y + z) * s.p1b)
        + d * lg(1.0 + y * s.p1a + (2.0 * x * s.p2a + y * s.p1a) / (1.0 + y * s.p2a))
        + lg(1.0 + (x + y + z) * s.p2c))
        / (2.0 + d);
    let cutp = (d * lg(1.0 + 2.0 * (x + y) * (s.p1a + s.p2a) + s.p1a * s.p2a * quad)
        + lg(1.0 + (x + y) * s.p1b)
        + lg(1.0 + (x + y) * s.p2c))
        / (2.0 + d);
    cut.min(zb).min(vb).min(cutp)
}

// ---------------------------------------------------------------------------
// A small dense LP for the Gaussian virtual-channel corner.
//
// Variables are the four per-layer rates (public, private, cooperative
// private, pre-shared public) of one source under symmetric allocation;
// constraints are the destination error events with Gaussian mutual
// informations plus the bit-pipe caps. All right-hand sides are
// nonnegative, so the origin is feasible and a single simplex phase
// suffices.

fn lp_max_f64(rows: &[([f64; 4], f64)], obj: [f64; 4]) -> f64 {
    let m = rows.len();
    let n = 4usize;
    let cols = n + m;
    // tableau[i] = row of slack form; basis starts all-slack.
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for (i, (coef, b)) in rows.iter().enumerate() {
        let mut row = vec![0.0; cols];
        row[..n].copy_from_slice(coef);
        row[n + i] = 1.0;
        t.push(row);
        rhs.push(*b);
        basis.push(n + i);
    }
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&obj);
    let mut value = 0.0;
    for _ in 0..200 {
        // Reduced costs against the current basis.
        let mut entering = None;
        let mut best_rc = 1e-9;
        for (j, cj) in cost.iter().enumerate() {
            if *cj > best_rc {
                best_rc = *cj;
                entering = Some(j);
            }
        }
        let Some(c) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][c] > 1e-9 {
                let ratio = rhs[i] / t[i][c];
                if leave.is_none() || ratio < leave.unwrap().1 {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else { break };
        let piv = t[r][c];
        for x in t[r].iter_mut() {
            *x /= piv;
        }
        rhs[r] /= piv;
        for i in 0..m {
            if i != r && t[i][c].abs() > 0.0 {
                let f = t[i][c];
                for j in 0..cols {
                    t[i][j] -= f * t[r][j];
                }
                rhs[i] -= f * rhs[r];
            }
        }
        let f = cost[c];
        for j in 0..cols {
            cost[j] -= f * t[r][j];
        }
        value += f * rhs[r];
        basis[r] = c;
    }
    value
}

/// Best symmetric per-source layer total (public + private + cooperative
/// private + pre-shared public) of the Gaussian virtual channel, given the
/// received powers of the five visible signals at a destination, the
/// residual noise floor, and the per-layer caps. The constraint list walks
/// the destination error events: every subset of own layers that can be
/// wrong, with and without the unintended public message.
#[allow(clippy::too_many_arguments)]
pub fn virtual_corner_gauss(
    p_w: f64,
    p_u: f64,
    p_v: f64,
    p_vp: f64,
    q_w: f64,
    n0: f64,
    cap_u: f64,
    cap_v: f64,
    cap_vp: f64,
) -> f64 {
    // Layer order in the LP: (W, U, V, Vp). Events: own subsets always
    // include U below anything above it; the unintended public adds to the
    // W coefficient since rates are symmetric.
    const EVENTS: [([bool; 4], bool); 14] = [
        ([false, true, false, false], false),
        ([true, true, false, false], false),
        ([true, true, false, true], false),
        ([false, false, true, false], false),
        ([false, true, true, false], false),
        ([true, true, true, false], false),
        ([true, true, true, true], false),
        ([false, true, false, false], true),
        ([true, true, false, false], true),
        ([true, true, false, true], true),
        ([false, false, true, false], true),
        ([false, true, true, false], true),
        ([true, true, true, false], true),
        ([true, true, true, true], true),
    ];
    let powers = [p_w, p_u, p_v, p_vp];
    let mut rows: Vec<([f64; 4], f64)> = Vec::with_capacity(EVENTS.len() + 3);
    for (own, with_w2) in EVENTS {
        let mut coef = [0.0f64; 4];
        let mut pow = 0.0;
        for k in 0..4 {
            if own[k] {
                coef[k] += 1.0;
                pow += powers[k];
            }
        }
        if with_w2 {
            coef[0] += 1.0;
            pow += q_w;
        }
        rows.push((coef, lg(1.0 + pow / n0)));
    }
    rows.push(([0.0, 1.0, 0.0, 0.0], cap_u.max(0.0)));
    rows.push(([0.0, 0.0, 1.0, 0.0], cap_v.max(0.0)));
    rows.push(([0.0, 0.0, 0.0, 1.0], cap_vp.max(0.0)));
    lp_max_f64(&rows, [1.0, 1.0, 1.0, 1.0])
}

// ---------------------------------------------------------------------------
// The five-region achievability dispatch.

fn beta1(p: &GaussSymParams) -> f64 {
    let (x, y) = (p.snr, p.inr);
    (x * x + y * y - 2.0 * x * y * p.theta.cos()) / (x * (x + y))
}

/// Interference-channel sum rate with superposition coding, private power
/// held at the interfered destination's noise floor. Used where the
/// cooperation link is too weak to matter.
fn hk_sum(p: &GaussSymParams) -> f64 {
    let (x, y) = (p.snr, p.inr);
    let su = 0.5 * (1.0f64).min(1.0 / y);
    let n0 = 1.0 + y * su;
    2.0 * virtual_corner_gauss(
        0.5 * x,
        su * x,
        0.0,
        0.0,
        0.5 * y,
        n0,
        f64::INFINITY,
        0.0,
        0.0,
    )
}

/// Golden-section search for the best split of a shared budget between
/// relaying and pre-sharing; the objective is concave in the split.
fn best_relay_split<F: Fn(f64) -> f64>(cap: f64, f: F) -> f64 {
    if cap <= 0.0 {
        return f(0.0);
    }
    let (_, v) = golden_max(&f, 0.0, cap, 1e-7 * cap.max(1.0));
    v.max(f(0.0)).max(f(cap))
}

fn region2_rate(p: &GaussSymParams, d: f64) -> f64 {
    let (x, y, z) = (p.snr, p.inr, p.cnr);
    let rb = lg(1.0 + (x - 1.0).max(0.0) / 2.0);
    let bp = lg(1.0 + z / x) / d;
    let b1 = beta1(p);
    let t = virtual_corner_gauss(
        x / 3.0,
        x / (3.0 * y),
        b1 * x / 3.0,
        0.0,
        y / 3.0,
        4.0 / 3.0,
        f64::INFINITY,
        bp,
        0.0,
    );
    (2.0 * d * t + 2.0 * rb) / (2.0 + d)
}

/// Shared by regions 3(a), 5, and the strong-cooperation half of 3: no
/// private layer, no pre-shared layer, half power each on the public and
/// cooperative-private signals.
fn halfpower_virtual(p: &GaussSymParams, bp: f64) -> f64 {
    let (x, y) = (p.snr, p.inr);
    let b1 = beta1(p);
    virtual_corner_gauss(
        x / 2.0,
        0.0,
        b1 * x / 2.0,
        0.0,
        y / 2.0,
        1.0,
        0.0,
        bp,
        0.0,
    )
}

fn region3_rate(p: &GaussSymParams, d: f64) -> f64 {
    let (x, y, z) = (p.snr, p.inr, p.cnr);
    if x > 1.0 {
        if d * lg(y) + lg(x) >= lg(z) {
            let rb = lg(1.0 + (x - 1.0) / 2.0);
            let bp = lg(1.0 + z / x) / d;
            let t = halfpower_virtual(p, bp);
            (2.0 * d * t + 2.0 * rb) / (2.0 + d)
        } else {
            let yd = (d * lg(y)).exp2();
            let rb = lg(1.0 + (x / 3.0) / (1.0 + 1.0 / 3.0 + (x * yd / z).sqrt() / 3.0));
            let dr_cap = lg(1.0 + (y / (3.0 * x)) / (1.0 + (yd * y * y / (x * z)).sqrt() / 3.0));
            let budget = lg(1.0 + (z * yd / x).sqrt() / 3.0);
            best_relay_split(dr_cap.min(budget), |dr| {
                let bp = (budget - dr) / d;
                let t = halfpower_virtual(p, bp);
                (2.0 * d * t + 2.0 * rb + 2.0 * dr) / (2.0 + d)
            })
        }
    } else if d * lg(y) >= lg(z) {
        let bp = lg(1.0 + z) / d;
        let ra = lg(1.0 + y / (1.0 + x)).min(bp);
        2.0 * d * ra / (2.0 + d)
    } else {
        let yd = (d * lg(y)).exp2();
        let budget = lg(1.0 + (yd * z).sqrt() / 2.0);
        let dr_cap = lg(1.0 + (y / 2.0) / (1.0 + (yd * y * y / z).sqrt() / 2.0));
        best_relay_split(dr_cap.min(budget), |dr| {
            let bp = (budget - dr) / d;
            let ra = lg(1.0 + y / (1.0 + x)).min(bp);
            (2.0 * d * ra + 2.0 * dr) / (2.0 + d)
        })
    }
}

fn region4_rate(p: &GaussSymParams, d: f64) -> f64 {
    let (x, y, z) = (p.snr, p.inr, p.cnr);
    let b1 = beta1(p);
    if x > 1.0 {
        if lg(y) <= lg(x) + d * lg(y) {
            let rb = lg(1.0 + x) - 1.0;
            let bp_ss = (lg(1.0 + z / x) - 1.0).max(0.0) / d;
            let bp_sd = lg(1.0 + y / z) / d;
            let t = virtual_corner_gauss(
                x / 3.0,
                0.0,
                b1 * x / 3.0,
                x / 3.0,
                y / 3.0,
                1.0,
                0.0,
                bp_ss,
                bp_sd,
            );
            (2.0 * d * t + 2.0 * rb) / (2.0 + d)
        } else {
            // sqrt(y^{1+δ} x^{1-2δ}) through logs to dodge overflow.
            let root = (0.5 * ((1.0 + d) * lg(y) + (1.0 - 2.0 * d) * lg(x))).exp2();
            let rb = lg(1.0 + (x / 3.0) / (1.0 + 1.0 / 3.0 + x / (3.0 * root)));
            let b_ss = lg(1.0 + (z / (3.0 * x)) / (1.0 + z / (3.0 * root)));
            let b_sd = lg(1.0 + (0.5 * ((1.0 - d) * lg(y) - (1.0 - 2.0 * d) * lg(x))).exp2() / 3.0);
            best_relay_split(b_ss.min(b_sd), |dr| {
                let bp_ss = (b_ss - dr) / d;
                let bp_sd = (b_sd - dr) / d;
                let t = virtual_corner_gauss(
                    x / 3.0,
                    0.0,
                    b1 * x / 3.0,
                    x / 3.0,
                    y / 3.0,
                    1.0,
                    0.0,
                    bp_ss,
                    bp_sd,
                );
                (2.0 * d * t + 2.0 * rb + 2.0 * dr) / (2.0 + d)
            })
        }
    } else if d * lg(y) >= lg(z) {
        let bp = lg(1.0 + z) / d;
        let ra = lg(1.0 + y / (1.0 + x)).min(bp);
        2.0 * d * ra / (2.0 + d)
    } else {
        let root = (0.5 * (1.0 + d) * lg(y)).exp2();
        let s = lg(1.0 + (z / 2.0) / (1.0 + z / (2.0 * root)));
        let dcap = lg(1.0 + (0.5 * (1.0 - d) * lg(y)).exp2() / 2.0);
        best_relay_split(s.min(dcap), |dr| {
            let bp = (s - dr) / d;
            let ra = lg(1.0 + y / (1.0 + x)).min(bp);
            (2.0 * d * ra + 2.0 * dr) / (2.0 + d)
        })
    }
}

fn region5_rate(p: &GaussSymParams, d: f64) -> f64 {
    let (x, z) = (p.snr, p.cnr);
    if x < 1.0 {
        return 0.0;
    }
    let rb = lg(1.0 + (x - 1.0) / 2.0);
    let bp = lg(1.0 + z / x) / d;
    let t = halfpower_virtual(p, bp);
    (2.0 * d * t + 2.0 * rb) / (2.0 + d)
}

/// All four symmetric Gaussian quantities at once.
#[derive(Clone, Debug)]
pub struct GaussSumBounds {
    /// max_δ of the four-bound upper envelope.
    pub c_bar: f64,
    pub c_bar_delta: f64,
    /// Bit-level-shadow cap: the envelope with exponent bounds swapped in.
    pub c_bar_ldm: f64,
    /// Rate of the concrete region-dispatched scheme.
    pub achievable: f64,
    pub achievable_delta: Option<f64>,
    /// Converse optimized over schedule at the extremal power split.
    pub outer: f64,
    /// Which achievability region fired.
    pub region: u8,
    pub cooperation: bool,
}

pub fn gaussian_sum_inner_outer(p: &GaussSymParams) -> GaussSumBounds {
    gaussian_sum_inner_outer_with(p, DEFAULT_GRID_DENSITY)
}

pub fn gaussian_sum_inner_outer_with(p: &GaussSymParams, grid: usize) -> GaussSumBounds {
    let (x, y, z) = (p.snr, p.inr, p.cnr);
    let (c_bar_delta, c_bar) = maximize_over_delta(|d| min4(u_sym(p, d)), grid);
    let (_, c_bar_ldm) = maximize_over_delta(
        |d| u_sym_ldm(p, d).into_iter().fold(f64::INFINITY, f64::min),
        grid,
    );
    let (_, outer) = maximize_over_delta(
        |d| outer_sym_at(p, d, &PowerSplit::sym_max(d)),
        grid,
    );
    let (region, achievable, achievable_delta) = if z <= x || z <= 1.0 || y <= 1.0 {
        (1u8, hk_sum(p), None)
    } else if 2.0 * y < x {
        let (d, v) = maximize_over_delta(|d| region2_rate(p, d), grid);
        (2, v, Some(d))
    } else if 2.0 * x < y && y <= z {
        let (d, v) = maximize_over_delta(|d| region3_rate(p, d), grid);
        (3, v, Some(d))
    } else if 2.0 * x < y {
        let (d, v) = maximize_over_delta(|d| region4_rate(p, d), grid);
        (4, v, Some(d))
    } else {
        let (d, v) = maximize_over_delta(|d| region5_rate(p, d), grid);
        (5, v, Some(d))
    };
    GaussSumBounds {
        c_bar,
        c_bar_delta,
        c_bar_ldm,
        achievable,
        achievable_delta,
        outer,
        region,
        cooperation: region != 1,
    }
}

// ---------------------------------------------------------------------------
// Cognitive Gaussian bounds.

/// The four secondary-rate bounds of the cognitive channel at ratio δ,
/// already evaluated at primary back-off `r0`.
pub fn u_cog(p: &GaussCogParams, d: f64) -> [f64; 4] {
    let (x1, x2, y1, y2, z) = (p.snr1, p.snr2, p.inr1, p.inr2, p.cnr);
    let r0 = p.r0;
    let c0 = lg(1.0 + x1);
    let u1 = lg(1.0 + x2) / (1.0 + d) + 1.0;
    let u2 = (lg(1.0 + 2.0 * x2 + 2.0 * y2) - c0
        + d * lg(1.0 + (y2 + z) / (1.0 + x1))
        + lg(1.0 + x1 / (1.0 + y2)))
        / (1.0 + d)
        + 2.0
        + r0;
    let u3 = (lg(1.0 + 2.0 * x1 + 2.0 * y1) - c0 + lg(1.0 + x2 / (1.0 + y1))) / (1.0 + d)
        + 2.0
        + r0;
    let u4 = (lg(1.0 + 2.0 * x1 + 2.0 * y1) - c0
        + lg(1.0 + x1 / (1.0 + y2))
        - c0
        + lg(1.0 + y2 + (2.0 * x2 + y2) / (1.0 + y1)).max(lg(1.0 + 2.0 * y2))
        + d * lg(1.0 + (y2 + z) / (1.0 + x1)))
        / (1.0 + d)
        + 3.0
        + 2.0 * r0;
    [u1, u2, u3, u4]
}

#[derive(Clone, Debug)]
pub struct GaussCogBounds {
    /// max_δ of the cognitive four-bound envelope at back-off r0.
    pub c_bar_r0: f64,
    /// Concrete lower bound; asserted only for r0 ≥ 7.
    pub lower: Option<f64>,
    /// Bit-level-shadow cap linking the envelope to the exponent model.
    pub ldm_link: f64,
    pub cooperation: bool,
}

pub fn gaussian_cog_bounds(p: &GaussCogParams) -> GaussCogBounds {
    gaussian_cog_bounds_with(p, DEFAULT_GRID_DENSITY)
}

pub fn gaussian_cog_bounds_with(p: &GaussCogParams, grid: usize) -> GaussCogBounds {
    let (x1, x2, y1, y2, z) = (p.snr1, p.snr2, p.inr1, p.inr2, p.cnr);
    let (n1, n2, a1, a2, beta) = p.exponents();
    let v = ifc_cog_v(n1 as u32, n2 as u32, a1 as u32, a2 as u32);
    let g = (beta.max(a2).max(n1) - n1) as f64;
    let offs = [-10.0 - 2.0 * p.r0, -5.0 - p.r0, -5.0 - p.r0, 0.0];
    let slopes = [0.0, g, 0.0, g];
    let (_, ldm_link) = maximize_over_delta(
        |d| {
            (0..4)
                .map(|i| (v[i] as f64 + d * slopes[i]) / (1.0 + d) + offs[i])
                .fold(f64::INFINITY, f64::min)
        },
        grid,
    );
    let (_, c_bar_r0) = maximize_over_delta(|d| min4(u_cog(p, d)), grid);

    let no_coop = z <= x1.max(y2) || y2 <= 1.0 || x1 <= 1.0 || x2 <= 1.0;
    let ratio = (x1 * x2) / (y1 * y2);
    let aligned = (0.25..=4.0).contains(&ratio);
    let (lower_val, cooperation) = if no_coop || aligned {
        (((*v.iter().min().unwrap() as f64) - 1.0).max(0.0), false)
    } else {
        let bp_slope = ((beta - n1 - 1).max(0)) as f64;
        let r0 = p.r0;
        let (_, val) = maximize_over_delta(
            |d| {
                let bp = d * bp_slope;
                let m = (v[0] as f64 - 9.0)
                    .min(v[1] as f64 + bp - 7.0 + r0)
                    .min(v[2] as f64 - 19.0)
                    .min(v[3] as f64 + bp - 16.0 + r0);
                m / (1.0 + d)
            },
            grid,
        );
        (val.max(0.0), true)
    };
    GaussCogBounds {
        c_bar_r0,
        lower: (p.r0 >= 7.0).then_some(lower_val),
        ldm_link,
        cooperation,
    }
}
