//! Exact-rational rate-region polyhedra for the virtual channel.
//!
//! The virtual channel is the interference channel left over once the
//! listening phases have been folded into bit-pipes: source-to-source
//! pipes of rate `bp_ss` (symmetric) or `bp_12` (cognitive) and
//! source-to-other-destination pipes of rate `bp_sd`. Its achievable
//! region is a polytope over the per-layer message rates, with one
//! inequality per decoding error event. All arithmetic is exact.
//!
//! Mutual informations are computed on the bit-level channel by rank:
//! every signal is a linear image of a common pool of independent uniform
//! bits, so conditional entropy is the rank of a residual map and
//!   I(A; B | C) = rank(B,C) - rank(C) - rank(A,B,C) + rank(A,C).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::gf2::BitMatrix;
use crate::ldm::{LdmCogParams, LdmSymParams};
use crate::{rint, Error, Rat, Result};

/// Message-layer rate variables. `W` is public, `U` private, `V`
/// cooperative private, `Vp` pre-shared public; `R1`/`R2` are whole-user
/// rates used when a region is expressed directly in user rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateVar {
    W1,
    U1,
    V1,
    V1p,
    W2,
    U2,
    V2,
    V2p,
    R1,
    R2,
}

impl RateVar {
    pub fn name(&self) -> &'static str {
        match self {
            RateVar::W1 => "R_W1",
            RateVar::U1 => "R_U1",
            RateVar::V1 => "R_V1",
            RateVar::V1p => "R_V1p",
            RateVar::W2 => "R_W2",
            RateVar::U2 => "R_U2",
            RateVar::V2 => "R_V2",
            RateVar::V2p => "R_V2p",
            RateVar::R1 => "R1",
            RateVar::R2 => "R2",
        }
    }

    /// Swap the two users (1 <-> 2).
    pub fn mirrored(&self) -> RateVar {
        match self {
            RateVar::W1 => RateVar::W2,
            RateVar::U1 => RateVar::U2,
            RateVar::V1 => RateVar::V2,
            RateVar::V1p => RateVar::V2p,
            RateVar::W2 => RateVar::W1,
            RateVar::U2 => RateVar::U1,
            RateVar::V2 => RateVar::V1,
            RateVar::V2p => RateVar::V1p,
            RateVar::R1 => RateVar::R2,
            RateVar::R2 => RateVar::R1,
        }
    }
}

impl std::fmt::Display for RateVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One inequality `coeffs . x <= rhs`, coefficients aligned with the
/// owning polytope's variable list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinIneq {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

impl LinIneq {
    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(self.coeffs.len(), point.len());
        self.coeffs
            .iter()
            .zip(point)
            .map(|(c, x)| c * x)
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn holds_at(&self, point: &[Rat]) -> bool {
        self.eval(point) <= self.rhs
    }

    /// True when the inequality can never cut anything off the
    /// nonnegative orthant: every coefficient <= 0 and rhs >= 0.
    fn is_tautology(&self) -> bool {
        !self.rhs.is_negative() && self.coeffs.iter().all(|c| !c.is_positive())
    }

    /// Positive rescale so the first nonzero coefficient has magnitude 1.
    fn normalize(&mut self) {
        if let Some(c) = self.coeffs.iter().find(|c| !c.is_zero()) {
            let s = c.abs();
            for c in &mut self.coeffs {
                *c = &*c / &s;
            }
            self.rhs = &self.rhs / &s;
        }
    }
}

/// A bounded-below polytope `{x >= 0 : A x <= b}` over named rate
/// variables. Nonnegativity is implicit and never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub vars: Vec<RateVar>,
    pub ineqs: Vec<LinIneq>,
}

impl Polytope {
    pub fn new(vars: Vec<RateVar>) -> Polytope {
        let mut seen = vars.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), vars.len(), "duplicate rate variable");
        Polytope { vars, ineqs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, v: RateVar) -> Option<usize> {
        self.vars.iter().position(|&w| w == v)
    }

    /// Add `sum of coeff * var <= rhs`.
    pub fn add_le(&mut self, terms: &[(RateVar, Rat)], rhs: Rat) {
        let mut coeffs = vec![Rat::zero(); self.vars.len()];
        for (v, c) in terms {
            let i = self.var_index(*v).expect("variable not in polytope");
            coeffs[i] = &coeffs[i] + c;
        }
        self.ineqs.push(LinIneq { coeffs, rhs });
    }

    /// Add an equality as a pair of inequalities.
    pub fn add_eq(&mut self, terms: &[(RateVar, Rat)], rhs: Rat) {
        self.add_le(terms, rhs.clone());
        let neg: Vec<(RateVar, Rat)> = terms.iter().map(|(v, c)| (*v, -c)).collect();
        self.add_le(&neg, -rhs);
    }

    /// Upper-bound a single variable.
    pub fn add_upper(&mut self, v: RateVar, rhs: Rat) {
        self.add_le(&[(v, Rat::one())], rhs);
    }

    /// Tie two variables to a common value.
    pub fn tie(&mut self, a: RateVar, b: RateVar) {
        self.add_eq(&[(a, Rat::one()), (b, -Rat::one())], Rat::zero());
    }

    pub fn contains(&self, point: &[Rat]) -> bool {
        point.len() == self.vars.len()
            && point.iter().all(|x| !x.is_negative())
            && self.ineqs.iter().all(|q| q.holds_at(point))
    }

    pub fn is_empty(&self) -> Result<bool> {
        let zero = vec![Rat::zero(); self.vars.len()];
        match lp_max(&self.ineqs, &zero)? {
            LpOutcome::Infeasible => Ok(true),
            _ => Ok(false),
        }
    }

    /// Exact maximum of a linear objective over the polytope.
    pub fn maximize(&self, objective: &[Rat]) -> Result<Rat> {
        assert_eq!(objective.len(), self.vars.len());
        match lp_max(&self.ineqs, objective)? {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Err(Error::Unbounded),
            LpOutcome::Infeasible => Err(Error::Infeasible("polytope is empty".into())),
        }
    }

    /// A point attaining the maximum of a linear objective.
    pub fn argmax(&self, objective: &[Rat]) -> Result<Vec<Rat>> {
        assert_eq!(objective.len(), self.vars.len());
        match lp_max(&self.ineqs, objective)? {
            LpOutcome::Optimal { point, .. } => Ok(point),
            LpOutcome::Unbounded => Err(Error::Unbounded),
            LpOutcome::Infeasible => Err(Error::Infeasible("polytope is empty".into())),
        }
    }

    /// Containment check by linear programming: `self` is inside `other`
    /// iff no inequality of `other` can be violated over `self`. Both
    /// polytopes must use the same variable set.
    pub fn is_subset_of(&self, other: &Polytope) -> Result<bool> {
        let map: Vec<usize> = other
            .vars
            .iter()
            .map(|v| {
                self.var_index(*v)
                    .ok_or_else(|| Error::InvalidParam(format!("variable {v} missing")))
            })
            .collect::<Result<_>>()?;
        if self.is_empty()? {
            return Ok(true);
        }
        for q in &other.ineqs {
            let mut obj = vec![Rat::zero(); self.vars.len()];
            for (j, c) in q.coeffs.iter().enumerate() {
                obj[map[j]] = c.clone();
            }
            match lp_max(&self.ineqs, &obj)? {
                LpOutcome::Optimal { value, .. } if value <= q.rhs => {}
                LpOutcome::Infeasible => unreachable!("checked nonempty"),
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn set_eq(&self, other: &Polytope) -> Result<bool> {
        Ok(self.is_subset_of(other)? && other.is_subset_of(self)?)
    }

    /// Plain-text form, one inequality per line, rationals as `p/q`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for q in &self.ineqs {
            let mut line = String::new();
            for (j, c) in q.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if line.is_empty() {
                    if c.is_negative() {
                        line.push('-');
                    }
                } else if c.is_negative() {
                    line.push_str(" - ");
                } else {
                    line.push_str(" + ");
                }
                let mag = c.abs();
                if !mag.is_one() {
                    line.push_str(&crate::fmt_rat(&mag));
                    line.push(' ');
                }
                line.push_str(self.vars[j].name());
            }
            if line.is_empty() {
                line.push('0');
            }
            out.push_str(&line);
            out.push_str(" <= ");
            out.push_str(&crate::fmt_rat(&q.rhs));
            out.push('\n');
        }
        out
    }

    /// Drop tautologies, exact duplicates (keeping the tightest rhs),
    /// componentwise-dominated rows, and finally rows proven redundant by
    /// exact LP against the remaining system.
    pub fn prune(&mut self) -> Result<()> {
        self.ineqs.retain(|q| !q.is_tautology());
        for q in &mut self.ineqs {
            q.normalize();
        }
        // Tightest rhs per coefficient vector.
        let mut best: BTreeMap<String, Rat> = BTreeMap::new();
        for q in &self.ineqs {
            let entry = best
                .entry(key_of(&q.coeffs))
                .or_insert_with(|| q.rhs.clone());
            if q.rhs < *entry {
                *entry = q.rhs.clone();
            }
        }
        let mut kept: Vec<LinIneq> = Vec::new();
        for q in &self.ineqs {
            if best.get(&key_of(&q.coeffs)) == Some(&q.rhs)
                && !kept.iter().any(|k| k.coeffs == q.coeffs)
            {
                kept.push(q.clone());
            }
        }
        // Componentwise dominance: a >= b per coordinate with rhs_a <= rhs_b
        // makes b redundant on the nonnegative orthant.
        let dominated = |b: &LinIneq, a: &LinIneq| {
            a.rhs <= b.rhs
                && a.coeffs.iter().zip(&b.coeffs).all(|(ca, cb)| ca >= cb)
                && (a.coeffs != b.coeffs || a.rhs != b.rhs)
        };
        let mut alive: Vec<bool> = vec![true; kept.len()];
        for i in 0..kept.len() {
            if !alive[i] {
                continue;
            }
            for j in 0..kept.len() {
                if i != j && alive[j] && dominated(&kept[j], &kept[i]) {
                    alive[j] = false;
                }
            }
        }
        let mut rows: Vec<LinIneq> = kept
            .into_iter()
            .zip(alive)
            .filter_map(|(q, a)| a.then_some(q))
            .collect();
        // Exact LP redundancy, scanned backwards so removals are safe.
        let mut i = rows.len();
        while i > 0 {
            i -= 1;
            let candidate = rows.remove(i);
            let keep = match lp_max(&rows, &candidate.coeffs)? {
                LpOutcome::Optimal { value, .. } => value > candidate.rhs,
                LpOutcome::Unbounded => true,
                // An empty system keeps its witnesses.
                LpOutcome::Infeasible => true,
            };
            if keep {
                rows.insert(i, candidate);
            }
        }
        self.ineqs = rows;
        Ok(())
    }
}

fn key_of(coeffs: &[Rat]) -> String {
    coeffs
        .iter()
        .map(crate::fmt_rat)
        .collect::<Vec<_>>()
        .join(",")
}

/// Project the polytope onto the variables not in `eliminate`, by
/// Fourier-Motzkin with the default blow-up guard.
pub fn fourier_motzkin(p: &Polytope, eliminate: &[RateVar]) -> Result<Polytope> {
    fourier_motzkin_guarded(p, eliminate, DEFAULT_FM_GUARD)
}

pub const DEFAULT_FM_GUARD: usize = 20_000;

pub fn fourier_motzkin_guarded(
    p: &Polytope,
    eliminate: &[RateVar],
    guard: usize,
) -> Result<Polytope> {
    let mut cur = p.clone();
    for &v in eliminate {
        let idx = cur
            .var_index(v)
            .ok_or_else(|| Error::InvalidParam(format!("cannot eliminate {v}: not present")))?;
        let mut uppers: Vec<LinIneq> = Vec::new();
        let mut lowers: Vec<LinIneq> = Vec::new();
        let mut kept: Vec<LinIneq> = Vec::new();
        for q in &cur.ineqs {
            let c = &q.coeffs[idx];
            if c.is_positive() {
                uppers.push(q.clone());
            } else if c.is_negative() {
                lowers.push(q.clone());
            } else {
                kept.push(q.clone());
            }
        }
        // The implicit v >= 0 is a lower bound and must participate.
        let mut nonneg = LinIneq {
            coeffs: vec![Rat::zero(); cur.vars.len()],
            rhs: Rat::zero(),
        };
        nonneg.coeffs[idx] = -Rat::one();
        lowers.push(nonneg);

        let produced = uppers.len() * lowers.len();
        if kept.len() + produced > guard {
            return Err(Error::GuardExceeded(kept.len() + produced));
        }
        for u in &uppers {
            for l in &lowers {
                let cu = u.coeffs[idx].clone(); // > 0
                let cl = -l.coeffs[idx].clone(); // > 0
                let coeffs: Vec<Rat> = u
                    .coeffs
                    .iter()
                    .zip(&l.coeffs)
                    .map(|(a, b)| a * &cl + b * &cu)
                    .collect();
                debug_assert!(coeffs[idx].is_zero());
                kept.push(LinIneq {
                    coeffs,
                    rhs: &u.rhs * &cl + &l.rhs * &cu,
                });
            }
        }
        // Drop the eliminated column and variable.
        let vars: Vec<RateVar> = cur
            .vars
            .iter()
            .copied()
            .enumerate()
            .filter_map(|(j, w)| (j != idx).then_some(w))
            .collect();
        let ineqs = kept
            .into_iter()
            .map(|q| LinIneq {
                coeffs: q
                    .coeffs
                    .into_iter()
                    .enumerate()
                    .filter_map(|(j, c)| (j != idx).then_some(c))
                    .collect(),
                rhs: q.rhs,
            })
            .collect();
        cur = Polytope { vars, ineqs };
        cur.prune()?;
    }
    Ok(cur)
}

/// Extend a two-sided layer polytope with whole-user rate variables tied
/// to the per-user layer sums, so a projection can keep only (R1, R2).
pub fn with_total_rates(mut poly: Polytope) -> Polytope {
    use RateVar::*;
    poly.vars.push(R1);
    poly.vars.push(R2);
    for q in poly.ineqs.iter_mut() {
        q.coeffs.push(rint(0));
        q.coeffs.push(rint(0));
    }
    poly.add_eq(
        &[
            (R1, rint(1)),
            (W1, rint(-1)),
            (U1, rint(-1)),
            (V1, rint(-1)),
            (V1p, rint(-1)),
        ],
        rint(0),
    );
    poly.add_eq(
        &[
            (R2, rint(1)),
            (W2, rint(-1)),
            (U2, rint(-1)),
            (V2, rint(-1)),
            (V2p, rint(-1)),
        ],
        rint(0),
    );
    poly
}

/// Exact maximum of a weighted sum of rates.
pub fn max_weighted_rate(p: &Polytope, weights: &[(RateVar, Rat)]) -> Result<Rat> {
    let mut obj = vec![Rat::zero(); p.vars.len()];
    for (v, w) in weights {
        let i = p
            .var_index(*v)
            .ok_or_else(|| Error::InvalidParam(format!("weight on absent variable {v}")))?;
        obj[i] = &obj[i] + w;
    }
    p.maximize(&obj)
}

// ---------------------------------------------------------------------------
// Exact two-phase simplex on {x >= 0 : A x <= b}.

pub(crate) enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Unbounded,
    Infeasible,
}

/// Maximize `obj . x` over the system given as LinIneq rows. Bland's rule
/// throughout, so it terminates without any degeneracy tricks.
pub(crate) fn lp_max(rows: &[LinIneq], obj: &[Rat]) -> Result<LpOutcome> {
    let n = obj.len();
    let m = rows.len();
    for q in rows {
        if q.coeffs.len() != n {
            return Err(Error::Inconsistent("inequality arity mismatch".into()));
        }
    }
    // Columns: n structural, m slack, then artificials for negative-rhs rows.
    let neg: Vec<usize> = (0..m).filter(|&i| rows[i].rhs.is_negative()).collect();
    let n_art = neg.len();
    let cols = n + m + n_art;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut art_seen = 0;
    for (i, q) in rows.iter().enumerate() {
        let flip = q.rhs.is_negative();
        let mut row = vec![Rat::zero(); cols];
        for j in 0..n {
            row[j] = if flip { -q.coeffs[j].clone() } else { q.coeffs[j].clone() };
        }
        row[n + i] = if flip { -Rat::one() } else { Rat::one() };
        if flip {
            row[n + m + art_seen] = Rat::one();
            basis.push(n + m + art_seen);
            art_seen += 1;
            rhs.push(-q.rhs.clone());
        } else {
            basis.push(n + i);
            rhs.push(q.rhs.clone());
        }
        t.push(row);
    }

    let pivot = |t: &mut Vec<Vec<Rat>>, rhs: &mut Vec<Rat>, basis: &mut Vec<usize>,
                 r: usize, c: usize| {
        let p = t[r][c].clone();
        for x in t[r].iter_mut() {
            *x = &*x / &p;
        }
        rhs[r] = &rhs[r] / &p;
        for i in 0..t.len() {
            if i == r || t[i][c].is_zero() {
                continue;
            }
            let f = t[i][c].clone();
            for j in 0..cols {
                let d = &t[r][j] * &f;
                t[i][j] = &t[i][j] - &d;
            }
            let d = &rhs[r] * &f;
            rhs[i] = &rhs[i] - &d;
        }
        basis[r] = c;
    };

    // One simplex phase: maximize cost over allowed columns.
    let run = |t: &mut Vec<Vec<Rat>>,
               rhs: &mut Vec<Rat>,
               basis: &mut Vec<usize>,
               cost: &dyn Fn(usize) -> Rat,
               allowed: &dyn Fn(usize) -> bool|
     -> Option<()> {
        loop {
            // Reduced cost c_j - z_j, entering = smallest j with rc > 0.
            let mut entering = None;
            for j in 0..cols {
                if !allowed(j) || basis.contains(&j) {
                    continue;
                }
                let mut z = Rat::zero();
                for (i, &bi) in basis.iter().enumerate() {
                    let cb = cost(bi);
                    if !cb.is_zero() {
                        z = z + &cb * &t[i][j];
                    }
                }
                if cost(j) - z > Rat::zero() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Some(());
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..t.len() {
                if t[i][c].is_positive() {
                    let ratio = &rhs[i] / &t[i][c];
                    match &leave {
                        Some((li, lr)) if *lr < ratio || (*lr == ratio && basis[*li] < basis[i]) => {}
                        _ => leave = Some((i, ratio)),
                    }
                }
            }
            let Some((r, _)) = leave else {
                return None; // unbounded in this phase
            };
            pivot(t, rhs, basis, r, c);
        }
    };

    if n_art > 0 {
        let phase1 = |j: usize| {
            if j >= n + m {
                -Rat::one()
            } else {
                Rat::zero()
            }
        };
        run(&mut t, &mut rhs, &mut basis, &phase1, &|_| true)
            .expect("phase-1 objective is bounded");
        let resid: Rat = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= n + m)
            .map(|(i, _)| rhs[i].clone())
            .fold(Rat::zero(), |a, b| a + b);
        if !resid.is_zero() {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot leftover artificials out of the basis where possible.
        for r in 0..basis.len() {
            if basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&j| !t[r][j].is_zero()) {
                    pivot(&mut t, &mut rhs, &mut basis, r, c);
                }
                // A row with no nonzero structural or slack entry is a
                // 0 = 0 row at this point and can stay; its artificial is
                // pinned to zero and never re-enters.
            }
        }
    }

    let phase2 = |j: usize| {
        if j < n {
            obj[j].clone()
        } else {
            Rat::zero()
        }
    };
    let ok = run(&mut t, &mut rhs, &mut basis, &phase2, &|j| j < n + m);
    if ok.is_none() {
        return Ok(LpOutcome::Unbounded);
    }
    let mut point = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            point[b] = rhs[i].clone();
        }
    }
    let value = point
        .iter()
        .zip(obj)
        .map(|(x, c)| x * c)
        .fold(Rat::zero(), |a, b| a + b);
    Ok(LpOutcome::Optimal { value, point })
}

// ---------------------------------------------------------------------------
// Auxiliary-signal specifications and mutual information by rank.

/// A family of jointly distributed signals: each named signal is a linear
/// image of `base` independent uniform bits.
#[derive(Clone, Debug)]
pub struct AuxSpec {
    base: usize,
    vars: BTreeMap<String, BitMatrix>,
}

impl AuxSpec {
    pub fn new(base: usize) -> AuxSpec {
        assert!(base <= crate::gf2::MAX_BITS, "base bit pool too wide");
        AuxSpec { base, vars: BTreeMap::new() }
    }

    pub fn base_dim(&self) -> usize {
        self.base
    }

    pub fn insert(&mut self, name: &str, gen: BitMatrix) {
        assert_eq!(gen.cols(), self.base);
        self.vars.insert(name.to_string(), gen);
    }

    pub fn get(&self, name: &str) -> Option<&BitMatrix> {
        self.vars.get(name)
    }

    fn stack(&self, names: &[&str]) -> Result<BitMatrix> {
        let mut out = BitMatrix::zero(0, self.base);
        for name in names {
            let gen = self
                .vars
                .get(*name)
                .ok_or_else(|| Error::InvalidParam(format!("unknown signal: {name}")))?;
            out = out.vstack(gen);
        }
        Ok(out)
    }

    /// Exact `I(A; B | C)` in bits. Always a nonnegative integer here,
    /// since every entropy is a GF(2) rank.
    pub fn mutual_info(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<u32> {
        let ma = self.stack(a)?;
        let mb = self.stack(b)?;
        let mc = self.stack(given)?;
        let bc = mb.vstack(&mc).rank() as i64;
        let c = mc.rank() as i64;
        let abc = ma.vstack(&mb).vstack(&mc).rank() as i64;
        let ac = ma.vstack(&mc).rank() as i64;
        let i = bc - c - abc + ac;
        debug_assert!(i >= 0);
        Ok(i as u32)
    }

    /// The symmetric virtual-channel signal family on gains `(n_d, n_i)`.
    ///
    /// Pool layout per source: public `W` (full width), pre-shared `Vp`
    /// (full width), private `U` on the levels the other destination
    /// cannot see, cooperative `V` (full width, beamformed so that
    /// destination 3 receives exactly `V1` and destination 4 exactly
    /// `V2`). When `n_d = n_i` no beamformer exists and `V` is empty.
    pub fn virtual_sym(n_d: u32, n_i: u32) -> AuxSpec {
        let n = n_d.max(n_i) as usize;
        let u = n_d.saturating_sub(n_i) as usize;
        let v = if n_d == n_i { 0 } else { n };
        let base = 2 * (2 * n + u + v);
        let mut spec = AuxSpec::new(base);
        let half = 2 * n + u + v;
        for (s, off) in [("1", 0), ("2", half)] {
            let w = embed(n, base, 0, off, n);
            let vp = embed(n, base, 0, off + n, n);
            // Private bits sit just below the cross-channel view: transmit
            // levels [n_i, n_d) when n_d > n_i.
            let uu = embed(n, base, n_i as usize, off + 2 * n, u);
            let vv = embed(n, base, n - v, off + 2 * n + u, v);
            spec.insert(&format!("W{s}"), w.clone());
            spec.insert(&format!("V{s}p"), vp.clone());
            spec.insert(&format!("U{s}"), uu.clone());
            spec.insert(&format!("V{s}"), vv.clone());
            spec.insert(&format!("X_V{s}p"), vp.clone());
            spec.insert(&format!("X_W{s}"), vp.xor(&w));
            spec.insert(&format!("X_U{s}"), vp.xor(&w).xor(&uu));
        }
        let own = BitMatrix::shift(n, n - n_d as usize);
        let cross = BitMatrix::shift(n, n - n_i as usize);
        let stack1 = spec.stack(&["X_U1"]).unwrap();
        let stack2 = spec.stack(&["X_U2"]).unwrap();
        let v1 = spec.stack(&["V1"]).unwrap();
        let v2 = spec.stack(&["V2"]).unwrap();
        let y3 = own.mul(&stack1).xor(&cross.mul(&stack2)).xor(&v1);
        let y4 = own.mul(&stack2).xor(&cross.mul(&stack1)).xor(&v2);
        spec.insert("Y3", y3);
        spec.insert("Y4", y4);
        spec
    }

    /// The cognitive virtual-channel signal family. No pre-shared layer,
    /// no `V2`; `V1` carries `k` beamformed bits that arrive intact at
    /// destination 3 and cancel at destination 4.
    pub fn virtual_cog(p: &LdmCogParams) -> AuxSpec {
        let n = p.n1.max(p.a1).max(p.n2).max(p.a2) as usize;
        let u1 = p.n1.saturating_sub(p.a2) as usize;
        let u2 = p.n2.saturating_sub(p.a1) as usize;
        let k = (p.realizable_k() as usize).min(n);
        let base = 2 * n + u1 + u2 + k;
        let mut spec = AuxSpec::new(base);
        let w1 = embed(n, base, 0, 0, n);
        let uu1 = embed(n, base, p.a2 as usize, n, u1);
        let w2 = embed(n, base, 0, n + u1, n);
        let uu2 = embed(n, base, p.a1 as usize, 2 * n + u1, u2);
        let v1 = embed(n, base, n - k, 2 * n + u1 + u2, k);
        spec.insert("W1", w1.clone());
        spec.insert("U1", uu1.clone());
        spec.insert("W2", w2.clone());
        spec.insert("U2", uu2.clone());
        spec.insert("V1", v1.clone());
        spec.insert("X_W1", w1.clone());
        spec.insert("X_U1", w1.xor(&uu1));
        spec.insert("X_W2", w2.clone());
        spec.insert("X_U2", w2.xor(&uu2));
        let d3_1 = BitMatrix::shift(n, n - p.n1 as usize);
        let d3_2 = BitMatrix::shift(n, n - p.a1 as usize);
        let d4_2 = BitMatrix::shift(n, n - p.n2 as usize);
        let d4_1 = BitMatrix::shift(n, n - p.a2 as usize);
        let x1 = w1.xor(&uu1);
        let x2 = w2.xor(&uu2);
        let y3 = d3_1.mul(&x1).xor(&d3_2.mul(&x2)).xor(&v1);
        let y4 = d4_2.mul(&x2).xor(&d4_1.mul(&x1));
        spec.insert("Y3", y3);
        spec.insert("Y4", y4);
        spec
    }
}

/// Generator for `d` independent bits placed at signal levels
/// `[level, level+d)` of an `n`-level signal, drawing from pool bits
/// `[bit, bit+d)`.
fn embed(n: usize, base: usize, level: usize, bit: usize, d: usize) -> BitMatrix {
    assert!(level + d <= n && bit + d <= base);
    let mut m = BitMatrix::zero(n, base);
    for j in 0..d {
        m.set(level + j, bit + j, true);
    }
    m
}

/// `I(targets ; output | conditioning)` over the named signals.
pub fn ldm_mutual_info(
    spec: &AuxSpec,
    targets: &[&str],
    output: &[&str],
    conditioning: &[&str],
) -> Result<u32> {
    spec.mutual_info(targets, output, conditioning)
}

// ---------------------------------------------------------------------------
// The virtual-channel constraint systems.

/// Decoding targets and conditioning for the fifteen destination-3 error
/// events, in display order. The first entry is the pre-shared bit-pipe
/// cap and carries no mutual information.
fn dest3_events() -> Vec<(Vec<RateVar>, Vec<&'static str>, Vec<&'static str>)> {
    use RateVar::*;
    let raw: &[(&[RateVar], &[&str], &[&str])] = &[
        (&[V1p], &[], &[]),
        (
            &[U1],
            &["X_U1"],
            &["X_W1", "V1", "X_V1p", "X_W2", "X_V2p"],
        ),
        (
            &[W1, U1],
            &["X_W1", "X_U1"],
            &["V1", "X_V1p", "X_W2", "X_V2p"],
        ),
        (
            &[V1p, W1, U1],
            &["X_W1", "X_U1", "X_V1p"],
            &["V1", "X_W2", "X_V2p"],
        ),
        (
            &[V1],
            &["V1"],
            &["X_W1", "X_U1", "X_V1p", "X_W2", "X_V2p"],
        ),
        (
            &[V1, U1],
            &["X_U1", "V1"],
            &["X_W1", "X_V1p", "X_W2", "X_V2p"],
        ),
        (
            &[V1, W1, U1],
            &["X_W1", "X_U1", "V1"],
            &["X_V1p", "X_W2", "X_V2p"],
        ),
        (
            &[V1, V1p, W1, U1],
            &["X_W1", "X_U1", "V1", "X_V1p"],
            &["X_W2", "X_V2p"],
        ),
        (
            &[W2, U1],
            &["X_W2", "X_U1"],
            &["X_W1", "V1", "X_V1p", "X_V2p"],
        ),
        (
            &[W2, W1, U1],
            &["X_W2", "X_W1", "X_U1"],
            &["V1", "X_V1p", "X_V2p"],
        ),
        (
            &[W2, V1p, W1, U1],
            &["X_W2", "X_W1", "X_U1", "X_V1p"],
            &["V1", "X_V2p"],
        ),
        (
            &[W2, V1],
            &["X_W2", "V1"],
            &["X_W1", "X_U1", "X_V1p", "X_V2p"],
        ),
        (
            &[W2, V1, U1],
            &["X_W2", "X_U1", "V1"],
            &["X_W1", "X_V1p", "X_V2p"],
        ),
        (
            &[W2, V1, W1, U1],
            &["X_W2", "X_W1", "X_U1", "V1"],
            &["X_V1p", "X_V2p"],
        ),
        (
            &[W2, V1, V1p, W1, U1],
            &["X_W1", "X_U1", "X_V1p", "V1", "X_W2"],
            &["X_V2p"],
        ),
    ];
    raw.iter()
        .map(|(v, t, g)| (v.to_vec(), t.to_vec(), g.to_vec()))
        .collect()
}

fn mirror_name(name: &str) -> String {
    name.chars()
        .map(|ch| match ch {
            '1' => '2',
            '2' => '1',
            '3' => '4',
            '4' => '3',
            c => c,
        })
        .collect()
}

/// The full achievable region of the symmetric virtual channel over the
/// eight per-layer rates, with every mutual information evaluated by rank
/// on the canonical signal family. Inequalities: fifteen per destination
/// plus the two source bit-pipe caps; nonnegativity implicit.
pub fn virtual_constraints_sym(p: &LdmSymParams, bp_ss: &Rat, bp_sd: &Rat) -> Polytope {
    use RateVar::*;
    let spec = AuxSpec::virtual_sym(p.n_d, p.n_i);
    let mut poly = Polytope::new(vec![W1, U1, V1, V1p, W2, U2, V2, V2p]);
    for dest in 0..2 {
        for (vars, targets, given) in &dest3_events() {
            let (vars, targets, output, given): (Vec<RateVar>, Vec<String>, &str, Vec<String>) =
                if dest == 0 {
                    (
                        vars.clone(),
                        targets.iter().map(|s| s.to_string()).collect(),
                        "Y3",
                        given.iter().map(|s| s.to_string()).collect(),
                    )
                } else {
                    (
                        vars.iter().map(|v| v.mirrored()).collect(),
                        targets.iter().map(|s| mirror_name(s)).collect(),
                        "Y4",
                        given.iter().map(|s| mirror_name(s)).collect(),
                    )
                };
            let rhs = if targets.is_empty() {
                bp_sd.clone()
            } else {
                let t: Vec<&str> = targets.iter().map(String::as_str).collect();
                let g: Vec<&str> = given.iter().map(String::as_str).collect();
                rint(spec.mutual_info(&t, &[output], &g).expect("known signals") as i64)
            };
            let terms: Vec<(RateVar, Rat)> = vars.iter().map(|v| (*v, Rat::one())).collect();
            poly.add_le(&terms, rhs);
        }
    }
    poly.add_upper(V1, bp_ss.clone());
    poly.add_upper(V2, bp_ss.clone());
    poly
}

/// The cognitive virtual-channel region over the five message rates, as a
/// twelve-inequality system with `k` the largest realizable beamforming
/// block.
pub fn virtual_constraints_cog(p: &LdmCogParams, bp_12: &Rat) -> Polytope {
    use RateVar::*;
    let n1 = p.n1 as i64;
    let n2 = p.n2 as i64;
    let a1 = p.a1 as i64;
    let a2 = p.a2 as i64;
    let k = p.realizable_k() as i64;
    let mut poly = Polytope::new(vec![W1, U1, V1, W2, U2]);
    let one = Rat::one;
    let mut le = |vars: &[RateVar], rhs: i64| {
        let terms: Vec<(RateVar, Rat)> = vars.iter().map(|v| (*v, one())).collect();
        poly.add_le(&terms, rint(rhs));
    };
    le(&[W1, U1, W2, V1], a1.max(n1));
    le(&[U1, W2, V1], a1.max(k));
    le(&[W1, U1, V1], n1.max(k));
    le(&[W1, U1], n1);
    le(&[U1, W2], (n1 - a2).max(a1));
    le(&[U1, V1], k);
    le(&[U1], (n1 - a2).max(0));
    le(&[W1, W2, U2], a2.max(n2));
    le(&[W1, U2], (n2 - a1).max(a2));
    le(&[W2, U2], n2);
    le(&[U2], (n2 - a1).max(0));
    poly.add_upper(V1, bp_12.clone());
    poly
}

/// Closed-form maximum sum rate of the symmetric virtual channel.
///
/// Weak virtual interference (`n_i < n_d`) uses no source-to-destination
/// pipes, so `bp_sd` must be zero there; strong virtual interference
/// (`n_i > n_d`) uses both pipe kinds. Equal gains are outside the
/// formula's domain.
pub fn closed_form_sum_virtual(n_d: u32, n_i: u32, bp_ss: &Rat, bp_sd: &Rat) -> Result<Rat> {
    if bp_ss.is_negative() || bp_sd.is_negative() {
        return Err(Error::InvalidParam("negative bit-pipe rate".into()));
    }
    let d = rint(n_d as i64);
    let i = rint(n_i as i64);
    if n_d == n_i {
        return Err(Error::Unsupported(
            "equal direct and interference gains: no beamformed layer exists".into(),
        ));
    }
    let two = rint(2);
    if n_i < n_d {
        if !bp_sd.is_zero() {
            return Err(Error::Unsupported(
                "pre-shared pipes are unused under weak virtual interference".into(),
            ));
        }
        let t1 = d.clone();
        let t2 = &d - &i / &two + bp_ss / &two;
        let t3 = rint((n_i as i64).max(n_d as i64 - n_i as i64)) + bp_ss;
        Ok(&two * t1.min(t2).min(t3))
    } else {
        let t1 = &d + bp_ss;
        let t2 = (&i + bp_ss + bp_sd) / &two;
        let t3 = i.clone();
        Ok(&two * t1.min(t2).min(t3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn all1(p: &Polytope) -> Vec<(RateVar, Rat)> {
        p.vars.iter().map(|&v| (v, Rat::one())).collect()
    }

    #[test]
    fn lp_box() {
        // max x + y on {x <= 3, y <= 2}
        let mut p = Polytope::new(vec![RateVar::R1, RateVar::R2]);
        p.add_upper(RateVar::R1, rint(3));
        p.add_upper(RateVar::R2, rint(2));
        assert_eq!(max_weighted_rate(&p, &all1(&p)).unwrap(), rint(5));
        // Unbounded without the y cap.
        let mut q = Polytope::new(vec![RateVar::R1, RateVar::R2]);
        q.add_upper(RateVar::R1, rint(3));
        assert!(matches!(
            max_weighted_rate(&q, &all1(&q)),
            Err(Error::Unbounded)
        ));
    }

    #[test]
    fn lp_negative_rhs_feasibility() {
        // Pin x = 2 via two inequalities; max y with x + y <= 5.
        let mut p = Polytope::new(vec![RateVar::R1, RateVar::R2]);
        p.add_eq(&[(RateVar::R1, Rat::one())], rint(2));
        p.add_le(
            &[(RateVar::R1, Rat::one()), (RateVar::R2, Rat::one())],
            rint(5),
        );
        assert_eq!(
            max_weighted_rate(&p, &[(RateVar::R2, Rat::one())]).unwrap(),
            rint(3)
        );
        // Infeasible pin: x = 2 and x <= 1.
        let mut q = Polytope::new(vec![RateVar::R1]);
        q.add_eq(&[(RateVar::R1, Rat::one())], rint(2));
        q.add_upper(RateVar::R1, rint(1));
        assert!(q.is_empty().unwrap());
    }

    #[test]
    fn fm_simple() {
        // Eliminate y from {x + y <= 3}: y >= 0 gives x <= 3.
        let mut p = Polytope::new(vec![RateVar::R1, RateVar::R2]);
        p.add_le(
            &[(RateVar::R1, Rat::one()), (RateVar::R2, Rat::one())],
            rint(3),
        );
        let q = fourier_motzkin(&p, &[RateVar::R2]).unwrap();
        assert_eq!(q.vars, vec![RateVar::R1]);
        assert_eq!(q.ineqs.len(), 1);
        assert_eq!(q.ineqs[0].coeffs, vec![Rat::one()]);
        assert_eq!(q.ineqs[0].rhs, rint(3));
        // Eliminating nothing is the identity.
        let r = fourier_motzkin(&p, &[]).unwrap();
        assert_eq!(r, p);
    }

    #[test]
    fn fm_projection_matches_lp() {
        // Project {x + 2y <= 4, y <= 1} onto x and compare maxima.
        let mut p = Polytope::new(vec![RateVar::R1, RateVar::R2]);
        p.add_le(
            &[(RateVar::R1, Rat::one()), (RateVar::R2, rint(2))],
            rint(4),
        );
        p.add_upper(RateVar::R2, Rat::one());
        let q = fourier_motzkin(&p, &[RateVar::R2]).unwrap();
        assert_eq!(
            max_weighted_rate(&q, &[(RateVar::R1, Rat::one())]).unwrap(),
            rint(4)
        );
    }

    #[test]
    fn mutual_info_basics() {
        let mut spec = AuxSpec::new(3);
        spec.insert("X", BitMatrix::identity(3));
        spec.insert("Y", BitMatrix::identity(3));
        spec.insert("Z", BitMatrix::zero(3, 3));
        assert_eq!(spec.mutual_info(&["X"], &["Y"], &[]).unwrap(), 3);
        assert_eq!(spec.mutual_info(&["X"], &["Z"], &[]).unwrap(), 0);
        assert_eq!(spec.mutual_info(&["X"], &["Y"], &["X"]).unwrap(), 0);
        assert!(spec.mutual_info(&["nope"], &["Y"], &[]).is_err());
    }

    #[test]
    fn private_layer_capacity_is_the_gain_gap() {
        let spec = AuxSpec::virtual_sym(6, 4);
        let i = ldm_mutual_info(
            &spec,
            &["X_U1"],
            &["Y3"],
            &["X_W1", "V1", "X_V1p", "X_W2", "X_V2p"],
        )
        .unwrap();
        assert_eq!(i, 2);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            closed_form_sum_virtual(6, 4, &rint(3), &rint(0)).unwrap(),
            rint(11)
        );
        assert_eq!(
            closed_form_sum_virtual(2, 4, &rint(1), &rint(1)).unwrap(),
            rint(6)
        );
        assert_eq!(
            closed_form_sum_virtual(5, 4, &rint(0), &rint(0)).unwrap(),
            rint(6)
        );
        assert!(closed_form_sum_virtual(3, 3, &rint(0), &rint(0)).is_err());
        assert!(closed_form_sum_virtual(6, 4, &rint(0), &rint(1)).is_err());
    }

    #[test]
    fn sym_system_matches_closed_form_spotcheck() {
        for (n_d, n_i, ss, sd) in [(6u32, 4u32, 3i64, 0i64), (2, 4, 1, 1), (5, 4, 0, 0)] {
            let p = LdmSymParams::new(n_d, n_i, 0);
            let poly = virtual_constraints_sym(&p, &rint(ss), &rint(sd));
            let lp = max_weighted_rate(&poly, &all1(&poly)).unwrap();
            let cf = closed_form_sum_virtual(n_d, n_i, &rint(ss), &rint(sd)).unwrap();
            assert_eq!(lp, cf, "({n_d},{n_i},{ss},{sd})");
        }
    }

    #[test]
    fn degenerate_channel_has_zero_rate() {
        let p = LdmSymParams::new(0, 0, 0);
        let poly = virtual_constraints_sym(&p, &rint(5), &rint(5));
        assert_eq!(max_weighted_rate(&poly, &all1(&poly)).unwrap(), rint(0));
    }

    #[test]
    fn cog_pinned_slice_matches_closed_form() {
        use RateVar::*;
        let p = LdmCogParams::new(2, 3, 5, 2, 0);
        let mut poly = virtual_constraints_cog(&p, &rint(2));
        poly.add_eq(
            &[(W1, Rat::one()), (U1, Rat::one()), (V1, Rat::one())],
            rint(2),
        );
        let r2 = max_weighted_rate(&poly, &[(W2, Rat::one()), (U2, Rat::one())]).unwrap();
        assert_eq!(r2, rint(3));
    }

    #[test]
    fn cog_rhs_agree_with_rank_mutual_informations() {
        // Every inequality of the twelve-constraint system is an error
        // event of the underlying superposition code; its right side must
        // equal the corresponding rank mutual information.
        for (n1, n2, a1, a2) in [
            (2u32, 3u32, 5u32, 2u32),
            (3, 2, 1, 4),
            (4, 4, 2, 2),
            (1, 3, 0, 2),
            (0, 2, 3, 1),
        ] {
            let p = LdmCogParams::new(n1, n2, a1, a2, 0);
            let poly = virtual_constraints_cog(&p, &rint(0));
            let spec = AuxSpec::virtual_cog(&p);
            let mi = |t: &[&str], o: &str, g: &[&str]| {
                rint(spec.mutual_info(t, &[o], g).unwrap() as i64)
            };
            let expected = [
                mi(&["X_W1", "X_U1", "V1", "X_W2"], "Y3", &[]),
                mi(&["X_W2", "X_U1", "V1"], "Y3", &["X_W1"]),
                mi(&["X_W1", "X_U1", "V1"], "Y3", &["X_W2"]),
                mi(&["X_W1", "X_U1"], "Y3", &["V1", "X_W2"]),
                mi(&["X_W2", "X_U1"], "Y3", &["X_W1", "V1"]),
                mi(&["X_U1", "V1"], "Y3", &["X_W1", "X_W2"]),
                mi(&["X_U1"], "Y3", &["X_W1", "V1", "X_W2"]),
            ];
            for (q, want) in poly.ineqs[..7].iter().zip(&expected) {
                assert_eq!(&q.rhs, want, "({n1},{n2},{a1},{a2})");
            }
            let expected4 = [
                mi(&["X_W1", "X_W2", "X_U2"], "Y4", &[]),
                mi(&["X_W1", "X_U2"], "Y4", &["X_W2"]),
                mi(&["X_W2", "X_U2"], "Y4", &["X_W1"]),
                mi(&["X_U2"], "Y4", &["X_W2", "X_W1"]),
            ];
            for (q, want) in poly.ineqs[7..11].iter().zip(&expected4) {
                assert_eq!(&q.rhs, want, "({n1},{n2},{a1},{a2}) dest 4");
            }
        }
    }

    #[test]
    fn text_serialization() {
        let mut p = Polytope::new(vec![RateVar::W1, RateVar::U1]);
        p.add_le(
            &[(RateVar::W1, rint(2)), (RateVar::U1, rat(-1, 2))],
            rat(7, 2),
        );
        p.add_upper(RateVar::U1, rint(1));
        assert_eq!(p.to_text(), "2 R_W1 - 1/2 R_U1 <= 7/2\nR_U1 <= 1\n");
    }

    #[test]
    fn prune_drops_dominated_and_duplicate_rows() {
        let mut p = Polytope::new(vec![RateVar::R1, RateVar::R2]);
        p.add_le(
            &[(RateVar::R1, Rat::one()), (RateVar::R2, Rat::one())],
            rint(4),
        );
        // Scaled duplicate of the first row.
        p.add_le(&[(RateVar::R1, rint(2)), (RateVar::R2, rint(2))], rint(8));
        // Dominated: implied by the first row on the nonnegative orthant.
        p.add_le(&[(RateVar::R1, Rat::one())], rint(4));
        // Tautology.
        p.add_le(&[(RateVar::R1, rint(-1))], rint(1));
        p.prune().unwrap();
        assert_eq!(p.ineqs.len(), 1);
    }
}
