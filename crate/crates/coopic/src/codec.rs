//! Bit-exact codecs and a slot-level simulator for the half-duplex
//! cooperation schemes.
//!
//! A transmit-slot code stacks four message layers per source:
//!
//! * `w`: public bits decoded by both destinations,
//! * `u`: private bits placed below the cross gain, invisible at the
//!   unintended destination,
//! * `v`: cooperatively beamformed bits. The sources learn each other's
//!   `v` streams over the cooperation pipes and jointly invert the
//!   two-by-two channel so each destination receives its own `v` block
//!   on clean rows,
//! * `vp`: bits whose values are also pre-shared with the unintended
//!   destination over a source-to-destination pipe, so that destination
//!   can subtract them before decoding.
//!
//! Listening slots carry a direct share for the paired destination plus
//! level groups for the pipes and for relayed partner data. The simulator
//! moves every bit through the shift channel, decodes from received words
//! only, and counts exact mismatches.

use crate::capacity::ldm_sum_family;
use crate::gf2::{BitMatrix, BitVector};
use crate::ldm::{transfer_cog, transfer_sym, LdmCogParams, LdmParams, LdmSymParams, Mode, Schedule};
use crate::region::{virtual_constraints_sym, Polytope};
use crate::{rat, Delta, Error, Rat, Result};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write as IoWrite;

/// Per-slot layer widths for one source in a transmit slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LayerRates {
    pub w: u32,
    pub u: u32,
    pub v: u32,
    pub vp: u32,
}

impl LayerRates {
    pub fn new(w: u32, u: u32, v: u32, vp: u32) -> LayerRates {
        LayerRates { w, u, v, vp }
    }

    pub fn sum(&self) -> u32 {
        self.w + self.u + self.v + self.vp
    }
}

/// A complete symmetric-scheme allocation: what every slot of a block
/// carries. Pipe and relay fields are per listening slot; `pipe_ss[s]`
/// feeds source `s`'s beamformed stream to its partner and `pipe_sd[s]`
/// pre-shares its `vp` stream with the unintended destination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymAllocation {
    pub layers: [LayerRates; 2],
    pub direct: [u32; 2],
    pub pipe_ss: [u32; 2],
    pub pipe_sd: [u32; 2],
    pub relay: u32,
}

impl SymAllocation {
    pub fn empty() -> SymAllocation {
        SymAllocation {
            layers: [LayerRates::default(); 2],
            direct: [0; 2],
            pipe_ss: [0; 2],
            pipe_sd: [0; 2],
            relay: 0,
        }
    }
}

/// Cognitive-scheme allocation. Only source 1 cooperates: it sends a
/// direct share and its beamformed stream during listening slots, and
/// source 2 beamforms that stream back to destination 3 in transmit
/// slots while cancelling it at destination 4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CogAllocation {
    pub w: [u32; 2],
    pub u: [u32; 2],
    pub v1: u32,
    pub direct1: u32,
    pub pipe12: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MessageAllocation {
    Sym(SymAllocation),
    Cog(CogAllocation),
}

/// One source's fresh messages for a single transmit slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMessages {
    pub w: BitVector,
    pub u: BitVector,
    pub v: BitVector,
    pub vp: BitVector,
}

impl SymMessages {
    pub fn zero(r: &LayerRates) -> SymMessages {
        SymMessages {
            w: BitVector::zero(r.w as usize),
            u: BitVector::zero(r.u as usize),
            v: BitVector::zero(r.v as usize),
            vp: BitVector::zero(r.vp as usize),
        }
    }

    pub fn random<R: Rng>(rng: &mut R, r: &LayerRates) -> SymMessages {
        SymMessages {
            w: random_vec(rng, r.w as usize),
            u: random_vec(rng, r.u as usize),
            v: random_vec(rng, r.v as usize),
            vp: random_vec(rng, r.vp as usize),
        }
    }

    pub fn total(&self) -> usize {
        self.w.len() + self.u.len() + self.v.len() + self.vp.len()
    }
}

/// Cognitive messages: `v` is nonempty only for source 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CogMessages {
    pub w: BitVector,
    pub u: BitVector,
    pub v: BitVector,
}

impl CogMessages {
    pub fn zero(w: u32, u: u32, v: u32) -> CogMessages {
        CogMessages {
            w: BitVector::zero(w as usize),
            u: BitVector::zero(u as usize),
            v: BitVector::zero(v as usize),
        }
    }

    pub fn random<R: Rng>(rng: &mut R, w: u32, u: u32, v: u32) -> CogMessages {
        CogMessages {
            w: random_vec(rng, w as usize),
            u: random_vec(rng, u as usize),
            v: random_vec(rng, v as usize),
        }
    }
}

/// Decoder output at one destination of the symmetric code. `other_w` is
/// the unintended public layer, returned only when the received word pins
/// it down uniquely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymDecoded {
    pub w: BitVector,
    pub u: BitVector,
    pub v: BitVector,
    pub vp: BitVector,
    pub other_w: Option<BitVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CogDecoded {
    pub w: BitVector,
    pub u: BitVector,
    /// Beamformed bits; empty at destination 4, where they cancel.
    pub v: BitVector,
    pub other_w: Option<BitVector>,
}

fn gm(m: usize, g: u32) -> BitMatrix {
    BitMatrix::shift(m, m - (g as usize).min(m))
}

fn random_vec<R: Rng>(rng: &mut R, len: usize) -> BitVector {
    if len == 0 {
        return BitVector::zero(0);
    }
    let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    BitVector::from_bits(rng.gen::<u64>() & mask, len)
}

fn subrange(v: &BitVector, start: usize, len: usize) -> BitVector {
    let mut out = BitVector::zero(len);
    for i in 0..len {
        if v.get(start + i) {
            out.set(i, true);
        }
    }
    out
}

fn mat_is_zero(m: &BitMatrix) -> bool {
    (0..m.rows()).all(|i| m.row(i).is_zero())
}

fn slice_to_vec(bits: &[bool]) -> BitVector {
    let mut out = BitVector::zero(bits.len());
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out.set(i, true);
        }
    }
    out
}

/// One destination's linear observation model: received word equals
/// `a * [own message coords | other public coords]` after side-info
/// stripping.
#[derive(Clone, Debug)]
struct DecodeSys {
    a: BitMatrix,
    /// Cumulative ends of the own message groups within the coordinate
    /// vector.
    splits: Vec<usize>,
    own_cols: usize,
    other_cols: usize,
    /// Maps the other source's pre-shared message bits to their image in
    /// the received word, subtracted before solving.
    strip: BitMatrix,
    own_unique: bool,
    other_unique: bool,
}

fn nullspace(a: &BitMatrix) -> Vec<BitVector> {
    a.solve_with_nullspace(&BitVector::zero(a.rows()))
        .map(|(_, ns)| ns)
        .expect("zero is always a solution")
}

fn coords_zero(v: &BitVector, start: usize, end: usize) -> bool {
    (start..end).all(|i| !v.get(i))
}

impl DecodeSys {
    fn assemble(blocks: &[BitMatrix], own_groups: usize, strip: BitMatrix) -> Result<DecodeSys> {
        let rows = blocks[0].rows();
        let total: usize = blocks.iter().map(|b| b.cols()).sum();
        if total >= 64 {
            return Err(Error::Unsupported(
                "decoder coordinate vector is too wide for the solver".into(),
            ));
        }
        let mut a = BitMatrix::zero(rows, total);
        let mut splits = Vec::new();
        let mut off = 0;
        for (i, b) in blocks.iter().enumerate() {
            a.set_block(0, off, b);
            off += b.cols();
            if i < own_groups {
                splits.push(off);
            }
        }
        let own_cols = splits.last().copied().unwrap_or(0);
        let ns = nullspace(&a);
        let own_unique = ns.iter().all(|v| coords_zero(v, 0, own_cols));
        let other_unique = ns.iter().all(|v| coords_zero(v, own_cols, total));
        Ok(DecodeSys {
            a,
            splits,
            own_cols,
            other_cols: total - own_cols,
            strip,
            own_unique,
            other_unique,
        })
    }

    /// Solve for the message coordinates behind a received word. Returns
    /// the own groups plus the other public layer when unique.
    fn solve(&self, y: &BitVector, side: &BitVector) -> Result<(Vec<BitVector>, Option<BitVector>)> {
        let cleaned = y.xor(&self.strip.mul_vec(side));
        let Some((x, _)) = self.a.solve_with_nullspace(&cleaned) else {
            return Err(Error::InvalidParam(
                "received word lies outside the code image".into(),
            ));
        };
        if !self.own_unique {
            return Err(Error::DecodeAmbiguous(
                "several message tuples explain the received word".into(),
            ));
        }
        let mut groups = Vec::with_capacity(self.splits.len());
        let mut start = 0;
        for &end in &self.splits {
            groups.push(subrange(&x, start, end - start));
            start = end;
        }
        let other = self
            .other_unique
            .then(|| subrange(&x, self.own_cols, self.other_cols));
        Ok((groups, other))
    }
}

// ---------------------------------------------------------------------
// Level placement: a structured search that gives every message bit its
// own received row at every destination that sees it, falling back to
// random generators verified by rank when no single-occupancy layout
// exists.

struct PlacementGroup {
    source: usize,
    layer: usize,
    count: usize,
    /// Candidate levels with the received row each occupies per
    /// destination (`None` when invisible there).
    options: Vec<(u32, [Option<usize>; 2])>,
}

fn solve_placement(mut groups: Vec<PlacementGroup>) -> Option<Vec<(usize, usize, Vec<u32>)>> {
    groups.retain(|g| g.count > 0);
    if groups.is_empty() {
        return Some(Vec::new());
    }
    groups.sort_by_key(|g| g.options.len().saturating_sub(g.count));

    fn rec(
        groups: &[PlacementGroup],
        gi: usize,
        start: usize,
        left: usize,
        masks: &mut [u64; 2],
        picks: &mut [Vec<u32>],
        budget: &mut usize,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if left == 0 {
            let next = gi + 1;
            if next == groups.len() {
                return true;
            }
            return rec(groups, next, 0, groups[next].count, masks, picks, budget);
        }
        let opts = &groups[gi].options;
        if start + left > opts.len() {
            return false;
        }
        for oi in start..=(opts.len() - left) {
            let (level, rows) = &opts[oi];
            let mut bits = [0u64; 2];
            let mut free = true;
            for d in 0..2 {
                if let Some(r) = rows[d] {
                    let b = 1u64 << r;
                    if masks[d] & b != 0 {
                        free = false;
                        break;
                    }
                    bits[d] = b;
                }
            }
            if !free {
                continue;
            }
            masks[0] |= bits[0];
            masks[1] |= bits[1];
            picks[gi].push(*level);
            if rec(groups, gi, oi + 1, left - 1, masks, picks, budget) {
                return true;
            }
            picks[gi].pop();
            masks[0] &= !bits[0];
            masks[1] &= !bits[1];
        }
        false
    }

    let mut masks = [0u64; 2];
    let mut picks = vec![Vec::new(); groups.len()];
    let mut budget = 200_000usize;
    if rec(&groups, 0, 0, groups[0].count, &mut masks, &mut picks, &mut budget) {
        Some(
            groups
                .iter()
                .zip(picks)
                .map(|(g, p)| (g.source, g.layer, p))
                .collect(),
        )
    } else {
        None
    }
}

fn unit_columns(n: usize, rows: &[u32]) -> BitMatrix {
    let mut m = BitMatrix::zero(n, rows.len());
    for (j, &r) in rows.iter().enumerate() {
        m.set(r as usize, j, true);
    }
    m
}

fn random_matrix<R: Rng>(rng: &mut R, n: usize, cols: usize, lo: u32, hi: u32) -> BitMatrix {
    let mut m = BitMatrix::zero(n, cols);
    for j in 0..cols {
        for r in lo..hi {
            if rng.gen::<bool>() {
                m.set(r as usize, j, true);
            }
        }
    }
    m
}

fn random_rows<R: Rng>(rng: &mut R, lo: u32, hi: u32, count: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (lo..hi).collect();
    for i in 0..count.min(pool.len()) {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut out: Vec<u32> = pool.into_iter().take(count).collect();
    out.sort_unstable();
    out
}

// ---------------------------------------------------------------------
// Symmetric transmit-slot code.

#[derive(Clone, Debug)]
struct SymGens {
    w: BitMatrix,
    u: BitMatrix,
    v_place: BitMatrix,
    vp: BitMatrix,
}

#[derive(Clone, Debug)]
pub struct VirtualCodeSym {
    pub params: LdmSymParams,
    pub rates: [LayerRates; 2],
    n: usize,
    gens: [SymGens; 2],
    /// Inverse of the paired transmit map, turning target `v` rows at the
    /// two destinations into the transmit pair.
    pair_inv: Option<BitMatrix>,
    dec: [DecodeSys; 2],
}

impl VirtualCodeSym {
    pub fn width(&self) -> usize {
        self.n
    }

    /// True when the unintended public layer is pinned down at both
    /// destinations.
    pub fn other_decodable(&self, dest: usize) -> bool {
        self.dec[dest].other_unique
    }

    pub fn own_decodable(&self, dest: usize) -> bool {
        self.dec[dest].own_unique
    }
}

fn validate_sym_rates(p: &LdmSymParams, rates: &[LayerRates; 2]) -> Result<usize> {
    let n = p.width(Mode::A);
    let u_cap = p.n_d.saturating_sub(p.n_i);
    for r in rates {
        if r.w > p.n_d || r.vp > p.n_d {
            return Err(Error::Infeasible(
                "a decoded layer is wider than the direct gain".into(),
            ));
        }
        if r.u > u_cap {
            return Err(Error::Infeasible(
                "private layer does not fit between the cross and direct gains".into(),
            ));
        }
        if r.v as usize > n {
            return Err(Error::Infeasible(
                "beamformed layer is wider than the channel".into(),
            ));
        }
    }
    if rates[0].v + rates[1].v > 0 {
        if p.n_d == p.n_i {
            return Err(Error::SingularChannel);
        }
        if 2 * n >= 64 {
            return Err(Error::Unsupported(
                "channel too wide for the pair inversion".into(),
            ));
        }
    }
    Ok(n)
}

fn structured_sym(p: &LdmSymParams, rates: &[LayerRates; 2]) -> Option<[SymGens; 2]> {
    let n = p.width(Mode::A);
    let mut groups = Vec::new();
    for s in 0..2 {
        let r = rates[s];
        let own = s;
        let cross = 1 - s;
        let own_row = |l: u32| Some(l as usize + n - p.n_d as usize);
        groups.push(PlacementGroup {
            source: s,
            layer: 0,
            count: r.w as usize,
            options: (0..p.n_d)
                .map(|l| {
                    let mut rows = [None, None];
                    rows[own] = own_row(l);
                    if l < p.n_i {
                        rows[cross] = Some(l as usize + n - p.n_i as usize);
                    }
                    (l, rows)
                })
                .collect(),
        });
        groups.push(PlacementGroup {
            source: s,
            layer: 1,
            count: r.u as usize,
            options: (p.n_i..p.n_d)
                .map(|l| {
                    let mut rows = [None, None];
                    rows[own] = own_row(l);
                    (l, rows)
                })
                .collect(),
        });
        groups.push(PlacementGroup {
            source: s,
            layer: 2,
            count: r.v as usize,
            options: (0..n as u32)
                .map(|l| {
                    let mut rows = [None, None];
                    rows[own] = Some(l as usize);
                    (l, rows)
                })
                .collect(),
        });
        groups.push(PlacementGroup {
            source: s,
            layer: 3,
            count: r.vp as usize,
            options: (0..p.n_d)
                .map(|l| {
                    let mut rows = [None, None];
                    rows[own] = own_row(l);
                    (l, rows)
                })
                .collect(),
        });
    }
    let placed = solve_placement(groups)?;
    let mut levels = [[Vec::new(), Vec::new(), Vec::new(), Vec::new()], [
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
    ]];
    for (s, layer, picks) in placed {
        levels[s][layer] = picks;
    }
    Some([0, 1].map(|s| SymGens {
        w: unit_columns(n, &levels[s][0]),
        u: unit_columns(n, &levels[s][1]),
        v_place: unit_columns(n, &levels[s][2]),
        vp: unit_columns(n, &levels[s][3]),
    }))
}

fn random_gens_sym<R: Rng>(rng: &mut R, p: &LdmSymParams, rates: &[LayerRates; 2]) -> [SymGens; 2] {
    let n = p.width(Mode::A);
    [0, 1].map(|s| {
        let r = rates[s];
        SymGens {
            w: random_matrix(rng, n, r.w as usize, 0, n as u32),
            u: random_matrix(rng, n, r.u as usize, p.n_i.min(n as u32), n as u32),
            v_place: unit_columns(n, &random_rows(rng, 0, n as u32, r.v as usize)),
            vp: random_matrix(rng, n, r.vp as usize, 0, n as u32),
        }
    })
}

fn finish_sym(
    p: &LdmSymParams,
    rates: &[LayerRates; 2],
    gens: [SymGens; 2],
) -> Result<VirtualCodeSym> {
    let n = p.width(Mode::A);
    let own = gm(n, p.n_d);
    let cross = gm(n, p.n_i);
    let pair_inv = if rates[0].v + rates[1].v > 0 {
        let mut m = BitMatrix::zero(2 * n, 2 * n);
        m.set_block(0, 0, &own);
        m.set_block(0, n, &cross);
        m.set_block(n, 0, &cross);
        m.set_block(n, n, &own);
        Some(m.inverse()?)
    } else {
        None
    };
    let mut dec = Vec::with_capacity(2);
    for d in 0..2 {
        let s = d;
        let o = 1 - d;
        debug_assert!(mat_is_zero(&cross.mul(&gens[o].u)));
        let blocks = [
            own.mul(&gens[s].w),
            own.mul(&gens[s].u),
            gens[s].v_place.clone(),
            own.mul(&gens[s].vp),
            cross.mul(&gens[o].w),
        ];
        dec.push(DecodeSys::assemble(
            &blocks,
            4,
            cross.mul(&gens[o].vp),
        )?);
    }
    let dec: [DecodeSys; 2] = dec.try_into().expect("two destinations");
    Ok(VirtualCodeSym {
        params: *p,
        rates: *rates,
        n,
        gens,
        pair_inv,
        dec,
    })
}

/// Build a uniquely decodable transmit-slot code, trying single-occupancy
/// level placement first and verified random generators after.
pub fn build_virtual_code_sym(p: &LdmSymParams, rates: &[LayerRates; 2]) -> Result<VirtualCodeSym> {
    validate_sym_rates(p, rates)?;
    if let Some(gens) = structured_sym(p, rates) {
        let code = finish_sym(p, rates, gens)?;
        if code.dec.iter().all(|d| d.own_unique) {
            return Ok(code);
        }
    }
    for attempt in 0..64u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_0000 ^ attempt);
        let gens = random_gens_sym(&mut rng, p, rates);
        let code = finish_sym(p, rates, gens)?;
        if code.dec.iter().all(|d| d.own_unique) {
            return Ok(code);
        }
    }
    Err(Error::Infeasible(
        "no uniquely decodable layered code at these rates".into(),
    ))
}

/// Build without the uniqueness check, for exercising overloaded
/// allocations. Structural failures still error.
pub fn build_virtual_code_sym_unchecked(
    p: &LdmSymParams,
    rates: &[LayerRates; 2],
    seed: u64,
) -> Result<VirtualCodeSym> {
    validate_sym_rates(p, rates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = random_gens_sym(&mut rng, p, rates);
    finish_sym(p, rates, gens)
}

/// The transmit vector of one source, using its own messages and the
/// partner's beamformed stream as received over the pipe.
pub fn encode_transmit_sym(
    code: &VirtualCodeSym,
    src: usize,
    own: &SymMessages,
    other_v: &BitVector,
) -> Result<BitVector> {
    let r = &code.rates[src];
    let ro = &code.rates[1 - src];
    if own.w.len() != r.w as usize
        || own.u.len() != r.u as usize
        || own.v.len() != r.v as usize
        || own.vp.len() != r.vp as usize
        || other_v.len() != ro.v as usize
    {
        return Err(Error::InvalidParam(
            "message widths do not match the code rates".into(),
        ));
    }
    let g = &code.gens[src];
    let mut x = g
        .w
        .mul_vec(&own.w)
        .xor(&g.u.mul_vec(&own.u))
        .xor(&g.vp.mul_vec(&own.vp));
    if let Some(inv) = &code.pair_inv {
        let n = code.n;
        let t_own = g.v_place.mul_vec(&own.v);
        let t_other = code.gens[1 - src].v_place.mul_vec(other_v);
        let mut target = BitVector::zero(2 * n);
        let (top, bottom) = if src == 0 {
            (&t_own, &t_other)
        } else {
            (&t_other, &t_own)
        };
        for i in 0..n {
            if top.get(i) {
                target.set(i, true);
            }
            if bottom.get(i) {
                target.set(n + i, true);
            }
        }
        let xv = inv.mul_vec(&target);
        x = x.xor(&subrange(&xv, src * n, n));
    }
    Ok(x)
}

/// Both transmit vectors from the ground-truth message pair.
pub fn encode_virtual_sym(
    code: &VirtualCodeSym,
    msgs: &[SymMessages; 2],
) -> Result<[BitVector; 2]> {
    Ok([
        encode_transmit_sym(code, 0, &msgs[0], &msgs[1].v)?,
        encode_transmit_sym(code, 1, &msgs[1], &msgs[0].v)?,
    ])
}

/// Decode one destination's received transmit-slot word. `vp_other` is
/// the pre-shared message of the unintended source, delivered over its
/// pipe.
pub fn decode_virtual_sym(
    code: &VirtualCodeSym,
    dest: usize,
    y: &BitVector,
    vp_other: &BitVector,
) -> Result<SymDecoded> {
    if y.len() != code.n || vp_other.len() != code.rates[1 - dest].vp as usize {
        return Err(Error::InvalidParam(
            "received word or side information has the wrong width".into(),
        ));
    }
    let (groups, other_w) = code.dec[dest].solve(y, vp_other)?;
    let mut it = groups.into_iter();
    Ok(SymDecoded {
        w: it.next().unwrap(),
        u: it.next().unwrap(),
        v: it.next().unwrap(),
        vp: it.next().unwrap(),
        other_w,
    })
}

/// Two distinct message pairs whose transmit-slot words agree at the
/// given destination, if the code is ambiguous there. The pre-shared
/// layers of the unintended source are held equal, as the decoder knows
/// them either way.
pub fn find_collision_sym(
    code: &VirtualCodeSym,
    dest: usize,
) -> Option<([SymMessages; 2], [SymMessages; 2])> {
    let sys = &code.dec[dest];
    let ns = nullspace(&sys.a);
    let vector = ns
        .iter()
        .find(|v| !coords_zero(v, 0, sys.own_cols))
        .or_else(|| ns.iter().find(|v| !v.is_zero()))?;
    let base = [
        SymMessages::zero(&code.rates[0]),
        SymMessages::zero(&code.rates[1]),
    ];
    let mut alt = base.clone();
    let s = &sys.splits;
    alt[dest].w = subrange(vector, 0, s[0]);
    alt[dest].u = subrange(vector, s[0], s[1] - s[0]);
    alt[dest].v = subrange(vector, s[1], s[2] - s[1]);
    alt[dest].vp = subrange(vector, s[2], s[3] - s[2]);
    alt[1 - dest].w = subrange(vector, sys.own_cols, sys.other_cols);
    Some((base, alt))
}

// ---------------------------------------------------------------------
// Cognitive transmit-slot code.

#[derive(Clone, Debug)]
pub struct VirtualCodeCog {
    pub params: LdmCogParams,
    pub w_rates: [u32; 2],
    pub u_rates: [u32; 2],
    pub v_rate: u32,
    m: usize,
    g_w: [BitMatrix; 2],
    g_u: [BitMatrix; 2],
    /// Columns are transmit pairs that put one beamformed row at
    /// destination 3 and nothing at destination 4.
    pair_map: Option<BitMatrix>,
    dec: [DecodeSys; 2],
}

impl VirtualCodeCog {
    pub fn width(&self) -> usize {
        self.m
    }

    pub fn own_decodable(&self, dest: usize) -> bool {
        self.dec[dest].own_unique
    }
}

fn validate_cog_rates(p: &LdmCogParams, w: &[u32; 2], u: &[u32; 2], v: u32) -> Result<usize> {
    let m = p.width(Mode::A)?;
    let k = p.realizable_k().min(m as u32);
    if w[0] > p.n1 || w[1] > p.n2 {
        return Err(Error::Infeasible(
            "public layer is wider than the direct gain".into(),
        ));
    }
    if u[0] > p.n1.saturating_sub(p.a2) || u[1] > p.n2.saturating_sub(p.a1) {
        return Err(Error::Infeasible(
            "private layer does not fit below the cross gain".into(),
        ));
    }
    if v > k {
        return Err(Error::Infeasible(
            "beamformed layer exceeds the realizable cancelling block".into(),
        ));
    }
    if v > 0 && 2 * m >= 64 {
        return Err(Error::Unsupported(
            "channel too wide for the pair solver".into(),
        ));
    }
    Ok(m)
}

struct CogGens {
    g_w: [BitMatrix; 2],
    g_u: [BitMatrix; 2],
    v_place: BitMatrix,
}

fn structured_cog(p: &LdmCogParams, w: &[u32; 2], u: &[u32; 2], v: u32) -> Option<CogGens> {
    let m = p.width(Mode::A).ok()?;
    let k = p.realizable_k().min(m as u32);
    let gains = [[p.n1, p.a2], [p.a1, p.n2]];
    let mut groups = Vec::new();
    for s in 0..2 {
        let own_gain = gains[s][s];
        let cross_gain = gains[s][1 - s];
        groups.push(PlacementGroup {
            source: s,
            layer: 0,
            count: w[s] as usize,
            options: (0..own_gain)
                .map(|l| {
                    let mut rows = [None, None];
                    rows[s] = Some(l as usize + m - own_gain as usize);
                    if l < cross_gain {
                        rows[1 - s] = Some(l as usize + m - cross_gain as usize);
                    }
                    (l, rows)
                })
                .collect(),
        });
        groups.push(PlacementGroup {
            source: s,
            layer: 1,
            count: u[s] as usize,
            options: (cross_gain..own_gain)
                .map(|l| {
                    let mut rows = [None, None];
                    rows[s] = Some(l as usize + m - own_gain as usize);
                    (l, rows)
                })
                .collect(),
        });
    }
    groups.push(PlacementGroup {
        source: 0,
        layer: 2,
        count: v as usize,
        options: ((m as u32 - k)..m as u32)
            .map(|l| (l, [Some(l as usize), None]))
            .collect(),
    });
    let placed = solve_placement(groups)?;
    let mut levels = [[Vec::new(), Vec::new(), Vec::new()], [
        Vec::new(),
        Vec::new(),
        Vec::new(),
    ]];
    for (s, layer, picks) in placed {
        levels[s][layer] = picks;
    }
    Some(CogGens {
        g_w: [
            unit_columns(m, &levels[0][0]),
            unit_columns(m, &levels[1][0]),
        ],
        g_u: [
            unit_columns(m, &levels[0][1]),
            unit_columns(m, &levels[1][1]),
        ],
        v_place: unit_columns(m, &levels[0][2]),
    })
}

fn random_gens_cog<R: Rng>(
    rng: &mut R,
    p: &LdmCogParams,
    w: &[u32; 2],
    u: &[u32; 2],
    v: u32,
) -> Result<CogGens> {
    let m = p.width(Mode::A)?;
    let k = p.realizable_k().min(m as u32);
    Ok(CogGens {
        g_w: [
            random_matrix(rng, m, w[0] as usize, 0, m as u32),
            random_matrix(rng, m, w[1] as usize, 0, m as u32),
        ],
        g_u: [
            random_matrix(rng, m, u[0] as usize, p.a2.min(m as u32), m as u32),
            random_matrix(rng, m, u[1] as usize, p.a1.min(m as u32), m as u32),
        ],
        v_place: unit_columns(m, &random_rows(rng, m as u32 - k, m as u32, v as usize)),
    })
}

fn finish_cog(
    p: &LdmCogParams,
    w: &[u32; 2],
    u: &[u32; 2],
    v: u32,
    gens: CogGens,
) -> Result<VirtualCodeCog> {
    let m = p.width(Mode::A)?;
    let own3 = gm(m, p.n1);
    let cross3 = gm(m, p.a1);
    let own4 = gm(m, p.n2);
    let cross4 = gm(m, p.a2);
    let pair_map = if v > 0 {
        let mut sys = BitMatrix::zero(2 * m, 2 * m);
        sys.set_block(0, 0, &own3);
        sys.set_block(0, m, &cross3);
        sys.set_block(m, 0, &cross4);
        sys.set_block(m, m, &own4);
        let mut cols = BitMatrix::zero(2 * m, v as usize);
        for j in 0..v as usize {
            let mut rhs = BitVector::zero(2 * m);
            for i in 0..m {
                if gens.v_place.get(i, j) {
                    rhs.set(i, true);
                }
            }
            let Some(x) = sys.solve(&rhs) else {
                return Err(Error::Infeasible(
                    "no transmit pair cancels this beamformed row".into(),
                ));
            };
            for i in 0..2 * m {
                if x.get(i) {
                    cols.set(i, j, true);
                }
            }
        }
        Some(cols)
    } else {
        None
    };
    debug_assert!(mat_is_zero(&cross3.mul(&gens.g_u[1])));
    debug_assert!(mat_is_zero(&cross4.mul(&gens.g_u[0])));
    let dec0 = DecodeSys::assemble(
        &[
            own3.mul(&gens.g_w[0]),
            own3.mul(&gens.g_u[0]),
            gens.v_place.clone(),
            cross3.mul(&gens.g_w[1]),
        ],
        3,
        BitMatrix::zero(m, 0),
    )?;
    let dec1 = DecodeSys::assemble(
        &[
            own4.mul(&gens.g_w[1]),
            own4.mul(&gens.g_u[1]),
            cross4.mul(&gens.g_w[0]),
        ],
        2,
        BitMatrix::zero(m, 0),
    )?;
    Ok(VirtualCodeCog {
        params: *p,
        w_rates: *w,
        u_rates: *u,
        v_rate: v,
        m,
        g_w: gens.g_w,
        g_u: gens.g_u,
        pair_map,
        dec: [dec0, dec1],
    })
}

pub fn build_virtual_code_cog(
    p: &LdmCogParams,
    w: &[u32; 2],
    u: &[u32; 2],
    v: u32,
) -> Result<VirtualCodeCog> {
    validate_cog_rates(p, w, u, v)?;
    if let Some(gens) = structured_cog(p, w, u, v) {
        let code = finish_cog(p, w, u, v, gens)?;
        if code.dec.iter().all(|d| d.own_unique) {
            return Ok(code);
        }
    }
    for attempt in 0..64u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_1000 ^ attempt);
        let gens = random_gens_cog(&mut rng, p, w, u, v)?;
        let code = finish_cog(p, w, u, v, gens)?;
        if code.dec.iter().all(|d| d.own_unique) {
            return Ok(code);
        }
    }
    Err(Error::Infeasible(
        "no uniquely decodable layered code at these rates".into(),
    ))
}

pub fn build_virtual_code_cog_unchecked(
    p: &LdmCogParams,
    w: &[u32; 2],
    u: &[u32; 2],
    v: u32,
    seed: u64,
) -> Result<VirtualCodeCog> {
    validate_cog_rates(p, w, u, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = random_gens_cog(&mut rng, p, w, u, v)?;
    finish_cog(p, w, u, v, gens)
}

/// One cognitive source's transmit vector. `private` is source 1's
/// beamformed stream: its own copy at source 1, the pipe-received copy at
/// source 2.
pub fn encode_transmit_cog(
    code: &VirtualCodeCog,
    src: usize,
    own: &CogMessages,
    private: &BitVector,
) -> Result<BitVector> {
    let own_v_len = if src == 0 { code.v_rate as usize } else { 0 };
    if own.w.len() != code.w_rates[src] as usize
        || own.u.len() != code.u_rates[src] as usize
        || own.v.len() != own_v_len
        || private.len() != code.v_rate as usize
    {
        return Err(Error::InvalidParam(
            "message widths do not match the code rates".into(),
        ));
    }
    let mut x = code.g_w[src].mul_vec(&own.w).xor(&code.g_u[src].mul_vec(&own.u));
    if let Some(pair) = &code.pair_map {
        let xv = pair.mul_vec(private);
        x = x.xor(&subrange(&xv, src * code.m, code.m));
    }
    Ok(x)
}

pub fn encode_virtual_cog(
    code: &VirtualCodeCog,
    m1: &CogMessages,
    m2: &CogMessages,
) -> Result<[BitVector; 2]> {
    Ok([
        encode_transmit_cog(code, 0, m1, &m1.v)?,
        encode_transmit_cog(code, 1, m2, &m1.v)?,
    ])
}

pub fn decode_virtual_cog(code: &VirtualCodeCog, dest: usize, y: &BitVector) -> Result<CogDecoded> {
    if y.len() != code.m {
        return Err(Error::InvalidParam(
            "received word has the wrong width".into(),
        ));
    }
    let (groups, other_w) = code.dec[dest].solve(y, &BitVector::zero(0))?;
    let mut it = groups.into_iter();
    let w = it.next().unwrap();
    let u = it.next().unwrap();
    let v = it.next().unwrap_or_else(|| BitVector::zero(0));
    Ok(CogDecoded { w, u, v, other_w })
}

pub fn find_collision_cog(
    code: &VirtualCodeCog,
    dest: usize,
) -> Option<(
    (CogMessages, CogMessages),
    (CogMessages, CogMessages),
)> {
    let sys = &code.dec[dest];
    let ns = nullspace(&sys.a);
    let vector = ns
        .iter()
        .find(|v| !coords_zero(v, 0, sys.own_cols))
        .or_else(|| ns.iter().find(|v| !v.is_zero()))?;
    let zero = (
        CogMessages::zero(code.w_rates[0], code.u_rates[0], code.v_rate),
        CogMessages::zero(code.w_rates[1], code.u_rates[1], 0),
    );
    let mut alt = zero.clone();
    let mut start = 0;
    let splits = &sys.splits;
    if dest == 0 {
        alt.0.w = subrange(vector, start, splits[0] - start);
        start = splits[0];
        alt.0.u = subrange(vector, start, splits[1] - start);
        start = splits[1];
        alt.0.v = subrange(vector, start, splits[2] - start);
        alt.1.w = subrange(vector, sys.own_cols, sys.other_cols);
    } else {
        alt.1.w = subrange(vector, start, splits[0] - start);
        start = splits[0];
        alt.1.u = subrange(vector, start, splits[1] - start);
        alt.0.w = subrange(vector, sys.own_cols, sys.other_cols);
    }
    Some((zero, alt))
}

// ---------------------------------------------------------------------
// Listening-slot level packing.

/// Assign consecutive levels above `base` to shares that must stay below
/// their receiver's gain, shortest reach first. Returns the level lists
/// in input order.
fn pack_shares(base: u32, shares: &[(u32, u32)]) -> Result<Vec<Vec<u32>>> {
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by_key(|&i| shares[i].0);
    let mut cur = base;
    let mut out = vec![Vec::new(); shares.len()];
    for &i in &order {
        let (reach, size) = shares[i];
        for _ in 0..size {
            if cur >= reach {
                return Err(Error::Infeasible(format!(
                    "cooperation shares overflow the levels below gain {reach}"
                )));
            }
            out[i].push(cur);
            cur += 1;
        }
    }
    Ok(out)
}

fn rx_index(level: u32, width: usize, gain: u32) -> usize {
    debug_assert!(level < gain);
    level as usize + width - gain as usize
}

// ---------------------------------------------------------------------
// Slot-level simulation.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimResult {
    pub blocks: u64,
    pub slots: u64,
    /// Message instances whose decode was checked: transmit-slot tuples,
    /// direct shares, and relayed chunks.
    pub tuples: u64,
    pub errors: u64,
    pub r1: Rat,
    pub r2: Rat,
    pub sum: Rat,
}

pub fn run_halfduplex_sim(
    params: &LdmParams,
    schedule: &Schedule,
    alloc: &MessageAllocation,
    blocks: u64,
    seed: u64,
) -> Result<SimResult> {
    run_halfduplex_sim_traced(params, schedule, alloc, blocks, seed, None)
}

/// Like [`run_halfduplex_sim`], with an optional sink receiving one line
/// per listening node per slot:
/// `block <b> slot <t> mode <M> node <k> y <hex>`.
pub fn run_halfduplex_sim_traced(
    params: &LdmParams,
    schedule: &Schedule,
    alloc: &MessageAllocation,
    blocks: u64,
    seed: u64,
    trace: Option<&mut dyn IoWrite>,
) -> Result<SimResult> {
    match (params, alloc) {
        (LdmParams::Sym(p), MessageAllocation::Sym(a)) => {
            sym_sim(p, schedule, a, blocks, seed, trace)
        }
        (LdmParams::Cog(p), MessageAllocation::Cog(a)) => {
            cog_sim(p, schedule, a, blocks, seed, trace)
        }
        _ => Err(Error::InvalidParam(
            "channel family and allocation family differ".into(),
        )),
    }
}

fn trace_slot(
    trace: &mut Option<&mut dyn IoWrite>,
    block: u64,
    slot: usize,
    mode: Mode,
    nodes: &[usize],
    y: &[BitVector; 4],
) -> Result<()> {
    if let Some(w) = trace {
        for &k in nodes {
            writeln!(
                w,
                "block {} slot {} mode {} node {} y {}",
                block,
                slot,
                mode,
                k + 1,
                y[k].hex()
            )?;
        }
    }
    Ok(())
}

fn random_bool_stream<R: Rng>(rng: &mut R, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

fn sym_sim(
    p: &LdmSymParams,
    sched: &Schedule,
    alloc: &SymAllocation,
    blocks: u64,
    seed: u64,
    mut trace: Option<&mut dyn IoWrite>,
) -> Result<SimResult> {
    if blocks == 0 {
        return Err(Error::InvalidParam("need at least one block".into()));
    }
    if !sched.is_consistent_symmetric() {
        return Err(Error::InvalidParam(
            "schedule is not a symmetric block pattern".into(),
        ));
    }
    let (la, lb) = (sched.l_a as usize, sched.l_b as usize);
    let rr = alloc.relay as usize;
    let layer_bits: u32 = alloc.layers.iter().map(|l| l.sum()).sum();
    if la == 0 && layer_bits > 0 {
        return Err(Error::Infeasible(
            "allocation fills transmit slots the schedule does not have".into(),
        ));
    }
    if lb == 0
        && (alloc.direct != [0, 0]
            || alloc.pipe_ss != [0, 0]
            || alloc.pipe_sd != [0, 0]
            || alloc.relay != 0)
    {
        return Err(Error::Infeasible(
            "allocation fills listening slots the schedule does not have".into(),
        ));
    }
    for s in 0..2 {
        if alloc.direct[s] > p.n_d {
            return Err(Error::Infeasible(
                "direct share exceeds the direct gain".into(),
            ));
        }
        if la * alloc.layers[s].v as usize > lb * alloc.pipe_ss[s] as usize {
            return Err(Error::Infeasible(
                "source pipe is narrower than the beamformed stream".into(),
            ));
        }
        if la * alloc.layers[s].vp as usize > lb * alloc.pipe_sd[s] as usize {
            return Err(Error::Infeasible(
                "pre-sharing pipe is narrower than its stream".into(),
            ));
        }
    }
    // shares[s][0] reaches the partner, shares[s][1] the unintended
    // destination; relay chunks ride at the tail of each group.
    let mut shares = Vec::with_capacity(2);
    for s in 0..2 {
        shares.push(pack_shares(
            alloc.direct[s],
            &[
                (p.n_c, alloc.pipe_ss[s] + alloc.relay),
                (p.n_i, alloc.pipe_sd[s] + alloc.relay),
            ],
        )?);
    }
    let code = if la > 0 {
        Some(build_virtual_code_sym(p, &alloc.layers)?)
    } else {
        None
    };
    let map_a = transfer_sym(p, Mode::A);
    let map_b = transfer_sym(p, Mode::B);
    let map_c = transfer_sym(p, Mode::C);
    let mb = p.width(Mode::B);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut bits = [0u64; 2];
    let mut tuples = 0u64;
    let mut errors = 0u64;
    // Relay data offered in the previous block: the originals for
    // comparison and the copies the partner actually received.
    let mut prev_truth: [Vec<bool>; 2] = [vec![false; lb * rr], vec![false; lb * rr]];
    let mut prev_recv = prev_truth.clone();
    let mut have_prev = false;

    for b in 0..blocks {
        let a_msgs: Vec<[SymMessages; 2]> = (0..la)
            .map(|_| {
                [
                    SymMessages::random(&mut rng, &alloc.layers[0]),
                    SymMessages::random(&mut rng, &alloc.layers[1]),
                ]
            })
            .collect();
        let direct_data: [Vec<bool>; 2] = [
            random_bool_stream(&mut rng, lb * alloc.direct[0] as usize),
            random_bool_stream(&mut rng, lb * alloc.direct[1] as usize),
        ];
        let rel_new: [Vec<bool>; 2] = [
            random_bool_stream(&mut rng, lb * rr),
            random_bool_stream(&mut rng, lb * rr),
        ];
        let mut v_stream: [Vec<bool>; 2] = [Vec::new(), Vec::new()];
        let mut vp_stream: [Vec<bool>; 2] = [Vec::new(), Vec::new()];
        for s in 0..2 {
            for m in &a_msgs {
                let msg = &m[s];
                v_stream[s].extend((0..msg.v.len()).map(|i| msg.v.get(i)));
                vp_stream[s].extend((0..msg.vp.len()).map(|i| msg.vp.get(i)));
            }
            v_stream[s].resize(lb * alloc.pipe_ss[s] as usize, false);
            vp_stream[s].resize(lb * alloc.pipe_sd[s] as usize, false);
        }

        // What the listeners pick up this block.
        let mut peer_v: [Vec<bool>; 2] = [Vec::new(), Vec::new()];
        let mut peer_rel: [Vec<bool>; 2] = [Vec::new(), Vec::new()];
        let mut dest_vp: [Vec<bool>; 2] = [Vec::new(), Vec::new()];

        for phase in 0..2 {
            // phase 0: source 1 talks (mode B); phase 1: source 2 (mode C).
            let s = phase;
            let o = 1 - phase;
            let map = if s == 0 { &map_b } else { &map_c };
            let mode = if s == 0 { Mode::B } else { Mode::C };
            let pss = alloc.pipe_ss[s] as usize;
            let psd = alloc.pipe_sd[s] as usize;
            let dr = alloc.direct[s] as usize;
            for t in 0..lb {
                let mut x = BitVector::zero(mb);
                for l in 0..dr {
                    if direct_data[s][t * dr + l] {
                        x.set(l, true);
                    }
                }
                for (i, &lvl) in shares[s][0].iter().enumerate() {
                    let bit = if i < pss {
                        v_stream[s][t * pss + i]
                    } else {
                        rel_new[s][t * rr + (i - pss)]
                    };
                    if bit {
                        x.set(lvl as usize, true);
                    }
                }
                for (i, &lvl) in shares[s][1].iter().enumerate() {
                    let bit = if i < psd {
                        vp_stream[s][t * psd + i]
                    } else {
                        prev_recv[o][t * rr + (i - psd)]
                    };
                    if bit {
                        x.set(lvl as usize, true);
                    }
                }
                let zero = BitVector::zero(mb);
                let y = if s == 0 {
                    map.apply(&x, &zero)?
                } else {
                    map.apply(&zero, &x)?
                };
                let slot = if s == 0 { t } else { lb + t };
                let listeners = if s == 0 { [1, 2, 3] } else { [0, 2, 3] };
                trace_slot(&mut trace, b, slot, mode, &listeners, &y)?;

                // Partner reads the pipes and the fresh relay offer.
                let y_peer = &y[o];
                for (i, &lvl) in shares[s][0].iter().enumerate() {
                    let bit = y_peer.get(rx_index(lvl, mb, p.n_c));
                    if i < pss {
                        peer_v[s].push(bit);
                    } else {
                        peer_rel[s].push(bit);
                    }
                }
                // Paired destination reads the direct share.
                if dr > 0 {
                    let y_own = &y[2 + s];
                    let ok = (0..dr)
                        .all(|l| y_own.get(rx_index(l as u32, mb, p.n_d)) == direct_data[s][t * dr + l]);
                    tuples += 1;
                    if ok {
                        bits[s] += dr as u64;
                    } else {
                        errors += 1;
                    }
                }
                // Unintended destination reads the pre-shared stream and
                // the relayed chunk of the other source's data.
                let y_cross = &y[2 + o];
                for (i, &lvl) in shares[s][1].iter().enumerate() {
                    let bit = y_cross.get(rx_index(lvl, mb, p.n_i));
                    if i < psd {
                        dest_vp[s].push(bit);
                    } else if have_prev {
                        let j = t * rr + (i - psd);
                        if bit != prev_truth[o][j] {
                            errors += 1;
                            // Spoil the chunk tally below.
                            peer_v[s].truncate(peer_v[s].len());
                        }
                    }
                }
                if rr > 0 && have_prev {
                    // Count the relayed chunk as one delivered instance.
                    let ok = (0..rr).all(|i| {
                        let lvl = shares[s][1][psd + i];
                        y_cross.get(rx_index(lvl, mb, p.n_i)) == prev_truth[o][t * rr + i]
                    });
                    tuples += 1;
                    if ok {
                        bits[o] += rr as u64;
                    }
                }
            }
        }

        for (t, msgs) in a_msgs.iter().enumerate() {
            let code = code.as_ref().expect("transmit slots imply a code");
            let v2_len = alloc.layers[1].v as usize;
            let v1_len = alloc.layers[0].v as usize;
            let v2_at_node1 = slice_to_vec(&peer_v[1][t * v2_len..(t + 1) * v2_len]);
            let v1_at_node2 = slice_to_vec(&peer_v[0][t * v1_len..(t + 1) * v1_len]);
            let x1 = encode_transmit_sym(code, 0, &msgs[0], &v2_at_node1)?;
            let x2 = encode_transmit_sym(code, 1, &msgs[1], &v1_at_node2)?;
            let y = map_a.apply(&x1, &x2)?;
            trace_slot(&mut trace, b, 2 * lb + t, Mode::A, &[2, 3], &y)?;
            for dest in 0..2 {
                let truth = &msgs[dest];
                if truth.total() == 0 {
                    continue;
                }
                let vp_len = alloc.layers[1 - dest].vp as usize;
                let side = slice_to_vec(&dest_vp[1 - dest][t * vp_len..(t + 1) * vp_len]);
                tuples += 1;
                match decode_virtual_sym(code, dest, &y[2 + dest], &side) {
                    Ok(dec) => {
                        if dec.w == truth.w
                            && dec.u == truth.u
                            && dec.v == truth.v
                            && dec.vp == truth.vp
                        {
                            bits[dest] += truth.total() as u64;
                        } else {
                            errors += 1;
                        }
                    }
                    Err(Error::DecodeAmbiguous(_)) => errors += 1,
                    Err(e) => return Err(e),
                }
            }
        }

        prev_truth = rel_new;
        prev_recv = peer_rel;
        have_prev = true;
    }

    let total_slots = blocks * sched.total_slots() as u64;
    let denom = total_slots as i64;
    let r1 = rat(bits[0] as i64, denom.max(1));
    let r2 = rat(bits[1] as i64, denom.max(1));
    Ok(SimResult {
        blocks,
        slots: total_slots,
        tuples,
        errors,
        sum: &r1 + &r2,
        r1,
        r2,
    })
}

fn cog_sim(
    p: &LdmCogParams,
    sched: &Schedule,
    alloc: &CogAllocation,
    blocks: u64,
    seed: u64,
    mut trace: Option<&mut dyn IoWrite>,
) -> Result<SimResult> {
    if blocks == 0 {
        return Err(Error::InvalidParam("need at least one block".into()));
    }
    if !sched.is_consistent_cognitive() {
        return Err(Error::InvalidParam(
            "schedule is not a cognitive block pattern".into(),
        ));
    }
    let (la, lb) = (sched.l_a as usize, sched.l_b as usize);
    let layer_bits = alloc.w[0] + alloc.u[0] + alloc.v1 + alloc.w[1] + alloc.u[1];
    if la == 0 && layer_bits > 0 {
        return Err(Error::Infeasible(
            "allocation fills transmit slots the schedule does not have".into(),
        ));
    }
    if lb == 0 && (alloc.direct1 > 0 || alloc.pipe12 > 0) {
        return Err(Error::Infeasible(
            "allocation fills listening slots the schedule does not have".into(),
        ));
    }
    if alloc.direct1 > p.n1 {
        return Err(Error::Infeasible(
            "direct share exceeds the direct gain".into(),
        ));
    }
    if la * alloc.v1 as usize > lb * alloc.pipe12 as usize {
        return Err(Error::Infeasible(
            "cooperation pipe is narrower than the beamformed stream".into(),
        ));
    }
    let share = pack_shares(alloc.direct1, &[(p.beta, alloc.pipe12)])?
        .pop()
        .unwrap();
    let code = if la > 0 {
        Some(build_virtual_code_cog(p, &alloc.w, &alloc.u, alloc.v1)?)
    } else {
        None
    };
    let map_a = transfer_cog(p, Mode::A)?;
    let map_b = transfer_cog(p, Mode::B)?;
    let mb = p.width(Mode::B)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut bits = [0u64; 2];
    let mut tuples = 0u64;
    let mut errors = 0u64;
    let pipe = alloc.pipe12 as usize;
    let dr = alloc.direct1 as usize;

    for b in 0..blocks {
        let a_msgs: Vec<(CogMessages, CogMessages)> = (0..la)
            .map(|_| {
                (
                    CogMessages::random(&mut rng, alloc.w[0], alloc.u[0], alloc.v1),
                    CogMessages::random(&mut rng, alloc.w[1], alloc.u[1], 0),
                )
            })
            .collect();
        let direct_data = random_bool_stream(&mut rng, lb * dr);
        let mut v_stream: Vec<bool> = Vec::new();
        for (m1, _) in &a_msgs {
            v_stream.extend((0..m1.v.len()).map(|i| m1.v.get(i)));
        }
        v_stream.resize(lb * pipe, false);
        let mut peer_v: Vec<bool> = Vec::new();

        for t in 0..lb {
            let mut x1 = BitVector::zero(mb);
            for l in 0..dr {
                if direct_data[t * dr + l] {
                    x1.set(l, true);
                }
            }
            for (i, &lvl) in share.iter().enumerate() {
                if v_stream[t * pipe + i] {
                    x1.set(lvl as usize, true);
                }
            }
            let y = map_b.apply(&x1, &BitVector::zero(mb))?;
            trace_slot(&mut trace, b, t, Mode::B, &[1, 2, 3], &y)?;
            for &lvl in &share {
                peer_v.push(y[1].get(rx_index(lvl, mb, p.beta)));
            }
            if dr > 0 {
                let ok = (0..dr)
                    .all(|l| y[2].get(rx_index(l as u32, mb, p.n1)) == direct_data[t * dr + l]);
                tuples += 1;
                if ok {
                    bits[0] += dr as u64;
                } else {
                    errors += 1;
                }
            }
        }

        for (t, (m1, m2)) in a_msgs.iter().enumerate() {
            let code = code.as_ref().expect("transmit slots imply a code");
            let v_len = alloc.v1 as usize;
            let v_at_node2 = slice_to_vec(&peer_v[t * v_len..(t + 1) * v_len]);
            let x1 = encode_transmit_cog(code, 0, m1, &m1.v)?;
            let x2 = encode_transmit_cog(code, 1, m2, &v_at_node2)?;
            let y = map_a.apply(&x1, &x2)?;
            trace_slot(&mut trace, b, lb + t, Mode::A, &[2, 3], &y)?;
            let own3 = m1.w.len() + m1.u.len() + m1.v.len();
            if own3 > 0 {
                tuples += 1;
                match decode_virtual_cog(code, 0, &y[2]) {
                    Ok(dec) => {
                        if dec.w == m1.w && dec.u == m1.u && dec.v == m1.v {
                            bits[0] += own3 as u64;
                        } else {
                            errors += 1;
                        }
                    }
                    Err(Error::DecodeAmbiguous(_)) => errors += 1,
                    Err(e) => return Err(e),
                }
            }
            let own4 = m2.w.len() + m2.u.len();
            if own4 > 0 {
                tuples += 1;
                match decode_virtual_cog(code, 1, &y[3]) {
                    Ok(dec) => {
                        if dec.w == m2.w && dec.u == m2.u {
                            bits[1] += own4 as u64;
                        } else {
                            errors += 1;
                        }
                    }
                    Err(Error::DecodeAmbiguous(_)) => errors += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        let _ = b;
    }

    let total_slots = blocks * sched.total_slots() as u64;
    let denom = (total_slots as i64).max(1);
    let r1 = rat(bits[0] as i64, denom);
    let r2 = rat(bits[1] as i64, denom);
    Ok(SimResult {
        blocks,
        slots: total_slots,
        tuples,
        errors,
        sum: &r1 + &r2,
        r1,
        r2,
    })
}

// ---------------------------------------------------------------------
// Plan construction: turn an optimal schedule point into a concrete
// integral allocation that the simulator can run at exactly the closed
// form rate (minus the startup deficit of the relayed stream).

#[derive(Clone, Debug)]
pub struct SymPlan {
    pub schedule: Schedule,
    pub alloc: SymAllocation,
    /// The asymptotic sum rate this plan attains.
    pub sum: Rat,
    pub delta: Delta,
    pub any_delta: bool,
}

impl SymPlan {
    /// The exact simulated sum rate over `blocks` blocks, accounting for
    /// the relayed chunks lost to the one-block forwarding lag.
    pub fn expected_sum(&self, blocks: u64) -> Rat {
        let t = self.schedule.total_slots() as i64;
        let deficit = rat(
            2 * self.schedule.l_b as i64 * self.alloc.relay as i64,
            blocks as i64 * t.max(1),
        );
        &self.sum - &deficit
    }
}

struct IntRows {
    rows: Vec<([i64; 8], i64, i64)>,
}

fn int_rows(poly: &Polytope) -> Option<IntRows> {
    let mut rows = Vec::with_capacity(poly.ineqs.len());
    for q in &poly.ineqs {
        if q.coeffs.len() != 8 {
            return None;
        }
        let mut c = [0i64; 8];
        for (i, x) in q.coeffs.iter().enumerate() {
            if !x.is_integer() {
                return None;
            }
            c[i] = x.to_integer().to_i64()?;
        }
        let num = q.rhs.numer().to_i64()?;
        let den = q.rhs.denom().to_i64()?;
        rows.push((c, num, den));
    }
    Some(IntRows { rows })
}

impl IntRows {
    fn contains(&self, point: &[i64; 8]) -> bool {
        if point.iter().any(|&x| x < 0) {
            return false;
        }
        self.rows.iter().all(|(c, num, den)| {
            let lhs: i64 = (0..8).map(|i| c[i] * point[i]).sum();
            lhs * den <= *num
        })
    }
}

fn tuple_buckets(w_cap: u32, u_cap: u32, v_cap: u32, vp_cap: u32) -> Vec<Vec<[u32; 4]>> {
    let max_sum = (w_cap + u_cap + v_cap + vp_cap) as usize;
    let mut buckets: Vec<Vec<[u32; 4]>> = vec![Vec::new(); max_sum + 1];
    for w in 0..=w_cap {
        for u in 0..=u_cap {
            for v in 0..=v_cap {
                for vp in 0..=vp_cap {
                    buckets[(w + u + v + vp) as usize].push([w, u, v, vp]);
                }
            }
        }
    }
    buckets
}

/// Sum orders for splitting a per-slot total between the sources, most
/// balanced first.
fn split_order(total: usize, cap: usize) -> Vec<usize> {
    let mut sums: Vec<usize> = (0..=total.min(cap)).collect();
    sums.sort_by_key(|&s| {
        let other = total - s;
        ((s as i64 - other as i64).abs(), other as i64)
    });
    sums
}

fn delta_parts(d: &Delta) -> Option<(u64, u64)> {
    match d {
        Delta::Infinity => Some((1, 0)),
        Delta::Finite(r) => Some((r.numer().to_u64()?, r.denom().to_u64()?)),
    }
}

fn try_sym_plan(
    p: &LdmSymParams,
    value: &Rat,
    delta: &Delta,
    any_delta: bool,
    build_budget: &mut u32,
) -> Result<Option<SymPlan>> {
    let Some((la64, lb64)) = delta_parts(delta) else {
        return Ok(None);
    };
    let (Ok(la), Ok(lb)) = (u32::try_from(la64), u32::try_from(lb64)) else {
        return Ok(None);
    };
    let n = p.width(Mode::A) as u32;
    let u_cap = p.n_d.saturating_sub(p.n_i);
    let t = la as i64 + 2 * lb as i64;
    let ct = value * crate::rint(t);
    if !ct.is_integer() {
        return Ok(None);
    }
    let ct = match ct.to_integer().to_i64() {
        Some(x) => x,
        None => return Ok(None),
    };

    let finish = |layers: [LayerRates; 2], rb: u32, rr: u32| -> SymAllocation {
        let per_slot = |bits: u32| -> u32 {
            if lb == 0 {
                0
            } else {
                ((la as u64 * bits as u64).div_ceil(lb as u64)) as u32
            }
        };
        SymAllocation {
            layers,
            direct: [rb, rb],
            pipe_ss: [per_slot(layers[0].v), per_slot(layers[1].v)],
            pipe_sd: [per_slot(layers[0].vp), per_slot(layers[1].vp)],
            relay: rr,
        }
    };
    let plan = |alloc: SymAllocation| -> Result<Option<SymPlan>> {
        Ok(Some(SymPlan {
            schedule: Schedule::symmetric(la, lb)?,
            alloc,
            sum: value.clone(),
            delta: delta.clone(),
            any_delta,
        }))
    };

    if lb == 0 {
        // Transmit-only: every bit rides the per-slot layers.
        if ct < 0 {
            return Ok(None);
        }
        let vt = ct as u64;
        let poly = virtual_constraints_sym(p, &Rat::zero(), &Rat::zero());
        let rows = int_rows(&poly).expect("per-layer constraints are small integers");
        let buckets = tuple_buckets(p.n_d, u_cap, 0, 0);
        let cap = buckets.len() - 1;
        if vt as usize > 2 * cap {
            return Ok(None);
        }
        for s1 in split_order(vt as usize, cap) {
            let s2 = vt as usize - s1;
            if s2 > cap {
                continue;
            }
            for t1 in &buckets[s1] {
                for t2 in &buckets[s2] {
                    let point = [
                        t1[0] as i64,
                        t1[1] as i64,
                        t1[2] as i64,
                        t1[3] as i64,
                        t2[0] as i64,
                        t2[1] as i64,
                        t2[2] as i64,
                        t2[3] as i64,
                    ];
                    if !rows.contains(&point) {
                        continue;
                    }
                    let layers = [
                        LayerRates::new(t1[0], t1[1], t1[2], t1[3]),
                        LayerRates::new(t2[0], t2[1], t2[2], t2[3]),
                    ];
                    if *build_budget == 0 {
                        return Err(Error::Infeasible(
                            "layout attempt budget exhausted".into(),
                        ));
                    }
                    *build_budget -= 1;
                    if build_virtual_code_sym(p, &layers).is_ok() {
                        return plan(finish(layers, 0, 0));
                    }
                }
            }
        }
        return Ok(None);
    }

    let reach_ss = p.n_c.saturating_sub(p.n_d);
    let reach_sd = p.n_i.saturating_sub(p.n_d);
    let reach_joint = p.n_i.max(p.n_c).saturating_sub(p.n_d);
    for rb in (0..=p.n_d).rev() {
        let room_ss = reach_ss + (p.n_d - rb).min(p.n_c.saturating_sub(rb));
        let room_sd = reach_sd + (p.n_d - rb).min(p.n_i.saturating_sub(rb));
        let room_joint = reach_joint + (p.n_d - rb).min(p.n_i.max(p.n_c).saturating_sub(rb));
        let rr_cap = room_ss.min(room_sd).min(room_joint / 2);
        for rr in 0..=rr_cap {
            let rem = ct - 2 * lb as i64 * (rb + rr) as i64;
            if rem < 0 {
                break;
            }
            if la == 0 {
                if rem != 0 {
                    continue;
                }
                let alloc = finish([LayerRates::default(); 2], rb, rr);
                // Confirm the groups really fit.
                for s in 0..2 {
                    pack_shares(
                        alloc.direct[s],
                        &[
                            (p.n_c, alloc.pipe_ss[s] + rr),
                            (p.n_i, alloc.pipe_sd[s] + rr),
                        ],
                    )?;
                }
                return plan(alloc);
            }
            if rem % la as i64 != 0 {
                continue;
            }
            let vt = (rem / la as i64) as u64;
            if vt > 8 * n as u64 {
                continue;
            }
            for s_ss in 0..=(room_ss.saturating_sub(rr)) {
                for s_sd in 0..=(room_sd.saturating_sub(rr)) {
                    if s_ss + s_sd + 2 * rr > room_joint {
                        continue;
                    }
                    let bp_ss = rat((lb * s_ss) as i64, la as i64);
                    let bp_sd = rat((lb * s_sd) as i64, la as i64);
                    let poly = virtual_constraints_sym(p, &bp_ss, &bp_sd);
                    let rows = match int_rows(&poly) {
                        Some(r) => r,
                        None => continue,
                    };
                    let v_cap = if p.n_d == p.n_i {
                        0
                    } else {
                        n.min((lb * s_ss / la.max(1)) as u32)
                    };
                    let vp_cap = p.n_d.min((lb * s_sd / la.max(1)) as u32);
                    let buckets = tuple_buckets(p.n_d, u_cap, v_cap, vp_cap);
                    let cap = buckets.len() - 1;
                    if vt as usize > 2 * cap {
                        continue;
                    }
                    for s1 in split_order(vt as usize, cap) {
                        let s2 = vt as usize - s1;
                        if s2 > cap {
                            continue;
                        }
                        for t1 in &buckets[s1] {
                            for t2 in &buckets[s2] {
                                let point = [
                                    t1[0] as i64,
                                    t1[1] as i64,
                                    t1[2] as i64,
                                    t1[3] as i64,
                                    t2[0] as i64,
                                    t2[1] as i64,
                                    t2[2] as i64,
                                    t2[3] as i64,
                                ];
                                if !rows.contains(&point) {
                                    continue;
                                }
                                let layers = [
                                    LayerRates::new(t1[0], t1[1], t1[2], t1[3]),
                                    LayerRates::new(t2[0], t2[1], t2[2], t2[3]),
                                ];
                                let alloc = finish(layers, rb, rr);
                                let fits = (0..2).all(|s| {
                                    pack_shares(
                                        alloc.direct[s],
                                        &[
                                            (p.n_c, alloc.pipe_ss[s] + rr),
                                            (p.n_i, alloc.pipe_sd[s] + rr),
                                        ],
                                    )
                                    .is_ok()
                                });
                                if !fits {
                                    continue;
                                }
                                if *build_budget == 0 {
                                    return Err(Error::Infeasible(
                                        "layout attempt budget exhausted".into(),
                                    ));
                                }
                                *build_budget -= 1;
                                if build_virtual_code_sym(p, &layers).is_ok() {
                                    return plan(alloc);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// A schedule and integral allocation meeting the symmetric sum capacity
/// at one of its optimal schedule points.
pub fn optimal_sym_plan(p: &LdmSymParams) -> Result<SymPlan> {
    let fam = ldm_sum_family(p);
    let opt = fam.optimize();
    let mut cands = fam.maximizers();
    // Shortest block first; infinity is a one-slot block.
    cands.sort_by_key(|d| match delta_parts(d) {
        Some((la, lb)) => (la + 2 * lb, la),
        None => (u64::MAX, 0),
    });
    let mut budget = 400u32;
    for cand in &cands {
        if let Some(plan) = try_sym_plan(p, &opt.value, cand, opt.any_delta, &mut budget)? {
            return Ok(plan);
        }
    }
    Err(Error::Infeasible(
        "no integral allocation found at any optimal schedule point".into(),
    ))
}

/// Like `optimal_sym_plan`, but pinned to one requested schedule point.
/// The point must attain the sum capacity; a suboptimal schedule has no
/// exactness target to hit and is rejected.
pub fn sym_plan_at(p: &LdmSymParams, delta: &Delta) -> Result<SymPlan> {
    let fam = ldm_sum_family(p);
    let opt = fam.optimize();
    if fam.eval_delta(delta) != opt.value {
        return Err(Error::Infeasible(format!(
            "schedule δ={delta} does not attain the sum capacity; δ*={}",
            opt.delta_star
        )));
    }
    let mut budget = 400u32;
    match try_sym_plan(p, &opt.value, delta, opt.any_delta, &mut budget)? {
        Some(plan) => Ok(plan),
        None => Err(Error::Infeasible(
            "no integral allocation found at the requested schedule point".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::ldm_sum_capacity;
    use crate::ldm::transfer_sym;
    use crate::rint;

    fn sym(n_d: u32, n_i: u32, n_c: u32) -> LdmSymParams {
        LdmSymParams::new(n_d, n_i, n_c)
    }

    #[test]
    fn roundtrip_public_and_private_layers() {
        let p = sym(3, 1, 0);
        let rates = [LayerRates::new(1, 1, 0, 0), LayerRates::new(1, 1, 0, 0)];
        let code = build_virtual_code_sym(&p, &rates).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let map = transfer_sym(&p, Mode::A);
        for _ in 0..40 {
            let msgs = [
                SymMessages::random(&mut rng, &rates[0]),
                SymMessages::random(&mut rng, &rates[1]),
            ];
            let [x1, x2] = encode_virtual_sym(&code, &msgs).unwrap();
            let y = map.apply(&x1, &x2).unwrap();
            for dest in 0..2 {
                let side = BitVector::zero(0);
                let dec = decode_virtual_sym(&code, dest, &y[2 + dest], &side).unwrap();
                assert_eq!(dec.w, msgs[dest].w);
                assert_eq!(dec.u, msgs[dest].u);
                assert_eq!(dec.other_w, Some(msgs[1 - dest].w.clone()));
            }
        }
    }

    #[test]
    fn beamformed_rows_arrive_clean() {
        // Direct gain zero: everything a destination hears is the
        // beamformed image of its own stream.
        let p = sym(0, 3, 2);
        let rates = [LayerRates::new(0, 0, 3, 0), LayerRates::new(0, 0, 3, 0)];
        let code = build_virtual_code_sym(&p, &rates).unwrap();
        let map = transfer_sym(&p, Mode::A);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let msgs = [
                SymMessages::random(&mut rng, &rates[0]),
                SymMessages::random(&mut rng, &rates[1]),
            ];
            let [x1, x2] = encode_virtual_sym(&code, &msgs).unwrap();
            let y = map.apply(&x1, &x2).unwrap();
            for dest in 0..2 {
                let dec =
                    decode_virtual_sym(&code, dest, &y[2 + dest], &BitVector::zero(0)).unwrap();
                assert_eq!(dec.v, msgs[dest].v);
            }
        }
    }

    #[test]
    fn ride_along_levels_rescue_tight_public_corners() {
        // Below the cross gain there is no single-occupancy layout for
        // this corner; random generators with levels above the direct
        // gain still decode at both destinations.
        let p = sym(3, 5, 0);
        let rates = [LayerRates::new(3, 0, 0, 0), LayerRates::new(2, 0, 0, 0)];
        assert!(structured_sym(&p, &rates).is_none());
        let code = build_virtual_code_sym(&p, &rates).unwrap();
        assert!(code.own_decodable(0) && code.own_decodable(1));
        let map = transfer_sym(&p, Mode::A);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let msgs = [
                SymMessages::random(&mut rng, &rates[0]),
                SymMessages::random(&mut rng, &rates[1]),
            ];
            let [x1, x2] = encode_virtual_sym(&code, &msgs).unwrap();
            let y = map.apply(&x1, &x2).unwrap();
            for dest in 0..2 {
                let dec =
                    decode_virtual_sym(&code, dest, &y[2 + dest], &BitVector::zero(0)).unwrap();
                assert_eq!(dec.w, msgs[dest].w);
            }
        }
    }

    #[test]
    fn overloaded_code_has_a_collision() {
        // One public bit beyond the joint entropy of the received word.
        let p = sym(2, 1, 0);
        let rates = [LayerRates::new(2, 0, 0, 0), LayerRates::new(1, 0, 0, 0)];
        let code = build_virtual_code_sym_unchecked(&p, &rates, 11).unwrap();
        let (a, b) = find_collision_sym(&code, 0).expect("ambiguity must exist");
        assert_ne!(a, b);
        let map = transfer_sym(&p, Mode::A);
        let ya = map
            .apply(
                &encode_virtual_sym(&code, &a).unwrap()[0],
                &encode_virtual_sym(&code, &a).unwrap()[1],
            )
            .unwrap();
        let yb = map
            .apply(
                &encode_virtual_sym(&code, &b).unwrap()[0],
                &encode_virtual_sym(&code, &b).unwrap()[1],
            )
            .unwrap();
        assert_eq!(ya[2], yb[2]);
    }

    #[test]
    fn equal_gains_reject_beamforming() {
        let p = sym(2, 2, 4);
        let rates = [LayerRates::new(0, 0, 1, 0), LayerRates::new(0, 0, 1, 0)];
        assert!(matches!(
            build_virtual_code_sym(&p, &rates),
            Err(Error::SingularChannel)
        ));
    }

    #[test]
    fn share_packing_orders_by_reach() {
        // Base 1, peers reach 3, unintended destination reaches 6.
        let shares = pack_shares(1, &[(3, 2), (6, 2)]).unwrap();
        assert_eq!(shares[0], vec![1, 2]);
        assert_eq!(shares[1], vec![3, 4]);
        assert!(pack_shares(1, &[(3, 3), (6, 0)]).is_err());
    }

    #[test]
    fn relay_only_plan_meets_capacity() {
        // Direct links are dead; everything flows through the partners.
        let p = sym(0, 3, 2);
        let plan = optimal_sym_plan(&p).unwrap();
        assert_eq!(plan.sum, rat(12, 7));
        assert_eq!(plan.delta, Delta::Finite(rat(1, 3)));
        assert!(plan.alloc.relay > 0);
        let res = run_halfduplex_sim(
            &LdmParams::Sym(p),
            &plan.schedule,
            &MessageAllocation::Sym(plan.alloc.clone()),
            40,
            123,
        )
        .unwrap();
        assert_eq!(res.errors, 0);
        assert_eq!(res.sum, plan.expected_sum(40));
    }

    #[test]
    fn beamforming_plan_meets_capacity() {
        let p = sym(2, 4, 8);
        let plan = optimal_sym_plan(&p).unwrap();
        assert_eq!(plan.sum, rat(24, 5));
        let res = run_halfduplex_sim(
            &LdmParams::Sym(p),
            &plan.schedule,
            &MessageAllocation::Sym(plan.alloc.clone()),
            25,
            5,
        )
        .unwrap();
        assert_eq!(res.errors, 0);
        assert_eq!(res.sum, plan.expected_sum(25));
    }

    #[test]
    fn pinned_schedule_plans_or_refuses() {
        let p = sym(2, 4, 8);
        let plan = sym_plan_at(&p, &Delta::Finite(rat(1, 2))).unwrap();
        assert_eq!(plan.sum, rat(24, 5));
        assert_eq!(plan.delta, Delta::Finite(rat(1, 2)));
        assert!(matches!(
            sym_plan_at(&p, &Delta::Finite(rat(3, 1))),
            Err(Error::Infeasible(_))
        ));
        // A flat channel accepts any ratio, including never listening.
        let q = sym(2, 2, 5);
        assert_eq!(sym_plan_at(&q, &Delta::Infinity).unwrap().sum, rint(2));
        assert_eq!(sym_plan_at(&q, &Delta::Finite(rat(5, 3))).unwrap().sum, rint(2));
    }

    #[test]
    fn cooperation_free_plan_is_flat() {
        let p = sym(2, 2, 5);
        let plan = optimal_sym_plan(&p).unwrap();
        assert_eq!(plan.sum, rint(2));
        assert!(plan.any_delta);
        let res = run_halfduplex_sim(
            &LdmParams::Sym(p),
            &plan.schedule,
            &MessageAllocation::Sym(plan.alloc.clone()),
            30,
            99,
        )
        .unwrap();
        assert_eq!(res.errors, 0);
        assert_eq!(res.sum, rint(2));
    }

    #[test]
    fn zero_capacity_point_runs_empty() {
        let p = sym(0, 0, 6);
        let plan = optimal_sym_plan(&p).unwrap();
        assert!(plan.sum.is_zero());
        let res = run_halfduplex_sim(
            &LdmParams::Sym(p),
            &plan.schedule,
            &MessageAllocation::Sym(plan.alloc.clone()),
            3,
            1,
        )
        .unwrap();
        assert_eq!(res.errors, 0);
        assert!(res.sum.is_zero());
    }

    #[test]
    fn plans_meet_capacity_on_a_small_grid() {
        for n_d in 0..=3u32 {
            for n_i in 0..=3u32 {
                for n_c in 0..=3u32 {
                    let p = sym(n_d, n_i, n_c);
                    let cap = ldm_sum_capacity(&p);
                    let plan = optimal_sym_plan(&p)
                        .unwrap_or_else(|e| panic!("no plan at {p:?}: {e}"));
                    assert_eq!(plan.sum, cap.value, "plan sum mismatch at {p:?}");
                    let res = run_halfduplex_sim(
                        &LdmParams::Sym(p),
                        &plan.schedule,
                        &MessageAllocation::Sym(plan.alloc.clone()),
                        12,
                        42,
                    )
                    .unwrap();
                    assert_eq!(res.errors, 0, "decode errors at {p:?}");
                    assert_eq!(res.sum, plan.expected_sum(12), "sum mismatch at {p:?}");
                }
            }
        }
    }

    #[test]
    fn cognitive_roundtrip_with_cancelling_pair() {
        let p = LdmCogParams::new(2, 3, 5, 2, 6);
        let code = build_virtual_code_cog(&p, &[1, 1], &[0, 0], 2).unwrap();
        let map = transfer_cog(&p, Mode::A).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m1 = CogMessages::random(&mut rng, 1, 0, 2);
            let m2 = CogMessages::random(&mut rng, 1, 0, 0);
            let [x1, x2] = encode_virtual_cog(&code, &m1, &m2).unwrap();
            let y = map.apply(&x1, &x2).unwrap();
            let d3 = decode_virtual_cog(&code, 0, &y[2]).unwrap();
            assert_eq!(d3.w, m1.w);
            assert_eq!(d3.v, m1.v);
            let d4 = decode_virtual_cog(&code, 1, &y[3]).unwrap();
            assert_eq!(d4.w, m2.w);
            assert_eq!(d4.u, m2.u);
        }
    }

    #[test]
    fn cognitive_sim_meets_capacity_point() {
        // At this channel the cognitive sum capacity is 2, met with one
        // listening slot per two transmit slots.
        let p = LdmCogParams::new(2, 3, 5, 2, 6);
        let sched = Schedule::cognitive(2, 1).unwrap();
        let alloc = CogAllocation {
            w: [0, 1],
            u: [0, 0],
            v1: 1,
            direct1: 2,
            pipe12: 2,
        };
        let res = run_halfduplex_sim(
            &LdmParams::Cog(p),
            &sched,
            &MessageAllocation::Cog(alloc),
            20,
            77,
        )
        .unwrap();
        assert_eq!(res.errors, 0);
        assert_eq!(res.sum, rint(2));
        assert_eq!(res.r1, rat(4, 3));
        assert_eq!(res.r2, rat(2, 3));
    }

    #[test]
    fn trace_lists_every_listener() {
        let p = sym(1, 2, 3);
        let plan = optimal_sym_plan(&p).unwrap();
        let mut sink = Vec::new();
        run_halfduplex_sim_traced(
            &LdmParams::Sym(p),
            &plan.schedule,
            &MessageAllocation::Sym(plan.alloc.clone()),
            2,
            4,
            Some(&mut sink),
        )
        .unwrap();
        let text = String::from_utf8(sink).unwrap();
        // Listening slots have three listeners, transmit slots two.
        let per_block =
            3 * (plan.schedule.l_b + plan.schedule.l_c) as usize + 2 * plan.schedule.l_a as usize;
        assert_eq!(text.lines().count(), 2 * per_block);
        assert!(text.lines().all(|l| l.starts_with("block ")));
    }
}
