//! The bit-level deterministic channel with half-duplex source cooperation.
//!
//! Nodes 1 and 2 are sources, nodes 3 and 4 are the destinations paired
//! with them. The channel has three half-duplex modes:
//!
//! * mode A: both sources transmit, both destinations receive,
//! * mode B: source 1 transmits alone and source 2 listens too,
//! * mode C: source 2 transmits alone and source 1 listens too.
//!
//! Two channel families share this machinery. The symmetric family has
//! direct gain `n_d`, cross gain `n_i`, and a bidirectional cooperation
//! link of gain `n_c`. The cognitive family is asymmetric with direct
//! gains `n1`, `n2`, cross gains `a1` (source 2 into destination 3) and
//! `a2` (source 1 into destination 4), and a one-way cooperation link of
//! gain `beta` from source 1 to source 2; it has no mode C.
//!
//! Every transmission in a mode is a vector over GF(2) whose width is the
//! largest gain appearing in that mode's equations. A receiver of gain `g`
//! sees the input through the down-shift `S^{m-g}`, i.e. only its top `g`
//! levels.

use crate::gf2::{BitMatrix, BitVector};
use crate::{Delta, Error, Rat, Result};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LdmSymParams {
    pub n_d: u32,
    pub n_i: u32,
    pub n_c: u32,
}

impl LdmSymParams {
    pub fn new(n_d: u32, n_i: u32, n_c: u32) -> LdmSymParams {
        LdmSymParams { n_d, n_i, n_c }
    }

    /// Width of the transmit vectors in the given mode.
    pub fn width(&self, mode: Mode) -> usize {
        match mode {
            Mode::A => self.n_d.max(self.n_i) as usize,
            Mode::B | Mode::C => self.n_d.max(self.n_i).max(self.n_c) as usize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LdmCogParams {
    pub n1: u32,
    pub n2: u32,
    pub a1: u32,
    pub a2: u32,
    pub beta: u32,
}

impl LdmCogParams {
    pub fn new(n1: u32, n2: u32, a1: u32, a2: u32, beta: u32) -> LdmCogParams {
        LdmCogParams { n1, n2, a1, a2, beta }
    }

    pub fn width(&self, mode: Mode) -> Result<usize> {
        let base = self.n1.max(self.a1).max(self.n2).max(self.a2);
        match mode {
            Mode::A => Ok(base as usize),
            Mode::B => Ok(base.max(self.beta) as usize),
            Mode::C => Err(Error::NoModeC),
        }
    }

    /// The largest zero-forcing block size destination 4 supports: source 2
    /// can superimpose `k` relayed bits so that they cancel at destination 3
    /// and remain decodable at destination 4, provided
    /// `k <= max{n1 - (a2 - n2)+, a1 - (n2 - a2)+}` (and `k >= 0`).
    pub fn realizable_k(&self) -> u32 {
        let c1 = self.n1 as i64 - (self.a2 as i64 - self.n2 as i64).max(0);
        let c2 = self.a1 as i64 - (self.n2 as i64 - self.a2 as i64).max(0);
        c1.max(c2).max(0) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
    C,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::A => write!(f, "A"),
            Mode::B => write!(f, "B"),
            Mode::C => write!(f, "C"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LdmParams {
    Sym(LdmSymParams),
    Cog(LdmCogParams),
}

impl From<LdmSymParams> for LdmParams {
    fn from(p: LdmSymParams) -> LdmParams {
        LdmParams::Sym(p)
    }
}

impl From<LdmCogParams> for LdmParams {
    fn from(p: LdmCogParams) -> LdmParams {
        LdmParams::Cog(p)
    }
}

/// A block schedule: how many slots of each mode make up one block.
///
/// The symmetric convention keeps `l_b = l_c` and delta = L_A/L_B; the
/// cognitive convention has no mode C and delta = L_B/L_A. `delta` may be
/// INFINITY, which in both conventions means a degenerate schedule that
/// never leaves the numerator mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub delta: Delta,
    pub l_a: u32,
    pub l_b: u32,
    pub l_c: u32,
}

impl Schedule {
    /// Symmetric schedule with `delta = l_a / l_b` and `l_b = l_c`.
    pub fn symmetric(l_a: u32, l_b: u32) -> Result<Schedule> {
        let delta = match (l_a, l_b) {
            (0, 0) => {
                return Err(Error::InvalidParam("empty schedule".into()));
            }
            (_, 0) => Delta::Infinity,
            _ => Delta::Finite(Rat::new(l_a.into(), l_b.into())),
        };
        Ok(Schedule {
            delta,
            l_a,
            l_b,
            l_c: l_b,
        })
    }

    /// Cognitive schedule with `delta = l_b / l_a` and no mode C.
    pub fn cognitive(l_a: u32, l_b: u32) -> Result<Schedule> {
        let delta = match (l_a, l_b) {
            (0, 0) => {
                return Err(Error::InvalidParam("empty schedule".into()));
            }
            (0, _) => Delta::Infinity,
            _ => Delta::Finite(Rat::new(l_b.into(), l_a.into())),
        };
        Ok(Schedule {
            delta,
            l_a,
            l_b,
            l_c: 0,
        })
    }

    pub fn total_slots(&self) -> u32 {
        self.l_a + self.l_b + self.l_c
    }

    /// The mode of slot `t` within a block, counting from zero. Blocks run
    /// B-slots first, then C, then A: relayed data learned in one block's
    /// B phase goes out in the next block's C phase.
    pub fn mode_of_slot(&self, t: u32) -> Mode {
        assert!(t < self.total_slots());
        if t < self.l_b {
            Mode::B
        } else if t < self.l_b + self.l_c {
            Mode::C
        } else {
            Mode::A
        }
    }

    /// Check the stored slot counts against the stored delta.
    pub fn is_consistent_symmetric(&self) -> bool {
        if self.l_b != self.l_c {
            return false;
        }
        match &self.delta {
            Delta::Infinity => self.l_b == 0 && self.l_a > 0,
            Delta::Finite(d) => {
                self.l_b > 0 && *d == Rat::new(self.l_a.into(), self.l_b.into())
            }
        }
    }

    pub fn is_consistent_cognitive(&self) -> bool {
        if self.l_c != 0 {
            return false;
        }
        match &self.delta {
            Delta::Infinity => self.l_a == 0 && self.l_b > 0,
            Delta::Finite(d) => {
                if d.is_zero() {
                    self.l_b == 0 && self.l_a > 0
                } else {
                    self.l_a > 0 && *d == Rat::new(self.l_b.into(), self.l_a.into())
                }
            }
        }
    }
}

/// The per-mode linear channel: each node's output is a fixed GF(2) linear
/// function of the pair of transmit vectors.
#[derive(Clone, Debug)]
pub struct TransferMap {
    pub mode: Mode,
    pub width: usize,
    /// `factors[node]` = (matrix applied to X1, matrix applied to X2) for
    /// nodes 1..4 in order.
    pub factors: [(BitMatrix, BitMatrix); 4],
}

impl TransferMap {
    pub fn apply(&self, x1: &BitVector, x2: &BitVector) -> Result<[BitVector; 4]> {
        if x1.len() != self.width || x2.len() != self.width {
            return Err(Error::InvalidParam(format!(
                "input widths ({}, {}) do not match the mode width {}",
                x1.len(),
                x2.len(),
                self.width
            )));
        }
        Ok(self
            .factors
            .each_ref()
            .map(|(f1, f2)| f1.mul_vec(x1).xor(&f2.mul_vec(x2))))
    }
}

fn gain(m: usize, g: u32) -> BitMatrix {
    BitMatrix::shift(m, m - g as usize)
}

pub fn transfer_sym(p: &LdmSymParams, mode: Mode) -> TransferMap {
    let m = p.width(mode);
    let z = || BitMatrix::zero(m, m);
    let factors = match mode {
        Mode::A => [
            (z(), z()),
            (z(), z()),
            (gain(m, p.n_d), gain(m, p.n_i)),
            (gain(m, p.n_i), gain(m, p.n_d)),
        ],
        Mode::B => [
            (z(), z()),
            (gain(m, p.n_c), z()),
            (gain(m, p.n_d), z()),
            (gain(m, p.n_i), z()),
        ],
        Mode::C => [
            (z(), gain(m, p.n_c)),
            (z(), z()),
            (z(), gain(m, p.n_i)),
            (z(), gain(m, p.n_d)),
        ],
    };
    TransferMap {
        mode,
        width: m,
        factors,
    }
}

pub fn transfer_cog(p: &LdmCogParams, mode: Mode) -> Result<TransferMap> {
    let m = p.width(mode)?;
    let z = || BitMatrix::zero(m, m);
    let factors = match mode {
        Mode::A => [
            (z(), z()),
            (z(), z()),
            (gain(m, p.n1), gain(m, p.a1)),
            (gain(m, p.a2), gain(m, p.n2)),
        ],
        Mode::B => [
            (z(), z()),
            (gain(m, p.beta), z()),
            (gain(m, p.n1), z()),
            (gain(m, p.a2), z()),
        ],
        Mode::C => unreachable!("width() rejects mode C"),
    };
    Ok(TransferMap {
        mode,
        width: m,
        factors,
    })
}

pub fn transfer(params: &LdmParams, mode: Mode) -> Result<TransferMap> {
    match params {
        LdmParams::Sym(p) => Ok(transfer_sym(p, mode)),
        LdmParams::Cog(p) => transfer_cog(p, mode),
    }
}

pub fn apply_channel(map: &TransferMap, x1: &BitVector, x2: &BitVector) -> Result<[BitVector; 4]> {
    map.apply(x1, x2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_mode_a_factors() {
        let p = LdmSymParams::new(2, 1, 0);
        let map = transfer_sym(&p, Mode::A);
        assert_eq!(map.width, 2);
        // Y3 sees X1 through S^0 and X2 through S^1.
        assert_eq!(map.factors[2].0, BitMatrix::identity(2));
        assert_eq!(map.factors[2].1, BitMatrix::shift(2, 1));
        // Sources hear nothing in mode A.
        assert_eq!(map.factors[0].0, BitMatrix::zero(2, 2));
        assert_eq!(map.factors[1].1, BitMatrix::zero(2, 2));
    }

    #[test]
    fn sym_mode_b_silences_source_two() {
        let p = LdmSymParams::new(2, 1, 3);
        let map = transfer_sym(&p, Mode::B);
        assert_eq!(map.width, 3);
        assert_eq!(map.factors[0], (BitMatrix::zero(3, 3), BitMatrix::zero(3, 3)));
        assert_eq!(map.factors[1].0, BitMatrix::shift(3, 0));
        for node in 0..4 {
            assert_eq!(map.factors[node].1, BitMatrix::zero(3, 3));
        }
        let x1 = BitVector::from_levels(&[1, 1, 0]);
        let x2 = BitVector::from_levels(&[1, 0, 1]);
        let y = map.apply(&x1, &x2).unwrap();
        let y0 = map.apply(&x1, &BitVector::zero(3)).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn cog_mode_b_example() {
        let p = LdmCogParams::new(2, 3, 5, 2, 6);
        let map = transfer_cog(&p, Mode::B).unwrap();
        assert_eq!(map.width, 6);
        assert_eq!(map.factors[3].0, BitMatrix::shift(6, 4));
        assert_eq!(map.factors[1].0, BitMatrix::shift(6, 0));
        assert_eq!(map.factors[2].0, BitMatrix::shift(6, 4));
        // Verify Y4 = S^{m-a2} X1 on every unit vector.
        for i in 0..6 {
            let mut e = BitVector::zero(6);
            e.set(i, true);
            let y = map.apply(&e, &BitVector::zero(6)).unwrap();
            assert_eq!(y[3], BitMatrix::shift(6, 4).mul_vec(&e));
        }
    }

    #[test]
    fn cog_rejects_mode_c() {
        let p = LdmCogParams::new(1, 1, 1, 1, 1);
        assert!(matches!(
            transfer(&LdmParams::Cog(p), Mode::C),
            Err(Error::NoModeC)
        ));
    }

    #[test]
    fn zero_in_zero_out() {
        let p = LdmSymParams::new(3, 4, 2);
        for mode in [Mode::A, Mode::B, Mode::C] {
            let map = transfer_sym(&p, mode);
            let z = BitVector::zero(map.width);
            assert!(map.apply(&z, &z).unwrap().iter().all(|y| y.is_zero()));
        }
    }

    #[test]
    fn schedule_conventions() {
        let s = Schedule::symmetric(3, 2).unwrap();
        assert_eq!(s.delta, Delta::finite(3, 2));
        assert!(s.is_consistent_symmetric());
        assert_eq!(s.total_slots(), 7);
        assert_eq!(s.mode_of_slot(0), Mode::B);
        assert_eq!(s.mode_of_slot(2), Mode::C);
        assert_eq!(s.mode_of_slot(4), Mode::A);

        let s = Schedule::symmetric(5, 0).unwrap();
        assert_eq!(s.delta, Delta::Infinity);
        assert!(s.is_consistent_symmetric());

        let c = Schedule::cognitive(2, 3).unwrap();
        assert_eq!(c.delta, Delta::finite(3, 2));
        assert!(c.is_consistent_cognitive());
        assert_eq!(c.l_c, 0);

        let c = Schedule::cognitive(0, 4).unwrap();
        assert_eq!(c.delta, Delta::Infinity);
        assert!(c.is_consistent_cognitive());
        assert!(Schedule::cognitive(0, 0).is_err());
    }

    #[test]
    fn realizable_k_examples() {
        // a2 <= n2: the whole direct gain n1 is usable.
        assert_eq!(LdmCogParams::new(3, 5, 2, 4, 0).realizable_k(), 3);
        // Strong interference case: a1 dominates, offset (n2-a2)+ is zero.
        assert_eq!(LdmCogParams::new(1, 2, 6, 3, 0).realizable_k(), 6);
        // Both offsets active: max(4-(2-1), 3-0) = 3.
        assert_eq!(LdmCogParams::new(4, 1, 3, 2, 0).realizable_k(), 3);
        assert_eq!(LdmCogParams::new(0, 4, 0, 0, 0).realizable_k(), 0);
    }
}
