//! Capacity toolkit for interference channels with half-duplex source
//! cooperation.
//!
//! The crate has two arithmetic worlds that never silently mix:
//!
//! * exact: GF(2) linear algebra ([`gf2`]), the deterministic bit-level
//!   channel ([`ldm`]), its codec ([`codec`]), rational rate-region
//!   polyhedra ([`region`]), and the bit-level capacity formulas in
//!   [`capacity`]. Everything here is `BigRational` or bit-exact.
//! * floating point: the Gaussian bound families and gap certificates
//!   ([`capacity`], [`analysis`]), where the results are real-valued by
//!   nature and tolerances are explicit.

pub mod analysis;
pub mod capacity;
pub mod codec;
pub mod gf2;
pub mod ldm;
pub mod region;

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational scalar used across the crate.
pub type Rat = num_rational::BigRational;

/// Build a `Rat` from an integer pair. Panics on q = 0.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p.into(), q.into())
}

/// Build a `Rat` from an integer.
pub fn rint(p: i64) -> Rat {
    Rat::from_integer(p.into())
}

pub use analysis::{
    default_betas, emit_figure_data, gap_margins_csv, gap_report_json, gdof_cog, gdof_sum,
    verify_gaps, verify_gaps_with, Beta, CogGapPoint, CogSweep, FigureSweep, GapConstants,
    GapGrid, GapReport, GapViolation, GdofPoint, SumSweep, SymGapPoint, COG_MARGIN_NAMES,
    SYM_MARGIN_NAMES,
};
pub use capacity::{
    gaussian_cog_bounds, gaussian_sum_inner_outer, ifc_cog_capacity, ifc_cog_v,
    ldm_cog_capacity, ldm_sum_capacity, ldm_sum_family, listen_power_excess,
    maximize_over_delta, mode_a_power_excess, DeltaOptResult, FracBound, FracFamily,
    GaussCogBounds, GaussCogParams, GaussSumBounds, GaussSymParams, PowerSplit,
};
pub use codec::{
    build_virtual_code_cog, build_virtual_code_cog_unchecked, build_virtual_code_sym,
    build_virtual_code_sym_unchecked, decode_virtual_cog, decode_virtual_sym, encode_transmit_cog,
    encode_transmit_sym, encode_virtual_cog, encode_virtual_sym, find_collision_cog,
    find_collision_sym, optimal_sym_plan, run_halfduplex_sim, run_halfduplex_sim_traced,
    sym_plan_at,
    CogAllocation, CogDecoded, CogMessages, LayerRates, MessageAllocation, SimResult,
    SymAllocation, SymDecoded, SymMessages, SymPlan, VirtualCodeCog, VirtualCodeSym,
};
pub use gf2::{BitMatrix, BitVector};
pub use ldm::{
    apply_channel, transfer_cog, transfer_sym, LdmCogParams, LdmParams, LdmSymParams, Mode,
    Schedule, TransferMap,
};
pub use region::{AuxSpec, LinIneq, Polytope, RateVar};

/// The mode-A/listening time ratio. `Infinity` is the pure-mode-A limit:
/// the schedule never listens and the channel degenerates to the plain
/// interference channel. Several optima are attained only in that limit,
/// so it is a first-class value rather than a sentinel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Delta {
    Finite(Rat),
    Infinity,
}

impl Delta {
    pub fn finite(p: i64, q: i64) -> Delta {
        Delta::Finite(rat(p, q))
    }

    pub fn zero() -> Delta {
        Delta::Finite(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Delta::Finite(r) if r.is_zero())
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Delta::Finite(r) => r.to_f64().unwrap_or(f64::MAX),
            Delta::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Finite(r) => write!(f, "{}", fmt_rat(r)),
            Delta::Infinity => write!(f, "∞"),
        }
    }
}

impl FromStr for Delta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Delta> {
        let s = s.trim();
        if s == "inf" || s == "∞" || s == "infinity" {
            return Ok(Delta::Infinity);
        }
        let parse_int = |t: &str| -> Result<num_bigint::BigInt> {
            t.parse()
                .map_err(|_| Error::InvalidParam(format!("bad rational: {s}")))
        };
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (parse_int(p)?, parse_int(q)?),
            None => (parse_int(s)?, 1.into()),
        };
        if q.is_zero() || p.is_negative() || q.is_negative() {
            return Err(Error::InvalidParam(format!("bad schedule ratio: {s}")));
        }
        Ok(Delta::Finite(Rat::new(p, q)))
    }
}

/// Render a rational as `p` or `p/q`, never decimalized.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Equal direct and interference gains make the two-source transfer
    /// matrix singular; no zero-forcing precoder exists.
    #[error("zero-forcing precoder does not exist: direct and interference gains are equal")]
    SingularChannel,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("non-integral per-slot load: {0}")]
    NonIntegralLoad(String),
    #[error("decode ambiguous: {0}")]
    DecodeAmbiguous(String),
    #[error("elimination exceeded the inequality guard ({0})")]
    GuardExceeded(usize),
    #[error("objective is unbounded over the polytope")]
    Unbounded,
    #[error("mode C does not exist on the cognitive channel")]
    NoModeC,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_parse_and_print() {
        assert_eq!("1/2".parse::<Delta>().unwrap(), Delta::finite(1, 2));
        assert_eq!("3".parse::<Delta>().unwrap(), Delta::finite(3, 1));
        assert_eq!("inf".parse::<Delta>().unwrap(), Delta::Infinity);
        assert_eq!(Delta::finite(1, 2).to_string(), "1/2");
        assert_eq!(Delta::finite(6, 2).to_string(), "3");
        assert_eq!(Delta::Infinity.to_string(), "∞");
        assert!("1/0".parse::<Delta>().is_err());
        assert!("-1".parse::<Delta>().is_err());
    }
}
