//! Alice's classical operations, Bob's measurement bases and round types.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::{
    to_hadamard_amplitudes, BasisKet, FockLabel, FockSpace, FockState, HadamardKet, HadamardLabel,
    Outcome, Register,
};
use crate::tolerance;
use crate::{Error, Result};

/// One of Alice's four classical operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AliceOperation {
    /// Reflect everything (`I`).
    Ctrl,
    /// Measure the `|1>` mode, reflect the `|0>` mode (`S1`). Raw key bit 0.
    Swap10,
    /// Measure the `|0>` mode, reflect the `|1>` mode (`S0`). Raw key bit 1.
    Swap01,
    /// Measure everything, reflect nothing (`S`).
    SwapAll,
}

impl AliceOperation {
    /// All operations in declaration order.
    pub const ALL: [Self; 4] = [Self::Ctrl, Self::Swap10, Self::Swap01, Self::SwapAll];

    /// Alice's raw key bit when this operation yields one.
    pub fn raw_key_bit(self) -> Option<u8> {
        match self {
            Self::Swap10 => Some(0),
            Self::Swap01 => Some(1),
            _ => None,
        }
    }

    /// Whether this is one of the SWAP-x operations.
    pub fn is_swap_x(self) -> bool {
        matches!(self, Self::Swap10 | Self::Swap01)
    }

    /// Where each component `|m1,m0>_B` goes: `(ancilla, bob)`.
    fn route(self, bob: FockLabel) -> (FockLabel, FockLabel) {
        match self {
            Self::Ctrl => (FockLabel::VACUUM, bob),
            Self::Swap10 => (FockLabel::new(bob.m1, 0), FockLabel::new(0, bob.m0)),
            Self::Swap01 => (FockLabel::new(0, bob.m0), FockLabel::new(bob.m1, 0)),
            Self::SwapAll => (bob, FockLabel::VACUUM),
        }
    }
}

/// Bob's final measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BobBasis {
    /// `{|0>, |1>}`.
    Computational,
    /// `{|+>, |->}`.
    Hadamard,
}

impl BobBasis {
    /// Both bases.
    pub const ALL: [Self; 2] = [Self::Computational, Self::Hadamard];

    /// Matching detector basis.
    pub fn measurement(self) -> crate::fock::MeasurementBasis {
        match self {
            Self::Computational => crate::fock::MeasurementBasis::Computational,
            Self::Hadamard => crate::fock::MeasurementBasis::Hadamard,
        }
    }
}

/// The six kinds of rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RoundType {
    /// SWAP-x, computational.
    RawKey,
    /// SWAP-x, Hadamard.
    MismatchedRawKey,
    /// CTRL, Hadamard.
    Test,
    /// CTRL, computational.
    MismatchedTest,
    /// SWAP-ALL, computational.
    SwapAll,
    /// SWAP-ALL, Hadamard.
    MismatchedSwapAll,
}

/// Round type of an (operation, basis) pair.
pub fn classify_round(op: AliceOperation, basis: BobBasis) -> RoundType {
    use AliceOperation::*;
    use BobBasis::*;
    match (op, basis) {
        (Swap10 | Swap01, Computational) => RoundType::RawKey,
        (Swap10 | Swap01, Hadamard) => RoundType::MismatchedRawKey,
        (Ctrl, Hadamard) => RoundType::Test,
        (Ctrl, Computational) => RoundType::MismatchedTest,
        (SwapAll, Computational) => RoundType::SwapAll,
        (SwapAll, Hadamard) => RoundType::MismatchedSwapAll,
    }
}

/// Applies Alice's operation to every component of `state`.
///
/// Alice's ancilla must start in the vacuum.
pub fn apply_alice_operation(op: AliceOperation, state: &FockState) -> Result<FockState> {
    if state.iter().any(|(ket, _)| !ket.alice.is_vacuum()) {
        return Err(Error::NonVacuumAncilla);
    }
    if op == AliceOperation::Ctrl {
        return Ok(state.clone());
    }
    state.map_kets(state.space(), |ket| {
        let (alice, bob) = op.route(ket.bob);
        BasisKet::new(bob, alice, ket.eve)
    })
}

/// Bob's initial `|+>_B = (|0,1> + |1,0>)/sqrt2`, with a trivial Eve ancilla index 0.
pub fn bob_initial_state(space: FockSpace) -> Result<FockState> {
    let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    FockState::from_amplitudes(
        space,
        [
            (BasisKet::bob(FockLabel::ZERO, 0), h),
            (BasisKet::bob(FockLabel::ONE, 0), h),
        ],
    )?
    .assert_normalized()
}

/// What Alice sends back to Bob in a noiseless round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SentState {
    /// A computational Fock state.
    Fock(FockLabel),
    /// A Hadamard-basis single photon.
    Hadamard(HadamardLabel),
}

/// One branch of a noiseless round.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdealBranch {
    /// Whether Alice's detectors click.
    pub alice_detects: bool,
    /// State reflected to Bob.
    pub sent_to_bob: SentState,
    /// Branch probability.
    pub probability: f64,
    /// Alice's raw key bit, if the branch yields one.
    pub raw_key_bit: Option<u8>,
}

/// Noiseless branches of `op` acting on Bob's `|+>`, obtained by evolving the
/// state and splitting on Alice's detection.
pub fn ideal_round_outcome(op: AliceOperation) -> Vec<IdealBranch> {
    let space = FockSpace::new(1, 1).expect("static space");
    let start = bob_initial_state(space).expect("static state");
    let after = apply_alice_operation(op, &start).expect("vacuum ancilla");

    let no_detect = after.project(Register::AliceAncilla, Outcome::Vacuum);
    let detect = after.filter(|k| !k.alice.is_vacuum());

    let mut branches = Vec::new();
    for (alice_detects, branch) in [(false, no_detect), (true, detect)] {
        let probability = branch.norm_squared();
        if probability <= tolerance::IDENTITY {
            continue;
        }
        let conditional = branch.normalize().expect("nonzero branch");
        branches.push(IdealBranch {
            alice_detects,
            sent_to_bob: identify_bob_state(&conditional),
            probability,
            raw_key_bit: if alice_detects {
                None
            } else {
                op.raw_key_bit()
            },
        });
    }
    branches
}

// Bob's conditional state in a noiseless round is always a single Fock label
// or a single Hadamard photon.
fn identify_bob_state(state: &FockState) -> SentState {
    let mut labels = state.iter().map(|(k, _)| k.bob);
    let first = labels.next().expect("nonempty state");
    if labels.all(|l| l == first) {
        return SentState::Fock(first);
    }
    let h = to_hadamard_amplitudes(state);
    for label in [HadamardLabel::Plus, HadamardLabel::Minus] {
        if (h.weight(HadamardKet::Single(label)) - 1.0).abs() < tolerance::ASSERT {
            return SentState::Hadamard(label);
        }
    }
    unreachable!("noiseless rounds send a basis state")
}
