//! Observable round statistics induced by a collective attack.
//!
//! Conventions: the four raw-key probabilities, `M` and `p_{b,+}` are joint
//! over Alice's SWAP-x choice within raw-key (respectively mismatched
//! raw-key) rounds; `p_{+,+}` and `p_ctrl` are within their CTRL round type;
//! `p_double` and `p_create` are within SWAP-ALL rounds.

mod monte_carlo;

pub use monte_carlo::{
    monte_carlo_statistics, monte_carlo_statistics_with_weights, MonteCarloEstimate,
    OperationWeights, RoundSampler, RoundTally, CHUNK_ROUNDS,
};

use num_complex::Complex64;

use crate::adversary::{
    norm_sqr, verify_isometry, zero_vector, EveVector, FirstAttack, SecondAttack,
};
use crate::fock::{
    measurement_probabilities, FockState, MeasurementBasis, Outcome, OutcomeProbabilities,
    Register, DEFAULT_N_MAX,
};
use crate::math::abs;
use crate::protocol::{apply_alice_operation, AliceOperation};
use crate::tolerance;
use crate::{Error, Result};

/// The observable probabilities Alice and Bob estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservedStatistics {
    /// `<E0>`: Alice bit 0, Bob bit 0.
    pub e00: f64,
    /// `<E1>`: Alice bit 0, Bob bit 1.
    pub e01: f64,
    /// `<E2>`: Alice bit 1, Bob bit 0.
    pub e10: f64,
    /// `<E3>`: Alice bit 1, Bob bit 1.
    pub e11: f64,
    /// `M`: both parties hold a raw key bit.
    pub m_total: f64,
    /// Alice bit 0 and Bob `|+>` in a mismatched raw-key round.
    pub p0_plus: f64,
    /// Alice bit 1 and Bob `|+>` in a mismatched raw-key round.
    pub p1_plus: f64,
    /// Bob `|+>` in a test round.
    pub p_plus_plus: f64,
    /// Bob `|0,1>` in a mismatched test round.
    pub p_ctrl_0: f64,
    /// Bob `|1,0>` in a mismatched test round.
    pub p_ctrl_1: f64,
    /// Alice double click in a SWAP-ALL round.
    pub p_double: f64,
    /// Alice vacuum and Bob `|0,1>` in a SWAP-ALL round.
    pub p_create_0: f64,
    /// Alice vacuum and Bob `|1,0>` in a SWAP-ALL round.
    pub p_create_1: f64,
}

impl ObservedStatistics {
    /// Number of fields.
    pub const LEN: usize = 13;

    /// Field names in [`Self::values`] order.
    pub const FIELD_NAMES: [&'static str; Self::LEN] = [
        "e00",
        "e01",
        "e10",
        "e11",
        "m_total",
        "p0_plus",
        "p1_plus",
        "p_plus_plus",
        "p_ctrl_0",
        "p_ctrl_1",
        "p_double",
        "p_create_0",
        "p_create_1",
    ];

    /// All fields in declaration order.
    pub fn values(&self) -> [f64; Self::LEN] {
        [
            self.e00,
            self.e01,
            self.e10,
            self.e11,
            self.m_total,
            self.p0_plus,
            self.p1_plus,
            self.p_plus_plus,
            self.p_ctrl_0,
            self.p_ctrl_1,
            self.p_double,
            self.p_create_0,
            self.p_create_1,
        ]
    }

    /// Inverse of [`Self::values`].
    pub fn from_values(v: [f64; Self::LEN]) -> Self {
        Self {
            e00: v[0],
            e01: v[1],
            e10: v[2],
            e11: v[3],
            m_total: v[4],
            p0_plus: v[5],
            p1_plus: v[6],
            p_plus_plus: v[7],
            p_ctrl_0: v[8],
            p_ctrl_1: v[9],
            p_double: v[10],
            p_create_0: v[11],
            p_create_1: v[12],
        }
    }

    /// Raw-key probabilities `[<E0>, <E1>, <E2>, <E3>]`.
    pub fn raw_key(&self) -> [f64; 4] {
        [self.e00, self.e01, self.e10, self.e11]
    }

    /// Every field multiplied by `eta`.
    pub fn scaled(&self, eta: f64) -> Self {
        Self::from_values(self.values().map(|v| v * eta))
    }

    /// Fields in `[0, 1]` and `M = sum <E_i>`.
    pub fn validate(&self) -> Result<()> {
        let eps = tolerance::IDENTITY;
        if self
            .values()
            .iter()
            .any(|v| !v.is_finite() || *v < -eps || *v > 1.0 + eps)
        {
            return Err(Error::InvalidStatistics("probability outside [0, 1]"));
        }
        let sum: f64 = self.raw_key().iter().sum();
        if abs(self.m_total - sum) > tolerance::ASSERT {
            return Err(Error::InvalidStatistics("M differs from the sum of <E_i>"));
        }
        Ok(())
    }
}

/// Eve-ancilla vectors that the observable statistics constrain.
#[derive(Clone, Debug, PartialEq)]
pub struct EveVectors {
    /// `|E0>..|E3>`.
    pub e: [EveVector; 4],
    /// `|g0> = g^{0,1}_{0,0} / sqrt2`.
    pub g0: EveVector,
    /// `|g1> = g^{1,0}_{0,0} / sqrt2`.
    pub g1: EveVector,
    /// `|h0> = sum_{m1,m0 >= 1} g^{0,1}_{m1,m0} / sqrt2`.
    pub h0: EveVector,
    /// `|h1> = sum_{m1,m0 >= 1} g^{1,0}_{m1,m0} / sqrt2`.
    pub h1: EveVector,
    /// `|h_vac> = sum_{m1,m0 >= 1} g^{0,0}_{m1,m0} / sqrt2`.
    pub h_vac: EveVector,
}

impl EveVectors {
    /// Builds the vectors directly from their definitions in terms of `U_R`
    /// applied to each injected component.
    pub fn from_attack(first: &FirstAttack, second: &SecondAttack) -> Result<Self> {
        let dim = second.output_dim();
        let mut out = Self {
            e: core::array::from_fn(|_| zero_vector(dim)),
            g0: zero_vector(dim),
            g1: zero_vector(dim),
            h0: zero_vector(dim),
            h1: zero_vector(dim),
            h_vac: zero_vector(dim),
        };
        let s = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let add = |acc: &mut EveVector, v: &EveVector| {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += s * x;
            }
        };
        for (label, e) in first.iter() {
            let t = second.apply(label, e)?;
            if label.m1 == 0 {
                add(&mut out.e[0], &t.g01);
                add(&mut out.e[1], &t.g10);
            }
            if label.m0 == 0 {
                add(&mut out.e[2], &t.g01);
                add(&mut out.e[3], &t.g10);
            }
            if label.is_vacuum() {
                add(&mut out.g0, &t.g01);
                add(&mut out.g1, &t.g10);
            }
            if label.m1 >= 1 && label.m0 >= 1 {
                add(&mut out.h0, &t.g01);
                add(&mut out.h1, &t.g10);
                add(&mut out.h_vac, &t.g00);
            }
        }
        Ok(out)
    }

    /// `<E_i|E_j>`.
    pub fn e_inner(&self, i: usize, j: usize) -> Complex64 {
        crate::adversary::vdot(&self.e[i], &self.e[j])
    }

    /// `<v|v>` for any of the vectors.
    pub fn norm_squared(v: &[Complex64]) -> f64 {
        norm_sqr(v)
    }
}

/// Alice's detector statistics for one operation, and the state Bob receives
/// after `U_R` when Alice sees the vacuum.
pub(crate) struct OperationBranch {
    pub(crate) alice: OutcomeProbabilities,
    pub(crate) returned: FockState,
}

pub(crate) fn evolve_operation(
    psi0: &FockState,
    second: &SecondAttack,
    op: AliceOperation,
) -> Result<OperationBranch> {
    let after = apply_alice_operation(op, psi0)?;
    let alice = measurement_probabilities(
        &after,
        Register::AliceAncilla,
        MeasurementBasis::Computational,
    )?;
    let kept = after.project(Register::AliceAncilla, Outcome::Vacuum);
    let returned = second.apply_to_state(&kept)?;
    Ok(OperationBranch { alice, returned })
}

pub(crate) fn bob_probabilities(
    state: &FockState,
    basis: MeasurementBasis,
) -> OutcomeProbabilities {
    if state.norm_squared() <= 0.0 {
        return OutcomeProbabilities::zero(basis);
    }
    measurement_probabilities(state, Register::Bob, basis).expect("nonzero state")
}

pub(crate) fn initial_state(first: &FirstAttack, second: &SecondAttack) -> Result<FockState> {
    if !verify_isometry(second) {
        return Err(Error::NotIsometric);
    }
    if first.eve_dim() != second.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "eve ancilla between attacks",
            left: first.eve_dim(),
            right: second.input_dim(),
        });
    }
    first.to_state(first.max_photons_per_mode().max(DEFAULT_N_MAX))
}

/// Exact statistics by evolving `|psi0>` through each operation and `U_R`
/// and projecting with the detector model, together with the Eve vectors
/// built from their definitions.
pub fn analytic_statistics(
    first: &FirstAttack,
    second: &SecondAttack,
) -> Result<(ObservedStatistics, EveVectors)> {
    use MeasurementBasis::{Computational, Hadamard};

    let psi0 = initial_state(first, second)?;
    let mut stats = ObservedStatistics::default();

    // Each SWAP-x is chosen with probability 1/2 inside a raw-key round.
    for op in [AliceOperation::Swap10, AliceOperation::Swap01] {
        let branch = evolve_operation(&psi0, second, op)?;
        let comp = bob_probabilities(&branch.returned, Computational);
        let had = bob_probabilities(&branch.returned, Hadamard);
        let (e_zero, e_one, plus) = (
            0.5 * comp.get(Outcome::ClickZero),
            0.5 * comp.get(Outcome::ClickOne),
            0.5 * had.get(Outcome::Plus),
        );
        if op == AliceOperation::Swap10 {
            stats.e00 = e_zero;
            stats.e01 = e_one;
            stats.p0_plus = plus;
        } else {
            stats.e10 = e_zero;
            stats.e11 = e_one;
            stats.p1_plus = plus;
        }
    }
    stats.m_total = stats.raw_key().iter().sum();

    let ctrl = evolve_operation(&psi0, second, AliceOperation::Ctrl)?;
    stats.p_plus_plus = bob_probabilities(&ctrl.returned, Hadamard).get(Outcome::Plus);
    let comp = bob_probabilities(&ctrl.returned, Computational);
    stats.p_ctrl_0 = comp.get(Outcome::ClickZero);
    stats.p_ctrl_1 = comp.get(Outcome::ClickOne);

    let swap_all = evolve_operation(&psi0, second, AliceOperation::SwapAll)?;
    stats.p_double = swap_all.alice.get(Outcome::DoubleClick);
    let comp = bob_probabilities(&swap_all.returned, Computational);
    stats.p_create_0 = comp.get(Outcome::ClickZero);
    stats.p_create_1 = comp.get(Outcome::ClickOne);

    let vectors = EveVectors::from_attack(first, second)?;
    Ok((stats, vectors))
}

/// Checks `<h0>, <h1> <= p_double / 2` and the unitarity identity
/// `p_double / 2 = <h0> + <h1> + <h_vac>`.
pub fn check_double_click_bound(vecs: &EveVectors, stats: &ObservedStatistics) -> bool {
    let half = 0.5 * stats.p_double;
    let h0 = norm_sqr(&vecs.h0);
    let h1 = norm_sqr(&vecs.h1);
    let hv = norm_sqr(&vecs.h_vac);
    h0 <= half + tolerance::ASSERT
        && h1 <= half + tolerance::ASSERT
        && abs(half - (h0 + h1 + hv)) <= tolerance::ASSERT
}

/// Looks up a field by its name in [`ObservedStatistics::FIELD_NAMES`].
pub fn field(stats: &ObservedStatistics, name: &str) -> Option<f64> {
    ObservedStatistics::FIELD_NAMES
        .iter()
        .position(|n| *n == name)
        .map(|i| stats.values()[i])
}

#[cfg(test)]
mod tests;
