//! Truncated two-mode Fock space.
//!
//! A composite ket is `|m1,m0>_B |n1,n0>_{A_anc} |k>_E`: Bob's photonic
//! register, Alice's ancilla (which receives whatever she swaps out), and a
//! finite Eve ancilla indexed by `k`. States are sparse maps from composite
//! kets to complex amplitudes.
//!
//! Detectors are on/off: any number of photons in a mode produces one click,
//! and photons in both modes produce a double click.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{abs, sqrt};
use crate::tolerance;
use crate::{Error, Result};

/// Default per-mode photon truncation.
pub const DEFAULT_N_MAX: u8 = 4;

/// Fock label `|m1, m0>`: `m1` photons in the `|1>` mode, `m0` in the `|0>` mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FockLabel {
    /// Photons in the `|1>` mode.
    pub m1: u8,
    /// Photons in the `|0>` mode.
    pub m0: u8,
}

impl FockLabel {
    /// `|0,0>`.
    pub const VACUUM: Self = Self::new(0, 0);
    /// `|0,1>`: one photon in the `|0>` mode.
    pub const ZERO: Self = Self::new(0, 1);
    /// `|1,0>`: one photon in the `|1>` mode.
    pub const ONE: Self = Self::new(1, 0);

    /// Builds `|m1, m0>`.
    pub const fn new(m1: u8, m0: u8) -> Self {
        Self { m1, m0 }
    }

    /// Total photon number.
    pub const fn photons(self) -> u32 {
        self.m1 as u32 + self.m0 as u32
    }

    /// Whether both modes are empty.
    pub const fn is_vacuum(self) -> bool {
        self.m1 == 0 && self.m0 == 0
    }

    /// Detector outcome of a computational-basis measurement of this label.
    pub const fn click(self) -> Outcome {
        match (self.m1 > 0, self.m0 > 0) {
            (false, false) => Outcome::Vacuum,
            (false, true) => Outcome::ClickZero,
            (true, false) => Outcome::ClickOne,
            (true, true) => Outcome::DoubleClick,
        }
    }
}

/// Truncation and Eve-ancilla dimension shared by a family of states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    n_max: u8,
    eve_dim: usize,
}

impl FockSpace {
    /// A space with per-mode truncation `n_max` and Eve dimension `eve_dim >= 1`.
    pub fn new(n_max: u8, eve_dim: usize) -> Result<Self> {
        if eve_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "eve_dim",
                value: 0.0,
            });
        }
        Ok(Self { n_max, eve_dim })
    }

    /// Per-mode truncation.
    pub fn n_max(&self) -> u8 {
        self.n_max
    }

    /// Eve ancilla dimension.
    pub fn eve_dim(&self) -> usize {
        self.eve_dim
    }

    /// Same truncation, different Eve dimension.
    pub fn with_eve_dim(self, eve_dim: usize) -> Result<Self> {
        Self::new(self.n_max, eve_dim)
    }

    fn check_label(&self, label: FockLabel) -> Result<()> {
        if label.m1 > self.n_max || label.m0 > self.n_max {
            return Err(Error::LabelOutOfRange {
                label,
                n_max: self.n_max,
            });
        }
        Ok(())
    }

    fn check(&self, ket: &BasisKet) -> Result<()> {
        self.check_label(ket.bob)?;
        self.check_label(ket.alice)?;
        if ket.eve >= self.eve_dim {
            return Err(Error::EveIndexOutOfRange {
                index: ket.eve,
                dim: self.eve_dim,
            });
        }
        Ok(())
    }
}

/// Composite basis ket `|bob>_B |alice>_{A_anc} |eve>_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKet {
    /// Bob's photonic register.
    pub bob: FockLabel,
    /// Alice's ancilla register.
    pub alice: FockLabel,
    /// Eve ancilla basis index.
    pub eve: usize,
}

impl BasisKet {
    /// Builds a composite ket.
    pub const fn new(bob: FockLabel, alice: FockLabel, eve: usize) -> Self {
        Self { bob, alice, eve }
    }

    /// A ket with Alice's ancilla in the vacuum.
    pub const fn bob(bob: FockLabel, eve: usize) -> Self {
        Self::new(bob, FockLabel::VACUUM, eve)
    }

    fn register(&self, register: Register) -> FockLabel {
        match register {
            Register::Bob => self.bob,
            Register::AliceAncilla => self.alice,
        }
    }
}

/// Sparse complex state over composite kets.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    space: FockSpace,
    amplitudes: BTreeMap<BasisKet, Complex64>,
    normalized: bool,
}

impl FockState {
    /// The zero vector.
    pub fn zero(space: FockSpace) -> Self {
        Self {
            space,
            amplitudes: BTreeMap::new(),
            normalized: false,
        }
    }

    /// A single basis ket with amplitude one.
    pub fn basis(space: FockSpace, ket: BasisKet) -> Result<Self> {
        Self::from_amplitudes(space, [(ket, Complex64::new(1.0, 0.0))])
    }

    /// Collects amplitudes, summing repeated kets and dropping exact zeros.
    pub fn from_amplitudes<I>(space: FockSpace, amplitudes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisKet, Complex64)>,
    {
        let mut state = Self::zero(space);
        for (ket, amp) in amplitudes {
            space.check(&ket)?;
            state.accumulate(ket, amp);
        }
        state.prune();
        Ok(state)
    }

    pub(crate) fn accumulate(&mut self, ket: BasisKet, amp: Complex64) {
        *self
            .amplitudes
            .entry(ket)
            .or_insert(Complex64::new(0.0, 0.0)) += amp;
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.re != 0.0 || a.im != 0.0);
    }

    /// Truncation and Eve dimension.
    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Number of stored components.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    /// Whether no component is stored.
    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitude of `ket` (zero if absent).
    pub fn amplitude(&self, ket: &BasisKet) -> Complex64 {
        self.amplitudes
            .get(ket)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Iterates stored components in ket order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisKet, &Complex64)> {
        self.amplitudes.iter()
    }

    /// `<v|v>`.
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Whether unit norm has been asserted for this state.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Asserts unit norm within [`tolerance::ASSERT`] and sets the flag.
    pub fn assert_normalized(mut self) -> Result<Self> {
        let n = self.norm_squared();
        if abs(n - 1.0) > tolerance::ASSERT {
            return Err(Error::NotNormalized(n));
        }
        self.normalized = true;
        Ok(self)
    }

    /// Rescales to unit norm.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_squared();
        if n <= 0.0 {
            return Err(Error::DegenerateState);
        }
        let mut out = self.scale(Complex64::new(1.0 / sqrt(n), 0.0));
        out.normalized = true;
        Ok(out)
    }

    /// `c * v`.
    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.space);
        for (ket, amp) in &self.amplitudes {
            out.amplitudes.insert(*ket, amp * c);
        }
        out.prune();
        out
    }

    /// Keeps only components whose ket satisfies `keep` (an orthogonal projection).
    pub fn filter(&self, mut keep: impl FnMut(&BasisKet) -> bool) -> Self {
        Self {
            space: self.space,
            amplitudes: self
                .amplitudes
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, a)| (*k, *a))
                .collect(),
            normalized: false,
        }
    }

    /// Unnormalized post-measurement branch for a computational-basis
    /// detector outcome on `register`.
    pub fn project(&self, register: Register, outcome: Outcome) -> Self {
        self.filter(|ket| ket.register(register).click() == outcome)
    }

    /// Applies a relabeling of kets, summing colliding amplitudes.
    pub fn map_kets(
        &self,
        space: FockSpace,
        mut f: impl FnMut(&BasisKet) -> BasisKet,
    ) -> Result<Self> {
        Self::from_amplitudes(space, self.amplitudes.iter().map(|(k, a)| (f(k), *a)))
    }
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &FockState, b: &FockState) -> Result<Complex64> {
    if a.space.eve_dim != b.space.eve_dim {
        return Err(Error::DimensionMismatch {
            what: "eve ancilla",
            left: a.space.eve_dim,
            right: b.space.eve_dim,
        });
    }
    if a.space.n_max != b.space.n_max {
        return Err(Error::DimensionMismatch {
            what: "fock truncation",
            left: a.space.n_max as usize,
            right: b.space.n_max as usize,
        });
    }
    let (small, large, conj_small) = if a.len() <= b.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (ket, amp) in &small.amplitudes {
        if let Some(other) = large.amplitudes.get(ket) {
            acc += if conj_small {
                amp.conj() * other
            } else {
                other.conj() * amp
            };
        }
    }
    Ok(acc)
}

/// Hadamard-basis single-photon state: `|+> = |0,1>_x`, `|-> = |1,0>_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum HadamardLabel {
    /// `(|0,1> + |1,0>)/sqrt2`.
    Plus,
    /// `(|0,1> - |1,0>)/sqrt2`.
    Minus,
}

/// Bob-register ket after rewriting single photons in the Hadamard basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HadamardKet {
    /// `|0,0>`.
    Vacuum,
    /// `|+>` or `|->`.
    Single(HadamardLabel),
    /// Multi-photon component, left in the computational Fock basis.
    Residual(FockLabel),
}

/// State whose Bob register is expressed over [`HadamardKet`].
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardState {
    amplitudes: BTreeMap<(HadamardKet, FockLabel, usize), Complex64>,
}

impl HadamardState {
    /// Amplitude of `(bob, alice, eve)`.
    pub fn amplitude(&self, bob: HadamardKet, alice: FockLabel, eve: usize) -> Complex64 {
        self.amplitudes
            .get(&(bob, alice, eve))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Stored components.
    pub fn iter(&self) -> impl Iterator<Item = (&(HadamardKet, FockLabel, usize), &Complex64)> {
        self.amplitudes.iter()
    }

    /// Squared norm.
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Total weight on Bob kets equal to `bob`.
    pub fn weight(&self, bob: HadamardKet) -> f64 {
        self.amplitudes
            .iter()
            .filter(|((b, _, _), _)| *b == bob)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Rewrites Bob's single-photon components with
/// `|0,1> = (|+> + |->)/sqrt2` and `|1,0> = (|+> - |->)/sqrt2`.
pub fn to_hadamard_amplitudes(v: &FockState) -> HadamardState {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut amplitudes: BTreeMap<_, Complex64> = BTreeMap::new();
    let mut add = |key, amp| {
        *amplitudes.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;
    };
    for (ket, &amp) in v.iter() {
        let plus = (HadamardKet::Single(HadamardLabel::Plus), ket.alice, ket.eve);
        let minus = (
            HadamardKet::Single(HadamardLabel::Minus),
            ket.alice,
            ket.eve,
        );
        match ket.bob {
            FockLabel::VACUUM => add((HadamardKet::Vacuum, ket.alice, ket.eve), amp),
            FockLabel::ZERO => {
                add(plus, amp * h);
                add(minus, amp * h);
            }
            FockLabel::ONE => {
                add(plus, amp * h);
                add(minus, -amp * h);
            }
            other => add((HadamardKet::Residual(other), ket.alice, ket.eve), amp),
        }
    }
    amplitudes.retain(|_, a| a.re != 0.0 || a.im != 0.0);
    HadamardState { amplitudes }
}

/// Which register a measurement acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Register {
    /// Bob's photonic register.
    Bob,
    /// Alice's ancilla.
    AliceAncilla,
}

/// Measurement basis for a two-mode register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementBasis {
    /// Detectors on the `|0>` and `|1>` modes.
    Computational,
    /// Detectors on the `|+>` and `|->` modes.
    Hadamard,
}

/// Detector outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// Neither detector clicks.
    Vacuum,
    /// Only the `|0>`-mode detector clicks.
    ClickZero,
    /// Only the `|1>`-mode detector clicks.
    ClickOne,
    /// Only the `|+>` detector clicks.
    Plus,
    /// Only the `|->` detector clicks.
    Minus,
    /// Both detectors click.
    DoubleClick,
}

/// Outcome probabilities of one basis measurement; entries sum to the
/// squared norm of the measured state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeProbabilities {
    basis: MeasurementBasis,
    // vacuum, first single click, second single click, double click
    slots: [f64; 4],
}

impl OutcomeProbabilities {
    fn slot(basis: MeasurementBasis, outcome: Outcome) -> Option<usize> {
        use MeasurementBasis::*;
        use Outcome::*;
        match (basis, outcome) {
            (_, Vacuum) => Some(0),
            (Computational, ClickZero) | (Hadamard, Plus) => Some(1),
            (Computational, ClickOne) | (Hadamard, Minus) => Some(2),
            (_, DoubleClick) => Some(3),
            _ => None,
        }
    }

    /// Possible outcomes of `basis`, in slot order.
    pub fn outcomes(basis: MeasurementBasis) -> [Outcome; 4] {
        match basis {
            MeasurementBasis::Computational => [
                Outcome::Vacuum,
                Outcome::ClickZero,
                Outcome::ClickOne,
                Outcome::DoubleClick,
            ],
            MeasurementBasis::Hadamard => [
                Outcome::Vacuum,
                Outcome::Plus,
                Outcome::Minus,
                Outcome::DoubleClick,
            ],
        }
    }

    /// Basis measured.
    pub fn basis(&self) -> MeasurementBasis {
        self.basis
    }

    /// Probability of `outcome`; zero for outcomes of the other basis.
    pub fn get(&self, outcome: Outcome) -> f64 {
        Self::slot(self.basis, outcome).map_or(0.0, |i| self.slots[i])
    }

    /// Sum over all outcomes.
    pub fn total(&self) -> f64 {
        self.slots.iter().sum()
    }

    /// `(outcome, probability)` pairs in slot order.
    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        Self::outcomes(self.basis)
            .into_iter()
            .zip(self.slots.iter().copied())
    }

    pub(crate) fn zero(basis: MeasurementBasis) -> Self {
        Self {
            basis,
            slots: [0.0; 4],
        }
    }
}

/// Born-rule probabilities for measuring `register` of `v` in `basis`.
///
/// The state is not renormalized, so the probabilities sum to `<v|v>`. In the
/// Hadamard basis multi-photon components go through the 50:50 mode
/// transformation before the detectors.
pub fn measurement_probabilities(
    v: &FockState,
    register: Register,
    basis: MeasurementBasis,
) -> Result<OutcomeProbabilities> {
    if v.norm_squared() <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let mut probs = OutcomeProbabilities::zero(basis);
    match basis {
        MeasurementBasis::Computational => {
            for (ket, amp) in v.iter() {
                let slot = OutcomeProbabilities::slot(basis, ket.register(register).click())
                    .expect("computational outcome");
                probs.slots[slot] += amp.norm_sqr();
            }
        }
        MeasurementBasis::Hadamard => {
            // (n_plus, n_minus, other register, eve) -> amplitude
            let mut modes: BTreeMap<(u8, u8, FockLabel, usize), Complex64> = BTreeMap::new();
            for (ket, &amp) in v.iter() {
                let (measured, other) = match register {
                    Register::Bob => (ket.bob, ket.alice),
                    Register::AliceAncilla => (ket.alice, ket.bob),
                };
                for ((np, nm), c) in hadamard_modes(measured) {
                    *modes
                        .entry((np, nm, other, ket.eve))
                        .or_insert(Complex64::new(0.0, 0.0)) += amp * c;
                }
            }
            for ((np, nm, _, _), amp) in modes {
                let slot = match (np > 0, nm > 0) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (true, true) => 3,
                };
                probs.slots[slot] += amp.norm_sqr();
            }
        }
    }
    Ok(probs)
}

/// Expansion of `|m1, m0>` over Hadamard-mode occupations `|n_plus, n_minus>`,
/// using `a0^+ = (b+^+ + b-^+)/sqrt2` and `a1^+ = (b+^+ - b-^+)/sqrt2`.
pub fn hadamard_modes(label: FockLabel) -> Vec<((u8, u8), f64)> {
    let (m1, m0) = (label.m1 as u32, label.m0 as u32);
    let n = m1 + m0;
    let norm = sqrt(factorial(m1) * factorial(m0)) * crate::math::powf(2.0, n as f64 / 2.0);
    let mut out = Vec::new();
    for a in 0..=n {
        let b = n - a;
        let mut coeff = 0.0;
        for i in 0..=m1.min(a) {
            let j = a - i;
            if j > m0 {
                continue;
            }
            let sign = if (m1 - i) % 2 == 0 { 1.0 } else { -1.0 };
            coeff += sign * binomial(m1, i) * binomial(m0, j);
        }
        if coeff != 0.0 {
            let c = coeff * sqrt(factorial(a) * factorial(b)) / norm;
            out.push(((a as u8, b as u8), c));
        }
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}
