//! Eve's collective attack.
//!
//! The forward attack replaces Bob's photon by a state
//! `sum |m1,m0>_B |e_{m1,m0}>_E`, possibly multi-photon. The reverse attack is
//! an isometry that returns at most one photon to Bob:
//! `U_R |m1,m0>_B |k>_E = |0,1>|g01> + |1,0>|g10> + |0,0>|g00>`, defined on
//! the `(label, k)` inputs the protocol can produce.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fock::{BasisKet, FockLabel, FockSpace, FockState, DEFAULT_N_MAX};
use crate::math::{abs, sqrt};
use crate::tolerance;
use crate::{Error, Result};

/// Vector in Eve's ancilla space.
pub type EveVector = Vec<Complex64>;

pub(crate) fn zero_vector(dim: usize) -> EveVector {
    vec![Complex64::new(0.0, 0.0); dim]
}

pub(crate) fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub(crate) fn axpy(acc: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += alpha * v;
    }
}

/// Forward-channel state `|psi0> = sum_{m1,m0} |m1,m0>_B |e_{m1,m0}>_E`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstAttack {
    eve_dim: usize,
    injected: BTreeMap<FockLabel, EveVector>,
}

impl FirstAttack {
    /// Validates vector lengths and that `|psi0>` is normalized.
    pub fn new(eve_dim: usize, injected: BTreeMap<FockLabel, EveVector>) -> Result<Self> {
        if eve_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "eve_dim",
                value: 0.0,
            });
        }
        for v in injected.values() {
            if v.len() != eve_dim {
                return Err(Error::DimensionMismatch {
                    what: "injected eve vector",
                    left: v.len(),
                    right: eve_dim,
                });
            }
        }
        let total: f64 = injected.values().map(|v| norm_sqr(v)).sum();
        if abs(total - 1.0) > tolerance::ASSERT {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { eve_dim, injected })
    }

    /// Eve ancilla dimension.
    pub fn eve_dim(&self) -> usize {
        self.eve_dim
    }

    /// `|e_{m1,m0}>`, if the label is injected.
    pub fn injected(&self, label: FockLabel) -> Option<&[Complex64]> {
        self.injected.get(&label).map(Vec::as_slice)
    }

    /// Injected components in label order.
    pub fn iter(&self) -> impl Iterator<Item = (FockLabel, &[Complex64])> {
        self.injected.iter().map(|(l, v)| (*l, v.as_slice()))
    }

    /// Largest per-mode photon number present.
    pub fn max_photons_per_mode(&self) -> u8 {
        self.injected
            .keys()
            .map(|l| l.m1.max(l.m0))
            .max()
            .unwrap_or(0)
    }

    /// `|psi0>` with Alice's ancilla in the vacuum.
    pub fn to_state(&self, n_max: u8) -> Result<FockState> {
        let space = FockSpace::new(n_max, self.eve_dim)?;
        FockState::from_amplitudes(
            space,
            self.injected.iter().flat_map(|(label, v)| {
                v.iter()
                    .enumerate()
                    .map(move |(k, a)| (BasisKet::bob(*label, k), *a))
            }),
        )?
        .assert_normalized()
    }
}

/// Output of `U_R` on one input, split by the photon returned to Bob.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnTriple {
    /// Eve's state attached to `|0,1>_B`.
    pub g01: EveVector,
    /// Eve's state attached to `|1,0>_B`.
    pub g10: EveVector,
    /// Eve's state attached to `|0,0>_B`.
    pub g00: EveVector,
}

impl ReturnTriple {
    /// Zero triple in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Self {
            g01: zero_vector(dim),
            g10: zero_vector(dim),
            g00: zero_vector(dim),
        }
    }

    fn parts(&self) -> [(FockLabel, &EveVector); 3] {
        [
            (FockLabel::ZERO, &self.g01),
            (FockLabel::ONE, &self.g10),
            (FockLabel::VACUUM, &self.g00),
        ]
    }

    /// Sum of the three squared norms.
    pub fn norm_squared(&self) -> f64 {
        norm_sqr(&self.g01) + norm_sqr(&self.g10) + norm_sqr(&self.g00)
    }

    /// Inner product of the full outputs (Bob kets are orthogonal).
    pub fn inner(&self, other: &Self) -> Complex64 {
        vdot(&self.g01, &other.g01) + vdot(&self.g10, &other.g10) + vdot(&self.g00, &other.g00)
    }

    fn add_scaled(&mut self, alpha: Complex64, other: &Self) {
        axpy(&mut self.g01, alpha, &other.g01);
        axpy(&mut self.g10, alpha, &other.g10);
        axpy(&mut self.g00, alpha, &other.g00);
    }
}

/// Reverse-channel isometry `U_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondAttack {
    input_dim: usize,
    output_dim: usize,
    action: BTreeMap<(FockLabel, usize), ReturnTriple>,
}

impl SecondAttack {
    /// Checks shapes only; see [`verify_isometry`] for the isometry conditions.
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        action: BTreeMap<(FockLabel, usize), ReturnTriple>,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "eve_dim",
                value: 0.0,
            });
        }
        for (&(_, k), t) in &action {
            if k >= input_dim {
                return Err(Error::EveIndexOutOfRange {
                    index: k,
                    dim: input_dim,
                });
            }
            for (_, v) in t.parts() {
                if v.len() != output_dim {
                    return Err(Error::DimensionMismatch {
                        what: "reverse attack output",
                        left: v.len(),
                        right: output_dim,
                    });
                }
            }
        }
        Ok(Self {
            input_dim,
            output_dim,
            action,
        })
    }

    /// Eve dimension accepted on input.
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Eve dimension after the attack.
    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Action on the basis input `|label>_B |k>_E`.
    pub fn action(&self, label: FockLabel, k: usize) -> Option<&ReturnTriple> {
        self.action.get(&(label, k))
    }

    /// Defined inputs in order.
    pub fn inputs(&self) -> impl Iterator<Item = (&(FockLabel, usize), &ReturnTriple)> {
        self.action.iter()
    }

    /// `U_R |label>_B |eve>_E`, split into the `g` vectors.
    pub fn apply(&self, label: FockLabel, eve: &[Complex64]) -> Result<ReturnTriple> {
        if eve.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                what: "reverse attack input",
                left: eve.len(),
                right: self.input_dim,
            });
        }
        let mut out = ReturnTriple::zero(self.output_dim);
        for (k, &amp) in eve.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let t = self
                .action(label, k)
                .ok_or(Error::UndefinedReverseInput { label, eve: k })?;
            out.add_scaled(amp, t);
        }
        Ok(out)
    }

    /// Applies `U_R` to Bob's register and Eve's ancilla of `state`, leaving
    /// Alice's ancilla untouched.
    pub fn apply_to_state(&self, state: &FockState) -> Result<FockState> {
        let space = state.space();
        if space.eve_dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                what: "reverse attack input",
                left: space.eve_dim(),
                right: self.input_dim,
            });
        }
        let out_space = FockSpace::new(space.n_max().max(1), self.output_dim)?;
        let mut out = FockState::zero(out_space);
        for (ket, &amp) in state.iter() {
            let t = self
                .action(ket.bob, ket.eve)
                .ok_or(Error::UndefinedReverseInput {
                    label: ket.bob,
                    eve: ket.eve,
                })?;
            for (bob, v) in t.parts() {
                for (i, g) in v.iter().enumerate() {
                    if g.norm_sqr() != 0.0 {
                        out.accumulate(BasisKet::new(bob, ket.alice, i), amp * g);
                    }
                }
            }
        }
        // re-run validation and pruning
        FockState::from_amplitudes(out_space, out.iter().map(|(k, a)| (*k, *a)))
    }
}

/// Both stages of a collective attack.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackModel {
    /// Forward-channel state.
    pub first: FirstAttack,
    /// Reverse-channel isometry.
    pub second: SecondAttack,
}

/// Whether every defined input maps to a unit vector and distinct inputs map
/// to orthogonal vectors, within [`tolerance::ASSERT`].
pub fn verify_isometry(attack: &SecondAttack) -> bool {
    let outputs: Vec<&ReturnTriple> = attack.action.values().collect();
    for (i, a) in outputs.iter().enumerate() {
        if a.parts().iter().any(|(_, v)| v.len() != attack.output_dim) {
            return false;
        }
        if abs(a.norm_squared() - 1.0) > tolerance::ASSERT {
            return false;
        }
        for b in &outputs[i + 1..] {
            if a.inner(b).norm() > tolerance::ASSERT {
                return false;
            }
        }
    }
    true
}

/// Depolarizing-plus-loss channel parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseChannelSpec {
    /// Raw-key round error rate, in `[0, 0.5]`.
    pub qz: f64,
    /// Test round error rate, in `[0, 0.5]`.
    pub qx: f64,
    /// Forward-channel loss probability, in `[0, 1]`.
    pub loss_forward: f64,
    /// Reverse-channel loss probability, in `[0, 1]`.
    pub loss_reverse: f64,
}

impl NoiseChannelSpec {
    /// Validated constructor.
    pub fn new(qz: f64, qx: f64, loss_forward: f64, loss_reverse: f64) -> Result<Self> {
        let spec = Self {
            qz,
            qx,
            loss_forward,
            loss_reverse,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Lossless channel.
    pub fn lossless(qz: f64, qx: f64) -> Result<Self> {
        Self::new(qz, qx, 0.0, 0.0)
    }

    /// Checks every field range.
    pub fn validate(&self) -> Result<()> {
        check_range("qz", self.qz, 0.0, 0.5)?;
        check_range("qx", self.qx, 0.0, 0.5)?;
        check_range("loss_forward", self.loss_forward, 0.0, 1.0)?;
        check_range("loss_reverse", self.loss_reverse, 0.0, 1.0)
    }
}

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) {
        return Err(Error::InvalidParameter { name, value });
    }
    Ok(())
}

/// Dilates the depolarizing-plus-loss channel into a single-photon collective
/// attack.
///
/// Eve sends `|0,1>|e01> + |1,0>|e10>` (plus `|0,0>` on forward loss) with
/// `<e01|e01> = <e10|e10> = (1 - p_F)/2`. On the way back she keeps the photon
/// with amplitude `sqrt(1 - Q_Z)` and flips it with amplitude `sqrt(Q_Z)`,
/// tagging the two branches with ancilla pairs `{u, v}` and `{w, z}` spanning
/// orthogonal planes, `<u|v> = <w|z> = 1 - 2 Q_X`. The overlap sets the
/// coherence seen in test rounds and the plane split keeps raw-key bits
/// uncorrelated with Bob's Hadamard outcomes. Reverse loss routes the photon
/// onto Bob's vacuum with an orthogonal flag per input.
pub fn build_depolarizing_attack(spec: &NoiseChannelSpec) -> Result<AttackModel> {
    spec.validate()?;
    const U: usize = 0;
    const V: usize = 1;
    const W: usize = 2;
    const Z: usize = 3;
    const FLAG_VAC: usize = 4;
    const FLAG_01: usize = 5;
    const FLAG_10: usize = 6;
    const OUT_DIM: usize = 7;
    const IN_DIM: usize = 3;

    let c = |x: f64| Complex64::new(x, 0.0);
    let cos = 1.0 - 2.0 * spec.qx;
    let sin = sqrt((1.0 - cos * cos).max(0.0));

    let photon = sqrt((1.0 - spec.loss_forward) / 2.0);
    let mut injected = BTreeMap::new();
    let unit = |k: usize, a: f64| {
        let mut v = zero_vector(IN_DIM);
        v[k] = c(a);
        v
    };
    injected.insert(FockLabel::ZERO, unit(0, photon));
    injected.insert(FockLabel::ONE, unit(1, photon));
    injected.insert(FockLabel::VACUUM, unit(2, sqrt(spec.loss_forward)));
    let first = FirstAttack::new(IN_DIM, injected)?;

    let keep = sqrt(1.0 - spec.loss_reverse);
    let lost = sqrt(spec.loss_reverse);
    let same = keep * sqrt(1.0 - spec.qz);
    let flip = keep * sqrt(spec.qz);

    // u = e_U, v = cos e_U + sin e_V, w = e_W, z = cos e_W + sin e_Z
    let mut from_zero = ReturnTriple::zero(OUT_DIM);
    from_zero.g01[U] = c(same);
    from_zero.g10[W] = c(flip);
    from_zero.g00[FLAG_01] = c(lost);

    let mut from_one = ReturnTriple::zero(OUT_DIM);
    from_one.g01[W] = c(flip * cos);
    from_one.g01[Z] = c(flip * sin);
    from_one.g10[U] = c(same * cos);
    from_one.g10[V] = c(same * sin);
    from_one.g00[FLAG_10] = c(lost);

    let mut from_vacuum = ReturnTriple::zero(OUT_DIM);
    from_vacuum.g00[FLAG_VAC] = c(1.0);

    let mut action = BTreeMap::new();
    action.insert((FockLabel::ZERO, 0), from_zero);
    action.insert((FockLabel::ONE, 1), from_one);
    action.insert((FockLabel::VACUUM, 2), from_vacuum);
    let second = SecondAttack::new(IN_DIM, OUT_DIM, action)?;

    Ok(AttackModel { first, second })
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(
        rng.random::<f64>() * 2.0 - 1.0,
        rng.random::<f64>() * 2.0 - 1.0,
    )
}

/// Deterministic random attack: a normalized forward state on every label with
/// at most `cap` photons per mode, and a reverse isometry defined on every
/// `(label, k)` input, built by Gram-Schmidt on random columns.
pub fn random_attack(seed: u64, eve_dim: usize, cap: u8) -> Result<AttackModel> {
    if eve_dim == 0 {
        return Err(Error::InvalidParameter {
            name: "eve_dim",
            value: 0.0,
        });
    }
    if cap > DEFAULT_N_MAX {
        return Err(Error::InvalidParameter {
            name: "cap",
            value: f64::from(cap),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let labels: Vec<FockLabel> = (0..=cap)
        .flat_map(|m1| (0..=cap).map(move |m0| FockLabel::new(m1, m0)))
        .collect();
    let mut injected: BTreeMap<FockLabel, EveVector> = labels
        .iter()
        .map(|&l| {
            // spread the weights so some labels dominate
            let scale = rng.random::<f64>();
            let v = (0..eve_dim)
                .map(|_| random_complex(&mut rng) * scale)
                .collect();
            (l, v)
        })
        .collect();
    let total: f64 = injected.values().map(|v| norm_sqr(v)).sum();
    let inv = 1.0 / sqrt(total);
    for v in injected.values_mut() {
        v.iter_mut().for_each(|a| *a *= inv);
    }
    let first = FirstAttack::new(eve_dim, injected)?;

    let inputs: Vec<(FockLabel, usize)> = labels
        .iter()
        .flat_map(|&l| (0..eve_dim).map(move |k| (l, k)))
        .collect();
    let output_dim = inputs.len();
    let columns = orthonormal_columns(&mut rng, inputs.len(), 3 * output_dim);
    let action = inputs
        .into_iter()
        .zip(columns)
        .map(|(input, col)| {
            let triple = ReturnTriple {
                g01: col[..output_dim].to_vec(),
                g10: col[output_dim..2 * output_dim].to_vec(),
                g00: col[2 * output_dim..].to_vec(),
            };
            (input, triple)
        })
        .collect();
    let second = SecondAttack::new(eve_dim, output_dim, action)?;
    Ok(AttackModel { first, second })
}

// Modified Gram-Schmidt with one reorthogonalization pass.
fn orthonormal_columns(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<EveVector> {
    let mut basis: Vec<EveVector> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: EveVector = (0..dim).map(|_| random_complex(rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let proj = vdot(b, &v);
                axpy(&mut v, -proj, b);
            }
        }
        let n = sqrt(norm_sqr(&v));
        if n < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= n);
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depolarizing_attack_is_isometric() {
        for (qz, qx, pf, pr) in [
            (0.0, 0.0, 0.0, 0.0),
            (0.1, 0.3, 0.2, 0.7),
            (0.5, 0.5, 0.0, 0.0),
            (0.2, 0.0, 1.0, 1.0),
        ] {
            let spec = NoiseChannelSpec::new(qz, qx, pf, pr).unwrap();
            let attack = build_depolarizing_attack(&spec).unwrap();
            assert!(verify_isometry(&attack.second), "{spec:?}");
        }
    }

    #[test]
    fn noise_spec_ranges() {
        assert!(NoiseChannelSpec::new(0.51, 0.0, 0.0, 0.0).is_err());
        assert!(NoiseChannelSpec::new(0.1, -0.1, 0.0, 0.0).is_err());
        assert!(NoiseChannelSpec::new(0.1, 0.1, 1.2, 0.0).is_err());
        assert!(NoiseChannelSpec::new(0.1, 0.1, 0.0, f64::NAN).is_err());
        assert!(NoiseChannelSpec::new(0.5, 0.5, 1.0, 0.0).is_ok());
    }

    #[test]
    fn identity_like_attack_passes() {
        let mut action = BTreeMap::new();
        let mut t = ReturnTriple::zero(1);
        t.g00[0] = Complex64::new(1.0, 0.0);
        action.insert((FockLabel::VACUUM, 0), t);
        let attack = SecondAttack::new(1, 1, action).unwrap();
        assert!(verify_isometry(&attack));
    }

    #[test]
    fn norm_deficit_fails() {
        let mut action = BTreeMap::new();
        let mut t = ReturnTriple::zero(2);
        t.g01[0] = Complex64::new(sqrt(0.5), 0.0);
        t.g10[1] = Complex64::new(sqrt(0.2), 0.0);
        t.g00[0] = Complex64::new(sqrt(0.1), 0.0);
        action.insert((FockLabel::ZERO, 0), t);
        let attack = SecondAttack::new(1, 2, action).unwrap();
        assert!(!verify_isometry(&attack));
    }

    #[test]
    fn overlapping_outputs_fail() {
        let mut action = BTreeMap::new();
        let mut t = ReturnTriple::zero(1);
        t.g01[0] = Complex64::new(1.0, 0.0);
        action.insert((FockLabel::ZERO, 0), t.clone());
        action.insert((FockLabel::ONE, 0), t);
        let attack = SecondAttack::new(1, 1, action).unwrap();
        assert!(!verify_isometry(&attack));
    }

    #[test]
    fn random_attack_properties() {
        let a = random_attack(1, 2, 2).unwrap();
        assert!(verify_isometry(&a.second));
        assert_eq!(a, random_attack(1, 2, 2).unwrap());
        assert_ne!(a, random_attack(3, 2, 2).unwrap());

        let b = random_attack(2, 1, 0).unwrap();
        assert_eq!(b.first.iter().count(), 1);
        assert!(b.first.injected(FockLabel::VACUUM).is_some());
        assert!(verify_isometry(&b.second));

        assert!(random_attack(1, 0, 1).is_err());
        assert!(random_attack(1, 1, DEFAULT_N_MAX + 1).is_err());
    }

    #[test]
    fn first_attack_must_be_normalized() {
        let mut m = BTreeMap::new();
        m.insert(FockLabel::ZERO, vec![Complex64::new(0.5, 0.0)]);
        assert!(matches!(
            FirstAttack::new(1, m.clone()),
            Err(Error::NotNormalized(_))
        ));
        m.insert(
            FockLabel::ONE,
            vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)],
        );
        assert!(matches!(
            FirstAttack::new(1, m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_requires_defined_inputs() {
        let a = build_depolarizing_attack(&NoiseChannelSpec::lossless(0.1, 0.1).unwrap()).unwrap();
        let mut e = zero_vector(3);
        e[1] = Complex64::new(1.0, 0.0);
        assert_eq!(
            a.second.apply(FockLabel::ZERO, &e),
            Err(Error::UndefinedReverseInput {
                label: FockLabel::ZERO,
                eve: 1
            })
        );
        let psi = a.first.to_state(DEFAULT_N_MAX).unwrap();
        let out = a.second.apply_to_state(&psi).unwrap();
        assert!((out.norm_squared() - 1.0).abs() < 1e-12);
        assert!(out.iter().all(|(k, _)| k.bob.photons() <= 1));
    }
}
