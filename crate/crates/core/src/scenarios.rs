//! The two worked noise scenarios, fiber loss, the BB84 comparison curve and
//! threshold search.

use alloc::vec::Vec;

use crate::adversary::{check_range, NoiseChannelSpec};
use crate::keyrate::{binary_entropy, key_rate, KeyRateResult};
use crate::math::powf;
use crate::statistics::ObservedStatistics;
use crate::{Error, Result};

/// Upper end of the threshold bracket.
pub const THRESHOLD_BRACKET: f64 = 0.25;

/// Default fiber loss coefficient in dB/km.
pub const DEFAULT_ALPHA: f64 = 0.15;

/// Relation between `Q_X` and `Q_Z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NoiseModel {
    /// `Q_X = Q_Z`.
    #[default]
    Dependent,
    /// `Q_X = 2 Q_Z (1 - Q_Z)`.
    Independent,
    /// `Q_X` given directly.
    Explicit,
}

/// Where the loss probabilities come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LossMode {
    /// Lossless.
    #[default]
    None,
    /// `p_loss_forward` and `p_loss_reverse` as given.
    Explicit,
    /// Both directions from [`fiber_loss`].
    Fiber,
}

/// How `alpha * length` turns into a loss probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DbConvention {
    /// `1 - 10^(-alpha l)`.
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "paper-literal"))]
    PaperLiteral,
    /// `1 - 10^(-alpha l / 10)`.
    #[cfg_attr(feature = "serde", serde(rename = "db-per-10"))]
    DbPer10,
}

/// A noise and loss scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    /// Noise model.
    pub model: NoiseModel,
    /// `Q_Z`.
    pub qz: f64,
    /// `Q_X`, read only by [`NoiseModel::Explicit`].
    pub qx: f64,
    /// Loss source.
    pub loss_mode: LossMode,
    /// Forward loss for [`LossMode::Explicit`].
    pub p_loss_forward: f64,
    /// Reverse loss for [`LossMode::Explicit`].
    pub p_loss_reverse: f64,
    /// Fiber loss coefficient (dB/km).
    pub alpha: f64,
    /// Fiber length (km).
    pub length_km: f64,
    /// Fiber loss formula.
    pub db_convention: DbConvention,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: NoiseModel::Dependent,
            qz: 0.0,
            qx: 0.0,
            loss_mode: LossMode::None,
            p_loss_forward: 0.0,
            p_loss_reverse: 0.0,
            alpha: DEFAULT_ALPHA,
            length_km: 0.0,
            db_convention: DbConvention::PaperLiteral,
        }
    }
}

impl ScenarioConfig {
    /// Copy with a different `Q_Z`.
    pub fn with_qz(mut self, qz: f64) -> Self {
        self.qz = qz;
        self
    }

    /// `Q_X` implied by the model.
    pub fn effective_qx(&self) -> f64 {
        match self.model {
            NoiseModel::Dependent => self.qz,
            NoiseModel::Independent => 2.0 * self.qz * (1.0 - self.qz),
            NoiseModel::Explicit => self.qx,
        }
    }

    /// `(forward, reverse)` loss probabilities.
    pub fn losses(&self) -> (f64, f64) {
        match self.loss_mode {
            LossMode::None => (0.0, 0.0),
            LossMode::Explicit => (self.p_loss_forward, self.p_loss_reverse),
            LossMode::Fiber => {
                let p = fiber_loss(self.alpha, self.length_km, self.db_convention);
                (p, p)
            }
        }
    }

    /// Checks the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        check_range("qz", self.qz, 0.0, 0.5)?;
        if self.model == NoiseModel::Explicit {
            check_range("qx", self.qx, 0.0, 0.5)?;
        }
        check_range("alpha", self.alpha, 0.0, f64::INFINITY)?;
        check_range("length_km", self.length_km, 0.0, f64::INFINITY)?;
        let (f, r) = self.losses();
        for (name, p) in [("p_loss_forward", f), ("p_loss_reverse", r)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidParameter { name, value: p });
            }
        }
        Ok(())
    }
}

/// Channel parameters for the depolarizing attack that realizes `cfg`.
pub fn noise_spec(cfg: &ScenarioConfig) -> Result<NoiseChannelSpec> {
    cfg.validate()?;
    let (f, r) = cfg.losses();
    NoiseChannelSpec::new(cfg.qz, cfg.effective_qx(), f, r)
}

/// Closed-form statistics of the scenario.
pub fn closed_form_statistics(cfg: &ScenarioConfig) -> Result<ObservedStatistics> {
    cfg.validate()?;
    let (qz, qx) = (cfg.qz, cfg.effective_qx());
    let (f, r) = cfg.losses();
    let eta = (1.0 - f) * (1.0 - r);
    Ok(ObservedStatistics {
        e00: 0.25 * (1.0 - qz) * eta,
        e01: 0.25 * qz * eta,
        e10: 0.25 * qz * eta,
        e11: 0.25 * (1.0 - qz) * eta,
        m_total: 0.5 * eta,
        p0_plus: 0.125 * eta,
        p1_plus: 0.125 * eta,
        p_plus_plus: (1.0 - qx) * eta,
        p_ctrl_0: 0.5 * eta,
        p_ctrl_1: 0.5 * eta,
        p_double: 0.0,
        p_create_0: 0.0,
        p_create_1: 0.0,
    })
}

/// Loss probability of `length_km` of fiber.
pub fn fiber_loss(alpha: f64, length_km: f64, convention: DbConvention) -> f64 {
    let exponent = match convention {
        DbConvention::PaperLiteral => alpha * length_km,
        DbConvention::DbPer10 => alpha * length_km / 10.0,
    };
    1.0 - powf(10.0, -exponent)
}

/// Rate of two BB84 copies, `2 (1 - 2 H2(p))`.
pub fn bb84_baseline(p: f64) -> Result<f64> {
    check_range("bb84 error rate", p, 0.0, 0.5)?;
    Ok(2.0 * (1.0 - 2.0 * binary_entropy(p)?))
}

/// Key rate of the scenario.
pub fn scenario_rate(cfg: &ScenarioConfig, grid_points: usize) -> Result<KeyRateResult> {
    key_rate(&closed_form_statistics(cfg)?, grid_points)
}

/// Bisects the `Q_Z` at which the rate changes sign, over `[0, 0.25]`.
pub fn find_threshold(cfg: &ScenarioConfig, tolerance: f64, grid_points: usize) -> Result<f64> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    let rate = |qz: f64| -> Result<f64> {
        let r = scenario_rate(&cfg.with_qz(qz), grid_points)?;
        Ok(if r.feasible {
            r.rate
        } else {
            f64::NEG_INFINITY
        })
    };
    let (mut lo, mut hi) = (0.0, THRESHOLD_BRACKET);
    if !(rate(lo)? > 0.0 && rate(hi)? < 0.0) {
        return Err(Error::NoSignChange { low: lo, high: hi });
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of a rate curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveRow {
    /// `Q_Z`.
    pub qz: f64,
    /// `Q_X`.
    pub qx: f64,
    /// Rate per raw-key round.
    pub rate: f64,
    /// `rate * M`.
    pub rate_throughput_weighted: f64,
    /// [`bb84_baseline`] at `Q_Z`.
    pub bb84_rate: f64,
    /// Minimized `S(A|E)` bound.
    pub sae_lower: f64,
    /// `H(A|B)`.
    pub h_a_given_b: f64,
    /// Whether the constraints were satisfiable.
    pub feasible: bool,
}

/// Evenly spaced `Q_Z` values, both ends included.
pub fn curve_grid(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: steps as f64,
        });
    }
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                end
            } else {
                start + h * i as f64
            }
        })
        .collect())
}

/// Curve row at `Q_Z = qz`.
pub fn curve_row(cfg: &ScenarioConfig, qz: f64, grid_points: usize) -> Result<CurveRow> {
    let cfg = cfg.with_qz(qz);
    let stats = closed_form_statistics(&cfg)?;
    let r = key_rate(&stats, grid_points)?;
    Ok(CurveRow {
        qz,
        qx: cfg.effective_qx(),
        rate: r.rate,
        rate_throughput_weighted: r.rate * stats.m_total,
        bb84_rate: bb84_baseline(qz)?,
        sae_lower: r.sae_lower,
        h_a_given_b: r.h_a_given_b,
        feasible: r.feasible,
    })
}

/// Rate curve over `steps` evenly spaced `Q_Z` values.
pub fn sweep_curve(
    cfg: &ScenarioConfig,
    start: f64,
    end: f64,
    steps: usize,
    grid_points: usize,
) -> Result<Vec<CurveRow>> {
    curve_grid(start, end, steps)?
        .into_iter()
        .map(|qz| curve_row(cfg, qz, grid_points))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::build_depolarizing_attack;
    use crate::keyrate::DEFAULT_GRID;
    use crate::statistics::analytic_statistics;
    use proptest::prelude::*;

    fn dependent(qz: f64) -> ScenarioConfig {
        ScenarioConfig::default().with_qz(qz)
    }

    #[test]
    fn closed_form_examples() {
        let s = closed_form_statistics(&dependent(0.1)).unwrap();
        assert!((s.e00 - 0.225).abs() < 1e-15 && (s.e11 - 0.225).abs() < 1e-15);
        assert!((s.e01 - 0.025).abs() < 1e-15 && (s.e10 - 0.025).abs() < 1e-15);
        assert_eq!(s.m_total, 0.5);
        assert!((s.p_plus_plus - 0.9).abs() < 1e-15);
        assert_eq!(s.p_ctrl_0, 0.5);
        let z = closed_form_statistics(&dependent(0.0)).unwrap();
        assert_eq!((z.p0_plus, z.p1_plus), (0.125, 0.125));
        let lossy = ScenarioConfig {
            loss_mode: LossMode::Explicit,
            p_loss_forward: 0.5,
            p_loss_reverse: 0.5,
            ..dependent(0.1)
        };
        assert_eq!(closed_form_statistics(&lossy).unwrap().m_total, 0.125);
    }

    #[test]
    fn validation() {
        assert!(dependent(0.6).validate().is_err());
        assert!(dependent(-0.1).validate().is_err());
        let full_loss = ScenarioConfig {
            loss_mode: LossMode::Explicit,
            p_loss_forward: 1.0,
            ..dependent(0.1)
        };
        assert!(full_loss.validate().is_err());
        let bad_alpha = ScenarioConfig {
            alpha: -1.0,
            ..dependent(0.1)
        };
        assert!(bad_alpha.validate().is_err());
        let explicit = ScenarioConfig {
            model: NoiseModel::Explicit,
            qx: 0.7,
            ..dependent(0.1)
        };
        assert!(explicit.validate().is_err());
    }

    #[test]
    fn fiber_examples() {
        assert_eq!(fiber_loss(0.15, 0.0, DbConvention::PaperLiteral), 0.0);
        assert_eq!(fiber_loss(0.15, 0.0, DbConvention::DbPer10), 0.0);
        assert!((fiber_loss(0.15, 10.0, DbConvention::PaperLiteral) - 0.96838).abs() < 1e-5);
        assert!((fiber_loss(0.15, 10.0, DbConvention::DbPer10) - 0.29205).abs() < 1e-5);
    }

    #[test]
    fn bb84_examples() {
        assert_eq!(bb84_baseline(0.0).unwrap(), 2.0);
        assert_eq!(bb84_baseline(0.5).unwrap(), -2.0);
        assert!(bb84_baseline(0.11).unwrap().abs() < 0.01);
        assert!(bb84_baseline(0.6).is_err());
        assert!(bb84_baseline(-0.01).is_err());
    }

    #[test]
    fn thresholds() {
        let dep = find_threshold(&dependent(0.0), 1e-4, DEFAULT_GRID).unwrap();
        assert!((dep - 0.110).abs() <= 0.002, "{dep}");
        let ind_cfg = ScenarioConfig {
            model: NoiseModel::Independent,
            ..dependent(0.0)
        };
        let ind = find_threshold(&ind_cfg, 1e-4, DEFAULT_GRID).unwrap();
        assert!((ind - 0.079).abs() <= 0.002, "{ind}");
        let lossy = ScenarioConfig {
            loss_mode: LossMode::Fiber,
            length_km: 3.0,
            ..dependent(0.0)
        };
        let l = find_threshold(&lossy, 1e-4, DEFAULT_GRID).unwrap();
        assert!((l - dep).abs() <= 0.002, "{l}");
    }

    #[test]
    fn threshold_requires_sign_change() {
        let cfg = ScenarioConfig {
            model: NoiseModel::Explicit,
            qx: 0.5,
            ..dependent(0.0)
        };
        assert!(matches!(
            find_threshold(&cfg, 1e-4, 101),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep_curve(&dependent(0.0), 0.0, 0.15, 4, DEFAULT_GRID).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[0].rate - 1.0).abs() < 1e-9);
        assert!((rows[0].rate_throughput_weighted - 0.5).abs() < 1e-9);
        assert_eq!(rows[3].qz, 0.15);
        let fine = sweep_curve(&dependent(0.0), 0.0, 0.15, 31, 1001).unwrap();
        assert!(fine.windows(2).all(|w| w[1].rate < w[0].rate));
        assert!(sweep_curve(&dependent(0.0), 0.0, 0.1, 1, 101).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn closed_form_matches_attack(
            qz in 0.0..=0.5f64,
            qx in 0.0..=0.5f64,
            pf in 0.0..0.99f64,
            pr in 0.0..0.99f64,
        ) {
            let cfg = ScenarioConfig {
                model: NoiseModel::Explicit,
                qz,
                qx,
                loss_mode: LossMode::Explicit,
                p_loss_forward: pf,
                p_loss_reverse: pr,
                ..ScenarioConfig::default()
            };
            let closed = closed_form_statistics(&cfg).unwrap();
            prop_assert!(closed.validate().is_ok());
            let m = build_depolarizing_attack(&noise_spec(&cfg).unwrap()).unwrap();
            let (exact, _) = analytic_statistics(&m.first, &m.second).unwrap();
            for (a, b) in closed.values().iter().zip(exact.values()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn lossy_equals_lossless(qz in 0.0..0.2f64, len in 0.0..20.0f64) {
            let base = dependent(qz);
            let lossy = ScenarioConfig { loss_mode: LossMode::Fiber, length_km: len, db_convention: DbConvention::DbPer10, ..base };
            let a = scenario_rate(&base, 1001).unwrap();
            let b = scenario_rate(&lossy, 1001).unwrap();
            prop_assert!((a.rate - b.rate).abs() < 1e-8);
        }
    }
}
