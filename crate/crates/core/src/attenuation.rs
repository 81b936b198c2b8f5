//! Attenuation functions: the probability of accepting a free, active edge on arrival.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::graph::EdgeStats;

const RANGE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttenuationKind {
    /// Always accept.
    Trivial,
    /// `exp(-t x_e)`.
    A1,
    /// `exp(-t x_e) (1 - alpha s_e)`, penalizing edges with large slack.
    A2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttenuationSpec {
    pub kind: AttenuationKind,
    pub alpha: f64,
}

impl AttenuationSpec {
    pub fn new(kind: AttenuationKind, alpha: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&alpha) {
            return input(format!("alpha = {alpha} outside [0, 0.5]"));
        }
        Ok(Self { kind, alpha })
    }

    pub fn trivial() -> Self {
        Self {
            kind: AttenuationKind::Trivial,
            alpha: 0.0,
        }
    }

    pub fn a1() -> Self {
        Self {
            kind: AttenuationKind::A1,
            alpha: 0.0,
        }
    }

    pub fn a2(alpha: f64) -> Result<Self> {
        Self::new(AttenuationKind::A2, alpha)
    }

    /// Time-independent factor of the attenuation; `1 - alpha s` for `a2`, else 1.
    pub fn slack_factor(&self, s: f64) -> f64 {
        match self.kind {
            AttenuationKind::A2 => 1.0 - self.alpha * s,
            _ => 1.0,
        }
    }

    /// Time-dependent rate: the attenuation is `exp(-t rate) * slack_factor`.
    pub fn rate(&self, x_e: f64) -> f64 {
        match self.kind {
            AttenuationKind::Trivial => 0.0,
            _ => x_e,
        }
    }

    /// Checked evaluation at arrival time `t`.
    pub fn value(&self, t: f64, stats: &EdgeStats, x_e: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return input(format!("arrival time {t} outside [0, 1]"));
        }
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&x_e) {
            return input(format!("x_e = {x_e} outside [0, 1]"));
        }
        if !(0.0..=0.5).contains(&self.alpha) {
            return input(format!("alpha = {} outside [0, 0.5]", self.alpha));
        }
        if self.kind == AttenuationKind::A2 && !(-RANGE_TOL..=2.0 + RANGE_TOL).contains(&stats.s) {
            return input(format!("slack {} outside [0, 2]", stats.s));
        }
        let s = stats.s.clamp(0.0, 2.0);
        let x = x_e.clamp(0.0, 1.0);
        Ok(((-t * self.rate(x)).exp() * self.slack_factor(s)).clamp(0.0, 1.0))
    }
}

/// Per-edge attenuation with the static part precomputed, for the simulators.
#[derive(Clone, Debug)]
pub(crate) struct PreparedAttenuation {
    rate: Vec<f64>,
    factor: Vec<f64>,
}

impl PreparedAttenuation {
    /// `x` and `stats` must describe the same edges; slack is validated here once.
    pub(crate) fn new(spec: &AttenuationSpec, x: &[f64], stats: &[EdgeStats]) -> Result<Self> {
        if !(0.0..=0.5).contains(&spec.alpha) {
            return input(format!("alpha = {} outside [0, 0.5]", spec.alpha));
        }
        let mut rate = Vec::with_capacity(x.len());
        let mut factor = Vec::with_capacity(x.len());
        for (k, (&xe, st)) in x.iter().zip(stats).enumerate() {
            // validates ranges through the checked path
            spec.value(0.0, st, xe).map_err(|e| crate::Error::Input(format!("edge {k}: {e}")))?;
            rate.push(spec.rate(xe.clamp(0.0, 1.0)));
            factor.push(spec.slack_factor(st.s.clamp(0.0, 2.0)).clamp(0.0, 1.0));
        }
        Ok(Self { rate, factor })
    }

    #[inline]
    pub(crate) fn at(&self, e: usize, t: f64) -> f64 {
        let r = self.rate[e];
        if r == 0.0 {
            self.factor[e]
        } else {
            (-t * r).exp() * self.factor[e]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn stats(s: f64) -> EdgeStats {
        EdgeStats {
            d: 0.0,
            s,
            m: 0.0,
            neighbors: vec![],
        }
    }

    #[test]
    fn a1_at_time_zero_is_one() {
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(AttenuationSpec::a1().value(0.0, &stats(1.0), x).unwrap(), 1.0);
        }
    }

    #[test]
    fn a2_with_alpha_0171_at_full_slack() {
        let v = AttenuationSpec::a2(0.171).unwrap().value(1.0, &stats(2.0), 0.0).unwrap();
        assert_abs_diff_eq!(v, 0.658, epsilon = 1e-12);
    }

    #[test]
    fn trivial_is_one() {
        assert_eq!(AttenuationSpec::trivial().value(0.7, &stats(2.0), 0.9).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let a = AttenuationSpec::a2(0.2).unwrap();
        assert!(a.value(1.5, &stats(1.0), 0.5).is_err());
        assert!(a.value(0.5, &stats(1.0), 1.5).is_err());
        assert!(a.value(0.5, &stats(2.5), 0.5).is_err());
        assert!(AttenuationSpec::a2(0.6).is_err());
        assert!(AttenuationSpec::a2(-0.1).is_err());
        let bad = AttenuationSpec { kind: AttenuationKind::A2, alpha: 0.9 };
        assert!(bad.value(0.5, &stats(1.0), 0.5).is_err());
    }

    proptest! {
        #[test]
        fn a2_with_zero_alpha_is_a1(t in 0.0..=1.0f64, x in 0.0..=1.0f64, s in 0.0..=2.0f64) {
            let a1 = AttenuationSpec::a1().value(t, &stats(s), x).unwrap();
            let a2 = AttenuationSpec::a2(0.0).unwrap().value(t, &stats(s), x).unwrap();
            prop_assert_eq!(a1, a2);
        }

        #[test]
        fn a2_below_a1_below_one(t in 0.0..=1.0f64, x in 0.0..=1.0f64, s in 0.0..=2.0f64, alpha in 0.0..=0.5f64) {
            let a1 = AttenuationSpec::a1().value(t, &stats(s), x).unwrap();
            let a2 = AttenuationSpec::a2(alpha).unwrap().value(t, &stats(s), x).unwrap();
            prop_assert!(0.0 <= a2 && a2 <= a1 && a1 <= 1.0);
        }

        #[test]
        fn monotone_nonincreasing(
            t in 0.0..=1.0f64, dt in 0.0..=1.0f64,
            x in 0.0..=1.0f64, dx in 0.0..=1.0f64,
            s in 0.0..=2.0f64, ds in 0.0..=2.0f64,
            alpha in 0.0..=0.5f64,
        ) {
            let spec = AttenuationSpec::a2(alpha).unwrap();
            let base = spec.value(t, &stats(s), x).unwrap();
            let t2 = (t + dt).min(1.0);
            let x2 = (x + dx).min(1.0);
            let s2 = (s + ds).min(2.0);
            prop_assert!(spec.value(t2, &stats(s), x).unwrap() <= base);
            prop_assert!(spec.value(t, &stats(s), x2).unwrap() <= base);
            prop_assert!(spec.value(t, &stats(s2), x).unwrap() <= base);
            let a1 = AttenuationSpec::a1();
            prop_assert!(a1.value(t2, &stats(s), x).unwrap() <= a1.value(t, &stats(s), x).unwrap());
        }
    }
}
