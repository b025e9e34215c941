//! Stepwise slack compensation.
//!
//! The cables stretch a little under load. Measured at full wrap, the total
//! residual slack of a cable is spread over the steps of a schedule so that
//! step `i` (1-based) pulls in an extra `C·i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::cables::{CableRole, ScheduleRow};
use crate::manipulator::Cable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackModel {
    /// Residual slack at full wrap per cable, in [`Cable`] order (mm).
    pub slack_mm: [f64; 3],
    pub steps: usize,
}

impl SlackModel {
    pub fn new(slack_mm: [f64; 3], steps: usize) -> Result<Self> {
        let m = SlackModel { slack_mm, steps };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParams("slack model needs at least one step".into()));
        }
        if self.slack_mm.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "slack values must be finite and >= 0, got {:?}",
                self.slack_mm
            )));
        }
        Ok(())
    }
}

/// Extra pull per step for `cable` (mm/step).
pub fn compensation_factor(model: &SlackModel, cable: Cable) -> f64 {
    model.slack_mm[cable.index()] / model.steps as f64
}

/// `ΔL′_i = ΔL_i + C·i` with `i` counted from 1.
pub fn adjusted_schedule(theoretical: &[f64], c: f64) -> Vec<f64> {
    theoretical
        .iter()
        .enumerate()
        .map(|(i, dl)| dl + c * (i + 1) as f64)
        .collect()
}

/// Apply compensation to the active-cable rows of a sweep schedule. Passive
/// rows are left as they are.
pub fn compensate_rows(rows: &[ScheduleRow], model: &SlackModel) -> Vec<ScheduleRow> {
    rows.iter()
        .map(|r| match r.role {
            CableRole::Active => ScheduleRow {
                delta_mm: r.delta_mm + compensation_factor(model, r.cable) * r.step as f64,
                ..*r
            },
            CableRole::Passive => *r,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factor_examples() {
        let m = SlackModel::new([13.0, 0.0, 2.0], 26).unwrap();
        assert_eq!(compensation_factor(&m, Cable::Dorsal), 0.5);
        assert_eq!(compensation_factor(&m, Cable::VentralLeft), 0.0);
        let one = SlackModel::new([3.5, 0.0, 0.0], 1).unwrap();
        assert_eq!(compensation_factor(&one, Cable::Dorsal), 3.5);
    }

    #[test]
    fn fourth_step() {
        let s = adjusted_schedule(&[5.0; 26], 0.5);
        assert_eq!(s[3], 7.0);
        assert_eq!(s.iter().cloned().fold(f64::MIN, f64::max), s[25]);
    }

    #[test]
    fn zero_compensation_is_identity() {
        let base = [1.0, 2.5, 4.0];
        assert_eq!(adjusted_schedule(&base, 0.0), base.to_vec());
    }

    #[test]
    fn invalid_models() {
        assert!(SlackModel::new([1.0, 1.0, 1.0], 0).is_err());
        assert!(SlackModel::new([-1.0, 1.0, 1.0], 3).is_err());
    }

    #[test]
    fn rows_touch_only_active() {
        let rows = vec![
            ScheduleRow {
                step: 2,
                cable: Cable::Dorsal,
                role: CableRole::Active,
                delta_mm: 5.0,
            },
            ScheduleRow {
                step: 2,
                cable: Cable::VentralLeft,
                role: CableRole::Passive,
                delta_mm: -1.0,
            },
        ];
        let m = SlackModel::new([13.0, 13.0, 13.0], 26).unwrap();
        let out = compensate_rows(&rows, &m);
        assert_eq!(out[0].delta_mm, 6.0);
        assert_eq!(out[1].delta_mm, -1.0);
    }

    proptest! {
        #[test]
        fn cumulative_extra(n in 1usize..60, c in 0.0f64..3.0) {
            let s = adjusted_schedule(&vec![0.0; n], c);
            let total: f64 = s.iter().sum();
            let expect = c * (n * (n + 1) / 2) as f64;
            prop_assert!((total - expect).abs() <= 1e-12 * expect.max(1.0));
        }

        #[test]
        fn strictly_increasing(n in 2usize..60, c in 0.001f64..3.0) {
            let s = adjusted_schedule(&vec![5.0; n], c);
            for w in s.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
        }

        #[test]
        fn linear_split(a in -4.0f64..4.0, c in 0.0f64..2.0,
                        base in proptest::collection::vec(0.0f64..10.0, 1..30)) {
            let scaled: Vec<f64> = base.iter().map(|x| a * x).collect();
            let lhs = adjusted_schedule(&scaled, c);
            let left = adjusted_schedule(&base, 0.0);
            let right = adjusted_schedule(&vec![0.0; base.len()], c);
            for i in 0..base.len() {
                prop_assert_eq!(lhs[i], a * left[i] + right[i]);
            }
        }
    }
}
