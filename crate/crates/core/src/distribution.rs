//! Discrete distributions of entropy production.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Support values closer than this are one point.
pub const MERGE_TOL: f64 = 1e-10;

/// Which entropy production a distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B")]
    B,
    /// Global measurements on the composite system.
    #[serde(rename = "A-B")]
    AB,
    /// Sum of independent local contributions (convolution of `A` and `B`).
    #[serde(rename = "A+B")]
    APlusB,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::A => "A",
            Label::B => "B",
            Label::AB => "A-B",
            Label::APlusB => "A+B",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sorted support `{σ_i}` with masses `{Prob(σ_i)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDistribution {
    pub label: Label,
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl EntropyDistribution {
    /// Aggregates `(σ, mass)` pairs, merging values within [`MERGE_TOL`].
    pub fn from_samples(label: Label, samples: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut pts: Vec<(f64, f64)> = samples.into_iter().collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (s, p) in pts {
            match support.last() {
                Some(&anchor) if s - anchor <= MERGE_TOL => *probs.last_mut().unwrap() += p,
                _ => {
                    support.push(s);
                    probs.push(p);
                }
            }
        }
        Self {
            label,
            support,
            probs,
        }
    }

    /// Validated constructor: sorted distinct support, masses ≥ −1e-8,
    /// total mass within 1e-8 of one.
    pub fn new(label: Label, support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(Error::SupportMismatch(format!(
                "{} support points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        for w in support.windows(2) {
            if w[1] - w[0] <= MERGE_TOL {
                return Err(Error::DegenerateSupport(w[0], w[1]));
            }
        }
        if let Some(p) = probs.iter().find(|&&p| p < -1e-8 || !p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: format!("invalid mass {p}"),
            });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: format!("total mass {total} differs from 1"),
            });
        }
        Ok(Self {
            label,
            support,
            probs,
        })
    }

    pub fn delta(label: Label, at: f64) -> Self {
        Self {
            label,
            support: vec![at],
            probs: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `⟨σ^k⟩`.
    pub fn moment(&self, k: u32) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| p * s.powi(k as i32))
            .sum()
    }

    /// `⟨σ^k⟩` for `k = 1..=k_max`.
    pub fn moments(&self, k_max: u32) -> Vec<f64> {
        (1..=k_max).map(|k| self.moment(k)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `χ(φ) = ⟨e^{−φσ}⟩`.
    pub fn mgf(&self, phi: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| p * (-phi * s).exp())
            .sum()
    }

    /// `G(λ) = ⟨e^{iλσ}⟩` for complex `λ`.
    pub fn characteristic(&self, lambda: C64) -> C64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| (C64::new(0.0, 1.0) * lambda * s).exp() * p)
            .sum()
    }

    pub fn max_abs_support(&self) -> f64 {
        self.support.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Mass at `x` (within `tol`), zero when `x` is off the support.
    pub fn prob_at(&self, x: f64, tol: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(s, _)| (*s - x).abs() <= tol)
            .map(|(_, p)| p)
            .sum()
    }

    /// Support/probability pairs sorted by support.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn relabel(mut self, label: Label) -> Self {
        self.label = label;
        self
    }
}

/// Distribution of `σ_A + σ_B` for independent `σ_A`, `σ_B`.
pub fn convolution(a: &EntropyDistribution, b: &EntropyDistribution) -> EntropyDistribution {
    EntropyDistribution::from_samples(
        Label::APlusB,
        a.pairs()
            .flat_map(|(sa, pa)| b.pairs().map(move |(sb, pb)| (sa + sb, pa * pb))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn merges_close_values() {
        let d = EntropyDistribution::from_samples(
            Label::AB,
            [(1.0, 0.25), (1.0 + 1e-12, 0.25), (-1.0, 0.5)],
        );
        assert_eq!(d.support.len(), 2);
        assert_relative_eq!(d.probs[1], 0.5);
        assert!(d.support[0] < d.support[1]);
    }

    #[test]
    fn delta_convolution() {
        let c = convolution(&EntropyDistribution::delta(Label::A, 0.3), &EntropyDistribution::delta(Label::B, -0.1));
        assert_eq!(c.support.len(), 1);
        assert_relative_eq!(c.support[0], 0.2, epsilon = 1e-15);
        assert_eq!(c.probs, vec![1.0]);
        assert_eq!(c.label, Label::APlusB);
    }

    #[test]
    fn convolution_adds_means() {
        let a = EntropyDistribution::from_samples(Label::A, [(0.1, 0.3), (-0.4, 0.7)]);
        let b = EntropyDistribution::from_samples(Label::B, [(0.5, 0.6), (0.2, 0.4)]);
        let c = convolution(&a, &b);
        assert_relative_eq!(c.mean(), a.mean() + b.mean(), epsilon = 1e-15);
        assert_relative_eq!(c.total_mass(), 1.0, epsilon = 1e-15);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn validated_constructor() {
        assert!(EntropyDistribution::new(Label::A, vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(EntropyDistribution::new(Label::A, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(EntropyDistribution::new(Label::A, vec![0.0, 1.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn labels_serialize_by_name() {
        assert_eq!(serde_json::to_string(&Label::AB).unwrap(), "\"A-B\"");
    }
}
