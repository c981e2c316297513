//! Samples of the conjugate loci `K_i(p_0)` with singularity labels.

use serde::{Deserialize, Serialize};

use super::cusp::CuspEvidence;
use super::d4::D4Report;
use super::field::ConjugateField;
use crate::integrals::CellLabel;
use crate::manifold::{embed_ellipsoid, Manifold};

/// Singularity type of a locus sample, with the evidence that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label")]
pub enum SingularityLabel {
    Regular,
    /// On `C_i^±`; evidence present once the cusp fit has run.
    CuspidalEdge { evidence: Option<CuspEvidence> },
    /// On `∂C_j^+` with `i ∈ {j−1, j}`.
    D4PlusCandidate { evidence: Option<Box<D4Report>> },
    Excluded { reason: String },
}

impl SingularityLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SingularityLabel::Regular => "regular",
            SingularityLabel::CuspidalEdge { .. } => "cuspidal_edge",
            SingularityLabel::D4PlusCandidate { .. } => "d4plus_candidate",
            SingularityLabel::Excluded { .. } => "excluded",
        }
    }
}

/// Label expected from the cell of `u` for the locus `K_i`.
pub fn expected_label(cell: &CellLabel, i: usize) -> SingularityLabel {
    if let Some(&j) = cell.boundary.first() {
        if i == j || i + 1 == j {
            return SingularityLabel::D4PlusCandidate { evidence: None };
        }
    }
    let on_i = cell.minus.contains(&i) || cell.plus.contains(&i);
    let others = cell.minus.iter().chain(&cell.plus).filter(|&&k| k != i).count();
    match (on_i, others) {
        (false, _) => SingularityLabel::Regular,
        (true, 0) => SingularityLabel::CuspidalEdge { evidence: None },
        (true, _) => SingularityLabel::Excluded { reason: "on the intersection of several cells".into() },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateSample {
    pub u: Vec<f64>,
    pub i: usize,
    pub r: f64,
    pub x: Vec<f64>,
    pub tangential: Vec<f64>,
    /// Ambient point on the ellipsoid.
    pub ambient: Option<Vec<f64>>,
    pub label: SingularityLabel,
}

/// Locus `K_i` from a field (holes skipped).
pub fn conjugate_locus(m: &Manifold, field: &ConjugateField, i: usize) -> Vec<ConjugateSample> {
    field
        .samples
        .iter()
        .flatten()
        .map(|s| ConjugateSample {
            u: s.u.clone(),
            i,
            r: s.r[i - 1],
            x: s.x[i - 1].clone(),
            tangential: s.tangential(i),
            ambient: embed_ellipsoid(m, &s.phi[i - 1]).ok(),
            label: expected_label(&s.label, i),
        })
        .collect()
}

/// The first conjugate locus `K_{n−1}`.
pub fn first_conjugate_locus(m: &Manifold, field: &ConjugateField) -> Vec<ConjugateSample> {
    conjugate_locus(m, field, field.n - 1)
}

/// Largest pairwise distance between sample points.
pub fn diameter(points: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (k, p) in points.iter().enumerate() {
        for q in &points[k + 1..] {
            d = d.max(p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt());
        }
    }
    d
}
