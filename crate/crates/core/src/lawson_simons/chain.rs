//! Step-by-step evaluation of the estimate that bounds `Θ_q` by `q(n-q)c`
//! under Ricci pinching.
//!
//! Three chains are evaluated in the split basis. The upper-block chain
//! trades the off-block terms for Ricci curvature of `e_1..e_q`; the
//! two-block chain splits the mixed product symmetrically and trades `S`
//! for `Ric_min`; the combined chain takes the convex combination that
//! cancels the cross term `X = Σ_α Σ_{i≤q} c_α(h_ii - c_α)` and then uses
//! the pinching hypothesis and monotonicity of `phi`.

use serde::Serialize;

use super::{theta_q_basis, threshold, SubspaceSplit};
use crate::bounds::{alpha_coefficient, phi};
use crate::curvature::{mean_curvature_vector, ricci_min, ricci_tensor, sff_norm_sq, PointData};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
}

/// One link `lhs (= or <=) rhs`, with `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub chain: &'static str,
    pub label: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRecord {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub theta: f64,
    pub threshold: f64,
    pub h_sq: f64,
    pub ric_min: f64,
    pub alpha: f64,
    /// `Ric_min - alpha(n, k, H, c)`.
    pub pinching_margin: f64,
    pub hypothesis_holds: bool,
    /// `Σ_α Σ_{i≤q} c_α (h_ii - c_α)`.
    pub cross_term: f64,
    pub steps: Vec<ChainStep>,
}

impl ChainRecord {
    pub fn min_slack(&self) -> f64 {
        self.steps.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min)
    }

    /// `q(n-q)c - Θ_q`.
    pub fn final_slack(&self) -> f64 {
        self.threshold - self.theta
    }

    pub fn step(&self, chain: &str, label: &str) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.chain == chain && s.label == label)
    }
}

struct Builder {
    steps: Vec<ChainStep>,
}

impl Builder {
    fn push(&mut self, chain: &'static str, label: &'static str, relation: Relation, lhs: f64, rhs: f64) {
        self.steps.push(ChainStep {
            chain,
            label,
            relation,
            lhs,
            rhs,
            slack: rhs - lhs,
        });
    }
}

/// Evaluates every intermediate bound for `Θ_q` in the basis of `split`.
///
/// Needs `n >= 5` and `2 <= q <= k <= n/2`. When `Ric_min < alpha(n,k,H,c)`
/// beyond the pinching band the full record is still computed and returned
/// inside [`Error::HypothesisNotMet`].
pub fn verify_lemma_chain(
    p: &PointData<f64>,
    k: usize,
    q: usize,
    split: &SubspaceSplit,
    tol: &Tolerances,
) -> Result<ChainRecord> {
    let n = p.n();
    if n < 5 {
        return Err(Error::domain(format!("the chain needs n >= 5, got {n}")));
    }
    if k < 2 || k > n / 2 {
        return Err(Error::domain(format!("k = {k} must satisfy 2 <= k <= floor({n}/2)")));
    }
    if q < 2 || q > k {
        return Err(Error::domain(format!("q = {q} must satisfy 2 <= q <= k = {k}")));
    }
    if split.q() != q || split.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "split is ({}, {}), expected (q, n) = ({q}, {n})",
            split.q(),
            split.n()
        )));
    }

    let conj = p.conjugate_tangent(split.basis())?;
    let c = *p.c();
    let nf = n as f64;
    let qf = q as f64;
    let mean = mean_curvature_vector(&conj);
    let h_sq = mean.h_sq;
    let s = sff_norm_sq(&conj);
    let ric = ricci_tensor(&conj);
    let (ric_min, _) = ricci_min(p);
    let coeff: f64 = alpha_coefficient(n as u32, k as u32)?;
    let alpha = coeff * (c + h_sq);
    let margin = ric_min - alpha;
    let hypothesis_holds = margin >= -tol.pinching_band(alpha);

    // Per-direction block sums.
    let mut off = 0.0; // Σ_α Σ_{i≤q<j} h_ij²
    let mut mixed = 0.0; // Σ_α A_α (n c_α - A_α)
    let mut upper_sq = 0.0; // Σ_α Σ_{i≤q} h_ii²
    let mut lower_sq = 0.0; // Σ_α Σ_{j>q} h_jj²
    let mut c_a = 0.0; // Σ_α c_α A_α
    let mut c_b = 0.0; // Σ_α c_α B_α
    let mut split_mixed = 0.0;
    for (h, &ca) in conj.shape_ops().iter().zip(&mean.components) {
        let a: f64 = (0..q).map(|i| h[(i, i)]).sum();
        let b: f64 = (q..n).map(|j| h[(j, j)]).sum();
        for i in 0..q {
            for j in q..n {
                off += h[(i, j)] * h[(i, j)];
            }
            upper_sq += h[(i, i)] * h[(i, i)];
        }
        for j in q..n {
            lower_sq += h[(j, j)] * h[(j, j)];
        }
        mixed += a * (nf * ca - a);
        split_mixed += (nf - qf) / nf * a * (nf * ca - a) + qf / nf * b * (nf * ca - b);
        c_a += ca * a;
        c_b += ca * b;
    }
    let cross = c_a - qf * h_sq;
    let upper_ricci: f64 = (0..q).map(|i| (nf - 1.0) * c - ric[(i, i)]).sum();
    let reserve = (nf - 1.0) * (c + h_sq) - ric_min;
    let theta = theta_q_basis(p, split)?;
    let thr = threshold(n, q, c);
    let pq = qf * (nf - qf);

    let mut b = Builder { steps: Vec::new() };

    let l1 = 2.0 * off - mixed;
    let l2 = 2.0 * off - nf * c_a + qf * upper_sq;
    let l3 = qf * upper_ricci + nf * (qf - 1.0) * c_a;
    let l4 = qf * qf * reserve - pq * h_sq + nf * (qf - 1.0) * cross;
    b.push("upper_block", "expand_trace", Relation::Equal, theta, l1);
    b.push("upper_block", "cauchy_schwarz_upper", Relation::AtMost, l1, l2);
    b.push("upper_block", "ricci_of_upper_vectors", Relation::AtMost, l2, l3);
    b.push("upper_block", "ricci_min", Relation::AtMost, l3, l4);

    let m1 = 2.0 * off - split_mixed;
    let m2 = 2.0 * off - (nf - qf) * c_a + pq / nf * upper_sq - qf * c_b + pq / nf * lower_sq;
    let m3 = pq / nf * s - (qf * nf * h_sq + (nf - 2.0 * qf) * c_a);
    let m4 = pq * reserve - pq * h_sq - (nf - 2.0 * qf) * cross;
    b.push("two_block", "symmetric_split", Relation::Equal, theta, m1);
    b.push("two_block", "cauchy_schwarz_blocks", Relation::AtMost, m1, m2);
    b.push("two_block", "full_norm", Relation::AtMost, m2, m3);
    b.push("two_block", "ricci_min", Relation::AtMost, m3, m4);

    let denom = qf * (nf - 2.0);
    let w_upper = (nf - 2.0 * qf) / denom;
    let w_blocks = nf * (qf - 1.0) / denom;
    let phi_q = phi(n as u32, &qf)?.value;
    let phi_k = phi(n as u32, &(k as f64))?.value;
    let n1 = w_upper * l4 + w_blocks * m4;
    let n2 = pq / (phi_q * (nf - 2.0)) * reserve - pq * h_sq;
    let n3 = pq * phi_k / phi_q * (c + h_sq) - pq * h_sq;
    let n4 = pq * (c + h_sq) - pq * h_sq;
    b.push("combined", "convex_combination", Relation::AtMost, theta, n1);
    b.push("combined", "cancel_cross_term", Relation::Equal, n1, n2);
    b.push("combined", "pinching", Relation::AtMost, n2, n3);
    b.push("combined", "phi_monotone", Relation::AtMost, n3, n4);
    b.push("combined", "threshold", Relation::Equal, n4, thr);

    let record = ChainRecord {
        n,
        k,
        q,
        theta,
        threshold: thr,
        h_sq,
        ric_min,
        alpha,
        pinching_margin: margin,
        hypothesis_holds,
        cross_term: cross,
        steps: b.steps,
    };
    if !hypothesis_holds {
        return Err(Error::HypothesisNotMet {
            margin,
            record: Box::new(record),
        });
    }
    Ok(record)
}
