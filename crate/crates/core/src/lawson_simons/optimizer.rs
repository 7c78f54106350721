//! Multistart Riemannian ascent of `Θ_q` over the Grassmannian `Gr(q, n)`.
//!
//! A plane is represented by an orthonormal frame `Y` (n×q). The objective
//! `Θ_q(Y) = Σ_α 2(‖H_α Y‖² - ‖Yᵀ H_α Y‖²) - tr(Yᵀ H_α Y)(tr H_α - tr(Yᵀ H_α Y))`
//! is invariant under `Y -> YQ`, so the Riemannian gradient is the Euclidean
//! one projected onto the horizontal space `(I - YYᵀ)`. Steps are retracted
//! with a sign-fixed QR and chosen by Armijo backtracking from a
//! Barzilai-Borwein trial step.
//!
//! Coordinate planes of a joint eigenbasis are only critical points of
//! `Θ_q`, not maxima in general, so every run combines coordinate-subset
//! starts with random starts. A returned value is a certified global
//! maximum only when a certificate applies (see [`Certificate`]).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{theta_q_basis, threshold, SubspaceSplit};
use crate::bounds::alpha;
use crate::curvature::{mean_curvature_vector, ricci_min, sff_norm_sq, trace, PointData};
use crate::error::{Error, Result};
use crate::linalg::{commutator, orthonormalize, sym_eigen};
use crate::rng::{domain, gaussian_matrix, stream, unit_vector};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Random starts, in addition to coordinate-subset starts.
    pub starts: usize,
    pub seed: u64,
    /// Extra stream key, e.g. the point index in a batch.
    pub stream: u64,
    pub max_iters: usize,
    /// Stop when the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Coordinate subsets are enumerated only when `C(n, q)` is at most this.
    pub subset_limit: usize,
    pub tolerances: Tolerances,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            stream: 0,
            max_iters: 500,
            grad_tol: 1e-10,
            subset_limit: 10_000,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// `max Θ_q < q(n-q)c` beyond the equality band.
    Strict,
    Equality,
    Violated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Strict => "STRICT",
            Verdict::Equality => "EQUALITY",
            Verdict::Violated => "VIOLATED",
        }
    }
}

/// Why a reported maximum is known to be global.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    /// Every shape operator is a multiple of the identity, so `Θ_q` is constant.
    ConstantObjective,
    /// The point is Ricci pinched with `k = q`, which bounds `Θ_q` by
    /// `q(n-q)c` on every plane, and the found value reaches that bound.
    PinchedAtThreshold,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum StartOrigin {
    /// Coordinate subset of the input frame.
    InputSubset(usize),
    /// Coordinate subset of the joint eigenbasis of a commuting family.
    EigenSubset(usize),
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaResult {
    pub q: usize,
    pub value: f64,
    pub split: SubspaceSplit,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Half-width of the equality band used for the verdict.
    pub equality_band: f64,
    pub global_certified: bool,
    pub certificate: Certificate,
    pub commuting: bool,
    pub best_start: StartOrigin,
    pub starts_run: usize,
    /// Best value over coordinate-subset starts before any ascent.
    pub best_subset_value: Option<f64>,
}

struct Objective<'a> {
    ops: &'a [DMatrix<f64>],
    traces: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(ops: &'a [DMatrix<f64>]) -> Self {
        Self {
            traces: ops.iter().map(trace).collect(),
            ops,
        }
    }

    fn value(&self, y: &DMatrix<f64>) -> f64 {
        self.ops
            .iter()
            .zip(&self.traces)
            .map(|(h, &tr_h)| {
                let a = h * y;
                let b = y.transpose() * &a;
                let tb = trace(&b);
                2.0 * (a.norm_squared() - b.norm_squared()) - tb * (tr_h - tb)
            })
            .sum()
    }

    /// Value and Riemannian gradient.
    fn value_grad(&self, y: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let mut f = 0.0;
        let mut e = DMatrix::zeros(y.nrows(), y.ncols());
        for (h, &tr_h) in self.ops.iter().zip(&self.traces) {
            let a = h * y;
            let b = y.transpose() * &a;
            let tb = trace(&b);
            f += 2.0 * (a.norm_squared() - b.norm_squared()) - tb * (tr_h - tb);
            e += h * &a * 4.0 - &a * &b * 8.0 - &a * (2.0 * (tr_h - 2.0 * tb));
        }
        let g = &e - y * (y.transpose() * &e);
        (f, g)
    }
}

struct Ascent {
    value: f64,
    frame: DMatrix<f64>,
}

fn ascend(obj: &Objective, y0: &DMatrix<f64>, cfg: &OptimizerConfig) -> Ascent {
    let mut y = orthonormalize(y0);
    let (mut f, mut g) = obj.value_grad(&y);
    let mut step = 1.0 / (1.0 + g.norm());
    for _ in 0..cfg.max_iters {
        let gn2 = g.norm_squared();
        if gn2.sqrt() < cfg.grad_tol {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        while t > 1e-18 {
            let cand = orthonormalize(&(&y + &g * t));
            let fc = obj.value(&cand);
            if fc >= f + 1e-4 * t * gn2 {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else { break };
        let (fn_, gn) = obj.value_grad(&next);
        let s = &next - &y;
        let dy = &gn - &g;
        let sy = s.dot(&dy).abs();
        step = if sy > 1e-300 {
            (s.norm_squared() / sy).clamp(1e-8, 1e4)
        } else {
            (2.0 * t).min(1e4)
        };
        y = next;
        f = fn_;
        g = gn;
    }
    Ascent { value: f, frame: y }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All `q`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, q));
    let mut idx: Vec<usize> = (0..q).collect();
    loop {
        out.push(idx.clone());
        let mut i = q;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - q + i {
                idx[i] += 1;
                for j in (i + 1)..q {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn subset_frame(basis: &DMatrix<f64>, subset: &[usize]) -> DMatrix<f64> {
    let cols: Vec<_> = subset.iter().map(|&i| basis.column(i).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Exhaustive maximum of `Θ_q` over coordinate subsets of `basis`.
pub fn coordinate_subset_max(p: &PointData<f64>, basis: &DMatrix<f64>, q: usize) -> (f64, Vec<usize>) {
    let obj = Objective::new(p.shape_ops());
    subsets(p.n(), q)
        .into_iter()
        .map(|s| (obj.value(&subset_frame(basis, &s)), s))
        .fold(
            (f64::NEG_INFINITY, Vec::new()),
            |best, cur| if cur.0 > best.0 { cur } else { best },
        )
}

pub(crate) fn max_commutator(ops: &[DMatrix<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..ops.len() {
        for b in (a + 1)..ops.len() {
            worst = worst.max(commutator(&ops[a], &ops[b]).norm());
        }
    }
    worst
}

/// Eigendecomposition of a seeded generic combination `Σ w_α H_α`.
pub(crate) fn generic_combination_eigen(p: &PointData<f64>, seed: u64, attempt: u64) -> (DVector<f64>, DMatrix<f64>) {
    let mut rng = stream(seed, &[domain::WEIGHTS, attempt]);
    let w = unit_vector(&mut rng, p.m());
    let mut combo = DMatrix::zeros(p.n(), p.n());
    for (h, wa) in p.shape_ops().iter().zip(w.iter()) {
        combo += h * *wa;
    }
    sym_eigen(&combo)
}

fn is_scalar_family(p: &PointData<f64>, scale: f64) -> bool {
    let n = p.n() as f64;
    p.shape_ops().iter().all(|h| {
        let c = trace(h) / n;
        (h - DMatrix::identity(p.n(), p.n()) * c).norm() <= scale
    })
}

/// Maximizes `Θ_q` over tangent `q`-planes.
pub fn maximize_theta(p: &PointData<f64>, q: usize, cfg: &OptimizerConfig) -> Result<ThetaResult> {
    let n = p.n();
    if q == 0 || q >= n {
        return Err(Error::domain(format!("q = {q} must satisfy 1 <= q <= n-1 = {}", n - 1)));
    }
    let tol = &cfg.tolerances;
    let s = sff_norm_sq(p);
    let flat_scale = tol.commutator * (1.0 + s);
    let commuting = max_commutator(p.shape_ops()) <= flat_scale;
    let obj = Objective::new(p.shape_ops());

    let mut starts: Vec<(StartOrigin, DMatrix<f64>)> = Vec::new();
    let mut best_subset_value = None;
    if binomial(n, q) <= cfg.subset_limit {
        let identity = DMatrix::identity(n, n);
        let mut bases = vec![(identity, false)];
        if commuting {
            bases.push((generic_combination_eigen(p, cfg.seed, 0).1, true));
        }
        for (basis, eigen) in &bases {
            for (i, subset) in subsets(n, q).into_iter().enumerate() {
                let frame = subset_frame(basis, &subset);
                let v = obj.value(&frame);
                best_subset_value = Some(best_subset_value.map_or(v, |b: f64| b.max(v)));
                let origin = if *eigen {
                    StartOrigin::EigenSubset(i)
                } else {
                    StartOrigin::InputSubset(i)
                };
                starts.push((origin, frame));
            }
        }
    }
    for r in 0..cfg.starts {
        let mut rng = stream(cfg.seed, &[domain::MULTISTART, cfg.stream, r as u64]);
        starts.push((StartOrigin::Random(r), gaussian_matrix(&mut rng, n, q)));
    }

    let results: Vec<Ascent> = starts.par_iter().map(|(_, y0)| ascend(&obj, y0, cfg)).collect();
    // First index wins ties, so the choice is independent of scheduling.
    let (best_idx, best) = results
        .iter()
        .enumerate()
        .fold(None::<(usize, &Ascent)>, |acc, (i, a)| match acc {
            Some((_, b)) if b.value >= a.value => acc,
            _ => Some((i, a)),
        })
        .ok_or_else(|| Error::domain("no starts to optimize from"))?;

    let split = SubspaceSplit::from_frame(&best.frame)?;
    let value = theta_q_basis(p, &split)?;
    let thr = threshold(n, q, *p.c());
    let band = tol.equality_band(thr);
    let verdict = if value < thr - band {
        Verdict::Strict
    } else if value <= thr + band {
        Verdict::Equality
    } else {
        Verdict::Violated
    };

    let certificate = if is_scalar_family(p, flat_scale) {
        Certificate::ConstantObjective
    } else if verdict == Verdict::Equality && pinched_for_q(p, q, tol) {
        Certificate::PinchedAtThreshold
    } else {
        Certificate::None
    };

    Ok(ThetaResult {
        q,
        value,
        split,
        threshold: thr,
        verdict,
        equality_band: band,
        global_certified: certificate != Certificate::None,
        certificate,
        commuting,
        best_start: starts[best_idx].0,
        starts_run: starts.len(),
        best_subset_value,
    })
}

/// `Ric_min >= alpha(n, q, H, c)` within tolerance, with the hypotheses
/// under which that bounds `Θ_q` on every plane.
fn pinched_for_q(p: &PointData<f64>, q: usize, tol: &Tolerances) -> bool {
    let n = p.n();
    let c = *p.c();
    if n < 5 || q < 2 || q > n / 2 || c < 0.0 {
        return false;
    }
    let h = mean_curvature_vector(p).h();
    let Ok(a) = alpha(n as u32, q as u32, &h, &c) else {
        return false;
    };
    ricci_min(p).0 - a >= -tol.pinching_band(a)
}

/// Homology-vanishing verdict at one point: `max Θ_q` against `q(n-q)c`.
pub fn homology_verdict(p: &PointData<f64>, q: usize, cfg: &OptimizerConfig) -> Result<ThetaResult> {
    maximize_theta(p, q, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use crate::rng::gaussian_symmetric;

    fn diag_point(diags: &[&[f64]], c: f64) -> PointData {
        let n = diags[0].len();
        PointData::new(
            n,
            c,
            diags
                .iter()
                .map(|d| DMatrix::from_diagonal(&DVector::from_row_slice(d)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn subsets_enumerate_binomial() {
        assert_eq!(subsets(6, 2).len(), 15);
        assert_eq!(subsets(8, 4).len(), 70);
        assert_eq!(subsets(5, 1), vec![vec![0], vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = stream(8, &[]);
        let ops: Vec<_> = (0..3).map(|_| gaussian_symmetric(&mut rng, 6)).collect();
        let obj = Objective::new(&ops);
        let y = orthonormalize(&gaussian_matrix(&mut rng, 6, 2));
        let (f, g) = obj.value_grad(&y);
        let dir = gaussian_matrix(&mut rng, 6, 2);
        let dir = &dir - &y * (y.transpose() * &dir);
        let h = 1e-6;
        let fp = obj.value(&orthonormalize(&(&y + &dir * h)));
        let fm = obj.value(&orthonormalize(&(&y - &dir * h)));
        let fd = (fp - fm) / (2.0 * h);
        assert!(
            (fd - g.dot(&dir)).abs() < 1e-6 * (1.0 + fd.abs()),
            "{fd} vs {}",
            g.dot(&dir)
        );
        assert!((f - obj.value(&y)).abs() < 1e-12);
    }

    #[test]
    fn umbilical_is_constant_and_certified() {
        let p = PointData::new(6, 0.0, vec![DMatrix::identity(6, 6) * 2.0]).unwrap();
        let r = maximize_theta(&p, 2, &OptimizerConfig::default()).unwrap();
        assert!((r.value + 8.0 * 4.0).abs() < 1e-10);
        assert!(r.global_certified);
        assert_eq!(r.certificate, Certificate::ConstantObjective);
        assert_eq!(r.verdict, Verdict::Strict);
    }

    #[test]
    fn coordinate_subsets_are_not_global_maxima() {
        // One diagonal direction diag(1, -1, 0, 0, 0): every coordinate plane
        // gives at most 1, the plane spanned by (e1 + e2)/√2 and e3 gives 2.
        let p = diag_point(&[&[1.0, -1.0, 0.0, 0.0, 0.0]], 0.0);
        let (sub, _) = coordinate_subset_max(&p, &DMatrix::identity(5, 5), 2);
        assert!((sub - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut y = DMatrix::zeros(5, 2);
        y[(0, 0)] = s;
        y[(1, 0)] = s;
        y[(2, 1)] = 1.0;
        let rotated = theta_q_basis(&p, &SubspaceSplit::from_frame(&y).unwrap()).unwrap();
        assert!((rotated - 2.0).abs() < 1e-12);
        let r = maximize_theta(&p, 2, &OptimizerConfig::default()).unwrap();
        assert!(r.commuting);
        assert!(r.value >= rotated - 1e-9);
        assert!(!r.global_certified);
    }

    #[test]
    fn diagonal_family_at_least_subset_max() {
        let p = diag_point(
            &[&[1.0, 0.5, -0.3, 2.0, -1.0, 0.2], &[0.3, -0.7, 1.1, 0.0, 0.4, -0.9]],
            0.5,
        );
        let mut best = f64::NEG_INFINITY;
        for s in subsets(6, 2) {
            let split = SubspaceSplit::from_subset(&DMatrix::identity(6, 6), &s).unwrap();
            best = best.max(theta_q_basis(&p, &split).unwrap());
        }
        let r = maximize_theta(&p, 2, &OptimizerConfig::default()).unwrap();
        assert!(r.value >= best - 1e-9);
        assert!((r.best_subset_value.unwrap() - best).abs() < 1e-12);
    }

    #[test]
    fn more_starts_never_worse() {
        let mut rng = stream(31, &[]);
        let ops: Vec<_> = (0..2).map(|_| gaussian_symmetric(&mut rng, 7)).collect();
        let p = PointData::new(7, 0.2, ops).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for starts in [0, 1, 4, 16] {
            let cfg = OptimizerConfig {
                starts,
                seed: 5,
                ..Default::default()
            };
            let r = maximize_theta(&p, 3, &cfg).unwrap();
            assert!(r.value >= prev - 1e-12);
            prev = r.value;
        }
    }

    #[test]
    fn frame_invariance_of_maximum() {
        let mut rng = stream(32, &[]);
        let ops: Vec<_> = (0..2).map(|_| gaussian_symmetric(&mut rng, 6)).collect();
        let p = PointData::new(6, 0.0, ops).unwrap();
        let q = random_orthogonal(&mut rng, 6);
        let cfg = OptimizerConfig::default();
        let a = maximize_theta(&p, 2, &cfg).unwrap().value;
        let b = maximize_theta(&p.conjugate_tangent(&q).unwrap(), 2, &cfg)
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn rejects_bad_q() {
        let p = diag_point(&[&[1.0, 2.0, 3.0]], 0.0);
        assert!(maximize_theta(&p, 0, &OptimizerConfig::default()).is_err());
        assert!(maximize_theta(&p, 3, &OptimizerConfig::default()).is_err());
    }
}
