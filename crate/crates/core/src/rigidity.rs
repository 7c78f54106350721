//! Pinching check, equality-case block detection and the pointwise verdict.
//!
//! At a pinched point where `Θ_k` reaches `k(n-k)c`, every shape operator is
//! block scalar `diag(λ_α I_k, μ_α I_{n-k})` in one common basis, the normals
//! `η₁ = Σ λ_α ξ_α` and `η₂ = Σ μ_α ξ_α` are principal and the point is
//! Einstein with `Ric = alpha(n, k, H, c)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bounds::alpha;
use crate::curvature::{mean_curvature_vector, ricci_min, ricci_tensor, sff_norm_sq, trace, PointData};
use crate::error::{Error, Result};
use crate::lawson_simons::{generic_combination_eigen, max_commutator};
use crate::lawson_simons::{homology_verdict, OptimizerConfig, Verdict};
use crate::rng::{domain, gaussian_matrix, stream};

const WEIGHT_ATTEMPTS: u64 = 5;
const MIN_GAP_RATIO: f64 = 10.0;
const RECONSTRUCTION_PAIRS: usize = 100;

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 5 || k < 2 || k > n / 2 {
        return Err(Error::domain(format!(
            "need n >= 5 and 2 <= k <= floor(n/2), got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// `Ric_min - alpha(n, k, H, c)`.
pub fn check_pinching(p: &PointData<f64>, k: usize) -> Result<f64> {
    check_nk(p.n(), k)?;
    let h = mean_curvature_vector(p).h();
    let a = alpha(p.n() as u32, k as u32, &h, p.c())?;
    Ok(ricci_min(p).0 - a)
}

/// Common block-scalar form of all shape operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStructure {
    pub k: usize,
    /// Columns `0..k` span the `λ` block, the rest the `μ` block.
    #[serde(serialize_with = "serialize_matrix")]
    pub basis: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    /// Max entry of `BᵀH_αB - diag(λ_α I_k, μ_α I_{n-k})` over all `α`.
    pub residual: f64,
    /// Every shape operator is scalar, so any split fits.
    pub degenerate: bool,
}

impl BlockStructure {
    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthogonal projector onto the `λ` block.
    pub fn lambda_projector(&self) -> DMatrix<f64> {
        let y = self.basis.columns(0, self.k);
        &y * y.transpose()
    }

    pub fn mu_projector(&self) -> DMatrix<f64> {
        let y = self.basis.columns(self.k, self.n() - self.k);
        &y * y.transpose()
    }
}

pub(crate) fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

fn scale_of(p: &PointData<f64>) -> f64 {
    1.0 + p.max_abs_entry()
}

fn fit_blocks(p: &PointData<f64>, basis: &DMatrix<f64>, k: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let n = p.n();
    let mut lambdas = Vec::with_capacity(p.m());
    let mut mus = Vec::with_capacity(p.m());
    let mut residual: f64 = 0.0;
    for h in p.shape_ops() {
        let conj = basis.transpose() * h * basis;
        let lambda = (0..k).map(|i| conj[(i, i)]).sum::<f64>() / k as f64;
        let mu = (k..n).map(|i| conj[(i, i)]).sum::<f64>() / (n - k) as f64;
        for i in 0..n {
            for j in 0..n {
                let target = match (i == j, i < k) {
                    (false, _) => 0.0,
                    (true, true) => lambda,
                    (true, false) => mu,
                };
                residual = residual.max((conj[(i, j)] - target).abs());
            }
        }
        lambdas.push(lambda);
        mus.push(mu);
    }
    (lambdas, mus, residual)
}

/// Orders columns so the `λ` block comes first. For `n = 2k` the block whose
/// projector weighs more on the lowest-index coordinate where the two differ
/// becomes the `λ` block.
fn order_blocks(vecs: &DMatrix<f64>, lower: usize, k: usize) -> DMatrix<f64> {
    let n = vecs.nrows();
    let low: Vec<_> = (0..lower).map(|i| vecs.column(i).into_owned()).collect();
    let high: Vec<_> = (lower..n).map(|i| vecs.column(i).into_owned()).collect();
    let low_first = if lower != n - lower {
        lower == k
    } else {
        let pl = DMatrix::from_columns(&low);
        let pl = &pl * pl.transpose();
        (0..n)
            .map(|i| pl[(i, i)] - 0.5)
            .find(|d| d.abs() > 1e-8)
            .is_none_or(|d| d > 0.0)
    };
    let cols: Vec<_> = if low_first {
        low.into_iter().chain(high).collect()
    } else {
        high.into_iter().chain(low).collect()
    };
    DMatrix::from_columns(&cols)
}

/// Split point (size of the lower cluster) and its gap ratio, restricted to
/// cluster sizes `k` and `n - k`.
fn choose_split(vals: &DVector<f64>, k: usize) -> (usize, f64) {
    let n = vals.len();
    let gaps: Vec<f64> = (0..n - 1).map(|i| vals[i + 1] - vals[i]).collect();
    let mut best = (k, f64::NEG_INFINITY);
    for lower in [k, n - k] {
        let gap = gaps[lower - 1];
        if gap > best.1 {
            best = (lower, gap);
        }
    }
    let (lower, gap) = best;
    let inner = gaps
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != lower - 1)
        .map(|(_, g)| *g)
        .fold(0.0, f64::max);
    (lower, gap / inner.max(f64::MIN_POSITIVE))
}

/// Detects `diag(λ_α I_k, μ_α I_{n-k})` in a common basis, with the random
/// combination weights drawn from `seed`.
pub fn equality_case_detect_seeded(p: &PointData<f64>, k: usize, tol: f64, seed: u64) -> Option<BlockStructure> {
    let n = p.n();
    if k == 0 || k >= n {
        return None;
    }
    let scale = scale_of(p);
    let s = sff_norm_sq(p);
    let nf = n as f64;
    let identity = DMatrix::<f64>::identity(n, n);
    let scalar_residual = p
        .shape_ops()
        .iter()
        .map(|h| (h - &identity * (trace(h) / nf)).amax())
        .fold(0.0, f64::max);
    if scalar_residual <= tol * scale {
        let c: Vec<f64> = mean_curvature_vector(p).components;
        return Some(BlockStructure {
            k,
            basis: identity,
            lambdas: c.clone(),
            mus: c.clone(),
            eta1: c.clone(),
            eta2: c,
            residual: scalar_residual,
            degenerate: true,
        });
    }
    if max_commutator(p.shape_ops()) > tol * (1.0 + s) {
        return None;
    }
    let mut fallback = None;
    for attempt in 0..WEIGHT_ATTEMPTS {
        let (vals, vecs) = generic_combination_eigen(p, seed, attempt);
        let (lower, ratio) = choose_split(&vals, k);
        let basis = order_blocks(&vecs, lower, k);
        let (lambdas, mus, residual) = fit_blocks(p, &basis, k);
        if residual > tol * scale {
            continue;
        }
        let found = BlockStructure {
            k,
            basis,
            eta1: lambdas.clone(),
            eta2: mus.clone(),
            lambdas,
            mus,
            residual,
            degenerate: false,
        };
        if ratio >= MIN_GAP_RATIO {
            return Some(found);
        }
        fallback.get_or_insert(found);
    }
    fallback
}

pub fn equality_case_detect(p: &PointData<f64>, k: usize, tol: f64) -> Option<BlockStructure> {
    equality_case_detect_seeded(p, k, tol, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalNormals {
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub distinct: bool,
    /// Max `|II(X,Y) - (X₁·Y₁)η₁ - (X₂·Y₂)η₂|` over sampled unit pairs.
    pub reconstruction_residual: f64,
}

/// `η₁`, `η₂` of a detected structure, validated against `II(X, Y)` on
/// random tangent pairs.
pub fn principal_normals(p: &PointData<f64>, s: &BlockStructure, tol: f64) -> Result<PrincipalNormals> {
    let n = p.n();
    if s.basis.nrows() != n || s.basis.ncols() != n || s.lambdas.len() != p.m() || s.mus.len() != p.m() {
        return Err(Error::InvalidStructure(format!(
            "structure has basis {}x{} and {} / {} eigenvalues, point has n = {n}, m = {}",
            s.basis.nrows(),
            s.basis.ncols(),
            s.lambdas.len(),
            s.mus.len(),
            p.m()
        )));
    }
    if s.k == 0 || s.k >= n {
        return Err(Error::InvalidStructure(format!("split index {} outside 1..{n}", s.k)));
    }
    let mut rng = stream(0, &[domain::VALIDATION, n as u64, s.k as u64]);
    let mut worst: f64 = 0.0;
    for _ in 0..RECONSTRUCTION_PAIRS {
        let xy = gaussian_matrix(&mut rng, n, 2);
        let x = xy.column(0).normalize();
        let y = xy.column(1).normalize();
        let xt = s.basis.transpose() * &x;
        let yt = s.basis.transpose() * &y;
        let upper: f64 = (0..s.k).map(|i| xt[i] * yt[i]).sum();
        let lower: f64 = (s.k..n).map(|i| xt[i] * yt[i]).sum();
        for (alpha, h) in p.shape_ops().iter().enumerate() {
            let direct = x.dot(&(h * &y));
            let model = upper * s.lambdas[alpha] + lower * s.mus[alpha];
            worst = worst.max((direct - model).abs());
        }
    }
    let scale = scale_of(p);
    if worst > tol.max(1e-12) * scale * 10.0 {
        return Err(Error::InvalidStructure(format!(
            "second fundamental form differs from the block model by {worst:e}"
        )));
    }
    let gap = s
        .lambdas
        .iter()
        .zip(&s.mus)
        .map(|(l, m)| (l - m) * (l - m))
        .sum::<f64>()
        .sqrt();
    Ok(PrincipalNormals {
        eta1: s.lambdas.clone(),
        eta2: s.mus.clone(),
        distinct: gap > tol * scale,
        reconstruction_residual: worst,
    })
}

/// Dimension of the first normal space `span{II(X, Y)}`.
pub fn first_normal_rank(p: &PointData<f64>, tol: f64) -> usize {
    let n = p.n();
    let cols = n * (n + 1) / 2;
    let mut rows = DMatrix::zeros(p.m(), cols);
    for (alpha, h) in p.shape_ops().iter().enumerate() {
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                rows[(alpha, idx)] = h[(i, j)];
                idx += 1;
            }
        }
    }
    let sv = rows.singular_values();
    let top = sv.amax();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// All shape operators commute: `max ‖[H_α, H_β]‖_F <= tol (1 + S)`.
pub fn normal_flatness(p: &PointData<f64>, tol: f64) -> bool {
    max_commutator(p.shape_ops()) <= tol * (1.0 + sff_norm_sq(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PointClass {
    StrictPinchedVanishing,
    EqualityTorusStructure,
    NotPinched,
}

impl PointClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointClass::StrictPinchedVanishing => "STRICT_PINCHED_VANISHING",
            PointClass::EqualityTorusStructure => "EQUALITY_TORUS_STRUCTURE",
            PointClass::NotPinched => "NOT_PINCHED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointVerdict {
    pub k: usize,
    pub alpha: f64,
    pub pinching_margin: f64,
    pub verdict: PointClass,
    /// `max Θ_k` found, absent when the point is not pinched.
    pub theta: Option<f64>,
    pub threshold: f64,
    pub theta_global_certified: bool,
    pub structure: Option<BlockStructure>,
    /// `max |Ric_ij - δ_ij alpha|`.
    pub einstein_residual: f64,
}

/// Pointwise verdict: not pinched, pinched with `max Θ_k < k(n-k)c`, or
/// pinched at equality with the torus block structure.
pub fn classify_point(p: &PointData<f64>, k: usize, cfg: &OptimizerConfig) -> Result<PointVerdict> {
    check_nk(p.n(), k)?;
    let tol = &cfg.tolerances;
    let h = mean_curvature_vector(p).h();
    let a: f64 = alpha(p.n() as u32, k as u32, &h, p.c())?;
    let margin = ricci_min(p).0 - a;
    let ric = ricci_tensor(p);
    let einstein_residual = (&ric - DMatrix::identity(p.n(), p.n()) * a).amax();
    let threshold = crate::lawson_simons::threshold(p.n(), k, *p.c());
    let mut out = PointVerdict {
        k,
        alpha: a,
        pinching_margin: margin,
        verdict: PointClass::NotPinched,
        theta: None,
        threshold,
        theta_global_certified: false,
        structure: None,
        einstein_residual,
    };
    if margin < -tol.pinching_band(a) {
        return Ok(out);
    }
    let theta = homology_verdict(p, k, cfg)?;
    out.theta = Some(theta.value);
    out.theta_global_certified = theta.global_certified;
    match theta.verdict {
        Verdict::Strict => {
            out.verdict = PointClass::StrictPinchedVanishing;
            Ok(out)
        }
        Verdict::Violated => Err(Error::ClassificationInconsistent(format!(
            "pinched point (margin {margin:e}) has Θ_{k} = {} above k(n-k)c = {threshold}",
            theta.value
        ))),
        Verdict::Equality => {
            let structure = equality_case_detect_seeded(p, k, tol.detection, cfg.seed).ok_or_else(|| {
                Error::ClassificationInconsistent(format!(
                    "Θ_{k} reaches k(n-k)c but no block structure diag(λ I_{k}, μ I_{}) fits",
                    p.n() - k
                ))
            })?;
            if einstein_residual > tol.einstein * (1.0 + a.abs()) {
                return Err(Error::ClassificationInconsistent(format!(
                    "equality point is not Einstein: max |Ric - alpha I| = {einstein_residual:e}"
                )));
            }
            out.verdict = PointClass::EqualityTorusStructure;
            out.structure = Some(structure);
            Ok(out)
        }
    }
}
