//! Model immersions with known curvature: umbilical spheres, the Einstein
//! torus `S^k(ρ₁) × S^{n-k}(ρ₂) ⊂ S^{n+1}(r) ⊂ F^{n+m}(c)`, the minimal
//! Clifford hypersurface and umbilical compositions.
//!
//! The torus has radii `ρ₁² = (k-1)r²/(n-2)` and `ρ₂² = (n-k-1)r²/(n-2)`.
//! Its hypersurface normal gives `H₁ = diag(a I_k, -b I_{n-k})` with
//! `a = ρ₂/(ρ₁ r)` and `b = ρ₁/(ρ₂ r)`, and the umbilical normal of the
//! sphere gives `H₂ = H_u I` with `H_u² = 1/r² - c`. In exact mode both are
//! carried as a square root of a rational times a rational matrix.

use nalgebra::{DMatrix, DVector};
use num::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{alpha, alpha_from_h_sq, phi};
use crate::curvature::{mean_curvature_vector, ricci_tensor, PointData, RadicalPointData, ScaledShapeOp};
use crate::error::{Error, Result};
use crate::linalg::random_orthogonal;
use crate::rng::{domain, stream};
use crate::scalar::{format_rational, int, Field, Rational};

/// Parameters and closed-form curvature of a model immersion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: &'static str,
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub c: f64,
    pub m: usize,
    /// `c̄ = 1/r²`, curvature of the intermediate sphere.
    pub c_bar: f64,
    #[serde(rename = "H_u")]
    pub h_u: f64,
    #[serde(rename = "H_g")]
    pub h_g: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Principal curvatures along `𝓗/H` on the two factors; absent when `H = 0`.
    pub lambda1: Option<f64>,
    pub mu1: Option<f64>,
    pub ric_value: f64,
    /// `alpha(n, k, H, c)`; absent for `n < 5`.
    pub alpha: Option<f64>,
}

fn check_torus(n: usize, k: usize, m: usize, min_n: usize) -> Result<()> {
    if n < min_n || k < 2 || k > n / 2 {
        return Err(Error::domain(format!(
            "torus needs n >= {min_n} and 2 <= k <= floor(n/2), got n = {n}, k = {k}"
        )));
    }
    if m < 2 {
        return Err(Error::domain(format!("torus needs codimension m >= 2, got {m}")));
    }
    Ok(())
}

fn block_diag<T: Field>(n: usize, k: usize, upper: T, lower: T) -> DMatrix<T> {
    DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            T::zero()
        } else if i < k {
            upper.clone()
        } else {
            lower.clone()
        }
    })
}

/// `H₁ = H·I`, all other shape operators zero.
pub fn umbilical_sphere(n: usize, m: usize, c: f64, h: f64) -> Result<PointData<f64>> {
    umbilical_sphere_generic(n, m, c, h)
}

pub fn umbilical_sphere_exact(n: usize, m: usize, c: Rational, h: Rational) -> Result<PointData<Rational>> {
    umbilical_sphere_generic(n, m, c, h)
}

fn umbilical_sphere_generic<T: Field>(n: usize, m: usize, c: T, h: T) -> Result<PointData<T>> {
    if h < T::zero() {
        return Err(Error::domain("umbilical sphere needs H >= 0"));
    }
    if m == 0 {
        return Err(Error::domain("codimension m must be >= 1"));
    }
    let mut ops = vec![block_diag(n, n, h.clone(), h)];
    ops.extend((1..m).map(|_| DMatrix::from_element(n, n, T::zero())));
    PointData::new(n, c, ops)
}

/// `(λ₁, μ₁)` from `n, k, H, c` alone.
pub fn principal_values_closed_form(n: usize, k: usize, h: f64, c: f64) -> Result<(f64, f64)> {
    if k < 2 || k > n / 2 {
        return Err(Error::domain(format!("k = {k} must satisfy 2 <= k <= floor({n}/2)")));
    }
    if !(h > 0.0) {
        return Err(Error::domain("principal values need H > 0"));
    }
    if !(c + h * h > 0.0) {
        return Err(Error::domain("principal values need c + H^2 > 0"));
    }
    if n == 2 * k {
        return Ok((h, h));
    }
    let ph = phi(n as u32, &(k as f64))?.value;
    let shift = (n - 2 * k) as f64 * ph * (c + h * h) / h;
    Ok((h + shift / k as f64, h - shift / (n - k) as f64))
}

fn torus_point(n: usize, k: usize, r: f64, c: f64, m: usize) -> Result<(PointData<f64>, f64, f64, f64)> {
    if !(r > 0.0) || !(c >= 0.0) {
        return Err(Error::domain(format!(
            "torus needs r > 0 and c >= 0, got r = {r}, c = {c}"
        )));
    }
    let h_u_sq = 1.0 / (r * r) - c;
    if h_u_sq < -1e-15 * (1.0 + c) {
        return Err(Error::domain(format!("1/r^2 = {} is below c = {c}", 1.0 / (r * r))));
    }
    let h_u = h_u_sq.max(0.0).sqrt();
    let (nf, kf) = (n as f64, k as f64);
    let rho1 = ((kf - 1.0) / (nf - 2.0)).sqrt() * r;
    let rho2 = ((nf - kf - 1.0) / (nf - 2.0)).sqrt() * r;
    let a = rho2 / (rho1 * r);
    let b = rho1 / (rho2 * r);
    let mut ops = vec![block_diag(n, k, a, -b), DMatrix::identity(n, n) * h_u];
    ops.extend((2..m).map(|_| DMatrix::zeros(n, n)));
    Ok((PointData::new(n, c, ops)?, h_u, a, b))
}

fn torus_spec(
    kind: &'static str,
    n: usize,
    k: usize,
    r: f64,
    c: f64,
    m: usize,
    min_n: usize,
) -> Result<(PointData<f64>, ModelSpec)> {
    check_torus(n, k, m, min_n)?;
    let (p, h_u, a, b) = torus_point(n, k, r, c, m)?;
    let (nf, kf) = (n as f64, k as f64);
    let h_g = (nf - 2.0 * kf) / (r * nf * ((kf - 1.0) * (nf - kf - 1.0)).sqrt());
    let h = (h_g * h_g + h_u * h_u).sqrt();
    let ric_value = (nf - 2.0) / (r * r);
    let (lambda1, mu1) = if h > 0.0 {
        (Some((a * h_g + h_u * h_u) / h), Some((-b * h_g + h_u * h_u) / h))
    } else {
        (None, None)
    };
    let spec = ModelSpec {
        kind,
        n,
        k,
        r,
        c,
        m,
        c_bar: 1.0 / (r * r),
        h_u,
        h_g,
        h,
        rho1: ((kf - 1.0) / (nf - 2.0)).sqrt() * r,
        rho2: ((nf - kf - 1.0) / (nf - 2.0)).sqrt() * r,
        lambda1,
        mu1,
        ric_value,
        alpha: if n >= 5 {
            Some(alpha(n as u32, k as u32, &h, &c)?)
        } else {
            None
        },
    };
    validate_torus(&p, &spec)?;
    Ok((p, spec))
}

fn validate_torus(p: &PointData<f64>, spec: &ModelSpec) -> Result<()> {
    let scale = 1.0 + spec.ric_value.abs();
    let ric = ricci_tensor(p);
    let dev = (&ric - DMatrix::identity(spec.n, spec.n) * spec.ric_value).amax();
    if dev > 1e-10 * scale {
        return Err(Error::InternalInconsistency(format!(
            "torus Ricci deviates from (n-2)/r^2 by {dev:e}"
        )));
    }
    let mean = mean_curvature_vector(p);
    if (mean.h() - spec.h).abs() > 1e-10 * (1.0 + spec.h)
        || (mean.components[0] - spec.h_g).abs() > 1e-10 * (1.0 + spec.h)
    {
        return Err(Error::InternalInconsistency(
            "torus mean curvature disagrees with H_g, H_u".into(),
        ));
    }
    if let (Some(l), Some(m)) = (spec.lambda1, spec.mu1) {
        if spec.n >= 5 || spec.n == 2 * spec.k {
            let (lc, mc) = principal_values_closed_form(spec.n, spec.k, spec.h, spec.c)?;
            let tol = 1e-9 * (1.0 + l.abs().max(m.abs()));
            if (l - lc).abs() > tol || (m - mc).abs() > tol {
                return Err(Error::InternalInconsistency(format!(
                    "torus principal values ({l}, {m}) differ from closed form ({lc}, {mc})"
                )));
            }
        }
    }
    Ok(())
}

/// The Einstein torus with `Ric = (n-2)/r²`.
pub fn einstein_torus(n: usize, k: usize, r: f64, c: f64, m: usize) -> Result<(PointData<f64>, ModelSpec)> {
    torus_spec("torus", n, k, r, c, m, 5)
}

/// The minimal Clifford hypersurface `S^k(r/√2) × S^k(r/√2)` of `S^{2k+1}(r)`,
/// composed into `F^{2k+m}(c)`. Allows `k = 2`.
pub fn clifford_minimal(k: usize, r: f64, c: f64, m: usize) -> Result<(PointData<f64>, ModelSpec)> {
    torus_spec("clifford", 2 * k, k, r, c, m, 4)
}

/// The torus as a hypersurface of the sphere `S^{n+1}(r)` (`m = 1`, `c = 1/r²`).
pub fn einstein_hypersurface(n: usize, k: usize, r: f64) -> Result<PointData<f64>> {
    check_torus(n, k, 2, 4)?;
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let (p, _, _, _) = torus_point(n, k, r, 1.0 / (r * r), 2)?;
    PointData::new(n, 1.0 / (r * r), vec![p.shape_op(0).clone()])
}

/// Composes data in `S^{n+p}(r)` with the umbilical inclusion
/// `S^{n+p}(r) ⊂ F^{n+m}(c_outer)`: appends `H_u·I`, `H_u² = 1/r² - c_outer`,
/// and pads with zero shape operators up to `m_outer`.
pub fn compose_umbilical(inner: &PointData<f64>, r: f64, c_outer: f64, m_outer: usize) -> Result<PointData<f64>> {
    if !(r > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let c_bar = 1.0 / (r * r);
    if (inner.c() - c_bar).abs() > 1e-12 * (1.0 + c_bar) {
        return Err(Error::CurvatureMismatch {
            inner: *inner.c(),
            expected: c_bar,
        });
    }
    if c_bar < c_outer {
        return Err(Error::domain(format!(
            "1/r^2 = {c_bar} is below the outer curvature {c_outer}"
        )));
    }
    if m_outer < inner.m() + 1 {
        return Err(Error::domain(format!(
            "outer codimension {m_outer} must exceed the inner codimension {}",
            inner.m()
        )));
    }
    let n = inner.n();
    let mut ops = inner.shape_ops().to_vec();
    ops.push(DMatrix::identity(n, n) * (c_bar - c_outer).sqrt());
    ops.extend((ops.len()..m_outer).map(|_| DMatrix::zeros(n, n)));
    PointData::new(n, c_outer, ops)
}

/// Exact counterpart of [`compose_umbilical`] with `r²` given.
pub fn compose_umbilical_exact(
    inner: &RadicalPointData,
    r_sq: &Rational,
    c_outer: &Rational,
    m_outer: usize,
) -> Result<RadicalPointData> {
    if *r_sq <= Rational::zero() {
        return Err(Error::domain("radius must be positive"));
    }
    let c_bar = Rational::one() / r_sq.clone();
    if *inner.c() != c_bar {
        return Err(Error::CurvatureMismatch {
            inner: inner.c().as_f64(),
            expected: c_bar.as_f64(),
        });
    }
    if c_bar < *c_outer {
        return Err(Error::domain("1/r^2 is below the outer curvature"));
    }
    if m_outer < inner.m() + 1 {
        return Err(Error::domain("outer codimension must exceed the inner codimension"));
    }
    let n = inner.n();
    let mut ops = inner.ops().to_vec();
    ops.push(ScaledShapeOp {
        scale_sq: c_bar - c_outer.clone(),
        matrix: DMatrix::identity(n, n),
    });
    while ops.len() < m_outer {
        ops.push(ScaledShapeOp {
            scale_sq: Rational::zero(),
            matrix: DMatrix::from_element(n, n, Rational::zero()),
        });
    }
    RadicalPointData::new(n, c_outer.clone(), ops)
}

/// Squared closed-form quantities of the torus, all rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactModelSpec {
    pub n: usize,
    pub k: usize,
    pub r_sq: Rational,
    pub c: Rational,
    pub m: usize,
    pub c_bar: Rational,
    pub h_u_sq: Rational,
    pub h_g_sq: Rational,
    pub h_sq: Rational,
    pub rho1_sq: Rational,
    pub rho2_sq: Rational,
    pub a_sq: Rational,
    pub b_sq: Rational,
    pub ab: Rational,
    pub ric_value: Rational,
    pub alpha: Option<Rational>,
}

impl ExactModelSpec {
    pub fn to_json(&self) -> Value {
        let f = format_rational;
        json!({
            "kind": "torus",
            "exact": true,
            "n": self.n,
            "k": self.k,
            "r_sq": f(&self.r_sq),
            "c": f(&self.c),
            "m": self.m,
            "c_bar": f(&self.c_bar),
            "H_u_sq": f(&self.h_u_sq),
            "H_g_sq": f(&self.h_g_sq),
            "H_sq": f(&self.h_sq),
            "rho1_sq": f(&self.rho1_sq),
            "rho2_sq": f(&self.rho2_sq),
            "ric_value": f(&self.ric_value),
            "alpha": self.alpha.as_ref().map(f),
        })
    }
}

/// Torus hypersurface of `S^{n+1}(r)` with `r²` rational: one direction
/// `sqrt(1/(r²(k-1)(n-k-1))) · diag((n-k-1) I_k, -(k-1) I_{n-k})`.
pub fn einstein_hypersurface_exact(n: usize, k: usize, r_sq: &Rational) -> Result<RadicalPointData> {
    check_torus(n, k, 2, 4)?;
    if *r_sq <= Rational::zero() {
        return Err(Error::domain("radius must be positive"));
    }
    let (ni, ki) = (n as i64, k as i64);
    let scale_sq = Rational::one() / (r_sq.clone() * int((ki - 1) * (ni - ki - 1)));
    let matrix = block_diag(n, k, int(ni - ki - 1), int(-(ki - 1)));
    RadicalPointData::new(
        n,
        Rational::one() / r_sq.clone(),
        vec![ScaledShapeOp { scale_sq, matrix }],
    )
}

/// The Einstein torus in exact form, validated exactly against its closed forms.
pub fn einstein_torus_exact(
    n: usize,
    k: usize,
    r_sq: &Rational,
    c: &Rational,
    m: usize,
) -> Result<(RadicalPointData, ExactModelSpec)> {
    torus_exact(n, k, r_sq, c, m, 5)
}

pub fn clifford_minimal_exact(
    k: usize,
    r_sq: &Rational,
    c: &Rational,
    m: usize,
) -> Result<(RadicalPointData, ExactModelSpec)> {
    torus_exact(2 * k, k, r_sq, c, m, 4)
}

fn torus_exact(
    n: usize,
    k: usize,
    r_sq: &Rational,
    c: &Rational,
    m: usize,
    min_n: usize,
) -> Result<(RadicalPointData, ExactModelSpec)> {
    check_torus(n, k, m, min_n)?;
    if *c < Rational::zero() {
        return Err(Error::domain("torus needs c >= 0"));
    }
    let inner = einstein_hypersurface_exact(n, k, r_sq)?;
    let p = compose_umbilical_exact(&inner, r_sq, c, m)?;
    let (ni, ki) = (n as i64, k as i64);
    let c_bar = Rational::one() / r_sq.clone();
    let h_u_sq = c_bar.clone() - c.clone();
    let h_g_sq = int((ni - 2 * ki) * (ni - 2 * ki)) / (r_sq.clone() * int(ni * ni * (ki - 1) * (ni - ki - 1)));
    let h_sq = h_g_sq.clone() + h_u_sq.clone();
    let ric_value = int(ni - 2) / r_sq.clone();
    let spec = ExactModelSpec {
        n,
        k,
        r_sq: r_sq.clone(),
        c: c.clone(),
        m,
        c_bar: c_bar.clone(),
        h_u_sq,
        h_g_sq,
        rho1_sq: Rational::ratio(ki - 1, ni - 2) * r_sq.clone(),
        rho2_sq: Rational::ratio(ni - ki - 1, ni - 2) * r_sq.clone(),
        a_sq: Rational::ratio(ni - ki - 1, ki - 1) * c_bar.clone(),
        b_sq: Rational::ratio(ki - 1, ni - ki - 1) * c_bar.clone(),
        ab: c_bar,
        alpha: if n >= 5 {
            Some(alpha_from_h_sq(n as u32, k as u32, &h_sq, c)?)
        } else {
            None
        },
        h_sq,
        ric_value,
    };
    let ric = p.ricci_tensor();
    let expected = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            spec.ric_value.clone()
        } else {
            Rational::zero()
        }
    });
    if ric != expected {
        return Err(Error::InternalInconsistency(
            "exact torus Ricci is not (n-2)/r^2 I".into(),
        ));
    }
    if p.mean_curvature_sq() != spec.h_sq {
        return Err(Error::InternalInconsistency(
            "exact torus H^2 differs from H_g^2 + H_u^2".into(),
        ));
    }
    Ok((p, spec))
}

/// Block data `diag(λ_α I_k, μ_α I_{n-k})` in a seeded random tangent frame,
/// with a seeded random rotation of the normal frame. Also returns the
/// tangent rotation `Q` (the `λ` block is spanned by its first `k` columns)
/// and the normal rotation `O` (`H'_β = Σ_α O[β, α] H_α`).
pub fn equality_case_synthetic_parts(
    n: usize,
    k: usize,
    lambdas: &[f64],
    mus: &[f64],
    c: f64,
    seed: u64,
) -> Result<(PointData<f64>, DMatrix<f64>, DMatrix<f64>)> {
    if lambdas.len() != mus.len() || lambdas.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} lambdas and {} mus; need equal, non-zero counts",
            lambdas.len(),
            mus.len()
        )));
    }
    if n < 5 || k < 2 || k > n / 2 {
        return Err(Error::domain(format!(
            "need n >= 5 and 2 <= k <= floor(n/2), got n = {n}, k = {k}"
        )));
    }
    let ops = lambdas.iter().zip(mus).map(|(&l, &m)| block_diag(n, k, l, m)).collect();
    let base = PointData::new(n, c, ops)?;
    let mut rng = stream(seed, &[domain::SYNTHETIC]);
    let q = random_orthogonal(&mut rng, n);
    let o = random_orthogonal(&mut rng, lambdas.len());
    let p = base.conjugate_tangent(&q.transpose())?.mix_normal(&o)?;
    Ok((p, q, o))
}

pub fn equality_case_synthetic(
    n: usize,
    k: usize,
    lambdas: &[f64],
    mus: &[f64],
    c: f64,
    seed: u64,
) -> Result<PointData<f64>> {
    Ok(equality_case_synthetic_parts(n, k, lambdas, mus, c, seed)?.0)
}

/// Normal-frame coefficients `(η₁, η₂)` of the torus: `(a, H_u, 0, ..)` and `(-b, H_u, 0, ..)`.
pub fn torus_principal_normals(spec: &ModelSpec) -> (DVector<f64>, DVector<f64>) {
    let r = spec.r;
    let a = spec.rho2 / (spec.rho1 * r);
    let b = spec.rho1 / (spec.rho2 * r);
    let mut e1 = DVector::zeros(spec.m);
    let mut e2 = DVector::zeros(spec.m);
    e1[0] = a;
    e2[0] = -b;
    e1[1] = spec.h_u;
    e2[1] = spec.h_u;
    (e1, e2)
}
