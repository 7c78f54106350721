//! Gauss-equation curvature quantities from pointwise second fundamental form data.
//!
//! A point is described by `m` symmetric `n×n` shape operators `H_α = (h_ij^α)`
//! in orthonormal tangent and normal frames, plus the sectional curvature `c`
//! of the ambient space form. All functions are generic over [`Field`] so
//! the identities can be evaluated either in `f64` or exactly in
//! [`Rational`].

use nalgebra::{DMatrix, DVector};
use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::scalar::{Field, Rational};
use crate::tolerance::Tolerances;

/// One point's immersion jet.
#[derive(Debug, Clone, PartialEq)]
pub struct PointData<T: Field = f64> {
    n: usize,
    c: T,
    shape_ops: Vec<DMatrix<T>>,
}

impl<T: Field> PointData<T> {
    /// Validates dimensions and symmetrizes the shape operators under the
    /// default ingestion tolerance.
    pub fn new(n: usize, c: T, shape_ops: Vec<DMatrix<T>>) -> Result<Self> {
        Self::with_symmetry_tolerance(n, c, shape_ops, Tolerances::default().symmetry)
    }

    /// Asymmetry up to `tol * (1 + max|h|)` is averaged away; anything larger
    /// is rejected with the offending `(α, i, j)`.
    pub fn with_symmetry_tolerance(n: usize, c: T, shape_ops: Vec<DMatrix<T>>, tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("tangent dimension n = {n} must be >= 2")));
        }
        if shape_ops.is_empty() {
            return Err(Error::domain("codimension m must be >= 1"));
        }
        let two = T::from_int(2);
        let mut ops = Vec::with_capacity(shape_ops.len());
        for (alpha, h) in shape_ops.into_iter().enumerate() {
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "shape operator {alpha} is {}x{}, expected {n}x{n}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            let max_abs = h.iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max);
            let bound = tol * (1.0 + max_abs);
            let mut sym = h.clone();
            for i in 0..n {
                for j in (i + 1)..n {
                    let a = &h[(i, j)];
                    let b = &h[(j, i)];
                    if a == b {
                        continue;
                    }
                    let asymmetry = (a.clone() - b.clone()).as_f64().abs();
                    if !(asymmetry <= bound) {
                        return Err(Error::Symmetry { alpha, i, j, asymmetry });
                    }
                    let mid = (a.clone() + b.clone()) / two.clone();
                    sym[(i, j)] = mid.clone();
                    sym[(j, i)] = mid;
                }
            }
            ops.push(sym);
        }
        Ok(Self { n, c, shape_ops: ops })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.shape_ops.len()
    }

    pub fn c(&self) -> &T {
        &self.c
    }

    pub fn shape_ops(&self) -> &[DMatrix<T>] {
        &self.shape_ops
    }

    pub fn shape_op(&self, alpha: usize) -> &DMatrix<T> {
        &self.shape_ops[alpha]
    }

    pub fn to_float(&self) -> PointData<f64> {
        PointData {
            n: self.n,
            c: self.c.as_f64(),
            shape_ops: self.shape_ops.iter().map(|h| h.map(|x| x.as_f64())).collect(),
        }
    }

    /// Largest entry magnitude over all shape operators.
    pub fn max_abs_entry(&self) -> f64 {
        self.shape_ops
            .iter()
            .flat_map(|h| h.iter())
            .map(|x| x.as_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl PointData<f64> {
    /// Expresses the data in the tangent frame given by the columns of the
    /// orthogonal matrix `q`: each `H_α` becomes `qᵀ H_α q`.
    pub fn conjugate_tangent(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.n || q.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "frame is {}x{}, expected {}x{}",
                q.nrows(),
                q.ncols(),
                self.n,
                self.n
            )));
        }
        let ops = self
            .shape_ops
            .iter()
            .map(|h| crate::linalg::symmetrize(&(q.transpose() * h * q)))
            .collect();
        Ok(Self {
            n: self.n,
            c: self.c,
            shape_ops: ops,
        })
    }

    /// Changes the normal frame by the orthogonal `m×m` matrix `o`:
    /// `H'_β = Σ_α o[β, α] H_α`.
    pub fn mix_normal(&self, o: &DMatrix<f64>) -> Result<Self> {
        let m = self.m();
        if o.nrows() != m || o.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "normal rotation is {}x{}, expected {m}x{m}",
                o.nrows(),
                o.ncols()
            )));
        }
        let ops = (0..m)
            .map(|beta| {
                let mut acc = DMatrix::zeros(self.n, self.n);
                for (alpha, h) in self.shape_ops.iter().enumerate() {
                    acc += h * o[(beta, alpha)];
                }
                acc
            })
            .collect();
        Ok(Self {
            n: self.n,
            c: self.c,
            shape_ops: ops,
        })
    }

    /// Adds `noise` to the shape operators (kept symmetric).
    pub fn perturbed(&self, noise: &[DMatrix<f64>]) -> Result<Self> {
        let ops = self
            .shape_ops
            .iter()
            .zip(noise)
            .map(|(h, e)| h + crate::linalg::symmetrize(e))
            .collect();
        PointData::new(self.n, self.c, ops)
    }
}

pub fn trace<T: Field>(h: &DMatrix<T>) -> T {
    (0..h.nrows()).fold(T::zero(), |acc, i| acc + h[(i, i)].clone())
}

pub fn frobenius_sq<T: Field>(h: &DMatrix<T>) -> T {
    h.iter().fold(T::zero(), |acc, x| acc + x.square())
}

/// `tr(H) H - H²`, one normal direction's share of the Ricci tensor.
/// Exactly symmetric by construction.
pub fn direction_ricci_term<T: Field>(h: &DMatrix<T>) -> DMatrix<T> {
    let n = h.nrows();
    let tr = trace(h);
    let mut out = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        for j in i..n {
            let sq = (0..n).fold(T::zero(), |acc, l| acc + h[(i, l)].clone() * h[(j, l)].clone());
            let v = tr.clone() * h[(i, j)].clone() - sq;
            out[(i, j)] = v.clone();
            out[(j, i)] = v;
        }
    }
    out
}

/// Mean curvature vector components `c_α = tr(H_α)/n` and `H² = Σ c_α²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurvature<T: Field = f64> {
    pub components: Vec<T>,
    pub h_sq: T,
}

impl<T: Field> MeanCurvature<T> {
    pub fn h(&self) -> f64 {
        self.h_sq.as_f64().max(0.0).sqrt()
    }
}

pub fn mean_curvature_vector<T: Field>(p: &PointData<T>) -> MeanCurvature<T> {
    let n = T::from_int(p.n as i64);
    let components: Vec<T> = p.shape_ops.iter().map(|h| trace(h) / n.clone()).collect();
    let h_sq = components.iter().fold(T::zero(), |acc, c| acc + c.square());
    MeanCurvature { components, h_sq }
}

/// `Ric_ij = (n-1)c δ_ij + Σ_α (n c_α h_ij^α - Σ_k h_ik^α h_jk^α)`.
pub fn ricci_tensor<T: Field>(p: &PointData<T>) -> DMatrix<T> {
    let n = p.n;
    let diag = T::from_int(n as i64 - 1) * p.c.clone();
    let mut ric = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        ric[(i, i)] = diag.clone();
    }
    for h in &p.shape_ops {
        let term = direction_ricci_term(h);
        for (r, t) in ric.iter_mut().zip(term.iter()) {
            *r = r.clone() + t.clone();
        }
    }
    ric
}

/// `S = Σ_α ‖H_α‖_F²`.
pub fn sff_norm_sq<T: Field>(p: &PointData<T>) -> T {
    p.shape_ops.iter().fold(T::zero(), |acc, h| acc + frobenius_sq(h))
}

/// `n(n-1)c + n²H² - S`.
pub fn scalar_curvature_identity<T: Field>(p: &PointData<T>) -> T {
    let n = p.n as i64;
    let h_sq = mean_curvature_vector(p).h_sq;
    T::from_int(n * (n - 1)) * p.c.clone() + T::from_int(n * n) * h_sq - sff_norm_sq(p)
}

/// Scalar curvature, computed as `trace(Ric)` and checked against the
/// Gauss identity `n(n-1)c + n²H² - S`.
pub fn scalar_curvature<T: Field>(p: &PointData<T>) -> Result<T> {
    scalar_curvature_with(p, Tolerances::default().scalar_identity)
}

pub fn scalar_curvature_with<T: Field>(p: &PointData<T>, rel: f64) -> Result<T> {
    let from_trace = trace(&ricci_tensor(p));
    let n = p.n as f64;
    let h_sq = mean_curvature_vector(p).h_sq.as_f64();
    let s = sff_norm_sq(p).as_f64();
    let from_identity = scalar_curvature_identity(p);
    let scale = [1.0, (n * (n - 1.0) * p.c.as_f64()).abs(), n * n * h_sq, s]
        .into_iter()
        .fold(0.0, f64::max);
    if !from_trace.agrees(&from_identity, scale, rel) {
        return Err(Error::InternalInconsistency(format!(
            "trace(Ric) = {:e} but n(n-1)c + n^2H^2 - S = {:e}",
            from_trace.as_f64(),
            from_identity.as_f64()
        )));
    }
    Ok(from_trace)
}

/// Smallest Ricci eigenvalue with a unit eigenvector.
pub fn ricci_min(p: &PointData<f64>) -> (f64, DVector<f64>) {
    let (vals, vecs) = sym_eigen(&ricci_tensor(p));
    (vals[0], vecs.column(0).into_owned())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSummary {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub mean_vector: Vec<f64>,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub ric: Vec<Vec<f64>>,
    pub rho: f64,
    pub ric_min: f64,
    pub ric_min_direction: Vec<f64>,
}

pub fn summarize(p: &PointData<f64>) -> Result<CurvatureSummary> {
    let mean = mean_curvature_vector(p);
    let ric = ricci_tensor(p);
    let rho = scalar_curvature(p)?;
    let (ric_min, dir) = ricci_min(p);
    Ok(CurvatureSummary {
        n: p.n(),
        m: p.m(),
        c: p.c,
        h: mean.h(),
        mean_vector: mean.components,
        s: sff_norm_sq(p),
        ric: ric.row_iter().map(|r| r.iter().copied().collect()).collect(),
        rho,
        ric_min,
        ric_min_direction: dir.iter().copied().collect(),
    })
}

/// A shape operator `sqrt(scale_sq) * matrix` with rational `scale_sq >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledShapeOp {
    pub scale_sq: Rational,
    pub matrix: DMatrix<Rational>,
}

/// Exact representation for data whose shape operators are rational matrices
/// times square roots of rationals.
///
/// Every curvature quantity is quadratic in each single shape operator, so
/// Ricci, scalar curvature, `S`, `H²` and `Θ_q` (in the given frame) come
/// out exactly rational even though the entries are irrational.
#[derive(Debug, Clone, PartialEq)]
pub struct RadicalPointData {
    n: usize,
    c: Rational,
    ops: Vec<ScaledShapeOp>,
}

impl RadicalPointData {
    pub fn new(n: usize, c: Rational, ops: Vec<ScaledShapeOp>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("tangent dimension n = {n} must be >= 2")));
        }
        if ops.is_empty() {
            return Err(Error::domain("codimension m must be >= 1"));
        }
        for (alpha, op) in ops.iter().enumerate() {
            if op.scale_sq.is_negative() {
                return Err(Error::domain(format!("direction {alpha} has negative scale_sq")));
            }
            if op.matrix.nrows() != n || op.matrix.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "shape operator {alpha} is not {n}x{n}"
                )));
            }
            if op.matrix != op.matrix.transpose() {
                return Err(Error::domain(format!("shape operator {alpha} is not symmetric")));
            }
        }
        Ok(Self { n, c, ops })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.ops.len()
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn ops(&self) -> &[ScaledShapeOp] {
        &self.ops
    }

    /// Appends a normal direction with shape operator `sqrt(scale_sq) * matrix`.
    pub fn with_direction(mut self, op: ScaledShapeOp) -> Result<Self> {
        self.ops.push(op);
        Self::new(self.n, self.c, self.ops)
    }

    /// `c_α²` for each direction.
    pub fn mean_components_sq(&self) -> Vec<Rational> {
        let n = Rational::from_int(self.n as i64);
        self.ops
            .iter()
            .map(|op| op.scale_sq.clone() * (trace(&op.matrix) / n.clone()).square())
            .collect()
    }

    pub fn mean_curvature_sq(&self) -> Rational {
        self.mean_components_sq()
            .into_iter()
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn sff_norm_sq(&self) -> Rational {
        self.ops.iter().fold(Rational::zero(), |acc, op| {
            acc + op.scale_sq.clone() * frobenius_sq(&op.matrix)
        })
    }

    pub fn ricci_tensor(&self) -> DMatrix<Rational> {
        let n = self.n;
        let mut ric = DMatrix::from_element(n, n, Rational::zero());
        let diag = Rational::from_int(n as i64 - 1) * self.c.clone();
        for i in 0..n {
            ric[(i, i)] = diag.clone();
        }
        for op in &self.ops {
            let term = direction_ricci_term(&op.matrix);
            ric += term.map(|x| x * op.scale_sq.clone());
        }
        ric
    }

    /// Scalar curvature via `trace(Ric)`, asserted equal to the Gauss identity.
    pub fn scalar_curvature(&self) -> Result<Rational> {
        let n = self.n as i64;
        let from_trace = trace(&self.ricci_tensor());
        let from_identity = Rational::from_int(n * (n - 1)) * self.c.clone()
            + Rational::from_int(n * n) * self.mean_curvature_sq()
            - self.sff_norm_sq();
        if from_trace != from_identity {
            return Err(Error::InternalInconsistency(
                "exact trace(Ric) differs from the Gauss identity".into(),
            ));
        }
        Ok(from_trace)
    }

    /// `Θ_q` for the coordinate split `{e_1..e_q} | {e_{q+1}..e_n}`.
    pub fn theta_q_coordinates(&self, q: usize) -> Rational {
        self.ops.iter().fold(Rational::zero(), |acc, op| {
            acc + op.scale_sq.clone() * crate::lawson_simons::theta_direction_coordinates(&op.matrix, q)
        })
    }

    pub fn to_float(&self) -> PointData<f64> {
        let ops = self
            .ops
            .iter()
            .map(|op| {
                let s = op.scale_sq.as_f64().sqrt();
                op.matrix.map(|x| x.as_f64() * s)
            })
            .collect();
        PointData {
            n: self.n,
            c: self.c.as_f64(),
            shape_ops: ops,
        }
    }
}
