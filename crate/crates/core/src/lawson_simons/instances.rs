//! Random points that satisfy the Ricci pinching hypothesis with a chosen margin.
//!
//! Shape operators are drawn with Gaussian entries; the first is then shifted
//! by `t·I`, which for large `t` raises `Ric_min` faster than
//! `alpha(n, k, H, c)`. The shift is the smallest root in `[0, 10]` of
//! `Ric_min - alpha - margin`, refined by bisection from its upper side so
//! the achieved margin is never below the target.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::bounds::alpha;
use crate::curvature::{mean_curvature_vector, ricci_min, PointData};
use crate::error::{Error, Result};
use crate::rng::gaussian_symmetric;

const SHIFT_MAX: f64 = 10.0;
const SCAN_STEPS: usize = 400;
const ENTRY_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchedSpec {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub c: f64,
    /// Target `Ric_min - alpha`.
    pub margin: f64,
}

impl PinchedSpec {
    /// `n` in `5..=8`, `k` in `2..=n/2`, `m` in `1..=4`, `c` in `{0, 1}`,
    /// margin uniform in `[1e-6, 0.5]`.
    pub fn sample(rng: &mut impl Rng) -> Self {
        let n = rng.random_range(5..=8);
        Self {
            n,
            k: rng.random_range(2..=n / 2),
            m: rng.random_range(1..=4),
            c: if rng.random_bool(0.5) { 1.0 } else { 0.0 },
            margin: rng.random_range(1e-6..=0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinchedInstance {
    pub spec: PinchedSpec,
    pub point: PointData<f64>,
    pub shift: f64,
    /// Achieved `Ric_min - alpha`, at least `spec.margin`.
    pub margin: f64,
}

fn shifted(base: &[DMatrix<f64>], n: usize, t: f64) -> Vec<DMatrix<f64>> {
    let mut ops = base.to_vec();
    ops[0] += DMatrix::identity(n, n) * t;
    ops
}

fn excess(spec: &PinchedSpec, base: &[DMatrix<f64>], t: f64) -> Result<(f64, PointData<f64>)> {
    let p = PointData::new(spec.n, spec.c, shifted(base, spec.n, t))?;
    let h = mean_curvature_vector(&p).h();
    let a = alpha(spec.n as u32, spec.k as u32, &h, &spec.c)?;
    Ok((ricci_min(&p).0 - a, p))
}

/// Draws one instance for `spec`; `None` when the draw is already pinched
/// at `t = 0` or no shift in `[0, 10]` reaches the margin.
pub fn pinched_instance(spec: &PinchedSpec, rng: &mut impl Rng) -> Result<Option<PinchedInstance>> {
    if spec.n < 5 || spec.k < 2 || spec.k > spec.n / 2 || spec.m == 0 {
        return Err(Error::domain(format!(
            "need n >= 5, 2 <= k <= n/2, m >= 1; got n = {}, k = {}, m = {}",
            spec.n, spec.k, spec.m
        )));
    }
    if !(spec.margin >= 0.0) {
        return Err(Error::domain("margin must be non-negative"));
    }
    let base: Vec<_> = (0..spec.m)
        .map(|_| gaussian_symmetric(rng, spec.n) * ENTRY_SCALE)
        .collect();
    let g = |t: f64| excess(spec, &base, t).map(|(v, _)| v - spec.margin);
    if g(0.0)? >= 0.0 {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = None;
    for step in 1..=SCAN_STEPS {
        let t = SHIFT_MAX * step as f64 / SCAN_STEPS as f64;
        if g(t)? >= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let Some(mut hi) = hi else { return Ok(None) };
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (margin, point) = excess(spec, &base, hi)?;
    Ok(Some(PinchedInstance {
        spec: spec.clone(),
        point,
        shift: hi,
        margin,
    }))
}
