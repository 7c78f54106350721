//! The Lawson-Simons functional
//! `Θ_q = Σ_{i≤q<j} (2|II(e_i,e_j)|² - <II(e_i,e_i), II(e_j,e_j)>)`
//! over tangent `q`-planes, its maximization over the Grassmannian, and the
//! homology-vanishing verdict `max Θ_q` vs `q(n-q)c`.

mod chain;
mod instances;
mod optimizer;

pub use chain::{verify_lemma_chain, ChainRecord, ChainStep, Relation};
pub use instances::{pinched_instance, PinchedInstance, PinchedSpec};
pub use optimizer::{
    coordinate_subset_max, homology_verdict, maximize_theta, Certificate, OptimizerConfig, StartOrigin, ThetaResult,
    Verdict,
};
pub(crate) use optimizer::{generic_combination_eigen, max_commutator};

use nalgebra::DMatrix;

use crate::curvature::{trace, PointData};
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_completion, orthonormality_defect};
use crate::scalar::Field;

/// A tangent basis whose first `q` columns span the plane `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSplit {
    q: usize,
    basis: DMatrix<f64>,
}

impl SubspaceSplit {
    pub fn new(q: usize, basis: DMatrix<f64>) -> Result<Self> {
        let n = basis.nrows();
        if basis.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "split basis is {}x{}, expected square",
                n,
                basis.ncols()
            )));
        }
        if q == 0 || q >= n {
            return Err(Error::domain(format!(
                "q = {q} must satisfy 1 <= q <= n-1 = {}",
                n.saturating_sub(1)
            )));
        }
        let defect = orthonormality_defect(&basis);
        if defect > 1e-10 {
            return Err(Error::domain(format!(
                "split basis is not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self { q, basis })
    }

    /// `{e_1..e_q} | {e_{q+1}..e_n}` in the standard frame.
    pub fn coordinate(n: usize, q: usize) -> Result<Self> {
        Self::new(q, DMatrix::identity(n, n))
    }

    /// Columns `subset` of `basis` first, the remaining columns after, in order.
    pub fn from_subset(basis: &DMatrix<f64>, subset: &[usize]) -> Result<Self> {
        let n = basis.ncols();
        let mut order: Vec<usize> = subset.to_vec();
        order.extend((0..n).filter(|i| !subset.contains(i)));
        let cols: Vec<_> = order.iter().map(|&i| basis.column(i).into_owned()).collect();
        Self::new(subset.len(), DMatrix::from_columns(&cols))
    }

    /// Completes orthonormal columns `y` (n×q) to a split.
    pub fn from_frame(y: &DMatrix<f64>) -> Result<Self> {
        Self::new(y.ncols(), orthonormal_completion(y))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// The first `q` basis columns.
    pub fn frame(&self) -> DMatrix<f64> {
        self.basis.columns(0, self.q).into_owned()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        let y = self.frame();
        &y * y.transpose()
    }
}

/// One direction's contribution to `Θ_q` in the coordinate split.
pub fn theta_direction_coordinates<T: Field>(h: &DMatrix<T>, q: usize) -> T {
    let n = h.nrows();
    let two = T::from_int(2);
    let mut acc = T::zero();
    for i in 0..q {
        for j in q..n {
            acc = acc + two.clone() * h[(i, j)].square() - h[(i, i)].clone() * h[(j, j)].clone();
        }
    }
    acc
}

/// `Θ_q` for the coordinate split of the frame the data is expressed in.
pub fn theta_q_coordinates<T: Field>(p: &PointData<T>, q: usize) -> Result<T> {
    if q == 0 || q >= p.n() {
        return Err(Error::domain(format!("q = {q} must satisfy 1 <= q <= n-1")));
    }
    Ok(p.shape_ops()
        .iter()
        .fold(T::zero(), |acc, h| acc + theta_direction_coordinates(h, q)))
}

/// `Θ_q` for the split's basis.
pub fn theta_q_basis(p: &PointData<f64>, split: &SubspaceSplit) -> Result<f64> {
    if split.n() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "split has dimension {}, point has n = {}",
            split.n(),
            p.n()
        )));
    }
    let conj = p.conjugate_tangent(split.basis())?;
    theta_q_coordinates(&conj, split.q())
}

/// Basis-free `Θ_q = Σ_α (2‖P⊥ H_α P‖_F² - tr(P H_α) tr(P⊥ H_α))` for an
/// orthogonal projection `P` of rank `q`.
pub fn theta_q_subspace(p: &PointData<f64>, v: &DMatrix<f64>) -> Result<f64> {
    let n = p.n();
    if v.nrows() != n || v.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "projection is {}x{}, expected {n}x{n}",
            v.nrows(),
            v.ncols()
        )));
    }
    let tr = trace(v);
    let q = tr.round();
    let not_proj = |reason: String| Error::NotAProjection {
        rank: q.max(0.0) as usize,
        reason,
    };
    let asym = (v - v.transpose()).amax();
    if asym > 1e-9 {
        return Err(not_proj(format!("asymmetry {asym:e}")));
    }
    let idem = (v * v - v).amax();
    if idem > 1e-9 {
        return Err(not_proj(format!("|P^2 - P| = {idem:e}")));
    }
    if (tr - q).abs() > 1e-9 || q < 1.0 || q > (n - 1) as f64 {
        return Err(not_proj(format!("trace {tr} is not an integer rank in [1, n-1]")));
    }
    let perp = DMatrix::identity(n, n) - v;
    let mut acc = 0.0;
    for h in p.shape_ops() {
        let off = &perp * h * v;
        acc += 2.0 * off.norm_squared() - trace(&(v * h)) * trace(&(&perp * h));
    }
    Ok(acc)
}

/// `q(n-q)c`.
pub fn threshold(n: usize, q: usize, c: f64) -> f64 {
    (q * (n - q)) as f64 * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormalize, random_orthogonal};
    use crate::rng::{gaussian_matrix, gaussian_symmetric, stream};
    use proptest::prelude::*;

    fn random_point(seed: u64, n: usize, m: usize) -> PointData {
        let mut rng = stream(seed, &[101]);
        PointData::new(n, 0.3, (0..m).map(|_| gaussian_symmetric(&mut rng, n)).collect()).unwrap()
    }

    /// Four-index loop straight from the definition.
    fn theta_oracle(p: &PointData, basis: &DMatrix<f64>, q: usize) -> f64 {
        let n = p.n();
        let mut total = 0.0;
        for i in 0..q {
            for j in q..n {
                let ei = basis.column(i);
                let ej = basis.column(j);
                for h in p.shape_ops() {
                    let mut hij = 0.0;
                    let mut hii = 0.0;
                    let mut hjj = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            hij += ei[a] * h[(a, b)] * ej[b];
                            hii += ei[a] * h[(a, b)] * ei[b];
                            hjj += ej[a] * h[(a, b)] * ej[b];
                        }
                    }
                    total += 2.0 * hij * hij - hii * hjj;
                }
            }
        }
        total
    }

    /// Classical Gram-Schmidt of the frame followed by the standard axes.
    fn gram_schmidt_completion(y: &DMatrix<f64>) -> DMatrix<f64> {
        let n = y.nrows();
        let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
        let candidates = y
            .column_iter()
            .map(|c| c.into_owned())
            .chain((0..n).map(|i| nalgebra::DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })));
        for mut v in candidates {
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
            if v.norm() > 1e-6 && cols.len() < n {
                cols.push(v.normalize());
            }
        }
        DMatrix::from_columns(&cols)
    }

    #[test]
    fn umbilical_theta_is_constant() {
        let (n, q, l) = (6, 2, 1.7);
        let p = PointData::new(n, 0.0, vec![DMatrix::identity(n, n) * l, DMatrix::zeros(n, n)]).unwrap();
        let mut rng = stream(1, &[]);
        let split = SubspaceSplit::new(q, random_orthogonal(&mut rng, n)).unwrap();
        let expected = -((q * (n - q)) as f64) * l * l;
        assert!((theta_q_basis(&p, &split).unwrap() - expected).abs() < 1e-12);
        assert!((theta_q_subspace(&p, &split.projector()).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_sff_theta() {
        let p = PointData::new(5, 1.0, vec![DMatrix::zeros(5, 5)]).unwrap();
        assert_eq!(theta_q_coordinates(&p, 2).unwrap(), 0.0);
    }

    #[test]
    fn basis_form_matches_four_index_oracle() {
        let p = random_point(2, 6, 3);
        let mut rng = stream(2, &[]);
        for q in 1..6 {
            let split = SubspaceSplit::new(q, random_orthogonal(&mut rng, 6)).unwrap();
            let fast = theta_q_basis(&p, &split).unwrap();
            let slow = theta_oracle(&p, split.basis(), q);
            assert!((fast - slow).abs() < 1e-12 * (1.0 + slow.abs()), "q = {q}");
        }
    }

    #[test]
    fn subspace_form_on_diagonal_data() {
        let d1 = [1.0, -2.0, 0.5, 3.0, 1.5];
        let d2 = [0.0, 1.0, 1.0, -1.0, 2.0];
        let p = PointData::new(
            5,
            0.0,
            vec![
                DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d1)),
                DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d2)),
            ],
        )
        .unwrap();
        let q = 2;
        let v = DMatrix::from_fn(5, 5, |i, j| if i == j && i < q { 1.0 } else { 0.0 });
        let expected: f64 = [d1, d2]
            .iter()
            .map(|d| -(d[..q].iter().sum::<f64>()) * d[q..].iter().sum::<f64>())
            .sum();
        assert!((theta_q_subspace(&p, &v).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn subspace_rejects_non_projections() {
        let p = random_point(3, 4, 1);
        let mut v = DMatrix::identity(4, 4);
        v[(3, 3)] = 0.0;
        v[(0, 0)] = 0.9;
        assert!(matches!(theta_q_subspace(&p, &v), Err(Error::NotAProjection { .. })));
        assert!(matches!(
            theta_q_subspace(&p, &DMatrix::identity(4, 4)),
            Err(Error::NotAProjection { .. })
        ));
        assert!(matches!(
            theta_q_subspace(&p, &DMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn split_validation() {
        assert!(SubspaceSplit::coordinate(5, 0).is_err());
        assert!(SubspaceSplit::coordinate(5, 5).is_err());
        assert!(SubspaceSplit::new(2, DMatrix::from_element(4, 4, 0.5)).is_err());
        let p = random_point(4, 5, 1);
        let split = SubspaceSplit::coordinate(4, 2).unwrap();
        assert!(matches!(theta_q_basis(&p, &split), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn q_equal_one_is_accepted() {
        let p = random_point(5, 5, 2);
        let split = SubspaceSplit::coordinate(5, 1).unwrap();
        assert!(theta_q_basis(&p, &split).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn subspace_equals_basis_form(seed in any::<u64>(), n in 3usize..9, m in 1usize..4, qf in 0.0f64..1.0) {
            let q = 1 + ((n - 1) as f64 * qf).floor().min((n - 2) as f64) as usize;
            let p = random_point(seed, n, m);
            let mut rng = stream(seed, &[5]);
            let y = orthonormalize(&gaussian_matrix(&mut rng, n, q));
            let completed = gram_schmidt_completion(&y);
            let split = SubspaceSplit::new(q, completed).unwrap();
            let a = theta_q_basis(&p, &split).unwrap();
            let b = theta_q_subspace(&p, &(&y * y.transpose())).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }

        #[test]
        fn block_rotation_invariance(seed in any::<u64>(), n in 3usize..9, m in 1usize..4, qf in 0.0f64..1.0) {
            let q = 1 + ((n - 1) as f64 * qf).floor().min((n - 2) as f64) as usize;
            let p = random_point(seed, n, m);
            let mut rng = stream(seed, &[6]);
            let basis = random_orthogonal(&mut rng, n);
            let q1 = random_orthogonal(&mut rng, q);
            let q2 = random_orthogonal(&mut rng, n - q);
            let mut block = DMatrix::zeros(n, n);
            block.view_mut((0, 0), (q, q)).copy_from(&q1);
            block.view_mut((q, q), (n - q, n - q)).copy_from(&q2);
            let a = theta_q_basis(&p, &SubspaceSplit::new(q, basis.clone()).unwrap()).unwrap();
            let b = theta_q_basis(&p, &SubspaceSplit::new(q, &basis * block).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }
}
