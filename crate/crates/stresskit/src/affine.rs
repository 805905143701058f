//! Affine subspaces ("flats") of R^D with tolerance-based arithmetic.
//!
//! A flat is stored as an anchor point plus an orthonormal direction basis;
//! joins are then cheap (stack and re-orthonormalize) and meets go through a
//! single rank-revealing solve on the stacked normal equations. The empty
//! intersection is represented as `None` rather than an error: [`AffineSubspace::meet`]
//! is total.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric;
use crate::tol::Tolerances;

/// A k-dimensional affine subspace of R^D (k = 0 for a single point).
///
/// Values are immutable after construction and safe to share across threads;
/// all operations are pure functions.
#[derive(Clone, Debug)]
pub struct AffineSubspace {
    anchor: DVector<f64>,
    /// D x k matrix with orthonormal columns spanning the direction space.
    basis: DMatrix<f64>,
}

impl AffineSubspace {
    /// Build from an anchor and an already-orthonormal basis.
    pub fn new(anchor: DVector<f64>, basis: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if basis.nrows() != anchor.len() {
            return Err(Error::AmbientMismatch(anchor.len(), basis.nrows()));
        }
        if basis.ncols() > anchor.len() {
            return Err(Error::Usage(format!(
                "basis has {} directions in ambient dimension {}",
                basis.ncols(),
                anchor.len()
            )));
        }
        let res = numeric::orthonormality_residual(&basis);
        if res > tol.eps_orth {
            return Err(Error::Usage(format!(
                "basis orthonormality residual {res:e} exceeds eps_orth"
            )));
        }
        Ok(Self { anchor, basis })
    }

    /// The 0-dimensional flat at `p`.
    pub fn point(p: DVector<f64>) -> Self {
        let d = p.len();
        Self {
            anchor: p,
            basis: DMatrix::zeros(d, 0),
        }
    }

    /// Smallest flat containing the anchor and all the given directions
    /// (which need not be independent or normalized).
    pub fn from_directions(
        anchor: DVector<f64>,
        directions: &[DVector<f64>],
        tol: &Tolerances,
    ) -> Result<Self> {
        let d = anchor.len();
        for v in directions {
            if v.len() != d {
                return Err(Error::AmbientMismatch(d, v.len()));
            }
        }
        if directions.is_empty() {
            return Ok(Self::point(anchor));
        }
        let m = DMatrix::from_columns(directions);
        let basis = numeric::column_space(&m, tol.eps_rank);
        Ok(Self { anchor, basis })
    }

    /// Smallest flat containing all the points; its dimension is the numeric
    /// rank of the centered point matrix.
    pub fn span_of_points(points: &[DVector<f64>], tol: &Tolerances) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Usage("span_of_points: empty point list".into()))?;
        let d = first.len();
        for p in points {
            if p.len() != d {
                return Err(Error::AmbientMismatch(d, p.len()));
            }
        }
        let mut centroid = DVector::zeros(d);
        for p in points {
            centroid += p;
        }
        centroid /= points.len() as f64;
        let mut m = DMatrix::zeros(d, points.len());
        for (j, p) in points.iter().enumerate() {
            m.set_column(j, &(p - &centroid));
        }
        let basis = numeric::column_space(&m, tol.eps_rank);
        Ok(Self {
            anchor: centroid,
            basis,
        })
    }

    /// The hyperplane through `p` with the given normal direction.
    pub fn hyperplane(p: DVector<f64>, normal: &DVector<f64>, tol: &Tolerances) -> Result<Self> {
        if normal.len() != p.len() {
            return Err(Error::AmbientMismatch(p.len(), normal.len()));
        }
        let nn = normal.norm();
        if nn <= tol.eps_geom {
            return Err(Error::DegenerateDirection("zero hyperplane normal".into()));
        }
        let n = DMatrix::from_columns(&[normal / nn]);
        let basis = numeric::orthogonal_complement(&n, tol.eps_rank);
        Ok(Self { anchor: p, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    /// Orthonormal direction basis (D x k).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthonormal basis of the directions orthogonal to this flat.
    pub fn orthogonal_complement(&self, tol: &Tolerances) -> DMatrix<f64> {
        numeric::orthogonal_complement(&self.basis, tol.eps_rank)
    }

    /// Orthogonal projection of `p` onto the flat.
    pub fn project_point(&self, p: &DVector<f64>) -> DVector<f64> {
        let rel = p - &self.anchor;
        &self.anchor + &self.basis * (self.basis.transpose() * rel)
    }

    pub fn distance_to_point(&self, p: &DVector<f64>) -> f64 {
        (p - self.project_point(p)).norm()
    }

    pub fn contains_point(&self, p: &DVector<f64>, tol: &Tolerances) -> bool {
        p.len() == self.ambient_dim() && self.distance_to_point(p) <= tol.eps_geom
    }

    /// True iff `other`'s anchor lies on this flat and every direction of
    /// `other` lies in this flat's direction space (membership is
    /// representation-independent).
    pub fn contains(&self, other: &AffineSubspace, tol: &Tolerances) -> bool {
        if other.ambient_dim() != self.ambient_dim() {
            return false;
        }
        if !self.contains_point(&other.anchor, tol) {
            return false;
        }
        for j in 0..other.dim() {
            let v = other.basis.column(j).into_owned();
            let residual = &v - &self.basis * (self.basis.transpose() * &v);
            if residual.norm() > tol.eps_geom {
                return false;
            }
        }
        true
    }

    /// Equality as point sets, at tolerance.
    pub fn same_flat(&self, other: &AffineSubspace, tol: &Tolerances) -> bool {
        self.dim() == other.dim() && self.contains(other, tol) && other.contains(self, tol)
    }

    /// Smallest flat containing both inputs.
    pub fn join(&self, other: &AffineSubspace, tol: &Tolerances) -> Result<AffineSubspace> {
        if other.ambient_dim() != self.ambient_dim() {
            return Err(Error::AmbientMismatch(
                self.ambient_dim(),
                other.ambient_dim(),
            ));
        }
        let d = self.ambient_dim();
        let k = self.dim() + other.dim() + 1;
        let mut m = DMatrix::zeros(d, k);
        for j in 0..self.dim() {
            m.set_column(j, &self.basis.column(j).into_owned());
        }
        for j in 0..other.dim() {
            m.set_column(self.dim() + j, &other.basis.column(j).into_owned());
        }
        m.set_column(k - 1, &(&other.anchor - &self.anchor));
        let basis = numeric::column_space(&m, tol.eps_rank);
        Ok(AffineSubspace {
            anchor: self.anchor.clone(),
            basis,
        })
    }

    /// Set intersection, or `None` when the flats are disjoint.
    ///
    /// Each flat is written as the solution set of its complement's normal
    /// equations; the joint system is solved by one rank-revealing SVD. The
    /// intersection is declared empty when the least-squares residual exceeds
    /// `eps_geom``(scaled by the anchor magnitudes).
    pub fn meet(&self, other: &AffineSubspace, tol: &Tolerances) -> Result<Option<AffineSubspace>> {
        if other.ambient_dim() != self.ambient_dim() {
            return Err(Error::AmbientMismatch(
                self.ambient_dim(),
                other.ambient_dim(),
            ));
        }
        let d = self.ambient_dim();
        let na = numeric::orthogonal_complement(&self.basis, tol.eps_rank);
        let nb = numeric::orthogonal_complement(&other.basis, tol.eps_rank);
        let rows = na.ncols() + nb.ncols();
        if rows == 0 {
            // both flats are all of R^D
            return Ok(Some(self.clone()));
        }
        let mut c = DMatrix::zeros(rows, d);
        let mut rhs = DVector::zeros(rows);
        for i in 0..na.ncols() {
            let row = na.column(i);
            c.row_mut(i).copy_from(&row.transpose());
            rhs[i] = row.dot(&self.anchor);
        }
        for i in 0..nb.ncols() {
            let row = nb.column(i);
            c.row_mut(na.ncols() + i).copy_from(&row.transpose());
            rhs[na.ncols() + i] = row.dot(&other.anchor);
        }
        let (x, residual) = numeric::lstsq_min_norm(&c, &rhs, tol.eps_rank);
        let scale = 1.0_f64
            .max(self.anchor.norm())
            .max(other.anchor.norm());
        if residual > tol.eps_geom * scale {
            return Ok(None);
        }
        let basis = numeric::nullspace(&c, tol.eps_rank);
        Ok(Some(AffineSubspace { anchor: x, basis }))
    }

    /// Unit vector inside `face`'s direction space, orthogonal to `edge`, on
    /// the same side of the edge as `toward`.
    pub fn unit_normal_within(
        face: &AffineSubspace,
        edge: &AffineSubspace,
        toward: &DVector<f64>,
        tol: &Tolerances,
    ) -> Result<DVector<f64>> {
        if !face.contains(edge, tol) {
            return Err(Error::Usage(
                "unit_normal_within: face does not contain edge".into(),
            ));
        }
        if face.dim() != edge.dim() + 1 {
            return Err(Error::Usage(format!(
                "unit_normal_within: dim face = {} but dim edge = {}",
                face.dim(),
                edge.dim()
            )));
        }
        // component of `toward` orthogonal to the edge, within the face
        let w = toward - edge.project_point(toward);
        let norm = w.norm();
        if norm <= tol.eps_geom {
            return Err(Error::DegenerateDirection(
                "unit_normal_within: toward lies inside the edge".into(),
            ));
        }
        let n = w / norm;
        // diagnostics: n must live in the face's direction space
        let in_face = &n - face.basis() * (face.basis().transpose() * &n);
        if in_face.norm() > tol.eps_geom * 10.0 {
            return Err(Error::Usage(
                "unit_normal_within: toward does not lie in the face".into(),
            ));
        }
        Ok(n)
    }

    /// Image under the rigid motion x ↦ Q x + t.
    pub fn transformed(&self, q: &DMatrix<f64>, t: &DVector<f64>) -> AffineSubspace {
        AffineSubspace {
            anchor: q * &self.anchor + t,
            basis: q * &self.basis,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn v3(x: f64, y: f64, z: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y, z])
    }

    fn xy_plane() -> AffineSubspace {
        AffineSubspace::span_of_points(
            &[v3(0.0, 0.0, 0.0), v3(1.0, 0.0, 0.0), v3(0.0, 1.0, 0.0)],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn span_of_single_point_is_point() {
        let f = AffineSubspace::span_of_points(&[v3(0.0, 0.0, 0.0)], &tol()).unwrap();
        assert_eq!(f.dim(), 0);
    }

    #[test]
    fn span_of_coordinate_plane() {
        let f = xy_plane();
        assert_eq!(f.dim(), 2);
        assert!(f.contains_point(&v3(3.0, -2.0, 0.0), &tol()));
        assert!(!f.contains_point(&v3(0.0, 0.0, 0.1), &tol()));
    }

    #[test]
    fn span_of_tetrahedron_vertices_is_full_space() {
        // centered regular tetrahedron, edge length 2
        let s = 1.0 / 2.0_f64.sqrt();
        let pts = [
            v3(s, s, s),
            v3(s, -s, -s),
            v3(-s, s, -s),
            v3(-s, -s, s),
        ];
        let f = AffineSubspace::span_of_points(&pts, &tol()).unwrap();
        assert_eq!(f.dim(), 3);
    }

    #[test]
    fn span_of_empty_list_is_usage_error() {
        assert!(matches!(
            AffineSubspace::span_of_points(&[], &tol()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn join_of_two_points_is_line() {
        let p = AffineSubspace::point(v3(0.0, 0.0, 0.0));
        let q = AffineSubspace::point(v3(1.0, 2.0, 3.0));
        let l = p.join(&q, &tol()).unwrap();
        assert_eq!(l.dim(), 1);
        assert!(l.contains_point(&v3(0.5, 1.0, 1.5), &tol()));
    }

    #[test]
    fn join_is_idempotent() {
        let f = xy_plane();
        let j = f.join(&f, &tol()).unwrap();
        assert!(j.same_flat(&f, &tol()));
    }

    #[test]
    fn join_of_skew_lines_is_full_space() {
        let a = AffineSubspace::span_of_points(&[v3(0.0, 0.0, 0.0), v3(1.0, 0.0, 0.0)], &tol())
            .unwrap();
        let b = AffineSubspace::span_of_points(&[v3(0.0, 0.0, 1.0), v3(0.0, 1.0, 1.0)], &tol())
            .unwrap();
        assert_eq!(a.join(&b, &tol()).unwrap().dim(), 3);
    }

    #[test]
    fn meet_of_coordinate_planes_is_axis() {
        let z0 = xy_plane();
        let x0 = AffineSubspace::span_of_points(
            &[v3(0.0, 0.0, 0.0), v3(0.0, 1.0, 0.0), v3(0.0, 0.0, 1.0)],
            &tol(),
        )
        .unwrap();
        let m = z0.meet(&x0, &tol()).unwrap().unwrap();
        assert_eq!(m.dim(), 1);
        assert!(m.contains_point(&v3(0.0, 5.0, 0.0), &tol()));
        assert!(!m.contains_point(&v3(1.0, 0.0, 0.0), &tol()));
    }

    #[test]
    fn meet_of_parallel_planes_is_empty() {
        let z0 = xy_plane();
        let z1 = AffineSubspace::span_of_points(
            &[v3(0.0, 0.0, 1.0), v3(1.0, 0.0, 1.0), v3(0.0, 1.0, 1.0)],
            &tol(),
        )
        .unwrap();
        assert!(z0.meet(&z1, &tol()).unwrap().is_none());
    }

    #[test]
    fn plane_contains_axis() {
        let z0 = xy_plane();
        let x_axis =
            AffineSubspace::span_of_points(&[v3(0.0, 0.0, 0.0), v3(1.0, 0.0, 0.0)], &tol())
                .unwrap();
        assert!(z0.contains(&x_axis, &tol()));
        assert!(!x_axis.contains(&z0, &tol()));
        assert!(z0.contains_point(z0.anchor(), &tol()));
    }

    #[test]
    fn unit_normal_within_plane() {
        let z0 = xy_plane();
        let x_axis =
            AffineSubspace::span_of_points(&[v3(0.0, 0.0, 0.0), v3(1.0, 0.0, 0.0)], &tol())
                .unwrap();
        let n = AffineSubspace::unit_normal_within(&z0, &x_axis, &v3(0.0, 1.0, 0.0), &tol())
            .unwrap();
        assert_relative_eq!(n[1], 1.0, epsilon = 1e-12);
        let n2 = AffineSubspace::unit_normal_within(&z0, &x_axis, &v3(5.0, -2.0, 0.0), &tol())
            .unwrap();
        assert_relative_eq!(n2[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_normal_with_toward_inside_edge_fails() {
        let z0 = xy_plane();
        let x_axis =
            AffineSubspace::span_of_points(&[v3(0.0, 0.0, 0.0), v3(1.0, 0.0, 0.0)], &tol())
                .unwrap();
        assert!(matches!(
            AffineSubspace::unit_normal_within(&z0, &x_axis, &v3(2.0, 0.0, 0.0), &tol()),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let a = AffineSubspace::point(v3(0.0, 0.0, 0.0));
        let b = AffineSubspace::point(DVector::from_vec(vec![0.0, 0.0]));
        assert!(matches!(
            a.join(&b, &tol()),
            Err(Error::AmbientMismatch(3, 2))
        ));
        assert!(matches!(
            a.meet(&b, &tol()),
            Err(Error::AmbientMismatch(3, 2))
        ));
    }

    // ---- property tests ----

    fn arb_unit3() -> impl Strategy<Value = DVector<f64>> {
        prop::collection::vec(-1.0f64..1.0, 3).prop_filter_map("nonzero", |v| {
            let v = DVector::from_vec(v);
            let n = v.norm();
            (n > 1e-3).then(|| v / n)
        })
    }

    fn arb_flat(dim_range: std::ops::Range<usize>) -> impl Strategy<Value = AffineSubspace> {
        (
            dim_range,
            prop::collection::vec(-2.0f64..2.0, 3),
            prop::collection::vec(arb_unit3(), 3),
        )
            .prop_map(|(k, anchor, dirs)| {
                let anchor = DVector::from_vec(anchor);
                AffineSubspace::from_directions(anchor, &dirs[..k], &Tolerances::default())
                    .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn join_meet_dimension_formula(a in arb_flat(0..3), b in arb_flat(0..3)) {
            let t = Tolerances::default();
            let j = a.join(&b, &t).unwrap();
            if let Some(m) = a.meet(&b, &t).unwrap() {
                // dim(join) + dim(meet) = dim a + dim b on generic inputs
                prop_assert_eq!(j.dim() + m.dim(), a.dim() + b.dim());
                prop_assert!(a.contains(&m, &t) && b.contains(&m, &t));
            }
            prop_assert!(j.contains(&a, &t) && j.contains(&b, &t));
            prop_assert!(numeric::orthonormality_residual(j.basis()) < t.eps_orth);
        }

        #[test]
        fn representation_invariance(a in arb_flat(1..3), b in arb_flat(1..3), seed in 0u64..1000) {
            let t = Tolerances::default();
            // re-express a's basis in a random rotated representation
            let rot = crate::random::random_rotation(a.dim(), seed);
            let new_basis = a.basis() * rot;
            let a2 = AffineSubspace::new(a.anchor().clone(), new_basis, &t).unwrap();
            prop_assert!(a.same_flat(&a2, &t));
            prop_assert_eq!(a.contains(&b, &t), a2.contains(&b, &t));
            let m1 = a.meet(&b, &t).unwrap();
            let m2 = a2.meet(&b, &t).unwrap();
            match (m1, m2) {
                (Some(x), Some(y)) => prop_assert!(x.same_flat(&y, &t)),
                (None, None) => {}
                _ => prop_assert!(false, "meet emptiness changed under re-representation"),
            }
        }
    }
}
