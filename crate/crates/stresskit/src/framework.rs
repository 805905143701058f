//! The d-framework data model, validation, equilibrium system and stress space.
//!
//! A d-framework is a set of (d−1)-dimensional edge flats and d-dimensional
//! face flats in R^D with incidences and a unit normal per incidence. A stress
//! assigns a scalar to each face; it is a self-stress when for every edge e
//!
//! ```text
//!     Σ_{(e,f) incident}  s(f) · n(e,f)  =  0      (one R^D equation per edge)
//! ```

use nalgebra::{DMatrix, DVector};

use crate::affine::AffineSubspace;
use crate::error::{Error, Result};
use crate::numeric;
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId(pub usize);

#[derive(Clone, Debug)]
pub struct Incidence {
    pub edge: EdgeId,
    pub face: FaceId,
    pub normal: DVector<f64>,
}

/// Stress coefficients keyed by face id.
#[derive(Clone, Debug)]
pub struct Stress {
    values: Vec<f64>,
}

impl Stress {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn value(&self, face: FaceId) -> f64 {
        self.values[face.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.values.clone())
    }

    pub fn scaled(&self, c: f64) -> Stress {
        Stress {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Orthonormal basis of the self-stress space; `dimension == 0` means the
/// framework is not self-stressable.
#[derive(Clone, Debug)]
pub struct StressSpace {
    pub dimension: usize,
    pub basis: Vec<Stress>,
}

impl StressSpace {
    /// Squared-residual of the orthogonal projection of `s` onto the space,
    /// for "does the space contain this stress" checks.
    pub fn projection_residual(&self, s: &Stress) -> f64 {
        let v = s.as_vector();
        let mut proj = DVector::zeros(v.len());
        for b in &self.basis {
            let bv = b.as_vector();
            proj += &bv * bv.dot(&v);
        }
        (v - proj).norm()
    }
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub edge: EdgeId,
    pub faces: Vec<FaceId>,
    pub message: String,
}

/// Report from [`DFramework::validate`]; `generic` means all faces incident
/// to any one edge span pairwise distinct flats, `trivalent` means every edge
/// has exactly three incidences.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub generic: bool,
    pub trivalent: bool,
    pub violations: Vec<Violation>,
}

/// Immutable d-framework; all analyses are pure functions over it.
#[derive(Clone, Debug)]
pub struct DFramework {
    d: usize,
    ambient: usize,
    edges: Vec<AffineSubspace>,
    faces: Vec<AffineSubspace>,
    incidences: Vec<Incidence>,
    by_edge: Vec<Vec<usize>>,
}

impl DFramework {
    /// Build and check the structural invariants: flat dimensions, containment
    /// of each incident edge in its face, unit normals lying in the face and
    /// orthogonal to the edge.
    pub fn new(
        d: usize,
        edges: Vec<AffineSubspace>,
        faces: Vec<AffineSubspace>,
        incidences: Vec<Incidence>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidFramework("d must be at least 1".into()));
        }
        if edges.is_empty() && faces.is_empty() {
            return Err(Error::InvalidFramework(
                "framework with no edges or faces; use DFramework::empty".into(),
            ));
        }
        let ambient = edges
            .first()
            .map(|e| e.ambient_dim())
            .or_else(|| faces.first().map(|f| f.ambient_dim()))
            .expect("nonempty");
        if ambient <= d {
            return Err(Error::InvalidFramework(format!(
                "ambient dimension {ambient} must exceed d = {d}"
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.ambient_dim() != ambient {
                return Err(Error::AmbientMismatch(ambient, e.ambient_dim()));
            }
            if e.dim() != d - 1 {
                return Err(Error::InvalidFramework(format!(
                    "edge {i} has dimension {} instead of {}",
                    e.dim(),
                    d - 1
                )));
            }
        }
        for (i, f) in faces.iter().enumerate() {
            if f.ambient_dim() != ambient {
                return Err(Error::AmbientMismatch(ambient, f.ambient_dim()));
            }
            if f.dim() != d {
                return Err(Error::InvalidFramework(format!(
                    "face {i} has dimension {} instead of {d}",
                    f.dim()
                )));
            }
        }
        let mut by_edge = vec![Vec::new(); edges.len()];
        for (k, inc) in incidences.iter().enumerate() {
            let e = edges
                .get(inc.edge.0)
                .ok_or_else(|| Error::InvalidFramework(format!("unknown edge id {}", inc.edge.0)))?;
            let f = faces
                .get(inc.face.0)
                .ok_or_else(|| Error::InvalidFramework(format!("unknown face id {}", inc.face.0)))?;
            if !f.contains(e, tol) {
                return Err(Error::InvalidFramework(format!(
                    "incidence ({}, {}): face does not contain edge",
                    inc.edge.0, inc.face.0
                )));
            }
            let n = &inc.normal;
            if (n.norm() - 1.0).abs() > tol.eps_orth * 10.0 {
                return Err(Error::InvalidFramework(format!(
                    "incidence ({}, {}): normal is not unit length",
                    inc.edge.0, inc.face.0
                )));
            }
            let in_face = n - f.basis() * (f.basis().transpose() * n);
            if in_face.norm() > tol.eps_geom * 10.0 {
                return Err(Error::InvalidFramework(format!(
                    "incidence ({}, {}): normal not inside the face",
                    inc.edge.0, inc.face.0
                )));
            }
            let along_edge = e.basis().transpose() * n;
            if along_edge.norm() > tol.eps_geom * 10.0 {
                return Err(Error::InvalidFramework(format!(
                    "incidence ({}, {}): normal not orthogonal to the edge",
                    inc.edge.0, inc.face.0
                )));
            }
            by_edge[inc.edge.0].push(k);
        }
        Ok(Self {
            d,
            ambient,
            edges,
            faces,
            incidences,
            by_edge,
        })
    }

    /// A framework with no edges and no faces (stress space of dimension 0).
    pub fn empty(d: usize, ambient: usize) -> Result<Self> {
        if d < 1 || ambient <= d {
            return Err(Error::InvalidFramework(format!(
                "need ambient > d >= 1, got d = {d}, ambient = {ambient}"
            )));
        }
        Ok(Self {
            d,
            ambient,
            edges: Vec::new(),
            faces: Vec::new(),
            incidences: Vec::new(),
            by_edge: Vec::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edge(&self, id: EdgeId) -> &AffineSubspace {
        &self.edges[id.0]
    }

    pub fn face(&self, id: FaceId) -> &AffineSubspace {
        &self.faces[id.0]
    }

    pub fn incidences(&self) -> &[Incidence] {
        &self.incidences
    }

    pub fn incidences_at(&self, edge: EdgeId) -> impl Iterator<Item = &Incidence> {
        self.by_edge[edge.0].iter().map(|&k| &self.incidences[k])
    }

    /// Faces incident to `edge`, in insertion order.
    pub fn faces_at(&self, edge: EdgeId) -> Vec<FaceId> {
        self.incidences_at(edge).map(|inc| inc.face).collect()
    }

    pub fn normal(&self, edge: EdgeId, face: FaceId) -> Option<&DVector<f64>> {
        self.incidences_at(edge)
            .find(|inc| inc.face == face)
            .map(|inc| &inc.normal)
    }

    /// Report-style check of genericity (all face flats at each edge pairwise
    /// distinct) and trivalence (exactly three incidences per edge).
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut generic = true;
        let mut trivalent = true;
        let mut violations = Vec::new();
        for (e, incs) in self.by_edge.iter().enumerate() {
            if incs.len() != 3 {
                trivalent = false;
                violations.push(Violation {
                    edge: EdgeId(e),
                    faces: incs.iter().map(|&k| self.incidences[k].face).collect(),
                    message: format!("edge {e} has {} incidences, not 3", incs.len()),
                });
            }
            for (a, &ka) in incs.iter().enumerate() {
                for &kb in incs.iter().skip(a + 1) {
                    let fa = self.incidences[ka].face;
                    let fb = self.incidences[kb].face;
                    if self.faces[fa.0].same_flat(&self.faces[fb.0], tol) {
                        generic = false;
                        violations.push(Violation {
                            edge: EdgeId(e),
                            faces: vec![fa, fb],
                            message: format!(
                                "faces {} and {} at edge {e} span the same flat",
                                fa.0, fb.0
                            ),
                        });
                    }
                }
            }
        }
        ValidationReport {
            generic,
            trivalent,
            violations,
        }
    }

    pub fn is_trivalent(&self) -> bool {
        self.by_edge.iter().all(|incs| incs.len() == 3)
    }

    /// Equilibrium matrix of shape (|E|·D) x |F|: the block of column f at
    /// edge e equals n(e,f) for incident pairs and zero otherwise. A stress
    /// satisfies the equilibrium equation iff the matrix sends it to zero.
    pub fn equilibrium_matrix(&self) -> DMatrix<f64> {
        let rows = self.edges.len() * self.ambient;
        let mut m = DMatrix::zeros(rows, self.faces.len());
        for inc in &self.incidences {
            let r0 = inc.edge.0 * self.ambient;
            for i in 0..self.ambient {
                m[(r0 + i, inc.face.0)] += inc.normal[i];
            }
        }
        m
    }

    /// Orthonormal nullspace basis of the equilibrium matrix; dimension 0
    /// means the framework is not self-stressable. Basis sign convention:
    /// first coefficient above tolerance is positive.
    pub fn stress_space(&self, tol: &Tolerances) -> StressSpace {
        if self.faces.is_empty() {
            return StressSpace {
                dimension: 0,
                basis: Vec::new(),
            };
        }
        let m = self.equilibrium_matrix();
        let ns = numeric::nullspace(&m, tol.eps_rank);
        let mut basis = Vec::with_capacity(ns.ncols());
        for j in 0..ns.ncols() {
            let mut v = ns.column(j).into_owned();
            numeric::canonical_sign(&mut v, tol.eps_rank);
            basis.push(Stress::new(v.iter().copied().collect()));
        }
        StressSpace {
            dimension: basis.len(),
            basis,
        }
    }

    /// Worst per-edge equilibrium residual of `s`, normalized by the stress
    /// magnitude so thresholds compare against `eps_rank`-scale quantities.
    pub fn equilibrium_residual(&self, s: &Stress) -> f64 {
        let scale = s.values.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
        let mut worst = 0.0_f64;
        for e in 0..self.edges.len() {
            let mut sum = DVector::zeros(self.ambient);
            for inc in self.incidences_at(EdgeId(e)) {
                sum += &inc.normal * s.value(inc.face);
            }
            worst = worst.max(sum.norm());
        }
        worst / scale
    }

    /// Solve λ_a n_a + λ_b n_b + λ_c n_c = 0 at a trivalent generic edge,
    /// normalized to λ_a = 1. Errors when the normals do not have rank 2 or
    /// when any coefficient vanishes (both signal a degenerate edge).
    pub fn coplanar_decompose(
        &self,
        edge: EdgeId,
        faces: (FaceId, FaceId, FaceId),
        tol: &Tolerances,
    ) -> Result<(f64, f64, f64)> {
        let ns: Vec<&DVector<f64>> = [faces.0, faces.1, faces.2]
            .iter()
            .map(|f| {
                self.normal(edge, *f).ok_or_else(|| {
                    Error::Usage(format!(
                        "coplanar_decompose: face {} not incident to edge {}",
                        f.0, edge.0
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let lam = decompose_normals(ns[0], ns[1], ns[2], edge.0, tol)?;
        Ok((lam[0], lam[1], lam[2]))
    }

    /// Image of the framework under the rigid motion x ↦ Q x + t.
    pub fn transformed(&self, q: &DMatrix<f64>, t: &DVector<f64>) -> DFramework {
        DFramework {
            d: self.d,
            ambient: self.ambient,
            edges: self.edges.iter().map(|e| e.transformed(q, t)).collect(),
            faces: self.faces.iter().map(|f| f.transformed(q, t)).collect(),
            incidences: self
                .incidences
                .iter()
                .map(|inc| Incidence {
                    edge: inc.edge,
                    face: inc.face,
                    normal: q * &inc.normal,
                })
                .collect(),
            by_edge: self.by_edge.clone(),
        }
    }

    /// Copy with the three normals at one edge reversed (preserves
    /// self-stressability).
    pub fn with_edge_normals_flipped(&self, edge: EdgeId) -> DFramework {
        let mut out = self.clone();
        for k in &out.by_edge[edge.0] {
            out.incidences[*k].normal = -&self.incidences[*k].normal;
        }
        out
    }
}

/// Rank-2 decomposition of three normals; shared with the paths module.
pub(crate) fn decompose_normals(
    na: &DVector<f64>,
    nb: &DVector<f64>,
    nc: &DVector<f64>,
    edge_label: usize,
    tol: &Tolerances,
) -> Result<[f64; 3]> {
    let m = DMatrix::from_columns(&[na.clone(), nb.clone(), nc.clone()]);
    let r = numeric::rank(&m, tol.eps_rank);
    if r != 2 {
        return Err(Error::DegenerateEdge {
            edge: edge_label,
            reason: format!("normals have rank {r}, expected 2"),
        });
    }
    let ns = numeric::nullspace(&m, tol.eps_rank);
    debug_assert_eq!(ns.ncols(), 1);
    let v = ns.column(0);
    let vmax = v.amax();
    let vmin = v.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    if vmin < 1e-7 * vmax {
        return Err(Error::DegenerateEdge {
            edge: edge_label,
            reason: "equilibrium coefficient vanishes at this edge".into(),
        });
    }
    if v[0].abs() < tol.eps_rank * vmax {
        return Err(Error::DegenerateEdge {
            edge: edge_label,
            reason: "cannot normalize to the first coefficient".into(),
        });
    }
    Ok([1.0, v[1] / v[0], v[2] / v[0]])
}
