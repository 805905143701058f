//! Seeded generators for random flats, rotations, face-cycles and K5
//! placements, used for stress-testing the equivalence of the four
//! stressability criteria.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::AffineSubspace;
use crate::catalog;
use crate::error::{Error, Result};
use crate::framework::DFramework;
use crate::paths::{path_stress_transition, EdgeNormals, FacePath};
use crate::tol::Tolerances;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(r: &mut impl Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| r.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

pub fn random_point(r: &mut impl Rng, dim: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| r.gen_range(-scale..scale))
}

/// A random rotation matrix (QR of a Gaussian sample, determinant +1).
pub fn random_rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    if dim == 0 {
        return DMatrix::zeros(0, 0);
    }
    let mut r = rng(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        // Box–Muller keeps us off rand_distr for one sampler
        let u: f64 = r.gen_range(1e-12..1.0);
        let v: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u.ln()).sqrt() * v.cos()
    });
    let qr = m.qr();
    let mut q = qr.q();
    let rr = qr.r();
    // fix column signs so the factorization is unique, then enforce det +1
    for j in 0..dim {
        if rr[(j, j)] < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..dim {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

/// Random hyperplane with anchor near the origin.
fn random_hyperplane(r: &mut impl Rng, ambient: usize, tol: &Tolerances) -> AffineSubspace {
    let n = unit_vector(r, ambient);
    let p = random_point(r, ambient, 0.6);
    AffineSubspace::hyperplane(p, &n, tol).expect("random hyperplane")
}

/// Unit normal of `face` at `edge` with a sign drawn from the rng.
fn incidence_normal(
    face: &AffineSubspace,
    edge: &AffineSubspace,
    r: &mut impl Rng,
    tol: &Tolerances,
) -> DVector<f64> {
    let comp = edge.orthogonal_complement(tol);
    let proj = comp.transpose() * face.basis();
    let col = crate::numeric::column_space(&proj, tol.eps_rank);
    debug_assert_eq!(col.ncols(), 1);
    let n = comp * col.column(0);
    if r.gen_bool(0.5) {
        -n
    } else {
        n
    }
}

/// A random generic face-cycle of length `len` for d ∈ {1, 2} (ambient d+1).
///
/// With `stressable` the final hat plane is re-solved so the equilibrium
/// closes up exactly; with `orientable = Some(b)` one rail normal is flipped
/// if needed to land in the requested orientability class.
pub fn random_cycle(
    d: usize,
    len: usize,
    seed: u64,
    stressable: bool,
    orientable: Option<bool>,
) -> Result<FacePath> {
    let tol = Tolerances::default();
    if len < 3 {
        return Err(Error::Usage("random_cycle: length must be at least 3".into()));
    }
    let ambient = d + 1;
    'attempt: for attempt in 0..64u64 {
        let mut r = rng(seed.wrapping_mul(1000).wrapping_add(attempt));
        let rails: Vec<AffineSubspace> =
            (0..len).map(|_| random_hyperplane(&mut r, ambient, &tol)).collect();
        // edge i sits between rails[i-1] and rails[i]; make rail_before(i) = rails[i]
        // by storing the rails shifted one step back.
        let mut edges = Vec::with_capacity(len);
        for i in 0..len {
            let prev = &rails[(i + len - 1) % len];
            match prev.meet(&rails[i], &tol) {
                Ok(Some(e)) if e.dim() + 1 == d && e.anchor().norm() < 50.0 => edges.push(e),
                _ => continue 'attempt,
            }
        }
        let mut hats = Vec::with_capacity(len);
        for e in &edges {
            let extra = unit_vector(&mut r, ambient);
            let hat = match e.join(
                &AffineSubspace::from_directions(e.anchor().clone(), &[extra], &tol)?,
                &tol,
            ) {
                Ok(h) if h.dim() == d => h,
                _ => continue 'attempt,
            };
            hats.push(hat);
        }
        let mut normals = Vec::with_capacity(len);
        for i in 0..len {
            let prev = &rails[(i + len - 1) % len];
            normals.push(EdgeNormals {
                to_prev: incidence_normal(prev, &edges[i], &mut r, &tol),
                to_next: incidence_normal(&rails[i], &edges[i], &mut r, &tol),
                to_hat: incidence_normal(&hats[i], &edges[i], &mut r, &tol),
            });
        }
        let shifted: Vec<AffineSubspace> = (0..len)
            .map(|i| rails[(i + len - 1) % len].clone())
            .collect();
        let build = |hats: Vec<AffineSubspace>, normals: Vec<EdgeNormals>| {
            FacePath::new(
                d,
                edges.clone(),
                shifted.clone(),
                hats,
                normals,
                true,
                &tol,
            )
        };
        let mut path = match build(hats.clone(), normals.clone()) {
            Ok(p) => p,
            Err(_) => continue 'attempt,
        };
        if let Some(want) = orientable {
            if crate::paths::is_edge_orientable(&path, &tol)? != want {
                normals[0].to_prev = -&normals[0].to_prev;
                path = match build(hats.clone(), normals.clone()) {
                    Ok(p) => p,
                    Err(_) => continue 'attempt,
                };
            }
            debug_assert_eq!(crate::paths::is_edge_orientable(&path, &tol)?, want);
        }
        if stressable {
            // transport along the first len-1 edges, then solve the last hat
            let open = FacePath::new(
                d,
                edges[..len - 1].to_vec(),
                (0..len).map(|i| path.rail_before(i % len).clone()).collect(),
                hats[..len - 1].to_vec(),
                normals[..len - 1].to_vec(),
                false,
                &tol,
            )?;
            let transported = match path_stress_transition(&open, 1.0, &tol) {
                Ok(v) => v,
                Err(_) => continue 'attempt,
            };
            let s_prev = *transported.rails.last().expect("nonempty");
            let i = len - 1;
            let v = -(&normals[i].to_prev * s_prev + &normals[i].to_next * 1.0);
            let vn = v.norm();
            if vn < 1e-6 {
                continue 'attempt;
            }
            let n_hat = v / vn;
            let last_edge = &edges[i];
            let hat = last_edge.join(
                &AffineSubspace::from_directions(
                    last_edge.anchor().clone(),
                    std::slice::from_ref(&n_hat),
                    &tol,
                )?,
                &tol,
            )?;
            if hat.dim() != d {
                continue 'attempt;
            }
            hats[i] = hat;
            normals[i].to_hat = n_hat;
            path = match build(hats.clone(), normals.clone()) {
                Ok(p) => p,
                Err(_) => continue 'attempt,
            };
            if let Some(want) = orientable {
                // re-solving the hat does not touch rail normals
                debug_assert_eq!(crate::paths::is_edge_orientable(&path, &tol)?, want);
            }
            match crate::paths::monodromy(&path, &tol) {
                Ok(m) if (m - 1.0).abs() < 1e-8 => {}
                _ => continue 'attempt,
            }
        } else {
            // reject cycles that are accidentally (or nearly) stressable
            match crate::paths::monodromy(&path, &tol) {
                Ok(m) if (m - 1.0).abs() > 1e-3 => {}
                _ => continue 'attempt,
            }
        }
        // keep things numerically sane for downstream SVDs
        if crate::paths::is_edge_orientable(&path, &tol).is_err() {
            continue 'attempt;
        }
        return Ok(path);
    }
    Err(Error::Construction(format!(
        "random_cycle: no valid cycle after 64 attempts (d={d}, len={len}, seed={seed})"
    )))
}

/// A random placement of the K5 framework of Example-2.3 type: all ten edge
/// lines and ten triangle planes on five random points in R^3. Every such
/// realization is self-stressable.
pub fn random_k5(seed: u64) -> Result<DFramework> {
    let tol = Tolerances::default();
    for attempt in 0..32u64 {
        let mut r = rng(seed.wrapping_mul(7919).wrapping_add(attempt));
        let pts: Vec<DVector<f64>> = (0..5).map(|_| random_point(&mut r, 3, 1.5)).collect();
        if let Ok(fw) = catalog::k5_from_points(&pts, &tol) {
            let report = fw.validate(&tol);
            if report.generic && report.trivalent {
                return Ok(fw);
            }
        }
    }
    Err(Error::Construction(format!(
        "random_k5: no generic placement found for seed {seed}"
    )))
}
