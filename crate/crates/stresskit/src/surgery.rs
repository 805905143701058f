//! HF-surgeries on face-cycles, elementary surgery-flips, reduction of
//! resolvable cycles to length 3, and the composed Cayley-algebra
//! stressability conditions.
//!
//! An HF-surgery at position i replaces the consecutive edges e_i, e_{i+1}
//! (and the rail between them) by the single edge
//! `ē = f_{i−1,i} ∧ f_{i+1,i+2}`, with the derived hat plane
//! `f̂'_i = ē ∨ (f̂_i ∧ f̂_{i+1})`; admissible surgeries preserve
//! self-stressability and even the stress transition.

use crate::affine::AffineSubspace;
use crate::error::{Error, Result};
use crate::framework::DFramework;
use crate::paths::{
    is_edge_orientable, is_general_position3, three_cycle_stressable, EdgeNormals, FacePath,
};
use crate::tol::Tolerances;

/// One recorded step of a surgery sequence.
#[derive(Clone, Debug)]
pub enum SurgeryKind {
    Hf(usize),
    InverseHf(usize),
    RemoveDuplicate(usize),
    AddDuplicate(usize),
    RemoveLoop2(usize),
    AddLoop2(usize),
}

#[derive(Clone, Debug)]
pub struct SurgeryStep {
    pub kind: SurgeryKind,
    /// The f̂' produced by an HF step.
    pub derived_plane: Option<AffineSubspace>,
    /// The new edge produced by an HF step.
    pub new_edge: Option<AffineSubspace>,
}

/// Admissibility verdict with the violated clause, if any.
#[derive(Clone, Debug)]
pub struct Admissibility {
    pub admissible: bool,
    pub reason: Option<String>,
}

fn check_length(c: &FacePath, what: &str) -> Result<()> {
    if c.is_cycle() {
        if c.len() < 4 {
            return Err(Error::Usage(format!(
                "{what}: cycle length must be at least 4, got {}",
                c.len()
            )));
        }
    } else if c.len() < 2 {
        return Err(Error::Usage(format!(
            "{what}: open path needs at least 2 edges"
        )));
    }
    Ok(())
}

fn position_pair(c: &FacePath, i: usize, what: &str) -> Result<usize> {
    let k = c.len();
    if c.is_cycle() {
        if i >= k {
            return Err(Error::Usage(format!("{what}: position {i} out of range")));
        }
        Ok((i + 1) % k)
    } else {
        if i + 1 >= k {
            return Err(Error::Usage(format!(
                "{what}: open path position {i} has no successor"
            )));
        }
        Ok(i + 1)
    }
}

/// The three admissibility clauses of an HF_i-surgery: the rails f_{i−1,i}
/// and f_{i,i+1} distinct, the hats f̂_i and f̂_{i+1} distinct, and the meets
/// f_{i−1,i} ∧ f_{i,i+1}, f̂_i ∧ f̂_{i+1} distinct.
pub fn hf_admissible(c: &FacePath, i: usize, tol: &Tolerances) -> Result<Admissibility> {
    check_length(c, "hf_admissible")?;
    let j = position_pair(c, i, "hf_admissible")?;
    let fail = |reason: &str| {
        Ok(Admissibility {
            admissible: false,
            reason: Some(reason.to_string()),
        })
    };
    if c.rail_before(i).same_flat(c.rail_after(i), tol) {
        return fail("clause (i): rails f_{i-1,i} and f_{i,i+1} coincide");
    }
    if c.hat(i).same_flat(c.hat(j), tol) {
        return fail("clause (ii): hats coincide");
    }
    let rail_meet = c.rail_before(i).meet(c.rail_after(i), tol)?;
    let hat_meet = c.hat(i).meet(c.hat(j), tol)?;
    match (rail_meet, hat_meet) {
        (Some(rm), Some(hm)) => {
            if rm.same_flat(&hm, tol) {
                fail("clause (iii): rail meet coincides with hat meet")
            } else {
                Ok(Admissibility {
                    admissible: true,
                    reason: None,
                })
            }
        }
        _ => fail("clause (iii): a required meet is empty"),
    }
}

/// Unit normal of `face` at `edge` with the lexicographic sign convention
/// (first coordinate above tolerance positive).
fn lex_normal(face: &AffineSubspace, edge: &AffineSubspace, tol: &Tolerances) -> Result<nalgebra::DVector<f64>> {
    let comp = edge.orthogonal_complement(tol);
    let proj = comp.transpose() * face.basis();
    let col = crate::numeric::column_space(&proj, tol.eps_rank);
    if col.ncols() != 1 {
        return Err(Error::NonGeneralPosition(
            "face direction does not leave a single normal line at the edge".into(),
        ));
    }
    let mut n = comp * col.column(0);
    for x in n.iter() {
        if x.abs() > tol.eps_geom {
            if *x < 0.0 {
                n = -n;
            }
            break;
        }
    }
    Ok(n)
}

struct HfParts {
    new_edge: AffineSubspace,
    new_hat: AffineSubspace,
    normals: EdgeNormals,
    witness: FacePath,
}

/// Construct the new edge, derived hat plane, and the three new normals. The
/// normals into the outer rails are chosen so the local length-3 cycle
/// (e_i, ē, e_{i+1}) is edge-orientable; the hat normal plays no role and is
/// fixed by the lexicographic sign rule.
fn hf_parts(c: &FacePath, i: usize, tol: &Tolerances) -> Result<HfParts> {
    let j = position_pair(c, i, "hf_surgery")?;
    let d = c.d();
    let f_prev = c.rail_before(i);
    let f_mid = c.rail_after(i);
    let f_next = c.rail_after(j);
    let new_edge = f_prev
        .meet(f_next, tol)?
        .ok_or_else(|| Error::NonGeneralPosition("outer rails do not meet".into()))?;
    if new_edge.dim() + 1 != d {
        return Err(Error::NonGeneralPosition(format!(
            "new edge has dimension {}, expected {}",
            new_edge.dim(),
            d - 1
        )));
    }
    let hat_meet = c
        .hat(i)
        .meet(c.hat(j), tol)?
        .ok_or_else(|| Error::NonGeneralPosition("hats do not meet".into()))?;
    if hat_meet.dim() + 1 != d {
        return Err(Error::NonGeneralPosition(format!(
            "hat meet has dimension {}, expected {}",
            hat_meet.dim(),
            d - 1
        )));
    }
    let new_hat = new_edge.join(&hat_meet, tol)?;
    if new_hat.dim() != d {
        return Err(Error::NonGeneralPosition(format!(
            "derived hat plane has dimension {}, expected {d}",
            new_hat.dim()
        )));
    }
    let mut n_to_prev = lex_normal(f_prev, &new_edge, tol)?;
    let n_to_next = lex_normal(f_next, &new_edge, tol)?;
    let n_to_hat = lex_normal(&new_hat, &new_edge, tol)?;
    // the witness 3-cycle (e_i, ē, e_{i+1}) with rails (f_mid, f_prev, f_next)
    let witness = |n_prev: nalgebra::DVector<f64>| -> Result<FacePath> {
        FacePath::with_repeats(
            d,
            vec![c.edge(i).clone(), new_edge.clone(), c.edge(j).clone()],
            vec![f_mid.clone(), f_prev.clone(), f_next.clone()],
            vec![c.hat(i).clone(), new_hat.clone(), c.hat(j).clone()],
            vec![
                EdgeNormals {
                    to_prev: c.normals(i).to_next.clone(),
                    to_next: c.normals(i).to_prev.clone(),
                    to_hat: c.normals(i).to_hat.clone(),
                },
                EdgeNormals {
                    to_prev: n_prev,
                    to_next: n_to_next.clone(),
                    to_hat: n_to_hat.clone(),
                },
                EdgeNormals {
                    to_prev: c.normals(j).to_next.clone(),
                    to_next: c.normals(j).to_prev.clone(),
                    to_hat: c.normals(j).to_hat.clone(),
                },
            ],
            true,
            tol,
        )
    };
    let mut w = witness(n_to_prev.clone())?;
    if !is_edge_orientable(&w, tol)? {
        n_to_prev = -n_to_prev;
        w = witness(n_to_prev.clone())?;
        debug_assert!(is_edge_orientable(&w, tol)?);
    }
    Ok(HfParts {
        new_edge,
        new_hat,
        normals: EdgeNormals {
            to_prev: n_to_prev,
            to_next: n_to_next,
            to_hat: n_to_hat,
        },
        witness: w,
    })
}

/// Apply the HF_i-surgery, shortening the path by one. Errors if the surgery
/// is inadmissible (carrying the violated clause) or if an intermediate flat
/// has the wrong dimension.
pub fn hf_surgery(c: &FacePath, i: usize, tol: &Tolerances) -> Result<FacePath> {
    Ok(hf_surgery_with_witness(c, i, tol)?.0)
}

/// Like [`hf_surgery`] but also returning the local length-3 cycle whose
/// stressability underlies the invariance argument.
pub fn hf_surgery_with_witness(
    c: &FacePath,
    i: usize,
    tol: &Tolerances,
) -> Result<(FacePath, FacePath)> {
    check_length(c, "hf_surgery")?;
    let adm = hf_admissible(c, i, tol)?;
    if !adm.admissible {
        return Err(Error::Inadmissible {
            index: i,
            reason: adm.reason.unwrap_or_default(),
        });
    }
    let j = position_pair(c, i, "hf_surgery")?;
    let parts = hf_parts(c, i, tol)?;
    let k = c.len();
    let mut edges = Vec::with_capacity(k - 1);
    let mut rails = Vec::with_capacity(if c.is_cycle() { k - 1 } else { k });
    let mut hats = Vec::with_capacity(k - 1);
    let mut normals = Vec::with_capacity(k - 1);
    for t in 0..k {
        if t == j {
            continue;
        }
        if t == i {
            edges.push(parts.new_edge.clone());
            hats.push(parts.new_hat.clone());
            normals.push(parts.normals.clone());
        } else {
            edges.push(c.edge(t).clone());
            hats.push(c.hat(t).clone());
            normals.push(c.normals(t).clone());
        }
        rails.push(c.rail_before(t).clone());
    }
    if !c.is_cycle() {
        rails.push(c.rail_after(k - 1).clone());
    }
    let out = FacePath::with_repeats(c.d(), edges, rails, hats, normals, c.is_cycle(), tol)?;
    Ok((out, parts.witness))
}

fn positions_equal(c: &FacePath, a: usize, b: usize, tol: &Tolerances) -> bool {
    c.edge(a).same_flat(c.edge(b), tol)
        && c.rail_after(a).same_flat(c.rail_after(b), tol)
        && c.hat(a).same_flat(c.hat(b), tol)
}

/// Remove a duplicate at position i (`e_i = e_{i+1}`, `f_{i,i+1} = f_{i+1,i+2}`,
/// `f̂_i = f̂_{i+1}`); the stress transition of the path is unchanged.
pub fn remove_duplicate(c: &FacePath, i: usize, tol: &Tolerances) -> Result<FacePath> {
    let j = position_pair(c, i, "remove_duplicate")?;
    if !positions_equal(c, i, j, tol) {
        return Err(Error::Inadmissible {
            index: i,
            reason: "no duplicate at this position".into(),
        });
    }
    remove_positions(c, &[j], tol)
}

/// Insert a duplicate of position i after it (inverse of
/// [`remove_duplicate`]).
pub fn add_duplicate(c: &FacePath, i: usize, tol: &Tolerances) -> Result<FacePath> {
    if i >= c.len() {
        return Err(Error::Usage(format!("add_duplicate: position {i} out of range")));
    }
    let k = c.len();
    let mut edges = Vec::with_capacity(k + 1);
    let mut rails = Vec::with_capacity(if c.is_cycle() { k + 1 } else { k + 2 });
    let mut hats = Vec::with_capacity(k + 1);
    let mut normals = Vec::with_capacity(k + 1);
    for t in 0..k {
        edges.push(c.edge(t).clone());
        rails.push(c.rail_before(t).clone());
        hats.push(c.hat(t).clone());
        normals.push(c.normals(t).clone());
        if t == i {
            edges.push(c.edge(t).clone());
            rails.push(c.rail_after(t).clone());
            hats.push(c.hat(t).clone());
            normals.push(EdgeNormals {
                // crossing the same rail pair again: mirrored orientation
                to_prev: c.normals(t).to_next.clone(),
                to_next: c.normals(t).to_next.clone(),
                to_hat: c.normals(t).to_hat.clone(),
            });
        }
    }
    if !c.is_cycle() {
        rails.push(c.rail_after(k - 1).clone());
    }
    FacePath::with_repeats(c.d(), edges, rails, hats, normals, c.is_cycle(), tol)
}

/// Remove a simple loop of length 2 at position i (`e_i = e_{i+2}`,
/// `f_{i,i+1} = f_{i+2,i+3}`, `f̂_i = f̂_{i+2}`).
pub fn remove_loop2(c: &FacePath, i: usize, tol: &Tolerances) -> Result<FacePath> {
    let j = position_pair(c, i, "remove_loop2")?;
    let jj = position_pair(c, j, "remove_loop2")?;
    let loop_present = c.edge(i).same_flat(c.edge(jj), tol)
        && c.rail_after(i).same_flat(c.rail_after(jj), tol)
        && c.hat(i).same_flat(c.hat(jj), tol);
    if !loop_present {
        return Err(Error::Inadmissible {
            index: i,
            reason: "no length-2 loop at this position".into(),
        });
    }
    remove_positions(c, &[j, jj], tol)
}

/// Splice a two-step detour over `via_rail` and `via_hat` after position i
/// (inverse of [`remove_loop2`]); the detour leaves rail f_{i,i+1} across
/// `detour_edge` and returns across a copy of e_i.
pub fn add_loop2(
    c: &FacePath,
    i: usize,
    detour_edge: AffineSubspace,
    via_rail: AffineSubspace,
    via_hat: AffineSubspace,
    detour_normals: (EdgeNormals, EdgeNormals),
    tol: &Tolerances,
) -> Result<FacePath> {
    if i >= c.len() {
        return Err(Error::Usage(format!("add_loop2: position {i} out of range")));
    }
    let k = c.len();
    let mut edges = Vec::new();
    let mut rails = Vec::new();
    let mut hats = Vec::new();
    let mut normals = Vec::new();
    for t in 0..k {
        edges.push(c.edge(t).clone());
        rails.push(c.rail_before(t).clone());
        hats.push(c.hat(t).clone());
        normals.push(c.normals(t).clone());
        if t == i {
            edges.push(detour_edge.clone());
            rails.push(c.rail_after(t).clone());
            hats.push(via_hat.clone());
            normals.push(detour_normals.0.clone());
            edges.push(c.edge(t).clone());
            rails.push(via_rail.clone());
            hats.push(c.hat(t).clone());
            normals.push(detour_normals.1.clone());
        }
    }
    if !c.is_cycle() {
        rails.push(c.rail_after(k - 1).clone());
    }
    FacePath::with_repeats(c.d(), edges, rails, hats, normals, c.is_cycle(), tol)
}

fn remove_positions(c: &FacePath, remove: &[usize], tol: &Tolerances) -> Result<FacePath> {
    let k = c.len();
    let mut edges = Vec::new();
    let mut rails = Vec::new();
    let mut hats = Vec::new();
    let mut normals = Vec::new();
    for t in 0..k {
        if remove.contains(&t) {
            continue;
        }
        edges.push(c.edge(t).clone());
        rails.push(c.rail_before(t).clone());
        hats.push(c.hat(t).clone());
        normals.push(c.normals(t).clone());
    }
    if !c.is_cycle() {
        rails.push(c.rail_after(k - 1).clone());
    }
    FacePath::with_repeats(c.d(), edges, rails, hats, normals, c.is_cycle(), tol)
}

/// Outcome of [`resolve`].
#[derive(Clone, Debug)]
pub enum Resolution {
    Resolved {
        steps: Vec<SurgeryStep>,
        final_cycle: FacePath,
    },
    Unresolvable {
        reason: String,
    },
}

/// Greedily shorten a face-cycle to length 3 by admissible HF-surgeries of
/// lowest index, recording the derived planes of each step. The result must
/// be in general position (all six planes pairwise distinct) to count as
/// resolved.
pub fn resolve(c: &FacePath, tol: &Tolerances, max_steps: Option<usize>) -> Result<Resolution> {
    if !c.is_cycle() {
        return Err(Error::Usage("resolve: need a face-cycle".into()));
    }
    if c.len() < 3 {
        return Err(Error::Usage("resolve: cycle length must be at least 3".into()));
    }
    let cap = max_steps.unwrap_or(4 * c.len());
    let mut cur = c.clone();
    let mut steps = Vec::new();
    while cur.len() > 3 {
        if steps.len() >= cap {
            return Ok(Resolution::Unresolvable {
                reason: format!("no length-3 cycle after {cap} steps"),
            });
        }
        let mut applied = false;
        for i in 0..cur.len() {
            match hf_admissible(&cur, i, tol) {
                Ok(adm) if adm.admissible => {}
                _ => continue,
            }
            match hf_surgery_with_witness(&cur, i, tol) {
                Ok((next, _)) => {
                    steps.push(SurgeryStep {
                        kind: SurgeryKind::Hf(i),
                        derived_plane: Some(next.hat(i).clone()),
                        new_edge: Some(next.edge(i).clone()),
                    });
                    cur = next;
                    applied = true;
                    break;
                }
                Err(Error::NonGeneralPosition(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        if !applied {
            return Ok(Resolution::Unresolvable {
                reason: format!("no admissible HF step at length {}", cur.len()),
            });
        }
    }
    if !is_general_position3(&cur, tol) {
        return Ok(Resolution::Unresolvable {
            reason: "final length-3 cycle is not in general position".into(),
        });
    }
    Ok(Resolution::Resolved {
        steps,
        final_cycle: cur,
    })
}

/// The Cayley-algebra geometric condition for a resolvable cycle: resolve to
/// a length-3 cycle in general position, then apply the three-cycle meet
/// criterion. By surgery invariance this decides self-stressability of the
/// original cycle.
pub fn cayley_condition(c: &FacePath, tol: &Tolerances) -> Result<bool> {
    match resolve(c, tol, None)? {
        Resolution::Resolved { final_cycle, .. } => three_cycle_stressable(&final_cycle, tol),
        Resolution::Unresolvable { reason } => Err(Error::Unresolvable(reason)),
    }
}

/// Per-cycle outcome of a framework-level Cayley check.
#[derive(Clone, Debug)]
pub enum CycleOutcome {
    Verdict(bool),
    Unresolvable(String),
}

/// Conjunction of Cayley conditions over a caller-supplied homotopy
/// generating set of cycles. `stressable` is `None` when some cycle failed
/// to resolve while all resolved ones passed (a mixed verdict).
#[derive(Clone, Debug)]
pub struct CayleyCheck {
    pub stressable: Option<bool>,
    pub cycles: Vec<CycleOutcome>,
}

pub fn framework_cayley_check(
    _fw: &DFramework,
    cycles: &[FacePath],
    tol: &Tolerances,
) -> CayleyCheck {
    let mut outcomes = Vec::with_capacity(cycles.len());
    let mut any_false = false;
    let mut any_unresolved = false;
    for c in cycles {
        match cayley_condition(c, tol) {
            Ok(v) => {
                any_false |= !v;
                outcomes.push(CycleOutcome::Verdict(v));
            }
            Err(e) => {
                any_unresolved = true;
                outcomes.push(CycleOutcome::Unresolvable(e.to_string()));
            }
        }
    }
    let stressable = if any_false {
        Some(false)
    } else if any_unresolved {
        None
    } else {
        Some(true)
    };
    CayleyCheck {
        stressable,
        cycles: outcomes,
    }
}
