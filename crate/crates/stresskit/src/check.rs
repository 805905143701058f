//! Framework-level stressability verdicts by all four routes, and their
//! cross-check. The four criteria are provably equivalent on generic
//! face-connected trivalent frameworks; this module runs them independently
//! so the equivalence can be exercised rather than assumed.

use crate::error::{Error, Result};
use crate::framework::DFramework;
use crate::oneform::{build_dual_graph, exactness, fundamental_cycles, one_form};
use crate::paths::{monodromy, FacePath};
use crate::surgery::{framework_cayley_check, CycleOutcome};
use crate::tol::Tolerances;

/// Which decision route to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Nullspace,
    Monodromy,
    OneForm,
    Cayley,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nullspace => "nullspace",
            Method::Monodromy => "monodromy",
            Method::OneForm => "oneform",
            Method::Cayley => "cayley",
        }
    }
}

/// Verdicts of the four routes. `nullspace` always runs; the other three
/// require a trivalent framework with a connected dual graph and report
/// `None` where they do not apply (the Cayley route also reports `None` when
/// some fundamental cycle fails to resolve while the rest pass).
#[derive(Clone, Debug)]
pub struct MethodVerdicts {
    pub stress_dim: usize,
    pub nullspace: bool,
    pub monodromy: Option<bool>,
    pub oneform: Option<bool>,
    pub cayley: Option<bool>,
    pub worst_monodromy_defect: Option<f64>,
    pub worst_oneform_defect: Option<f64>,
    /// Routes that produced a verdict disagreeing with another route.
    pub disagreement: bool,
}

impl MethodVerdicts {
    pub fn verdict(&self, m: Method) -> Option<bool> {
        match m {
            Method::Nullspace => Some(self.nullspace),
            Method::Monodromy => self.monodromy,
            Method::OneForm => self.oneform,
            Method::Cayley => self.cayley,
        }
    }
}

/// Stressability by the monodromy route: every fundamental face-cycle of the
/// dual graph has trivial stress monodromy.
pub fn monodromy_trivial(fw: &DFramework, tol: &Tolerances) -> Result<(bool, f64)> {
    let dg = build_dual_graph(fw)?;
    if !dg.is_connected() {
        return Err(Error::Usage(
            "monodromy route requires a face-connected framework".into(),
        ));
    }
    let mut worst = 0.0_f64;
    for cycle in fundamental_cycles(&dg) {
        let path = FacePath::from_face_sequence(fw, &cycle, tol)?;
        let m = monodromy(&path, tol)?;
        let defect = if m <= 0.0 {
            f64::INFINITY
        } else {
            m.ln().abs()
        };
        worst = worst.max(defect);
    }
    Ok((worst <= tol.eps_exact, worst))
}

/// Run all four routes and compare their verdicts.
pub fn check_all(fw: &DFramework, tol: &Tolerances) -> MethodVerdicts {
    let ss = fw.stress_space(tol);
    let nullspace = ss.dimension >= 1;
    let mut monodromy_v = None;
    let mut oneform_v = None;
    let mut cayley_v = None;
    let mut worst_m = None;
    let mut worst_q = None;
    if fw.is_trivalent() {
        if let Ok((ok, worst)) = monodromy_trivial(fw, tol) {
            monodromy_v = Some(ok);
            worst_m = Some(worst);
        }
        if let Ok(dg) = build_dual_graph(fw) {
            if dg.is_connected() {
                if let Ok(q) = one_form(fw, &dg, tol) {
                    if let Ok(rep) = exactness(fw, &dg, &q, tol) {
                        oneform_v = Some(rep.exact);
                        worst_q = Some(rep.worst_defect);
                    }
                }
                // Cayley route over the fundamental cycle basis. Walks that
                // revisit an edge plane are not face-loops (a face-path needs
                // distinct edges); the excluded ones are local by
                // construction and their monodromy telescopes to 1, so
                // dropping them loses nothing.
                let mut cycles = Vec::new();
                let mut build_failed = false;
                for walk in fundamental_cycles(&dg) {
                    match FacePath::from_face_sequence(fw, &walk, tol) {
                        Ok(p) => {
                            let mut distinct = true;
                            'outer: for i in 0..p.len() {
                                for j in (i + 1)..p.len() {
                                    if p.edge(i).same_flat(p.edge(j), tol) {
                                        distinct = false;
                                        break 'outer;
                                    }
                                }
                            }
                            if distinct {
                                cycles.push(p);
                            }
                        }
                        Err(_) => build_failed = true,
                    }
                }
                let check = framework_cayley_check(fw, &cycles, tol);
                cayley_v = match (check.stressable, build_failed) {
                    (Some(false), _) => Some(false),
                    (Some(true), false) => Some(true),
                    _ => None,
                };
                let _ = check
                    .cycles
                    .iter()
                    .filter(|c| matches!(c, CycleOutcome::Unresolvable(_)))
                    .count();
            }
        }
    }
    let mut verdicts = vec![nullspace];
    verdicts.extend(monodromy_v);
    verdicts.extend(oneform_v);
    verdicts.extend(cayley_v);
    let disagreement = verdicts.iter().any(|v| *v != verdicts[0]);
    MethodVerdicts {
        stress_dim: ss.dimension,
        nullspace,
        monodromy: monodromy_v,
        oneform: oneform_v,
        cayley: cayley_v,
        worst_monodromy_defect: worst_m,
        worst_oneform_defect: worst_q,
        disagreement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_k5s_agree_across_routes() {
        let t = Tolerances::default();
        let fw = catalog::gen_k5_tetrahedral(&t).unwrap();
        let v = check_all(&fw, &t);
        assert!(v.nullspace);
        assert_eq!(v.monodromy, Some(true));
        assert_eq!(v.oneform, Some(true));
        assert_eq!(v.cayley, Some(true));
        assert!(!v.disagreement);

        // the coplanar K5 is non-generic: only the nullspace route applies,
        // and no applicable route may claim stressability
        let bad = catalog::gen_k5_coplanar_k4faces(&t).unwrap();
        let vb = check_all(&bad, &t);
        assert!(!vb.nullspace);
        assert_eq!(vb.monodromy, None);
        assert_eq!(vb.oneform, None);
        assert_ne!(vb.cayley, Some(true));
        assert!(!vb.disagreement);
    }

    #[test]
    fn random_cycles_agree_across_routes() {
        let t = Tolerances::default();
        for d in [1usize, 2] {
            for stressable in [true, false] {
                for seed in 0..5u64 {
                    let c =
                        crate::random::random_cycle(d, 4 + (seed % 3) as usize, seed + 300, stressable, None)
                            .unwrap();
                    let fw = c.induced_framework(&t).unwrap();
                    let v = check_all(&fw, &t);
                    assert!(!v.disagreement, "d={d} stressable={stressable} seed={seed}");
                    assert_eq!(v.nullspace, stressable);
                }
            }
        }
    }
}
