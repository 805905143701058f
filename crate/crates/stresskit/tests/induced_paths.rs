//! Face paths induced on the tetrahedral K5 framework: transitions along a
//! known path reproduce the global stress ratios, and a known five-face cycle
//! is monodromy-trivial but not edge-orientable.

use stresskit::catalog;
use stresskit::framework::FaceId;
use stresskit::paths::{
    is_edge_orientable, monodromy, path_stress_transition, FacePath,
};
use stresskit::tol::Tolerances;

/// Face index of the triangle {a, b, c} in the lexicographic ordering used by
/// the K5 builder.
fn tri(a: usize, b: usize, c: usize) -> FaceId {
    let mut want = [a, b, c];
    want.sort_unstable();
    let mut idx = 0;
    for i in 0..5 {
        for j in (i + 1)..5 {
            for k in (j + 1)..5 {
                if [i, j, k] == want {
                    return FaceId(idx);
                }
                idx += 1;
            }
        }
    }
    unreachable!("triangle not found")
}

#[test]
fn k5_face_path_transition_matches_global_stress() {
    let t = Tolerances::default();
    let fw = catalog::gen_k5_tetrahedral(&t).unwrap();
    // a four-face walk through the framework (vertex labels 0..4, centroid 4)
    let walk = vec![tri(0, 1, 3), tri(1, 2, 3), tri(2, 3, 4), tri(0, 2, 4)];
    let path = FacePath::from_face_sequence(&fw, &walk, &t).unwrap();
    assert_eq!(path.len(), 3);
    let s = &fw.stress_space(&t).basis[0];
    let s0 = s.value(walk[0]);
    let transported = path_stress_transition(&path, s0, &t).unwrap();
    for (k, f) in walk.iter().enumerate() {
        let expected = s.value(*f);
        assert!(
            (transported.rails[k] - expected).abs() < 1e-9,
            "rail {k}: transported {} vs stress {expected}",
            transported.rails[k]
        );
    }
}

#[test]
fn k5_five_face_cycle_is_trivial_but_not_orientable() {
    let t = Tolerances::default();
    let fw = catalog::gen_k5_tetrahedral(&t).unwrap();
    let cycle = vec![
        tri(0, 1, 3),
        tri(1, 2, 3),
        tri(2, 3, 4),
        tri(0, 2, 4),
        tri(0, 1, 4),
        tri(0, 1, 3),
    ];
    let path = FacePath::from_face_sequence(&fw, &cycle, &t).unwrap();
    assert!(path.is_cycle());
    assert_eq!(path.len(), 5);
    let m = monodromy(&path, &t).unwrap();
    assert!((m - 1.0).abs() < 1e-9, "monodromy {m}");
    assert!(
        !is_edge_orientable(&path, &t).unwrap(),
        "this K5 cycle reverses edge orientation"
    );
}

#[test]
fn all_k5_three_cycles_are_stressable() {
    // every short face cycle of the K5 framework passes the three-cycle
    // criterion, cross-checked against monodromy
    let t = Tolerances::default();
    let fw = catalog::gen_k5_tetrahedral(&t).unwrap();
    let mut checked = 0;
    for a in 0..10usize {
        for b in (a + 1)..10 {
            for c in (b + 1)..10 {
                let walk = vec![FaceId(a), FaceId(b), FaceId(c), FaceId(a)];
                let path = match FacePath::from_face_sequence(&fw, &walk, &t) {
                    Ok(p) => p,
                    Err(_) => continue, // not pairwise adjacent
                };
                // only genuine 3-cycles with distinct edges qualify
                let distinct = (0..3).all(|i| {
                    ((i + 1)..3).all(|j| !path.edge(i).same_flat(path.edge(j), &t))
                });
                if !distinct || !stresskit::paths::is_general_position3(&path, &t) {
                    continue;
                }
                let verdict = stresskit::paths::three_cycle_stressable(&path, &t).unwrap();
                assert!(verdict, "cycle ({a},{b},{c}) should be stressable");
                let m = monodromy(&path, &t).unwrap();
                assert!((m - 1.0).abs() < 1e-8);
                checked += 1;
            }
        }
    }
    assert!(checked > 0, "no 3-cycles found");
}
