//! File formats: a versioned JSON document per framework kind, written
//! canonically (sorted ids, fixed 17-significant-digit numbers) so that
//! write → read → write is byte-identical, plus an ASCII PLY mesh export
//! carrying the stress as a per-face attribute.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::affine::AffineSubspace;
use crate::error::{Error, Result};
use crate::framework::{DFramework, EdgeId, FaceId, Incidence};
use crate::rframework::{CwComplex, RFramework};
use crate::tol::Tolerances;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, Default)]
pub struct Metadata {
    pub name: Option<String>,
    pub tags: Vec<String>,
}

/// A parsed input file: either framework kind, with its metadata.
pub enum LoadedInput {
    D {
        framework: DFramework,
        metadata: Metadata,
    },
    R {
        framework: RFramework,
        metadata: Metadata,
    },
}

impl LoadedInput {
    pub fn metadata(&self) -> &Metadata {
        match self {
            LoadedInput::D { metadata, .. } | LoadedInput::R { metadata, .. } => metadata,
        }
    }

    /// The d-framework to analyze (inducing one for R-framework inputs).
    pub fn to_dframework(&self, tol: &Tolerances) -> Result<DFramework> {
        match self {
            LoadedInput::D { framework, .. } => Ok(framework.clone()),
            LoadedInput::R { framework, .. } => {
                let tr = crate::rframework::triangulate(framework, tol)?;
                Ok(crate::rframework::induced_d_framework(&tr, tol)?.framework)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// serde layer
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FlatRecord {
    id: usize,
    anchor: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct IncidenceRecord {
    edge: usize,
    face: usize,
    normal: Vec<f64>,
}

#[derive(Deserialize)]
struct MetadataRecord {
    name: Option<String>,
    #[serde(default)]
    tags: Vec<String>,
}

#[derive(Deserialize)]
struct DFrameworkFile {
    format_version: u64,
    d: usize,
    #[serde(rename = "D")]
    ambient: usize,
    metadata: Option<MetadataRecord>,
    edges: Vec<FlatRecord>,
    faces: Vec<FlatRecord>,
    incidences: Vec<IncidenceRecord>,
}

#[derive(Deserialize)]
struct VertexRecord {
    id: usize,
    point: Vec<f64>,
}

#[derive(Deserialize)]
struct CellRecord {
    id: usize,
    dim: usize,
    boundary: Vec<usize>,
    #[serde(default)]
    tag: Option<String>,
}

#[derive(Deserialize)]
struct RFrameworkFile {
    format_version: u64,
    d: usize,
    metadata: Option<MetadataRecord>,
    vertices: Vec<VertexRecord>,
    cells: Vec<CellRecord>,
}

#[derive(Deserialize)]
struct KindProbe {
    kind: Option<String>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

fn to_metadata(m: Option<MetadataRecord>) -> Metadata {
    match m {
        None => Metadata::default(),
        Some(m) => Metadata {
            name: m.name,
            tags: m.tags,
        },
    }
}

fn flat_from_record(rec: &FlatRecord, ambient: usize, tol: &Tolerances) -> Result<AffineSubspace> {
    if rec.anchor.len() != ambient {
        return Err(Error::Parse(format!(
            "flat {}: anchor has {} coordinates, expected {ambient}",
            rec.id,
            rec.anchor.len()
        )));
    }
    let anchor = DVector::from_vec(rec.anchor.clone());
    let k = rec.basis.len();
    let mut basis = DMatrix::zeros(ambient, k);
    for (j, row) in rec.basis.iter().enumerate() {
        if row.len() != ambient {
            return Err(Error::Parse(format!(
                "flat {}: basis vector {j} has {} coordinates, expected {ambient}",
                rec.id,
                row.len()
            )));
        }
        for i in 0..ambient {
            basis[(i, j)] = row[i];
        }
    }
    AffineSubspace::new(anchor, basis, tol)
        .map_err(|e| Error::Parse(format!("flat {}: {e}", rec.id)))
}

/// Parse either framework file kind, validating as it loads.
pub fn parse_input(text: &str, tol: &Tolerances) -> Result<LoadedInput> {
    let probe: KindProbe = serde_json::from_str(text).map_err(parse_err)?;
    match probe.kind.as_deref() {
        Some("d-framework") => parse_dframework(text, tol),
        Some("r-framework") => parse_rframework(text, tol),
        Some(k) => Err(Error::Parse(format!("unknown kind {k:?}"))),
        None => Err(Error::Parse("missing \"kind\" field".into())),
    }
}

pub fn read_input(path: &Path, tol: &Tolerances) -> Result<LoadedInput> {
    let text = std::fs::read_to_string(path)?;
    parse_input(&text, tol)
}

fn parse_dframework(text: &str, tol: &Tolerances) -> Result<LoadedInput> {
    let file: DFrameworkFile = serde_json::from_str(text).map_err(parse_err)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {}",
            file.format_version
        )));
    }
    let mut edges_sorted = file.edges;
    edges_sorted.sort_by_key(|r| r.id);
    for (i, r) in edges_sorted.iter().enumerate() {
        if r.id != i {
            return Err(Error::Parse(format!(
                "edge ids must be 0..n without gaps; saw {}",
                r.id
            )));
        }
    }
    let mut faces_sorted = file.faces;
    faces_sorted.sort_by_key(|r| r.id);
    for (i, r) in faces_sorted.iter().enumerate() {
        if r.id != i {
            return Err(Error::Parse(format!(
                "face ids must be 0..n without gaps; saw {}",
                r.id
            )));
        }
    }
    let edges: Vec<AffineSubspace> = edges_sorted
        .iter()
        .map(|r| flat_from_record(r, file.ambient, tol))
        .collect::<Result<_>>()?;
    let faces: Vec<AffineSubspace> = faces_sorted
        .iter()
        .map(|r| flat_from_record(r, file.ambient, tol))
        .collect::<Result<_>>()?;
    let incidences: Vec<Incidence> = file
        .incidences
        .iter()
        .map(|r| {
            if r.normal.len() != file.ambient {
                return Err(Error::Parse(format!(
                    "incidence ({}, {}): normal has {} coordinates",
                    r.edge,
                    r.face,
                    r.normal.len()
                )));
            }
            Ok(Incidence {
                edge: EdgeId(r.edge),
                face: FaceId(r.face),
                normal: DVector::from_vec(r.normal.clone()),
            })
        })
        .collect::<Result<_>>()?;
    let framework = if edges.is_empty() && faces.is_empty() {
        DFramework::empty(file.d, file.ambient)
    } else {
        DFramework::new(file.d, edges, faces, incidences, tol)
    }
    .map_err(|e| Error::Parse(format!("{e}")))?;
    Ok(LoadedInput::D {
        framework,
        metadata: to_metadata(file.metadata),
    })
}

fn parse_rframework(text: &str, tol: &Tolerances) -> Result<LoadedInput> {
    let file: RFrameworkFile = serde_json::from_str(text).map_err(parse_err)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {}",
            file.format_version
        )));
    }
    let mut vertices = file.vertices;
    vertices.sort_by_key(|v| v.id);
    for (i, v) in vertices.iter().enumerate() {
        if v.id != i {
            return Err(Error::Parse(format!(
                "vertex ids must be 0..n without gaps; saw {}",
                v.id
            )));
        }
    }
    let placement: Vec<DVector<f64>> = vertices
        .iter()
        .map(|v| DVector::from_vec(v.point.clone()))
        .collect();
    let mut complex = CwComplex::new(placement.len());
    let mut by_dim: BTreeMap<usize, Vec<&CellRecord>> = BTreeMap::new();
    for c in &file.cells {
        by_dim.entry(c.dim).or_default().push(c);
    }
    let mut tags_by_cell: BTreeMap<(usize, usize), String> = BTreeMap::new();
    for (dim, mut cells) in by_dim {
        if dim == 0 {
            return Err(Error::Parse(
                "dimension-0 cells are implied by `vertices`".into(),
            ));
        }
        cells.sort_by_key(|c| c.id);
        for (i, c) in cells.iter().enumerate() {
            if c.id != i {
                return Err(Error::Parse(format!(
                    "{dim}-cell ids must be 0..n without gaps; saw {}",
                    c.id
                )));
            }
            complex
                .add_cell(dim, c.boundary.clone())
                .map_err(|e| Error::Parse(format!("{dim}-cell {}: {e}", c.id)))?;
            if let Some(tag) = &c.tag {
                tags_by_cell.insert((dim, c.id), tag.clone());
            }
        }
    }
    let framework = RFramework::new(complex, placement, tol)
        .map_err(|e| Error::Parse(format!("{e}")))?;
    let d = framework.d();
    if d != file.d {
        return Err(Error::Parse(format!(
            "file claims d = {} but the placement implies d = {d}",
            file.d
        )));
    }
    let tags: Vec<String> = (0..framework.complex().num_cells(d))
        .map(|i| tags_by_cell.get(&(d, i)).cloned().unwrap_or_default())
        .collect();
    let framework = framework.with_tags(tags)?;
    Ok(LoadedInput::R {
        framework,
        metadata: to_metadata(file.metadata),
    })
}

// ---------------------------------------------------------------------------
// canonical writer
// ---------------------------------------------------------------------------

/// Fixed 17-significant-digit decimal form used everywhere in the canonical
/// output; round-trips exactly through f64.
pub fn canonical_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_number_list(out: &mut String, values: impl Iterator<Item = f64>) {
    out.push('[');
    let mut first = true;
    for v in values {
        if !first {
            out.push_str(", ");
        }
        first = false;
        out.push_str(&canonical_f64(v));
    }
    out.push(']');
}

fn write_flat(out: &mut String, indent: &str, id: usize, flat: &AffineSubspace) {
    let _ = write!(out, "{indent}{{\"id\": {id}, \"anchor\": ");
    write_number_list(out, flat.anchor().iter().copied());
    out.push_str(", \"basis\": [");
    for j in 0..flat.dim() {
        if j > 0 {
            out.push_str(", ");
        }
        write_number_list(out, flat.basis().column(j).iter().copied());
    }
    out.push_str("]}");
}

fn write_metadata(out: &mut String, metadata: &Metadata) {
    out.push_str("  \"metadata\": {\"name\": ");
    match &metadata.name {
        Some(n) => {
            let _ = write!(out, "{}", serde_json::Value::String(n.clone()));
        }
        None => out.push_str("null"),
    }
    out.push_str(", \"tags\": [");
    for (i, t) in metadata.tags.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", serde_json::Value::String(t.clone()));
    }
    out.push_str("]},\n");
}

/// Canonical JSON for a d-framework: ids ascending, incidences sorted by
/// (edge, face), all numbers in the fixed decimal form.
pub fn framework_to_canonical_json(fw: &DFramework, metadata: &Metadata) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = write!(
        out,
        "  \"format_version\": {FORMAT_VERSION},\n  \"kind\": \"d-framework\",\n  \"d\": {},\n  \"D\": {},\n",
        fw.d(),
        fw.ambient_dim()
    );
    write_metadata(&mut out, metadata);
    out.push_str("  \"edges\": [\n");
    for e in 0..fw.num_edges() {
        write_flat(&mut out, "    ", e, fw.edge(EdgeId(e)));
        out.push_str(if e + 1 < fw.num_edges() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n  \"faces\": [\n");
    for f in 0..fw.num_faces() {
        write_flat(&mut out, "    ", f, fw.face(FaceId(f)));
        out.push_str(if f + 1 < fw.num_faces() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n  \"incidences\": [\n");
    let mut incs: Vec<&Incidence> = fw.incidences().iter().collect();
    incs.sort_by_key(|i| (i.edge.0, i.face.0));
    for (k, inc) in incs.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"edge\": {}, \"face\": {}, \"normal\": ",
            inc.edge.0, inc.face.0
        );
        write_number_list(&mut out, inc.normal.iter().copied());
        out.push('}');
        out.push_str(if k + 1 < incs.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

/// Canonical JSON for an R-framework: vertices then cells by ascending
/// (dimension, id); face tags inline on the d-cells.
pub fn rframework_to_canonical_json(r: &RFramework, metadata: &Metadata) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = write!(
        out,
        "  \"format_version\": {FORMAT_VERSION},\n  \"kind\": \"r-framework\",\n  \"d\": {},\n",
        r.d()
    );
    write_metadata(&mut out, metadata);
    out.push_str("  \"vertices\": [\n");
    let nv = r.complex().num_cells(0);
    for v in 0..nv {
        let _ = write!(out, "    {{\"id\": {v}, \"point\": ");
        write_number_list(&mut out, r.point(v).iter().copied());
        out.push('}');
        out.push_str(if v + 1 < nv { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n  \"cells\": [\n");
    let mut lines = Vec::new();
    for dim in 1..=r.complex().dim() {
        for i in 0..r.complex().num_cells(dim) {
            let mut line = format!(
                "    {{\"id\": {i}, \"dim\": {dim}, \"boundary\": {:?}",
                r.complex().boundary(dim, i)
            );
            if dim == r.d() {
                let tag = &r.face_tags()[i];
                if !tag.is_empty() {
                    let _ = write!(line, ", \"tag\": {}", serde_json::Value::String(tag.clone()));
                }
            }
            line.push('}');
            lines.push(line);
        }
    }
    out.push_str(&lines.join(",\n"));
    out.push_str("\n  ]\n}\n");
    out
}

pub fn write_input(path: &Path, input: &LoadedInput) -> Result<()> {
    let text = match input {
        LoadedInput::D {
            framework,
            metadata,
        } => framework_to_canonical_json(framework, metadata),
        LoadedInput::R {
            framework,
            metadata,
        } => rframework_to_canonical_json(framework, metadata),
    };
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// mesh export
// ---------------------------------------------------------------------------

/// Recover the polygon of a d = 2 framework face: intersections of its
/// incident edge lines, ordered by angle around their centroid.
fn face_polygon(
    fw: &DFramework,
    face: FaceId,
    tol: &Tolerances,
) -> Result<Vec<DVector<f64>>> {
    let plane = fw.face(face);
    let mut lines = Vec::new();
    for inc in fw.incidences() {
        if inc.face == face {
            lines.push(fw.edge(inc.edge).clone());
        }
    }
    if lines.len() < 3 {
        return Err(Error::Usage(format!(
            "face {} has fewer than 3 incident edges; no polygon",
            face.0
        )));
    }
    let mut pts: Vec<DVector<f64>> = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            if let Some(m) = lines[i].meet(&lines[j], tol)? {
                if m.dim() == 0 {
                    let p = m.anchor().clone();
                    if !pts.iter().any(|q| (q - &p).norm() < 1e-7) {
                        pts.push(p);
                    }
                }
            }
        }
    }
    if pts.len() < 3 {
        return Err(Error::Usage(format!(
            "face {}: incident edges do not bound a polygon",
            face.0
        )));
    }
    let centroid = pts.iter().fold(DVector::zeros(3), |a, p| a + p) / pts.len() as f64;
    pts.sort_by(|p, q| {
        let angle = |x: &DVector<f64>| {
            let rel = x - &centroid;
            let u = plane.basis().column(0).dot(&rel);
            let v = plane.basis().column(1).dot(&rel);
            v.atan2(u)
        };
        angle(p)
            .partial_cmp(&angle(q))
            .expect("finite angles")
    });
    Ok(pts)
}

/// ASCII PLY export with a per-face `stress` attribute (the first stress
/// basis vector, or zeros for non-stressable inputs). d = 2 frameworks
/// export polygons; d = 1 frameworks export their segments as PLY edges;
/// R-framework inputs export their cells directly.
pub fn export_mesh_ply(input: &LoadedInput, tol: &Tolerances) -> Result<String> {
    match input {
        LoadedInput::R { framework: r, .. } => {
            let tr = crate::rframework::triangulate(r, tol)?;
            let ind = crate::rframework::induced_d_framework(&tr, tol)?;
            let ss = ind.framework.stress_space(tol);
            let per_parent: Vec<f64> = if ss.dimension >= 1 {
                ind.stress_on_parents(&ss.basis[0])
            } else {
                vec![0.0; ind.original_face_count]
            };
            let d = r.d();
            let vertices: Vec<DVector<f64>> = r.placement().to_vec();
            if d == 1 {
                let segs: Vec<(usize, usize, f64)> = (0..r.complex().num_cells(1))
                    .map(|c| {
                        let b = r.complex().boundary(1, c);
                        (b[0], b[1], per_parent[c])
                    })
                    .collect();
                return Ok(ply_edges(&vertices, &segs));
            }
            let mut faces = Vec::new();
            for c in 0..r.complex().num_cells(2) {
                faces.push((r.complex().two_cell_loop(c)?, per_parent[c]));
            }
            Ok(ply_faces(&vertices, &faces))
        }
        LoadedInput::D { framework: fw, .. } => {
            let ss = fw.stress_space(tol);
            let stress = |f: usize| {
                if ss.dimension >= 1 {
                    ss.basis[0].value(FaceId(f))
                } else {
                    0.0
                }
            };
            if fw.d() == 1 {
                // segments between the two incident point-edges of each line
                let mut vertices = Vec::new();
                let mut segs = Vec::new();
                for f in 0..fw.num_faces() {
                    let ends: Vec<DVector<f64>> = fw
                        .incidences()
                        .iter()
                        .filter(|i| i.face.0 == f)
                        .map(|i| fw.edge(i.edge).anchor().clone())
                        .collect();
                    if ends.len() != 2 {
                        return Err(Error::Usage(format!(
                            "face {f} has {} endpoint edges; cannot export a segment",
                            ends.len()
                        )));
                    }
                    let mut idx = [0usize; 2];
                    for (k, p) in ends.iter().enumerate() {
                        idx[k] = push_vertex(&mut vertices, p);
                    }
                    segs.push((idx[0], idx[1], stress(f)));
                }
                return Ok(ply_edges(&vertices, &segs));
            }
            let mut vertices: Vec<DVector<f64>> = Vec::new();
            let mut faces = Vec::new();
            for f in 0..fw.num_faces() {
                let poly = face_polygon(fw, FaceId(f), tol)?;
                let ids: Vec<usize> = poly.iter().map(|p| push_vertex(&mut vertices, p)).collect();
                faces.push((ids, stress(f)));
            }
            Ok(ply_faces(&vertices, &faces))
        }
    }
}

fn push_vertex(vertices: &mut Vec<DVector<f64>>, p: &DVector<f64>) -> usize {
    for (i, q) in vertices.iter().enumerate() {
        if (q - p).norm() < 1e-9 {
            return i;
        }
    }
    vertices.push(p.clone());
    vertices.len() - 1
}

fn ply_header(out: &mut String, nv: usize, coords: usize) {
    out.push_str("ply\nformat ascii 1.0\ncomment stresskit mesh export\n");
    let _ = writeln!(out, "element vertex {nv}");
    for axis in ["x", "y", "z"].iter().take(coords.max(3)) {
        let _ = writeln!(out, "property double {axis}");
    }
}

fn vertex_lines(out: &mut String, vertices: &[DVector<f64>]) {
    for v in vertices {
        let mut coords: Vec<f64> = v.iter().copied().collect();
        while coords.len() < 3 {
            coords.push(0.0);
        }
        let strs: Vec<String> = coords.iter().map(|c| canonical_f64(*c)).collect();
        let _ = writeln!(out, "{}", strs.join(" "));
    }
}

fn ply_faces(vertices: &[DVector<f64>], faces: &[(Vec<usize>, f64)]) -> String {
    let mut out = String::new();
    ply_header(&mut out, vertices.len(), 3);
    let _ = writeln!(out, "element face {}", faces.len());
    out.push_str("property list uchar int vertex_indices\nproperty double stress\nend_header\n");
    vertex_lines(&mut out, vertices);
    for (ids, stress) in faces {
        let mut line = format!("{}", ids.len());
        for i in ids {
            let _ = write!(line, " {i}");
        }
        let _ = write!(line, " {}", canonical_f64(*stress));
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn ply_edges(vertices: &[DVector<f64>], segs: &[(usize, usize, f64)]) -> String {
    let mut out = String::new();
    ply_header(&mut out, vertices.len(), 3);
    let _ = writeln!(out, "element edge {}", segs.len());
    out.push_str("property int vertex1\nproperty int vertex2\nproperty double stress\nend_header\n");
    vertex_lines(&mut out, vertices);
    for (a, b, stress) in segs {
        let _ = writeln!(out, "{a} {b} {}", canonical_f64(*stress));
    }
    out
}
