//! File formats: ASCII OFF and PLY meshes, displacement CSV, clip and
//! interior JSON.
//!
//! Floating point values are written with Rust's shortest round-trip
//! formatting, so save/load cycles reproduce coordinates bitwise.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::{DisplacementField, InteriorPointSet, Point3, SurfaceMesh, Vec3};
use crate::synthetic::SyntheticCase;

use super::PipelineError;

fn io_err(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Loads a triangle mesh, dispatching on the file extension (.off / .ply).
pub fn load_mesh(path: &Path) -> Result<SurfaceMesh, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    match extension(path)?.as_str() {
        "off" => parse_off(path, &text),
        "ply" => parse_ply(path, &text),
        other => Err(PipelineError::UnsupportedExtension {
            extension: other.to_string(),
        }),
    }
}

/// Saves a triangle mesh, dispatching on the file extension (.off / .ply).
pub fn save_mesh(m: &SurfaceMesh, path: &Path) -> Result<(), PipelineError> {
    let text = match extension(path)?.as_str() {
        "off" => write_off(m),
        "ply" => write_ply(m),
        other => {
            return Err(PipelineError::UnsupportedExtension {
                extension: other.to_string(),
            })
        }
    };
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn extension(path: &Path) -> Result<String, PipelineError> {
    path.extension()
        .map(|e| e.to_string_lossy().to_lowercase())
        .ok_or_else(|| PipelineError::UnsupportedExtension {
            extension: String::new(),
        })
}

fn write_off(m: &SurfaceMesh) -> String {
    let mut out = String::from("OFF\n");
    let _ = writeln!(out, "{} {} 0", m.vertex_count(), m.triangle_count());
    for v in m.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for t in m.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

fn parse_off(path: &Path, text: &str) -> Result<SurfaceMesh, PipelineError> {
    // Tokens annotated with their 1-based line for error reporting.
    let mut tokens = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));

    let mut next = |what: &str| -> Result<(usize, &str), PipelineError> {
        tokens
            .next()
            .ok_or_else(|| parse_err(path, text.lines().count(), format!("missing {what}")))
    };

    let (line, magic) = next("OFF header")?;
    if magic != "OFF" {
        return Err(parse_err(path, line, format!("expected OFF header, found {magic:?}")));
    }
    let (line, nv) = next("vertex count")?;
    let nv: usize = nv
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad vertex count {nv:?}")))?;
    let (line, nf) = next("face count")?;
    let nf: usize = nf
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad face count {nf:?}")))?;
    let (_, _edges) = next("edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut coords = [0.0f64; 3];
        for c in &mut coords {
            let (line, tok) = next("vertex coordinate")?;
            *c = tok
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad coordinate {tok:?}")))?;
        }
        vertices.push(Point3::new(coords[0], coords[1], coords[2]));
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, arity) = next("face arity")?;
        if arity != "3" {
            return Err(parse_err(path, line, format!("only triangles supported, got arity {arity:?}")));
        }
        let mut idx = [0usize; 3];
        for v in &mut idx {
            let (line, tok) = next("face index")?;
            *v = tok
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad vertex index {tok:?}")))?;
            if *v >= nv {
                return Err(parse_err(path, line, format!("vertex index {v} out of range (mesh has {nv} vertices)")));
            }
        }
        triangles.push(idx);
    }

    SurfaceMesh::new(vertices, triangles).map_err(PipelineError::Mesh)
}

fn write_ply(m: &SurfaceMesh) -> String {
    let mut out = String::from("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", m.vertex_count());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    let _ = writeln!(out, "element face {}", m.triangle_count());
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for v in m.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for t in m.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

fn parse_ply(path: &Path, text: &str) -> Result<SurfaceMesh, PipelineError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let get = |i: &mut usize| -> Option<&str> {
        let l = lines.get(*i).copied();
        *i += 1;
        l
    };

    if get(&mut i).map(str::trim) != Some("ply") {
        return Err(parse_err(path, 1, "expected 'ply' magic"));
    }

    let mut nv = None;
    let mut nf = None;
    let mut in_element: Option<&str> = None;
    let mut vertex_props: Vec<String> = Vec::new();
    loop {
        let line_no = i + 1;
        let Some(raw) = get(&mut i) else {
            return Err(parse_err(path, line_no, "unexpected end of header"));
        };
        let line = raw.trim();
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["end_header"] => break,
            ["comment", ..] => {}
            ["format", "ascii", _] => {}
            ["format", other, _] => {
                return Err(parse_err(path, line_no, format!("unsupported PLY format {other:?} (ascii only)")));
            }
            ["element", "vertex", count] => {
                nv = Some(count.parse::<usize>().map_err(|_| {
                    parse_err(path, line_no, format!("bad vertex count {count:?}"))
                })?);
                in_element = Some("vertex");
            }
            ["element", "face", count] => {
                nf = Some(count.parse::<usize>().map_err(|_| {
                    parse_err(path, line_no, format!("bad face count {count:?}"))
                })?);
                in_element = Some("face");
            }
            ["element", ..] => in_element = Some("other"),
            ["property", "list", ..] => {}
            ["property", _ty, name] => {
                if in_element == Some("vertex") {
                    vertex_props.push((*name).to_string());
                }
            }
            _ => {
                return Err(parse_err(path, line_no, format!("unrecognized header line {line:?}")));
            }
        }
    }

    let nv = nv.ok_or_else(|| parse_err(path, i, "missing vertex element"))?;
    let nf = nf.ok_or_else(|| parse_err(path, i, "missing face element"))?;
    let coord_at = |axis: &str| vertex_props.iter().position(|p| p == axis);
    let (ix, iy, iz) = match (coord_at("x"), coord_at("y"), coord_at("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(parse_err(path, i, "vertex element must carry x, y, z properties")),
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line_no = i + 1;
        let Some(raw) = get(&mut i) else {
            return Err(parse_err(path, line_no, "unexpected end of vertex list"));
        };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() < vertex_props.len() {
            return Err(parse_err(path, line_no, format!("expected {} vertex properties, found {}", vertex_props.len(), fields.len())));
        }
        let parse_coord = |idx: usize| -> Result<f64, PipelineError> {
            fields[idx]
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("bad coordinate {:?}", fields[idx])))
        };
        vertices.push(Point3::new(parse_coord(ix)?, parse_coord(iy)?, parse_coord(iz)?));
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let line_no = i + 1;
        let Some(raw) = get(&mut i) else {
            return Err(parse_err(path, line_no, "unexpected end of face list"));
        };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.first() != Some(&"3") {
            return Err(parse_err(path, line_no, "only triangle faces supported"));
        }
        if fields.len() < 4 {
            return Err(parse_err(path, line_no, "truncated face line"));
        }
        let mut idx = [0usize; 3];
        for (k, v) in idx.iter_mut().enumerate() {
            *v = fields[k + 1]
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("bad vertex index {:?}", fields[k + 1])))?;
            if *v >= nv {
                return Err(parse_err(path, line_no, format!("vertex index {v} out of range (mesh has {nv} vertices)")));
            }
        }
        triangles.push(idx);
    }

    SurfaceMesh::new(vertices, triangles).map_err(PipelineError::Mesh)
}

/// Writes a displacement field as `vertex,dx,dy,dz` CSV.
pub fn save_displacement_csv(field: &DisplacementField, path: &Path) -> Result<(), PipelineError> {
    let mut out = String::from("vertex,dx,dy,dz\n");
    for (i, v) in field.vectors().iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", i, v.x, v.y, v.z);
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads a `vertex,dx,dy,dz` CSV; the field must cover vertices
/// `0..expected_len` exactly.
pub fn load_displacement_csv(
    path: &Path,
    expected_len: usize,
) -> Result<DisplacementField, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut vectors = vec![None; expected_len];
    for (line_no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(path, line_no + 1, format!("expected 4 comma-separated fields, found {}", fields.len())));
        }
        let idx: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line_no + 1, format!("bad vertex index {:?}", fields[0])))?;
        if idx >= expected_len {
            return Err(parse_err(path, line_no + 1, format!("vertex index {idx} out of range ({expected_len} vertices)")));
        }
        let mut d = [0.0f64; 3];
        for (k, f) in fields[1..].iter().enumerate() {
            d[k] = f
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line_no + 1, format!("bad component {f:?}")))?;
        }
        vectors[idx] = Some(Vec3::new(d[0], d[1], d[2]));
    }
    let vectors: Vec<Vec3> = vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| parse_err(path, 0, format!("missing displacement for vertex {i}"))))
        .collect::<Result<_, _>>()?;
    DisplacementField::new(vectors).map_err(PipelineError::Mesh)
}

#[derive(Serialize, Deserialize)]
struct ClipFile {
    clips: Vec<ClipEntry>,
}

#[derive(Serialize, Deserialize)]
struct ClipEntry {
    source: [f64; 3],
    target: [f64; 3],
}

/// Writes clip pairs as JSON.
pub fn save_clips(
    clips: &[(Point3, Point3)],
    path: &Path,
) -> Result<(), PipelineError> {
    let file = ClipFile {
        clips: clips
            .iter()
            .map(|(s, t)| ClipEntry {
                source: [s.x, s.y, s.z],
                target: [t.x, t.y, t.z],
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Reads clip pairs as (source, target) positions.
pub fn load_clips(path: &Path) -> Result<Vec<(Point3, Point3)>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: ClipFile =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))?;
    Ok(file
        .clips
        .into_iter()
        .map(|c| {
            (
                Point3::new(c.source[0], c.source[1], c.source[2]),
                Point3::new(c.target[0], c.target[1], c.target[2]),
            )
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct InteriorFile {
    points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deflated: Option<Vec<[f64; 3]>>,
}

pub fn save_interior(
    points: &InteriorPointSet,
    deflated: Option<&InteriorPointSet>,
    path: &Path,
) -> Result<(), PipelineError> {
    let file = InteriorFile {
        points: points.points.iter().map(|p| [p.x, p.y, p.z]).collect(),
        deflated: deflated.map(|d| d.points.iter().map(|p| [p.x, p.y, p.z]).collect()),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn load_interior(
    path: &Path,
) -> Result<(InteriorPointSet, Option<InteriorPointSet>), PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: InteriorFile =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))?;
    let to_points = |v: Vec<[f64; 3]>| {
        InteriorPointSet::new(v.into_iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
    };
    Ok((to_points(file.points), file.deflated.map(to_points)))
}

#[derive(Serialize, Deserialize)]
struct TransformFile {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

/// Reads a rigid transform as a row-major 3×3 rotation and a translation.
pub fn load_transform(path: &Path) -> Result<(nalgebra::Matrix3<f64>, Vec3), PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: TransformFile =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))?;
    let r = nalgebra::Matrix3::from_fn(|i, j| file.rotation[i][j]);
    let t = Vec3::new(file.translation[0], file.translation[1], file.translation[2]);
    Ok((r, t))
}

pub fn save_transform(
    r: &nalgebra::Matrix3<f64>,
    t: &Vec3,
    path: &Path,
) -> Result<(), PipelineError> {
    let file = TransformFile {
        rotation: [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
        ],
        translation: [t.x, t.y, t.z],
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes a synthetic dataset in the directory layout [`CaseRecord`]
/// expects: one subdirectory per case with meshes, clips, params, truth
/// field, and interior points.
///
/// [`CaseRecord`]: super::CaseRecord
pub fn save_dataset(cases: &[SyntheticCase], dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for case in cases {
        let cdir = dir.join(format!("case_{:03}", case.id));
        std::fs::create_dir_all(&cdir).map_err(|e| io_err(&cdir, e))?;
        save_mesh(&case.inflated, &cdir.join("inflated.off"))?;
        save_mesh(&case.deflated, &cdir.join("deflated.off"))?;
        save_displacement_csv(&case.truth_field, &cdir.join("truth.csv"))?;
        let clip_pairs: Vec<(Point3, Point3)> = case
            .clips
            .iter()
            .map(|c| (c.source_pos, c.target_pos))
            .collect();
        save_clips(&clip_pairs, &cdir.join("clips.json"))?;
        save_interior(
            &case.interior,
            Some(&case.interior_deflated),
            &cdir.join("interior.json"),
        )?;
        let params_path = cdir.join("params.json");
        let text = serde_json::to_string_pretty(&case.params)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        std::fs::write(&params_path, text).map_err(|e| io_err(&params_path, e))?;
    }
    Ok(())
}
