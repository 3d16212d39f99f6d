//! JSON file formats.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annulus_map::{AnnulusMap, Corner, Dart, Edge, MapError};
use crate::geometry::{Pt, Seg, SymmetryGroup};
use crate::realize_contact::ContactSystem;
use crate::realize_pseudo::{PptEdge, PptRealization};
use crate::reduction::ConstructionSequence;
use crate::scalar::Scalar;
use crate::{QSqrt3, Rational};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerFile {
    pub vertex: String,
    #[serde(rename = "in", default)]
    pub incoming: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeFile>,
    pub rotation: BTreeMap<String, Vec<String>>,
    pub end_faces: [CornerFile; 2],
}

/// Accepts `+`, `-` and the typographic minus `−` as the trailing sign.
pub fn parse_dart(s: &str, edge_index: &BTreeMap<&str, usize>) -> Result<Dart, FormatError> {
    let (body, plus) = if let Some(b) = s.strip_suffix('+') {
        (b, true)
    } else if let Some(b) = s.strip_suffix('-') {
        (b, false)
    } else if let Some(b) = s.strip_suffix('\u{2212}') {
        (b, false)
    } else {
        return Err(FormatError::Invalid(format!("dart {s:?} lacks a sign")));
    };
    let e = edge_index.get(body).ok_or_else(|| FormatError::Invalid(format!("dart {s:?} names no edge")))?;
    Ok(Dart::new(*e, plus))
}

impl MapFile {
    pub fn to_map(&self) -> Result<AnnulusMap, FormatError> {
        let vindex: BTreeMap<&str, usize> = self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let vertex =
            |v: &str| vindex.get(v).copied().ok_or_else(|| FormatError::Invalid(format!("unknown vertex {v:?}")));
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            edges.push(Edge { id: e.id.clone(), tail: vertex(&e.tail)?, head: vertex(&e.head)? });
        }
        let eindex: BTreeMap<&str, usize> = self.edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let mut rotation = vec![Vec::new(); self.vertices.len()];
        for (v, darts) in &self.rotation {
            let vi = vertex(v)?;
            for d in darts {
                rotation[vi].push(parse_dart(d, &eindex)?);
            }
        }
        let corner = |c: &CornerFile| -> Result<Corner, FormatError> {
            let dart = |s: &Option<String>| s.as_deref().map(|s| parse_dart(s, &eindex)).transpose();
            Ok(Corner { vertex: vertex(&c.vertex)?, incoming: dart(&c.incoming)?, outgoing: dart(&c.out)? })
        };
        let ends = [corner(&self.end_faces[0])?, corner(&self.end_faces[1])?];
        Ok(AnnulusMap::build(self.vertices.clone(), edges, rotation, ends)?)
    }

    pub fn from_map(map: &AnnulusMap) -> MapFile {
        let vid = |v: usize| map.vertex_id(v).to_string();
        let corner = |c: Corner| CornerFile {
            vertex: vid(c.vertex),
            incoming: c.incoming.map(|d| map.dart_label(d)),
            out: c.outgoing.map(|d| map.dart_label(d)),
        };
        let [a, b] = map.end_corners();
        MapFile {
            vertices: map.vertex_ids().to_vec(),
            edges: map
                .edges()
                .iter()
                .map(|e| EdgeFile { id: e.id.clone(), tail: vid(e.tail), head: vid(e.head) })
                .collect(),
            rotation: (0..map.n_vertices())
                .map(|v| (vid(v), map.rotation(v).iter().map(|&d| map.dart_label(d)).collect()))
                .collect(),
            end_faces: [corner(a), corner(b)],
        }
    }
}

pub fn map_from_json(s: &str) -> Result<AnnulusMap, FormatError> {
    serde_json::from_str::<MapFile>(s)?.to_map()
}

pub fn map_to_json(map: &AnnulusMap) -> String {
    serde_json::to_string_pretty(&MapFile::from_map(map)).expect("map serialization cannot fail")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupFile {
    Translation { vector: [String; 2] },
    Rotation { order: u32, center: [String; 2] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub id: String,
    pub p: [String; 2],
    pub q: [String; 2],
}

/// A contact system with coordinates as [`Scalar::encode`] strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub number_system: String,
    pub group: GroupFile,
    pub segments: Vec<SegmentFile>,
    #[serde(default)]
    pub provenance: Option<ConstructionSequence>,
}

fn enc<S: Scalar>(p: &Pt<S>) -> [String; 2] {
    [p.x.encode(), p.y.encode()]
}

fn dec<S: Scalar>(p: &[String; 2]) -> Result<Pt<S>, FormatError> {
    let c = |s: &str| {
        S::decode(s).ok_or_else(|| FormatError::Invalid(format!("bad {} coordinate {s:?}", S::NUMBER_SYSTEM)))
    };
    Ok(Pt::new(c(&p[0])?, c(&p[1])?))
}

fn check_number_system<S: Scalar>(tag: &str) -> Result<(), FormatError> {
    if tag == S::NUMBER_SYSTEM {
        Ok(())
    } else {
        Err(FormatError::Invalid(format!("file uses {tag} coordinates, expected {}", S::NUMBER_SYSTEM)))
    }
}

impl GroupFile {
    pub fn from_group<S: Scalar>(group: &SymmetryGroup<S>) -> GroupFile {
        match group {
            SymmetryGroup::Translation { v } => GroupFile::Translation { vector: enc(v) },
            SymmetryGroup::Rotation { k, center, .. } => GroupFile::Rotation { order: *k, center: enc(center) },
        }
    }

    pub fn to_group<S: Scalar>(&self) -> Result<SymmetryGroup<S>, FormatError> {
        match self {
            GroupFile::Translation { vector } => SymmetryGroup::translation(dec(vector)?)
                .ok_or_else(|| FormatError::Invalid("translation vector is zero".into())),
            GroupFile::Rotation { order, center } => SymmetryGroup::rotation(*order, dec(center)?).ok_or_else(|| {
                FormatError::Invalid(format!(
                    "{} coordinates cannot carry a rotation of order {order}",
                    S::NUMBER_SYSTEM
                ))
            }),
        }
    }
}

impl SystemFile {
    pub fn from_system<S: Scalar>(sys: &ContactSystem<S>) -> SystemFile {
        SystemFile {
            number_system: S::NUMBER_SYSTEM.to_string(),
            group: GroupFile::from_group(&sys.group),
            segments: sys
                .ids
                .iter()
                .zip(&sys.reps)
                .map(|(id, s)| SegmentFile { id: id.clone(), p: enc(&s.p), q: enc(&s.q) })
                .collect(),
            provenance: sys.provenance.clone(),
        }
    }

    pub fn to_system<S: Scalar>(&self) -> Result<ContactSystem<S>, FormatError> {
        check_number_system::<S>(&self.number_system)?;
        let group = self.group.to_group()?;
        let mut ids = Vec::new();
        let mut reps = Vec::new();
        for s in &self.segments {
            if ids.contains(&s.id) {
                return Err(FormatError::Invalid(format!("duplicate segment id {}", s.id)));
            }
            ids.push(s.id.clone());
            reps.push(Seg::new(dec(&s.p)?, dec(&s.q)?));
        }
        Ok(ContactSystem { group, ids, reps, provenance: self.provenance.clone() })
    }
}

/// A contact system in whichever number system its file names.
#[derive(Clone, Debug)]
pub enum AnySystem {
    Rational(ContactSystem<Rational>),
    Sqrt3(ContactSystem<QSqrt3>),
    Float(ContactSystem<f64>),
}

impl AnySystem {
    pub fn from_json(s: &str) -> Result<AnySystem, FormatError> {
        let file: SystemFile = serde_json::from_str(s)?;
        match file.number_system.as_str() {
            "rational" => Ok(AnySystem::Rational(file.to_system()?)),
            "rational-sqrt3" => Ok(AnySystem::Sqrt3(file.to_system()?)),
            "float" => Ok(AnySystem::Float(file.to_system()?)),
            other => Err(FormatError::Invalid(format!("unknown number system {other:?}"))),
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            AnySystem::Rational(s) => SystemFile::from_system(s),
            AnySystem::Sqrt3(s) => SystemFile::from_system(s),
            AnySystem::Float(s) => SystemFile::from_system(s),
        };
        serde_json::to_string_pretty(&file).expect("system serialization cannot fail")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptVertexFile {
    pub id: String,
    pub p: [String; 2],
}

/// Edge `id` runs from `tail` to the image of `head` under group element `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptEdgeFile {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub g: i64,
}

/// A symmetric pseudotriangulation: one position per vertex orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptFile {
    pub number_system: String,
    pub group: GroupFile,
    pub vertices: Vec<PptVertexFile>,
    pub edges: Vec<PptEdgeFile>,
    #[serde(default)]
    pub provenance: Option<ConstructionSequence>,
}

impl PptFile {
    pub fn from_ppt<S: Scalar>(real: &PptRealization<S>) -> PptFile {
        PptFile {
            number_system: S::NUMBER_SYSTEM.to_string(),
            group: GroupFile::from_group(&real.group),
            vertices: real
                .ids
                .iter()
                .zip(&real.pos)
                .map(|(id, p)| PptVertexFile { id: id.clone(), p: enc(p) })
                .collect(),
            edges: real
                .edges
                .iter()
                .map(|e| PptEdgeFile {
                    id: e.id.clone(),
                    tail: real.ids[e.tail].clone(),
                    head: real.ids[e.head].clone(),
                    g: e.g,
                })
                .collect(),
            provenance: real.provenance.clone(),
        }
    }

    pub fn to_ppt<S: Scalar>(&self) -> Result<PptRealization<S>, FormatError> {
        check_number_system::<S>(&self.number_system)?;
        let group = self.group.to_group()?;
        let mut index = BTreeMap::new();
        let mut pos = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.id.as_str(), i).is_some() {
                return Err(FormatError::Invalid(format!("duplicate vertex id {}", v.id)));
            }
            pos.push(dec(&v.p)?);
        }
        let vertex =
            |id: &str| index.get(id).copied().ok_or_else(|| FormatError::Invalid(format!("unknown vertex {id}")));
        let mut edges = Vec::new();
        for e in &self.edges {
            if edges.iter().any(|x: &PptEdge| x.id == e.id) {
                return Err(FormatError::Invalid(format!("duplicate edge id {}", e.id)));
            }
            edges.push(PptEdge { id: e.id.clone(), tail: vertex(&e.tail)?, head: vertex(&e.head)?, g: e.g });
        }
        let ids = self.vertices.iter().map(|v| v.id.clone()).collect();
        Ok(PptRealization { group, ids, pos, edges, provenance: self.provenance.clone() })
    }
}

/// A pseudotriangulation in whichever number system its file names.
#[derive(Clone, Debug)]
pub enum AnyPpt {
    Rational(PptRealization<Rational>),
    Sqrt3(PptRealization<QSqrt3>),
    Float(PptRealization<f64>),
}

impl AnyPpt {
    pub fn from_json(s: &str) -> Result<AnyPpt, FormatError> {
        let file: PptFile = serde_json::from_str(s)?;
        match file.number_system.as_str() {
            "rational" => Ok(AnyPpt::Rational(file.to_ppt()?)),
            "rational-sqrt3" => Ok(AnyPpt::Sqrt3(file.to_ppt()?)),
            "float" => Ok(AnyPpt::Float(file.to_ppt()?)),
            other => Err(FormatError::Invalid(format!("unknown number system {other:?}"))),
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            AnyPpt::Rational(r) => PptFile::from_ppt(r),
            AnyPpt::Sqrt3(r) => PptFile::from_ppt(r),
            AnyPpt::Float(r) => PptFile::from_ppt(r),
        };
        serde_json::to_string_pretty(&file).expect("pseudotriangulation serialization cannot fail")
    }
}
