use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{DomainE, FieldSpec, GridFace, GridIndex, GridSpec, SampledField};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{what}: {source}")]
    Json {
        what: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

/// domain.json: grid, full cells, and optional lower faces given by anchor
/// node index (vertices), anchor plus axis (edges), or anchor plus normal
/// axis (facets, n = 3 only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    pub n: usize,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub cells: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facets: Vec<Vec<i64>>,
}

fn index(v: &[i64], n: usize, what: &str) -> Result<GridIndex, FormatError> {
    if v.len() < n {
        return Err(FormatError::Invalid(format!(
            "{what} entry {v:?} needs {n} indices"
        )));
    }
    let mut out = [0i64; 3];
    out[..n].copy_from_slice(&v[..n]);
    Ok(out)
}

fn axis(v: &[i64], n: usize, what: &str) -> Result<u8, FormatError> {
    match v.get(n) {
        Some(&a) if v.len() == n + 1 && (0..n as i64).contains(&a) => Ok(a as u8),
        _ => Err(FormatError::Invalid(format!(
            "{what} entry {v:?} needs {n} indices and an axis below {n}"
        ))),
    }
}

impl DomainDoc {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            origin: self.origin.clone(),
            spacing: self.spacing,
            shape: self.shape.clone(),
        }
    }

    pub fn to_domain(&self) -> Result<DomainE, FormatError> {
        let n = self.n;
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            if c.len() != n {
                return Err(FormatError::Invalid(format!(
                    "cell {c:?} needs {n} indices"
                )));
            }
            cells.push(index(c, n, "cell")?);
        }
        let mut lower = Vec::new();
        for v in &self.vertices {
            if v.len() != n {
                return Err(FormatError::Invalid(format!(
                    "vertex {v:?} needs {n} indices"
                )));
            }
            lower.push(GridFace {
                anchor: index(v, n, "vertex")?,
                mask: 0,
            });
        }
        for e in &self.edges {
            let a = axis(e, n, "edge")?;
            lower.push(GridFace {
                anchor: index(e, n, "edge")?,
                mask: 1 << a,
            });
        }
        if !self.facets.is_empty() && n != 3 {
            return Err(FormatError::Invalid(
                "facets are only allowed for n = 3 (use edges in 2D)".into(),
            ));
        }
        for f in &self.facets {
            let a = axis(f, n, "facet")?;
            lower.push(GridFace {
                anchor: index(f, n, "facet")?,
                mask: 0b111 & !(1 << a),
            });
        }
        DomainE::new(self.grid(), cells, lower).map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesDoc {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// field.json: one expression per component, or grid samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exprs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SamplesDoc>,
}

impl FieldDoc {
    pub fn exprs(sources: &[&str]) -> Self {
        Self {
            exprs: Some(sources.iter().map(|s| s.to_string()).collect()),
            samples: None,
        }
    }

    pub fn to_field(&self) -> Result<FieldSpec, FormatError> {
        match (&self.exprs, &self.samples) {
            (Some(e), None) => FieldSpec::parse(e).map_err(|e| FormatError::Invalid(e.to_string())),
            (None, Some(s)) => SampledField::new(s.grid.clone(), s.values.clone())
                .map(FieldSpec::sampled)
                .map_err(|e| FormatError::Invalid(e.to_string())),
            _ => Err(FormatError::Invalid(
                "field needs exactly one of \"exprs\" or \"samples\"".into(),
            )),
        }
    }
}

/// Compact JSON; floats in shortest round-trip form.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("documents serialize")
}

pub fn from_json<T: DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, FormatError> {
    serde_json::from_slice(bytes).map_err(|source| FormatError::Json {
        what: what.to_string(),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    from_json(&read_file(path)?, &path.display().to_string())
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_round_trip_and_faces() {
        let text = br#"{"n":2,"origin":[0.0,-1.5],"spacing":0.25,"shape":[4,4],"cells":[[0,0],[1,0]],"vertices":[[4,4]],"edges":[[3,3,0]]}"#;
        let doc: DomainDoc = from_json(text, "domain").unwrap();
        let once = to_json(&doc);
        let twice = to_json(&from_json::<DomainDoc>(&once, "domain").unwrap());
        assert_eq!(once, twice);
        let d = doc.to_domain().unwrap();
        assert_eq!(d.cells().len(), 2);
        assert_eq!(d.lower_faces().len(), 2);
        assert!(from_json::<DomainDoc>(
            br#"{"n":2,"origin":[0,0],"spacing":1,"shape":[1,1],"bogus":1}"#,
            "d"
        )
        .is_err());
        let bad = DomainDoc {
            edges: vec![vec![0, 0, 2]],
            ..doc
        };
        assert!(bad.to_domain().is_err());
    }

    #[test]
    fn field_docs() {
        let f: FieldDoc = from_json(br#"{"exprs":["x1 - 1","x2"]}"#, "field").unwrap();
        assert_eq!(f.to_field().unwrap().n(), 2);
        assert_eq!(to_json(&f), br#"{"exprs":["x1 - 1","x2"]}"#.to_vec());
        let s: FieldDoc = from_json(
            br#"{"samples":{"grid":{"n":2,"origin":[0.0,0.0],"spacing":1.0,"shape":[1,1]},"values":[0,0,1,0,0,1,1,1]}}"#,
            "field",
        )
        .unwrap();
        assert!(s.to_field().unwrap().samples().is_some());
        let once = to_json(&s);
        assert_eq!(once, to_json(&from_json::<FieldDoc>(&once, "f").unwrap()));
        assert!(from_json::<FieldDoc>(b"{}", "f")
            .unwrap()
            .to_field()
            .is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
