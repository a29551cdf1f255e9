//! On-disk formats. Every document carries an explicit `schema_version`.
//!
//! * Corpus: JSON Lines. Line 1 is a [`CorpusHeader`]; each following
//!   non-blank line is one [`Scene`](crate::Scene).
//! * Bundle, catalog, configs: single JSON documents wrapped in
//!   [`Document`].
//! * Raster dumps: binary PGM (P5), one file per channel.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::FloorPlanImage;
use crate::scene::CategoryVocabulary;

pub const SCHEMA_VERSION: u32 = 1;

/// A versioned JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema_version: u32,
    pub kind: String,
    pub body: T,
}

/// First line of a corpus file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub schema_version: u32,
    pub kind: String,
    pub vocabulary: CategoryVocabulary,
}

/// Deserializes `text`, reporting the failing field path on error.
pub fn parse_json<T: DeserializeOwned>(text: &str, line: usize) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        line,
        message: format!("at `{}`: {}", e.path(), e.inner()),
    })
}

/// Same as [`parse_json`] for an already-parsed value.
pub fn from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Schema {
        line: 0,
        message: format!("at `{}`: {}", e.path(), e.inner()),
    })
}

pub fn to_document_string<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_string(),
        body,
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn from_document_str<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T> {
    let raw: serde_json::Value = parse_json(text, 1)?;
    let version = raw.get("schema_version").and_then(|v| v.as_u64());
    match version {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::SchemaVersion {
                found: v as u32,
                expected: SCHEMA_VERSION,
            })
        }
        None => {
            return Err(Error::Schema {
                line: 1,
                message: "missing `schema_version`".into(),
            })
        }
    }
    let found = raw.get("kind").and_then(|k| k.as_str()).unwrap_or("");
    if found != kind {
        return Err(Error::Schema {
            line: 1,
            message: format!("expected a `{kind}` document, found `{found}`"),
        });
    }
    let doc: Document<T> = from_value(raw)?;
    Ok(doc.body)
}

pub fn write_document<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<()> {
    let text = to_document_string(kind, body)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_document<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    from_document_str(kind, &std::fs::read_to_string(path)?)
}

/// Encodes one channel as a binary PGM; values are scaled from
/// `[lo, hi]` to `[0, 255]`.
pub fn channel_to_pgm(img: &FloorPlanImage, channel: usize, lo: f32, hi: f32) -> Vec<u8> {
    let r = img.resolution();
    let mut out = Vec::with_capacity(r * r + 20);
    write!(out, "P5\n{r} {r}\n255\n").expect("writing to a Vec cannot fail");
    let span = if hi > lo { hi - lo } else { 1.0 };
    out.extend(
        img.channel(channel)
            .iter()
            .map(|&v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Body {
        x: u32,
        name: String,
    }

    #[test]
    fn document_round_trip_and_version_check() {
        let b = Body { x: 3, name: "a".into() };
        let s = to_document_string("test", &b).unwrap();
        assert_eq!(from_document_str::<Body>("test", &s).unwrap(), b);
        let bumped = s.replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(matches!(
            from_document_str::<Body>("test", &bumped),
            Err(Error::SchemaVersion { found: 9, .. })
        ));
        assert!(from_document_str::<Body>("other", &s).is_err());
    }

    #[test]
    fn field_path_in_errors() {
        let err = parse_json::<Body>(r#"{"x": "no", "name": "a"}"#, 7).unwrap_err();
        match err {
            Error::Schema { line, message } => {
                assert_eq!(line, 7);
                assert!(message.contains("`x`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
