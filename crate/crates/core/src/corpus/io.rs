use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::formats::{parse_json, CorpusHeader, SCHEMA_VERSION};
use crate::scene::{validate_scene, CategoryVocabulary, Scene};

const KIND: &str = "corpus";

/// Scenes plus the vocabulary their category ids refer to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub vocabulary: CategoryVocabulary,
    pub scenes: Vec<Scene>,
}

pub fn write_corpus<W: Write>(corpus: &Corpus, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let header = CorpusHeader {
        schema_version: SCHEMA_VERSION,
        kind: KIND.into(),
        vocabulary: corpus.vocabulary.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for scene in &corpus.scenes {
        serde_json::to_writer(&mut w, scene)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    write_corpus(corpus, std::fs::File::create(path)?)
}

/// Parses a corpus, validating every scene. An empty input yields an empty
/// corpus.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Ok(Corpus::default()),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break parse_json::<CorpusHeader>(&line, 1)?;
                }
            }
        }
    };
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: header.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    if header.kind != KIND {
        return Err(Error::Schema {
            line: 1,
            message: format!("expected a `{KIND}` header, found `{}`", header.kind),
        });
    }
    header.vocabulary.check()?;
    let mut scenes = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let scene: Scene = parse_json(&line, i + 1)?;
        let violations = validate_scene(&scene, &header.vocabulary);
        if let Some(v) = violations.first() {
            return Err(Error::Schema {
                line: i + 1,
                message: format!("invalid scene: {v}"),
            });
        }
        scenes.push(scene);
    }
    Ok(Corpus {
        vocabulary: header.vocabulary,
        scenes,
    })
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    read_corpus(BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generator::{generate_synthetic_corpus, GeneratorParams};

    #[test]
    fn empty_input() {
        assert_eq!(read_corpus(&b""[..]).unwrap(), Corpus::default());
    }

    #[test]
    fn round_trip() {
        let corpus = generate_synthetic_corpus(&GeneratorParams::default(), 5, 9);
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        assert_eq!(read_corpus(&buf[..]).unwrap(), corpus);
    }

    #[test]
    fn malformed_object_names_field_and_line() {
        let corpus = generate_synthetic_corpus(&GeneratorParams::default(), 2, 9);
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[2] = lines[2].replacen("\"theta\":", "\"theta\":\"north\",\"x\":", 1);
        let err = read_corpus(lines.join("\n").as_bytes()).unwrap_err();
        match err {
            Error::Schema { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("theta"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
