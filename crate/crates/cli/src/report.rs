//! Report artifacts and their serialization.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Which artifact kinds a run emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Formats {
    pub const BOTH: Formats = Formats {
        json: true,
        csv: true,
    };
    pub const JSON: Formats = Formats {
        json: true,
        csv: false,
    };
    pub const CSV: Formats = Formats {
        json: false,
        csv: true,
    };

    /// Neither flag means both kinds.
    pub fn from_flags(json: bool, csv: bool) -> Self {
        if json == csv {
            Self::BOTH
        } else {
            Self { json, csv }
        }
    }
}

/// One named report file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(file_name: impl Into<String>, contents: impl Into<String>) -> Self {
        Self {
            file_name: file_name.into(),
            contents: contents.into(),
        }
    }
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    text
}

pub fn csv_text<T: Serialize>(rows: &[T]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("report rows serialize to CSV");
    }
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("CSV output is UTF-8")
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.file_name), &a.contents)?;
    }
    Ok(())
}

/// Without an output directory, artifacts go to `out`, each under a
/// `# file: NAME` header.
pub fn print_artifacts(out: &mut impl Write, artifacts: &[Artifact]) -> std::io::Result<()> {
    for a in artifacts {
        writeln!(out, "# file: {}", a.file_name)?;
        out.write_all(a.contents.as_bytes())?;
        if !a.contents.ends_with('\n') {
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        m: usize,
        note: Option<u32>,
        pass: bool,
    }

    #[test]
    fn csv_has_header_and_blank_options() {
        let text = csv_text(&[
            Row {
                m: 0,
                note: None,
                pass: true,
            },
            Row {
                m: 1,
                note: Some(3),
                pass: false,
            },
        ]);
        assert_eq!(text, "m,note,pass\n0,,true\n1,3,false\n");
    }

    #[test]
    fn format_flags() {
        assert_eq!(Formats::from_flags(false, false), Formats::BOTH);
        assert_eq!(Formats::from_flags(true, true), Formats::BOTH);
        assert_eq!(Formats::from_flags(true, false), Formats::JSON);
        assert_eq!(Formats::from_flags(false, true), Formats::CSV);
    }
}
