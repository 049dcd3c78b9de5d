//! Artifact formats and atomic writes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents: contents.into_bytes(),
        }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serializable value");
        text.push('\n');
        Self::text(name, text)
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(dir: &Path, artifact: &Artifact) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{}.tmp-{}", artifact.name, std::process::id()));
    let result = (|| {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(&artifact.contents)?;
        file.sync_all()?;
        std::fs::rename(&tmp, dir.join(&artifact.name))
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// Fixed-key run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub task: String,
    pub conventions_version: String,
    pub epsilon: Option<f64>,
    pub nmax: usize,
    pub grid_size: usize,
    pub c0_fitted: Option<[f64; 2]>,
    pub c0_integral: Option<[f64; 2]>,
    pub willmore_direct: Option<f64>,
    pub willmore_geometric: Option<f64>,
    pub periods: Option<[[f64; 3]; 2]>,
    pub tolerances: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn new(task: &str, nmax: usize, grid_size: usize) -> Self {
        Self {
            task: task.to_string(),
            conventions_version: bloch_core::CONVENTIONS_VERSION.to_string(),
            epsilon: None,
            nmax,
            grid_size,
            c0_fitted: None,
            c0_integral: None,
            willmore_direct: None,
            willmore_geometric: None,
            periods: None,
            tolerances: BTreeMap::new(),
            failures: Vec::new(),
        }
    }
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Comma-separated rows under a fixed header. Floats use the shortest
/// representation that round-trips.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    F(f64),
    I(i64),
    U(usize),
    S(&'a str),
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self {
            text: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = match cell {
                Cell::F(x) => write!(self.text, "{x:?}"),
                Cell::I(x) => write!(self.text, "{x}"),
                Cell::U(x) => write!(self.text, "{x}"),
                Cell::S(x) => write!(self.text, "{x}"),
            };
        }
        self.text.push('\n');
    }

    pub fn finish(self, name: &str) -> Artifact {
        Artifact::text(name, self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats() {
        let mut csv = Csv::new("a,b,c");
        csv.row(&[Cell::F(0.1 + 0.2), Cell::U(3), Cell::S("+")]);
        let text = String::from_utf8(csv.finish("t.csv").contents).unwrap();
        let row = text.lines().nth(1).unwrap();
        let x: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(x, 0.1 + 0.2);
        assert!(row.ends_with(",3,+"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), &Artifact::text("x.txt", "one".into())).unwrap();
        write_atomic(dir.path(), &Artifact::text("x.txt", "two".into())).unwrap();
        assert_eq!(
            std::fs::read_to_string(dir.path().join("x.txt")).unwrap(),
            "two"
        );
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }
}
