//! Fixed-format CSV output: scientific notation with 9 significant digits,
//! `nan` for masked or undefined cells.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// One CSV cell.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        "nan".to_string()
    }
}

pub struct CsvFile {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl CsvFile {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let inner = csv::Writer::from_path(path).map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let mut out = Self {
            path: path.to_path_buf(),
            inner,
        };
        out.row(header.iter().copied())?;
        Ok(out)
    }

    pub fn row<I, S>(&mut self, cells: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner
            .write_record(cells)
            .map_err(|source| CliError::Csv {
                path: self.path.clone(),
                source,
            })
    }

    pub fn reals(&mut self, cells: &[f64]) -> Result<(), CliError> {
        self.row(cells.iter().map(|&x| real(x)))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.inner.flush().map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(real(1.0), "1.00000000e0");
        assert_eq!(real(-1.234567891e-5), "-1.23456789e-5");
        assert_eq!(real(f64::NAN), "nan");
        assert_eq!(real(f64::INFINITY), "nan");
    }

    #[test]
    fn header_then_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut f = CsvFile::create(&path, &["a_m", "n"]).unwrap();
        f.row([real(2.5), "3".to_string()]).unwrap();
        f.finish().unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "a_m,n\n2.50000000e0,3\n"
        );
    }
}
