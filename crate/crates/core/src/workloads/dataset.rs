use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::bfv::{keygen_from, HeParams, PublicKey, SecretKey};
use crate::rng::SeedStream;
use crate::{Error, Result};

/// Plaintext integers, one row per user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    rows: Vec<Vec<u64>>,
}

impl Dataset {
    /// Rows must be non-empty and of equal length.
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Dataset("dataset has no users".into()));
        };
        let cols = first.len();
        if cols == 0 {
            return Err(Error::Dataset("dataset has no columns".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Dataset(format!(
                "user {i} has {} values, expected {cols}",
                rows[i].len()
            )));
        }
        Ok(Self { rows })
    }

    /// One column per user.
    pub fn from_values(values: &[u64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    /// `users × cols` values drawn uniformly from `0..=max_value`.
    pub fn synthetic(users: usize, cols: usize, max_value: u64, seed: u64) -> Result<Self> {
        let mut rng = SeedStream::new(seed).child("dataset").rng();
        Self::new(
            (0..users)
                .map(|_| (0..cols).map(|_| rng.gen_range(0..=max_value)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn users(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn max_value(&self) -> u64 {
        self.rows.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Reads comma-separated unsigned integers. Lines starting with `#` are
    /// skipped, as is a first row that does not parse (a header).
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Dataset(e.to_string()))?;
            let parsed: std::result::Result<Vec<u64>, _> =
                record.iter().map(str::parse::<u64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if line == 0 => continue,
                Err(e) => {
                    return Err(Error::Dataset(format!("record {}: {e}", line + 1)));
                }
            }
        }
        Self::new(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
        Self::read_csv(file)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.write_record(row.iter().map(u64::to_string))
                .map_err(|e| Error::Dataset(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Dataset(e.to_string()))
    }
}

/// A parameter set with one key pair.
#[derive(Clone, Debug)]
pub struct KeyBundle {
    pub params: HeParams,
    pub sk: SecretKey,
    pub pk: PublicKey,
}

impl KeyBundle {
    pub fn generate(params: HeParams, seed: u64) -> Result<Self> {
        let (sk, pk) = keygen_from(&params, &SeedStream::new(seed).child("keygen"))?;
        Ok(Self { params, sk, pk })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_header_and_comments() {
        let text = "# exported\na,b,c\n1, 2,3\n4,5,6\n";
        let d = Dataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(d.rows(), &[vec![1, 2, 3], vec![4, 5, 6]]);
        let mut out = Vec::new();
        d.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "1,2,3\n4,5,6\n");
        assert_eq!(Dataset::read_csv(&out[..]).unwrap(), d);
    }

    #[test]
    fn rejects_ragged_and_bad_input() {
        assert!(Dataset::new(vec![]).is_err());
        assert!(Dataset::new(vec![vec![1], vec![1, 2]]).is_err());
        assert!(Dataset::read_csv("1,2\n3,x\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("1,2\n3\n".as_bytes()).is_err());
    }

    #[test]
    fn synthetic_is_seeded() {
        let a = Dataset::synthetic(10, 3, 4, 7).unwrap();
        assert_eq!(a, Dataset::synthetic(10, 3, 4, 7).unwrap());
        assert_ne!(a, Dataset::synthetic(10, 3, 4, 8).unwrap());
        assert!(a.max_value() <= 4);
        assert_eq!((a.users(), a.cols()), (10, 3));
    }
}
