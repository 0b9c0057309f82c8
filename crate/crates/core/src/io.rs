//! JSON channel files.
//!
//! ```json
//! { "name": "identity", "d_in": 2, "d_out": 2,
//!   "kraus": [ [ [[1,0],[0,0]], [[0,0],[1,0]] ] ] }
//! ```
//!
//! Each Kraus operator is a list of rows; each entry is `[re, im]`.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub name: String,
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelFile {
    pub fn from_channel(name: impl Into<String>, ch: &Channel) -> Self {
        let kraus = ch
            .kraus()
            .iter()
            .map(|k| {
                (0..k.nrows())
                    .map(|i| (0..k.ncols()).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        Self {
            name: name.into(),
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus,
        }
    }

    /// Parses with per-entry diagnostics such as `kraus[0][1][0]`.
    pub fn parse(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::Parse("top level must be an object".into()))?;
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        let dim = |key: &str| -> Result<usize> {
            obj.get(key)
                .and_then(Value::as_u64)
                .filter(|&d| d > 0)
                .map(|d| d as usize)
                .ok_or_else(|| Error::Parse(format!("`{key}` must be a positive integer")))
        };
        let d_in = dim("d_in")?;
        let d_out = dim("d_out")?;
        let list = obj
            .get("kraus")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("`kraus` must be an array of matrices".into()))?;
        let mut kraus = Vec::with_capacity(list.len());
        for (k, mat) in list.iter().enumerate() {
            let rows = mat
                .as_array()
                .ok_or_else(|| Error::Parse(format!("kraus[{k}] must be an array of rows")))?;
            if rows.len() != d_out {
                return Err(Error::Parse(format!(
                    "kraus[{k}] has {} rows, expected d_out = {d_out}",
                    rows.len()
                )));
            }
            let mut parsed_rows = Vec::with_capacity(d_out);
            for (i, row) in rows.iter().enumerate() {
                let entries = row
                    .as_array()
                    .ok_or_else(|| Error::Parse(format!("kraus[{k}][{i}] must be an array")))?;
                if entries.len() != d_in {
                    return Err(Error::Parse(format!(
                        "kraus[{k}][{i}] has {} entries, expected d_in = {d_in}",
                        entries.len()
                    )));
                }
                let mut parsed = Vec::with_capacity(d_in);
                for (j, z) in entries.iter().enumerate() {
                    parsed.push(parse_complex(z).ok_or_else(|| {
                        Error::Parse(format!("kraus[{k}][{i}][{j}]: expected [re, im], got {z}"))
                    })?);
                }
                parsed_rows.push(parsed);
            }
            kraus.push(parsed_rows);
        }
        Ok(Self {
            name,
            d_in,
            d_out,
            kraus,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Shape check plus [`Channel::new`]; non-trace-preserving maps are accepted.
    pub fn to_channel(&self) -> Result<Channel> {
        let mats = self
            .kraus
            .iter()
            .map(|rows| {
                let r = rows.len();
                let cols = rows.first().map_or(0, Vec::len);
                CMat::from_fn(r, cols, |i, j| {
                    let [re, im] = rows[i][j];
                    c(re, im)
                })
            })
            .collect();
        let ch = Channel::new(mats)?;
        if ch.d_in() != self.d_in || ch.d_out() != self.d_out {
            return Err(Error::Parse(format!(
                "declared dims {}→{} disagree with Kraus shape {}→{}",
                self.d_in,
                self.d_out,
                ch.d_in(),
                ch.d_out()
            )));
        }
        Ok(ch)
    }
}

fn parse_complex(z: &Value) -> Option<[f64; 2]> {
    match z.as_array()?.as_slice() {
        [re, im] => Some([re.as_f64()?, im.as_f64()?]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_file_parses() {
        let text = r#"{"name":"id","d_in":2,"d_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let f = ChannelFile::parse(text).unwrap();
        assert_eq!(f.to_channel().unwrap(), Channel::identity(2));
    }

    #[test]
    fn malformed_entry_names_index() {
        let text = r#"{"name":"bad","d_in":2,"d_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1]]]]}"#;
        match ChannelFile::parse(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("kraus[0][1][1]"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        let text = r#"{"name":"x","d_in":2,"d_out":2,"kraus":[[[[1,0],[0,0]]]]}"#;
        assert!(matches!(ChannelFile::parse(text), Err(Error::Parse(_))));
        let text = r#"{"name":"x","d_in":2,"d_out":2,"kraus":[]}"#;
        assert_eq!(ChannelFile::parse(text).unwrap().to_channel(), Err(Error::EmptyKrausList));
    }

    #[test]
    fn channel_round_trip_is_exact() {
        let ch = Channel::random(3, 2, 11).unwrap();
        let f = ChannelFile::from_channel("r", &ch);
        let text = serde_json::to_string(&f).unwrap();
        let back = ChannelFile::parse(&text).unwrap().to_channel().unwrap();
        assert_eq!(back, ch);
    }
}
