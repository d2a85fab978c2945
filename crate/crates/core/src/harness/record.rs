use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Everything logged for one slot of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub seed: u64,
    pub slot: usize,
    /// Seed of the channel realization in force during this slot.
    pub channel_seed: u64,
    pub action_bs1: usize,
    pub action_bs2: usize,
    pub p: [f64; 4],
    pub p_j: f64,
    pub rate: [f64; 4],
    pub objective: f64,
    pub u_bs: f64,
    /// Reward actually delivered to each BS agent.
    pub reward: [f64; 2],
    /// Single-cell rewards, logged for every scheme.
    pub selfish: [f64; 2],
    pub sum_rate: f64,
    pub qos: [bool; 4],
}

/// CSV column order.
pub const CSV_HEADER: [&str; 25] = [
    "seed",
    "slot",
    "channel_seed",
    "action_bs1",
    "action_bs2",
    "p1",
    "p2",
    "p3",
    "p4",
    "p_j",
    "rate1",
    "rate2",
    "rate3",
    "rate4",
    "objective",
    "u_bs",
    "reward_bs1",
    "reward_bs2",
    "selfish_bs1",
    "selfish_bs2",
    "sum_rate",
    "qos1",
    "qos2",
    "qos3",
    "qos4",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SlotRecord {
    fn to_row(&self) -> Vec<String> {
        let mut row = vec![
            self.seed.to_string(),
            self.slot.to_string(),
            self.channel_seed.to_string(),
            self.action_bs1.to_string(),
            self.action_bs2.to_string(),
        ];
        row.extend(self.p.iter().map(|&x| float(x)));
        row.push(float(self.p_j));
        row.extend(self.rate.iter().map(|&x| float(x)));
        row.push(float(self.objective));
        row.push(float(self.u_bs));
        row.extend(self.reward.iter().map(|&x| float(x)));
        row.extend(self.selfish.iter().map(|&x| float(x)));
        row.push(float(self.sum_rate));
        row.extend(self.qos.iter().map(|&q| u8::from(q).to_string()));
        row
    }

    fn from_row(row: &csv::StringRecord, line: usize, path: &Path) -> Result<Self> {
        let bad = |col: &str| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {line}: bad value in column '{col}'"),
        };
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {line}: expected {} columns, found {}", CSV_HEADER.len(), row.len()),
            });
        }
        let f = |k: usize| -> Result<f64> { row[k].parse().map_err(|_| bad(CSV_HEADER[k])) };
        let u = |k: usize| -> Result<u64> { row[k].parse().map_err(|_| bad(CSV_HEADER[k])) };
        let b = |k: usize| -> Result<bool> {
            match &row[k] {
                "1" => Ok(true),
                "0" => Ok(false),
                _ => Err(bad(CSV_HEADER[k])),
            }
        };
        Ok(SlotRecord {
            seed: u(0)?,
            slot: u(1)? as usize,
            channel_seed: u(2)?,
            action_bs1: u(3)? as usize,
            action_bs2: u(4)? as usize,
            p: [f(5)?, f(6)?, f(7)?, f(8)?],
            p_j: f(9)?,
            rate: [f(10)?, f(11)?, f(12)?, f(13)?],
            objective: f(14)?,
            u_bs: f(15)?,
            reward: [f(16)?, f(17)?],
            selfish: [f(18)?, f(19)?],
            sum_rate: f(20)?,
            qos: [b(21)?, b(22)?, b(23)?, b(24)?],
        })
    }
}

pub fn write_csv<W: Write>(records: &[SlotRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Writes one row per record; floats carry 17 significant digits.
pub fn export_csv(records: &[SlotRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(records, &mut buf).map_err(|e| match e {
        Error::Csv(c) => Error::Parse {
            path: path.to_path_buf(),
            message: c.to_string(),
        },
        other => other,
    })?;
    buf.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<R: Read>(input: R, path: &Path) -> Result<Vec<SlotRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for (k, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        out.push(SlotRecord::from_row(&row, k + 2, path)?);
    }
    Ok(out)
}

pub fn import_csv(path: &Path) -> Result<Vec<SlotRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(seed: u64, slot: usize, x: f64) -> SlotRecord {
        SlotRecord {
            seed,
            slot,
            channel_seed: seed * 7,
            action_bs1: 3,
            action_bs2: 0,
            p: [x, 1.0 / 3.0, 0.1, 39.9],
            p_j: x.sqrt(),
            rate: [1.0, x.ln_1p(), 1e-300, 12.5],
            objective: 0.0,
            u_bs: x * 1e7,
            reward: [x, -x],
            selfish: [0.01 * x, x / 7.0],
            sum_rate: 17.0 + x,
            qos: [true, false, true, true],
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(xs in proptest::collection::vec(0.0..1e6f64, 1..20)) {
            let recs: Vec<_> = xs.iter().enumerate().map(|(k, &x)| record(k as u64, k, x)).collect();
            let mut buf = Vec::new();
            write_csv(&recs, &mut buf).unwrap();
            let back = read_csv(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, recs);
        }
    }

    #[test]
    fn header_and_row_count() {
        let recs: Vec<_> = (0..5).map(|k| record(1, k, k as f64)).collect();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn malformed_rows_rejected_with_path() {
        let text = format!("{}\n1,2,3\n", CSV_HEADER.join(","));
        let e = read_csv(text.as_bytes(), Path::new("runs/x.csv")).unwrap_err();
        assert!(e.to_string().contains("runs/x.csv"));
        assert!(read_csv("a,b\n".as_bytes(), Path::new("y")).is_err());
    }
}
