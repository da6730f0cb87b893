//! Sampled trajectories of named real channels.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

pub fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidGrid("time grid is empty".into()));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite time {t}")));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "times must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    channels: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        validate_grid(&times)?;
        Ok(Self {
            times,
            channels: Vec::new(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push_channel(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::InvalidGrid(format!(
                "channel {name} has {} samples, expected {}",
                values.len(),
                self.times.len()
            )));
        }
        if name.is_empty() || name == "t" || name.contains([',', '"', '\n']) {
            return Err(Error::InvalidGrid(format!("invalid channel name {name:?}")));
        }
        if self.channel(&name).is_some() {
            return Err(Error::InvalidGrid(format!("duplicate channel {name}")));
        }
        self.channels.push((name, values));
        Ok(())
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn channels(&self) -> &[(String, Vec<f64>)] {
        &self.channels
    }

    /// Appends every channel of `other`, which must share this time grid.
    pub fn merge(&mut self, other: &TimeSeries) -> Result<()> {
        if other.times != self.times {
            return Err(Error::InvalidGrid("time grids differ".into()));
        }
        for (name, values) in &other.channels {
            self.push_channel(name.clone(), values.clone())?;
        }
        Ok(())
    }

    /// Header `t,<channels...>`, one row per sample, 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidGrid(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t"];
        header.extend(self.channel_names());
        w.write_record(&header).map_err(io)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format_f64(*t)];
            row.extend(self.channels.iter().map(|(_, v)| format_f64(v[k])));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidGrid(format!("csv write failed: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let err = |e: csv::Error| Error::InvalidGrid(format!("csv read failed: {e}"));
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers().map_err(err)?.iter().map(str::to_owned).collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(Error::InvalidGrid("first column must be t".into()));
        }
        let mut columns = vec![Vec::new(); header.len()];
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(err)?;
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::InvalidGrid(format!("row {}: cannot parse {field:?}", line + 2))
                })?;
                columns[col].push(v);
            }
        }
        let mut columns = columns.into_iter();
        let mut series = Self::new(columns.next().unwrap_or_default())?;
        for (name, values) in header.into_iter().skip(1).zip(columns) {
            series.push_channel(name, values)?;
        }
        Ok(series)
    }
}
