use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::BenchError;

/// One reported quantity.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Mean and population standard deviation over `n` trials.
    Summary {
        mean: f64,
        std: f64,
        n: usize,
    },
    Count(usize),
    /// A run that produced no number (overflow, solver failure, ...).
    Failure(String),
}

impl Value {
    pub fn summarize(samples: &[f64]) -> Value {
        let (mean, std) = mean_std(samples);
        Value::Summary {
            mean,
            std,
            n: samples.len(),
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            Value::Summary { mean, .. } => Some(*mean),
            Value::Count(c) => Some(*c as f64),
            Value::Failure(_) => None,
        }
    }
}

/// Mean and population standard deviation; `(NaN, NaN)` for no samples.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: String,
    pub cell: String,
    pub statistic: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub experiment: String,
    pub seed: u64,
    /// Every parameter needed to rerun the experiment, in a fixed order.
    pub config: Vec<(String, String)>,
    pub wall_time_secs: f64,
}

impl Metadata {
    pub fn new(experiment: &str, seed: u64, config: Vec<(String, String)>) -> Self {
        Self {
            experiment: experiment.to_owned(),
            seed,
            config,
            wall_time_secs: 0.0,
        }
    }

    /// SHA-256 of the experiment name, seed and config, hex encoded.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("experiment={}\nseed={}\n", self.experiment, self.seed));
        for (k, v) in &self.config {
            hasher.update(format!("{k}={v}\n"));
        }
        hasher.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn new(metadata: Metadata) -> Self {
        Self {
            metadata,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, method: impl Into<String>, cell: impl Into<String>, statistic: &str, value: Value) {
        self.rows.push(Row {
            method: method.into(),
            cell: cell.into(),
            statistic: statistic.to_owned(),
            value,
        });
    }

    pub fn get(&self, method: &str, cell: &str, statistic: &str) -> Option<&Value> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.cell == cell && r.statistic == statistic)
            .map(|r| &r.value)
    }

    fn header_lines(&self) -> Vec<String> {
        let m = &self.metadata;
        let mut lines = vec![format!("experiment={}", m.experiment), format!("seed={}", m.seed)];
        lines.extend(m.config.iter().map(|(k, v)| format!("{k}={v}")));
        lines.push(format!("config_hash={}", m.config_hash()));
        lines.push(format!("wall_time_s={:.3}", m.wall_time_secs));
        lines
    }

    /// Metadata as `# key=value` lines, then the rows at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), BenchError> {
        for line in self.header_lines() {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "cell", "statistic", "mean", "std", "n", "note"])?;
        for r in &self.rows {
            let (mean, std, n, note) = match &r.value {
                Value::Summary { mean, std, n } => (mean.to_string(), std.to_string(), n.to_string(), String::new()),
                Value::Count(c) => (c.to_string(), "0".to_owned(), "1".to_owned(), String::new()),
                Value::Failure(why) => (String::new(), String::new(), "0".to_owned(), why.clone()),
            };
            w.write_record([
                r.method.as_str(),
                r.cell.as_str(),
                r.statistic.as_str(),
                &mean,
                &std,
                &n,
                &note,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned markdown with values rounded to three decimals.
    pub fn write_markdown<W: Write>(&self, mut out: W) -> Result<(), BenchError> {
        for line in self.header_lines() {
            writeln!(out, "<!-- {line} -->")?;
        }
        let mut cells: Vec<[String; 4]> = vec![["Method".into(), "Cell".into(), "Statistic".into(), "Value".into()]];
        for r in &self.rows {
            let value = match &r.value {
                Value::Summary { mean, std, n } => format!("{mean:.3} ± {std:.3} (n={n})"),
                Value::Count(c) => c.to_string(),
                Value::Failure(why) => why.clone(),
            };
            cells.push([r.method.clone(), r.cell.clone(), r.statistic.clone(), value]);
        }
        let widths: Vec<usize> = (0..4)
            .map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let line = |row: &[String; 4]| {
            let padded: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            format!("| {} |", padded.join(" | "))
        };
        writeln!(out, "{}", line(&cells[0]))?;
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(out, "| {} |", rule.join(" | "))?;
        for row in &cells[1..] {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<(), BenchError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Markdown => self.write_markdown(out),
        }
    }

    /// The serialized table without the wall-time line, for reproducibility
    /// comparisons.
    pub fn payload(&self, format: Format) -> Result<String, BenchError> {
        let mut buf = Vec::new();
        self.write(&mut buf, format)?;
        let text = String::from_utf8(buf).expect("tables are written as UTF-8");
        Ok(text
            .lines()
            .filter(|l| !l.contains("wall_time_s="))
            .map(|l| format!("{l}\n"))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let mut t = ResultTable::new(Metadata::new("demo", 3, vec![("trials".into(), "2".into())]));
        t.push("mm", "lr=1", "iterations", Value::summarize(&[1.0, 3.0]));
        t.push("expgrad", "lr=1", "iterations", Value::Failure("overflow".into()));
        t.push("e-geodesic", "lr=1", "iterations", Value::Count(4));
        t
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
    }

    #[test]
    fn csv_layout() {
        let text = table().payload(Format::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# experiment=demo");
        assert!(lines.iter().any(|l| l.starts_with("# config_hash=")));
        assert!(text.contains("method,cell,statistic,mean,std,n,note\nmm,lr=1,iterations,2,1,2,\n"));
        assert!(text.contains("expgrad,lr=1,iterations,,,0,overflow\n"));
        assert!(text.contains("e-geodesic,lr=1,iterations,4,0,1,\n"));
    }

    #[test]
    fn markdown_is_aligned() {
        let text = table().payload(Format::Markdown).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| l.starts_with('|')).collect();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.chars().count() == rows[0].chars().count()));
        assert!(text.contains("2.000 ± 1.000 (n=2)"));
    }

    #[test]
    fn hash_tracks_config() {
        let a = table().metadata;
        let mut b = a.clone();
        b.wall_time_secs = 9.0;
        assert_eq!(a.config_hash(), b.config_hash());
        b.seed = 4;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
