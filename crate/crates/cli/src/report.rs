//! Merge certificates from run directories into one table.

use std::path::{Path, PathBuf};

use shiftlab::recurrence::certificate::ARTIFACT_VERSION;
use shiftlab::recurrence::{Certificate, Verdict};
use shiftlab::{Error, Result};

#[derive(Clone, Debug)]
pub struct Row {
    pub space: String,
    pub p: Option<u32>,
    pub hypothesis: String,
    pub verdict: Verdict,
    pub margin: Option<String>,
    pub threshold_n0: Option<u64>,
    pub file: PathBuf,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            collect(&path, out)?;
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(".cert.json"))
        {
            out.push(path);
        }
    }
    Ok(())
}

impl Report {
    /// Load every `*.cert.json` below the given paths. Certificates written by
    /// another artifact version are refused.
    pub fn load(paths: &[PathBuf]) -> Result<Report> {
        let mut files = Vec::new();
        for p in paths {
            if p.is_dir() {
                collect(p, &mut files)?;
            } else {
                files.push(p.clone());
            }
        }
        let mut rows = Vec::with_capacity(files.len());
        for f in files {
            let text = std::fs::read_to_string(&f)?;
            let c: Certificate = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: not a certificate: {e}", f.display())))?;
            if c.artifact_version != ARTIFACT_VERSION {
                return Err(Error::Config(format!(
                    "{}: artifact version {} does not match {ARTIFACT_VERSION}; refusing to merge",
                    f.display(),
                    c.artifact_version
                )));
            }
            let lambda = c
                .details
                .get("lambda_abs")
                .and_then(|v| v.as_str())
                .map(|l| format!(" |l|={l}"));
            rows.push(Row {
                space: c
                    .spec
                    .as_ref()
                    .map(|s| s.kind_name().to_string())
                    .unwrap_or_else(|| c.weights.clone()),
                p: c.spec.as_ref().map(|s| s.p),
                hypothesis: format!("{:?}{}", c.hypothesis, lambda.unwrap_or_default()),
                verdict: c.verdict,
                margin: c.margin,
                threshold_n0: c.threshold_n0,
                file: f,
            });
        }
        rows.sort_by(|a, b| {
            (&a.space, a.p, &a.hypothesis, &a.file).cmp(&(&b.space, b.p, &b.hypothesis, &b.file))
        });
        Ok(Report { rows })
    }

    /// Worst verdict, `Pass` when empty.
    pub fn verdict(&self) -> Verdict {
        Verdict::worst(self.rows.iter().map(|r| r.verdict)).unwrap_or(Verdict::Pass)
    }

    fn cells(r: &Row) -> [String; 6] {
        [
            r.space.clone(),
            r.p.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            r.hypothesis.clone(),
            r.verdict.as_str().to_string(),
            r.margin.clone().unwrap_or_else(|| "-".into()),
            r.threshold_n0
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into()),
        ]
    }

    const HEADER: [&'static str; 6] = [
        "space",
        "p",
        "hypothesis",
        "verdict",
        "margin",
        "threshold_n0",
    ];

    pub fn table(&self) -> String {
        let rows: Vec<[String; 6]> = self.rows.iter().map(Self::cells).collect();
        let mut width = Self::HEADER.map(str::len);
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(width)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut s = line(&Self::HEADER.map(String::from));
        for r in &rows {
            s += &line(r);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(Self::HEADER.iter().copied().chain(["file"]))?;
        for r in &self.rows {
            let c = Self::cells(r);
            w.write_record(
                c.iter()
                    .map(String::as_str)
                    .chain([r.file.display().to_string().as_str()]),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}
