//! Evaluation reports: per-case rows and a plain-text table with a
//! mean ± standard deviation footer.

use serde::{Deserialize, Serialize};
use shapefit_core::EvaluationReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub surface: String,
    pub reference: String,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single case.
    pub std: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub cases: Vec<CaseReport>,
    pub dsc: Option<Summary>,
    pub hd: Option<Summary>,
    pub gl: Option<Summary>,
}

impl BatchReport {
    pub fn new(cases: Vec<CaseReport>) -> Self {
        Self {
            dsc: Summary::of(cases.iter().map(|c| c.report.dsc)),
            hd: Summary::of(cases.iter().map(|c| c.report.hd)),
            gl: Summary::of(cases.iter().map(|c| c.report.gl)),
            cases,
        }
    }

    /// Aligned UTF-8 table: one row per case, then `mean ± std` when there
    /// is more than one case.
    pub fn table(&self) -> String {
        let mut rows: Vec<[String; 4]> = vec![["case".into(), "DSC".into(), "HD (mm)".into(), "GL".into()]];
        for c in &self.cases {
            rows.push([
                c.case.clone(),
                format!("{:.4}", c.report.dsc),
                format!("{:.3}", c.report.hd),
                format!("{:.2}", c.report.gl),
            ]);
        }
        let footer = match (self.dsc, self.hd, self.gl) {
            (Some(d), Some(h), Some(g)) if self.cases.len() > 1 => Some([
                "mean ± std".to_string(),
                format!("{:.4} ± {:.4}", d.mean, d.std),
                format!("{:.3} ± {:.3}", h.mean, h.std),
                format!("{:.2} ± {:.2}", g.mean, g.std),
            ]),
            _ => None,
        };
        let all: Vec<&[String; 4]> = rows.iter().chain(footer.iter()).collect();
        let width = |col: usize| all.iter().map(|r| r[col].chars().count()).max().unwrap_or(0);
        let widths = [width(0), width(1), width(2), width(3)];
        let render = |r: &[String; 4]| {
            let mut line = format!("{:<w$}", r[0], w = widths[0]);
            for col in 1..4 {
                let pad = widths[col] - r[col].chars().count();
                line.push_str("  ");
                line.push_str(&" ".repeat(pad));
                line.push_str(&r[col]);
            }
            line.trim_end().to_string()
        };
        let rule = "-".repeat(widths.iter().sum::<usize>() + 6);
        let mut out = String::new();
        out.push_str(&render(&rows[0]));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for r in &rows[1..] {
            out.push_str(&render(r));
            out.push('\n');
        }
        if let Some(f) = &footer {
            out.push_str(&rule);
            out.push('\n');
            out.push_str(&render(f));
            out.push('\n');
        }
        out
    }
}
