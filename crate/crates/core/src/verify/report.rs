use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::assembly::PhysicalParams;
use crate::error::{Error, Result};
use crate::manufactured::CaseName;
use crate::solver::ElementPair;

use super::{observed_order, ErrorReport, Norm, NormSet};

/// Which discretization parameter is halved from row to row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// `h` halves, `τ` follows the tau rule.
    Space,
    /// `h` fixed, `τ` halves.
    Time,
}

impl FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "space" | "h" => Ok(SweepKind::Space),
            "time" | "tau" => Ok(SweepKind::Time),
            _ => Err(Error::Unknown { what: "sweep", name: s.to_string() }),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::Space => "space",
            SweepKind::Time => "time",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Cells per side; the reported mesh size is `1/n`.
    pub n: usize,
    pub tau: f64,
    pub steps: usize,
    pub errors: ErrorReport<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub case: CaseName,
    pub pair: ElementPair,
    pub sweep: SweepKind,
    /// Tau rule of a space sweep, or the fixed mesh of a time sweep.
    pub schedule: String,
    pub params: PhysicalParams<f64>,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn h(&self, row: usize) -> f64 {
        1.0 / self.rows[row].n as f64
    }

    /// Order between `row - 1` and `row` of the interpolant-based errors; `None` on
    /// the first row.
    pub fn order(&self, row: usize, norm: Norm) -> Option<Result<f64>> {
        self.order_of(row, norm, |e| e.interpolant)
    }

    pub fn exact_order(&self, row: usize, norm: Norm) -> Option<Result<f64>> {
        self.order_of(row, norm, |e| e.exact)
    }

    /// Order over the finest pair of rows.
    pub fn finest_order(&self, norm: Norm) -> Option<Result<f64>> {
        self.rows.len().checked_sub(1).and_then(|last| self.order(last, norm))
    }

    fn order_of(&self, row: usize, norm: Norm, pick: fn(&ErrorReport<f64>) -> NormSet<f64>) -> Option<Result<f64>> {
        if row == 0 || row >= self.rows.len() {
            return None;
        }
        let coarse = pick(&self.rows[row - 1].errors).get(norm);
        let fine = pick(&self.rows[row].errors).get(norm);
        Some(observed_order(coarse, fine))
    }

    /// CSV of the interpolant-based errors with schema
    /// `h,tau,energy_u,order,l2_u,order,l2_q,order,h1_p,order,l2_p,order`.
    pub fn to_csv(&self) -> String {
        self.csv(|e| e.interpolant)
    }

    /// Same schema, errors against the exact fields.
    pub fn to_csv_exact(&self) -> String {
        self.csv(|e| e.exact)
    }

    fn csv(&self, pick: fn(&ErrorReport<f64>) -> NormSet<f64>) -> String {
        let mut out = String::from("h,tau");
        for norm in Norm::ALL {
            let _ = write!(out, ",{norm},order");
        }
        out.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{},{}", format_sci(self.h(k)), format_sci(row.tau));
            for norm in Norm::ALL {
                let _ = write!(out, ",{},{}", format_sci(pick(&row.errors).get(norm)), order_cell(self.order_of(k, norm, pick)));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "## {} with {}, {} sweep ({})\n", self.case, self.pair, self.sweep, self.schedule);
        let p = &self.params;
        let _ = writeln!(out, "mu = {}, lambda = {}, kappa = {}\n", p.mu, p.lambda, p.kappa);
        for (title, pick) in [
            ("Errors against the interpolant of the exact solution", (|e| e.interpolant) as fn(&ErrorReport<f64>) -> NormSet<f64>),
            ("Errors against the exact solution", |e| e.exact),
        ] {
            let _ = writeln!(out, "### {title}\n");
            out.push_str("| h | tau |");
            for norm in Norm::ALL {
                let _ = write!(out, " {norm} | order |");
            }
            out.push_str("\n|---|---|");
            out.push_str(&"---:|---:|".repeat(Norm::ALL.len()));
            out.push('\n');
            for (k, row) in self.rows.iter().enumerate() {
                let _ = write!(out, "| 1/{} | {} |", row.n, fraction(row.tau));
                for norm in Norm::ALL {
                    let _ = write!(out, " {} | {} |", format_sci(pick(&row.errors).get(norm)), order_cell(self.order_of(k, norm, pick)));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

fn order_cell(order: Option<Result<f64>>) -> String {
    match order {
        None => String::new(),
        Some(Ok(v)) => format!("{v:.4}"),
        Some(Err(_)) => "undefined".to_string(),
    }
}

/// `1/k` when `v` is the reciprocal of an integer, scientific otherwise.
fn fraction(v: f64) -> String {
    if v == 1.0 {
        return "1".to_string();
    }
    let k = (1.0 / v).round();
    if k >= 2.0 && ((1.0 / v) - k).abs() < 1e-9 * k {
        format!("1/{k}")
    } else {
        format_sci(v)
    }
}

/// Five significant digits with a signed two-digit exponent, e.g. `1.2572e-02`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, e: f64) -> ReportRow {
        let set = NormSet::from_values([e, e / 2.0, e, e, e]);
        ReportRow { n, tau: 1.0 / (n * n) as f64, steps: n * n, errors: ErrorReport { t: 1.0, interpolant: set, exact: set } }
    }

    fn report(rows: Vec<ReportRow>) -> ConvergenceReport {
        ConvergenceReport {
            case: CaseName::Ex1,
            pair: ElementPair::P2P0P1,
            sweep: SweepKind::Space,
            schedule: "tau=h2".into(),
            params: PhysicalParams::new(1.0, 0.01, 1.0).unwrap(),
            rows,
        }
    }

    #[test]
    fn scientific_format_matches_tables() {
        assert_eq!(format_sci(1.2572e-02), "1.2572e-02");
        assert_eq!(format_sci(5.9561e-06), "5.9561e-06");
        assert_eq!(format_sci(1.0), "1.0000e+00");
        assert_eq!(format_sci(123456.0), "1.2346e+05");
        assert_eq!(format_sci(0.0), "0.0000e+00");
    }

    #[test]
    fn csv_layout() {
        let r = report(vec![row(8, 4e-2), row(16, 1e-2)]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "h,tau,energy_u,order,l2_u,order,l2_q,order,h1_p,order,l2_p,order");
        assert_eq!(lines[1], "1.2500e-01,1.5625e-02,4.0000e-02,,2.0000e-02,,4.0000e-02,,4.0000e-02,,4.0000e-02,");
        assert!(lines[2].starts_with("6.2500e-02,3.9062e-03,1.0000e-02,2.0000,"));
        assert_eq!(lines[2].split(',').count(), 12);
    }

    #[test]
    fn single_level_has_no_orders() {
        let r = report(vec![row(8, 1e-3)]);
        assert!(r.finest_order(Norm::EnergyU).is_none());
        let line = r.to_csv().lines().nth(1).unwrap().to_string();
        assert!(line.split(',').skip(3).step_by(2).all(|c| c.is_empty()));
    }

    #[test]
    fn zero_error_gives_undefined_order() {
        let r = report(vec![row(8, 1e-3), row(16, 0.0)]);
        assert!(r.finest_order(Norm::L2P).unwrap().is_err());
        assert!(r.to_csv().contains("undefined"));
    }

    #[test]
    fn markdown_uses_fractions() {
        let md = report(vec![row(8, 4e-2), row(16, 1e-2)]).to_markdown();
        assert!(md.contains("| 1/16 | 1/256 |"), "{md}");
        assert!(md.contains("2.0000"));
        assert_eq!(fraction(0.3), "3.0000e-01");
    }
}
