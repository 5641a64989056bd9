use std::fmt::Write as _;

use crate::V3;

/// Versioned first line of every report CSV.
pub const CSV_VERSION_LINE: &str = "# lpbm verification report v1";
pub const CSV_COLUMNS: &str = "check,fixture,dim,p,xi,t,sphere_order,planar_res,grading,seed,worst_violation,tolerance,status,detail";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not-applicable",
        }
    }
}

/// Quadrature settings recorded with each report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub sphere_order: usize,
    pub planar_res: usize,
    pub grading: f64,
    pub seed: u64,
}

/// One check: `worst` is the largest signed violation, positive values
/// exceeding `tolerance` fail.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub fixture: String,
    pub dim: usize,
    pub p: Option<f64>,
    pub xi: Option<V3>,
    pub t: String,
    pub settings: Settings,
    pub worst: f64,
    pub tolerance: f64,
    pub status: Status,
    pub detail: String,
}

impl VerificationReport {
    pub fn new(check: &str, fixture: &str, dim: usize, settings: Settings) -> Self {
        Self {
            check: check.into(),
            fixture: fixture.into(),
            dim,
            p: None,
            xi: None,
            t: String::new(),
            settings,
            worst: 0.0,
            tolerance: 0.0,
            status: Status::Pass,
            detail: String::new(),
        }
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn xi(mut self, xi: V3) -> Self {
        self.xi = Some(xi);
        self
    }

    pub fn t(mut self, t: impl Into<String>) -> Self {
        self.t = t.into();
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    /// Sets the outcome; NaN violations fail.
    pub fn outcome(mut self, worst: f64, tolerance: f64) -> Self {
        self.worst = worst;
        self.tolerance = tolerance;
        self.status = if worst <= tolerance { Status::Pass } else { Status::Fail };
        self
    }

    pub fn not_applicable(mut self, why: impl Into<String>) -> Self {
        self.status = Status::NotApplicable;
        self.detail = why.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let xi = self
            .xi
            .map(|v| v.as_slice()[..self.dim].iter().map(|c| format!("{c:.12}")).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let p = self.p.map(|p| format!("{p}")).unwrap_or_default();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{:.6e},{:.3e},{},{}",
            self.check,
            self.fixture,
            self.dim,
            p,
            xi,
            self.t,
            self.settings.sphere_order,
            self.settings.planar_res,
            self.settings.grading,
            self.settings.seed,
            self.worst,
            self.tolerance,
            self.status.as_str(),
            self.detail.replace(',', ";")
        );
        s
    }
}

pub fn write_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    out.push_str(CSV_VERSION_LINE);
    out.push('\n');
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
