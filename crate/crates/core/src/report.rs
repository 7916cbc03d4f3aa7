//! Certificate reports: machine-checked records that a constructed object
//! satisfies a named quantitative bound, with the measured value and slack.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Direction of the bound an entry certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// measured < bound (strict)
    LessThan,
    /// measured <= bound (+ tolerance)
    AtMost,
    /// measured >= bound (- tolerance)
    AtLeast,
    /// measured == 0 exactly (bit-level checks record the max deviation)
    ExactZero,
}

/// One named quantitative check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateEntry<S> {
    /// Stable identifier, e.g. `partition.sup_norm`.
    pub check: String,
    /// Human-readable formula this entry certifies.
    pub requirement: String,
    pub kind: BoundKind,
    pub measured: S,
    pub bound: S,
    /// Margin to the bound; nonnegative iff the entry passes (up to tolerance).
    pub slack: S,
    /// Tolerance applied when deciding `pass`.
    pub tolerance: S,
    pub pass: bool,
    /// Witness (worst pair/triple) or a vacuity note.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl<S: Scalar> CertificateEntry<S> {
    pub fn less_than(check: &str, requirement: &str, measured: S, bound: S) -> Self {
        CertificateEntry {
            check: check.to_string(),
            requirement: requirement.to_string(),
            kind: BoundKind::LessThan,
            measured,
            bound,
            slack: bound - measured,
            tolerance: S::zero(),
            pass: measured < bound,
            detail: None,
        }
    }

    pub fn at_most(check: &str, requirement: &str, measured: S, bound: S, tolerance: S) -> Self {
        CertificateEntry {
            check: check.to_string(),
            requirement: requirement.to_string(),
            kind: BoundKind::AtMost,
            measured,
            bound,
            slack: bound - measured,
            tolerance,
            pass: measured <= bound + tolerance,
            detail: None,
        }
    }

    pub fn at_least(check: &str, requirement: &str, measured: S, bound: S, tolerance: S) -> Self {
        CertificateEntry {
            check: check.to_string(),
            requirement: requirement.to_string(),
            kind: BoundKind::AtLeast,
            measured,
            bound,
            slack: measured - bound,
            tolerance,
            pass: measured >= bound - tolerance,
            detail: None,
        }
    }

    /// Bit-exactness check: `measured` is a max absolute deviation and must be 0.
    pub fn exact_zero(check: &str, requirement: &str, measured: S) -> Self {
        CertificateEntry {
            check: check.to_string(),
            requirement: requirement.to_string(),
            kind: BoundKind::ExactZero,
            measured,
            bound: S::zero(),
            slack: -measured,
            tolerance: S::zero(),
            pass: measured == S::zero(),
            detail: None,
        }
    }

    /// A vacuously true check (e.g. no mixed pairs exist); records why.
    pub fn vacuous(check: &str, requirement: &str, note: &str) -> Self {
        CertificateEntry {
            check: check.to_string(),
            requirement: requirement.to_string(),
            kind: BoundKind::AtMost,
            measured: S::zero(),
            bound: S::zero(),
            slack: S::zero(),
            tolerance: S::zero(),
            pass: true,
            detail: Some(format!("vacuous: {note}")),
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

/// Collection of certificate entries with an overall verdict.
///
/// Invariant: `verdict` is true iff every entry passes; the constructor
/// enforces it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateReport<S> {
    pub entries: Vec<CertificateEntry<S>>,
    pub verdict: bool,
    /// The metric tolerance the producing operations used.
    pub tolerance: S,
}

impl<S: Scalar> CertificateReport<S> {
    pub fn from_entries(entries: Vec<CertificateEntry<S>>) -> Self {
        let verdict = entries.iter().all(|e| e.pass);
        CertificateReport {
            entries,
            verdict,
            tolerance: S::tol_metric(),
        }
    }

    pub fn entry(&self, check: &str) -> Option<&CertificateEntry<S>> {
        self.entries.iter().find(|e| e.check == check)
    }

    /// Append all entries of `other`, prefixing their check ids, and refresh
    /// the verdict.
    pub fn absorb(&mut self, other: CertificateReport<S>) {
        self.entries.extend(other.entries);
        self.verdict = self.entries.iter().all(|e| e.pass);
    }

    pub fn push(&mut self, entry: CertificateEntry<S>) {
        self.verdict = self.verdict && entry.pass;
        self.entries.push(entry);
    }

    pub fn first_failure(&self) -> Option<&CertificateEntry<S>> {
        self.entries.iter().find(|e| !e.pass)
    }
}

impl<S: Scalar> Default for CertificateReport<S> {
    fn default() -> Self {
        CertificateReport::from_entries(Vec::new())
    }
}
