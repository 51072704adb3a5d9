use serde::{Deserialize, Serialize};

/// Outcome of a decision procedure. `RejectNumeric` is reserved for
/// floating-point solvers that stalled without an exact refutation; it is
/// not a proof of infeasibility.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<W, C> {
    Accept(W),
    Reject(C),
    RejectNumeric(NumericDiagnostics),
}

impl<W, C> Verdict<W, C> {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }

    pub fn is_reject(&self) -> bool {
        !self.is_accept()
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Accept(_) => "accept",
            Verdict::Reject(_) => "reject",
            Verdict::RejectNumeric(_) => "reject-numeric",
        }
    }

    pub fn accepted(&self) -> Option<&W> {
        match self {
            Verdict::Accept(w) => Some(w),
            _ => None,
        }
    }

    pub fn rejected(&self) -> Option<&C> {
        match self {
            Verdict::Reject(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericDiagnostics {
    pub residual: f64,
    pub iterations: usize,
    pub reason: String,
    /// Always false: numeric rejections are heuristics.
    pub rigorous: bool,
}
