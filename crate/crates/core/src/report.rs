use alloc::string::String;

/// Outcome record for a verified inequality `lhs >= rhs` with the
/// propagated quadrature tolerance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` when the denominator is nonzero.
    pub ratio: Option<f64>,
    /// Propagated quadrature error; `satisfied` means `lhs >= rhs - tol`.
    pub tol: f64,
    pub satisfied: bool,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let ratio = if rhs != 0.0 && (lhs / rhs).is_finite() { Some(lhs / rhs) } else { None };
        InequalityReport { name: name.into(), lhs, rhs, ratio, tol, satisfied: lhs >= rhs - tol }
    }

    /// Signed margin `lhs - rhs`; satisfied iff `margin >= -tol`.
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}
