//! Linear autonomous compartmental systems `dx/dt = B x + u` in equilibrium.
//!
//! Off-diagonal `B[(i, j)]` is the fractional rate from pool `j` to pool `i`;
//! `z[j] = -sum_i B[(i, j)]` is the rate at which pool `j` releases to the
//! environment. A system is *open* when `B` is invertible, in which case the
//! equilibrium stocks are `x* = -B^{-1} u`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance used for sign, singularity and mass-balance checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationCode {
    DimensionMismatch,
    NonFinite,
    SignDiagonal,
    SignOffDiagonal,
    ColumnSum,
    NegativeInput,
    ZeroInput,
    Singular,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::DimensionMismatch => "DIMENSION_MISMATCH",
            ViolationCode::NonFinite => "NON_FINITE",
            ViolationCode::SignDiagonal => "SIGN_DIAGONAL",
            ViolationCode::SignOffDiagonal => "SIGN_OFFDIAGONAL",
            ViolationCode::ColumnSum => "COLUMN_SUM",
            ViolationCode::NegativeInput => "NEGATIVE_INPUT",
            ViolationCode::ZeroInput => "ZERO_INPUT",
            ViolationCode::Singular => "SINGULAR",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a violation sits. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Matrix { row: usize, col: usize },
    Column(usize),
    Input(usize),
    Whole,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Matrix { row, col } => write!(f, "B[{},{}]", row + 1, col + 1),
            Location::Column(j) => write!(f, "column {}", j + 1),
            Location::Input(i) => write!(f, "u[{}]", i + 1),
            Location::Whole => f.write_str("system"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: Location,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {} (magnitude {:e})", self.code, self.location, self.magnitude)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks every invariant of a compartmental system and reports all violations.
///
/// Sign checks are relative to the largest absolute entry of `b` (and of `u`
/// for input checks). Singularity is detected with a column-pivoted QR
/// factorization: `B` is flagged when the smallest pivot falls below
/// `tol * |largest pivot|`.
pub fn validate(b: &DMatrix<f64>, u: &DVector<f64>, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let d = u.len();
    if d == 0 || b.nrows() != d || b.ncols() != d {
        violations.push(Violation {
            code: ViolationCode::DimensionMismatch,
            location: Location::Whole,
            magnitude: b.nrows().max(b.ncols()) as f64 - d as f64,
        });
        return ValidationReport { violations };
    }
    if b.iter().chain(u.iter()).any(|x| !x.is_finite()) {
        violations.push(Violation {
            code: ViolationCode::NonFinite,
            location: Location::Whole,
            magnitude: f64::NAN,
        });
        return ValidationReport { violations };
    }

    let b_scale = b.amax().max(f64::MIN_POSITIVE);
    let b_tol = tol * b_scale;
    for j in 0..d {
        for i in 0..d {
            let v = b[(i, j)];
            if i == j {
                if v > b_tol {
                    violations.push(Violation {
                        code: ViolationCode::SignDiagonal,
                        location: Location::Matrix { row: i, col: j },
                        magnitude: v,
                    });
                }
            } else if v < -b_tol {
                violations.push(Violation {
                    code: ViolationCode::SignOffDiagonal,
                    location: Location::Matrix { row: i, col: j },
                    magnitude: -v,
                });
            }
        }
        let col_sum: f64 = b.column(j).sum();
        if col_sum > b_tol {
            violations.push(Violation {
                code: ViolationCode::ColumnSum,
                location: Location::Column(j),
                magnitude: col_sum,
            });
        }
    }

    let u_scale = u.amax();
    if u_scale == 0.0 {
        violations.push(Violation {
            code: ViolationCode::ZeroInput,
            location: Location::Whole,
            magnitude: 0.0,
        });
    } else {
        for (i, &ui) in u.iter().enumerate() {
            if ui < -tol * u_scale {
                violations.push(Violation {
                    code: ViolationCode::NegativeInput,
                    location: Location::Input(i),
                    magnitude: -ui,
                });
            }
        }
        if u.iter().map(|x| x.max(0.0)).sum::<f64>() == 0.0 {
            violations.push(Violation {
                code: ViolationCode::ZeroInput,
                location: Location::Whole,
                magnitude: 0.0,
            });
        }
    }

    let smallest = smallest_relative_pivot(b);
    if smallest <= tol {
        violations.push(Violation {
            code: ViolationCode::Singular,
            location: Location::Whole,
            magnitude: smallest,
        });
    }

    ValidationReport { violations }
}

/// |r_dd| / |r_11| of a column-pivoted QR; 0 for the zero matrix.
fn smallest_relative_pivot(b: &DMatrix<f64>) -> f64 {
    let r = b.clone().col_piv_qr().r();
    let diag: Vec<f64> = r.diagonal().iter().map(|x| x.abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0.0;
    }
    diag.iter().cloned().fold(f64::INFINITY, f64::min) / largest
}

/// Column outflow rates `z_j = -sum_i B_ij`, with `|z_j| < tol * max|B|`
/// clamped to exactly zero.
pub fn output_rates(b: &DMatrix<f64>, tol: f64) -> DVector<f64> {
    let cutoff = tol * b.amax();
    DVector::from_iterator(
        b.ncols(),
        b.column_iter().map(|col| {
            let z = -col.sum();
            if z.abs() < cutoff {
                0.0
            } else {
                z
            }
        }),
    )
}

/// A validated open compartmental system `M(u, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompartmentalSystem {
    u: DVector<f64>,
    b: DMatrix<f64>,
    label: Option<String>,
}

impl CompartmentalSystem {
    pub fn new(u: DVector<f64>, b: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(u, b, DEFAULT_TOL)
    }

    pub fn with_tolerance(u: DVector<f64>, b: DMatrix<f64>, tol: f64) -> Result<Self> {
        let report = validate(&b, &u, tol);
        if !report.is_valid() {
            return Err(Error::InvalidSystem(report));
        }
        Ok(CompartmentalSystem { u, b, label: None })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(u: &[f64], rows: &[&[f64]]) -> Result<Self> {
        let d = u.len();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "u has length {d} but B is not {d}x{d}"
            )));
        }
        let b = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::new(DVector::from_column_slice(u), b)
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dimension(&self) -> usize {
        self.u.len()
    }

    pub fn input(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn total_input(&self) -> f64 {
        self.u.sum()
    }

    pub fn output_rates(&self) -> DVector<f64> {
        output_rates(&self.b, DEFAULT_TOL)
    }

    /// Total exit rates `lambda_j = -B_jj`.
    pub fn exit_rates(&self) -> DVector<f64> {
        DVector::from_iterator(self.dimension(), self.b.diagonal().iter().map(|x| -x))
    }

    /// Same structure with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut scaled = Self::new(self.u.clone(), &self.b * factor)?;
        scaled.label = self.label.clone();
        Ok(scaled)
    }

    pub fn steady_state(&self) -> Result<SteadyState> {
        steady_state(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub x_star: DVector<f64>,
    pub release_flux: DVector<f64>,
}

/// Solves `B x* = -u` by LU with partial pivoting.
pub fn steady_state(sys: &CompartmentalSystem) -> Result<SteadyState> {
    let rhs = -sys.input();
    let x_star = sys
        .matrix()
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularMatrix("LU factorization of B failed"))?;
    let scale = x_star.amax().max(f64::MIN_POSITIVE);
    if let Some((index, &value)) = x_star.iter().enumerate().find(|(_, &x)| x < -DEFAULT_TOL * scale) {
        return Err(Error::NegativeSteadyState { index, value });
    }
    // clip round-off below zero
    let x_star = x_star.map(|x| x.max(0.0));
    let z = sys.output_rates();
    let release_flux = z.component_mul(&x_star);
    Ok(SteadyState { x_star, release_flux })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
    }

    #[test]
    fn serial_two_pool_is_valid() {
        let r = validate(
            &mat(&[&[-1.0, 0.0], &[1.0, -1.0]]),
            &DVector::from_vec(vec![1.0, 0.0]),
            DEFAULT_TOL,
        );
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn closed_system_is_singular() {
        let r = validate(
            &mat(&[&[-1.0, 1.0], &[1.0, -1.0]]),
            &DVector::from_vec(vec![1.0, 0.0]),
            DEFAULT_TOL,
        );
        assert!(!r.is_valid());
        assert!(r.has(ViolationCode::Singular));
    }

    #[test]
    fn negative_off_diagonal_is_reported() {
        let r = validate(
            &mat(&[&[-1.0, -0.5], &[1.0, -1.0]]),
            &DVector::from_vec(vec![1.0, 0.0]),
            DEFAULT_TOL,
        );
        assert!(r.has(ViolationCode::SignOffDiagonal));
        let v = r
            .violations
            .iter()
            .find(|v| v.code == ViolationCode::SignOffDiagonal)
            .unwrap();
        assert_eq!(v.location, Location::Matrix { row: 0, col: 1 });
        assert_eq!(v.magnitude, 0.5);
    }

    #[test]
    fn positive_diagonal_and_column_sum() {
        let r = validate(
            &mat(&[&[0.5, 0.0], &[0.0, -1.0]]),
            &DVector::from_vec(vec![1.0, 0.0]),
            DEFAULT_TOL,
        );
        assert!(r.has(ViolationCode::SignDiagonal));
        assert!(r.has(ViolationCode::ColumnSum));
    }

    #[test]
    fn input_checks() {
        let b = mat(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        assert!(validate(&b, &DVector::from_vec(vec![0.0, 0.0]), DEFAULT_TOL).has(ViolationCode::ZeroInput));
        assert!(validate(&b, &DVector::from_vec(vec![1.0, -1.0]), DEFAULT_TOL).has(ViolationCode::NegativeInput));
        assert!(validate(&b, &DVector::from_vec(vec![f64::NAN, 1.0]), DEFAULT_TOL).has(ViolationCode::NonFinite));
        assert!(validate(&b, &DVector::from_vec(vec![1.0]), DEFAULT_TOL).has(ViolationCode::DimensionMismatch));
    }

    #[test]
    fn validate_is_idempotent() {
        let b = mat(&[&[-1.0, -0.5], &[1.0, -1.0]]);
        let u = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(validate(&b, &u, DEFAULT_TOL), validate(&b, &u, DEFAULT_TOL));
    }

    #[test]
    fn unreachable_pool_is_permitted() {
        let b = mat(&[&[-1.0, 0.0], &[0.0, -2.0]]);
        let sys = CompartmentalSystem::new(DVector::from_vec(vec![1.0, 0.0]), b).unwrap();
        assert_eq!(sys.steady_state().unwrap().x_star[1], 0.0);
    }

    #[test]
    fn steady_state_examples() {
        let sys = CompartmentalSystem::from_rows(&[1.0, 0.0], &[&[-1.0, 0.0], &[1.0, -1.0]]).unwrap();
        let ss = sys.steady_state().unwrap();
        assert!((ss.x_star[0] - 1.0).abs() < 1e-14 && (ss.x_star[1] - 1.0).abs() < 1e-14);
        assert_eq!(ss.release_flux.as_slice(), &[0.0, 1.0]);

        let lambda = 2.5;
        let one = CompartmentalSystem::from_rows(&[1.0], &[&[-lambda]]).unwrap();
        assert!((one.steady_state().unwrap().x_star[0] - 1.0 / lambda).abs() < 1e-15);

        let par = CompartmentalSystem::from_rows(&[1.0, 1.0], &[&[-1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert_eq!(par.steady_state().unwrap().x_star.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn output_rate_examples() {
        let z = output_rates(&mat(&[&[-1.0, 0.0], &[1.0, -1.0]]), DEFAULT_TOL);
        assert_eq!(z.as_slice(), &[0.0, 1.0]);
        let z = output_rates(&mat(&[&[-2.723, 1.821], &[1.098, -2.277]]), DEFAULT_TOL);
        assert!((z[0] - 1.625).abs() < 1e-12 && (z[1] - 0.456).abs() < 1e-12);
        // residue below tolerance is clamped
        let z = output_rates(&mat(&[&[-0.5, 0.1 + 0.2], &[0.3, -0.3]]), DEFAULT_TOL);
        assert_eq!(z[1], 0.0);
    }

    #[test]
    fn invalid_system_is_rejected_by_constructor() {
        let err = CompartmentalSystem::from_rows(&[1.0, 0.0], &[&[-1.0, 1.0], &[1.0, -1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidSystem(r) if r.has(ViolationCode::Singular)));
    }
}
