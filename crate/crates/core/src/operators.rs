//! Dense 2x2 complex matrices and the qubit operators built from them.
//!
//! Basis ordering is `{|e>, |g>}`: index 0 is the excited state, index 1 the
//! ground state, so `sigma_z = diag(1, -1)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Max off-hermitian entry tolerated before an input is rejected.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Lower bound on eigenvalues of an accepted density matrix.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, PartialEq, Default)]
pub struct QubitMatrix(pub [[C64; 2]; 2]);

impl QubitMatrix {
    pub const ZERO: QubitMatrix = QubitMatrix([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: QubitMatrix = QubitMatrix([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        QubitMatrix([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::real(a, 0.0, 0.0, d)
    }

    pub fn sigma_z() -> Self {
        Self::diag(1.0, -1.0)
    }

    pub fn sigma_x() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn sigma_y() -> Self {
        Self::new(ZERO, -C64::i(), C64::i(), ZERO)
    }

    /// Raising operator `|e><g|`.
    pub fn sigma_plus() -> Self {
        Self::real(0.0, 1.0, 0.0, 0.0)
    }

    /// Lowering operator `|g><e|`.
    pub fn sigma_minus() -> Self {
        Self::real(0.0, 0.0, 1.0, 0.0)
    }

    /// `|e><e|`
    pub fn excited() -> Self {
        Self::diag(1.0, 0.0)
    }

    /// `|g><g|`
    pub fn ground() -> Self {
        Self::diag(0.0, 1.0)
    }

    /// Projector `|psi><psi|` for the ket with amplitudes `(e, g)`.
    pub fn projector(e: C64, g: C64) -> Self {
        Self::new(e * e.conj(), e * g.conj(), g * e.conj(), g * g.conj())
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn ee(&self) -> C64 {
        self.0[0][0]
    }

    pub fn eg(&self) -> C64 {
        self.0[0][1]
    }

    pub fn ge(&self) -> C64 {
        self.0[1][0]
    }

    pub fn gg(&self) -> C64 {
        self.0[1][1]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Self::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// `self += s * other`
    #[inline]
    pub fn add_scaled(&mut self, s: C64, other: &QubitMatrix) {
        for r in 0..2 {
            for c in 0..2 {
                self.0[r][c] += s * other.0[r][c];
            }
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `self - self^dagger`.
    pub fn hermiticity_deviation(&self) -> f64 {
        (*self - self.dagger()).max_abs()
    }

    /// Eigenvalues (ascending) of a hermitian matrix.
    ///
    /// Inputs within [`HERMITIAN_TOL`] of hermitian are symmetrized first;
    /// anything further off is rejected.
    pub fn hermitian_eigenvalues(&self) -> Result<[f64; 2]> {
        let deviation = self.hermiticity_deviation();
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        Ok([mean - radius, mean + radius])
    }

    /// Checks trace, hermiticity and positivity of a density matrix.
    pub fn validate_density(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NotDensityMatrix("non-finite entry".into()));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "trace {tr} differs from 1"
            )));
        }
        let ev = self
            .hermitian_eigenvalues()
            .map_err(|e| Error::NotDensityMatrix(e.to_string()))?;
        if ev[0] < -POSITIVITY_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                ev[0]
            )));
        }
        Ok(())
    }

    /// `U self U^dagger`
    pub fn conjugate_by(&self, u: &QubitMatrix) -> Self {
        *u * *self * u.dagger()
    }
}

impl fmt::Debug for QubitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

impl Add for QubitMatrix {
    type Output = QubitMatrix;
    fn add(self, rhs: QubitMatrix) -> QubitMatrix {
        let (a, b) = (&self.0, &rhs.0);
        QubitMatrix::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl AddAssign for QubitMatrix {
    fn add_assign(&mut self, rhs: QubitMatrix) {
        *self = *self + rhs;
    }
}

impl Sub for QubitMatrix {
    type Output = QubitMatrix;
    fn sub(self, rhs: QubitMatrix) -> QubitMatrix {
        let (a, b) = (&self.0, &rhs.0);
        QubitMatrix::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Neg for QubitMatrix {
    type Output = QubitMatrix;
    fn neg(self) -> QubitMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for QubitMatrix {
    type Output = QubitMatrix;
    #[inline]
    fn mul(self, rhs: QubitMatrix) -> QubitMatrix {
        let (a, b) = (&self.0, &rhs.0);
        QubitMatrix::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for QubitMatrix {
    type Output = QubitMatrix;
    fn mul(self, s: C64) -> QubitMatrix {
        self.scale(s)
    }
}

impl Mul<f64> for QubitMatrix {
    type Output = QubitMatrix;
    fn mul(self, s: f64) -> QubitMatrix {
        self.scale_real(s)
    }
}

/// `[a, b] = ab - ba`
#[inline]
pub fn commutator(a: &QubitMatrix, b: &QubitMatrix) -> QubitMatrix {
    *a * *b - *b * *a
}

/// Trace distance `1/2 ||r1 - r2||_1` between two density matrices.
pub fn trace_distance(r1: &QubitMatrix, r2: &QubitMatrix) -> Result<f64> {
    let [lo, hi] = (*r1 - *r2).hermitian_eigenvalues()?;
    Ok(0.5 * (lo.abs() + hi.abs()))
}

/// `exp(i eps t sigma_z / 2)`.
pub fn phase_unitary(epsilon: f64, t: f64) -> QubitMatrix {
    let half = 0.5 * epsilon * t;
    QubitMatrix::new(
        C64::from_polar(1.0, half),
        ZERO,
        ZERO,
        C64::from_polar(1.0, -half),
    )
}

/// System-bath coupling `L = sigma_- + chi sigma_+`.
///
/// `chi = 0` is the rotating-wave limit; `chi = 1` keeps the full
/// counter-rotating coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingOperator {
    chi: f64,
    matrix: QubitMatrix,
}

impl CouplingOperator {
    pub fn new(chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::InvalidParameter(format!(
                "chi must lie in [0, 1], got {chi}"
            )));
        }
        let matrix = QubitMatrix::sigma_minus() + QubitMatrix::sigma_plus() * chi;
        Ok(CouplingOperator { chi, matrix })
    }

    pub fn rotating_wave() -> Self {
        Self::new(0.0).unwrap()
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn matrix(&self) -> &QubitMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> QubitMatrix {
        self.matrix.dagger()
    }
}
