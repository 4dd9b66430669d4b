//! Dense complex matrices, Pauli observables and two-qubit states.
//!
//! Basis ordering for two qubits is |00>, |01>, |10>, |11> with Alice's
//! qubit first.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::tolerance::Tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Outer product |v><v|.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Tr[self · other] without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(self.shape_error("trace product", other));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(self.shape_error("product", other));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(m)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.shape_error("elementwise op", other));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn shape_error(&self, what: &str, other: &Self) -> Error {
        Error::Shape(format!(
            "{what} of {}x{} and {}x{}",
            self.rows, self.cols, other.rows, other.cols
        ))
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.try_sub(other)?;
        Ok(d.data.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Largest |A_ij - conj(A_ji)|; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// Closed form for 2x2; otherwise cyclic Jacobi on the real symmetric
    /// embedding [[Re, -Im], [Im, Re]], whose spectrum is the Hermitian
    /// spectrum with every eigenvalue doubled.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let dev = self.hermitian_deviation();
        if dev > Tolerances::default().equality.max(1e-9) {
            return Err(Error::NotHermitian(dev));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(vec![self[(0, 0)].re]);
        }
        if n == 2 {
            let a = self[(0, 0)].re;
            let d = self[(1, 1)].re;
            let b = self[(0, 1)];
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            return Ok(vec![mean - r, mean + r]);
        }

        let m = 2 * n;
        let mut s = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                s[i * m + j] = z.re;
                s[(i + n) * m + (j + n)] = z.re;
                s[i * m + (j + n)] = -z.im;
                s[(i + n) * m + j] = z.im;
            }
        }
        let mut eig = jacobi_eigenvalues(&mut s, m);
        eig.sort_by(f64::total_cmp);
        Ok(eig.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigenvalues()?[0])
    }

    /// Hermitian with no eigenvalue below `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(1e-12))
            && self
                .hermitian_eigenvalues()
                .map(|e| e[0] >= -tol)
                .unwrap_or(false)
    }
}

fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; use the `try_*` methods for
// fallible arithmetic.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix shapes must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix shapes must agree")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    m[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    m
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

/// Unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl Direction {
    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let norm2 = nx * nx + ny * ny + nz * nz;
        if !norm2.is_finite() || (norm2 - 1.0).abs() > Tolerances::default().equality {
            return Err(Error::NotUnit(nx, ny, nz));
        }
        Ok(Self { nx, ny, nz })
    }

    /// `cos(angle) σz + sin(angle) σx`, i.e. a direction in the x–z plane
    /// measured from +z towards +x.
    pub fn planar(angle: f64) -> Self {
        Self {
            nx: angle.sin(),
            ny: 0.0,
            nz: angle.cos(),
        }
    }

    /// Spherical coordinates: polar angle from +z, azimuth from +x.
    pub fn spherical(polar: f64, azimuth: f64) -> Self {
        Self {
            nx: polar.sin() * azimuth.cos(),
            ny: polar.sin() * azimuth.sin(),
            nz: polar.cos(),
        }
    }

    pub fn x() -> Self {
        Self::planar(FRAC_PI_2)
    }

    pub fn z() -> Self {
        Self::planar(0.0)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.nx * other.nx + self.ny * other.ny + self.nz * other.nz
    }

    pub fn negated(&self) -> Self {
        Self {
            nx: -self.nx,
            ny: -self.ny,
            nz: -self.nz,
        }
    }
}

/// `n · σ` for a unit direction `n`.
pub fn pauli_observable(n: &Direction) -> ComplexMatrix {
    let [x, y, z] = n.components();
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(-z, 0.0),
        ],
    )
    .unwrap()
}

/// Projector onto the outcome `a = ±1` of `n · σ`: (I + a n·σ)/2.
pub fn outcome_projector(n: &Direction, outcome_plus: bool) -> ComplexMatrix {
    let sign = if outcome_plus { 0.5 } else { -0.5 };
    let id = ComplexMatrix::identity(2).scale(0.5);
    &id + &pauli_observable(n).scale(sign)
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    density: ComplexMatrix,
}

impl TwoQubitState {
    pub fn new(density: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(density, &Tolerances::default())
    }

    pub fn with_tolerances(density: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if density.rows() != 4 || density.cols() != 4 {
            return Err(Error::Shape(format!(
                "two-qubit density must be 4x4, got {}x{}",
                density.rows(),
                density.cols()
            )));
        }
        let dev = density.hermitian_deviation();
        if dev > tol.equality {
            return Err(Error::NotHermitian(dev));
        }
        let tr = density.trace();
        if (tr.re - 1.0).abs() > tol.equality || tr.im.abs() > tol.equality {
            return Err(Error::Invalid(format!("density trace {tr} != 1")));
        }
        let min = density.min_eigenvalue()?;
        if min < -tol.psd {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { density })
    }

    /// Pure state from four amplitudes in the |00>,|01>,|10>,|11> basis.
    pub fn from_amplitudes(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::Invalid("zero state vector".into()));
        }
        let scale = 1.0 / norm2.sqrt();
        let v: Vec<Complex64> = amplitudes.iter().map(|z| z * scale).collect();
        Self::new(ComplexMatrix::projector(&v))
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    pub fn purity(&self) -> f64 {
        self.density.trace_product(&self.density).unwrap().re
    }

    /// Convex mixture `(1-w) self + w other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        check_range("mixing weight", w, 0.0, 1.0, "[0, 1]")?;
        Self::new(&self.density.scale(1.0 - w) + &other.density.scale(w))
    }
}

/// cos θ |00> − sin θ |11>.
pub fn pure_state(theta: f64) -> Result<TwoQubitState> {
    check_range("theta", theta, 0.0, FRAC_PI_2, "[0, pi/2]")?;
    TwoQubitState::from_amplitudes([
        Complex64::new(theta.cos(), 0.0),
        ZERO,
        ZERO,
        Complex64::new(-theta.sin(), 0.0),
    ])
}

/// (|00> + |11>)/√2.
pub fn phi_plus() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState::from_amplitudes([
        Complex64::new(h, 0.0),
        ZERO,
        ZERO,
        Complex64::new(h, 0.0),
    ])
    .expect("normalized")
}

/// Tr[obs · ρ] for a Hermitian 4x4 observable.
pub fn expectation(state: &TwoQubitState, obs: &ComplexMatrix) -> Result<f64> {
    let dev = obs.hermitian_deviation();
    if dev > Tolerances::default().equality {
        return Err(Error::NotHermitian(dev));
    }
    Ok(obs.trace_product(&state.density)?.re)
}

/// Partial trace over Alice's (first) qubit of a 4x4 operator.
pub fn partial_trace_first(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::Shape("partial trace expects a 4x4 operator".into()));
    }
    let mut out = ComplexMatrix::zeros(2, 2);
    for j in 0..2 {
        for k in 0..2 {
            out[(j, k)] = m[(j, k)] + m[(2 + j, 2 + k)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pauli_from_axis_directions() {
        assert_eq!(pauli_observable(&Direction::new(0.0, 0.0, 1.0).unwrap()), pauli_z());
        assert_eq!(pauli_observable(&Direction::new(1.0, 0.0, 0.0).unwrap()), pauli_x());
        assert_eq!(pauli_observable(&Direction::new(0.0, 1.0, 0.0).unwrap()), pauli_y());
    }

    #[test]
    fn diagonal_direction_has_unit_eigenvalues() {
        let n = Direction::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).unwrap();
        let e = pauli_observable(&n).hermitian_eigenvalues().unwrap();
        assert!(close(e[0], -1.0, 1e-12) && close(e[1], 1.0, 1e-12));
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(Direction::new(1.0, 1.0, 0.0), Err(Error::NotUnit(..))));
        assert!(Direction::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn tensor_examples() {
        let id2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&id2, &id2), ComplexMatrix::identity(4));
        assert_eq!(
            tensor(&pauli_z(), &pauli_z()),
            ComplexMatrix::diagonal(&[1.0, -1.0, -1.0, 1.0])
        );
        let xi = tensor(&pauli_x(), &id2);
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[
                0., 0., 1., 0., //
                0., 0., 0., 1., //
                1., 0., 0., 0., //
                0., 1., 0., 0.,
            ],
        )
        .unwrap();
        assert_eq!(xi, expected);
    }

    #[test]
    fn pure_state_endpoints() {
        let s0 = pure_state(0.0).unwrap();
        let mut ket00 = ComplexMatrix::zeros(4, 4);
        ket00[(0, 0)] = ONE;
        assert!(s0.density().max_abs_diff(&ket00).unwrap() < 1e-15);

        let bell = pure_state(FRAC_PI_4).unwrap();
        let reduced = partial_trace_first(bell.density()).unwrap();
        let half_id = ComplexMatrix::identity(2).scale(0.5);
        assert!(reduced.max_abs_diff(&half_id).unwrap() < 1e-12);
    }

    #[test]
    fn pure_state_pi_over_six_correlations() {
        let s = pure_state(FRAC_PI_6).unwrap();
        let zz = expectation(&s, &tensor(&pauli_z(), &pauli_z())).unwrap();
        let xx = expectation(&s, &tensor(&pauli_x(), &pauli_x())).unwrap();
        assert!(close(zz, 1.0, 1e-12));
        assert!(close(xx, -FRAC_PI_3.sin(), 1e-12));
        assert!(close(xx, -0.8660, 1e-4));
    }

    #[test]
    fn pure_state_range_checked() {
        assert!(pure_state(-0.1).is_err());
        assert!(pure_state(2.0).is_err());
    }

    #[test]
    fn bell_state_expectations() {
        let s = pure_state(FRAC_PI_4).unwrap();
        assert!(close(expectation(&s, &tensor(&pauli_z(), &pauli_z())).unwrap(), 1.0, 1e-12));
        assert!(close(expectation(&s, &tensor(&pauli_x(), &pauli_x())).unwrap(), -1.0, 1e-12));
        assert!(close(expectation(&s, &ComplexMatrix::identity(4)).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 1)] = ONE;
        assert!(matches!(
            expectation(&pure_state(0.3).unwrap(), &m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn four_by_four_eigenvalues_match_known_spectrum() {
        // XX + YY + ZZ has spectrum {-3, 1, 1, 1}.
        let h = &(&tensor(&pauli_x(), &pauli_x()) + &tensor(&pauli_y(), &pauli_y()))
            + &tensor(&pauli_z(), &pauli_z());
        let e = h.hermitian_eigenvalues().unwrap();
        let expected = [-3.0, 1.0, 1.0, 1.0];
        for (got, want) in e.iter().zip(expected) {
            assert!(close(*got, want, 1e-12), "{e:?}");
        }
    }

    #[test]
    fn state_validation() {
        assert!(TwoQubitState::new(ComplexMatrix::identity(4)).is_err());
        assert!(TwoQubitState::new(ComplexMatrix::identity(4).scale(0.25)).is_ok());
        let not_psd = ComplexMatrix::diagonal(&[1.2, -0.2, 0.0, 0.0]);
        assert!(matches!(TwoQubitState::new(not_psd), Err(Error::NotPsd(_))));
    }
}
