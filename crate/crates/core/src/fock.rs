//! Dense linear algebra over a truncated photon-number basis.
//!
//! States are complex amplitude vectors indexed by photon number, operators are
//! dense complex matrices. Joint qubit–field operators use a qubit-major
//! ordering: joint index `q * dim_field + n`, with `q = 0` the excited qubit
//! level (`σ_z = +1`) and `q = 1` the ground level (`σ_z = −1`).

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Number of top Fock levels whose population defines the truncation tail.
pub const TAIL_LEVELS: usize = 4;

/// Relative tolerance on `max|M − M†|` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Absolute bound on `‖Hψ − Eψ‖` for a returned eigenpair (scaled by the
/// largest matrix entry when that exceeds one).
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

/// Largest tolerated norm change during unitary evolution.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// State vector over the truncated number basis `|0⟩ … |dim−1⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
}

impl FockVector {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NumericalFailure("non-finite amplitude".into()));
        }
        Ok(Self {
            amps: DVector::from_vec(amps),
        })
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    /// Number state `|n⟩` in a basis of size `dim`.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension { dim, min: n + 1 });
        }
        let mut amps = DVector::from_element(dim, ZERO);
        amps[n] = ONE;
        Ok(Self { amps })
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::basis(0, dim)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "cannot normalize state with norm {norm}"
            )));
        }
        self.amps.unscale_mut(norm);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Population of the top [`TAIL_LEVELS`] levels.
    pub fn tail_mass(&self) -> f64 {
        let start = self.dim().saturating_sub(TAIL_LEVELS);
        self.amps.iter().skip(start).map(|a| a.norm_sqr()).sum()
    }

    pub fn is_converged(&self, tolerance: f64) -> bool {
        self.tail_mass() < tolerance
    }

    /// `⟨self|other⟩`. Vectors of different length are compared as if the
    /// shorter one were zero-padded.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance, zero-padding the shorter vector.
    pub fn distance(&self, other: &FockVector) -> f64 {
        let n = self.dim().max(other.dim());
        (0..n)
            .map(|i| {
                let a = self.amps.get(i).copied().unwrap_or(ZERO);
                let b = other.amps.get(i).copied().unwrap_or(ZERO);
                (a - b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        let applied = op.apply(self)?;
        Ok(self.inner(&applied))
    }

    /// Zero-pads or truncates to `dim` levels (no renormalization).
    pub fn resized(&self, dim: usize) -> FockVector {
        let amps = DVector::from_fn(dim, |i, _| self.amps.get(i).copied().unwrap_or(ZERO));
        FockVector { amps }
    }

    /// `⟨a⟩`, `⟨a²⟩` and `⟨a†a⟩` evaluated directly from the amplitudes, so the
    /// result carries no truncation-edge artefacts.
    pub fn ladder_moments(&self) -> LadderMoments {
        let psi = self.amps.as_slice();
        let mut a = ZERO;
        let mut a2 = ZERO;
        for n in 0..psi.len() {
            if n + 1 < psi.len() {
                a += psi[n].conj() * psi[n + 1] * ((n + 1) as f64).sqrt();
            }
            if n + 2 < psi.len() {
                a2 += psi[n].conj() * psi[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
            }
        }
        LadderMoments {
            a,
            a2,
            n: self.mean_photon_number(),
            norm: self.norm_sqr(),
        }
    }

    /// Multiplies by a global phase so the largest amplitude is real and positive.
    pub fn fix_global_phase(&mut self) {
        if let Some(big) = self
            .amps
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        {
            if big.norm() > 0.0 {
                let phase = big.conj() / big.norm();
                for a in self.amps.iter_mut() {
                    *a *= phase;
                }
            }
        }
    }
}

/// First and second ladder-operator moments of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderMoments {
    pub a: C64,
    pub a2: C64,
    pub n: f64,
    /// Trace (or squared norm) the moments were taken with.
    pub norm: f64,
}

impl LadderMoments {
    /// Quadrature statistics with `X = (a+a†)/√2`, `P = (a−a†)/(i√2)`.
    pub fn quadratures(&self) -> QuadratureMoments {
        let s2 = std::f64::consts::SQRT_2;
        let mean_x = s2 * self.a.re;
        let mean_p = s2 * self.a.im;
        let half = 0.5 * self.norm;
        let x2 = self.a2.re + self.n + half;
        let p2 = -self.a2.re + self.n + half;
        QuadratureMoments {
            mean_x,
            mean_p,
            var_x: x2 - mean_x * mean_x,
            var_p: p2 - mean_p * mean_p,
            cov_xp: self.a2.im - mean_x * mean_p,
        }
    }
}

/// Means, variances and symmetrized covariance of the `X`, `P` quadratures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// `½⟨{X, P}⟩ − ⟨X⟩⟨P⟩`.
    pub cov_xp: f64,
}

/// Dense operator on the truncated number basis (or a joint qubit–field basis).
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    m: DMatrix<C64>,
}

impl FockOperator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "operator matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        Ok(Self { m })
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Ok(Self {
            m: DMatrix::from_diagonal(&diag),
        })
    }

    /// Lowering operator `a` with `a|n⟩ = √n |n−1⟩`.
    pub fn annihilation(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, min: 2 });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for n in 1..dim {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Ok(Self { m })
    }

    pub fn creation(dim: usize) -> Result<Self> {
        Ok(Self::annihilation(dim)?.adjoint())
    }

    /// `a†a`, built directly as a diagonal so the top level is exact.
    pub fn number(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, min: 2 });
        }
        Self::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>())
    }

    /// `X = (a + a†)/√2`.
    pub fn quadrature_x(dim: usize) -> Result<Self> {
        let a = Self::annihilation(dim)?;
        Ok((&a + &a.adjoint()) * std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `P = (a − a†)/(i√2)`.
    pub fn quadrature_p(dim: usize) -> Result<Self> {
        let a = Self::annihilation(dim)?;
        let diff = &a - &a.adjoint();
        Ok(diff * C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max|M − M†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev < HERMITIAN_TOL * self.max_abs().max(1.0) {
            Ok(())
        } else {
            Err(Error::SymmetryViolation { deviation: dev })
        }
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    pub fn apply(&self, state: &FockVector) -> Result<FockVector> {
        if state.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "operator of dim {} applied to state of dim {}",
                self.dim(),
                state.dim()
            )));
        }
        Ok(FockVector::from_dvector(&self.m * &state.amps))
    }

    pub fn commutator(&self, other: &FockOperator) -> FockOperator {
        FockOperator {
            m: &self.m * &other.m - &other.m * &self.m,
        }
    }

    /// Kronecker product `self ⊗ other` (self indexes the outer block).
    pub fn kron(&self, other: &FockOperator) -> FockOperator {
        FockOperator {
            m: self.m.kronecker(&other.m),
        }
    }

    /// `exp(−iHt)` via scaling-and-squaring Padé approximation.
    pub fn propagator(&self, t: f64) -> Result<FockOperator> {
        self.check_hermitian()?;
        if t == 0.0 {
            return Ok(Self::identity(self.dim()));
        }
        let generator = &self.m * C64::new(0.0, -t);
        Ok(FockOperator { m: generator.exp() })
    }

    /// `exp(self)` for an arbitrary (e.g. anti-Hermitian) generator.
    pub fn exp(&self) -> FockOperator {
        FockOperator { m: self.m.exp() }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            m: &self.m * &rhs.m,
        }
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        FockOperator { m: -&self.m }
    }
}

impl Mul<f64> for FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: f64) -> FockOperator {
        FockOperator {
            m: self.m * C64::new(rhs, 0.0),
        }
    }
}

impl Mul<C64> for FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: C64) -> FockOperator {
        FockOperator { m: self.m * rhs }
    }
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvector(&self, k: usize) -> FockVector {
        FockVector::from_dvector(self.vectors.column(k).into_owned())
    }

    /// `exp(−iHt)|ψ⟩` through the spectral decomposition.
    pub fn propagate(&self, state: &FockVector, t: f64) -> Result<FockVector> {
        if state.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "state of dim {} does not match eigensystem of dim {}",
                state.dim(),
                self.dim()
            )));
        }
        let mut coeffs = self.vectors.ad_mul(&state.amps);
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        Ok(FockVector::from_dvector(&self.vectors * coeffs))
    }
}

/// Full eigendecomposition of a Hermitian operator. Real symmetric input goes
/// through the real solver.
pub fn eigh(h: &FockOperator) -> Result<Eigensystem> {
    h.check_hermitian()?;
    let n = h.dim();
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if h.is_real() {
        let real = h.m.map(|z| z.re);
        let real = (&real + real.transpose()) * 0.5;
        let eig = SymmetricEigen::new(real);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let sym = (&h.m + h.m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "eigensolver produced non-finite eigenvalues".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(Eigensystem {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Lowest eigenpair of a Hermitian operator, with the global phase fixed so
/// the dominant amplitude is real and positive.
pub fn hermitian_ground_state(h: &FockOperator) -> Result<(f64, FockVector)> {
    let eig = eigh(h)?;
    let energy = eig.values[0];
    let mut state = eig.eigenvector(0).normalized()?;
    state.fix_global_phase();
    let residual = (&h.m * &state.amps - &state.amps * C64::new(energy, 0.0)).norm();
    let tolerance = EIGEN_RESIDUAL_TOL * h.max_abs().max(1.0);
    if residual >= tolerance {
        return Err(Error::EigenResidual {
            residual,
            tolerance,
        });
    }
    Ok((energy, state))
}

/// `exp(−iHt)|ψ⟩` through the dense matrix exponential.
pub fn evolve(state: &FockVector, h: &FockOperator, t: f64) -> Result<FockVector> {
    if t == 0.0 {
        h.check_hermitian()?;
        return Ok(state.clone());
    }
    let u = h.propagator(t)?;
    let out = u.apply(state)?;
    let drift = (out.norm() - state.norm()).abs();
    if drift > NORM_DRIFT_TOL || !drift.is_finite() {
        return Err(Error::IntegrationFailure { drift });
    }
    Ok(out)
}

/// Density operator on the field (or any) truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &FockVector) -> Self {
        Self {
            m: &state.amps * state.amps.adjoint(),
        }
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "density matrix must be square and non-empty".into(),
            ));
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn tail_mass(&self) -> f64 {
        let start = self.dim().saturating_sub(TAIL_LEVELS);
        self.populations().iter().skip(start).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.populations()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// `⟨ψ|ρ|ψ⟩`, zero-padding whichever side is shorter.
    pub fn fidelity_to(&self, state: &FockVector) -> f64 {
        let psi = state.resized(self.dim());
        psi.amps.dotc(&(&self.m * &psi.amps)).re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let op = FockOperator::from_matrix(self.m.clone())?;
        Ok(eigh(&op)?.values[0])
    }

    pub fn ladder_moments(&self) -> LadderMoments {
        let d = self.dim();
        let mut a = ZERO;
        let mut a2 = ZERO;
        for m in 1..d {
            a += self.m[(m, m - 1)] * (m as f64).sqrt();
            if m >= 2 {
                a2 += self.m[(m, m - 2)] * ((m * (m - 1)) as f64).sqrt();
            }
        }
        LadderMoments {
            a,
            a2,
            n: self.mean_photon_number(),
            norm: self.trace(),
        }
    }

    /// `U ρ U†` for a supplied propagator.
    pub fn conjugated(&self, u: &FockOperator) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(Error::InvalidParameter(
                "propagator and density matrix dims differ".into(),
            ));
        }
        Ok(DensityMatrix {
            m: &u.m * &self.m * u.m.adjoint(),
        })
    }

    pub fn evolve(&self, h: &FockOperator, t: f64) -> Result<DensityMatrix> {
        let out = self.conjugated(&h.propagator(t)?)?;
        let drift = (out.trace() - self.trace()).abs();
        if drift > NORM_DRIFT_TOL || !drift.is_finite() {
            return Err(Error::IntegrationFailure { drift });
        }
        Ok(out)
    }
}

/// 2×2 operator on the qubit, in the excited-first `σ_z` basis.
pub type QubitOperator = Matrix2<C64>;

pub mod qubit {
    use super::{QubitOperator, C64, ONE, ZERO};

    /// Joint-basis block index of the excited level `|↑⟩`.
    pub const EXCITED: usize = 0;
    /// Joint-basis block index of the ground level `|↓⟩`.
    pub const GROUND: usize = 1;

    pub fn identity() -> QubitOperator {
        QubitOperator::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn sigma_x() -> QubitOperator {
        QubitOperator::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> QubitOperator {
        QubitOperator::new(ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO)
    }

    pub fn sigma_z() -> QubitOperator {
        QubitOperator::new(ONE, ZERO, ZERO, -ONE)
    }
}

/// `qubit ⊗ field` on the qubit-major joint basis of dimension `2·dim_field`.
pub fn qubit_field_tensor(field_op: &FockOperator, qubit_op: &QubitOperator) -> FockOperator {
    let d = field_op.dim();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for qi in 0..2 {
        for qj in 0..2 {
            let c = qubit_op[(qi, qj)];
            if c == ZERO {
                continue;
            }
            m.view_mut((qi * d, qj * d), (d, d))
                .copy_from(&(&field_op.m * c));
        }
    }
    FockOperator { m }
}

/// Joint product state `|field⟩ ⊗ |q⟩` with `q` one of [`qubit::EXCITED`],
/// [`qubit::GROUND`].
pub fn joint_product_state(field: &FockVector, q: usize) -> Result<FockVector> {
    if q > 1 {
        return Err(Error::InvalidParameter(format!(
            "qubit level {q} out of range"
        )));
    }
    let d = field.dim();
    let mut amps = DVector::from_element(2 * d, ZERO);
    amps.rows_mut(q * d, d).copy_from(&field.amps);
    Ok(FockVector::from_dvector(amps))
}

/// Reduced field state `Tr_qubit |ψ⟩⟨ψ|` of a qubit-major joint vector.
pub fn partial_trace_qubit(joint: &FockVector) -> Result<DensityMatrix> {
    if joint.dim() < 4 || !joint.dim().is_multiple_of(2) {
        return Err(Error::InvalidDimension {
            dim: joint.dim(),
            min: 4,
        });
    }
    let d = joint.dim() / 2;
    let up = joint.amps.rows(0, d);
    let down = joint.amps.rows(d, d);
    let m = up * up.adjoint() + down * down.adjoint();
    let rho = DensityMatrix { m };
    let deviation = (rho.trace() - joint.norm_sqr())
        .abs()
        .max((joint.norm_sqr() - 1.0).abs());
    if deviation > 1e-8 {
        return Err(Error::NumericalFailure(format!(
            "reduced state trace deviates from 1 by {deviation:.3e}"
        )));
    }
    Ok(rho)
}

/// Field amplitudes conditioned on a qubit level (unnormalized block of the
/// joint vector).
pub fn qubit_block(joint: &FockVector, q: usize) -> Result<FockVector> {
    if !joint.dim().is_multiple_of(2) || q > 1 {
        return Err(Error::InvalidParameter(
            "not a qubit-major joint vector".into(),
        ));
    }
    let d = joint.dim() / 2;
    Ok(FockVector::from_dvector(
        joint.amps.rows(q * d, d).into_owned(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn annihilation_entries() {
        let a = FockOperator::annihilation(2).unwrap();
        assert_eq!(a.entry(0, 1), ONE);
        assert_eq!(a.entry(0, 0), ZERO);
        assert_eq!(a.entry(1, 0), ZERO);
        assert_eq!(a.entry(1, 1), ZERO);
        let a4 = FockOperator::annihilation(4).unwrap();
        assert_abs_diff_eq!(a4.entry(2, 3).re, 1.7320508, epsilon = 1e-7);
        assert!(matches!(
            FockOperator::annihilation(1),
            Err(Error::InvalidDimension { dim: 1, .. })
        ));
    }

    #[test]
    fn number_operator_on_basis_state() {
        let a = FockOperator::annihilation(8).unwrap();
        let n = &a.adjoint() * &a;
        let three = FockVector::basis(3, 8).unwrap();
        let out = n.apply(&three).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[3].re, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(three.expectation(&n).unwrap().re, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn commutator_is_identity_below_edge() {
        let dim = 12;
        let a = FockOperator::annihilation(dim).unwrap();
        let c = a.commutator(&a.adjoint());
        for m in 0..dim - 1 {
            assert!((c.entry(m, m) - ONE).norm() < 1e-14);
            for k in 0..dim {
                if k != m {
                    assert_eq!(c.entry(m, k), ZERO);
                }
            }
        }
        assert_abs_diff_eq!(
            c.entry(dim - 1, dim - 1).re,
            -((dim - 1) as f64),
            epsilon = 1e-12
        );
    }

    #[test]
    fn ground_state_of_number_operator() {
        let (e, psi) = hermitian_ground_state(&FockOperator::number(16).unwrap()).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            psi.fidelity(&FockVector::vacuum(16).unwrap()),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ground_state_of_diagonal() {
        let (e, psi) =
            hermitian_ground_state(&FockOperator::diagonal(&[3.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(e, 1.0);
        assert_abs_diff_eq!(psi.populations()[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn displaced_oscillator_energy() {
        // a†a + (a + a†)/2 = (a† + ½)(a + ½) − ¼
        let dim = 48;
        let a = FockOperator::annihilation(dim).unwrap();
        let h = &FockOperator::number(dim).unwrap() + &((&a + &a.adjoint()) * 0.5);
        let (e, psi) = hermitian_ground_state(&h).unwrap();
        assert_abs_diff_eq!(e, -0.25, epsilon = 1e-12);
        // ground state is the coherent state with α = −½
        let m = psi.ladder_moments();
        assert_abs_diff_eq!(m.a.re.abs(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = FockOperator::annihilation(4).unwrap();
        assert!(matches!(
            hermitian_ground_state(&a),
            Err(Error::SymmetryViolation { .. })
        ));
        assert!(matches!(
            evolve(&FockVector::vacuum(4).unwrap(), &a, 1.0),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn evolve_number_state_picks_up_phase() {
        let omega = 1.3;
        let t = 0.7;
        let h = FockOperator::number(8).unwrap() * omega;
        let one = FockVector::basis(1, 8).unwrap();
        let out = evolve(&one, &h, t).unwrap();
        let expected = C64::from_polar(1.0, -omega * t);
        assert_abs_diff_eq!(
            (out.amplitudes()[1] - expected).norm(),
            0.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(out.mean_photon_number(), 1.0, epsilon = 1e-13);
        assert_eq!(evolve(&one, &h, 0.0).unwrap(), one);
    }

    #[test]
    fn tensor_conventions() {
        let d = 5;
        let id = qubit_field_tensor(&FockOperator::identity(d), &qubit::identity());
        assert_eq!(id, FockOperator::identity(2 * d));

        let sz = qubit_field_tensor(&FockOperator::identity(d), &qubit::sigma_z());
        let eig = eigh(&sz).unwrap();
        assert_eq!(eig.values.iter().filter(|&&v| v == -1.0).count(), d);
        assert_eq!(eig.values.iter().filter(|&&v| v == 1.0).count(), d);

        let a = FockOperator::annihilation(d).unwrap();
        let coupling = qubit_field_tensor(&(&a + &a.adjoint()), &qubit::sigma_x());
        let start = joint_product_state(&FockVector::vacuum(d).unwrap(), qubit::GROUND).unwrap();
        let out = coupling.apply(&start).unwrap();
        let target =
            joint_product_state(&FockVector::basis(1, d).unwrap(), qubit::EXCITED).unwrap();
        assert_abs_diff_eq!(out.distance(&target), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_cases() {
        let d = 6;
        let field = FockVector::from_amplitudes(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            ZERO,
            ZERO,
            ZERO,
            ZERO,
        ])
        .unwrap();
        let rho =
            partial_trace_qubit(&joint_product_state(&field, qubit::GROUND).unwrap()).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.fidelity_to(&field), 1.0, epsilon = 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![ZERO; 2 * d];
        amps[d] = C64::new(s, 0.0); // |0, ↓⟩
        amps[1] = C64::new(s, 0.0); // |1, ↑⟩
        let bell = FockVector::from_amplitudes(amps).unwrap();
        let rho = partial_trace_qubit(&bell).unwrap();
        assert_abs_diff_eq!(rho.purity(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.populations()[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.populations()[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_rejects_unnormalized() {
        let amps = vec![C64::new(2.0, 0.0), ZERO, ZERO, ZERO];
        let v = FockVector::from_amplitudes(amps).unwrap();
        assert!(matches!(
            partial_trace_qubit(&v),
            Err(Error::NumericalFailure(_))
        ));
    }

    #[test]
    fn quadrature_operators_match_moments() {
        let dim = 10;
        let amps: Vec<C64> = (0..dim)
            .map(|n| C64::new(1.0 / (1.0 + n as f64), 0.3 * n as f64 / dim as f64))
            .collect();
        let mut psi = FockVector::from_amplitudes(amps)
            .unwrap()
            .normalized()
            .unwrap();
        // keep the top level empty so the truncated X² is exact
        let mut raw = psi.amplitudes().to_vec();
        raw[dim - 1] = ZERO;
        psi = FockVector::from_amplitudes(raw)
            .unwrap()
            .normalized()
            .unwrap();
        let x = FockOperator::quadrature_x(dim).unwrap();
        let p = FockOperator::quadrature_p(dim).unwrap();
        let q = psi.ladder_moments().quadratures();
        let mx = psi.expectation(&x).unwrap().re;
        let mp = psi.expectation(&p).unwrap().re;
        let x2 = psi.expectation(&(&x * &x)).unwrap().re;
        let p2 = psi.expectation(&(&p * &p)).unwrap().re;
        let xp = psi.expectation(&(&(&x * &p) + &(&p * &x))).unwrap().re * 0.5;
        assert_abs_diff_eq!(q.mean_x, mx, epsilon = 1e-13);
        assert_abs_diff_eq!(q.mean_p, mp, epsilon = 1e-13);
        assert_abs_diff_eq!(q.var_x, x2 - mx * mx, epsilon = 1e-13);
        assert_abs_diff_eq!(q.var_p, p2 - mp * mp, epsilon = 1e-13);
        assert_abs_diff_eq!(q.cov_xp, xp - mx * mp, epsilon = 1e-13);
    }
}
