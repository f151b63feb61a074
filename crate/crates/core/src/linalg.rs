//! Dense complex linear algebra for the small operators used by the simulator.
//!
//! Matrices are square with dimension at most [`MAX_DIM`] and live inline on
//! the stack, so propagation loops never allocate. Everything is generic over
//! the real scalar through [`Real`]; the crate root exposes `f64` aliases.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use thiserror::Error;

/// Largest supported operator dimension (electron ⊗ ¹⁵N ⊗ ¹³C).
pub const MAX_DIM: usize = 8;
const CAP: usize = MAX_DIM * MAX_DIM;

/// Real scalar the linear algebra is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + fmt::Debug + fmt::Display + fmt::LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension overflow: {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionOverflow(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi sweeps did not converge (off-diagonal norm {0:e})")]
    NoConvergence(f64),
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Square complex matrix of dimension `1..=MAX_DIM`.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix<T: Real> {
    dim: usize,
    data: [Complex<T>; CAP],
}

impl<T: Real> Matrix<T> {
    /// Zero matrix. Panics if `dim` is 0 or above [`MAX_DIM`].
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "matrix dimension {dim} outside 1..={MAX_DIM}"
        );
        Self {
            dim,
            data: [czero(); CAP],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row slices; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[&[Complex<T>]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "row {i} has wrong length");
            rows[i][j]
        })
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut m = *self;
        for z in m.data[..self.dim * MAX_DIM].iter_mut() {
            *z = *z * s;
        }
        m
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self[(i, j)] - other[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.max_abs_diff(&Self::zeros(self.dim))
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc = acc + self[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Maximum deviation from `M = M†`.
    pub fn hermiticity_defect(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Maximum deviation of `M·M†` from the identity.
    pub fn unitarity_defect(&self) -> T {
        (*self * self.adjoint()).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn mul_vec(&self, v: &Vector<T>) -> Vector<T> {
        assert_eq!(self.dim, v.dim(), "matrix/vector dimension mismatch");
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = czero();
            for j in 0..self.dim {
                acc = acc + self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Principal `block`-sized sub-matrix starting at `offset` on the diagonal.
    pub fn diagonal_block(&self, offset: usize, block: usize) -> Self {
        assert!(offset + block <= self.dim);
        Self::from_fn(block, |i, j| self[(offset + i, offset + j)])
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * MAX_DIM + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl<T: Real> Add for Matrix<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<T: Real> AddAssign for Matrix<T> {
    fn add_assign(&mut self, rhs: Self) {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a + *b;
        }
    }
}

impl<T: Real> Sub for Matrix<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a - *b;
        }
        self
    }
}

impl<T: Real> Neg for Matrix<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for Matrix<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * MAX_DIM + j] = out.data[i * MAX_DIM + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Mul<T> for Matrix<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale_real(rhs)
    }
}

impl<T: Real> Mul<Complex<T>> for Matrix<T> {
    type Output = Self;
    fn mul(self, rhs: Complex<T>) -> Self {
        self.scale(rhs)
    }
}

impl<T: Real> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Complex column vector of dimension `1..=MAX_DIM`.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector<T: Real> {
    dim: usize,
    data: [Complex<T>; MAX_DIM],
}

impl<T: Real> Vector<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "vector dimension {dim} outside 1..={MAX_DIM}"
        );
        Self {
            dim,
            data: [czero(); MAX_DIM],
        }
    }

    pub fn from_slice(entries: &[Complex<T>]) -> Self {
        let mut v = Self::zeros(entries.len());
        v.data[..entries.len()].copy_from_slice(entries);
        v
    }

    /// Unit vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v[k] = Complex::new(T::one(), T::zero());
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data[..self.dim]
    }

    /// Inner product `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim, other.dim, "vector dimension mismatch");
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    pub fn norm(&self) -> T {
        self.as_slice()
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(Complex::new(T::one() / n, T::zero()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut v = *self;
        for z in v.data[..self.dim].iter_mut() {
            *z = *z * s;
        }
        v
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> Matrix<T> {
        Matrix::from_fn(self.dim, |i, j| self[i] * other[j].conj())
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self, LinalgError> {
        let dim = self.dim * other.dim;
        if dim > MAX_DIM {
            return Err(LinalgError::DimensionOverflow(dim));
        }
        let mut v = Self::zeros(dim);
        for i in 0..self.dim {
            for k in 0..other.dim {
                v[i * other.dim + k] = self[i] * other[k];
            }
        }
        Ok(v)
    }
}

impl<T: Real> Index<usize> for Vector<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        debug_assert!(i < self.dim);
        &self.data[i]
    }
}

impl<T: Real> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        debug_assert!(i < self.dim);
        &mut self.data[i]
    }
}

impl<T: Real> Add for Vector<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a + *b;
        }
        self
    }
}

impl<T: Real> Sub for Vector<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a - *b;
        }
        self
    }
}

impl<T: Real> fmt::Debug for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice().iter()).finish()
    }
}

/// Tensor product; `result[(i·nb+k),(j·nb+l)] = a[i,j]·b[k,l]`.
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let nb = b.dim();
    let dim = a.dim() * nb;
    if dim > MAX_DIM {
        return Err(LinalgError::DimensionOverflow(dim));
    }
    let mut m = Matrix::zeros(dim);
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let aij = a[(i, j)];
            for k in 0..nb {
                for l in 0..nb {
                    m[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(m)
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, Copy)]
pub struct Eigen<T: Real> {
    values: [T; MAX_DIM],
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn values(&self) -> &[T] {
        &self.values[..self.vectors.dim()]
    }

    /// Eigenvector `k` (column `k` of `vectors`).
    pub fn vector(&self, k: usize) -> Vector<T> {
        let n = self.vectors.dim();
        let mut v = Vector::zeros(n);
        for i in 0..n {
            v[i] = self.vectors[(i, k)];
        }
        v
    }

    /// `V·diag(f(λ))·V†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> Complex<T>) -> Matrix<T> {
        let n = self.vectors.dim();
        let phases: Vec<Complex<T>> = self.values().iter().map(|&l| f(l)).collect();
        Matrix::from_fn(n, |i, j| {
            (0..n).fold(czero(), |acc, k| {
                acc + self.vectors[(i, k)] * phases[k] * self.vectors[(j, k)].conj()
            })
        })
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_with(|l| Complex::new(l, T::zero()))
    }
}

fn hermitian_tolerance<T: Real>() -> T {
    // 1e-12 elementwise for f64; scaled to the epsilon of narrower types.
    T::lit(1e-12).max(T::epsilon() * T::lit(1e4))
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back ascending. Within a degenerate cluster
/// (`|λi − λj| < 1e-9·‖M‖`) eigenvectors are re-orthonormalized and ordered by
/// the index of their largest-magnitude component; every eigenvector is
/// phased so that component is real and positive.
pub fn eig_hermitian<T: Real>(m: &Matrix<T>) -> Result<Eigen<T>, LinalgError> {
    let scale = m.max_abs().max(T::one());
    let defect = m.hermiticity_defect();
    if defect > hermitian_tolerance::<T>() * scale {
        return Err(LinalgError::NotHermitian(defect.to_f64().unwrap_or(f64::NAN)));
    }
    let n = m.dim();
    // Symmetrize away rounding noise so the diagonal is exactly real.
    let mut a = Matrix::from_fn(n, |i, j| {
        let z = (m[(i, j)] + m[(j, i)].conj()).scale(T::lit(0.5));
        if i == j {
            Complex::new(z.re, T::zero())
        } else {
            z
        }
    });
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = T::epsilon() * norm.max(T::min_positive_value());

    let off_norm = |a: &Matrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s = s + a[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    for _sweep in 0..64 {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= T::epsilon() * T::lit(1e-3) * norm || r == T::zero() {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (T::lit(2.0) * r);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // G = [[c, s·e^{iα}], [−s·e^{−iα}, c]] on the (p, q) plane.
                let g_pq = phase.scale(s);
                let g_qp = -phase.conj().scale(s);
                let cc = Complex::new(c, T::zero());

                // A ← A·G (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cc + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * cc;
                }
                // A ← G†·A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cc * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + cc * aqk;
                }
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                // V ← V·G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cc + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * cc;
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(LinalgError::NoConvergence(
            off_norm(&a).to_f64().unwrap_or(f64::NAN),
        ));
    }

    let raw: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let column = |k: usize| {
        let mut col = Vector::zeros(n);
        for i in 0..n {
            col[i] = v[(i, k)];
        }
        col
    };
    let mut pairs: Vec<(T, Vector<T>)> = (0..n).map(|k| (raw[k], column(k))).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));

    let degenerate = T::lit(1e-9) * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[end - 1].0 < degenerate {
            end += 1;
        }
        if end - start > 1 {
            gram_schmidt(&mut pairs[start..end]);
            pairs[start..end].sort_by_key(|(_, vec)| dominant_index(vec));
        }
        start = end;
    }

    let mut values = [T::zero(); MAX_DIM];
    let mut vectors = Matrix::zeros(n);
    for (k, (val, vec)) in pairs.iter().enumerate() {
        values[k] = *val;
        let vec = fix_phase(vec);
        for i in 0..n {
            vectors[(i, k)] = vec[i];
        }
    }
    Ok(Eigen { values, vectors })
}

fn dominant_index<T: Real>(v: &Vector<T>) -> usize {
    let mut best = 0;
    let mut best_mag = T::neg_infinity();
    for (i, z) in v.as_slice().iter().enumerate() {
        // Ties within rounding go to the lower index.
        if z.norm() > best_mag + T::epsilon() * T::lit(64.0) {
            best = i;
            best_mag = z.norm();
        }
    }
    best
}

fn fix_phase<T: Real>(v: &Vector<T>) -> Vector<T> {
    let k = dominant_index(v);
    let z = v[k];
    let r = z.norm();
    if r == T::zero() {
        return *v;
    }
    v.scale(z.conj() / r)
}

fn gram_schmidt<T: Real>(cluster: &mut [(T, Vector<T>)]) {
    for i in 0..cluster.len() {
        let mut vi = cluster[i].1;
        for j in 0..i {
            let vj = cluster[j].1;
            let proj = vj.inner(&vi);
            vi = vi - vj.scale(proj);
        }
        cluster[i].1 = vi.normalized();
    }
}

/// `exp(−i·h·t)` for Hermitian `h` (angular frequency) via eigendecomposition.
pub fn expm_unitary<T: Real>(h: &Matrix<T>, t: T) -> Result<Matrix<T>, LinalgError> {
    if t == T::zero() {
        return Ok(Matrix::identity(h.dim()));
    }
    let eig = eig_hermitian(h)?;
    Ok(eig.reconstruct_with(|l| {
        let arg = -l * t;
        Complex::new(arg.cos(), arg.sin())
    }))
}

/// Pauli and spin operator constructors.
pub mod ops {
    use super::*;

    fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
        Complex::new(T::lit(re), T::lit(im))
    }

    pub fn sigma_x<T: Real>() -> Matrix<T> {
        Matrix::from_rows(&[&[c(0., 0.), c(1., 0.)], &[c(1., 0.), c(0., 0.)]])
    }

    pub fn sigma_y<T: Real>() -> Matrix<T> {
        Matrix::from_rows(&[&[c(0., 0.), c(0., -1.)], &[c(0., 1.), c(0., 0.)]])
    }

    pub fn sigma_z<T: Real>() -> Matrix<T> {
        Matrix::from_rows(&[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(-1., 0.)]])
    }

    /// Spin-1/2 `Iz = diag(1/2, −1/2)`.
    pub fn iz<T: Real>() -> Matrix<T> {
        sigma_z::<T>().scale_real(T::lit(0.5))
    }

    /// Spin-1/2 raising operator `|↑⟩⟨↓|`.
    pub fn i_plus<T: Real>() -> Matrix<T> {
        Matrix::from_rows(&[&[c(0., 0.), c(1., 0.)], &[c(0., 0.), c(0., 0.)]])
    }

    pub fn i_minus<T: Real>() -> Matrix<T> {
        i_plus::<T>().adjoint()
    }

    /// Spin-1 `Sz` in the `|+1⟩, |0⟩, |−1⟩` basis.
    pub fn s1_z<T: Real>() -> Matrix<T> {
        Matrix::from_real_diagonal(&[T::one(), T::zero(), -T::one()])
    }

    /// Spin-1 `S+` (ladder factor √2).
    pub fn s1_plus<T: Real>() -> Matrix<T> {
        let r2 = T::lit(2.0).sqrt();
        let mut m = Matrix::zeros(3);
        m[(0, 1)] = Complex::new(r2, T::zero());
        m[(1, 2)] = Complex::new(r2, T::zero());
        m
    }

    pub fn s1_minus<T: Real>() -> Matrix<T> {
        s1_plus::<T>().adjoint()
    }

    pub fn s1_x<T: Real>() -> Matrix<T> {
        (s1_plus::<T>() + s1_minus::<T>()).scale_real(T::lit(0.5))
    }

    pub fn s1_y<T: Real>() -> Matrix<T> {
        (s1_plus::<T>() - s1_minus::<T>()).scale(c(0., -0.5))
    }
}
