//! Numerical SU(n) for n = 2, 3.
//!
//! Tangent vectors are left-trivialized throughout: a tangent at `X` is
//! stored as the Lie algebra element `ξ = X^{-1} dX`, an anti-Hermitian
//! traceless matrix.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freegroup::{relator, Genus, Word};

pub type CMatrix = DMatrix<Complex64>;

/// Invariant tolerance for unitarity, determinant and Lie algebra membership.
pub const INVARIANT_TOL: f64 = 1e-10;

/// Eigenvalue arguments closer than this to ±π are treated as on the branch cut.
pub const BRANCH_CUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("unsupported matrix size {0}; only SU(2) and SU(3) are implemented")]
    UnsupportedSize(usize),
    #[error("matrix is not special unitary (unitarity defect {unitarity:.3e}, det defect {det:.3e})")]
    NotSpecialUnitary { unitarity: f64, det: f64 },
    #[error("matrix is not in su(n) (hermiticity defect {hermiticity:.3e}, trace {trace:.3e})")]
    NotInAlgebra { hermiticity: f64, trace: f64 },
    #[error("element is not central: {0}")]
    NotCentral(String),
    #[error("configuration has {got} points, genus {genus} needs {expected}")]
    ConfigurationLength {
        got: usize,
        expected: usize,
        genus: usize,
    },
    #[error("mixed matrix sizes in configuration")]
    MixedSizes,
    #[error("word genus {word} does not match configuration genus {config}")]
    GenusMismatch { word: usize, config: usize },
    #[error("expected {expected} tangent components, got {got}")]
    TangentLength { got: usize, expected: usize },
    #[error("configuration is not on the fiber: |Φ(c) - β| = {0:.3e}")]
    NotOnFiber(f64),
    #[error("matrix logarithm near the branch cut (eigenvalue argument {0:.6})")]
    BranchCut(f64),
    #[error("malformed configuration JSON: {0}")]
    Json(String),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `SU(n)` with its Lie algebra `su(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialUnitary {
    n: usize,
}

impl SpecialUnitary {
    pub fn new(n: usize) -> Result<Self, LieError> {
        match n {
            2 | 3 => Ok(SpecialUnitary { n }),
            _ => Err(LieError::UnsupportedSize(n)),
        }
    }

    pub fn su2() -> Self {
        SpecialUnitary { n: 2 }
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Real dimension `n^2 - 1`.
    pub fn dim(self) -> usize {
        self.n * self.n - 1
    }

    pub fn identity(self) -> GroupPoint {
        GroupPoint(CMatrix::identity(self.n, self.n))
    }

    /// Orthogonal basis of `su(n)`: `i` times the generalized Gell-Mann
    /// matrices. For `n = 2` this is `(iσx, iσy, iσz)`.
    pub fn basis(self) -> Vec<CMatrix> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..n {
            for k in (j + 1)..n {
                let mut sym = CMatrix::zeros(n, n);
                sym[(j, k)] = c(0.0, 1.0);
                sym[(k, j)] = c(0.0, 1.0);
                out.push(sym);
                let mut anti = CMatrix::zeros(n, n);
                anti[(j, k)] = c(1.0, 0.0);
                anti[(k, j)] = c(-1.0, 0.0);
                out.push(anti);
            }
        }
        for l in 1..n {
            let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut diag = CMatrix::zeros(n, n);
            for k in 0..l {
                diag[(k, k)] = c(0.0, scale);
            }
            diag[(l, l)] = c(0.0, -scale * l as f64);
            out.push(diag);
        }
        out
    }

    /// Coordinates of `xi` in [`SpecialUnitary::basis`].
    pub fn coordinates(self, xi: &CMatrix) -> Vec<f64> {
        self.basis()
            .iter()
            .map(|b| inner(b, xi) / inner(b, b))
            .collect()
    }

    pub fn from_coordinates(self, coords: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (b, &t) in self.basis().iter().zip(coords) {
            out += b * c(t, 0.0);
        }
        out
    }

    /// Gaussian element of `su(n)` (independent standard normal coordinates).
    pub fn random_algebra<R: Rng + ?Sized>(self, rng: &mut R) -> CMatrix {
        let coords: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.from_coordinates(&coords)
    }

    /// Haar-distributed element: QR of a complex Ginibre matrix with the
    /// phases of `R`'s diagonal absorbed, then rescaled to determinant 1.
    pub fn haar<R: Rng + ?Sized>(self, rng: &mut R) -> GroupPoint {
        let n = self.n;
        let z = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let qr = z.qr();
        let (q, r) = (qr.q(), qr.r());
        let mut u = q;
        for k in 0..n {
            let d = r[(k, k)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
            for row in 0..n {
                u[(row, k)] *= phase;
            }
        }
        let det = u.determinant();
        let root = Complex64::from_polar(1.0, -det.arg() / n as f64);
        u *= root;
        GroupPoint(u)
    }

    /// `ζ I` with `ζ = exp(2πik/n)`, a central element.
    pub fn central(self, k: usize) -> CentralElement {
        let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / self.n as f64);
        CentralElement(GroupPoint(CMatrix::identity(self.n, self.n) * zeta))
    }
}

/// `Re tr(a^* b)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Samples the Haar measure on SU(n) deterministically from a seed.
pub fn haar_sample(group: SpecialUnitary, seed: u64) -> GroupPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    group.haar(&mut rng)
}

/// Checks membership in `su(n)`.
pub fn check_algebra(xi: &CMatrix) -> Result<(), LieError> {
    let hermiticity = (xi + xi.adjoint()).norm();
    let trace = xi.trace().norm();
    if hermiticity > INVARIANT_TOL || trace > INVARIANT_TOL {
        return Err(LieError::NotInAlgebra { hermiticity, trace });
    }
    Ok(())
}

/// Projects a near-algebra matrix onto `su(n)`.
pub fn project_algebra(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let anti = (m - m.adjoint()) * c(0.5, 0.0);
    let tr = anti.trace() / c(n as f64, 0.0);
    anti - CMatrix::identity(n, n) * tr
}

pub fn bracket(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Exponential of an anti-Hermitian matrix.
pub fn exp_algebra(xi: &CMatrix) -> CMatrix {
    let n = xi.nrows();
    if n == 2 {
        // ξ = i(a·σ) + iτ I; exp = e^{iτ}(cos|a| I + sin|a|/|a| (ξ - iτ I))
        let tau = xi.trace() / c(2.0, 0.0);
        let traceless = xi - CMatrix::identity(2, 2) * tau;
        let theta = (traceless.norm_squared() / 2.0).sqrt();
        let sinc = if theta < 1e-8 {
            1.0 - theta * theta / 6.0
        } else {
            theta.sin() / theta
        };
        let out = CMatrix::identity(2, 2) * c(theta.cos(), 0.0) + traceless * c(sinc, 0.0);
        return out * tau.exp();
    }
    // ξ = iH with H Hermitian
    let h = xi * c(0.0, -1.0);
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l)));
    v * d * v.adjoint()
}

/// Principal logarithm of a unitary matrix, anti-Hermitian.
/// Fails when an eigenvalue is within [`BRANCH_CUT_TOL`] of `-1`.
pub fn log_unitary(u: &CMatrix) -> Result<CMatrix, LieError> {
    let n = u.nrows();
    if n == 2 {
        let det = u.determinant();
        let tau = det.arg() / 2.0;
        let v = u * Complex64::from_polar(1.0, -tau);
        // v ∈ SU(2): v = cos θ I + i(sin θ) n·σ
        let cos_theta = (v.trace().re / 2.0).clamp(-1.0, 1.0);
        let theta = cos_theta.acos();
        for arg in [tau + theta, tau - theta] {
            let wrapped = (arg + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
                - std::f64::consts::PI;
            if std::f64::consts::PI - wrapped.abs() < BRANCH_CUT_TOL {
                return Err(LieError::BranchCut(wrapped));
            }
        }
        let traceless = project_algebra(&v);
        let sinc = if theta < 1e-8 {
            1.0 - theta * theta / 6.0
        } else {
            theta.sin() / theta
        };
        let mut out = traceless / c(sinc, 0.0);
        if tau != 0.0 {
            out += CMatrix::identity(2, 2) * c(0.0, tau);
        }
        return Ok(out);
    }
    let schur = u.clone().schur();
    let (q, t) = schur.unpack();
    let mut diag = CMatrix::zeros(n, n);
    for k in 0..n {
        let arg = t[(k, k)].arg();
        if std::f64::consts::PI - arg.abs() < BRANCH_CUT_TOL {
            return Err(LieError::BranchCut(arg));
        }
        diag[(k, k)] = c(0.0, arg);
    }
    let l = &q * diag * q.adjoint();
    Ok((&l - l.adjoint()) * c(0.5, 0.0))
}

/// A point of SU(n).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint(CMatrix);

impl GroupPoint {
    pub fn new(m: CMatrix) -> Result<Self, LieError> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(LieError::UnsupportedSize(n));
        }
        SpecialUnitary::new(n)?;
        let unitarity = (m.adjoint() * &m - CMatrix::identity(n, n)).norm();
        let det = (m.determinant() - c(1.0, 0.0)).norm();
        if unitarity > INVARIANT_TOL || det > INVARIANT_TOL {
            return Err(LieError::NotSpecialUnitary { unitarity, det });
        }
        Ok(GroupPoint(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn group(&self) -> SpecialUnitary {
        SpecialUnitary { n: self.n() }
    }

    pub fn mul(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint(&self.0 * &other.0)
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint(self.0.adjoint())
    }

    /// `Ad(self) ξ = self ξ self^{-1}`.
    pub fn adjoint_action(&self, xi: &CMatrix) -> CMatrix {
        &self.0 * xi * self.0.adjoint()
    }

    /// Right-exponential retraction `self · exp(ξ)`.
    pub fn retract(&self, xi: &CMatrix) -> GroupPoint {
        GroupPoint(&self.0 * exp_algebra(xi))
    }

    pub fn distance(&self, other: &GroupPoint) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Largest violation of the special-unitary invariants.
    pub fn invariant_defect(&self) -> f64 {
        let n = self.n();
        let unitarity = (self.0.adjoint() * &self.0 - CMatrix::identity(n, n)).norm();
        let det = (self.0.determinant() - c(1.0, 0.0)).norm();
        unitarity.max(det)
    }
}

/// A tangent vector in left trivialization.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: GroupPoint,
    pub xi: CMatrix,
}

impl TangentVector {
    pub fn new(base: GroupPoint, xi: CMatrix) -> Result<Self, LieError> {
        check_algebra(&xi)?;
        Ok(TangentVector { base, xi })
    }

    /// The ambient tangent `base · ξ`.
    pub fn ambient(&self) -> CMatrix {
        self.base.matrix() * &self.xi
    }
}

/// A central element `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralElement(GroupPoint);

impl CentralElement {
    pub fn new(point: GroupPoint) -> Result<Self, LieError> {
        let m = point.matrix();
        let n = point.n();
        let zeta = m[(0, 0)];
        let off = (m - CMatrix::identity(n, n) * zeta).norm();
        if off > INVARIANT_TOL {
            return Err(LieError::NotCentral(format!("not scalar (defect {off:.3e})")));
        }
        Ok(CentralElement(point))
    }

    /// `-I` in SU(2).
    pub fn minus_identity() -> Self {
        SpecialUnitary::su2().central(1)
    }

    pub fn point(&self) -> &GroupPoint {
        &self.0
    }
}

/// `(X_1, …, X_{2g}) ∈ SU(n)^{2g}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    genus: Genus,
    points: Vec<GroupPoint>,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationJson(Vec<Vec<[f64; 2]>>);

impl Configuration {
    pub fn new(genus: Genus, points: Vec<GroupPoint>) -> Result<Self, LieError> {
        if points.len() != genus.rank() {
            return Err(LieError::ConfigurationLength {
                got: points.len(),
                expected: genus.rank(),
                genus: genus.get(),
            });
        }
        let n = points[0].n();
        if points.iter().any(|p| p.n() != n) {
            return Err(LieError::MixedSizes);
        }
        Ok(Configuration { genus, points })
    }

    pub fn identity(genus: Genus, group: SpecialUnitary) -> Self {
        Configuration {
            genus,
            points: vec![group.identity(); genus.rank()],
        }
    }

    pub fn random<R: Rng + ?Sized>(genus: Genus, group: SpecialUnitary, rng: &mut R) -> Self {
        Configuration {
            genus,
            points: (0..genus.rank()).map(|_| group.haar(rng)).collect(),
        }
    }

    /// `X_1 = diag(i, -i)`, `X_2 = [[0, 1], [-1, 0]]`, remaining points `I`.
    /// Its moment map value is `-I`.
    pub fn quaternion_point(genus: Genus) -> Self {
        let x1 = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        let x2 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let mut points = vec![SpecialUnitary::su2().identity(); genus.rank()];
        points[0] = GroupPoint(x1);
        points[1] = GroupPoint(x2);
        Configuration { genus, points }
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    pub fn group(&self) -> SpecialUnitary {
        self.points[0].group()
    }

    pub fn points(&self) -> &[GroupPoint] {
        &self.points
    }

    /// Simultaneous conjugation `k X_i k^{-1}`.
    pub fn conjugate(&self, k: &GroupPoint) -> Configuration {
        let kinv = k.inverse();
        Configuration {
            genus: self.genus,
            points: self.points.iter().map(|p| k.mul(p).mul(&kinv)).collect(),
        }
    }

    /// `X_i ← X_i exp(ξ_i)`.
    pub fn retract(&self, xi: &[CMatrix]) -> Configuration {
        Configuration {
            genus: self.genus,
            points: self.points.iter().zip(xi).map(|(p, x)| p.retract(x)).collect(),
        }
    }

    pub fn invariant_defect(&self) -> f64 {
        self.points
            .iter()
            .map(GroupPoint::invariant_defect)
            .fold(0.0, f64::max)
    }

    /// JSON array of row-major matrices, each a list of `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let data = ConfigurationJson(
            self.points
                .iter()
                .map(|p| {
                    let m = p.matrix();
                    let n = p.n();
                    (0..n)
                        .flat_map(|r| (0..n).map(move |col| (r, col)))
                        .map(|(r, col)| [m[(r, col)].re, m[(r, col)].im])
                        .collect()
                })
                .collect(),
        );
        serde_json::to_string(&data).expect("plain data serializes")
    }

    pub fn from_json(genus: Genus, s: &str) -> Result<Self, LieError> {
        let ConfigurationJson(data) =
            serde_json::from_str(s).map_err(|e| LieError::Json(e.to_string()))?;
        let mut points = Vec::with_capacity(data.len());
        for entries in data {
            let n = (entries.len() as f64).sqrt().round() as usize;
            if n * n != entries.len() {
                return Err(LieError::Json(format!("{} entries is not a square matrix", entries.len())));
            }
            let m = CMatrix::from_row_iterator(n, n, entries.iter().map(|[re, im]| c(*re, *im)));
            points.push(GroupPoint::new(m)?);
        }
        if points.is_empty() {
            return Err(LieError::Json("empty configuration".into()));
        }
        Configuration::new(genus, points)
    }
}

fn check_word(w: &Word, config: &Configuration) -> Result<(), LieError> {
    if w.genus() != config.genus {
        return Err(LieError::GenusMismatch {
            word: w.genus().get(),
            config: config.genus.get(),
        });
    }
    Ok(())
}

/// `ev_w(c)`: substitutes `X_i` for `x_i`.
pub fn evaluate_word(w: &Word, config: &Configuration) -> Result<GroupPoint, LieError> {
    check_word(w, config)?;
    Ok(evaluate_on(w, &config.points))
}

pub(crate) fn evaluate_on(w: &Word, points: &[GroupPoint]) -> GroupPoint {
    let n = points[0].n();
    let mut acc = CMatrix::identity(n, n);
    for l in w.letters() {
        let x = points[l.index() - 1].matrix();
        if l.is_inverse() {
            acc *= x.adjoint();
        } else {
            acc *= x;
        }
    }
    GroupPoint(acc)
}

/// `Φ(X) = ∏_j [X_{2j-1}, X_{2j}]`.
pub fn moment_map(config: &Configuration) -> GroupPoint {
    evaluate_word(&relator(config.genus), config).expect("relator has the configuration genus")
}

/// Value and left-trivialized differential of `ev_w` at `config` along the
/// tangent tuple `v` (one algebra element per generator).
///
/// Appending a letter with value `L` and left-trivialized derivative `η`
/// maps `ξ ↦ Ad(L^{-1}) ξ + η`; for `x_i^{-1}` the letter derivative is
/// `η = -Ad(X_i) v_i`.
pub fn word_pushforward(
    w: &Word,
    config: &Configuration,
    v: &[CMatrix],
) -> Result<(GroupPoint, CMatrix), LieError> {
    check_word(w, config)?;
    if v.len() != config.points.len() {
        return Err(LieError::TangentLength {
            got: v.len(),
            expected: config.points.len(),
        });
    }
    Ok(pushforward_on(w, &config.points, v))
}

/// [`word_pushforward`] on a bare point slice; lengths are the caller's problem.
pub(crate) fn pushforward_on(w: &Word, points: &[GroupPoint], v: &[CMatrix]) -> (GroupPoint, CMatrix) {
    let n = points[0].n();
    let mut value = CMatrix::identity(n, n);
    let mut xi = CMatrix::zeros(n, n);
    for l in w.letters() {
        let x = points[l.index() - 1].matrix();
        let vi = &v[l.index() - 1];
        let (letter, letter_inv, eta) = if l.is_inverse() {
            let xinv = x.adjoint();
            let eta = -(x * vi * &xinv);
            (xinv, x.clone(), eta)
        } else {
            (x.clone(), x.adjoint(), vi.clone())
        };
        xi = &letter_inv * xi * &letter + eta;
        value *= letter;
    }
    (GroupPoint(value), xi)
}

/// Left-trivialized differential of `ev_w`.
pub fn word_differential(w: &Word, config: &Configuration, v: &[CMatrix]) -> Result<CMatrix, LieError> {
    Ok(word_pushforward(w, config, v)?.1)
}

/// Real `dim × (2g·dim)` matrix of `dΦ` in basis coordinates.
pub fn moment_jacobian(config: &Configuration) -> DMatrix<f64> {
    let group = config.group();
    let dim = group.dim();
    let rank = config.points.len();
    let basis = group.basis();
    let r = relator(config.genus);
    let zero = CMatrix::zeros(group.n(), group.n());
    let mut jac = DMatrix::<f64>::zeros(dim, rank * dim);
    for i in 0..rank {
        for (k, b) in basis.iter().enumerate() {
            let mut v = vec![zero.clone(); rank];
            v[i] = b.clone();
            let out = word_differential(&r, config, &v).expect("shapes match");
            for (row, val) in group.coordinates(&out).into_iter().enumerate() {
                jac[(row, i * dim + k)] = val;
            }
        }
    }
    jac
}

fn fiber_distance(config: &Configuration, beta: &CentralElement) -> f64 {
    moment_map(config).distance(beta.point())
}

/// Numerical rank of `dΦ` at a point of `Y_β`; `dim K` certifies a regular point.
pub fn jacobian_rank(config: &Configuration, beta: &CentralElement, tol: f64) -> Result<usize, LieError> {
    let dist = fiber_distance(config, beta);
    if dist > 1e-8 {
        return Err(LieError::NotOnFiber(dist));
    }
    let svd = SVD::new(moment_jacobian(config), false, false);
    Ok(svd.singular_values.iter().filter(|&&s| s > tol).count())
}

/// Orthonormal basis (in coordinates) of `ker dΦ`, returned as tangent tuples.
/// Directions with `σ² <= tol · max(σ²_max, 1)` count as kernel.
pub fn moment_kernel(config: &Configuration, tol: f64) -> Vec<Vec<CMatrix>> {
    let group = config.group();
    let dim = group.dim();
    let rank = config.points.len();
    let jac = moment_jacobian(config);
    // kernel of J = null space of J^T J
    let gram = jac.transpose() * &jac;
    let eig = gram.symmetric_eigen();
    // eigenvalues are σ², so rounding noise sits near ε·λ_max
    let cutoff = tol * eig.eigenvalues.max().max(1.0);
    let mut out = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= cutoff {
            let col = eig.eigenvectors.column(k);
            let tuple = (0..rank)
                .map(|i| {
                    let coords: Vec<f64> = (0..dim).map(|d| col[i * dim + d]).collect();
                    group.from_coordinates(&coords)
                })
                .collect();
            out.push(tuple);
        }
    }
    out
}

/// Options for [`project_to_fiber`].
#[derive(Debug, Clone, Copy)]
pub struct FiberOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Singular values below `pinv_threshold · σ_max` are dropped.
    pub pinv_threshold: f64,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions {
            max_iter: 50,
            tol: 1e-10,
            pinv_threshold: 1e-8,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiberSolution {
    pub config: Configuration,
    pub residual: f64,
    pub iterations: usize,
    /// Trial steps rejected because the logarithm hit its branch cut.
    pub branch_cut_rejections: usize,
}

#[derive(Debug, Clone, Error)]
pub enum ProjectionError {
    #[error("no convergence after {iterations} iterations: {reason} (best residual {residual:.3e})", iterations = best.iterations, residual = best.residual)]
    NoConvergence {
        best: Box<FiberSolution>,
        reason: String,
    },
    #[error("residual undefined at the start point: {0}")]
    BranchCutAtStart(LieError),
}

/// `r(c) = log(β^{-1} Φ(c))`, projected to `su(n)`.
pub fn fiber_residual(config: &Configuration, beta: &CentralElement) -> Result<CMatrix, LieError> {
    let m = beta.point().inverse().mul(&moment_map(config));
    Ok(project_algebra(&log_unitary(m.matrix())?))
}

/// Gauss–Newton on `r(c) = log(β^{-1} Φ(c))` with the right-exponential
/// retraction `X_i ← X_i exp(δ_i)`, a pseudo-inverse solve, and step
/// halving whenever the residual does not decrease.
pub fn project_to_fiber(
    start: &Configuration,
    beta: &CentralElement,
    opts: FiberOptions,
) -> Result<FiberSolution, ProjectionError> {
    let group = start.group();
    let dim = group.dim();
    let rank = start.points.len();

    let mut current = start.clone();
    let mut r = fiber_residual(&current, beta).map_err(ProjectionError::BranchCutAtStart)?;
    let mut norm = r.norm();
    let mut rejections = 0;

    let solution = |config: &Configuration, residual, iterations, rejections| FiberSolution {
        config: config.clone(),
        residual,
        iterations,
        branch_cut_rejections: rejections,
    };

    for iter in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(solution(&current, norm, iter, rejections));
        }
        let jac = moment_jacobian(&current);
        let svd = SVD::new(jac, true, true);
        let smax = svd.singular_values.max();
        if smax <= f64::EPSILON {
            return Err(ProjectionError::NoConvergence {
                best: Box::new(solution(&current, norm, iter, rejections)),
                reason: "moment map differential vanishes (critical point)".into(),
            });
        }
        let rhs = nalgebra::DVector::from_vec(group.coordinates(&r));
        let step = svd
            .solve(&rhs, opts.pinv_threshold * smax)
            .expect("U and V^T were computed");

        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..=opts.max_halvings {
            let delta: Vec<CMatrix> = (0..rank)
                .map(|i| {
                    let coords: Vec<f64> = (0..dim).map(|d| -alpha * step[i * dim + d]).collect();
                    group.from_coordinates(&coords)
                })
                .collect();
            let trial = current.retract(&delta);
            match fiber_residual(&trial, beta) {
                Ok(tr) if tr.norm() < norm => {
                    accepted = Some((trial, tr));
                    break;
                }
                Ok(_) => {}
                Err(_) => rejections += 1,
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, tr)) => {
                current = trial;
                norm = tr.norm();
                r = tr;
            }
            None => {
                return Err(ProjectionError::NoConvergence {
                    best: Box::new(solution(&current, norm, iter, rejections)),
                    reason: "no decreasing step after damping".into(),
                });
            }
        }
    }
    if norm <= opts.tol {
        return Ok(solution(&current, norm, opts.max_iter, rejections));
    }
    Err(ProjectionError::NoConvergence {
        best: Box::new(solution(&current, norm, opts.max_iter, rejections)),
        reason: format!("iteration limit {} reached", opts.max_iter),
    })
}
