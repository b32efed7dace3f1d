//! Pointwise differential forms on products of SU(n).
//!
//! A [`MultiForm`] of arity `k` on `K^m` is evaluated at a point of `K^m`
//! on `k` tangent vectors, each a tuple of `m` left-trivialized Lie algebra
//! elements. On top of that sit
//!
//! * the degree-3 generator `ω₃ = tr(θ³)` on `K`,
//! * the cross-term 2-form `μ·tr(θ_g ∧ θ̄_h)` on `K²` (`θ̄` the right
//!   Maurer–Cartan form), its simplicial primitive,
//! * the coboundary `δ = Σ (-1)^i ε_i^*` on form-valued cochains,
//! * an exterior derivative via the Cartan formula on left-invariant fields,
//! * the 2-form `ā′ = Σ_{i,τ} (-1)^τ (ev_{γ^τ_i} × ev_{x_i})^* ω₂` on
//!   `K^{2g}`, whose derivative is checked against `Φ^*ω₃`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::barcomplex::{coboundary_indices, face, MatrixGroupOracle};
use crate::freegroup::{gamma, relator, Genus, Word};
use crate::liegroup::{
    bracket, evaluate_on, pushforward_on, CMatrix, Configuration, GroupPoint, SpecialUnitary,
};

/// One tangent vector on `K^m`: `m` left-trivialized algebra elements.
pub type Tangent = Vec<CMatrix>;

/// Maximum relative least-squares residual accepted by [`calibrate_pw`].
pub const CALIBRATION_TOL: f64 = 1e-5;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormsError {
    #[error("calibration residual {residual:.3e} exceeds {tol:.1e} (fitted mu = {mu})")]
    CalibrationFailed { mu: f64, residual: f64, tol: f64 },
    #[error("calibration has no informative samples")]
    NoCalibrationData,
}

/// An alternating multilinear form, evaluated pointwise.
pub trait MultiForm: Send + Sync {
    fn arity(&self) -> usize;
    /// Number of group factors `m` of the domain `K^m`.
    fn factors(&self) -> usize;
    fn eval(&self, point: &[GroupPoint], tangents: &[Tangent]) -> f64;
}

impl<F: MultiForm + ?Sized> MultiForm for &F {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn factors(&self) -> usize {
        (**self).factors()
    }
    fn eval(&self, point: &[GroupPoint], tangents: &[Tangent]) -> f64 {
        (**self).eval(point, tangents)
    }
}

fn re_trace3(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> f64 {
    (a * b * c).trace().re
}

fn re_trace2(a: &CMatrix, b: &CMatrix) -> f64 {
    // Re tr(ab) without forming the product
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// `Σ_{σ∈S₃} sgn(σ) Re tr(ξ_{σ1} ξ_{σ2} ξ_{σ3})`.
pub fn eval_omega3(x1: &CMatrix, x2: &CMatrix, x3: &CMatrix) -> f64 {
    re_trace3(x1, x2, x3) + re_trace3(x2, x3, x1) + re_trace3(x3, x1, x2)
        - re_trace3(x2, x1, x3)
        - re_trace3(x1, x3, x2)
        - re_trace3(x3, x2, x1)
}

/// `λ·tr(θ³)` on `K`; left-invariant, so the base point is ignored.
#[derive(Debug, Clone, Copy)]
pub struct TransgressionForm3 {
    pub lambda: f64,
}

impl Default for TransgressionForm3 {
    fn default() -> Self {
        TransgressionForm3 { lambda: 1.0 }
    }
}

impl MultiForm for TransgressionForm3 {
    fn arity(&self) -> usize {
        3
    }
    fn factors(&self) -> usize {
        1
    }
    fn eval(&self, _point: &[GroupPoint], t: &[Tangent]) -> f64 {
        self.lambda * eval_omega3(&t[0][0], &t[1][0], &t[2][0])
    }
}

/// `μ·tr(θ_g ∧ θ̄_h)` on `K²` at `(g, h)`:
/// `μ [Re tr(a₁ Ad(h) b₂) - Re tr(a₂ Ad(h) b₁)]` for tangents `(a_k, b_k)`.
#[derive(Debug, Clone, Copy)]
pub struct CrossTermForm {
    pub mu: f64,
}

impl MultiForm for CrossTermForm {
    fn arity(&self) -> usize {
        2
    }
    fn factors(&self) -> usize {
        2
    }
    fn eval(&self, point: &[GroupPoint], t: &[Tangent]) -> f64 {
        let h = &point[1];
        let right1 = h.adjoint_action(&t[0][1]);
        let right2 = h.adjoint_action(&t[1][1]);
        self.mu * (re_trace2(&t[0][0], &right2) - re_trace2(&t[1][0], &right1))
    }
}

/// Constant-coefficient left-invariant 1-form `Re tr(A ξ_j)` on factor `j` of `K^m`.
#[derive(Debug, Clone)]
pub struct LeftInvariantOneForm {
    pub coefficient: CMatrix,
    pub factor: usize,
    pub factors: usize,
}

impl MultiForm for LeftInvariantOneForm {
    fn arity(&self) -> usize {
        1
    }
    fn factors(&self) -> usize {
        self.factors
    }
    fn eval(&self, _point: &[GroupPoint], t: &[Tangent]) -> f64 {
        re_trace2(&self.coefficient, &t[0][self.factor])
    }
}

/// A smooth function on `K^m`, as a 0-form.
pub struct FunctionForm<F> {
    pub factors: usize,
    pub f: F,
}

impl<F: Fn(&[GroupPoint]) -> f64 + Send + Sync> MultiForm for FunctionForm<F> {
    fn arity(&self) -> usize {
        0
    }
    fn factors(&self) -> usize {
        self.factors
    }
    fn eval(&self, point: &[GroupPoint], _t: &[Tangent]) -> f64 {
        (self.f)(point)
    }
}

/// Pushforward of a left-trivialized tangent under `ε_i`. The merged slot
/// `k_i k_{i+1}` receives `Ad(k_{i+1}^{-1}) ξ_i + ξ_{i+1}`.
pub fn face_tangent(i: usize, point: &[GroupPoint], tangent: &[CMatrix]) -> Tangent {
    let m = point.len();
    if i == 0 {
        tangent[1..].to_vec()
    } else if i == m {
        tangent[..m - 1].to_vec()
    } else {
        let mut out = Vec::with_capacity(m - 1);
        out.extend_from_slice(&tangent[..i - 1]);
        let next_inv = point[i].inverse();
        out.push(next_inv.adjoint_action(&tangent[i - 1]) + &tangent[i]);
        out.extend_from_slice(&tangent[i + 1..]);
        out
    }
}

/// `δf = Σ_{i=0}^{q+1} (-1)^i ε_i^* f`, a form on `K^{q+1}`.
#[derive(Debug, Clone)]
pub struct DeltaPullback<F> {
    pub inner: F,
}

impl<F: MultiForm> MultiForm for DeltaPullback<F> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }
    fn factors(&self) -> usize {
        self.inner.factors() + 1
    }
    fn eval(&self, point: &[GroupPoint], tangents: &[Tangent]) -> f64 {
        let group = point[0].group();
        let oracle = MatrixGroupOracle::new(group);
        let q = self.inner.factors();
        coboundary_indices(q)
            .into_iter()
            .map(|(sign, i)| {
                let p = face(&oracle, i, point).expect("face index in range");
                let t: Vec<Tangent> = tangents
                    .iter()
                    .map(|v| face_tangent(i, point, v))
                    .collect();
                sign as f64 * self.inner.eval(&p, &t)
            })
            .sum()
    }
}

/// `δ` applied to a form on `K^q`.
pub fn delta_pullback<F: MultiForm>(f: F) -> DeltaPullback<F> {
    DeltaPullback { inner: f }
}

/// `(ev_{w_1} × … × ev_{w_m})^* f`, a form on `K^{2g}`.
#[derive(Debug, Clone)]
pub struct WordMapPullback<F> {
    pub genus: Genus,
    pub words: Vec<Word>,
    pub form: F,
}

impl<F: MultiForm> MultiForm for WordMapPullback<F> {
    fn arity(&self) -> usize {
        self.form.arity()
    }
    fn factors(&self) -> usize {
        self.genus.rank()
    }
    fn eval(&self, point: &[GroupPoint], tangents: &[Tangent]) -> f64 {
        let mut images = Vec::with_capacity(self.words.len());
        let mut pushed: Vec<Tangent> = vec![Vec::with_capacity(self.words.len()); tangents.len()];
        for w in &self.words {
            images.push(evaluate_on(w, point));
            for (k, v) in tangents.iter().enumerate() {
                pushed[k].push(pushforward_on(w, point, v).1);
            }
        }
        self.form.eval(&images, &pushed)
    }
}

/// `ā′ = Σ_{i=1}^{2g} Σ_{τ=0,1} (-1)^τ (ev_{γ^τ_i} × ev_{x_i})^* ω₂`.
#[derive(Debug, Clone)]
pub struct AbtwPrimitive {
    genus: Genus,
    terms: Vec<(f64, WordMapPullback<CrossTermForm>)>,
}

impl AbtwPrimitive {
    pub fn new(genus: Genus, omega2: CrossTermForm) -> Self {
        let mut terms = Vec::with_capacity(2 * genus.rank());
        for i in 1..=genus.rank() {
            let x = Word::generator(genus, i).expect("index in range");
            for tau in 0..=1u8 {
                let sign = if tau == 0 { 1.0 } else { -1.0 };
                let words = vec![gamma(tau, i, genus).expect("index in range"), x.clone()];
                terms.push((
                    sign,
                    WordMapPullback {
                        genus,
                        words,
                        form: omega2,
                    },
                ));
            }
        }
        AbtwPrimitive { genus, terms }
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    /// Number of pullback terms, `4g`.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

impl MultiForm for AbtwPrimitive {
    fn arity(&self) -> usize {
        2
    }
    fn factors(&self) -> usize {
        self.genus.rank()
    }
    fn eval(&self, point: &[GroupPoint], tangents: &[Tangent]) -> f64 {
        self.terms
            .iter()
            .map(|(sign, t)| sign * t.eval(point, tangents))
            .sum()
    }
}

/// `ā′` evaluated on the tangent pair `(v, w)` at a configuration.
pub fn eval_abtw_primitive(prim: &AbtwPrimitive, config: &Configuration, v: &Tangent, w: &Tangent) -> f64 {
    prim.eval(config.points(), &[v.clone(), w.clone()])
}

/// Exterior derivative together with the magnitude of the terms that
/// entered it (for relative error estimates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub scale: f64,
}

/// Cartan formula on left-invariant extensions of the `k+1` tangents:
///
/// `df(X_0..X_k) = Σ_i (-1)^i X_i f(..X̂_i..) + Σ_{i<j} (-1)^{i+j} f([X_i,X_j], ..X̂_i..X̂_j..)`
///
/// Directional derivatives are central differences along `p·exp(tξ)`;
/// brackets of left-invariant fields are factorwise matrix commutators.
pub fn exterior_derivative_detailed<F: MultiForm + ?Sized>(
    f: &F,
    point: &[GroupPoint],
    tangents: &[Tangent],
    h: f64,
) -> Derivative {
    assert!(h > 0.0, "step must be positive");
    let k1 = tangents.len();
    assert_eq!(k1, f.arity() + 1, "need arity + 1 tangents");
    let mut value = 0.0;
    let mut scale = 0.0;
    let shift = |t: f64, xi: &Tangent| -> Vec<GroupPoint> {
        point
            .iter()
            .zip(xi)
            .map(|(p, x)| p.retract(&(x * num_complex::Complex64::new(t, 0.0))))
            .collect()
    };
    for i in 0..k1 {
        let rest: Vec<Tangent> = tangents
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, t)| t.clone())
            .collect();
        let fp = f.eval(&shift(h, &tangents[i]), &rest);
        let fm = f.eval(&shift(-h, &tangents[i]), &rest);
        let term = (fp - fm) / (2.0 * h);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * term;
        scale += term.abs();
    }
    for i in 0..k1 {
        for j in (i + 1)..k1 {
            let br: Tangent = tangents[i]
                .iter()
                .zip(&tangents[j])
                .map(|(a, b)| bracket(a, b))
                .collect();
            let mut args = vec![br];
            args.extend(
                tangents
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != i && l != j)
                    .map(|(_, t)| t.clone()),
            );
            let term = f.eval(point, &args);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            value += sign * term;
            scale += term.abs();
        }
    }
    Derivative { value, scale }
}

pub fn exterior_derivative<F: MultiForm + ?Sized>(
    f: &F,
    point: &[GroupPoint],
    tangents: &[Tangent],
    h: f64,
) -> f64 {
    exterior_derivative_detailed(f, point, tangents, h).value
}

/// Random tangent on `K^m` with independent Gaussian coordinates.
pub fn random_tangent<R: Rng + ?Sized>(group: SpecialUnitary, factors: usize, rng: &mut R) -> Tangent {
    (0..factors).map(|_| group.random_algebra(rng)).collect()
}

/// One sample of the relation `δω₃ + d(μ ω₂) = 0` on `K²`.
#[derive(Debug, Clone)]
pub struct ShulmanSample {
    pub point: Vec<GroupPoint>,
    pub tangents: Vec<Tangent>,
}

impl ShulmanSample {
    pub fn random<R: Rng + ?Sized>(group: SpecialUnitary, rng: &mut R) -> Self {
        let point = vec![group.haar(rng), group.haar(rng)];
        let tangents = (0..3).map(|_| random_tangent(group, 2, rng)).collect();
        ShulmanSample { point, tangents }
    }

    /// `(δω₃, d ω₂⁰, scale)` with `ω₂⁰` the unit-coefficient cross term.
    pub fn terms(&self, h: f64) -> (f64, f64, f64) {
        let delta = delta_pullback(TransgressionForm3::default()).eval(&self.point, &self.tangents);
        let d = exterior_derivative_detailed(&CrossTermForm { mu: 1.0 }, &self.point, &self.tangents, h);
        (delta, d.value, d.scale.max(delta.abs()))
    }

    /// `|δω₃ + μ dω₂⁰|` and its scale.
    pub fn residual(&self, mu: f64, h: f64) -> (f64, f64) {
        let (delta, d, scale) = self.terms(h);
        ((delta + mu * d).abs(), scale.max((mu * d).abs()))
    }

    fn is_degenerate(&self) -> bool {
        self.tangents.iter().all(|t| t[1].norm() == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub mu: f64,
    /// `‖δω₃ + μ dω₂⁰‖ / ‖δω₃‖` over the fitted samples.
    pub relative_residual: f64,
    pub samples: usize,
    pub excluded: usize,
}

/// Least-squares fit of `μ` in `δω₃ = -d(μ ω₂⁰)` over the given samples.
pub fn calibrate_on(samples: &[ShulmanSample], h: f64) -> Result<Calibration, FormsError> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut excluded = 0;
    for s in samples {
        if s.is_degenerate() {
            excluded += 1;
            continue;
        }
        let (delta, d, _) = s.terms(h);
        rows.push((-d, delta));
    }
    let ata: f64 = rows.iter().map(|(a, _)| a * a).sum();
    if rows.is_empty() || ata == 0.0 {
        return Err(FormsError::NoCalibrationData);
    }
    let atb: f64 = rows.iter().map(|(a, b)| a * b).sum();
    let mu = atb / ata;
    let res2: f64 = rows.iter().map(|(a, b)| (b - mu * a).powi(2)).sum();
    let norm2: f64 = rows.iter().map(|(_, b)| b * b).sum();
    let relative_residual = (res2 / norm2).sqrt();
    let cal = Calibration {
        mu,
        relative_residual,
        samples: rows.len(),
        excluded,
    };
    if relative_residual > CALIBRATION_TOL {
        return Err(FormsError::CalibrationFailed {
            mu,
            residual: relative_residual,
            tol: CALIBRATION_TOL,
        });
    }
    Ok(cal)
}

/// Calibrates `μ` on `samples` random tuples drawn from `seed`.
pub fn calibrate_pw(group: SpecialUnitary, seed: u64, samples: usize, h: f64) -> Result<Calibration, FormsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<ShulmanSample> = (0..samples).map(|_| ShulmanSample::random(group, &mut rng)).collect();
    calibrate_on(&data, h)
}

/// `ω₃(Φ(c); dΦ(t₀), dΦ(t₁), dΦ(t₂))`.
pub fn moment_pullback_omega3(config: &Configuration, triple: &[Tangent]) -> f64 {
    let pullback = WordMapPullback {
        genus: config.genus(),
        words: vec![relator(config.genus())],
        form: TransgressionForm3::default(),
    };
    pullback.eval(config.points(), triple)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub scale: f64,
}

impl IdentityCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

/// Compares `dā′(t₀, t₁, t₂)` (finite differences) with `Φ^*ω₃(t₀, t₁, t₂)` (exact).
pub fn verify_main_identity(
    prim: &AbtwPrimitive,
    config: &Configuration,
    triple: &[Tangent],
    h: f64,
) -> IdentityCheck {
    let d = exterior_derivative_detailed(prim, config.points(), triple, h);
    let rhs = moment_pullback_omega3(config, triple);
    IdentityCheck {
        lhs: d.value,
        rhs,
        residual: (d.value - rhs).abs(),
        scale: d.scale.max(rhs.abs()),
    }
}
