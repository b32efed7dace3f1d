//! Inhomogeneous bar model `NG(m) = G^m`: face maps, the chain boundary and
//! the signed face list of the cochain coboundary.
//!
//! Everything is parameterized by a [`GroupOracle`], so the same chain
//! algebra runs over the free group (exact), the surface group (exact, via
//! Dehn's algorithm) or a matrix group (tolerance based).

use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freegroup::{Genus, Word, WordError};
use crate::liegroup::{GroupPoint, SpecialUnitary};
use crate::surfacegroup::{DehnError, SurfacePresentation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BarError {
    #[error("face index {index} out of range 0..={degree}")]
    FaceOutOfRange { index: usize, degree: usize },
    #[error("face maps need a tuple of length >= 1")]
    EmptyTuple,
    #[error("tuple of length {got} in a chain of degree {degree}")]
    DegreeMismatch { got: usize, degree: usize },
    #[error("malformed chain: {0}")]
    Malformed(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Abstract group interface used by the bar machinery.
pub trait GroupOracle {
    type Element: Clone + Debug;

    fn identity(&self) -> Self::Element;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn invert(&self, a: &Self::Element) -> Self::Element;
    fn equals(&self, a: &Self::Element, b: &Self::Element) -> bool;
}

/// Exact arithmetic in the free group.
#[derive(Debug, Clone, Copy)]
pub struct FreeGroupOracle {
    pub genus: Genus,
}

impl GroupOracle for FreeGroupOracle {
    type Element = Word;

    fn identity(&self) -> Word {
        Word::identity(self.genus)
    }

    fn multiply(&self, a: &Word, b: &Word) -> Word {
        a.concat(b)
    }

    fn invert(&self, a: &Word) -> Word {
        a.inverse()
    }

    fn equals(&self, a: &Word, b: &Word) -> bool {
        a == b
    }
}

/// Free-group words compared in the surface group.
#[derive(Debug, Clone)]
pub struct SurfaceGroupOracle {
    presentation: SurfacePresentation,
}

impl SurfaceGroupOracle {
    pub fn new(genus: Genus) -> Result<Self, DehnError> {
        if genus.get() < 2 {
            return Err(DehnError::UnsupportedGenus(genus.get()));
        }
        Ok(SurfaceGroupOracle {
            presentation: SurfacePresentation::new(genus),
        })
    }

    pub fn presentation(&self) -> &SurfacePresentation {
        &self.presentation
    }
}

impl GroupOracle for SurfaceGroupOracle {
    type Element = Word;

    fn identity(&self) -> Word {
        Word::identity(self.presentation.genus())
    }

    fn multiply(&self, a: &Word, b: &Word) -> Word {
        a.concat(b)
    }

    fn invert(&self, a: &Word) -> Word {
        a.inverse()
    }

    fn equals(&self, a: &Word, b: &Word) -> bool {
        self.presentation
            .equals(a, b)
            .expect("genus checked at construction")
    }
}

/// SU(n) matrices compared up to a Frobenius-norm tolerance.
#[derive(Debug, Clone, Copy)]
pub struct MatrixGroupOracle {
    pub group: SpecialUnitary,
    pub tol: f64,
}

impl MatrixGroupOracle {
    pub fn new(group: SpecialUnitary) -> Self {
        MatrixGroupOracle { group, tol: 1e-9 }
    }
}

impl GroupOracle for MatrixGroupOracle {
    type Element = GroupPoint;

    fn identity(&self) -> GroupPoint {
        self.group.identity()
    }

    fn multiply(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        a.mul(b)
    }

    fn invert(&self, a: &GroupPoint) -> GroupPoint {
        a.inverse()
    }

    fn equals(&self, a: &GroupPoint, b: &GroupPoint) -> bool {
        a.distance(b) <= self.tol
    }
}

/// Integer combination of `m`-tuples of group elements.
#[derive(Debug, Clone)]
pub struct BarChain<E> {
    degree: usize,
    terms: Vec<(Vec<E>, i64)>,
}

impl<E: Clone + Debug> BarChain<E> {
    pub fn zero(degree: usize) -> Self {
        BarChain {
            degree,
            terms: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Vec<E>, i64)] {
        &self.terms
    }

    /// Adds `coefficient · tuple`, merging with an existing tuple that is
    /// equal entrywise under `eq`.
    fn add_term_by(&mut self, tuple: Vec<E>, coefficient: i64, eq: &impl Fn(&E, &E) -> bool) {
        assert_eq!(tuple.len(), self.degree, "tuple length must equal degree");
        if coefficient == 0 {
            return;
        }
        let pos = self
            .terms
            .iter()
            .position(|(t, _)| t.iter().zip(&tuple).all(|(a, b)| eq(a, b)));
        match pos {
            Some(k) => {
                self.terms[k].1 += coefficient;
                if self.terms[k].1 == 0 {
                    self.terms.remove(k);
                }
            }
            None => self.terms.push((tuple, coefficient)),
        }
    }

    /// Collects terms using the oracle's equality.
    pub fn collect<O: GroupOracle<Element = E>>(&self, oracle: &O) -> Self {
        let mut out = BarChain::zero(self.degree);
        let eq = |a: &E, b: &E| oracle.equals(a, b);
        for (t, c) in &self.terms {
            out.add_term_by(t.clone(), *c, &eq);
        }
        out
    }

    /// Integer combination, collecting with the oracle's equality.
    pub fn from_terms<O: GroupOracle<Element = E>>(
        oracle: &O,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<E>, i64)>,
    ) -> Result<Self, BarError> {
        let mut out = BarChain::zero(degree);
        let eq = |a: &E, b: &E| oracle.equals(a, b);
        for (t, c) in terms {
            if t.len() != degree {
                return Err(BarError::DegreeMismatch {
                    got: t.len(),
                    degree,
                });
            }
            out.add_term_by(t, c, &eq);
        }
        Ok(out)
    }
}

impl<E: Clone + Debug + PartialEq> BarChain<E> {
    /// Collects terms by structural equality. Panics on a tuple of the wrong length.
    pub fn from_raw_terms(degree: usize, terms: impl IntoIterator<Item = (Vec<E>, i64)>) -> Self {
        let mut out = BarChain::zero(degree);
        let eq = |a: &E, b: &E| a == b;
        for (t, c) in terms {
            out.add_term_by(t, c, &eq);
        }
        out
    }

    pub fn coefficient(&self, tuple: &[E]) -> i64 {
        self.terms
            .iter()
            .find(|(t, _)| t.as_slice() == tuple)
            .map_or(0, |(_, c)| *c)
    }
}

/// The face map `ε_i : G^m -> G^{m-1}`.
pub fn face<O: GroupOracle>(
    oracle: &O,
    i: usize,
    tuple: &[O::Element],
) -> Result<Vec<O::Element>, BarError> {
    let m = tuple.len();
    if m == 0 {
        return Err(BarError::EmptyTuple);
    }
    if i > m {
        return Err(BarError::FaceOutOfRange {
            index: i,
            degree: m,
        });
    }
    Ok(if i == 0 {
        tuple[1..].to_vec()
    } else if i == m {
        tuple[..m - 1].to_vec()
    } else {
        let mut out = Vec::with_capacity(m - 1);
        out.extend_from_slice(&tuple[..i - 1]);
        out.push(oracle.multiply(&tuple[i - 1], &tuple[i]));
        out.extend_from_slice(&tuple[i + 1..]);
        out
    })
}

/// `∂c = Σ_{i=0}^{m} (-1)^i ε_i(c)`.
pub fn boundary<O: GroupOracle>(
    oracle: &O,
    chain: &BarChain<O::Element>,
) -> Result<BarChain<O::Element>, BarError> {
    let m = chain.degree();
    if m == 0 {
        return Err(BarError::EmptyTuple);
    }
    let mut raw = Vec::with_capacity(chain.len() * (m + 1));
    for (tuple, c) in chain.terms() {
        for (sign, i) in coboundary_indices(m - 1) {
            raw.push((face(oracle, i, tuple)?, sign * c));
        }
    }
    BarChain::from_terms(oracle, m - 1, raw)
}

/// Signed faces `((-1)^i, i)` for `i = 0..=q+1`, the coboundary
/// `δ = Σ (-1)^i ε_i^*` from degree `q` to `q+1`.
pub fn coboundary_indices(q: usize) -> Vec<(i64, usize)> {
    (0..=q + 1)
        .map(|i| (if i % 2 == 0 { 1 } else { -1 }, i))
        .collect()
}

/// Projection from the homogeneous model `G^{m+1}` to the inhomogeneous
/// model `G^m`: `(k_0, …, k_m) ↦ (k_0 k_1^{-1}, …, k_{m-1} k_m^{-1})`.
pub fn homogeneous_to_inhomogeneous<O: GroupOracle>(
    oracle: &O,
    tuple: &[O::Element],
) -> Vec<O::Element> {
    tuple
        .windows(2)
        .map(|w| oracle.multiply(&w[0], &oracle.invert(&w[1])))
        .collect()
}

/// Whether `∂(Σ_i ∂R/∂x_i ⊗ x_i)` vanishes in the surface group.
pub fn is_cycle_mod_relator(genus: Genus) -> Result<bool, DehnError> {
    let oracle = SurfaceGroupOracle::new(genus)?;
    let c = crate::freegroup::fundamental_cycle(genus);
    let b = boundary(&oracle, &c).expect("degree 2 chain");
    Ok(b.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SerializedTerm {
    coefficient: i64,
    tuple: Vec<String>,
}

impl BarChain<Word> {
    /// JSON list of `{coefficient, tuple}` with words in the text grammar.
    pub fn to_json(&self) -> String {
        let terms: Vec<SerializedTerm> = self
            .terms
            .iter()
            .map(|(t, c)| SerializedTerm {
                coefficient: *c,
                tuple: t.iter().map(|w| w.to_string()).collect(),
            })
            .collect();
        serde_json::to_string(&terms).expect("plain data serializes")
    }

    pub fn from_json(genus: Genus, degree: usize, s: &str) -> Result<Self, BarError> {
        let terms: Vec<SerializedTerm> =
            serde_json::from_str(s).map_err(|e| BarError::Malformed(e.to_string()))?;
        let mut raw = Vec::with_capacity(terms.len());
        for t in terms {
            let tuple = t
                .tuple
                .iter()
                .map(|w| Word::parse(genus, w))
                .collect::<Result<Vec<_>, _>>()?;
            raw.push((tuple, t.coefficient));
        }
        BarChain::from_terms(&FreeGroupOracle { genus }, degree, raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::{fundamental_cycle, relator, telescope, FormalWordSum};

    fn g(n: usize) -> Genus {
        Genus::new(n).unwrap()
    }

    fn w(genus: usize, s: &str) -> Word {
        Word::parse(g(genus), s).unwrap()
    }

    #[test]
    fn face_examples() {
        let f = FreeGroupOracle { genus: g(2) };
        let (a, b) = (w(2, "x1 x3"), w(2, "x3^-1 x2"));
        assert_eq!(face(&f, 1, &[a.clone(), b.clone()]).unwrap(), vec![w(2, "x1 x2")]);
        assert_eq!(face(&f, 0, &[a.clone(), b.clone()]).unwrap(), vec![b.clone()]);
        assert_eq!(face(&f, 2, &[a.clone(), b.clone()]).unwrap(), vec![a.clone()]);
        assert_eq!(
            face(&f, 3, &[a.clone(), b]),
            Err(BarError::FaceOutOfRange { index: 3, degree: 2 })
        );
        assert_eq!(face(&f, 0, &[]), Err(BarError::EmptyTuple));
    }

    #[test]
    fn boundary_of_pair() {
        let f = FreeGroupOracle { genus: g(2) };
        let (a, b) = (w(2, "x1"), w(2, "x2"));
        let c = BarChain::from_raw_terms(2, [(vec![a.clone(), b.clone()], 1)]);
        let d = boundary(&f, &c).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.coefficient(&[b]), 1);
        assert_eq!(d.coefficient(&[w(2, "x1 x2")]), -1);
        assert_eq!(d.coefficient(&[a]), 1);
    }

    #[test]
    fn boundary_of_fundamental_cycle_is_minus_telescope() {
        for n in 1..=5 {
            let genus = g(n);
            let f = FreeGroupOracle { genus };
            let d = boundary(&f, &fundamental_cycle(genus)).unwrap();
            let as_sum: FormalWordSum = d
                .terms()
                .iter()
                .map(|(t, c)| (t[0].clone(), *c))
                .collect();
            assert_eq!(as_sum, -telescope(genus));
            assert_eq!(d.coefficient(&[Word::identity(genus)]), 1);
            assert_eq!(d.coefficient(&[relator(genus)]), -1);
            assert_eq!(d.len(), 2);
        }
    }

    #[test]
    fn fundamental_cycle_closes_in_surface_group() {
        for n in 2..=4 {
            assert!(is_cycle_mod_relator(g(n)).unwrap());
        }
        assert_eq!(is_cycle_mod_relator(g(1)), Err(DehnError::UnsupportedGenus(1)));
        let f = FreeGroupOracle { genus: g(2) };
        assert!(!boundary(&f, &fundamental_cycle(g(2))).unwrap().is_zero());
    }

    #[test]
    fn coboundary_signs() {
        assert_eq!(coboundary_indices(1), vec![(1, 0), (-1, 1), (1, 2)]);
        assert_eq!(coboundary_indices(0), vec![(1, 0), (-1, 1)]);
    }

    #[test]
    fn projection_commutes_with_faces() {
        let f = FreeGroupOracle { genus: g(2) };
        let k: Vec<Word> = ["x1", "x2 x3", "x4^-1", "x1 x1"].iter().map(|s| w(2, s)).collect();
        let q = homogeneous_to_inhomogeneous(&f, &k);
        assert_eq!(q.len(), 3);
        for i in 0..k.len() {
            let mut dropped = k.clone();
            dropped.remove(i);
            assert_eq!(homogeneous_to_inhomogeneous(&f, &dropped), face(&f, i, &q).unwrap());
        }
    }

    #[test]
    fn matrix_oracle_boundary_squares_to_zero() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let group = SpecialUnitary::su2();
        let oracle = MatrixGroupOracle::new(group);
        let tuple: Vec<GroupPoint> = (0..3).map(|_| group.haar(&mut rng)).collect();
        let c = BarChain::from_terms(&oracle, 3, [(tuple, 1)]).unwrap();
        let dd = boundary(&oracle, &boundary(&oracle, &c).unwrap()).unwrap();
        assert!(dd.is_zero());
        let a = group.haar(&mut rng);
        assert!(oracle.equals(&oracle.multiply(&a, &oracle.invert(&a)), &oracle.identity()));
    }

    #[test]
    fn json_round_trip() {
        let c = fundamental_cycle(g(2));
        let s = c.to_json();
        assert!(s.contains("\"coefficient\":-1"));
        let back = BarChain::from_json(g(2), 2, &s).unwrap();
        assert_eq!(back.terms(), c.terms());
        assert!(BarChain::from_json(g(2), 1, &s).is_err());
        assert!(BarChain::from_json(g(2), 2, "{").is_err());
    }
}
