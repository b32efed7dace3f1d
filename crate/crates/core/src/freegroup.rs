//! Exact arithmetic in the free group on `2g` generators.
//!
//! Words are kept freely reduced at all times, so equality of [`Word`]s is
//! equality of letter sequences. Integer combinations of words
//! ([`FormalWordSum`]) carry Fox derivatives and the signed word tables
//! used to build the surface fundamental cycle.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barcomplex::BarChain;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("genus must be at least 1")]
    InvalidGenus,
    #[error("generator index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("genus mismatch: {left} vs {right}")]
    GenusMismatch { left: usize, right: usize },
    #[error("{name} must be one of {allowed}, got {value}")]
    BadSelector {
        name: &'static str,
        allowed: &'static str,
        value: usize,
    },
    #[error("cannot parse word: {0}")]
    Parse(String),
}

/// Genus of the closed surface; the free group has `2g` generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Genus(usize);

impl Genus {
    pub fn new(g: usize) -> Result<Self, WordError> {
        if g == 0 {
            return Err(WordError::InvalidGenus);
        }
        Ok(Genus(g))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Number of free generators, `2g`.
    pub fn rank(self) -> usize {
        2 * self.0
    }

    fn check_index(self, index: usize) -> Result<(), WordError> {
        if index == 0 || index > self.rank() {
            return Err(WordError::IndexOutOfRange {
                index,
                max: self.rank(),
            });
        }
        Ok(())
    }
}

impl TryFrom<usize> for Genus {
    type Error = WordError;
    fn try_from(g: usize) -> Result<Self, WordError> {
        Genus::new(g)
    }
}

impl From<Genus> for usize {
    fn from(g: Genus) -> usize {
        g.0
    }
}

impl fmt::Display for Genus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A generator `x_k` or its inverse. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    index: usize,
    inverse: bool,
}

impl Letter {
    pub fn new(index: usize, sign: i8) -> Self {
        assert!(index >= 1, "generator indices start at 1");
        assert!(sign == 1 || sign == -1, "letter sign must be +1 or -1");
        Letter {
            index,
            inverse: sign < 0,
        }
    }

    pub fn gen(index: usize) -> Self {
        Letter::new(index, 1)
    }

    pub fn inv(index: usize) -> Self {
        Letter::new(index, -1)
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn sign(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inverted(self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "x{}^-1", self.index)
        } else {
            write!(f, "x{}", self.index)
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    genus: Genus,
    letters: Vec<Letter>,
}

/// Appends `letters` to a reduced stack, cancelling as it goes.
fn push_reduced(stack: &mut Vec<Letter>, letters: impl IntoIterator<Item = Letter>) {
    for l in letters {
        match stack.last() {
            Some(&top) if top.cancels(l) => {
                stack.pop();
            }
            _ => stack.push(l),
        }
    }
}

impl Word {
    pub fn identity(genus: Genus) -> Self {
        Word {
            genus,
            letters: Vec::new(),
        }
    }

    pub fn generator(genus: Genus, index: usize) -> Result<Self, WordError> {
        Word::reduce(genus, [Letter::gen(index)])
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(genus: Genus, raw: impl IntoIterator<Item = Letter>) -> Result<Self, WordError> {
        let mut letters = Vec::new();
        for l in raw {
            genus.check_index(l.index)?;
            push_reduced(&mut letters, [l]);
        }
        Ok(Word { genus, letters })
    }

    /// Internal constructor for letter sequences already known to be in range.
    pub(crate) fn from_valid(genus: Genus, raw: impl IntoIterator<Item = Letter>) -> Self {
        let mut letters = Vec::new();
        push_reduced(&mut letters, raw);
        Word { genus, letters }
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Result<Word, WordError> {
        if self.genus != other.genus {
            return Err(WordError::GenusMismatch {
                left: self.genus.get(),
                right: other.genus.get(),
            });
        }
        Ok(self.concat(other))
    }

    /// Product for words of the same genus. Panics otherwise.
    pub(crate) fn concat(&self, other: &Word) -> Word {
        debug_assert_eq!(self.genus, other.genus);
        let mut letters = self.letters.clone();
        push_reduced(&mut letters, other.letters.iter().copied());
        Word {
            genus: self.genus,
            letters,
        }
    }

    pub fn inverse(&self) -> Word {
        Word {
            genus: self.genus,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// Exponent sum of each generator: the image in the abelianization `Z^{2g}`.
    pub fn abelianization(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.genus.rank()];
        for l in &self.letters {
            v[l.index - 1] += i64::from(l.sign());
        }
        v
    }

    /// Parses the word grammar: whitespace-separated `x<k>` / `x<k>^-1`,
    /// `1` for the identity, and `[u,v]` for the commutator of two tokens.
    pub fn parse(genus: Genus, s: &str) -> Result<Word, WordError> {
        let spaced = s
            .replace('[', " [ ")
            .replace(']', " ] ")
            .replace(',', " , ");
        let mut tokens = spaced.split_whitespace().peekable();
        let mut raw = Vec::new();
        while let Some(tok) = tokens.next() {
            if tok == "[" {
                let u = tokens
                    .next()
                    .ok_or_else(|| WordError::Parse("unterminated commutator".into()))?;
                expect_token(tokens.next(), ",")?;
                let v = tokens
                    .next()
                    .ok_or_else(|| WordError::Parse("unterminated commutator".into()))?;
                expect_token(tokens.next(), "]")?;
                let u = parse_token(u)?;
                let v = parse_token(v)?;
                let (u, v) = match (u, v) {
                    (Some(u), Some(v)) => (u, v),
                    // [1, v] and [u, 1] are trivial
                    _ => continue,
                };
                raw.extend([u, v, u.inverted(), v.inverted()]);
            } else if let Some(l) = parse_token(tok)? {
                raw.push(l);
            }
        }
        Word::reduce(genus, raw)
    }
}

fn expect_token(tok: Option<&str>, want: &str) -> Result<(), WordError> {
    match tok {
        Some(t) if t == want => Ok(()),
        Some(t) => Err(WordError::Parse(format!("expected `{want}`, found `{t}`"))),
        None => Err(WordError::Parse(format!("expected `{want}`, found end of input"))),
    }
}

fn parse_token(tok: &str) -> Result<Option<Letter>, WordError> {
    if tok == "1" {
        return Ok(None);
    }
    let body = tok
        .strip_prefix('x')
        .ok_or_else(|| WordError::Parse(format!("bad token `{tok}`")))?;
    let (digits, inverse) = match body.strip_suffix("^-1") {
        Some(d) => (d, true),
        None => (body, false),
    };
    let index: usize = digits
        .parse()
        .map_err(|_| WordError::Parse(format!("bad token `{tok}`")))?;
    if index == 0 {
        return Err(WordError::Parse(format!("bad token `{tok}`")));
    }
    Ok(Some(Letter {
        index,
        inverse,
    }))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Integer linear combination of reduced words, an element of `Z[F]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalWordSum {
    terms: BTreeMap<Word, i64>,
}

impl FormalWordSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(w: Word, coefficient: i64) -> Self {
        let mut s = Self::zero();
        s.add_term(w, coefficient);
        s
    }

    pub fn add_term(&mut self, w: Word, coefficient: i64) {
        if coefficient == 0 {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coefficient;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(coefficient);
            }
        }
    }

    pub fn coefficient(&self, w: &Word) -> i64 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct words with nonzero coefficient.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    /// Left multiplication `u · Σ c_w w = Σ c_w (uw)`.
    pub fn left_mul(&self, u: &Word) -> FormalWordSum {
        let mut out = FormalWordSum::zero();
        for (w, c) in self.iter() {
            out.add_term(u.concat(w), c);
        }
        out
    }

    /// Sum of all coefficients (the augmentation `Z[F] -> Z`).
    pub fn augmentation(&self) -> i64 {
        self.terms.values().sum()
    }
}

impl fmt::Display for FormalWordSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else { "+" };
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{sign}{}[{w}]", c.abs())?;
        }
        Ok(())
    }
}

impl Add for FormalWordSum {
    type Output = FormalWordSum;
    fn add(mut self, rhs: FormalWordSum) -> FormalWordSum {
        for (w, c) in rhs.terms {
            self.add_term(w, c);
        }
        self
    }
}

impl Neg for FormalWordSum {
    type Output = FormalWordSum;
    fn neg(mut self) -> FormalWordSum {
        for c in self.terms.values_mut() {
            *c = -*c;
        }
        self
    }
}

impl Sub for FormalWordSum {
    type Output = FormalWordSum;
    fn sub(self, rhs: FormalWordSum) -> FormalWordSum {
        self + (-rhs)
    }
}

impl FromIterator<(Word, i64)> for FormalWordSum {
    fn from_iter<I: IntoIterator<Item = (Word, i64)>>(iter: I) -> Self {
        let mut s = FormalWordSum::zero();
        for (w, c) in iter {
            s.add_term(w, c);
        }
        s
    }
}

/// Uniformly random letters, freely reduced; the result has length at most `max_len`.
pub fn random_word<R: Rng + ?Sized>(genus: Genus, max_len: usize, rng: &mut R) -> Word {
    let len = rng.random_range(0..=max_len);
    let letters = (0..len).map(|_| {
        let index = rng.random_range(1..=genus.rank());
        Letter::new(index, if rng.random::<bool>() { 1 } else { -1 })
    });
    Word::from_valid(genus, letters)
}

/// The surface relator `∏_{j=1}^g [x_{2j-1}, x_{2j}]`, of length `4g`.
pub fn relator(genus: Genus) -> Word {
    commutator_product(genus, genus.get())
}

/// `∏_{j=1}^{count} [x_{2j-1}, x_{2j}]`.
fn commutator_product(genus: Genus, count: usize) -> Word {
    let letters = (1..=count).flat_map(|j| {
        let (a, b) = (2 * j - 1, 2 * j);
        [Letter::gen(a), Letter::gen(b), Letter::inv(a), Letter::inv(b)]
    });
    Word::from_valid(genus, letters)
}

/// Fox derivative `∂w/∂x_i` as an element of `Z[F]`.
///
/// Uses the expansion `∂(l_1 … l_n)/∂x_i = Σ_k l_1 … l_{k-1} ∂l_k/∂x_i`
/// with `∂x_i/∂x_i = 1` and `∂x_i^{-1}/∂x_i = -x_i^{-1}`.
pub fn fox_derivative(w: &Word, i: usize) -> Result<FormalWordSum, WordError> {
    w.genus.check_index(i)?;
    let mut out = FormalWordSum::zero();
    let letters = w.letters();
    for (k, l) in letters.iter().enumerate() {
        if l.index != i {
            continue;
        }
        if l.inverse {
            out.add_term(Word::from_valid(w.genus, letters[..=k].iter().copied()), -1);
        } else {
            out.add_term(Word::from_valid(w.genus, letters[..k].iter().copied()), 1);
        }
    }
    Ok(out)
}

fn check_tau(tau: u8) -> Result<(), WordError> {
    if tau > 1 {
        return Err(WordError::BadSelector {
            name: "tau",
            allowed: "0|1",
            value: tau as usize,
        });
    }
    Ok(())
}

/// The words `γ^τ_i` with `∂R/∂x_i = γ^0_i - γ^1_i`.
pub fn gamma(tau: u8, i: usize, genus: Genus) -> Result<Word, WordError> {
    check_tau(tau)?;
    genus.check_index(i)?;
    // i = 2m-1 or 2m
    let m = i.div_ceil(2);
    let (a, b) = (2 * m - 1, 2 * m);
    let base = commutator_product(genus, m - 1);
    let tail: Vec<Letter> = match (i % 2 == 1, tau) {
        (true, 0) => vec![],
        (true, _) => vec![Letter::gen(a), Letter::gen(b), Letter::inv(a)],
        (false, 0) => vec![Letter::gen(a)],
        (false, _) => vec![Letter::gen(a), Letter::gen(b), Letter::inv(a), Letter::inv(b)],
    };
    Ok(Word::from_valid(
        genus,
        base.letters.iter().copied().chain(tail),
    ))
}

/// `z^τ_{i,0} = x_i`, `z^τ_{i,1} = γ^τ_i x_i`, `z^τ_{i,2} = γ^τ_i`.
pub fn z_word(tau: u8, i: usize, l: u8, genus: Genus) -> Result<Word, WordError> {
    let gamma = gamma(tau, i, genus)?;
    let x = Word::generator(genus, i)?;
    match l {
        0 => Ok(x),
        1 => Ok(gamma.concat(&x)),
        2 => Ok(gamma),
        _ => Err(WordError::BadSelector {
            name: "l",
            allowed: "0|1|2",
            value: l as usize,
        }),
    }
}

/// The `12g` signed words `(-1)^{1+τ+l} z^τ_{i,l}` before collection.
pub fn telescope_terms(genus: Genus) -> Vec<(i64, Word)> {
    let mut out = Vec::with_capacity(6 * genus.rank());
    for i in 1..=genus.rank() {
        for tau in 0..=1u8 {
            for l in 0..=2u8 {
                let sign = if (1 + tau + l) % 2 == 0 { 1 } else { -1 };
                let w = z_word(tau, i, l, genus).expect("indices in range");
                out.push((sign, w));
            }
        }
    }
    out
}

/// Collected telescoping sum; equals `[R] - [1]`.
pub fn telescope(genus: Genus) -> FormalWordSum {
    telescope_terms(genus)
        .into_iter()
        .map(|(c, w)| (w, c))
        .collect()
}

/// `Σ_i Σ_τ (-1)^τ (γ^τ_i, x_i)`, the bar 2-chain `Σ_i ∂R/∂x_i ⊗ x_i`.
pub fn fundamental_cycle(genus: Genus) -> BarChain<Word> {
    let mut terms = Vec::with_capacity(2 * genus.rank());
    for i in 1..=genus.rank() {
        let x = Word::generator(genus, i).expect("index in range");
        for tau in 0..=1u8 {
            let sign = if tau == 0 { 1 } else { -1 };
            let g = gamma(tau, i, genus).expect("index in range");
            terms.push((vec![g, x.clone()], sign));
        }
    }
    BarChain::from_raw_terms(2, terms)
}
