//! Word problem for the closed surface group `F / <<R>>` by Dehn's algorithm.
//!
//! For genus at least 2 the symmetrized relator set satisfies C'(1/6) (pieces
//! have length 1 against relators of length `4g >= 8`), so any nonempty
//! freely reduced word that is trivial in the quotient contains more than
//! half of some cyclic permutation of `R^{±1}`. Repeatedly shortening such
//! subwords therefore decides triviality.

use thiserror::Error;

use crate::freegroup::{relator, Genus, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DehnError {
    #[error("Dehn's algorithm needs genus >= 2, got genus {0}")]
    UnsupportedGenus(usize),
    #[error("word has genus {word}, presentation has genus {presentation}")]
    GenusMismatch { word: usize, presentation: usize },
}

/// The one-relator presentation of the genus-`g` surface group, with all
/// `8g` cyclic permutations of `R` and `R^{-1}`.
#[derive(Debug, Clone)]
pub struct SurfacePresentation {
    genus: Genus,
    cyclic_forms: Vec<Vec<Letter>>,
}

impl SurfacePresentation {
    pub fn new(genus: Genus) -> Self {
        let r = relator(genus);
        let mut cyclic_forms = Vec::with_capacity(2 * r.len());
        for base in [r.clone(), r.inverse()] {
            let letters = base.letters();
            for shift in 0..letters.len() {
                let mut rotated = letters[shift..].to_vec();
                rotated.extend_from_slice(&letters[..shift]);
                cyclic_forms.push(rotated);
            }
        }
        SurfacePresentation {
            genus,
            cyclic_forms,
        }
    }

    pub fn genus(&self) -> Genus {
        self.genus
    }

    pub fn cyclic_forms(&self) -> &[Vec<Letter>] {
        &self.cyclic_forms
    }

    fn check(&self, w: &Word) -> Result<(), DehnError> {
        if self.genus.get() < 2 {
            return Err(DehnError::UnsupportedGenus(self.genus.get()));
        }
        if w.genus() != self.genus {
            return Err(DehnError::GenusMismatch {
                word: w.genus().get(),
                presentation: self.genus.get(),
            });
        }
        Ok(())
    }

    /// Leftmost, longest match of more than half a relator:
    /// `(start, length, form index)`.
    fn find_long_piece(&self, letters: &[Letter]) -> Option<(usize, usize, usize)> {
        let half = 2 * self.genus.get();
        for start in 0..letters.len() {
            let rest = &letters[start..];
            let best = self
                .cyclic_forms
                .iter()
                .enumerate()
                .map(|(k, form)| {
                    let lcp = rest.iter().zip(form).take_while(|(a, b)| a == b).count();
                    (lcp, k)
                })
                .max_by_key(|&(lcp, k)| (lcp, std::cmp::Reverse(k)));
            if let Some((lcp, k)) = best {
                if lcp > half {
                    return Some((start, lcp, k));
                }
            }
        }
        None
    }

    /// Shortens `w` by Dehn replacements until none applies. The result is
    /// equal to `w` in the surface group and is empty iff `w` is trivial.
    pub fn dehn_reduce(&self, w: &Word) -> Result<Word, DehnError> {
        self.check(w)?;
        let mut current = w.clone();
        while let Some((start, len, k)) = self.find_long_piece(current.letters()) {
            // form = s·t with s matched; s = t^{-1} in the quotient
            let form = &self.cyclic_forms[k];
            let replacement = form[len..].iter().rev().map(|l| l.inverted());
            let letters = current.letters();
            let next = Word::from_valid(
                self.genus,
                letters[..start]
                    .iter()
                    .copied()
                    .chain(replacement)
                    .chain(letters[start + len..].iter().copied()),
            );
            debug_assert!(next.len() < current.len());
            current = next;
        }
        Ok(current)
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool, DehnError> {
        Ok(self.dehn_reduce(w)?.is_identity())
    }

    /// Equality in the surface group, `a b^{-1} = 1`.
    pub fn equals(&self, a: &Word, b: &Word) -> Result<bool, DehnError> {
        self.check(a)?;
        self.check(b)?;
        self.is_trivial(&a.concat(&b.inverse()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> Genus {
        Genus::new(n).unwrap()
    }

    #[test]
    fn presentation_has_8g_forms() {
        for n in 1..=5 {
            let p = SurfacePresentation::new(g(n));
            assert_eq!(p.cyclic_forms().len(), 8 * n);
            for f in p.cyclic_forms() {
                assert_eq!(f.len(), 4 * n);
                let w = Word::reduce(g(n), f.iter().copied()).unwrap();
                assert_eq!(w.len(), 4 * n);
            }
        }
    }

    #[test]
    fn relator_is_trivial() {
        for n in 2..=4 {
            let p = SurfacePresentation::new(g(n));
            assert!(p.dehn_reduce(&relator(g(n))).unwrap().is_identity());
            assert!(p.is_trivial(&relator(g(n)).inverse()).unwrap());
            assert!(p.is_trivial(&Word::identity(g(n))).unwrap());
        }
    }

    #[test]
    fn generators_survive() {
        let p = SurfacePresentation::new(g(2));
        let x1 = Word::parse(g(2), "x1").unwrap();
        assert_eq!(p.dehn_reduce(&x1).unwrap(), x1);
        assert!(!p.is_trivial(&Word::parse(g(2), "x1 x2").unwrap()).unwrap());
    }

    #[test]
    fn replaces_long_piece_with_short_complement() {
        // five letters of R = x1 x2 x1^-1 x2^-1 x3 x4 x3^-1 x4^-1
        let p = SurfacePresentation::new(g(2));
        let w = Word::parse(g(2), "x1 x2 x1^-1 x2^-1 x3").unwrap();
        let reduced = p.dehn_reduce(&w).unwrap();
        assert_eq!(reduced, Word::parse(g(2), "x4 x3 x4^-1").unwrap());
        assert!(p.equals(&w, &reduced).unwrap());
    }

    #[test]
    fn genus_one_is_unsupported() {
        let p = SurfacePresentation::new(g(1));
        assert_eq!(
            p.dehn_reduce(&relator(g(1))),
            Err(DehnError::UnsupportedGenus(1))
        );
        let p2 = SurfacePresentation::new(g(2));
        assert!(matches!(
            p2.is_trivial(&relator(g(3))),
            Err(DehnError::GenusMismatch { .. })
        ));
    }
}
