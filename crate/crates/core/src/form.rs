//! Quadratic forms `q = Σ_{i≤j} c_{i,j} x_i x_j` in `n` variables, the
//! substitution (right) action of invertible matrices, and the Borel and
//! permutation specializations of that action.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::tower::{FieldElement, TowerError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("syntax error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("variable index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not upper-triangular with nonzero diagonal")]
    NotBorel,
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// Lexicographic order on index pairs: `(i,j) < (k,l)` iff `i<k` or
/// (`i=k` and `j<l`). This is the derived `Ord` of the tuple, which is why
/// keys below are stored as `(usize, usize)` in a `BTreeMap`.
pub fn lex_less(a: (usize, usize), b: (usize, usize)) -> bool {
    a < b
}

/// The monomial support relation: `(k,l) ≺ (i,j)` holds when `x_k x_l` can
/// occur in the image of `x_i x_j` under an upper-triangular substitution,
/// i.e. when `(k,l) ≥ (i,j)` or `(l,k) ≥ (i,j)` lexicographically.
pub fn could_occur(kl: (usize, usize), ij: (usize, usize)) -> bool {
    kl >= ij || (kl.1, kl.0) >= ij
}

// ---------------------------------------------------------------------------
// QuadraticForm
// ---------------------------------------------------------------------------

/// Sparse upper-triangular coefficient table for `Σ c_{i,j} x_i x_j`,
/// 1-based indices, keys always `i ≤ j`, no zero values stored.
///
/// Coefficients may live at mixed tower levels; operations promote lazily.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    n: usize,
    coeffs: BTreeMap<(usize, usize), FieldElement>,
}

impl QuadraticForm {
    pub fn zero(n: usize) -> Self {
        QuadraticForm { n, coeffs: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_index(&self, idx: usize) -> Result<(), FormError> {
        if idx == 0 || idx > self.n {
            Err(FormError::IndexOutOfRange { index: idx, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `coef(x_i x_j, q)`. The pair is canonicalized, so `coef(2,1) = coef(1,2)`.
    pub fn coef(&self, i: usize, j: usize) -> Result<FieldElement, FormError> {
        self.check_index(i)?;
        self.check_index(j)?;
        let key = (i.min(j), i.max(j));
        Ok(self.coeffs.get(&key).cloned().unwrap_or_else(|| FieldElement::zero(0)))
    }

    /// Replace the coefficient of `x_i x_j` (dropping it when zero).
    pub fn set_coef(&mut self, i: usize, j: usize, value: FieldElement) -> Result<(), FormError> {
        self.check_index(i)?;
        self.check_index(j)?;
        let key = (i.min(j), i.max(j));
        if value.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, value);
        }
        Ok(())
    }

    /// Add `value` to the coefficient of `x_i x_j` (characteristic-2 sum).
    pub fn add_to_coef(&mut self, i: usize, j: usize, value: FieldElement) -> Result<(), FormError> {
        if value.is_zero() {
            self.check_index(i)?;
            self.check_index(j)?;
            return Ok(());
        }
        let current = self.coef(i, j)?;
        self.set_coef(i, j, current.add(&value))
    }

    /// `ind(q)`: the set of variables occurring in `q`.
    pub fn ind(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for &(i, j) in self.coeffs.keys() {
            s.insert(i);
            s.insert(j);
        }
        s
    }

    /// Monomials in lexicographic `(i,j)` order.
    pub fn monomials(&self) -> impl Iterator<Item = (&(usize, usize), &FieldElement)> {
        self.coeffs.iter()
    }

    pub fn monomial_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Characteristic-2 sum of two forms.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (&(i, j), c) in other.coeffs.iter() {
            out.add_to_coef(i, j, c.clone()).unwrap();
        }
        out
    }

    /// Evaluate at a point (1-based semantics, `point.len() == n`).
    pub fn eval(&self, point: &[FieldElement]) -> FieldElement {
        assert_eq!(point.len(), self.n);
        let mut acc = FieldElement::zero(0);
        for (&(i, j), c) in self.coeffs.iter() {
            acc = acc.add(&c.mul(&point[i - 1]).mul(&point[j - 1]));
        }
        acc
    }

    /// Substitute `x_t ↦ Σ_j g_{t,j} x_j` and collect. This is a right
    /// action: `act(g·h, q) = act(h, act(g, q))`.
    pub fn act(&self, g: &GroupElement) -> QuadraticForm {
        assert_eq!(self.n, g.n, "dimension mismatch between form and matrix");
        let mut out = QuadraticForm::zero(self.n);
        for (&(s, t), c) in self.coeffs.iter() {
            for i in 1..=self.n {
                let gsi = g.entry(s, i);
                if gsi.is_zero() {
                    continue;
                }
                let c_gsi = c.mul(gsi);
                for j in 1..=self.n {
                    let gtj = g.entry(t, j);
                    if gtj.is_zero() {
                        continue;
                    }
                    out.add_to_coef(i, j, c_gsi.mul(gtj)).unwrap();
                }
            }
        }
        out
    }

    /// Apply a permutation of the variables (equals acting by its matrix).
    pub fn permute(&self, w: &Permutation) -> QuadraticForm {
        assert_eq!(self.n, w.n(), "dimension mismatch between form and permutation");
        let mut out = QuadraticForm::zero(self.n);
        for (&(i, j), c) in self.coeffs.iter() {
            out.add_to_coef(w.apply(i), w.apply(j), c.clone()).unwrap();
        }
        out
    }

    // -- text syntax ---------------------------------------------------------

    /// Parse the form grammar: `form := '0' | term ('+' term)*`,
    /// `term := [coeff '*']? var ('^2' | '*' var)?`, `var := 'x' int`.
    /// Whitespace insensitive; duplicate monomials collapse by addition;
    /// `x_j x_i` is normalized to `x_i x_j`; zero coefficients are dropped.
    pub fn parse(text: &str, n: usize) -> Result<Self, FormError> {
        Parser { text, pos: 0, n }.parse_form()
    }
}

impl fmt::Display for QuadraticForm {
    /// Canonical printing: terms in lexicographic `(i,j)` order, `x_i^2` for
    /// squares, coefficient 1 omitted, `0` for the empty form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.coeffs.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if !c.is_one() {
                write!(f, "{c}*")?;
            }
            if i == j {
                write!(f, "x{i}^2")?;
            } else {
                write!(f, "x{i}*x{j}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> FormError {
        FormError::Parse { position: self.pos, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn parse_form(&mut self) -> Result<QuadraticForm, FormError> {
        self.skip_ws();
        let mut form = QuadraticForm::zero(self.n);
        if self.eat("0") {
            self.skip_ws();
            if self.pos == self.text.len() {
                return Ok(form);
            }
            // Not a lone zero after all (e.g. "0b…@m*x1^2"); rewind.
            self.pos -= 1;
        }
        loop {
            let (i, j, c) = self.parse_term()?;
            form.add_to_coef(i, j, c).map_err(|e| match e {
                FormError::IndexOutOfRange { index, n } => FormError::IndexOutOfRange { index, n },
                other => other,
            })?;
            self.skip_ws();
            if self.pos == self.text.len() {
                break;
            }
            if !self.eat("+") {
                return Err(self.error("expected '+' or end of input"));
            }
        }
        Ok(form)
    }

    fn parse_term(&mut self) -> Result<(usize, usize, FieldElement), FormError> {
        self.skip_ws();
        let mut coeff = FieldElement::one(0);
        if !self.rest().starts_with('x') {
            let token_len = self
                .rest()
                .find(|c: char| c == '*' || c == '+' || c.is_whitespace())
                .unwrap_or(self.rest().len());
            let token = &self.rest()[..token_len];
            let parsed: FieldElement = token.parse().map_err(|e: TowerError| FormError::Parse {
                position: self.pos,
                message: e.to_string(),
            })?;
            coeff = parsed;
            self.pos += token_len;
            if !self.eat("*") {
                return Err(self.error("expected '*' after coefficient"));
            }
        }
        let i = self.parse_var()?;
        self.skip_ws();
        if self.eat("^2") {
            return Ok((i, i, coeff));
        }
        if self.eat("*") {
            let j = self.parse_var()?;
            let (lo, hi) = (i.min(j), i.max(j));
            if lo == hi {
                return Ok((lo, lo, coeff));
            }
            return Ok((lo, hi, coeff));
        }
        Err(self.error("expected '^2' or '*<var>' after variable"))
    }

    fn parse_var(&mut self) -> Result<usize, FormError> {
        self.skip_ws();
        if !self.eat("x") {
            return Err(self.error("expected variable 'x<int>'"));
        }
        let digits_len = self
            .rest()
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest().len());
        if digits_len == 0 {
            return Err(self.error("expected digits after 'x'"));
        }
        let idx: usize = self.rest()[..digits_len]
            .parse()
            .map_err(|_| self.error("variable index too large"))?;
        self.pos += digits_len;
        if idx == 0 || idx > self.n {
            return Err(FormError::IndexOutOfRange { index: idx, n: self.n });
        }
        Ok(idx)
    }
}

// ---------------------------------------------------------------------------
// GroupElement
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    General,
    Borel,
    Permutation,
}

/// Invertible `n×n` matrix over the tower, acting on forms by substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    n: usize,
    /// Row-major, `entries[(r-1)*n + (c-1)]`.
    entries: Vec<FieldElement>,
    kind: MatrixKind,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![FieldElement::zero(0); n * n];
        for k in 0..n {
            entries[k * n + k] = FieldElement::one(0);
        }
        GroupElement { n, entries, kind: MatrixKind::Borel }
    }

    /// General invertible matrix; fails with `Singular` when the determinant
    /// vanishes.
    pub fn general(n: usize, entries: Vec<FieldElement>) -> Result<Self, FormError> {
        assert_eq!(entries.len(), n * n);
        let g = GroupElement { n, entries, kind: MatrixKind::General };
        if !g.is_invertible() {
            return Err(FormError::Singular);
        }
        Ok(g)
    }

    /// Upper-triangular matrix with nonzero diagonal.
    pub fn borel(n: usize, entries: Vec<FieldElement>) -> Result<Self, FormError> {
        assert_eq!(entries.len(), n * n);
        for r in 1..=n {
            for c in 1..=n {
                let e = &entries[(r - 1) * n + (c - 1)];
                if c < r && !e.is_zero() {
                    return Err(FormError::NotBorel);
                }
                if c == r && e.is_zero() {
                    return Err(FormError::NotBorel);
                }
            }
        }
        Ok(GroupElement { n, entries, kind: MatrixKind::Borel })
    }

    /// `I + c·E_{k,l}`, Borel when `k < l`.
    pub fn transvection(n: usize, k: usize, l: usize, c: FieldElement) -> Self {
        assert!(k != l && k >= 1 && l >= 1 && k <= n && l <= n);
        let mut g = Self::identity(n);
        g.entries[(k - 1) * n + (l - 1)] = c;
        g.kind = if k < l { MatrixKind::Borel } else { MatrixKind::General };
        g
    }

    /// Diagonal scaling of one variable, `x_k ↦ d·x_k`.
    pub fn diagonal_scaling(n: usize, k: usize, d: FieldElement) -> Result<Self, FormError> {
        if d.is_zero() {
            return Err(FormError::Singular);
        }
        let mut g = Self::identity(n);
        g.entries[(k - 1) * n + (k - 1)] = d;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// 1-based entry access.
    pub fn entry(&self, r: usize, c: usize) -> &FieldElement {
        &self.entries[(r - 1) * self.n + (c - 1)]
    }

    pub fn set_entry(&mut self, r: usize, c: usize, v: FieldElement) {
        self.entries[(r - 1) * self.n + (c - 1)] = v;
    }

    /// Largest tower level appearing among the entries.
    pub fn max_level(&self) -> u8 {
        self.entries.iter().map(|e| e.min_level()).max().unwrap_or(0)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (1..=self.n).all(|r| (1..r).all(|c| self.entry(r, c).is_zero()))
            && (1..=self.n).all(|r| !self.entry(r, r).is_zero())
    }

    fn is_invertible(&self) -> bool {
        // Gaussian elimination over the tower.
        let n = self.n;
        let mut m = self.entries.clone();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
                return false;
            };
            if pivot != col {
                for c in 0..n {
                    m.swap(col * n + c, pivot * n + c);
                }
            }
            let inv = m[col * n + col].inv().expect("pivot nonzero");
            for r in (col + 1)..n {
                if m[r * n + col].is_zero() {
                    continue;
                }
                let factor = m[r * n + col].mul(&inv);
                for c in col..n {
                    let sub = factor.mul(&m[col * n + c]);
                    m[r * n + c] = m[r * n + c].add(&sub);
                }
            }
        }
        true
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut entries = vec![FieldElement::zero(0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = &self.entries[r * n + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = &other.entries[k * n + c];
                    if b.is_zero() {
                        continue;
                    }
                    entries[r * n + c] = entries[r * n + c].add(&a.mul(b));
                }
            }
        }
        let kind = match (self.kind, other.kind) {
            (MatrixKind::Borel, MatrixKind::Borel) => MatrixKind::Borel,
            (MatrixKind::Permutation, MatrixKind::Permutation) => MatrixKind::Permutation,
            _ => MatrixKind::General,
        };
        GroupElement { n, entries, kind }
    }

    /// Inverse via Gauss–Jordan elimination.
    pub fn inverse(&self) -> GroupElement {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut inv = Self::identity(n).entries;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !m[r * n + col].is_zero())
                .expect("GroupElement invariants guarantee invertibility");
            if pivot != col {
                for c in 0..n {
                    m.swap(col * n + c, pivot * n + c);
                    inv.swap(col * n + c, pivot * n + c);
                }
            }
            let piv_inv = m[col * n + col].inv().unwrap();
            for c in 0..n {
                m[col * n + c] = m[col * n + c].mul(&piv_inv);
                inv[col * n + c] = inv[col * n + c].mul(&piv_inv);
            }
            for r in 0..n {
                if r == col || m[r * n + col].is_zero() {
                    continue;
                }
                let factor = m[r * n + col].clone();
                for c in 0..n {
                    let s = factor.mul(&m[col * n + c]);
                    m[r * n + c] = m[r * n + c].add(&s);
                    let s = factor.mul(&inv[col * n + c]);
                    inv[r * n + c] = inv[r * n + c].add(&s);
                }
            }
        }
        let kind = match self.kind {
            MatrixKind::Borel => MatrixKind::Borel,
            MatrixKind::Permutation => MatrixKind::Permutation,
            MatrixKind::General => MatrixKind::General,
        };
        GroupElement { n, entries: inv, kind }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 1..=self.n {
            if r > 1 {
                writeln!(f)?;
            }
            let row: Vec<String> = (1..=self.n).map(|c| self.entry(r, c).to_string()).collect();
            write!(f, "[ {} ]", row.join("  "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Permutation
// ---------------------------------------------------------------------------

/// Permutation of `{1, …, n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    /// `map[k-1]` is the image of `k`.
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (1..=n).collect() }
    }

    /// The simple reflection `s_i = (i, i+1)`.
    pub fn simple_reflection(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i < n);
        let mut p = Self::identity(n);
        p.map.swap(i - 1, i);
        p
    }

    pub fn from_images(map: Vec<usize>) -> Self {
        let n = map.len();
        let mut seen = vec![false; n + 1];
        for &v in &map {
            assert!(v >= 1 && v <= n && !seen[v], "not a permutation");
            seen[v] = true;
        }
        Permutation { map }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k - 1]
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n());
        Permutation { map: (1..=self.n()).map(|k| self.apply(other.apply(k))).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut map = vec![0; self.n()];
        for (k, &v) in self.map.iter().enumerate() {
            map[v - 1] = k + 1;
        }
        Permutation { map }
    }

    /// The 0/1 matrix whose substitution action sends `x_t ↦ x_{w(t)}`.
    pub fn matrix(&self) -> GroupElement {
        let n = self.n();
        let mut entries = vec![FieldElement::zero(0); n * n];
        for t in 1..=n {
            entries[(t - 1) * n + (self.apply(t) - 1)] = FieldElement::one(0);
        }
        GroupElement { n, entries, kind: MatrixKind::Permutation }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(text: &str, n: usize) -> QuadraticForm {
        QuadraticForm::parse(text, n).unwrap()
    }

    #[test]
    fn parse_basics() {
        let q = f("x1^2 + x1*x2", 2);
        assert!(q.coef(1, 1).unwrap().is_one());
        assert!(q.coef(1, 2).unwrap().is_one());
        assert!(q.coef(2, 2).unwrap().is_zero());

        let swapped = f("x2*x1", 2);
        assert!(swapped.coef(1, 2).unwrap().is_one());

        // characteristic 2: duplicate monomials cancel
        assert!(f("x1*x2 + x1*x2", 2).is_zero());
        assert!(f("0", 3).is_zero());

        let with_coeff = f("w*x1*x2 + x2^2", 2);
        assert_eq!(with_coeff.coef(1, 2).unwrap().to_string(), "w");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            QuadraticForm::parse("x1^2 + x5^2", 3),
            Err(FormError::IndexOutOfRange { index: 5, n: 3 })
        ));
        assert!(matches!(QuadraticForm::parse("x1 +", 3), Err(FormError::Parse { .. })));
        assert!(matches!(QuadraticForm::parse("y1^2", 3), Err(FormError::Parse { .. })));
    }

    #[test]
    fn display_round_trip() {
        for text in ["0", "x1^2", "x1*x2 + x3^2", "x1^2 + x1*x5 + x2*x3 + x4^2 + x4*x6 + x7^2 + x8*x9"] {
            let q = f(text, 9);
            assert_eq!(q.to_string(), text);
            assert_eq!(f(&q.to_string(), 9), q);
        }
    }

    #[test]
    fn ind_of_paper_diagram_form() {
        let q = f("x1^2 + x1*x5 + x2*x3 + x4^2 + x4*x6 + x7^2 + x8*x9", 9);
        let expect: std::collections::BTreeSet<usize> = (1..=9).collect();
        assert_eq!(q.ind(), expect);
        assert!(QuadraticForm::zero(4).ind().is_empty());
    }

    #[test]
    fn act_identity_and_squares() {
        let q = f("x1^2 + x1*x2 + x2^2", 2);
        assert_eq!(q.act(&GroupElement::identity(2)), q);

        // x1 ↦ x1 + x2 on x1²: (x1+x2)² = x1² + x2²
        let g = GroupElement::transvection(2, 1, 2, FieldElement::one(0));
        assert_eq!(f("x1^2", 2).act(&g), f("x1^2 + x2^2", 2));
    }

    #[test]
    fn permute_examples() {
        let s1 = Permutation::simple_reflection(2, 1);
        assert_eq!(f("x1^2 + x1*x2", 2).permute(&s1), f("x2^2 + x1*x2", 2));
        let s2 = Permutation::simple_reflection(3, 2);
        assert_eq!(f("x1^2 + x2*x3", 3).permute(&s2), f("x1^2 + x2*x3", 3));
        let id = Permutation::identity(3);
        let q = f("x1*x2 + x3^2", 3);
        assert_eq!(q.permute(&id), q);
        assert_eq!(q.permute(&s2), f("x1*x3 + x2^2", 3));
    }

    #[test]
    fn permutation_matrix_matches_permute() {
        let q = f("x1^2 + x1*x3 + x2^2", 3);
        for i in 1..3 {
            let w = Permutation::simple_reflection(3, i);
            assert_eq!(q.permute(&w), q.act(&w.matrix()));
        }
    }

    #[test]
    fn borel_constructor_rejects_bad_matrices() {
        let one = FieldElement::one(0);
        let zero = FieldElement::zero(0);
        assert!(GroupElement::borel(2, vec![one.clone(), zero.clone(), one.clone(), one.clone()])
            .is_err());
        assert!(GroupElement::borel(2, vec![zero.clone(), one.clone(), zero, one]).is_err());
    }

    #[test]
    fn singular_matrix_rejected() {
        let one = FieldElement::one(0);
        let entries = vec![one.clone(), one.clone(), one.clone(), one];
        assert_eq!(GroupElement::general(2, entries).err(), Some(FormError::Singular));
    }

    /// Brute-force check of the support/coefficients identity for the Borel
    /// action on a single monomial: coef(x_i x_j, b·x_s x_t) accumulates
    /// b_{s,i}b_{t,j} + b_{s,j}b_{t,i}, supported on pairs (i,j) ≽ (s,t).
    #[test]
    fn borel_action_on_monomial_matches_expansion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 4;
        for _ in 0..200 {
            let mut entries = vec![FieldElement::zero(0); n * n];
            for r in 1..=n {
                for c in r..=n {
                    let bits = if r == c { rng.gen_range(1..4u64) } else { rng.gen_range(0..4u64) };
                    entries[(r - 1) * n + (c - 1)] = FieldElement::from_bits(1, bits);
                }
            }
            let b = GroupElement::borel(n, entries).unwrap();
            let s = rng.gen_range(1..=n);
            let t = rng.gen_range(s..=n);
            let mut q = QuadraticForm::zero(n);
            q.set_coef(s, t, FieldElement::one(0)).unwrap();
            let image = q.act(&b);
            for i in 1..=n {
                for j in i..=n {
                    let expected = if i == j {
                        b.entry(s, i).mul(b.entry(t, i))
                    } else {
                        b.entry(s, i).mul(b.entry(t, j)).add(&b.entry(s, j).mul(b.entry(t, i)))
                    };
                    assert_eq!(image.coef(i, j).unwrap(), expected);
                    if !expected.is_zero() {
                        assert!(could_occur((i, j), (s, t)));
                    }
                }
            }
        }
    }

    fn random_general(n: usize, rng: &mut impl rand::Rng) -> GroupElement {
        loop {
            let entries: Vec<FieldElement> =
                (0..n * n).map(|_| FieldElement::from_bits(1, rng.gen_range(0..4u64))).collect();
            if let Ok(g) = GroupElement::general(n, entries) {
                return g;
            }
        }
    }

    #[test]
    fn right_action_law_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6usize {
            for _ in 0..40 {
                let g = random_general(n, &mut rng);
                let h = random_general(n, &mut rng);
                let mut q = QuadraticForm::zero(n);
                for i in 1..=n {
                    for j in i..=n {
                        q.set_coef(i, j, FieldElement::from_bits(1, rng.gen_range(0..4u64)))
                            .unwrap();
                    }
                }
                assert_eq!(q.act(&g.matmul(&h)), q.act(&g).act(&h));
                // act(g,·) is a bijection of V_n
                assert_eq!(q.act(&g).act(&g.inverse()), q);
            }
        }
    }

    fn all_invertible_f2(n: usize) -> Vec<GroupElement> {
        let mut mats = Vec::new();
        for bits in 0..(1u32 << (n * n)) {
            let entries: Vec<FieldElement> = (0..n * n)
                .map(|k| {
                    if bits >> k & 1 == 1 { FieldElement::one(0) } else { FieldElement::zero(0) }
                })
                .collect();
            if let Ok(g) = GroupElement::general(n, entries) {
                mats.push(g);
            }
        }
        mats
    }

    fn all_f2_forms(n: usize) -> Vec<QuadraticForm> {
        let monomials: Vec<(usize, usize)> =
            (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
        (0..(1u32 << monomials.len()))
            .map(|bits| {
                let mut q = QuadraticForm::zero(n);
                for (k, &(i, j)) in monomials.iter().enumerate() {
                    if bits >> k & 1 == 1 {
                        q.set_coef(i, j, FieldElement::one(0)).unwrap();
                    }
                }
                q
            })
            .collect()
    }

    #[test]
    fn right_action_law_exhaustive_f2_n2() {
        // Every pair of invertible 2×2 matrices over F_2 against every form.
        let mats = all_invertible_f2(2);
        assert_eq!(mats.len(), 6); // |GL(2, F_2)|
        for g in &mats {
            for h in &mats {
                for q in &all_f2_forms(2) {
                    assert_eq!(q.act(&g.matmul(h)), q.act(g).act(h));
                }
            }
        }
    }

    #[test]
    fn right_action_law_exhaustive_f2_n3() {
        // All 168² matrix pairs over a few fixed forms, plus all 512 forms
        // against a sample of pairs.
        let mats = all_invertible_f2(3);
        assert_eq!(mats.len(), 168); // |GL(3, F_2)|
        let probes: Vec<QuadraticForm> = ["x1^2 + x2*x3", "x1*x2 + x3^2", "x1^2 + x1*x2 + x2*x3"]
            .iter()
            .map(|t| QuadraticForm::parse(t, 3).unwrap())
            .collect();
        for g in &mats {
            for h in &mats {
                for q in &probes {
                    assert_eq!(q.act(&g.matmul(h)), q.act(g).act(h));
                }
            }
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for q in all_f2_forms(3) {
            let g = &mats[rng.gen_range(0..mats.len())];
            let h = &mats[rng.gen_range(0..mats.len())];
            assert_eq!(q.act(&g.matmul(h)), q.act(g).act(h));
        }
    }

    #[test]
    fn borel_image_respects_support_order() {
        // For upper-triangular b, every monomial of b·x_s x_t is ≽ (s,t).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        for _ in 0..100 {
            let mut entries = vec![FieldElement::zero(0); n * n];
            for r in 1..=n {
                for c in r..=n {
                    let bits = if r == c { 1 } else { rng.gen_range(0..2u64) };
                    entries[(r - 1) * n + (c - 1)] = FieldElement::from_bits(0, bits);
                }
            }
            let b = GroupElement::borel(n, entries).unwrap();
            let s = rng.gen_range(1..=n);
            let t = rng.gen_range(s..=n);
            let mut q = QuadraticForm::zero(n);
            q.set_coef(s, t, FieldElement::one(0)).unwrap();
            for (&m, _) in q.act(&b).monomials() {
                assert!(could_occur(m, (s, t)), "{m:?} outside support of ({s},{t})");
            }
        }
    }

    #[test]
    fn parse_format_round_trip_on_normal_corpus() {
        for n in 0..=5usize {
            for nf in crate::census::enumerate_normal_forms(n).unwrap() {
                let q = nf.as_form();
                assert_eq!(QuadraticForm::parse(&q.to_string(), n).unwrap(), q);
            }
        }
    }

    proptest! {
        #[test]
        fn permutation_group_laws(n in 2usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut images: Vec<usize> = (1..=n).collect();
            for k in (1..n).rev() {
                images.swap(k, rng.gen_range(0..=k));
            }
            let w = Permutation::from_images(images);
            prop_assert_eq!(w.compose(&w.inverse()), Permutation::identity(n));
        }
    }
}
