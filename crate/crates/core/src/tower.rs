//! Arithmetic in the tower of binary fields `L_0 ⊂ L_1 ⊂ L_2 ⊂ …` where
//! `L_0 = F_2` and `L_{m+1} = L_m[y]/(y² + y + c_m)` for a fixed `c_m ∈ L_m`
//! of absolute trace 1. Each `L_m` has 2^(2^m) elements, every element has a
//! square root, and `t² + t = g` is solvable at the element's level or one
//! level above it, so any finite computation that is promised to work over a
//! quadratically closed field of characteristic 2 terminates at a finite
//! level of the tower.
//!
//! Elements are coordinate vectors over F_2 in the product basis
//! `∏ y_i^{e_i}` with `e ∈ {0,1}^m`: bit `k` of an element at level `m` is
//! the coefficient of the basis monomial whose exponent vector is the binary
//! expansion of `k` (bit `i` of `k` turning on generator `y_{i+1}`). The low
//! half of the coordinates of a level-`m` element is its `L_{m-1}` "real
//! part", the high half the coefficient of `y_m`, which makes embeddings
//! zero-extension and subfield membership a zero test on high bits.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use thiserror::Error;

/// Hard ceiling on tower levels. Desk-scale computations stay at level ≤ 3;
/// the cap exists so runaway recursion fails loudly instead of allocating
/// astronomically large coordinate vectors.
pub const MAX_LEVEL: u8 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TowerError {
    #[error("division by zero in the tower field")]
    DivisionByZero,
    #[error("element does not lie in the requested subfield (level {requested} < {actual})")]
    NotInSubfield { requested: u8, actual: u8 },
    #[error("tower level cap {MAX_LEVEL} exceeded")]
    LevelCapExceeded,
    #[error("invalid field element syntax at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

#[derive(Clone, Debug)]
enum Bits {
    /// Levels 0..=6: the 2^level coordinates live in the low bits of one word.
    Word(u64),
    /// Levels 7..: 2^(level-6) words, little-endian.
    Wide(Vec<u64>),
}

/// An element of `L_m` for some tower level `m`.
///
/// Equality and hashing are semantic: an element compares equal to its image
/// under any tower embedding, so `FieldElement::one(0) == FieldElement::one(3)`.
#[derive(Clone, Debug)]
pub struct FieldElement {
    level: u8,
    bits: Bits,
}

fn word_count(level: u8) -> usize {
    if level <= 6 {
        1
    } else {
        1usize << (level - 6)
    }
}

fn level_mask(level: u8) -> u64 {
    if level >= 6 {
        u64::MAX
    } else {
        (1u64 << (1usize << level)) - 1
    }
}

// ---------------------------------------------------------------------------
// Tower constants c_m
// ---------------------------------------------------------------------------

/// Cache of the defining constants c_0, c_1, …; c_m is the first basis
/// monomial of L_m (in coordinate order) with absolute trace 1, which makes
/// all bit-level results reproducible. c_0 = 1.
static TOWER_CONSTANTS: Mutex<Vec<FieldElement>> = Mutex::new(Vec::new());

/// The constant `c_m` in `L_{m+1} = L_m[y]/(y² + y + c_m)`.
pub fn tower_constant(m: u8) -> FieldElement {
    loop {
        {
            let cache = TOWER_CONSTANTS.lock().unwrap();
            if (m as usize) < cache.len() {
                return cache[m as usize].clone();
            }
        }
        let next_level = { TOWER_CONSTANTS.lock().unwrap().len() } as u8;
        let value = if next_level == 0 {
            FieldElement::one(0)
        } else {
            compute_constant(next_level)
        };
        let mut cache = TOWER_CONSTANTS.lock().unwrap();
        if cache.len() == next_level as usize {
            cache.push(value);
        }
    }
}

fn compute_constant(level: u8) -> FieldElement {
    let dim = 1usize << level;
    for k in 0..dim {
        let e = FieldElement::basis(level, k);
        if e.trace_to_f2() == 1 {
            return e;
        }
    }
    unreachable!("the trace form on L_{level} is nonzero, some basis monomial has trace 1")
}

// ---------------------------------------------------------------------------
// Word-level arithmetic for levels <= 6
// ---------------------------------------------------------------------------

fn mul_word(level: u8, a: u64, b: u64) -> u64 {
    if level == 0 {
        return a & b;
    }
    let half = 1u32 << (level - 1);
    let mask = if half == 64 { u64::MAX } else { (1u64 << half) - 1 };
    let (a0, a1) = (a & mask, (a >> half) & mask);
    let (b0, b1) = (b & mask, (b >> half) & mask);
    let p00 = mul_word(level - 1, a0, b0);
    let p11 = mul_word(level - 1, a1, b1);
    let cross = mul_word(level - 1, a0 ^ a1, b0 ^ b1) ^ p00 ^ p11;
    let c = tower_constant(level - 1).low_word();
    let lo = p00 ^ mul_word(level - 1, p11, c);
    let hi = cross ^ p11;
    lo | (hi << half)
}

impl FieldElement {
    // -- constructors -------------------------------------------------------

    pub fn zero(level: u8) -> Self {
        assert!(level <= MAX_LEVEL);
        if level <= 6 {
            FieldElement { level, bits: Bits::Word(0) }
        } else {
            FieldElement { level, bits: Bits::Wide(vec![0; word_count(level)]) }
        }
    }

    pub fn one(level: u8) -> Self {
        let mut e = Self::zero(level);
        e.set_bit(0, true);
        e
    }

    /// The basis monomial with coordinate index `k` at the given level.
    pub fn basis(level: u8, k: usize) -> Self {
        assert!(k < (1usize << level));
        let mut e = Self::zero(level);
        e.set_bit(k, true);
        e
    }

    /// The tower generator `y_level` (requires `level ≥ 1`).
    pub fn generator(level: u8) -> Self {
        assert!(level >= 1 && level <= MAX_LEVEL);
        Self::basis(level, 1usize << (level - 1))
    }

    /// Element of `L_level` from little-endian coordinate bits packed in a word.
    /// Bits above 2^level must be clear.
    pub fn from_bits(level: u8, bits: u64) -> Self {
        assert!(level <= 6, "from_bits only supports word-sized levels");
        assert_eq!(bits & !level_mask(level), 0, "stray coordinate bits");
        FieldElement { level, bits: Bits::Word(bits) }
    }

    // -- accessors ----------------------------------------------------------

    pub fn level(&self) -> u8 {
        self.level
    }

    fn low_word(&self) -> u64 {
        match &self.bits {
            Bits::Word(w) => *w,
            Bits::Wide(v) => v[0],
        }
    }

    fn words(&self) -> &[u64] {
        match &self.bits {
            Bits::Word(w) => std::slice::from_ref(w),
            Bits::Wide(v) => v,
        }
    }

    pub fn bit(&self, k: usize) -> bool {
        let w = self.words();
        (w[k / 64] >> (k % 64)) & 1 == 1
    }

    fn set_bit(&mut self, k: usize, on: bool) {
        match &mut self.bits {
            Bits::Word(w) => {
                if on {
                    *w |= 1 << k;
                } else {
                    *w &= !(1 << k);
                }
            }
            Bits::Wide(v) => {
                if on {
                    v[k / 64] |= 1 << (k % 64);
                } else {
                    v[k / 64] &= !(1 << (k % 64));
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words().iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.low_word() == 1 && self.words()[1..].iter().all(|&w| w == 0)
    }

    /// Smallest level whose subfield contains this element.
    pub fn min_level(&self) -> u8 {
        let mut m = self.level;
        while m > 0 {
            let dim = 1usize << (m - 1);
            let clear = if dim >= 64 {
                let words = self.words();
                words[dim / 64..].iter().all(|&w| w == 0)
            } else {
                self.low_word() >> dim == 0 && self.words()[1..].iter().all(|&w| w == 0)
            };
            if clear {
                m -= 1;
            } else {
                break;
            }
        }
        m
    }

    // -- embedding ----------------------------------------------------------

    /// Reinterpret the element at `target` level. Raising the level is the
    /// tower embedding; lowering it projects and fails with `NotInSubfield`
    /// if the element does not lie in the smaller field.
    pub fn embed(&self, target: u8) -> Result<Self, TowerError> {
        if target > MAX_LEVEL {
            return Err(TowerError::LevelCapExceeded);
        }
        if target < self.min_level() {
            return Err(TowerError::NotInSubfield { requested: target, actual: self.min_level() });
        }
        let mut out = Self::zero(target);
        let dim = 1usize << self.min_level().min(target);
        match (&mut out.bits, self.words()) {
            (Bits::Word(w), src) => {
                *w = src[0] & level_mask(target);
                let _ = dim;
            }
            (Bits::Wide(v), src) => {
                for (i, slot) in v.iter_mut().enumerate() {
                    *slot = src.get(i).copied().unwrap_or(0);
                }
            }
        }
        Ok(out)
    }

    fn promote_pair(a: &Self, b: &Self) -> (Self, Self) {
        let level = a.level.max(b.level);
        (a.embed(level).unwrap(), b.embed(level).unwrap())
    }

    /// Split a level-m element (m ≥ 1) into (low, high) parts at level m−1,
    /// so that `self = low + high·y_m`.
    fn split(&self) -> (Self, Self) {
        assert!(self.level >= 1);
        let sub = self.level - 1;
        let dim = 1usize << sub;
        let mut lo = Self::zero(sub);
        let mut hi = Self::zero(sub);
        if dim < 64 {
            let w = self.low_word();
            let mask = (1u64 << dim) - 1;
            lo = FieldElement { level: sub, bits: Bits::Word(w & mask) };
            hi = FieldElement { level: sub, bits: Bits::Word((w >> dim) & mask) };
        } else {
            let words = self.words();
            let half_words = dim / 64;
            match (&mut lo.bits, &mut hi.bits) {
                (Bits::Word(lw), Bits::Word(hw)) => {
                    *lw = words[0];
                    *hw = words[half_words];
                }
                (Bits::Wide(lv), Bits::Wide(hv)) => {
                    lv.copy_from_slice(&words[..half_words]);
                    hv.copy_from_slice(&words[half_words..]);
                }
                _ => unreachable!(),
            }
        }
        (lo, hi)
    }

    /// Inverse of `split`: `low + high·y_{level}` at `level = low.level + 1`.
    fn join(level: u8, lo: &Self, hi: &Self) -> Self {
        assert_eq!(lo.level, level - 1);
        assert_eq!(hi.level, level - 1);
        let dim = 1usize << (level - 1);
        let mut out = Self::zero(level);
        if dim < 64 {
            out = FieldElement {
                level,
                bits: Bits::Word(lo.low_word() | (hi.low_word() << dim)),
            };
        } else {
            match &mut out.bits {
                Bits::Wide(v) => {
                    let half_words = dim / 64;
                    v[..half_words].copy_from_slice(lo.words());
                    v[half_words..].copy_from_slice(hi.words());
                }
                Bits::Word(_) => unreachable!(),
            }
        }
        out
    }

    // -- arithmetic ---------------------------------------------------------

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::promote_pair(self, other);
        let level = a.level;
        if level <= 6 {
            FieldElement { level, bits: Bits::Word(a.low_word() ^ b.low_word()) }
        } else {
            let v = a.words().iter().zip(b.words()).map(|(x, y)| x ^ y).collect();
            FieldElement { level, bits: Bits::Wide(v) }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::promote_pair(self, other);
        let level = a.level;
        if level <= 6 {
            FieldElement { level, bits: Bits::Word(mul_word(level, a.low_word(), b.low_word())) }
        } else {
            let (a0, a1) = a.split();
            let (b0, b1) = b.split();
            let p00 = a0.mul(&b0);
            let p11 = a1.mul(&b1);
            let cross = a0.add(&a1).mul(&b0.add(&b1)).add(&p00).add(&p11);
            let c = tower_constant(level - 1);
            let lo = p00.add(&p11.mul(&c));
            let hi = cross.add(&p11);
            Self::join(level, &lo, &hi)
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// The unique square root (Frobenius is bijective on every L_m):
    /// `a^(2^(2^m − 1))`, i.e. 2^m − 1 repeated squarings.
    pub fn sqrt(&self) -> Self {
        let mut r = self.clone();
        let squarings = (1u64 << self.level) - 1;
        for _ in 0..squarings {
            r = r.square();
        }
        r
    }

    pub fn inv(&self) -> Result<Self, TowerError> {
        if self.is_zero() {
            return Err(TowerError::DivisionByZero);
        }
        if self.level == 0 {
            return Ok(self.clone()); // 1⁻¹ = 1
        }
        // Conjugate over L_{m-1}: y ↦ y + 1 sends a0 + a1·y to (a0+a1) + a1·y,
        // and the norm a·ā = a0² + a0a1 + c·a1² lands in L_{m-1}.
        let (a0, a1) = self.split();
        let c = tower_constant(self.level - 1);
        let norm = a0.square().add(&a0.mul(&a1)).add(&c.mul(&a1.square()));
        let norm_inv = norm.inv()?;
        let conj = Self::join(self.level, &a0.add(&a1), &a1);
        Ok(conj.mul(&norm_inv.embed(self.level).unwrap()))
    }

    /// Absolute trace to F_2: `Σ_{i<2^m} a^(2^i)`, returned as a bit.
    pub fn trace_to_f2(&self) -> u8 {
        let mut acc = self.clone();
        let mut frob = self.clone();
        let steps = (1u64 << self.level) - 1;
        for _ in 0..steps {
            frob = frob.square();
            acc = acc.add(&frob);
        }
        debug_assert!(acc.is_zero() || acc.is_one(), "absolute trace must land in F_2");
        u8::from(!acc.is_zero())
    }

    /// Solve `t² + t = self`. The root lives at the element's level when the
    /// F_2-linear map `t ↦ t² + t` hits it there (trace 0), and one level up
    /// otherwise: with trace 1, `g + c_m` has trace 0, and if `s² + s = g + c_m`
    /// then `t = s + y_{m+1}` works because `y² + y = c_m`.
    pub fn artin_schreier_solve(&self) -> Result<Self, TowerError> {
        let g = self.clone();
        if g.trace_to_f2() == 0 {
            Ok(solve_artin_schreier_at_level(&g))
        } else {
            let level = g.level;
            if level + 1 > MAX_LEVEL {
                return Err(TowerError::LevelCapExceeded);
            }
            let shifted = g.add(&tower_constant(level));
            debug_assert_eq!(shifted.trace_to_f2(), 0);
            let s = solve_artin_schreier_at_level(&shifted);
            Ok(s.embed(level + 1).unwrap().add(&Self::generator(level + 1)))
        }
    }
}

/// Solve `t² + t = g` inside `L_{level(g)}`, assuming trace(g) = 0: Gaussian
/// elimination on the coordinate matrix of the F_2-linear map `t ↦ t² + t`.
/// Free variables are set to 0, so the returned root is deterministic.
fn solve_artin_schreier_at_level(g: &FieldElement) -> FieldElement {
    let level = g.level;
    let dim = 1usize << level;
    // Column j = coordinates of basis_j² + basis_j; augmented with g.
    // Row-major bit matrix: row i holds the i-th coordinate of every column.
    let words = dim.div_ceil(64);
    let mut rows = vec![vec![0u64; words + 1]; dim];
    for j in 0..dim {
        let e = FieldElement::basis(level, j);
        let img = e.square().add(&e);
        for (i, row) in rows.iter_mut().enumerate() {
            if img.bit(i) {
                row[j / 64] |= 1 << (j % 64);
            }
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        if g.bit(i) {
            row[words] |= 1;
        }
    }
    // Forward elimination with partial pivoting by column order.
    let mut pivot_of_col = vec![usize::MAX; dim];
    let mut next_row = 0;
    for col in 0..dim {
        let Some(pr) = (next_row..dim).find(|&r| (rows[r][col / 64] >> (col % 64)) & 1 == 1)
        else {
            continue;
        };
        rows.swap(next_row, pr);
        for r in 0..dim {
            if r != next_row && (rows[r][col / 64] >> (col % 64)) & 1 == 1 {
                let (head, tail) = rows.split_at_mut(r.max(next_row));
                let (src, dst) = if r < next_row {
                    (&tail[0], &mut head[r])
                } else {
                    (&head[next_row], &mut tail[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d ^= s;
                }
            }
        }
        pivot_of_col[col] = next_row;
        next_row += 1;
        if next_row == dim {
            break;
        }
    }
    let mut t = FieldElement::zero(level);
    for col in 0..dim {
        let r = pivot_of_col[col];
        if r != usize::MAX && rows[r][words] & 1 == 1 {
            t.set_bit(col, true);
        }
    }
    debug_assert!(
        t.square().add(&t) == *g,
        "Artin–Schreier system must be consistent for trace-0 right-hand sides"
    );
    t
}

// ---------------------------------------------------------------------------
// Equality, hashing, formatting
// ---------------------------------------------------------------------------

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        let (m1, m2) = (self.min_level(), other.min_level());
        if m1 != m2 {
            return false;
        }
        let dim = 1usize << m1;
        if dim <= 64 {
            self.low_word() & level_mask(m1) == other.low_word() & level_mask(m1)
        } else {
            self.words()[..dim / 64] == other.words()[..dim / 64]
        }
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let m = self.min_level();
        m.hash(state);
        let dim = 1usize << m;
        if dim <= 64 {
            (self.low_word() & level_mask(m)).hash(state);
        } else {
            self.words()[..dim / 64].hash(state);
        }
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        FieldElement::add(self, rhs)
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        FieldElement::mul(self, rhs)
    }
}

impl fmt::Display for FieldElement {
    /// Canonical syntax: `0`, `1`, `w` (the L_1 generator at level 1), or
    /// `0b<bits>@<level>` with the coordinate bits little-endian (first
    /// character = basis index 0).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return write!(f, "{}", if self.is_zero() { "0" } else { "1" });
        }
        if self.level == 1 && self.low_word() == 0b10 {
            return write!(f, "w");
        }
        let dim = 1usize << self.level;
        let mut s = String::with_capacity(dim + 5);
        s.push_str("0b");
        for k in 0..dim {
            s.push(if self.bit(k) { '1' } else { '0' });
        }
        write!(f, "{s}@{}", self.level)
    }
}

impl FromStr for FieldElement {
    type Err = TowerError;

    fn from_str(s: &str) -> Result<Self, TowerError> {
        match s {
            "0" => return Ok(FieldElement::zero(0)),
            "1" => return Ok(FieldElement::one(0)),
            "w" => return Ok(FieldElement::generator(1)),
            _ => {}
        }
        let body = s.strip_prefix("0b").ok_or_else(|| TowerError::Parse {
            position: 0,
            message: format!("expected 0, 1, w, or 0b<bits>@<level>, got {s:?}"),
        })?;
        let at = body.rfind('@').ok_or_else(|| TowerError::Parse {
            position: s.len(),
            message: "missing @<level> suffix".into(),
        })?;
        let (bits_str, level_str) = (&body[..at], &body[at + 1..]);
        let level: u8 = level_str.parse().map_err(|_| TowerError::Parse {
            position: 2 + at + 1,
            message: format!("invalid level {level_str:?}"),
        })?;
        if level > MAX_LEVEL {
            return Err(TowerError::LevelCapExceeded);
        }
        let dim = 1usize << level;
        if bits_str.is_empty() || bits_str.len() > dim {
            return Err(TowerError::Parse {
                position: 2,
                message: format!("expected 1..={dim} bits for level {level}"),
            });
        }
        let mut e = FieldElement::zero(level);
        for (k, ch) in bits_str.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => e.set_bit(k, true),
                _ => {
                    return Err(TowerError::Parse {
                        position: 2 + k,
                        message: format!("invalid bit character {ch:?}"),
                    })
                }
            }
        }
        Ok(e)
    }
}
