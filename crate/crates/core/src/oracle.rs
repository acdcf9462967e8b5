//! Exhaustive finite-field ground truth over F_2 and F_4: Borel- and
//! parabolic-orbit enumeration, stabilizer solution sets, torus projections,
//! and degeneracy testing. Everything here is brute force by design and is
//! used to validate the structural modules at small sizes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::covers::{theorem2_constraints, StabilizerConstraint};
use crate::form::{GroupElement, Permutation, QuadraticForm};
use crate::normal::NormalForm;
use crate::tower::FieldElement;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("feasibility guard exceeded: {0}")]
    Guard(String),
    #[error("oracle arithmetic supports tower levels 0 and 1 only, got {0}")]
    UnsupportedLevel(u8),
}

// ---------------------------------------------------------------------------
// Small-field arithmetic on u8 codes
// ---------------------------------------------------------------------------

/// `F_{2^k}` for `k = 2^level ∈ {1, 2}`, elements coded as the little-endian
/// coordinate bits of the corresponding tower elements. The tables are built
/// from the tower arithmetic, so the two layers cannot drift apart.
#[derive(Clone, Debug)]
pub struct SmallField {
    pub level: u8,
    /// Field size 2^k.
    pub q: usize,
    mul: Vec<u8>,
    inv: Vec<u8>,
    sqrt: Vec<u8>,
}

impl SmallField {
    pub fn new(level: u8) -> Result<Self, OracleError> {
        if level > 1 {
            return Err(OracleError::UnsupportedLevel(level));
        }
        let q = 1usize << (1usize << level);
        let elem = |a: usize| FieldElement::from_bits(level, a as u64);
        let code = |e: &FieldElement| -> u8 {
            let mut v = 0u8;
            for k in 0..(1usize << level) {
                if e.bit(k) {
                    v |= 1 << k;
                }
            }
            v
        };
        let mut mul = vec![0u8; q * q];
        let mut inv = vec![0u8; q];
        let mut sqrt = vec![0u8; q];
        for a in 0..q {
            sqrt[a] = code(&elem(a).sqrt());
            if a != 0 {
                inv[a] = code(&elem(a).inv().unwrap());
            }
            for b in 0..q {
                mul[a * q + b] = code(&elem(a).mul(&elem(b)));
            }
        }
        Ok(SmallField { level, q, mul, inv, sqrt })
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    #[inline]
    pub fn sqrt(&self, a: u8) -> u8 {
        self.sqrt[a as usize]
    }

    pub fn elements(&self) -> std::ops::Range<u8> {
        0..self.q as u8
    }

    pub fn units(&self) -> std::ops::Range<u8> {
        1..self.q as u8
    }

    pub fn to_field_element(&self, code: u8) -> FieldElement {
        FieldElement::from_bits(self.level, code as u64)
    }

    /// The code of a tower element, when it lies in this field.
    pub fn from_field_element(&self, e: &FieldElement) -> Option<u8> {
        let embedded = e.embed(self.level).ok()?;
        let mut v = 0u8;
        for k in 0..(1usize << self.level) {
            if embedded.bit(k) {
                v |= 1 << k;
            }
        }
        Some(v)
    }
}

// ---------------------------------------------------------------------------
// Packed forms
// ---------------------------------------------------------------------------

/// Fixed-width packing of the coefficient table of a form over a small
/// field. Monomials are enumerated in lexicographic `(i,j)` order with the
/// first monomial in the most significant slot, so that comparing packed
/// words compares coefficient sequences lexicographically.
#[derive(Clone, Debug)]
pub struct FormCodec {
    pub n: usize,
    pub field: SmallField,
    monomials: Vec<(usize, usize)>,
    bits_per: u32,
}

impl FormCodec {
    pub fn new(n: usize, level: u8) -> Result<Self, OracleError> {
        let field = SmallField::new(level)?;
        let mut monomials = Vec::new();
        for i in 1..=n {
            for j in i..=n {
                monomials.push((i, j));
            }
        }
        let bits_per = 1u32 << level;
        if bits_per as usize * monomials.len() > 60 {
            return Err(OracleError::Guard(format!(
                "packed form for n = {n}, level = {level} does not fit a word"
            )));
        }
        Ok(FormCodec { n, field, monomials, bits_per })
    }

    pub fn monomials(&self) -> &[(usize, usize)] {
        &self.monomials
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    /// Number of forms over this field.
    pub fn total(&self) -> usize {
        1usize << (self.bits_per as usize * self.monomials.len())
    }

    pub fn pack(&self, coeffs: &[u8]) -> u64 {
        let m = self.monomials.len();
        let mut out = 0u64;
        for (idx, &c) in coeffs.iter().enumerate() {
            out |= (c as u64) << (self.bits_per as usize * (m - 1 - idx));
        }
        out
    }

    pub fn unpack(&self, packed: u64, out: &mut [u8]) {
        let m = self.monomials.len();
        let mask = (1u64 << self.bits_per) - 1;
        for (idx, slot) in out.iter_mut().enumerate() {
            *slot = ((packed >> (self.bits_per as usize * (m - 1 - idx))) & mask) as u8;
        }
    }

    pub fn to_quadratic_form(&self, packed: u64) -> QuadraticForm {
        let mut coeffs = vec![0u8; self.monomials.len()];
        self.unpack(packed, &mut coeffs);
        let mut q = QuadraticForm::zero(self.n);
        for (idx, &(i, j)) in self.monomials.iter().enumerate() {
            if coeffs[idx] != 0 {
                q.set_coef(i, j, self.field.to_field_element(coeffs[idx])).unwrap();
            }
        }
        q
    }

    /// Pack a form whose coefficients all lie in this field.
    pub fn from_quadratic_form(&self, q: &QuadraticForm) -> Option<u64> {
        let mut coeffs = vec![0u8; self.monomials.len()];
        for (&(i, j), c) in q.monomials() {
            let idx = self.monomial_index(i, j);
            coeffs[idx] = self.field.from_field_element(c)?;
        }
        Some(self.pack(&coeffs))
    }

    fn monomial_index(&self, i: usize, j: usize) -> usize {
        // rows 1..i-1 hold n, n-1, … entries
        let n = self.n;
        (i - 1) * (2 * n - i + 2) / 2 + (j - i)
    }

    /// Substitute `x_k ↦ x_k + c·x_l` into a coefficient table.
    pub fn apply_transvection(&self, coeffs: &[u8], k: usize, l: usize, c: u8, out: &mut [u8]) {
        let f = &self.field;
        out.copy_from_slice(coeffs);
        for (idx, &v) in coeffs.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (a, b) = self.monomials[idx];
            if a != k && b != k {
                continue;
            }
            if a == k && b == k {
                // x_k² picks up c²·x_l²
                let t = f.mul(v, f.mul(c, c));
                let idx2 = self.monomial_index(l, l);
                out[idx2] = f.add(out[idx2], t);
            } else {
                // x_k x_t picks up c·x_l x_t (t may equal l)
                let t = if a == k { b } else { a };
                let idx2 = self.monomial_index(l.min(t), l.max(t));
                out[idx2] = f.add(out[idx2], f.mul(v, c));
            }
        }
    }

    /// Substitute `x_k ↦ c·x_k`.
    pub fn apply_diagonal(&self, coeffs: &[u8], k: usize, c: u8, out: &mut [u8]) {
        let f = &self.field;
        out.copy_from_slice(coeffs);
        for (idx, &(a, b)) in self.monomials.iter().enumerate() {
            if a == k && b == k {
                out[idx] = f.mul(out[idx], f.mul(c, c));
            } else if a == k || b == k {
                out[idx] = f.mul(out[idx], c);
            }
        }
    }

    /// Relabel variables by a permutation.
    pub fn apply_permutation(&self, coeffs: &[u8], w: &Permutation, out: &mut [u8]) {
        out.fill(0);
        for (idx, &v) in coeffs.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (a, b) = self.monomials[idx];
            let (p, r) = (w.apply(a), w.apply(b));
            out[self.monomial_index(p.min(r), p.max(r))] = v;
        }
    }

    /// Act by an upper-triangular matrix in u8 codes (row-major, n×n).
    pub fn apply_upper(&self, coeffs: &[u8], u: &[u8], out: &mut [u8]) {
        let f = &self.field;
        let n = self.n;
        out.fill(0);
        for (idx, &v) in coeffs.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (a, b) = self.monomials[idx];
            for i in a..=n {
                let ga = u[(a - 1) * n + (i - 1)];
                if ga == 0 {
                    continue;
                }
                let vga = f.mul(v, ga);
                for j in b..=n {
                    let gb = u[(b - 1) * n + (j - 1)];
                    if gb == 0 {
                        continue;
                    }
                    let idx2 = self.monomial_index(i.min(j), i.max(j));
                    out[idx2] = f.add(out[idx2], f.mul(vga, gb));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// B-orbit enumeration
// ---------------------------------------------------------------------------

/// Generators of B(F): elementary transvections `x_k ↦ x_k + c·x_l` (k < l,
/// c a unit) and diagonal unit scalings. Their closure on V_n(F) equals the
/// B(F)-orbit partition, at O(n²·|F|) generators instead of |B(F)| elements.
#[derive(Clone, Debug)]
pub enum BGenerator {
    Transvection { k: usize, l: usize, c: u8 },
    Diagonal { k: usize, c: u8 },
}

pub fn borel_generators(n: usize, field: &SmallField) -> Vec<BGenerator> {
    let mut gens = Vec::new();
    for k in 1..=n {
        for l in k + 1..=n {
            for c in field.units() {
                gens.push(BGenerator::Transvection { k, l, c });
            }
        }
        for c in field.units() {
            if c != 1 {
                gens.push(BGenerator::Diagonal { k, c });
            }
        }
    }
    gens
}

/// The B(F)-orbit partition of all of `V_n(F)`.
pub struct OrbitTable {
    pub n: usize,
    pub level: u8,
    codec: FormCodec,
    /// Dense orbit id per packed form.
    orbit_ids: Vec<u32>,
    /// Lexicographically least member per orbit id.
    representatives: Vec<u64>,
}

impl OrbitTable {
    pub fn orbit_count(&self) -> usize {
        self.representatives.len()
    }

    pub fn orbit_id(&self, packed: u64) -> usize {
        self.orbit_ids[packed as usize] as usize
    }

    pub fn orbit_id_of_form(&self, q: &QuadraticForm) -> Option<usize> {
        self.codec.from_quadratic_form(q).map(|p| self.orbit_id(p))
    }

    pub fn representative(&self, id: usize) -> u64 {
        self.representatives[id]
    }

    pub fn representative_form(&self, id: usize) -> QuadraticForm {
        self.codec.to_quadratic_form(self.representatives[id])
    }

    pub fn codec(&self) -> &FormCodec {
        &self.codec
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // Keep the smaller index as root so roots are also lex-least members.
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi as usize] = lo;
    }
}

/// Feasibility guard: `|V_n(F)|·|B(F)| ≤ 2^36`.
fn orbit_guard(n: usize, level: u8, codec: &FormCodec) -> Result<(), OracleError> {
    let k = 1u32 << level;
    let q = codec.field.q as f64;
    let log2_v = codec.monomial_count() as f64 * k as f64;
    let upper_cells = n * n.saturating_sub(1) / 2;
    let log2_b = n as f64 * (q - 1.0).log2() + upper_cells as f64 * k as f64;
    if log2_v + log2_b > 36.0 {
        return Err(OracleError::Guard(format!(
            "|V|·|B| ≈ 2^{:.1} exceeds 2^36 for n = {n}, level = {level}",
            log2_v + log2_b
        )));
    }
    Ok(())
}

/// Union-find closure of `V_n(F)` under the Borel generators.
pub fn enumerate_b_orbits(n: usize, level: u8) -> Result<OrbitTable, OracleError> {
    let codec = FormCodec::new(n, level)?;
    orbit_guard(n, level, &codec)?;
    let total = codec.total();
    let mut parent: Vec<u32> = (0..total as u32).collect();
    let gens = borel_generators(n, &codec.field);
    let m = codec.monomial_count();
    let mut coeffs = vec![0u8; m];
    let mut image = vec![0u8; m];
    for v in 0..total as u64 {
        codec.unpack(v, &mut coeffs);
        for g in &gens {
            match *g {
                BGenerator::Transvection { k, l, c } => {
                    codec.apply_transvection(&coeffs, k, l, c, &mut image)
                }
                BGenerator::Diagonal { k, c } => codec.apply_diagonal(&coeffs, k, c, &mut image),
            }
            let w = codec.pack(&image);
            union(&mut parent, v as u32, w as u32);
        }
    }
    // Compress to dense ids; the root is the lex-least member by the union rule.
    let mut root_to_id: BTreeMap<u32, u32> = BTreeMap::new();
    let mut representatives = Vec::new();
    let mut orbit_ids = vec![0u32; total];
    for v in 0..total as u32 {
        let r = find(&mut parent, v);
        let id = *root_to_id.entry(r).or_insert_with(|| {
            representatives.push(r as u64);
            (representatives.len() - 1) as u32
        });
        orbit_ids[v as usize] = id;
    }
    Ok(OrbitTable { n, level, codec, orbit_ids, representatives })
}

// ---------------------------------------------------------------------------
// Fiber check: normalize must be constant on finite-field orbits
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FiberReport {
    pub n: usize,
    pub level: u8,
    pub forms_checked: usize,
    pub orbit_count: usize,
    pub distinct_images: usize,
    /// (packed form, its image, the first image seen for its orbit)
    pub violations: Vec<(u64, String, String)>,
}

impl FiberReport {
    pub fn passed(&self, census_count: usize) -> bool {
        self.violations.is_empty() && self.distinct_images == census_count
    }
}

/// Normalize every form of `V_n(F)` and verify constancy on each exhaustively
/// computed B(F)-orbit; also count the distinct normal-form images.
pub fn fiber_check(n: usize, level: u8) -> Result<FiberReport, OracleError> {
    let table = enumerate_b_orbits(n, level)?;
    let total = table.codec.total();
    let mut orbit_image: Vec<Option<NormalForm>> = vec![None; table.orbit_count()];
    let mut images: BTreeSet<NormalForm> = BTreeSet::new();
    let mut violations = Vec::new();
    for v in 0..total as u64 {
        let q = table.codec.to_quadratic_form(v);
        let nf = crate::normal::normalize(&q)
            .expect("desk-scale normalization stays far below the level cap")
            .nf;
        let id = table.orbit_id(v);
        match &orbit_image[id] {
            None => {
                orbit_image[id] = Some(nf.clone());
            }
            Some(first) if *first != nf => {
                violations.push((v, nf.to_string(), first.to_string()));
            }
            _ => {}
        }
        images.insert(nf);
    }
    Ok(FiberReport {
        n,
        level,
        forms_checked: total,
        orbit_count: table.orbit_count(),
        distinct_images: images.len(),
        violations,
    })
}

// ---------------------------------------------------------------------------
// Stabilizers
// ---------------------------------------------------------------------------

/// An upper-triangular matrix over a small field, row-major u8 codes.
pub type UMatrix = Vec<u8>;

pub fn umatrix_identity(n: usize) -> UMatrix {
    let mut u = vec![0u8; n * n];
    for k in 0..n {
        u[k * n + k] = 1;
    }
    u
}

pub fn umatrix_mul(field: &SmallField, n: usize, a: &UMatrix, b: &UMatrix) -> UMatrix {
    let mut out = vec![0u8; n * n];
    for r in 0..n {
        for k in 0..n {
            let x = a[r * n + k];
            if x == 0 {
                continue;
            }
            for c in 0..n {
                let y = b[k * n + c];
                if y != 0 {
                    out[r * n + c] = field.add(out[r * n + c], field.mul(x, y));
                }
            }
        }
    }
    out
}

pub fn umatrix_to_group_element(field: &SmallField, n: usize, u: &UMatrix) -> GroupElement {
    let entries: Vec<FieldElement> = u.iter().map(|&c| field.to_field_element(c)).collect();
    GroupElement::general(n, entries).expect("stabilizer elements are invertible")
}

/// All `b ∈ B(F)` with `b·q = q`, by searching the upper-triangular entries.
/// Cells forced to zero by the necessary stabilizer constraints of a normal
/// form are skipped, which keeps the candidate count feasible through n = 5
/// over F_4 for maximal-rank forms.
pub fn stabilizer_bruteforce(q: &NormalForm, level: u8) -> Result<Vec<UMatrix>, OracleError> {
    let n = q.n();
    let codec = FormCodec::new(n, level)?;
    let field = codec.field.clone();
    let mut forced_zero = vec![false; n * n];
    for c in theorem2_constraints(q) {
        let StabilizerConstraint::ZeroEntry { row, col } = c;
        if row < col {
            forced_zero[(row - 1) * n + (col - 1)] = true;
        }
    }
    let mut free_cells: Vec<(usize, usize)> = Vec::new(); // 0-based (r,c), r<c
    for r in 0..n {
        for c in r + 1..n {
            if !forced_zero[r * n + c] {
                free_cells.push((r, c));
            }
        }
    }
    let log2_candidates = n as f64 * ((field.q - 1) as f64).log2()
        + free_cells.len() as f64 * (field.q as f64).log2();
    if log2_candidates > 26.0 {
        return Err(OracleError::Guard(format!(
            "stabilizer search space ≈ 2^{log2_candidates:.1} exceeds 2^26 for {q}"
        )));
    }

    let target: Vec<u8> = {
        let mut coeffs = vec![0u8; codec.monomial_count()];
        let packed = codec
            .from_quadratic_form(&q.as_form())
            .expect("normal forms have 0/1 coefficients");
        codec.unpack(packed, &mut coeffs);
        coeffs
    };

    let mut out = Vec::new();
    let mut mat = umatrix_identity(n);
    let mut image = vec![0u8; codec.monomial_count()];
    let slots = n + free_cells.len();
    let mut values = vec![0u8; slots];
    loop {
        for (idx, v) in values.iter().enumerate() {
            if idx < n {
                mat[idx * n + idx] = v + 1; // diagonal: units are codes 1..q
            } else {
                let (r, c) = free_cells[idx - n];
                mat[r * n + c] = *v;
            }
        }
        codec.apply_upper(&target, &mat, &mut image);
        if image == target {
            out.push(mat.clone());
        }
        let mut pos = 0;
        loop {
            if pos == slots {
                return Ok(out);
            }
            let limit = if pos < n { field.q - 1 } else { field.q };
            values[pos] += 1;
            if (values[pos] as usize) < limit {
                break;
            }
            values[pos] = 0;
            pos += 1;
        }
    }
}

/// `|π(B_q(F))|`: the number of distinct diagonals among the stabilizer
/// solutions.
pub fn torus_projection_size(q: &NormalForm, level: u8) -> Result<usize, OracleError> {
    let n = q.n();
    let stab = stabilizer_bruteforce(q, level)?;
    let mut diags: BTreeSet<Vec<u8>> = BTreeSet::new();
    for u in &stab {
        diags.insert((0..n).map(|k| u[k * n + k]).collect());
    }
    Ok(diags.len())
}

/// Fit `|B_q(F_{2^k})| = c·(2^k − 1)^τ·2^(k·d)` over `k ∈ {1, 2}`, where the
/// torus exponent τ is measured independently from the diagonal projection.
/// For maximal-rank nondegenerate forms τ = 0 and this is the plain
/// unipotent fit; the torus factor makes the fit exact for every normal
/// form (the stabilizer of 0 is all of B, for example).
pub fn stabilizer_cardinality_fit(q: &NormalForm) -> Result<(u64, u32), OracleError> {
    let n1 = stabilizer_bruteforce(q, 0)?.len() as u64;
    let n2 = stabilizer_bruteforce(q, 1)?.len() as u64;
    let tau = torus_exponent(q)?;
    let denom = n1
        .checked_mul(3u64.pow(tau))
        .ok_or_else(|| OracleError::Guard("fit overflow".into()))?;
    if n2 % denom != 0 {
        return Err(OracleError::Guard(format!(
            "cardinalities ({n1}, {n2}) do not fit c·(2^k−1)^τ·2^(kd) with τ = {tau}"
        )));
    }
    let ratio = n2 / denom; // = 2^d
    if !ratio.is_power_of_two() {
        return Err(OracleError::Guard(format!("fit ratio {ratio} is not a power of 2")));
    }
    let d = ratio.trailing_zeros();
    if n1 % (1u64 << d) != 0 {
        return Err(OracleError::Guard("component count is not integral".into()));
    }
    Ok((n1 >> d, d))
}

fn torus_exponent(q: &NormalForm) -> Result<u32, OracleError> {
    let pi4 = torus_projection_size(q, 1)? as u64;
    let mut tau = 0u32;
    let mut p = 1u64;
    while p < pi4 {
        p *= 3;
        tau += 1;
    }
    if p != pi4 {
        return Err(OracleError::Guard(format!(
            "torus projection size {pi4} is not a power of 3"
        )));
    }
    Ok(tau)
}

/// Dimension of the B-orbit of `q` estimated from the stabilizer fit:
/// `dim B − (τ + d)`.
pub fn orbit_dimension_estimate(q: &NormalForm) -> Result<u32, OracleError> {
    let (_, d) = stabilizer_cardinality_fit(q)?;
    let tau = torus_exponent(q)?;
    let n = q.n() as u32;
    Ok(n * (n + 1) / 2 - tau - d)
}

// ---------------------------------------------------------------------------
// Parabolic orbits
// ---------------------------------------------------------------------------

/// The set of B(F)-orbit ids contained in `P_i(F)·q`: closure of `q` under
/// the Borel generators together with the simple reflection `s_i`.
pub fn parabolic_bruteforce(
    table: &OrbitTable,
    q: &NormalForm,
    i: usize,
) -> Result<BTreeSet<usize>, OracleError> {
    let codec = &table.codec;
    let n = table.n;
    assert!(i >= 1 && i < n);
    let start = codec
        .from_quadratic_form(&q.as_form())
        .expect("normal forms embed in every coefficient field");
    let gens = borel_generators(n, &codec.field);
    let w = Permutation::simple_reflection(n, i);
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    let mut queue: VecDeque<u64> = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    let m = codec.monomial_count();
    let mut coeffs = vec![0u8; m];
    let mut image = vec![0u8; m];
    while let Some(v) = queue.pop_front() {
        codec.unpack(v, &mut coeffs);
        for g in &gens {
            match *g {
                BGenerator::Transvection { k, l, c } => {
                    codec.apply_transvection(&coeffs, k, l, c, &mut image)
                }
                BGenerator::Diagonal { k, c } => codec.apply_diagonal(&coeffs, k, c, &mut image),
            }
            let packed = codec.pack(&image);
            if seen.insert(packed) {
                queue.push_back(packed);
            }
        }
        codec.apply_permutation(&coeffs, &w, &mut image);
        let packed = codec.pack(&image);
        if seen.insert(packed) {
            queue.push_back(packed);
        }
    }
    Ok(seen.into_iter().map(|v| table.orbit_id(v)).collect())
}

// ---------------------------------------------------------------------------
// Nondegeneracy
// ---------------------------------------------------------------------------

/// Compute the radical of the polarized bilinear form of `q` over `F_{2^k}`
/// and test whether `q` vanishes on a nonzero radical vector.
pub fn nondegeneracy_bruteforce(q: &QuadraticForm, level: u8) -> Result<bool, OracleError> {
    let n = q.n();
    if n > 8 {
        return Err(OracleError::Guard(format!("nondegeneracy guard n ≤ 8, got {n}")));
    }
    let field = SmallField::new(level)?;
    // Polarized matrix: m_{a,b} = coef(x_a x_b) for a ≠ b, zero diagonal.
    let mut m = vec![0u8; n * n];
    for (&(a, b), c) in q.monomials() {
        if a != b {
            let code = field
                .from_field_element(c)
                .ok_or_else(|| OracleError::Guard("coefficient outside the field".into()))?;
            m[(a - 1) * n + (b - 1)] = code;
            m[(b - 1) * n + (a - 1)] = code;
        }
    }
    // Kernel basis by Gauss–Jordan elimination.
    let mut rows = m.clone();
    let mut pivot_col_of_row = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(pr) = (rank..n).find(|&r| rows[r * n + col] != 0) else {
            continue;
        };
        for c in 0..n {
            rows.swap(rank * n + c, pr * n + c);
        }
        let inv = field.inv(rows[rank * n + col]);
        for c in 0..n {
            rows[rank * n + c] = field.mul(rows[rank * n + c], inv);
        }
        for r in 0..n {
            if r != rank && rows[r * n + col] != 0 {
                let factor = rows[r * n + col];
                for c in 0..n {
                    let s = field.mul(factor, rows[rank * n + c]);
                    rows[r * n + c] = field.add(rows[r * n + c], s);
                }
            }
        }
        pivot_col_of_row.push(col);
        rank += 1;
    }
    let pivot_cols: BTreeSet<usize> = pivot_col_of_row.iter().copied().collect();
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis: Vec<Vec<u8>> = Vec::new();
    for &fc in &free_cols {
        let mut v = vec![0u8; n];
        v[fc] = 1;
        for (r, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = rows[r * n + fc];
        }
        basis.push(v);
    }
    // Nondegenerate iff q(v) ≠ 0 for every nonzero radical vector.
    let dim = basis.len();
    let qsize = field.q;
    let mut combo = vec![0u8; dim];
    let mut point = vec![0u8; n];
    loop {
        point.fill(0);
        let mut nonzero_combo = false;
        for (t, &lambda) in combo.iter().enumerate() {
            if lambda != 0 {
                nonzero_combo = true;
                for a in 0..n {
                    point[a] = field.add(point[a], field.mul(lambda, basis[t][a]));
                }
            }
        }
        if nonzero_combo {
            let mut value = 0u8;
            for (&(a, b), c) in q.monomials() {
                let code = field.from_field_element(c).unwrap();
                value = field.add(value, field.mul(code, field.mul(point[a - 1], point[b - 1])));
            }
            if value == 0 {
                return Ok(false);
            }
        }
        let mut pos = 0;
        loop {
            if pos == dim {
                return Ok(true);
            }
            combo[pos] += 1;
            if (combo[pos] as usize) < qsize {
                break;
            }
            combo[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::{is_normal, normalize};

    fn nf(text: &str, n: usize) -> NormalForm {
        is_normal(&QuadraticForm::parse(text, n).unwrap()).unwrap()
    }

    #[test]
    fn orbits_n1_f2() {
        let table = enumerate_b_orbits(1, 0).unwrap();
        assert_eq!(table.orbit_count(), 2); // {0} and {x1²}
    }

    #[test]
    fn f2_vs_f4_artin_schreier_orbit_split() {
        // x1²+x1x2+x2² and x1²+x1x2 lie in different B(F_2)-orbits but the
        // same B(F_4)-orbit (t²+t = 1 needs ω).
        let a = QuadraticForm::parse("x1^2 + x1*x2 + x2^2", 2).unwrap();
        let b = QuadraticForm::parse("x1^2 + x1*x2", 2).unwrap();
        let t2 = enumerate_b_orbits(2, 0).unwrap();
        assert_ne!(t2.orbit_id_of_form(&a).unwrap(), t2.orbit_id_of_form(&b).unwrap());
        let t4 = enumerate_b_orbits(2, 1).unwrap();
        assert_eq!(t4.orbit_id_of_form(&a).unwrap(), t4.orbit_id_of_form(&b).unwrap());
    }

    #[test]
    fn fiber_check_small() {
        let report = fiber_check(2, 0).unwrap();
        assert!(report.violations.is_empty());
        assert_eq!(report.distinct_images, 5);
        let report = fiber_check(2, 1).unwrap();
        assert!(report.violations.is_empty());
        assert_eq!(report.distinct_images, 5);
        let report = fiber_check(0, 0).unwrap();
        assert_eq!(report.distinct_images, 1);
    }

    #[test]
    fn guard_rejects_large_inputs() {
        assert!(matches!(enumerate_b_orbits(4, 1), Err(OracleError::Guard(_))));
    }

    #[test]
    fn stabilizer_q4_tags() {
        // u_{1,2}, u_{3,4} ∈ {0,1}: four solutions over any field.
        let q = nf("x1^2 + x1*x2 + x3^2 + x3*x4", 4);
        for level in [0u8, 1] {
            let stab = stabilizer_bruteforce(&q, level).unwrap();
            assert_eq!(stab.len(), 4, "level {level}");
        }
        assert_eq!(stabilizer_cardinality_fit(&q).unwrap(), (4, 0));
    }

    #[test]
    fn stabilizer_q3_coupling() {
        // u_{1,3} = d², u_{2,3} = d² + d: |B_q(F_2)| = 2, |B_q(F_4)| = 4.
        let q = nf("x1^2 + x1*x3 + x2^2", 3);
        assert_eq!(stabilizer_bruteforce(&q, 0).unwrap().len(), 2);
        let stab4 = stabilizer_bruteforce(&q, 1).unwrap();
        assert_eq!(stab4.len(), 4);
        assert_eq!(stabilizer_cardinality_fit(&q).unwrap(), (1, 1));
        let field = SmallField::new(1).unwrap();
        for u in &stab4 {
            let u13 = u[2];
            let u23 = u[3 + 2];
            // u13² + u13 = u23²
            let lhs = field.add(field.mul(u13, u13), u13);
            assert_eq!(lhs, field.mul(u23, u23));
            assert_eq!(u[1], 0, "u_1,2 forced to zero");
        }
    }

    #[test]
    fn stabilizer_of_zero_is_whole_borel() {
        let q = NormalForm::zero(3);
        let stab = stabilizer_bruteforce(&q, 0).unwrap();
        assert_eq!(stab.len(), 8); // |B(F_2)| for n = 3
        let (c, d) = stabilizer_cardinality_fit(&q).unwrap();
        assert_eq!((c, d), (1, 3));
        assert_eq!(torus_projection_size(&q, 1).unwrap(), 27);
    }

    #[test]
    fn pruned_search_is_conservative() {
        // The necessary-constraint pruning must not lose solutions: compare
        // against an unpruned scan of all upper-triangular matrices at n = 3.
        for text in ["x1*x2", "x1^2 + x2*x3", "x1^2 + x1*x3 + x2^2", "x3^2"] {
            let q = nf(text, 3);
            for level in [0u8, 1] {
                let pruned = stabilizer_bruteforce(&q, level).unwrap();
                let codec = FormCodec::new(3, level).unwrap();
                let field = codec.field.clone();
                let target = codec.from_quadratic_form(&q.as_form()).unwrap();
                let mut coeffs = vec![0u8; codec.monomial_count()];
                codec.unpack(target, &mut coeffs);
                let mut image = vec![0u8; codec.monomial_count()];
                let mut count = 0usize;
                for d1 in field.units() {
                    for d2 in field.units() {
                        for d3 in field.units() {
                            for e12 in field.elements() {
                                for e13 in field.elements() {
                                    for e23 in field.elements() {
                                        let mat = vec![d1, e12, e13, 0, d2, e23, 0, 0, d3];
                                        codec.apply_upper(&coeffs, &mat, &mut image);
                                        if image == coeffs {
                                            count += 1;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                assert_eq!(pruned.len(), count, "{text} at level {level}");
            }
        }
    }

    #[test]
    fn torus_projection_examples() {
        assert_eq!(torus_projection_size(&nf("x1^2 + x1*x3 + x2^2", 3), 1).unwrap(), 1);
        assert_eq!(torus_projection_size(&nf("x1^2 + x2*x3", 3), 1).unwrap(), 3);
    }

    #[test]
    fn parabolic_case2_example() {
        // P_1(x1x2) = B(x1x2) ∪ B(x1²+x1x2) over F_4.
        let table = enumerate_b_orbits(2, 1).unwrap();
        let q = nf("x1*x2", 2);
        let ids = parabolic_bruteforce(&table, &q, 1).unwrap();
        let top = table.orbit_id_of_form(&nf("x1^2 + x1*x2", 2).as_form()).unwrap();
        let bottom = table.orbit_id_of_form(&q.as_form()).unwrap();
        assert_eq!(ids, BTreeSet::from([top, bottom]));
    }

    #[test]
    fn parabolic_collapse_exception() {
        // P_2(x1²+x2x3) is a single B-orbit over F_4.
        let table = enumerate_b_orbits(3, 1).unwrap();
        let q = nf("x1^2 + x2*x3", 3);
        let ids = parabolic_bruteforce(&table, &q, 2).unwrap();
        assert_eq!(ids.len(), 1);
    }

    #[test]
    fn parabolic_fixed_vertex() {
        // 1, 2 ∉ ind(x3²): the P_1-orbit is the B-orbit.
        let table = enumerate_b_orbits(3, 0).unwrap();
        let q = nf("x3^2", 3);
        let ids = parabolic_bruteforce(&table, &q, 1).unwrap();
        assert_eq!(ids.len(), 1);
    }

    #[test]
    fn nondegeneracy_examples() {
        let q = QuadraticForm::parse("x1^2 + x1*x2 + x3^2", 3).unwrap();
        assert!(nondegeneracy_bruteforce(&q, 1).unwrap());
        let q = QuadraticForm::parse("x1*x2", 3).unwrap();
        assert!(!nondegeneracy_bruteforce(&q, 1).unwrap());
        let q = QuadraticForm::parse("x1*x2", 2).unwrap();
        assert!(nondegeneracy_bruteforce(&q, 1).unwrap());
    }

    #[test]
    fn f2_orbits_refine_fibers() {
        // Over F_2 every orbit maps into one normalize fiber (never the
        // reverse: fibers are unions of orbits, so fibers ≤ orbits).
        let report = fiber_check(3, 0).unwrap();
        assert!(report.violations.is_empty());
        assert!(report.distinct_images <= report.orbit_count);
        assert_eq!(report.distinct_images, 15);
    }

    #[test]
    fn f4_orbits_refine_fibers_strictly() {
        // Same F_4-orbit always means the same normal form, but the converse
        // fails: x1²+x1x2+ω·x2² needs a level-2 root, so it sits in its own
        // F_4-orbit inside the fiber of x1²+x1x2.
        let table = enumerate_b_orbits(2, 1).unwrap();
        let total = table.codec.total();
        let images: Vec<NormalForm> = (0..total as u64)
            .map(|v| normalize(&table.codec.to_quadratic_form(v)).unwrap().nf)
            .collect();
        for v in 0..total {
            for w in 0..total {
                if table.orbit_id(v as u64) == table.orbit_id(w as u64) {
                    assert_eq!(images[v], images[w], "forms {v} and {w}");
                }
            }
        }
        let mut wq = QuadraticForm::zero(2);
        wq.set_coef(1, 1, FieldElement::one(0)).unwrap();
        wq.set_coef(1, 2, FieldElement::one(0)).unwrap();
        wq.set_coef(2, 2, FieldElement::generator(1)).unwrap();
        let plain = QuadraticForm::parse("x1^2 + x1*x2", 2).unwrap();
        assert_ne!(
            table.orbit_id_of_form(&wq).unwrap(),
            table.orbit_id_of_form(&plain).unwrap()
        );
        assert_eq!(normalize(&wq).unwrap().nf, normalize(&plain).unwrap().nf);
    }
}
