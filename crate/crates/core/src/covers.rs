//! Orbit double covers for nondegenerate maximal-rank forms: explicit
//! stabilizer presentations, component counts, the subset encoding of covers
//! (`K_n → Z_n → M_n`), the symmetric-group action on labels, and its
//! comparison against the parabolic classification case by case.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::form::Permutation;
use crate::normal::{normalize, NormalForm};
use crate::oracle::{OracleError, SmallField, UMatrix};
use crate::parabolic::{p_orbit_decompose, PhiClass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("form is not a nondegenerate normal form of maximal B-rank")]
    NotInQn,
    #[error("label has the wrong cardinality: expected {expected}, got {got}")]
    BadLabelSize { expected: usize, got: usize },
    #[error("label index {0} out of range")]
    BadLabelIndex(usize),
}

// ---------------------------------------------------------------------------
// Necessary stabilizer constraints (any normal form)
// ---------------------------------------------------------------------------

/// A linear constraint `b_{row,col} = 0` forced on every Borel stabilizer
/// element of a normal form. These are necessary, not sufficient; the oracle
/// uses them to prune its brute-force search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StabilizerConstraint {
    ZeroEntry { row: usize, col: usize },
}

/// The two necessary-constraint families: the row of each right endpoint
/// `j_t` vanishes away from the earlier right endpoints, and
/// `b_{i_s,i_t} = 0` whenever components `s < t` both carry ε = 1.
///
/// The row constraint applies to mixed components only: a pure square reads
/// as an arc to the virtual point `n+1`, whose row does not exist, and its
/// own row is genuinely unconstrained (the stabilizer of `x1² + x2x3` has
/// elements with `b_{1,3} ≠ 0`).
pub fn theorem2_constraints(nf: &NormalForm) -> Vec<StabilizerConstraint> {
    let mut out = Vec::new();
    let comps = nf.components();
    let mut earlier_right: Vec<usize> = Vec::new();
    for c in comps {
        if !c.delta {
            continue;
        }
        let j_t = c.j;
        earlier_right.push(j_t);
        for z in 1..=nf.n() {
            if z != j_t && !earlier_right.contains(&z) {
                out.push(StabilizerConstraint::ZeroEntry { row: j_t, col: z });
            }
        }
    }
    for (s, cs) in comps.iter().enumerate() {
        if !cs.eps {
            continue;
        }
        for ct in &comps[s + 1..] {
            if ct.eps {
                out.push(StabilizerConstraint::ZeroEntry { row: cs.i, col: ct.i });
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// Stabilizer presentations for Q_n
// ---------------------------------------------------------------------------

/// How the sums of a component's pair entries are constrained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationKind {
    /// `Σ u_{i_t,j_t} ∈ {0,1}`: the component contributes one tag bit and
    /// doubles the number of stabilizer components.
    BinaryTag,
    /// `(Σ u_{i_t,j_t})² + Σ u_{i_t,j_t} = (Σ u_{s,j_t})²` with `s` the pure
    /// square index: the Artin–Schreier coupling of the odd component. The
    /// solution set is connected and contributes no tag.
    AsCoupled { square_entries: Vec<(usize, usize)> },
}

/// The exact constraint at one right endpoint: the vanishing of
/// `coef(x_{j_t}², u·q)` reads `c² + c = Σ (coupled entries)²` for
/// `c = u_{i_t,j_t}`. Summing these over the component gives the summed
/// relation of `RelationKind`, which is strictly weaker whenever the
/// component has several pairs or a square row: the cross entries feed each
/// endpoint equation individually.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairEquation {
    /// The `(i_t, j_t)` position constrained by this equation.
    pub diag: (usize, usize),
    /// Positions whose squares sum to `diag² + diag`.
    pub rhs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentRelation {
    /// The `(i_t, j_t)` matrix positions of the component's pairs.
    pub pair_entries: Vec<(usize, usize)>,
    /// The summed relation (tag bookkeeping).
    pub kind: RelationKind,
    /// The per-endpoint Artin–Schreier equations cutting out the exact
    /// solution set.
    pub equations: Vec<PairEquation>,
}

/// Explicit description of `B_q` for `q ∈ Q_n`: the stabilizer is unipotent
/// (all diagonal entries 1), the listed entries vanish, symmetric pairs are
/// equal, and each connected component contributes at most one relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerPresentation {
    pub n: usize,
    pub zero_entries: BTreeSet<(usize, usize)>,
    /// `u_a = u_b` equalities, each with `a < b` lexicographically.
    pub symmetry_pairs: Vec<((usize, usize), (usize, usize))>,
    /// One representative per symmetry pair: the independent parameters.
    pub free_entries: BTreeSet<(usize, usize)>,
    pub component_relations: Vec<ComponentRelation>,
}

pub fn stabilizer_presentation(q: &NormalForm) -> Result<StabilizerPresentation, CoverError> {
    if !q.is_max_rank_nondegenerate() {
        return Err(CoverError::NotInQn);
    }
    let n = q.n();
    let mut nonzero: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut symmetry_pairs = Vec::new();
    let mut free_entries = BTreeSet::new();
    let mut component_relations = Vec::new();

    for block in q.connected_components() {
        let pairs: Vec<(usize, usize)> = block.index_pairs();
        let square: Option<usize> = block.pure_square();
        for (s, &(i_s, j_s)) in pairs.iter().enumerate() {
            for &(i_t, j_t) in &pairs[s + 1..] {
                let fwd = (i_s < j_t).then_some((i_s, j_t));
                let bwd = (i_t < j_s).then_some((i_t, j_s));
                match (fwd, bwd) {
                    (Some(a), Some(b)) => {
                        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                        symmetry_pairs.push((lo, hi));
                        free_entries.insert(lo);
                        nonzero.insert(lo);
                        nonzero.insert(hi);
                    }
                    // A one-sided pair forces the valid entry to zero; it is
                    // simply not listed as allowed.
                    _ => {}
                }
            }
        }
        let pair_entries: Vec<(usize, usize)> = pairs.clone();
        for &e in &pair_entries {
            nonzero.insert(e);
        }
        if pairs.is_empty() {
            // isolated pure square: trivial stabilizer block, no relation
            continue;
        }
        let square_entries: Vec<(usize, usize)> = match square {
            Some(s) => {
                let entries: Vec<(usize, usize)> =
                    pairs.iter().filter(|&&(_, j)| s < j).map(|&(_, j)| (s, j)).collect();
                debug_assert!(
                    !entries.is_empty(),
                    "a square joined to pairs must see a later right endpoint"
                );
                for &e in &entries {
                    nonzero.insert(e);
                }
                entries
            }
            None => Vec::new(),
        };
        // One Artin–Schreier equation per right endpoint j_t:
        // u_{i_t,j_t}² + u_{i_t,j_t} = Σ_{s≠t} u_{i_s,j_t}² + u_{sq,j_t}².
        let equations: Vec<PairEquation> = pairs
            .iter()
            .map(|&(i_t, j_t)| {
                let mut rhs: Vec<(usize, usize)> = pairs
                    .iter()
                    .filter(|&&(i_s, j_s)| (i_s, j_s) != (i_t, j_t) && i_s < j_t)
                    .map(|&(i_s, _)| (i_s, j_t))
                    .collect();
                if let Some(s) = square {
                    if s < j_t {
                        rhs.push((s, j_t));
                    }
                }
                PairEquation { diag: (i_t, j_t), rhs }
            })
            .collect();
        let kind = match square {
            None => RelationKind::BinaryTag,
            Some(_) => RelationKind::AsCoupled { square_entries },
        };
        component_relations.push(ComponentRelation { pair_entries, kind, equations });
    }

    let mut zero_entries = BTreeSet::new();
    for r in 1..=n {
        for c in r + 1..=n {
            if !nonzero.contains(&(r, c)) {
                zero_entries.insert((r, c));
            }
        }
    }
    Ok(StabilizerPresentation {
        n,
        zero_entries,
        symmetry_pairs,
        free_entries,
        component_relations,
    })
}

impl StabilizerPresentation {
    /// The tag relations, in component order.
    pub fn tags(&self) -> Vec<&ComponentRelation> {
        self.component_relations
            .iter()
            .filter(|r| matches!(r.kind, RelationKind::BinaryTag))
            .collect()
    }

    /// Materialize the full solution set over `F_{2^k}` as upper-triangular
    /// u8 matrices. Every free parameter and every relation branch is
    /// enumerated; sizes stay tiny at oracle scales.
    pub fn solutions(&self, level: u8) -> Result<Vec<UMatrix>, OracleError> {
        let field = SmallField::new(level)?;
        let n = self.n;
        let mut base = vec![0u8; n * n];
        for k in 0..n {
            base[k * n + k] = 1;
        }
        let mut out = vec![base];
        let set = |m: &mut UMatrix, (r, c): (usize, usize), v: u8| m[(r - 1) * n + (c - 1)] = v;

        for &(a, b) in &self.symmetry_pairs {
            let mut next = Vec::with_capacity(out.len() * field.q);
            for m in &out {
                for v in field.elements() {
                    let mut m2 = m.clone();
                    set(&mut m2, a, v);
                    set(&mut m2, b, v);
                    next.push(m2);
                }
            }
            out = next;
        }

        for rel in &self.component_relations {
            // Square-row entries range freely subject only to the endpoint
            // equations, so enumerate them like the symmetric parameters.
            if let RelationKind::AsCoupled { square_entries } = &rel.kind {
                for &pos in square_entries {
                    let mut next = Vec::with_capacity(out.len() * field.q);
                    for m in &out {
                        for v in field.elements() {
                            let mut m2 = m.clone();
                            set(&mut m2, pos, v);
                            next.push(m2);
                        }
                    }
                    out = next;
                }
            }
            // Then each endpoint equation c² + c = Σ rhs² pins its diagonal
            // entry to the Artin–Schreier roots (possibly none in this
            // field, which discards the branch).
            for eq in &rel.equations {
                let mut next = Vec::new();
                for m in &out {
                    let rhs_value = eq.rhs.iter().fold(0u8, |acc, &(r, c)| {
                        let v = m[(r - 1) * n + (c - 1)];
                        field.add(acc, field.mul(v, v))
                    });
                    for root in field.elements() {
                        if field.add(field.mul(root, root), root) == rhs_value {
                            let mut m2 = m.clone();
                            set(&mut m2, eq.diag, root);
                            next.push(m2);
                        }
                    }
                }
                out = next;
            }
        }
        Ok(out)
    }

    /// The tag vector `φ(u)` of a solution: per tag component, the sum of
    /// its pair entries. This is the homomorphism whose kernel is the
    /// identity component of the stabilizer.
    pub fn phi_epsilon(&self, field: &SmallField, u: &UMatrix) -> Vec<u8> {
        let n = self.n;
        self.tags()
            .iter()
            .map(|rel| {
                rel.pair_entries
                    .iter()
                    .fold(0u8, |acc, &(r, c)| field.add(acc, u[(r - 1) * n + (c - 1)]))
            })
            .collect()
    }
}

impl fmt::Display for StabilizerPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unipotent; zero: ")?;
        let zeros: Vec<String> =
            self.zero_entries.iter().map(|(r, c)| format!("u{r},{c}")).collect();
        write!(f, "{}", if zeros.is_empty() { "none".into() } else { zeros.join(" ") })?;
        for (a, b) in &self.symmetry_pairs {
            write!(f, "; u{},{} = u{},{}", a.0, a.1, b.0, b.1)?;
        }
        for rel in &self.component_relations {
            for eq in &rel.equations {
                let c = format!("u{},{}", eq.diag.0, eq.diag.1);
                if eq.rhs.is_empty() {
                    write!(f, "; {c} in {{0,1}}")?;
                } else {
                    let rhs: Vec<String> =
                        eq.rhs.iter().map(|(r, k)| format!("u{r},{k}^2")).collect();
                    write!(f, "; {c}^2 + {c} = {}", rhs.join(" + "))?;
                }
            }
            let sum: Vec<String> =
                rel.pair_entries.iter().map(|(r, c)| format!("u{r},{c}")).collect();
            match &rel.kind {
                RelationKind::BinaryTag => {
                    if rel.pair_entries.len() > 1 {
                        write!(f, "; {} in {{0,1}}", sum.join(" + "))?;
                    }
                }
                RelationKind::AsCoupled { square_entries } => {
                    let rhs: Vec<String> =
                        square_entries.iter().map(|(r, c)| format!("u{r},{c}")).collect();
                    write!(
                        f,
                        "; ({s})^2 + {s} = ({r})^2",
                        s = sum.join(" + "),
                        r = rhs.join(" + ")
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Number of connected components of `B_q`: `2^f` for even `n`, `2^(f-1)`
/// for odd, with `f` the number of connected components of the (extended)
/// diagram.
pub fn component_count(q: &NormalForm) -> Result<u64, CoverError> {
    if !q.is_max_rank_nondegenerate() {
        return Err(CoverError::NotInQn);
    }
    let f = q.cc() as u32;
    let count = if q.n() % 2 == 0 { 1u64 << f } else { 1u64 << (f - 1) };
    debug_assert_eq!(
        count,
        1u64 << stabilizer_presentation(q).unwrap().tags().len(),
        "component count must equal 2^#tags"
    );
    Ok(count)
}

// ---------------------------------------------------------------------------
// Cover labels and the bijections
// ---------------------------------------------------------------------------

/// A subset of `{1, …, n}` naming one double cover: `n/2` elements for even
/// `n` and `(n+1)/2` for odd `n` (the worked low-rank tables use 2-element
/// sets already at n = 3, which pins the odd-size convention).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoverLabel {
    pub n: usize,
    pub m: BTreeSet<usize>,
}

pub fn label_size(n: usize) -> usize {
    n.div_ceil(2)
}

impl CoverLabel {
    pub fn new(n: usize, m: BTreeSet<usize>) -> Result<Self, CoverError> {
        if m.len() != label_size(n) {
            return Err(CoverError::BadLabelSize { expected: label_size(n), got: m.len() });
        }
        if let Some(&bad) = m.iter().find(|&&v| v < 1 || v > n) {
            return Err(CoverError::BadLabelIndex(bad));
        }
        Ok(CoverLabel { n, m })
    }
}

impl fmt::Display for CoverLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.m.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A cover in orbit coordinates: the underlying form plus one bit per tag
/// component.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZElement {
    pub q: NormalForm,
    pub eps: Vec<bool>,
}

/// Block data shared by `pi` and `pi_inv`.
fn block_endpoints(block: &NormalForm) -> (Vec<usize>, Vec<usize>, Option<usize>) {
    let lefts: Vec<usize> = block.index_pairs().iter().map(|&(i, _)| i).collect();
    let rights: Vec<usize> = block.index_pairs().iter().map(|&(_, j)| j).collect();
    (lefts, rights, block.pure_square())
}

/// `π: Z_n → M_n`: each tag component contributes its left endpoints when
/// its bit is 0 and its right endpoints when it is 1; the square component
/// always contributes its left endpoints together with the square index.
pub fn pi(z: &ZElement) -> Result<CoverLabel, CoverError> {
    if !z.q.is_max_rank_nondegenerate() {
        return Err(CoverError::NotInQn);
    }
    let blocks = z.q.connected_components();
    let mut m = BTreeSet::new();
    let mut bit = z.eps.iter();
    for block in &blocks {
        let (lefts, rights, square) = block_endpoints(block);
        match square {
            Some(s) => {
                m.extend(lefts);
                m.insert(s);
            }
            None => {
                let side_right = *bit.next().expect("one bit per tag component");
                m.extend(if side_right { rights } else { lefts });
            }
        }
    }
    assert!(bit.next().is_none(), "eps vector longer than the tag count");
    CoverLabel::new(z.q.n(), m)
}

/// `π⁻¹: M_n → Z_n`: pair the sorted label against its sorted complement in
/// `{1, …, n}` (or `{1, …, n+1}` for odd `n`) positionally, orient each pair
/// ascending, rebuild the form (an arc at the virtual point restricts to the
/// pure square), and read each tag bit off the side the label sits on.
pub fn pi_inv(label: &CoverLabel) -> Result<ZElement, CoverError> {
    let n = label.n;
    let extended = n + n % 2;
    if label.m.len() != label_size(n) {
        return Err(CoverError::BadLabelSize { expected: label_size(n), got: label.m.len() });
    }
    let m_sorted: Vec<usize> = label.m.iter().copied().collect();
    let complement: Vec<usize> =
        (1..=extended).filter(|v| !label.m.contains(v)).collect();
    debug_assert_eq!(m_sorted.len(), complement.len());
    let mut components = Vec::new();
    for (&a, &b) in m_sorted.iter().zip(&complement) {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi > n {
            components.push(crate::normal::NormalComponent::square(lo));
        } else {
            components.push(crate::normal::NormalComponent::pair(lo, hi, true));
        }
    }
    components.sort();
    let q = NormalForm::new(n, components)
        .expect("positional pairing of sorted sequences is non-nesting");
    let blocks = q.connected_components();
    let mut eps = Vec::new();
    for block in &blocks {
        let (lefts, rights, square) = block_endpoints(block);
        if let Some(s) = square {
            debug_assert!(label.m.contains(&s));
            debug_assert!(lefts.iter().all(|v| label.m.contains(v)));
            continue;
        }
        let on_left = lefts.iter().filter(|v| label.m.contains(v)).count();
        let on_right = rights.iter().filter(|v| label.m.contains(v)).count();
        assert!(
            (on_left == lefts.len() && on_right == 0)
                || (on_right == rights.len() && on_left == 0),
            "label indices of one component must sit on one side ({label})"
        );
        eps.push(on_right > 0);
    }
    Ok(ZElement { q, eps })
}

/// `ρ`: a cover label resolves to its orbit coordinates.
pub fn rho(cover: &CoverLabel) -> Result<ZElement, CoverError> {
    pi_inv(cover)
}

/// The covers of one orbit, as labels, in tag-vector binary order (all-zero
/// first).
pub fn covers(q: &NormalForm) -> Result<Vec<CoverLabel>, CoverError> {
    if !q.is_max_rank_nondegenerate() {
        return Err(CoverError::NotInQn);
    }
    let tags = stabilizer_presentation(q)?.tags().len();
    let mut out = Vec::with_capacity(1 << tags);
    for bits in 0..(1u32 << tags) {
        let eps: Vec<bool> = (0..tags).map(|k| bits >> k & 1 == 1).collect();
        out.push(pi(&ZElement { q: q.clone(), eps })?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Weyl action on labels
// ---------------------------------------------------------------------------

pub fn weyl_apply(w: &Permutation, label: &CoverLabel) -> CoverLabel {
    CoverLabel { n: label.n, m: label.m.iter().map(|&v| w.apply(v)).collect() }
}

/// All of `M_n`.
pub fn all_cover_labels(n: usize) -> Vec<CoverLabel> {
    let size = label_size(n);
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        n: usize,
        size: usize,
        from: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<CoverLabel>,
    ) {
        if current.len() == size {
            out.push(CoverLabel { n, m: current.iter().copied().collect() });
            return;
        }
        for v in from..=n {
            current.push(v);
            rec(n, size, v + 1, current, out);
            current.pop();
        }
    }
    rec(n, size, 1, &mut current, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct WeylGraph {
    pub n: usize,
    pub labels: Vec<CoverLabel>,
    /// `(u, v, i)` with `u < v`: `s_i` swaps the labels at `u` and `v`.
    pub edges: Vec<(usize, usize, usize)>,
}

pub fn weyl_orbit_graph(n: usize) -> WeylGraph {
    let labels = all_cover_labels(n);
    let mut edges = Vec::new();
    for i in 1..n {
        let w = Permutation::simple_reflection(n, i);
        for (u, label) in labels.iter().enumerate() {
            let image = weyl_apply(&w, label);
            if image != *label {
                let v = labels.binary_search(&image).expect("labels are sorted");
                if u < v {
                    edges.push((u, v, i));
                }
            }
        }
    }
    edges.sort();
    WeylGraph { n, labels, edges }
}

impl WeylGraph {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, label) in self.labels.iter().enumerate() {
            let z = pi_inv(label).expect("all labels decode");
            out.push_str(&format!("vertex\t{k}\t{label}\tq={}\n", z.q));
        }
        for &(u, v, i) in &self.edges {
            out.push_str(&format!("edge\t{}\t{}\ts{}\n", self.labels[u], self.labels[v], i));
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph weyl {\n");
        for label in &self.labels {
            out.push_str(&format!("  \"{label}\";\n"));
        }
        for &(u, v, i) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"s{}\"];\n",
                self.labels[u], self.labels[v], i
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_tikz(&self) -> String {
        let mut out = String::from(
            "\\documentclass[tikz]{standalone}\n\\begin{document}\n\\begin{tikzpicture}\n",
        );
        let cols = (self.labels.len() as f64).sqrt().ceil() as usize;
        for (k, label) in self.labels.iter().enumerate() {
            let (x, y) = ((k % cols) as f64 * 2.5, (k / cols) as f64 * 2.0);
            out.push_str(&format!("  \\node (v{k}) at ({x},{y}) {{$\\{{{}\\}}$}};\n", {
                let items: Vec<String> = label.m.iter().map(|v| v.to_string()).collect();
                items.join(",")
            }));
        }
        for &(u, v, i) in &self.edges {
            out.push_str(&format!(
                "  \\draw (v{u}) -- node[midway,above] {{\\tiny $s_{i}$}} (v{v});\n"
            ));
        }
        out.push_str("\\end{tikzpicture}\n\\end{document}\n");
        out
    }
}

// ---------------------------------------------------------------------------
// Case comparison with the parabolic classification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnopCase {
    /// `s_i` fixes the underlying orbit and flips the tag of the `(i, i+1)`
    /// component.
    Toggle,
    /// `s_i` fixes the label.
    Fixed,
    /// `s_i` carries the cover to a cover of the reflected orbit.
    Move,
}

#[derive(Clone, Debug)]
pub struct KnopRecord {
    pub label: CoverLabel,
    pub i: usize,
    pub case: KnopCase,
    pub phi: PhiClass,
    /// Whether `i` or `i+1` lies in the connected component carrying the
    /// pure square (odd `n` only).
    pub square_contact: bool,
    /// Whether `i` and `i+1` lie in different connected components of the
    /// underlying form. A fixed label over a U0 reflection occurs exactly
    /// in this cross-component situation (the square contact is one case of
    /// it); within a single component a U0 reflection always moves labels.
    pub cross_component: bool,
    /// For the move case: the reflected label's orbit equals the normalized
    /// reflected form.
    pub target_matches: Option<bool>,
    pub consistent: bool,
}

/// Classify the action of `s_i` on one cover label and check it against the
/// parabolic structure: a tag toggle pairs with N0, a fixed label with T0
/// (or with U0 across two components, where the aligned tag bits keep the
/// label pointwise fixed while sibling covers move), and a move with U0
/// onto the normalized reflected form.
pub fn knop_case(label: &CoverLabel, i: usize) -> Result<KnopRecord, CoverError> {
    let n = label.n;
    assert!(i >= 1 && i < n);
    let z = pi_inv(label)?;
    let q = &z.q;
    let w = Permutation::simple_reflection(n, i);
    let image = weyl_apply(&w, label);
    let phi = p_orbit_decompose(q, i).computed;
    let blocks = q.connected_components();
    let square_contact = blocks
        .iter()
        .any(|b| b.pure_square().is_some() && (b.ind().contains(&i) || b.ind().contains(&(i + 1))));
    let block_of = |v: usize| blocks.iter().position(|b| b.ind().contains(&v));
    let cross_component = match (block_of(i), block_of(i + 1)) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    };

    if image == *label {
        let consistent =
            phi == PhiClass::T0 || (cross_component && phi == PhiClass::U0);
        return Ok(KnopRecord {
            label: label.clone(),
            i,
            case: KnopCase::Fixed,
            phi,
            square_contact,
            cross_component,
            target_matches: None,
            consistent,
        });
    }
    let z2 = pi_inv(&image)?;
    if z2.q == *q {
        let flips: Vec<usize> =
            z.eps.iter().zip(&z2.eps).enumerate().filter(|(_, (a, b))| a != b).map(|(k, _)| k).collect();
        let pair_present = q.index_pairs().contains(&(i, i + 1));
        let consistent = phi == PhiClass::N0 && flips.len() == 1 && pair_present;
        Ok(KnopRecord {
            label: label.clone(),
            i,
            case: KnopCase::Toggle,
            phi,
            square_contact,
            cross_component,
            target_matches: None,
            consistent,
        })
    } else {
        let reflected = normalize(&q.as_form().permute(&w)).expect("desk-scale").nf;
        let target_matches = z2.q == reflected;
        let consistent = phi == PhiClass::U0 && target_matches;
        Ok(KnopRecord {
            label: label.clone(),
            i,
            case: KnopCase::Move,
            phi,
            square_contact,
            cross_component,
            target_matches: Some(target_matches),
            consistent,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{binomial, enumerate_max_rank};
    use crate::form::QuadraticForm;
    use crate::normal::is_normal;
    use num_bigint::BigUint;

    fn nf(text: &str, n: usize) -> NormalForm {
        is_normal(&QuadraticForm::parse(text, n).unwrap()).unwrap()
    }

    fn label(n: usize, items: &[usize]) -> CoverLabel {
        CoverLabel::new(n, items.iter().copied().collect()).unwrap()
    }

    #[test]
    fn theorem2_examples() {
        // x1x2 (n=2): row 2 vanishes away from column 2.
        let cs = theorem2_constraints(&nf("x1*x2", 2));
        assert!(cs.contains(&StabilizerConstraint::ZeroEntry { row: 2, col: 1 }));
        assert!(!cs.contains(&StabilizerConstraint::ZeroEntry { row: 2, col: 2 }));

        // ε-pair constraint: b_{1,3} = 0 for x1²+x1x2+x3².
        let cs = theorem2_constraints(&nf("x1^2 + x1*x2 + x3^2", 3));
        assert!(cs.contains(&StabilizerConstraint::ZeroEntry { row: 1, col: 3 }));

        assert!(theorem2_constraints(&NormalForm::zero(3)).is_empty());
    }

    #[test]
    fn presentation_q4_split() {
        let p = stabilizer_presentation(&nf("x1^2 + x1*x2 + x3^2 + x3*x4", 4)).unwrap();
        assert_eq!(p.component_relations.len(), 2);
        assert!(p.component_relations.iter().all(|r| r.kind == RelationKind::BinaryTag));
        assert_eq!(p.component_relations[0].pair_entries, vec![(1, 2)]);
        assert_eq!(p.component_relations[1].pair_entries, vec![(3, 4)]);
        assert!(p.free_entries.is_empty());
        // everything else above the diagonal is zero
        assert_eq!(p.zero_entries.len(), 4); // (1,3),(1,4),(2,3),(2,4)
    }

    #[test]
    fn presentation_q4_crossing() {
        let p = stabilizer_presentation(&nf("x1^2 + x1*x3 + x2^2 + x2*x4", 4)).unwrap();
        assert_eq!(p.component_relations.len(), 1);
        let rel = &p.component_relations[0];
        assert_eq!(rel.pair_entries, vec![(1, 3), (2, 4)]);
        assert_eq!(p.symmetry_pairs, vec![((1, 4), (2, 3))]);
        assert_eq!(p.free_entries.iter().collect::<Vec<_>>(), vec![&(1, 4)]);
        // per-endpoint couplings: u13²+u13 = u23², u24²+u24 = u14²
        assert_eq!(
            rel.equations,
            vec![
                PairEquation { diag: (1, 3), rhs: vec![(2, 3)] },
                PairEquation { diag: (2, 4), rhs: vec![(1, 4)] },
            ]
        );
    }

    #[test]
    fn presentation_q3_coupling() {
        let p = stabilizer_presentation(&nf("x1^2 + x1*x3 + x2^2", 3)).unwrap();
        assert_eq!(p.component_relations.len(), 1);
        match &p.component_relations[0].kind {
            RelationKind::AsCoupled { square_entries } => {
                assert_eq!(square_entries, &vec![(2, 3)]);
            }
            other => panic!("expected coupling, got {other:?}"),
        }
        assert_eq!(p.component_relations[0].pair_entries, vec![(1, 3)]);
        // u_{1,2} is zero
        assert!(p.zero_entries.contains(&(1, 2)));
    }

    #[test]
    fn solution_counts() {
        let q43 = nf("x1^2 + x1*x2 + x3^2 + x3*x4", 4);
        let p = stabilizer_presentation(&q43).unwrap();
        assert_eq!(p.solutions(0).unwrap().len(), 4);
        assert_eq!(p.solutions(1).unwrap().len(), 4);

        let q3 = nf("x1^2 + x1*x3 + x2^2", 3);
        let p = stabilizer_presentation(&q3).unwrap();
        assert_eq!(p.solutions(0).unwrap().len(), 2);
        assert_eq!(p.solutions(1).unwrap().len(), 4);

        // The crossing form: the symmetric parameter a must have trace 0
        // (each endpoint needs a root of c² + c = a²), so over F_2 only
        // a = 0 survives, and over F_4 only a ∈ {0, 1}; each endpoint then
        // has its own pair of roots.
        let p4 = stabilizer_presentation(&nf("x1^2 + x1*x3 + x2^2 + x2*x4", 4)).unwrap();
        assert_eq!(p4.solutions(0).unwrap().len(), 1 * 2 * 2);
        assert_eq!(p4.solutions(1).unwrap().len(), 2 * 2 * 2);
    }

    #[test]
    fn component_counts() {
        assert_eq!(component_count(&nf("x1^2 + x1*x2 + x3^2 + x3*x4", 4)).unwrap(), 4);
        assert_eq!(component_count(&nf("x1^2 + x1*x3 + x2^2", 3)).unwrap(), 1);
        assert_eq!(component_count(&nf("x1^2 + x1*x2 + x3^2", 3)).unwrap(), 2);
        assert!(component_count(&nf("x1*x2", 2)).is_err());
    }

    #[test]
    fn covers_sl3_sl4_tables() {
        let q = nf("x1^2 + x1*x2 + x3^2", 3);
        let cs = covers(&q).unwrap();
        assert_eq!(cs, vec![label(3, &[1, 3]), label(3, &[2, 3])]);

        let p = nf("x1^2 + x1*x3 + x2^2", 3);
        assert_eq!(covers(&p).unwrap(), vec![label(3, &[1, 2])]);

        let q = nf("x1^2 + x1*x2 + x3^2 + x3*x4", 4);
        assert_eq!(
            covers(&q).unwrap(),
            vec![label(4, &[1, 3]), label(4, &[2, 3]), label(4, &[1, 4]), label(4, &[2, 4])]
        );

        let p = nf("x1^2 + x1*x3 + x2^2 + x2*x4", 4);
        assert_eq!(covers(&p).unwrap(), vec![label(4, &[1, 2]), label(4, &[3, 4])]);
    }

    #[test]
    fn m10_worked_example() {
        let z = pi_inv(&label(10, &[1, 3, 4, 9, 10])).unwrap();
        assert_eq!(
            z.q.index_pairs(),
            vec![(1, 2), (3, 5), (4, 6), (7, 9), (8, 10)]
        );
        assert_eq!(z.eps, vec![false, false, true]);
        assert_eq!(pi(&z).unwrap(), label(10, &[1, 3, 4, 9, 10]));
    }

    #[test]
    fn round_trips() {
        for n in 0..=9usize {
            for m in all_cover_labels(n) {
                let z = pi_inv(&m).unwrap();
                assert_eq!(pi(&z).unwrap(), m, "π∘π⁻¹ at {m}");
            }
            for q in enumerate_max_rank(n) {
                let tags = stabilizer_presentation(&q).unwrap().tags().len();
                for bits in 0..(1u32 << tags) {
                    let eps: Vec<bool> = (0..tags).map(|k| bits >> k & 1 == 1).collect();
                    let z = ZElement { q: q.clone(), eps };
                    assert_eq!(pi_inv(&pi(&z).unwrap()).unwrap(), z, "π⁻¹∘π at {q}");
                }
            }
        }
    }

    #[test]
    fn cover_totals_are_central_binomials() {
        for n in 0..=9usize {
            let total: u64 = enumerate_max_rank(n)
                .iter()
                .map(|q| covers(q).unwrap().len() as u64)
                .sum();
            assert_eq!(BigUint::from(total), binomial(n, n / 2), "n = {n}");
            assert_eq!(total as usize, all_cover_labels(n).len());
        }
    }

    #[test]
    fn weyl_action_examples() {
        let s2 = Permutation::simple_reflection(3, 2);
        assert_eq!(weyl_apply(&s2, &label(3, &[1, 3])), label(3, &[1, 2]));
        let s1 = Permutation::simple_reflection(3, 1);
        assert_eq!(weyl_apply(&s1, &label(3, &[1, 2])), label(3, &[1, 2]));
        let s2 = Permutation::simple_reflection(4, 2);
        assert_eq!(weyl_apply(&s2, &label(4, &[2, 4])), label(4, &[3, 4]));
    }

    #[test]
    fn weyl_graph_sl3_triangle() {
        let g = weyl_orbit_graph(3);
        assert_eq!(g.labels.len(), 3);
        // s_1: {1,3}↔{2,3}; s_2: {1,2}↔{1,3}; plus the composite-only pair
        // {1,2}↔{2,3} has no single-reflection edge except s-labels present:
        let textual: Vec<(String, String, usize)> = g
            .edges
            .iter()
            .map(|&(u, v, i)| (g.labels[u].to_string(), g.labels[v].to_string(), i))
            .collect();
        assert!(textual.contains(&("{1,3}".into(), "{2,3}".into(), 1)));
        assert!(textual.contains(&("{1,2}".into(), "{1,3}".into(), 2)));
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn group_laws_on_labels() {
        for n in 2..=6usize {
            let labels = all_cover_labels(n);
            for i in 1..n {
                let si = Permutation::simple_reflection(n, i);
                for m in &labels {
                    assert_eq!(weyl_apply(&si, &weyl_apply(&si, m)), *m);
                }
                for j in 1..n {
                    let sj = Permutation::simple_reflection(n, j);
                    for m in &labels {
                        let a = weyl_apply(&sj, &weyl_apply(&si, m));
                        if i.abs_diff(j) >= 2 {
                            let b = weyl_apply(&si, &weyl_apply(&sj, m));
                            assert_eq!(a, b, "commutation at ({i},{j})");
                        }
                    }
                    if i.abs_diff(j) == 1 {
                        for m in &labels {
                            let a = weyl_apply(&si, &weyl_apply(&sj, &weyl_apply(&si, m)));
                            let b = weyl_apply(&sj, &weyl_apply(&si, &weyl_apply(&sj, m)));
                            assert_eq!(a, b, "braid at ({i},{j})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn odd_square_side_never_flips() {
        // The square component's label side stays on the left endpoints
        // under every reflection chain (the virtual point is fixed).
        for n in [3usize, 5] {
            for m in all_cover_labels(n) {
                let z = pi_inv(&m).unwrap();
                for block in z.q.connected_components() {
                    if let Some(s) = block.pure_square() {
                        assert!(m.m.contains(&s), "square index must be in {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn knop_examples() {
        // toggle: m = {1,3}, i = 1 over q = x1²+x1x2+x3²
        let r = knop_case(&label(3, &[1, 3]), 1).unwrap();
        assert_eq!(r.case, KnopCase::Toggle);
        assert_eq!(r.phi, PhiClass::N0);
        assert!(r.consistent);

        // fixed: m = {1,2}, i = 1 over q = x1²+x1x3+x2²
        let r = knop_case(&label(3, &[1, 2]), 1).unwrap();
        assert_eq!(r.case, KnopCase::Fixed);
        assert_eq!(r.phi, PhiClass::T0);
        assert!(r.consistent);

        // move: m = {1,3}, i = 2 lands on {1,2} over the reflected form
        let r = knop_case(&label(3, &[1, 3]), 2).unwrap();
        assert_eq!(r.case, KnopCase::Move);
        assert_eq!(r.phi, PhiClass::U0);
        assert_eq!(r.target_matches, Some(true));
        assert!(r.consistent);
    }

    #[test]
    fn knop_square_contact_fixed_case() {
        // n = 5: q = x1²+x1x2+x3²+x3x4+x5², label {1,4,5} is s_4-fixed while
        // the parabolic class is U0; the square component contains 5.
        let r = knop_case(&label(5, &[1, 4, 5]), 4).unwrap();
        assert_eq!(r.case, KnopCase::Fixed);
        assert_eq!(r.phi, PhiClass::U0);
        assert!(r.square_contact);
        assert!(r.consistent);
        // its sibling {1,3,5} moves to the reflected orbit
        let r = knop_case(&label(5, &[1, 3, 5]), 4).unwrap();
        assert_eq!(r.case, KnopCase::Move);
        assert!(r.consistent);
    }

    #[test]
    fn knop_consistent_exhaustive_small() {
        for n in 1..=6usize {
            for m in all_cover_labels(n) {
                for i in 1..n {
                    let r = knop_case(&m, i).unwrap();
                    assert!(r.consistent, "label {m}, i = {i}: {r:?}");
                }
            }
        }
    }
}
