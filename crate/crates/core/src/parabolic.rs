//! Decomposition of minimal-parabolic orbits `P_i·q` into Borel orbits, the
//! classification of the stabilizer image `Φ(P_q)` in PGL(2), and the Brion
//! graph assembled from the decompositions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::census::enumerate_normal_forms;
use crate::form::Permutation;
use crate::normal::{is_normal, normalize, NormalComponent, NormalForm};
use crate::oracle;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParabolicError {
    #[error("n = {0} exceeds the Brion graph guard ({1})")]
    SizeGuard(usize, usize),
}

pub const BRION_GUARD: usize = 8;

/// Conjugacy class of `Φ(P_q)` inside PGL(2): the full group, its torus,
/// the torus normalizer, or the unipotent upper-triangular subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhiClass {
    G0,
    T0,
    N0,
    U0,
}

impl std::fmt::Display for PhiClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PhiClass::G0 => "G0",
            PhiClass::T0 => "T0",
            PhiClass::N0 => "N0",
            PhiClass::U0 => "U0",
        };
        write!(f, "{s}")
    }
}

/// The B-orbit decomposition of `P_i·q`, with the structural classification
/// computed from the representatives and, separately, the literal
/// table classification; `agree` records whether they coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct POrbitDecomposition {
    pub q: NormalForm,
    pub i: usize,
    /// Distinct normal representatives of the B-orbits in `P_i·q`, sorted.
    pub reps: Vec<NormalForm>,
    pub computed: PhiClass,
    pub paper_table: PhiClass,
    pub agree: bool,
}

impl POrbitDecomposition {
    /// The highest-B-rank representative (the "top" of N0/T0 pictures).
    pub fn top(&self) -> &NormalForm {
        self.reps.iter().max_by_key(|r| r.brank()).unwrap()
    }
}

/// Where a variable sits in the extended arc picture of a normal form:
/// each mixed component is an arc, the pure square an arc to the virtual
/// point `n+1` (which always carries ε = 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ArcAt {
    partner: usize,
    eps: bool,
}

fn extended_arcs(q: &NormalForm) -> Vec<(usize, usize, bool)> {
    q.components()
        .iter()
        .map(|c| if c.delta { (c.i, c.j, c.eps) } else { (c.i, q.n() + 1, true) })
        .collect()
}

fn arc_at(arcs: &[(usize, usize, bool)], v: usize) -> Option<ArcAt> {
    arcs.iter().find_map(|&(a, b, eps)| {
        if a == v {
            Some(ArcAt { partner: b, eps })
        } else if b == v {
            Some(ArcAt { partner: a, eps })
        } else {
            None
        }
    })
}

/// Rebuild a form from the untouched components of `q` plus replacement
/// arcs (virtual endpoints restrict to pure squares), then normalize. The
/// normalization absorbs any contextual (C1)/(C2) interaction.
fn rebuild_and_normalize(
    q: &NormalForm,
    touched: &[usize],
    replacement: &[(usize, usize, bool)],
) -> NormalForm {
    let n = q.n();
    let mut form = crate::form::QuadraticForm::zero(n);
    for c in q.components() {
        let hits = touched.iter().any(|&v| c.i == v || (c.delta && c.j == v));
        if !hits {
            for (&(a, b), coef) in c_as_form(c, n).monomials() {
                form.add_to_coef(a, b, coef.clone()).unwrap();
            }
        }
    }
    for &(a, b, eps) in replacement {
        if b > n {
            // virtual arc: restrict to the pure square
            form.add_to_coef(a, a, crate::tower::FieldElement::one(0)).unwrap();
        } else {
            if eps {
                form.add_to_coef(a, a, crate::tower::FieldElement::one(0)).unwrap();
            }
            form.add_to_coef(a, b, crate::tower::FieldElement::one(0)).unwrap();
        }
    }
    normalize(&form).expect("desk-scale normalization").nf
}

fn c_as_form(c: &NormalComponent, n: usize) -> crate::form::QuadraticForm {
    let mut f = crate::form::QuadraticForm::zero(n);
    if c.eps {
        f.set_coef(c.i, c.i, crate::tower::FieldElement::one(0)).unwrap();
    }
    if c.delta {
        f.set_coef(c.i, c.j, crate::tower::FieldElement::one(0)).unwrap();
    }
    f
}

/// Decompose `P_i·q` into B-orbits, constructively.
pub fn p_orbit_decompose(q: &NormalForm, i: usize) -> POrbitDecomposition {
    let n = q.n();
    assert!(i >= 1 && i < n, "reflection index out of range");
    let arcs = extended_arcs(q);
    let at_i = arc_at(&arcs, i);
    let at_next = arc_at(&arcs, i + 1);
    let s_i = Permutation::simple_reflection(n, i);

    let mut reps: Vec<NormalForm> = Vec::new();
    let push = |nf: NormalForm, reps: &mut Vec<NormalForm>| {
        if !reps.contains(&nf) {
            reps.push(nf);
        }
    };

    match (at_i, at_next) {
        (None, None) => {
            push(q.clone(), &mut reps);
        }
        (Some(a), _) if a.partner == i + 1 => {
            // (i, i+1) is an index pair: the orbit pair is {top, bottom},
            // where the candidates may collapse after normalization.
            for eps in [true, false] {
                let mut form = q.as_form();
                form.set_coef(i, i, if eps { crate::tower::FieldElement::one(0) } else { crate::tower::FieldElement::zero(0) })
                    .unwrap();
                push(normalize(&form).expect("desk-scale normalization").nf, &mut reps);
            }
        }
        (Some(a), Some(b)) => {
            let side_i_right = a.partner > i + 1;
            let side_next_right = b.partner > i + 1;
            if side_i_right == side_next_right {
                // Two arcs on the same side: the T0 family lives here.
                let (lo, hi) = (a.partner.min(b.partner), a.partner.max(b.partner));
                let (flag_lo, flag_hi) =
                    if a.partner == lo { (a.eps, b.eps) } else { (b.eps, a.eps) };
                let member = if side_i_right {
                    // pairings on i < i+1 < lo < hi: cross = (i,lo),(i+1,hi)
                    let cross = a.partner == lo;
                    (cross && flag_lo && flag_hi)
                        || (!cross && a.eps && !b.eps)
                        || (cross && !flag_lo && flag_hi)
                } else {
                    // pairings on lo < hi < i < i+1: cross = (lo,i),(hi,i+1)
                    let cross = a.partner == lo;
                    (cross && flag_lo && flag_hi)
                        || (!cross && flag_lo && !flag_hi)
                        || (cross && flag_lo && !flag_hi)
                };
                if member {
                    let triple: [Vec<(usize, usize, bool)>; 3] = if side_i_right {
                        [
                            vec![(i, lo, true), (i + 1, hi, true)],
                            vec![(i, hi, true), (i + 1, lo, false)],
                            vec![(i, lo, false), (i + 1, hi, true)],
                        ]
                    } else {
                        [
                            vec![(lo, i, true), (hi, i + 1, true)],
                            vec![(lo, i + 1, true), (hi, i, false)],
                            vec![(lo, i, true), (hi, i + 1, false)],
                        ]
                    };
                    for member_arcs in &triple {
                        push(rebuild_and_normalize(q, &[i, i + 1], member_arcs), &mut reps);
                    }
                } else {
                    push(q.clone(), &mut reps);
                    push(
                        normalize(&q.as_form().permute(&s_i)).expect("desk-scale").nf,
                        &mut reps,
                    );
                }
            } else {
                // Arcs on opposite sides: the reflection image is normal.
                push(q.clone(), &mut reps);
                push(normalize(&q.as_form().permute(&s_i)).expect("desk-scale").nf, &mut reps);
            }
        }
        _ => {
            // Exactly one of i, i+1 occurs: the reflection shifts it.
            push(q.clone(), &mut reps);
            push(normalize(&q.as_form().permute(&s_i)).expect("desk-scale").nf, &mut reps);
        }
    }

    reps.sort();
    let computed = classify_computed(q, i, &reps);
    let paper_table = classify_paper_table(q, i);
    let agree = computed == paper_table;
    POrbitDecomposition { q: q.clone(), i, reps, computed, paper_table, agree }
}

fn classify_computed(q: &NormalForm, i: usize, reps: &[NormalForm]) -> PhiClass {
    let n = q.n();
    let s_i = Permutation::simple_reflection(n, i);
    match reps.len() {
        1 => {
            debug_assert_eq!(
                normalize(&q.as_form().permute(&s_i)).unwrap().nf,
                reps[0],
                "singleton decomposition must be reflection-stable"
            );
            PhiClass::G0
        }
        2 => {
            let (r0, r1) = (&reps[0], &reps[1]);
            if r0.brank() == r1.brank() {
                debug_assert_eq!(normalize(&r0.as_form().permute(&s_i)).unwrap().nf, *r1);
                debug_assert_eq!(normalize(&r1.as_form().permute(&s_i)).unwrap().nf, *r0);
                PhiClass::U0
            } else {
                let (top, bottom) =
                    if r0.brank() > r1.brank() { (r0, r1) } else { (r1, r0) };
                debug_assert_eq!(top.brank(), bottom.brank() + 1);
                debug_assert_eq!(bottom.as_form().permute(&s_i), bottom.as_form());
                PhiClass::N0
            }
        }
        3 => {
            let top = reps.iter().max_by_key(|r| r.brank()).unwrap();
            debug_assert!(reps
                .iter()
                .all(|r| r == top || r.brank() + 1 == top.brank()));
            PhiClass::T0
        }
        k => unreachable!("a minimal parabolic orbit splits into at most 3 B-orbits, got {k}"),
    }
}

/// The literal classification table, rows evaluated in order. Row (3) is
/// read on the extended picture, where a pure square is an ε = 1 arc to the
/// virtual point; this is what makes the row match the square-adjacent
/// shapes that its own graph figures classify as T0.
fn classify_paper_table(q: &NormalForm, i: usize) -> PhiClass {
    let ind = q.ind();
    if !ind.contains(&i) && !ind.contains(&(i + 1)) {
        return PhiClass::G0;
    }
    if q.index_pairs().contains(&(i, i + 1)) {
        return PhiClass::N0;
    }
    let arcs = extended_arcs(q);
    if let (Some(a), Some(b)) = (arc_at(&arcs, i), arc_at(&arcs, i + 1)) {
        let side_i_right = a.partner > i + 1;
        let side_next_right = b.partner > i + 1;
        if side_i_right == side_next_right && a.partner != i + 1 {
            let extremal_flag = if side_i_right {
                // both partners right: the condition flags the larger partner
                if a.partner > b.partner {
                    a.eps
                } else {
                    b.eps
                }
            } else {
                // both partners left: the condition flags the smaller partner
                if a.partner < b.partner {
                    a.eps
                } else {
                    b.eps
                }
            };
            if extremal_flag {
                return PhiClass::T0;
            }
        }
    }
    let image = q.as_form().permute(&Permutation::simple_reflection(q.n(), i));
    if image != q.as_form() && is_normal(&image).is_ok() {
        return PhiClass::U0;
    }
    unreachable!("the table rows cover every normal shape")
}

/// Both classifications at once.
pub fn phi_class(q: &NormalForm, i: usize) -> (PhiClass, PhiClass) {
    let d = p_orbit_decompose(q, i);
    (d.computed, d.paper_table)
}

// ---------------------------------------------------------------------------
// Brion graph
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BrionVertex {
    pub nf: NormalForm,
    pub text: String,
    pub brank: usize,
    /// Orbit dimension estimated from the stabilizer fit, when the oracle
    /// scale allows it; used as the placement tiebreak among equal B-ranks.
    pub orbit_dim: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BrionEdge {
    /// Indices into `vertices`, `u < v`.
    pub u: usize,
    pub v: usize,
    pub label: usize,
    pub multiplicity: u8,
}

#[derive(Clone, Debug)]
pub struct BrionGraph {
    pub n: usize,
    pub vertices: Vec<BrionVertex>,
    pub edges: Vec<BrionEdge>,
}

/// Build the Brion graph on all normal forms: an `i`-labeled edge joins two
/// vertices whenever one B-orbit lies in the other's `P_i`-orbit, drawn
/// double exactly for the N0 decompositions.
pub fn brion_graph(n: usize) -> Result<BrionGraph, ParabolicError> {
    if n > BRION_GUARD {
        return Err(ParabolicError::SizeGuard(n, BRION_GUARD));
    }
    let forms = enumerate_normal_forms(n).expect("guarded above");
    // Edge set keyed on canonical text so decompositions seen from several
    // base points dedupe.
    let mut edge_set: BTreeMap<(String, String, usize), u8> = BTreeMap::new();
    for q in &forms {
        for i in 1..n {
            let d = p_orbit_decompose(q, i);
            match d.computed {
                PhiClass::G0 => {}
                PhiClass::N0 => {
                    let top = d.top().to_string();
                    let bottom =
                        d.reps.iter().find(|r| r.to_string() != top).unwrap().to_string();
                    let key = ordered_key(top, bottom, i);
                    let prev = edge_set.insert(key.clone(), 2);
                    debug_assert!(prev.is_none() || prev == Some(2));
                }
                PhiClass::U0 => {
                    let key =
                        ordered_key(d.reps[0].to_string(), d.reps[1].to_string(), i);
                    let prev = edge_set.insert(key, 1);
                    debug_assert!(prev.is_none() || prev == Some(1));
                }
                PhiClass::T0 => {
                    let top = d.top().to_string();
                    for child in d.reps.iter().filter(|r| r.to_string() != top) {
                        let key = ordered_key(top.clone(), child.to_string(), i);
                        let prev = edge_set.insert(key, 1);
                        debug_assert!(prev.is_none() || prev == Some(1));
                    }
                }
            }
        }
    }

    // Vertex placement: B-rank descending, then the oracle orbit-dimension
    // estimate (feasible through n = 4) descending, then canonical text.
    let mut vertices: Vec<BrionVertex> = forms
        .into_iter()
        .map(|nf| {
            let orbit_dim =
                if n <= 4 { oracle::orbit_dimension_estimate(&nf).ok() } else { None };
            BrionVertex { text: nf.to_string(), brank: nf.brank(), orbit_dim, nf }
        })
        .collect();
    vertices.sort_by(|a, b| {
        b.brank
            .cmp(&a.brank)
            .then(b.orbit_dim.unwrap_or(0).cmp(&a.orbit_dim.unwrap_or(0)))
            .then(a.text.cmp(&b.text))
    });
    let index_of: BTreeMap<String, usize> =
        vertices.iter().enumerate().map(|(k, v)| (v.text.clone(), k)).collect();
    let mut edges: Vec<BrionEdge> = edge_set
        .into_iter()
        .map(|((a, b, label), multiplicity)| {
            let (mut u, mut v) = (index_of[&a], index_of[&b]);
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            BrionEdge { u, v, label, multiplicity }
        })
        .collect();
    edges.sort();
    Ok(BrionGraph { n, vertices, edges })
}

fn ordered_key(a: String, b: String, i: usize) -> (String, String, usize) {
    if a <= b {
        (a, b, i)
    } else {
        (b, a, i)
    }
}

impl BrionGraph {
    /// Canonical text listing: one vertex line and one edge line per item.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.vertices.iter().enumerate() {
            let dim = v.orbit_dim.map_or("-".to_string(), |d| d.to_string());
            out.push_str(&format!("vertex\t{k}\tbrank={}\tdim={dim}\t{}\n", v.brank, v.text));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge\t{}\t{}\tlabel={}\tmult={}\n",
                self.vertices[e.u].text, self.vertices[e.v].text, e.label, e.multiplicity
            ));
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph brion {\n  rankdir=BT;\n");
        for v in &self.vertices {
            out.push_str(&format!("  \"{}\" [shape=point, xlabel=\"{}\"];\n", v.text, v.text));
        }
        for e in &self.edges {
            for _ in 0..e.multiplicity {
                out.push_str(&format!(
                    "  \"{}\" -- \"{}\" [label=\"{}\"];\n",
                    self.vertices[e.u].text, self.vertices[e.v].text, e.label
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_tikz(&self) -> String {
        // Rows by placement key, left to right within a row.
        let mut rows: BTreeMap<(std::cmp::Reverse<usize>, std::cmp::Reverse<u32>), Vec<usize>> =
            BTreeMap::new();
        for (k, v) in self.vertices.iter().enumerate() {
            rows.entry((std::cmp::Reverse(v.brank), std::cmp::Reverse(v.orbit_dim.unwrap_or(0))))
                .or_default()
                .push(k);
        }
        let mut out = String::from(
            "\\documentclass[tikz]{standalone}\n\\begin{document}\n\\begin{tikzpicture}[scale=0.9]\n",
        );
        let total_rows = rows.len();
        for (row_idx, (_, members)) in rows.iter().enumerate() {
            let y = (total_rows - row_idx) as f64;
            for (col, &k) in members.iter().enumerate() {
                let v = &self.vertices[k];
                out.push_str(&format!(
                    "  \\node[draw,circle,inner sep=1.5pt,fill=black,label=below:{{\\tiny ${}$}}] (v{k}) at ({},{y}) {{}};\n",
                    tikz_math(&v.text),
                    col as f64 * 2.0
                ));
            }
        }
        for e in &self.edges {
            if e.multiplicity == 2 {
                out.push_str(&format!(
                    "  \\draw (v{}) to[bend left=10] node[midway,left] {{\\tiny {}}} (v{});\n",
                    e.u, e.label, e.v
                ));
                out.push_str(&format!("  \\draw (v{}) to[bend right=10] (v{});\n", e.u, e.v));
            } else {
                out.push_str(&format!(
                    "  \\draw (v{}) -- node[midway,left] {{\\tiny {}}} (v{});\n",
                    e.u, e.label, e.v
                ));
            }
        }
        out.push_str("\\end{tikzpicture}\n\\end{document}\n");
        out
    }
}

fn tikz_math(text: &str) -> String {
    text.replace('*', " ").replace(" + ", "+").replace('x', "x_")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::QuadraticForm;

    fn nf(text: &str, n: usize) -> NormalForm {
        is_normal(&QuadraticForm::parse(text, n).unwrap()).unwrap()
    }

    fn texts(reps: &[NormalForm]) -> Vec<String> {
        let mut v: Vec<String> = reps.iter().map(|r| r.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn case2_double_edge() {
        let d = p_orbit_decompose(&nf("x1*x2", 2), 1);
        assert_eq!(texts(&d.reps), vec!["x1*x2", "x1^2 + x1*x2"]);
        assert_eq!(d.computed, PhiClass::N0);
        assert_eq!(d.paper_table, PhiClass::N0);
        assert!(d.agree);
    }

    #[test]
    fn t0_triple() {
        let d = p_orbit_decompose(&nf("x1^2 + x1*x3 + x2^2", 3), 1);
        assert_eq!(
            texts(&d.reps),
            vec!["x1*x3 + x2^2", "x1^2 + x1*x3 + x2^2", "x1^2 + x2*x3"]
        );
        assert_eq!(d.computed, PhiClass::T0);
        assert!(d.agree);
        // every member of the triple decomposes identically
        for text in ["x1^2 + x2*x3", "x1*x3 + x2^2"] {
            let d2 = p_orbit_decompose(&nf(text, 3), 1);
            assert_eq!(texts(&d2.reps), texts(&d.reps), "from {text}");
            assert_eq!(d2.computed, PhiClass::T0);
        }
    }

    #[test]
    fn u0_pair() {
        let d = p_orbit_decompose(&nf("x1^2 + x1*x2 + x3^2", 3), 2);
        assert_eq!(texts(&d.reps), vec!["x1^2 + x1*x2 + x3^2", "x1^2 + x1*x3 + x2^2"]);
        assert_eq!(d.computed, PhiClass::U0);
        assert!(d.agree);
    }

    #[test]
    fn g0_fixed_vertex() {
        let q = nf("x3^2", 3);
        let d = p_orbit_decompose(&q, 1);
        assert_eq!(d.reps, vec![q.clone()]);
        assert_eq!(d.computed, PhiClass::G0);
        assert_eq!(d.paper_table, PhiClass::G0);

        // but s_2 moves the square
        let d = p_orbit_decompose(&q, 2);
        assert_eq!(d.computed, PhiClass::U0);
        assert_eq!(texts(&d.reps), vec!["x2^2", "x3^2"]);
    }

    #[test]
    fn documented_collapse_disagreement() {
        let d = p_orbit_decompose(&nf("x1^2 + x2*x3", 3), 2);
        assert_eq!(d.reps.len(), 1);
        assert_eq!(d.computed, PhiClass::G0);
        assert_eq!(d.paper_table, PhiClass::N0);
        assert!(!d.agree);
    }

    #[test]
    fn n0_example_inside_context() {
        let d = p_orbit_decompose(&nf("x2^2 + x2*x3", 3), 2);
        assert_eq!(d.computed, PhiClass::N0);
        assert_eq!(d.paper_table, PhiClass::N0);
        assert_eq!(texts(&d.reps), vec!["x2*x3", "x2^2 + x2*x3"]);
    }

    #[test]
    fn rank_behavior() {
        // N0: bottom is one rank below top; T0: both children one below.
        for n in 2..=5usize {
            for q in enumerate_normal_forms(n).unwrap() {
                for i in 1..n {
                    let d = p_orbit_decompose(&q, i);
                    match d.computed {
                        PhiClass::N0 => {
                            let top = d.top().brank();
                            let bottom = d.reps.iter().map(|r| r.brank()).min().unwrap();
                            assert_eq!(top, bottom + 1, "{q} at {i}");
                        }
                        PhiClass::T0 => {
                            let top = d.top().brank();
                            for r in &d.reps {
                                if r.brank() != top {
                                    assert_eq!(r.brank() + 1, top, "{q} at {i}");
                                }
                            }
                        }
                        PhiClass::U0 => {
                            assert_eq!(d.reps[0].brank(), d.reps[1].brank(), "{q} at {i}");
                        }
                        PhiClass::G0 => assert_eq!(d.reps.len(), 1),
                    }
                }
            }
        }
    }

    #[test]
    fn symmetry_of_membership() {
        // q' ∈ reps(q, i) iff q ∈ reps(q', i).
        for n in 2..=4usize {
            for q in enumerate_normal_forms(n).unwrap() {
                for i in 1..n {
                    let d = p_orbit_decompose(&q, i);
                    for r in &d.reps {
                        let back = p_orbit_decompose(r, i);
                        assert!(back.reps.contains(&q), "{q} ↔ {r} at i={i}");
                        assert_eq!(back.reps, d.reps, "decomposition must not depend on the base point");
                    }
                }
            }
        }
    }

    #[test]
    fn disagreements_are_exactly_the_collapse_family() {
        // Wherever the computed class departs from the literal table, the
        // two case-2 candidates merged under normalization: one rep,
        // computed G0, table N0.
        let mut found = 0usize;
        for n in 2..=5usize {
            for q in enumerate_normal_forms(n).unwrap() {
                for i in 1..n {
                    let d = p_orbit_decompose(&q, i);
                    if !d.agree {
                        assert_eq!(d.computed, PhiClass::G0, "{q} at {i}");
                        assert_eq!(d.paper_table, PhiClass::N0, "{q} at {i}");
                        assert_eq!(d.reps.len(), 1, "{q} at {i}");
                        found += 1;
                    }
                }
            }
        }
        assert!(found > 0, "the collapse family is nonempty (e.g. x1^2 + x2*x3 at i = 2)");
    }

    #[test]
    fn brion_graph_small() {
        let g1 = brion_graph(1).unwrap();
        assert_eq!(g1.vertices.len(), 2);
        assert!(g1.edges.is_empty());

        let g2 = brion_graph(2).unwrap();
        assert_eq!(g2.vertices.len(), 5);
        let edges: Vec<(String, String, usize, u8)> = g2
            .edges
            .iter()
            .map(|e| {
                (
                    g2.vertices[e.u].text.clone(),
                    g2.vertices[e.v].text.clone(),
                    e.label,
                    e.multiplicity,
                )
            })
            .collect();
        assert_eq!(edges.len(), 2);
        assert!(edges.contains(&("x1^2".into(), "x2^2".into(), 1, 1))
            || edges.contains(&("x2^2".into(), "x1^2".into(), 1, 1)));
        assert!(edges.iter().any(|(a, b, l, m)| {
            let pair = (a.as_str(), b.as_str());
            (pair == ("x1*x2", "x1^2 + x1*x2") || pair == ("x1^2 + x1*x2", "x1*x2"))
                && *l == 1
                && *m == 2
        }));
    }

    #[test]
    fn brion_placement_tiebreaks() {
        // x1² sits above x2² (larger orbit dimension at equal B-rank), and
        // x1²+x1x2+x3² above x1²+x1x3+x2².
        let g = brion_graph(3).unwrap();
        let pos = |text: &str| g.vertices.iter().position(|v| v.text == text).unwrap();
        assert!(pos("x1^2") < pos("x2^2"));
        assert!(pos("x2^2") < pos("x3^2"));
        assert!(pos("x1^2 + x1*x2 + x3^2") < pos("x1^2 + x1*x3 + x2^2"));
        let dims: Vec<Option<u32>> = g.vertices.iter().map(|v| v.orbit_dim).collect();
        assert!(dims.iter().all(|d| d.is_some()));
    }

    #[test]
    fn dot_output_is_wellformed() {
        let g = brion_graph(2).unwrap();
        let dot = g.to_dot();
        assert!(dot.starts_with("graph brion {"));
        assert!(dot.ends_with("}\n"));
        assert_eq!(dot.matches(" -- ").count(), 3); // single + double edge
        let tikz = g.to_tikz();
        assert!(tikz.contains("\\begin{tikzpicture}"));
        assert!(tikz.contains("\\end{document}"));
    }
}
