//! Normal forms of quadratic forms under the Borel action: deciding
//! normality, computing the unique normal form of an arbitrary form together
//! with an explicit upper-triangular witness, and the derived statistics
//! (B-rank, nondegeneracy, extension, arc diagrams, Dyck paths, connected
//! components).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::form::{GroupElement, QuadraticForm};
use crate::tower::{FieldElement, TowerError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("form is not normal: {0:?}")]
    NotNormal(Vec<Violation>),
    #[error("extension requires at most one pure square component")]
    MultiplePureSquares,
    #[error("operation requires a nondegenerate form of maximal B-rank")]
    NotMaximalNondegenerate,
    #[error("operation requires a connected form")]
    NotConnected,
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// A failed normality condition, with the indices that witness the failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Some coefficient is neither 0 nor 1.
    NonUnitCoefficient { i: usize, j: usize },
    /// Two components share a variable (this includes a square sitting on
    /// the right endpoint of an index pair, as in `x2² + x1x2`).
    OverlappingComponents { first: (usize, usize), second: (usize, usize) },
    /// A pure square is followed by a component with ε = 1.
    C1 { square_at: usize, later_eps_at: usize },
    /// Nested index pairs both carry ε = 1.
    C2 { outer: (usize, usize), inner: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonUnitCoefficient { i, j } => {
                write!(f, "coefficient of x{i}x{j} is not 0 or 1")
            }
            Violation::OverlappingComponents { first, second } => {
                write!(f, "components {first:?} and {second:?} share a variable")
            }
            Violation::C1 { square_at, later_eps_at } => {
                write!(f, "(C1) pure square x{square_at}^2 precedes a component with eps=1 at x{later_eps_at}")
            }
            Violation::C2 { outer, inner } => {
                write!(f, "(C2) nested pairs {outer:?} and {inner:?} both carry eps=1")
            }
        }
    }
}

/// One normal component `ε x_i² + δ x_i x_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalComponent {
    pub i: usize,
    pub j: usize,
    pub eps: bool,
    pub delta: bool,
}

impl NormalComponent {
    pub fn square(i: usize) -> Self {
        NormalComponent { i, j: i, eps: true, delta: false }
    }

    pub fn pair(i: usize, j: usize, eps: bool) -> Self {
        assert!(i < j);
        NormalComponent { i, j, eps, delta: true }
    }

    pub fn is_pure_square(&self) -> bool {
        !self.delta
    }

    fn indices(&self) -> impl Iterator<Item = usize> {
        let second = if self.delta { Some(self.j) } else { None };
        std::iter::once(self.i).chain(second)
    }
}

/// A quadratic form in normal position: disjoint components sorted by left
/// index, satisfying the shape conditions plus (C1) and (C2).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalForm {
    n: usize,
    components: Vec<NormalComponent>,
}

impl NormalForm {
    /// Validating constructor.
    pub fn new(n: usize, components: Vec<NormalComponent>) -> Result<Self, NormalFormError> {
        let nf = NormalForm { n, components };
        let violations = nf.violations();
        if violations.is_empty() {
            Ok(nf)
        } else {
            Err(NormalFormError::NotNormal(violations))
        }
    }

    pub(crate) fn new_unchecked(n: usize, components: Vec<NormalComponent>) -> Self {
        let nf = NormalForm { n, components };
        debug_assert!(nf.violations().is_empty(), "invalid unchecked normal form");
        nf
    }

    pub fn zero(n: usize) -> Self {
        NormalForm { n, components: Vec::new() }
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen: Vec<(usize, (usize, usize))> = Vec::new();
        let mut last_i = 0;
        for c in &self.components {
            let shape_ok = (c.delta && c.i < c.j && c.j <= self.n)
                || (!c.delta && c.eps && c.i == c.j && c.i <= self.n && c.i >= 1);
            if !shape_ok || c.i <= last_i {
                out.push(Violation::OverlappingComponents {
                    first: (c.i, c.j),
                    second: (c.i, c.j),
                });
                continue;
            }
            last_i = c.i;
            for idx in c.indices() {
                if let Some(&(_, other)) = seen.iter().find(|(k, _)| *k == idx) {
                    out.push(Violation::OverlappingComponents { first: other, second: (c.i, c.j) });
                }
                seen.push((idx, (c.i, c.j)));
            }
        }
        if !out.is_empty() {
            return out;
        }
        // (C1)
        for (t, c) in self.components.iter().enumerate() {
            if c.eps && !c.delta {
                for later in &self.components[t + 1..] {
                    if later.eps {
                        out.push(Violation::C1 { square_at: c.i, later_eps_at: later.i });
                    }
                }
            }
        }
        // (C2): strict nesting i_s < i_t < j_t < j_s with both eps
        for (s, cs) in self.components.iter().enumerate() {
            if !cs.delta || !cs.eps {
                continue;
            }
            for ct in &self.components[s + 1..] {
                if ct.delta && ct.eps && cs.i < ct.i && ct.j < cs.j {
                    out.push(Violation::C2 { outer: (cs.i, cs.j), inner: (ct.i, ct.j) });
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[NormalComponent] {
        &self.components
    }

    pub fn is_zero_form(&self) -> bool {
        self.components.is_empty()
    }

    pub fn as_form(&self) -> QuadraticForm {
        let mut q = QuadraticForm::zero(self.n);
        for c in &self.components {
            if c.eps {
                q.set_coef(c.i, c.i, FieldElement::one(0)).unwrap();
            }
            if c.delta {
                q.set_coef(c.i, c.j, FieldElement::one(0)).unwrap();
            }
        }
        q
    }

    pub fn ind(&self) -> BTreeSet<usize> {
        self.components.iter().flat_map(|c| c.indices()).collect()
    }

    /// Index pairs `(i_t, j_t)` of the mixed components.
    pub fn index_pairs(&self) -> Vec<(usize, usize)> {
        self.components.iter().filter(|c| c.delta).map(|c| (c.i, c.j)).collect()
    }

    pub fn pure_square(&self) -> Option<usize> {
        self.components.iter().find(|c| c.is_pure_square()).map(|c| c.i)
    }

    /// `B-rank(Bq) = a_1 + 2a_2 + a_3` where the `a`s count the component
    /// shapes (mixed, mixed-with-square, pure square).
    pub fn brank(&self) -> usize {
        self.components
            .iter()
            .map(|c| match (c.eps, c.delta) {
                (false, true) => 1,
                (true, true) => 2,
                (true, false) => 1,
                (false, false) => unreachable!(),
            })
            .sum()
    }

    /// Nondegenerate iff every variable occurs.
    pub fn is_nondegenerate(&self) -> bool {
        self.ind().len() == self.n
    }

    /// Membership in `Q_n`: nondegenerate of maximal B-rank `n`.
    pub fn is_max_rank_nondegenerate(&self) -> bool {
        self.is_nondegenerate() && self.brank() == self.n
    }

    /// Extension to `n+1` variables: the unique pure square `x_s²` (if any)
    /// becomes `x_s² + x_s x_{n+1}`. The result is normal iff the input is.
    pub fn extend(&self) -> Result<NormalForm, NormalFormError> {
        let squares: Vec<usize> =
            self.components.iter().filter(|c| c.is_pure_square()).map(|c| c.i).collect();
        if squares.len() > 1 {
            return Err(NormalFormError::MultiplePureSquares);
        }
        let components = self
            .components
            .iter()
            .map(|c| {
                if c.is_pure_square() {
                    NormalComponent::pair(c.i, self.n + 1, true)
                } else {
                    *c
                }
            })
            .collect();
        Ok(NormalForm { n: self.n + 1, components })
    }

    /// Restrict at `x_n = 0`, undoing `extend`: pairs ending at `n` with
    /// ε = 1 become pure squares, pairs ending at `n` with ε = 0 vanish,
    /// and a pure square at `n` vanishes.
    pub fn restrict_last(&self) -> NormalForm {
        let n = self.n - 1;
        let components = self
            .components
            .iter()
            .filter_map(|c| {
                if c.delta && c.j == self.n {
                    c.eps.then(|| NormalComponent::square(c.i))
                } else if c.i == self.n {
                    None
                } else {
                    Some(*c)
                }
            })
            .collect();
        NormalForm { n, components }
    }

    /// Connected components via the split points of the arc diagram, with a
    /// pure square handled through the extension (its dot is joined to the
    /// virtual point `n+1`). Each block is returned as a sub-form of `q` in
    /// the same ambient dimension.
    ///
    /// This is the diagram notion, defined for every normal form; the orbit
    /// statistic `cc` is read off it for nondegenerate maximal-rank forms.
    pub fn connected_components(&self) -> Vec<NormalForm> {
        let ext = if self.pure_square().is_some() {
            self.extend().expect("normal forms have at most one pure square")
        } else {
            self.clone()
        };
        let arcs = ext.index_pairs();
        let cut_after = |p: usize| !arcs.iter().any(|&(a, b)| a <= p && p < b);
        let mut blocks: Vec<Vec<NormalComponent>> = Vec::new();
        let mut current: Vec<NormalComponent> = Vec::new();
        let mut comp_iter = self.components.iter().peekable();
        for p in 1..=self.n {
            if let Some(c) = comp_iter.peek() {
                if c.i == p {
                    current.push(**c);
                    comp_iter.next();
                }
            }
            if p < ext.n && cut_after(p) && !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            blocks.push(current);
        }
        blocks.into_iter().map(|components| NormalForm { n: self.n, components }).collect()
    }

    pub fn cc(&self) -> usize {
        self.connected_components().len()
    }

    pub fn arc_diagram(&self) -> ArcDiagram {
        ArcDiagram {
            n: self.n,
            arcs: self.index_pairs(),
            filled: self.components.iter().filter(|c| c.eps).map(|c| c.i).collect(),
        }
    }

    /// The mountain-range path of a connected maximal-rank form: an upward
    /// stroke at each `i_t`, downward at each `j_t`. Odd `n` is extended
    /// first. Fails unless the form is in `Q_n` and connected.
    pub fn dyck_path(&self) -> Result<DyckPath, NormalFormError> {
        if !self.is_max_rank_nondegenerate() {
            return Err(NormalFormError::NotMaximalNondegenerate);
        }
        if self.cc() != 1 {
            return Err(NormalFormError::NotConnected);
        }
        let ext = if self.n % 2 == 1 { self.extend()? } else { self.clone() };
        let mut steps = vec![Step::Up; ext.n];
        for (_, j) in ext.index_pairs() {
            steps[j - 1] = Step::Down;
        }
        let path = DyckPath { steps };
        debug_assert!(path.is_balanced());
        Ok(path)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_form())
    }
}

/// Decide normality. On success the decomposition into normal components is
/// returned; otherwise every failed condition is reported.
pub fn is_normal(q: &QuadraticForm) -> Result<NormalForm, Vec<Violation>> {
    let mut violations = Vec::new();
    for (&(i, j), c) in q.monomials() {
        if !c.is_one() {
            violations.push(Violation::NonUnitCoefficient { i, j });
        }
    }
    // Candidate components: each mixed monomial is a pair anchored at its
    // left index; squares either merge into the pair anchored at the same
    // left index or stand alone.
    let mixed: Vec<(usize, usize)> =
        q.monomials().map(|(&k, _)| k).filter(|&(i, j)| i != j).collect();
    let squares: Vec<usize> =
        q.monomials().map(|(&k, _)| k).filter(|&(i, j)| i == j).map(|(i, _)| i).collect();
    let mut components: Vec<NormalComponent> = Vec::new();
    for &(i, j) in &mixed {
        components.push(NormalComponent { i, j, eps: false, delta: true });
    }
    for &s in &squares {
        if let Some(c) = components.iter_mut().find(|c| c.i == s) {
            c.eps = true;
        } else if let Some(c) = components.iter().find(|c| c.j == s) {
            violations.push(Violation::OverlappingComponents {
                first: (c.i, c.j),
                second: (s, s),
            });
        } else {
            components.push(NormalComponent::square(s));
        }
    }
    components.sort();
    let nf = NormalForm { n: q.n(), components };
    violations.extend(nf.violations());
    if violations.is_empty() {
        Ok(nf)
    } else {
        Err(violations)
    }
}

/// Result of `normalize`: the canonical orbit representative, a Borel
/// element carrying the input onto it, and a human-readable move log.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub nf: NormalForm,
    pub witness: GroupElement,
    pub log: Vec<String>,
}

/// Compute the normal form of `q` together with an upper-triangular witness
/// `b` such that `act(b, q) = nf` exactly. Deterministic; the only failure
/// mode is the tower level cap.
pub fn normalize(q: &QuadraticForm) -> Result<Normalized, NormalFormError> {
    let n = q.n();
    let mut work = q.clone();
    let mut witness = GroupElement::identity(n);
    let mut log = Vec::new();
    let mut components: Vec<NormalComponent> = Vec::new();
    let mut consumed: BTreeSet<usize> = BTreeSet::new();

    let apply = |m: &GroupElement, work: &mut QuadraticForm, witness: &mut GroupElement| {
        *work = work.act(m);
        *witness = witness.matmul(m);
    };

    // Peel components off the least active variable until none remain.
    loop {
        let Some(&i) = work.ind().iter().find(|v| !consumed.contains(v)) else {
            break;
        };
        let j = work
            .monomials()
            .map(|(&k, _)| k)
            .find(|&(a, b)| a == i && b > i)
            .map(|(_, b)| b);
        match j {
            None => {
                let c_ii = work.coef(i, i).unwrap();
                debug_assert!(!c_ii.is_zero());
                let scale = c_ii.sqrt().inv().expect("nonzero");
                if !scale.is_one() {
                    let m = GroupElement::diagonal_scaling(n, i, scale.clone()).unwrap();
                    apply(&m, &mut work, &mut witness);
                    log.push(format!("scale x{i} by {scale}"));
                }
                components.push(NormalComponent::square(i));
                consumed.insert(i);
            }
            Some(j) => {
                let c_ii = work.coef(i, i).unwrap();
                let c_ij = work.coef(i, j).unwrap();
                let p = c_ij.inv().expect("nonzero by choice of j");
                let eps = !c_ii.is_zero();
                // The decoupling move: x_i picks up j's other partners (v),
                // x_j picks up i's other partners (u), with the scalings that
                // normalize the leading coefficients.
                let mut m = GroupElement::identity(n);
                if eps {
                    let root = c_ii.sqrt();
                    m.set_entry(i, i, root.inv().unwrap());
                    m.set_entry(j, j, p.mul(&root));
                } else {
                    m.set_entry(j, j, p.clone());
                }
                for (&(a, b), c) in work.monomials() {
                    if a == i && b > j {
                        m.set_entry(j, b, p.mul(c)); // u-part
                    }
                    if b == j && a != i && a != j {
                        m.set_entry(i, a, p.mul(c)); // v-part (partner below j)
                    }
                    if a == j && b > j {
                        m.set_entry(i, b, p.mul(c)); // v-part (partner above j)
                    }
                }
                apply(&m, &mut work, &mut witness);
                log.push(format!("decouple (x{i}, x{j})"));
                // Residual square at x_j left behind by a c_jj term.
                let gamma = work.coef(j, j).unwrap();
                if !gamma.is_zero() {
                    let t = if eps { gamma.artin_schreier_solve()? } else { gamma.clone() };
                    let m = GroupElement::transvection(n, i, j, t.clone());
                    apply(&m, &mut work, &mut witness);
                    log.push(format!("clear residual x{j}^2 via x{i} += {t}*x{j}"));
                }
                debug_assert!(work.coef(i, j).unwrap().is_one());
                debug_assert_eq!(!work.coef(i, i).unwrap().is_zero(), eps);
                debug_assert!(work.coef(j, j).unwrap().is_zero());
                components.push(NormalComponent::pair(i, j, eps));
                consumed.insert(i);
                consumed.insert(j);
            }
        }
        debug_assert!(
            work.monomials().all(|(&(a, b), _)| {
                let free = !consumed.contains(&a) && !consumed.contains(&b);
                let extracted = components.iter().any(|c| {
                    (a == b && !c.delta && c.i == a) || (c.delta && (c.i, c.j) == (a, b))
                        || (c.eps && a == b && c.i == a)
                });
                free || extracted
            }),
            "peeled variables must be decoupled"
        );
    }

    // Step 1 (C1): one move clears every eps after the first pure square.
    if let Some(t) = components.iter().position(|c| c.is_pure_square()) {
        let base = components[t].i;
        let targets: Vec<usize> =
            components[t + 1..].iter().filter(|c| c.eps).map(|c| c.i).collect();
        if !targets.is_empty() {
            let mut m = GroupElement::identity(n);
            for &l in &targets {
                m.set_entry(base, l, FieldElement::one(0));
            }
            apply(&m, &mut work, &mut witness);
            log.push(format!("clear later squares from x{base}"));
            for c in components[t + 1..].iter_mut() {
                c.eps = false;
            }
            components.retain(|c| c.eps || c.delta);
        }
    }

    // Step 2 (C2): repeatedly fix the lexicographically first violating
    // nested pair; each move clears one eps flag, so this terminates.
    loop {
        let mut chosen: Option<(usize, usize)> = None;
        for s in 0..components.len() {
            let cs = components[s];
            if !cs.delta || !cs.eps {
                continue;
            }
            for t in s + 1..components.len() {
                let ct = components[t];
                if ct.delta && ct.eps && cs.i < ct.i && ct.j < cs.j {
                    if chosen.map_or(true, |(a, b)| (cs.i, ct.i) < (components[a].i, components[b].i))
                    {
                        chosen = Some((s, t));
                    }
                }
            }
        }
        let Some((s, t)) = chosen else { break };
        let (cs, ct) = (components[s], components[t]);
        let mut m = GroupElement::identity(n);
        m.set_entry(cs.i, ct.i, FieldElement::one(0));
        m.set_entry(ct.j, cs.j, FieldElement::one(0));
        apply(&m, &mut work, &mut witness);
        log.push(format!("unnest ({}, {}) inside ({}, {})", ct.i, ct.j, cs.i, cs.j));
        components[t].eps = false;
    }

    let nf = NormalForm::new(n, components).expect("pipeline output must be normal");
    assert_eq!(work, nf.as_form(), "working form must equal the component sum");
    assert_eq!(q.act(&witness), nf.as_form(), "witness must carry q onto its normal form");
    assert!(witness.is_upper_triangular(), "witness must stay Borel");
    Ok(Normalized { nf, witness, log })
}

// ---------------------------------------------------------------------------
// Arc diagrams and Dyck paths
// ---------------------------------------------------------------------------

/// The dots-and-arcs picture of a normal form: an arc per index pair, a
/// filled dot per `x_s²` summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcDiagram {
    pub n: usize,
    pub arcs: Vec<(usize, usize)>,
    pub filled: BTreeSet<usize>,
}

impl ArcDiagram {
    /// Two-row ASCII rendering: arc spans above, dots below (`*` filled,
    /// `o` hollow, `.` unused).
    pub fn to_ascii(&self) -> String {
        let mut rows: Vec<Vec<char>> = Vec::new();
        for &(a, b) in &self.arcs {
            let row = rows
                .iter()
                .position(|r: &Vec<char>| r[a - 1..b].iter().all(|&ch| ch == ' '))
                .unwrap_or_else(|| {
                    rows.push(vec![' '; self.n]);
                    rows.len() - 1
                });
            rows[row][a - 1] = '/';
            rows[row][b - 1] = '\\';
            for k in a..b - 1 {
                rows[row][k] = '-';
            }
        }
        let mut out = String::new();
        for row in rows.iter().rev() {
            out.push_str(&row.iter().collect::<String>());
            out.push('\n');
        }
        let used: BTreeSet<usize> =
            self.arcs.iter().flat_map(|&(a, b)| [a, b]).chain(self.filled.iter().copied()).collect();
        for k in 1..=self.n {
            out.push(if self.filled.contains(&k) {
                '*'
            } else if used.contains(&k) {
                'o'
            } else {
                '.'
            });
        }
        out.push('\n');
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph arcs {\n  rankdir=LR;\n");
        for k in 1..=self.n {
            let style = if self.filled.contains(&k) { "filled" } else { "\"\"" };
            out.push_str(&format!("  {k} [shape=circle, style={style}];\n"));
        }
        for &(a, b) in &self.arcs {
            out.push_str(&format!("  {a} -- {b};\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_tikz(&self) -> String {
        let mut out = String::from(
            "\\documentclass[tikz]{standalone}\n\\begin{document}\n\\begin{tikzpicture}\n",
        );
        for k in 1..=self.n {
            let fill = if self.filled.contains(&k) { ",fill=black" } else { "" };
            out.push_str(&format!(
                "  \\node[draw,circle,inner sep=1pt{fill},label=below:{{\\tiny ${k}$}}] ({k}) at ({},0) {{}};\n",
                k - 1
            ));
        }
        for &(a, b) in &self.arcs {
            out.push_str(&format!("  \\draw ({a}) to [out=30,in=150] ({b});\n"));
        }
        out.push_str("\\end{tikzpicture}\n\\end{document}\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Up,
    Down,
}

/// A balanced lattice path with nonnegative prefixes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyckPath {
    pub steps: Vec<Step>,
}

impl DyckPath {
    pub fn is_balanced(&self) -> bool {
        let mut h = 0i64;
        for s in &self.steps {
            h += if *s == Step::Up { 1 } else { -1 };
            if h < 0 {
                return false;
            }
        }
        h == 0
    }

    /// Ground contacts strictly inside the path (a connected diagram has none).
    pub fn interior_ground_touches(&self) -> usize {
        let mut h = 0i64;
        let mut touches = 0;
        for (k, s) in self.steps.iter().enumerate() {
            h += if *s == Step::Up { 1 } else { -1 };
            if h == 0 && k + 1 < self.steps.len() {
                touches += 1;
            }
        }
        touches
    }
}

impl fmt::Display for DyckPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            write!(f, "{}", if *s == Step::Up { '/' } else { '\\' })?;
        }
        Ok(())
    }
}
