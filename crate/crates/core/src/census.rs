//! Enumeration of all normal forms for a given `n` and the counting results
//! attached to them: maximal-rank counts (Catalan numbers), the `b(n,f)`
//! statistics (Catalan triangle numbers), and the recursions relating them.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigUint;
use thiserror::Error;

use crate::normal::{NormalComponent, NormalForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("n = {0} exceeds the enumeration guard ({1})")]
    SizeGuard(usize, usize),
}

/// Practical enumeration bound; the census tree grows roughly geometrically.
pub const ENUMERATION_GUARD: usize = 14;

/// One census entry: a normal form with its derived statistics. `cc` is
/// present exactly for members of `Q_n` (nondegenerate, maximal B-rank),
/// where it is an orbit statistic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusRow {
    pub nf: NormalForm,
    pub brank: usize,
    pub nondegenerate: bool,
    pub cc: Option<usize>,
}

/// Visit every normal form in `n` variables exactly once, in a fixed
/// depth-first order. Generation is constructive: scanning positions left to
/// right, each free position is skipped, turned into a pure square (barred
/// once a square exists, by (C1)), or paired with a later free position,
/// with ε = 1 barred after a square and inside an ε = 1 arc (by (C2)).
pub fn for_each_normal_form<F: FnMut(&NormalForm)>(
    n: usize,
    mut visit: F,
) -> Result<(), CensusError> {
    if n > ENUMERATION_GUARD {
        return Err(CensusError::SizeGuard(n, ENUMERATION_GUARD));
    }
    let mut used = vec![false; n + 1];
    let mut components: Vec<NormalComponent> = Vec::new();
    rec(n, 1, false, &mut used, &mut components, &mut visit);
    Ok(())
}

fn rec<F: FnMut(&NormalForm)>(
    n: usize,
    from: usize,
    square_seen: bool,
    used: &mut Vec<bool>,
    components: &mut Vec<NormalComponent>,
    visit: &mut F,
) {
    let Some(i) = (from..=n).find(|&k| !used[k]) else {
        visit(&NormalForm::new_unchecked(n, components.clone()));
        return;
    };
    used[i] = true;
    // i does not occur
    rec(n, i + 1, square_seen, used, components, visit);
    // i carries a pure square
    if !square_seen {
        components.push(NormalComponent::square(i));
        rec(n, i + 1, true, used, components, visit);
        components.pop();
    }
    // i is the left endpoint of a pair (i, j)
    for j in i + 1..=n {
        if used[j] {
            continue;
        }
        used[j] = true;
        for eps in [false, true] {
            if eps {
                if square_seen {
                    continue;
                }
                // (C2): may not sit strictly inside an existing ε = 1 arc
                let nested_in_eps =
                    components.iter().any(|c| c.delta && c.eps && c.i < i && j < c.j);
                if nested_in_eps {
                    continue;
                }
            }
            components.push(NormalComponent::pair(i, j, eps));
            rec(n, i + 1, square_seen, used, components, visit);
            components.pop();
        }
        used[j] = false;
    }
    used[i] = false;
}

/// All normal forms in `n` variables.
pub fn enumerate_normal_forms(n: usize) -> Result<Vec<NormalForm>, CensusError> {
    let mut out = Vec::new();
    for_each_normal_form(n, |nf| out.push(nf.clone()))?;
    Ok(out)
}

/// Full census with statistics.
pub fn census(n: usize) -> Result<Vec<CensusRow>, CensusError> {
    let mut rows = Vec::new();
    for_each_normal_form(n, |nf| {
        let brank = nf.brank();
        let nondegenerate = nf.is_nondegenerate();
        let cc = (nondegenerate && brank == n).then(|| nf.cc());
        rows.push(CensusRow { nf: nf.clone(), brank, nondegenerate, cc });
    })?;
    Ok(rows)
}

/// Number of normal forms of maximal B-rank `n`, by enumeration.
pub fn max_rank_count(n: usize) -> Result<BigUint, CensusError> {
    let mut count = BigUint::from(0u32);
    for_each_normal_form(n, |nf| {
        if nf.brank() == n {
            count += 1u32;
        }
    })?;
    Ok(count)
}

/// The elements of `Q_n` (nondegenerate normal forms of maximal B-rank `n`):
/// non-nesting perfect matchings of the (extended, for odd `n`) dot row,
/// with every mixed component carrying ε = 1. Generated directly as Dyck
/// words, closing open arcs first-in-first-out; an arc closing at the
/// virtual point restricts to a pure square.
pub fn enumerate_max_rank(n: usize) -> Vec<NormalForm> {
    fn rec(
        pos: usize,
        extended: usize,
        n: usize,
        open: &mut Vec<usize>,
        arcs: &mut Vec<(usize, usize)>,
        out: &mut Vec<NormalForm>,
    ) {
        if pos > extended {
            if open.is_empty() {
                let mut components: Vec<NormalComponent> = arcs
                    .iter()
                    .map(|&(a, b)| {
                        if b > n {
                            NormalComponent::square(a)
                        } else {
                            NormalComponent::pair(a, b, true)
                        }
                    })
                    .collect();
                components.sort();
                out.push(NormalForm::new_unchecked(n, components));
            }
            return;
        }
        let remaining = extended - pos + 1;
        // opening is only useful if the new arc can still close
        if open.len() + 1 <= remaining - 1 {
            open.push(pos);
            rec(pos + 1, extended, n, open, arcs, out);
            open.pop();
        }
        if !open.is_empty() {
            let a = open.remove(0);
            arcs.push((a, pos));
            rec(pos + 1, extended, n, open, arcs, out);
            arcs.pop();
            open.insert(0, a);
        }
    }
    let extended = n + n % 2;
    let mut out = Vec::new();
    if extended == 0 {
        return vec![NormalForm::zero(0)];
    }
    let mut open = Vec::new();
    let mut arcs = Vec::new();
    rec(1, extended, n, &mut open, &mut arcs, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Catalan numbers and the Catalan triangle
// ---------------------------------------------------------------------------

/// `C_m` via the closed binomial form `binom(2m, m)/(m+1)`. This route is
/// independent of the triangle recursion, so the two can cross-check.
pub fn catalan(m: usize) -> BigUint {
    binomial(2 * m, m) / BigUint::from(m as u32 + 1)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    for t in 0..k {
        num *= BigUint::from((n - t) as u64);
        den *= BigUint::from((t + 1) as u64);
    }
    num / den
}

static TRIANGLE_CACHE: Mutex<Option<BTreeMap<(i64, i64), BigUint>>> = Mutex::new(None);

/// The `(n,k)` Catalan triangle number, by its defining recursion:
/// zero outside `0 ≤ k ≤ n`, `C(0,0) = 1`, `C(n,k) = C(n,k-1) + C(n-1,k)`
/// in the interior, `C(n,0) = C(n-1,0)`, `C(n,n) = C(n,n-1)`.
pub fn catalan_triangle(n: i64, k: i64) -> BigUint {
    if k > n || n < 0 || k < 0 {
        return BigUint::from(0u32);
    }
    {
        let cache = TRIANGLE_CACHE.lock().unwrap();
        if let Some(map) = cache.as_ref() {
            if let Some(v) = map.get(&(n, k)) {
                return v.clone();
            }
        }
    }
    let value = if n == 0 && k == 0 {
        BigUint::from(1u32)
    } else if k == 0 {
        catalan_triangle(n - 1, 0)
    } else if k == n {
        catalan_triangle(n, n - 1)
    } else {
        catalan_triangle(n, k - 1) + catalan_triangle(n - 1, k)
    };
    let mut cache = TRIANGLE_CACHE.lock().unwrap();
    cache.get_or_insert_with(BTreeMap::new).insert((n, k), value.clone());
    value
}

// ---------------------------------------------------------------------------
// b(n, f)
// ---------------------------------------------------------------------------

/// Direct count of `Q_n` members with `f` connected components.
pub fn b_count_direct(n: usize, f: usize) -> BigUint {
    let count = enumerate_max_rank(n).iter().filter(|q| q.cc() == f).count();
    BigUint::from(count)
}

/// The recursion `b(2r,f) = Σ_{l=1}^{r-f+1} C_{l-1}·b(2r-2l, f-1)` with
/// `b(0,0) = 1`, zero out of range, and `b(2r+1,f) = b(2r+2,f)`.
pub fn b_count_recursive(n: usize, f: usize) -> BigUint {
    if n % 2 == 1 {
        return b_count_recursive(n + 1, f);
    }
    let r = n / 2;
    if f > r || (f == 0 && r > 0) {
        return BigUint::from(0u32);
    }
    if r == 0 {
        return BigUint::from(u32::from(f == 0));
    }
    let mut total = BigUint::from(0u32);
    for l in 1..=(r - f + 1) {
        total += catalan(l - 1) * b_count_recursive(2 * r - 2 * l, f - 1);
    }
    total
}

// ---------------------------------------------------------------------------
// Triangle identity verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleFailure {
    pub n: i64,
    pub k: i64,
    pub lhs: BigUint,
    pub rhs: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleReport {
    pub checked: usize,
    pub failures: Vec<TriangleFailure>,
}

impl TriangleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check `C(n,k) = Σ_{l=0}^k C(l,l)·C(n-l-1, k-l)` for all `0 ≤ k < n ≤ n_max`.
pub fn verify_triangle_identity(n_max: i64) -> TriangleReport {
    let mut report = TriangleReport { checked: 0, failures: Vec::new() };
    for n in 1..=n_max {
        for k in 0..n {
            let lhs = catalan_triangle(n, k);
            let mut rhs = BigUint::from(0u32);
            for l in 0..=k {
                rhs += catalan_triangle(l, l) * catalan_triangle(n - l - 1, k - l);
            }
            report.checked += 1;
            if lhs != rhs {
                report.failures.push(TriangleFailure { n, k, lhs, rhs });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::is_normal;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn enumerate_small() {
        let forms = enumerate_normal_forms(2).unwrap();
        let mut texts: Vec<String> = forms.iter().map(|f| f.to_string()).collect();
        texts.sort();
        let mut expect: Vec<String> = ["0", "x2^2", "x1^2", "x1*x2", "x1^2 + x1*x2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        expect.sort();
        assert_eq!(texts, expect);

        assert_eq!(enumerate_normal_forms(0).unwrap().len(), 1); // the zero form
        assert_eq!(enumerate_normal_forms(3).unwrap().len(), 15);
    }

    #[test]
    fn enumerated_forms_are_normal_and_distinct() {
        for n in 0..=5 {
            let forms = enumerate_normal_forms(n).unwrap();
            let mut seen = std::collections::BTreeSet::new();
            for nf in &forms {
                assert!(is_normal(&nf.as_form()).is_ok(), "{nf} must be normal");
                assert!(seen.insert(nf.clone()), "duplicate {nf}");
            }
        }
    }

    #[test]
    fn max_rank_counts_are_catalan() {
        assert_eq!(max_rank_count(3).unwrap(), big(2));
        assert_eq!(max_rank_count(4).unwrap(), big(2));
        assert_eq!(max_rank_count(6).unwrap(), big(5));
        for n in 1..=8usize {
            assert_eq!(max_rank_count(n).unwrap(), catalan((n + 1) / 2), "n = {n}");
        }
    }

    #[test]
    fn max_rank_enumeration_matches_census_filter() {
        for n in 0..=7usize {
            let direct: std::collections::BTreeSet<NormalForm> =
                enumerate_max_rank(n).into_iter().collect();
            let mut filtered = std::collections::BTreeSet::new();
            for_each_normal_form(n, |nf| {
                if nf.brank() == n && nf.is_nondegenerate() {
                    filtered.insert(nf.clone());
                }
            })
            .unwrap();
            assert_eq!(direct, filtered, "n = {n}");
            for q in &direct {
                assert!(q.is_max_rank_nondegenerate());
            }
        }
    }

    #[test]
    fn catalan_values() {
        let expect = [1u64, 1, 2, 5, 14, 42, 132, 429];
        for (m, &c) in expect.iter().enumerate() {
            assert_eq!(catalan(m), big(c));
            assert_eq!(catalan_triangle(m as i64, m as i64), big(c));
        }
    }

    #[test]
    fn triangle_values() {
        assert_eq!(catalan_triangle(0, 0), big(1));
        assert_eq!(catalan_triangle(3, 2), big(5));
        for n in 1..=8 {
            assert_eq!(catalan_triangle(n, 1), big(n as u64), "C(n,1) = n");
            assert_eq!(catalan_triangle(n, 0), big(1));
        }
        assert_eq!(catalan_triangle(2, 3), big(0));
        assert_eq!(catalan_triangle(-1, 0), big(0));
    }

    #[test]
    fn b_counts_match_known_values() {
        assert_eq!(b_count_direct(4, 2), big(1));
        assert_eq!(b_count_direct(8, 2), big(5));
        assert_eq!(b_count_direct(8, 3), big(3));
        assert_eq!(b_count_direct(6, 1), big(2));
        assert_eq!(b_count_recursive(4, 2), big(1));
        assert_eq!(b_count_recursive(8, 2), big(5));
        assert_eq!(b_count_recursive(8, 3), big(3));
        assert_eq!(b_count_recursive(6, 1), big(2));
    }

    #[test]
    fn b_counts_sum_to_catalan() {
        for r in 1..=6usize {
            let mut total = BigUint::from(0u32);
            for f in 1..=r {
                total += b_count_direct(2 * r, f);
            }
            assert_eq!(total, catalan(r), "Σ_f b(2r,f) = C_r at r = {r}");
        }
    }

    #[test]
    fn b_count_equals_triangle() {
        for r in 1..=6usize {
            for f in 1..=r {
                let direct = b_count_direct(2 * r, f);
                let rec = b_count_recursive(2 * r, f);
                let tri = catalan_triangle(r as i64 - 1, (r - f) as i64);
                assert_eq!(direct, rec, "direct vs recursive at ({r}, {f})");
                assert_eq!(direct, tri, "direct vs triangle at ({r}, {f})");
            }
        }
    }

    #[test]
    fn odd_even_b_count_agreement() {
        for r in 1..=5usize {
            for f in 1..=(r + 1) {
                assert_eq!(
                    b_count_direct(2 * r + 1, f),
                    b_count_direct(2 * r + 2, f),
                    "b(2r+1,f) = b(2r+2,f) at r={r}, f={f}"
                );
            }
        }
    }

    #[test]
    fn triangle_identity_small() {
        // n=3, k=1: C(3,1) = C(0,0)C(2,1) + C(1,1)C(1,0)
        let lhs = catalan_triangle(3, 1);
        let rhs = catalan_triangle(0, 0) * catalan_triangle(2, 1)
            + catalan_triangle(1, 1) * catalan_triangle(1, 0);
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, big(3));
        let report = verify_triangle_identity(12);
        assert!(report.passed(), "failures: {:?}", report.failures);
    }

    /// The first connected block of a maximal-rank diagram spanning 2l dots
    /// can be built in C_{l-1} ways; counting Q_{2r} members by the size of
    /// their first block reproduces the factors of the recursion.
    #[test]
    fn first_block_factorization() {
        for r in 2..=5usize {
            let all = enumerate_max_rank(2 * r);
            for f in 1..=r {
                for l in 1..=(r - f + 1) {
                    let count = all
                        .iter()
                        .filter(|q| {
                            let blocks = q.connected_components();
                            blocks.len() == f
                                && blocks[0].ind().iter().max().copied().unwrap_or(0) == 2 * l
                        })
                        .count();
                    let expect = catalan(l - 1) * b_count_recursive(2 * r - 2 * l, f - 1);
                    assert_eq!(BigUint::from(count), expect, "r={r} f={f} l={l}");
                }
            }
        }
    }

    /// Dyck paths of connected maximal-rank forms are injective labels, and
    /// their count is b(n, 1) = C_{r-1}.
    #[test]
    fn dyck_path_injective_on_connected() {
        for n in [4usize, 6, 8] {
            let mut seen = std::collections::BTreeSet::new();
            for q in enumerate_max_rank(n) {
                if q.cc() == 1 {
                    let path = q.dyck_path().unwrap().to_string();
                    assert!(seen.insert(path), "duplicate path for {q}");
                }
            }
            assert_eq!(big(seen.len() as u64), catalan(n / 2 - 1));
        }
    }
}
