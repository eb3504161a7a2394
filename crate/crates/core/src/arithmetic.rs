//! Multiplicative orders of 2, the divisibility graph behind the circular
//! argument for Higman groups, and the exact Følner constant inequality.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithmeticError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("bound and cycle length must be positive")]
    BadParameter,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m`.
pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Smallest-prime-factor sieve on `0..=n`.
fn spf_sieve(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

/// Prime factorisation as `(p, e)` pairs, ascending.
fn factor(mut n: u64, spf: Option<&[u32]>) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut push = |p: u64| match out.last_mut() {
        Some((q, e)) if *q == p => *e += 1,
        _ => out.push((p, 1)),
    };
    match spf {
        Some(spf) if (n as usize) < spf.len() => {
            while n > 1 {
                let p = spf[n as usize] as u64;
                push(p);
                n /= p;
            }
        }
        _ => {
            let mut p = 2;
            while p * p <= n {
                while n % p == 0 {
                    push(p);
                    n /= p;
                }
                p += 1;
            }
            if n > 1 {
                push(n);
            }
        }
    }
    out
}

fn totient_of(factors: &[(u64, u32)]) -> u64 {
    factors
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

fn ord2_with(m: u64, spf: Option<&[u32]>) -> Option<u64> {
    if m % 2 == 0 {
        return None;
    }
    if m == 1 {
        return Some(1);
    }
    let phi = totient_of(&factor(m, spf));
    let mut ord = phi;
    for (q, _) in factor(phi, spf) {
        while ord % q == 0 && powmod(2, ord / q, m) == 1 {
            ord /= q;
        }
    }
    Some(ord)
}

/// Multiplicative order of 2 modulo `m`; `None` when `m` is even.
pub fn ord2_mod(m: u64) -> Result<Option<u64>, ArithmeticError> {
    if m == 0 {
        return Err(ArithmeticError::ZeroModulus);
    }
    Ok(ord2_with(m, None))
}

/// Nodes `1..=M`; an edge `r → d` for odd `d` whenever `ord_d(2) | r`,
/// i.e. whenever `d | 2^r − 1`.
#[derive(Debug, Clone)]
pub struct DivisibilityGraph {
    bound: usize,
    ord: Vec<Option<u64>>,
    succ: Vec<Vec<u32>>,
}

impl DivisibilityGraph {
    pub fn new(bound: usize) -> Result<DivisibilityGraph, ArithmeticError> {
        if bound == 0 {
            return Err(ArithmeticError::BadParameter);
        }
        let spf = spf_sieve(bound);
        let ord: Vec<Option<u64>> = (0..=bound as u64)
            .map(|m| if m == 0 { None } else { ord2_with(m, Some(&spf)) })
            .collect();
        let mut succ = vec![Vec::new(); bound + 1];
        for d in (1..=bound).step_by(2) {
            let s = ord[d].expect("odd modulus") as usize;
            for r in (s..=bound).step_by(s) {
                succ[r].push(d as u32);
            }
        }
        Ok(DivisibilityGraph { bound, ord, succ })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn ord2(&self, m: usize) -> Option<u64> {
        self.ord[m]
    }

    /// Successors of `r`, ascending.
    pub fn successors(&self, r: usize) -> &[u32] {
        &self.succ[r]
    }

    pub fn has_edge(&self, r: usize, d: usize) -> bool {
        self.succ[r].binary_search(&(d as u32)).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Nodes surviving repeated removal of sources and sinks. Every closed
    /// walk lives here.
    pub fn cycle_core(&self) -> Vec<usize> {
        let n = self.bound + 1;
        let mut alive = vec![true; n];
        alive[0] = false;
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        let mut pred: Vec<Vec<u32>> = vec![Vec::new(); n];
        for r in 1..n {
            for &d in &self.succ[r] {
                indeg[d as usize] += 1;
                outdeg[r] += 1;
                pred[d as usize].push(r as u32);
            }
        }
        let mut stack: Vec<usize> = (1..n).filter(|&v| indeg[v] == 0 || outdeg[v] == 0).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &d in &self.succ[v] {
                let d = d as usize;
                indeg[d] -= 1;
                if alive[d] && indeg[d] == 0 {
                    stack.push(d);
                }
            }
            for &r in &pred[v] {
                let r = r as usize;
                outdeg[r] -= 1;
                if alive[r] && outdeg[r] == 0 {
                    stack.push(r);
                }
            }
        }
        (1..n).filter(|&v| alive[v]).collect()
    }
}

fn is_min_rotation(t: &[u64]) -> bool {
    (1..t.len()).all(|s| {
        let rotated = t[s..].iter().chain(&t[..s]);
        rotated.cmp(t.iter()) != Ordering::Less
    })
}

/// Cyclic tuples `(r_0, …, r_{n−1})` in `1..=M` with `r_j | 2^{r_{j−1}} − 1`,
/// one per rotation class (the lexicographically least rotation).
pub fn order_tuple_search(n: usize, bound: usize) -> Result<Vec<Vec<u64>>, ArithmeticError> {
    if n == 0 {
        return Err(ArithmeticError::BadParameter);
    }
    let g = DivisibilityGraph::new(bound)?;
    Ok(closed_walks(&g, n))
}

/// Closed walks of length `n` in `g`, restricted to its cycle core.
pub fn closed_walks(g: &DivisibilityGraph, n: usize) -> Vec<Vec<u64>> {
    let core = g.cycle_core();
    let mut in_core = vec![false; g.bound + 1];
    for &v in &core {
        in_core[v] = true;
    }
    let succ: Vec<Vec<usize>> = (0..=g.bound)
        .map(|r| {
            if in_core[r] {
                g.succ[r].iter().map(|&d| d as usize).filter(|&d| in_core[d]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();

    fn dfs(succ: &[Vec<usize>], start: usize, n: usize, path: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let last = *path.last().unwrap() as usize;
        if path.len() == n {
            if succ[last].contains(&start) && is_min_rotation(path) {
                out.push(path.clone());
            }
            return;
        }
        for &d in &succ[last] {
            // The start is the least entry of its canonical rotation.
            if d < start {
                continue;
            }
            path.push(d as u64);
            dfs(succ, start, n, path, out);
            path.pop();
        }
    }

    let mut found: Vec<Vec<u64>> = core
        .par_iter()
        .flat_map_iter(|&s| {
            let mut out = Vec::new();
            dfs(&succ, s, n, &mut vec![s as u64], &mut out);
            out
        })
        .collect();
    found.sort();
    found
}

/// One step of the Følner chain: `lhs_num/lhs_den > rhs_num/rhs_den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub statement: &'static str,
    pub lhs: (i64, i64),
    pub rhs: (i64, i64),
}

impl ChainStep {
    pub fn holds(&self) -> bool {
        self.lhs.0 * self.rhs.1 > self.rhs.0 * self.lhs.1
    }
}

fn reduce(num: i64, den: i64) -> (i64, i64) {
    let g = num_integer::Integer::gcd(&num, &den);
    (num / g, den / g)
}

/// The chain `√(2−√3)/3 > 1/6 ⟸ … ⟸ 49 > 48`, every rational computed
/// rather than written down.
pub fn folner_chain() -> Vec<ChainStep> {
    let sixth = (1i64, 6i64);
    // ε/3 > 1/6  ⟺  ε > 3·(1/6)
    let half = reduce(3 * sixth.0, sixth.1);
    // ε = √(2−√3) > 1/2 ⟺ 2−√3 > (1/2)²   (both sides positive)
    let quarter = reduce(half.0 * half.0, half.1 * half.1);
    // 2−√3 > 1/4 ⟺ 2 − 1/4 > √3
    let seven_fourths = reduce(2 * quarter.1 - quarter.0, quarter.1);
    // 7/4 > √3 ⟺ (7/4)² > 3   (both sides positive)
    let sq = reduce(seven_fourths.0 * seven_fourths.0, seven_fourths.1 * seven_fourths.1);
    // 49/16 > 3 ⟺ 49 > 3·16
    let cleared = (sq.0, 3 * sq.1);
    vec![
        ChainStep {
            statement: "2 > sqrt 3 since 4 > 3",
            lhs: (4, 1),
            rhs: (3, 1),
        },
        ChainStep {
            statement: "7/4 > 0, so squaring is reversible",
            lhs: seven_fourths,
            rhs: (0, 1),
        },
        ChainStep {
            statement: "(7/4)^2 > 3",
            lhs: sq,
            rhs: (3, 1),
        },
        ChainStep {
            statement: "49 > 48",
            lhs: (cleared.0, 1),
            rhs: (cleared.1, 1),
        },
    ]
}


/// Exact check that `√(2−√3)/3 > 1/6`.
pub fn folner_bound_check() -> bool {
    let chain = folner_chain();
    let last = chain.last().expect("nonempty chain");
    chain.iter().all(ChainStep::holds) && last.lhs == (49, 1) && last.rhs == (48, 1)
}

/// Square of the constant `1/6`, as a reduced fraction.
pub fn folner_constant() -> (i64, i64) {
    reduce(1, 36)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn brute_ord(m: u64) -> Option<u64> {
        if m % 2 == 0 {
            return None;
        }
        let mut x = 2 % m;
        let mut k = 1;
        while x != 1 % m {
            x = x * 2 % m;
            k += 1;
        }
        Some(k)
    }

    fn brute_phi(m: u64) -> u64 {
        (1..=m).filter(|&k| num_integer::Integer::gcd(&k, &m) == 1).count() as u64
    }

    #[test]
    fn ord_examples() {
        assert_eq!(ord2_mod(7), Ok(Some(3)));
        assert_eq!(ord2_mod(1), Ok(Some(1)));
        assert_eq!(ord2_mod(9), Ok(Some(6)));
        assert_eq!(ord2_mod(10), Ok(None));
        assert_eq!(ord2_mod(0), Err(ArithmeticError::ZeroModulus));
        assert_eq!(ord2_mod(2_147_483_647), Ok(Some(31)));
    }

    #[test]
    fn ord_divides_phi_and_matches_powering() {
        for m in (1..=10_000u64).step_by(2) {
            let o = ord2_mod(m).unwrap().unwrap();
            assert_eq!(brute_phi(m) % o, 0, "m={m}");
            if m < 2000 {
                assert_eq!(Some(o), brute_ord(m));
            }
        }
    }

    #[test]
    fn graph_ord_matches_standalone() {
        let g = DivisibilityGraph::new(3000).unwrap();
        for m in 1..=3000u64 {
            assert_eq!(g.ord2(m as usize), ord2_mod(m).unwrap());
        }
    }

    #[test]
    fn edge_characterisation_by_bigint() {
        let g = DivisibilityGraph::new(200).unwrap();
        for r in 1..=64usize {
            let big = (BigUint::one() << r) - BigUint::one();
            for d in 1..=200usize {
                let divides = (&big % BigUint::from(d)).is_zero();
                if d % 2 == 1 {
                    assert_eq!(divides, g.has_edge(r, d), "r={r} d={d}");
                } else {
                    assert!(!g.has_edge(r, d));
                    if d > 1 {
                        assert!(!divides);
                    }
                }
            }
            assert!(g.has_edge(r, 1));
        }
    }

    #[test]
    fn direct_scans() {
        // n = 1: r | 2^r − 1 only for r = 1.
        let ones: Vec<u64> = (1..=1000u64)
            .filter(|&r| r % 2 == 1 && r % brute_ord(r).unwrap() == 0)
            .collect();
        assert_eq!(ones, vec![1]);
        assert_eq!(order_tuple_search(1, 1000).unwrap(), vec![vec![1]]);
        // n = 2 by a double loop over the divisibility relation.
        let divides = |d: u64, r: u64| d % 2 == 1 && r % brute_ord(d).unwrap() == 0;
        let mut pairs = Vec::new();
        for a in 1..=100u64 {
            for b in 1..=100u64 {
                if divides(b, a) && divides(a, b) && a <= b {
                    pairs.push(vec![a, b]);
                }
            }
        }
        assert_eq!(pairs, vec![vec![1, 1]]);
        assert_eq!(order_tuple_search(2, 100).unwrap(), pairs);
        assert_eq!(order_tuple_search(4, 10_000).unwrap(), vec![vec![1; 4]]);
    }

    #[test]
    fn core_is_just_one() {
        let g = DivisibilityGraph::new(5000).unwrap();
        assert_eq!(g.cycle_core(), vec![1]);
    }

    #[test]
    fn rotation_canonical_form() {
        assert!(is_min_rotation(&[1, 2, 3]));
        assert!(!is_min_rotation(&[2, 3, 1]));
        assert!(is_min_rotation(&[1, 1, 1]));
    }

    #[test]
    fn folner() {
        assert!(folner_bound_check());
        let chain = folner_chain();
        assert_eq!(chain[2].lhs, (49, 16));
        assert_eq!((chain[3].lhs.0, chain[3].rhs.0), (49, 48));
        assert_eq!(folner_constant(), (1, 36));
        let sixth: f64 = 1.0 / 6.0;
        let eps = (2.0f64 - 3f64.sqrt()).sqrt();
        assert!(eps / 3.0 > sixth);
    }

    proptest! {
        #[test]
        fn powmod_matches_bigint(b in 0u64..1_000_000, e in 0u64..10_000, m in 1u64..1_000_000_007) {
            let big = BigUint::from(b).modpow(&BigUint::from(e), &BigUint::from(m));
            prop_assert_eq!(BigUint::from(powmod(b, e, m)), big);
        }
    }
}
