//! Abelianization through integer Smith normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::presentation::Presentation;

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> IntMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        IntMatrix {
            rows: rows.len(),
            cols,
            entries: rows.iter().flatten().cloned().map(Into::into).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    fn at(&mut self, r: usize, c: usize) -> &mut BigInt {
        &mut self.entries[r * self.cols + c]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.entries.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.entries.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// row[dst] -= q · row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, q: &BigInt, from: usize) {
        for c in from..self.cols {
            let v = self.get(src, c) * q;
            if !v.is_zero() {
                *self.at(dst, c) -= v;
            }
        }
    }

    fn col_axpy(&mut self, dst: usize, src: usize, q: &BigInt, from: usize) {
        for r in from..self.rows {
            let v = self.get(r, src) * q;
            if !v.is_zero() {
                *self.at(r, dst) -= v;
            }
        }
    }
}

/// Exponent-sum matrix: one row per relator, one column per generator.
pub fn relation_matrix(p: &Presentation) -> IntMatrix {
    let mut m = IntMatrix::zeros(p.relators().len(), p.num_generators());
    for (i, r) in p.relators().iter().enumerate() {
        for l in r.letters() {
            *m.at(i, l.gen as usize) += l.sign();
        }
    }
    m
}

/// Invariant factors of `m`, as returned by [`smith_normal_form`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Nonzero diagonal entries `d₁ | d₂ | …`.
    pub factors: Vec<BigInt>,
    /// `min(rows, cols)` minus the number of nonzero factors.
    pub rank_defect: usize,
}

/// Diagonalize by unimodular row and column operations, pivoting on the
/// smallest nonzero absolute value of the remaining block.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero |entry| in the block [t.., t..].
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                let v = a.get(r, c);
                if !v.is_zero()
                    && best.is_none_or(|(br, bc)| v.abs() < a.get(br, bc).abs())
                {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        a.swap_rows(t, pr);
        a.swap_cols(t, pc);
        loop {
            let pivot = a.get(t, t).clone();
            let mut dirty = false;
            for r in t + 1..rows {
                if !a.get(r, t).is_zero() {
                    let q = a.get(r, t).div_floor(&pivot);
                    a.row_axpy(r, t, &q, t);
                    if !a.get(r, t).is_zero() {
                        dirty = true;
                    }
                }
            }
            for c in t + 1..cols {
                if !a.get(t, c).is_zero() {
                    let q = a.get(t, c).div_floor(&pivot);
                    a.col_axpy(c, t, &q, t);
                    if !a.get(t, c).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                move_min_to_pivot(&mut a, t);
                continue;
            }
            // Row and column cleared; enforce divisibility of the rest.
            let pivot = a.get(t, t).clone();
            let bad = (t + 1..rows)
                .flat_map(|r| (t + 1..cols).map(move |c| (r, c)))
                .find(|&(r, c)| !a.get(r, c).mod_floor(&pivot).is_zero());
            match bad {
                Some((r, _)) => {
                    let one = -BigInt::one();
                    a.row_axpy(t, r, &one, t);
                }
                None => break,
            }
        }
        diag.push(a.get(t, t).abs());
        t += 1;
    }
    SmithForm {
        rank_defect: rows.min(cols) - diag.len(),
        factors: diag,
    }
}

/// Bring the smallest nonzero entry of row `t` / column `t` to (t, t).
fn move_min_to_pivot(a: &mut IntMatrix, t: usize) {
    let mut best = (t, t);
    for r in t..a.rows {
        let v = a.get(r, t);
        if !v.is_zero() && (a.get(best.0, best.1).is_zero() || v.abs() < a.get(best.0, best.1).abs()) {
            best = (r, t);
        }
    }
    for c in t..a.cols {
        let v = a.get(t, c);
        if !v.is_zero() && (a.get(best.0, best.1).is_zero() || v.abs() < a.get(best.0, best.1).abs()) {
            best = (t, c);
        }
    }
    a.swap_rows(t, best.0);
    a.swap_cols(t, best.1);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub rank: usize,
    /// Torsion coefficients ≥ 2, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("trivial");
        }
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        if self.rank > 0 {
            parts.push(if self.rank == 1 {
                "Z".into()
            } else {
                format!("Z^{}", self.rank)
            });
        }
        f.write_str(&parts.join(" x "))
    }
}

/// Invariants of `Z^gens / rowspace(relation_matrix(p))`.
pub fn abelian_invariants(p: &Presentation) -> AbelianInvariants {
    let snf = smith_normal_form(&relation_matrix(p));
    let nonzero = snf.factors.len();
    AbelianInvariants {
        rank: p.num_generators() - nonzero,
        torsion: snf.factors.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// Order of the abelianization when finite.
pub fn abelian_order(inv: &AbelianInvariants) -> Option<u128> {
    if inv.rank > 0 {
        return None;
    }
    inv.torsion
        .iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d.to_u128()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{free_cyclic, gn, higman, l_presentation, steinberg, Presentation};
    use crate::word::{parse_word, Alphabet};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Independent oracle: the k-th invariant factor is the ratio of the gcds
    /// of consecutive k×k minors (determinantal divisors).
    fn determinantal_factors(m: &[Vec<i64>]) -> Vec<i64> {
        fn det(m: &[Vec<i64>]) -> i64 {
            let n = m.len();
            if n == 0 {
                return 1;
            }
            (0..n)
                .map(|c| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                        .collect();
                    let s = if c % 2 == 0 { 1 } else { -1 };
                    s * m[0][c] * det(&minor)
                })
                .sum()
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            (0..n)
                .flat_map(|first| {
                    subsets(n, k - 1)
                        .into_iter()
                        .filter(move |s| s.first().is_none_or(|&f| f > first))
                        .map(move |mut s| {
                            s.insert(0, first);
                            s
                        })
                })
                .collect()
        }
        let (r, c) = (m.len(), m.first().map_or(0, |x| x.len()));
        let mut divisors = vec![1i64];
        for k in 1..=r.min(c) {
            let mut g = 0i64;
            for rs in subsets(r, k) {
                for cs in subsets(c, k) {
                    let sub: Vec<Vec<i64>> =
                        rs.iter().map(|&i| cs.iter().map(|&j| m[i][j]).collect()).collect();
                    g = g.gcd(&det(&sub));
                }
            }
            if g == 0 {
                break;
            }
            divisors.push(g);
        }
        divisors.windows(2).map(|w| w[1] / w[0]).collect()
    }

    #[test]
    fn oracle_sanity() {
        assert_eq!(determinantal_factors(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
    }

    #[test]
    fn snf_examples() {
        let m = IntMatrix::from_rows(&[vec![2i64, 4], vec![6, 8]]);
        assert_eq!(smith_normal_form(&m).factors, ints(&[2, 4]));
        let id = IntMatrix::from_rows(&[vec![1i64, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(smith_normal_form(&id).factors, ints(&[1, 1, 1]));
        let z = IntMatrix::zeros(3, 2);
        let s = smith_normal_form(&z);
        assert!(s.factors.is_empty());
        assert_eq!(s.rank_defect, 2);
    }

    #[test]
    fn relation_matrix_examples() {
        let h4 = higman(4).unwrap();
        let m = relation_matrix(&h4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { -1 } else { 0 };
                assert_eq!(m.get(i, j), &BigInt::from(expect));
            }
        }
        let l = relation_matrix(&l_presentation());
        for i in 0..5 {
            assert!((0..5).all(|j| l.get(i, j).is_zero()));
        }
        let al = Alphabet::new(["a"]).unwrap();
        let c5 = Presentation::new("C5", al.clone(), vec![parse_word(&al, "a^5").unwrap()]).unwrap();
        assert_eq!(relation_matrix(&c5), IntMatrix::from_rows(&[vec![5i64]]));
        assert_eq!(abelian_invariants(&c5).to_string(), "Z/5");
    }

    #[test]
    fn named_groups() {
        for n in 1..=12 {
            assert!(abelian_invariants(&higman(n).unwrap()).is_trivial());
            assert!(abelian_invariants(&gn(n).unwrap()).is_trivial());
        }
        for n in 1..=3 {
            for mn in [false, true] {
                assert!(abelian_invariants(&steinberg(3, n, mn).unwrap()).is_trivial());
            }
        }
        let l = abelian_invariants(&l_presentation());
        assert_eq!(l.rank, 3);
        assert!(l.torsion.is_empty());
        assert_eq!(abelian_invariants(&free_cyclic("x")).rank, 1);
    }

    #[test]
    fn torsion_chain() {
        let m = IntMatrix::from_rows(&[vec![4i64, 0, 0], vec![0, 6, 0], vec![0, 0, 10]]);
        assert_eq!(smith_normal_form(&m).factors, ints(&[2, 2, 60]));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..4, 1usize..4).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-6i64..7, c), r)
        })
    }

    proptest! {
        #[test]
        fn matches_determinantal_oracle(m in small_matrix()) {
            let snf = smith_normal_form(&IntMatrix::from_rows(&m));
            let got: Vec<i64> = snf.factors.iter().map(|d| d.to_i64().unwrap()).collect();
            prop_assert_eq!(got, determinantal_factors(&m));
        }

        #[test]
        fn invariant_under_permutation_and_sign(m in small_matrix(), seed in any::<u64>()) {
            let mut p = m.clone();
            let r = p.len();
            let c = p[0].len();
            p.rotate_left((seed as usize) % r);
            let shift = (seed as usize / 7) % c;
            for row in &mut p {
                row.rotate_left(shift);
            }
            if seed % 2 == 0 {
                for v in &mut p[0] {
                    *v = -*v;
                }
            }
            prop_assert_eq!(
                smith_normal_form(&IntMatrix::from_rows(&m)),
                smith_normal_form(&IntMatrix::from_rows(&p))
            );
        }
    }
}
