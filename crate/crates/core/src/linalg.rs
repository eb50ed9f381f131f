//! Row reduction over `F_{p^m}` for the small moment systems.

use crate::ffield::{FiniteField, Fq};

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(k: &FiniteField, rows: &mut [Vec<Fq>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        let Some(pr) = (top..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(top, pr);
        let inv = k.inv(rows[top][col]).expect("nonzero pivot");
        for x in rows[top].iter_mut() {
            *x = k.mul(*x, inv);
        }
        for i in 0..rows.len() {
            let f = rows[i][col];
            if i == top || f.is_zero() {
                continue;
            }
            for c in 0..ncols {
                let t = k.mul(f, rows[top][c]);
                rows[i][c] = k.sub(rows[i][c], t);
            }
        }
        pivots.push(col);
        top += 1;
        if top == rows.len() {
            break;
        }
    }
    pivots
}

/// Basis of `{x : A x = 0}`, one vector per free column.
pub fn nullspace(k: &FiniteField, a: &[Vec<Fq>], ncols: usize) -> Vec<Vec<Fq>> {
    let mut rows = a.to_vec();
    let pivots = rref(k, &mut rows);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Fq::ZERO; ncols];
            v[free] = Fq::ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = k.neg(rows[row][free]);
            }
            v
        })
        .collect()
}

/// `i^l` in `F_p` with `0^0 = 1`.
pub fn int_pow(k: &FiniteField, i: u64, l: u32) -> Fq {
    k.pow_u(k.from_int(i as i64), l as u64)
}

/// Smallest `l < r` with `sum_i i^l lambda_i != 0`, if any.
pub fn first_violated_moment(k: &FiniteField, r: u32, lambdas: &[Fq]) -> Option<u32> {
    (0..r).find(|&l| {
        let s = lambdas
            .iter()
            .enumerate()
            .fold(Fq::ZERO, |acc, (i, &x)| k.add(acc, k.mul(int_pow(k, i as u64, l), x)));
        !s.is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_sum_condition() {
        let k = FiniteField::new(3, 1).unwrap();
        let a = vec![vec![Fq::ONE; 3]];
        let ns = nullspace(&k, &a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert_eq!(first_violated_moment(&k, 1, v), None);
        }
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        let k = FiniteField::new(5, 1).unwrap();
        assert_eq!(int_pow(&k, 0, 0), Fq::ONE);
        assert_eq!(int_pow(&k, 0, 2), Fq::ZERO);
    }

    #[test]
    fn full_rank_has_trivial_kernel() {
        let k = FiniteField::new(5, 2).unwrap();
        let a: Vec<Vec<Fq>> = (0..3u32)
            .map(|l| (0..3u64).map(|i| int_pow(&k, i, l)).collect())
            .collect();
        assert!(nullspace(&k, &a, 3).is_empty());
    }
}
