//! Complex dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Builds a complex matrix from real row-major data.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| real(rows[i][j]))
}

/// `max |(U^† U - I)_{ij}|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Orthonormal basis (as columns) of the null space of `a`, deciding rank
/// with singular values below `threshold`.
pub fn null_space(a: &CMatrix, threshold: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    // the thin SVD only yields a full right basis when rows >= cols
    let padded = if a.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let kept: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < threshold)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    columns_to_matrix(cols, &kept)
}

pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Extends the unit vector `first` to a unitary matrix whose column
/// `position` is `first`, orthonormalizing the standard basis vectors
/// (skipping those that become dependent) into the remaining columns.
pub fn complete_to_unitary(first: &CVector, position: usize) -> CMatrix {
    let n = first.len();
    let mut basis: Vec<CVector> = vec![first.clone()];
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[k] = ONE;
        // modified Gram-Schmidt, run twice for stability
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let norm = norm_sqr(&v).sqrt();
        if norm > 1e-8 {
            basis.push(v / real(norm));
        }
    }
    assert_eq!(basis.len(), n, "completion must reach full rank");
    let mut u = CMatrix::zeros(n, n);
    u.set_column(position, &basis[0]);
    let others = (0..n).filter(|&j| j != position);
    for (j, b) in others.zip(basis.iter().skip(1)) {
        u.set_column(j, b);
    }
    u
}

/// Block-diagonal matrix with the given square blocks.
pub fn block_diagonal(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMatrix::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((offset, offset), (k, k)).copy_from(b);
        offset += k;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let a = from_real_rows(&[&[1.0, 1.0, 0.0]]);
        let ns = null_space(&a, 1e-8);
        assert_eq!(ns.ncols(), 2);
        assert!((a * &ns).norm() < 1e-12);
        assert!((ns.adjoint() * &ns - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn completion_is_unitary_and_keeps_column() {
        let s = 1.0 / 3f64.sqrt();
        let first = CVector::from_vec(vec![real(s), real(0.0), real(s), real(s)]);
        let u = complete_to_unitary(&first, 2);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((u.column(2) - &first).norm() < 1e-15);
    }

    #[test]
    fn non_square_is_infinitely_defective() {
        assert!(unitarity_defect(&CMatrix::zeros(2, 3)).is_infinite());
    }
}
