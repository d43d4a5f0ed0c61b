use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Length of `svec` for an `n × n` symmetric matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index of entry `(r, c)`, `r <= c`, in the column-major upper-triangle
/// `svec` layout.
pub fn svec_index(r: usize, c: usize) -> usize {
    debug_assert!(r <= c);
    c * (c + 1) / 2 + r
}

/// Isometric vectorization: off-diagonal entries are scaled by `√2` so that
/// `⟨svec A, svec B⟩ = tr(AB)`.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(svec_len(n));
    for c in 0..n {
        for r in 0..=c {
            out.push(if r == c { m[(r, c)] } else { std::f64::consts::SQRT_2 * 0.5 * (m[(r, c)] + m[(c, r)]) });
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for c in 0..n {
        for r in 0..=c {
            if r == c {
                m[(r, c)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(r, c)] = x;
                m[(c, r)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Symmetric eigendecomposition with eigenvalues in descending order and
/// each eigenvector's first nonzero component made positive.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-14) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(k, &v);
    }
    (values, vectors)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = 0.5 * (m + m.transpose());
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Euclidean projection onto the PSD cone.
pub fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, m[(0, 0)].max(0.0));
    }
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut out = DMatrix::zeros(n, n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let v = eig.eigenvectors.column(i);
            out += lam * v * v.transpose();
        }
    }
    out
}

/// Projects an `svec` vector in place.
pub fn project_svec(v: &mut [f64], n: usize) {
    if n == 1 {
        v[0] = v[0].max(0.0);
        return;
    }
    let p = project_psd(&smat(v, n));
    v.copy_from_slice(&svec(&p));
}
