//! Complex Schur decomposition with eigenvalue reordering.
//!
//! Householder reduction to Hessenberg form, then single-shift QR with a
//! Wilkinson shift. Diagonal entries are reordered by adjacent Givens swaps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::CMatrix;

/// `A = Q T Qᴴ` with `Q` unitary and `T` upper triangular.
#[derive(Clone, Debug)]
pub struct ComplexSchur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl ComplexSchur {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Shape("Schur decomposition needs a square matrix".into()));
        }
        let mut h = a.clone();
        let mut q = CMatrix::identity(n, n);
        hessenberg(&mut h, &mut q);
        qr_iterate(&mut h, &mut q)?;
        Ok(ComplexSchur { q, t: h })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Moves every eigenvalue accepted by `select` to the leading block and
    /// returns the size of that block. Relative order is preserved.
    pub fn reorder(&mut self, select: impl Fn(Complex64) -> bool) -> usize {
        let n = self.t.nrows();
        let mut front = 0;
        for j in 0..n {
            if select(self.t[(j, j)]) {
                let mut k = j;
                while k > front {
                    swap_adjacent(&mut self.t, &mut self.q, k - 1);
                    k -= 1;
                }
                front += 1;
            }
        }
        front
    }
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(ComplexSchur::new(a)?.eigenvalues())
}

/// Givens pair `(c, s)` with `[c s; −s̄ c]·[x; y] = [r; 0]` and real `c`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let norm = ax.hypot(ay);
    let phase = x / ax;
    (ax / norm, phase * y.conj() / norm)
}

/// Left-multiplies rows `i`, `i+1` by the rotation over columns `cols`.
fn rotate_rows(m: &mut CMatrix, i: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(i, j)];
        let b = m[(i + 1, j)];
        m[(i, j)] = a * c + s * b;
        m[(i + 1, j)] = b * c - s.conj() * a;
    }
}

/// Right-multiplies columns `j`, `j+1` by the adjoint rotation over rows `rows`.
fn rotate_cols(m: &mut CMatrix, j: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, j)];
        let b = m[(i, j + 1)];
        m[(i, j)] = a * c + s.conj() * b;
        m[(i, j + 1)] = b * c - s * a;
    }
}

fn hessenberg(h: &mut CMatrix, q: &mut CMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase·‖x‖·e1 avoids cancellation.
        v[0] = x0 + phase * xnorm;
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H ← P H, P = I − β v vᴴ acting on rows k+1..n.
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (idx, i) in (k + 1..n).enumerate() {
                s += v[idx].conj() * h[(i, j)];
            }
            s *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= v[idx] * s;
            }
        }
        // H ← H P and Q ← Q P on columns k+1..n.
        for m in [&mut *h, &mut *q] {
            for i in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (idx, j) in (k + 1..n).enumerate() {
                    s += m[(i, j)] * v[idx];
                }
                s *= beta;
                for (idx, j) in (k + 1..n).enumerate() {
                    m[(i, j)] -= s * v[idx].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterate(h: &mut CMatrix, q: &mut CMatrix) -> Result<()> {
    let n = h.nrows();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let norm = h.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= eps * diag {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(Error::NoConvergence);
        }
        let mu = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let start = if k == l { l } else { k - 1 };
            rotate_rows(h, k, c, s, start..n);
            if k > l {
                h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
            let stop = (k + 3).min(hi + 1);
            rotate_cols(h, k, c, s, 0..stop);
            rotate_cols(q, k, c, s, 0..n);
        }
    }
    Ok(())
}

/// Swaps diagonal entries `k` and `k+1` of an upper triangular `t`.
fn swap_adjacent(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    if t11 == t22 {
        return;
    }
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    rotate_rows(t, k, c, s, k..n);
    rotate_cols(t, k, c, s, 0..k + 2);
    rotate_cols(q, k, c, s, 0..n);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random(n: usize, seed: u64) -> CMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn check(a: &CMatrix, s: &ComplexSchur) {
        let n = a.nrows();
        let scale = a.norm().max(1.0);
        assert!((&s.q * &s.t * s.q.adjoint() - a).norm() < 1e-12 * scale);
        assert!((s.q.adjoint() * &s.q - CMatrix::identity(n, n)).norm() < 1e-12);
        for j in 0..n {
            for i in j + 1..n {
                assert!(s.t[(i, j)].norm() < 1e-13 * scale);
            }
        }
    }

    #[test]
    fn decomposes_random_matrices() {
        for (n, seed) in [(1, 0), (2, 1), (5, 2), (12, 3), (40, 4)] {
            let a = random(n, seed);
            let s = ComplexSchur::new(&a).unwrap();
            check(&a, &s);
        }
    }

    #[test]
    fn known_eigenvalues() {
        // Rotation generator: eigenvalues ±i.
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);

        // Jordan-like triangular input keeps its diagonal.
        let mut t = CMatrix::zeros(3, 3);
        for i in 0..3 {
            t[(i, i)] = Complex64::new(i as f64 + 1.0, 0.0);
        }
        t[(0, 2)] = Complex64::new(5.0, 0.0);
        let ev = eigenvalues(&t).unwrap();
        let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 1.0).abs() < 1e-14 && (re[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reorder_moves_selected_block_forward() {
        let a = random(10, 7);
        let mut s = ComplexSchur::new(&a).unwrap();
        let expected = s.eigenvalues().iter().filter(|z| z.re < 0.0).count();
        let k = s.reorder(|z| z.re < 0.0);
        assert_eq!(k, expected);
        check(&a, &s);
        let ev = s.eigenvalues();
        assert!(ev[..k].iter().all(|z| z.re < 0.0));
        assert!(ev[k..].iter().all(|z| z.re >= 0.0));
        // Leading Schur vectors span an invariant subspace.
        let u = s.q.columns(0, k).into_owned();
        let t11 = s.t.view((0, 0), (k, k)).into_owned();
        assert!((&a * &u - &u * t11).norm() < 1e-11);
    }
}
