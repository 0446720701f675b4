//! Dense complex LU with partial pivoting for the small systems of the
//! Baker–Akhiezer engine (one unknown per double point).

use crate::scalar::{Cx, Real};

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Cx::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Cx<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        (0..self.n)
            .map(|i| (0..self.n).fold(Cx::new(T::zero(), T::zero()), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> T {
        (0..self.n).map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<T>()).fold(T::zero(), T::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    singular: bool,
    condition: T,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Self {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == T::zero() || !pmax.is_finite() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - f * u;
                }
            }
        }
        let mut out = Self { lu, perm, singular, condition: T::infinity() };
        if !singular {
            out.condition = a.norm1() * out.inverse().norm1();
            if !out.condition.is_finite() {
                out.singular = true;
            }
        }
        out
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// 1-norm condition number `‖A‖₁‖A⁻¹‖₁` (infinite when singular).
    pub fn condition(&self) -> T {
        self.condition
    }

    pub fn solve(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.lu.dim();
        let mut x: Vec<Cx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.lu.dim();
        let mut inv = CMatrix::zeros(n);
        for j in 0..n {
            let mut e = vec![Cx::new(T::zero(), T::zero()); n];
            e[j] = Cx::new(T::one(), T::zero());
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn solves_complex_system() {
        let a = CMatrix::from_fn(3, |i, j| {
            C::new((i + 2 * j) as f64 + 0.5, (i as f64 - j as f64) * 0.3)
                + if i == j { C::new(4.0, 0.0) } else { C::new(0.0, 0.0) }
        });
        let x = vec![C::new(1.0, -1.0), C::new(0.5, 2.0), C::new(-3.0, 0.25)];
        let b = a.mul_vec(&x);
        let lu = Lu::new(&a);
        let got = lu.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
        assert!(lu.condition() >= 1.0);
    }

    #[test]
    fn needs_pivoting() {
        let a = CMatrix::from_fn(2, |i, j| if i == j { C::new(0.0, 0.0) } else { C::new(1.0, 0.0) });
        let lu = Lu::new(&a);
        assert!(!lu.is_singular());
        let x = lu.solve(&[C::new(2.0, 0.0), C::new(3.0, 0.0)]);
        assert!((x[0] - C::new(3.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - C::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn flags_singular() {
        let a = CMatrix::from_fn(2, |_, _| C::new(1.0, 1.0));
        assert!(Lu::new(&a).is_singular());
    }
}
