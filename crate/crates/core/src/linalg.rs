//! Just enough dense linear algebra for exact ZOH discretization of small
//! state-space models.

use alloc::vec;
use alloc::vec::Vec;

// inherent float methods are only visible when std is linked
#[allow(unused_imports)]
use num_traits::Float;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.data[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a degree-18 Taylor
    /// polynomial on the scaled matrix (`||A / 2^s||_1 <= 1/2`).
    pub fn expm(&self) -> Self {
        let norm = self.norm1();
        let mut squarings = 0u32;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
        }
        let a = self.scale(0.5f64.powi(squarings as i32));
        let mut result = Self::identity(self.n);
        let mut term = Self::identity(self.n);
        for k in 1..=18 {
            term = term.mul(&a).scale(1.0 / k as f64);
            result = result.add(&term);
        }
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Continuous state-space model `x' = A x + B u`, `y = C x + D u` with `m`
/// inputs and one output.
#[derive(Debug, Clone)]
pub(crate) struct StateSpace {
    pub a: Matrix,
    /// `n x m`, row-major.
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Length `m`.
    pub d: Vec<f64>,
    pub inputs: usize,
}

impl StateSpace {
    /// Controllable canonical realization of a proper SISO `num / den`
    /// (descending powers, `den[0] != 0`, `num.len() <= den.len()`).
    pub fn from_tf(num: &[f64], den: &[f64]) -> Self {
        let n = den.len() - 1;
        let a0 = den[0];
        let den: Vec<f64> = den.iter().map(|c| c / a0).collect();
        let mut padded = vec![0.0; den.len() - num.len()];
        padded.extend(num.iter().map(|c| c / a0));
        let d = padded[0];
        let mut a = Matrix::zeros(n);
        for j in 0..n {
            a[(0, j)] = -den[j + 1];
        }
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        let mut b = vec![0.0; n];
        if n > 0 {
            b[0] = 1.0;
        }
        let c = (0..n).map(|j| padded[j + 1] - d * den[j + 1]).collect();
        Self {
            a,
            b,
            c,
            d: vec![d],
            inputs: 1,
        }
    }

    pub fn order(&self) -> usize {
        self.a.dim()
    }

    /// Exact discretization for inputs held constant over each step `h`:
    /// `Phi = e^{A h}`, `Gamma = int_0^h e^{A s} ds B`, computed together from
    /// the exponential of the augmented matrix `[[A, B], [0, 0]] h`.
    pub fn zoh(&self, h: f64) -> DiscreteStateSpace {
        let n = self.order();
        let m = self.inputs;
        let mut aug = Matrix::zeros(n + m);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self.a[(i, j)] * h;
            }
            for j in 0..m {
                aug[(i, n + j)] = self.b[i * m + j] * h;
            }
        }
        let e = aug.expm();
        let mut phi = Matrix::zeros(n);
        let mut gamma = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..n {
                phi[(i, j)] = e[(i, j)];
            }
            for j in 0..m {
                gamma[i * m + j] = e[(i, n + j)];
            }
        }
        DiscreteStateSpace {
            phi,
            gamma,
            c: self.c.clone(),
            d: self.d.clone(),
            inputs: m,
            x: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }
}

/// Discrete state-space model with its own state vector.
#[derive(Debug, Clone)]
pub(crate) struct DiscreteStateSpace {
    phi: Matrix,
    gamma: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    inputs: usize,
    x: Vec<f64>,
    scratch: Vec<f64>,
}

impl DiscreteStateSpace {
    /// `C x + D u`.
    pub fn output(&self, u: &[f64]) -> f64 {
        let cx: f64 = self.c.iter().zip(&self.x).map(|(c, x)| c * x).sum();
        cx + self.d.iter().zip(u).map(|(d, u)| d * u).sum::<f64>()
    }

    /// `x <- Phi x + Gamma u`.
    pub fn advance(&mut self, u: &[f64]) {
        self.phi.mul_vec(&self.x, &mut self.scratch);
        let m = self.inputs;
        for (i, s) in self.scratch.iter_mut().enumerate() {
            *s += (0..m).map(|j| self.gamma[i * m + j] * u[j]).sum::<f64>();
        }
        core::mem::swap(&mut self.x, &mut self.scratch);
    }
}
