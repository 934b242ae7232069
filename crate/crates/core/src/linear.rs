//! Linear classifiers trained by plain stochastic gradient descent.

use serde::{Deserialize, Serialize};

use crate::scalar::{dot, sigmoid, softmax, Scalar};

/// Binary logistic regression: `p = sigmoid(w·x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Logistic<T> {
    pub weights: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> Logistic<T> {
    pub fn zeros(dim: usize) -> Self {
        Logistic {
            weights: vec![T::zero(); dim],
            bias: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn probability(&self, x: &[T]) -> T {
        sigmoid(dot(&self.weights, x) + self.bias)
    }

    /// One gradient step on the cross-entropy of a single example.
    pub fn step(&mut self, x: &[T], target: T, learning_rate: T) {
        let g = self.probability(x) - target;
        for (w, &xi) in self.weights.iter_mut().zip(x) {
            *w = *w - learning_rate * g * xi;
        }
        self.bias = self.bias - learning_rate * g;
    }

    /// Mean cross-entropy over `(features, target)` pairs.
    pub fn loss<'a>(&self, examples: impl IntoIterator<Item = (&'a [T], T)>) -> T {
        let eps = T::of(1e-12);
        let mut total = T::zero();
        let mut n = 0usize;
        for (x, y) in examples {
            let p = self.probability(x).max(eps).min(T::one() - eps);
            total = total - (y * p.ln() + (T::one() - y) * (T::one() - p).ln());
            n += 1;
        }
        if n == 0 {
            T::zero()
        } else {
            total / T::of(n as f64)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

/// Multinomial logistic regression over `classes` outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Softmax<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<T>,
}

impl<T: Scalar> Softmax<T> {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Softmax {
            weights: vec![vec![T::zero(); dim]; classes],
            biases: vec![T::zero(); classes],
        }
    }

    pub fn probabilities(&self, x: &[T]) -> Vec<T> {
        let logits: Vec<T> = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, &b)| dot(w, x) + b)
            .collect();
        softmax(&logits)
    }

    pub fn step(&mut self, x: &[T], class: usize, learning_rate: T) {
        let p = self.probabilities(x);
        for (c, (w, b)) in self.weights.iter_mut().zip(self.biases.iter_mut()).enumerate() {
            let target = if c == class { T::one() } else { T::zero() };
            let g = p[c] - target;
            for (wi, &xi) in w.iter_mut().zip(x) {
                *wi = *wi - learning_rate * g * xi;
            }
            *b = *b - learning_rate * g;
        }
    }

    pub fn loss<'a>(&self, examples: impl IntoIterator<Item = (&'a [T], usize)>) -> T {
        let eps = T::of(1e-12);
        let mut total = T::zero();
        let mut n = 0usize;
        for (x, class) in examples {
            total = total - self.probabilities(x)[class].max(eps).ln();
            n += 1;
        }
        if n == 0 {
            T::zero()
        } else {
            total / T::of(n as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_gradient_matches_finite_difference() {
        let mut m = Logistic::<f64> {
            weights: vec![0.3, -0.2],
            bias: 0.1,
        };
        let x = [1.5, 0.7];
        let y = 1.0;
        let h = 1e-6;
        let base = m.loss([(&x[..], y)]);
        let mut bumped = m.clone();
        bumped.weights[0] += h;
        let numeric = (bumped.loss([(&x[..], y)]) - base) / h;
        let analytic = (m.probability(&x) - y) * x[0];
        assert!((numeric - analytic).abs() < 1e-5);
        m.step(&x, y, 0.5);
        assert!(m.loss([(&x[..], y)]) < base);
    }

    #[test]
    fn softmax_gradient_matches_finite_difference() {
        let m = Softmax::<f64> {
            weights: vec![vec![0.2, 0.1], vec![-0.3, 0.4], vec![0.0, -0.1]],
            biases: vec![0.0, 0.1, -0.2],
        };
        let x = [0.9, -1.1];
        let h = 1e-6;
        let base = m.loss([(&x[..], 1)]);
        let p = m.probabilities(&x);
        for (c, pc) in p.iter().enumerate() {
            let mut bumped = m.clone();
            bumped.weights[c][1] += h;
            let numeric = (bumped.loss([(&x[..], 1)]) - base) / h;
            let target = if c == 1 { 1.0 } else { 0.0 };
            assert!((numeric - (pc - target) * x[1]).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = Softmax::<f32>::zeros(3, 4);
        let p = m.probabilities(&[0.0; 4]);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-6));
        assert_eq!(Logistic::<f32>::zeros(2).probability(&[1.0, 1.0]), 0.5);
    }
}
