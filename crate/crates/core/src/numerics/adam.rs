use super::Matrix;
use crate::error::{Error, Result};

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl AdamState {
    /// Zero-initialised moments shaped like `params`, with `beta1 = 0.9`,
    /// `beta2 = 0.999`, `epsilon = 1e-8`.
    pub fn new<'a>(lr: f64, params: impl IntoIterator<Item = &'a Matrix>) -> Self {
        let first: Vec<Matrix> = params.into_iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            second: first.clone(),
            first,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter matrix.
    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[Matrix]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::Shape(format!(
                "optimizer tracks {} matrices, got {} params and {} grads",
                self.first.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::Shape(format!(
                    "param {:?}, grad {:?}, state {:?}",
                    p.shape(),
                    g.shape(),
                    m.shape()
                )));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            for (((pi, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *pi -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = Matrix::from_vec(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let before = p.clone();
        let mut adam = AdamState::new(0.001, [&p]);
        let g = Matrix::from_vec(1, 3, vec![1.0; 3]).unwrap();
        adam.step(&mut [&mut p], &[g]).unwrap();
        for (a, b) in before.data().iter().zip(p.data()) {
            let expected = 0.001 / (1.0 + 1e-8);
            assert!(((a - b) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradients_leave_params() {
        let mut p = Matrix::from_vec(2, 2, vec![0.3, -0.1, 2.0, 4.0]).unwrap();
        let before = p.clone();
        let mut adam = AdamState::new(0.01, [&p]);
        for _ in 0..50 {
            adam.step(&mut [&mut p], &[Matrix::zeros(2, 2)]).unwrap();
        }
        assert_eq!(p, before);
        assert_eq!(adam.step_count(), 50);
    }

    #[test]
    fn quadratic_trace_matches_scalar_reference() {
        // independent scalar Adam on f(x) = x^2
        let (lr, b1, b2, eps) = (0.001f64, 0.9f64, 0.999f64, 1e-8f64);
        let (mut x, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        let mut reference = Vec::new();
        for t in 1..=10 {
            let g = 2.0 * x;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            x -= lr * mh / (vh.sqrt() + eps);
            reference.push(x);
        }

        let mut p = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let mut adam = AdamState::new(lr, [&p]);
        for expected in reference {
            let g = p.map(|x| 2.0 * x);
            adam.step(&mut [&mut p], &[g]).unwrap();
            assert!((p.get(0, 0) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = Matrix::zeros(2, 2);
        let mut adam = AdamState::new(0.1, [&p]);
        assert!(adam.step(&mut [&mut p], &[Matrix::zeros(2, 3)]).is_err());
        assert!(adam.step(&mut [&mut p], &[]).is_err());
    }
}
