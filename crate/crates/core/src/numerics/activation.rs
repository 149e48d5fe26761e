use super::Matrix;
use crate::error::{Error, Result};

/// ELU with `alpha = 1`.
pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

/// Derivative of [`elu`] at the pre-activation `x`.
pub fn elu_derivative(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Mean softmax cross-entropy over the rows listed in `mask`, and its
/// gradient with respect to `logits` (zero outside the mask).
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize], mask: &[usize]) -> Result<(f64, Matrix)> {
    if mask.is_empty() {
        return Err(Error::arg("cross-entropy over an empty mask"));
    }
    if labels.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} logit rows",
            labels.len(),
            logits.rows()
        )));
    }
    let classes = logits.cols();
    let scale = 1.0 / mask.len() as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(logits.rows(), classes);
    for &r in mask {
        let label = labels[r];
        if label >= classes {
            return Err(Error::arg(format!("label {label} with only {classes} classes")));
        }
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        let log_norm = max + sum.ln();
        loss += log_norm - row[label];
        let g = grad.row_mut(r);
        for (c, (gc, &z)) in g.iter_mut().zip(row).enumerate() {
            let p = (z - log_norm).exp();
            *gc += scale * (p - if c == label { 1.0 } else { 0.0 });
        }
    }
    Ok((loss * scale, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn elu_values() {
        assert_eq!(elu(0.0), 0.0);
        assert_eq!(elu(2.0), 2.0);
        assert!((elu(-1.0) - (-0.632_120_558_828_557_7)).abs() < 1e-15);
        assert_eq!(elu_derivative(3.0), 1.0);
        assert!((elu_derivative(-1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn uniform_logits_give_log_classes() {
        let logits = Matrix::zeros(3, 4);
        let (loss, _) = softmax_cross_entropy(&logits, &[0, 1, 3], &[0, 1, 2]).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn huge_margin_gives_zero_loss() {
        let logits = Matrix::from_rows(&[vec![1000.0, -1000.0, 0.0]]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, &[0], &[0]).unwrap();
        assert!(loss.abs() < 1e-12);
        assert!(grad.is_finite());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let logits = Matrix::uniform(4, 3, 2.0, &mut rng);
        let labels = [2, 0, 1, 1];
        let mask = [0, 2, 3];
        let (_, grad) = softmax_cross_entropy(&logits, &labels, &mask).unwrap();
        let h = 1e-5;
        for i in 0..logits.data().len() {
            let mut plus = logits.clone();
            plus.data_mut()[i] += h;
            let mut minus = logits.clone();
            minus.data_mut()[i] -= h;
            let fp = softmax_cross_entropy(&plus, &labels, &mask).unwrap().0;
            let fm = softmax_cross_entropy(&minus, &labels, &mask).unwrap().0;
            let numeric = (fp - fm) / (2.0 * h);
            let analytic = grad.data()[i];
            let denom = analytic.abs().max(numeric.abs());
            if denom > 1e-9 {
                assert!((analytic - numeric).abs() / denom < 1e-6, "entry {i}");
            } else {
                assert!(analytic.abs() < 1e-12, "masked-out row must have zero grad");
            }
        }
    }

    #[test]
    fn errors() {
        let logits = Matrix::zeros(2, 2);
        assert!(softmax_cross_entropy(&logits, &[0, 1], &[]).is_err());
        assert!(softmax_cross_entropy(&logits, &[0, 2], &[1]).is_err());
        assert!(softmax_cross_entropy(&logits, &[0], &[0]).is_err());
    }

    #[test]
    fn repeated_mask_rows_accumulate() {
        let logits = Matrix::from_rows(&[vec![0.3, -0.2], vec![1.0, 0.5]]).unwrap();
        let (once, g1) = softmax_cross_entropy(&logits, &[0, 1], &[0]).unwrap();
        let (twice, g2) = softmax_cross_entropy(&logits, &[0, 1], &[0, 0]).unwrap();
        assert!((once - twice).abs() < 1e-15);
        assert!(g1.max_abs_diff(&g2) < 1e-15);
    }
}
