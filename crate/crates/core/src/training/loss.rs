/// `-log softmax(logits)[label]` and its gradient `softmax - onehot`.
pub fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let top = argmax(logits);
    // The max entry contributes exactly 1; ln_1p keeps tiny tails accurate.
    let rest: f64 = exps.iter().enumerate().filter(|&(i, _)| i != top).map(|(_, e)| e).sum();
    let sum = 1.0 + rest;
    let loss = rest.ln_1p() - (logits[label] - max);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    (loss, grad)
}

/// Index of the largest logit (first on ties).
pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confident_and_uniform() {
        let (l, _) = cross_entropy(&[10.0, -10.0], 0);
        // log(1 + e^-20).
        assert!((l - (-20f64).exp().ln_1p()).abs() < 1e-20);
        assert!((l - 2.06e-9).abs() < 1e-11);
        let (l, g) = cross_entropy(&[0.3; 4], 2);
        assert!((l - 4f64.ln()).abs() < 1e-15);
        assert_eq!(g, vec![0.25, 0.25, -0.75, 0.25]);
    }

    #[test]
    fn stable_for_huge_logits() {
        let (l, g) = cross_entropy(&[1e6, 0.0], 1);
        assert!((l - 1e6).abs() < 1e-6);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn argmax_first_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}
