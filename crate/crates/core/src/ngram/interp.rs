use crate::error::{Error, Result};

/// Per-token linear interpolation of two aligned probability streams:
/// lambda * p_model + (1 - lambda) * p_kn.
pub fn interpolate(p_model: &[f64], p_kn: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if p_model.len() != p_kn.len() {
        return Err(Error::Data(format!(
            "misaligned probability streams: {} vs {} positions",
            p_model.len(),
            p_kn.len()
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda {lambda} outside [0,1]")));
    }
    Ok(p_model
        .iter()
        .zip(p_kn)
        .map(|(&m, &k)| lambda * m + (1.0 - lambda) * k)
        .collect())
}

/// Total NLL of an interpolated stream; the tuning objective.
pub fn interpolated_nll(p_model: &[f64], p_kn: &[f64], lambda: f64) -> f64 {
    p_model
        .iter()
        .zip(p_kn)
        .map(|(&m, &k)| -(lambda * m + (1.0 - lambda) * k).ln())
        .sum()
}

/// Golden-section search for the lambda in [0,1] minimizing the dev NLL,
/// to 1e-3 precision. The objective is convex (negative log of an affine
/// function per position), so the search is exact up to the tolerance.
pub fn tune_lambda(p_model: &[f64], p_kn: &[f64]) -> Result<f64> {
    if p_model.len() != p_kn.len() {
        return Err(Error::Data(format!(
            "misaligned probability streams: {} vs {} positions",
            p_model.len(),
            p_kn.len()
        )));
    }
    if p_model.is_empty() {
        return Err(Error::Data("cannot tune lambda on empty streams".into()));
    }
    let phi_inv = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - phi_inv * (b - a);
    let mut x2 = a + phi_inv * (b - a);
    let mut f1 = interpolated_nll(p_model, p_kn, x1);
    let mut f2 = interpolated_nll(p_model, p_kn, x2);
    while b - a > 1e-3 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi_inv * (b - a);
            f1 = interpolated_nll(p_model, p_kn, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi_inv * (b - a);
            f2 = interpolated_nll(p_model, p_kn, x2);
        }
    }
    Ok((a + b) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn endpoints_leave_streams_unchanged() {
        let m = vec![0.5, 0.25, 0.125];
        let k = vec![0.1, 0.2, 0.3];
        assert_eq!(interpolate(&m, &k, 1.0).unwrap(), m);
        assert_eq!(interpolate(&m, &k, 0.0).unwrap(), k);
    }

    #[test]
    fn misaligned_streams_rejected() {
        assert!(interpolate(&[0.5], &[0.5, 0.5], 0.5).is_err());
        assert!(tune_lambda(&[0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn identical_streams_return_interior_point() {
        let p = vec![0.2, 0.4, 0.1, 0.3];
        let l1 = tune_lambda(&p, &p).unwrap();
        let l2 = tune_lambda(&p, &p).unwrap();
        assert_eq!(l1, l2);
        assert!(l1 > 0.0 && l1 < 1.0);
    }

    #[test]
    fn uniform_model_against_perfect_kn_pushes_lambda_to_zero() {
        let m = vec![0.001; 50];
        let k = vec![0.999; 50];
        let lambda = tune_lambda(&m, &k).unwrap();
        assert!(lambda < 2e-3, "lambda = {lambda}");
    }

    #[test]
    fn beats_eleven_point_grid_within_tolerance() {
        let mut rng = Rng::new(61);
        let m: Vec<f64> = (0..200).map(|_| rng.uniform(0.01, 0.9)).collect();
        let k: Vec<f64> = (0..200).map(|_| rng.uniform(0.01, 0.9)).collect();
        let lambda = tune_lambda(&m, &k).unwrap();
        let tuned = interpolated_nll(&m, &k, lambda);
        let grid_best = (0..=10)
            .map(|i| interpolated_nll(&m, &k, i as f64 / 10.0))
            .fold(f64::INFINITY, f64::min);
        assert!(tuned <= grid_best + 1e-3, "{tuned} vs grid {grid_best}");
    }

    #[test]
    fn optimal_lambda_never_worse_than_endpoints() {
        let mut rng = Rng::new(62);
        for _ in 0..5 {
            let m: Vec<f64> = (0..100).map(|_| rng.uniform(0.001, 0.8)).collect();
            let k: Vec<f64> = (0..100).map(|_| rng.uniform(0.001, 0.8)).collect();
            let lambda = tune_lambda(&m, &k).unwrap();
            let tuned = interpolated_nll(&m, &k, lambda);
            let end0 = interpolated_nll(&m, &k, 0.0);
            let end1 = interpolated_nll(&m, &k, 1.0);
            assert!(tuned <= end0.min(end1) + 1e-6);
        }
    }

    #[test]
    fn interpolated_streams_stay_valid() {
        let mut rng = Rng::new(63);
        let m: Vec<f64> = (0..50).map(|_| rng.uniform(0.001, 1.0)).collect();
        let k: Vec<f64> = (0..50).map(|_| rng.uniform(0.001, 1.0)).collect();
        let mix = interpolate(&m, &k, 0.3).unwrap();
        for ((&mm, &kk), &x) in m.iter().zip(&k).zip(&mix) {
            assert!(x > 0.0);
            assert!(x >= mm.min(kk) - 1e-15 && x <= mm.max(kk) + 1e-15);
        }
    }
}
