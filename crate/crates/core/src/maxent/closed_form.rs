use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

/// Systems with a given input vector and a given mean transit time.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitConstraintProblem {
    pub input: DVector<f64>,
    pub target_mean_transit: f64,
}

impl TransitConstraintProblem {
    pub fn new(input: DVector<f64>, target_mean_transit: f64) -> Result<Self> {
        if input.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if input.iter().any(|&x| x < 0.0) || !(input.sum() > 0.0) {
            return Err(Error::ZeroInput);
        }
        if !(target_mean_transit > 0.0) {
            return Err(Error::NonpositiveTarget(format!(
                "mean transit time {target_mean_transit}"
            )));
        }
        Ok(TransitConstraintProblem {
            input,
            target_mean_transit,
        })
    }

    pub fn dimension(&self) -> usize {
        self.input.len()
    }
}

/// All internal rates 1 and every outflow rate `1 / E[T]`.
pub fn maxent_fixed_transit(problem: &TransitConstraintProblem) -> Result<CompartmentalSystem> {
    let d = problem.dimension();
    let lambda = (d - 1) as f64 + 1.0 / problem.target_mean_transit;
    let b = DMatrix::from_fn(d, d, |i, j| if i == j { -lambda } else { 1.0 });
    Ok(CompartmentalSystem::new(problem.input.clone(), b)?
        .labeled(format!("maxent d={d} E[T]={}", problem.target_mean_transit)))
}

/// Systems with a given positive steady-state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateConstraintProblem {
    pub target_steady_state: DVector<f64>,
}

impl SteadyStateConstraintProblem {
    pub fn new(target_steady_state: DVector<f64>) -> Result<Self> {
        if target_steady_state.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if let Some((j, x)) = target_steady_state.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::NonpositiveTarget(format!("x*[{}] = {x}", j + 1)));
        }
        Ok(SteadyStateConstraintProblem { target_steady_state })
    }
}

/// The input that makes `x*` the steady state of the steady-state
/// maximiser: `u = -B x*`, which works out to `sqrt(x*)` componentwise.
pub fn implied_input(x_star: &DVector<f64>) -> DVector<f64> {
    x_star.map(f64::sqrt)
}

/// `B_ij = sqrt(x_i / x_j)` off the diagonal and `z_j = 1 / sqrt(x_j)`,
/// driven by [`implied_input`].
pub fn maxent_fixed_steady_state(problem: &SteadyStateConstraintProblem) -> Result<CompartmentalSystem> {
    let x = &problem.target_steady_state;
    let d = x.len();
    let b = DMatrix::from_fn(d, d, |i, j| {
        if i != j {
            (x[i] / x[j]).sqrt()
        } else {
            -(0..d).filter(|&k| k != j).map(|k| (x[k] / x[j]).sqrt()).sum::<f64>() - 1.0 / x[j].sqrt()
        }
    });
    CompartmentalSystem::new(implied_input(x), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::mean_transit_time;

    #[test]
    fn one_pool_transit_maximiser() {
        let p = TransitConstraintProblem::new(DVector::from_vec(vec![2.0]), 4.0).unwrap();
        let s = maxent_fixed_transit(&p).unwrap();
        assert_eq!(s.matrix()[(0, 0)], -0.25);
    }

    #[test]
    fn three_pool_transit_maximiser() {
        let p = TransitConstraintProblem::new(DVector::from_vec(vec![1.0, 0.0, 0.0]), 1.0).unwrap();
        let s = maxent_fixed_transit(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.matrix()[(i, j)], if i == j { -3.0 } else { 1.0 });
            }
        }
        assert!((mean_transit_time(&s).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.output_rates().as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn transit_problem_rejects_bad_targets() {
        assert!(TransitConstraintProblem::new(DVector::from_vec(vec![1.0]), 0.0).is_err());
        assert!(TransitConstraintProblem::new(DVector::from_vec(vec![0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn steady_state_maximiser_examples() {
        let s =
            maxent_fixed_steady_state(&SteadyStateConstraintProblem::new(DVector::from_vec(vec![1.0, 1.0])).unwrap())
                .unwrap();
        assert_eq!(s.matrix().as_slice(), &[-2.0, 1.0, 1.0, -2.0]);
        assert_eq!(s.output_rates().as_slice(), &[1.0, 1.0]);

        let x = DVector::from_vec(vec![4.0, 1.0]);
        let s = maxent_fixed_steady_state(&SteadyStateConstraintProblem::new(x.clone()).unwrap()).unwrap();
        assert_eq!(s.matrix()[(1, 0)], 0.5);
        assert_eq!(s.matrix()[(0, 1)], 2.0);
        assert_eq!(s.output_rates().as_slice(), &[0.5, 1.0]);
        let ss = s.steady_state().unwrap();
        assert!((ss.x_star - &x).amax() < 1e-12);
        assert!((s.matrix() * &x + s.input()).amax() < 1e-12);
    }

    #[test]
    fn reciprocity() {
        let x = DVector::from_vec(vec![3.0, 0.5, 7.0, 1.25]);
        let s = maxent_fixed_steady_state(&SteadyStateConstraintProblem::new(x).unwrap()).unwrap();
        let b = s.matrix();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((b[(i, j)] * b[(j, i)] - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn nonpositive_target_is_rejected() {
        let err = SteadyStateConstraintProblem::new(DVector::from_vec(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::NonpositiveTarget(_)));
    }
}
