//! Built-in test objectives, keyed by string id in run configs.

use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Sphere,
    Rosenbrock,
    Rastrigin,
    Ackley,
    /// Constant zero; useful for exercising the pure consensus dynamics.
    Constant,
}

impl Objective {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sphere" => Some(Objective::Sphere),
            "rosenbrock" => Some(Objective::Rosenbrock),
            "rastrigin" => Some(Objective::Rastrigin),
            "ackley" => Some(Objective::Ackley),
            "constant" => Some(Objective::Constant),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::Sphere => "sphere",
            Objective::Rosenbrock => "rosenbrock",
            Objective::Rastrigin => "rastrigin",
            Objective::Ackley => "ackley",
            Objective::Constant => "constant",
        }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        let n = x.len();
        match self {
            Objective::Sphere => x.iter().map(|v| v * v).sum(),
            Objective::Rosenbrock => {
                let mut s = 0.0;
                for i in 0..n.saturating_sub(1) {
                    let a = x[i + 1] - x[i] * x[i];
                    let b = 1.0 - x[i];
                    s += 100.0 * a * a + b * b;
                }
                s
            }
            Objective::Rastrigin => {
                10.0 * n as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                        .sum::<f64>()
            }
            Objective::Ackley => {
                let inv_n = 1.0 / n as f64;
                let sq = x.iter().map(|v| v * v).sum::<f64>() * inv_n;
                let cs = x
                    .iter()
                    .map(|v| (2.0 * std::f64::consts::PI * v).cos())
                    .sum::<f64>()
                    * inv_n;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + std::f64::consts::E
            }
            Objective::Constant => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optima_at_expected_points() {
        let zero2 = Vector::zeros(2);
        assert_eq!(Objective::Sphere.eval(&zero2), 0.0);
        assert_eq!(Objective::Rastrigin.eval(&zero2), 0.0);
        assert!(Objective::Ackley.eval(&zero2).abs() < 1e-12);
        let ones = Vector::from_element(3, 1.0);
        assert_eq!(Objective::Rosenbrock.eval(&ones), 0.0);
    }
}
