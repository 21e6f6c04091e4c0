use rayon::prelude::*;
use shapefit_core::Evaluator;

/// Evaluates swarm positions on a dedicated rayon pool.
pub struct RayonEvaluator {
    pool: rayon::ThreadPool,
}

impl RayonEvaluator {
    /// `threads = 0` lets rayon pick the number of threads.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn pool(&self) -> &rayon::ThreadPool {
        &self.pool
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Evaluator for RayonEvaluator {
    fn evaluate(&self, objective: &(dyn Fn(&[f64]) -> f64 + Sync), positions: &[Vec<f64>]) -> Vec<f64> {
        self.pool.install(|| positions.par_iter().map(|x| objective(x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shapefit_core::{optimize, Bounds, Sequential, SwarmConfig};

    #[test]
    fn matches_sequential() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum::<f64>();
        let bounds = Bounds::uniform(4, -5.0, 5.0).unwrap();
        let cfg = SwarmConfig { seed: 9, max_iterations: 50, ..Default::default() };
        let seq = optimize(f, &bounds, &cfg, &Sequential, &[]).unwrap();
        for threads in [1, 3, 8] {
            let par = optimize(f, &bounds, &cfg, &RayonEvaluator::new(threads).unwrap(), &[]).unwrap();
            assert_eq!(par, seq);
        }
    }
}
