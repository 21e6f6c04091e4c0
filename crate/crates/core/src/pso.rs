//! Hybrid global-best / local-best particle swarm optimisation.
//!
//! Velocity update for particle `i`:
//!
//! ```text
//! v <- w v + c1 r1 (p_i - x) + c2 r2 [alpha (p_g - x) + (1 - alpha) (p_l - x)]
//! x <- x + v
//! ```
//!
//! where `p_i` is the particle's own best, `p_g` the swarm best and `p_l`
//! the best within a ring neighbourhood of the particle index. `alpha = 1`
//! is plain global-best PSO, `alpha = 0` plain local-best.
//!
//! All random numbers are drawn on the calling thread in particle order,
//! and fitness values are consumed in particle order, so results depend
//! only on the seed, never on how an [`Evaluator`] schedules work.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PsoError {
    #[error("invalid swarm config: {0}")]
    BadConfig(&'static str),
    #[error("invalid bounds: {0}")]
    BadBounds(&'static str),
}

/// How the random factors `r1`, `r2` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RandomMode {
    /// Fresh draws for every particle and every dimension.
    #[default]
    PerDimension,
    /// One draw per particle, shared by all dimensions.
    Scalar,
}

/// Search box for the seven pose parameters. Translation limits are
/// offsets from the centroid-aligned starting pose; rotation and scale are
/// absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PoseBounds {
    /// Per-axis `[min, max]` offsets, mm.
    pub translation: [[f64; 2]; 3],
    /// Per-axis `[min, max]`, radians.
    pub rotation: [[f64; 2]; 3],
    pub scale: [f64; 2],
}

impl Default for PoseBounds {
    fn default() -> Self {
        Self {
            translation: [[-15.0, 15.0]; 3],
            rotation: [[-0.35, 0.35]; 3],
            scale: [0.8, 1.25],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SwarmConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    /// Inertia weight, in [0, 1].
    pub w: f64,
    /// Acceleration towards the personal best, `c1`.
    pub c1: f64,
    /// Acceleration towards the blended global/local best, `c2`.
    pub c2: f64,
    /// Blend `alpha` between global best (1) and local best (0).
    pub alpha: f64,
    /// Ring neighbourhood half-width for the local best.
    pub neighborhood_radius: usize,
    /// Shape weight `j` is bounded by `bound_k * sqrt(lambda_j)`.
    pub bound_k: f64,
    pub pose_bounds: PoseBounds,
    /// Velocity limit per dimension as a fraction of that dimension's range.
    pub velocity_clamp_fraction: f64,
    pub seed: u64,
    /// Stop after this many consecutive iterations without relative
    /// improvement above `stall_tolerance`; 0 disables the check.
    pub stall_iterations: usize,
    pub stall_tolerance: f64,
    pub random_mode: RandomMode,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            swarm_size: 40,
            max_iterations: 200,
            w: 0.7298,
            c1: 1.49618,
            c2: 1.49618,
            alpha: 0.5,
            neighborhood_radius: 2,
            bound_k: 3.0,
            pose_bounds: PoseBounds::default(),
            velocity_clamp_fraction: 0.2,
            seed: 0,
            stall_iterations: 30,
            stall_tolerance: 1e-4,
            random_mode: RandomMode::PerDimension,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.swarm_size < 2 {
            return Err(PsoError::BadConfig("swarm_size must be at least 2"));
        }
        if !unit(self.w) {
            return Err(PsoError::BadConfig("w must lie in [0, 1]"));
        }
        if !unit(self.alpha) {
            return Err(PsoError::BadConfig("alpha must lie in [0, 1]"));
        }
        if !(self.c1 >= 0.0 && self.c1.is_finite() && self.c2 >= 0.0 && self.c2.is_finite()) {
            return Err(PsoError::BadConfig("acceleration constants must be finite and non-negative"));
        }
        if self.neighborhood_radius < 1 {
            return Err(PsoError::BadConfig("neighborhood_radius must be at least 1"));
        }
        if !(self.velocity_clamp_fraction > 0.0 && self.velocity_clamp_fraction.is_finite()) {
            return Err(PsoError::BadConfig("velocity_clamp_fraction must be positive"));
        }
        if !(self.bound_k >= 0.0 && self.bound_k.is_finite()) {
            return Err(PsoError::BadConfig("bound_k must be non-negative"));
        }
        if !(self.stall_tolerance >= 0.0) {
            return Err(PsoError::BadConfig("stall_tolerance must be non-negative"));
        }
        let pb = &self.pose_bounds;
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !pb.translation.iter().chain(pb.rotation.iter()).all(|r| ordered(*r)) || !ordered(pb.scale) {
            return Err(PsoError::BadConfig("pose bounds must be finite with min <= max"));
        }
        if !(pb.scale[0] > 0.0) {
            return Err(PsoError::BadConfig("scale bounds must be positive"));
        }
        Ok(())
    }
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, PsoError> {
        if lower.len() != upper.len() {
            return Err(PsoError::BadBounds("lower and upper differ in length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
            return Err(PsoError::BadBounds("each dimension needs finite min <= max"));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval in every dimension.
    pub fn uniform(dims: usize, lower: f64, upper: f64) -> Result<Self, PsoError> {
        Self::new(vec![lower; dims], vec![upper; dims])
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| v >= l && v <= u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

/// Runs an objective over a batch of positions. Implementations may
/// evaluate in parallel but must return values in input order.
pub trait Evaluator {
    fn evaluate(&self, objective: &(dyn Fn(&[f64]) -> f64 + Sync), positions: &[Vec<f64>]) -> Vec<f64>;
}

/// Evaluates on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Evaluator for Sequential {
    fn evaluate(&self, objective: &(dyn Fn(&[f64]) -> f64 + Sync), positions: &[Vec<f64>]) -> Vec<f64> {
        positions.iter().map(|x| objective(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

/// NaN fitness ranks worst.
#[inline]
fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    best: usize,
    rng: ChaCha8Rng,
    iteration: usize,
}

impl Swarm {
    /// Random positions in `bounds`, random velocities within the clamp.
    /// `seeds` replace the positions of the first particles.
    pub fn initialize<F>(
        objective: &F,
        bounds: &Bounds,
        config: &SwarmConfig,
        seeds: &[Vec<f64>],
        evaluator: &dyn Evaluator,
    ) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let vmax = velocity_limits(bounds, config);
        let mut positions = Vec::with_capacity(config.swarm_size);
        let mut velocities = Vec::with_capacity(config.swarm_size);
        for _ in 0..config.swarm_size {
            let x: Vec<f64> = (0..bounds.dims())
                .map(|d| {
                    let (l, u) = (bounds.lower[d], bounds.upper[d]);
                    if u > l {
                        rng.random_range(l..=u)
                    } else {
                        l
                    }
                })
                .collect();
            let v: Vec<f64> = vmax
                .iter()
                .map(|&m| if m > 0.0 { rng.random_range(-m..=m) } else { 0.0 })
                .collect();
            positions.push(x);
            velocities.push(v);
        }
        for (slot, seed) in positions.iter_mut().zip(seeds) {
            slot.clone_from(seed);
            bounds.clamp(slot);
        }
        let fitness = evaluator.evaluate(objective, &positions);
        let particles = positions
            .into_iter()
            .zip(velocities)
            .zip(fitness)
            .map(|((position, velocity), f)| Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_fitness: sanitize(f),
            })
            .collect();
        Self::from_particles(particles, rng)
    }

    /// Assembles a swarm from explicit particle states.
    pub fn from_particles(particles: Vec<Particle>, rng: ChaCha8Rng) -> Self {
        assert!(!particles.is_empty(), "a swarm needs at least one particle");
        let mut s = Self {
            particles,
            best: 0,
            rng,
            iteration: 0,
        };
        s.best = s.argmin_best(0..s.particles.len());
        s
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn best_position(&self) -> &[f64] {
        &self.particles[self.best].best_position
    }

    pub fn best_fitness(&self) -> f64 {
        self.particles[self.best].best_fitness
    }

    fn argmin_best(&self, indices: impl Iterator<Item = usize>) -> usize {
        let mut best: Option<usize> = None;
        for i in indices {
            let better = match best {
                None => true,
                Some(b) => {
                    let (fi, fb) = (self.particles[i].best_fitness, self.particles[b].best_fitness);
                    fi < fb || (fi == fb && i < b)
                }
            };
            if better {
                best = Some(i);
            }
        }
        best.expect("non-empty neighbourhood")
    }

    /// Index of the best personal best among particles within `radius`
    /// ring positions of `i`, including `i`.
    pub fn local_best(&self, i: usize, radius: usize) -> usize {
        let n = self.particles.len();
        if 2 * radius + 1 >= n {
            return self.best;
        }
        self.argmin_best((0..=2 * radius).map(|o| (i + n + o - radius) % n))
    }
}

fn velocity_limits(bounds: &Bounds, config: &SwarmConfig) -> Vec<f64> {
    bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(l, u)| config.velocity_clamp_fraction * (u - l))
        .collect()
}

/// One synchronous swarm iteration: all particles move using the bests of
/// the previous iteration, then every new position is evaluated and the
/// personal and swarm bests are updated.
pub fn pso_step<F>(swarm: &mut Swarm, bounds: &Bounds, config: &SwarmConfig, objective: &F, evaluator: &dyn Evaluator)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = swarm.particles.len();
    let dims = bounds.dims();
    let vmax = velocity_limits(bounds, config);
    let local: Vec<usize> = (0..n).map(|i| swarm.local_best(i, config.neighborhood_radius)).collect();
    let global = swarm.best_position().to_vec();
    let alpha = config.alpha;

    // Draw every random factor up front, in particle order.
    let mut r1 = vec![0.0; n * dims];
    let mut r2 = vec![0.0; n * dims];
    for i in 0..n {
        match config.random_mode {
            RandomMode::PerDimension => {
                for d in 0..dims {
                    r1[i * dims + d] = swarm.rng.random::<f64>();
                }
                for d in 0..dims {
                    r2[i * dims + d] = swarm.rng.random::<f64>();
                }
            }
            RandomMode::Scalar => {
                let (a, b) = (swarm.rng.random::<f64>(), swarm.rng.random::<f64>());
                r1[i * dims..(i + 1) * dims].fill(a);
                r2[i * dims..(i + 1) * dims].fill(b);
            }
        }
    }

    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        let lbest = swarm.particles[local[i]].best_position.clone();
        let p = &mut swarm.particles[i];
        for d in 0..dims {
            let x = p.position[d];
            let attraction = alpha * (global[d] - x) + (1.0 - alpha) * (lbest[d] - x);
            let mut v = config.w * p.velocity[d]
                + config.c1 * r1[i * dims + d] * (p.best_position[d] - x)
                + config.c2 * r2[i * dims + d] * attraction;
            v = v.clamp(-vmax[d], vmax[d]);
            let mut nx = x + v;
            if nx < bounds.lower[d] {
                nx = bounds.lower[d];
                v = 0.0;
            } else if nx > bounds.upper[d] {
                nx = bounds.upper[d];
                v = 0.0;
            }
            p.velocity[d] = v;
            p.position[d] = nx;
        }
        positions.push(p.position.clone());
    }

    let fitness = evaluator.evaluate(objective, &positions);
    for (p, f) in swarm.particles.iter_mut().zip(fitness) {
        let f = sanitize(f);
        if f < p.best_fitness {
            p.best_fitness = f;
            p.best_position.clone_from(&p.position);
        }
    }
    swarm.best = swarm.argmin_best(0..n);
    swarm.iteration += 1;
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Swarm-best fitness after initialisation and after every iteration.
    pub fitness_trace: Vec<f64>,
    pub iterations_run: usize,
}

/// Minimises `objective` over `bounds`.
pub fn optimize<F>(
    objective: F,
    bounds: &Bounds,
    config: &SwarmConfig,
    evaluator: &dyn Evaluator,
    seeds: &[Vec<f64>],
) -> Result<OptimizeResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if seeds.iter().any(|s| s.len() != bounds.dims()) {
        return Err(PsoError::BadBounds("seed position has the wrong dimension"));
    }
    let mut swarm = Swarm::initialize(&objective, bounds, config, seeds, evaluator);
    let mut trace = vec![swarm.best_fitness()];
    let mut stalled = 0usize;
    while swarm.iteration() < config.max_iterations {
        let previous = swarm.best_fitness();
        pso_step(&mut swarm, bounds, config, &objective, evaluator);
        let current = swarm.best_fitness();
        trace.push(current);
        if config.stall_iterations > 0 {
            let improvement = previous - current;
            if improvement <= config.stall_tolerance * previous.abs() {
                stalled += 1;
                if stalled >= config.stall_iterations {
                    break;
                }
            } else {
                stalled = 0;
            }
        }
    }
    Ok(OptimizeResult {
        best_position: swarm.best_position().to_vec(),
        best_fitness: swarm.best_fitness(),
        fitness_trace: trace,
        iterations_run: swarm.iteration(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn particle(x: Vec<f64>, v: Vec<f64>, best: Vec<f64>, f: f64) -> Particle {
        Particle { position: x, velocity: v, best_position: best, best_fitness: f }
    }

    #[test]
    fn zero_coefficients_freeze_positions() {
        let cfg = SwarmConfig { w: 0.0, c1: 0.0, c2: 0.0, ..Default::default() };
        let bounds = Bounds::uniform(2, -5.0, 5.0).unwrap();
        let parts = vec![
            particle(vec![1.0, 2.0], vec![0.5, -0.5], vec![0.0, 0.0], 0.0),
            particle(vec![-1.0, 3.0], vec![1.0, 1.0], vec![-1.0, 3.0], 10.0),
        ];
        let mut s = Swarm::from_particles(parts, ChaCha8Rng::seed_from_u64(1));
        pso_step(&mut s, &bounds, &cfg, &sphere, &Sequential);
        assert_eq!(s.particles()[0].position, vec![1.0, 2.0]);
        assert_eq!(s.particles()[1].position, vec![-1.0, 3.0]);
        assert!(s.particles().iter().all(|p| p.velocity.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn particle_at_all_bests_is_a_fixed_point() {
        let cfg = SwarmConfig { w: 0.0, ..Default::default() };
        let bounds = Bounds::uniform(3, -5.0, 5.0).unwrap();
        let x = vec![0.5, -1.0, 2.0];
        let parts = vec![particle(x.clone(), vec![1.0, 1.0, 1.0], x.clone(), sphere(&x))];
        let mut s = Swarm::from_particles(parts, ChaCha8Rng::seed_from_u64(9));
        pso_step(&mut s, &bounds, &cfg, &sphere, &Sequential);
        assert_eq!(s.particles()[0].position, x);
        assert_eq!(s.particles()[0].velocity, vec![0.0; 3]);
    }

    #[test]
    fn pure_global_blend_ignores_local_best() {
        // alpha = 1: moving the local best must not change the update.
        let cfg = SwarmConfig { alpha: 1.0, neighborhood_radius: 1, ..Default::default() };
        let bounds = Bounds::uniform(1, -10.0, 10.0).unwrap();
        let make = |other: f64| {
            let parts = vec![
                particle(vec![0.0], vec![0.0], vec![0.0], 5.0),
                particle(vec![1.0], vec![0.0], vec![1.0], 1.0),
                particle(vec![other], vec![0.0], vec![other], 3.0),
                particle(vec![4.0], vec![0.0], vec![4.0], 4.0),
                particle(vec![-4.0], vec![0.0], vec![-4.0], 4.5),
            ];
            let mut s = Swarm::from_particles(parts, ChaCha8Rng::seed_from_u64(5));
            pso_step(&mut s, &bounds, &cfg, &|_: &[f64]| 100.0, &Sequential);
            s.particles()[3].position[0]
        };
        assert_eq!(make(2.0), make(-3.0));
    }

    #[test]
    fn wide_ring_local_best_is_global_best() {
        let parts: Vec<Particle> = [3.0, 1.0, 2.0, 0.5, 4.0]
            .iter()
            .map(|&f| particle(vec![f], vec![0.0], vec![f], f))
            .collect();
        let s = Swarm::from_particles(parts, ChaCha8Rng::seed_from_u64(0));
        for i in 0..5 {
            assert_eq!(s.local_best(i, 5), 3);
        }
        assert_eq!(s.local_best(0, 1), 1);
        assert_eq!(s.local_best(4, 1), 3);
        assert_eq!(s.local_best(1, 1), 1);
    }

    #[test]
    fn sphere_converges() {
        let bounds = Bounds::uniform(5, -5.0, 5.0).unwrap();
        let cfg = SwarmConfig { seed: 3, ..Default::default() };
        let r = optimize(sphere, &bounds, &cfg, &Sequential, &[]).unwrap();
        assert!(sphere(&r.best_position).sqrt() < 1e-2);
    }

    #[test]
    fn rosenbrock_converges() {
        let bounds = Bounds::uniform(2, -5.0, 5.0).unwrap();
        let cfg = SwarmConfig { seed: 11, swarm_size: 60, max_iterations: 400, ..Default::default() };
        let r = optimize(rosenbrock, &bounds, &cfg, &Sequential, &[]).unwrap();
        assert!(r.best_fitness < 1e-2, "{}", r.best_fitness);
    }

    #[test]
    fn constant_objective_has_flat_trace() {
        let bounds = Bounds::uniform(3, -1.0, 1.0).unwrap();
        let r = optimize(|_: &[f64]| 2.5, &bounds, &SwarmConfig::default(), &Sequential, &[]).unwrap();
        assert!(r.fitness_trace.iter().all(|&f| f == 2.5));
        assert!(bounds.contains(&r.best_position));
        assert_eq!(r.iterations_run, 30, "stalls out");
    }

    #[test]
    fn zero_iterations_returns_initial_best() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let cfg = SwarmConfig { max_iterations: 0, ..Default::default() };
        let r = optimize(sphere, &bounds, &cfg, &Sequential, &[vec![0.1, 0.0]]).unwrap();
        assert_eq!(r.fitness_trace.len(), 1);
        assert_eq!(r.iterations_run, 0);
        assert!(r.best_fitness <= 0.01 + 1e-15);
    }

    #[test]
    fn scalar_mode_runs_and_differs() {
        let bounds = Bounds::uniform(4, -5.0, 5.0).unwrap();
        let base = SwarmConfig { seed: 2, max_iterations: 20, ..Default::default() };
        let a = optimize(sphere, &bounds, &base, &Sequential, &[]).unwrap();
        let b = optimize(sphere, &bounds, &SwarmConfig { random_mode: RandomMode::Scalar, ..base }, &Sequential, &[]).unwrap();
        assert_ne!(a.best_position, b.best_position);
    }

    #[test]
    fn config_validation() {
        assert!(SwarmConfig::default().validate().is_ok());
        assert!(SwarmConfig { swarm_size: 1, ..Default::default() }.validate().is_err());
        assert!(SwarmConfig { w: 1.5, ..Default::default() }.validate().is_err());
        assert!(SwarmConfig { alpha: -0.1, ..Default::default() }.validate().is_err());
        assert!(SwarmConfig { neighborhood_radius: 0, ..Default::default() }.validate().is_err());
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn trace_monotone_and_positions_bounded(seed in 0u64..1000, alpha in 0.0f64..=1.0) {
            let bounds = Bounds::new(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 3.0]).unwrap();
            let cfg = SwarmConfig { seed, alpha, max_iterations: 25, swarm_size: 8, ..Default::default() };
            let objective = |x: &[f64]| (x[0] - 3.0).powi(2) + x[1].sin() + (x[2] * 1.7).cos();
            let mut swarm = Swarm::initialize(&objective, &bounds, &cfg, &[], &Sequential);
            let mut last = swarm.best_fitness();
            for _ in 0..25 {
                pso_step(&mut swarm, &bounds, &cfg, &objective, &Sequential);
                prop_assert!(swarm.best_fitness() <= last);
                last = swarm.best_fitness();
                for p in swarm.particles() {
                    prop_assert!(bounds.contains(&p.position));
                }
            }
            let again = optimize(objective, &bounds, &SwarmConfig { stall_iterations: 0, ..cfg.clone() }, &Sequential, &[]).unwrap();
            let twice = optimize(objective, &bounds, &SwarmConfig { stall_iterations: 0, ..cfg }, &Sequential, &[]).unwrap();
            prop_assert_eq!(again, twice);
        }
    }
}
