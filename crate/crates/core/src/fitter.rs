//! Fitting a shape model to a binary mask by minimising the Dice loss
//! over shape weights and pose with the hybrid particle swarm.

use alloc::vec::Vec;

use crate::math::{cbrt, sqrt};
use crate::mesh::faces_are_closed;
use crate::metrics::dsc;
use crate::pso::{optimize, Bounds, Evaluator, PsoError, Sequential, SwarmConfig};
use crate::shape_model::{FitParams, PoseParams, ShapeModel, ShapeModelError};
use crate::volume::{BinaryVolume, GridSpec};
use crate::voxelize::voxelize_closed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("target mask is empty")]
    EmptyTarget,
    #[error("model surface is not closed, so candidates cannot be voxelized")]
    OpenSurface,
    #[error(transparent)]
    Swarm(#[from] PsoError),
    #[error(transparent)]
    Model(#[from] ShapeModelError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub params: FitParams,
    /// Final Dice loss.
    pub fitness: f64,
    pub dsc: f64,
    pub iterations_run: usize,
    /// Swarm-best Dice loss after initialisation and after each iteration.
    pub fitness_trace: Vec<f64>,
    pub seed: u64,
}

/// `1 - DSC` between the voxelized model instance and `target`.
///
/// Never fails: a candidate that cannot be instantiated or voxelized, or a
/// grid that does not match the target, scores the worst loss of 1 and is
/// logged. Two empty masks also score 1.
pub fn dice_loss(params: &FitParams, model: &ShapeModel, target: &BinaryVolume, grid: &GridSpec) -> f64 {
    if grid != target.grid() {
        log::warn!("dice_loss: evaluation grid differs from the target grid");
        return 1.0;
    }
    if !faces_are_closed(model.faces()) {
        log::warn!("dice_loss: model surface is not closed");
        return 1.0;
    }
    loss_closed(params, model, target)
}

/// [`dice_loss`] for a model whose faces are known to be closed.
fn loss_closed(params: &FitParams, model: &ShapeModel, target: &BinaryVolume) -> f64 {
    let mesh = match model.instantiate(params) {
        Ok(m) => m,
        Err(e) => {
            log::warn!("dice_loss: cannot instantiate candidate: {e}");
            return 1.0;
        }
    };
    let candidate = voxelize_closed(&mesh, target.grid());
    if candidate.is_empty() && target.is_empty() {
        return 1.0;
    }
    1.0 - dsc(&candidate, target).expect("same grid")
}

/// Starting pose that matches the mean shape's centre and volume to the
/// target, with scale clamped to the configured range.
pub fn initial_pose(model: &ShapeModel, target: &BinaryVolume, config: &SwarmConfig) -> Option<PoseParams> {
    let centroid = target.centroid()?;
    let mean_volume = model.mean_mesh().enclosed_volume();
    let [lo, hi] = config.pose_bounds.scale;
    let scale = if mean_volume > 0.0 {
        cbrt(target.foreground_volume() / mean_volume).clamp(lo, hi)
    } else {
        1.0f64.clamp(lo, hi)
    };
    Some(PoseParams {
        translation: centroid - model.center(),
        rotation: [0.0; 3],
        scale,
    })
}

/// Search box: shape weights within `bound_k` standard deviations, pose
/// bounds with translation measured from `seed`.
pub fn search_bounds(model: &ShapeModel, seed: &PoseParams, config: &SwarmConfig) -> Result<Bounds, PsoError> {
    let mut lower = Vec::with_capacity(model.mode_count() + 7);
    let mut upper = Vec::with_capacity(model.mode_count() + 7);
    for l in model.eigenvalues() {
        let r = config.bound_k * sqrt(*l);
        lower.push(-r);
        upper.push(r);
    }
    let pb = &config.pose_bounds;
    for a in 0..3 {
        lower.push(seed.translation[a] + pb.translation[a][0]);
        upper.push(seed.translation[a] + pb.translation[a][1]);
    }
    for r in &pb.rotation {
        lower.push(r[0]);
        upper.push(r[1]);
    }
    lower.push(pb.scale[0]);
    upper.push(pb.scale[1]);
    Bounds::new(lower, upper)
}

/// Fits `model` to `target` on the target's grid, evaluating on the
/// calling thread.
pub fn fit(model: &ShapeModel, target: &BinaryVolume, config: &SwarmConfig) -> Result<FitResult, FitError> {
    fit_with(model, target, config, &Sequential)
}

/// [`fit`] with a caller-supplied evaluator. The result does not depend on
/// the evaluator.
pub fn fit_with(
    model: &ShapeModel,
    target: &BinaryVolume,
    config: &SwarmConfig,
    evaluator: &dyn Evaluator,
) -> Result<FitResult, FitError> {
    config.validate()?;
    if !faces_are_closed(model.faces()) {
        return Err(FitError::OpenSurface);
    }
    let seed_pose = initial_pose(model, target, config).ok_or(FitError::EmptyTarget)?;
    let bounds = search_bounds(model, &seed_pose, config)?;
    let seed = FitParams {
        shape_weights: alloc::vec![0.0; model.mode_count()],
        pose: seed_pose,
    };
    let objective = |x: &[f64]| loss_closed(&FitParams::from_vector(x), model, target);
    let run = optimize(objective, &bounds, config, evaluator, &[seed.to_vector()])?;
    Ok(FitResult {
        params: FitParams::from_vector(&run.best_position),
        fitness: run.best_fitness,
        dsc: 1.0 - run.best_fitness,
        iterations_run: run.iterations_run,
        fitness_trace: run.fitness_trace,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::metrics::dsc;
    use crate::synth::{grid_around, icosphere, make_target, make_templates, SynthConfig};
    use crate::voxelize::voxelize;

    fn small_model() -> ShapeModel {
        let cfg = SynthConfig { template_count: 6, subdivisions: 2, seed: 4, ..Default::default() };
        ShapeModel::build(&make_templates(&cfg).unwrap(), 0.9).unwrap()
    }

    fn fast_config(seed: u64) -> SwarmConfig {
        SwarmConfig { swarm_size: 12, max_iterations: 15, seed, ..Default::default() }
    }

    #[test]
    fn loss_matches_metric_dsc() {
        let model = small_model();
        let grid = grid_around(&model.mean_mesh(), 1.0, 6.0).unwrap();
        let (target, truth) = make_target(&model, &alloc::vec![0.0; model.mode_count()], PoseParams::IDENTITY, &grid).unwrap();
        assert_eq!(dice_loss(&truth, &model, &target, &grid), 0.0);

        let mut params = FitParams::identity(model.mode_count());
        params.pose.translation = Vec3::new(2.0, -1.0, 0.5);
        params.pose.scale = 0.9;
        let voxels = voxelize(&model.instantiate(&params).unwrap(), &grid).unwrap();
        let expected = 1.0 - dsc(&voxels, &target).unwrap();
        assert_eq!(dice_loss(&params, &model, &target, &grid), expected);

        params.pose.translation = Vec3::new(500.0, 0.0, 0.0);
        assert_eq!(dice_loss(&params, &model, &target, &grid), 1.0);

        let empty = BinaryVolume::zeros(grid).unwrap();
        assert_eq!(dice_loss(&params, &model, &empty, &grid), 1.0);
        let other = GridSpec::new([4; 3], [1.0; 3], [0.0; 3]).unwrap();
        assert_eq!(dice_loss(&truth, &model, &target, &other), 1.0);
    }

    #[test]
    fn fit_is_deterministic_and_monotone() {
        let model = small_model();
        let grid = grid_around(&model.mean_mesh(), 1.0, 8.0).unwrap();
        let mut pose = PoseParams::IDENTITY;
        pose.translation = Vec3::new(1.5, 0.0, -1.0);
        let (target, _) = make_target(&model, &alloc::vec![0.0; model.mode_count()], pose, &grid).unwrap();
        let a = fit(&model, &target, &fast_config(7)).unwrap();
        let b = fit(&model, &target, &fast_config(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.fitness_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(a.fitness, *a.fitness_trace.last().unwrap());
        assert!((0.0..=1.0).contains(&a.dsc));
        assert!(a.dsc > 0.9, "{}", a.dsc);
    }

    #[test]
    fn zero_iterations_keeps_initial_population() {
        let model = small_model();
        let grid = grid_around(&model.mean_mesh(), 1.0, 6.0).unwrap();
        let (target, _) = make_target(&model, &alloc::vec![0.0; model.mode_count()], PoseParams::IDENTITY, &grid).unwrap();
        let cfg = SwarmConfig { max_iterations: 0, ..fast_config(1) };
        let r = fit(&model, &target, &cfg).unwrap();
        assert_eq!(r.fitness_trace.len(), 1);
        assert_eq!(r.iterations_run, 0);
    }

    #[test]
    fn pose_only_model_still_fits() {
        let sphere = icosphere(2).scaled(8.0);
        let model = ShapeModel::build(&[sphere.clone(), sphere], 0.9).unwrap();
        assert_eq!(model.mode_count(), 0);
        let grid = grid_around(&model.mean_mesh(), 1.0, 6.0).unwrap();
        let mut pose = PoseParams::IDENTITY;
        pose.translation = Vec3::new(2.0, 0.0, 0.0);
        let (target, _) = make_target(&model, &[], pose, &grid).unwrap();
        let r = fit(&model, &target, &fast_config(3)).unwrap();
        assert_eq!(r.params.shape_weights.len(), 0);
        assert!(r.dsc > 0.9);
    }

    #[test]
    fn empty_target_is_an_error() {
        let model = small_model();
        let grid = grid_around(&model.mean_mesh(), 1.0, 6.0).unwrap();
        let empty = BinaryVolume::zeros(grid).unwrap();
        assert_eq!(fit(&model, &empty, &fast_config(0)), Err(FitError::EmptyTarget));
    }
}
