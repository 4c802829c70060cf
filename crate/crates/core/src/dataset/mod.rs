//! Random cylinder scenes, rasterization and on-disk dataset splits.

mod generate;
mod scene;

pub use generate::{
    generate_dataset, generate_split, noise_seed, DatasetBundle, DatasetManifest, DatasetSizes, Split,
    FULL_SCALE_TRAIN, SPLIT_STRIDE,
};
pub use scene::{
    random_scene, rasterize, Cylinder, SceneParams, SceneSpec, CONTRAST_RANGE, MAX_ATTEMPTS, MAX_TARGETS,
};
