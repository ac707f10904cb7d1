//! Reinforced memory management for class-incremental learning.
//!
//! A class-incremental learner holds a fixed sample budget per phase, split
//! between replay exemplars of old classes and incoming new-class data. This
//! crate learns that split instead of freezing it: a hierarchical two-level
//! REINFORCE policy picks the exemplar/new-data ratio each phase (level 1)
//! and the share of exemplar memory given to the harder half of each old
//! phase's classes (level 2). The policy trains on generated pseudo tasks --
//! downsized replicas built from legally accessible data -- and transfers
//! zero-shot to target tasks.
//!
//! Modules follow the pipeline: [`memory`] does exact integer budget
//! accounting, [`policy`] holds the networks and gradient machinery,
//! [`classifier`] is the incremental model the environment trains,
//! [`env`] runs episodes, [`taskgen`] provisions datasets and pseudo tasks,
//! and [`trainer`] drives the epoch loop, evaluation, and ablations.
//!
//! All floating-point math is generic over [`Real`] (`f32` or `f64`);
//! budget arithmetic uses exact rationals and never touches floats.

pub mod checkpoint;
pub mod classifier;
pub mod env;
pub mod error;
pub mod memory;
pub mod policy;
pub mod scalar;
pub mod seeding;
pub mod taskgen;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete `f64` aliases, the types the CLI works with.
pub type Policy64 = policy::PolicyParams<f64>;
pub type Classifier64 = classifier::ClassifierState<f64>;
pub type Task64 = env::CilTaskSpec<f64>;
pub type Trajectory64 = env::Trajectory<f64>;
pub type Dataset64 = taskgen::DatasetSource<f64>;
pub type Checkpoint64 = checkpoint::Checkpoint<f64>;

/// Concrete `f32` aliases.
pub type Policy32 = policy::PolicyParams<f32>;
pub type Classifier32 = classifier::ClassifierState<f32>;
pub type Task32 = env::CilTaskSpec<f32>;
pub type Trajectory32 = env::Trajectory<f32>;
pub type Dataset32 = taskgen::DatasetSource<f32>;
pub type Checkpoint32 = checkpoint::Checkpoint<f32>;
