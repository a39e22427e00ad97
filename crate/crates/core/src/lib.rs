//! Color image enhancement with the multiscale retinex family.
//!
//! The crate provides single- and multi-scale retinex, the classic color
//! restoration variant (MSRCR) and the modified color restoration variant
//! (MSRMCR), an entropy/edge fitness criterion, a particle swarm tuner that
//! searches the enhancement parameters per image, a Haar wavelet-energy
//! quality metric and a histogram-equalization baseline.
//!
//! ```no_run
//! use retinex_pso::{image_io, pso::{self, SwarmConfig}, retinex::Variant};
//!
//! let img = image_io::load_image("office.tif").unwrap();
//! let img = image_io::resize_bilinear(&img, 256, 256).unwrap();
//! let result = pso::tune(
//!     &img,
//!     Variant::Msrmcr,
//!     &pso::ParamBounds::for_variant(Variant::Msrmcr),
//!     &SwarmConfig::for_variant(Variant::Msrmcr),
//!     &Default::default(),
//! )
//! .unwrap();
//! println!("{:?}", result.best_params);
//! ```

pub mod baselines;
pub mod cli;
pub mod error;
pub mod image_io;
pub mod objective;
pub mod pso;
pub mod retinex;
pub mod synthetic;
pub mod we_metric;

pub use error::{Error, Result};
pub use image_io::{GrayImage, Plane, RgbImage};
